"""Schemas for command parameters, loaded from the packaged commands.yml through OmegaConf"""
import os.path
from dataclasses import dataclass
from typing import Any, Dict, List, Optional

from omegaconf import OmegaConf
from omegaconf.errors import OmegaConfBaseException

from .basetypes import EmptyDictDefault, EmptyListDefault
from .exceptions import SchemaError

COMMANDS_FILE = os.path.join(os.path.dirname(__file__), "commands.yml")


@dataclass
class Parameter(object):
    """Parameter of a command"""
    info: str = ""
    # data type, as a Python type expression: str, int, float, bool, List[int], File, ...
    dtype: str = "str"
    # a value must be supplied (no default applies)
    required: bool = False
    # choices for an option-type parameter
    choices: List[Any] = EmptyListDefault()
    # used when no value is given on the command line or in --config
    default: Optional[Any] = None
    # for File parameters: if True, the file must exist. If None, inputs must exist and outputs needn't
    must_exist: Optional[bool] = None
    # create the parent directory of the path before the command runs
    mkdir: bool = False
    # metavar shown in --help
    metavar: Optional[str] = None


@dataclass
class CommandSchema(object):
    info: str = ""
    inputs: Dict[str, Parameter] = EmptyDictDefault()
    outputs: Dict[str, Parameter] = EmptyDictDefault()
    # names of shared parameter groups whose parameters are added to the inputs
    groups: List[str] = EmptyListDefault()

    def __post_init__(self):
        both = set(self.inputs) & set(self.outputs)
        if both:
            raise SchemaError(f"parameter(s) {sorted(both)} declared as both input and output")
        self._inputs_outputs = None

    @property
    def inputs_outputs(self) -> Dict[str, Parameter]:
        if self._inputs_outputs is None:
            self._inputs_outputs = {**self.inputs, **self.outputs}
        return self._inputs_outputs


def _group(conf, name: str, path: str) -> Dict[str, Parameter]:
    entry = conf.get("groups", {}).get(name)
    if entry is None:
        raise SchemaError(f"{path}: unknown parameter group '{name}'")
    return OmegaConf.to_object(OmegaConf.merge(OmegaConf.structured(CommandSchema), {"inputs": entry})).inputs


def load_command_schemas(path: str = COMMANDS_FILE) -> Dict[str, CommandSchema]:
    """Loads command schemas. A command's inputs are the parameters of the "common" group, then those of the
    groups it lists, then its own (later definitions win)"""
    try:
        conf = OmegaConf.load(path)
        schemas = {}
        for name, entry in conf.commands.items():
            schema = OmegaConf.to_object(OmegaConf.merge(OmegaConf.structured(CommandSchema), entry))
            inputs = {}
            for group in ["common"] + list(schema.groups):
                inputs.update(_group(conf, group, path))
            inputs.update(schema.inputs)
            schemas[name] = CommandSchema(schema.info, inputs, dict(schema.outputs))
    except OmegaConfBaseException as exc:
        raise SchemaError(f"{path}: {exc}")
    return schemas
