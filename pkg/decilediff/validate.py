import dataclasses
import os.path
from typing import *

from omegaconf import OmegaConf, ListConfig, DictConfig
import pydantic
import pydantic.dataclasses

from .exceptions import ParameterValidationError, SchemaError, MissingFile
from .schema import Parameter

# dtypes naming paths: converted as str, then checked on disk
PATH_DTYPES = ("File", "Directory")

_DTYPES = dict(List=List, Dict=Dict, Optional=Optional, Tuple=Tuple, Any=Any,
               str=str, int=int, float=float, bool=bool, File=str, Directory=str)


def join_quote(values):
    return ", ".join(f"'{value}'" for value in values)


def resolve_dtype(schema: Parameter, qualname: str):
    """Turns a dtype string such as 'List[int]' into a typing annotation"""
    try:
        return eval(schema.dtype, dict(_DTYPES))
    except Exception:
        raise SchemaError(f"{qualname}: unsupported dtype '{schema.dtype}'")


def coerce(value: Any, dtype: str):
    """Brings command-line strings and OmegaConf containers into a shape pydantic accepts for dtype"""
    if isinstance(value, (ListConfig, DictConfig)):
        value = OmegaConf.to_container(value)
    if dtype.startswith("List["):
        if isinstance(value, str):
            # "1, 2,34" from the command line
            value = [item.strip() for item in value.split(",") if item.strip()]
        elif not isinstance(value, (list, tuple)):
            value = [value]
        if dtype == "List[str]":
            value = [str(item) for item in value]
    elif dtype in ("str",) + PATH_DTYPES and isinstance(value, (int, float)) and not isinstance(value, bool):
        # YAML reads year labels such as 2009 as numbers
        value = str(value)
    return value


def _convert(values: Dict[str, Any], schemas: Dict[str, Parameter], qualify: Callable[[str], str]) -> Dict[str, Any]:
    """Converts values to their schema dtypes through a pydantic dataclass built for this parameter set"""
    # dataclass fields can't contain "-"
    field_of = {name: name.replace("-", "_") for name in values}
    if len(set(field_of.values())) != len(field_of):
        raise SchemaError(f"{qualify('')}: parameter names clash once '-' is mapped to '_'")
    name_of = {field: name for name, field in field_of.items()}

    model = pydantic.dataclasses.dataclass(
        dataclasses.make_dataclass("CommandParameters",
                                   [(field_of[name], resolve_dtype(schemas[name], qualify(name))) for name in values]))
    try:
        instance = model(**{field_of[name]: coerce(value, schemas[name].dtype) for name, value in values.items()})
    except pydantic.ValidationError as exc:
        problems = []
        for err in exc.errors():
            field = str(err["loc"][0]) if err["loc"] else ""
            problems.append(f"'{qualify(name_of.get(field, field))}': {err['msg']}")
        raise ParameterValidationError("; ".join(problems))
    return {name_of[field]: value for field, value in dataclasses.asdict(instance).items()}


def _check_path(name: str, value: str, schema: Parameter, is_output: bool, qualify: Callable[[str], str]):
    must_exist = not is_output if schema.must_exist is None else schema.must_exist
    if not os.path.exists(value):
        if must_exist:
            raise MissingFile(qualify(name), value)
        return
    if schema.dtype == "File" and not os.path.isfile(value):
        raise ParameterValidationError(f"'{qualify(name)}': {value} is not a regular file")
    if schema.dtype == "Directory" and not os.path.isdir(value):
        raise ParameterValidationError(f"'{qualify(name)}': {value} is not a directory")


def validate_parameters(params: Dict[str, Any], schemas: Dict[str, Parameter],
                        fqname: str = "",
                        outputs: Optional[Iterable[str]] = None,
                        create_dirs=False,
                        ) -> Dict[str, Any]:
    """Validates parameter values of one command against its schemas.

    Unset values (None) are dropped, then schema defaults fill the gaps. Values are converted to their dtypes,
    checked against choices, and path parameters are checked on disk: inputs must exist, outputs (named in
    `outputs`) need not unless the schema says must_exist. With create_dirs, parent directories of
    mkdir parameters are created.

    Returns the validated values, keyed by parameter name. Parameters with neither value nor default are left out.

    Raises:
        ParameterValidationError: unknown, missing, unconvertible or out-of-choice value
        MissingFile: an input path does not exist
        SchemaError: a schema names an unsupported dtype
    """
    qualify = (lambda name: f"{fqname}.{name}" if name else fqname) if fqname else (lambda name: name)
    outputs = set(outputs or ())

    unknown = [qualify(name) for name in params if name not in schemas]
    if unknown:
        raise ParameterValidationError(f"unknown parameter(s) {join_quote(unknown)}")

    values = {name: value for name, value in params.items() if value is not None}
    for name, schema in schemas.items():
        if name not in values and schema.default is not None:
            values[name] = schema.default

    missing = [qualify(name) for name, schema in schemas.items() if schema.required and name not in values]
    if missing:
        raise ParameterValidationError(f"missing required parameters: {join_quote(missing)}")

    validated = _convert(values, schemas, qualify) if values else {}

    for name, value in validated.items():
        schema = schemas[name]
        if schema.choices and value not in schema.choices:
            raise ParameterValidationError(f"'{qualify(name)}': invalid value '{value}', expected one of "
                                           f"{join_quote(schema.choices)}")
        if schema.dtype in PATH_DTYPES:
            _check_path(name, value, schema, name in outputs, qualify)

    if create_dirs:
        for name, value in validated.items():
            parent = os.path.dirname(value) if schemas[name].mkdir else ""
            if parent:
                os.makedirs(parent, exist_ok=True)

    return validated
