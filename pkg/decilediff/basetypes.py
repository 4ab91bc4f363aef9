from dataclasses import field
from collections import OrderedDict
from enum import Enum


def EmptyDictDefault():
    return field(default_factory=lambda:OrderedDict())


def EmptyListDefault():
    return field(default_factory=lambda:[])


class LabelledEnum(str, Enum):
    """String enum whose values double as command-line spellings (underscores shown as hyphens)"""

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        text = str(value).strip().lower().replace("-", "_")
        try:
            return cls(text)
        except ValueError:
            choices = ", ".join(member.cli_name for member in cls)
            from .exceptions import InvalidParameter
            raise InvalidParameter(f"invalid {cls.__name__.lower()} '{value}', expected one of: {choices}")

    @property
    def cli_name(self):
        return self.value.replace("_", "-")

    def __str__(self):
        return self.value
