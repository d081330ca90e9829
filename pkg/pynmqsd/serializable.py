import json
import types
import typing
from dataclasses import fields, is_dataclass
from enum import Enum
from inspect import isclass

import numpy as np


def complex_to_pair(value: complex) -> list[float]:
    return [float(value.real), float(value.imag)]


def pair_to_complex(value) -> complex:
    if isinstance(value, (list, tuple)):
        re, im = value
        return complex(float(re), float(im))
    return complex(value)


def to_plain(obj):
    """Nested lists with complex entries written as [re, im]."""
    if isinstance(obj, np.ndarray):
        return to_plain(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.generic):
        return to_plain(obj.item())
    if isinstance(obj, complex):
        return complex_to_pair(obj)
    return obj


def matrix_from_pairs(rows) -> np.ndarray:
    return np.array([[pair_to_complex(v) for v in row] for row in rows], dtype=complex)


def vector_from_pairs(values) -> np.ndarray:
    return np.array([pair_to_complex(v) for v in values], dtype=complex)


# Custom JSON encoder for numerical results and config blocks
class NmqsdEncoder(json.JSONEncoder):
    def default(self, obj):
        if hasattr(obj, "toDict") and callable(getattr(obj, "toDict")):
            return obj.toDict()
        elif isinstance(obj, Enum):
            return obj.value
        elif isinstance(obj, (complex, np.ndarray, np.generic)):
            return to_plain(obj)
        return json.JSONEncoder.default(self, obj)


# Base class for serializable objects
class SerializableToJSON:
    def toDict(self):
        result = {}
        for attr_name, attr_value in self.__dict__.items():
            if not attr_name.startswith("_"):
                result[attr_name] = self._attributesToDict(attr_value)
        return result

    @staticmethod
    def _attributesToDict(obj):
        if isinstance(obj, SerializableToJSON):
            return obj.toDict()
        elif is_dataclass(obj) and not isinstance(obj, type):
            return {
                f.name: SerializableToJSON._attributesToDict(getattr(obj, f.name))
                for f in fields(obj)
                if not f.name.startswith("_")
            }
        elif isinstance(obj, Enum):
            return obj.value
        elif isinstance(obj, (complex, np.ndarray, np.generic)):
            return to_plain(obj)
        elif isinstance(obj, dict):
            return {
                key: SerializableToJSON._attributesToDict(value)
                for key, value in obj.items()
            }
        elif isinstance(obj, (list, tuple)):
            return [SerializableToJSON._attributesToDict(value) for value in obj]
        return obj

    @classmethod
    def fromDict(cls, inputsDict):
        instance = cls()
        hints = typing.get_type_hints(cls)
        for attr_name, attr_value in inputsDict.items():
            if attr_name in hints:
                setattr(instance, attr_name, _coerce(hints[attr_name], attr_value))
        return instance


def _coerce(tp, value):
    if value is None:
        return None
    origin = typing.get_origin(tp)
    if origin in (typing.Union, types.UnionType):
        candidates = [a for a in typing.get_args(tp) if a is not type(None)]
        return _coerce(candidates[0], value)
    if origin in (list, tuple):
        args = typing.get_args(tp)
        item_type = args[0] if args else typing.Any
        return [_coerce(item_type, v) for v in value]
    if not isclass(tp):
        return value
    if issubclass(tp, Enum):
        if isinstance(value, dict):
            value = value["value"]
        return tp(value)
    if is_dataclass(tp):
        hints = typing.get_type_hints(tp)
        kwargs = {k: _coerce(hints[k], v) for k, v in value.items() if k in hints}
        return tp(**kwargs)
    if tp is complex:
        return pair_to_complex(value)
    if issubclass(tp, (int, float)) and not isinstance(value, bool):
        return tp(value)
    return value
