"""Dataclass <-> JSON-compatible conversion with strict key checking."""

from __future__ import annotations

import dataclasses
import enum
import hashlib
import json
import types
import typing

import numpy as np


class ConfigError(ValueError):
    pass


def to_jsonable(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, dict):
        return {(k.value if isinstance(k, enum.Enum) else str(k)): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (tuple, list)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def config_hash(obj) -> str:
    blob = json.dumps(to_jsonable(obj), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def from_jsonable(tp, data, path: str = "config"):
    """Build an instance of ``tp`` from parsed JSON, rejecting unknown keys.

    Missing dataclass fields keep their defaults; dict-valued fields are
    merged over the default mapping.
    """
    if dataclasses.is_dataclass(tp):
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: expected an object")
        hints = typing.get_type_hints(tp)
        names = {f.name for f in dataclasses.fields(tp) if f.init}
        unknown = sorted(set(data) - names)
        if unknown:
            raise ConfigError(f"{path}: unknown key(s) {', '.join(unknown)}")
        by_name = {f.name: f for f in dataclasses.fields(tp)}
        kwargs = {}
        for name, value in data.items():
            sub = from_jsonable(hints[name], value, f"{path}.{name}")
            if isinstance(sub, dict):
                fld = by_name[name]
                if fld.default_factory is not dataclasses.MISSING:
                    sub = {**fld.default_factory(), **sub}
            kwargs[name] = sub
        try:
            return tp(**kwargs)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{path}: {exc}") from exc

    origin = typing.get_origin(tp)
    args = typing.get_args(tp)
    if origin in (typing.Union, types.UnionType):
        if data is None and type(None) in args:
            return None
        errors = []
        for inner in (a for a in args if a is not type(None)):
            try:
                return from_jsonable(inner, data, path)
            except ConfigError as exc:
                errors.append(str(exc))
        raise ConfigError("; ".join(errors))
    if origin is dict:
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: expected an object")
        kt, vt = args
        return {from_jsonable(kt, k, path): from_jsonable(vt, v, f"{path}.{k}") for k, v in data.items()}
    if origin is tuple:
        if not isinstance(data, (list, tuple)):
            raise ConfigError(f"{path}: expected a list")
        if len(args) == 2 and args[1] is Ellipsis:
            return tuple(from_jsonable(args[0], v, path) for v in data)
        if len(args) != len(data):
            raise ConfigError(f"{path}: expected {len(args)} values")
        return tuple(from_jsonable(a, v, path) for a, v in zip(args, data))
    if isinstance(tp, type) and issubclass(tp, enum.Enum):
        try:
            return tp(data)
        except ValueError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    if tp is float:
        if isinstance(data, bool) or not isinstance(data, (int, float)):
            raise ConfigError(f"{path}: expected a number")
        return float(data)
    if tp is int:
        if isinstance(data, bool) or not isinstance(data, int):
            raise ConfigError(f"{path}: expected an integer")
        return data
    if tp is bool:
        if not isinstance(data, bool):
            raise ConfigError(f"{path}: expected true/false")
        return data
    if tp is str:
        if not isinstance(data, str):
            raise ConfigError(f"{path}: expected a string")
        return data
    raise ConfigError(f"{path}: unsupported type {tp!r}")
