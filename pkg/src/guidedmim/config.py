"""Flat TOML-style config files and their mapping onto training configs.

The file format is a deliberate subset: ``key = value`` lines, optional
``[section]`` headers that prefix following keys as ``section.key``, ``#``
comments, quoted or bare strings, ints, floats, and true/false. Values from
the command line use the same keys and win over the file.
"""

from __future__ import annotations

import dataclasses
import os

from .model import DecoderConfig, EncoderConfig, RecognizerConfig
from .train import FinetuneConfig, PretrainConfig


class ConfigError(ValueError):
    """Invalid config file or config value; message names the offending key."""


def parse_scalar(text: str):
    text = text.strip()
    if not text:
        raise ConfigError("empty value")
    if (text[0] == text[-1] == '"') or (text[0] == text[-1] == "'"):
        return text[1:-1]
    low = text.lower()
    if low == "true":
        return True
    if low == "false":
        return False
    if low in ("none", "null"):
        return None
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text


def load_config_file(path: str) -> dict:
    """Read a config file into a flat {\"section.key\": value} dict."""
    if not os.path.isfile(path):
        raise ConfigError(f"config file not found: {path}")
    values: dict = {}
    section = ""
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("[") and line.endswith("]"):
                section = line[1:-1].strip()
                if not section:
                    raise ConfigError(f"{path}:{line_no}: empty section name")
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{line_no}: expected 'key = value'")
            key, _, value = line.partition("=")
            key = key.strip()
            if not key:
                raise ConfigError(f"{path}:{line_no}: missing key")
            full_key = f"{section}.{key}" if section else key
            try:
                values[full_key] = parse_scalar(value)
            except ConfigError as e:
                raise ConfigError(f"{path}:{line_no}: {e}") from None
    return values


_NESTED = {
    "encoder": EncoderConfig,
    "decoder": DecoderConfig,
    "recognizer": RecognizerConfig,
}


def _coerce(key: str, value, target_type):
    if value is None:
        return None
    if target_type is bool:
        if isinstance(value, bool):
            return value
        if isinstance(value, str) and value.lower() in ("true", "false"):
            return value.lower() == "true"
        raise ConfigError(f"config key {key!r} expects true/false, got {value!r}")
    if target_type is int:
        if isinstance(value, bool):
            raise ConfigError(f"config key {key!r} expects an integer, got {value!r}")
        try:
            if isinstance(value, str):
                return int(value)
            if isinstance(value, float) and value != int(value):
                raise ValueError
            return int(value)
        except ValueError:
            raise ConfigError(
                f"config key {key!r} expects an integer, got {value!r}") from None
    if target_type is float:
        try:
            return float(value)
        except (TypeError, ValueError):
            raise ConfigError(
                f"config key {key!r} expects a number, got {value!r}") from None
    return str(value)


_FIELD_TYPES = {
    "lr_peak": float, "lr": float, "batch_size": int, "epochs": int,
    "warmup_epochs": int, "mask_strategy": str, "mask_ratio": float,
    "augmentation": str, "target_kind": str, "guidance": bool, "align": bool,
    "seed": int, "teacher_ckpt": str, "teacher_depth": int, "teacher_steps": int,
    "checkpoint_every": int, "init": str, "eval_subset": int,
    "depth": int, "d": int, "heads": int, "mlp_ratio": float,
    "patch_size": int, "image_h": int, "image_w": int,
    "order": str, "d_dec": int,
    "dec_depth": int, "d_rec": int, "max_len": int, "charset": str,
}


def _build(cls, values: dict, used: set) -> object:
    kwargs = {}
    for f in dataclasses.fields(cls):
        if f.name in _NESTED:
            continue
        if f.name in values:
            used.add(f.name)
            kwargs[f.name] = _coerce(f.name, values[f.name],
                                     _FIELD_TYPES.get(f.name, str))
    for section, sub_cls in _NESTED.items():
        if not any(f.name == section for f in dataclasses.fields(cls)):
            continue
        sub_kwargs = {}
        for f in dataclasses.fields(sub_cls):
            key = f"{section}.{f.name}"
            if key in values:
                used.add(key)
                sub_kwargs[f.name] = _coerce(key, values[key],
                                             _FIELD_TYPES.get(f.name, str))
        if sub_kwargs:
            try:
                kwargs[section] = sub_cls(**sub_kwargs)
            except (TypeError, ValueError) as e:
                raise ConfigError(f"invalid [{section}] config: {e}") from None
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as e:
        raise ConfigError(str(e)) from None


def build_pretrain_config(values: dict) -> PretrainConfig:
    used: set = set()
    cfg = _build(PretrainConfig, values, used)
    _reject_unknown(values, used)
    return cfg


def build_finetune_config(values: dict) -> FinetuneConfig:
    used: set = set()
    cfg = _build(FinetuneConfig, values, used)
    _reject_unknown(values, used)
    return cfg


def _reject_unknown(values: dict, used: set) -> None:
    unknown = sorted(set(values) - used)
    if unknown:
        raise ConfigError(f"unknown config key {unknown[0]!r}")


def merge_values(file_values: dict, cli_values: dict) -> dict:
    merged = dict(file_values)
    for k, v in cli_values.items():
        if v is not None:
            merged[k] = v
    return merged
