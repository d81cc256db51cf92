"""Reading and writing scenario configs as INI text.

Four sections map one-to-one onto the model constants::

    [model]  model n m dt T r delta theta t_ph tau v_max u_max
    [init]   pos_low pos_high vel_std
    [noise]  mode base_p amp_p phase_p base_v amp_v phase_v base_u amp_u phase_u omega
    [run]    seed record_every isolated

Missing keys fall back to the paper scenario; unknown keys are rejected.
"""

from __future__ import annotations

import configparser
import hashlib
import io
import json
from dataclasses import fields
from pathlib import Path

from .core import ConfigError, FlockParams
from .perception import NoiseSchedule
from .sim import InitSpec, ScenarioConfig

_INT_KEYS = {"n", "m", "seed", "record_every"}
_STR_KEYS = {"model", "mode", "isolated"}


def _section_keys():
    return {
        "model": [f.name for f in fields(FlockParams)],
        "init": [f.name for f in fields(InitSpec)],
        "noise": ["mode"] + [f.name for f in fields(NoiseSchedule)],
        "run": ["seed", "record_every", "isolated"],
    }


def config_to_dict(cfg: ScenarioConfig) -> dict:
    return {
        "model": cfg.params.to_dict(),
        "init": {f.name: getattr(cfg.init, f.name) for f in fields(InitSpec)},
        "noise": {"mode": cfg.mode, **cfg.schedule.to_dict()},
        "run": {"seed": cfg.seed, "record_every": cfg.record_every, "isolated": cfg.isolated},
    }


def config_from_dict(d: dict) -> ScenarioConfig:
    known = _section_keys()
    for section, values in d.items():
        if section not in known:
            raise ConfigError(section, "unknown section")
        for key in values:
            if key not in known[section]:
                raise ConfigError(f"[{section}] {key}", "unknown key")
    model = d.get("model", {})
    init = d.get("init", {})
    noise = dict(d.get("noise", {}))
    run = d.get("run", {})
    mode = noise.pop("mode", "nominal")
    return ScenarioConfig(
        params=FlockParams(**model),
        mode=mode,
        schedule=NoiseSchedule(**noise),
        init=InitSpec(**init),
        **run,
    )


def _parse_value(section: str, key: str, text: str):
    if key in _STR_KEYS:
        return text.strip()
    try:
        if key in _INT_KEYS:
            return int(text)
        return float(text)
    except ValueError:
        kind = "an integer" if key in _INT_KEYS else "a number"
        raise ConfigError(f"[{section}] {key}", f"expected {kind}, got {text!r}") from None


def loads_config(text: str) -> ScenarioConfig:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError("config", str(exc).replace("\n", " ")) from None
    raw = {
        section: {key: _parse_value(section, key, val) for key, val in parser[section].items()}
        for section in parser.sections()
    }
    return config_from_dict(raw)


def load_config(path) -> ScenarioConfig:
    return loads_config(Path(path).read_text())


def dumps_config(cfg: ScenarioConfig) -> str:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    for section, values in config_to_dict(cfg).items():
        parser[section] = {k: repr(v) if isinstance(v, float) else str(v) for k, v in values.items()}
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()


def save_config(cfg: ScenarioConfig, path) -> None:
    Path(path).write_text(dumps_config(cfg))


def config_hash(cfg: ScenarioConfig) -> str:
    """SHA-256 over every field except the seed, which manifests list separately."""
    d = config_to_dict(cfg)
    d["run"] = {k: v for k, v in d["run"].items() if k != "seed"}
    return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()
