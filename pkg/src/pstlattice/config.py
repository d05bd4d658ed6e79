"""YAML run configuration.

Example::

    channel:
      n_sites: 9
      length_cm: 10.0
      profile: pst          # pst | uniform | harmonic | custom
      c0: 0.15707963        # pst/harmonic; pst defaults to pi / (2 L)
    law:
      alpha: 19.5
      beta: 0.152
    disorder:
      spacing_quantum: 0.5
      detuning_sigma: 0.0
    run:
      input_site: 1
      trials: 1000
      seed: 0

Unknown keys anywhere are rejected, and every physical constraint is checked
before a ``RunConfig`` is returned.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any

import yaml

from .design import c0_for_length
from .disorder import DisorderModel
from .lattice import PST, ChannelSpec, CouplingLaw, Custom, Harmonic, Uniform, ValidationError
from .scenarios import ALPHA, BETA, LENGTH_CM, N_SITES


class ConfigError(ValidationError):
    pass


@dataclass(frozen=True)
class RunSettings:
    input_site: int = 1
    z_samples: int = 501
    trials: int = 1000
    seed: int = 0
    renormalize: bool = True
    record_path: str | None = None
    report_path: str | None = None
    samples_path: str | None = None


@dataclass(frozen=True)
class RunConfig:
    channel: ChannelSpec
    law: CouplingLaw
    disorder: DisorderModel
    run: RunSettings


_SECTIONS = ("channel", "law", "disorder", "run")
_CHANNEL_KEYS = {"n_sites", "length_cm", "profile", "c0", "c", "couplings"}
_PROFILE_KEYS = {"pst": {"c0"}, "uniform": {"c"}, "harmonic": {"c0"}, "custom": {"couplings"}}


def _reject_unknown(section: str, data: dict, allowed) -> None:
    extra = sorted(set(data) - set(allowed))
    if extra:
        raise ConfigError(section, f"unknown key(s): {', '.join(map(str, extra))}")


def _number(section: str, key: str, value: Any, kind=float):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{section}.{key}", f"expected a number, got {value!r}")
    if kind is int:
        if int(value) != value:
            raise ConfigError(f"{section}.{key}", f"expected an integer, got {value!r}")
        return int(value)
    return float(value)


def _channel(data: dict) -> ChannelSpec:
    _reject_unknown("channel", data, _CHANNEL_KEYS)
    n = _number("channel", "n_sites", data.get("n_sites", N_SITES), int)
    length = _number("channel", "length_cm", data.get("length_cm", LENGTH_CM))
    kind = str(data.get("profile", "pst")).lower()
    if kind not in _PROFILE_KEYS:
        raise ConfigError("channel.profile", f"must be one of {sorted(_PROFILE_KEYS)}, got {kind!r}")
    _reject_unknown(f"channel ({kind} profile)", data,
                    {"n_sites", "length_cm", "profile"} | _PROFILE_KEYS[kind])
    if kind == "pst":
        c0 = data.get("c0")
        profile = PST(c0_for_length(length) if c0 is None else _number("channel", "c0", c0))
    elif kind == "uniform":
        if "c" not in data:
            raise ConfigError("channel.c", "required for the uniform profile")
        profile = Uniform(_number("channel", "c", data["c"]))
    elif kind == "harmonic":
        if "c0" not in data:
            raise ConfigError("channel.c0", "required for the harmonic profile")
        profile = Harmonic(_number("channel", "c0", data["c0"]))
    else:
        vals = data.get("couplings")
        if not isinstance(vals, list):
            raise ConfigError("channel.couplings", "required list for the custom profile")
        profile = Custom(tuple(_number("channel", "couplings", v) for v in vals))
    return ChannelSpec(n, length, profile)


def _law(data: dict) -> CouplingLaw:
    _reject_unknown("law", data, {"alpha", "beta"})
    return CouplingLaw(_number("law", "alpha", data.get("alpha", ALPHA)),
                       _number("law", "beta", data.get("beta", BETA)))


def _disorder(data: dict) -> DisorderModel:
    names = {f.name for f in fields(DisorderModel)}
    _reject_unknown("disorder", data, names)
    kwargs = {}
    for k, v in data.items():
        if k == "beyond_nn":
            if not isinstance(v, bool):
                raise ConfigError("disorder.beyond_nn", f"expected true/false, got {v!r}")
            kwargs[k] = v
        else:
            kwargs[k] = _number("disorder", k, v)
    return DisorderModel(**kwargs)


def _run(data: dict, n_sites: int) -> RunSettings:
    names = {f.name for f in fields(RunSettings)}
    _reject_unknown("run", data, names)
    kwargs: dict[str, Any] = {}
    for k, v in data.items():
        if k in ("input_site", "z_samples", "trials", "seed"):
            kwargs[k] = _number("run", k, v, int)
        elif k == "renormalize":
            if not isinstance(v, bool):
                raise ConfigError("run.renormalize", f"expected true/false, got {v!r}")
            kwargs[k] = v
        else:
            kwargs[k] = None if v is None else str(v)
    s = RunSettings(**kwargs)
    if not 1 <= s.input_site <= n_sites:
        raise ConfigError("run.input_site", f"must be in 1..{n_sites}, got {s.input_site}")
    if s.z_samples < 1:
        raise ConfigError("run.z_samples", f"must be >= 1, got {s.z_samples}")
    if s.trials < 1:
        raise ConfigError("run.trials", f"must be >= 1, got {s.trials}")
    if not 0 <= s.seed < 2**64:
        raise ConfigError("run.seed", "must be an unsigned 64-bit integer")
    return s


def config_from_dict(data: dict | None) -> RunConfig:
    data = data or {}
    if not isinstance(data, dict):
        raise ConfigError("config", "top level must be a mapping")
    _reject_unknown("config", data, _SECTIONS)
    sections = {}
    for name in _SECTIONS:
        sec = data.get(name) or {}
        if not isinstance(sec, dict):
            raise ConfigError(name, "section must be a mapping")
        sections[name] = sec
    channel = _channel(sections["channel"])
    return RunConfig(
        channel=channel,
        law=_law(sections["law"]),
        disorder=_disorder(sections["disorder"]),
        run=_run(sections["run"], channel.n_sites),
    )


def load_config(path: str | Path | None) -> RunConfig:
    """Parse and validate a config file; ``None`` gives the reference device."""
    if path is None:
        return config_from_dict({})
    try:
        data = yaml.safe_load(Path(path).read_text())
    except yaml.YAMLError as exc:
        raise ConfigError("config", f"cannot parse {path}: {exc}") from None
    return config_from_dict(data)
