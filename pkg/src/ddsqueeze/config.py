"""Scenario configuration: dataclasses, YAML loading, flag overrides.

A config file is a single YAML document with up to three sections,
``scenario`` (evolve / noise-ensemble), ``scaling`` and ``verify_dd``; every
key mirrors a dataclass field below.  Command-line flags override file
values.  Unknown keys are rejected so typos fail loudly.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, is_dataclass, replace
from typing import Any

import yaml

HAMILTONIAN_CHOICES = ("oat", "tat", "dr-averaged", "driven-dd")


class ConfigError(ValueError):
    """A configuration file or override is malformed."""


@dataclass(frozen=True)
class ControlConfig:
    """Winding-control inputs; the period is derived as t_min / n_cyc."""

    n_x: int = 2
    n_y: int = 1
    n_cyc: int = 20


@dataclass(frozen=True)
class NoiseConfig:
    alpha: float = 2.0
    sigma_sq: float = 20.0
    n_paths: int = 2000
    master_seed: int = 12345


@dataclass(frozen=True)
class TimeGridConfig:
    """Sampling: t_end bounds the run, dt samples static evolution, and
    substeps_per_period discretizes each control period of driven runs."""

    t_end: float = 1.0
    dt: float = 1e-3
    substeps_per_period: int = 128


@dataclass(frozen=True)
class ScenarioConfig:
    n_spins: int = 10
    hamiltonian: str = "dr-averaged"
    chi: float = 1.0
    control: ControlConfig | None = None
    noise: NoiseConfig | None = None
    time: TimeGridConfig = field(default_factory=TimeGridConfig)
    output: str | None = None

    def validate(self) -> None:
        if self.n_spins < 1:
            raise ConfigError(f"n_spins must be positive, got {self.n_spins}")
        if self.hamiltonian not in HAMILTONIAN_CHOICES:
            raise ConfigError(
                f"hamiltonian must be one of {', '.join(HAMILTONIAN_CHOICES)}, got {self.hamiltonian!r}"
            )
        if self.hamiltonian == "driven-dd" and self.control is None:
            raise ConfigError("driven-dd evolution needs a control block")
        if self.control is not None and self.control.n_cyc < 1:
            raise ConfigError(f"n_cyc must be positive, got {self.control.n_cyc}")
        if self.noise is not None and self.noise.n_paths < 1:
            raise ConfigError(f"n_paths must be positive, got {self.noise.n_paths}")


@dataclass(frozen=True)
class ScalingConfig:
    n_list: tuple[int, ...] = (10, 20, 50, 100, 200, 500)
    hamiltonians: tuple[str, ...] = ("oat", "tat", "dr-averaged")
    chi: float = 1.0
    grid_points: int = 3000
    output: str | None = None

    def validate(self) -> None:
        if len(self.n_list) < 4:
            raise ConfigError(f"need at least 4 spin counts for a slope fit, got {len(self.n_list)}")
        bad = [h for h in self.hamiltonians if h not in ("oat", "tat", "dr-averaged")]
        if bad:
            raise ConfigError(f"scaling supports static hamiltonians only, got {bad}")


@dataclass(frozen=True)
class VerifyDDConfig:
    pairs: tuple[tuple[int, int], ...] = ((2, 1), (3, 1), (5, 3), (4, 2), (1, 1))
    n_spins: int = 10
    output: str | None = None

    def validate(self) -> None:
        if not self.pairs:
            raise ConfigError("need at least one winding pair")
        for pair in self.pairs:
            if len(pair) != 2 or 0 in pair:
                raise ConfigError(f"winding pairs are two nonzero integers, got {pair}")


def _build(cls, data: dict[str, Any], path: str):
    known = {f.name: f for f in fields(cls)}
    unknown = set(data) - set(known)
    if unknown:
        raise ConfigError(f"unknown key(s) under {path}: {', '.join(sorted(unknown))}")
    kwargs = {}
    for name, value in data.items():
        f = known[name]
        if value is None:
            kwargs[name] = None
        elif f.name == "control":
            kwargs[name] = _build(ControlConfig, _as_dict(value, f"{path}.{name}"), f"{path}.{name}")
        elif f.name == "noise":
            kwargs[name] = _build(NoiseConfig, _as_dict(value, f"{path}.{name}"), f"{path}.{name}")
        elif f.name == "time":
            kwargs[name] = _build(TimeGridConfig, _as_dict(value, f"{path}.{name}"), f"{path}.{name}")
        elif f.name == "pairs":
            kwargs[name] = tuple(tuple(int(x) for x in p) for p in value)
        elif f.name in ("n_list", "hamiltonians"):
            kwargs[name] = tuple(value)
        else:
            kwargs[name] = value
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"bad {path} section: {exc}") from exc


def _as_dict(value, path: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(f"{path} must be a mapping, got {type(value).__name__}")
    return value


def _load_document(path: str | None) -> dict:
    if path is None:
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        doc = yaml.safe_load(fh) or {}
    if not isinstance(doc, dict):
        raise ConfigError(f"config root must be a mapping, got {type(doc).__name__}")
    unknown = set(doc) - {"scenario", "scaling", "verify_dd"}
    if unknown:
        raise ConfigError(f"unknown top-level section(s): {', '.join(sorted(unknown))}")
    return doc


def _merge_overrides(cfg, overrides: dict[str, Any]):
    """Apply dotted-key overrides ('noise.alpha') onto a config dataclass."""
    for key, value in overrides.items():
        if value is None:
            continue
        head, _, rest = key.partition(".")
        current = getattr(cfg, head, None)
        if rest:
            if current is None:
                current = {"control": ControlConfig, "noise": NoiseConfig, "time": TimeGridConfig}[head]()
            cfg = replace(cfg, **{head: _merge_overrides(current, {rest: value})})
        else:
            if not any(f.name == head for f in fields(cfg)):
                raise ConfigError(f"unknown override {key!r}")
            cfg = replace(cfg, **{head: value})
    return cfg


def load_scenario(path: str | None, overrides: dict[str, Any] | None = None) -> ScenarioConfig:
    doc = _load_document(path)
    cfg = _build(ScenarioConfig, _as_dict(doc.get("scenario", {}), "scenario"), "scenario")
    cfg = _merge_overrides(cfg, overrides or {})
    cfg.validate()
    return cfg


def load_scaling(path: str | None, overrides: dict[str, Any] | None = None) -> ScalingConfig:
    doc = _load_document(path)
    cfg = _build(ScalingConfig, _as_dict(doc.get("scaling", {}), "scaling"), "scaling")
    cfg = _merge_overrides(cfg, overrides or {})
    cfg.validate()
    return cfg


def load_verify_dd(path: str | None, overrides: dict[str, Any] | None = None) -> VerifyDDConfig:
    doc = _load_document(path)
    cfg = _build(VerifyDDConfig, _as_dict(doc.get("verify_dd", {}), "verify_dd"), "verify_dd")
    cfg = _merge_overrides(cfg, overrides or {})
    cfg.validate()
    return cfg


def echo_lines(cfg, prefix: str) -> list[str]:
    """Canonical 'prefix.key=value' lines for CSV header echoes, field order."""
    lines = []
    for f in fields(cfg):
        value = getattr(cfg, f.name)
        if is_dataclass(value):
            lines.extend(echo_lines(value, f"{prefix}.{f.name}"))
        else:
            lines.append(f"{prefix}.{f.name}={value}")
    return lines


def default_yaml() -> str:
    """All sections with their default values, as a YAML document."""

    def plain(cfg):
        out = {}
        for f in fields(cfg):
            value = getattr(cfg, f.name)
            out[f.name] = plain(value) if is_dataclass(value) else (
                list(value) if isinstance(value, tuple) else value
            )
        return out

    doc = {
        "scenario": {**plain(ScenarioConfig()), "control": plain(ControlConfig()), "noise": plain(NoiseConfig())},
        "scaling": plain(ScalingConfig()),
        "verify_dd": {**plain(VerifyDDConfig()), "pairs": [list(p) for p in VerifyDDConfig().pairs]},
    }
    return yaml.safe_dump(doc, sort_keys=False)
