"""Experiment configuration: strict JSON parsing with position-annotated errors."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Any

from .grid import BIRADIAL, PERIODIC, RADIAL, Domain
from .nonlinearity import Nonlinearity

SUBCOMMANDS = ("gn-const", "minimize", "scan-m", "subadd", "rearrange-test", "eta-limits", "evolve", "verify")

_SECTIONS: dict[str, set[str]] = {
    "domain": {"kind", "N", "r_max", "L", "n_points"},
    "solver": {"init", "symmetry", "max_iter", "tol", "pde_tol", "saturation_tol", "rearrange_every", "force", "shift", "restarts"},
    "scan": {"a_grid", "warm_start", "domains"},
    "subadd": {"a", "b", "scaling_s"},
    "dynamics": {"L", "n_points", "dt", "T", "observe_every", "perturbation", "orbit"},
    "rearrange": {"trials", "N", "r_max", "n_points"},
    "gn": {"N"},
    "verify": {"input", "strict_monotone"},
}
_TOP = {"subcommand", "nonlinearity", "mass", "seed"} | set(_SECTIONS)


class ConfigError(ValueError):
    """Invalid configuration; the CLI maps it to exit status 2."""


@dataclass(frozen=True)
class ExperimentConfig:
    subcommand: str | None = None
    nonlinearity: dict | None = None
    mass: tuple[float, ...] | None = None
    seed: int = 0
    domain: dict = field(default_factory=dict)
    solver: dict = field(default_factory=dict)
    scan: dict = field(default_factory=dict)
    subadd: dict = field(default_factory=dict)
    dynamics: dict = field(default_factory=dict)
    rearrange: dict = field(default_factory=dict)
    gn: dict = field(default_factory=dict)
    verify: dict = field(default_factory=dict)

    # -- typed accessors -------------------------------------------------
    def build_nonlinearity(self) -> Nonlinearity:
        if self.nonlinearity is None:
            raise ConfigError("config needs a 'nonlinearity' section")
        try:
            return Nonlinearity.from_dict(self.nonlinearity)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"nonlinearity: {exc}") from exc

    def build_domain(self, section: dict | None = None) -> Domain:
        section = self.domain if section is None else section
        if not section:
            raise ConfigError("config needs a 'domain' section")
        _reject_unknown(section, _SECTIONS["domain"], "domain")
        if section.get("kind") not in (RADIAL, BIRADIAL, PERIODIC):
            raise ConfigError(f"domain.kind must be one of {RADIAL}, {BIRADIAL}, {PERIODIC}")
        try:
            return Domain.from_dict(section)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"domain: {exc}") from exc

    def require_mass(self) -> tuple[float, ...]:
        if self.mass is None:
            raise ConfigError("config needs a 'mass' list")
        return self.mass

    def to_dict(self) -> dict:
        d = asdict(self)
        if d["mass"] is not None:
            d["mass"] = list(d["mass"])
        return {k: v for k, v in d.items() if v not in (None, {})}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _reject_unknown(d: Any, allowed: set[str], where: str) -> None:
    if not isinstance(d, dict):
        raise ConfigError(f"{where} must be a JSON object")
    extra = set(d) - allowed
    if extra:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(sorted(extra))}")


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate a JSON configuration string.

    Raises
    ------
    ConfigError
        On malformed JSON (with line, column and character offset) or on
        unknown keys and ill-typed values.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON at line {exc.lineno} column {exc.colno} (char {exc.pos}): {exc.msg}") from exc
    return config_from_dict(raw)


def config_from_dict(raw: Any) -> ExperimentConfig:
    _reject_unknown(raw, _TOP, "config")
    sub = raw.get("subcommand")
    if sub is not None and sub not in SUBCOMMANDS:
        raise ConfigError(f"unknown subcommand {sub!r}")
    for name, allowed in _SECTIONS.items():
        if name in raw:
            _reject_unknown(raw[name], allowed, name)
    mass = raw.get("mass")
    if mass is not None:
        if not isinstance(mass, list) or not mass or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in mass):
            raise ConfigError("mass must be a nonempty list of numbers")
        mass = tuple(float(x) for x in mass)
    seed = raw.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ConfigError("seed must be an integer")
    nl = raw.get("nonlinearity")
    if nl is not None and not isinstance(nl, dict):
        raise ConfigError("nonlinearity must be a JSON object")
    cfg = ExperimentConfig(sub, nl, mass, seed, **{k: dict(raw.get(k, {})) for k in _SECTIONS})
    if nl is not None:
        cfg.build_nonlinearity()
    return cfg


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    return parse_config(text)
