"""Experiment configuration files (TOML).

A config names an action, an observable, an averaging family, an r grid,
start points and a master seed.  Arcs are written in units of pi, e.g.
``left = [[0.0, 0.25]]`` for [0, pi/4).  See ``configs/cusp_ball.toml`` for a
complete example.
"""
from __future__ import annotations

import sys
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

import tomli_w

from hypererg import dynamics, estimators, radial, streams
from hypererg.arcs import ArcSet, KDensity
from hypererg.errors import ConfigError, DomainError
from hypererg.geometry import RankOneProfile
from hypererg.measures import KINDS, MeasureFamily

SCHEMA_VERSION = 1

PROFILES = {
    "plane": RankOneProfile.hyperbolic_plane,
    "hyperbolic-space": RankOneProfile.hyperbolic_space,
    "su21": RankOneProfile.su21,
    "sp21": RankOneProfile.sp21,
    "f4": RankOneProfile.f4,
}


def parse_profile(value) -> RankOneProfile:
    """A profile from a name in :data:`PROFILES` or an ``[m1, m2, c]`` triple."""
    try:
        if isinstance(value, str):
            if value in PROFILES:
                return PROFILES[value]()
            parts = [float(v) for v in value.split(",")]
        else:
            parts = [float(v) for v in value]
        if len(parts) != 3 or not all(p.is_integer() for p in parts[:2]):
            raise ValueError
        return RankOneProfile(int(parts[0]), int(parts[1]), parts[2])
    except (ValueError, TypeError, DomainError):
        raise ConfigError(f"unknown profile {value!r}") from None


def profile_to_list(p: RankOneProfile) -> list:
    return [p.m1, p.m2, p.c]


def _arcs(value) -> ArcSet:
    try:
        arcs = ArcSet.from_pi_units([tuple(pair) for pair in value])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad arc list {value!r}: {exc}") from None
    if arcs.is_empty:
        raise ConfigError("arc set is empty")
    return arcs


def _factor(value):
    """None, a list of arcs, or a list of ``{arcs = [...], weight = w}`` density pieces."""
    if value is None:
        return None
    if value and isinstance(value[0], dict):
        try:
            return KDensity(tuple((_arcs(piece["arcs"]), float(piece["weight"])) for piece in value))
        except (KeyError, DomainError) as exc:
            raise ConfigError(f"bad K-density: {exc}") from None
    return _arcs(value)


def _weight(value):
    if value is None:
        return radial.PolynomialWeight(1.0)
    kind = value.get("kind")
    try:
        if kind == "polynomial":
            return radial.PolynomialWeight(float(value.get("kappa", 1.0)), float(value.get("C", 1.0)))
        if kind == "psi":
            return radial.HorocycleDensity(parse_profile(value.get("profile", "plane")))
    except DomainError as exc:
        raise ConfigError(str(exc)) from None
    raise ConfigError(f"unknown weight kind {kind!r}")


@dataclass
class ExperimentConfig:
    """In-memory form of a config file; :meth:`to_dict` and :func:`parse_config` round-trip."""

    action: dict = field(default_factory=lambda: {"name": "modular"})
    observable: str = "modular/cusp:2"
    family: dict = field(default_factory=lambda: {"kind": "ball"})
    grid: dict = field(default_factory=lambda: {"min": 8.0, "max": 12.0, "count": 3, "spacing": "lin"})
    n_per_r: int = 100_000
    starts: dict = field(default_factory=lambda: {"mode": "fixed", "count": 1})
    seed: int = 1
    bias_budget: float = estimators.DEFAULT_BIAS_BUDGET
    p: float = 2.0
    workers: int = 1
    output: dict = field(default_factory=lambda: {"format": "csv"})
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        self.validate()

    # -- validation and builders ----------------------------------------------------

    def validate(self) -> None:
        if self.schema_version != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema_version {self.schema_version!r}")
        streams.check_seed(self.seed)
        if not isinstance(self.n_per_r, int) or self.n_per_r < 1:
            raise ConfigError("n_per_r must be a positive integer")
        if not isinstance(self.workers, int) or self.workers < 1:
            raise ConfigError("workers must be a positive integer")
        if self.output.get("format", "csv") not in ("csv", "json"):
            raise ConfigError("output format must be csv or json")
        if not self.bias_budget >= 0:
            raise ConfigError("bias_budget must be nonnegative")
        self.r_grid()
        self.build_action()
        self.build_observable()
        self.build_family()
        self._check_starts()

    def r_grid(self) -> np.ndarray:
        g = self.grid
        try:
            lo, hi, count = float(g["min"]), float(g["max"]), int(g["count"])
        except (KeyError, TypeError, ValueError):
            raise ConfigError("grid needs numeric min, max and count") from None
        spacing = g.get("spacing", "lin")
        if count < 1:
            raise ConfigError("grid count must be at least 1")
        if count > 1 and not hi > lo:
            raise ConfigError("grid max must exceed min")
        if spacing == "lin":
            return np.linspace(lo, hi, count) if count > 1 else np.array([lo])
        if spacing == "log":
            if not lo > 0:
                raise ConfigError("log grid needs min > 0")
            return np.geomspace(lo, hi, count) if count > 1 else np.array([lo])
        raise ConfigError(f"unknown grid spacing {spacing!r}")

    def build_action(self):
        params = {k: v for k, v in self.action.items() if k != "name"}
        try:
            return dynamics.parse_action(self.action.get("name", ""), **params)
        except DomainError as exc:
            raise ConfigError(str(exc)) from None

    def build_observable(self):
        try:
            return dynamics.parse_observable(self.observable)
        except DomainError as exc:
            raise ConfigError(str(exc)) from None

    def build_family(self):
        fam = dict(self.family)
        kind = fam.pop("kind", None)
        line = kind in estimators.LINE_KINDS
        if kind not in KINDS and not line:
            raise ConfigError(f"unknown family kind {kind!r}")
        allowed = {"weight", "eps", "b"} if line else {"profile", "eps", "b", "left", "right"}
        extra = set(fam) - allowed
        if extra:
            raise ConfigError(f"unknown keys for family {kind!r}: {sorted(extra)}")
        action_name = self.action.get("name")
        if line != (action_name in ("torus", "horocycle")):
            raise ConfigError(f"family {kind!r} does not fit action {action_name!r}")
        try:
            if line:
                return estimators.LineFamily(kind, _weight(fam.get("weight")),
                                             float(fam.get("eps", 0.1)), float(fam.get("b", 1.0)))
            return MeasureFamily(
                kind,
                parse_profile(fam.get("profile", "plane")),
                float(fam.get("eps", 0.1)),
                None if fam.get("b") is None else float(fam["b"]),
                _factor(fam.get("left")),
                _factor(fam.get("right")),
            )
        except DomainError as exc:
            raise ConfigError(str(exc)) from None

    def _check_starts(self) -> None:
        mode = self.starts.get("mode", "fixed")
        if mode not in ("fixed", "haar"):
            raise ConfigError(f"unknown start mode {mode!r}")
        count = self.starts.get("count", 1)
        if not isinstance(count, int) or count < 1:
            raise ConfigError("starts.count must be a positive integer")
        if mode == "fixed" and "points" in self.starts:
            action = self.build_action()
            try:
                for p in self.starts["points"]:
                    action.start_from_list(p)
            except (DomainError, TypeError, ValueError) as exc:
                raise ConfigError(f"bad start point: {exc}") from None

    def build_starts(self, action=None, seed: int | None = None) -> list[np.ndarray]:
        action = action or self.build_action()
        seed = self.seed if seed is None else seed
        mode = self.starts.get("mode", "fixed")
        if mode == "haar":
            return estimators.haar_starts(action, int(self.starts.get("count", 1)), seed)
        if "points" in self.starts:
            return [action.start_from_list(p) for p in self.starts["points"]]
        return [action.default_start()]

    # -- serialisation -----------------------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            out[f.name] = _strip_none(value)
        return out

    def dumps(self) -> str:
        return tomli_w.dumps(self.to_dict())


def _strip_none(value):
    if isinstance(value, dict):
        return {k: _strip_none(v) for k, v in value.items() if v is not None}
    if isinstance(value, (list, tuple)):
        return [_strip_none(v) for v in value]
    return value


def from_dict(data: dict) -> ExperimentConfig:
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "schema_version" not in data:
        raise ConfigError("config lacks schema_version")
    try:
        return ExperimentConfig(**data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def parse_config(text: str) -> ExperimentConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    return from_dict(data)


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    return parse_config(text)
