"""Run configuration: JSON ingestion, dotted-path overrides and figure defaults."""
from __future__ import annotations

import copy
import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from ..errors import ConfigError
from ..matrices import ErrorCoeffs
from ..model import OMEGA_M, PhysicalParams, SystemParams

SYSTEM_FIELDS = tuple(f.name for f in dataclasses.fields(SystemParams))
SWEEPABLE = SYSTEM_FIELDS + ("physical.temp_k", "errors.gamma", "errors.eta")
INITIAL_STATES = ("vacuum", "thermal_photons")


def _reject_unknown(block: Mapping, allowed, where: str) -> None:
    if not isinstance(block, Mapping):
        raise ConfigError(f"{where} must be an object")
    unknown = set(block) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")


@dataclass(frozen=True)
class SweepAxis:
    name: str
    values: tuple[float, ...]

    @classmethod
    def from_dict(cls, d: Mapping) -> "SweepAxis":
        _reject_unknown(d, ("name", "start", "stop", "count", "values"), "sweep axis")
        name = d.get("name")
        if name not in SWEEPABLE:
            raise ConfigError(f"sweep axis {name!r} is not a parameter name")
        if "values" in d:
            vals = tuple(float(v) for v in d["values"])
        else:
            try:
                count = int(d.get("count", 1))
                start = float(d["start"])
                stop = float(d.get("stop", start))
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigError(f"sweep axis {name!r}: {exc}") from None
            if count < 1:
                raise ConfigError("sweep count must be >= 1")
            vals = tuple(float(v) for v in np.linspace(start, stop, count))
        if not vals:
            raise ConfigError(f"sweep axis {name!r} is empty")
        return cls(name, vals)

    def to_dict(self) -> dict:
        return {"name": self.name, "values": list(self.values)}


@dataclass(frozen=True)
class TimeSpec:
    """Explicit times, fractions of tau, or an even grid on ``[0, stop_tau * tau]``."""

    values: tuple[float, ...] | None = None
    tau_fractions: tuple[float, ...] | None = None
    count: int = 512
    stop_tau: float = 1.5

    @classmethod
    def from_dict(cls, d: Mapping) -> "TimeSpec":
        _reject_unknown(d, ("values", "tau_fractions", "count", "stop_tau"), "times")
        kw: dict[str, Any] = {}
        for key in ("values", "tau_fractions"):
            if d.get(key) is not None:
                kw[key] = tuple(float(v) for v in d[key])
                if any(v < 0 for v in kw[key]):
                    raise ConfigError("time points must be >= 0")
        if "count" in d:
            kw["count"] = int(d["count"])
            if kw["count"] < 1:
                raise ConfigError("time count must be >= 1")
        if "stop_tau" in d:
            kw["stop_tau"] = float(d["stop_tau"])
            if kw["stop_tau"] < 0:
                raise ConfigError("stop_tau must be >= 0")
        return cls(**kw)

    def resolve(self, tau: float) -> np.ndarray:
        if self.values is not None:
            return np.asarray(self.values, dtype=float)
        if self.tau_fractions is not None:
            return tau * np.asarray(self.tau_fractions, dtype=float)
        return np.linspace(0.0, self.stop_tau * tau, self.count)

    def to_dict(self) -> dict:
        return {"values": None if self.values is None else list(self.values),
                "tau_fractions": None if self.tau_fractions is None else list(self.tau_fractions),
                "count": self.count, "stop_tau": self.stop_tau}


@dataclass(frozen=True)
class OutputSpec:
    directory: str = "out"
    csv: bool = True
    json: bool = True

    @classmethod
    def from_dict(cls, d: Mapping) -> "OutputSpec":
        _reject_unknown(d, ("directory", "csv", "json"), "outputs")
        return cls(**d)


@dataclass(frozen=True)
class RunConfig:
    """Everything one run needs.

    ``auto`` lists the system fields derived rather than given (null in
    JSON): ``G = g``, ``delta_b = omega_m + 10 g`` and ``delta_a`` on the
    squeezing resonance.  They are re-derived whenever a sweep moves the
    parameters they depend on.
    """

    system: SystemParams
    physical: PhysicalParams | None = None
    errors: ErrorCoeffs | None = None
    sweep: tuple[SweepAxis, ...] = ()
    times: TimeSpec = field(default_factory=TimeSpec)
    outputs: OutputSpec = field(default_factory=OutputSpec)
    initial_state: str = "vacuum"
    auto: frozenset = frozenset()

    def __post_init__(self):
        if self.initial_state not in INITIAL_STATES:
            raise ConfigError(f"initial_state must be one of {INITIAL_STATES}")

    # -- construction -------------------------------------------------------
    @classmethod
    def from_dict(cls, data: Mapping) -> "RunConfig":
        _reject_unknown(data, ("system", "physical", "errors", "sweep", "times", "outputs",
                               "initial_state"), "config")
        sys_block = dict(data.get("system") or {})
        _reject_unknown(sys_block, SYSTEM_FIELDS, "system")
        auto = set()
        if sys_block.get("delta_a") is None:
            auto.add("delta_a")
        if sys_block.get("delta_b") is None:
            auto.add("delta_b")
        if sys_block.get("G") is None:
            auto.add("G")
        if "g" not in sys_block:
            raise ConfigError("system.g is required")
        try:
            system = _build_system(sys_block, auto)
            physical = (PhysicalParams(**_checked(data["physical"], PhysicalParams, "physical"))
                        if data.get("physical") is not None else None)
            errors = (ErrorCoeffs(**_checked(data["errors"], ErrorCoeffs, "errors"))
                      if data.get("errors") is not None else None)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from None
        sweep = data.get("sweep") or []
        if not isinstance(sweep, Sequence):
            raise ConfigError("sweep must be a list of axes")
        return cls(
            system=system, physical=physical, errors=errors,
            sweep=tuple(SweepAxis.from_dict(a) for a in sweep),
            times=TimeSpec.from_dict(data.get("times") or {}),
            outputs=OutputSpec.from_dict(data.get("outputs") or {}),
            initial_state=data.get("initial_state", "vacuum"),
            auto=frozenset(auto),
        )

    def to_dict(self) -> dict:
        sys_d = self.system.to_dict()
        for name in self.auto:
            sys_d[name] = None
        return {
            "system": sys_d,
            "physical": None if self.physical is None else self.physical.to_dict(),
            "errors": None if self.errors is None else self.errors.to_dict(),
            "sweep": [a.to_dict() for a in self.sweep],
            "times": self.times.to_dict(),
            "outputs": dataclasses.asdict(self.outputs),
            "initial_state": self.initial_state,
        }

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)

    # -- per-cell parameters ------------------------------------------------
    def cell(self, overrides: Mapping[str, float] | None = None):
        """``(system, physical, errors)`` with sweep values applied.

        Under a physical block the bath occupations come from its temperature.
        """
        overrides = dict(overrides or {})
        sys_d = self.system.to_dict()
        phys = self.physical
        err = self.errors or ErrorCoeffs()
        for name, value in overrides.items():
            if name.startswith("physical."):
                phys = (phys or PhysicalParams()).replace(**{name.split(".", 1)[1]: value})
            elif name.startswith("errors."):
                err = dataclasses.replace(err, **{name.split(".", 1)[1]: value})
            else:
                sys_d[name] = value
        system = _build_system(sys_d, self.auto - set(overrides))
        if phys is not None:
            n_a, n_b, n_m = phys.occupations()
            system = system.replace(n_a=n_a, n_b=n_b, n_m=n_m)
        return system, phys, err


def _checked(block, cls, where):
    _reject_unknown(block, [f.name for f in dataclasses.fields(cls)], where)
    return dict(block)


def _build_system(sys_d: Mapping, auto) -> SystemParams:
    d = dict(sys_d)
    if "G" in auto:
        d["G"] = d["g"]
    if "delta_b" in auto:
        d["delta_b"] = OMEGA_M + 10.0 * d["g"]
    if "delta_a" in auto:
        d.pop("delta_a", None)
        g = d.pop("g")
        return SystemParams.two_photon_resonant(g=g, **d)
    return SystemParams(**d)


# ---------------------------------------------------------------------------
# JSON and dotted overrides


def parse_override(text: str) -> tuple[list[str], Any]:
    if "=" not in text:
        raise ConfigError(f"override {text!r} must look like key.path=value")
    key, raw = text.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip().split("."), value


def apply_overrides(data: Mapping, overrides: Sequence[str]) -> dict:
    """Set ``a.b.c=value`` paths on a raw config dict (values parsed as JSON)."""
    out = copy.deepcopy(dict(data))
    for text in overrides:
        path, value = parse_override(text)
        node = out
        for key in path[:-1]:
            if node.get(key) is None:
                node[key] = {}
            node = node[key]
            if not isinstance(node, dict):
                raise ConfigError(f"cannot set {'.'.join(path)}: {key} is not an object")
        node[path[-1]] = value
    return out


def load_config(path=None, overrides: Sequence[str] = (), base: Mapping | None = None) -> RunConfig:
    """Read a JSON config (or start from ``base``), apply overrides, validate."""
    if path is not None:
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
    else:
        data = copy.deepcopy(dict(base or DEFAULT_CONFIG))
    return RunConfig.from_dict(apply_overrides(data, overrides))


DEFAULT_CONFIG: dict = {
    "system": {"g": 0.1, "G": None, "delta_a": None, "delta_b": None,
               "kappa_a": 1e-3, "kappa_b": 1e-3, "kappa_m": 1e-6,
               "n_a": 0.0, "n_b": 0.0, "n_m": 10.0},
}
