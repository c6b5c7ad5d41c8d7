"""Run configuration: a YAML file with lab units (GHz, ns) at the boundary.

Frequencies are stored exactly as parsed and converted to angular units
(rad/ns) only when building the domain objects, so parse -> serialize ->
parse is an identity.  Validation errors name the offending field path.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import yaml

from .control import OptimizerSettings, PulseShape
from .operators import GateTask, OscillatorSpec
from .propagator import PropagationSettings

TWO_PI = 6.283185307179586


class ConfigError(ValueError):
    pass


def _get(data: dict, path: str, default, kind):
    node = data
    parts = path.split(".")
    for key in parts[:-1]:
        node = node.get(key, {}) if isinstance(node, dict) else {}
    if not isinstance(node, dict) or parts[-1] not in node:
        if default is _REQUIRED:
            raise ConfigError(f"missing required field {path!r}")
        return default
    value = node[parts[-1]]
    if kind is float and isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if kind is int and isinstance(value, int) and not isinstance(value, bool):
        return value
    if kind is str and isinstance(value, str):
        return value
    if kind is list and isinstance(value, list):
        return value
    raise ConfigError(f"field {path!r} must be a {kind.__name__}, got {value!r}")


_REQUIRED = object()


@dataclass(frozen=True)
class GateConfig:
    swap_from: int
    swap_to: int
    duration_ns: float


@dataclass(frozen=True)
class RunConfig:
    self_kerr_ghz: float = 0.22
    rotation_freq_ghz: float = 4.8
    guard_levels: int = 1
    gates: tuple[GateConfig, ...] = ()
    segments: int = 10
    max_amplitude_ghz: float = 0.03
    max_iterations: int = 200
    guard_weight: float = 1.0
    convergence_tol: float = 1e-9
    steps_per_ns: float = 250.0
    unitarity_tol: float = 1e-10
    integrator: str = "cf4"
    eps_over_xi: tuple[float, ...] | None = None
    slope_window_exponents: tuple[float, float] = (-4.05, -3.95)
    occ_max: int = 50
    heatmap_exponents: tuple[float, ...] = (0.0, -0.5, -1.0, -1.5, -2.0, -2.5, -3.0, -3.5)
    heatmap_pairs: tuple[tuple[float, float], ...] | None = None
    synthesis_threshold: float = 5e-3
    output_dir: str = "runs"
    seed: int = 7
    workers: int = 1

    # -- domain object builders (GHz -> rad/ns happens here) ---------------

    def oscillator_spec(self, essential_levels: int) -> OscillatorSpec:
        return OscillatorSpec(
            essential_levels=essential_levels,
            guard_levels=self.guard_levels,
            self_kerr=TWO_PI * self.self_kerr_ghz,
            rotation_freq=TWO_PI * self.rotation_freq_ghz,
        )

    def gate_tasks(self) -> list[GateTask]:
        tasks = []
        for g in self.gates:
            spec = self.oscillator_spec(essential_levels=g.swap_to + 1)
            tasks.append(GateTask(g.swap_from, g.swap_to, g.duration_ns, spec))
        return tasks

    def pulse_shape(self) -> PulseShape:
        return PulseShape(segments=self.segments, max_amplitude=TWO_PI * self.max_amplitude_ghz)

    def optimizer_settings(self) -> OptimizerSettings:
        return OptimizerSettings(
            max_iterations=self.max_iterations,
            guard_weight=self.guard_weight,
            seed=self.seed,
            convergence_tol=self.convergence_tol,
        )

    def propagation_settings(self) -> PropagationSettings:
        return PropagationSettings(
            steps_per_ns=self.steps_per_ns,
            unitarity_tol=self.unitarity_tol,
            integrator=self.integrator,
        )

    def slope_window(self) -> tuple[float, float]:
        lo, hi = self.slope_window_exponents
        return (10.0 ** lo, 10.0 ** hi)

    def exponent_pairs(self) -> tuple[tuple[float, float], ...]:
        if self.heatmap_pairs is not None:
            return self.heatmap_pairs
        return tuple((e1, e2) for e1 in self.heatmap_exponents for e2 in self.heatmap_exponents)

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        doc = {
            "oscillator": {
                "self_kerr_ghz": self.self_kerr_ghz,
                "rotation_freq_ghz": self.rotation_freq_ghz,
                "guard_levels": self.guard_levels,
            },
            "gates": [
                {"swap_from": g.swap_from, "swap_to": g.swap_to, "duration_ns": g.duration_ns}
                for g in self.gates
            ],
            "pulse": {
                "segments": self.segments,
                "max_amplitude_ghz": self.max_amplitude_ghz,
            },
            "optimizer": {
                "max_iterations": self.max_iterations,
                "guard_weight": self.guard_weight,
                "convergence_tol": self.convergence_tol,
            },
            "propagation": {
                "steps_per_ns": self.steps_per_ns,
                "unitarity_tol": self.unitarity_tol,
                "integrator": self.integrator,
            },
            "sweeps": {
                "scaling": {
                    "slope_window_exponents": list(self.slope_window_exponents),
                },
                "heatmap": {
                    "occ_max": self.occ_max,
                    "exponents": list(self.heatmap_exponents),
                },
            },
            "synthesis_threshold": self.synthesis_threshold,
            "output_dir": self.output_dir,
            "seed": self.seed,
            "workers": self.workers,
        }
        if self.eps_over_xi is not None:
            doc["sweeps"]["scaling"]["eps_over_xi"] = list(self.eps_over_xi)
        if self.heatmap_pairs is not None:
            doc["sweeps"]["heatmap"]["pairs"] = [list(p) for p in self.heatmap_pairs]
        return doc

    def config_hash(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(canon.encode()).hexdigest()[:16]

    def oscillator_hash(self) -> str:
        canon = json.dumps(
            {
                "self_kerr_ghz": self.self_kerr_ghz,
                "rotation_freq_ghz": self.rotation_freq_ghz,
                "guard_levels": self.guard_levels,
            },
            sort_keys=True,
        )
        return hashlib.sha256(canon.encode()).hexdigest()[:16]


def parse_config(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError(f"config root must be a mapping, got {type(data).__name__}")
    gates = []
    for idx, item in enumerate(_get(data, "gates", [], list)):
        if not isinstance(item, dict):
            raise ConfigError(f"field 'gates[{idx}]' must be a mapping, got {item!r}")
        gates.append(
            GateConfig(
                swap_from=_get(item, "swap_from", _REQUIRED, int),
                swap_to=_get(item, "swap_to", _REQUIRED, int),
                duration_ns=_get(item, "duration_ns", _REQUIRED, float),
            )
        )
    eps_grid = _get(data, "sweeps.scaling.eps_over_xi", None, list)
    pairs = _get(data, "sweeps.heatmap.pairs", None, list)
    window = _get(data, "sweeps.scaling.slope_window_exponents", [-4.05, -3.95], list)
    if len(window) != 2:
        raise ConfigError("field 'sweeps.scaling.slope_window_exponents' must have 2 entries")
    cfg = RunConfig(
        self_kerr_ghz=_get(data, "oscillator.self_kerr_ghz", 0.22, float),
        rotation_freq_ghz=_get(data, "oscillator.rotation_freq_ghz", 4.8, float),
        guard_levels=_get(data, "oscillator.guard_levels", 1, int),
        gates=tuple(gates),
        segments=_get(data, "pulse.segments", 10, int),
        max_amplitude_ghz=_get(data, "pulse.max_amplitude_ghz", 0.03, float),
        max_iterations=_get(data, "optimizer.max_iterations", 200, int),
        guard_weight=_get(data, "optimizer.guard_weight", 1.0, float),
        convergence_tol=_get(data, "optimizer.convergence_tol", 1e-9, float),
        steps_per_ns=_get(data, "propagation.steps_per_ns", 250.0, float),
        unitarity_tol=_get(data, "propagation.unitarity_tol", 1e-10, float),
        integrator=_get(data, "propagation.integrator", "cf4", str),
        eps_over_xi=tuple(float(x) for x in eps_grid) if eps_grid is not None else None,
        slope_window_exponents=(float(window[0]), float(window[1])),
        occ_max=_get(data, "sweeps.heatmap.occ_max", 50, int),
        heatmap_exponents=tuple(
            float(x)
            for x in _get(
                data, "sweeps.heatmap.exponents", [0.0, -0.5, -1.0, -1.5, -2.0, -2.5, -3.0, -3.5], list
            )
        ),
        heatmap_pairs=tuple((float(p[0]), float(p[1])) for p in pairs) if pairs is not None else None,
        synthesis_threshold=_get(data, "synthesis_threshold", 5e-3, float),
        output_dir=_get(data, "output_dir", "runs", str),
        seed=_get(data, "seed", 7, int),
        workers=_get(data, "workers", 1, int),
    )
    try:
        cfg.propagation_settings()
        cfg.gate_tasks()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def load_config(path: str | Path) -> RunConfig:
    try:
        data = yaml.safe_load(Path(path).read_text())
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigError(f"cannot parse {path}{where}: {exc}") from exc
    return parse_config(data if data is not None else {})


def save_config(cfg: RunConfig, path: str | Path) -> None:
    Path(path).write_text(yaml.safe_dump(cfg.to_dict(), sort_keys=False))
