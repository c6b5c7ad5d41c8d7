"""Batch sweeps over spectator occupations and shift magnitudes.

Produces occupation heatmaps (infidelity of a frozen pulse against spectator
photon numbers for a grid of cross-Kerr strengths) and shift-scaling curves,
plus the slope fit and rescaled-collapse transforms used to summarize them.

Every cell costs one full propagation, but the infidelity depends on the
occupations only through eps = xi1*n1 + xi2*n2, so cells are deduplicated
by their exact eps value: equal shifts give bit-identical results and
symmetric panels come out exactly symmetric.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from ._kernels import BACKEND
from .operators import GateTask
from .propagator import PropagationError, PropagationSettings, propagate_shifted
from .pulses import PulseSet
from .spectator import rotating_frame_propagator

CSV_COLUMNS = ("gate", "exp1", "exp2", "n1", "n2", "eps_over_xi", "infidelity")

DEFAULT_EXPONENTS = (0.0, -0.5, -1.0, -1.5, -2.0, -2.5, -3.0, -3.5)

SLOPE_WINDOW = (10.0 ** -4.05, 10.0 ** -3.95)


def default_eps_grid() -> tuple[float, ...]:
    """40 log-spaced points on [1e-5, 1e-1] plus the slope window endpoints
    and midpoint (guaranteeing >= 4 in-window points)."""
    grid = np.concatenate(
        [np.logspace(-5.0, -1.0, 40), [10.0 ** -4.05, 1e-4, 10.0 ** -3.95]]
    )
    return tuple(np.unique(grid))


def default_exponent_pairs() -> tuple[tuple[float, float], ...]:
    return tuple((e1, e2) for e1 in DEFAULT_EXPONENTS for e2 in DEFAULT_EXPONENTS)


@dataclass(frozen=True)
class HeatmapSpec:
    task: GateTask
    pulse: PulseSet
    occ_max: int = 50
    exponent_pairs: tuple[tuple[float, float], ...] = field(default_factory=default_exponent_pairs)

    def __post_init__(self) -> None:
        if self.occ_max < 1:
            raise ValueError(f"occ_max must be >= 1, got {self.occ_max}")
        for e1, e2 in self.exponent_pairs:
            if not (np.isfinite(e1) and np.isfinite(e2)):
                raise ValueError(f"non-finite exponent pair ({e1}, {e2})")


@dataclass(frozen=True)
class ScalingSpec:
    gates: tuple[tuple[GateTask, PulseSet], ...]
    eps_over_xi: tuple[float, ...] = field(default_factory=default_eps_grid)
    slope_window: tuple[float, float] = SLOPE_WINDOW

    def __post_init__(self) -> None:
        grid = tuple(float(r) for r in self.eps_over_xi)
        if any(r <= 0 for r in grid):
            raise ValueError("eps_over_xi grid must be strictly positive (zero shift "
                             "is excluded from log-scale sweeps)")
        if list(grid) != sorted(grid):
            raise ValueError("eps_over_xi grid must be sorted ascending")
        object.__setattr__(self, "eps_over_xi", grid)


@dataclass
class SweepResult:
    kind: str  # "heatmap" | "scaling"
    axes: dict
    values: dict
    rows: list[tuple]
    provenance: dict


# ---------------------------------------------------------------------------
# cell evaluation
# ---------------------------------------------------------------------------


def _infidelity_at_eps(args) -> tuple[float, float]:
    """Worker entry: one full propagation at a given shift."""
    eps, task, pulse, settings, u0 = args
    try:
        u_eff = propagate_shifted(task.oscillator, eps, pulse, settings).final_unitary
    except PropagationError:
        return eps, float("nan")
    d = task.oscillator.essential_levels
    overlap = np.trace(rotating_frame_propagator(u0, u_eff)[:d, :d]) / d
    return eps, 1.0 - float(abs(overlap) ** 2)


def _eps_cache(
    eps_values: list[float],
    task: GateTask,
    pulse: PulseSet,
    settings: PropagationSettings,
    workers: int,
) -> dict[float, float]:
    """Map each unique shift to its infidelity, one propagation per shift."""
    u0 = propagate_shifted(task.oscillator, 0.0, pulse, settings).final_unitary
    unique = sorted(set(eps_values))
    jobs = [(eps, task, pulse, settings, u0) for eps in unique]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_infidelity_at_eps, jobs, chunksize=8))
    else:
        results = [_infidelity_at_eps(job) for job in jobs]
    return dict(results)


def _base_provenance(settings: PropagationSettings, extra: dict | None) -> dict:
    prov = {
        "code_version": __version__,
        "kernel_backend": BACKEND,
        "propagation": {
            "steps_per_ns": settings.steps_per_ns,
            "unitarity_tol": settings.unitarity_tol,
            "integrator": settings.integrator,
        },
    }
    if extra:
        prov.update(extra)
    return prov


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------


def run_heatmap(
    spec: HeatmapSpec,
    settings: PropagationSettings = PropagationSettings(),
    *,
    workers: int = 1,
    provenance: dict | None = None,
) -> SweepResult:
    """Infidelity over (n1, n2) in [0, occ_max]^2 for each exponent pair.

    Cross-Kerr strengths are 10**e * xi per spectator photon.  The (0, 0)
    cell compares the unshifted propagator against itself, so its infidelity
    vanishes to roundoff (< 1e-12); panels with e1 == e2 are exactly
    symmetric because equal shifts share one cached propagation.
    """
    task, pulse = spec.task, spec.pulse
    xi = task.oscillator.self_kerr
    occ = np.arange(spec.occ_max + 1)
    eps_values = [
        xi * (n1 * 10.0 ** e1 + n2 * 10.0 ** e2)
        for e1, e2 in spec.exponent_pairs
        for n1 in occ
        for n2 in occ
    ]
    cache = _eps_cache(eps_values, task, pulse, settings, workers)

    values: dict[tuple[float, float], np.ndarray] = {}
    rows: list[tuple] = []
    for e1, e2 in spec.exponent_pairs:
        panel = np.empty((spec.occ_max + 1, spec.occ_max + 1))
        for n1 in occ:
            for n2 in occ:
                eps = xi * (n1 * 10.0 ** e1 + n2 * 10.0 ** e2)
                infid = cache[eps]
                panel[n1, n2] = infid
                rows.append((task.label, e1, e2, int(n1), int(n2), eps / xi, infid))
        values[(e1, e2)] = panel

    prov = _base_provenance(settings, provenance)
    prov.update(
        {
            "kind": "heatmap",
            "occ_max": spec.occ_max,
            "exponent_pairs": [list(p) for p in spec.exponent_pairs],
            "gate": task.label,
            "failures": sorted(e for e, v in cache.items() if not np.isfinite(v)),
        }
    )
    axes = {"occupations": occ.tolist(), "exponent_pairs": list(spec.exponent_pairs)}
    return SweepResult("heatmap", axes, values, rows, prov)


def run_scaling(
    spec: ScalingSpec,
    settings: PropagationSettings = PropagationSettings(),
    *,
    workers: int = 1,
    provenance: dict | None = None,
) -> SweepResult:
    """Infidelity against eps/xi for each synthesized gate."""
    values: dict[str, np.ndarray] = {}
    rows: list[tuple] = []
    failures: list = []
    for task, pulse in spec.gates:
        xi = task.oscillator.self_kerr
        eps_values = [r * xi for r in spec.eps_over_xi]
        cache = _eps_cache(eps_values, task, pulse, settings, workers)
        curve = np.array([cache[r * xi] for r in spec.eps_over_xi])
        values[task.label] = curve
        for r, infid in zip(spec.eps_over_xi, curve):
            rows.append((task.label, "", "", "", "", r, float(infid)))
        failures.extend((task.label, e) for e, v in cache.items() if not np.isfinite(v))

    prov = _base_provenance(settings, provenance)
    prov.update(
        {
            "kind": "scaling",
            "eps_over_xi": list(spec.eps_over_xi),
            "slope_window": list(spec.slope_window),
            "gates": [task.label for task, _ in spec.gates],
            "failures": failures,
        }
    )
    axes = {"eps_over_xi": list(spec.eps_over_xi), "gates": [t.label for t, _ in spec.gates]}
    return SweepResult("scaling", axes, values, rows, prov)


# ---------------------------------------------------------------------------
# curve analysis
# ---------------------------------------------------------------------------


def fit_slope(
    eps_over_xi: np.ndarray,
    infidelity: np.ndarray,
    window: tuple[float, float] = SLOPE_WINDOW,
) -> float:
    """Least-squares slope of log10(infidelity) vs log10(eps/xi) in a window."""
    eps_over_xi = np.asarray(eps_over_xi, dtype=float)
    infidelity = np.asarray(infidelity, dtype=float)
    lo, hi = window
    mask = (eps_over_xi >= lo) & (eps_over_xi <= hi)
    if mask.sum() < 2:
        raise ValueError(
            f"only {mask.sum()} grid point(s) inside the slope window "
            f"[{lo:.3e}, {hi:.3e}]; densify the eps_over_xi grid"
        )
    slope, _ = np.polyfit(np.log10(eps_over_xi[mask]), np.log10(infidelity[mask]), 1)
    return float(slope)


def rescale_collapse(
    curves: dict[str, tuple[np.ndarray, np.ndarray]], anchor_eps: float = 1e-4
) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """Divide each curve by its value at the anchor shift (log-log interpolated
    between neighbors when the anchor is not a grid point)."""
    out = {}
    for label, (grid, vals) in curves.items():
        grid = np.asarray(grid, dtype=float)
        vals = np.asarray(vals, dtype=float)
        if not (grid[0] <= anchor_eps <= grid[-1]):
            raise ValueError(
                f"anchor {anchor_eps:.3e} outside grid range "
                f"[{grid[0]:.3e}, {grid[-1]:.3e}] for curve {label!r}"
            )
        exact = np.nonzero(grid == anchor_eps)[0]
        if exact.size:
            ref = vals[exact[0]]
        else:
            ref = 10.0 ** np.interp(np.log10(anchor_eps), np.log10(grid), np.log10(vals))
        out[label] = (grid, vals / ref)
    return out


# ---------------------------------------------------------------------------
# output files
# ---------------------------------------------------------------------------


def write_sweep_csv(result: SweepResult, path: str | Path) -> None:
    """Fixed-schema CSV, one row per cell; floats rendered with repr for
    byte-identical reruns."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for row in result.rows:
            writer.writerow([x if isinstance(x, (str, int)) else repr(float(x)) for x in row])


def write_provenance(result: SweepResult, path: str | Path) -> None:
    Path(path).write_text(json.dumps(result.provenance, indent=2, sort_keys=True) + "\n")


def read_scaling_csv(path: str | Path) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """Curves {gate: (eps_over_xi, infidelity)} from a scaling sweep CSV."""
    curves: dict[str, list[tuple[float, float]]] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in CSV_COLUMNS if c not in (reader.fieldnames or [])]
        if missing:
            raise ValueError(f"CSV is missing required columns: {missing}")
        for row in reader:
            curves.setdefault(row["gate"], []).append(
                (float(row["eps_over_xi"]), float(row["infidelity"]))
            )
    out = {}
    for label, pts in curves.items():
        pts.sort()
        grid = np.array([p[0] for p in pts])
        vals = np.array([p[1] for p in pts])
        out[label] = (grid, vals)
    return out
