"""Render sweep CSVs into figures.

Three kinds:

``heatmap_grid``
    One panel per cross-Kerr exponent pair, occupation numbers on the axes,
    all panels sharing a fixed color scale so they are visually comparable.
``scaling``
    Log-log infidelity curves, one per gate.
``collapse``
    The same curves rescaled so every gate passes through 1 at the anchor
    shift, exposing the common slope.

Rendering is read-only and deterministic: fixed style, fixed image metadata,
no timestamps, so identical inputs give byte-identical files.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

# the sweep CSV schema (the data interface between the simulator and this tool)
CSV_COLUMNS = ("gate", "exp1", "exp2", "n1", "n2", "eps_over_xi", "infidelity")

KINDS = ("heatmap_grid", "scaling", "collapse")

PNG_METADATA = {"Software": "quditswap-plots"}


@dataclass(frozen=True)
class FigureRequest:
    csv_path: str
    output_path: str
    kind: str
    color_bounds: tuple[float, float] = (0.0, 1.0)
    gate: str | None = None  # heatmap gate filter when the CSV holds several
    anchor_eps: float = 1e-4  # collapse normalization point

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; expected one of {KINDS}")


def read_rows(path: str | Path) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames or []
        missing = [c for c in CSV_COLUMNS if c not in fields]
        if missing:
            raise ValueError(f"CSV {path} is missing required column(s): {', '.join(missing)}")
        return list(reader)


# ---------------------------------------------------------------------------
# figure builders
# ---------------------------------------------------------------------------


def _heatmap_panels(rows: list[dict], gate: str | None):
    gates = sorted({r["gate"] for r in rows})
    if gate is None:
        if len(gates) > 1:
            raise ValueError(
                f"CSV holds several gates {gates}; pass an explicit gate to plot"
            )
        gate = gates[0]
    rows = [r for r in rows if r["gate"] == gate]
    if not rows:
        raise ValueError(f"no rows for gate {gate!r}")
    panels: dict[tuple[float, float], dict[tuple[int, int], float]] = {}
    for r in rows:
        key = (float(r["exp1"]), float(r["exp2"]))
        panels.setdefault(key, {})[(int(r["n1"]), int(r["n2"]))] = float(r["infidelity"])
    grids = {}
    for key, cells in panels.items():
        occ_max = max(max(n1, n2) for n1, n2 in cells)
        grid = np.full((occ_max + 1, occ_max + 1), np.nan)
        for (n1, n2), val in cells.items():
            grid[n1, n2] = val
        grids[key] = grid
    return gate, grids


def _build_heatmap_grid(request: FigureRequest, rows: list[dict]):
    gate, grids = _heatmap_panels(rows, request.gate)
    exp1_vals = sorted({k[0] for k in grids}, reverse=True)
    exp2_vals = sorted({k[1] for k in grids}, reverse=True)
    ncols, nrows = len(exp1_vals), len(exp2_vals)
    fig, axes = plt.subplots(
        nrows,
        ncols,
        figsize=(2.0 * ncols + 1.2, 2.0 * nrows),
        squeeze=False,
        constrained_layout=True,
    )
    vmin, vmax = request.color_bounds
    image = None
    for row_idx, e2 in enumerate(exp2_vals):
        for col_idx, e1 in enumerate(exp1_vals):
            ax = axes[row_idx][col_idx]
            grid = grids.get((e1, e2))
            if grid is None:
                ax.set_axis_off()
                continue
            # rows of imshow are the y-axis (second spectator), so transpose
            image = ax.imshow(
                grid.T,
                origin="lower",
                vmin=vmin,
                vmax=vmax,
                cmap="inferno",
                interpolation="nearest",
                aspect="auto",
            )
            ax.set_title(f"({e1:g}, {e2:g})", fontsize=8)
            if row_idx == nrows - 1:
                ax.set_xlabel("$n_1$", fontsize=8)
            if col_idx == 0:
                ax.set_ylabel("$n_2$", fontsize=8)
            ax.tick_params(labelsize=6)
    fig.colorbar(image, ax=axes, label="infidelity", shrink=0.8)
    fig.suptitle(f"{gate}: infidelity vs spectator occupations", fontsize=10)
    return fig


def _curves(rows: list[dict]) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    data: dict[str, list[tuple[float, float]]] = {}
    for r in rows:
        data.setdefault(r["gate"], []).append(
            (float(r["eps_over_xi"]), float(r["infidelity"]))
        )
    out = {}
    for label, pts in sorted(data.items()):
        pts.sort()
        out[label] = (np.array([p[0] for p in pts]), np.array([p[1] for p in pts]))
    return out


def _build_scaling(request: FigureRequest, rows: list[dict], normalized: bool):
    curves = _curves(rows)
    fig, ax = plt.subplots(figsize=(5.0, 3.8), constrained_layout=True)
    for label, (grid, vals) in curves.items():
        if normalized:
            anchor = request.anchor_eps
            if not (grid[0] <= anchor <= grid[-1]):
                raise ValueError(
                    f"anchor {anchor:g} outside the grid range of curve {label!r}"
                )
            ref = 10.0 ** np.interp(np.log10(anchor), np.log10(grid), np.log10(vals))
            vals = vals / ref
        ax.loglog(grid, vals, marker="o", markersize=3, linewidth=1.0, label=label)
    ax.set_xlabel(r"$\varepsilon/\xi$")
    ax.set_ylabel("rescaled infidelity" if normalized else "infidelity")
    if normalized:
        ax.axvline(request.anchor_eps, color="gray", linewidth=0.6, linestyle=":")
    ax.grid(True, which="both", linewidth=0.3, alpha=0.5)
    ax.legend(fontsize=8)
    return fig


def build_figure(request: FigureRequest):
    """Build (without saving) the matplotlib figure for a request."""
    rows = read_rows(request.csv_path)
    if request.kind == "heatmap_grid":
        return _build_heatmap_grid(request, rows)
    return _build_scaling(request, rows, normalized=(request.kind == "collapse"))


def render(request: FigureRequest) -> Path:
    """Render the request to its output image; returns the written path."""
    fig = build_figure(request)
    out = Path(request.output_path)
    fig.savefig(out, dpi=150, metadata=PNG_METADATA)
    plt.close(fig)
    return out
