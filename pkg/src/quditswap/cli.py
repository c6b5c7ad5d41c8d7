"""Command-line interface: synthesize | evaluate | sweep | slope.

Exit codes: 0 success, 1 usage or file-contract errors, 2 numerical
failures (synthesis below threshold, propagation failures).  Output
directory, seed, and worker count resolve as flag > environment
(QUDITSWAP_OUT / QUDITSWAP_SEED / QUDITSWAP_WORKERS) > config file.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, load_config
from .control import SynthesisError, synthesize, write_trace
from .operators import GateTask
from .propagator import PropagationError
from .pulses import PulseSet, load_pulse, save_pulse
from .spectator import decay_report
from .sweeps import (
    HeatmapSpec,
    ScalingSpec,
    default_eps_grid,
    fit_slope,
    read_scaling_csv,
    run_heatmap,
    run_scaling,
    write_provenance,
    write_sweep_csv,
)

USAGE_EXIT = 1
NUMERICAL_EXIT = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_EXIT)


def _build_parser() -> _Parser:
    parser = _Parser(prog="quditswap", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="YAML run configuration")
    common.add_argument("--out", help="output directory (default: config output_dir)")
    common.add_argument("--seed", type=int, help="override the config seed")
    common.add_argument("--workers", type=int, help="override the config worker count")

    sub.add_parser("synthesize", parents=[common], help="optimize pulses for all configured gates")

    p_eval = sub.add_parser("evaluate", parents=[common], help="evaluate one pulse at one shift")
    p_eval.add_argument("--pulse", required=True, help="pulse JSON produced by synthesize")
    p_eval.add_argument("--eps-over-xi", type=float, required=True, help="shift in units of the self-Kerr")

    p_sweep = sub.add_parser("sweep", parents=[common], help="run a heatmap or scaling sweep")
    p_sweep.add_argument("--kind", choices=("heatmap", "scaling"), required=True)

    p_slope = sub.add_parser("slope", help="re-fit slopes from an existing scaling CSV")
    p_slope.add_argument("--csv", required=True, help="scaling sweep CSV")
    p_slope.add_argument(
        "--window-exponents",
        nargs=2,
        type=float,
        default=(-4.05, -3.95),
        metavar=("LO", "HI"),
        help="log10 bounds of the fit window",
    )
    return parser


def _resolve(cfg: RunConfig, args) -> RunConfig:
    out = args.out or os.environ.get("QUDITSWAP_OUT") or cfg.output_dir
    seed = args.seed
    if seed is None and os.environ.get("QUDITSWAP_SEED"):
        seed = int(os.environ["QUDITSWAP_SEED"])
    workers = args.workers
    if workers is None and os.environ.get("QUDITSWAP_WORKERS"):
        workers = int(os.environ["QUDITSWAP_WORKERS"])
    return dataclasses.replace(
        cfg,
        output_dir=out,
        seed=cfg.seed if seed is None else seed,
        workers=cfg.workers if workers is None else workers,
    )


def _pulse_path(out: Path, task: GateTask) -> Path:
    return out / f"pulse_{task.label}.json"


def _pulse_extra(cfg: RunConfig, task: GateTask, final_infidelity: float) -> dict:
    return {
        "gate": {"swap_from": task.swap_from, "swap_to": task.swap_to},
        "oscillator": {
            "self_kerr_ghz": cfg.self_kerr_ghz,
            "rotation_freq_ghz": cfg.rotation_freq_ghz,
            "guard_levels": cfg.guard_levels,
        },
        "oscillator_hash": cfg.oscillator_hash(),
        "config_hash": cfg.config_hash(),
        "final_infidelity": final_infidelity,
    }


def _synthesize_gate(cfg: RunConfig, task: GateTask, out: Path) -> tuple[PulseSet, float]:
    pulse, history = synthesize(
        task,
        cfg.optimizer_settings(),
        shape=cfg.pulse_shape(),
        propagation=cfg.propagation_settings(),
    )
    best = min(history, key=lambda h: h.total)
    save_pulse(pulse, _pulse_path(out, task), extra=_pulse_extra(cfg, task, best.infidelity))
    write_trace(history, out / f"trace_{task.label}.csv")
    return pulse, best.infidelity


def _load_or_synthesize(cfg: RunConfig, out: Path) -> list[tuple[GateTask, PulseSet]]:
    gates = []
    for task in cfg.gate_tasks():
        path = _pulse_path(out, task)
        if path.exists():
            pulse, doc = load_pulse(path)
            matches = (
                doc.get("oscillator_hash") == cfg.oscillator_hash()
                and doc.get("gate") == {"swap_from": task.swap_from, "swap_to": task.swap_to}
                and pulse.basis.duration == task.duration
            )
            if matches:
                gates.append((task, pulse))
                continue
            print(f"note: {path} does not match the config; re-synthesizing", file=sys.stderr)
        pulse, infid = _synthesize_gate(cfg, task, out)
        print(f"synthesized {task.label}: infidelity {infid:.3e}")
        gates.append((task, pulse))
    return gates


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_synthesize(cfg: RunConfig) -> int:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    tasks = cfg.gate_tasks()
    if not tasks:
        print("no gates configured; nothing to do")
        return 0
    failures = 0
    for task in tasks:
        pulse, infid = _synthesize_gate(cfg, task, out)
        status = "ok" if infid <= cfg.synthesis_threshold else "MISSED"
        if status == "MISSED":
            failures += 1
        print(
            f"{task.label}: infidelity {infid:.3e} (threshold {cfg.synthesis_threshold:.1e}) "
            f"[{status}] -> {_pulse_path(out, task)}"
        )
    return 0 if failures == 0 else NUMERICAL_EXIT


def cmd_evaluate(cfg: RunConfig, pulse_file: str, eps_over_xi: float) -> int:
    pulse, doc = load_pulse(pulse_file)
    if doc.get("oscillator_hash") != cfg.oscillator_hash():
        print(
            f"error: pulse file {pulse_file} was synthesized for a different "
            f"oscillator (hash {doc.get('oscillator_hash')!r} != {cfg.oscillator_hash()!r})",
            file=sys.stderr,
        )
        return USAGE_EXIT
    gate = doc["gate"]
    spec = cfg.oscillator_spec(essential_levels=int(gate["swap_to"]) + 1)
    task = GateTask(int(gate["swap_from"]), int(gate["swap_to"]), pulse.basis.duration, spec)
    report = decay_report(pulse, task, eps_over_xi, cfg.propagation_settings())
    payload = dataclasses.asdict(report)
    payload.update({"gate": task.label, "config_hash": cfg.config_hash()})
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


def cmd_sweep(cfg: RunConfig, kind: str) -> int:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    gates = _load_or_synthesize(cfg, out)
    if not gates:
        print("no gates configured; nothing to sweep")
        return 0
    provenance = {"config": cfg.to_dict(), "config_hash": cfg.config_hash(), "seed": cfg.seed}
    settings = cfg.propagation_settings()

    if kind == "scaling":
        spec = ScalingSpec(
            gates=tuple(gates),
            eps_over_xi=cfg.eps_over_xi if cfg.eps_over_xi is not None else default_eps_grid(),
            slope_window=cfg.slope_window(),
        )
        result = run_scaling(spec, settings, workers=cfg.workers, provenance=provenance)
        csv_path = out / "scaling.csv"
        write_sweep_csv(result, csv_path)
        write_provenance(result, out / "scaling.provenance.json")
        grid = np.array(spec.eps_over_xi)
        for label, curve in result.values.items():
            slope = fit_slope(grid, curve, spec.slope_window)
            print(
                f"{label}: infidelity [{curve.min():.3e}, {curve.max():.3e}], "
                f"slope {slope:.3f} in window [{spec.slope_window[0]:.2e}, {spec.slope_window[1]:.2e}]"
            )
        print(f"wrote {csv_path}")
    else:
        all_rows = []
        failures = []
        first = True
        for task, pulse in gates:
            spec = HeatmapSpec(
                task=task,
                pulse=pulse,
                occ_max=cfg.occ_max,
                exponent_pairs=cfg.exponent_pairs(),
            )
            result = run_heatmap(spec, settings, workers=cfg.workers, provenance=provenance)
            all_rows.extend(result.rows)
            failures.extend(result.provenance["failures"])
            vals = np.concatenate([v.ravel() for v in result.values.values()])
            print(f"{task.label}: heatmap infidelity [{np.nanmin(vals):.3e}, {np.nanmax(vals):.3e}]")
            if first:
                merged = result
                first = False
        merged.rows = all_rows
        merged.provenance["failures"] = failures
        merged.provenance["gates"] = [t.label for t, _ in gates]
        csv_path = out / "heatmap.csv"
        write_sweep_csv(merged, csv_path)
        write_provenance(merged, out / "heatmap.provenance.json")
        print(f"wrote {csv_path}")
        if failures:
            return NUMERICAL_EXIT
    return 0


def cmd_slope(csv_file: str, window_exponents) -> int:
    curves = read_scaling_csv(csv_file)
    if not curves:
        print(f"error: no curves found in {csv_file}", file=sys.stderr)
        return USAGE_EXIT
    window = (10.0 ** window_exponents[0], 10.0 ** window_exponents[1])
    for label, (grid, vals) in sorted(curves.items()):
        print(f"{label}: slope {fit_slope(grid, vals, window):.4f}")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "slope":
            return cmd_slope(args.csv, args.window_exponents)
        cfg = _resolve(load_config(args.config), args)
        if args.command == "synthesize":
            return cmd_synthesize(cfg)
        if args.command == "evaluate":
            return cmd_evaluate(cfg, args.pulse, args.eps_over_xi)
        return cmd_sweep(cfg, args.kind)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return USAGE_EXIT
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_EXIT
    except (PropagationError, SynthesisError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return NUMERICAL_EXIT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_EXIT


if __name__ == "__main__":
    sys.exit(main())
