#!/usr/bin/env python3
"""Command-line front end for the qubit benchmarking protocol.

Usage:
    uv run python main.py simulate --backend gate --qubits 0,1 --out runs/chip.jsonl
    uv run python main.py fit runs/chip.jsonl --out runs/chip.csv
    uv run python main.py report runs/*.csv
    uv run python main.py export-jobs --backend anneal --out jobs.json
    uv run python main.py import-results jobs.json results.json --out runs/hw.jsonl
    uv run python main.py plot-data runs/chip.jsonl --out curve.csv
    uv run python main.py phi-sweep --points 101 --exact
"""

import argparse
import json
import os
import sys
from pathlib import Path

from rich.console import Console
from rich.markup import escape
from rich.table import Table

# Add src to path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from src.backends import NOISE_PRESETS
from src.config import RunConfig, setup_logging
from src.errors import ConfigError, QRBPNError
from src.models import METRIC_NAMES, ComputeModel, FitWindow, HistogramResult, OutputFormat
from src.pipeline import (
    cmd_export_jobs,
    cmd_fit,
    cmd_import_results,
    cmd_phi_sweep,
    cmd_plot_data,
    cmd_report,
    cmd_simulate,
)


console = Console()


def parse_range(text: str) -> tuple[float, float]:
    """Parse "lo:hi" into a float pair."""
    try:
        lo, hi = (float(part) for part in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi, got {text!r}") from None
    if lo >= hi:
        raise argparse.ArgumentTypeError(f"range needs lo < hi, got {text!r}")
    return lo, hi


def parse_qubits(text: str) -> list[int]:
    try:
        return [int(q) for q in text.split(",") if q.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated qubit indices, got {text!r}") from None


def load_noise_file(path: Path) -> dict:
    """Noise parameters from JSON: flat fields, plus optional "preset" and "qubit_noise" keys."""
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read noise file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"noise file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"noise file {path} must hold a JSON object")
    overrides = {"noise_preset": data.pop("preset", None), "qubit_noise": data.pop("qubit_noise", None)}
    overrides["noise"] = data or None
    return overrides


def add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="JSON file whose keys mirror these flags")
    parser.add_argument("--backend", choices=[m.value for m in ComputeModel])
    parser.add_argument("--beta", type=float)
    parser.add_argument("--points", type=int)
    parser.add_argument("--h-min", type=float)
    parser.add_argument("--h-max", type=float)
    parser.add_argument("--shots", type=int)
    parser.add_argument("--num-reads", type=int, help="annealer reads per programming cycle")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--qubits", type=parse_qubits, help="comma-separated, e.g. 0,1,2")
    parser.add_argument("--chip", help="chip id stamped into output files")
    parser.add_argument("--noise-file", type=Path)
    parser.add_argument("--noise-preset", choices=sorted(NOISE_PRESETS))
    parser.add_argument("--window", type=parse_range, help="fit window lo:hi, e.g. --window=-0.1:0.1")
    parser.add_argument("--weighted", action="store_true", default=None, help="inverse-variance weighted fit")
    parser.add_argument("--exact", action="store_true", default=None, help="closed-form probabilities, no sampling")
    parser.add_argument("--phi", type=float)
    parser.add_argument("--workers", type=int)


def run_config(args: argparse.Namespace) -> RunConfig:
    overrides = {
        "model": args.backend,
        "beta": args.beta,
        "points": args.points,
        "h_min": args.h_min,
        "h_max": args.h_max,
        "shots": args.shots,
        "num_reads": args.num_reads,
        "seed": args.seed,
        "qubits": args.qubits,
        "chip_id": args.chip,
        "noise_preset": args.noise_preset,
        "window": args.window,
        "weighted_fit": args.weighted,
        "exact": args.exact,
        "phi": args.phi,
        "workers": args.workers,
    }
    if args.noise_file:
        for key, value in load_noise_file(args.noise_file).items():
            if value is not None and overrides.get(key) is None:
                overrides[key] = value
    return RunConfig.from_sources(args.config, overrides)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qrbpn", description="Single-qubit response benchmarking")
    parser.add_argument("--log-level", help="overrides QRBPN_LOG_LEVEL")
    verbs = parser.add_subparsers(dest="verb", required=True)

    p = verbs.add_parser("simulate", help="run the protocol on a simulated backend")
    add_run_flags(p)
    p.add_argument("--out", type=Path, required=True)

    p = verbs.add_parser("fit", help="extract per-qubit metrics from a sweep file")
    p.add_argument("sweep", type=Path)
    p.add_argument("--window", type=parse_range)
    p.add_argument("--weighted", action="store_true", default=None)
    p.add_argument("--out", type=Path)

    p = verbs.add_parser("report", help="summarize metrics CSVs per chip")
    p.add_argument("metrics", type=Path, nargs="+")
    p.add_argument("--format", choices=[f.value for f in OutputFormat], default=OutputFormat.TABLE.value)
    p.add_argument("--pool-label", help="add a row pooling every qubit under this label")
    p.add_argument("--out", type=Path)

    p = verbs.add_parser("export-jobs", help="write a hardware job bundle")
    add_run_flags(p)
    p.add_argument("--out", type=Path, required=True)

    p = verbs.add_parser("import-results", help="turn hardware counts into a sweep file")
    p.add_argument("bundle", type=Path)
    p.add_argument("results", type=Path)
    p.add_argument("--out", type=Path, required=True)

    p = verbs.add_parser("plot-data", help="plot-ready CSV of a sweep or a metric histogram")
    p.add_argument("source", type=Path, help="sweep file, or metrics CSV with --metric")
    p.add_argument("--metric", choices=METRIC_NAMES)
    p.add_argument("--bins", type=int, default=20)
    p.add_argument("--range", dest="value_range", type=parse_range)
    p.add_argument("--out", type=Path, required=True)

    p = verbs.add_parser("phi-sweep", help="repeat the gate-model protocol over phi")
    add_run_flags(p)
    p.add_argument("--count", type=int, default=10)
    return parser


def show_fit(outcome) -> None:
    table = Table(title="Per-qubit metrics")
    for name in ("Chip", "Qubit", "Response", "Bias", "Negative S.", "Positive S.", "Clamped"):
        table.add_column(name, justify="left" if name in ("Chip", "Qubit") else "right")
    for m in outcome.metrics:
        table.add_row(
            m.chip_id, m.qubit_id,
            f"{m.response:.3f} ± {m.response_std_error:.3f}",
            f"{m.bias:.3f} ± {m.bias_std_error:.3f}",
            f"{m.neg_saturation:.3f}", f"{m.pos_saturation:.3f}",
            str(m.clamped_points),
        )
    console.print(table)
    for failure in outcome.failures:
        console.print(f"[yellow]qubit {escape(failure.qubit_id)}:[/yellow] {escape(failure.error)}")


def run(args: argparse.Namespace) -> int:
    if args.verb == "simulate":
        result = cmd_simulate(run_config(args), args.out)
        console.print(f"[green]✓[/green] {len(result.cells)} cells written to {args.out}")
        return 0

    if args.verb == "fit":
        window = FitWindow(*args.window) if args.window else None
        outcome = cmd_fit(args.sweep, window, args.weighted, args.out)
        show_fit(outcome)
        return 0 if outcome.ok else 1

    if args.verb == "report":
        text = cmd_report(args.metrics, args.format, args.pool_label, args.out)
        if args.out is None:
            console.print(text, markup=False, highlight=False, end="")
        return 0

    if args.verb == "export-jobs":
        bundle = cmd_export_jobs(run_config(args), args.out)
        console.print(f"[green]✓[/green] {len(bundle.jobs)} jobs written to {args.out}")
        return 0

    if args.verb == "import-results":
        result = cmd_import_results(args.bundle, args.results, args.out)
        console.print(f"[green]✓[/green] {len(result.cells)} cells written to {args.out}")
        return 0

    if args.verb == "plot-data":
        payload = cmd_plot_data(args.source, args.out, args.metric, args.bins, args.value_range)
        if isinstance(payload, HistogramResult) and payload.outliers:
            console.print(
                f"[yellow]{payload.below} value(s) below and {payload.above} above the histogram range[/yellow]"
            )
        console.print(f"[green]✓[/green] plot data written to {args.out}")
        return 0

    if args.verb == "phi-sweep":
        outcome = cmd_phi_sweep(run_config(args), args.count)
        table = Table(title="Response over phi")
        table.add_column("phi", justify="right")
        table.add_column("Qubit")
        table.add_column("Response", justify="right")
        table.add_column("Bias", justify="right")
        for phi, fit in zip(outcome.phis, outcome.fits):
            for m in fit.metrics:
                table.add_row(f"{phi:.4f}", m.qubit_id, f"{m.response:.4f}", f"{m.bias:.4f}")
        console.print(table)
        return 0 if all(fit.ok for fit in outcome.fits) else 1

    raise AssertionError(f"unhandled verb {args.verb}")


def main(argv: list[str] | None = None) -> int:
    """Main entry point; returns the process exit code."""
    args = build_parser().parse_args(argv)
    try:
        setup_logging(args.log_level)
        return run(args)
    except QRBPNError as exc:
        console.print(f"[red]error:[/red] {escape(str(exc))}")
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
