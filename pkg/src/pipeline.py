"""End-to-end protocol runs behind the command-line verbs.

simulate  - protocol -> backend -> sweep file
fit       - sweep file -> per-qubit metrics CSV
report    - metrics CSVs -> chip summary table
export/import - job bundles for real hardware
plot-data - plot-ready columns of a sweep or a metric histogram
phi-sweep - the gate-model protocol repeated over measurement-plane angles
"""

import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from src.backends import Backend, get_backend
from src.config import TOOL_VERSION, RunConfig, Settings
from src.errors import ConfigError, InsufficientDataError, InvalidArgumentError
from src.jobs import (
    JobBundle,
    export_jobs,
    import_results,
    read_job_bundle,
    read_result_bundle,
    write_job_bundle,
)
from src.metrics import metrics_for_qubit
from src.models import (
    ChipSummary,
    ComputeModel,
    FitFailure,
    FitWindow,
    HistogramResult,
    HistogramSpec,
    OutputFormat,
    QubitMetrics,
)
from src.protocol import build_program, build_sweep, phi_values
from src.reporting import histogram, render, summarize_chips, summarize_fleet
from src.storage import (
    SweepCell,
    SweepHeader,
    SweepResult,
    read_metrics_csv,
    read_sweep,
    write_metrics_csv,
    write_sweep,
)

logger = logging.getLogger(__name__)

SWEEP_PLOT_COLUMNS = ("qubit", "h_in", "h_eff", "std_error", "ci_lo", "ci_hi", "clamped")
HISTOGRAM_PLOT_COLUMNS = ("bin_lo", "bin_hi", "bin_center", "count")


@dataclass
class FitOutcome:
    """Per-qubit metrics of one sweep plus the qubits that could not be fitted."""
    metrics: list[QubitMetrics] = field(default_factory=list)
    failures: list[FitFailure] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


@dataclass
class PhiSweepOutcome:
    """Metrics of every qubit at each measurement-plane angle."""
    phis: list[float] = field(default_factory=list)
    fits: list[FitOutcome] = field(default_factory=list)

    def responses(self, qubit: int | str) -> list[float]:
        qubit = str(qubit)
        return [m.response for fit in self.fits for m in fit.metrics if m.qubit_id == qubit]


class ProtocolPipeline:
    """Runs the sweep of one chip.

    Qubits are spread over a thread pool sized by `config.workers`; each cell
    draws from its own keyed random stream and results are assembled in
    qubit order, so the output never depends on the worker count.
    """

    def __init__(self, config: RunConfig):
        self.config = config
        self.sweep = build_sweep(config.grid)

    def _backend(self, qubit: int) -> Backend:
        return get_backend(self.config.model, self.config.noise_for(qubit))

    def run_qubit(self, qubit: int, variant: int = 0) -> list[SweepCell]:
        config = self.config
        backend = self._backend(qubit)
        cells = []
        for point, h in enumerate(self.sweep):
            program = build_program(config.model, h, config.beta, config.phi)
            if config.exact:
                p_plus, p_minus = backend.outcome_probabilities(program)
                cells.append(SweepCell(qubit=qubit, point=point, h_in=h, p_plus=p_plus, p_minus=p_minus))
            else:
                counts = backend.sample(config.sample_request(program, qubit, point, variant))
                cells.append(SweepCell(qubit=qubit, point=point, h_in=h,
                                       n_plus=counts.n_plus, n_minus=counts.n_minus))
        return cells

    def header(self, created_at: str) -> SweepHeader:
        config = self.config
        return SweepHeader(
            tool_version=TOOL_VERSION,
            created_at=created_at,
            chip_id=config.chip_id,
            model=config.model,
            beta=config.beta,
            shots=config.shot_count,
            seed=config.seed,
            exact=config.exact,
            phi=config.phi,
            config=config.echo(),
        )

    def simulate(self, created_at: str, variant: int = 0) -> SweepResult:
        config = self.config
        logger.info(
            "simulating %d qubit(s) x %d points on %s (%s, workers=%d)",
            len(config.qubits), len(self.sweep), config.chip_id,
            "exact" if config.exact else f"{config.shot_count} shots", config.workers,
        )
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            per_qubit = list(pool.map(lambda q: self.run_qubit(q, variant), sorted(config.qubits)))
        cells = [cell for qubit_cells in per_qubit for cell in qubit_cells]
        return SweepResult(header=self.header(created_at), cells=cells)


def create_pipeline(config: RunConfig) -> ProtocolPipeline:
    return ProtocolPipeline(config)


def cmd_simulate(config: RunConfig, out: Path | None = None) -> SweepResult:
    result = create_pipeline(config).simulate(Settings.from_env().created_at())
    if out is not None:
        write_sweep(out, result)
    return result


def _window_from_header(header: SweepHeader) -> FitWindow:
    window = header.config.get("window")
    if window:
        return FitWindow(*window)
    return FitWindow()


def fit_sweep(result: SweepResult, window: FitWindow | None = None, weighted: bool | None = None) -> FitOutcome:
    """Metrics for every qubit of a sweep; qubits with too few in-window points become failures."""
    header = result.header
    window = window or _window_from_header(header)
    if weighted is None:
        weighted = bool(header.config.get("weighted_fit", False))

    outcome = FitOutcome()
    for qubit in result.qubits():
        curve = result.curve_for(qubit)
        if curve.clamped_count:
            logger.warning("qubit %s: %d clamped point(s)", qubit, curve.clamped_count)
        try:
            outcome.metrics.append(
                metrics_for_qubit(curve, window, qubit_id=str(qubit), chip_id=header.chip_id, weighted=weighted)
            )
        except InsufficientDataError as exc:
            logger.warning("qubit %s: %s", qubit, exc)
            outcome.failures.append(FitFailure(chip_id=header.chip_id, qubit_id=str(qubit), error=str(exc)))
    return outcome


def cmd_fit(
    source: Path | SweepResult,
    window: FitWindow | None = None,
    weighted: bool | None = None,
    out: Path | None = None,
) -> FitOutcome:
    """Fit a sweep file (or an in-memory sweep) and optionally write the metrics CSV.

    Without an explicit window the one recorded in the sweep's config is used.
    """
    result = source if isinstance(source, SweepResult) else read_sweep(source)
    outcome = fit_sweep(result, window, weighted)
    if out is not None:
        write_metrics_csv(out, [*outcome.metrics, *outcome.failures])
    return outcome


def collect_metrics(paths: list[Path]) -> list[QubitMetrics]:
    metrics: list[QubitMetrics] = []
    for path in paths:
        rows, failures = read_metrics_csv(path)
        for failure in failures:
            logger.warning("%s: skipping qubit %s of %s: %s", path, failure.qubit_id, failure.chip_id, failure.error)
        metrics.extend(rows)
    return metrics


def build_summaries(metrics: list[QubitMetrics], pool_label: str | None = None) -> list[ChipSummary]:
    """One row per chip, plus a pooled row when labelled; no metrics gives no rows."""
    if not metrics:
        logger.warning("no fitted qubits to report")
    summaries = summarize_chips(metrics)
    if pool_label and metrics:
        summaries.append(summarize_fleet(metrics, pool_label))
    return summaries


def cmd_report(
    paths: list[Path],
    fmt: OutputFormat | str = OutputFormat.TABLE,
    pool_label: str | None = None,
    out: Path | None = None,
) -> str:
    """Render one summary row per chip across any number of metrics CSVs."""
    text = render(build_summaries(collect_metrics(paths), pool_label), fmt)
    if out is not None:
        _write_text(out, text)
    return text


def cmd_export_jobs(config: RunConfig, out: Path | None = None) -> JobBundle:
    bundle = export_jobs(config, Settings.from_env().created_at())
    if out is not None:
        write_job_bundle(out, bundle)
    return bundle


def cmd_import_results(bundle_path: Path, results_path: Path, out: Path | None = None) -> SweepResult:
    result = import_results(read_job_bundle(bundle_path), read_result_bundle(results_path))
    if out is not None:
        write_sweep(out, result)
    return result


def sweep_plot_rows(result: SweepResult) -> list[dict]:
    rows = []
    for qubit in result.qubits():
        for point in result.curve_for(qubit).points:
            e = point.estimate
            rows.append({
                "qubit": qubit,
                "h_in": point.h_in,
                "h_eff": e.value,
                "std_error": e.std_error,
                "ci_lo": e.ci_lo,
                "ci_hi": e.ci_hi,
                "clamped": e.clamped,
            })
    return rows


def metric_histogram(
    metrics: list[QubitMetrics],
    metric: str,
    bins: int = 20,
    value_range: tuple[float, float] | None = None,
) -> HistogramResult:
    """Histogram of one metric; the range defaults to the span of the data."""
    if not metrics:
        raise InvalidArgumentError("no fitted qubits to histogram")
    if value_range is None:
        values = np.array([m.metric(metric) for m in metrics], dtype=float)
        lo, hi = float(values.min()), float(values.max())
        if lo == hi:
            lo, hi = lo - 0.5, hi + 0.5
        value_range = (lo, hi)
    return histogram(metrics, HistogramSpec(metric, value_range[0], value_range[1], bins))


def histogram_plot_rows(result: HistogramResult) -> list[dict]:
    spec = result.spec
    width = (spec.bin_hi - spec.bin_lo) / spec.bin_count
    return [
        {
            "bin_lo": spec.bin_lo + i * width,
            "bin_hi": spec.bin_lo + (i + 1) * width,
            "bin_center": center,
            "count": count,
        }
        for i, (center, count) in enumerate(result.bins)
    ]


def cmd_plot_data(
    source: Path,
    out: Path | None = None,
    metric: str | None = None,
    bins: int = 20,
    value_range: tuple[float, float] | None = None,
) -> list[dict] | HistogramResult:
    """Plot-ready CSV: the curve behind a sweep file, or a histogram of a metrics CSV when `metric` is set."""
    if metric is None:
        rows = sweep_plot_rows(read_sweep(source))
        columns = SWEEP_PLOT_COLUMNS
        payload: list[dict] | HistogramResult = rows
    else:
        metrics, _ = read_metrics_csv(source)
        payload = metric_histogram(metrics, metric, bins, value_range)
        rows = histogram_plot_rows(payload)
        columns = HISTOGRAM_PLOT_COLUMNS
    if out is not None:
        _write_rows(out, columns, rows)
    return payload


def cmd_phi_sweep(config: RunConfig, count: int = 10) -> PhiSweepOutcome:
    """Repeat the gate-model protocol at `count` measurement-plane angles.

    The angle index is folded into the random stream key, so each angle
    sees independent shots.
    """
    if config.model is not ComputeModel.GATE:
        raise InvalidArgumentError("the phi sweep applies to the gate model only")
    created_at = Settings.from_env().created_at()
    outcome = PhiSweepOutcome()
    for index, phi in enumerate(phi_values(count)):
        pipeline = create_pipeline(config.model_copy(update={"phi": phi}))
        result = pipeline.simulate(created_at, variant=index)
        outcome.phis.append(phi)
        outcome.fits.append(fit_sweep(result, config.fit_window, config.weighted_fit))
    return outcome


def _write_text(path: Path, text: str) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc}") from exc


def _write_rows(path: Path, columns: tuple[str, ...], rows: list[dict]) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as handle:
            writer = csv.DictWriter(handle, fieldnames=columns, lineterminator="\n")
            writer.writeheader()
            writer.writerows(rows)
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc}") from exc
