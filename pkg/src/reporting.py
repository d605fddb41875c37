"""Fleet-level aggregation of per-qubit metrics.

Chip rows report mean ± population standard deviation of each metric, so a
single-qubit chip shows ± 0.00. Rounding happens only when rendering text;
CSV and JSON carry full precision.
"""

import csv
import io
import json
import logging
from collections import defaultdict

import numpy as np
from rich.console import Console
from rich.table import Table

from src.errors import InvalidArgumentError
from src.models import (
    METRIC_NAMES,
    ChipSummary,
    HistogramResult,
    HistogramSpec,
    MetricStat,
    OutputFormat,
    QubitMetrics,
)

logger = logging.getLogger(__name__)

TABLE_COLUMNS = ("Chip", "Qubits", "Response", "Bias", "Negative S.", "Positive S.")
CSV_COLUMNS = ("chip_id", "qubit_count") + tuple(
    f"{name}_{part}" for name in METRIC_NAMES for part in ("mean", "std")
)


def _stat(values: list[float]) -> MetricStat:
    arr = np.asarray(values, dtype=float)
    return MetricStat(mean=float(arr.mean()), std=float(arr.std()))


def _summarize(metrics: list[QubitMetrics], chip_id: str) -> ChipSummary:
    return ChipSummary(
        chip_id=chip_id,
        qubit_count=len(metrics),
        **{name: _stat([m.metric(name) for m in metrics]) for name in METRIC_NAMES},
    )


def summarize_chip(metrics: list[QubitMetrics]) -> ChipSummary:
    """Mean and population std of each metric over one chip's qubits."""
    if not metrics:
        raise InvalidArgumentError("cannot summarize an empty chip")
    chips = sorted({m.chip_id for m in metrics})
    if len(chips) > 1:
        raise InvalidArgumentError(f"metrics span several chips: {chips}")
    return _summarize(metrics, chips[0])


def summarize_fleet(metrics: list[QubitMetrics], label: str) -> ChipSummary:
    """One row pooling every qubit of every chip."""
    if not metrics:
        raise InvalidArgumentError("cannot summarize an empty fleet")
    return _summarize(metrics, label)


def summarize_chips(metrics: list[QubitMetrics]) -> list[ChipSummary]:
    by_chip: dict[str, list[QubitMetrics]] = defaultdict(list)
    for m in metrics:
        by_chip[m.chip_id].append(m)
    return sort_summaries(summarize_chip(group) for group in by_chip.values())


def sort_summaries(summaries) -> list[ChipSummary]:
    """Descending qubit count, then chip name."""
    return sorted(summaries, key=lambda s: (-s.qubit_count, s.chip_id))


def histogram(metrics: list[QubitMetrics], spec: HistogramSpec) -> HistogramResult:
    """Bin one metric; values outside [bin_lo, bin_hi] are tallied as outliers."""
    values = np.array([m.metric(spec.metric) for m in metrics], dtype=float)
    below = int(np.count_nonzero(values < spec.bin_lo))
    above = int(np.count_nonzero(values > spec.bin_hi))
    inside = values[(values >= spec.bin_lo) & (values <= spec.bin_hi)]
    counts, edges = np.histogram(inside, bins=spec.bin_count, range=(spec.bin_lo, spec.bin_hi))
    centers = 0.5 * (edges[:-1] + edges[1:])
    if below or above:
        logger.warning("%s histogram: %d value(s) outside [%s, %s]", spec.metric, below + above, spec.bin_lo, spec.bin_hi)
    return HistogramResult(
        spec=spec,
        bins=[(float(c), int(n)) for c, n in zip(centers, counts)],
        below=below,
        above=above,
    )


def _render_table(summaries: list[ChipSummary]) -> str:
    table = Table(title="Q-RBPN summary")
    for i, name in enumerate(TABLE_COLUMNS):
        table.add_column(name, justify="left" if i == 0 else "right", no_wrap=True)
    for s in summaries:
        table.add_row(s.chip_id, str(s.qubit_count), *(s.stat(name).render() for name in METRIC_NAMES))
    buffer = io.StringIO()
    Console(file=buffer, width=200, color_system=None, force_terminal=False).print(table)
    return buffer.getvalue()


def _summary_record(s: ChipSummary) -> dict:
    record: dict = {"chip_id": s.chip_id, "qubit_count": s.qubit_count}
    for name in METRIC_NAMES:
        stat = s.stat(name)
        record[f"{name}_mean"] = stat.mean
        record[f"{name}_std"] = stat.std
    return record


def _summary_from_record(record: dict) -> ChipSummary:
    return ChipSummary(
        chip_id=str(record["chip_id"]),
        qubit_count=int(record["qubit_count"]),
        **{
            name: MetricStat(float(record[f"{name}_mean"]), float(record[f"{name}_std"]))
            for name in METRIC_NAMES
        },
    )


def render(summaries: list[ChipSummary], fmt: OutputFormat | str = OutputFormat.TABLE) -> str:
    """Render summary rows as a text table, CSV or JSON."""
    try:
        fmt = OutputFormat(fmt)
    except ValueError:
        raise InvalidArgumentError(
            f"unknown format {fmt!r}; choose from {[f.value for f in OutputFormat]}"
        ) from None
    rows = sort_summaries(summaries)

    if fmt is OutputFormat.TABLE:
        return _render_table(rows)

    if fmt is OutputFormat.CSV:
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for s in rows:
            writer.writerow(_summary_record(s))
        return buffer.getvalue()

    return json.dumps([_summary_record(s) for s in rows], indent=2) + "\n"


def summaries_from_csv(text: str) -> list[ChipSummary]:
    return [_summary_from_record(r) for r in csv.DictReader(io.StringIO(text))]


def summaries_from_json(text: str) -> list[ChipSummary]:
    return [_summary_from_record(r) for r in json.loads(text)]
