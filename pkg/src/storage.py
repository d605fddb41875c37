"""On-disk formats: line-delimited JSON sweep results and metrics CSV.

A sweep file starts with one header record followed by one record per
(qubit, point) cell, ordered by qubit then point. Sampled cells carry
counts, exact-mode cells carry the two outcome probabilities.
"""

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, ValidationError, model_validator

from src.errors import ConfigError, DataIntegrityError, SchemaError
from src.estimation import curve_from_estimates, heff_from_counts, heff_from_probabilities
from src.models import ComputeModel, EffectiveFieldEstimate, FitFailure, QubitMetrics, ResponseCurve, ShotCounts

logger = logging.getLogger(__name__)

SCHEMA_VERSION = "1.0"
SUPPORTED_MAJOR = 1

METRICS_COLUMNS = (
    "chip_id",
    "qubit_id",
    "response",
    "bias",
    "neg_saturation",
    "pos_saturation",
    "fit_points",
    "fit_rms_residual",
    "response_std_error",
    "bias_std_error",
    "clamped_points",
    "error",
)


def check_schema_version(version: str, source: str) -> None:
    """Reject files written by a newer major version of the format."""
    try:
        major = int(str(version).split(".")[0])
    except ValueError:
        raise SchemaError(f"{source}: unreadable schema version {version!r}") from None
    if major > SUPPORTED_MAJOR:
        raise SchemaError(
            f"{source}: schema version {version} is newer than supported {SCHEMA_VERSION}; upgrade the tool"
        )
    if major < SUPPORTED_MAJOR:
        raise SchemaError(f"{source}: schema version {version} is no longer supported")


class SweepHeader(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["header"] = "header"
    schema_version: str = SCHEMA_VERSION
    tool_version: str
    created_at: str
    chip_id: str
    model: ComputeModel
    beta: float
    shots: int
    seed: int
    exact: bool = False
    phi: float = 0.0
    config: dict[str, Any] = {}


class SweepCell(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["cell"] = "cell"
    qubit: int
    point: int
    h_in: float
    n_plus: int | None = None
    n_minus: int | None = None
    p_plus: float | None = None
    p_minus: float | None = None

    @model_validator(mode="after")
    def _one_payload(self) -> "SweepCell":
        has_counts = self.n_plus is not None and self.n_minus is not None
        has_probs = self.p_plus is not None and self.p_minus is not None
        if has_counts == has_probs:
            raise ValueError("a cell holds either n_plus/n_minus or p_plus/p_minus")
        return self

    @property
    def exact(self) -> bool:
        return self.p_plus is not None

    def counts(self) -> ShotCounts:
        return ShotCounts(n_plus=self.n_plus, n_minus=self.n_minus)

    def estimate(self) -> EffectiveFieldEstimate:
        if self.exact:
            return heff_from_probabilities(self.p_plus, self.p_minus)
        return heff_from_counts(self.counts())


@dataclass
class SweepResult:
    """Header plus cells of one chip's sweep."""
    header: SweepHeader
    cells: list[SweepCell] = field(default_factory=list)

    def qubits(self) -> list[int]:
        return sorted({c.qubit for c in self.cells})

    def cells_for(self, qubit: int) -> list[SweepCell]:
        return sorted((c for c in self.cells if c.qubit == qubit), key=lambda c: c.point)

    def curve_for(self, qubit: int) -> ResponseCurve:
        return curve_from_estimates(
            ((c.h_in, c.estimate()) for c in self.cells_for(qubit)),
            backend_id=f"{self.header.model.value}:{self.header.chip_id}",
            beta=self.header.beta,
            shots=None if self.header.exact else self.header.shots,
            seed=self.header.seed,
        )

    def validate_layout(self) -> None:
        """Cells match the header mode and name each (qubit, point) once."""
        kind = "probabilities" if self.header.exact else "counts"
        wrong = [f"q{c.qubit}/p{c.point}" for c in self.cells if c.exact != self.header.exact]
        if wrong:
            raise SchemaError(f"cells do not carry {kind} as the header requires: {', '.join(wrong[:20])}")
        seen: set[tuple[int, int]] = set()
        repeated = []
        for c in self.cells:
            if (c.qubit, c.point) in seen:
                repeated.append(f"q{c.qubit}/p{c.point}")
            seen.add((c.qubit, c.point))
        if repeated:
            raise SchemaError(f"cells repeat: {', '.join(repeated[:20])}")

    def validate_counts(self) -> None:
        """Every sampled cell must sum to the header shot count."""
        bad = [
            f"q{c.qubit}/p{c.point}"
            for c in self.cells
            if not c.exact and c.n_plus + c.n_minus != self.header.shots
        ]
        if bad:
            raise DataIntegrityError(f"counts do not sum to {self.header.shots} shots", bad)


def write_sweep(path: Path, result: SweepResult) -> Path:
    path = Path(path)
    lines = [result.header.model_dump_json()]
    lines.extend(c.model_dump_json(exclude_none=True) for c in result.cells)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc}") from exc
    logger.info("wrote %d cells to %s", len(result.cells), path)
    return path


def read_sweep(path: Path) -> SweepResult:
    path = Path(path)
    try:
        lines = [line for line in path.read_text().splitlines() if line.strip()]
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    if not lines:
        raise SchemaError(f"{path}: empty sweep file")
    try:
        header = SweepHeader.model_validate_json(lines[0])
    except ValidationError as exc:
        raise SchemaError(f"{path}: invalid sweep header: {exc}") from exc
    check_schema_version(header.schema_version, str(path))
    cells = []
    for number, line in enumerate(lines[1:], start=2):
        try:
            cells.append(SweepCell.model_validate_json(line))
        except ValidationError as exc:
            raise SchemaError(f"{path}:{number}: invalid cell record: {exc}") from exc
    result = SweepResult(header=header, cells=cells)
    try:
        result.validate_layout()
    except SchemaError as exc:
        raise SchemaError(f"{path}: {exc}") from exc
    result.validate_counts()
    return result


def write_metrics_csv(path: Path, rows: list[QubitMetrics | FitFailure]) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as handle:
            writer = csv.DictWriter(handle, fieldnames=METRICS_COLUMNS, lineterminator="\n")
            writer.writeheader()
            for row in rows:
                if isinstance(row, FitFailure):
                    writer.writerow({"chip_id": row.chip_id, "qubit_id": row.qubit_id, "error": row.error})
                else:
                    record = {name: getattr(row, name) for name in METRICS_COLUMNS if name != "error"}
                    writer.writerow({**record, "error": ""})
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc}") from exc
    return path


def read_metrics_csv(path: Path) -> tuple[list[QubitMetrics], list[FitFailure]]:
    path = Path(path)
    try:
        with path.open(newline="") as handle:
            reader = csv.DictReader(handle)
            missing = set(METRICS_COLUMNS) - set(reader.fieldnames or [])
            if missing:
                raise SchemaError(f"{path}: missing metrics columns {sorted(missing)}")
            records = list(reader)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc

    metrics, failures = [], []
    for number, r in enumerate(records, start=2):
        if r["error"]:
            failures.append(FitFailure(chip_id=r["chip_id"], qubit_id=r["qubit_id"], error=r["error"]))
            continue
        try:
            metrics.append(QubitMetrics(
                qubit_id=r["qubit_id"],
                chip_id=r["chip_id"],
                response=float(r["response"]),
                bias=float(r["bias"]),
                neg_saturation=float(r["neg_saturation"]),
                pos_saturation=float(r["pos_saturation"]),
                fit_points=int(r["fit_points"]),
                fit_rms_residual=float(r["fit_rms_residual"]),
                response_std_error=float(r["response_std_error"]),
                bias_std_error=float(r["bias_std_error"]),
                clamped_points=int(r["clamped_points"]),
            ))
        except ValueError as exc:
            raise SchemaError(f"{path}:{number}: {exc}") from exc
    return metrics, failures
