"""File-based job exchange with real hardware.

`export_jobs` writes hardware-ready parameter lists: five native gates per
gate-model job, or a negated field plus annealer settings per anneal job
(annealers minimise h·sigma, so programming h = -h_in aligns sigma with
h_in and reported spins need no swapping). External glue runs the bundle and
returns raw counts keyed by job id; `import_results` checks them against the
bundle and normalises them into a sweep result.
"""

import logging
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_serializer, model_validator

from src.backends import get_backend
from src.config import TOOL_VERSION, RunConfig
from src.errors import ConfigError, DataIntegrityError, SchemaError
from src.models import NATIVE_PATTERN, ComputeModel
from src.protocol import build_anneal_program, build_gate_program, build_sweep, normalize_to_native
from src.storage import SCHEMA_VERSION, SweepCell, SweepHeader, SweepResult, check_schema_version

logger = logging.getLogger(__name__)


def job_id(qubit: int, point: int) -> str:
    return f"q{qubit}-p{point}"


class GateSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: Literal["rz", "sx"]
    angle: float | None = None


class Job(BaseModel):
    model_config = ConfigDict(extra="forbid")

    job_id: str
    qubit: int
    point: int
    h_in: float
    gates: list[GateSpec] | None = None
    h: float | None = None
    num_reads: int | None = None
    batches: int | None = None
    annealing_time_us: float | None = None
    flux_drift_compensation: bool | None = None

    @model_serializer(mode="wrap")
    def _drop_other_model_fields(self, handler):
        # gate jobs carry no annealer settings and anneal jobs no gates
        return {k: v for k, v in handler(self).items() if v is not None}


class JobBundle(BaseModel):
    model_config = ConfigDict(extra="forbid")

    schema_version: str = SCHEMA_VERSION
    tool_version: str = TOOL_VERSION
    created_at: str
    chip_id: str
    model: ComputeModel
    beta: float
    shots: int
    seed: int
    phi: float = 0.0
    config: dict[str, Any] = {}
    jobs: list[Job]

    @model_validator(mode="after")
    def _check_jobs(self) -> "JobBundle":
        for job in self.jobs:
            if self.model is ComputeModel.GATE:
                names = tuple(g.name for g in job.gates or [])
                if names != NATIVE_PATTERN:
                    raise ValueError(f"{job.job_id}: gate jobs carry exactly {NATIVE_PATTERN}, got {names}")
            elif job.h is None or job.num_reads is None or job.batches is None:
                raise ValueError(f"{job.job_id}: anneal jobs need h, num_reads and batches")
        return self


class JobResult(BaseModel):
    model_config = ConfigDict(extra="forbid")

    job_id: str
    n_plus: int = Field(ge=0)
    n_minus: int = Field(ge=0)


class ResultBundle(BaseModel):
    model_config = ConfigDict(extra="forbid")

    schema_version: str = SCHEMA_VERSION
    results: list[JobResult]


def export_jobs(config: RunConfig, created_at: str) -> JobBundle:
    """Hardware-ready jobs for every (qubit, point) cell of the config."""
    sweep = build_sweep(config.grid)
    jobs = []
    for qubit in sorted(config.qubits):
        for point, h in enumerate(sweep):
            if config.model is ComputeModel.GATE:
                sequence = normalize_to_native(build_gate_program(h, config.beta, config.phi))
                jobs.append(Job(
                    job_id=job_id(qubit, point),
                    qubit=qubit,
                    point=point,
                    h_in=h,
                    gates=[GateSpec(name=g.name, angle=g.angle) for g in sequence.gates],
                ))
            else:
                jobs.append(Job(
                    job_id=job_id(qubit, point),
                    qubit=qubit,
                    point=point,
                    h_in=h,
                    h=-h,
                    num_reads=config.num_reads,
                    batches=config.batches,
                    annealing_time_us=config.annealing_time_us,
                    flux_drift_compensation=False,
                ))
    logger.info("exported %d %s jobs for chip %s", len(jobs), config.model.value, config.chip_id)
    return JobBundle(
        created_at=created_at,
        chip_id=config.chip_id,
        model=config.model,
        beta=config.beta,
        shots=config.shot_count,
        seed=config.seed,
        phi=config.phi,
        config=config.echo(),
        jobs=jobs,
    )


def run_bundle_locally(bundle: JobBundle) -> ResultBundle:
    """Execute a bundle on the simulators, standing in for the hardware glue."""
    config = RunConfig.model_validate(bundle.config)
    results = []
    for job in bundle.jobs:
        if bundle.model is ComputeModel.GATE:
            # rebuilt from h_in so counts match a direct simulation bit for bit
            program = build_gate_program(job.h_in, bundle.beta, bundle.phi)
        else:
            program = build_anneal_program(-job.h)
        backend = get_backend(bundle.model, config.noise_for(job.qubit))
        counts = backend.sample(config.sample_request(program, job.qubit, job.point))
        results.append(JobResult(job_id=job.job_id, n_plus=counts.n_plus, n_minus=counts.n_minus))
    return ResultBundle(results=results)


def import_results(bundle: JobBundle, results: ResultBundle) -> SweepResult:
    """Validate raw counts against the bundle and build a sweep result."""
    check_schema_version(results.schema_version, "result bundle")
    expected = {job.job_id: job for job in bundle.jobs}

    seen: dict[str, JobResult] = {}
    duplicates, unknown = [], []
    for r in results.results:
        if r.job_id not in expected:
            unknown.append(r.job_id)
        elif r.job_id in seen:
            duplicates.append(r.job_id)
        else:
            seen[r.job_id] = r
    if unknown:
        raise DataIntegrityError("results reference unknown job ids", unknown)
    if duplicates:
        raise DataIntegrityError("results repeat job ids", duplicates)
    missing = [jid for jid in expected if jid not in seen]
    if missing:
        raise DataIntegrityError("results are missing for jobs", missing)
    mismatched = [
        f"{jid} ({r.n_plus}+{r.n_minus})"
        for jid, r in seen.items()
        if r.n_plus + r.n_minus != bundle.shots
    ]
    if mismatched:
        raise DataIntegrityError(f"counts do not sum to {bundle.shots} shots", mismatched)

    cells = [
        SweepCell(qubit=job.qubit, point=job.point, h_in=job.h_in,
                  n_plus=seen[job.job_id].n_plus, n_minus=seen[job.job_id].n_minus)
        for job in sorted(bundle.jobs, key=lambda j: (j.qubit, j.point))
    ]
    header = SweepHeader(
        tool_version=bundle.tool_version,
        created_at=bundle.created_at,
        chip_id=bundle.chip_id,
        model=bundle.model,
        beta=bundle.beta,
        shots=bundle.shots,
        seed=bundle.seed,
        exact=False,
        phi=bundle.phi,
        config=bundle.config,
    )
    return SweepResult(header=header, cells=cells)


def _write_model(path: Path, model: BaseModel) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(model.model_dump_json(indent=2) + "\n")
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc}") from exc
    return path


def _read_model(path: Path, model_type: type[BaseModel], what: str):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    try:
        return model_type.model_validate_json(text)
    except ValidationError as exc:
        raise SchemaError(f"{path}: invalid {what}: {exc}") from exc


def write_job_bundle(path: Path, bundle: JobBundle) -> Path:
    return _write_model(path, bundle)


def read_job_bundle(path: Path) -> JobBundle:
    bundle = _read_model(path, JobBundle, "job bundle")
    check_schema_version(bundle.schema_version, str(path))
    return bundle


def write_result_bundle(path: Path, results: ResultBundle) -> Path:
    return _write_model(path, results)


def read_result_bundle(path: Path) -> ResultBundle:
    results = _read_model(path, ResultBundle, "result bundle")
    check_schema_version(results.schema_version, str(path))
    return results
