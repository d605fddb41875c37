"""Configuration for the benchmarking tool.

Two layers live here: process-wide `Settings` read from the environment
(a `.env` file is honoured), and `RunConfig`, the validated description of
one protocol run that mirrors the command-line flags.
"""

import json
import logging
import os
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator
from rich.logging import RichHandler

from src.backends import QANoiseModel, QCNoiseModel, SampleRequest, make_noise
from src.errors import ConfigError
from src.models import ComputeModel, FitWindow, QubitProgram
from src.protocol import SweepGrid

TOOL_VERSION = "0.1.0"

DEFAULT_POINTS = {ComputeModel.GATE: 900, ComputeModel.ANNEAL: 81}
DEFAULT_SHOTS = {ComputeModel.GATE: 8192, ComputeModel.ANNEAL: 5_000_000}
DEFAULT_NUM_READS = 10_000


def _env_int(name: str) -> int | None:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return None
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"{name} must be an integer, got {raw!r}") from exc


@dataclass
class Settings:
    """Process settings taken from the environment."""
    seed_override: int | None = None
    workers: int = 1
    log_level: str = "WARNING"
    source_date_epoch: int | None = None

    @classmethod
    def from_env(cls) -> "Settings":
        load_dotenv()
        return cls(
            seed_override=_env_int("QRBPN_SEED"),
            workers=_env_int("QRBPN_WORKERS") or 1,
            log_level=os.getenv("QRBPN_LOG_LEVEL", "WARNING").upper(),
            source_date_epoch=_env_int("SOURCE_DATE_EPOCH"),
        )

    def created_at(self) -> str:
        """Timestamp stamped into emitted files; pinned by SOURCE_DATE_EPOCH."""
        if self.source_date_epoch is not None:
            moment = datetime.fromtimestamp(self.source_date_epoch, tz=timezone.utc)
        else:
            moment = datetime.now(tz=timezone.utc)
        return moment.replace(microsecond=0).isoformat()


settings = Settings.from_env()


def setup_logging(level: str | None = None) -> None:
    """Route log records through a single rich handler."""
    root = logging.getLogger()
    if not any(isinstance(h, RichHandler) for h in root.handlers):
        root.addHandler(RichHandler(show_path=False, rich_tracebacks=True))
    root.setLevel(level or settings.log_level)


class RunConfig(BaseModel):
    """Everything needed to run the protocol on one chip."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    model: ComputeModel = ComputeModel.GATE
    beta: float = Field(10.0, gt=0)
    points: int | None = Field(None, ge=2)
    h_min: float = Field(-1.0, ge=-1.0, le=1.0)
    h_max: float = Field(1.0, ge=-1.0, le=1.0)
    shots: int | None = Field(None, ge=1)
    num_reads: int = Field(DEFAULT_NUM_READS, ge=1)
    annealing_time_us: float = Field(1.0, gt=0)
    seed: int = Field(0, ge=0, lt=2**64)
    qubits: list[int] = Field(default_factory=lambda: [0])
    chip_id: str = "sim"
    noise_preset: str | None = None
    noise: dict[str, float] | None = None
    qubit_noise: dict[int, dict[str, float]] = Field(default_factory=dict)
    window: tuple[float, float] = (-0.1, 0.1)
    weighted_fit: bool = False
    exact: bool = False
    phi: float = 0.0
    workers: int = Field(1, ge=1)

    @model_validator(mode="after")
    def _check(self) -> "RunConfig":
        if self.h_min >= self.h_max:
            raise ValueError(f"h_min must be below h_max, got [{self.h_min}, {self.h_max}]")
        if not self.qubits:
            raise ValueError("at least one qubit is required")
        if any(q < 0 for q in self.qubits) or len(set(self.qubits)) != len(self.qubits):
            raise ValueError("qubit indices must be unique and non-negative")
        FitWindow(*self.window)
        if self.model is ComputeModel.ANNEAL and self.shot_count % self.num_reads:
            raise ValueError(
                f"anneal shots ({self.shot_count}) must be a multiple of num_reads ({self.num_reads})"
            )
        for qubit in self.qubits:
            self.noise_for(qubit)
        return self

    @property
    def point_count(self) -> int:
        return self.points or DEFAULT_POINTS[self.model]

    @property
    def shot_count(self) -> int:
        return self.shots or DEFAULT_SHOTS[self.model]

    @property
    def batches(self) -> int:
        """Programming cycles per anneal cell; always 1 for gate runs."""
        if self.model is ComputeModel.ANNEAL:
            return self.shot_count // self.num_reads
        return 1

    @property
    def grid(self) -> SweepGrid:
        return SweepGrid(self.h_min, self.h_max, self.point_count)

    @property
    def fit_window(self) -> FitWindow:
        return FitWindow(*self.window)

    def noise_for(self, qubit: int) -> QCNoiseModel | QANoiseModel:
        """Preset, then chip-wide overrides, then per-qubit overrides."""
        overrides = dict(self.noise or {})
        overrides.update(self.qubit_noise.get(qubit, {}))
        return make_noise(self.model, self.noise_preset, overrides)

    def sample_request(self, program: QubitProgram, qubit: int, point: int, variant: int = 0) -> SampleRequest:
        """Request for one cell; anneal shots are split into num_reads batches."""
        return SampleRequest(
            program=program,
            shots=self.shot_count,
            seed=self.seed,
            stream_key=(qubit, point),
            batch_size=self.num_reads if self.model is ComputeModel.ANNEAL else None,
            variant=variant,
        )

    def echo(self) -> dict[str, Any]:
        """Config as stamped into output files; the worker count never affects results."""
        return self.model_dump(mode="json", exclude={"workers"})

    @classmethod
    def from_sources(
        cls,
        path: Path | None = None,
        overrides: dict[str, Any] | None = None,
        env: Settings | None = None,
    ) -> "RunConfig":
        """Merge a JSON config file, explicit flag values and the environment.

        Flags win over the file and QRBPN_SEED wins over both.
        """
        env = env or Settings.from_env()
        data: dict[str, Any] = {}
        if path is not None:
            try:
                data = json.loads(Path(path).read_text())
            except OSError as exc:
                raise ConfigError(f"cannot read config file {path}: {exc}") from exc
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
            if not isinstance(data, dict):
                raise ConfigError(f"config file {path} must hold a JSON object")
        data.update({k: v for k, v in (overrides or {}).items() if v is not None})
        data.setdefault("workers", env.workers)
        if env.seed_override is not None:
            data["seed"] = env.seed_override
        try:
            return cls.model_validate(data)
        except ValidationError as exc:
            raise ConfigError(f"invalid configuration: {exc}") from exc
