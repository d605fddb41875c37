"""Simulated backends that turn a program into spin observations.

Spin convention: measurement outcome 0 is sigma = +1, so <Z> = E[sigma].
The annealer follows the Gibbs law P(sigma) ∝ exp(beta·h·sigma), where a
positive field favours +1.

Both backends expose closed-form outcome probabilities (the exact oracle)
and a seeded binomial sampler whose streams are keyed by
(seed, qubit, point, batch, variant), so counts never depend on the order
in which cells are evaluated.
"""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import ClassVar

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.special import expit

from src.errors import InvalidArgumentError
from src.models import ComputeModel, QubitProgram, ShotCounts
from src.protocol import program_unitary

logger = logging.getLogger(__name__)

# Gauss-Hermite nodes used to average the Gibbs law over Gaussian field jitter
_JITTER_NODES, _JITTER_WEIGHTS = np.polynomial.hermite_e.hermegauss(64)
_JITTER_WEIGHTS = _JITTER_WEIGHTS / _JITTER_WEIGHTS.sum()


class QCNoiseModel(BaseModel):
    """Gate-model imperfections: rotation miscalibration and asymmetric readout flips."""

    model_config = ConfigDict(extra="forbid", frozen=True)
    compute_model: ClassVar[ComputeModel] = ComputeModel.GATE

    angle_scale: float = Field(1.0, gt=0)
    angle_offset: float = 0.0
    flip_from_plus: float = Field(0.0, ge=0, lt=0.5)
    flip_from_minus: float = Field(0.0, ge=0, lt=0.5)


class QANoiseModel(BaseModel):
    """Annealer imperfections: device temperature, field scale/offset/jitter, readout flips."""

    model_config = ConfigDict(extra="forbid", frozen=True)
    compute_model: ClassVar[ComputeModel] = ComputeModel.ANNEAL

    beta_dev: float = Field(10.0, gt=0)
    field_scale: float = 1.0
    field_offset: float = 0.0
    field_noise_std: float = Field(0.0, ge=0)
    flip: float = Field(0.0, ge=0, lt=0.5)


NoiseModel = QCNoiseModel | QANoiseModel

NOISE_PRESETS: dict[str, NoiseModel] = {
    "ideal-gate": QCNoiseModel(),
    "ideal-anneal": QANoiseModel(),
    # readout flips that reproduce the fleet-average gate-model saturations
    "ibm-like": QCNoiseModel(flip_from_plus=0.0094, flip_from_minus=0.0356),
    # readout flip that reproduces the annealer saturation plateau near 4.9
    "dwave-like": QANoiseModel(beta_dev=10.0, flip=5.55e-5),
}

_DEFAULT_PRESET = {ComputeModel.GATE: "ideal-gate", ComputeModel.ANNEAL: "ideal-anneal"}


def make_noise(model: ComputeModel, preset: str | None = None, overrides: dict | None = None) -> NoiseModel:
    """Resolve a preset (or the ideal default) and apply field overrides."""
    name = preset or _DEFAULT_PRESET[model]
    if name not in NOISE_PRESETS:
        raise InvalidArgumentError(f"unknown noise preset {name!r}; choose from {sorted(NOISE_PRESETS)}")
    base = NOISE_PRESETS[name]
    if base.compute_model is not model:
        raise InvalidArgumentError(f"noise preset {name!r} is for the {base.compute_model.value} model")
    if not overrides:
        return base
    return type(base).model_validate({**base.model_dump(), **overrides})


def _mix_readout(p_plus: float, p_minus: float, flip_from_plus: float, flip_from_minus: float) -> tuple[float, float]:
    observed_plus = (1.0 - flip_from_plus) * p_plus + flip_from_minus * p_minus
    observed_minus = flip_from_plus * p_plus + (1.0 - flip_from_minus) * p_minus
    return observed_plus, observed_minus


def qc_outcome_probabilities(program: QubitProgram, noise: QCNoiseModel) -> tuple[float, float]:
    """Observed (P(+1), P(-1)) of a gate program; each side keeps full relative precision."""
    theta = noise.angle_scale * program.theta + noise.angle_offset
    p_plus = math.cos(theta / 2.0) ** 2
    p_minus = math.sin(theta / 2.0) ** 2
    return _mix_readout(p_plus, p_minus, noise.flip_from_plus, noise.flip_from_minus)


def qc_outcome_probability(program: QubitProgram, noise: QCNoiseModel) -> float:
    return qc_outcome_probabilities(program, noise)[0]


def qa_outcome_probabilities(field: float, noise: QANoiseModel, jitter: float = 0.0) -> tuple[float, float]:
    """Observed (P(+1), P(-1)) of the Gibbs law at one jitter draw."""
    h = noise.field_scale * field + noise.field_offset + jitter
    p_plus = float(expit(2.0 * noise.beta_dev * h))
    p_minus = float(expit(-2.0 * noise.beta_dev * h))
    return _mix_readout(p_plus, p_minus, noise.flip, noise.flip)


def qa_outcome_probability(field: float, noise: QANoiseModel, jitter: float = 0.0) -> float:
    return qa_outcome_probabilities(field, noise, jitter)[0]


def statevector_probability(program: QubitProgram) -> float:
    """|<0|Rz(phi)Ry(theta)|0>|² from an explicit statevector."""
    state = program_unitary(program) @ np.array([1.0, 0.0], dtype=complex)
    return float(abs(state[0]) ** 2)


def stream_generator(seed: int, qubit: int, point: int, batch: int = 0, variant: int = 0) -> np.random.Generator:
    """Counter-based generator for one (qubit, point, batch, variant) cell."""
    sequence = np.random.SeedSequence(entropy=seed, spawn_key=(qubit, point, batch, variant))
    return np.random.Generator(np.random.Philox(sequence))


@dataclass(frozen=True)
class SampleRequest:
    """One cell to sample; `batch_size` splits the shots into programming cycles."""
    program: QubitProgram
    shots: int
    seed: int
    stream_key: tuple[int, int]
    batch_size: int | None = None
    variant: int = 0

    def __post_init__(self):
        if self.shots < 1:
            raise InvalidArgumentError(f"shots must be at least 1, got {self.shots}")
        if self.batch_size is not None and self.batch_size < 1:
            raise InvalidArgumentError(f"batch size must be at least 1, got {self.batch_size}")

    def batches(self) -> list[int]:
        size = self.batch_size or self.shots
        full, rest = divmod(self.shots, size)
        return [size] * full + ([rest] if rest else [])


class Backend(ABC):
    """Base class for simulated devices. Instances are immutable after construction."""

    compute_model: ComputeModel

    def __init__(self, noise: NoiseModel):
        if noise.compute_model is not self.compute_model:
            raise InvalidArgumentError(
                f"{type(self).__name__} needs {self.compute_model.value} noise, got {type(noise).__name__}"
            )
        self.noise = noise

    @property
    def backend_id(self) -> str:
        return f"{self.compute_model.value}-sim"

    def _check_program(self, program: QubitProgram) -> None:
        if program.model is not self.compute_model:
            raise InvalidArgumentError(
                f"{type(self).__name__} cannot run a {program.model.value} program"
            )

    @abstractmethod
    def outcome_probabilities(self, program: QubitProgram) -> tuple[float, float]:
        """Exact observed (P(+1), P(-1))."""

    def outcome_probability(self, program: QubitProgram) -> float:
        return self.outcome_probabilities(program)[0]

    def exact_mean(self, program: QubitProgram) -> float:
        """E[sigma] without sampling."""
        p_plus, p_minus = self.outcome_probabilities(program)
        return p_plus - p_minus

    def sample(self, request: SampleRequest) -> ShotCounts:
        self._check_program(request.program)
        qubit, point = request.stream_key
        n_plus = 0
        for batch, reads in enumerate(request.batches()):
            rng = stream_generator(request.seed, qubit, point, batch, request.variant)
            n_plus += self._sample_batch(request.program, reads, rng)
        logger.debug("cell %s: %d/%d shots at +1", request.stream_key, n_plus, request.shots)
        return ShotCounts(n_plus=n_plus, n_minus=request.shots - n_plus)

    def _sample_batch(self, program: QubitProgram, reads: int, rng: np.random.Generator) -> int:
        p = min(max(self.outcome_probability(program), 0.0), 1.0)
        return int(rng.binomial(reads, p))


class GateModelSimulator(Backend):
    """Closed-form single-qubit gate model with SPAM-style readout flips."""

    compute_model = ComputeModel.GATE

    def outcome_probabilities(self, program: QubitProgram) -> tuple[float, float]:
        self._check_program(program)
        return qc_outcome_probabilities(program, self.noise)


class AnnealerSimulator(Backend):
    """Single-spin Gibbs sampler at the device inverse temperature.

    Gaussian field jitter is drawn per shot when sampling; the exact path
    averages over it with Gauss-Hermite quadrature.
    """

    compute_model = ComputeModel.ANNEAL

    def outcome_probabilities(self, program: QubitProgram) -> tuple[float, float]:
        self._check_program(program)
        if self.noise.field_noise_std == 0.0:
            return qa_outcome_probabilities(program.field, self.noise)
        p_plus = p_minus = 0.0
        for node, weight in zip(_JITTER_NODES, _JITTER_WEIGHTS):
            plus, minus = qa_outcome_probabilities(program.field, self.noise, self.noise.field_noise_std * node)
            p_plus += weight * plus
            p_minus += weight * minus
        return p_plus, p_minus

    def _sample_batch(self, program: QubitProgram, reads: int, rng: np.random.Generator) -> int:
        if self.noise.field_noise_std == 0.0:
            return super()._sample_batch(program, reads, rng)
        noise = self.noise
        jitter = rng.normal(0.0, noise.field_noise_std, size=reads)
        h = noise.field_scale * program.field + noise.field_offset + jitter
        p_true = expit(2.0 * noise.beta_dev * h)
        p_obs = (1.0 - noise.flip) * p_true + noise.flip * (1.0 - p_true)
        return int(np.count_nonzero(rng.random(reads) < p_obs))


def get_backend(model: ComputeModel, noise: NoiseModel | None = None) -> Backend:
    """Build the simulator for a computational model."""
    noise = noise or make_noise(model)
    if model is ComputeModel.GATE:
        return GateModelSimulator(noise)
    if model is ComputeModel.ANNEAL:
        return AnnealerSimulator(noise)
    raise InvalidArgumentError(f"Unknown compute model: {model}")
