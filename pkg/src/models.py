"""Data models shared across the protocol, estimation and reporting layers."""

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from src.errors import InvalidArgumentError


class ComputeModel(Enum):
    """Computational model a program targets."""
    GATE = "gate"
    ANNEAL = "anneal"


class OutputFormat(Enum):
    """Formats a summary can be rendered to."""
    TABLE = "table"
    CSV = "csv"
    JSON = "json"


METRIC_NAMES = ("response", "bias", "neg_saturation", "pos_saturation")


@dataclass(frozen=True)
class QubitProgram:
    """A single-qubit program for one input field.

    Gate programs prepare Rz(phi)·Ry(theta)|0>; anneal programs carry the
    programmed field directly.
    """
    model: ComputeModel
    theta: float | None = None
    phi: float | None = None
    field: float | None = None

    def __post_init__(self):
        if self.model is ComputeModel.GATE:
            if self.field is not None:
                raise InvalidArgumentError("gate programs do not carry a field")
            if self.theta is None or not math.isfinite(self.theta):
                raise InvalidArgumentError(f"theta must be finite, got {self.theta!r}")
            if not 0.0 <= self.theta <= math.pi:
                raise InvalidArgumentError(f"theta must lie in [0, pi], got {self.theta!r}")
            if self.phi is None:
                object.__setattr__(self, "phi", 0.0)
            elif not math.isfinite(self.phi):
                raise InvalidArgumentError(f"phi must be finite, got {self.phi!r}")
        else:
            if self.theta is not None or self.phi is not None:
                raise InvalidArgumentError("anneal programs do not carry rotation angles")
            if self.field is None or not -1.0 <= self.field <= 1.0:
                raise InvalidArgumentError(f"field must lie in [-1, 1], got {self.field!r}")


@dataclass(frozen=True)
class NativeGate:
    """One hardware-native gate; `angle` is None for SX."""
    name: str
    angle: float | None = None


NATIVE_PATTERN = ("rz", "sx", "rz", "sx", "rz")


@dataclass(frozen=True)
class NativeGateSequence:
    """The fixed [Rz(a), SX, Rz(b), SX, Rz(c)] program, in application order."""
    gates: tuple[NativeGate, ...]

    def __post_init__(self):
        names = tuple(g.name for g in self.gates)
        if names != NATIVE_PATTERN:
            raise InvalidArgumentError(f"native sequence must follow {NATIVE_PATTERN}, got {names}")

    @property
    def angles(self) -> tuple[float, float, float]:
        return self.gates[0].angle, self.gates[2].angle, self.gates[4].angle

    def __len__(self) -> int:
        return len(self.gates)


@dataclass(frozen=True)
class ShotCounts:
    """Tally of +1 / -1 observations for one (qubit, h_in) cell."""
    n_plus: int
    n_minus: int

    def __post_init__(self):
        if self.n_plus < 0 or self.n_minus < 0:
            raise InvalidArgumentError(f"counts must be non-negative, got ({self.n_plus}, {self.n_minus})")
        if self.n_plus + self.n_minus == 0:
            raise InvalidArgumentError("counts must hold at least one shot")

    @property
    def shots(self) -> int:
        return self.n_plus + self.n_minus

    @property
    def unanimous(self) -> bool:
        return self.n_plus == 0 or self.n_minus == 0


@dataclass(frozen=True)
class EffectiveFieldEstimate:
    """Estimated h_eff with its 3-sigma interval."""
    value: float
    std_error: float
    ci_lo: float
    ci_hi: float
    clamped: bool = False
    shots: int | None = None


@dataclass(frozen=True)
class CurvePoint:
    h_in: float
    estimate: EffectiveFieldEstimate


@dataclass(frozen=True)
class ResponseCurve:
    """h_eff estimates over a sweep, sorted by strictly increasing h_in."""
    points: tuple[CurvePoint, ...]
    backend_id: str = ""
    beta: float | None = None
    shots: int | None = None
    seed: int | None = None

    def __post_init__(self):
        if not self.points:
            raise InvalidArgumentError("a response curve needs at least one point")
        h = [p.h_in for p in self.points]
        if any(b <= a for a, b in zip(h, h[1:])):
            raise InvalidArgumentError("curve h_in values must be strictly increasing")

    @property
    def h_in(self) -> np.ndarray:
        return np.array([p.h_in for p in self.points], dtype=float)

    @property
    def values(self) -> np.ndarray:
        return np.array([p.estimate.value for p in self.points], dtype=float)

    @property
    def std_errors(self) -> np.ndarray:
        return np.array([p.estimate.std_error for p in self.points], dtype=float)

    @property
    def clamped_count(self) -> int:
        return sum(1 for p in self.points if p.estimate.clamped)

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class FitWindow:
    """Input-field window the affine fit is restricted to (inclusive)."""
    lo: float = -0.1
    hi: float = 0.1

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)) or self.lo >= self.hi:
            raise InvalidArgumentError(f"fit window needs lo < hi, got [{self.lo}, {self.hi}]")

    def contains(self, h: np.ndarray) -> np.ndarray:
        return (h >= self.lo) & (h <= self.hi)


@dataclass(frozen=True)
class FitResult:
    response: float
    bias: float
    rms_residual: float
    points: int
    response_std_error: float = 0.0
    bias_std_error: float = 0.0


@dataclass
class QubitMetrics:
    """The four benchmark numbers of one qubit plus fit diagnostics."""
    qubit_id: str
    chip_id: str
    response: float
    bias: float
    neg_saturation: float
    pos_saturation: float
    fit_points: int
    fit_rms_residual: float
    response_std_error: float = 0.0
    bias_std_error: float = 0.0
    clamped_points: int = 0

    def __post_init__(self):
        if self.neg_saturation > self.pos_saturation:
            raise InvalidArgumentError("negative saturation exceeds positive saturation")
        if self.fit_points < 2:
            raise InvalidArgumentError("a fit needs at least 2 points")

    def metric(self, name: str) -> float:
        if name not in METRIC_NAMES:
            raise InvalidArgumentError(f"unknown metric {name!r}; expected one of {METRIC_NAMES}")
        return getattr(self, name)


@dataclass(frozen=True)
class MetricStat:
    """Mean and population standard deviation of one metric."""
    mean: float
    std: float

    def render(self) -> str:
        """Two-decimal "mean ± std" text; a mean that rounds to zero prints unsigned."""
        mean = f"{self.mean:.2f}"
        if mean == "-0.00":
            mean = "0.00"
        return f"{mean} ± {self.std:.2f}"


@dataclass(frozen=True)
class ChipSummary:
    chip_id: str
    qubit_count: int
    response: MetricStat
    bias: MetricStat
    neg_saturation: MetricStat
    pos_saturation: MetricStat

    def stat(self, name: str) -> MetricStat:
        return getattr(self, name)


@dataclass(frozen=True)
class HistogramSpec:
    metric: str
    bin_lo: float
    bin_hi: float
    bin_count: int

    def __post_init__(self):
        if self.metric not in METRIC_NAMES:
            raise InvalidArgumentError(f"unknown metric {self.metric!r}; expected one of {METRIC_NAMES}")
        if self.bin_count < 1:
            raise InvalidArgumentError("bin_count must be at least 1")
        if self.bin_lo >= self.bin_hi:
            raise InvalidArgumentError(f"histogram range needs lo < hi, got [{self.bin_lo}, {self.bin_hi}]")


@dataclass
class HistogramResult:
    """Bin centers with counts, plus values that fell outside the range."""
    spec: HistogramSpec
    bins: list[tuple[float, int]] = field(default_factory=list)
    below: int = 0
    above: int = 0

    @property
    def outliers(self) -> int:
        return self.below + self.above

    @property
    def total(self) -> int:
        return sum(c for _, c in self.bins) + self.outliers


@dataclass(frozen=True)
class FitFailure:
    """A qubit whose metrics could not be extracted."""
    chip_id: str
    qubit_id: str
    error: str
