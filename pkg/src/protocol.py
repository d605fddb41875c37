"""Sweep generation and program construction for both computational models.

An input field h_in in [-1, 1] is turned into a gate-model program
Rz(phi)·Ry(theta)|0> whose Z expectation is tanh(beta·h_in), or into an
anneal-model program that programs the field directly. Gate programs are
compiled to a fixed five-gate native form so that every point of a sweep
carries the same error budget.
"""

import math
from dataclasses import dataclass

import numpy as np

from src.errors import ConsistencyError, InvalidArgumentError
from src.models import ComputeModel, NativeGate, NativeGateSequence, QubitProgram

DEFAULT_BETA = 10.0
NATIVE_TOLERANCE = 1e-10

SX = 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]], dtype=complex)


@dataclass(frozen=True)
class SweepGrid:
    """Evenly spaced input fields, both endpoints included."""
    lo: float
    hi: float
    count: int

    def __post_init__(self):
        for value in (self.lo, self.hi):
            check_input_field(value)
        if self.lo >= self.hi:
            raise InvalidArgumentError(f"sweep needs lo < hi, got [{self.lo}, {self.hi}]")
        if self.count < 2:
            raise InvalidArgumentError(f"sweep needs at least 2 points, got {self.count}")


def check_beta(beta: float) -> float:
    if not math.isfinite(beta) or beta <= 0:
        raise InvalidArgumentError(f"beta must be a positive finite number, got {beta!r}")
    return float(beta)


def check_input_field(h: float) -> float:
    if not math.isfinite(h):
        raise InvalidArgumentError(f"input field must be finite, got {h!r}")
    if not -1.0 <= h <= 1.0:
        raise InvalidArgumentError(f"input field must lie in [-1, 1], got {h!r}")
    return float(h)


def theta_from_hin(h: float, beta: float = DEFAULT_BETA) -> float:
    """Rotation angle whose Z expectation is tanh(beta·h).

    Evaluated as 2·atan(exp(-beta·h)), identical to arccos(tanh(beta·h)) but
    without losing the tiny angles near |h| = 1 to the rounding of tanh.
    Negative fields use the reflection pi - 2·atan(exp(beta·h)) so the
    exponent never grows past zero.
    """
    if not math.isfinite(h):
        raise InvalidArgumentError(f"input field must be finite, got {h!r}")
    beta = check_beta(beta)
    x = beta * h
    if x < 0.0:
        return math.pi - 2.0 * math.atan(math.exp(x))
    return 2.0 * math.atan(math.exp(-x))


def build_sweep(grid: SweepGrid) -> list[float]:
    """Sorted, duplicate-free, endpoint-inclusive list of input fields."""
    points = np.linspace(grid.lo, grid.hi, grid.count)
    # linspace can land a hair off the requested endpoint
    points[0], points[-1] = grid.lo, grid.hi
    return [float(h) for h in points]


def phi_values(count: int = 10) -> list[float]:
    """Evenly spaced measurement-plane angles over [0, 2π]."""
    if count < 1:
        raise InvalidArgumentError(f"phi sweep needs at least 1 value, got {count}")
    if count == 1:
        return [0.0]
    return [float(p) for p in np.linspace(0.0, 2.0 * math.pi, count)]


def build_gate_program(h: float, beta: float = DEFAULT_BETA, phi: float = 0.0) -> QubitProgram:
    check_input_field(h)
    return QubitProgram(model=ComputeModel.GATE, theta=theta_from_hin(h, beta), phi=float(phi))


def build_anneal_program(h: float) -> QubitProgram:
    return QubitProgram(model=ComputeModel.ANNEAL, field=check_input_field(h))


def build_program(model: ComputeModel, h: float, beta: float = DEFAULT_BETA, phi: float = 0.0) -> QubitProgram:
    if model is ComputeModel.GATE:
        return build_gate_program(h, beta, phi)
    return build_anneal_program(h)


def rz(angle: float) -> np.ndarray:
    return np.array([[np.exp(-0.5j * angle), 0.0], [0.0, np.exp(0.5j * angle)]], dtype=complex)


def ry(angle: float) -> np.ndarray:
    c, s = math.cos(angle / 2.0), math.sin(angle / 2.0)
    return np.array([[c, -s], [s, c]], dtype=complex)


def program_unitary(program: QubitProgram) -> np.ndarray:
    """Rz(phi)·Ry(theta) for a gate-model program."""
    if program.model is not ComputeModel.GATE:
        raise InvalidArgumentError("only gate-model programs have a unitary")
    return rz(program.phi) @ ry(program.theta)


def sequence_unitary(sequence: NativeGateSequence) -> np.ndarray:
    """Product of a native sequence; the first gate is applied first."""
    u = np.eye(2, dtype=complex)
    for gate in sequence.gates:
        u = (SX if gate.name == "sx" else rz(gate.angle)) @ u
    return u


def equivalent_up_to_phase(u: np.ndarray, v: np.ndarray, tol: float = NATIVE_TOLERANCE) -> bool:
    """True when u = e^{iα}·v within `tol` max-entry deviation."""
    overlap = np.trace(v.conj().T @ u)
    if abs(overlap) < 1e-12:
        return False
    phase = overlap / abs(overlap)
    return float(np.max(np.abs(u - phase * v))) <= tol


def _wrap(angle: float) -> float:
    return math.remainder(angle, 2.0 * math.pi)


def normalize_to_native(program: QubitProgram) -> NativeGateSequence:
    """Compile Rz(phi)·Ry(theta) to [Rz(a), SX, Rz(b), SX, Rz(c)].

    Uses Rz(c)·SX·Rz(b)·SX·Rz(a) = i·Rz(c-π)·Ry(b+π)·Rz(a), so a = 0,
    b = theta - π, c = phi + π. All five gates are emitted even when the
    target collapses to a single rotation.
    """
    if program.model is not ComputeModel.GATE:
        raise InvalidArgumentError("only gate-model programs compile to native gates")
    sequence = NativeGateSequence(gates=(
        NativeGate("rz", 0.0),
        NativeGate("sx"),
        NativeGate("rz", _wrap(program.theta - math.pi)),
        NativeGate("sx"),
        NativeGate("rz", _wrap(program.phi + math.pi)),
    ))
    target = program_unitary(program)
    compiled = sequence_unitary(sequence)
    if not equivalent_up_to_phase(compiled, target):
        residual = float(np.max(np.abs(compiled - target)))
        raise ConsistencyError(
            f"native decomposition of theta={program.theta!r}, phi={program.phi!r} "
            f"misses the target (max deviation {residual:.3e})"
        )
    return sequence
