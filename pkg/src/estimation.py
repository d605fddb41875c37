"""Effective-field estimation from spin counts.

h_eff = atanh(E[sigma]) is estimated from the empirical mean of M shots.
The standard error comes from the delta method,
se = 1 / sqrt(M·(1 - m²)), and intervals are ±3 se.

Unanimous counts would give an infinite field. They are replaced by the
half-count correction (M - 0.5 against 0.5) and flagged as clamped, which
keeps the value finite and strictly increasing in M.
"""

import logging
import math
from collections import Counter
from collections.abc import Iterable

from src.errors import InvalidArgumentError
from src.models import CurvePoint, EffectiveFieldEstimate, ResponseCurve, ShotCounts

logger = logging.getLogger(__name__)

CI_SIGMAS = 3.0
# |m| beyond 1 - BOUNDARY_SHOTS/M is where the delta method stops being trustworthy
BOUNDARY_SHOTS = 10.0


def clamp_bound(shots: int) -> float:
    """Largest |h_eff| reachable with `shots` samples under the half-count rule."""
    return 0.5 * math.log(2.0 * shots - 1.0)


def heff_from_counts(counts: ShotCounts) -> EffectiveFieldEstimate:
    shots = counts.shots
    if shots < 2:
        raise InvalidArgumentError(f"need at least 2 shots to estimate a field, got {shots}")

    n_plus, n_minus = float(counts.n_plus), float(counts.n_minus)
    clamped = counts.unanimous
    if clamped:
        if counts.n_minus == 0:
            n_plus, n_minus = shots - 0.5, 0.5
        else:
            n_plus, n_minus = 0.5, shots - 0.5

    # same as atanh(m), written so that swapping the counts negates it exactly
    value = 0.5 * (math.log(n_plus) - math.log(n_minus))
    mean = (n_plus - n_minus) / shots
    std_error = 1.0 / math.sqrt(shots * (1.0 - mean * mean))

    ci_lo = value - CI_SIGMAS * std_error
    ci_hi = value + CI_SIGMAS * std_error
    edge = 1.0 - BOUNDARY_SHOTS / shots
    if mean > edge:
        ci_hi = max(ci_hi, clamp_bound(shots))
    elif mean < -edge:
        ci_lo = min(ci_lo, -clamp_bound(shots))

    return EffectiveFieldEstimate(
        value=value,
        std_error=std_error,
        ci_lo=ci_lo,
        ci_hi=ci_hi,
        clamped=clamped,
        shots=shots,
    )


def heff_from_mean(mean: float) -> float:
    """atanh of an exact expectation value."""
    if not -1.0 < mean < 1.0:
        raise InvalidArgumentError(f"mean must lie strictly inside (-1, 1), got {mean!r}")
    return math.atanh(mean)


def heff_from_probabilities(p_plus: float, p_minus: float) -> EffectiveFieldEstimate:
    """Exact-mode estimate: no sampling error, never clamped."""
    if p_plus <= 0.0 or p_minus <= 0.0:
        raise InvalidArgumentError(
            f"exact field is unbounded for outcome probabilities ({p_plus!r}, {p_minus!r})"
        )
    value = 0.5 * (math.log(p_plus) - math.log(p_minus))
    return EffectiveFieldEstimate(value=value, std_error=0.0, ci_lo=value, ci_hi=value, clamped=False)


def curve_from_estimates(
    pairs: Iterable[tuple[float, EffectiveFieldEstimate]],
    backend_id: str = "",
    beta: float | None = None,
    shots: int | None = None,
    seed: int | None = None,
) -> ResponseCurve:
    pairs = list(pairs)
    duplicates = sorted(h for h, n in Counter(h for h, _ in pairs).items() if n > 1)
    if duplicates:
        raise InvalidArgumentError(f"duplicate h_in values in sweep: {duplicates}")
    points = tuple(CurvePoint(h_in=float(h), estimate=e) for h, e in sorted(pairs, key=lambda p: p[0]))
    return ResponseCurve(points=points, backend_id=backend_id, beta=beta, shots=shots, seed=seed)


def curve_from_cells(
    cells: Iterable[tuple[float, ShotCounts]],
    backend_id: str = "",
    beta: float | None = None,
    shots: int | None = None,
    seed: int | None = None,
) -> ResponseCurve:
    """Sorted response curve with one estimate per (h_in, counts) cell."""
    curve = curve_from_estimates(
        ((h, heff_from_counts(c)) for h, c in cells),
        backend_id=backend_id,
        beta=beta,
        shots=shots,
        seed=seed,
    )
    if curve.clamped_count:
        logger.debug("%d of %d points clamped by unanimous counts", curve.clamped_count, len(curve))
    return curve
