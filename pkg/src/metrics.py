"""Response, bias and saturation metrics of a response curve."""

import logging
import math

import numpy as np
import numpy.linalg as la

from src.errors import InsufficientDataError
from src.models import FitResult, FitWindow, QubitMetrics, ResponseCurve

logger = logging.getLogger(__name__)


def fit_response_bias(curve: ResponseCurve, window: FitWindow = FitWindow(), weighted: bool = False) -> FitResult:
    """Affine least-squares fit of h_eff on h_in inside the window.

    The slope is the response and the intercept the bias. With `weighted`
    the points are weighted by 1/std_error²; curves without sampling error
    fall back to the unweighted fit.
    """
    h = curve.h_in
    mask = window.contains(h)
    n = int(mask.sum())
    if n < 2:
        raise InsufficientDataError((window.lo, window.hi), n)

    x, y = h[mask], curve.values[mask]
    X = np.column_stack([x, np.ones_like(x)])

    weights = None
    if weighted:
        se = curve.std_errors[mask]
        if np.all(se > 0):
            weights = 1.0 / se**2
        else:
            logger.warning("weighted fit requested but some points carry no sampling error; fitting unweighted")

    if weights is None:
        coef, *_ = la.lstsq(X, y, rcond=None)
        residuals = y - X @ coef
        # covariance from the residual variance, undefined for a two-point fit
        if n > 2:
            cov = (residuals @ residuals / (n - 2)) * la.inv(X.T @ X)
        else:
            cov = np.zeros((2, 2))
    else:
        root_w = np.sqrt(weights)
        coef, *_ = la.lstsq(X * root_w[:, None], y * root_w, rcond=None)
        residuals = y - X @ coef
        cov = la.inv(X.T @ (X * weights[:, None]))

    slope, intercept = float(coef[0]), float(coef[1])
    return FitResult(
        response=slope,
        bias=intercept,
        rms_residual=float(math.sqrt(np.mean(residuals**2))),
        points=n,
        response_std_error=float(math.sqrt(max(cov[0, 0], 0.0))),
        bias_std_error=float(math.sqrt(max(cov[1, 1], 0.0))),
    )


def saturations(curve: ResponseCurve) -> tuple[float, float]:
    """Minimum and maximum observed h_eff over the whole sweep, clamped points included."""
    values = curve.values
    return float(values.min()), float(values.max())


def metrics_for_qubit(
    curve: ResponseCurve,
    window: FitWindow = FitWindow(),
    qubit_id: str = "0",
    chip_id: str = "",
    weighted: bool = False,
) -> QubitMetrics:
    fit = fit_response_bias(curve, window, weighted=weighted)
    neg, pos = saturations(curve)
    return QubitMetrics(
        qubit_id=str(qubit_id),
        chip_id=chip_id,
        response=fit.response,
        bias=fit.bias,
        neg_saturation=neg,
        pos_saturation=pos,
        fit_points=fit.points,
        fit_rms_residual=fit.rms_residual,
        response_std_error=fit.response_std_error,
        bias_std_error=fit.bias_std_error,
        clamped_points=curve.clamped_count,
    )
