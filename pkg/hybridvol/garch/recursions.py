"""
Conditional-variance recursions.

Every recursion returns ``T + 1`` variances for ``T`` shocks: the fitted variances followed by
the one-step-ahead forecast. Pre-sample values are backcast from ``h_init``.
GARCH, GJR and APARCH are linear in their driving terms and run through ``scipy.signal.lfilter``;
EGARCH feeds its own standardized residuals back and runs as a loop.
"""

from typing import Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import signal

from ..distributions import abs_moment
from ..market_data import ReturnSeries
from ..utils import DomainError, NumericOverflowError
from .specs import GarchFamily, GarchParams, GarchSpec, MeanModel

# exp(709) is the largest finite double
LN_H_MAX = 700.0


def mean_residuals(spec: GarchSpec, params: GarchParams, r: np.ndarray) -> np.ndarray:
    """Shocks ``eps_t = r_t - mean_t``; the AR(1) pre-sample return is the unconditional mean."""
    if spec.mean_model is MeanModel.CONSTANT:
        return r - params.mu
    previous = np.empty_like(r)
    previous[0] = params.mu / (1.0 - params.phi)
    previous[1:] = r[:-1]
    return r - params.mu - params.phi * previous


def mean_forecast(spec: GarchSpec, params: GarchParams, r: np.ndarray) -> float:
    if spec.mean_model is MeanModel.CONSTANT:
        return float(params.mu)
    return float(params.mu + params.phi * r[-1])


def _lag_terms(u: np.ndarray, pre: float, coefs: Sequence[float]) -> np.ndarray:
    """``sum_i coefs[i-1] * u[t-i]`` for ``t = 0..T`` with ``u`` backcast by ``pre``."""
    q = len(coefs)
    if q == 0:
        return np.zeros(len(u) + 1)
    full = np.concatenate((np.full(q, pre), u))
    return np.convolve(full, np.asarray(coefs, dtype=float))[q - 1 : q + len(u)]


def _linear_recursion(drive: np.ndarray, beta: Sequence[float], y_init: float) -> np.ndarray:
    """``y_t = drive_t + sum_j beta_j * y_{t-j}`` with pre-sample ``y = y_init``."""
    if len(beta) == 0:
        return drive
    a = np.concatenate(([1.0], -np.asarray(beta, dtype=float)))
    zi = signal.lfiltic([1.0], a, y=np.full(len(beta), y_init))
    y, _ = signal.lfilter([1.0], a, drive, zi=zi)
    return y


def _overflow(values: np.ndarray, dates: Optional[pd.DatetimeIndex], what: str) -> None:
    bad = ~np.isfinite(values) | (values <= 0.0)
    if bad.any():
        first = int(np.argmax(bad))
        at = dates[first].date() if dates is not None and first < len(dates) else None
        raise NumericOverflowError(f"{what} became non-finite or non-positive at step {first}", at)


def _egarch(spec: GarchSpec, params: GarchParams, eps: np.ndarray, h_init: float,
            dates: Optional[pd.DatetimeIndex]) -> np.ndarray:
    q, p = spec.q, spec.p
    alpha, beta = np.asarray(params.alpha), np.asarray(params.beta)
    e_abs = abs_moment(params.innovation(spec))
    n = len(eps)
    ln_h = np.empty(n + 1)
    news = np.zeros(n)
    ln_init = np.log(h_init)
    for t in range(n + 1):
        value = params.alpha0
        for i in range(1, q + 1):
            if t - i >= 0:
                value += alpha[i - 1] * news[t - i]
        for j in range(1, p + 1):
            value += beta[j - 1] * (ln_h[t - j] if t - j >= 0 else ln_init)
        if not value < LN_H_MAX or not np.isfinite(value):
            at = dates[t].date() if dates is not None and t < len(dates) else None
            raise NumericOverflowError(f"EGARCH log-variance overflow ({value}) at step {t}", at)
        ln_h[t] = value
        if t < n:
            z = eps[t] * np.exp(-0.5 * value)
            news[t] = params.theta * z + params.gamma * (abs(z) - e_abs)
    return np.exp(ln_h)


def filter_extended(
    spec: GarchSpec,
    params: GarchParams,
    r: np.ndarray,
    h_init: float,
    dates: Optional[pd.DatetimeIndex] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Run the recursion over plain arrays.

    Returns:
        tuple: Shocks ``eps`` (length T) and variances ``h`` (length T + 1, the last one being
        the one-step-ahead forecast).

    Raises:
        NumericOverflowError: If a variance is non-finite or non-positive.
    """
    eps = mean_residuals(spec, params, np.asarray(r, dtype=float))
    family = spec.family

    if family is GarchFamily.EGARCH:
        return eps, _egarch(spec, params, eps, h_init, dates)

    if family is GarchFamily.APARCH:
        delta = params.delta
        y_init = h_init ** (delta / 2.0)
        drive = np.full(len(eps) + 1, params.alpha0)
        for i, (a_i, g_i) in enumerate(zip(params.alpha, params.gamma_i)):
            coefs = np.zeros(spec.q)
            coefs[i] = a_i
            drive += _lag_terms((np.abs(eps) - g_i * eps) ** delta, y_init, coefs)
        power = _linear_recursion(drive, params.beta, y_init)
        _overflow(power, dates, "APARCH power variance")
        with np.errstate(over="ignore"):
            h = power ** (2.0 / delta)
        _overflow(h, dates, "APARCH variance")
        return eps, h

    sq = eps * eps
    drive = params.alpha0 + _lag_terms(sq, h_init, params.alpha)
    if family is GarchFamily.GJR:
        negative = (eps <= 0.0).astype(float)
        drive = drive + _lag_terms(negative * sq, 0.5 * h_init, params.omega)
    h = _linear_recursion(drive, params.beta, h_init)
    _overflow(h, dates, f"{family.value} variance")
    return eps, h


def default_h_init(r: np.ndarray) -> float:
    """Sample variance of the estimation window."""
    value = float(np.var(r))
    return value if value > 0.0 else 1.0


def variance_filter(
    spec: GarchSpec,
    params: GarchParams,
    returns: ReturnSeries,
    h_init: Optional[float] = None,
) -> pd.Series:
    """
    Conditional variances ``h_t`` over the return window.

    Args:
        spec (GarchSpec): Model specification.
        params (GarchParams): Parameters satisfying the family constraints.
        returns (ReturnSeries): Returns to filter.
        h_init (float, optional): Pre-sample variance. Defaults to the sample variance.

    Returns:
        pd.Series: Strictly positive variances indexed like ``returns``.

    Raises:
        ConstraintError: If ``params`` violate the family constraints.
        DomainError: If ``h_init`` is not positive.
        NumericOverflowError: If the recursion overflows; carries the date.
    """
    params.validate(spec)
    r = returns.to_numpy()
    h0 = default_h_init(r) if h_init is None else h_init
    if not h0 > 0.0:
        raise DomainError(f"initial variance must be positive, got {h0}")
    _, h = filter_extended(spec, params, r, h0, returns.dates)
    return pd.Series(h[:-1], index=returns.dates, name="h")
