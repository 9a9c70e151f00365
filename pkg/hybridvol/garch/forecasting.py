"""
One-step-ahead forecasts and simulation from a fitted or hand-specified model.
"""

from typing import Tuple

import numpy as np

from ..distributions import abs_moment, sample
from ..market_data import ReturnSeries
from ..utils import AlignmentError, DomainError
from .recursions import filter_extended, mean_forecast
from .specs import GarchFamily, GarchFit, GarchParams, GarchSpec, MeanModel, unconditional_variance


def forecast_one_step(fit: GarchFit, returns: ReturnSeries, clamp: bool = False) -> Tuple[float, float]:
    """
    Return and volatility forecast for the day after the estimation window.

    Args:
        fit (GarchFit): Fit estimated on ``returns``.
        returns (ReturnSeries): The estimation window.
        clamp (bool): Bound the forecast variance by the range of the fitted variances.
            EGARCH and APARCH forecasts are mapped back from ``ln h`` and ``sigma ** delta`` and
            can spike; the bound is off by default.

    Returns:
        tuple: ``(r_f, sigma_f)``.

    Raises:
        AlignmentError: If ``returns`` is not the window the fit was estimated on.
    """
    r = returns.to_numpy()
    if len(r) != fit.nobs:
        raise AlignmentError(f"fit window has {fit.nobs} returns, got {len(r)}")
    _, h = filter_extended(fit.spec, fit.params, r, fit.h_init, returns.dates)
    h_next = float(h[-1])
    if clamp:
        h_next = float(np.clip(h_next, np.min(fit.h_series), np.max(fit.h_series)))
    return mean_forecast(fit.spec, fit.params, r), float(np.sqrt(h_next))


def simulate(
    spec: GarchSpec,
    params: GarchParams,
    T: int,
    seed: int,
    burn: int = 500,
    start: str = "2000-01-03",
) -> Tuple[ReturnSeries, np.ndarray]:
    """
    Simulate returns and their true conditional variances.

    The recursion starts at the long-run variance and discards ``burn`` days.

    Args:
        spec (GarchSpec): Model specification.
        params (GarchParams): Stationary parameters.
        T (int): Number of returned days.
        seed (int): Generator seed; identical seeds give identical paths.
        burn (int): Discarded warm-up days.
        start (str): First business day of the returned series.

    Returns:
        tuple: ``(ReturnSeries, h)`` with ``h[t]`` the variance of return ``t``.

    Raises:
        ConstraintError: If the parameters are invalid or non-stationary.
    """
    params.validate(spec)
    if T < 1:
        raise DomainError(f"simulation length must be positive, got {T}")
    h_bar = unconditional_variance(spec, params)
    dist = params.innovation(spec)
    total = T + burn
    z = sample(dist, seed, total)

    q, p = spec.q, spec.p
    alpha, beta = np.asarray(params.alpha), np.asarray(params.beta)
    family = spec.family
    e_abs = abs_moment(dist) if family is GarchFamily.EGARCH else 0.0
    delta = params.delta

    h = np.empty(total)
    eps = np.empty(total)
    r = np.empty(total)
    r_prev = params.mu / (1.0 - params.phi) if spec.mean_model is MeanModel.AR1 else params.mu
    for t in range(total):
        if family is GarchFamily.EGARCH:
            value = params.alpha0
            for i in range(1, q + 1):
                if t - i >= 0:
                    value += alpha[i - 1] * (params.theta * z[t - i] + params.gamma * (abs(z[t - i]) - e_abs))
            for j in range(1, p + 1):
                value += beta[j - 1] * (np.log(h[t - j]) if t - j >= 0 else np.log(h_bar))
            h[t] = np.exp(value)
        elif family is GarchFamily.APARCH:
            value = params.alpha0
            for i in range(1, q + 1):
                if t - i >= 0:
                    e = eps[t - i]
                    value += alpha[i - 1] * (abs(e) - params.gamma_i[i - 1] * e) ** delta
                else:
                    value += alpha[i - 1] * h_bar ** (delta / 2.0)
            for j in range(1, p + 1):
                value += beta[j - 1] * (h[t - j] if t - j >= 0 else h_bar) ** (delta / 2.0)
            h[t] = value ** (2.0 / delta)
        else:
            value = params.alpha0
            for i in range(1, q + 1):
                e_sq = eps[t - i] ** 2 if t - i >= 0 else h_bar
                value += alpha[i - 1] * e_sq
                if family is GarchFamily.GJR:
                    negative = eps[t - i] <= 0.0 if t - i >= 0 else 0.5
                    value += params.omega[i - 1] * negative * e_sq
            for j in range(1, p + 1):
                value += beta[j - 1] * (h[t - j] if t - j >= 0 else h_bar)
            h[t] = value
        eps[t] = np.sqrt(h[t]) * z[t]
        mean = params.mu + params.phi * r_prev if spec.mean_model is MeanModel.AR1 else params.mu
        r[t] = mean + eps[t]
        r_prev = r[t]

    return ReturnSeries.from_array(r[burn:], start=start), h[burn:]
