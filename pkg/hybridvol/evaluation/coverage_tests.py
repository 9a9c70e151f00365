"""
VaR coverage tests and the Expected Shortfall exceedance-residual test.
"""

from typing import Sequence, Tuple, Union

import numpy as np
from scipy import special, stats

from ..risk import HitSequence
from ..utils import DomainError, InsufficientExceedancesError, PipelineLogger
from .metrics import TestResult

logger = PipelineLogger.get_logger(__name__)

Hits = Union[HitSequence, Sequence[int]]


def _hit_values(hits: Hits) -> np.ndarray:
    values = hits.values if isinstance(hits, HitSequence) else np.asarray(hits, dtype=int)
    if len(values) == 0:
        raise DomainError("coverage tests need at least one forecast")
    return values


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"tolerance level must lie in (0, 1), got {alpha}")


def _lr_uc(x: int, n: int, alpha: float) -> float:
    null = special.xlogy(n - x, 1.0 - alpha) + special.xlogy(x, alpha)
    rate = x / n
    alternative = special.xlogy(n - x, 1.0 - rate) + special.xlogy(x, rate)
    return max(float(-2.0 * (null - alternative)), 0.0)


def kupiec_from_counts(x: int, n: int, alpha: float) -> TestResult:
    """Unconditional coverage test from an exceedance count ``x`` out of ``n`` forecasts."""
    _check_alpha(alpha)
    if not 0 <= x <= n or n < 1:
        raise DomainError(f"need 0 <= x <= n and n >= 1, got x={x}, n={n}")
    statistic = _lr_uc(x, n, alpha)
    return TestResult(
        statistic,
        float(stats.chi2.sf(statistic, 1)),
        "chi2",
        dof=1,
        details={"exceedances": float(x), "n": float(n), "expected": alpha * n},
    )


def kupiec_test(hits: Hits, alpha: float) -> TestResult:
    """
    Kupiec proportion-of-failures test.

    ``LR_uc = -2 ln[(1 - alpha)^(n-x) alpha^x / ((1 - x/n)^(n-x) (x/n)^x)]`` against chi2(1),
    with ``0 ln 0 = 0``.
    """
    values = _hit_values(hits)
    return kupiec_from_counts(int(values.sum()), len(values), alpha)


def christoffersen_test(hits: Hits, alpha: float) -> TestResult:
    """
    Conditional coverage test ``LR_cc = LR_uc + LR_ind`` against chi2(2).

    ``LR_ind`` compares a first-order Markov chain of the hits with an independent one, using the
    transition counts ``n00, n01, n10, n11``.

    Raises:
        DomainError: If fewer than two forecasts are given or alpha is outside (0, 1).
    """
    _check_alpha(alpha)
    values = _hit_values(hits)
    n = len(values)
    if n < 2:
        raise DomainError("the independence test needs at least two forecasts")
    prev, curr = values[:-1], values[1:]
    n00 = int(np.sum((prev == 0) & (curr == 0)))
    n01 = int(np.sum((prev == 0) & (curr == 1)))
    n10 = int(np.sum((prev == 1) & (curr == 0)))
    n11 = int(np.sum((prev == 1) & (curr == 1)))

    pi01 = n01 / (n00 + n01) if n00 + n01 else 0.0
    pi11 = n11 / (n10 + n11) if n10 + n11 else 0.0
    pi = (n01 + n11) / (n - 1)
    independent = special.xlogy(n00 + n10, 1.0 - pi) + special.xlogy(n01 + n11, pi)
    markov = (
        special.xlogy(n00, 1.0 - pi01)
        + special.xlogy(n01, pi01)
        + special.xlogy(n10, 1.0 - pi11)
        + special.xlogy(n11, pi11)
    )
    lr_ind = max(float(-2.0 * (independent - markov)), 0.0)
    lr_uc = _lr_uc(int(values.sum()), n, alpha)
    statistic = lr_uc + lr_ind
    return TestResult(
        statistic,
        float(stats.chi2.sf(statistic, 2)),
        "chi2",
        dof=2,
        details={
            "lr_uc": lr_uc,
            "lr_ind": lr_ind,
            "n00": float(n00),
            "n01": float(n01),
            "n10": float(n10),
            "n11": float(n11),
        },
    )


def exceedance_residuals(
    returns: Sequence[float],
    sigma_forecasts: Sequence[float],
    es_forecasts: Sequence[float],
    hits: Hits,
) -> np.ndarray:
    """``(r_t - ES_t) / sigma_t`` on exceedance days; days with a zero volatility forecast are skipped."""
    r = np.asarray(returns, dtype=float)
    sigma = np.asarray(sigma_forecasts, dtype=float)
    es = np.asarray(es_forecasts, dtype=float)
    values = _hit_values(hits).astype(bool)
    if not (len(r) == len(sigma) == len(es) == len(values)):
        raise DomainError("returns, volatility, ES forecasts and hits must have the same length")
    usable = values & (sigma > 0.0)
    skipped = int(values.sum() - usable.sum())
    if skipped:
        logger.warning(f"Skipped {skipped} exceedance(s) with a zero volatility forecast")
    return (r[usable] - es[usable]) / sigma[usable]


def mcneil_frey_test(
    returns: Sequence[float],
    sigma_forecasts: Sequence[float],
    es_forecasts: Sequence[float],
    hits: Hits,
    bootstrap_B: int = 10000,
    seed: int = 0,
) -> Tuple[TestResult, TestResult]:
    """
    Zero-mean test of the standardized ES exceedance residuals.

    The exact form is a one-sample t-test with ``m - 1`` degrees of freedom. The bootstrap form
    resamples the centered residuals ``bootstrap_B`` times; its two-sided p-value is the share of
    resampled means at least as large in magnitude as the observed mean. Each result carries the
    one-sided p-value for the alternative of a negative mean (ES too shallow) as well.

    Returns:
        tuple: ``(exact, bootstrap)`` results, two-sided p-values in ``p_value``.

    Raises:
        InsufficientExceedancesError: If fewer than two usable exceedances exist.
    """
    x = exceedance_residuals(returns, sigma_forecasts, es_forecasts, hits)
    m = len(x)
    if m < 2:
        raise InsufficientExceedancesError(f"the ES exceedance test needs at least 2 exceedances, got {m}")
    mean = float(np.mean(x))
    sd = float(np.std(x, ddof=1))
    details = {"exceedances": float(m), "mean_residual": mean}

    if sd == 0.0:
        if mean == 0.0:
            statistic, two_sided, one_sided = 0.0, 1.0, 1.0
        else:
            statistic = float(np.copysign(np.inf, mean))
            two_sided = 0.0
            one_sided = 0.0 if mean < 0.0 else 1.0
    else:
        statistic = mean / (sd / np.sqrt(m))
        two_sided = float(2.0 * stats.t.sf(abs(statistic), m - 1))
        one_sided = float(stats.t.cdf(statistic, m - 1))
    exact = TestResult(float(statistic), two_sided, "t", dof=m - 1, p_value_one_sided=one_sided, details=details)

    rng = np.random.default_rng(seed)
    centered = x - mean
    means = np.empty(bootstrap_B)
    chunk = max(1, 1_000_000 // m)
    for start in range(0, bootstrap_B, chunk):
        size = min(chunk, bootstrap_B - start)
        draws = rng.integers(0, m, size=(size, m))
        means[start : start + size] = centered[draws].mean(axis=1)
    boot_two = float(np.mean(np.abs(means) >= abs(mean)))
    boot_one = float(np.mean(means <= mean))
    bootstrap = TestResult(
        mean,
        boot_two,
        "bootstrap",
        p_value_one_sided=boot_one,
        details={**details, "resamples": float(bootstrap_B)},
    )
    return exact, bootstrap
