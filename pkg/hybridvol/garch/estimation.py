"""
Maximum-likelihood estimation.

The optimizer works on an unconstrained vector: logs for positive levels, scaled logits for
bounded values, a logit of the persistence plus softmax shares for the stationarity constraint.
Each fit runs L-BFGS-B from three deterministic starting points on the per-observation objective,
keeps the best optimum and polishes it on the log-likelihood itself with central-difference gradients.
"""

from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from scipy import optimize, special

from ..distributions import DistributionKind, log_density
from ..market_data import ReturnSeries
from ..utils import (ConstraintError, GarchConvergenceError, InsufficientDataError,
                     NumericOverflowError, PipelineLogger)
from .recursions import default_h_init, filter_extended
from .specs import GarchFamily, GarchFit, GarchParams, GarchSpec, MeanModel

logger = PipelineLogger.get_logger(__name__)

NU_BOUNDS = (2.1, 100.0)
XI_BOUNDS = (0.1, 10.0)
DELTA_MAX = 4.0
# central differences on the transformed scale
GRADIENT_STEP = 1e-6
GRADIENT_LIMIT = 1e-3
_PENALTY = 1e6
_SHARE_FLOOR = 1e-8
_BOUND_MARGIN = 1e-10


@dataclass(frozen=True)
class FitOptions:
    """
    Optimizer settings.

    Attributes:
        starts (int): Number of deterministic starting points used, 1 to 3.
        tolerance (float): Stop when the log-likelihood improves by less than this.
        gradient_tolerance (float): Projected-gradient stop of the final pass, which works on the
            log-likelihood itself rather than its per-observation mean.
        max_iterations (int): Iteration cap per start.
        min_observations (int): Smallest accepted estimation window.
    """

    starts: int = 3
    tolerance: float = 1e-8
    gradient_tolerance: float = 1e-4
    max_iterations: int = 1000
    min_observations: int = 100


def _scaled_logit(value: float, low: float, high: float) -> float:
    share = np.clip((value - low) / (high - low), _BOUND_MARGIN, 1.0 - _BOUND_MARGIN)
    return float(special.logit(share))


def _scaled_expit(u: float, low: float, high: float) -> float:
    return float(low + (high - low) * special.expit(u))


class ParameterCodec:
    """
    Maps ``GarchParams`` to and from the unconstrained optimizer vector of one spec.

    Args:
        spec (GarchSpec): Specification whose free parameters are encoded.
    """

    def __init__(self, spec: GarchSpec):
        self.spec = spec
        family = spec.family
        if family is GarchFamily.GJR:
            self.n_shares = 2 * spec.q + spec.p
        elif family is GarchFamily.EGARCH:
            self.n_shares = 0
        else:
            self.n_shares = spec.q + spec.p

    @property
    def size(self) -> int:
        spec = self.spec
        n = 1 + (spec.mean_model is MeanModel.AR1)
        if spec.family is GarchFamily.EGARCH:
            n += 1 + (spec.q - 1) + 2 + spec.p
        else:
            n += 2 + self.n_shares - 1
            if spec.family is GarchFamily.APARCH:
                n += spec.q + 1
        return n + len(spec.distribution.shape_names)

    def decode(self, u: np.ndarray) -> GarchParams:
        spec = self.spec
        it = iter(np.asarray(u, dtype=float))
        values: Dict[str, object] = {"mu": float(next(it))}
        if spec.mean_model is MeanModel.AR1:
            values["phi"] = float(np.tanh(next(it)))

        if spec.family is GarchFamily.EGARCH:
            values["alpha0"] = float(next(it))
            values["alpha"] = (1.0,) + tuple(float(next(it)) for _ in range(spec.q - 1))
            values["theta"] = float(next(it))
            values["gamma"] = float(next(it))
            values["beta"] = tuple(float(np.tanh(next(it))) / spec.p for _ in range(spec.p))
        else:
            values["alpha0"] = float(np.exp(next(it)))
            persistence = float(special.expit(next(it)))
            logits = np.array([next(it) for _ in range(self.n_shares - 1)] + [0.0])
            shares = persistence * special.softmax(logits)
            if spec.family is GarchFamily.GJR:
                alpha = 2.0 * shares[: spec.q]
                combined = 2.0 * shares[spec.q : 2 * spec.q]
                values["alpha"] = tuple(alpha)
                values["omega"] = tuple(combined - alpha)
                values["beta"] = tuple(shares[2 * spec.q :])
            else:
                values["alpha"] = tuple(shares[: spec.q])
                values["beta"] = tuple(shares[spec.q :])
            if spec.family is GarchFamily.APARCH:
                values["gamma_i"] = tuple(float(np.tanh(next(it))) for _ in range(spec.q))
                values["delta"] = DELTA_MAX * float(special.expit(next(it)))

        kind = spec.distribution.kind
        if kind is not DistributionKind.NORMAL:
            values["nu"] = _scaled_expit(next(it), *NU_BOUNDS)
        if kind is DistributionKind.SKEW_STUDENT_T:
            values["xi"] = float(np.exp(_scaled_expit(next(it), *np.log(XI_BOUNDS))))
        return GarchParams(**values)

    def encode(self, params: GarchParams) -> np.ndarray:
        spec = self.spec
        u: List[float] = [params.mu]
        if spec.mean_model is MeanModel.AR1:
            u.append(np.arctanh(params.phi))

        if spec.family is GarchFamily.EGARCH:
            u.append(params.alpha0)
            u.extend(params.alpha[1:])
            u.extend([params.theta, params.gamma])
            u.extend(np.arctanh(np.asarray(params.beta) * spec.p))
        else:
            alpha = np.asarray(params.alpha)
            if spec.family is GarchFamily.GJR:
                pieces = np.concatenate((alpha / 2.0, (alpha + np.asarray(params.omega)) / 2.0, params.beta))
            else:
                pieces = np.concatenate((alpha, params.beta))
            pieces = np.maximum(pieces, _SHARE_FLOOR)
            persistence = pieces.sum()
            u.append(np.log(params.alpha0))
            u.append(special.logit(persistence))
            u.extend(np.log(pieces[:-1]) - np.log(pieces[-1]))
            if spec.family is GarchFamily.APARCH:
                u.extend(np.arctanh(params.gamma_i))
                u.append(special.logit(params.delta / DELTA_MAX))

        dist = params.innovation(spec)
        if dist.kind is not DistributionKind.NORMAL:
            u.append(_scaled_logit(float(dist.nu), *NU_BOUNDS))
        if dist.kind is DistributionKind.SKEW_STUDENT_T:
            u.append(_scaled_logit(float(np.log(dist.xi)), *np.log(XI_BOUNDS)))
        return np.asarray(u, dtype=float)


def _log_likelihood_terms(spec: GarchSpec, params: GarchParams, r: np.ndarray, h_init: float,
                          dates: Optional[pd.DatetimeIndex] = None) -> Tuple[float, np.ndarray, np.ndarray]:
    eps, h = filter_extended(spec, params, r, h_init, dates)
    h = h[:-1]
    z = eps / np.sqrt(h)
    value = float(np.sum(log_density(params.innovation(spec), z)) - 0.5 * np.sum(np.log(h)))
    return value, h, z


def log_likelihood(spec: GarchSpec, params: GarchParams, returns: ReturnSeries,
                   h_init: Optional[float] = None) -> float:
    """
    Gaussian-quasi or full log-likelihood ``sum_t [ln f(eps_t / sqrt(h_t)) - ln(h_t) / 2]``.

    Args:
        spec (GarchSpec): Model specification.
        params (GarchParams): Parameters to evaluate.
        returns (ReturnSeries): Estimation window.
        h_init (float, optional): Pre-sample variance; defaults to the sample variance.

    Raises:
        ConstraintError: If the parameters violate the family constraints.
        NumericOverflowError: If the recursion or the sum is non-finite.
    """
    params.validate(spec)
    r = returns.to_numpy()
    h0 = default_h_init(r) if h_init is None else h_init
    value, _, _ = _log_likelihood_terms(spec, params, r, h0, returns.dates)
    if not np.isfinite(value):
        raise NumericOverflowError(f"log-likelihood is {value}")
    return value


def _central_gradient(func: Callable[[np.ndarray], float], u: np.ndarray, step: float = GRADIENT_STEP) -> np.ndarray:
    grad = np.empty(len(u))
    for i in range(len(u)):
        shift = np.zeros(len(u))
        shift[i] = step
        grad[i] = (func(u + shift) - func(u - shift)) / (2.0 * step)
    return grad


def transformed_gradient(spec: GarchSpec, params: GarchParams, returns: ReturnSeries,
                         h_init: Optional[float] = None, step: float = GRADIENT_STEP) -> np.ndarray:
    """
    Gradient of ``log_likelihood`` with respect to the unconstrained optimizer vector.

    Central differences with ``step`` around ``ParameterCodec(spec).encode(params)``.

    Raises:
        ConstraintError: If a shifted vector decodes to invalid parameters.
        NumericOverflowError: If the recursion overflows at a shifted vector.
    """
    r = returns.to_numpy()
    h0 = default_h_init(r) if h_init is None else h_init
    codec = ParameterCodec(spec)

    def ll(u: np.ndarray) -> float:
        return _log_likelihood_terms(spec, codec.decode(u), r, h0)[0]

    return _central_gradient(ll, codec.encode(params), step)


def starting_points(spec: GarchSpec, r: np.ndarray) -> List[GarchParams]:
    """Three deterministic starting parameter sets scaled to the sample."""
    var = default_h_init(r)
    mean = float(np.mean(r))
    nu = spec.distribution.nu if spec.distribution.nu is not None else 8.0
    xi = spec.distribution.xi if spec.distribution.xi is not None else 1.0
    nu, xi = float(np.clip(nu, 2.2, 99.0)), float(np.clip(xi, 0.11, 9.0))
    shape = {}
    if spec.distribution.kind is not DistributionKind.NORMAL:
        shape["nu"] = nu
    if spec.distribution.kind is DistributionKind.SKEW_STUDENT_T:
        shape["xi"] = xi

    q, p = spec.q, spec.p
    points = []
    for a_total, b_total, asym, delta in ((0.05, 0.90, 0.05, 2.0), (0.10, 0.85, 0.10, 1.5), (0.03, 0.95, 0.0, 1.2)):
        if p == 0:
            a_total, b_total = a_total + b_total / 2.0, 0.0
        alpha = (a_total / q,) * q
        beta = (b_total / p,) * p if p else ()
        values = dict(mu=mean, alpha=alpha, beta=beta, **shape)
        family = spec.family
        if family is GarchFamily.GARCH:
            values["alpha0"] = var * (1.0 - a_total - b_total)
        elif family is GarchFamily.GJR:
            values["alpha"] = (a_total / (2.0 * q),) * q
            values["omega"] = (a_total / q,) * q
            values["alpha0"] = var * (1.0 - a_total - b_total)
        elif family is GarchFamily.EGARCH:
            values["alpha"] = (1.0,) + (0.0,) * (q - 1)
            values["beta"] = (b_total / p,) * p if p else ()
            values["alpha0"] = (1.0 - b_total) * np.log(var)
            values["theta"] = -asym
            values["gamma"] = 2.0 * a_total
        else:
            values["gamma_i"] = (asym,) * q
            values["delta"] = delta
            values["alpha0"] = var ** (delta / 2.0) * (1.0 - a_total - b_total)
        if spec.mean_model is MeanModel.AR1:
            values["phi"] = 0.0
        points.append(GarchParams(**values))
    return points


def fit(spec: GarchSpec, returns: ReturnSeries, options: Optional[FitOptions] = None) -> GarchFit:
    """
    Maximum-likelihood fit from several deterministic starting points.

    Args:
        spec (GarchSpec): Model to estimate.
        returns (ReturnSeries): Estimation window.
        options (FitOptions, optional): Optimizer settings.

    Returns:
        GarchFit: Best optimum over the starts, polished on the log-likelihood itself.
        ``converged`` is True only when the central-difference gradient of the log-likelihood on the
        transformed scale stays below ``GRADIENT_LIMIT`` in every component.

    Raises:
        InsufficientDataError: If the window is shorter than ``options.min_observations``.
        GarchConvergenceError: If every start ends in a non-finite objective or raises.
    """
    options = options or FitOptions()
    r = returns.to_numpy()
    n = len(r)
    if n < options.min_observations:
        raise InsufficientDataError(f"GARCH fit needs at least {options.min_observations} returns, got {n}")
    candidates = starting_points(spec, r)
    if not 1 <= options.starts <= len(candidates):
        raise ConstraintError(f"number of starts must be between 1 and {len(candidates)}")

    h_init = default_h_init(r)
    codec = ParameterCodec(spec)

    def objective(u: np.ndarray) -> float:
        try:
            with np.errstate(all="ignore"):
                value, _, _ = _log_likelihood_terms(spec, codec.decode(u), r, h_init)
        except (NumericOverflowError, ConstraintError, FloatingPointError):
            return _PENALTY
        return -value / n if np.isfinite(value) else _PENALTY

    results = []
    diagnostics: Dict[str, str] = {}
    for k, start in enumerate(candidates[: options.starts]):
        try:
            res = optimize.minimize(
                objective,
                codec.encode(start),
                method="L-BFGS-B",
                options={
                    "ftol": options.tolerance / n,
                    "gtol": options.gradient_tolerance / n,
                    "maxiter": options.max_iterations,
                },
            )
        except Exception as e:
            diagnostics[f"start_{k}"] = f"raised {type(e).__name__}: {e}"
            continue
        if not np.isfinite(res.fun) or res.fun >= _PENALTY:
            diagnostics[f"start_{k}"] = f"non-finite objective: {res.message}"
            continue
        diagnostics[f"start_{k}"] = str(res.message)
        results.append(res)

    if not results:
        logger.error(f"Every start of the {spec.label} fit failed: {diagnostics}")
        raise GarchConvergenceError(f"all {options.starts} starts of the {spec.label} fit failed", diagnostics)

    best = min(results, key=lambda res: res.fun)
    x, message = best.x, str(best.message)

    def total(u: np.ndarray) -> float:
        return n * objective(u)

    try:
        polished = optimize.minimize(
            total,
            x,
            jac=lambda u: _central_gradient(total, u),
            method="L-BFGS-B",
            options={
                "ftol": float(np.finfo(float).eps),
                "gtol": options.gradient_tolerance,
                "maxiter": options.max_iterations,
            },
        )
        if np.isfinite(polished.fun) and polished.fun <= n * best.fun:
            x, message = polished.x, str(polished.message)
    except (NumericOverflowError, ConstraintError, FloatingPointError) as e:
        logger.debug(f"{spec.label} polishing pass raised {type(e).__name__}: {e}")

    params = codec.decode(x)
    value, h, z = _log_likelihood_terms(spec, params, r, h_init, returns.dates)
    try:
        with np.errstate(all="ignore"):
            gradient = float(np.max(np.abs(transformed_gradient(spec, params, returns, h_init))))
    except (NumericOverflowError, ConstraintError, FloatingPointError):
        gradient = np.inf
    converged = bool(np.isfinite(gradient) and gradient < GRADIENT_LIMIT)
    logger.debug(
        f"{spec.label} fit: loglik {value:.6f}, {len(results)}/{options.starts} starts ok, "
        f"max |gradient| {gradient:.3g}, converged={converged} ({message})"
    )
    return GarchFit(
        spec=spec,
        params=params,
        log_likelihood=value,
        converged=converged,
        h_series=h,
        standardized_residuals=z,
        h_init=h_init,
        dates=returns.dates,
        successful_starts=len(results),
        message=message,
    )
