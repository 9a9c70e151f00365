"""
Model specifications, parameter sets and fit results for the GARCH family.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Optional, Tuple

import numpy as np
import pandas as pd
from scipy import integrate

from ..distributions import DistributionKind, DistributionSpec, density
from ..utils import ConstraintError


class GarchFamily(str, Enum):
    GARCH = "GARCH"
    GJR = "GJR"
    EGARCH = "EGARCH"
    APARCH = "APARCH"


class MeanModel(str, Enum):
    CONSTANT = "Constant"
    AR1 = "AR1"


@dataclass(frozen=True)
class GarchSpec:
    """
    Family, lag orders, mean model and innovation distribution of a volatility model.

    Attributes:
        family (GarchFamily): Variance recursion.
        p (int): Number of lagged variances, >= 0.
        q (int): Number of lagged shocks, >= 1.
        mean_model (MeanModel): Constant mean or AR(1).
        distribution (DistributionSpec): Innovation family; its shape values seed estimation.
    """

    family: GarchFamily = GarchFamily.GARCH
    p: int = 1
    q: int = 1
    mean_model: MeanModel = MeanModel.CONSTANT
    distribution: DistributionSpec = field(default_factory=DistributionSpec)

    def __post_init__(self):
        try:
            object.__setattr__(self, "family", GarchFamily(self.family))
            object.__setattr__(self, "mean_model", MeanModel(self.mean_model))
        except ValueError as e:
            raise ConstraintError(str(e)) from None
        if self.p < 0 or self.q < 1:
            raise ConstraintError(f"lag orders need p >= 0 and q >= 1, got p={self.p}, q={self.q}")

    @property
    def label(self) -> str:
        return f"{self.family.value}-{self.distribution.kind.value}"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "family": self.family.value,
            "p": self.p,
            "q": self.q,
            "mean_model": self.mean_model.value,
            "distribution": self.distribution.to_dict(),
        }


@dataclass(frozen=True)
class GarchParams:
    """
    Coefficients of a fitted or hand-specified model.

    Only the fields relevant to the spec's family are read: ``omega`` for GJR, ``theta`` and
    ``gamma`` for EGARCH (whose first ``alpha`` is fixed at 1), ``gamma_i`` and ``delta`` for
    APARCH, ``phi`` for the AR(1) mean. ``nu`` and ``xi`` override the spec's distribution shape.
    """

    alpha0: float
    alpha: Tuple[float, ...] = ()
    beta: Tuple[float, ...] = ()
    mu: float = 0.0
    phi: float = 0.0
    omega: Tuple[float, ...] = ()
    theta: float = 0.0
    gamma: float = 0.0
    gamma_i: Tuple[float, ...] = ()
    delta: float = 2.0
    nu: Optional[float] = None
    xi: Optional[float] = None

    def __post_init__(self):
        for name in ("alpha", "beta", "omega", "gamma_i"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))

    def innovation(self, spec: GarchSpec) -> DistributionSpec:
        """Distribution of the standardized shocks, with this parameter set's shape values."""
        base = spec.distribution
        if base.kind is DistributionKind.NORMAL:
            return base
        nu = self.nu if self.nu is not None else base.nu
        if base.kind is DistributionKind.STUDENT_T:
            return DistributionSpec.student_t(nu)
        xi = self.xi if self.xi is not None else base.xi
        return DistributionSpec.skew_student_t(nu, xi)

    def validate(self, spec: GarchSpec) -> None:
        """
        Check the family constraints.

        Raises:
            ConstraintError: On a wrong coefficient count or a violated constraint.
        """
        alpha, beta = np.asarray(self.alpha), np.asarray(self.beta)
        if len(alpha) != spec.q or len(beta) != spec.p:
            raise ConstraintError(
                f"{spec.family.value}({spec.p},{spec.q}) needs {spec.q} alpha and {spec.p} beta values"
            )
        if not np.isfinite(np.concatenate(([self.alpha0, self.mu, self.phi], alpha, beta))).all():
            raise ConstraintError("parameters must be finite")
        if spec.mean_model is MeanModel.AR1 and not abs(self.phi) < 1.0:
            raise ConstraintError(f"AR(1) coefficient must satisfy |phi| < 1, got {self.phi}")

        family = spec.family
        if family is GarchFamily.EGARCH:
            if alpha[0] != 1.0:
                raise ConstraintError("EGARCH fixes alpha_1 = 1")
            if not np.abs(beta).sum() < 1.0:
                raise ConstraintError("EGARCH needs sum |beta| < 1")
        else:
            if not self.alpha0 > 0.0:
                raise ConstraintError(f"alpha0 must be positive, got {self.alpha0}")
            if (alpha < 0).any() or (beta < 0).any():
                raise ConstraintError("alpha and beta must be nonnegative")

        if family is GarchFamily.GARCH and not alpha.sum() + beta.sum() < 1.0:
            raise ConstraintError("GARCH needs sum(alpha) + sum(beta) < 1")
        if family is GarchFamily.GJR:
            omega = np.asarray(self.omega)
            if len(omega) != spec.q:
                raise ConstraintError(f"GJR needs {spec.q} omega values")
            if (alpha + omega < 0).any():
                raise ConstraintError("GJR needs alpha_i + omega_i >= 0")
            if not alpha.sum() + beta.sum() + 0.5 * omega.sum() < 1.0:
                raise ConstraintError("GJR needs sum(alpha) + sum(beta) + sum(omega)/2 < 1")
        if family is GarchFamily.APARCH:
            gamma_i = np.asarray(self.gamma_i)
            if len(gamma_i) != spec.q:
                raise ConstraintError(f"APARCH needs {spec.q} gamma values")
            if not self.delta > 0.0:
                raise ConstraintError(f"APARCH needs delta > 0, got {self.delta}")
            if not (np.abs(gamma_i) < 1.0).all():
                raise ConstraintError("APARCH needs -1 < gamma_i < 1")

        self.innovation(spec)

    def to_dict(self, spec: GarchSpec) -> Dict[str, Any]:
        """Only the fields the spec's family and mean model use."""
        out: Dict[str, Any] = {"mu": self.mu}
        if spec.mean_model is MeanModel.AR1:
            out["phi"] = self.phi
        out["alpha0"] = self.alpha0
        out["alpha"] = list(self.alpha)
        out["beta"] = list(self.beta)
        if spec.family is GarchFamily.GJR:
            out["omega"] = list(self.omega)
        if spec.family is GarchFamily.EGARCH:
            out["theta"] = self.theta
            out["gamma"] = self.gamma
        if spec.family is GarchFamily.APARCH:
            out["gamma_i"] = list(self.gamma_i)
            out["delta"] = self.delta
        out.update(self.innovation(spec).to_dict())
        out.pop("kind")
        return out

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "GarchParams":
        known = set(cls.__dataclass_fields__)
        return cls(**{k: v for k, v in data.items() if k in known})


def aparch_kappa(dist: DistributionSpec, gamma: float, delta: float) -> float:
    """``E(|z| - gamma * z) ** delta`` under the innovation density."""
    integrand = lambda z: (abs(z) - gamma * z) ** delta * density(dist, z)
    lower, _ = integrate.quad(integrand, -np.inf, 0.0, limit=200)
    upper, _ = integrate.quad(integrand, 0.0, np.inf, limit=200)
    return lower + upper


def unconditional_variance(spec: GarchSpec, params: GarchParams) -> float:
    """
    Long-run variance of the shocks implied by the parameters.

    For EGARCH the value is ``exp`` of the long-run mean of ``ln h``; for APARCH it is the
    long-run mean of ``sigma ** delta`` mapped back with the power ``2 / delta``.

    Raises:
        ConstraintError: If the parameters imply no finite long-run variance.
    """
    alpha, beta = np.asarray(params.alpha), np.asarray(params.beta)
    family = spec.family
    if family is GarchFamily.EGARCH:
        return float(np.exp(params.alpha0 / (1.0 - beta.sum())))
    if family is GarchFamily.APARCH:
        dist = params.innovation(spec)
        kappa = np.array([aparch_kappa(dist, g, params.delta) for g in params.gamma_i])
        persistence = float(alpha @ kappa + beta.sum())
        level = params.alpha0
        power = 2.0 / params.delta
    else:
        persistence = float(alpha.sum() + beta.sum())
        if family is GarchFamily.GJR:
            persistence += 0.5 * float(np.sum(params.omega))
        level = params.alpha0
        power = 1.0
    if not persistence < 1.0:
        raise ConstraintError(f"persistence {persistence:.6f} >= 1 has no finite long-run variance")
    return float((level / (1.0 - persistence)) ** power)


@dataclass(frozen=True)
class GarchFit:
    """
    Result of a maximum-likelihood fit.

    Attributes:
        spec (GarchSpec): Fitted specification.
        params (GarchParams): Best parameters found.
        log_likelihood (float): Log-likelihood at ``params``.
        converged (bool): Whether the optimizer met its convergence criterion.
        h_series (np.ndarray): Fitted conditional variances.
        standardized_residuals (np.ndarray): ``eps_t / sqrt(h_t)``.
        h_init (float): Pre-sample variance the recursion was started from.
        dates (pd.DatetimeIndex): Dates of the estimation window.
        successful_starts (int): Starting points that produced a finite optimum.
        message (str): Optimizer message of the best start.
    """

    spec: GarchSpec
    params: GarchParams
    log_likelihood: float
    converged: bool
    h_series: np.ndarray
    standardized_residuals: np.ndarray
    h_init: float
    dates: Optional[pd.DatetimeIndex] = None
    successful_starts: int = 1
    message: str = ""

    @property
    def nobs(self) -> int:
        return len(self.h_series)

    @property
    def n_params(self) -> int:
        spec = self.spec
        count = 1 + (spec.mean_model is MeanModel.AR1) + 1 + spec.q + spec.p
        if spec.family is GarchFamily.GJR:
            count += spec.q
        elif spec.family is GarchFamily.EGARCH:
            count += 1  # alpha_1 fixed, theta and gamma free
        elif spec.family is GarchFamily.APARCH:
            count += spec.q + 1
        return count + len(spec.distribution.shape_names)

    @property
    def aic(self) -> float:
        return 2.0 * self.n_params - 2.0 * self.log_likelihood

    @property
    def bic(self) -> float:
        return self.n_params * np.log(self.nobs) - 2.0 * self.log_likelihood

    @property
    def innovation(self) -> DistributionSpec:
        return self.params.innovation(self.spec)

    def to_dict(self) -> Dict[str, Any]:
        out = {
            "spec": self.spec.to_dict(),
            "params": self.params.to_dict(self.spec),
            "log_likelihood": self.log_likelihood,
            "converged": self.converged,
            "successful_starts": self.successful_starts,
            "nobs": self.nobs,
            "aic": self.aic,
            "bic": self.bic,
        }
        if self.dates is not None and len(self.dates):
            out["window"] = [self.dates[0].strftime("%Y-%m-%d"), self.dates[-1].strftime("%Y-%m-%d")]
        return out

