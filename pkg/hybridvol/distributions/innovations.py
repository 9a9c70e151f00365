"""
Zero-mean, unit-variance innovation distributions.

Three families are supported: the standard normal, Student's t rescaled to unit variance, and
the Fernandez-Steel skewed t built on that unit-variance t and re-centered and re-scaled to
zero mean and unit variance. Every function accepts scalars or numpy arrays and returns a float
for scalar input.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Dict, Optional, Tuple, Union

import numpy as np
from scipy import special, stats

from ..utils import ConstraintError, DomainError

ArrayLike = Union[float, np.ndarray]

_LOG_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)


class DistributionKind(str, Enum):
    NORMAL = "Normal"
    STUDENT_T = "StudentT"
    SKEW_STUDENT_T = "SkewStudentT"


@dataclass(frozen=True)
class DistributionSpec:
    """
    Innovation distribution and its shape parameters.

    Attributes:
        kind (DistributionKind): Family.
        nu (float, optional): Degrees of freedom, > 2; required for the t families.
        xi (float, optional): Skewness, > 0; required for the skewed t, where 1 means symmetric.
    """

    kind: DistributionKind = DistributionKind.NORMAL
    nu: Optional[float] = None
    xi: Optional[float] = None

    def __post_init__(self):
        try:
            kind = DistributionKind(self.kind)
        except ValueError:
            raise ConstraintError(f"unknown distribution {self.kind!r}") from None
        object.__setattr__(self, "kind", kind)

        if kind is DistributionKind.NORMAL:
            if self.nu is not None or self.xi is not None:
                raise ConstraintError("the normal distribution takes no shape parameters")
            return
        if self.nu is None or not np.isfinite(self.nu) or self.nu <= 2.0:
            raise ConstraintError(f"degrees of freedom must be finite and > 2, got {self.nu}")
        if kind is DistributionKind.STUDENT_T and self.xi is not None:
            raise ConstraintError("the symmetric t takes no skewness parameter")
        if kind is DistributionKind.SKEW_STUDENT_T:
            if self.xi is None or not np.isfinite(self.xi) or self.xi <= 0.0:
                raise ConstraintError(f"skewness must be finite and > 0, got {self.xi}")

    @classmethod
    def normal(cls) -> "DistributionSpec":
        return cls(DistributionKind.NORMAL)

    @classmethod
    def student_t(cls, nu: float) -> "DistributionSpec":
        return cls(DistributionKind.STUDENT_T, nu=nu)

    @classmethod
    def skew_student_t(cls, nu: float, xi: float) -> "DistributionSpec":
        return cls(DistributionKind.SKEW_STUDENT_T, nu=nu, xi=xi)

    @property
    def shape_names(self) -> Tuple[str, ...]:
        return {
            DistributionKind.NORMAL: (),
            DistributionKind.STUDENT_T: ("nu",),
            DistributionKind.SKEW_STUDENT_T: ("nu", "xi"),
        }[self.kind]

    @property
    def shape_values(self) -> Tuple[float, ...]:
        return tuple(float(getattr(self, name)) for name in self.shape_names)

    def with_shape(self, *values: float) -> "DistributionSpec":
        """Same family with new shape parameters, in ``shape_names`` order."""
        return DistributionSpec(self.kind, **dict(zip(self.shape_names, values)))

    def to_dict(self) -> Dict[str, object]:
        out: Dict[str, object] = {"kind": self.kind.value}
        out.update(zip(self.shape_names, self.shape_values))
        return out

    @classmethod
    def from_dict(cls, data: Dict[str, object]) -> "DistributionSpec":
        return cls(DistributionKind(data["kind"]), nu=data.get("nu"), xi=data.get("xi"))


def _scalar_or_array(value: np.ndarray, like: ArrayLike) -> ArrayLike:
    return float(value) if np.ndim(like) == 0 else value


def _check_alpha(alpha: ArrayLike) -> np.ndarray:
    a = np.asarray(alpha, dtype=float)
    if not np.all((a > 0.0) & (a < 1.0)):
        raise DomainError(f"probability level must lie in (0, 1), got {alpha}")
    return a


# -- unit-variance Student t (Y = s * T, T ~ t(nu)) --

def _t_scale(nu: float) -> float:
    return np.sqrt((nu - 2.0) / nu)


def _t_pdf(y: np.ndarray, nu: float) -> np.ndarray:
    s = _t_scale(nu)
    return stats.t.pdf(y / s, nu) / s


def _t_logpdf(y: np.ndarray, nu: float) -> np.ndarray:
    return (
        special.gammaln((nu + 1.0) / 2.0)
        - special.gammaln(nu / 2.0)
        - 0.5 * np.log(np.pi * (nu - 2.0))
        - (nu + 1.0) / 2.0 * np.log1p(y * y / (nu - 2.0))
    )


def _t_cdf(y: np.ndarray, nu: float) -> np.ndarray:
    return stats.t.cdf(y / _t_scale(nu), nu)


def _t_ppf(p: np.ndarray, nu: float) -> np.ndarray:
    return _t_scale(nu) * stats.t.ppf(p, nu)


def _t_partial_moment(a: np.ndarray, nu: float) -> np.ndarray:
    """Integral of y * f(y) over (-inf, a]."""
    s = _t_scale(nu)
    u = a / s
    return -s * (nu + u * u) / (nu - 1.0) * stats.t.pdf(u, nu)


def _t_abs_moment(nu: float) -> float:
    log_m = (
        np.log(2.0)
        + 0.5 * np.log(nu - 2.0)
        + special.gammaln((nu + 1.0) / 2.0)
        - 0.5 * np.log(np.pi)
        - np.log(nu - 1.0)
        - special.gammaln(nu / 2.0)
    )
    return float(np.exp(log_m))


# -- skewed t: W has density g * f_Y(w / xi) for w >= 0 and g * f_Y(w * xi) below; X = (W - mu) / sigma --

@dataclass(frozen=True)
class _SkewConstants:
    g: float
    mu: float
    sigma: float
    p0: float


def _skew_constants(nu: float, xi: float) -> _SkewConstants:
    m1 = _t_abs_moment(nu)
    g = 2.0 / (xi + 1.0 / xi)
    mu = m1 * (xi - 1.0 / xi)
    sigma = np.sqrt((1.0 - m1 * m1) * (xi * xi + 1.0 / (xi * xi)) + 2.0 * m1 * m1 - 1.0)
    return _SkewConstants(g=g, mu=mu, sigma=float(sigma), p0=1.0 / (1.0 + xi * xi))


def _skew_w_cdf(c: np.ndarray, nu: float, xi: float, k: _SkewConstants) -> np.ndarray:
    below = k.g / xi * _t_cdf(np.minimum(c, 0.0) * xi, nu)
    above = k.p0 + k.g * xi * (_t_cdf(np.maximum(c, 0.0) / xi, nu) - 0.5)
    return np.where(c <= 0.0, below, above)


def _skew_w_ppf(p: np.ndarray, nu: float, xi: float, k: _SkewConstants) -> np.ndarray:
    lower = _t_ppf(np.clip(p * xi / k.g, 1e-300, 0.5), nu) / xi
    upper_arg = np.clip(0.5 + (p - k.p0) / (k.g * xi), 0.5, 1.0 - 1e-16)
    upper = xi * _t_ppf(upper_arg, nu)
    return np.where(p <= k.p0, lower, upper)


def _skew_w_partial_moment(c: np.ndarray, nu: float, xi: float, k: _SkewConstants) -> np.ndarray:
    pm0 = _t_partial_moment(np.zeros_like(c), nu)
    below = k.g / (xi * xi) * _t_partial_moment(np.minimum(c, 0.0) * xi, nu)
    above = k.g / (xi * xi) * pm0 + k.g * xi * xi * (
        _t_partial_moment(np.maximum(c, 0.0) / xi, nu) - pm0
    )
    return np.where(c <= 0.0, below, above)


def _skew_log_density(z: np.ndarray, nu: float, xi: float) -> np.ndarray:
    k = _skew_constants(nu, xi)
    w = z * k.sigma + k.mu
    arg = np.where(w >= 0.0, w / xi, w * xi)
    return np.log(k.sigma) + np.log(k.g) + _t_logpdf(arg, nu)


# -- public operations --

def log_density(spec: DistributionSpec, z: ArrayLike) -> ArrayLike:
    """Natural log of the standardized density at ``z``."""
    x = np.asarray(z, dtype=float)
    if spec.kind is DistributionKind.NORMAL:
        out = -_LOG_SQRT_2PI - 0.5 * x * x
    elif spec.kind is DistributionKind.STUDENT_T:
        out = _t_logpdf(x, spec.nu)
    else:
        out = _skew_log_density(x, spec.nu, spec.xi)
    return _scalar_or_array(out, z)


def density(spec: DistributionSpec, z: ArrayLike) -> ArrayLike:
    """
    Density of the zero-mean, unit-variance member of the family.

    Args:
        spec (DistributionSpec): Distribution.
        z (float or np.ndarray): Evaluation points.

    Returns:
        float or np.ndarray: Nonnegative density values.
    """
    x = np.asarray(z, dtype=float)
    if spec.kind is DistributionKind.NORMAL:
        out = stats.norm.pdf(x)
    elif spec.kind is DistributionKind.STUDENT_T:
        out = _t_pdf(x, spec.nu)
    else:
        out = np.exp(_skew_log_density(x, spec.nu, spec.xi))
    return _scalar_or_array(out, z)


def cdf(spec: DistributionSpec, z: ArrayLike) -> ArrayLike:
    x = np.asarray(z, dtype=float)
    if spec.kind is DistributionKind.NORMAL:
        out = stats.norm.cdf(x)
    elif spec.kind is DistributionKind.STUDENT_T:
        out = _t_cdf(x, spec.nu)
    else:
        k = _skew_constants(spec.nu, spec.xi)
        out = _skew_w_cdf(x * k.sigma + k.mu, spec.nu, spec.xi, k)
    return _scalar_or_array(out, z)


def quantile(spec: DistributionSpec, alpha: ArrayLike) -> ArrayLike:
    """
    Lower quantile ``q`` with ``cdf(spec, q) = alpha``.

    Raises:
        DomainError: If ``alpha`` is outside (0, 1).
    """
    a = _check_alpha(alpha)
    if spec.kind is DistributionKind.NORMAL:
        out = stats.norm.ppf(a)
    elif spec.kind is DistributionKind.STUDENT_T:
        out = _t_ppf(a, spec.nu)
    else:
        k = _skew_constants(spec.nu, spec.xi)
        out = (_skew_w_ppf(a, spec.nu, spec.xi, k) - k.mu) / k.sigma
    return _scalar_or_array(out, alpha)


def abs_moment(spec: DistributionSpec) -> float:
    """Expected absolute value ``E|z|``."""
    if spec.kind is DistributionKind.NORMAL:
        return float(np.sqrt(2.0 / np.pi))
    if spec.kind is DistributionKind.STUDENT_T:
        return _t_abs_moment(spec.nu)
    k = _skew_constants(spec.nu, spec.xi)
    mu = np.asarray(k.mu)
    below_mean = _skew_w_partial_moment(mu, spec.nu, spec.xi, k) - k.mu * _skew_w_cdf(mu, spec.nu, spec.xi, k)
    return float(-2.0 * below_mean / k.sigma)


def tail_expectation(spec: DistributionSpec, alpha: ArrayLike) -> ArrayLike:
    """
    Lower-tail conditional mean ``E(z | z < q_alpha)``.

    Raises:
        DomainError: If ``alpha`` is outside (0, 1).
    """
    a = _check_alpha(alpha)
    if spec.kind is DistributionKind.NORMAL:
        out = -stats.norm.pdf(stats.norm.ppf(a)) / a
    elif spec.kind is DistributionKind.STUDENT_T:
        out = _t_partial_moment(_t_ppf(a, spec.nu), spec.nu) / a
    else:
        k = _skew_constants(spec.nu, spec.xi)
        c = _skew_w_ppf(a, spec.nu, spec.xi, k)
        out = (_skew_w_partial_moment(c, spec.nu, spec.xi, k) / a - k.mu) / k.sigma
    return _scalar_or_array(out, alpha)


def sample(spec: DistributionSpec, seed: Union[int, np.random.Generator], n: int) -> np.ndarray:
    """
    Draw ``n`` standardized innovations.

    Args:
        spec (DistributionSpec): Distribution.
        seed (int or np.random.Generator): Seed, or a generator to draw from.
        n (int): Number of draws, >= 1.

    Returns:
        np.ndarray: Draws; identical for identical seeds.
    """
    if n < 1:
        raise DomainError(f"sample size must be positive, got {n}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    if spec.kind is DistributionKind.NORMAL:
        return rng.standard_normal(n)
    y = _t_scale(spec.nu) * rng.standard_t(spec.nu, size=n)
    if spec.kind is DistributionKind.STUDENT_T:
        return y
    k = _skew_constants(spec.nu, spec.xi)
    negative = rng.random(n) < k.p0
    w = np.where(negative, -np.abs(y) / spec.xi, np.abs(y) * spec.xi)
    return (w - k.mu) / k.sigma
