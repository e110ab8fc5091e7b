"""
Standard-normal primitives: density, CDF, quantile and the two-sided
Gaussian tail-bound sandwich.

All functions accept Python scalars or numpy arrays. Scalars in give
floats out. Invalid input raises DomainError instead of returning NaN.
"""

import math
from typing import Tuple, Union

import numpy as np
from scipy import special

from .errors import DomainError

ArrayLike = Union[float, np.ndarray]

_SQRT2 = math.sqrt(2.0)
_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)
_QUANTILE_SANDWICH_C = 2.0 * math.log(4.0) + math.log(math.pi)
_NEWTON_STEPS = 2


def _as_finite(z: ArrayLike, name: str) -> np.ndarray:
    arr = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite, got {z!r}")
    return arr


def _unwrap(arr: np.ndarray, like: ArrayLike) -> ArrayLike:
    return float(arr) if np.ndim(like) == 0 else arr


def std_normal_pdf(z: ArrayLike) -> ArrayLike:
    """Density phi(z)."""
    arr = _as_finite(z, "z")
    return _unwrap(np.exp(-0.5 * arr * arr) / math.sqrt(2.0 * math.pi), z)


def std_normal_cdf(z: ArrayLike) -> ArrayLike:
    """Phi(z).

    The lower half goes through erfc so that far-tail values keep their
    relative accuracy; the upper half is 1 minus the mirrored tail.
    """
    arr = _as_finite(z, "z")
    tail = 0.5 * special.erfc(np.abs(arr) / _SQRT2)
    out = np.where(arr < 0.0, tail, 1.0 - tail)
    return _unwrap(out, z)


def std_normal_sf(z: ArrayLike) -> ArrayLike:
    """Upper tail 1 - Phi(z), accurate for large positive z."""
    arr = _as_finite(z, "z")
    return _unwrap(std_normal_cdf(-arr), z)


def log_std_normal_cdf(z: ArrayLike) -> ArrayLike:
    """log Phi(z), finite down to z around -1e150."""
    arr = _as_finite(z, "z")
    return _unwrap(special.log_ndtr(arr), z)


def log_std_normal_sf(z: ArrayLike) -> ArrayLike:
    """log(1 - Phi(z))."""
    arr = _as_finite(z, "z")
    return _unwrap(special.log_ndtr(-arr), z)


def _lower_quantile(p: np.ndarray) -> np.ndarray:
    # p <= 0.5 here; Newton on Phi(z) - p where Phi is evaluated by erfc.
    z = special.ndtri(p)
    for _ in range(_NEWTON_STEPS):
        z = z - (std_normal_cdf(z) - p) / std_normal_pdf(z)
    return z


def std_normal_quantile(p: ArrayLike) -> ArrayLike:
    """Phi^{-1}(p) for 0 < p < 1.

    A rational initial approximation (cephes ndtri) is refined by two Newton
    steps. The upper half is solved through the complement 1 - p, which is
    exact in floating point for p >= 0.5.
    """
    arr = np.asarray(p, dtype=float)
    if not np.all((arr > 0.0) & (arr < 1.0)):
        raise DomainError(f"quantile argument must lie in (0, 1), got {p!r}")
    upper = arr > 0.5
    q = np.where(upper, 1.0 - arr, arr)
    z = _lower_quantile(q)
    out = np.where(upper, -z, z)
    return _unwrap(out, p)


def upper_quantile(q: ArrayLike) -> ArrayLike:
    """Phi^{-1}(1 - q) computed as -Phi^{-1}(q), without forming 1 - q."""
    return _unwrap(-np.asarray(std_normal_quantile(q)), q)


def tail_sandwich(y: float) -> Tuple[float, float]:
    """Two-sided bound on P(N > y): lower < 1 - Phi(y) <= upper, for y > 0."""
    if not (math.isfinite(y) and y > 0.0):
        raise DomainError(f"tail_sandwich requires y > 0, got {y!r}")
    kernel = _SQRT_2_OVER_PI * math.exp(-0.5 * y * y)
    lower = kernel / (y + math.sqrt(y * y + 4.0))
    upper = kernel / (y + math.sqrt(y * y + 8.0 / math.pi))
    return lower, upper


def quantile_sandwich(t: float) -> Tuple[float, float]:
    """Bracket Phi^{-1}(1 - 1/t) for t > 2."""
    if not (math.isfinite(t) and t > 2.0):
        raise DomainError(f"quantile_sandwich requires t > 2, got {t!r}")
    core = 2.0 * math.log(t) - math.log(math.log(t))
    lower = math.sqrt(max(core - _QUANTILE_SANDWICH_C, 0.0))
    return lower, math.sqrt(core)


def tail_constant(n: float, level: float) -> float:
    """C_{n,level} = 2 * sqrt(pi * log(n / level))."""
    if not (n > 0 and 0 < level < n):
        raise DomainError(f"tail constant needs 0 < level < n, got n={n!r}, level={level!r}")
    return 2.0 * math.sqrt(math.pi * math.log(n / level))


def asymptotic_cutoff(numerator: float, level: float, c_index: float) -> float:
    """sqrt(2 log(numerator / (level * C_{c_index,level}))).

    This is the closed-form stand-in for an upper Gaussian quantile that the
    asymptotic constructions use in place of exact Phi^{-1} evaluation.
    """
    ratio = numerator / (level * tail_constant(c_index, level))
    if ratio < 1.0:
        raise DomainError(
            f"asymptotic cutoff undefined: {numerator}/({level}*C_{{{c_index},{level}}}) = {ratio:.6g} < 1"
        )
    return math.sqrt(2.0 * math.log(ratio))


__all__ = [
    "std_normal_pdf",
    "std_normal_cdf",
    "std_normal_sf",
    "log_std_normal_cdf",
    "log_std_normal_sf",
    "std_normal_quantile",
    "upper_quantile",
    "tail_sandwich",
    "quantile_sandwich",
    "tail_constant",
    "asymptotic_cutoff",
]
