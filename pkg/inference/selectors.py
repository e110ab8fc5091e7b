"""
Support selectors: thresholding rules that estimate the index set S.

A SelectionRule carries its cut (in sigma units) computed once per
configuration, so sweeping replications never repeats quantile work.
Every rule decides coordinate j from X_j alone.
"""

import logging
import math
from enum import Enum
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from .bounds import Region, classify_one_sided_bar, classify_two_sided_bar, kappa_2star, phi_2star
from .bounds import one_sided_bar_high_cut, two_sided_bar_high_cut
from .errors import InvariantViolation, PreconditionError, RegimeError
from .gaussian import asymptotic_cutoff, std_normal_quantile, std_normal_sf
from .model import Observation, ProblemParams

logger = logging.getLogger(__name__)


class SelectorKind(str, Enum):
    ONE_SIDED_HAT = "one_sided_hat"
    ONE_SIDED_BAR_LOW = "one_sided_bar_low"
    ONE_SIDED_BAR_HIGH = "one_sided_bar_high"
    ADAPTIVE_BAR = "adaptive_bar"
    TWO_SIDED_HAT = "two_sided_hat"
    TWO_SIDED_BAR_LOW = "two_sided_bar_low"
    TWO_SIDED_BAR_HIGH = "two_sided_bar_high"
    PLUG_IN_SUPPORT = "plug_in_support"
    FULL = "full"
    KNOWN_SUPPORT = "known_support"


_TWO_SIDED_KINDS = {SelectorKind.TWO_SIDED_HAT, SelectorKind.TWO_SIDED_BAR_LOW, SelectorKind.TWO_SIDED_BAR_HIGH}


class SelectionRule(BaseModel):
    """A cut on X_j/sigma (or |X_j|/sigma), or an explicit index set."""

    model_config = ConfigDict(frozen=True)

    kind: SelectorKind
    threshold: float = -math.inf
    strict: bool = False
    support: Optional[Tuple[int, ...]] = None

    @model_validator(mode="after")
    def _check_kind(self) -> "SelectionRule":
        if self.kind == SelectorKind.FULL:
            if self.threshold != -math.inf:
                raise InvariantViolation("the full selector has threshold -inf")
        elif self.kind == SelectorKind.KNOWN_SUPPORT:
            if self.support is None:
                raise InvariantViolation("a known-support rule needs an explicit index set")
        elif not math.isfinite(self.threshold):
            raise InvariantViolation(f"{self.kind.value} threshold must be finite, got {self.threshold}")
        return self

    @property
    def two_sided(self) -> bool:
        return self.kind in _TWO_SIDED_KINDS

    def mask(self, z: np.ndarray) -> np.ndarray:
        """Boolean selection mask for standardized data z = X/sigma (any leading shape)."""
        z = np.asarray(z, dtype=float)
        if self.kind == SelectorKind.FULL:
            return np.ones(z.shape, dtype=bool)
        if self.kind == SelectorKind.KNOWN_SUPPORT:
            out = np.zeros(z.shape, dtype=bool)
            out[..., list(self.support)] = True
            return out
        stat = np.abs(z) if self.two_sided else z
        return stat > self.threshold if self.strict else stat >= self.threshold

    def select(self, obs: Observation) -> np.ndarray:
        """Sorted selected indices."""
        if self.kind == SelectorKind.KNOWN_SUPPORT and self.support and max(self.support) >= obs.d:
            raise InvariantViolation(f"support index {max(self.support)} out of range for d={obs.d}")
        return np.flatnonzero(self.mask(obs.z))

    def null_selection_probability(self) -> Optional[float]:
        """P(j in S | theta_j = 0); None for a known support."""
        if self.kind == SelectorKind.KNOWN_SUPPORT:
            return None
        if self.kind == SelectorKind.FULL:
            return 1.0
        tail = float(std_normal_sf(self.threshold))
        return 2.0 * tail if self.two_sided else tail


# ===== Rule factories =====

def one_sided_hat_rule(params: ProblemParams) -> SelectionRule:
    """X_j/sigma >= max(Phi^{-1}(alpha'/s) + a/sigma, Phi^{-1}(delta))."""
    cut = max(std_normal_quantile(params.alpha_prime / params.s) + params.snr, std_normal_quantile(params.delta))
    return SelectionRule(kind=SelectorKind.ONE_SIDED_HAT, threshold=cut)


def two_sided_hat_rule(params: ProblemParams) -> SelectionRule:
    """|X_j|/sigma >= (Phi^{-1}(alpha'/2s) + a/sigma)_+ v Phi^{-1}((1+delta)/2)."""
    first = max(std_normal_quantile(params.alpha_prime / (2 * params.s)) + params.snr, 0.0)
    cut = max(first, std_normal_quantile((1 + params.delta) / 2))
    return SelectionRule(kind=SelectorKind.TWO_SIDED_HAT, threshold=cut)


def _bar_region(params: ProblemParams, classify, lowest, variant: str, cutoff_name: str, force: bool) -> Region:
    region = classify(params)
    if region == Region.INFEASIBLE:
        if not force:
            raise RegimeError(variant, cutoff_name, lowest(params), params.snr,
                              f"bar construction undefined below {cutoff_name}")
        logger.warning("%s forced below its cutoff at a/sigma=%.4f; using the low branch", variant, params.snr)
        return Region.LOW_SNR
    return region


def one_sided_bar_rule(params: ProblemParams, force: bool = False) -> SelectionRule:
    """Low branch: cut Phi^{-1}(delta) for kappa** <= a/sigma < kappa_bar; high branch above."""
    region = _bar_region(params, classify_one_sided_bar, kappa_2star, "one_sided_bar", "kappa_2star", force)
    if region == Region.HIGH_SNR:
        return SelectionRule(kind=SelectorKind.ONE_SIDED_BAR_HIGH, threshold=one_sided_bar_high_cut(params))
    return SelectionRule(kind=SelectorKind.ONE_SIDED_BAR_LOW, threshold=std_normal_quantile(params.delta))


def two_sided_bar_rule(params: ProblemParams, force: bool = False) -> SelectionRule:
    region = _bar_region(params, classify_two_sided_bar, phi_2star, "two_sided_bar", "phi_2star", force)
    if region == Region.HIGH_SNR:
        return SelectionRule(kind=SelectorKind.TWO_SIDED_BAR_HIGH, threshold=two_sided_bar_high_cut(params))
    return SelectionRule(kind=SelectorKind.TWO_SIDED_BAR_LOW, threshold=std_normal_quantile((1 + params.delta) / 2))


def _check_levels(alpha: float, alpha_prime: float) -> None:
    if not 0 < alpha_prime < alpha < 1:
        raise PreconditionError(f"need 0 < alpha' < alpha < 1, got alpha={alpha}, alpha'={alpha_prime}")


def adaptive_rule(d: int, alpha: float, alpha_prime: float) -> SelectionRule:
    """Cut depends on (d, alpha, alpha') only."""
    if d < 1:
        raise PreconditionError(f"d must be positive, got {d}")
    _check_levels(alpha, alpha_prime)
    level = alpha - alpha_prime
    return SelectionRule(kind=SelectorKind.ADAPTIVE_BAR, threshold=asymptotic_cutoff(2 * d, level, d))


def plug_in_rule(d: int) -> SelectionRule:
    """X_j/sigma > sqrt(2 log d), strict."""
    if d < 2:
        raise PreconditionError(f"plug-in selection needs d >= 2, got {d}")
    return SelectionRule(kind=SelectorKind.PLUG_IN_SUPPORT, threshold=math.sqrt(2.0 * math.log(d)), strict=True)


def full_rule() -> SelectionRule:
    return SelectionRule(kind=SelectorKind.FULL)


def known_support_rule(support) -> SelectionRule:
    idx = tuple(sorted({int(j) for j in np.asarray(support).ravel()}))
    if not idx:
        raise PreconditionError("known support must be nonempty")
    if idx[0] < 0:
        raise InvariantViolation(f"negative support index {idx[0]}")
    return SelectionRule(kind=SelectorKind.KNOWN_SUPPORT, support=idx)


# ===== Selection on observations =====

def select_one_sided_hat(obs: Observation, params: ProblemParams) -> np.ndarray:
    obs.check_dimension(params)
    return one_sided_hat_rule(params).select(obs)


def select_two_sided_hat(obs: Observation, params: ProblemParams) -> np.ndarray:
    obs.check_dimension(params)
    return two_sided_hat_rule(params).select(obs)


def select_one_sided_bar(obs: Observation, params: ProblemParams, force: bool = False) -> np.ndarray:
    obs.check_dimension(params)
    return one_sided_bar_rule(params, force=force).select(obs)


def select_two_sided_bar(obs: Observation, params: ProblemParams, force: bool = False) -> np.ndarray:
    obs.check_dimension(params)
    return two_sided_bar_rule(params, force=force).select(obs)


def select_adaptive(obs: Observation, alpha: float, alpha_prime: float) -> np.ndarray:
    return adaptive_rule(obs.d, alpha, alpha_prime).select(obs)


def select_plug_in(obs: Observation) -> np.ndarray:
    return plug_in_rule(obs.d).select(obs)


# ===== Dyadic rounding =====

def dyadic_round_capped(set_size: int, d: int) -> Tuple[int, bool]:
    """(s_hat, capped): s_hat = 2^m with 2^(m-1) <= set_size < 2^m, at least 2, at most 2^T <= d."""
    if d < 1:
        raise PreconditionError(f"d must be positive, got {d}")
    if not 0 <= set_size <= d:
        raise PreconditionError(f"set size {set_size} outside [0, {d}]")
    # 2^(m-1) <= n < 2^m  <=>  m = n.bit_length()
    m = max(int(set_size).bit_length(), 1)
    ceiling = max(1 << (int(d).bit_length() - 1), 2)
    s_hat = 1 << m
    if s_hat > ceiling:
        return ceiling, True
    return s_hat, False


def dyadic_round(set_size: int, d: int) -> int:
    """Power-of-two rounding of |S| used by the adaptive construction."""
    s_hat, capped = dyadic_round_capped(set_size, d)
    if capped:
        logger.debug("dyadic rounding of |S|=%d capped at %d (d=%d)", set_size, s_hat, d)
    return s_hat


__all__ = [
    "SelectorKind",
    "SelectionRule",
    "one_sided_hat_rule",
    "two_sided_hat_rule",
    "one_sided_bar_rule",
    "two_sided_bar_rule",
    "adaptive_rule",
    "plug_in_rule",
    "full_rule",
    "known_support_rule",
    "select_one_sided_hat",
    "select_two_sided_hat",
    "select_one_sided_bar",
    "select_two_sided_bar",
    "select_adaptive",
    "select_plug_in",
    "dyadic_round",
    "dyadic_round_capped",
]
