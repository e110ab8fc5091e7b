"""
Sparse confidence set constructors.

Each construction is an IntervalProcedure: a SelectionRule plus a width
constant u (in sigma units), fixed per configuration or looked up from |S|.
One-sided sets use L_j = (X_j - u sigma)_+, U_j = +inf on S; two-sided sets
use [X_j - u sigma, X_j + u sigma] with no clamp. Off S every interval is {0}.

Procedures are built once per (params) and then applied to any number of
observations; `evaluate_batch` is the vectorized path used by the harness.
"""

import logging
import math
from enum import Enum
from typing import Dict, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .bounds import (
    Region,
    classify_one_sided_bar,
    classify_one_sided_hat,
    classify_two_sided_bar,
    classify_two_sided_hat,
    exact_coverage_known_support,
    exact_coverage_one_sided,
    exact_coverage_size_dependent,
    exact_coverage_two_sided,
    expected_distance_one_sided,
    kappa_2star,
    kappa_bar,
    kappa_hat,
    kappa_star,
    phi_2star,
    phi_bar,
    phi_hat,
    phi_star,
)
from .errors import ConsistencyError, InfeasibleError, PreconditionError
from .gaussian import asymptotic_cutoff, std_normal_cdf, std_normal_quantile, upper_quantile
from .model import MeanVector, Observation, ProblemParams, SparseConfidenceSet
from .selectors import (
    SelectionRule,
    adaptive_rule,
    dyadic_round_capped,
    full_rule,
    known_support_rule,
    one_sided_bar_rule,
    one_sided_hat_rule,
    plug_in_rule,
    two_sided_bar_rule,
    two_sided_hat_rule,
)

logger = logging.getLogger(__name__)


class MethodTag(str, Enum):
    HAT = "hat"
    BAR = "bar"
    ADAPTIVE = "adaptive"
    BONFERRONI = "bonferroni"
    ORACLE = "oracle"
    PLUG_IN = "plug_in"
    TWO_SIDED_HAT = "two_sided_hat"
    TWO_SIDED_BAR = "two_sided_bar"


class Sizing(str, Enum):
    """How the width constant is obtained."""
    FIXED = "fixed"
    DYADIC = "dyadic"        # u from the dyadic rounding of |S|
    PLUG_IN = "plug_in"      # u = Phi^{-1}(1 - alpha/|S|)


class RegionTag(BaseModel):
    """Regime a construction was built in, with the cutoffs that decided it."""

    model_config = ConfigDict(frozen=True)

    region: Region
    cutoffs_used: Dict[str, float] = Field(default_factory=dict)


HALF_SPARSE_WARNING = "2s <= d not assumed: adaptive coverage guarantee does not apply"
DYADIC_CAP_WARNING = "dyadic rounding of |S| capped at the largest power of two <= d"
FORCED_WARNING = "constructed below the feasibility cutoff (forced)"


class IntervalProcedure(BaseModel):
    """A selection rule plus a width rule."""

    model_config = ConfigDict(frozen=True)

    method: MethodTag
    rule: SelectionRule
    sigma: float = Field(gt=0)
    two_sided: bool = False
    sizing: Sizing = Sizing.FIXED
    width: Optional[float] = None
    alpha: Optional[float] = None
    alpha_prime: Optional[float] = None
    region: Optional[RegionTag] = None
    warnings: Tuple[str, ...] = ()
    notes: Dict[str, float] = Field(default_factory=dict)

    # --- widths ---

    def width_for_size(self, k: int) -> float:
        if self.sizing == Sizing.FIXED:
            return float(self.width)
        if k == 0:
            return math.inf
        if self.sizing == Sizing.PLUG_IN:
            return float(upper_quantile(self.alpha / k))
        return _adaptive_width(self._dyadic(k)[0], self.alpha, self.alpha_prime)

    def _dyadic(self, k: int) -> Tuple[int, bool]:
        return dyadic_round_capped(k, int(self.notes["d"]))

    # --- single observation ---

    def build(self, obs: Observation) -> SparseConfidenceSet:
        selected = self.rule.select(obs)
        k = int(selected.size)
        warnings = list(self.warnings)
        notes = dict(self.notes)

        if self.sizing == Sizing.DYADIC:
            s_hat, capped = self._dyadic(k)
            notes["s_hat"] = s_hat
            if capped:
                logger.warning("adaptive set: |S|=%d rounds past 2^T, capped at %d", k, s_hat)
                warnings.append(DYADIC_CAP_WARNING)
        u = self.width_for_size(k)

        lower = np.zeros(obs.d)
        upper = np.zeros(obs.d)
        x_sel = obs.x[selected]
        if self.two_sided:
            lower[selected] = x_sel - u * obs.sigma
            upper[selected] = x_sel + u * obs.sigma
        else:
            lower[selected] = np.maximum(x_sel - u * obs.sigma, 0.0)
            upper[selected] = np.inf

        return SparseConfidenceSet(
            selected=selected,
            lower=lower,
            upper=upper,
            method=self.method.value,
            selection_threshold=self.rule.threshold if math.isfinite(self.rule.threshold) else None,
            width=u if (k and math.isfinite(u)) else None,
            region=self.region.region.value if self.region else None,
            warnings=tuple(warnings),
            notes=notes,
        )

    # --- vectorized over replications ---

    def evaluate_batch(self, z: np.ndarray, mu: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Coverage indicator, mean (theta_j - L_j)/sigma on supp(theta), and |S| per row.

        `z` holds standardized draws X/sigma with shape (reps, d); `mu` = theta/sigma.
        """
        selected = self.rule.mask(z)
        card = selected.sum(axis=1)
        if self.sizing == Sizing.FIXED:
            u = np.full(z.shape[0], float(self.width))
        else:
            widths = {int(k): self.width_for_size(int(k)) for k in np.unique(card)}
            u = np.array([widths[int(k)] for k in card])
        u = u[:, None]

        if self.two_sided:
            lower = z - u
            upper = z + u
        else:
            with np.errstate(invalid="ignore"):
                lower = np.maximum(z - u, 0.0)
            upper = np.full(z.shape, np.inf)
        lower = np.where(selected, lower, 0.0)
        upper = np.where(selected, upper, 0.0)

        null = mu == 0.0
        inside = (lower <= mu) & (mu <= upper)
        ok = np.where(selected, inside, null)
        covered = ok.all(axis=1)

        support = ~null
        distance = (mu[support] - lower[:, support]).mean(axis=1) if support.any() else np.zeros(z.shape[0])
        return covered, distance, card

    # --- analytic oracles ---

    def exact_coverage(self, theta: MeanVector) -> float:
        if self.rule.support is not None:
            return exact_coverage_known_support(theta, np.array(self.rule.support), self.width, self.sigma)
        if self.sizing != Sizing.FIXED:
            return exact_coverage_size_dependent(
                theta, self.rule.threshold, self.width_for_size, self.sigma, two_sided=self.two_sided
            )
        if self.two_sided:
            return exact_coverage_two_sided(theta, self.rule.threshold, self.width, self.sigma)
        return exact_coverage_one_sided(theta, self.rule.threshold, self.width, self.sigma)

    def expected_support_distance(self, theta: MeanVector) -> Optional[float]:
        """Mean over supp(theta) of E(theta_j - L_j), for fixed-width one-sided threshold sets."""
        if self.two_sided or self.sizing != Sizing.FIXED or self.rule.support is not None:
            return None
        on = theta.theta[theta.support]
        if on.size == 0:
            return 0.0
        return float(np.mean(expected_distance_one_sided(on, self.rule.threshold, self.width, self.sigma)))


# ===== Width constants =====

def _adaptive_width(s_hat: int, alpha: float, alpha_prime: float) -> float:
    return asymptotic_cutoff(4 * s_hat, alpha - alpha_prime, 2 * s_hat)


def _high_snr_argument(params: ProblemParams, two_sided: bool) -> float:
    level = params.alpha - params.alpha_prime
    n_null = params.d - params.s
    if two_sided:
        miss = std_normal_cdf(-(params.snr + std_normal_quantile(params.alpha_prime / (2 * params.s))))
        return (level - 2 * n_null * miss) / (2 * params.s)
    miss = std_normal_cdf(-(params.snr + std_normal_quantile(params.alpha_prime / params.s)))
    return (level - n_null * miss) / params.s


def _hat_width(params: ProblemParams, region: Region, two_sided: bool) -> float:
    level = params.alpha - params.alpha_prime
    if region == Region.HIGH_SNR:
        q = _high_snr_argument(params, two_sided)
        if not 0.0 < q < 1.0:
            raise ConsistencyError(f"high-SNR width argument {q!r} outside (0, 1) at a/sigma={params.snr}")
        return float(upper_quantile(q))
    return float(upper_quantile(level / (2 * params.d if two_sided else params.d)))


def _forced_region(params: ProblemParams, split: float, two_sided: bool) -> Region:
    """Below the feasibility cutoff: high-SNR width only if the split is cleared and well-defined."""
    if params.snr >= split and 0.0 < _high_snr_argument(params, two_sided) < 1.0:
        return Region.HIGH_SNR
    return Region.LOW_SNR


def _declared(params: ProblemParams) -> Dict[str, float]:
    return {"d": params.d, "declared_s": params.s, "declared_a": params.a}


# ===== Procedure factories =====

def one_sided_hat_procedure(params: ProblemParams, force: bool = False) -> IntervalProcedure:
    cut_star, split = kappa_star(params), kappa_hat(params)
    region = classify_one_sided_hat(params)
    warnings: Tuple[str, ...] = ()
    if region == Region.INFEASIBLE:
        if not force:
            raise InfeasibleError("hat", "kappa_star", cut_star, params.snr,
                                  "no valid one-sided sparse confidence set exists below this SNR")
        region, warnings = _forced_region(params, split, two_sided=False), (FORCED_WARNING,)
    return IntervalProcedure(
        method=MethodTag.HAT,
        rule=one_sided_hat_rule(params),
        sigma=params.sigma,
        width=_hat_width(params, region, two_sided=False),
        region=RegionTag(region=region, cutoffs_used={"kappa_star": cut_star, "kappa_hat": split}),
        warnings=warnings,
        notes=_declared(params),
    )


def one_sided_bar_procedure(params: ProblemParams, force: bool = False) -> IntervalProcedure:
    rule = one_sided_bar_rule(params, force=force)
    level = params.alpha - params.alpha_prime
    high = classify_one_sided_bar(params) == Region.HIGH_SNR
    width = asymptotic_cutoff(2 * params.s, level, params.s) if high else asymptotic_cutoff(params.d, level, params.d)
    forced = params.snr < kappa_2star(params)
    return IntervalProcedure(
        method=MethodTag.BAR,
        rule=rule,
        sigma=params.sigma,
        width=width,
        region=RegionTag(
            region=Region.HIGH_SNR if high else Region.LOW_SNR,
            cutoffs_used={"kappa_2star": kappa_2star(params), "kappa_bar": kappa_bar(params)},
        ),
        warnings=(FORCED_WARNING,) if forced else (),
        notes=_declared(params),
    )


def adaptive_procedure(d: int, alpha: float, alpha_prime: float, sigma: float = 1.0,
                       assume_half_sparse: bool = True) -> IntervalProcedure:
    """Fully adaptive set: no s, no a."""
    return IntervalProcedure(
        method=MethodTag.ADAPTIVE,
        rule=adaptive_rule(d, alpha, alpha_prime),
        sigma=sigma,
        sizing=Sizing.DYADIC,
        alpha=alpha,
        alpha_prime=alpha_prime,
        warnings=() if assume_half_sparse else (HALF_SPARSE_WARNING,),
        notes={"d": d},
    )


def two_sided_hat_procedure(params: ProblemParams, force: bool = False) -> IntervalProcedure:
    cut_star, split = phi_star(params), phi_hat(params)
    region = classify_two_sided_hat(params)
    warnings: Tuple[str, ...] = ()
    if region == Region.INFEASIBLE:
        if not force:
            raise InfeasibleError("two_sided_hat", "phi_star", cut_star, params.snr,
                                  "no valid two-sided sparse confidence set exists below this SNR")
        region, warnings = _forced_region(params, split, two_sided=True), (FORCED_WARNING,)
    return IntervalProcedure(
        method=MethodTag.TWO_SIDED_HAT,
        rule=two_sided_hat_rule(params),
        sigma=params.sigma,
        two_sided=True,
        width=_hat_width(params, region, two_sided=True),
        region=RegionTag(region=region, cutoffs_used={"phi_star": cut_star, "phi_hat": split}),
        warnings=warnings,
        notes=_declared(params),
    )


def two_sided_bar_procedure(params: ProblemParams, force: bool = False) -> IntervalProcedure:
    rule = two_sided_bar_rule(params, force=force)
    level = params.alpha - params.alpha_prime
    high = classify_two_sided_bar(params) == Region.HIGH_SNR
    if high:
        width = asymptotic_cutoff(4 * params.s, level, 2 * params.s)
    else:
        width = asymptotic_cutoff(2 * params.d, level, 2 * params.d)
    forced = params.snr < phi_2star(params)
    return IntervalProcedure(
        method=MethodTag.TWO_SIDED_BAR,
        rule=rule,
        sigma=params.sigma,
        two_sided=True,
        width=width,
        region=RegionTag(
            region=Region.HIGH_SNR if high else Region.LOW_SNR,
            cutoffs_used={"phi_2star": phi_2star(params), "phi_bar": phi_bar(params)},
        ),
        warnings=(FORCED_WARNING,) if forced else (),
        notes=_declared(params),
    )


def bonferroni_procedure(d: int, alpha: float, sigma: float = 1.0) -> IntervalProcedure:
    return IntervalProcedure(
        method=MethodTag.BONFERRONI,
        rule=full_rule(),
        sigma=sigma,
        width=float(upper_quantile(alpha / d)),
        notes={"d": d},
    )


def oracle_procedure(d: int, support, alpha: float, sigma: float = 1.0) -> IntervalProcedure:
    rule = known_support_rule(support)
    if rule.support[-1] >= d:
        raise PreconditionError(f"support index {rule.support[-1]} out of range for d={d}")
    return IntervalProcedure(
        method=MethodTag.ORACLE,
        rule=rule,
        sigma=sigma,
        width=float(upper_quantile(alpha / len(rule.support))),
        notes={"d": d, "support_size": len(rule.support)},
    )


def plug_in_procedure(d: int, alpha: float, sigma: float = 1.0) -> IntervalProcedure:
    return IntervalProcedure(
        method=MethodTag.PLUG_IN,
        rule=plug_in_rule(d),
        sigma=sigma,
        sizing=Sizing.PLUG_IN,
        alpha=alpha,
        notes={"d": d},
    )


# ===== Constructors on observations =====

def build_one_sided_hat(obs: Observation, params: ProblemParams, force: bool = False) -> SparseConfidenceSet:
    """S = {X_j/sigma >= cut}, L_j = (X_j - u_hat sigma)_+ with u_hat by SNR region."""
    obs.check_dimension(params)
    return one_sided_hat_procedure(params, force=force).build(obs)


def build_one_sided_bar(obs: Observation, params: ProblemParams, force: bool = False) -> SparseConfidenceSet:
    obs.check_dimension(params)
    return one_sided_bar_procedure(params, force=force).build(obs)


def build_adaptive(obs: Observation, alpha: float, alpha_prime: float,
                   assume_half_sparse: bool = True) -> SparseConfidenceSet:
    return adaptive_procedure(obs.d, alpha, alpha_prime, obs.sigma, assume_half_sparse).build(obs)


def build_two_sided_hat(obs: Observation, params: ProblemParams, force: bool = False) -> SparseConfidenceSet:
    obs.check_dimension(params)
    return two_sided_hat_procedure(params, force=force).build(obs)


def build_two_sided_bar(obs: Observation, params: ProblemParams, force: bool = False) -> SparseConfidenceSet:
    """Intervals [X_j - u sigma, X_j + u sigma]; the second endpoint is the upper one."""
    obs.check_dimension(params)
    return two_sided_bar_procedure(params, force=force).build(obs)


def build_bonferroni_one_sided(obs: Observation, alpha: float) -> SparseConfidenceSet:
    return bonferroni_procedure(obs.d, alpha, obs.sigma).build(obs)


def build_oracle_one_sided(obs: Observation, support, alpha: float) -> SparseConfidenceSet:
    return oracle_procedure(obs.d, support, alpha, obs.sigma).build(obs)


def build_plug_in_oracle(obs: Observation, alpha: float) -> SparseConfidenceSet:
    return plug_in_procedure(obs.d, alpha, obs.sigma).build(obs)


def make_procedure(
    method: MethodTag,
    params: ProblemParams,
    support=None,
    force: bool = False,
    assume_half_sparse: bool = True,
) -> IntervalProcedure:
    """Procedure for a method tag at one configuration."""
    method = MethodTag(method)
    if method == MethodTag.HAT:
        return one_sided_hat_procedure(params, force=force)
    if method == MethodTag.BAR:
        return one_sided_bar_procedure(params, force=force)
    if method == MethodTag.ADAPTIVE:
        return adaptive_procedure(params.d, params.alpha, params.alpha_prime, params.sigma, assume_half_sparse)
    if method == MethodTag.TWO_SIDED_HAT:
        return two_sided_hat_procedure(params, force=force)
    if method == MethodTag.TWO_SIDED_BAR:
        return two_sided_bar_procedure(params, force=force)
    if method == MethodTag.BONFERRONI:
        return bonferroni_procedure(params.d, params.alpha, params.sigma)
    if method == MethodTag.ORACLE:
        if support is None:
            raise PreconditionError("the oracle construction needs the true support")
        return oracle_procedure(params.d, support, params.alpha, params.sigma)
    return plug_in_procedure(params.d, params.alpha, params.sigma)


__all__ = [
    "MethodTag",
    "Sizing",
    "RegionTag",
    "IntervalProcedure",
    "HALF_SPARSE_WARNING",
    "DYADIC_CAP_WARNING",
    "FORCED_WARNING",
    "one_sided_hat_procedure",
    "one_sided_bar_procedure",
    "adaptive_procedure",
    "two_sided_hat_procedure",
    "two_sided_bar_procedure",
    "bonferroni_procedure",
    "oracle_procedure",
    "plug_in_procedure",
    "make_procedure",
    "build_one_sided_hat",
    "build_one_sided_bar",
    "build_adaptive",
    "build_two_sided_hat",
    "build_two_sided_bar",
    "build_bonferroni_one_sided",
    "build_oracle_one_sided",
    "build_plug_in_oracle",
]
