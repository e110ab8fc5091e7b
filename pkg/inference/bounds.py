"""
Phase-transition thresholds, minimax lower-bound evaluators and the exact
analytic coverage / distance oracles used to validate Monte Carlo output.

Every threshold is expressed in sigma units (a comparison against a/sigma).
"""

import logging
import math
from enum import Enum
from typing import Callable, Dict, List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy import optimize, stats

from config.settings import BoundDefaults
from .errors import DomainError, PreconditionError, ThresholdError
from .gaussian import (
    asymptotic_cutoff,
    log_std_normal_cdf,
    std_normal_cdf,
    std_normal_pdf,
    std_normal_quantile,
    std_normal_sf,
    upper_quantile,
)
from .model import MeanVector, ProblemParams

logger = logging.getLogger(__name__)

# Phi is exactly 0 or 1 in double precision beyond this many sigmas.
_Z_CAP = 60.0


class Region(str, Enum):
    """Signal-to-noise regime of a construction family."""
    INFEASIBLE = "infeasible"
    LOW_SNR = "low_snr"
    HIGH_SNR = "high_snr"


# ===== Thresholds =====

def kappa_star(params: ProblemParams) -> float:
    """Selector feasibility cutoff Phi^{-1}(delta) - Phi^{-1}(alpha'/s)."""
    return std_normal_quantile(params.delta) - std_normal_quantile(params.alpha_prime / params.s)


def kappa_star_lower(params: ProblemParams, c_s: float) -> float:
    """Impossibility cutoff Phi^{-1}(delta) - Phi^{-1}(c_s/s)."""
    if not 0 < c_s < params.s:
        raise ThresholdError("kappa_star_lower", f"c_s={c_s} must lie in (0, s={params.s})")
    return std_normal_quantile(params.delta) - std_normal_quantile(c_s / params.s)


def kappa_hat(params: ProblemParams) -> float:
    """Low/high split -Phi^{-1}((alpha-alpha')/d) - Phi^{-1}(alpha'/s)."""
    return upper_quantile((params.alpha - params.alpha_prime) / params.d) - std_normal_quantile(
        params.alpha_prime / params.s
    )


def _selector_tail(params: ProblemParams, two_sided: bool) -> float:
    if two_sided:
        return asymptotic_cutoff(2 * params.s, params.alpha_prime, 2 * params.s)
    return asymptotic_cutoff(params.s, params.alpha_prime, params.s)


def _require_null_coordinates(params: ProblemParams, name: str) -> int:
    n_null = params.d - params.s
    if n_null < 1:
        raise ThresholdError(name, f"requires d > s (got d={params.d}, s={params.s})")
    return n_null


def kappa_2star(params: ProblemParams) -> float:
    """Asymptotic selector cutoff."""
    try:
        return std_normal_quantile(params.delta) + _selector_tail(params, two_sided=False)
    except DomainError as exc:
        raise ThresholdError("kappa_2star", str(exc)) from exc


def one_sided_bar_high_cut(params: ProblemParams) -> float:
    """Selection cut of the high branch of the asymptotic one-sided set."""
    n_null = _require_null_coordinates(params, "kappa_bar")
    level = params.alpha - params.alpha_prime
    try:
        return asymptotic_cutoff(2 * n_null, level, n_null)
    except DomainError as exc:
        raise ThresholdError("kappa_bar", str(exc)) from exc


def kappa_bar(params: ProblemParams) -> float:
    """Asymptotic low/high split for the one-sided asymptotic set."""
    try:
        return one_sided_bar_high_cut(params) + _selector_tail(params, two_sided=False)
    except DomainError as exc:
        raise ThresholdError("kappa_bar", str(exc)) from exc


def phi_star(params: ProblemParams) -> float:
    """Two-sided selector feasibility cutoff."""
    return std_normal_quantile((1 + params.delta) / 2) - std_normal_quantile(params.alpha_prime / (2 * params.s))


def phi_star_lower(params: ProblemParams, c_s: float) -> float:
    """Two-sided impossibility cutoff."""
    if not 0 < c_s < params.s:
        raise ThresholdError("phi_star_lower", f"c_s={c_s} must lie in (0, s={params.s})")
    return std_normal_quantile((1 + params.delta) / 2) - std_normal_quantile(c_s / params.s)


def phi_hat(params: ProblemParams) -> float:
    """Two-sided low/high split."""
    return upper_quantile((params.alpha - params.alpha_prime) / (2 * params.d)) - std_normal_quantile(
        params.alpha_prime / (2 * params.s)
    )


def phi_2star(params: ProblemParams) -> float:
    """Asymptotic two-sided selector cutoff."""
    try:
        return std_normal_quantile((1 + params.delta) / 2) + _selector_tail(params, two_sided=True)
    except DomainError as exc:
        raise ThresholdError("phi_2star", str(exc)) from exc


def two_sided_bar_high_cut(params: ProblemParams) -> float:
    n_null = _require_null_coordinates(params, "phi_bar")
    level = params.alpha - params.alpha_prime
    try:
        return asymptotic_cutoff(4 * n_null, level, 2 * n_null)
    except DomainError as exc:
        raise ThresholdError("phi_bar", str(exc)) from exc


def phi_bar(params: ProblemParams) -> float:
    """Asymptotic two-sided low/high split."""
    try:
        return two_sided_bar_high_cut(params) + _selector_tail(params, two_sided=True)
    except DomainError as exc:
        raise ThresholdError("phi_bar", str(exc)) from exc


def _loglog(x: float) -> float:
    return math.log(math.log(x))


def _optimality_cutoffs(params: ProblemParams, c_prime: float) -> Optional[Dict[str, float]]:
    """kappa_tilde, the adaptive scenario cutoff and phi_tilde; None when loglog is undefined."""
    s, n_null = params.s, params.d - params.s
    if s < 2 or n_null < 2:
        logger.debug("optimality cutoffs skipped: s=%d, d-s=%d", s, n_null)
        return None
    null_part = 2 * math.log(n_null) - _loglog(n_null) + c_prime
    signal_part = 2 * math.log(s) - _loglog(s) + c_prime
    if null_part < 0 or signal_part < 0:
        return None
    xi = math.sqrt(max(_loglog(n_null) - _loglog(s), 0.0))
    xi_bar = math.sqrt(max(2 * _loglog(n_null) - _loglog(s), 0.0))
    base = math.sqrt(null_part)
    return {
        "kappa_tilde": base + max(math.sqrt(signal_part), xi),
        "kappa_adaptive": base + max(math.sqrt(signal_part), xi_bar),
        "phi_tilde": base + math.sqrt(signal_part),
        "xi_d": xi,
        "xi_bar_d": xi_bar,
    }


# ===== Regime classification =====

def classify_one_sided_hat(params: ProblemParams) -> Region:
    snr, k_star = params.snr, kappa_star(params)
    if snr < k_star:
        return Region.INFEASIBLE
    return Region.HIGH_SNR if snr >= max(k_star, kappa_hat(params)) else Region.LOW_SNR


def classify_one_sided_bar(params: ProblemParams) -> Region:
    snr = params.snr
    if snr < kappa_2star(params):
        return Region.INFEASIBLE
    return Region.HIGH_SNR if snr >= kappa_bar(params) else Region.LOW_SNR


def classify_two_sided_hat(params: ProblemParams) -> Region:
    snr, p_star = params.snr, phi_star(params)
    if snr < p_star:
        return Region.INFEASIBLE
    return Region.HIGH_SNR if snr >= max(p_star, phi_hat(params)) else Region.LOW_SNR


def classify_two_sided_bar(params: ProblemParams) -> Region:
    snr = params.snr
    if snr < phi_2star(params):
        return Region.INFEASIBLE
    return Region.HIGH_SNR if snr >= phi_bar(params) else Region.LOW_SNR


class ThresholdReport(BaseModel):
    """All SNR cutoffs (sigma units) for one configuration plus the regime of a/sigma."""

    model_config = ConfigDict(frozen=True)

    snr: float
    c_s: float
    c_prime: float

    kappa_star_lower: float
    kappa_star: float
    kappa_hat: float
    kappa_2star: float
    kappa_bar: float
    kappa_tilde: Optional[float] = None
    kappa_adaptive: Optional[float] = None
    xi_d: Optional[float] = None
    xi_bar_d: Optional[float] = None

    phi_star_lower: float
    phi_star: float
    phi_hat: float
    phi_2star: float
    phi_bar: float
    phi_tilde: Optional[float] = None

    one_sided_hat_region: Region
    one_sided_bar_region: Region
    two_sided_hat_region: Region
    two_sided_bar_region: Region
    one_sided_provably_infeasible: bool
    two_sided_provably_infeasible: bool

    def cutoffs(self) -> Dict[str, Optional[float]]:
        names = [
            "kappa_star_lower", "kappa_star", "kappa_hat", "kappa_2star", "kappa_bar",
            "kappa_tilde", "kappa_adaptive", "xi_d", "xi_bar_d",
            "phi_star_lower", "phi_star", "phi_hat", "phi_2star", "phi_bar", "phi_tilde",
        ]
        return {name: getattr(self, name) for name in names}


def default_c_s(s: int) -> float:
    """log(s + 1): diverges while c_s / s vanishes."""
    return math.log(s + 1)


def thresholds(
    params: ProblemParams,
    c_s: Optional[float] = None,
    c_prime: float = BoundDefaults.C_PRIME,
) -> ThresholdReport:
    """Evaluate every cutoff by exact quantile evaluation and classify a/sigma."""
    c_s = default_c_s(params.s) if c_s is None else c_s
    lower_k = kappa_star_lower(params, c_s)
    lower_p = phi_star_lower(params, c_s)
    optimality = _optimality_cutoffs(params, c_prime) or {}
    return ThresholdReport(
        snr=params.snr,
        c_s=c_s,
        c_prime=c_prime,
        kappa_star_lower=lower_k,
        kappa_star=kappa_star(params),
        kappa_hat=kappa_hat(params),
        kappa_2star=kappa_2star(params),
        kappa_bar=kappa_bar(params),
        phi_star_lower=lower_p,
        phi_star=phi_star(params),
        phi_hat=phi_hat(params),
        phi_2star=phi_2star(params),
        phi_bar=phi_bar(params),
        one_sided_hat_region=classify_one_sided_hat(params),
        one_sided_bar_region=classify_one_sided_bar(params),
        two_sided_hat_region=classify_two_sided_hat(params),
        two_sided_bar_region=classify_two_sided_bar(params),
        one_sided_provably_infeasible=params.snr <= lower_k,
        two_sided_provably_infeasible=params.snr <= lower_p,
        **optimality,
    )


# ===== Lower bounds =====

class BoundValue(BaseModel):
    """An evaluated lower bound with the inputs it was evaluated at."""

    model_config = ConfigDict(frozen=True)

    name: str
    value: float
    inputs: Dict[str, float] = Field(default_factory=dict)

    def to_row(self) -> Dict[str, str]:
        keyvals = " ".join(f"{k}={v:.9g}" for k, v in self.inputs.items())
        return {"name": self.name, "value": f"{self.value:.9g}", "inputs": keyvals}


def _escape_bound(delta_: float, s: int) -> float:
    # 1 - (1 + Delta)^{-s} without cancellation
    return float(-math.expm1(-s * math.log1p(delta_)))


def lb_support_escape_one_sided(params: ProblemParams) -> BoundValue:
    """Minimax lower bound on P(supp(theta) not in S) over F(delta), one-sided space."""
    delta_ = std_normal_cdf(std_normal_quantile(params.delta) - params.snr)
    return BoundValue(
        name="support_escape",
        value=_escape_bound(delta_, params.s),
        inputs={"s": params.s, "delta": params.delta, "snr": params.snr, "Delta": delta_},
    )


def two_sided_escape_delta(delta: float, snr: float) -> float:
    """Phi(q + snr) - Phi(-q + snr) with q = Phi^{-1}((1+delta)/2), via tails."""
    if delta <= 0.0:
        return 0.0
    q = std_normal_quantile((1 + delta) / 2)
    return float(std_normal_cdf(q - snr) - std_normal_cdf(-q - snr))


def lb_support_escape_two_sided(params: ProblemParams) -> BoundValue:
    """Two-sided analogue with Delta_TS."""
    delta_ts = two_sided_escape_delta(params.delta, params.snr)
    return BoundValue(
        name="support_escape_two_sided",
        value=_escape_bound(delta_ts, params.s),
        inputs={"s": params.s, "delta": params.delta, "snr": params.snr, "Delta_TS": delta_ts},
    )


def _check_dim(dim: int, A) -> None:
    if np.any(np.asarray(A) >= dim) or np.any(np.asarray(A) < 1):
        raise DomainError(f"need 1 <= A < dim, got A={A!r}, dim={dim}")


def _remainder(rho: np.ndarray, sigma: float) -> np.ndarray:
    k2 = (sigma / rho) ** 2
    root = np.sqrt(1.0 + 4.0 * k2)
    # (root - 1) / (root + 1) == 4 k^2 / (root + 1)^2
    ratio = 4.0 * k2 / (root + 1.0) ** 2
    return sigma / math.sqrt(2.0 * math.pi) * np.exp(-0.5 * (rho / sigma) ** 2) * ratio


def g_one_sided(dim: int, A, rho, sigma: float) -> np.ndarray:
    """g(d, A, rho), vectorized over broadcastable A and rho."""
    A = np.asarray(A, dtype=float)
    rho = np.asarray(rho, dtype=float)
    log_odds = np.log(dim - A) - np.log(A)
    shift = -rho / (2.0 * sigma)
    spread = (sigma / rho) * log_odds
    first = np.exp(log_odds + log_std_normal_cdf(np.clip(shift - spread, -1e150, _Z_CAP)))
    second = std_normal_cdf(np.clip(shift + spread, -_Z_CAP, _Z_CAP))
    return first + second


def _ratio(A: np.ndarray, excess: np.ndarray) -> np.ndarray:
    pos = A * np.maximum(excess, 0.0)
    return pos / (1.0 + pos)


def G_one_sided(dim: int, A, rho, m: float, sigma: float) -> np.ndarray:
    """Vectorized G(d, A, rho, m)."""
    _check_dim(dim, A)
    rho = np.asarray(rho, dtype=float)
    if np.any(rho <= 0):
        raise DomainError("rho must be positive")
    A_arr = np.asarray(A, dtype=float)
    excess = g_one_sided(dim, A_arr, rho, sigma) - (m + _remainder(rho, sigma)) / rho
    return _ratio(A_arr, excess)


def lb_noncoverage_G(dim: int, A: int, rho: float, m: float, sigma: float) -> BoundValue:
    """Non-coverage lower bound G(d, A, rho, m) for one-sided sets with R <= m."""
    value = float(G_one_sided(dim, A, rho, m, sigma))
    return BoundValue(name="noncoverage_G", value=value, inputs={"dim": dim, "A": A, "rho": rho, "m": m, "sigma": sigma})


def cosh_distance(dim: int, A, rho, sigma: float) -> np.ndarray:
    """D = (sigma/rho) * arccosh(((d-A)/A) exp(rho^2 / 2 sigma^2)), overflow-safe."""
    A = np.asarray(A, dtype=float)
    rho = np.asarray(rho, dtype=float)
    log_y = np.log(dim - A) - np.log(A) + 0.5 * (rho / sigma) ** 2
    if np.any(log_y < 0):
        raise DomainError(
            f"arccosh argument below 1 for A={A!r}, dim={dim}, rho={rho!r}: (d-A)/A * exp(rho^2/2sigma^2) < 1"
        )
    with np.errstate(over="ignore", invalid="ignore"):
        em1 = np.expm1(np.minimum(log_y, 20.0))
        near = np.log1p(em1 + np.sqrt(em1 * (em1 + 2.0)))
        far = log_y + np.log1p(np.sqrt(-np.expm1(-2.0 * log_y)))
    acosh = np.where(log_y > 20.0, far, near)
    return (sigma / rho) * acosh


def g_two_sided(dim: int, A, rho, sigma: float) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    rho = np.asarray(rho, dtype=float)
    D = cosh_distance(dim, A, rho, sigma)
    log_weight = math.log(2.0) + np.log(dim - A) - np.log(A)
    first = np.exp(log_weight + log_std_normal_cdf(np.clip(-D, -1e150, _Z_CAP)))
    snr = rho / sigma
    # Phi(snr + D) - Phi(snr - D) written as a difference of lower tails
    second = std_normal_cdf(np.clip(D - snr, -_Z_CAP, _Z_CAP)) - std_normal_cdf(np.clip(-D - snr, -_Z_CAP, _Z_CAP))
    return first + second


def G_two_sided(dim: int, A, rho, m: float, sigma: float) -> np.ndarray:
    """Vectorized G_TS(d, A, rho, m)."""
    _check_dim(dim, A)
    rho = np.asarray(rho, dtype=float)
    if np.any(rho <= 0):
        raise DomainError("rho must be positive")
    A_arr = np.asarray(A, dtype=float)
    excess = g_two_sided(dim, A_arr, rho, sigma) - m / rho
    return _ratio(A_arr, excess)


def lb_noncoverage_G_two_sided(dim: int, A: int, rho: float, m: float, sigma: float) -> BoundValue:
    """Non-coverage lower bound G_TS(d, A, rho, m) for two-sided sets with length <= m."""
    value = float(G_two_sided(dim, A, rho, m, sigma))
    return BoundValue(name="noncoverage_G_two_sided", value=value, inputs={"dim": dim, "A": A, "rho": rho, "m": m, "sigma": sigma})


def lb_length_floor(dim: int, A: int, W: float, sigma: float, s: Optional[int] = None) -> BoundValue:
    """Floor on m below which non-coverage tends to one.

    Pass (d, A_d, W_d) for the d-indexed case or (s, B_s, V_s) for the s-indexed one;
    `s` additionally enforces A <= s.
    """
    if not 2 * W <= A:
        raise PreconditionError(f"need 2W <= A, got W={W}, A={A}")
    if s is not None and A > s:
        raise PreconditionError(f"need A <= s, got A={A}, s={s}")
    if not 2 * A <= dim:
        raise PreconditionError(f"need dim >= 2A for log(dim/A - 1) >= 0, got dim={dim}, A={A}")
    head = sigma * (0.5 - W / A) * math.sqrt(2.0 * math.log(dim / A - 1.0))
    tail = math.sqrt(2.0) * sigma / (4.0 * math.sqrt(math.pi)) * (1.0 - A / (dim - A))
    return BoundValue(name="length_floor", value=head + tail, inputs={"dim": dim, "A": A, "W": W, "sigma": sigma})


# ===== Maximized non-coverage bound =====

class MinimaxBound(BaseModel):
    """max(sup G over (A, rho), sup G over (B, rho), support-escape term)."""

    model_config = ConfigDict(frozen=True)

    value: float
    m: float
    two_sided: bool
    escape: BoundValue
    dim_term: Optional[BoundValue] = None
    sparsity_term: Optional[BoundValue] = None


def _grid_sup(
    G: Callable[..., np.ndarray],
    dim: int,
    sizes: np.ndarray,
    rho_lo: float,
    rho_hi: float,
    m: float,
    sigma: float,
    name: str,
) -> Optional[BoundValue]:
    if sizes.size == 0:
        return None
    rho_hi = max(rho_hi, rho_lo)
    rhos = np.geomspace(rho_lo, rho_hi, BoundDefaults.RHO_GRID_POINTS) if rho_hi > rho_lo else np.array([rho_lo])
    values = G(dim, sizes[:, None], rhos[None, :], m, sigma)
    # first maximum in row-major order: smaller size first, then smaller rho
    i, k = np.unravel_index(int(np.argmax(values)), values.shape)
    best_size, best_rho, best = int(sizes[i]), float(rhos[k]), float(values[i, k])

    if 0 < k < rhos.size - 1 and best > 0:
        objective = lambda r: -float(G(dim, best_size, r, m, sigma))  # noqa: E731
        try:
            res = optimize.minimize_scalar(
                objective,
                bracket=(rhos[k - 1], rhos[k], rhos[k + 1]),
                method="golden",
                tol=BoundDefaults.GOLDEN_TOL,
            )
            if rhos[k - 1] <= res.x <= rhos[k + 1] and -res.fun > best:
                best_rho, best = float(res.x), float(-res.fun)
        except ValueError:
            logger.debug("golden refinement skipped for %s: flat bracket", name)
    return BoundValue(name=name, value=best, inputs={"dim": dim, "size": best_size, "rho": best_rho, "m": m})


def minimax_noncoverage(params: ProblemParams, m: float, two_sided: bool = False) -> MinimaxBound:
    """Grid-searched non-coverage lower bound for sets whose length criterion is at most m.

    rho runs over a log grid [a, 50 sigma] for the d-indexed term and
    [1e-3 sigma, 50 sigma] for the s-indexed term, with golden-section
    refinement of rho at the best size.
    """
    sigma = params.sigma
    G = G_two_sided if two_sided else G_one_sided
    escape = lb_support_escape_two_sided(params) if two_sided else lb_support_escape_one_sided(params)
    rho_hi = BoundDefaults.RHO_MAX_SIGMAS * sigma

    # for the two-sided term the arccosh argument needs d >= 2A
    dim_cap = params.d // 2 if two_sided else params.d - 1
    s_cap = params.s // 2 if two_sided else params.s - 1
    dim_sizes = np.arange(1, min(params.s, dim_cap) + 1)
    s_sizes = np.arange(1, s_cap + 1)

    dim_term = _grid_sup(G, params.d, dim_sizes, params.a, rho_hi, m, sigma, "sup_G_dim")
    sparsity_term = _grid_sup(
        G, params.s, s_sizes, BoundDefaults.RHO_MIN_SIGMAS * sigma, rho_hi, m, sigma, "sup_G_sparsity"
    )
    candidates = [escape.value] + [t.value for t in (dim_term, sparsity_term) if t is not None]
    return MinimaxBound(
        value=max(candidates),
        m=m,
        two_sided=two_sided,
        escape=escape,
        dim_term=dim_term,
        sparsity_term=sparsity_term,
    )


# ===== Exact coverage oracles =====

ThetaLike = Union[MeanVector, np.ndarray]


def _theta_array(theta: ThetaLike) -> np.ndarray:
    return np.asarray(theta.theta if isinstance(theta, MeanVector) else theta, dtype=float)


def _band(lo, hi) -> np.ndarray:
    """P(lo <= Z <= hi), clipped at 0, evaluated on whichever tail avoids cancellation."""
    lo = np.clip(np.asarray(lo, dtype=float), -_Z_CAP, _Z_CAP)
    hi = np.clip(np.asarray(hi, dtype=float), -_Z_CAP, _Z_CAP)
    right = std_normal_sf(lo) - std_normal_sf(hi)
    left = std_normal_cdf(hi) - std_normal_cdf(lo)
    out = np.where(lo > 0, right, left)
    return np.maximum(out, 0.0)


def one_sided_factors(mu: np.ndarray, t_sel: float, u: float) -> Tuple[np.ndarray, np.ndarray]:
    """Per-coordinate (P(not selected, covered), P(selected, covered)) for L = (X - u sigma)_+."""
    mu = np.asarray(mu, dtype=float)
    null = mu == 0.0
    positive = mu > 0.0
    not_selected = np.where(null, std_normal_cdf(np.clip(t_sel, -_Z_CAP, _Z_CAP)), 0.0)
    # null: selected and L = 0 means t <= Z <= u; signal: Z >= t - mu and Z <= u
    selected = np.where(null, _band(t_sel, u), np.where(positive, _band(t_sel - mu, u), 0.0))
    return not_selected, selected


def two_sided_factors(mu: np.ndarray, t_sel: float, u: float) -> Tuple[np.ndarray, np.ndarray]:
    """Per-coordinate factors for [X - u sigma, X + u sigma] on |X|/sigma >= t_sel."""
    mu = np.asarray(mu, dtype=float)
    null = mu == 0.0
    not_selected = np.where(null, _band(-t_sel, t_sel), 0.0)
    signal = _band(np.maximum(-u, t_sel - mu), u) + _band(-u, np.minimum(u, -t_sel - mu))
    selected = np.where(null, 2.0 * _band(t_sel, u), signal)
    return not_selected, selected


def _log_product(factors: np.ndarray) -> float:
    if np.any(factors <= 0.0):
        return 0.0
    return float(np.exp(np.sum(np.log(factors))))


def exact_coverage_one_sided(theta: ThetaLike, t_sel: float, u: float, sigma: float) -> float:
    """Exact P(theta in M) for a fixed-width one-sided construction (cut t_sel, width u)."""
    a, b = one_sided_factors(_theta_array(theta) / sigma, t_sel, u)
    return _log_product(a + b)


def exact_coverage_two_sided(theta: ThetaLike, t_sel: float, u: float, sigma: float) -> float:
    """Exact P(theta in M) for a fixed-width two-sided construction."""
    a, b = two_sided_factors(_theta_array(theta) / sigma, t_sel, u)
    return _log_product(a + b)


def exact_coverage_known_support(theta: ThetaLike, support: np.ndarray, u: float, sigma: float) -> float:
    """Exact coverage when S is a fixed index set and L_j = (X_j - u sigma)_+ on S."""
    mu = _theta_array(theta) / sigma
    on = np.zeros(mu.size, dtype=bool)
    on[np.asarray(support, dtype=int)] = True
    if np.any(mu[~on] != 0.0):
        return 0.0
    _, b = one_sided_factors(mu[on], -np.inf, u)
    return _log_product(b)


def _binomial_poly(a: float, b: float, n: int) -> np.ndarray:
    """Coefficients of (a + b z)^n."""
    total = a + b
    if total <= 0.0:
        return np.zeros(n + 1)
    log_scale = n * math.log(total)
    pmf = stats.binom.pmf(np.arange(n + 1), n, min(max(b / total, 0.0), 1.0))
    return pmf * math.exp(log_scale)


def exact_coverage_size_dependent(
    theta: ThetaLike,
    t_sel: float,
    width_for_size: Callable[[int], float],
    sigma: float,
    two_sided: bool = False,
) -> float:
    """Exact coverage when the width depends on |S| (adaptive and plug-in sets).

    P(covered) = sum_k [z^k] prod_j (a_j + b_j(u_k) z), grouping equal
    coordinates into binomial blocks.
    """
    mu = _theta_array(theta) / sigma
    d = mu.size
    values, counts = np.unique(mu, return_counts=True)
    factors = two_sided_factors if two_sided else one_sided_factors

    by_width: Dict[float, List[int]] = {}
    for k in range(d + 1):
        by_width.setdefault(float(width_for_size(k)), []).append(k)

    total = 0.0
    for u, sizes in by_width.items():
        a, b = factors(values, t_sel, u)
        poly = np.ones(1)
        for a_g, b_g, n_g in zip(a, b, counts):
            poly = np.convolve(poly, _binomial_poly(float(a_g), float(b_g), int(n_g)))
        total += float(np.sum(poly[sizes]))
    return min(max(total, 0.0), 1.0)


def expected_distance_one_sided(theta_j, t_sel: float, u: float, sigma: float):
    """E(theta_j - L_j) with L_j = (X_j - u sigma)_+ 1{X_j/sigma >= t_sel}.

    With c = max(u, t_sel) - mu: E L_j = sigma * [phi(c) + (mu - u) Phi(-c)].
    """
    theta_arr = np.asarray(theta_j, dtype=float)
    mu = theta_arr / sigma
    c = np.clip(max(u, t_sel) - mu, -_Z_CAP, _Z_CAP)
    expected_lower = sigma * (std_normal_pdf(c) + (mu - u) * std_normal_cdf(-c))
    out = theta_arr - expected_lower
    return float(out) if np.ndim(theta_j) == 0 else out


def expected_selection_size(theta: ThetaLike, t_sel: float, sigma: float, two_sided: bool = False) -> float:
    """E|S| for a threshold selector (>= cut on X/sigma or |X|/sigma)."""
    mu = _theta_array(theta) / sigma
    t = np.clip(t_sel, -_Z_CAP, _Z_CAP)
    if two_sided:
        probs = std_normal_sf(np.clip(t - mu, -_Z_CAP, _Z_CAP)) + std_normal_cdf(np.clip(-t - mu, -_Z_CAP, _Z_CAP))
    else:
        probs = std_normal_sf(np.clip(t - mu, -_Z_CAP, _Z_CAP))
    return float(np.sum(probs))


__all__ = [
    "Region",
    "ThresholdReport",
    "BoundValue",
    "MinimaxBound",
    "kappa_star",
    "kappa_star_lower",
    "kappa_hat",
    "kappa_2star",
    "kappa_bar",
    "one_sided_bar_high_cut",
    "phi_star",
    "phi_star_lower",
    "phi_hat",
    "phi_2star",
    "phi_bar",
    "two_sided_bar_high_cut",
    "classify_one_sided_hat",
    "classify_one_sided_bar",
    "classify_two_sided_hat",
    "classify_two_sided_bar",
    "default_c_s",
    "thresholds",
    "lb_support_escape_one_sided",
    "lb_support_escape_two_sided",
    "two_sided_escape_delta",
    "g_one_sided",
    "G_one_sided",
    "lb_noncoverage_G",
    "cosh_distance",
    "g_two_sided",
    "G_two_sided",
    "lb_noncoverage_G_two_sided",
    "lb_length_floor",
    "minimax_noncoverage",
    "one_sided_factors",
    "two_sided_factors",
    "exact_coverage_one_sided",
    "exact_coverage_two_sided",
    "exact_coverage_known_support",
    "exact_coverage_size_dependent",
    "expected_distance_one_sided",
    "expected_selection_size",
]
