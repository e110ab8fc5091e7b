"""
Monte Carlo harness for coverage, support distance and |S| curves.

Replication r at SNR grid point k always draws from the seed
derive_seed(seed, k, r), so every method and every alpha' value at that
point sees the same noise, and results do not depend on how replications
are split across joblib workers. Per-replication outputs are concatenated
in replication order before any reduction.
"""

import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from config.settings import ExperimentDefaults, settings
from inference.bounds import expected_selection_size
from inference.errors import InfeasibleError, SparseCIError
from inference.intervals import IntervalProcedure, MethodTag, make_procedure
from inference.model import MeanVector, ProblemParams, SignPattern, derive_seed, make_spike_vector

logger = logging.getLogger(__name__)

SUMMARY_COLUMNS = [
    "method", "snr", "alpha_prime",
    "coverage_hat", "coverage_se", "coverage_exact",
    "dist_mean", "dist_se", "card_mean", "card_se", "infeasible",
]
CARDINALITY_COLUMNS = ["method", "snr", "alpha_prime", "card_mean", "card_se", "card_exact", "infeasible"]

DEFAULT_METHODS = (MethodTag.HAT, MethodTag.BAR, MethodTag.ADAPTIVE, MethodTag.BONFERRONI, MethodTag.ORACLE,
                   MethodTag.PLUG_IN)
CARDINALITY_METHODS = (MethodTag.HAT, MethodTag.BAR, MethodTag.PLUG_IN)


def default_snr_grid() -> Tuple[float, ...]:
    grid = np.linspace(ExperimentDefaults.SNR_MIN, ExperimentDefaults.SNR_MAX, ExperimentDefaults.SNR_POINTS)
    return tuple(float(v) for v in grid)


def default_alpha_prime_grid(alpha: float) -> Tuple[float, ...]:
    return tuple(v for v in ExperimentDefaults.ALPHA_PRIME_GRID if v < alpha)


# ===== Experiment specification =====

class ExperimentSpec(BaseModel):
    """What to simulate: configuration, SNR grid, methods, replications and seed."""

    model_config = ConfigDict(frozen=True)

    params: ProblemParams
    snr_grid: Tuple[float, ...] = Field(default_factory=default_snr_grid)
    methods: Tuple[MethodTag, ...] = DEFAULT_METHODS
    reps: int = Field(ExperimentDefaults.REPS, ge=1)
    seed: int = Field(ExperimentDefaults.SEED, ge=0, lt=2**64)
    alpha_prime_grid: Optional[Tuple[float, ...]] = None
    sign_pattern: SignPattern = SignPattern.ALL_POSITIVE
    force: bool = False
    chunk_size: int = Field(100, ge=1)

    @field_validator("snr_grid")
    @classmethod
    def _increasing(cls, v: Tuple[float, ...]) -> Tuple[float, ...]:
        if not v:
            raise ValueError("snr_grid must be nonempty")
        if any(x <= 0 for x in v):
            raise ValueError("SNR values must be positive")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("snr_grid must be strictly increasing")
        return v

    @field_validator("methods")
    @classmethod
    def _nonempty(cls, v: Tuple[MethodTag, ...]) -> Tuple[MethodTag, ...]:
        if not v:
            raise ValueError("methods must be nonempty")
        return tuple(dict.fromkeys(v))

    @model_validator(mode="after")
    def _check_alpha_prime_grid(self) -> "ExperimentSpec":
        if self.alpha_prime_grid is not None:
            if not self.alpha_prime_grid:
                raise ValueError("alpha_prime_grid must be nonempty when given")
            bad = [v for v in self.alpha_prime_grid if not 0 < v < self.params.alpha]
            if bad:
                raise ValueError(f"alpha' values {bad} outside (0, alpha={self.params.alpha})")
        return self

    def alpha_primes(self) -> Tuple[float, ...]:
        return self.alpha_prime_grid or (self.params.alpha_prime,)


# ===== Results =====

class SummaryRow(BaseModel):
    """Aggregates for one (method, snr, alpha') cell; NaN where no number exists."""

    method: MethodTag
    snr: float
    alpha_prime: float
    coverage_hat: float = math.nan
    coverage_se: float = math.nan
    coverage_exact: float = math.nan
    dist_mean: float = math.nan
    dist_se: float = math.nan
    card_mean: float = math.nan
    card_se: float = math.nan
    card_exact: float = math.nan
    infeasible: bool = False
    reason: Optional[str] = None


class SimSummary(BaseModel):
    spec: ExperimentSpec
    rows: List[SummaryRow]
    columns: Tuple[str, ...] = tuple(SUMMARY_COLUMNS)

    def row(self, method: MethodTag, snr: float, alpha_prime: Optional[float] = None) -> SummaryRow:
        for r in self.rows:
            if r.method == method and math.isclose(r.snr, snr) and (
                alpha_prime is None or math.isclose(r.alpha_prime, alpha_prime)
            ):
                return r
        raise KeyError(f"no row for method={method}, snr={snr}, alpha'={alpha_prime}")

    def to_records(self) -> List[Dict[str, object]]:
        out = []
        for r in self.rows:
            rec = r.model_dump()
            rec["method"] = r.method.value
            rec["infeasible"] = int(r.infeasible)
            out.append({c: rec[c] for c in self.columns})
        return out


# ===== Statistics =====

def binomial_se(p_hat: float, reps: int) -> float:
    """sqrt(p(1-p)/reps); exactly 0 at p in {0, 1}."""
    return math.sqrt(max(p_hat * (1.0 - p_hat), 0.0) / reps)


def mean_se(values: np.ndarray) -> Tuple[float, float]:
    n = values.size
    mean = float(values.mean())
    if n < 2:
        return mean, 0.0
    return mean, float(values.std(ddof=1) / math.sqrt(n))


# ===== Grid points =====

class _GridPoint(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    snr_index: int
    snr: float
    alpha_prime: float
    theta: MeanVector
    procedures: Dict[MethodTag, IntervalProcedure]
    infeasible: Dict[MethodTag, bool]
    reasons: Dict[MethodTag, str]


def _build_point(spec: ExperimentSpec, snr_index: int, snr: float, alpha_prime: float,
                 methods: Sequence[MethodTag]) -> _GridPoint:
    params = spec.params.with_snr(snr).with_alpha_prime(alpha_prime)
    theta = make_spike_vector(params, snr, spec.sign_pattern)
    procedures: Dict[MethodTag, IntervalProcedure] = {}
    infeasible: Dict[MethodTag, bool] = {}
    reasons: Dict[MethodTag, str] = {}
    for method in methods:
        try:
            procedures[method] = make_procedure(method, params, support=theta.support)
            infeasible[method] = False
            continue
        except InfeasibleError as exc:
            infeasible[method], reasons[method] = True, str(exc)
            if not spec.force:
                logger.info("%s infeasible at snr=%.3f: %s", method.value, snr, exc)
                continue
        except SparseCIError as exc:
            # undefined thresholds leave this cell empty; the other cells still run
            infeasible[method], reasons[method] = True, str(exc)
            logger.warning("%s undefined at snr=%.3f, alpha'=%g: %s", method.value, snr, alpha_prime, exc)
            continue
        logger.info("forcing %s at snr=%.3f: %s", method.value, snr, reasons[method])
        try:
            procedures[method] = make_procedure(method, params, support=theta.support, force=True)
        except SparseCIError as exc:
            reasons[method] = str(exc)
            logger.warning("%s cannot be forced at snr=%.3f: %s", method.value, snr, exc)
    return _GridPoint(snr_index=snr_index, snr=snr, alpha_prime=alpha_prime, theta=theta,
                      procedures=procedures, infeasible=infeasible, reasons=reasons)


def _simulate_chunk(
    seed: int,
    snr_index: int,
    mu: np.ndarray,
    procedures: Dict[MethodTag, IntervalProcedure],
    start: int,
    stop: int,
) -> Dict[MethodTag, Tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """Replications [start, stop) at one SNR point for every procedure."""
    z = np.empty((stop - start, mu.size))
    for i, rep in enumerate(range(start, stop)):
        rng = np.random.default_rng(derive_seed(seed, snr_index, rep))
        z[i] = mu + rng.standard_normal(mu.size)
    return {method: proc.evaluate_batch(z, mu) for method, proc in procedures.items()}


def _n_jobs(n_jobs: Optional[int]) -> int:
    if n_jobs is not None:
        return n_jobs
    return settings.threads or -1


def _run_points(spec: ExperimentSpec, points: List[_GridPoint], n_jobs: Optional[int]):
    """Per point: method -> concatenated (covered, distance, card) over all reps, in rep order."""
    chunks = [(start, min(start + spec.chunk_size, spec.reps)) for start in range(0, spec.reps, spec.chunk_size)]
    tasks = [(p_idx, start, stop) for p_idx in range(len(points)) for start, stop in chunks]
    jobs = _n_jobs(n_jobs)
    logger.info("simulating %d grid points x %d reps over %d chunk tasks (n_jobs=%s)",
                len(points), spec.reps, len(tasks), jobs)

    results = Parallel(n_jobs=jobs)(
        delayed(_simulate_chunk)(
            spec.seed,
            points[p_idx].snr_index,
            points[p_idx].theta.theta / spec.params.sigma,
            points[p_idx].procedures,
            start,
            stop,
        )
        for p_idx, start, stop in tasks
    )

    per_point: List[Dict[MethodTag, List[Tuple[np.ndarray, np.ndarray, np.ndarray]]]] = [
        {m: [] for m in p.procedures} for p in points
    ]
    # Parallel returns results in task order
    for (p_idx, _, _), chunk in zip(tasks, results):
        for method, triple in chunk.items():
            per_point[p_idx][method].append(triple)
    return [
        {m: tuple(np.concatenate(parts) for parts in zip(*triples)) for m, triples in point.items()}
        for point in per_point
    ]


def _summarize(spec: ExperimentSpec, point: _GridPoint, method: MethodTag, outcome, with_exact: bool) -> SummaryRow:
    base = dict(method=method, snr=point.snr, alpha_prime=point.alpha_prime,
                infeasible=point.infeasible[method], reason=point.reasons.get(method))
    if outcome is None:
        return SummaryRow(**base)
    covered, distance, card = outcome
    p_hat = float(covered.mean())
    dist_mean, dist_se = mean_se(distance * spec.params.sigma)
    card_mean, card_se = mean_se(card.astype(float))
    proc = point.procedures[method]
    return SummaryRow(
        **base,
        coverage_hat=p_hat,
        coverage_se=binomial_se(p_hat, spec.reps),
        coverage_exact=proc.exact_coverage(point.theta) if with_exact else math.nan,
        dist_mean=dist_mean,
        dist_se=dist_se,
        card_mean=card_mean,
        card_se=card_se,
        card_exact=expected_selection_size(point.theta, proc.rule.threshold, spec.params.sigma, proc.rule.two_sided)
        if proc.rule.support is None else float(len(proc.rule.support)),
    )


def _run(spec: ExperimentSpec, methods: Sequence[MethodTag], n_jobs: Optional[int], with_exact: bool) -> List[SummaryRow]:
    points = [
        _build_point(spec, k, snr, ap, methods)
        for k, snr in enumerate(spec.snr_grid)
        for ap in spec.alpha_primes()
    ]
    outcomes = _run_points(spec, points, n_jobs)
    rows = []
    for point, outcome in zip(points, outcomes):
        for method in methods:
            rows.append(_summarize(spec, point, method, outcome.get(method), with_exact))
    return rows


# ===== Public operations =====

def run_experiment(spec: ExperimentSpec, n_jobs: Optional[int] = None) -> SimSummary:
    """Coverage, support distance and |S| for every (method, snr[, alpha']) cell."""
    rows = _run(spec, spec.methods, n_jobs, with_exact=True)
    logger.info("experiment finished: %d rows", len(rows))
    return SimSummary(spec=spec, rows=rows)


def run_sensitivity(spec: ExperimentSpec, n_jobs: Optional[int] = None) -> SimSummary:
    """Sweep alpha' at fixed SNR values (default 3.8 and 9).

    Points below a feasibility cutoff are always forced, so the moderate-SNR
    sweep reports numbers; those rows keep infeasible=True.
    """
    grid = spec.alpha_prime_grid or default_alpha_prime_grid(spec.params.alpha)
    spec = ExperimentSpec(**{**spec.model_dump(), "alpha_prime_grid": grid, "force": True})
    return run_experiment(spec, n_jobs=n_jobs)


def sensitivity_spec(params: ProblemParams, **overrides) -> ExperimentSpec:
    """ExperimentSpec with the default sensitivity SNRs and alpha' grid."""
    fields = dict(
        params=params,
        snr_grid=ExperimentDefaults.SENSITIVITY_SNRS,
        alpha_prime_grid=default_alpha_prime_grid(params.alpha),
        methods=(MethodTag.HAT, MethodTag.BAR),
        force=True,
    )
    fields.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentSpec(**fields)


def cardinality_trace(spec: ExperimentSpec, n_jobs: Optional[int] = None) -> SimSummary:
    """Mean |S| per SNR for the selector-based methods, with the analytic E|S|."""
    methods = tuple(m for m in spec.methods if m in CARDINALITY_METHODS) or CARDINALITY_METHODS
    rows = _run(spec, methods, n_jobs, with_exact=False)
    return SimSummary(spec=spec, rows=rows, columns=tuple(CARDINALITY_COLUMNS))


__all__ = [
    "SUMMARY_COLUMNS",
    "CARDINALITY_COLUMNS",
    "DEFAULT_METHODS",
    "CARDINALITY_METHODS",
    "default_snr_grid",
    "default_alpha_prime_grid",
    "ExperimentSpec",
    "SummaryRow",
    "SimSummary",
    "binomial_se",
    "mean_se",
    "run_experiment",
    "run_sensitivity",
    "sensitivity_spec",
    "cardinality_trace",
]
