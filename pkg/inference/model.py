"""
Core data types for the Gaussian sequence model X ~ N(theta, sigma^2 I).
Defines problem parameters, mean vectors, observations and the sparse
confidence set representation, using Pydantic for validation.
"""

from enum import Enum
from typing import Dict, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .errors import InvariantViolation


# --- Enums ---
class Side(str, Enum):
    """Parameter space a mean vector is declared to belong to."""
    ONE_SIDED = "one_sided"   # Theta^+(s, a)
    TWO_SIDED = "two_sided"   # Theta(s, a)


class SignPattern(str, Enum):
    """Signs of the s leading spikes."""
    ALL_POSITIVE = "all_positive"
    ALL_NEGATIVE = "all_negative"
    ALTERNATING = "alternating"


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=float, copy=True)
    arr.flags.writeable = False
    return arr


# ===== Problem Parameters =====

class ProblemParams(BaseModel):
    """Full configuration (d, s, a, sigma, alpha, alpha', delta)."""

    model_config = ConfigDict(frozen=True)

    d: int = Field(gt=0, description="Dimension")
    s: int = Field(gt=0, description="Sparsity budget")
    a: float = Field(gt=0, description="Minimum signal magnitude")
    sigma: float = Field(gt=0, description="Known noise standard deviation")
    alpha: float = Field(gt=0, lt=1, description="Non-coverage level")
    alpha_prime: float = Field(gt=0, description="Selector tolerance")
    delta: float = Field(gt=0, lt=1, description="Target true negative rate")

    @model_validator(mode="after")
    def _check_orderings(self) -> "ProblemParams":
        if self.s > self.d:
            raise ValueError(f"sparsity s={self.s} exceeds dimension d={self.d}")
        if not self.alpha_prime < self.alpha:
            raise ValueError(f"alpha_prime={self.alpha_prime} must be below alpha={self.alpha}")
        return self

    @property
    def snr(self) -> float:
        """Minimum signal-to-noise ratio a / sigma."""
        return self.a / self.sigma

    def with_snr(self, snr: float) -> "ProblemParams":
        """Same configuration with a = snr * sigma."""
        return ProblemParams(**{**self.model_dump(), "a": snr * self.sigma})

    def with_alpha_prime(self, alpha_prime: float) -> "ProblemParams":
        return ProblemParams(**{**self.model_dump(), "alpha_prime": alpha_prime})


# ===== Mean Vector =====

class MeanVector(BaseModel):
    """A parameter vector checked for membership in Theta^+(s,a) or Theta(s,a)."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    theta: np.ndarray
    side: Side
    s: int = Field(gt=0)
    a: float = Field(gt=0)

    @field_validator("theta", mode="before")
    @classmethod
    def _coerce_theta(cls, v) -> np.ndarray:
        arr = np.asarray(v, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("theta must be a non-empty 1-D array")
        if not np.all(np.isfinite(arr)):
            raise ValueError("theta must be finite")
        return _readonly(arr)

    @model_validator(mode="after")
    def _check_membership(self) -> "MeanVector":
        nonzero = self.theta[self.theta != 0.0]
        if nonzero.size > self.s:
            raise InvariantViolation(f"{nonzero.size} nonzero entries exceed sparsity s={self.s}")
        magnitudes = nonzero if self.side == Side.ONE_SIDED else np.abs(nonzero)
        if magnitudes.size and magnitudes.min() < self.a:
            space = "Theta^+(s,a)" if self.side == Side.ONE_SIDED else "Theta(s,a)"
            raise InvariantViolation(
                f"nonzero entry {magnitudes.min():.6g} below a={self.a:.6g}; vector is not in {space}"
            )
        return self

    @property
    def d(self) -> int:
        return int(self.theta.size)

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.theta)


# ===== Observation =====

class Observation(BaseModel):
    """One draw X ~ N(theta, sigma^2 I)."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    x: np.ndarray
    sigma: float = Field(gt=0)

    @field_validator("x", mode="before")
    @classmethod
    def _coerce_x(cls, v) -> np.ndarray:
        arr = np.asarray(v, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("x must be a non-empty 1-D array")
        if not np.all(np.isfinite(arr)):
            raise ValueError("x must be finite")
        return _readonly(arr)

    @property
    def d(self) -> int:
        return int(self.x.size)

    @property
    def z(self) -> np.ndarray:
        """Data in sigma units, X / sigma."""
        return self.x / self.sigma

    def check_dimension(self, params: ProblemParams) -> None:
        if self.d != params.d:
            raise InvariantViolation(f"observation has {self.d} coordinates, params declare d={params.d}")


# ===== Sparse Confidence Set =====

class SparseConfidenceSet(BaseModel):
    """Selected index set plus per-coordinate intervals [L_j, U_j].

    Coordinates outside `selected` carry the degenerate interval {0}.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    selected: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    method: str = "custom"
    selection_threshold: Optional[float] = None
    width: Optional[float] = None
    region: Optional[str] = None
    warnings: Tuple[str, ...] = ()
    notes: Dict[str, float] = Field(default_factory=dict)

    @field_validator("selected", mode="before")
    @classmethod
    def _coerce_selected(cls, v) -> np.ndarray:
        idx = np.unique(np.asarray(v, dtype=np.int64))
        idx.flags.writeable = False
        return idx

    @field_validator("lower", "upper", mode="before")
    @classmethod
    def _coerce_bounds(cls, v) -> np.ndarray:
        arr = np.asarray(v, dtype=float)
        if arr.ndim != 1:
            raise ValueError("interval bounds must be 1-D")
        return _readonly(arr)

    @model_validator(mode="after")
    def _check_intervals(self) -> "SparseConfidenceSet":
        d = self.lower.size
        if self.upper.size != d:
            raise InvariantViolation("lower and upper have different lengths")
        if self.selected.size and (self.selected[0] < 0 or self.selected[-1] >= d):
            raise InvariantViolation("selected index out of range")
        mask = self.selected_mask
        if np.any(self.lower[~mask] != 0.0) or np.any(self.upper[~mask] != 0.0):
            raise InvariantViolation("intervals off the selected set must be exactly {0}")
        if np.any(self.lower[mask] > self.upper[mask]):
            raise InvariantViolation("lower bound exceeds upper bound on the selected set")
        return self

    @property
    def d(self) -> int:
        return int(self.lower.size)

    @property
    def size(self) -> int:
        return int(self.selected.size)

    @property
    def selected_mask(self) -> np.ndarray:
        mask = np.zeros(self.lower.size, dtype=bool)
        mask[self.selected] = True
        return mask

    def contains(self, theta: np.ndarray) -> bool:
        """theta in M(S, U, L): zero off S and inside [L_j, U_j] on S."""
        theta = np.asarray(theta, dtype=float)
        if theta.size != self.d:
            raise InvariantViolation(f"theta has {theta.size} coordinates, set has {self.d}")
        mask = self.selected_mask
        if np.any(theta[~mask] != 0.0):
            return False
        on = theta[mask]
        return bool(np.all((self.lower[mask] <= on) & (on <= self.upper[mask])))

    def is_one_sided_valid(self, x: np.ndarray) -> bool:
        """Membership in the one-sided class: 0 <= L_j <= max(X_j, 0), U_j = inf on S."""
        mask = self.selected_mask
        lo = self.lower[mask]
        return bool(
            np.all(lo >= 0.0)
            and np.all(lo <= np.maximum(np.asarray(x, dtype=float)[mask], 0.0))
            and np.all(np.isposinf(self.upper[mask]))
        )


# ===== Construction and Sampling =====

def make_spike_vector(
    params: ProblemParams,
    snr: float,
    sign_pattern: SignPattern = SignPattern.ALL_POSITIVE,
    side: Optional[Side] = None,
) -> MeanVector:
    """First s coordinates equal +-snr*sigma, the rest zero."""
    if not snr > 0:
        raise InvariantViolation(f"snr must be positive, got {snr}")
    sign_pattern = SignPattern(sign_pattern)
    if side is None:
        side = Side.ONE_SIDED if sign_pattern == SignPattern.ALL_POSITIVE else Side.TWO_SIDED

    magnitude = snr * params.sigma
    signs = {
        SignPattern.ALL_POSITIVE: np.ones(params.s),
        SignPattern.ALL_NEGATIVE: -np.ones(params.s),
        SignPattern.ALTERNATING: np.where(np.arange(params.s) % 2 == 0, 1.0, -1.0),
    }[sign_pattern]

    theta = np.zeros(params.d)
    theta[: params.s] = signs * magnitude
    return MeanVector(theta=theta, side=side, s=params.s, a=params.a)


def derive_seed(seed: int, *keys: int) -> int:
    """Deterministic 64-bit child seed for (seed, key path).

    Independent of execution order, so replication r of grid point k always
    receives the same stream no matter how work is split across workers.
    """
    sequence = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in keys))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def sample_observation(theta: MeanVector, sigma: float, seed: int) -> Observation:
    """Draw X ~ N(theta, sigma^2 I); bit-identical for identical inputs."""
    if not sigma > 0:
        raise InvariantViolation(f"sigma must be positive, got {sigma}")
    rng = np.random.default_rng(int(seed))
    x = theta.theta + sigma * rng.standard_normal(theta.d)
    return Observation(x=x, sigma=sigma)


__all__ = [
    "Side",
    "SignPattern",
    "ProblemParams",
    "MeanVector",
    "Observation",
    "SparseConfidenceSet",
    "make_spike_vector",
    "derive_seed",
    "sample_observation",
]
