"""
Generate sample data for the sparse confidence set toolkit.
Creates a seeded spike-design observation X ~ N(theta, sigma^2 I) and the
mean vector it was drawn from.
"""

import logging
import sys
from pathlib import Path
from typing import Optional, Tuple

import numpy as np
import pandas as pd

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from config.settings import ExperimentDefaults, OutputConfig, configure_logging
from inference.model import (
    MeanVector,
    Observation,
    ProblemParams,
    SignPattern,
    make_spike_vector,
    sample_observation,
)
from simulation.reporting import write_observation_csv

DATA_DIR = Path(__file__).parent

logger = logging.getLogger(__name__)


def generate_observation(
    d: int = ExperimentDefaults.D,
    s: int = ExperimentDefaults.S,
    snr: float = 5.0,
    sigma: float = ExperimentDefaults.SIGMA,
    sign_pattern: SignPattern = SignPattern.ALL_POSITIVE,
    seed: int = ExperimentDefaults.SEED,
) -> Tuple[MeanVector, Observation]:
    """First s coordinates equal to +-snr*sigma, the rest zero, plus one noisy draw."""
    params = ProblemParams(
        d=d,
        s=s,
        a=snr * sigma,
        sigma=sigma,
        alpha=ExperimentDefaults.ALPHA,
        alpha_prime=ExperimentDefaults.ALPHA_PRIME,
        delta=ExperimentDefaults.DELTA,
    )
    theta = make_spike_vector(params, snr, sign_pattern)
    return theta, sample_observation(theta, sigma, seed)


def save_sample(
    out: Path,
    theta: MeanVector,
    obs: Observation,
    theta_out: Optional[Path] = None,
) -> Path:
    """Write the observation as "j,x" and, optionally, theta as "j,theta"."""
    write_observation_csv(obs, out)
    if theta_out is not None:
        pd.DataFrame({"j": np.arange(theta.d), "theta": theta.theta}).to_csv(
            theta_out, index=False, float_format=OutputConfig.FLOAT_FORMAT
        )
    return out


def main():
    """Generate the default sample."""

    configure_logging()
    logger.info("🚀 Generating spike-design sample...")
    DATA_DIR.mkdir(exist_ok=True)

    theta, obs = generate_observation()
    save_sample(DATA_DIR / "observation.csv", theta, obs, DATA_DIR / "theta.csv")

    logger.info(
        "📊 Summary: dimension=%d nonzero=%d observation=%s theta=%s",
        obs.d,
        theta.support.size,
        DATA_DIR / "observation.csv",
        DATA_DIR / "theta.csv",
    )


if __name__ == "__main__":
    main()
