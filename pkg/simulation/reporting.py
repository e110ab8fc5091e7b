"""
CSV readers and writers: simulation summaries with a JSON sidecar,
observation files ("j,x") and interval files ("j,selected,lower,upper").
"""

import json
import logging
import math
from pathlib import Path
from typing import Dict, Optional, Union

import numpy as np
import pandas as pd

from config.settings import OutputConfig
from inference import __version__
from inference.errors import MalformedInputError
from inference.model import Observation, SparseConfidenceSet

from .harness import SimSummary

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

OBSERVATION_COLUMNS = ["j", "x"]
INTERVAL_COLUMNS = ["j", "selected", "lower", "upper"]


# ===== Simulation summaries =====

def summary_frame(summary: SimSummary) -> pd.DataFrame:
    return pd.DataFrame.from_records(summary.to_records(), columns=list(summary.columns))


def sidecar_path(path: PathLike) -> Path:
    return Path(path).with_suffix(".json")


def summary_metadata(summary: SimSummary, command: Optional[str] = None) -> Dict[str, object]:
    spec = summary.spec
    meta = {
        "software": "sparseci",
        "version": __version__,
        "seed": spec.seed,
        "reps": spec.reps,
        "snr_grid": list(spec.snr_grid),
        "alpha_prime_grid": list(spec.alpha_primes()),
        "methods": [m.value for m in spec.methods],
        "sign_pattern": spec.sign_pattern.value,
        "force": spec.force,
        "params": spec.params.model_dump(),
        "columns": list(summary.columns),
    }
    if command:
        meta["command"] = command
    return meta


def write_summary(summary: SimSummary, path: PathLike, command: Optional[str] = None) -> Path:
    """Write the summary CSV and its metadata sidecar; returns the CSV path."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    summary_frame(summary).to_csv(path, index=False, float_format=OutputConfig.FLOAT_FORMAT, na_rep="nan")
    with open(sidecar_path(path), "w") as f:
        json.dump(summary_metadata(summary, command), f, indent=2, sort_keys=True)
        f.write("\n")
    logger.info("wrote %d rows to %s", len(summary.rows), path)
    return path


def read_summary(path: PathLike) -> pd.DataFrame:
    return pd.read_csv(path)


# ===== Observation files =====

def _raw_frame(path: Path, columns) -> pd.DataFrame:
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    except pd.errors.ParserError as exc:
        # pandas reports "Expected n fields in line k, saw m"
        raise MalformedInputError(str(path), _parser_line(str(exc)), str(exc)) from exc
    except pd.errors.EmptyDataError as exc:
        raise MalformedInputError(str(path), 1, "file is empty") from exc
    if list(frame.columns) != list(columns):
        raise MalformedInputError(str(path), 1, f"expected header {','.join(columns)}, got {','.join(frame.columns)}")
    return frame


def _parser_line(message: str) -> int:
    words = message.replace(",", " ").split()
    for i, word in enumerate(words[:-1]):
        if word == "line" and words[i + 1].isdigit():
            return int(words[i + 1])
    return 0


def _parse_float(text: str, path: Path, line: int, column: str, allow_inf: bool = False) -> float:
    try:
        value = float(text)
    except ValueError:
        raise MalformedInputError(str(path), line, f"{column}={text!r} is not a number") from None
    if math.isnan(value) or (math.isinf(value) and not allow_inf):
        raise MalformedInputError(str(path), line, f"{column}={text!r} is not finite")
    return value


def _parse_index(text: str, expected: int, path: Path, line: int) -> int:
    try:
        j = int(text)
    except ValueError:
        raise MalformedInputError(str(path), line, f"j={text!r} is not an integer") from None
    if j != expected:
        raise MalformedInputError(str(path), line, f"expected j={expected}, got j={j}")
    return j


def read_observation_csv(path: PathLike, sigma: float) -> Observation:
    """Observation from a "j,x" file with j = 0..d-1 in order."""
    path = Path(path)
    frame = _raw_frame(path, OBSERVATION_COLUMNS)
    if frame.empty:
        raise MalformedInputError(str(path), 2, "no data rows")
    x = np.empty(len(frame))
    for i, (j_text, x_text) in enumerate(zip(frame["j"], frame["x"])):
        line = i + 2
        _parse_index(j_text, i, path, line)
        x[i] = _parse_float(x_text, path, line, "x")
    return Observation(x=x, sigma=sigma)


def write_observation_csv(obs: Observation, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame({"j": np.arange(obs.d), "x": obs.x})
    frame.to_csv(path, index=False, float_format=OutputConfig.FLOAT_FORMAT)
    return path


# ===== Interval files =====

def interval_frame(conf_set: SparseConfidenceSet) -> pd.DataFrame:
    """One row per coordinate; off-S rows are 0,0 and one-sided uppers are "inf"."""
    return pd.DataFrame(
        {
            "j": np.arange(conf_set.d),
            "selected": conf_set.selected_mask.astype(int),
            "lower": conf_set.lower,
            "upper": conf_set.upper,
        }
    )


def write_interval_csv(conf_set: SparseConfidenceSet, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    # "%.9g" renders +inf as "inf"
    interval_frame(conf_set).to_csv(path, index=False, float_format=OutputConfig.FLOAT_FORMAT)
    return path


def read_interval_csv(path: PathLike, method: str = "file") -> SparseConfidenceSet:
    """Parse an interval file back into a SparseConfidenceSet (invariants re-checked)."""
    path = Path(path)
    frame = _raw_frame(path, INTERVAL_COLUMNS)
    d = len(frame)
    lower, upper = np.zeros(d), np.zeros(d)
    selected = []
    for i, row in enumerate(frame.itertuples(index=False)):
        line = i + 2
        _parse_index(row.j, i, path, line)
        if row.selected not in ("0", "1"):
            raise MalformedInputError(str(path), line, f"selected={row.selected!r} must be 0 or 1")
        if row.selected == "1":
            selected.append(i)
        lower[i] = _parse_float(row.lower, path, line, "lower", allow_inf=True)
        upper[i] = _parse_float(
            "inf" if row.upper == OutputConfig.INF_LITERAL else row.upper, path, line, "upper", allow_inf=True
        )
    return SparseConfidenceSet(selected=np.array(selected, dtype=int), lower=lower, upper=upper, method=method)


__all__ = [
    "OBSERVATION_COLUMNS",
    "INTERVAL_COLUMNS",
    "summary_frame",
    "sidecar_path",
    "summary_metadata",
    "write_summary",
    "read_summary",
    "read_observation_csv",
    "write_observation_csv",
    "interval_frame",
    "write_interval_csv",
    "read_interval_csv",
]
