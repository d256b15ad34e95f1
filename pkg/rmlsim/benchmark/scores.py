# stdlib
from typing import Any, Dict, List, Tuple

# third party
import numpy as np
import pandas as pd

# rmlsim absolute
from rmlsim.simulation.records import MetricsRecord

RESULT_COLUMNS = [
    "axis",
    "value",
    "mode",
    "seed_count",
    "pdr_mean",
    "pdr_sd",
    "latency_ms_mean",
    "latency_ms_sd",
    "throughput_mbps_mean",
    "throughput_mbps_sd",
]
RESULT_DTYPES = {
    "axis": str,
    "value": int,
    "mode": str,
    "seed_count": int,
    "pdr_mean": float,
    "pdr_sd": float,
    "latency_ms_mean": float,
    "latency_ms_sd": float,
    "throughput_mbps_mean": float,
    "throughput_mbps_sd": float,
}
# results column prefix -> MetricsRecord field
SCORED = {
    "pdr": "pdr",
    "latency_ms": "mean_latency_ms",
    "throughput_mbps": "throughput_mbps",
}


def _mean_sd(values: List[float]) -> Tuple[float, float]:
    arr = np.asarray(values, dtype=float)
    arr = arr[~np.isnan(arr)]
    if len(arr) == 0:
        return np.nan, np.nan
    return float(np.mean(arr)), float(np.std(arr))


class ScoreEvaluator:
    """Collects per-seed metrics of every sweep point."""

    def __init__(self) -> None:
        self.scores: Dict[Tuple[str, int, str], Dict[str, Any]] = {}

    def add(self, key: Tuple[str, int, str], metrics: MetricsRecord, duration: float) -> None:
        if key not in self.scores:
            self.scores[key] = {
                "values": {name: [] for name in SCORED},
                "durations": [],
            }
        self.scores[key]["durations"].append(duration)
        for name, field in SCORED.items():
            self.scores[key]["values"][name].append(getattr(metrics, field))

    def duration(self) -> float:
        return float(sum(sum(entry["durations"]) for entry in self.scores.values()))

    def to_dataframe(self) -> pd.DataFrame:
        """One row per (axis, value, mode), sorted by value then mode.

        NaN samples (e.g. latency of a run without deliveries) are left out
        of the mean; `sd` is the population standard deviation.
        """
        rows = []
        for (axis, value, mode), entry in sorted(self.scores.items(), key=lambda kv: (kv[0][1], kv[0][2])):
            row: List[Any] = [axis, value, mode, len(entry["durations"])]
            for name in SCORED:
                row.extend(_mean_sd(entry["values"][name]))
            rows.append(row)
        return pd.DataFrame(rows, columns=RESULT_COLUMNS).astype(RESULT_DTYPES)
