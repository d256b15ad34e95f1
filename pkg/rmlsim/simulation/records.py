# stdlib
import math
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

# third party
import numpy as np
import pandas as pd
from pydantic import BaseModel, root_validator, validate_arguments

# rmlsim absolute
from rmlsim.exceptions import EmptyTrace, ResultsIOError

TRACE_COLUMNS = [
    "message_id",
    "vehicle_id",
    "sent_at",
    "outcome",
    "latency_ms",
    "hops",
    "retries",
    "was_nlos",
]


class Outcome(str, Enum):
    DELIVERED = "Delivered"
    FAILED = "Failed"


class DeliveryRecord(BaseModel):
    message_id: int
    vehicle_id: int
    sent_at: float
    outcome: Outcome
    latency_ms: Optional[float] = None
    hops: int = 1
    retries: int = 0
    was_nlos: bool = False

    @root_validator(skip_on_failure=True)
    def _validate_outcome(cls: Any, values: Dict) -> Dict:
        if values["outcome"] == Outcome.DELIVERED:
            latency = values.get("latency_ms")
            if latency is None or not latency > 0:
                raise ValueError("a delivered message needs a positive latency")
            if values["hops"] not in (1, 2):
                raise ValueError(f"delivered over {values['hops']} hops")
        elif values["hops"] not in (0, 1, 2):
            raise ValueError(f"failed after {values['hops']} hops")
        if values["retries"] < 0:
            raise ValueError("retries must be >= 0")
        return values

    @property
    def delivered(self) -> bool:
        return self.outcome == Outcome.DELIVERED


class MetricsRecord(BaseModel):
    pdr: float
    pdr_nlos: float
    mean_latency_ms: float
    throughput_mbps: float
    messages_sent: int
    messages_delivered: int
    nlos_sent: int = 0
    nlos_delivered: int = 0


@validate_arguments(config=dict(arbitrary_types_allowed=True))
def compute_metrics(
    records: List[DeliveryRecord], sim_time_s: float, packet_bytes: int
) -> MetricsRecord:
    """Aggregate a delivery trace.

    `pdr_nlos` and `mean_latency_ms` are NaN when nothing qualifies.
    """
    if len(records) == 0:
        raise EmptyTrace("cannot compute metrics over an empty trace")
    if sim_time_s <= 0:
        raise ValueError(f"sim_time_s must be > 0, got {sim_time_s}")

    delivered = [r for r in records if r.delivered]
    nlos = [r for r in records if r.was_nlos]
    nlos_delivered = sum(1 for r in nlos if r.delivered)

    mean_latency = math.nan
    if delivered:
        mean_latency = math.fsum(r.latency_ms for r in delivered) / len(delivered)  # type: ignore

    return MetricsRecord(
        pdr=len(delivered) / len(records),
        pdr_nlos=nlos_delivered / len(nlos) if nlos else math.nan,
        mean_latency_ms=mean_latency,
        throughput_mbps=len(delivered) * packet_bytes * 8 / sim_time_s / 1e6,
        messages_sent=len(records),
        messages_delivered=len(delivered),
        nlos_sent=len(nlos),
        nlos_delivered=nlos_delivered,
    )


def trace_frame(records: Sequence[DeliveryRecord]) -> pd.DataFrame:
    rows = [
        (
            r.message_id,
            r.vehicle_id,
            r.sent_at,
            r.outcome.value,
            np.nan if r.latency_ms is None else r.latency_ms,
            r.hops,
            r.retries,
            int(r.was_nlos),
        )
        for r in records
    ]
    return pd.DataFrame(rows, columns=TRACE_COLUMNS)


def write_trace(records: Sequence[DeliveryRecord], path: Union[str, Path]) -> None:
    """One record per line, columns as in TRACE_COLUMNS; empty latency when failed."""
    try:
        trace_frame(records).to_csv(path, index=False)
    except OSError as e:
        raise ResultsIOError(f"cannot write trace {path}: {e}") from e


def read_trace(path: Union[str, Path]) -> List[DeliveryRecord]:
    try:
        df = pd.read_csv(path)
    except OSError as e:
        raise ResultsIOError(f"cannot read trace {path}: {e}") from e
    if list(df.columns) != TRACE_COLUMNS:
        raise ValueError(f"unexpected trace columns {list(df.columns)}")

    records = []
    for row in df.itertuples(index=False):
        records.append(
            DeliveryRecord(
                message_id=int(row.message_id),
                vehicle_id=int(row.vehicle_id),
                sent_at=float(row.sent_at),
                outcome=Outcome(row.outcome),
                latency_ms=None if pd.isna(row.latency_ms) else float(row.latency_ms),
                hops=int(row.hops),
                retries=int(row.retries),
                was_nlos=bool(row.was_nlos),
            )
        )
    return records
