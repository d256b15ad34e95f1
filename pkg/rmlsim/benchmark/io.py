# stdlib
import json
import math
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Optional, Union

# third party
import pandas as pd

# rmlsim absolute
from rmlsim.benchmark.scores import RESULT_COLUMNS, RESULT_DTYPES
from rmlsim.exceptions import ResultsIOError


class ResultFormat(str, Enum):
    DELIMITED = "delimited"
    STRUCTURED = "structured"


def _clean(value: Any) -> Any:
    if isinstance(value, float) and math.isnan(value):
        return None
    return value


def write_results(
    table: pd.DataFrame,
    path: Union[str, Path],
    format: ResultFormat = ResultFormat.DELIMITED,
    provenance: Optional[Dict[str, Any]] = None,
) -> None:
    """Write a sweep table.

    The delimited layout is a CSV with the RESULT_COLUMNS header. The
    structured layout is a JSON document holding the same rows plus
    `provenance` (resolved config, seeds, sweep definition).
    """
    if len(table) == 0:
        raise ValueError("refusing to write an empty results table")
    missing = [c for c in RESULT_COLUMNS if c not in table.columns]
    if missing:
        raise ValueError(f"results table lacks columns {missing}")
    table = table[RESULT_COLUMNS]

    try:
        if ResultFormat(format) == ResultFormat.DELIMITED:
            table.to_csv(path, index=False)
            return
        document = {
            "columns": RESULT_COLUMNS,
            "rows": [
                {k: _clean(v) for k, v in row.items()}
                for row in table.astype(object).to_dict(orient="records")
            ],
            "provenance": provenance or {},
        }
        with open(path, "w") as f:
            json.dump(document, f, indent=2, sort_keys=True, allow_nan=False)
            f.write("\n")
    except OSError as e:
        raise ResultsIOError(f"cannot write results {path}: {e}") from e


def read_results(path: Union[str, Path], format: Optional[ResultFormat] = None) -> pd.DataFrame:
    """Inverse of `write_results`; the format defaults to the file suffix."""
    path = Path(path)
    if format is None:
        format = ResultFormat.STRUCTURED if path.suffix == ".json" else ResultFormat.DELIMITED
    try:
        if ResultFormat(format) == ResultFormat.DELIMITED:
            table = pd.read_csv(path)
        else:
            with open(path) as f:
                document = json.load(f)
            table = pd.DataFrame.from_records(document["rows"], columns=document["columns"])
    except OSError as e:
        raise ResultsIOError(f"cannot read results {path}: {e}") from e

    if list(table.columns) != RESULT_COLUMNS:
        raise ValueError(f"unexpected results columns {list(table.columns)}")
    return table.astype(RESULT_DTYPES)


def read_provenance(path: Union[str, Path]) -> Dict[str, Any]:
    try:
        with open(path) as f:
            return json.load(f)["provenance"]
    except OSError as e:
        raise ResultsIOError(f"cannot read results {path}: {e}") from e
