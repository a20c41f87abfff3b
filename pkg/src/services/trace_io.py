"""
Trace and report files, written atomically.
"""

import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Any, Callable, Dict, Union

import numpy as np
import pandas as pd

from ..core.config import Config
from ..models import IterateTrace

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ["iter", "f", "gap", "gap_bound", "root_residual", "wall_ns"]


def _atomic_write(path: Union[str, Path], writer: Callable[[Path], None]) -> Path:
    """Write to a temp file in the target directory, then rename over the target."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    os.close(fd)
    try:
        writer(Path(tmp))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def trace_frame(trace: IterateTrace) -> pd.DataFrame:
    return trace.to_frame()[TRACE_COLUMNS]


def write_trace(trace: IterateTrace, path: Union[str, Path]) -> Path:
    """CSV with 17 significant digits and empty cells for unavailable values."""
    frame = trace_frame(trace)

    def write(tmp: Path) -> None:
        frame.to_csv(tmp, index=False, float_format=Config.TRACE_FLOAT_FORMAT, na_rep="", lineterminator="\n")

    written = _atomic_write(path, write)
    logger.info("wrote %d trace rows to %s", len(frame), written)
    return written


def read_trace(path: Union[str, Path]) -> pd.DataFrame:
    return pd.read_csv(path, dtype={"iter": "Int64", "wall_ns": "Int64"}, float_precision="round_trip")


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    return value


def write_report(report: Dict[str, Any], path: Union[str, Path]) -> Path:
    """Pretty JSON with sorted keys so identical runs give identical bytes."""
    text = json.dumps(_jsonable(report), indent=2, sort_keys=True, allow_nan=True) + "\n"
    written = _atomic_write(path, lambda tmp: tmp.write_text(text, encoding="utf-8"))
    logger.info("wrote report to %s", written)
    return written
