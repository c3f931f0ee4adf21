"""
SEQMEM - REPORT WRITER
Data sink for the CLI: JSON documents and CSV tables to a file or stdout
"""

import json
import logging
import math
import sys
from pathlib import Path
from typing import Any, Optional, TextIO

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)


def to_plain(value: Any) -> Any:
    """numpy scalars/arrays to Python values; non-finite floats to None."""
    if isinstance(value, dict):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_plain(value.tolist())
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def dumps_json(doc: Any) -> str:
    return json.dumps(to_plain(doc), sort_keys=True, indent=2) + "\n"


class ReportWriter:
    """Writes to `out_path` when given, else to the stream (stdout by default)."""

    def __init__(self, out_path: Optional[str] = None, stream: Optional[TextIO] = None):
        self.out_path = Path(out_path) if out_path else None
        self.stream = stream

    def _emit(self, text: str):
        if self.out_path is not None:
            self.out_path.write_text(text, encoding="utf-8")
            logger.info("Wrote %d bytes to %s", len(text), self.out_path)
        else:
            (self.stream or sys.stdout).write(text)

    def write_text(self, text: str):
        self._emit(text if text.endswith("\n") else text + "\n")

    def write_json(self, doc: Any):
        self._emit(dumps_json(doc))

    def write_frame(self, frame: pd.DataFrame, fmt: str = "csv"):
        if fmt == "json":
            self.write_json(frame.to_dict(orient="records"))
        else:
            self._emit(frame.to_csv(index=False, lineterminator="\n"))


def write_csv(frame: pd.DataFrame, path: str):
    """Side-channel CSV (per-trial dumps, residual histories)."""
    Path(path).write_text(frame.to_csv(index=False, lineterminator="\n"), encoding="utf-8")
    logger.info("Wrote %d rows to %s", len(frame), path)
