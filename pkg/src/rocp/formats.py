"""File formats: series CSV in, score/report/selection/scaling CSV and JSON out.

Floats are written with 17 significant digits so that every value survives
a write/read round trip exactly. Writes go to a temporary file in the target
directory and are moved into place, so a reader never sees a partial file.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from datetime import datetime
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence, Union

from .errors import InputError
from .experiment import RegressionResult, ScalingRow
from .metrics import EVAL_COLUMNS
from .selection import SelectionResult
from .series import ScoreRecord, TimeSeries, validate_series

PathLike = Union[str, os.PathLike]

SCORE_COLUMNS = ("origin", "horizon", "score", "sigma")
SCALING_COLUMNS = ("series_id", "freq", "T", "m_star", "boundary", "coverage", "winkler")


def fmt(x: Any) -> str:
    """Cell text for ``x``: 17 significant digits for floats, empty for None/NaN."""
    if x is None:
        return ""
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, float):
        if math.isnan(x):
            return ""
        return format(x, ".17g")
    if hasattr(x, "value"):  # enums
        return str(x.value)
    return str(x)


def atomic_write(path: PathLike, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]], trailer: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    for line in trailer:
        buf.write(line + "\n")
    return buf.getvalue()


def write_csv(path: PathLike, header: Sequence[str], rows: Iterable[Sequence[Any]], trailer: Sequence[str] = ()) -> Path:
    return atomic_write(path, csv_text(header, rows, trailer))


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):  # numpy scalars
        return _jsonable(obj.item())
    if hasattr(obj, "value") and not isinstance(obj, (int, float, str)):
        return obj.value
    return obj


def json_text(obj: Any) -> str:
    """Sorted-key JSON with 17-digit floats; NaN and infinities become null."""

    def enc(v: Any, indent: str) -> str:
        inner = indent + "  "
        if isinstance(v, dict):
            if not v:
                return "{}"
            items = [f"{inner}{json.dumps(k)}: {enc(v[k], inner)}" for k in sorted(v)]
            return "{\n" + ",\n".join(items) + "\n" + indent + "}"
        if isinstance(v, list):
            if not v:
                return "[]"
            return "[\n" + ",\n".join(inner + enc(x, inner) for x in v) + "\n" + indent + "]"
        if isinstance(v, float):
            if not math.isfinite(v):
                return "null"
            text = format(v, ".17g")
            # keep floats recognisable as floats after a round trip
            return text if any(c in text for c in ".en") else text + ".0"
        return json.dumps(v)

    return enc(_jsonable(obj), "") + "\n"


def write_json(path: PathLike, obj: Any) -> Path:
    return atomic_write(path, json_text(obj))


def read_json(path: PathLike) -> Any:
    path = _existing(path)
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None


def _existing(path: PathLike) -> Path:
    path = Path(path)
    if not path.is_file():
        raise InputError(f"input file not found: {path}")
    return path


def _parse_timestamp(text: str):
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return datetime.fromisoformat(text)
    except ValueError:
        raise InputError(f"unparseable timestamp {text!r}") from None


def read_series_csv(path: PathLike) -> list:
    """Series in a CSV file with a ``value`` column.

    Optional columns: ``timestamp`` (integer or ISO-8601), ``id`` and
    ``freq``. Rows sharing an ``id`` form one series, in file order.
    """
    path = _existing(path)
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "value" not in reader.fieldnames:
            raise InputError(f"{path}: header with a 'value' column is required")
        groups: dict[str, dict] = {}
        for lineno, row in enumerate(reader, start=2):
            sid = row.get("id") or path.stem
            g = groups.setdefault(sid, {"values": [], "ts": [], "freq": row.get("freq") or None})
            try:
                g["values"].append(float(row["value"]))
            except (TypeError, ValueError):
                raise InputError(f"{path}:{lineno}: value {row['value']!r} is not a number") from None
            if row.get("timestamp"):
                g["ts"].append(_parse_timestamp(row["timestamp"]))
    if not groups:
        raise InputError(f"{path}: no rows")
    out = []
    for sid, g in groups.items():
        ts = g["ts"] if g["ts"] else None
        if ts is not None and len(ts) != len(g["values"]):
            raise InputError(f"{path}: series {sid!r} has timestamps on some rows only")
        out.append(validate_series(g["values"], id=sid, freq_tag=g["freq"], timestamps=ts))
    return out


def read_series(path: PathLike, series_id: Optional[str] = None) -> TimeSeries:
    """The single series in ``path``, or the one named ``series_id``."""
    series = read_series_csv(path)
    if series_id is not None:
        for s in series:
            if s.id == series_id:
                return s
        raise InputError(f"{path}: no series with id {series_id!r}")
    if len(series) > 1:
        raise InputError(f"{path}: holds {len(series)} series; choose one by id")
    return series[0]


def write_scores(path: PathLike, records: Sequence[ScoreRecord]) -> Path:
    rows = ((r.origin, r.horizon, r.score, r.sigma) for r in records)
    return write_csv(path, SCORE_COLUMNS, rows)


def read_scores(path: PathLike) -> list:
    path = _existing(path)
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or list(reader.fieldnames[:3]) != list(SCORE_COLUMNS[:3]):
            raise InputError(f"{path}: expected columns {','.join(SCORE_COLUMNS)}")
        out = []
        for lineno, row in enumerate(reader, start=2):
            try:
                sigma = row.get("sigma") or None
                out.append(
                    ScoreRecord(
                        int(row["origin"]),
                        int(row["horizon"]),
                        float(row["score"]),
                        None if sigma is None else float(sigma),
                    )
                )
            except (TypeError, ValueError) as exc:
                raise InputError(f"{path}:{lineno}: {exc}") from None
    return out


def write_eval(path: PathLike, rows: Sequence[dict]) -> Path:
    """EvalReport rows (dicts keyed by the evaluation columns) as CSV or JSON by suffix."""
    if Path(path).suffix == ".json":
        return write_json(path, rows[0] if len(rows) == 1 else list(rows))
    return write_csv(path, EVAL_COLUMNS, ([r.get(c) for c in EVAL_COLUMNS] for r in rows))


def write_selection(path: PathLike, result: SelectionResult) -> Path:
    """``m,mean_winkler`` rows followed by a ``# m_hat=...`` summary line."""
    trailer = [f"# m_hat={result.m_hat},boundary={result.at_boundary.value},n_val={result.n_val}"]
    return write_csv(path, ("m", "mean_winkler"), result.per_candidate, trailer)


def write_scaling_rows(path: PathLike, rows: Sequence[ScalingRow]) -> Path:
    return write_csv(
        path,
        SCALING_COLUMNS,
        ((r.series_id, r.freq_tag, r.T, r.m_star, r.boundary, r.coverage, r.mean_winkler) for r in rows),
    )


def read_scaling_rows(path: PathLike) -> list:
    path = _existing(path)
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames) != SCALING_COLUMNS:
            raise InputError(f"{path}: expected columns {','.join(SCALING_COLUMNS)}")
        out = []
        for row in reader:
            out.append(
                ScalingRow(
                    row["series_id"],
                    row["freq"],
                    int(row["T"]),
                    int(row["m_star"]),
                    row["boundary"],
                    float(row["coverage"]) if row["coverage"] else float("nan"),
                    float(row["winkler"]) if row["winkler"] else float("nan"),
                )
            )
    return out


def write_regression(path: PathLike, result: RegressionResult) -> Path:
    return write_json(path, result.to_dict())
