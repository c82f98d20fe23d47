"""Deterministic CSV/JSON serialization of run results."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path

TRAJECTORY_COLUMNS = ("t", "re_G", "im_G", "abs_G", "theta_G", "r", "is_cyclic", "theta_U")
EVENT_COLUMNS = ("n", "t_star", "jump", "abs_G", "anomalous")
CYCLIC_COLUMNS = ("n", "t", "theta_U", "crossings_before", "class")
SIG_DIGITS = 12


def fmt(x) -> str:
    """Fixed 12-significant-digit text; inf -> "inf", NaN/None -> ""."""
    if x is None:
        return ""
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, int):
        return str(x)
    x = float(x)
    if math.isnan(x):
        return ""
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x + 0.0:.{SIG_DIGITS}g}"


def angle(x):
    """Keep an angle in (-pi, pi] after rounding to SIG_DIGITS.

    -pi + tiny prints as -3.14159265359, which reads back below -pi; such
    values are written as +pi, the same point on the circle.
    """
    if x is None or math.isnan(x):
        return x
    return math.pi if float(fmt(x)) <= -math.pi else x


def json_value(x):
    if x is None or isinstance(x, (bool, int, str)):
        return x
    x = float(x)
    if math.isnan(x):
        return None
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(fmt(x))


def csv_text(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([v if isinstance(v, str) else fmt(v) for v in (row[c] for c in columns)])
    return buf.getvalue()


def json_text(tables: dict) -> str:
    out = {
        name: [{k: (v if isinstance(v, str) else json_value(v)) for k, v in row.items()} for row in rows]
        for name, rows in tables.items()
    }
    return json.dumps(out, indent=1) + "\n"


def atomic_write(path: Path, text: str) -> None:
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


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
