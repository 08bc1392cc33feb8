"""Deterministic JSON / CSV / text artifacts.

Everything that can vary between identical runs (wall time, host, versions)
goes to ``metadata.json``; all other files are byte-identical for a fixed
configuration and seed.
"""

from __future__ import annotations

import csv
import json
import platform
import time
from fractions import Fraction
from pathlib import Path

import numpy as np


def to_plain(obj):
    """Recursively convert numpy scalars/arrays, complex numbers and fractions to JSON types."""
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, Fraction):
        return int(obj) if obj.denominator == 1 else float(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if x != x or x in (float("inf"), float("-inf")):
            return repr(x)
        return x
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if obj is None or isinstance(obj, str):
        return obj
    if hasattr(obj, "as_dict"):
        return to_plain(obj.as_dict())
    return repr(obj)


def dumps(obj) -> str:
    return json.dumps(to_plain(obj), indent=2, sort_keys=True) + "\n"


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(dumps(obj))
    return path


def _cell(v):
    v = to_plain(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, list):
        return json.dumps(v)
    return v


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_cell(v) for v in r])
    return path


def write_text(path, lines) -> Path:
    path = Path(path)
    path.write_text("\n".join(lines) + "\n")
    return path


def write_metadata(out_dir, command: str, started: float) -> Path:
    import numpy
    import scipy

    from . import __version__

    return write_json(
        Path(out_dir) / "metadata.json",
        {
            "command": command,
            "started_unix": started,
            "elapsed_s": time.time() - started,
            "python": platform.python_version(),
            "platform": platform.platform(),
            "numpy": numpy.__version__,
            "scipy": scipy.__version__,
            "package": __version__,
        },
    )


def emit_report(out_dir, name: str, payload: dict, tables: dict | None = None, summary=None) -> list[Path]:
    """``<name>.json`` plus one CSV per table (``{suffix: (header, rows)}``) and ``<name>.txt``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = [write_json(out / f"{name}.json", payload)]
    for suffix, (header, rows) in (tables or {}).items():
        files.append(write_csv(out / f"{name}_{suffix}.csv", header, rows))
    if summary is not None:
        files.append(write_text(out / f"{name}.txt", summary))
    return files
