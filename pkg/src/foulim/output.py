"""CSV/JSON emission and config echo for reproducible runs.

All floats are written with 17 significant digits so that re-ingesting
an emitted file reproduces the run bit-exactly.  CSV files have a fixed
header row and column order per schema; JSON summaries carry a
schema-version field.
"""

from __future__ import annotations

import configparser
import csv
import io
import json

import numpy as np

SCHEMA_VERSION = 1

__all__ = [
    "SCHEMA_VERSION",
    "fmt",
    "write_csv",
    "write_json",
    "config_echo",
    "read_config",
]


def fmt(x) -> str:
    """Value formatted for output; floats at 17 significant digits."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return str(x)


def write_csv(path, header: list[str], rows) -> None:
    """RFC-style CSV with a fixed header and column order."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, quoting=csv.QUOTE_MINIMAL, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    return obj


def write_json(path, payload: dict) -> None:
    doc = {"schema_version": SCHEMA_VERSION}
    doc.update(_jsonable(payload))
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _parser() -> configparser.ConfigParser:
    cp = configparser.ConfigParser()
    cp.optionxform = str  # option names are case-sensitive (--H vs --horizon)
    return cp


def config_echo(command: str, params: dict) -> str:
    """Key-value echo of a run, re-ingestible through --config."""
    cp = _parser()
    cp["run"] = {"command": command}
    cp[command] = {k: fmt(v) for k, v in sorted(params.items()) if v is not None}
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def read_config(path) -> tuple[str, dict]:
    cp = _parser()
    with open(path) as fh:
        cp.read_file(fh)
    command = cp["run"]["command"]
    params = dict(cp[command]) if cp.has_section(command) else {}
    return command, params
