"""CSV/JSON output shared by the CLI and the analysis loaders.

Tables are plain CSV with an optional leading ``#``-prefixed JSON header
line carrying the generating parameters. Floats are written with repr so
reruns with identical inputs produce byte-identical files.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np


def write_table(path, columns: dict, params: dict | None = None) -> None:
    """Write named columns as CSV, optionally preceded by a JSON header line."""
    path = Path(path)
    arrays = {k: np.asarray(v) for k, v in columns.items()}
    lengths = {len(v) for v in arrays.values()}
    if len(lengths) != 1:
        raise ValueError("all columns must have the same length")
    lines = []
    if params is not None:
        lines.append("# " + json.dumps(params, sort_keys=True))
    lines.append(",".join(arrays))
    for row in zip(*arrays.values()):
        lines.append(",".join(repr(float(x)) for x in row))
    path.write_text("\n".join(lines) + "\n")


def read_table(path) -> tuple[dict, dict]:
    """Read a CSV written by write_table.

    Returns (params, columns): the JSON header dict (empty if absent) and a
    name -> float array mapping.
    """
    path = Path(path)
    params: dict = {}
    with path.open() as fh:
        line = fh.readline()
        if line.startswith("#"):
            params = json.loads(line[1:].strip())
            line = fh.readline()
        names = [c.strip() for c in line.strip().split(",")]
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if data.size == 0:
        raise ValueError(f"no data rows in {path}")
    return params, {name: data[:, i] for i, name in enumerate(names)}


def write_json(path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
