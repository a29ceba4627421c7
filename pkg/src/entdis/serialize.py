"""Canonical JSON helpers shared by set files, certificates and reports.

Everything written to disk goes through ``canonical_json`` so that repeated
runs with identical inputs produce byte-identical files: keys are sorted,
floats use Python's shortest round-trip repr, and numpy scalars are cast to
plain Python types first.
"""
from __future__ import annotations

import hashlib
import json

import numpy as np


def jsonable(obj):
    """Recursively convert numpy scalars/arrays and sets to JSON-safe types."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (set, frozenset)):
        return [jsonable(v) for v in sorted(obj)]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


def canonical_json(obj) -> str:
    """Serialize with sorted keys and a trailing newline (byte-deterministic)."""
    return json.dumps(jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def sha256_hex(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def complex_to_pair(z) -> list:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def pair_to_complex(pair) -> complex:
    if not (isinstance(pair, (list, tuple)) and len(pair) == 2):
        raise ValueError(f"expected a [re, im] pair, got {pair!r}")
    return complex(float(pair[0]), float(pair[1]))


def matrix_to_json(mat: np.ndarray) -> list:
    """d x d complex matrix -> nested [[ [re, im], ... ] ... ] lists."""
    return [[complex_to_pair(z) for z in row] for row in np.asarray(mat)]


def matrix_from_json(rows, d: int) -> np.ndarray:
    mat = np.empty((d, d), dtype=np.complex128)
    if len(rows) != d:
        raise ValueError(f"expected {d} rows, got {len(rows)}")
    for i, row in enumerate(rows):
        if len(row) != d:
            raise ValueError(f"row {i}: expected {d} entries, got {len(row)}")
        for j, pair in enumerate(row):
            mat[i, j] = pair_to_complex(pair)
    return mat
