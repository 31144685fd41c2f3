"""JSON round-tripping for the xorlab/v1 wire format.

Complex scalars are two-element ``[re, im]`` arrays, matrices are row-major
``{"rows", "cols", "data"}`` records, and every top-level document carries a
``"schema": "xorlab/v1"`` tag.
"""

from __future__ import annotations

import json

import numpy as np

SCHEMA = "xorlab/v1"


def complex_to_json(z: complex) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def complex_from_json(pair) -> complex:
    return complex(float(pair[0]), float(pair[1]))


def matrix_to_json(m) -> dict:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2:
        raise ValueError("matrix_to_json expects a 2-D array")
    return {
        "schema": SCHEMA,
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "data": [complex_to_json(z) for z in m.reshape(-1)],
    }


def matrix_from_json(doc) -> np.ndarray:
    _check_schema(doc)
    rows, cols = int(doc["rows"]), int(doc["cols"])
    data = [complex_from_json(p) for p in doc["data"]]
    if len(data) != rows * cols:
        raise ValueError("matrix data length does not match rows*cols")
    return np.asarray(data, dtype=complex).reshape(rows, cols)


def state_to_json(psi) -> dict:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    return {
        "schema": SCHEMA,
        "dim": int(psi.shape[0]),
        "amplitudes": [complex_to_json(z) for z in psi],
    }


def state_from_json(doc) -> np.ndarray:
    _check_schema(doc)
    amps = [complex_from_json(p) for p in doc["amplitudes"]]
    if len(amps) != int(doc["dim"]):
        raise ValueError("amplitude count does not match dim")
    return np.asarray(amps, dtype=complex)


def povm_to_json(outcomes, elements) -> dict:
    return {
        "schema": SCHEMA,
        "outcomes": [str(o) for o in outcomes],
        "elements": [matrix_to_json(e) for e in elements],
    }


def povm_from_json(doc) -> tuple[list[str], list[np.ndarray]]:
    _check_schema(doc)
    return list(doc["outcomes"]), [matrix_from_json(e) for e in doc["elements"]]


def dump(doc, path=None, **kwargs) -> str:
    """Serialize at full double precision; optionally write to ``path``."""
    text = json.dumps(doc, **kwargs)
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    return text


def _check_schema(doc) -> None:
    tag = doc.get("schema")
    if tag != SCHEMA:
        raise ValueError(f"unsupported schema tag {tag!r}, expected {SCHEMA!r}")
