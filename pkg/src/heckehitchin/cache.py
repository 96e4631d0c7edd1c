"""Persistent cache for computed period data.

The cache file is a JSON object keyed by a content hash of the curve spec and
the quadrature/theta settings; complex numbers are stored as [re, im] pairs
and floats serialize through repr, so a round trip is bit-identical on all
numeric fields.  Writes go through a temp file plus atomic replace, guarded
by an advisory lock file (single writer).
"""

from __future__ import annotations

import hashlib
import json
import os

import numpy as np

from .config import Settings
from .curves import CurveSpec, SurfacePoint, build_homology
from .errors import HashMismatch
from .periods import PeriodData

SCHEMA = 1


def _c2pair(z: complex):
    return [float(z.real), float(z.imag)]


def _pair2c(p) -> complex:
    return complex(p[0], p[1])


def _matrix_out(m: np.ndarray):
    return [[_c2pair(z) for z in row] for row in np.atleast_2d(m)]


def _matrix_in(rows) -> np.ndarray:
    return np.array([[_pair2c(p) for p in row] for row in rows], dtype=complex)


def _vector_out(v: np.ndarray):
    return [_c2pair(z) for z in np.atleast_1d(v)]


def _vector_in(items) -> np.ndarray:
    return np.array([_pair2c(p) for p in items], dtype=complex)


def content_hash(spec: CurveSpec, settings: Settings) -> str:
    payload = {
        "branch_points": [_c2pair(e) for e in spec.branch_points],
        "settings": settings.to_dict(),
    }
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def cache_store(pd: PeriodData, path: str) -> None:
    doc = {
        "schema": SCHEMA,
        "spec": {"branch_points": [_c2pair(e) for e in pd.curve.branch_points]},
        "settings": pd.settings.to_dict(),
        "a_periods": _matrix_out(pd.a_periods),
        "b_periods": _matrix_out(pd.b_periods),
        "normalization": _matrix_out(pd.normalization),
        "tau": _matrix_out(pd.tau),
        "kappa0": _vector_out(pd.kappa0),
        "kappa0_char": [list(pd.kappa0_char[0]), list(pd.kappa0_char[1])],
        "flip_shift": _vector_out(pd.flip_shift),
        "base_point": _c2pair(pd.base_point.x),
        "b_orientations": [c.orientation for c in pd.homology.b_cycles],
        "hash": content_hash(pd.curve, pd.settings),
    }
    lock = path + ".lock"
    fd = None
    try:
        fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        tmp = path + ".tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, sort_keys=True)
        os.replace(tmp, path)
    finally:
        if fd is not None:
            os.close(fd)
            os.unlink(lock)


def cache_load(spec: CurveSpec, settings: Settings, path: str) -> PeriodData:
    """Load a PeriodData cached for exactly this spec and settings."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    want = content_hash(spec, settings)
    if doc.get("hash") != want:
        raise HashMismatch(
            f"cache at {path} was built for a different curve or settings"
        )
    hom = build_homology(spec)
    for cyc, orient in zip(hom.b_cycles, doc["b_orientations"]):
        cyc.orientation = orient
    base = _pair2c(doc["base_point"])
    if abs(base - hom.base_x) > 1e-12 * spec.scale:
        raise HashMismatch("cached base point does not match reconstruction")
    return PeriodData(
        curve=spec,
        settings=settings,
        homology=hom,
        a_periods=_matrix_in(doc["a_periods"]),
        b_periods=_matrix_in(doc["b_periods"]),
        normalization=_matrix_in(doc["normalization"]),
        tau=_matrix_in(doc["tau"]),
        base_point=SurfacePoint(base, +1),
        kappa0=_vector_in(doc["kappa0"]),
        kappa0_char=(tuple(doc["kappa0_char"][0]), tuple(doc["kappa0_char"][1])),
        flip_shift=_vector_in(doc["flip_shift"]),
    )
