"""Complex dense linear algebra helpers: determinants and numerical kernels.

``det_lu`` accepts either a plain complex matrix (delegated to LAPACK's
LU-based determinant) or a matrix of :class:`~heckehitchin.jets.Jet` entries,
for which a generic LU with partial pivoting on the constant term is run in
pure Python.  Row-swap signs are tracked exactly in both paths.
"""

from __future__ import annotations

import numpy as np

from .config import DEFAULT
from .errors import DivisionByZeroJet
from .jets import Jet


def _is_jet_matrix(m) -> bool:
    if isinstance(m, np.ndarray) and m.dtype == object:
        return True
    return isinstance(m, (list, tuple)) and any(
        isinstance(x, Jet) for row in m for x in row
    )


def det_lu(m):
    """Determinant via LU with partial pivoting; 0 for singular input."""
    if _is_jet_matrix(m):
        return _det_lu_generic([list(row) for row in m])
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("det_lu needs a square matrix")
    return complex(np.linalg.det(a))


def det_lu_stack(ms: np.ndarray) -> np.ndarray:
    """Batched determinants of a (..., n, n) stack of complex matrices."""
    return np.linalg.det(np.asarray(ms, dtype=complex))


def _mag(x) -> float:
    return abs(x.value) if isinstance(x, Jet) else abs(x)


def _det_lu_generic(a) -> Jet | complex:
    n = len(a)
    sign = 1.0
    for col in range(n):
        piv = max(range(col, n), key=lambda r: _mag(a[r][col]))
        if _mag(a[piv][col]) == 0.0:
            return 0.0
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            sign = -sign
        try:
            pivot = a[col][col]
            for r in range(col + 1, n):
                factor = a[r][col] / pivot
                for c in range(col + 1, n):
                    a[r][c] = a[r][c] - factor * a[col][c]
        except DivisionByZeroJet:
            return 0.0
    det = sign
    for i in range(n):
        det = a[i][i] * det
    return det


def kernel_basis(m, tol: float | None = None):
    """Orthonormal numerical null-space basis and the smallest singular value.

    Singular values below ``tol * sigma_max`` count as zero (``tol`` defaults
    to the configured rank threshold).  Returns ``(basis, sigma_min)`` where
    ``basis`` is a list of complex vectors.
    """
    if tol is None:
        tol = DEFAULT.rank_rtol
    a = np.asarray(m, dtype=complex)
    rows, cols = a.shape
    u, s, vh = np.linalg.svd(a, full_matrices=True)
    smax = s[0] if s.size else 0.0
    cutoff = tol * smax
    nsmall = int(np.sum(s < cutoff)) if smax > 0 else len(s)
    rank = len(s) - nsmall
    basis = [vh[i].conj() for i in range(rank, cols)]
    sigma_min = float(s[-1]) if s.size else 0.0
    return basis, sigma_min


def kernel_dim(m, tol: float | None = None) -> int:
    basis, _ = kernel_basis(m, tol)
    return len(basis)


def solve(a, b):
    return np.linalg.solve(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def cond(a) -> float:
    return float(np.linalg.cond(np.asarray(a, dtype=complex)))
