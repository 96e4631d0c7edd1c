"""Den determinant, stability/rigidity linear systems, point variation.

The 3g x 3g matrix M has rows indexed by the marked points and columns by
pairs (a, alpha), a = 1..g outer, alpha = 0,1,2 inner ascending:

    M[i, 3(a-1)+alpha] = omega_a(P_i) * l_i^alpha.

``den_det`` is det M; ``den_sum`` is the ordered-triple permutation sum over
S_{3g} (brute force, g <= 2).  With this column order the two agree up to
the frozen global sign (-1)^g, calibrated at genus 1 where the determinant
reduces to a single Vandermonde block; only ratios of Den-derived
quantities enter every downstream formula, so the sign never leaks into
results, but it is pinned for reproducibility.

Coefficient extraction: Den is quadratic in each l_j, Den = D0 + D1 l_j +
D2 l_j^2, and D_beta is det M with row j replaced by the pattern that puts
omega_a at column (a, beta) and zero elsewhere; the optional "P_j -> z"
substitution evaluates that row's omegas at z instead.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .curves import SurfacePoint
from .errors import ConstraintViolated, DenZero, ZeroEll
from .jets import Jet
from .kernels import GreenTable, KernelContext
from .linalg import det_lu, kernel_basis


def det_vs_sum_sign(genus: int) -> int:
    """Frozen sign with den_det = sign * den_sum for the fixed column order."""
    return -1 if genus % 2 else +1


@dataclass
class HeckeConfig:
    """3g marked points with lines l_i, over a fixed curve and P0."""

    kctx: KernelContext
    points: tuple
    ell: np.ndarray
    _green: GreenTable = field(default=None, repr=False)

    def __post_init__(self):
        pd = self.kctx.pd
        n = 3 * pd.genus
        self.points = tuple(self.points)
        if len(self.points) != n:
            raise ValueError(f"need 3g = {n} points, got {len(self.points)}")
        self.ell = np.asarray(self.ell, dtype=complex)
        if self.ell.shape != (n,):
            raise ValueError(f"need {n} line coordinates")
        if np.any(np.abs(self.ell) < 1e-12):
            raise ZeroEll("all l_i must be finite and nonzero")
        keys = [P.key() for P in self.points] + [self.kctx.P0.key()]
        if len(set(keys)) != len(keys):
            raise ValueError("marked points must be pairwise distinct and != P0")
        self.n = n
        self.genus = pd.genus
        # omega[a, i] and pair table are l-independent and cached up front
        self._green = GreenTable(self.kctx, self.points)
        self._zdata = {}
        self.den_value = den_det(self)
        self.den_nonzero = abs(self.den_value) > self.den_scale() * \
            self.kctx.pd.settings.den_zero_rtol

    @property
    def pd(self):
        return self.kctx.pd

    @property
    def green(self) -> GreenTable:
        return self._green

    def omega_matrix(self) -> np.ndarray:
        """W[a, i] = omega_a(P_i)."""
        return self._green.omega

    def den_scale(self) -> float:
        """Magnitude scale of the Den expansion terms (for zero tests)."""
        w = np.abs(self._green.omega)
        lmax = max(1.0, float(np.max(np.abs(self.ell))))
        return float(np.prod(w.max(axis=0)) * (2.0 * lmax) ** self.n) or 1.0

    def require_den(self):
        if not self.den_nonzero:
            raise DenZero(
                f"|Den| = {abs(self.den_value):.3e} below threshold; "
                "configuration is on the degenerate locus"
            )

    def zdata(self, z: SurfacePoint):
        """Per-probe-point kernel bundle, cached (l-independent)."""
        key = z.key()
        if key not in self._zdata:
            from .kernels import ZData
            self._zdata[key] = ZData(self.kctx, self._green, z)
        return self._zdata[key]

    def with_ell(self, ell) -> "HeckeConfig":
        """Same points and kernels, different line coordinates."""
        cfg = object.__new__(HeckeConfig)
        cfg.kctx = self.kctx
        cfg.points = self.points
        cfg.ell = np.asarray(ell, dtype=complex)
        if np.any(np.abs(cfg.ell) < 1e-12):
            raise ZeroEll("all l_i must be finite and nonzero")
        cfg.n = self.n
        cfg.genus = self.genus
        cfg._green = self._green
        cfg._zdata = self._zdata
        cfg.den_value = den_det(cfg)
        cfg.den_nonzero = abs(cfg.den_value) > cfg.den_scale() * \
            cfg.kctx.pd.settings.den_zero_rtol
        return cfg


# ---------------------------------------------------------------------------
# Den in both forms


def den_matrix(cfg: HeckeConfig, ell=None):
    """M as a numpy array (complex l) or nested list (jet-valued l)."""
    ells = cfg.ell if ell is None else ell
    W = cfg.omega_matrix()
    n, g = cfg.n, cfg.genus
    if any(isinstance(l, Jet) for l in ells):
        rows = []
        for i in range(n):
            li = ells[i]
            pows = [1.0, li, li * li]
            rows.append([W[a, i] * pows[al] for a in range(g) for al in range(3)])
        return rows
    ells = np.asarray(ells, dtype=complex)
    pows = np.stack([np.ones(n, dtype=complex), ells, ells * ells], axis=1)
    m = np.empty((n, n), dtype=complex)
    for a in range(g):
        m[:, 3 * a : 3 * a + 3] = W[a][:, None] * pows
    return m


def den_det(cfg: HeckeConfig, ell=None):
    """det M(P, l); jet-valued when l is passed as jets."""
    return det_lu(den_matrix(cfg, ell))


def den_sum(cfg: HeckeConfig) -> complex:
    """Ordered-triple permutation sum (brute force oracle, g <= 2)."""
    if cfg.genus > 2:
        raise ValueError("den_sum is a desk-scale oracle for g <= 2 only")
    W = cfg.omega_matrix()
    ell = cfg.ell
    n, g = cfg.n, cfg.genus
    total = 0.0 + 0.0j
    for perm in itertools.permutations(range(n)):
        if any(
            not (perm[3 * a] < perm[3 * a + 1] < perm[3 * a + 2])
            for a in range(g)
        ):
            continue
        term = _perm_sign(perm) + 0.0j
        for a in range(g):
            i, j, k = perm[3 * a], perm[3 * a + 1], perm[3 * a + 2]
            term *= W[a, i] * W[a, j] * W[a, k]
            term *= (ell[i] - ell[j]) * (ell[i] - ell[k]) * (ell[j] - ell[k])
        total += term
    return total


def _perm_sign(perm) -> int:
    inv = 0
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                inv += 1
    return -1 if inv % 2 else 1


@dataclass(frozen=True)
class DenCoefficients:
    """Den = D0 + D1 l_j + D2 l_j^2 as a polynomial in the j-th line."""

    j: int
    D0: object
    D1: object
    D2: object
    subst: object = None

    def at(self, lj):
        return self.D0 + self.D1 * lj + self.D2 * lj * lj


def _replaced_row(cfg: HeckeConfig, beta: int, omega_vals):
    g = cfg.genus
    row = [0.0 + 0.0j] * (3 * g)
    for a in range(g):
        row[3 * a + beta] = omega_vals[a]
    return row


def den_coefficients(cfg: HeckeConfig, j: int, subst_z: SurfacePoint | None = None,
                     ell=None) -> DenCoefficients:
    """D0, D1, D2 for row j, optionally with P_j replaced by subst_z.

    When ``ell`` carries jets the three determinants are jet-valued.
    """
    if subst_z is None:
        omega_vals = cfg.omega_matrix()[:, j]
    else:
        omega_vals = cfg.pd.eval_omega_all(subst_z)
    base = den_matrix(cfg, ell)
    jet_mode = not isinstance(base, np.ndarray)
    out = []
    for beta in range(3):
        row = _replaced_row(cfg, beta, omega_vals)
        if jet_mode:
            m = [list(r) for r in base]
            m[j] = row
            out.append(det_lu(m))
        else:
            m = base.copy()
            m[j, :] = row
            out.append(det_lu(m))
    return DenCoefficients(j=j, D0=out[0], D1=out[1], D2=out[2], subst=subst_z)


def den_coefficients_all(cfg: HeckeConfig, subst_z: SurfacePoint | None = None,
                         ell=None) -> list:
    """DenCoefficients for every row (shared subst point), batched."""
    base = den_matrix(cfg, ell)
    jet_mode = not isinstance(base, np.ndarray)
    if subst_z is None:
        omega_cols = [cfg.omega_matrix()[:, j] for j in range(cfg.n)]
    else:
        ov = cfg.pd.eval_omega_all(subst_z)
        omega_cols = [ov] * cfg.n
    out = []
    if jet_mode:
        for j in range(cfg.n):
            coeffs = []
            for beta in range(3):
                m = [list(r) for r in base]
                m[j] = _replaced_row(cfg, beta, omega_cols[j])
                coeffs.append(det_lu(m))
            out.append(DenCoefficients(j, *coeffs, subst=subst_z))
    else:
        stack = np.empty((cfg.n, 3, cfg.n, cfg.n), dtype=complex)
        for j in range(cfg.n):
            for beta in range(3):
                m = base.copy()
                m[j, :] = _replaced_row(cfg, beta, omega_cols[j])
                stack[j, beta] = m
        dets = np.linalg.det(stack.reshape(-1, cfg.n, cfg.n)).reshape(cfg.n, 3)
        for j in range(cfg.n):
            out.append(DenCoefficients(j, *map(complex, dets[j]), subst=subst_z))
    return out


# ---------------------------------------------------------------------------
# stability and rigidity


@dataclass(frozen=True)
class KernelReport:
    kernel_dim: int
    smallest_singular_value: float


def moment_matrix(ell, genus: int) -> np.ndarray:
    """Rows l_i^alpha, alpha = 0,1,2 (the moment-map constraint matrix)."""
    ell = np.asarray(ell, dtype=complex)
    return np.stack([np.ones_like(ell), ell, ell * ell])


def stability_matrix(cfg: HeckeConfig) -> np.ndarray:
    """(6g) x (3g+3) system in (lambda_i, C_e, C_h, C_f).

    Upper block: sum_i lambda_i l_i^alpha omega_a(P_i) = 0.  Lower block:
    sum_{j != i} lambda_j l_ij^2 r(P_j, P_i) + C_f - 2 l_i C_h - l_i^2 C_e = 0.
    Trivial kernel certifies that the modified bundle has no traceless
    endomorphisms, hence is stable.
    """
    n, g = cfg.n, cfg.genus
    W = cfg.omega_matrix()
    ell = cfg.ell
    r = cfg.green.r_pair
    m = np.zeros((2 * n, n + 3), dtype=complex)
    row = 0
    for a in range(g):
        for alpha in range(3):
            m[row, :n] = W[a] * ell ** alpha
            row += 1
    for i in range(n):
        for j in range(n):
            if j != i:
                m[row, j] = (ell[i] - ell[j]) ** 2 * r[j, i]
        m[row, n + 0] = -ell[i] ** 2   # C_e
        m[row, n + 1] = -2 * ell[i]    # C_h
        m[row, n + 2] = 1.0            # C_f
        row += 1
    return m


def stability_check(cfg: HeckeConfig) -> KernelReport:
    basis, smin = kernel_basis(stability_matrix(cfg))
    return KernelReport(kernel_dim=len(basis), smallest_singular_value=smin)


def fiber_rigidity(cfg: HeckeConfig) -> KernelReport:
    """Kernel of the 3g x 3g system with rows omega_a(P_i) l_i^alpha.

    This is the first-order rigidity system for the fiber through cfg; its
    kernel is trivial exactly when Den does not vanish.
    """
    basis, smin = kernel_basis(den_matrix(cfg).T)
    return KernelReport(kernel_dim=len(basis), smallest_singular_value=smin)


# ---------------------------------------------------------------------------
# variation of the marked points


@dataclass(frozen=True)
class VariationResult:
    alpha1: np.ndarray
    beta1: np.ndarray
    delta_ell: np.ndarray


def bundle_variation(cfg: HeckeConfig, delta_p) -> VariationResult:
    """First-order response of the line coordinates to moving the points.

    ``delta_p`` are x-displacements of the P_i constrained by
    sum_i omega_a(P_i) delta_p_i = 0 for every a (an admissible direction of
    the point divisor); violations raise ConstraintViolated.
    """
    cfg.require_den()
    delta_p = np.asarray(delta_p, dtype=complex)
    W = cfg.omega_matrix()
    scale = float(np.max(np.abs(W)) * np.max(np.abs(delta_p)) + 1e-300)
    res = np.max(np.abs(W @ delta_p))
    if res > 1e-9 * scale:
        raise ConstraintViolated(
            f"delta_p violates the divisor constraint (residual {res:.3e}); "
            "project it first"
        )
    n = cfg.n
    ell = cfg.ell
    den = cfg.den_value
    r = cfg.green.r_pair

    # D0 of row i with P_i -> P_j, for all (i, j)
    d0 = np.zeros((n, n), dtype=complex)
    for j in range(n):
        coeffs = den_coefficients_all(cfg, subst_z=cfg.points[j])
        for i in range(n):
            d0[i, j] = coeffs[i].D0

    alpha1 = np.zeros(n, dtype=complex)
    for i in range(n):
        alpha1[i] = -np.sum(ell[i] / ell * delta_p * d0[i]) / den
    beta1 = -(alpha1 + delta_p) / ell
    delta_ell = np.zeros(n, dtype=complex)
    for i in range(n):
        for j in range(n):
            if j != i:
                delta_ell[i] += r[j, i] * (ell[i] - ell[j]) * (
                    alpha1[j] + ell[i] * beta1[j]
                )
    return VariationResult(alpha1=alpha1, beta1=beta1, delta_ell=delta_ell)


def variation_residuals(cfg: HeckeConfig, delta_p, var: VariationResult) -> float:
    """Max residual of the three constraint families the variation solves."""
    W = cfg.omega_matrix()
    ell = cfg.ell
    delta_p = np.asarray(delta_p, dtype=complex)
    r1 = W @ var.alpha1
    r2 = W @ (ell * var.alpha1)
    r3 = W @ ((var.alpha1 + delta_p) / ell)
    scale = float(
        np.max(np.abs(W)) * (np.max(np.abs(var.alpha1)) + np.max(np.abs(delta_p)))
    ) + 1e-300
    return float(max(np.max(np.abs(r1)), np.max(np.abs(r2)),
                     np.max(np.abs(r3))) / scale)
