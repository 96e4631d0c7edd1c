"""Classical side: Higgs field in Hecke coordinates, Hamiltonians, brackets.

The phase space is the zero level of the moment map on T*(CP^1)^{3g},

    sum_i lam_i = sum_i lam_i l_i = sum_i lam_i l_i^2 = 0,

with the unimodular group acting by l -> (a l + b)/(c l + d),
lam -> lam/(c l + d)^2.  The Higgs field A(l, lam | z) is an sl2-valued
differential assembled from the Green kernels and the Den row-replacement
coefficients; H(z) = tr rho(A)^2 = 2 A_h^2 + 2 A_e A_f is a holomorphic
quadratic differential whose components in the basis x^j (dx)^2 / y^2 are
the commuting Hamiltonians.

Everything here evaluates with either complex numbers or jets in (l, lam),
which is how Poisson brackets are taken: one order-1 jet evaluation in the
6g phase variables per observable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import DEFAULT
from .curves import SurfacePoint
from .errors import DegenerateConstraints, IllConditionedBasis, PoleHit
from .hecke import HeckeConfig, den_coefficients_all, den_det, moment_matrix
from .jets import Jet, jet_variables
from .kernels import ZData
from .linalg import kernel_basis


@dataclass(frozen=True)
class PhasePoint:
    """(l, lam) on the zero moment level; constraints checked on creation."""

    ell: np.ndarray
    lam: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "ell", np.asarray(self.ell, dtype=complex))
        object.__setattr__(self, "lam", np.asarray(self.lam, dtype=complex))
        mm = moment_matrix(self.ell, len(self.ell) // 3)
        res = np.max(np.abs(mm @ self.lam))
        scale = float(np.max(np.abs(mm) @ np.abs(self.lam)) + 1e-300)
        if res > 1e-10 * scale:
            raise DegenerateConstraints(
                f"moment constraints violated (residual {res:.3e})"
            )


class SL2Vector:
    """e/h/f components of an sl2-valued quantity (complex or jet valued).

    The invariant pairing is <e,f> = 1, <h,h> = 2, so the pairing component
    against e is the f-component, against f the e-component, and against h
    twice the h-component; tr rho(x)^2 = 2 x_h^2 + 2 x_e x_f.
    """

    __slots__ = ("e", "h", "f")

    def __init__(self, e, h, f):
        self.e, self.h, self.f = e, h, f

    def __add__(self, other):
        return SL2Vector(self.e + other.e, self.h + other.h, self.f + other.f)

    def __sub__(self, other):
        return SL2Vector(self.e - other.e, self.h - other.h, self.f - other.f)

    def scaled(self, c):
        return SL2Vector(c * self.e, c * self.h, c * self.f)

    def trace_sq(self):
        return 2 * self.h * self.h + 2 * self.e * self.f

    def pairing(self, x: str):
        if x == "e":
            return self.f
        if x == "f":
            return self.e
        if x == "h":
            return 2 * self.h
        raise ValueError("pairing component must be 'e', 'h' or 'f'")

    def map(self, fn):
        return SL2Vector(fn(self.e), fn(self.h), fn(self.f))


def sl2_zero(like=0.0):
    return SL2Vector(like * 0.0, like * 0.0, like * 0.0)


# ---------------------------------------------------------------------------
# sampling the constraint surface


def sample_phase_point(cfg: HeckeConfig, rng: np.random.Generator) -> PhasePoint:
    """Draw lam from the kernel of the moment-constraint matrix."""
    g = cfg.genus
    basis, _ = kernel_basis(moment_matrix(cfg.ell, g))
    if len(basis) != 3 * g - 3:
        raise DegenerateConstraints(
            f"moment matrix kernel has dimension {len(basis)} != {3 * g - 3}"
        )
    coeff = rng.standard_normal(len(basis)) + 1j * rng.standard_normal(len(basis))
    lam = sum(c * v for c, v in zip(coeff, basis))
    return PhasePoint(ell=cfg.ell, lam=lam)


# ---------------------------------------------------------------------------
# the Higgs field and H


def higgs_A(cfg: HeckeConfig, lam, z: SurfacePoint, zdata: ZData | None = None,
            ell=None) -> SL2Vector:
    """A(l, lam | z) as an SL2Vector of dx-coefficients.

    ``lam``/``ell`` may be jet-valued; ``zdata`` lets callers share the
    theta work per probe point across evaluations.
    """
    cfg.require_den()
    zd = zdata or cfg.zdata(z)
    ells = cfg.ell if ell is None else ell
    den = cfg.den_value if ell is None else den_det(cfg, ell)
    n = cfg.n
    r_pair = cfg.green.r_pair

    acc = sl2_zero(lam[0])
    for i in range(n):
        li = ells[i]
        w = lam[i] * zd.r_z_Pi[i]
        acc = acc + SL2Vector(-w, li * w, li * li * w)

    dcs = den_coefficients_all(cfg, subst_z=z, ell=ell)
    reg = sl2_zero(lam[0])
    for i in range(n):
        for j in range(n):
            if j == i:
                continue
            lij = ells[i] - ells[j]
            w = lam[i] * lij * lij * r_pair[j, i]
            dc = dcs[j]
            reg = reg + SL2Vector(
                w * dc.D2, w * (0.5 * dc.D1), w * (-dc.D0)
            )
    return acc + reg.scaled(1.0 / den)


def higgs_A_regular_part(cfg: HeckeConfig, lam, z: SurfacePoint,
                         zdata: ZData | None = None) -> SL2Vector:
    """The Den-normalized second sum of A alone (holomorphic in z)."""
    cfg.require_den()
    n = cfg.n
    ells = cfg.ell
    dcs = den_coefficients_all(cfg, subst_z=z)
    reg = sl2_zero(lam[0])
    for i in range(n):
        for j in range(n):
            if j == i:
                continue
            lij = ells[i] - ells[j]
            w = lam[i] * lij * lij * cfg.green.r_pair[j, i]
            dc = dcs[j]
            reg = reg + SL2Vector(w * dc.D2, w * (0.5 * dc.D1), w * (-dc.D0))
    return reg.scaled(1.0 / cfg.den_value)


def hitchin_H(cfg: HeckeConfig, lam, z: SurfacePoint,
              zdata: ZData | None = None, ell=None):
    """H(l, lam | z) = tr rho(A)^2, as a (dx)^2-coefficient."""
    return higgs_A(cfg, lam, z, zdata=zdata, ell=ell).trace_sq()


def hitchin_H_alt(cfg: HeckeConfig, lam, z: SurfacePoint,
                  zdata: ZData | None = None):
    """The second expression for H: the row-replacement determinants
    nu_{kj}(z) replace one of the Green sums.

    Derivation note.  With V_j = -e + l_j h + l_j^2 f and B_k the bracket of
    the regular part, tr rho(V_j B_k) = nu_{kj}(z) and tr rho(V_i V_j) =
    -l_ij^2, which forces the cross term to carry weight 2/Den and the
    product-of-kernels term weight -1; those weights make this expression
    equal tr rho(A)^2 to round-off.
    """
    cfg.require_den()
    zd = zdata or cfg.zdata(z)
    n = cfg.n
    ell = cfg.ell
    den = cfg.den_value
    r_pair = cfg.green.r_pair
    dcs = den_coefficients_all(cfg, subst_z=z)

    total = higgs_A_regular_part(cfg, lam, z, zdata=zd).trace_sq()

    mid = 0.0 + 0.0j
    for k in range(n):
        nu_k = dcs[k]
        for i in range(n):
            if k == i:
                continue
            lki2 = (ell[k] - ell[i]) ** 2
            w = lam[i] * lki2 * r_pair[k, i]
            for j in range(n):
                mid += w * lam[j] * nu_k.at(ell[j]) * zd.r_z_Pi[j]
    total = total + 2.0 * mid / den

    tail = 0.0 + 0.0j
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            lij2 = (ell[i] - ell[j]) ** 2
            tail += lam[i] * lam[j] * lij2 * zd.r_z_Pi[i] * zd.r_z_Pi[j]
    return total - tail


# ---------------------------------------------------------------------------
# Hamiltonian extraction


def quadratic_basis_values(cfg: HeckeConfig, z: SurfacePoint) -> np.ndarray:
    """Values of the quadratic differentials x^j (dx)^2 / y^2, j = 0..3g-4."""
    if cfg.genus != 2:
        raise IllConditionedBasis(
            "quadratic-differential basis is provided for genus 2 only"
        )
    fx = cfg.pd.curve.fpoly(z.x)
    return np.array([z.x ** j / fx for j in range(3 * cfg.genus - 3)],
                    dtype=complex)


def extract_hamiltonians(cfg: HeckeConfig, lam, zs, ell=None,
                         residual_out: list | None = None):
    """Components H_alpha of H(z) in the quadratic-differential basis.

    ``zs`` must hold at least 3g-3 generic points plus held-out points; the
    square system is solved on the first 3g-3 and the rest certify the
    expansion (relative residual appended to ``residual_out``).
    """
    m = 3 * cfg.genus - 3
    if len(zs) < m:
        raise ValueError(f"need at least {m} probe points")
    B = np.array([quadratic_basis_values(cfg, z) for z in zs[:m]])
    if np.linalg.cond(B) > cfg.pd.settings.basis_cond_max:
        raise IllConditionedBasis(
            "sample matrix for the quadratic basis is ill conditioned; "
            "resample the probe points"
        )
    hvals = [hitchin_H(cfg, lam, z, ell=ell) for z in zs[:m]]
    weights = np.linalg.inv(B)  # H_alpha = sum_m weights[alpha, m] h(z_m)
    hams = [sum(weights[al, k] * hvals[k] for k in range(m)) for al in range(m)]
    if len(zs) > m and residual_out is not None:
        worst = 0.0
        for z in zs[m:]:
            b = quadratic_basis_values(cfg, z)
            pred = sum(_value(h) * b[al] for al, h in enumerate(hams))
            have = _value(hitchin_H(cfg, lam, z, ell=ell))
            scale = max(abs(have), abs(pred), 1e-300)
            worst = max(worst, abs(pred - have) / scale)
        residual_out.append(worst)
    return hams


def _value(x):
    return x.value if isinstance(x, Jet) else complex(x)


# ---------------------------------------------------------------------------
# group action and Poisson structure


def sl2_action(gmat, pp: PhasePoint) -> PhasePoint:
    """(l, lam) -> ((a l + b)/(c l + d), lam (c l + d)^2) for unimodular g.

    This is the cotangent lift of the Moebius action (dl' = dl/(c l + d)^2,
    so covectors pick up the square); it is the unique lift that preserves
    the moment constraints, which the transformed point re-checks.
    """
    (a, b), (c, d) = gmat
    denom = c * pp.ell + d
    if np.min(np.abs(denom)) < 1e-12:
        raise PoleHit("Moebius map sends an l_i to infinity")
    return PhasePoint(ell=(a * pp.ell + b) / denom, lam=pp.lam * denom ** 2)


def phase_jets(pp: PhasePoint):
    """Order-1 jets in the 6g phase variables, l first then lam."""
    n = len(pp.ell)
    seeds = jet_variables(list(pp.ell) + list(pp.lam), order=1)
    return seeds[:n], seeds[n:]


def poisson_bracket(cfg: HeckeConfig, F, G, pp: PhasePoint) -> complex:
    """{F, G} with the convention {lam_i, l_j} = delta_ij.

    ``F`` and ``G`` are callables (ell_jets, lam_jets) -> order-1 jet.
    """
    ell_j, lam_j = phase_jets(pp)
    jf, jg = F(ell_j, lam_j), G(ell_j, lam_j)
    n = len(pp.ell)
    gf, gg = jf.gradient(), jg.gradient()
    return complex(sum(gf[n + i] * gg[i] - gf[i] * gg[n + i] for i in range(n)))


def hamiltonian_jets(cfg: HeckeConfig, pp: PhasePoint, zs) -> list:
    """Order-1 jets of all Hamiltonians at pp (one evaluation pass)."""
    ell_j, lam_j = phase_jets(pp)
    return extract_hamiltonians(cfg, lam_j, zs, ell=ell_j)


def bracket_from_jets(jf: Jet, jg: Jet, n: int) -> complex:
    """{F, G} from two order-1 phase jets ({lam_i, l_j} = delta_ij)."""
    gf, gg = jf.gradient(), jg.gradient()
    return complex(sum(gf[n + i] * gg[i] - gf[i] * gg[n + i] for i in range(n)))


def gradient_norm(jf: Jet) -> float:
    return float(np.max(np.abs(jf.gradient())) + 1e-300)


def hamiltonian_observables(cfg: HeckeConfig, zs):
    """The 3g-3 Hamiltonians as jet-capable observables of (l, lam)."""
    def make(alpha):
        def obs(ell_jets, lam_jets):
            return extract_hamiltonians(cfg, lam_jets, zs, ell=ell_jets)[alpha]
        return obs

    return [make(alpha) for alpha in range(3 * cfg.genus - 3)]


def moment_observables(cfg: HeckeConfig):
    """The three moment-map components as jet observables."""
    def make(alpha):
        def obs(ell_jets, lam_jets):
            total = lam_jets[0] * ell_jets[0] ** alpha
            for lj, ej in zip(lam_jets[1:], ell_jets[1:]):
                total = total + lj * ej ** alpha
            return total
        return obs

    return [make(alpha) for alpha in range(3)]
