"""Quantized side: coefficient fields, first/second order operators in l.

The first-order field attaches to every probe point z an sl2-triple of
operators

    l_diff_x(z) = sum_i <x, mu_i(l, z)> d/dl_i - k <x, nu(l, z)>,

and the second-order field composes them through the Casimir pairing

    T_diff(z) = sum_cas l_diff_x l_diff_y + sum_cas a_x(l, z) l_diff_y + s(l, z),

with sum_cas x (x) y = e (x) f + f (x) e + h (x) h / 2.  Operator composition
runs on jets: coefficients are truncated Taylor expansions in l, so products
and the one l-derivative the composition needs are exact to the working
order.  Coefficients of d^2, d, and the scalar part are exposed per z for
Laurent probing; at level k = -2 every one of them extends holomorphically
across the marked points, which is what the component operators inherit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curves import SurfacePoint
from .errors import IllConditionedBasis, JetOrderTooLow, ZeroEll
from .hecke import HeckeConfig, den_coefficients_all, den_det
from .hitchin import SL2Vector, quadratic_basis_values, sl2_zero, _value
from .jets import Jet, jet_variables

CASIMIR_PAIRS = (("e", "f", 1.0), ("f", "e", 1.0), ("h", "h", 0.5))


# ---------------------------------------------------------------------------
# coefficient fields


class CoeffFields:
    """mu_i, nu, a, and the k-stripped scalar s at one probe point z.

    All entries are jets in l of the requested order (order 0 = plain
    values wrapped in jets).
    """

    def __init__(self, cfg: HeckeConfig, z: SurfacePoint, order: int = 1):
        zd = cfg.zdata(z)
        n = cfg.n
        seeds = jet_variables(cfg.ell, order)
        den = den_det(cfg, ell=seeds)
        dcs = den_coefficients_all(cfg, subst_z=z, ell=seeds)
        g_pair = cfg.green.g_pair
        self.z = z
        self.order = order
        self.seeds = seeds

        inv_den = 1.0 / den

        self.mu = []
        for i in range(n):
            li = seeds[i]
            gi = zd.G_z_Pi[i]
            acc = SL2Vector(gi + 0 * li, -li * gi, -(li * li) * gi)
            corr = sl2_zero(li)
            for j in range(n):
                if j == i:
                    continue
                lij = seeds[i] - seeds[j]
                w = lij * lij * g_pair[j, i]
                dc = dcs[j]
                corr = corr + SL2Vector(
                    w * (2.0 * dc.D2), w * (-0.5 * dc.D1), w * (-0.5 * dc.D0)
                )
            self.mu.append(acc + corr.scaled(inv_den))

        nu = sl2_zero(seeds[0])
        for i in range(n):
            li = seeds[i]
            gi = zd.G_z_Pi[i]
            nu = nu + SL2Vector(0 * li, -0.5 * gi + 0 * li, -li * gi)
        corr = sl2_zero(seeds[0])
        for i in range(n):
            for j in range(n):
                if j == i:
                    continue
                lji = seeds[j] - seeds[i]
                w = lji * g_pair[j, i]
                dc = dcs[j]
                corr = corr + SL2Vector(
                    w * (-2.0 * dc.D2), w * (0.5 * dc.D1), w * (0.5 * dc.D0)
                )
        self.nu = nu + corr.scaled(inv_den)

        a_vec = sl2_zero(seeds[0])
        for i in range(n):
            li = seeds[i]
            dc = dcs[i]
            gi = zd.G_Pi_z[i]
            bracket = SL2Vector(
                -dc.D1 + 4.0 * li * dc.D2,
                0.5 * dc.D0 - 2.0 * (li * li) * dc.D2,
                li * dc.D0 - (li * li) * dc.D1,
            )
            a_vec = a_vec + bracket.scaled(gi)
        self.a = a_vec.scaled(-inv_den)

        s0 = 0.0 * seeds[0]
        for i in range(n):
            li = seeds[i]
            dc = dcs[i]
            s0 = s0 + zd.dG_Pi_z[i] * (
                -0.5 * dc.D0 + li * dc.D1 - 2.0 * (li * li) * dc.D2
            )
        self.s_base = s0 * inv_den  # multiply by k for the actual s


@dataclass
class FirstOrderOp:
    """sum_i mu[i] d/dl_i + scalar, with jet coefficients."""

    mu: list
    scalar: object

    def apply(self, f: Jet) -> Jet:
        if f.order < 1:
            raise JetOrderTooLow("first-order operator needs f of order >= 1")
        out = self.scalar * f
        for i, m in enumerate(self.mu):
            out = out + m * f.partial(i)
        return out


@dataclass
class SL2Operator:
    """Pairing components of the first-order field at one probe point."""

    e: FirstOrderOp
    h: FirstOrderOp
    f: FirstOrderOp

    def component(self, x: str) -> FirstOrderOp:
        return getattr(self, x)


def ell_diff(cfg: HeckeConfig, z: SurfacePoint, k: complex,
             order: int = 1) -> SL2Operator:
    """The first-order operator triple at z, level k."""
    cfg.require_den()
    cf = CoeffFields(cfg, z, order)
    comps = {}
    for x in ("e", "h", "f"):
        comps[x] = FirstOrderOp(
            mu=[m.pairing(x) for m in cf.mu],
            scalar=(-k) * cf.nu.pairing(x),
        )
    return SL2Operator(**comps)


# ---------------------------------------------------------------------------
# the second-order field


class DiffOperator:
    """Second-order operator sum c2[i][j] d2/dl_i dl_j + sum c1[j] d/dl_j + c0.

    Coefficients are jets in l at the configuration's base point; their
    plain values are what gets probed in z.
    """

    def __init__(self, n: int, c2, c1, c0, k: complex):
        self.n = n
        self.c2 = c2
        self.c1 = c1
        self.c0 = c0
        self.k = k
        self.order = 2

    def coefficient_values(self):
        c2 = np.array([[_value(self.c2[i][j]) for j in range(self.n)]
                       for i in range(self.n)])
        c1 = np.array([_value(c) for c in self.c1])
        return c2, c1, _value(self.c0)

    def apply(self, f: Jet) -> Jet:
        if f.order < 2:
            raise JetOrderTooLow("second-order operator needs f of order >= 2")
        out = self.c0 * f
        for j in range(self.n):
            dj = f.partial(j)
            out = out + self.c1[j] * dj
            for i in range(self.n):
                out = out + self.c2[i][j] * dj.partial(i)
        return out

    def apply_value(self, f: Jet) -> complex:
        return _value(self.apply(f))


def t_diff(cfg: HeckeConfig, z: SurfacePoint, k: complex,
           order: int = 1) -> DiffOperator:
    """T_diff at z, level k, with coefficients as jets of order ``order - 1``
    (c2 one higher); ``order`` is the working order of the coefficient
    fields and must be >= 1."""
    if order < 1:
        raise JetOrderTooLow("t_diff needs coefficient jets of order >= 1")
    cfg.require_den()
    cf = CoeffFields(cfg, z, order)
    n = cfg.n
    zero = 0.0 * cf.seeds[0]
    c2 = [[zero for _ in range(n)] for _ in range(n)]
    c1 = [zero for _ in range(n)]
    c0 = k * cf.s_base

    mu = {x: [m.pairing(x) for m in cf.mu] for x in ("e", "h", "f")}
    nu = {x: cf.nu.pairing(x) for x in ("e", "h", "f")}
    a = {x: cf.a.pairing(x) for x in ("e", "h", "f")}

    for x, y, w in CASIMIR_PAIRS:
        mux, muy = mu[x], mu[y]
        nux, nuy = nu[x], nu[y]
        for i in range(n):
            for j in range(n):
                c2[i][j] = c2[i][j] + w * (mux[i] * muy[j])
        for j in range(n):
            grad_term = sum(
                (mux[i] * muy[j].partial(i) for i in range(n)),
                start=0.0 * zero.truncate(max(order - 1, 0)),
            )
            c1[j] = c1[j] + w * (
                grad_term - k * (nux * muy[j]) - k * (mux[j] * nuy)
            )
        dnu = sum(
            (mux[i] * nuy.partial(i) for i in range(n)),
            start=0.0 * zero.truncate(max(order - 1, 0)),
        )
        c0 = c0 + w * (-k * dnu + (k * k) * (nux * nuy))
        # the a-field contribution
        for j in range(n):
            c1[j] = c1[j] + w * (a[x] * muy[j])
        c0 = c0 + w * (a[x] * (-k) * nuy)

    return DiffOperator(n, c2, c1, c0, k)


def t_diff_components(cfg: HeckeConfig, zs, k: complex, order: int = 1,
                      residual_out: list | None = None) -> list:
    """Components of T_diff in the quadratic-differential basis.

    Interpolates every operator coefficient against the basis values at
    3g - 3 probe points; extra points in ``zs`` certify the expansion.
    """
    m = 3 * cfg.genus - 3
    if len(zs) < m:
        raise ValueError(f"need at least {m} probe points")
    B = np.array([quadratic_basis_values(cfg, z) for z in zs[:m]])
    if np.linalg.cond(B) > cfg.pd.settings.basis_cond_max:
        raise IllConditionedBasis(
            "sample matrix for the quadratic basis is ill conditioned"
        )
    ops = [t_diff(cfg, z, k, order) for z in zs[:m]]
    weights = np.linalg.inv(B)
    n = cfg.n
    comps = []
    for al in range(m):
        c2 = [
            [
                sum(weights[al, q] * ops[q].c2[i][j] for q in range(m))
                for j in range(n)
            ]
            for i in range(n)
        ]
        c1 = [sum(weights[al, q] * ops[q].c1[j] for q in range(m))
              for j in range(n)]
        c0 = sum(weights[al, q] * ops[q].c0 for q in range(m))
        comps.append(DiffOperator(n, c2, c1, c0, k))
    if len(zs) > m and residual_out is not None:
        worst = 0.0
        for z in zs[m:]:
            b = quadratic_basis_values(cfg, z)
            direct = t_diff(cfg, z, k, order=1)
            d2, d1, d0 = direct.coefficient_values()
            p2 = sum(b[al] * comps[al].coefficient_values()[0] for al in range(m))
            p1 = sum(b[al] * comps[al].coefficient_values()[1] for al in range(m))
            p0 = sum(b[al] * comps[al].coefficient_values()[2] for al in range(m))
            scale = max(np.max(np.abs(d2)), np.max(np.abs(d1)), abs(d0), 1e-300)
            worst = max(
                worst,
                float(np.max(np.abs(p2 - d2)) / scale),
                float(np.max(np.abs(p1 - d1)) / scale),
                float(abs(p0 - d0) / scale),
            )
        residual_out.append(worst)
    return comps


def t_diff_alpha(cfg: HeckeConfig, zs, k: complex = -2.0, order: int = 1,
                 residual_out: list | None = None) -> list:
    """Alias used at critical level (k = -2) where the components are a
    commuting family."""
    return t_diff_components(cfg, zs, k, order, residual_out)


# ---------------------------------------------------------------------------
# commutators


def monomial_jet(exponents, values, order: int = 4) -> Jet:
    seeds = jet_variables(values, order)
    out = Jet.constant(1.0, len(values), order)
    for i, e in enumerate(exponents):
        for _ in range(e):
            out = out * seeds[i]
    return out


def default_test_monomials(n: int) -> list:
    """Monomials in l of total degree <= 2 (at least six of them)."""
    exps = [tuple(0 for _ in range(n))]
    exps += [tuple(1 if j == i else 0 for j in range(n)) for i in range(min(n, 3))]
    exps += [tuple(2 if j == i else 0 for j in range(n)) for i in range(min(n, 2))]
    exps += [tuple(1 if j in (0, 1) else 0 for j in range(n))]
    return exps


def commutator_check(cfg: HeckeConfig, op_a: DiffOperator, op_b: DiffOperator,
                     test_exponents, ell_point=None) -> float:
    """Normalized residual of [T_a, T_b] on polynomial test functions.

    The composition evaluates the inner result as an order-2 jet, which
    requires order-4 test jets and order-2 coefficient jets.
    """
    ell0 = cfg.ell if ell_point is None else ell_point
    worst = 0.0
    for exps in test_exponents:
        f = monomial_jet(exps, ell0, order=4)
        ab = op_a.apply_value(op_b.apply(f))
        ba = op_b.apply_value(op_a.apply(f))
        norm = abs(ab) + abs(ba) + 1e-12
        worst = max(worst, abs(ab - ba) / norm)
    return worst


# ---------------------------------------------------------------------------
# the point-variation operator


@dataclass
class LambdaOperator:
    """First-order operator in l with shifted derivatives plus an sl2 part.

    Acts on scalar test functions as
        sum_j coeff[j] (d/dl_j - k / l_j) + scalar
    while ``sl2_part`` multiplies the function as a placeholder for the
    representation slot of downstream pairings.
    """

    index: int
    k: complex
    coeff: list
    scalar: object
    sl2_part: SL2Vector

    def apply_scalar(self, f: Jet, ell_values) -> tuple:
        out = self.scalar * f
        for j, c in enumerate(self.coeff):
            out = out + c * (f.partial(j) - (self.k / ell_values[j]) * f)
        return out, self.sl2_part.map(lambda c: c * f)


def lambda_operator(cfg: HeckeConfig, i: int, k: complex,
                    order: int = 1) -> LambdaOperator:
    """Assembly of the variation operator attached to moving the i-th point.

    Construction only: downstream identities need conformal-block data that
    is out of scope, so the guarantees here are finiteness and rationality
    of the coefficients (smoke-tested), not variational correctness.
    """
    cfg.require_den()
    if np.min(np.abs(cfg.ell)) < 1e-12:
        raise ZeroEll("lambda operator needs all l_j nonzero")
    n = cfg.n
    seeds = jet_variables(cfg.ell, order)
    den = den_det(cfg, ell=seeds)
    inv_den = 1.0 / den
    r = cfg.green.r_pair  # r[j, i] = r(P_j, P_i)

    # D0 of row m with P_m -> P_i, jet-valued
    dcs = den_coefficients_all(cfg, subst_z=cfg.points[i], ell=seeds)
    d0_to_i = [dcs[m].D0 for m in range(n)]

    li = seeds[i]
    coeff = [0.0 * seeds[0] for _ in range(n)]
    for j in range(n):
        if j != i:
            # r(P_i, P_j) l_{ji} l_j / l_i
            coeff[j] = coeff[j] + r[i, j] * (seeds[j] - seeds[i]) * seeds[j] / li
        acc = 0.0 * seeds[0]
        for l in range(n):
            if l == j:
                continue
            ljl = seeds[j] - seeds[l]
            acc = acc + r[l, j] * (ljl * ljl) * d0_to_i[l]
        coeff[j] = coeff[j] - inv_den * acc / li

    scalar = 0.0 * seeds[0]
    for j in range(n):
        for l in range(n):
            if l == j:
                continue
            scalar = scalar - k * inv_den * (
                (seeds[j] * seeds[j]) / (li * seeds[l])
            ) * r[j, l] * d0_to_i[j]

    sl2 = SL2Vector(k / li, Jet.constant(-0.5 * k, n, order), 0.0 * seeds[0])
    for j in range(n):
        w = -k * inv_den * (seeds[j] / li) * d0_to_i[j]
        sl2 = sl2 + SL2Vector(w / seeds[j], -w, -w * seeds[j])
    return LambdaOperator(index=i, k=k, coeff=coeff, scalar=scalar,
                          sl2_part=sl2)
