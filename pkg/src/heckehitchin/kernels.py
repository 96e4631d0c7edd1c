"""Theta-kernel functions: r, omega, and the Green function with derivatives.

Conventions.  All kernels are reported as dx-coefficients in the global
hyperelliptic coordinate; conversions between "differential at P" and
"differential at z" are explicit in each signature, never implicit.  With
kappa0 the session's odd theta shift,

    r(P, z)   : differential in P, function of z, from d_P log Theta of
                A(P) - A(z) + kappa0;
    omega_kernel(P, z) = r(z, P) : differential in z with a simple pole at
                z = P (the Green kernel attached to P);
    green_G(z, w) = r(z, w) - r(z, P0) : differential in z with residues
                +1 at z = w and -1 at z = P0.

Derivatives of kernels are analytic (theta gradient/Hessian composed with
the differentials), never finite differences: the operator coefficients
downstream need second theta derivatives at an accuracy finite differences
cannot certify.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .curves import SurfacePoint
from .errors import ThetaZero
from .periods import PeriodData
from .theta import ThetaContext, log_theta_derivatives


@dataclass
class KernelContext:
    pd: PeriodData
    P0: SurfacePoint
    theta_ctx: ThetaContext = None
    kappa0: np.ndarray = None
    _pair_cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.theta_ctx is None:
            self.theta_ctx = ThetaContext(
                self.pd.tau,
                rmax=self.pd.settings.theta_rmax,
                tail_rel=self.pd.settings.theta_tail_rel,
            )
        if self.kappa0 is None:
            self.kappa0 = self.pd.kappa0
        # P0 must be generic: off the branch locus and reachable
        self.pd.y_value(self.P0)

    # -- theta data ---------------------------------------------------------

    def log_theta_at(self, arg, need_hess: bool = False):
        """(dlog, ddlog) of log Theta at arg; raises ThetaZero at the divisor."""
        th, dlog, ddlog = log_theta_derivatives(self.theta_ctx, arg)
        if dlog is None:
            raise ThetaZero(
                "theta vanished at a kernel argument; coincident or "
                "path-inconsistent points"
            )
        return dlog, ddlog

    def pair_data(self, P: SurfacePoint, z: SurfacePoint):
        """dlog/ddlog of log Theta at A(P) - A(z) + kappa0 (cached)."""
        key = (P.key(), z.key())
        if key not in self._pair_cache:
            arg = self.pd.abel(P) - self.pd.abel(z) + self.kappa0
            self._pair_cache[key] = self.log_theta_at(arg)
        return self._pair_cache[key]


def r_kernel(ctx: KernelContext, P: SurfacePoint, z: SurfacePoint,
             p_shift=None, z_shift=None) -> complex:
    """r(P, z) as the dx-coefficient at P.

    ``p_shift``/``z_shift`` add lattice vectors to A(P)/A(z); appending a
    homology cycle to the path of either point is realized this way.
    """
    if p_shift is None and z_shift is None:
        dlog, _ = ctx.pair_data(P, z)
    else:
        arg = ctx.pd.abel(P) - ctx.pd.abel(z) + ctx.kappa0
        if p_shift is not None:
            arg = arg + np.asarray(p_shift, dtype=complex)
        if z_shift is not None:
            arg = arg - np.asarray(z_shift, dtype=complex)
        dlog, _ = ctx.log_theta_at(arg)
    return complex(dlog @ ctx.pd.eval_omega_all(P))


def omega_kernel(ctx: KernelContext, P: SurfacePoint, z: SurfacePoint) -> complex:
    """omega^(P)(z) = r(z, P): differential in z, simple pole at z = P."""
    return r_kernel(ctx, z, P)


def green_G(ctx: KernelContext, z: SurfacePoint, w: SurfacePoint,
            z_shift=None) -> complex:
    """G(z, w) dz as the dx-coefficient at z; poles +1 at w, -1 at P0."""
    return r_kernel(ctx, z, w, p_shift=z_shift) - r_kernel(
        ctx, z, ctx.P0, p_shift=z_shift
    )


def d_green_G_dz(ctx: KernelContext, z: SurfacePoint, w: SurfacePoint) -> complex:
    """d/dx(z) of z -> G(z, w), analytically."""
    pd = ctx.pd
    dlog1, ddlog1 = ctx.pair_data(z, w)
    dlog2, ddlog2 = ctx.pair_data(z, ctx.P0)
    om = pd.eval_omega_all(z)
    dom = pd.eval_omega_all_dx(z)
    quad = om @ (ddlog1 - ddlog2) @ om
    lin = (dlog1 - dlog2) @ dom
    return complex(quad + lin)


def d_green_G_dw(ctx: KernelContext, z: SurfacePoint, w: SurfacePoint) -> complex:
    """d/dx(w) of w -> G(z, w), analytically."""
    pd = ctx.pd
    _, ddlog1 = ctx.pair_data(z, w)
    om_z = pd.eval_omega_all(z)
    om_w = pd.eval_omega_all(w)
    return complex(-(om_z @ ddlog1 @ om_w))


# ---------------------------------------------------------------------------
# batched per-configuration tables


class GreenTable:
    """Pairwise kernel values between marked points, computed once.

    ``r_pair[j, i] = r(P_j, P_i)`` (j != i), ``r_P0[j] = r(P_j, P0)``, and
    ``g_pair[j, i] = G(P_j, P_i) dP_j``.
    """

    def __init__(self, ctx: KernelContext, points):
        self.ctx = ctx
        self.points = tuple(points)
        n = len(self.points)
        pd = ctx.pd
        self.omega = np.column_stack(
            [pd.eval_omega_all(P) for P in self.points]
        )  # omega[a, i]
        self.omega_P0 = pd.eval_omega_all(ctx.P0)
        self.r_pair = np.zeros((n, n), dtype=complex)
        self.r_P0 = np.zeros(n, dtype=complex)
        for j, Pj in enumerate(self.points):
            self.r_P0[j] = r_kernel(ctx, Pj, ctx.P0)
            for i, Pi in enumerate(self.points):
                if i != j:
                    self.r_pair[j, i] = r_kernel(ctx, Pj, Pi)
        self.g_pair = self.r_pair - self.r_P0[:, None]
        for j in range(n):
            self.g_pair[j, j] = 0.0


class ZData:
    """Kernel values attached to one probe point z for a configuration.

    Shares one theta evaluation per (z, P_i) pair between both slot orders,
    using the parity of the theta function.
    """

    def __init__(self, ctx: KernelContext, table: GreenTable, z: SurfacePoint):
        pd = ctx.pd
        self.z = z
        pts = table.points
        n = len(pts)
        self.omega_z = pd.eval_omega_all(z)
        az = pd.abel(z)
        dlog0, _ = ctx.log_theta_at(az - pd.abel(ctx.P0) + ctx.kappa0)
        self.r_z_P0 = complex(dlog0 @ self.omega_z)
        self.r_z_Pi = np.zeros(n, dtype=complex)
        self.r_Pi_z = np.zeros(n, dtype=complex)
        self.dG_Pi_z = np.zeros(n, dtype=complex)
        for i, Pi in enumerate(pts):
            arg = az - pd.abel(Pi) + ctx.kappa0
            dlog, ddlog = ctx.log_theta_at(arg)
            om_i = table.omega[:, i]
            self.r_z_Pi[i] = dlog @ self.omega_z
            # r(P_i, z): gradient of log Theta is odd, Hessian even
            self.r_Pi_z[i] = -(dlog @ om_i)
            self.dG_Pi_z[i] = -(self.omega_z @ ddlog @ om_i)
        # G(z, P_i) dz and G(P_i, z) dP_i
        self.G_z_Pi = self.r_z_Pi - self.r_z_P0
        self.G_Pi_z = self.r_Pi_z - table.r_P0
