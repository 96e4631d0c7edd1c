"""Period matrix, normalized differentials, Abel map, and the theta shift.

All periods are contour integrals of the raw differentials x^b dx / y over
the validated homology contours, with the sheet transported from the curve's
base point along explicit connectors.  The normalization matrix N makes
int_{A_a} omega_b = 2 pi i delta_ab, and tau_{ab} = int_{B_a} omega_b comes
out symmetric with Re(tau) negative definite; both facts are enforced at
construction (a per-row B-orientation repair handles the sign ambiguity of
the crossing convention, after which failure raises SingularPeriods).

The Abel map of a point (x, sheet) integrates the normalized differentials
along the straight segment from the base point, prefixed (for sheet -1) by a
fixed loop around the first branch point; its value is deterministic for the
lifetime of a PeriodData, which is what makes every theta argument in a
session monodromy-consistent.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT, Settings
from .curves import (CurveSpec, Homology, LegAnchors, SurfacePoint,
                     atlas_continuation, build_homology, segment,
                     straight_path_clearance, _seg_point_distance)
from .errors import (PathThroughBranchPoint, SingularPeriods,
                     UnsupportedConfiguration)
from .quadrature import Leg, circle, integrate_legs, polyline
from .theta import ThetaContext, odd_half_periods, theta_all


# ---------------------------------------------------------------------------
# low-level integration of the raw differentials


def _raw_integrals(spec: CurveSpec, legs, y_start: complex, tol: float,
                   max_depth: int, check_closed: bool | None = None):
    """Integrals of x^b dx / y (b = 0..g-1) along legs, sheet-transported.

    Returns (vector, y_end).
    """
    g = spec.genus
    anchors = []
    y = complex(y_start)
    for leg in legs:
        la = LegAnchors(spec, leg, y)
        anchors.append(la)
        y = la.y_end
    if check_closed:
        if abs(y - y_start) > 1e-8 * max(abs(y_start), 1e-300):
            raise SingularPeriods(
                "contour did not close up on the surface "
                f"(|y_end - y_start| = {abs(y - y_start):.3e})"
            )

    def make_fn(leg, la):
        def fn(t):
            x = leg.point(t)
            yv = la.y(t)
            powers = np.array([x ** b for b in range(g)], dtype=complex)
            return powers / yv * leg.velocity(t)
        return fn

    fns = [make_fn(leg, la) for leg, la in zip(legs, anchors)]
    vec = integrate_legs(fns, tol=tol, max_depth=max_depth)
    return np.asarray(vec, dtype=complex), y


def _transport(spec: CurveSpec, legs, y_start: complex) -> complex:
    y = complex(y_start)
    for leg in legs:
        y = LegAnchors(spec, leg, y).y_end
    return y


# ---------------------------------------------------------------------------
# period data


@dataclass
class PeriodData:
    curve: CurveSpec
    settings: Settings
    homology: Homology
    a_periods: np.ndarray      # raw: a_periods[c, b] = int_{A_c} x^b dx / y
    b_periods: np.ndarray      # raw, after orientation repair
    normalization: np.ndarray  # omega_a = sum_b N[a, b] x^b dx / y
    tau: np.ndarray
    base_point: SurfacePoint
    kappa0: np.ndarray
    kappa0_char: tuple
    flip_shift: np.ndarray     # Abel increment of the sheet-flip loop
    _abel_cache: dict = field(default_factory=dict, repr=False)
    _y_cache: dict = field(default_factory=dict, repr=False)

    # -- sheet bookkeeping --------------------------------------------------

    @property
    def genus(self) -> int:
        return self.curve.genus

    def y_value(self, P: SurfacePoint) -> complex:
        """y at P under the straight-segment atlas convention."""
        if P.x not in self._y_cache:
            self._y_cache[P.x] = atlas_continuation(
                self.curve, self.homology.base_x, self.homology.base_y, P.x
            )
        return P.sheet * self._y_cache[P.x]

    # -- differentials -------------------------------------------------------

    def eval_omega_all(self, P: SurfacePoint) -> np.ndarray:
        """dx-coefficients of all normalized differentials at P."""
        y = self.y_value(P)
        powers = np.array([P.x ** b for b in range(self.genus)], dtype=complex)
        return self.normalization @ (powers / y)

    def eval_omega(self, a: int, P: SurfacePoint) -> complex:
        return complex(self.eval_omega_all(P)[a])

    def eval_omega_all_dx(self, P: SurfacePoint) -> np.ndarray:
        """d/dx of the omega coefficients at P (same sheet)."""
        y = self.y_value(P)
        dy = self.curve.dfpoly(P.x) / (2.0 * y)
        g = self.genus
        vals = np.array(
            [
                (b * P.x ** (b - 1) if b > 0 else 0.0) / y
                - P.x ** b * dy / (y * y)
                for b in range(g)
            ],
            dtype=complex,
        )
        return self.normalization @ vals

    # -- Abel map -------------------------------------------------------------

    def abel(self, P: SurfacePoint, waypoints=()) -> np.ndarray:
        """Abel map along the session path atlas (straight segment + optional
        caller waypoints); component a is int omega_a from the base point."""
        key = (P.x, P.sheet, tuple(complex(w) for w in waypoints))
        if key in self._abel_cache:
            return self._abel_cache[key]
        base = self.homology.base_x
        pts = [base, *[complex(w) for w in waypoints], P.x]
        for a, b in zip(pts[:-1], pts[1:]):
            clear = straight_path_clearance(self.curve, a, b)
            if clear < DEFAULT.branch_clearance * self.curve.scale:
                raise PathThroughBranchPoint(
                    f"abel path segment {a:.4g} -> {b:.4g} passes within "
                    f"{clear:.3e} of a branch point"
                )
        legs = polyline(pts)
        raw, y_end = _raw_integrals(
            self.curve, legs, self.homology.base_y,
            self.settings.quad_tol, self.settings.quad_max_depth,
        )
        value = self.normalization @ raw
        if P.sheet == -1:
            value = self.flip_shift - value
        self._abel_cache[key] = value
        return value

    def abel_with_cycle(self, P: SurfacePoint, kind: str, index: int,
                        repeat: int = 1) -> np.ndarray:
        """Abel value with ``repeat`` copies of a homology cycle appended."""
        return self.abel(P) + repeat * self.cycle_shift(kind, index)

    def cycle_shift(self, kind: str, index: int) -> np.ndarray:
        g = self.genus
        if kind == "A":
            return 2j * np.pi * np.eye(g)[index]
        if kind == "B":
            return self.tau[index].copy()
        raise ValueError("cycle kind must be 'A' or 'B'")

    def reduce_mod_lattice(self, v) -> np.ndarray:
        """Reduce v modulo (2 pi i) Z^g + tau Z^g."""
        v = np.asarray(v, dtype=complex)
        g = self.genus
        q = np.linalg.solve(self.tau.real, v.real)
        p = (v.imag - self.tau.imag @ q) / (2 * np.pi)
        return v - 2j * np.pi * np.round(p) - self.tau @ np.round(q)


# ---------------------------------------------------------------------------
# construction


def _cycle_start_y(spec, hom, cyc, tol, max_depth):
    start = cyc.start_point()
    return _transport(spec, polyline([hom.base_x, start]), hom.base_y)


def _integrate_cycle(spec, hom, cyc, tol, max_depth):
    y0 = _cycle_start_y(spec, hom, cyc, tol, max_depth)
    vec, _ = _raw_integrals(spec, [cyc.leg()], y0, tol, max_depth,
                            check_closed=True)
    return vec


def _flip_loop_legs(spec: CurveSpec, hom: Homology):
    """Closed polyline from the base point winding once around the first
    branch point (sorted order), which swaps the sheet at the base point."""
    e0 = hom.sorted_points[0]
    others = [e for e in spec.branch_points if e != e0]
    r = 0.45 * min(abs(e0 - e) for e in others)
    best = None
    for k in range(8):
        q0 = e0 + r * np.exp(2j * np.pi * k / 8)
        clear = min(
            _seg_point_distance(hom.base_x, q0, e) for e in others
        )
        if best is None or clear > best[0]:
            best = (clear, q0, k)
    _, q0, k0 = best
    ring = [e0 + r * np.exp(2j * np.pi * (k0 + j) / 8) for j in range(9)]
    pts = [hom.base_x, q0, *ring[1:], hom.base_x]
    return polyline(pts)


def period_matrix(spec: CurveSpec, settings: Settings | None = None,
                  theta_rmax: int | None = None) -> PeriodData:
    """Compute PeriodData for a curve, validating every invariant."""
    settings = settings or DEFAULT
    if theta_rmax is not None:
        settings = Settings(**{**settings.to_dict(), "theta_rmax": theta_rmax})
    hom = build_homology(spec)
    g = spec.genus
    tol, depth = settings.quad_tol, settings.quad_max_depth

    raw_a = np.zeros((g, g), dtype=complex)
    raw_b = np.zeros((g, g), dtype=complex)
    for a in range(g):
        raw_a[a] = _integrate_cycle(spec, hom, hom.a_cycles[a], tol, depth)
        raw_b[a] = _integrate_cycle(spec, hom, hom.b_cycles[a], tol, depth)

    cond_a = np.linalg.cond(raw_a)
    if cond_a > settings.periods_cond_max:
        raise SingularPeriods(
            f"A-period matrix condition number {cond_a:.3e} too large"
        )
    # omega_a = sum_b N[a,b] x^b dx/y with int_{A_c} omega_a = 2 pi i delta
    N = 2j * np.pi * np.linalg.inv(raw_a.T)

    # per-row B orientation repair: pick the sign pattern that symmetrizes tau
    best = None
    for signs in itertools.product((1, -1), repeat=g):
        rb = raw_b * np.array(signs, dtype=float)[:, None]
        tau = rb @ N.T
        asym = float(np.max(np.abs(tau - tau.T)))
        if best is None or asym < best[0]:
            best = (asym, signs, tau, rb)
    asym, signs, tau, raw_b = best
    tau_scale = max(1.0, float(np.max(np.abs(tau))))
    if asym > 1e-9 * tau_scale:
        raise SingularPeriods(
            f"period matrix not symmetric (asymmetry {asym:.3e}); "
            "homology construction failed for this curve"
        )
    tau = 0.5 * (tau + tau.T)
    signs = np.array(signs, dtype=float)
    eig = np.linalg.eigvalsh(0.5 * (tau.real + tau.real.T))
    if eig.max() >= 0:
        if eig.min() > 0:
            tau = -tau
            raw_b = -raw_b
            signs = -signs
        else:
            raise SingularPeriods(
                "Re(tau) is indefinite; homology construction failed"
            )
    for a, s in enumerate(signs):
        if s < 0:
            hom.b_cycles[a].orientation = -hom.b_cycles[a].orientation

    base_point = SurfacePoint(hom.base_x, +1)

    flip_legs = _flip_loop_legs(spec, hom)
    flip_raw, y_after = _raw_integrals(spec, flip_legs, hom.base_y, tol, depth)
    if abs(y_after + hom.base_y) > 1e-8 * abs(hom.base_y):
        raise SingularPeriods("sheet-flip loop failed to swap the sheet")
    flip_shift = N @ flip_raw

    pd = PeriodData(
        curve=spec, settings=settings, homology=hom,
        a_periods=raw_a, b_periods=raw_b, normalization=N, tau=tau,
        base_point=base_point, kappa0=np.zeros(g, dtype=complex),
        kappa0_char=((), ()), flip_shift=flip_shift,
    )
    char, kappa0 = select_kappa0(pd)
    pd.kappa0 = kappa0
    pd.kappa0_char = char
    return pd


# ---------------------------------------------------------------------------
# theta shift selection


def _winding_of_theta_zero(pd: PeriodData, tctx: ThetaContext, kappa,
                           P: SurfacePoint, radius: float,
                           nsamples: int = 48) -> int:
    """Argument-principle count of zeros of z -> Theta(A(z)-A(P)+kappa) on a
    circle of the given radius around P (same sheet)."""
    spec = pd.curve
    start_x = P.x + radius
    a0 = pd.abel(SurfacePoint(start_x, P.sheet))
    leg = circle(P.x, radius)
    la = LegAnchors(spec, leg, pd.y_value(SurfacePoint(start_x, +1)))
    aP = pd.abel(P)
    g = spec.genus
    # cumulative integrals of the normalized differentials along the circle,
    # on the +1 continuation; sheet -1 flips the increment sign
    from numpy.polynomial.legendre import leggauss
    nodes, weights = leggauss(8)
    values = []
    acc = np.zeros(g, dtype=complex)
    sheet_fix = 1.0 if P.sheet == +1 else -1.0
    for k in range(nsamples):
        t0, t1 = k / nsamples, (k + 1) / nsamples
        arg = a0 + sheet_fix * acc - aP + kappa
        th = theta_all(tctx, arg)[0]
        values.append(th)
        mid, half = 0.5 * (t0 + t1), 0.5 * (t1 - t0)
        inc = np.zeros(g, dtype=complex)
        for nd, w in zip(nodes, weights):
            t = mid + half * nd
            x = leg.point(t)
            yv = la.y(t)
            powers = np.array([x ** b for b in range(g)], dtype=complex)
            inc += w * (powers / yv) * leg.velocity(t)
        acc += half * inc @ pd.normalization.T
    mags = np.abs(np.array(values))
    if mags.min() < 1e-8 * mags.max():
        raise SingularPeriods("theta nearly vanished on the probe circle")
    values.append(values[0])
    winding = 0.0
    for v0, v1 in zip(values[:-1], values[1:]):
        winding += np.angle(v1 / v0)
    return int(round(winding / (2 * np.pi)))


def _probe_points(pd: PeriodData, count: int, seed: int = 20240) -> list:
    spec = pd.curve
    rng = np.random.default_rng(seed)
    pts_cloud = np.array(spec.branch_points)
    lo, hi = pts_cloud.real.min(), pts_cloud.real.max()
    im_lo, im_hi = pts_cloud.imag.min(), pts_cloud.imag.max()
    span = max(hi - lo, 1.0)
    out = []
    tries = 0
    while len(out) < count and tries < 4000:
        tries += 1
        x = complex(
            rng.uniform(lo - 0.3 * span, hi + 0.3 * span),
            rng.uniform(im_lo - 0.6 * span, im_hi + 0.6 * span),
        )
        if spec.min_branch_distance(x) < 0.1 * spec.scale:
            continue
        if straight_path_clearance(spec, pd.homology.base_x, x) < \
                0.05 * spec.scale:
            continue
        sheet = +1 if rng.integers(0, 2) == 0 else -1
        out.append(SurfacePoint(x, sheet))
    if len(out) < count:
        raise UnsupportedConfiguration("could not sample probe points")
    return out


def select_kappa0(pd: PeriodData, nprobe: int = 5, skip: int = 0):
    """First odd half-period (fixed enumeration order) whose shifted theta
    vanishes simply exactly at z = P, argument-principle checked at nprobe
    points.  ``skip`` > 0 returns a later valid choice (used for the
    choice-independence checks)."""
    tctx = ThetaContext(pd.tau, rmax=pd.settings.theta_rmax,
                        tail_rel=pd.settings.theta_tail_rel)
    probes = _probe_points(pd, nprobe)
    found = 0
    for char, kappa in odd_half_periods(pd.tau):
        ok = True
        for P in probes:
            radius = min(
                0.3 * pd.curve.min_branch_distance(P.x), 0.03 * pd.curve.scale
            )
            try:
                w = _winding_of_theta_zero(pd, tctx, kappa, P, radius)
            except Exception:
                ok = False
                break
            if w != 1:
                ok = False
                break
        if ok:
            if found == skip:
                return char, kappa
            found += 1
    raise SingularPeriods(
        "no odd half-period passed the simple-zero probe"
    )
