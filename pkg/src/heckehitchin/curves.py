"""Hyperelliptic curve model: branch points, cuts, homology contours, sheets.

The curve is y^2 = prod_j (x - e_j) with 2g+1 or 2g+2 distinct branch
points.  Version-1 layout: branch points are sorted by (Re, Im) and paired
consecutively into cuts; an odd count sends the last cut to infinity along
the +Re ray.  A-cycle a is an ellipse around cut a; B-cycle a is an ellipse
around branch points e_{2a} .. e_{2g+1}, crossing cuts a and g+1 exactly
once each.  Both facts are validated by explicit winding/crossing counts,
and every contour is checked to close up on the surface.

Sheets: the label of a point (x, sheet) refers to analytic continuation of
sqrt(prod(x - e_j)) from the curve's reference point along the straight
segment to x; ``sheet = +1`` is the continued branch, ``-1`` its negative.
Paths that pass too close to a branch point are rejected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT
from .errors import (NoConvergence, PathThroughBranchPoint,
                     UnsupportedConfiguration)
from .quadrature import Leg, segment


# ---------------------------------------------------------------------------
# curve and points


@dataclass(frozen=True)
class CurveSpec:
    """y^2 = prod(x - e_j); 2g+1 or 2g+2 distinct branch points."""

    branch_points: tuple

    def __post_init__(self):
        pts = tuple(complex(e) for e in self.branch_points)
        object.__setattr__(self, "branch_points", pts)
        if len(pts) < 3:
            raise ValueError("need at least 3 branch points (genus >= 1)")
        scale = self.scale
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                if abs(pts[i] - pts[j]) <= 1e-10 * scale:
                    raise ValueError(
                        f"branch points {i} and {j} coincide within 1e-10*scale"
                    )

    @property
    def genus(self) -> int:
        return (len(self.branch_points) - 1) // 2

    @property
    def scale(self) -> float:
        pts = self.branch_points
        return max(
            (abs(p - q) for p in pts for q in pts), default=1.0
        ) or 1.0

    def fpoly(self, x: complex) -> complex:
        out = 1.0 + 0.0j
        for e in self.branch_points:
            out *= x - e
        return out

    def dfpoly(self, x: complex) -> complex:
        """d/dx of prod(x - e_j)."""
        total = 0.0 + 0.0j
        for skip in range(len(self.branch_points)):
            term = 1.0 + 0.0j
            for j, e in enumerate(self.branch_points):
                if j != skip:
                    term *= x - e
            total += term
        return total

    def min_branch_distance(self, x: complex) -> float:
        return min(abs(x - e) for e in self.branch_points)


@dataclass(frozen=True)
class SurfacePoint:
    """Point on the double cover: x-coordinate plus a sheet label."""

    x: complex
    sheet: int = +1
    at_infinity: bool = False

    def __post_init__(self):
        object.__setattr__(self, "x", complex(self.x))
        if self.sheet not in (+1, -1):
            raise ValueError("sheet must be +1 or -1")
        if self.at_infinity:
            raise ValueError("points at infinity are not supported in v1")

    def key(self):
        return (self.x, self.sheet)

    def swap(self) -> "SurfacePoint":
        return SurfacePoint(self.x, -self.sheet)


# ---------------------------------------------------------------------------
# plane geometry helpers


def _seg_point_distance(a: complex, b: complex, p: complex) -> float:
    ab = b - a
    denom = abs(ab) ** 2
    if denom == 0.0:
        return abs(p - a)
    t = ((p - a) * ab.conjugate()).real / denom
    t = min(1.0, max(0.0, t))
    return abs(p - (a + t * ab))


def _segments_cross(a: complex, b: complex, c: complex, d: complex) -> bool:
    def orient(p, q, r):
        return ((q - p).conjugate() * (r - p)).imag

    d1, d2 = orient(a, b, c), orient(a, b, d)
    d3, d4 = orient(c, d, a), orient(c, d, b)
    return (d1 * d2 < 0) and (d3 * d4 < 0)


class EllipseContour:
    """Axis-frame ellipse used as an A/B contour."""

    def __init__(self, center: complex, u_dir: complex, semi_major: float,
                 semi_minor: float):
        self.center = complex(center)
        self.u_dir = complex(u_dir) / abs(u_dir)
        self.a = float(semi_major)
        self.b = float(semi_minor)

    def frame(self, p: complex):
        w = (complex(p) - self.center) / self.u_dir
        return w.real, w.imag

    def level(self, p: complex) -> float:
        xi, eta = self.frame(p)
        return (xi / self.a) ** 2 + (eta / self.b) ** 2

    def contains(self, p: complex, margin: float = 0.0) -> bool:
        return self.level(p) < 1.0 - margin

    def excludes(self, p: complex, margin: float = 0.0) -> bool:
        return self.level(p) > 1.0 + margin

    def segment_crossings(self, p: complex, q: complex) -> int:
        """Number of boundary crossings of the open segment (p, q)."""
        xi0, eta0 = self.frame(p)
        xi1, eta1 = self.frame(q)
        dxi, deta = xi1 - xi0, eta1 - eta0
        A = (dxi / self.a) ** 2 + (deta / self.b) ** 2
        B = 2 * (xi0 * dxi / self.a ** 2 + eta0 * deta / self.b ** 2)
        C = (xi0 / self.a) ** 2 + (eta0 / self.b) ** 2 - 1.0
        if A == 0.0:
            return 0
        disc = B * B - 4 * A * C
        if disc <= 0:
            return 0
        r = math.sqrt(disc)
        count = 0
        for s in ((-B - r) / (2 * A), (-B + r) / (2 * A)):
            if 1e-12 < s < 1.0 - 1e-12:
                count += 1
        return count

    def ray_crossings(self, start: complex, direction: complex,
                      reach: float) -> int:
        return self.segment_crossings(start, start + direction * reach)

    def point(self, t: float, orientation: int = +1, t0: float = 0.0) -> complex:
        w = 2 * np.pi * (orientation * t + t0)
        return self.center + self.u_dir * (
            self.a * np.cos(w) + 1j * self.b * np.sin(w)
        )

    def leg(self, orientation: int = +1, t0: float = 0.0) -> Leg:
        def pt(t, e=self, o=orientation, t0=t0):
            return e.point(t, o, t0)

        def vel(t, e=self, o=orientation, t0=t0):
            w = 2 * np.pi * (o * t + t0)
            return e.u_dir * 2 * np.pi * o * (
                -e.a * np.sin(w) + 1j * e.b * np.cos(w)
            )

        return Leg(pt, vel)


# ---------------------------------------------------------------------------
# cut layout


def cut_layout(spec: CurveSpec):
    """Sorted branch points, finite cuts, and the infinite ray (odd count).

    Returns ``(pts, cuts, ray)`` where ``cuts`` is a list of (p, q) pairs and
    ``ray`` is ``None`` or ``(start, direction)``.
    """
    pts = sorted(spec.branch_points, key=lambda z: (z.real, z.imag))
    cuts = []
    n = len(pts)
    for k in range(0, n - 1, 2):
        cuts.append((pts[k], pts[k + 1]))
    ray = None
    if n % 2 == 1:
        ray = (pts[-1], 1.0 + 0.0j)
    scale = spec.scale
    for i in range(len(cuts)):
        for j in range(i + 1, len(cuts)):
            if _segments_cross(*cuts[i], *cuts[j]):
                raise UnsupportedConfiguration(
                    f"cuts {i} and {j} cross; curve needs a different layout"
                )
    if ray is not None:
        far = ray[0] + ray[1] * 50.0 * scale
        for i, (p, q) in enumerate(cuts[:-1] if n % 2 == 0 else cuts):
            if (p, q) == (None, None):
                continue
            if _segments_cross(ray[0] + 1e-9 * scale, far, p, q):
                raise UnsupportedConfiguration(
                    f"infinite cut ray crosses finite cut {i}"
                )
    return pts, cuts, ray


def _fit_ellipse(covered, excluded, scale):
    """Smallest-comfortable ellipse containing ``covered``, excluding
    ``excluded``; None when no margin works."""
    first, last = covered[0], covered[-1]
    chord = last - first
    if abs(chord) < 1e-12 * scale:
        chord = scale + 0j
    center = 0.5 * (first + last)
    u_dir = chord / abs(chord)
    xis, etas = [], []
    for p in covered:
        w = (p - center) / u_dir
        xis.append(abs(w.real))
        etas.append(abs(w.imag))
    a0, b0 = max(xis), max(etas)
    gap = min(
        (min(_seg_point_distance(p, q, e) for p, q in zip(covered[:-1], covered[1:]))
         if len(covered) > 1 else abs(e - covered[0]))
        for e in excluded
    ) if excluded else scale
    if gap < 1e-5 * scale:
        return None
    for frac in (0.45, 0.35, 0.25, 0.15, 0.08, 0.04):
        m = frac * gap
        ell = EllipseContour(center, u_dir, a0 + m, max(b0 + m, 0.5 * m))
        if all(ell.contains(p, margin=1e-9) for p in covered) and all(
            ell.excludes(p, margin=1e-9) for p in excluded
        ):
            return ell
    return None


@dataclass
class Cycle:
    kind: str
    index: int
    contour: EllipseContour
    orientation: int = +1
    t0: float = 0.0

    def leg(self) -> Leg:
        return self.contour.leg(self.orientation, self.t0)

    def start_point(self) -> complex:
        return self.contour.point(0.0, self.orientation, self.t0)

    def flipped(self) -> "Cycle":
        return Cycle(self.kind, self.index, self.contour,
                     -self.orientation, self.t0)


@dataclass
class Homology:
    spec: CurveSpec
    sorted_points: list
    cuts: list
    ray: object
    a_cycles: list
    b_cycles: list
    base_x: complex
    base_y: complex


def _choose_base_point(spec: CurveSpec, pts) -> complex:
    centroid = sum(pts) / len(pts)
    radius = 1.4 * max(abs(p - centroid) for p in pts) + 0.6 * spec.scale
    best, best_score = None, -1.0
    for k in range(16):
        theta = 2 * np.pi * (k + 0.37) / 16
        cand = centroid + radius * np.exp(1j * theta)
        score = min(abs(cand - e) for e in pts)
        if score > best_score:
            best, best_score = cand, score
    return best


def _choose_start(spec: CurveSpec, base_x: complex, cyc: Cycle) -> float:
    best_t0, best_clear = 0.0, -1.0
    for k in range(8):
        t0 = k / 8.0
        start = cyc.contour.point(0.0, cyc.orientation, t0)
        clear = min(
            _seg_point_distance(base_x, start, e) for e in spec.branch_points
        )
        if clear > best_clear:
            best_t0, best_clear = t0, clear
    if best_clear < DEFAULT.branch_clearance * spec.scale:
        raise UnsupportedConfiguration(
            "no connector from the base point clears the branch points"
        )
    return best_t0


def build_homology(spec: CurveSpec) -> Homology:
    """A/B contours with validated winding and crossing pattern."""
    pts, cuts, ray = cut_layout(spec)
    g = spec.genus
    scale = spec.scale
    reach = 50.0 * scale

    a_cycles = []
    for a in range(g):
        p, q = cuts[a]
        covered = [p, q]
        excluded = [e for e in pts if e not in covered]
        ell = _fit_ellipse(covered, excluded, scale)
        if ell is None:
            raise UnsupportedConfiguration(
                f"cannot isolate cut {a} with an elliptic contour"
            )
        a_cycles.append(Cycle("A", a, ell))

    b_cycles = []
    for a in range(g):
        covered = pts[2 * a + 1 : 2 * g + 1]
        excluded = [e for e in pts if e not in covered]
        ell = _fit_ellipse(covered, excluded, scale)
        if ell is None:
            raise UnsupportedConfiguration(
                f"cannot build B-contour {a} around cuts {a}..{g}"
            )
        b_cycles.append(Cycle("B", a, ell))

    # winding/crossing validation of the homology pattern
    for a, cyc in enumerate(a_cycles):
        ell = cyc.contour
        for j, e in enumerate(pts):
            want = j in (2 * a, 2 * a + 1)
            if ell.contains(e) != want:
                raise UnsupportedConfiguration(
                    f"A-contour {a} winds incorrectly around branch point {j}"
                )
        for i, (p, q) in enumerate(cuts):
            if ell.segment_crossings(p, q) != 0:
                raise UnsupportedConfiguration(
                    f"A-contour {a} crosses cut {i}"
                )
        if ray is not None and ell.ray_crossings(*ray, reach) != 0:
            raise UnsupportedConfiguration(
                f"A-contour {a} crosses the infinite cut"
            )

    for a, cyc in enumerate(b_cycles):
        ell = cyc.contour
        for j, e in enumerate(pts):
            want = 2 * a + 1 <= j <= 2 * g
            if ell.contains(e) != want:
                raise UnsupportedConfiguration(
                    f"B-contour {a} winds incorrectly around branch point {j}"
                )
        crossings = [ell.segment_crossings(p, q) for p, q in cuts]
        want = [0] * len(cuts)
        want[a] = 1
        if len(pts) % 2 == 0:
            want[g] = 1
        if crossings != want:
            raise UnsupportedConfiguration(
                f"B-contour {a} crossing pattern {crossings} != {want}"
            )
        if ray is not None and ell.ray_crossings(*ray, reach) != 1:
            raise UnsupportedConfiguration(
                f"B-contour {a} must cross the infinite cut exactly once"
            )

    base_x = _choose_base_point(spec, pts)
    base_y = np.sqrt(complex(spec.fpoly(base_x)))
    for cyc in a_cycles + b_cycles:
        cyc.t0 = _choose_start(spec, base_x, cyc)
    return Homology(spec, pts, cuts, ray, a_cycles, b_cycles, base_x, base_y)


# ---------------------------------------------------------------------------
# sheet continuation


def _sqrt_match(spec: CurveSpec, x: complex, y_ref: complex) -> complex:
    y = np.sqrt(complex(spec.fpoly(x)))
    return y if abs(y - y_ref) <= abs(y + y_ref) else -y


def _continue_between(spec, x0, y0, x1, depth=0, f0=None):
    """Continue y along the straight segment x0 -> x1 starting from y0.

    A step is accepted only while f = y^2 changes by less than half its
    magnitude, in which case the principal square root of f1/f0 tracks the
    branch exactly (the argument moves by under 30 degrees); the result is
    then snapped to +-sqrt(f1) to avoid multiplicative drift.
    """
    if f0 is None:
        f0 = complex(spec.fpoly(x0))
    f1 = complex(spec.fpoly(x1))
    if abs(f1 - f0) <= 0.5 * min(abs(f0), abs(f1)):
        y1 = y0 * np.sqrt(f1 / f0)
        ex = np.sqrt(f1)
        return ex if abs(ex - y1) <= abs(ex + y1) else -ex
    if depth >= 60:
        raise NoConvergence(
            "sheet continuation did not resolve; path too close to a branch point"
        )
    xm = 0.5 * (x0 + x1)
    ym = _continue_between(spec, x0, y0, xm, depth + 1, f0)
    return _continue_between(spec, xm, ym, x1, depth + 1)


def continue_y(spec: CurveSpec, xs, y0: complex) -> complex:
    """Continue y along the polyline xs (xs[0] carries the value y0)."""
    y = complex(y0)
    for a, b in zip(xs[:-1], xs[1:]):
        y = _continue_between(spec, complex(a), y, complex(b))
    return y


class LegAnchors:
    """Dense y-samples along a Leg so y(t) can be read off anywhere."""

    def __init__(self, spec: CurveSpec, leg: Leg, y_start: complex,
                 n0: int = 64, nmax: int = 8192):
        self.spec = spec
        self.leg = leg
        n = n0
        while True:
            ts = np.linspace(0.0, 1.0, n + 1)
            xs = [leg.point(t) for t in ts]
            ys = [complex(y_start)]
            ok = True
            for a, b in zip(xs[:-1], xs[1:]):
                ynext = _continue_between(spec, a, ys[-1], complex(b))
                if abs(ynext - ys[-1]) > 0.5 * max(abs(ynext), abs(ys[-1])):
                    ok = False
                    break
                ys.append(ynext)
            if ok:
                self.ts = ts
                self.ys = np.array(ys)
                self.n = n
                return
            n *= 2
            if n > nmax:
                raise NoConvergence(
                    "could not anchor sheet continuation along contour"
                )

    @property
    def y_end(self) -> complex:
        return complex(self.ys[-1])

    def y(self, t: float) -> complex:
        idx = int(round(t * self.n))
        idx = min(max(idx, 0), self.n)
        return _sqrt_match(self.spec, self.leg.point(t), self.ys[idx])


def straight_path_clearance(spec: CurveSpec, a: complex, b: complex) -> float:
    return min(_seg_point_distance(a, b, e) for e in spec.branch_points)


def atlas_continuation(spec: CurveSpec, base_x: complex, base_y: complex,
                       x: complex) -> complex:
    """Sheet-defining continuation along the straight segment base -> x."""
    clearance = straight_path_clearance(spec, base_x, x)
    if clearance < DEFAULT.branch_clearance * spec.scale:
        raise PathThroughBranchPoint(
            f"straight path to {x:.6g} passes within {clearance:.3e} of a "
            "branch point; move the point or give a waypoint"
        )
    return _continue_between(spec, base_x, base_y, x)
