"""Adaptive Gauss-Legendre quadrature along piecewise-smooth contours.

A contour is a list of legs; each leg maps the parameter interval [0, 1] to
the complex plane together with its derivative.  The engine compares an
embedded low-order rule against the high-order one on each panel and bisects
until the estimated error meets the budgeted tolerance.  Integrands may be
scalar- or vector-valued (error measured in the max norm).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import DEFAULT
from .errors import NoConvergence

_NODES_HI, _WEIGHTS_HI = np.polynomial.legendre.leggauss(15)
_NODES_LO, _WEIGHTS_LO = np.polynomial.legendre.leggauss(7)


@dataclass(frozen=True)
class Leg:
    """One smooth piece of a contour: t in [0,1] -> point(t), with velocity."""

    point: callable
    velocity: callable

    def length_estimate(self, n: int = 33) -> float:
        ts = np.linspace(0.0, 1.0, n)
        return float(np.sum(np.abs([self.velocity(t) for t in ts])) / n)


def segment(a: complex, b: complex) -> Leg:
    a, b = complex(a), complex(b)
    return Leg(lambda t, a=a, b=b: a + (b - a) * t, lambda t, a=a, b=b: b - a)


def polyline(points) -> list[Leg]:
    pts = [complex(p) for p in points]
    return [segment(p, q) for p, q in zip(pts[:-1], pts[1:])]


def circle(center: complex, radius: float, orientation: int = +1) -> Leg:
    c, r, s = complex(center), float(radius), float(orientation)

    def pt(t):
        return c + r * np.exp(2j * np.pi * s * t)

    def vel(t):
        return 2j * np.pi * s * r * np.exp(2j * np.pi * s * t)

    return Leg(pt, vel)


def ellipse(center: complex, axis_u: complex, axis_v: complex,
            orientation: int = +1) -> Leg:
    """Closed ellipse c + cos(2 pi t) u + sin(2 pi t) v (u, v complex semi-axes)."""
    c, u, v, s = complex(center), complex(axis_u), complex(axis_v), float(orientation)

    def pt(t):
        w = 2 * np.pi * s * t
        return c + np.cos(w) * u + np.sin(w) * v

    def vel(t):
        w = 2 * np.pi * s * t
        return 2 * np.pi * s * (-np.sin(w) * u + np.cos(w) * v)

    return Leg(pt, vel)


def _panel(fn, a: float, b: float):
    """High/low Gauss-Legendre estimates of int_a^b fn(t) dt."""
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    ts_hi = mid + half * _NODES_HI
    ts_lo = mid + half * _NODES_LO
    vals_hi = [fn(t) for t in ts_hi]
    vals_lo = [fn(t) for t in ts_lo]
    hi = half * sum(w * v for w, v in zip(_WEIGHTS_HI, vals_hi))
    lo = half * sum(w * v for w, v in zip(_WEIGHTS_LO, vals_lo))
    return hi, lo


def _err(x) -> float:
    return float(np.max(np.abs(np.atleast_1d(x))))


def adaptive_parameter_integral(fn, tol: float, max_depth: int):
    """Adaptively integrate fn over [0, 1] to absolute tolerance tol."""
    total = None
    stack = [(0.0, 1.0, 0)]
    while stack:
        a, b, depth = stack.pop()
        hi, lo = _panel(fn, a, b)
        # proportional budget plus a round-off floor relative to the panel value
        floor = 5e-15 * max(1.0, _err(hi))
        if _err(hi - lo) <= max(tol * (b - a), floor):
            total = hi if total is None else total + hi
            continue
        if depth >= max_depth:
            raise NoConvergence(
                f"quadrature panel [{a:.6f},{b:.6f}] did not converge at depth {depth}"
            )
        mid = 0.5 * (a + b)
        stack.append((a, mid, depth + 1))
        stack.append((mid, b, depth + 1))
    return total


def integrate_legs(fns, tol: float | None = None, max_depth: int | None = None):
    """Sum of parameter integrals; fns is a list of t-integrands (one per leg),
    each already including the velocity factor."""
    tol = DEFAULT.quad_tol if tol is None else tol
    max_depth = DEFAULT.quad_max_depth if max_depth is None else max_depth
    total = None
    per_leg = tol / max(len(fns), 1)
    for fn in fns:
        part = adaptive_parameter_integral(fn, per_leg, max_depth)
        total = part if total is None else total + part
    return total


def contour_integrate(f, path, tol: float | None = None,
                      max_depth: int | None = None):
    """Integrate a single-valued complex function f(x) dx along a contour.

    ``path`` is a Leg or a list of Legs.  The result carries an estimated
    absolute error below ``tol``.
    """
    legs = [path] if isinstance(path, Leg) else list(path)
    fns = [
        (lambda t, leg=leg: f(leg.point(t)) * leg.velocity(t))
        for leg in legs
    ]
    return integrate_legs(fns, tol=tol, max_depth=max_depth)
