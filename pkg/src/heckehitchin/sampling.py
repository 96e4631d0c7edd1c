"""Seeded, clearance-aware random draws of curves, points, and lines.

Every sampler takes a numpy Generator so that suites are reproducible from a
recorded seed.  Point draws enforce the geometric guards the kernels need:
distance from branch points, from each other, and clearance of the straight
Abel path, with enough margin that Laurent probe circles around any sampled
point stay inside the same path-atlas chart.
"""

from __future__ import annotations

import numpy as np

from .curves import CurveSpec, SurfacePoint, straight_path_clearance
from .errors import UnsupportedConfiguration
from .hecke import HeckeConfig
from .kernels import KernelContext
from .periods import PeriodData, period_matrix

# sampling guards, as fractions of the curve scale
MIN_BRANCH_DIST = 0.10
MIN_MUTUAL_DIST = 0.06
MIN_PATH_CLEARANCE = 0.10


def random_g2_curve(rng: np.random.Generator) -> CurveSpec:
    """Six branch points with separated real parts and mild imaginary jitter,
    so the v1 sorted-cut layout always applies."""
    pts = []
    for k in range(6):
        pts.append(complex(k + 0.3 * rng.uniform(-1, 1),
                           0.35 * rng.uniform(-1, 1)))
    return CurveSpec(tuple(pts))


def sample_box(spec: CurveSpec):
    pts = np.array(spec.branch_points)
    span = max(float(pts.real.max() - pts.real.min()), 1.0)
    return (
        pts.real.min() - 0.35 * span, pts.real.max() + 0.35 * span,
        pts.imag.min() - 0.8 * span, pts.imag.max() + 0.8 * span,
    )


def random_surface_point(pd: PeriodData, rng: np.random.Generator,
                         avoid=(), min_mutual: float | None = None,
                         max_tries: int = 5000) -> SurfacePoint:
    """One clearance-checked point with a random sheet."""
    spec = pd.curve
    lo, hi, ilo, ihi = sample_box(spec)
    scale = spec.scale
    mind = (MIN_MUTUAL_DIST if min_mutual is None else min_mutual) * scale
    for _ in range(max_tries):
        x = complex(rng.uniform(lo, hi), rng.uniform(ilo, ihi))
        if spec.min_branch_distance(x) < MIN_BRANCH_DIST * scale:
            continue
        if any(abs(x - q.x) < mind for q in avoid):
            continue
        if straight_path_clearance(spec, pd.homology.base_x, x) < \
                MIN_PATH_CLEARANCE * scale:
            continue
        sheet = +1 if rng.integers(0, 2) == 0 else -1
        return SurfacePoint(x, sheet)
    raise UnsupportedConfiguration("could not sample a clearance-safe point")


def random_marked_points(pd: PeriodData, rng: np.random.Generator,
                         count: int) -> list:
    out = []
    for _ in range(count):
        out.append(random_surface_point(pd, rng, avoid=out))
    return out


def random_ell(rng: np.random.Generator, count: int,
               min_gap: float = 0.12) -> np.ndarray:
    """Distinct nonzero line coordinates in a moderate annulus."""
    out = []
    while len(out) < count:
        z = complex(rng.uniform(-1.6, 1.6), rng.uniform(-1.6, 1.6))
        if abs(z) < 0.25:
            continue
        if any(abs(z - w) < min_gap for w in out):
            continue
        out.append(z)
    return np.array(out, dtype=complex)


def standard_context(pd: PeriodData, rng: np.random.Generator) -> KernelContext:
    P0 = random_surface_point(pd, rng)
    return KernelContext(pd=pd, P0=P0)


def random_config(kctx: KernelContext, rng: np.random.Generator,
                  require_den: bool = True, max_tries: int = 40) -> HeckeConfig:
    """A Hecke configuration with well-separated data and Den away from 0."""
    pd = kctx.pd
    n = 3 * pd.genus
    for _ in range(max_tries):
        pts = []
        ok = True
        for _ in range(n):
            try:
                pts.append(random_surface_point(pd, rng, avoid=pts + [kctx.P0]))
            except UnsupportedConfiguration:
                ok = False
                break
        if not ok:
            continue
        cfg = HeckeConfig(kctx=kctx, points=tuple(pts), ell=random_ell(rng, n))
        if not require_den or (
            cfg.den_nonzero and abs(cfg.den_value) > 1e-6 * cfg.den_scale()
        ):
            return cfg
    raise UnsupportedConfiguration("could not sample a nondegenerate config")


def probe_radius(cfg: HeckeConfig, center: SurfacePoint,
                 cap: float = 0.035) -> float:
    """Radius for Laurent probes around one of the marked points (or P0):
    stays clear of branch points, the other marked data, and the path-atlas
    jump curves."""
    spec = cfg.pd.curve
    scale = spec.scale
    others = [P for P in (*cfg.points, cfg.kctx.P0) if P.key() != center.key()]
    r = min(
        0.45 * spec.min_branch_distance(center.x),
        0.45 * min(abs(center.x - P.x) for P in others),
        0.6 * straight_path_clearance(spec, cfg.pd.homology.base_x, center.x),
        cap * scale,
    )
    if r <= 0:
        raise UnsupportedConfiguration("no safe probe radius at this point")
    return r


def generic_z_points(cfg: HeckeConfig, rng: np.random.Generator,
                     count: int) -> list:
    """Probe points away from branch points, the P_i, and P0."""
    out = []
    avoid = list(cfg.points) + [cfg.kctx.P0]
    for _ in range(count):
        z = random_surface_point(cfg.pd, rng, avoid=avoid + out,
                                 min_mutual=0.05)
        out.append(z)
    return out


def admissible_delta_p(cfg: HeckeConfig, rng: np.random.Generator) -> np.ndarray:
    """Projection of a random displacement onto the divisor constraint."""
    raw = rng.standard_normal(cfg.n) + 1j * rng.standard_normal(cfg.n)
    return project_delta_p(cfg.omega_matrix(), raw)


def project_delta_p(omega_matrix: np.ndarray, raw) -> np.ndarray:
    """Hermitian-orthogonal projection onto ker[omega_a(P_i)]."""
    W = np.asarray(omega_matrix, dtype=complex)
    raw = np.asarray(raw, dtype=complex)
    return raw - np.linalg.pinv(W) @ (W @ raw)
