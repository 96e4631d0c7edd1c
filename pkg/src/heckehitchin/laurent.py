"""Laurent-coefficient probing on small circles.

``laurent_probe`` extracts c_n, n = -2..+2, of a locally meromorphic function
(pole order <= 2) from equispaced samples on a circle, via the discrete
Fourier transform.  The error estimate is the maximum disagreement between
the fits at the given radius and at half that radius; a large estimate
signals an unexpected nearby singularity and raises :class:`InconsistentFit`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InconsistentFit

ORDERS = (-2, -1, 0, 1, 2)


@dataclass(frozen=True)
class LaurentWindow:
    center: object
    radius: float
    coefficients: dict
    error_estimate: float

    def __getitem__(self, n: int) -> complex:
        return self.coefficients[n]

    def magnitude(self) -> float:
        return max(abs(c) for c in self.coefficients.values())


def _fit(f, x0: complex, radius: float, nsamples: int) -> dict:
    ks = np.arange(nsamples)
    zs = x0 + radius * np.exp(2j * np.pi * ks / nsamples)
    vals = np.array([f(z) for z in zs], dtype=complex)
    out = {}
    for n in ORDERS:
        phase = np.exp(-2j * np.pi * ks * n / nsamples)
        out[n] = complex(np.sum(vals * phase) / nsamples * radius ** (-n))
    return out


def laurent_probe(f, center, radius: float, nsamples: int = 32,
                  tol: float | None = None) -> LaurentWindow:
    """Probe f around ``center`` (an object with ``.x`` or a complex number).

    ``f`` is called with the absolute complex coordinate of each sample; the
    caller is responsible for keeping samples on the correct sheet.
    """
    if nsamples < 32:
        raise ValueError("laurent_probe needs at least 32 samples")
    x0 = complex(getattr(center, "x", center))
    full = _fit(f, x0, radius, nsamples)
    half = _fit(f, x0, radius / 2.0, nsamples)
    err = max(abs(full[n] - half[n]) for n in ORDERS)
    if tol is not None and err > 10.0 * tol:
        raise InconsistentFit(
            f"laurent fits at r and r/2 disagree by {err:.3e} (> 10*{tol:.1e})"
        )
    return LaurentWindow(center=center, radius=radius, coefficients=half,
                         error_estimate=err)
