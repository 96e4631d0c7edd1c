"""Riemann theta function with gradient and Hessian, by direct lattice sum.

Convention: Theta(lam | tau) = sum over m in Z^g of exp(m tau m^t / 2 +
m lam^t), with tau symmetric and Re(tau) negative definite.  The sum is
truncated to |m_a| <= R with a certified Gaussian tail bound; R is raised
automatically until the bound drops below the configured relative target.
Derivatives come from the term-by-term differentiated series under the same
tail policy, so every returned quantity carries a per-call certificate.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT
from .errors import NoConvergence


@dataclass
class ThetaContext:
    tau: np.ndarray
    rmax: int = DEFAULT.theta_rmax
    tail_rel: float = DEFAULT.theta_tail_rel
    radius: int = field(default=0, init=False)
    tail_bound: float = field(default=np.inf, init=False)
    _lattices: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        self.tau = np.asarray(self.tau, dtype=complex)
        g = self.tau.shape[0]
        if self.tau.shape != (g, g):
            raise ValueError("tau must be square")
        if np.max(np.abs(self.tau - self.tau.T)) > 1e-9 * max(
            1.0, float(np.max(np.abs(self.tau)))
        ):
            raise ValueError("tau must be symmetric")
        sym = 0.5 * (self.tau.real + self.tau.real.T)
        eig = np.linalg.eigvalsh(sym)
        if eig.max() >= 0:
            raise ValueError("Re(tau) must be negative definite")
        self.g = g
        self._sigma = -eig.max()  # slowest Gaussian decay rate
        self.radius = 2

    def _lattice(self, R: int):
        if R not in self._lattices:
            ms = np.array(
                list(itertools.product(range(-R, R + 1), repeat=self.g)),
                dtype=float,
            )
            quad = 0.5 * np.einsum("mi,ij,mj->m", ms, self.tau, ms)
            self._lattices[R] = (ms, quad)
        return self._lattices[R]

    def _tail(self, R: int, lam: np.ndarray, moment: int) -> float:
        """Upper bound for the dropped terms of the ``moment``-weighted sum."""
        c = float(np.linalg.norm(lam.real))
        total = 0.0
        for s in range(R + 1, R + 200):
            count = (2 * s + 1) ** self.g - (2 * s - 1) ** self.g
            mag = np.exp(-0.5 * self._sigma * s * s + c * s * np.sqrt(self.g))
            term = count * mag * (s * np.sqrt(self.g)) ** moment
            total += term
            if term < 1e-300 or term < 1e-6 * total:
                break
        return float(total)


def _sums(ctx: ThetaContext, lam: np.ndarray, R: int):
    ms, quad = ctx._lattice(R)
    expo = np.exp(quad + ms @ lam)
    theta = np.sum(expo)
    grad = ms.T @ expo
    hess = np.einsum("mi,mj,m->ij", ms, ms, expo)
    return theta, grad, hess


def theta_all(ctx: ThetaContext, lam):
    """(Theta, grad, Hessian) at lam, with the tail certificate enforced."""
    lam = np.asarray(lam, dtype=complex)
    R = max(ctx.radius, 2)
    while True:
        theta, grad, hess = _sums(ctx, lam, R)
        tail = ctx._tail(R, lam, 2)
        target = ctx.tail_rel * max(abs(theta), 1.0)
        if tail <= target:
            ctx.radius = R
            ctx.tail_bound = tail
            return theta, grad, hess
        R += 2
        if R > ctx.rmax:
            raise NoConvergence(
                f"theta lattice radius exceeded rmax={ctx.rmax}; "
                "tau too close to degenerate"
            )


def theta(ctx: ThetaContext, lam) -> complex:
    return complex(theta_all(ctx, lam)[0])


def theta_grad(ctx: ThetaContext, lam) -> np.ndarray:
    return theta_all(ctx, lam)[1]


def theta_hess(ctx: ThetaContext, lam) -> np.ndarray:
    return theta_all(ctx, lam)[2]


def log_theta_derivatives(ctx: ThetaContext, lam, zero_tol: float = 1e-13):
    """(theta, dlog, ddlog): gradient and Hessian of log Theta at lam.

    Raises ZeroDivisionError-like failure through the caller when |Theta| is
    below ``zero_tol`` times the leading term scale; the caller converts it
    into the domain-specific error.
    """
    th, gr, he = theta_all(ctx, lam)
    scale = max(1.0, float(np.max(np.abs(gr))) if gr.size else 1.0)
    if abs(th) < zero_tol * scale:
        return th, None, None
    dlog = gr / th
    ddlog = he / th - np.outer(dlog, dlog)
    return th, dlog, ddlog


def odd_half_periods(tau: np.ndarray):
    """Half periods pi*i*alpha + tau*beta/2 with odd parity alpha.beta.

    Enumerated in a fixed lexicographic order over (alpha, beta) in
    {0,1}^g x {0,1}^g, so the selection downstream is deterministic.
    """
    tau = np.asarray(tau, dtype=complex)
    g = tau.shape[0]
    out = []
    for alpha in itertools.product((0, 1), repeat=g):
        for beta in itertools.product((0, 1), repeat=g):
            if (sum(a * b for a, b in zip(alpha, beta)) % 2) == 1:
                vec = 1j * np.pi * np.array(alpha) + 0.5 * (
                    tau @ np.array(beta, dtype=complex)
                )
                out.append(((alpha, beta), vec))
    return out
