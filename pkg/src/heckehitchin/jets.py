"""Dense truncated multivariate Taylor arithmetic (jets).

A :class:`Jet` stores the Taylor coefficients of a function at a point, for
every multi-index of total degree <= order.  Arithmetic is exact on
polynomials of degree <= order, which makes jets a forward-mode AD engine for
the l-derivatives needed by the Hecke/Hitchin formulas and for composing
differential operators.

Jets are dense: at 6 variables and order 4 there are 210 coefficients, small
enough that sparsity is not worth the complexity.  Operations between jets of
different orders truncate to the smaller order; ``partial`` lowers the order
by one.  All values are immutable after construction.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np

from .errors import DivisionByZeroJet, JetOrderTooLow
from .config import DEFAULT


def _multi_indices(nvars: int, order: int):
    """All multi-indices of total degree <= order, graded lexicographic."""
    out = []
    for deg in range(order + 1):
        for c in itertools.combinations_with_replacement(range(nvars), deg):
            alpha = [0] * nvars
            for v in c:
                alpha[v] += 1
            out.append(tuple(alpha))
    return out


class JetSpace:
    """Index bookkeeping for jets with a fixed (nvars, order).

    Holds the multi-index list, the index lookup, the truncated-product
    table, and the coefficient-shift tables for partial derivatives.
    """

    def __init__(self, nvars: int, order: int):
        self.nvars = nvars
        self.order = order
        self.alphas = _multi_indices(nvars, order)
        self.dim = len(self.alphas)
        self.index = {a: i for i, a in enumerate(self.alphas)}
        self.degrees = np.array([sum(a) for a in self.alphas])
        self.factorials = np.array(
            [math.prod(math.factorial(k) for k in a) for a in self.alphas],
            dtype=float,
        )

        I, J, K = [], [], []
        for i, a in enumerate(self.alphas):
            da = sum(a)
            for j, b in enumerate(self.alphas):
                if da + sum(b) > order:
                    continue
                c = tuple(x + y for x, y in zip(a, b))
                I.append(i)
                J.append(j)
                K.append(self.index[c])
        self._mul_i = np.array(I)
        self._mul_j = np.array(J)
        self._mul_k = np.array(K)

        # partial derivative d/dx_v maps coefficient at alpha+e_v to alpha
        # with weight alpha_v + 1; target space has order-1
        if order > 0:
            lower = jet_space(nvars, order - 1)
            src, dst, w = [], [], []
            for v in range(nvars):
                s, d, ww = [], [], []
                for i, a in enumerate(lower.alphas):
                    up = list(a)
                    up[v] += 1
                    s.append(self.index[tuple(up)])
                    d.append(i)
                    ww.append(a[v] + 1)
                src.append(np.array(s))
                dst.append(np.array(d))
                w.append(np.array(ww, dtype=float))
            self._par_src = src
            self._par_dst = dst
            self._par_w = w

    def mul_coeffs(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        out = np.zeros(self.dim, dtype=complex)
        np.add.at(out, self._mul_k, a[self._mul_i] * b[self._mul_j])
        return out


@lru_cache(maxsize=None)
def jet_space(nvars: int, order: int) -> JetSpace:
    return JetSpace(nvars, order)


class Jet:
    """Truncated Taylor expansion at a point, in ``nvars`` variables."""

    __slots__ = ("space", "coeffs")

    def __init__(self, space: JetSpace, coeffs: np.ndarray):
        self.space = space
        self.coeffs = coeffs

    # -- construction -----------------------------------------------------

    @staticmethod
    def constant(value: complex, nvars: int, order: int) -> "Jet":
        sp = jet_space(nvars, order)
        c = np.zeros(sp.dim, dtype=complex)
        c[0] = value
        return Jet(sp, c)

    @staticmethod
    def variable(value: complex, which: int, nvars: int, order: int) -> "Jet":
        sp = jet_space(nvars, order)
        c = np.zeros(sp.dim, dtype=complex)
        c[0] = value
        if order > 0:
            e = tuple(1 if v == which else 0 for v in range(nvars))
            c[sp.index[e]] = 1.0
        return Jet(sp, c)

    # -- views ------------------------------------------------------------

    @property
    def value(self) -> complex:
        return complex(self.coeffs[0])

    @property
    def order(self) -> int:
        return self.space.order

    @property
    def nvars(self) -> int:
        return self.space.nvars

    def gradient(self) -> np.ndarray:
        """First-order Taylor coefficients = first partial derivatives."""
        if self.order < 1:
            raise JetOrderTooLow("gradient needs order >= 1")
        n = self.nvars
        return self.coeffs[1 : 1 + n].copy()

    def derivative(self, alpha) -> complex:
        """Partial derivative d^alpha f = coefficient * alpha!."""
        alpha = tuple(alpha)
        i = self.space.index[alpha]
        return complex(self.coeffs[i] * self.space.factorials[i])

    def truncate(self, order: int) -> "Jet":
        if order == self.order:
            return self
        if order > self.order:
            raise JetOrderTooLow(
                f"cannot raise jet order {self.order} to {order}"
            )
        sp = jet_space(self.nvars, order)
        return Jet(sp, self.coeffs[: sp.dim].copy())

    def partial(self, v: int) -> "Jet":
        """d/dx_v, one order lower."""
        if self.order < 1:
            raise JetOrderTooLow("partial needs order >= 1")
        sp = jet_space(self.nvars, self.order - 1)
        out = np.zeros(sp.dim, dtype=complex)
        s = self.space
        out[s._par_dst[v]] = s._par_w[v] * self.coeffs[s._par_src[v]]
        return Jet(sp, out)

    # -- arithmetic -------------------------------------------------------

    def _align(self, other):
        if isinstance(other, Jet):
            if other.nvars != self.nvars:
                raise ValueError("jet variable counts differ")
            m = min(self.order, other.order)
            return self.truncate(m), other.truncate(m)
        return None

    def __add__(self, other):
        pair = self._align(other)
        if pair is not None:
            a, b = pair
            return Jet(a.space, a.coeffs + b.coeffs)
        c = self.coeffs.copy()
        c[0] += other
        return Jet(self.space, c)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.space, -self.coeffs)

    def __sub__(self, other):
        return self + (-other if isinstance(other, Jet) else -other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        pair = self._align(other)
        if pair is not None:
            a, b = pair
            return Jet(a.space, a.space.mul_coeffs(a.coeffs, b.coeffs))
        return Jet(self.space, self.coeffs * other)

    __rmul__ = __mul__

    def _inverse(self):
        c0 = self.coeffs[0]
        if abs(c0) < DEFAULT.jet_div_eps:
            raise DivisionByZeroJet(
                "jet divisor has (numerically) zero constant term"
            )
        # 1/b = (1/c0) * sum_k u^k with u = 1 - b/c0 nilpotent
        u = Jet(self.space, -(self.coeffs / c0))
        u.coeffs[0] += 1.0
        acc = Jet.constant(1.0, self.nvars, self.order)
        term = Jet.constant(1.0, self.nvars, self.order)
        for _ in range(self.order):
            term = term * u
            acc = acc + term
        return acc * (1.0 / c0)

    def __truediv__(self, other):
        if isinstance(other, Jet):
            a, b = self._align(other)
            return a * b._inverse()
        return Jet(self.space, self.coeffs / other)

    def __rtruediv__(self, other):
        return self._inverse() * other

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("jet powers must be nonnegative integers")
        out = Jet.constant(1.0, self.nvars, self.order)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base if n > 1 else base
            n >>= 1
        return out

    def __repr__(self):
        return f"Jet(nvars={self.nvars}, order={self.order}, value={self.value:.6g})"


def jet_exp(x: Jet) -> Jet:
    """exp of a jet: exp(c0) * sum u^k/k! with u the nilpotent part."""
    c0 = x.coeffs[0]
    u = Jet(x.space, x.coeffs.copy())
    u.coeffs[0] = 0.0
    acc = Jet.constant(1.0, x.nvars, x.order)
    term = Jet.constant(1.0, x.nvars, x.order)
    for k in range(1, x.order + 1):
        term = term * u * (1.0 / k)
        acc = acc + term
    return acc * np.exp(c0)


def jet_log(x: Jet) -> Jet:
    """log of a jet with nonzero constant term (principal branch at c0)."""
    c0 = x.coeffs[0]
    if abs(c0) < DEFAULT.jet_div_eps:
        raise DivisionByZeroJet("jet log of (numerically) zero constant term")
    u = x * (1.0 / c0) - 1.0
    acc = Jet.constant(np.log(complex(c0)), x.nvars, x.order)
    term = Jet.constant(1.0, x.nvars, x.order)
    for k in range(1, x.order + 1):
        term = term * u
        acc = acc + term * ((-1.0) ** (k + 1) / k)
    return acc


def jet_variables(values, order: int) -> list[Jet]:
    """Seed jets x_i = values[i] + dx_i, all in one space."""
    values = list(values)
    n = len(values)
    return [Jet.variable(v, i, n, order) for i, v in enumerate(values)]


def jet_eval(f, point, order: int) -> Jet:
    """Evaluate a jet expression f(seeds) at ``point``.

    ``f`` must be composed of +, -, *, /, integer powers, jet_exp and
    jet_log over the seed jets.  The constant term of the result equals the
    plain evaluation of f at the point.
    """
    return f(jet_variables(point, order))
