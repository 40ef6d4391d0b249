"""Truncated multivariate Taylor arithmetic (forward-mode jets).

A :class:`TaylorSeries` holds the Taylor coefficients of a smooth function
around a base point, truncated at a fixed total degree.  Coefficients are the
partial derivatives divided by the multi-index factorial, so multiplication is
plain coefficient convolution.  Arithmetic and elementary functions propagate
coefficients exactly; the only error anywhere in the pipeline is float
rounding.  This is what makes fourth-order quantities (bilaplacians of derived
scalars, Laplacians of the mean curvature) computable to near machine
precision.

Coefficient arrays have shape ``(ncoef,) + batch_shape`` so a whole grid of
base points expands in one vectorized pass.  Series are immutable; every
operation returns a fresh series whose context order equals its trust order
(operations between series of different orders truncate to the lower one).
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np
from scipy import sparse

__all__ = [
    "TaylorContext",
    "TaylorSeries",
    "context",
    "constant",
    "variables",
    "g_sin",
    "g_cos",
    "g_sqrt",
    "g_exp",
]


@lru_cache(maxsize=None)
def context(nvars: int, order: int) -> "TaylorContext":
    """Shared index-table context for series in ``nvars`` variables."""
    return TaylorContext(nvars, order)


def _monomials(nvars: int, order: int) -> list[tuple[int, ...]]:
    # Degree-ascending enumeration; per-degree blocks are generated identically
    # for every order, so a lower-order context indexes a prefix of a higher one.
    mons = []
    for deg in range(order + 1):
        for combo in itertools.combinations_with_replacement(range(nvars), deg):
            alpha = [0] * nvars
            for i in combo:
                alpha[i] += 1
            mons.append(tuple(alpha))
    return mons


class TaylorContext:
    """Monomial enumeration plus product/derivative tables for one (nvars, order)."""

    def __init__(self, nvars: int, order: int):
        if nvars < 1:
            raise ValueError(f"need at least one variable, got {nvars}")
        if order < 0:
            raise ValueError(f"order must be nonnegative, got {order}")
        self.nvars = nvars
        self.order = order
        self.monomials = _monomials(nvars, order)
        self.ncoef = len(self.monomials)
        self.index = {m: i for i, m in enumerate(self.monomials)}
        self._factorials = np.array(
            [math.prod(math.factorial(a) for a in m) for m in self.monomials], dtype=float
        )
        self._build_product_table()
        self._build_derivative_tables()

    def _build_product_table(self) -> None:
        ia, ib, iout = [], [], []
        degs = [sum(m) for m in self.monomials]
        for a, ma in enumerate(self.monomials):
            for b, mb in enumerate(self.monomials):
                if degs[a] + degs[b] > self.order:
                    continue
                ia.append(a)
                ib.append(b)
                iout.append(self.index[tuple(x + y for x, y in zip(ma, mb))])
        self._pa = np.asarray(ia, dtype=np.intp)
        self._pb = np.asarray(ib, dtype=np.intp)
        npairs = len(iout)
        self._scatter = sparse.csr_matrix(
            (np.ones(npairs), (np.asarray(iout), np.arange(npairs))),
            shape=(self.ncoef, npairs),
        )

    def _build_derivative_tables(self) -> None:
        # partial_i maps this context onto context(nvars, order - 1)
        self._deriv = []
        if self.order == 0:
            return
        low = context(self.nvars, self.order - 1)
        for i in range(self.nvars):
            src, fac = [], []
            for beta in low.monomials:
                shifted = list(beta)
                shifted[i] += 1
                src.append(self.index[tuple(shifted)])
                fac.append(beta[i] + 1.0)
            self._deriv.append((np.asarray(src, dtype=np.intp), np.asarray(fac)))

    def mul_coeffs(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        prods = a[self._pa] * b[self._pb]
        flat = prods.reshape(prods.shape[0], -1)
        out = self._scatter @ flat
        return np.asarray(out).reshape((self.ncoef,) + prods.shape[1:])


def constant(ctx: TaylorContext, value) -> "TaylorSeries":
    arr = np.asarray(value, dtype=float)
    coeffs = np.zeros((ctx.ncoef,) + arr.shape)
    coeffs[0] = arr
    return TaylorSeries(ctx, coeffs)


def variables(points, order: int) -> list["TaylorSeries"]:
    """Seed series for the coordinates of a batch of base points.

    ``points`` has shape ``(m, nvars)`` (or ``(nvars,)`` for a single point);
    the i-th returned series expands the i-th coordinate function around every
    base point at once.
    """
    pts = np.asarray(points, dtype=float)
    single = pts.ndim == 1
    if single:
        pts = pts[None, :]
    nvars = pts.shape[1]
    ctx = context(nvars, order)
    out = []
    for i in range(nvars):
        coeffs = np.zeros((ctx.ncoef,) + ((pts.shape[0],) if not single else ()))
        coeffs[0] = pts[:, i] if not single else pts[0, i]
        if order >= 1:
            e_i = tuple(1 if j == i else 0 for j in range(nvars))
            coeffs[ctx.index[e_i]] = 1.0
        out.append(TaylorSeries(ctx, coeffs))
    return out


class TaylorSeries:
    """Dense truncated Taylor expansion; immutable, batch-aware."""

    __slots__ = ("ctx", "coeffs")
    __array_ufunc__ = None
    __array_priority__ = 1000.0

    def __init__(self, ctx: TaylorContext, coeffs: np.ndarray):
        self.ctx = ctx
        self.coeffs = coeffs

    @property
    def order(self) -> int:
        return self.ctx.order

    @property
    def nvars(self) -> int:
        return self.ctx.nvars

    @property
    def value(self) -> np.ndarray:
        return self.coeffs[0]

    @property
    def batch_shape(self) -> tuple:
        return self.coeffs.shape[1:]

    def to_order(self, order: int) -> "TaylorSeries":
        """Truncate to a lower-order context (prefix of the coefficients)."""
        if order == self.order:
            return self
        if order > self.order:
            raise ValueError(f"cannot raise trust order {self.order} to {order}")
        low = context(self.nvars, order)
        return TaylorSeries(low, self.coeffs[: low.ncoef])

    def partial(self, i: int) -> "TaylorSeries":
        """Formal partial derivative; result lives one order lower."""
        if self.order < 1:
            raise ValueError("cannot differentiate an order-0 series")
        src, fac = self.ctx._deriv[i]
        shape = (1,) * (self.coeffs.ndim - 1)
        out = self.coeffs[src] * fac.reshape(fac.shape + shape)
        return TaylorSeries(context(self.nvars, self.order - 1), out)

    def derivative(self, alpha) -> np.ndarray:
        """Partial derivative value for a multi-index (coefficient times factorial)."""
        alpha = tuple(alpha)
        idx = self.ctx.index[alpha]
        return self.coeffs[idx] * self.ctx._factorials[idx]

    # -- arithmetic ---------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, TaylorSeries):
            if other.ctx is self.ctx:
                return self, other
            if other.nvars != self.nvars:
                raise ValueError("mixing series over different variables")
            k = min(self.order, other.order)
            return self.to_order(k), other.to_order(k)
        return self, constant(self.ctx, other)

    def __add__(self, other):
        a, b = self._coerce(other)
        return TaylorSeries(a.ctx, a.coeffs + b.coeffs)

    __radd__ = __add__

    def __sub__(self, other):
        a, b = self._coerce(other)
        return TaylorSeries(a.ctx, a.coeffs - b.coeffs)

    def __rsub__(self, other):
        a, b = self._coerce(other)
        return TaylorSeries(a.ctx, b.coeffs - a.coeffs)

    def __neg__(self):
        return TaylorSeries(self.ctx, -self.coeffs)

    def __mul__(self, other):
        if isinstance(other, TaylorSeries):
            a, b = self._coerce(other)
            return TaylorSeries(a.ctx, a.ctx.mul_coeffs(a.coeffs, b.coeffs))
        return TaylorSeries(self.ctx, self.coeffs * np.asarray(other, dtype=float))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, TaylorSeries):
            return self * other.reciprocal()
        return self * (1.0 / np.asarray(other, dtype=float))

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError("only nonnegative integer powers are supported")
        result = constant(self.ctx, 1.0)
        for _ in range(exponent):
            result = result * self
        return result

    # -- composition with smooth univariate functions -----------------------

    def _compose(self, dcoeffs: list[np.ndarray]) -> "TaylorSeries":
        # dcoeffs[m] = g^(m)(value) / m!; Horner in the nilpotent part.
        h = self.coeffs.copy()
        h[0] = np.zeros_like(h[0])
        hs = TaylorSeries(self.ctx, h)
        result = constant(self.ctx, dcoeffs[-1])
        for m in range(len(dcoeffs) - 2, -1, -1):
            result = result * hs + dcoeffs[m]
        return result

    def sin(self) -> "TaylorSeries":
        c = self.value
        cyc = [np.sin(c), np.cos(c), -np.sin(c), -np.cos(c)]
        d = [cyc[m % 4] / math.factorial(m) for m in range(self.order + 1)]
        return self._compose(d)

    def cos(self) -> "TaylorSeries":
        c = self.value
        cyc = [np.cos(c), -np.sin(c), -np.cos(c), np.sin(c)]
        d = [cyc[m % 4] / math.factorial(m) for m in range(self.order + 1)]
        return self._compose(d)

    def exp(self) -> "TaylorSeries":
        e = np.exp(self.value)
        d = [e / math.factorial(m) for m in range(self.order + 1)]
        return self._compose(d)

    def sqrt(self) -> "TaylorSeries":
        c = self.value
        d = [np.sqrt(c)]
        for m in range(1, self.order + 1):
            d.append(d[-1] * ((0.5 - (m - 1)) / m) / c)
        return self._compose(d)

    def reciprocal(self) -> "TaylorSeries":
        c = self.value
        d = [1.0 / c]
        for _ in range(self.order):
            d.append(-d[-1] / c)
        return self._compose(d)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"TaylorSeries(nvars={self.nvars}, order={self.order}, batch={self.batch_shape})"


# -- scalar-generic helpers: accept TaylorSeries or numpy inputs -------------


def g_sin(x):
    return x.sin() if isinstance(x, TaylorSeries) else np.sin(x)


def g_cos(x):
    return x.cos() if isinstance(x, TaylorSeries) else np.cos(x)


def g_sqrt(x):
    return x.sqrt() if isinstance(x, TaylorSeries) else np.sqrt(x)


def g_exp(x):
    return x.exp() if isinstance(x, TaylorSeries) else np.exp(x)
