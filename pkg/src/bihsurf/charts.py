"""Parametric hypersurface charts in round spheres with jet evaluation.

A chart is an immersion of an n-dimensional parameter box into the unit
sphere of R^(n+2), written once in scalar-generic form: the same Python
callable is evaluated on floats, on numpy batches, and on
:class:`~bihsurf.taylor.TaylorSeries` seeds.  Two derivative engines share
that callable:

* ``analytic`` - truncated Taylor arithmetic, exact to the requested order;
* ``fd`` - central finite-difference stencils (second-order accurate), kept
  as an independent validation fallback.

Both engines produce the same :class:`Jet`/series interface, so every
downstream computation is engine-agnostic.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidGridError, SingularChartError, UnsupportedOrderError
from .taylor import TaylorSeries, variables

MAX_JET_ORDER = 4

__all__ = [
    "Axis",
    "ParameterDomain",
    "Chart",
    "Jet",
    "evaluate_jet",
    "sphere_constraint_residual",
    "MAX_JET_ORDER",
]


@dataclass(frozen=True)
class Axis:
    """One parameter interval; periodic axes wrap with period upper - lower."""

    lower: float
    upper: float
    periodic: bool = False
    excluded_endpoints: bool = False

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ValueError(f"axis needs lower < upper, got [{self.lower}, {self.upper}]")

    @property
    def period(self) -> float:
        return self.upper - self.lower


@dataclass(frozen=True)
class ParameterDomain:
    """Product of intervals parametrizing a single chart."""

    axes: tuple[Axis, ...]

    def __post_init__(self):
        if len(self.axes) < 1:
            raise ValueError("domain needs at least one axis")

    @property
    def dim(self) -> int:
        return len(self.axes)

    def check_interior(self, pts: np.ndarray, margin: float = 0.0) -> None:
        """Raise ``SingularChartError`` unless every point is interior.

        Periodic axes accept any real coordinate.  ``margin`` shrinks bounded
        axes further (finite-difference stencils need 2h of clearance).
        """
        pts = np.atleast_2d(pts)
        for i, ax in enumerate(self.axes):
            if ax.periodic:
                continue
            lo, hi = ax.lower + margin, ax.upper - margin
            c = pts[:, i]
            if np.any(c <= lo) or np.any(c >= hi):
                bad = pts[(c <= lo) | (c >= hi)][0]
                raise SingularChartError(
                    f"point {tuple(bad)} is outside the open interior of axis {i} "
                    f"({ax.lower}, {ax.upper}) with margin {margin}"
                )

    def uniform_interior(self, resolution) -> np.ndarray:
        """Cartesian sampling grid, strictly interior on bounded axes.

        Bounded axes use cell midpoints (never touching excluded endpoints);
        periodic axes use uniform nodes over one full period.
        """
        res = _per_axis(resolution, self.dim)
        axes_nodes = []
        for ax, r in zip(self.axes, res):
            if r < 1:
                raise InvalidGridError(f"resolution must be positive, got {r}")
            step = ax.period / r
            if ax.periodic:
                axes_nodes.append(ax.lower + step * np.arange(r))
            else:
                axes_nodes.append(ax.lower + step * (np.arange(r) + 0.5))
        return cartesian_product(axes_nodes)

    def random_interior(self, count: int, rng=None, margin_fraction: float = 0.05) -> np.ndarray:
        """Seeded random interior points, padded away from bounded endpoints."""
        rng = np.random.default_rng(rng)
        cols = []
        for ax in self.axes:
            pad = 0.0 if ax.periodic else margin_fraction * ax.period
            cols.append(rng.uniform(ax.lower + pad, ax.upper - pad, size=count))
        return np.stack(cols, axis=1)


def _per_axis(value, dim: int) -> list[int]:
    if np.isscalar(value):
        return [int(value)] * dim
    vals = [int(v) for v in value]
    if len(vals) != dim:
        raise InvalidGridError(f"expected {dim} per-axis values, got {len(vals)}")
    return vals


def cartesian_product(axes_nodes: list[np.ndarray]) -> np.ndarray:
    grids = np.meshgrid(*axes_nodes, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


@dataclass
class Jet:
    """Point value of an immersion plus its partial derivatives up to ``order``.

    ``derivs[k]`` has shape ``(m,) + (n,)*k + (d,)`` for a batch of m points;
    the k index axes are symmetric by construction.
    """

    order: int
    points: np.ndarray
    derivs: tuple[np.ndarray, ...]

    @property
    def value(self) -> np.ndarray:
        return self.derivs[0]

    def partial(self, alpha) -> np.ndarray:
        """Derivative for a multi-index, e.g. (2, 0) -> d^2/du1^2."""
        order = int(sum(alpha))
        idx = tuple(itertools.chain.from_iterable([i] * a for i, a in enumerate(alpha)))
        return self.derivs[order][(slice(None),) + idx]


# -- finite-difference stencils (central, second-order accurate) -------------

_STENCILS = {
    0: {0: 1.0},
    1: {-1: -0.5, 1: 0.5},
    2: {-1: 1.0, 0: -2.0, 1: 1.0},
    3: {-2: -0.5, -1: 1.0, 1: -1.0, 2: 0.5},
    4: {-2: 1.0, -1: -4.0, 0: 6.0, 1: -4.0, 2: 1.0},
}


def _fd_coefficients(immersion, pts: np.ndarray, order: int, step: float, ambient_dim: int):
    """Taylor coefficients (derivative / alpha!) of the immersion by stencils."""
    m, n = pts.shape
    from .taylor import context as taylor_context

    ctx = taylor_context(n, order)
    offsets = sorted({
        off
        for mono in ctx.monomials
        for off in itertools.product(*([sorted(_STENCILS[a].keys()) for a in mono]))
    })
    offset_arr = np.asarray(offsets, dtype=float)
    where = {off: i for i, off in enumerate(offsets)}
    # (m, n_off, n) evaluation points, flattened through the immersion
    eval_pts = pts[:, None, :] + step * offset_arr[None, :, :]
    flat = eval_pts.reshape(-1, n)
    vals = np.stack(immersion([flat[:, i] for i in range(n)]), axis=-1)
    vals = vals.reshape(m, len(offsets), ambient_dim)

    coeffs = np.zeros((ctx.ncoef, m, ambient_dim))
    for ci, mono in enumerate(ctx.monomials):
        deg = sum(mono)
        scale = 1.0 / (step**deg * math.prod(math.factorial(a) for a in mono))
        for off in itertools.product(*[sorted(_STENCILS[a].keys()) for a in mono]):
            w = math.prod(_STENCILS[a][o] for a, o in zip(mono, off))
            coeffs[ci] += (w * scale) * vals[:, where[off], :]
    return ctx, coeffs


@dataclass(frozen=True)
class Chart:
    """Immutable parametric chart; all evaluations are pure and thread-safe."""

    domain: ParameterDomain
    ambient_dim: int
    immersion: callable = field(repr=False)
    mode: str = "analytic"
    fd_step: float = 1e-3
    name: str = "chart"

    def __post_init__(self):
        if self.mode not in ("analytic", "fd"):
            raise ValueError(f"unknown derivative engine mode {self.mode!r}")

    @property
    def dim(self) -> int:
        return self.domain.dim

    def with_mode(self, mode: str, fd_step: float | None = None) -> "Chart":
        return Chart(
            self.domain,
            self.ambient_dim,
            self.immersion,
            mode=mode,
            fd_step=self.fd_step if fd_step is None else fd_step,
            name=self.name,
        )

    def orientation_flipped(self) -> "Chart":
        """Same surface with reversed parameter orientation (normal flips).

        Axis 0 is reflected about the domain midpoint, which maps the domain
        onto itself for bounded and periodic axes alike; the flipped chart's
        point u covers the original chart's point at the reflected u.
        """
        ax = self.domain.axes[0]
        pivot = ax.lower + ax.upper
        base = self.immersion

        def flipped(u):
            return base([pivot - u[0], *u[1:]])

        return Chart(
            self.domain,
            self.ambient_dim,
            flipped,
            mode=self.mode,
            fd_step=self.fd_step,
            name=self.name + "~flip",
        )

    def reflect_point(self, pts: np.ndarray) -> np.ndarray:
        """Parameter map pairing points of a chart and its orientation flip."""
        pts = np.array(np.atleast_2d(pts), dtype=float)
        ax = self.domain.axes[0]
        pts[:, 0] = ax.lower + ax.upper - pts[:, 0]
        return pts

    # -- evaluation ----------------------------------------------------------

    def value(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        self.domain.check_interior(pts)
        return np.stack(self.immersion([pts[:, i] for i in range(self.dim)]), axis=-1)

    def series(self, pts: np.ndarray, order: int) -> list[TaylorSeries]:
        """Ambient components as Taylor series around a batch of points."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if order > MAX_JET_ORDER:
            raise UnsupportedOrderError(
                f"jet order {order} exceeds the supported maximum {MAX_JET_ORDER}"
            )
        if self.mode == "analytic":
            self.domain.check_interior(pts)
            seeds = variables(pts, order)
            out = self.immersion(seeds)
        else:
            self.domain.check_interior(pts, margin=2.0 * self.fd_step)
            ctx, coeffs = _fd_coefficients(
                self.immersion, pts, order, self.fd_step, self.ambient_dim
            )
            out = [TaylorSeries(ctx, coeffs[:, :, a]) for a in range(self.ambient_dim)]
        if len(out) != self.ambient_dim:
            raise ValueError("immersion returned the wrong number of components")
        return list(out)

    def jet(self, pts: np.ndarray, order: int) -> Jet:
        """Dense symmetric derivative arrays up to ``order``."""
        comps = self.series(pts, order)
        return jet_from_series(comps, np.atleast_2d(np.asarray(pts, dtype=float)))


def jet_from_series(comps: list[TaylorSeries], pts: np.ndarray) -> Jet:
    n = comps[0].nvars
    order = comps[0].order
    m = comps[0].value.shape[0] if comps[0].batch_shape else 1
    derivs = []
    for k in range(order + 1):
        arr = np.empty((m,) + (n,) * k + (len(comps),))
        for idx in itertools.product(range(n), repeat=k):
            alpha = [0] * n
            for i in idx:
                alpha[i] += 1
            for a, comp in enumerate(comps):
                arr[(slice(None),) + idx + (a,)] = comp.derivative(alpha)
        derivs.append(arr)
    return Jet(order=order, points=pts, derivs=tuple(derivs))


def evaluate_jet(chart: Chart, u, order: int) -> Jet:
    """Jet of the immersion at a single parameter point."""
    if order > MAX_JET_ORDER:
        raise UnsupportedOrderError(
            f"jet order {order} exceeds the supported maximum {MAX_JET_ORDER}"
        )
    return chart.jet(np.atleast_2d(np.asarray(u, dtype=float)), order)


def sphere_constraint_residual(chart: Chart, pts: np.ndarray) -> float:
    """Supremum of | |X(u)| - 1 | over the given points."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    if pts.size == 0:
        raise InvalidGridError("empty point set")
    x = chart.value(pts)
    return float(np.max(np.abs(np.linalg.norm(x, axis=-1) - 1.0)))
