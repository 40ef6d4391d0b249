"""First/second fundamental forms, unit normal, and curvature invariants.

The whole pipeline runs in Taylor arithmetic: evaluating it at series order 0
gives pointwise extrinsic data, while higher orders expose derived quantities
(mean curvature, second fundamental form) as differentiable scalar fields for
the nested operators in :mod:`bihsurf.intrinsic`.  Order bookkeeping is
automatic - a chart series of order k yields the metric at order k-1 and the
second fundamental form and mean curvature at order k-2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh

from .charts import Chart
from .errors import ImmersionError
from .taylor import TaylorSeries, constant

DEGENERACY_TOL = 1e-12

__all__ = [
    "AmbientSpace",
    "UNIT_SPHERE",
    "ExtrinsicData",
    "SurfaceFrame",
    "surface_frame",
    "extrinsic_at",
    "extrinsic_batch",
    "principal_curvatures",
]


@dataclass(frozen=True)
class AmbientSpace:
    """Round ambient space of constant sectional curvature.

    Only curvature 1 (the unit sphere) is exercised by the catalog, but the
    residual formulas keep the curvature symbolic so a space-form change is a
    single constructor argument.  For any space form the Ricci tensor is
    ``n * curvature`` times the metric, so the tangential projection of the
    Ricci operator applied to the unit normal vanishes identically.
    """

    curvature: float = 1.0

    def ricci_normal_normal(self, dim: int) -> float:
        return dim * self.curvature

    def ricci_normal_tangent(self, dim: int) -> float:
        return 0.0


UNIT_SPHERE = AmbientSpace(1.0)


def vdot(u, v):
    """Sum of componentwise products; generic over series and arrays."""
    acc = u[0] * v[0]
    for a, b in zip(u[1:], v[1:]):
        acc = acc + a * b
    return acc


def _normalize(v):
    inv = vdot(v, v).sqrt().reciprocal()
    return [x * inv for x in v]


def _project_off(v, basis):
    for q in basis:
        c = vdot(v, q)
        v = [x - c * qb for x, qb in zip(v, q)]
    return v


def _inverse_and_det(g):
    """Gauss-Jordan inverse and determinant; relies on SPD diagonal pivots."""
    n = len(g)
    ctx = g[0][0].ctx
    a = [row[:] for row in g]
    inv = [
        [constant(ctx, 1.0) if i == j else constant(ctx, 0.0) for j in range(n)]
        for i in range(n)
    ]
    det = constant(ctx, 1.0)
    for col in range(n):
        piv = a[col][col]
        det = det * piv
        ipiv = piv.reciprocal()
        a[col] = [x * ipiv for x in a[col]]
        inv[col] = [x * ipiv for x in inv[col]]
        for r in range(n):
            if r == col:
                continue
            f = a[r][col]
            a[r] = [x - f * y for x, y in zip(a[r], a[col])]
            inv[r] = [x - f * y for x, y in zip(inv[r], inv[col])]
    return inv, det


def _unit_normal(position, tangents):
    """Gram-Schmidt complement of span{X, dX} with a deterministic sign.

    The sign makes the frame (d_1 X, ..., d_n X, N, X) positively oriented in
    the ambient Euclidean space; the seed direction is the coordinate axis
    with the largest residual, chosen per point (the completed complement is
    one-dimensional, so the seed choice cannot affect the result beyond
    conditioning).
    """
    d = len(position)
    basis = [_normalize(list(position))]
    for tang in tangents:
        basis.append(_normalize(_project_off(list(tang), basis)))

    qvals = np.array([[np.atleast_1d(q[a].value) for a in range(d)] for q in basis])
    scores = 1.0 - np.sum(qvals**2, axis=0)  # (d, m)
    best = np.argmax(scores, axis=0)  # (m,)

    ctx = basis[-1][0].ctx
    seed = [constant(ctx, (best == a).astype(float)) for a in range(d)]
    normal = _normalize(_project_off(seed, basis))

    m = len(best)
    frame = np.empty((m, d, d))
    for i, tang in enumerate(tangents):
        for a in range(d):
            frame[:, i, a] = np.atleast_1d(tang[a].value)
    for a in range(d):
        frame[:, d - 2, a] = np.atleast_1d(normal[a].value)
        frame[:, d - 1, a] = np.atleast_1d(position[a].value)
    sign = np.where(np.linalg.det(frame) < 0.0, -1.0, 1.0)
    return [comp * sign for comp in normal]


@dataclass
class SurfaceFrame:
    """Series bundle of extrinsic data over a batch of parameter points."""

    chart: Chart
    points: np.ndarray
    order: int
    position: list
    tangents: list
    metric: list
    metric_inv: list
    det_metric: TaylorSeries
    second_derivs: list | None = None
    normal: list | None = None
    second_form: list | None = None
    mean_curvature: TaylorSeries | None = None
    form_norm_sq: TaylorSeries | None = None

    @property
    def dim(self) -> int:
        return self.chart.dim


def surface_frame(chart: Chart, pts, order: int, need_normal: bool = True) -> SurfaceFrame:
    """Evaluate the extrinsic pipeline in series arithmetic.

    ``order`` is the chart jet order; derived quantities come out at the
    orders dictated by their derivative count.  ``need_normal=False`` skips
    the normal/second-form stage, which also allows charts whose image spans
    the full ambient space (used when treating the ambient sphere itself as a
    parametric manifold for oracle checks).
    """
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    n = chart.dim
    position = chart.series(pts, order)
    tangents = [[comp.partial(i) for comp in position] for i in range(n)]
    metric = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            metric[i][j] = metric[j][i] = vdot(tangents[i], tangents[j])

    gval = np.empty((pts.shape[0], n, n))
    for i in range(n):
        for j in range(n):
            gval[:, i, j] = np.atleast_1d(metric[i][j].value)
    detval = np.linalg.det(gval)
    scale = np.trace(gval, axis1=1, axis2=2) / n
    bad = detval <= DEGENERACY_TOL * scale**n
    if np.any(bad):
        where = pts[bad][0]
        raise ImmersionError(
            f"degenerate induced metric (det g = {detval[bad][0]:.3e}) at point {tuple(where)}"
        )

    metric_inv, det_metric = _inverse_and_det(metric)
    fr = SurfaceFrame(
        chart=chart,
        points=pts,
        order=order,
        position=position,
        tangents=tangents,
        metric=metric,
        metric_inv=metric_inv,
        det_metric=det_metric,
    )
    if not need_normal:
        return fr
    if chart.ambient_dim != n + 2:
        raise ImmersionError("normal computation needs a hypersurface of the sphere")
    if order < 2:
        raise ValueError("second fundamental form needs chart order >= 2")

    second = [[[comp.partial(j) for comp in tangents[i]] for j in range(n)] for i in range(n)]
    normal = _unit_normal(position, tangents)
    form = [[vdot(second[i][j], normal) for j in range(n)] for i in range(n)]

    mean = None
    for i in range(n):
        for j in range(n):
            term = fr.metric_inv[i][j] * form[i][j]
            mean = term if mean is None else mean + term
    shape = [
        [_sum(fr.metric_inv[i][k] * form[k][j] for k in range(n)) for j in range(n)]
        for i in range(n)
    ]
    norm_sq = _sum(shape[i][j] * shape[j][i] for i in range(n) for j in range(n))

    fr.second_derivs = second
    fr.normal = normal
    fr.second_form = form
    fr.mean_curvature = mean
    fr.form_norm_sq = norm_sq
    return fr


def _sum(terms):
    acc = None
    for t in terms:
        acc = t if acc is None else acc + t
    return acc


@dataclass
class ExtrinsicData:
    """Pointwise extrinsic quantities (batch-first arrays).

    ``metric``/``metric_inv``/``second_form``/``shape_operator`` have shape
    ``(m, n, n)``, ``normal`` has shape ``(m, n+2)``, and the scalar entries
    have shape ``(m,)``; the single-point constructor squeezes m = 1 away.
    """

    metric: np.ndarray
    metric_inv: np.ndarray
    volume_density: np.ndarray
    normal: np.ndarray
    second_form: np.ndarray
    mean_curvature: np.ndarray
    form_norm_sq: np.ndarray
    shape_operator: np.ndarray


def _collect(frame: SurfaceFrame) -> ExtrinsicData:
    n = frame.dim
    d = frame.chart.ambient_dim
    m = frame.points.shape[0]

    def mat(entries):
        out = np.empty((m, n, n))
        for i in range(n):
            for j in range(n):
                out[:, i, j] = np.atleast_1d(entries[i][j].value)
        return out

    g = mat(frame.metric)
    ginv = mat(frame.metric_inv)
    a = mat(frame.second_form)
    normal = np.stack([np.atleast_1d(c.value) * np.ones(m) for c in frame.normal], axis=-1)
    shape_op = ginv @ a
    return ExtrinsicData(
        metric=g,
        metric_inv=ginv,
        volume_density=np.sqrt(np.atleast_1d(frame.det_metric.value)),
        normal=normal.reshape(m, d),
        second_form=a,
        mean_curvature=np.atleast_1d(frame.mean_curvature.value),
        form_norm_sq=np.atleast_1d(frame.form_norm_sq.value),
        shape_operator=shape_op,
    )


def extrinsic_batch(chart: Chart, pts) -> ExtrinsicData:
    """Extrinsic data over a batch of parameter points."""
    return _collect(surface_frame(chart, pts, order=2))


def extrinsic_at(chart: Chart, u) -> ExtrinsicData:
    """Extrinsic data at a single parameter point (scalar fields squeezed)."""
    data = extrinsic_batch(chart, np.atleast_2d(np.asarray(u, dtype=float)))
    return ExtrinsicData(
        metric=data.metric[0],
        metric_inv=data.metric_inv[0],
        volume_density=float(data.volume_density[0]),
        normal=data.normal[0],
        second_form=data.second_form[0],
        mean_curvature=float(data.mean_curvature[0]),
        form_norm_sq=float(data.form_norm_sq[0]),
        shape_operator=data.shape_operator[0],
    )


def principal_curvatures(data: ExtrinsicData) -> np.ndarray:
    """Eigenvalues of the shape operator, sorted ascending.

    Solved as the symmetric-definite pencil (A, g), which is equivalent to
    eigensolving g^{-1} A but keeps the computation symmetric.
    """
    a = np.atleast_3d(data.second_form if data.second_form.ndim == 3 else data.second_form[None])
    g = np.atleast_3d(data.metric if data.metric.ndim == 3 else data.metric[None])
    out = np.stack([eigh(ai, gi, eigvals_only=True) for ai, gi in zip(a, g)])
    return out[0] if data.second_form.ndim == 2 else out
