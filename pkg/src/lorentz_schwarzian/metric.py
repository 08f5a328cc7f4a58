"""Conformal Lorentz metrics ``g(x, y) dx dy`` on RP^1 x RP^1.

The main family is ``dx dy / D(x, y)^2`` with ``D = a x y + b x + c y + d``,
encoded by the matrix ``M = ((a, b), (c, d))`` so that
``D = (x, 1) M (y, 1)^T``. As a quadratic form ``g dx dy`` has components
``g_xy = g_yx = g / 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import SingularityError
from .projective import MobiusMap, PairMobius

SING_EPS = 1e-8

# Overall sign applied to the Levi-Civita scalar curvature. With
# R^r_{smn} = d_m G^r_{ns} - d_n G^r_{ms} + G^r_{ml} G^l_{ns} - G^r_{nl} G^l_{ms},
# Ric_{sn} = R^r_{srn} and R = g^{sn} Ric_{sn}, the matrix ((0, 1), (-1, 0))
# already yields +8, so no flip is needed.
CURVATURE_SIGN = 1.0
# |det| below this fraction of the squared entry scale counts as rank one
RANK_TOL = 1e-12

FLAT_MATRIX = np.array([[0.0, 0.0], [0.0, 1.0]])
CONST_POS_MATRIX = np.array([[0.0, 1.0], [-1.0, 0.0]])
CONST_NEG_MATRIX = np.array([[0.0, 1.0], [1.0, 0.0]])


class MetricValues(NamedTuple):
    g: float | np.ndarray
    gx: float | np.ndarray
    gy: float | np.ndarray
    gxx: float | np.ndarray
    gyy: float | np.ndarray
    gxy: float | np.ndarray


@dataclass(frozen=True)
class MetricQuad:
    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        if self.a == self.b == self.c == self.d == 0:
            raise ValueError("metric quadruple must not be the zero matrix")
        for name in "abcd":
            object.__setattr__(self, name, float(getattr(self, name)))

    @classmethod
    def from_matrix(cls, m) -> MetricQuad:
        m = np.asarray(m, dtype=float)
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    @classmethod
    def from_json(cls, desc: dict) -> MetricQuad:
        return cls(desc["a"], desc["b"], desc["c"], desc["d"])

    def to_json(self) -> dict:
        return {"a": self.a, "b": self.b, "c": self.c, "d": self.d}

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    @property
    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    @property
    def rank_one(self) -> bool:
        return abs(self.det) <= RANK_TOL * float(np.max(np.abs(self.matrix))) ** 2

    @property
    def curvature(self) -> float:
        return 8.0 * self.det

    def denominator(self, x, y):
        return self.a * x * y + self.b * x + self.c * y + self.d


def _inverse_square(D, Dx, Dy, Dxx, Dyy, Dxy) -> MetricValues:
    inv = 1.0 / D
    i2, i3, i4 = inv ** 2, inv ** 3, inv ** 4
    return MetricValues(
        i2,
        -2 * Dx * i3,
        -2 * Dy * i3,
        6 * Dx * Dx * i4 - 2 * Dxx * i3,
        6 * Dy * Dy * i4 - 2 * Dyy * i3,
        6 * Dx * Dy * i4 - 2 * Dxy * i3,
    )


def _check_regular(D, x, y, eps):
    absd = np.abs(D)
    if np.any(absd <= eps):
        i = int(np.argmin(absd))
        where = (float(np.broadcast_to(x, np.shape(D)).ravel()[i]) if np.ndim(D) else x,
                 float(np.broadcast_to(y, np.shape(D)).ravel()[i]) if np.ndim(D) else y)
        raise SingularityError(f"point {where} is within {eps:g} of the singular set "
                               f"(|D| = {float(np.min(absd)):.3g})",
                               denominator=float(np.min(absd)), where=where)


class ConformalMetric:
    """``g(x, y) dx dy`` with ``g > 0``; subclasses provide :meth:`evaluate`.

    ``chart`` is ``"affine"`` for the coordinates ``(x, y)`` or ``"angle"``
    when the coordinates are the angles ``(theta, psi)`` of both factors.
    """

    kind = "custom"
    chart = "affine"
    name = "custom"

    def evaluate(self, x, y) -> MetricValues:
        raise NotImplementedError

    def __call__(self, x, y) -> MetricValues:
        return self.evaluate(x, y)


class QuadMetric(ConformalMetric):
    kind = "quad"

    def __init__(self, quad: MetricQuad, eps: float = SING_EPS):
        self.quad = quad
        self.eps = eps
        self.name = f"quad{quad.matrix.tolist()}"
        if np.allclose(quad.matrix, FLAT_MATRIX * quad.d) and quad.d != 0:
            self.kind = "flat"

    def evaluate(self, x, y) -> MetricValues:
        q = self.quad
        D = q.denominator(x, y)
        _check_regular(D, x, y, self.eps)
        Dx = q.a * y + q.b
        Dy = q.a * x + q.c
        zero = 0.0 * D
        return _inverse_square(D, Dx, Dy, zero, zero, q.a + zero)

    def angle_chart(self) -> AngleQuadMetric:
        return AngleQuadMetric(self.quad, self.eps)


class AngleQuadMetric(ConformalMetric):
    """The family metric written in angle coordinates ``x = tan(theta)``, ``y = tan(psi)``:
    ``d theta d psi / E^2`` with ``E = (sin theta, cos theta) M (sin psi, cos psi)^T``."""

    kind = "quad"
    chart = "angle"

    def __init__(self, quad: MetricQuad, eps: float = SING_EPS):
        self.quad = quad
        self.eps = eps
        self.name = f"quad_angle{quad.matrix.tolist()}"

    def denominator(self, theta, psi):
        q = self.quad
        st, ct, sp, cp = np.sin(theta), np.cos(theta), np.sin(psi), np.cos(psi)
        return q.a * st * sp + q.b * st * cp + q.c * ct * sp + q.d * ct * cp

    def evaluate(self, theta, psi) -> MetricValues:
        q = self.quad
        st, ct, sp, cp = np.sin(theta), np.cos(theta), np.sin(psi), np.cos(psi)
        E = q.a * st * sp + q.b * st * cp + q.c * ct * sp + q.d * ct * cp
        _check_regular(E, theta, psi, self.eps)
        Et = q.a * ct * sp + q.b * ct * cp - q.c * st * sp - q.d * st * cp
        Ep = q.a * st * cp - q.b * st * sp + q.c * ct * cp - q.d * ct * sp
        Etp = q.a * ct * cp - q.b * ct * sp - q.c * st * cp + q.d * st * sp
        return _inverse_square(E, Et, Ep, -E, -E, Etp)


class _Custom(ConformalMetric):
    def __init__(self, name, fn):
        self.name = name
        self._fn = fn

    def evaluate(self, x, y) -> MetricValues:
        return self._fn(x, y)


def _exp_xy(x, y):
    g = np.exp(x * y)
    return MetricValues(g, y * g, x * g, y * y * g, x * x * g, (1 + x * y) * g)


def _inv_bowl(x, y):
    q = 1.0 + x * x + y * y
    i3, i4 = q ** -3, q ** -4
    return MetricValues(q ** -2, -4 * x * i3, -4 * y * i3,
                        -4 * i3 + 24 * x * x * i4, -4 * i3 + 24 * y * y * i4, 24 * x * y * i4)


def _wave(x, y):
    sx, cx, sy, cy = np.sin(x), np.cos(x), np.sin(y), np.cos(y)
    return MetricValues(2.0 + sx * cy, cx * cy, -sx * sy, -sx * cy, -sx * cy, -cx * sy)


CUSTOM_METRICS = {
    "exp_xy": _exp_xy,      # g = exp(x y)
    "inv_bowl": _inv_bowl,  # g = 1 / (1 + x^2 + y^2)^2
    "wave": _wave,          # g = 2 + sin(x) cos(y)
}


def custom_metric(name: str) -> ConformalMetric:
    try:
        return _Custom(name, CUSTOM_METRICS[name])
    except KeyError:
        raise ValueError(f"unknown custom metric {name!r}; "
                         f"choose from {sorted(CUSTOM_METRICS)}") from None


def flat_metric() -> QuadMetric:
    return QuadMetric(MetricQuad.from_matrix(FLAT_MATRIX))


def as_metric(m) -> ConformalMetric:
    if isinstance(m, ConformalMetric):
        return m
    if isinstance(m, MetricQuad):
        return QuadMetric(m)
    if isinstance(m, str):
        return flat_metric() if m == "flat" else custom_metric(m)
    if isinstance(m, dict):
        return QuadMetric(MetricQuad.from_json(m))
    raise TypeError(f"cannot interpret {m!r} as a metric")


def metric_eval(M: MetricQuad, x, y, eps: float = SING_EPS) -> MetricValues:
    return QuadMetric(M, eps).evaluate(x, y)


def extra_term(gm, direction: str, x, y):
    """``d^2 g / g - 3/2 (d g / g)^2`` in the named variable."""
    mv = as_metric(gm).evaluate(x, y)
    if direction == "x":
        first, second = mv.gx / mv.g, mv.gxx / mv.g
    elif direction == "y":
        first, second = mv.gy / mv.g, mv.gyy / mv.g
    else:
        raise ValueError(f"direction must be 'x' or 'y', not {direction!r}")
    return second - 1.5 * first * first


# --- Levi-Civita pipeline -------------------------------------------------

_N = np.array([[0.0, 1.0], [1.0, 0.0]])


def _components(mv: MetricValues):
    """Metric components and their first and second partials as arrays:
    ``G[i, j]``, ``dG[k, i, j] = d_k G_ij``, ``ddG[k, l, i, j]``."""
    half = lambda s: 0.5 * np.multiply.outer(_N, s)  # noqa: E731
    G = half(mv.g)
    dG = np.stack([half(mv.gx), half(mv.gy)])
    ddG = np.stack([np.stack([half(mv.gxx), half(mv.gxy)]),
                    np.stack([half(mv.gxy), half(mv.gyy)])])
    return G, dG, ddG


def _inv2(G):
    det = G[0, 0] * G[1, 1] - G[0, 1] * G[1, 0]
    return np.stack([np.stack([G[1, 1], -G[0, 1]]), np.stack([-G[1, 0], G[0, 0]])]) / det


def christoffel_general(gm, x, y) -> np.ndarray:
    """``Gamma[i, j, k] = 1/2 g^{il} (d_j g_lk + d_k g_lj - d_l g_jk)`` from raw components."""
    G, dG, _ = _components(as_metric(gm).evaluate(x, y))
    Gi = _inv2(G)
    t = np.einsum("jlk...->ljk...", dG) + np.einsum("klj...->ljk...", dG) - dG
    return 0.5 * np.einsum("il...,ljk...->ijk...", Gi, t)


def christoffel(gm, x, y) -> np.ndarray:
    """Closed form for ``g dx dy``: only ``Gamma^x_xx = g_x / g`` and ``Gamma^y_yy = g_y / g``."""
    mv = as_metric(gm).evaluate(x, y)
    out = np.zeros((2, 2, 2) + np.shape(mv.g))
    out[0, 0, 0] = mv.gx / mv.g
    out[1, 1, 1] = mv.gy / mv.g
    return out


def scalar_curvature(gm, x, y):
    """Scalar curvature via Christoffel symbols, Riemann tensor and two contractions."""
    G, dG, ddG = _components(as_metric(gm).evaluate(x, y))
    Gi = _inv2(G)
    dGi = -np.einsum("ab...,kbc...,cd...->kad...", Gi, dG, Gi)
    t = np.einsum("jlk...->ljk...", dG) + np.einsum("klj...->ljk...", dG) - dG
    dt = (np.einsum("mjlk...->mljk...", ddG) + np.einsum("mklj...->mljk...", ddG) - ddG)
    gam = 0.5 * np.einsum("il...,ljk...->ijk...", Gi, t)
    # dgam[m, i, j, k] = d_m Gamma^i_jk
    dgam = 0.5 * (np.einsum("mil...,ljk...->mijk...", dGi, t)
                  + np.einsum("il...,mljk...->mijk...", Gi, dt))
    riem = (np.einsum("mrns...->rsmn...", dgam) - np.einsum("nrms...->rsmn...", dgam)
            + np.einsum("rml...,lns...->rsmn...", gam, gam)
            - np.einsum("rnl...,lms...->rsmn...", gam, gam))
    ricci = np.einsum("rsrn...->sn...", riem)
    return CURVATURE_SIGN * np.einsum("sn...,sn...->...", Gi, ricci)


# --- singular set and PSL(2,R) x PSL(2,R) -----------------------------------

@dataclass(frozen=True)
class SingularSet:
    """Locus ``D = 0`` in the affine chart when it is not an increasing graph.

    ``kind`` is ``"reversing"`` (graph of a decreasing linear-fractional map,
    det M < 0), ``"lines"`` (rank one: ``D`` factors into a function of x
    times a function of y) or ``"empty"`` (``D`` constant).
    """

    kind: str
    matrix: np.ndarray
    x_line: float | None = None
    y_line: float | None = None


def singular_mobius(M: MetricQuad):
    """The map ``x -> -(b x + d) / (a x + c)`` whose graph is ``D = 0``.

    Returns a :class:`MobiusMap` when ``det M > 0``, otherwise a
    :class:`SingularSet` descriptor.
    """
    mat = np.array([[-M.b, -M.d], [M.a, M.c]])
    det = M.det
    if det > 0 and not M.rank_one:
        return MobiusMap.from_matrix(mat)
    if det < 0 and not M.rank_one:
        return SingularSet("reversing", mat)
    # rank one: D = (u . (x, 1)) * (v . (y, 1)); zero of each affine factor
    u, v = _rank_one_factors(M.matrix)
    x_line = -u[1] / u[0] if u[0] != 0 else None
    y_line = -v[1] / v[0] if v[0] != 0 else None
    kind = "empty" if x_line is None and y_line is None else "lines"
    return SingularSet(kind, mat, x_line, y_line)


def _rank_one_factors(m):
    U, s, Vt = np.linalg.svd(m)
    return U[:, 0] * s[0], Vt[0]


def transform_quad(M: MetricQuad, p: PairMobius) -> MetricQuad:
    """Parameters of the pullback of ``M`` under ``(x, y) = (A u, B v)``: ``A^T M B``."""
    return MetricQuad.from_matrix(p.left.matrix.T @ M.matrix @ p.right.matrix)


@dataclass
class NormalFormResult:
    pair: PairMobius
    form: str  # "flat" | "const_curv"
    R: float
    canonical: np.ndarray
    residual: float
    matrix_error: float


def canonical_matrix(M: MetricQuad) -> np.ndarray:
    det = M.det
    if M.rank_one:
        return FLAT_MATRIX.copy()
    s = math.sqrt(abs(det))
    return s * (CONST_POS_MATRIX if det > 0 else CONST_NEG_MATRIX)


def normal_form(M: MetricQuad, grid: int = 5) -> NormalFormResult:
    """Pair of Mobius maps bringing ``M`` to ``dx dy`` (det 0) or to
    ``sqrt|det| (x -+ y)`` (det > 0 / det < 0)."""
    m = M.matrix
    det = M.det
    target = canonical_matrix(M)
    if M.rank_one:
        u, v = _rank_one_factors(m)
        pair = PairMobius(_to_e2(u), _to_e2(v))
    else:
        s = math.sqrt(abs(det))
        core = CONST_POS_MATRIX if det > 0 else CONST_NEG_MATRIX
        at = s * core @ np.linalg.inv(m)
        pair = PairMobius(MobiusMap.from_matrix(at.T), MobiusMap.identity())
    got = transform_quad(M, pair).matrix
    err = min(np.max(np.abs(got - target)), np.max(np.abs(got + target)))
    flat = M.rank_one
    return NormalFormResult(pair, "flat" if flat else "const_curv", 0.0 if flat else 8.0 * det,
                            target, pullback_mismatch(M, pair, target, grid), float(err))


def _to_e2(u) -> MobiusMap:
    """SL(2) matrix ``A`` with ``A^T u = e_2``."""
    n = math.hypot(u[0], u[1])
    c, s = u[1] / n, u[0] / n
    rot = np.array([[c, -s], [s, c]])  # rot @ u = (0, n)
    at = np.diag([n, 1.0 / n]) @ rot
    return MobiusMap.from_matrix(at.T)


def pullback_mismatch(M: MetricQuad, pair: PairMobius, target=None, grid: int = 5,
                      span: float = 1.0) -> float:
    """Max relative gap between ``g_target(u, v)`` and ``g_M(A u, B v) A'(u) B'(v)``
    on a ``grid x grid`` lattice, skipping points near either singular set or a chart pole."""
    target = transform_quad(M, pair) if target is None else MetricQuad.from_matrix(target)
    us = np.linspace(-span, span, grid) + 0.1234
    worst = 0.0
    A, B = pair.left, pair.right
    for u in us:
        for v in us - 0.0567:
            wa, wb = A.gamma * u + A.delta, B.gamma * v + B.delta
            Dt = target.denominator(u, v)
            if min(abs(wa), abs(wb), abs(Dt)) < 1e-3:
                continue
            x, y = A(u), B(v)
            D = M.denominator(x, y)
            if abs(D) < 1e-6:
                continue
            pulled = 1.0 / (D * D) / (wa * wa) / (wb * wb)
            direct = 1.0 / (Dt * Dt)
            worst = max(worst, abs(pulled - direct) / direct)
    return worst


def random_quad(rng, rank_one: bool = False, det_range=(0.1, 10.0)) -> MetricQuad:
    """Random family member: Gaussian entries rescaled to a log-uniform ``|det|``
    in ``det_range`` with a random sign, or a random rank-one matrix."""
    if rank_one:
        u, v = rng.normal(size=2), rng.normal(size=2)
        return MetricQuad.from_matrix(np.outer(u, v))
    while True:
        m = rng.normal(size=(2, 2))
        det = np.linalg.det(m)
        if abs(det) > 1e-3:
            break
    target = math.exp(rng.uniform(math.log(det_range[0]), math.log(det_range[1])))
    m = m * math.sqrt(target / abs(det))
    if rng.random() < 0.5:
        m = m[:, ::-1]
    return MetricQuad.from_matrix(m)
