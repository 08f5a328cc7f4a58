"""Schwarzian derivative, its cocycle law, and zero counting on RP^1."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .jets import Jet3, jet_compose

DERIV_EPS = 1e-12
TANGENTIAL_TOL = 1e-9
DEGENERATE_TOL = 1e-9


@dataclass(frozen=True)
class QuadDiffSample:
    """Coefficient of ``(d coord)^2`` of a quadratic differential at ``point``."""

    coord: str  # "affine_x" | "angle_theta" | "param_tau"
    point: float | np.ndarray
    value: float | np.ndarray

    def pullback(self, h: Jet3) -> float:
        """Coefficient in the coordinate ``s`` with ``point = h(s)``."""
        return self.value * h.d1 ** 2


@dataclass
class ZeroReport:
    count: int
    locations: list
    simple: list
    min_separation: float
    degenerate: bool = False
    tangential: list = field(default_factory=list)

    @property
    def is_even(self) -> bool:
        return self.count % 2 == 0


def schwarzian(j: Jet3):
    """``f'''/f' - 3/2 (f''/f')^2`` at the jet's base point."""
    if np.any(np.abs(j.d1) <= DERIV_EPS):
        raise DomainError("Schwarzian of a map with vanishing derivative")
    r = j.d2 / j.d1
    return j.d3 / j.d1 - 1.5 * r * r


def schwarzian_cocycle_residual(f, g, theta):
    """``S(f o g) - [S(f) o g * g'^2 + S(g)]`` in the angle coordinate; zero in exact arithmetic."""
    jg = g.jet_angle(theta)
    jf = f.jet_angle(jg.v)
    composite = jet_compose(jf, jg)
    return schwarzian(composite) - (schwarzian(jf) * jg.d1 ** 2 + schwarzian(jg))


def projective_schwarzian_value(j: Jet3):
    # the tan chart has S(tan) = 2, which the cocycle law turns into this correction
    return schwarzian(j) + 2.0 * (j.d1 ** 2 - 1.0)


def projective_schwarzian(f, theta) -> QuadDiffSample:
    """Schwarzian of a diffeomorphism of RP^1 as a quadratic differential in ``theta``.

    Agrees with ``S(f)(x) dx^2`` in the affine chart ``x = tan(theta)`` and
    vanishes identically on PSL(2, R).
    """
    return QuadDiffSample("angle_theta", theta, projective_schwarzian_value(f.jet_angle(theta)))


def relative_schwarzian(jx: Jet3, jy: Jet3) -> QuadDiffSample:
    """``S(y) - S(x)`` for two maps sharing a parameter ``tau``."""
    if np.any(jx.d1 <= 0) or np.any(jy.d1 <= 0):
        raise DomainError("relative Schwarzian needs increasing components")
    return QuadDiffSample("param_tau", None, schwarzian(jy) - schwarzian(jx))


def count_zeros_periodic(fn, n_grid: int = 4096, refine_tol: float = 1e-10,
                         period: float = math.pi,
                         tangential_tol: float = TANGENTIAL_TOL,
                         degenerate_tol: float = DEGENERATE_TOL) -> ZeroReport:
    """Sign-change zeros of a continuous ``period``-periodic function on ``[0, period)``.

    ``fn`` must accept numpy arrays. Brackets found on a uniform grid are
    refined by (vectorized) bisection to ``refine_tol``. Touching zeros with
    no sign change are listed in ``tangential`` and not counted. A function
    whose grid values all lie below ``degenerate_tol`` is reported as
    degenerate with count 0.
    """
    if n_grid < 256:
        raise ValueError("n_grid must be at least 256")
    t = np.linspace(0.0, period, n_grid, endpoint=False)
    vals = np.asarray(fn(t), dtype=float)
    if np.max(np.abs(vals)) < degenerate_tol:
        return ZeroReport(0, [], [], math.inf, degenerate=True)

    pos = vals >= 0
    brackets = np.nonzero(pos != np.roll(pos, -1))[0]
    lo = t[brackets]
    hi = lo + period / n_grid
    flo = vals[brackets]
    while np.any(hi - lo > refine_tol):
        mid = 0.5 * (lo + hi)
        fm = np.asarray(fn(mid), dtype=float)
        left = (fm >= 0) != (flo >= 0)
        hi = np.where(left, mid, hi)
        lo = np.where(left, lo, mid)
        flo = np.where(left, flo, fm)
    roots = np.mod(0.5 * (lo + hi), period)
    roots = np.sort(np.where(period - roots <= refine_tol, 0.0, roots))
    roots = _merge(roots, 2 * refine_tol, period)

    absv = np.abs(vals)
    local_min = (absv <= np.roll(absv, 1)) & (absv <= np.roll(absv, -1))
    no_change = (pos == np.roll(pos, 1)) & (pos == np.roll(pos, -1))
    tangential = [float(x) for x in t[local_min & no_change & (absv < tangential_tol)]]

    if len(roots) > 1:
        gaps = np.diff(np.append(roots, roots[0] + period))
        min_sep = float(gaps.min())
    else:
        min_sep = math.inf
    return ZeroReport(len(roots), [float(r) for r in roots], [True] * len(roots),
                      min_sep, tangential=tangential)


def _merge(roots, tol, period):
    if len(roots) < 2:
        return roots
    keep = [roots[0]]
    for r in roots[1:]:
        if r - keep[-1] > tol:
            keep.append(r)
    if len(keep) > 1 and keep[0] + period - keep[-1] <= tol:
        keep.pop()
    return np.array(keep)


def sign_change_count(values) -> int:
    """Number of cyclic sign changes in a sampled periodic function."""
    pos = np.asarray(values) >= 0
    return int(np.count_nonzero(pos != np.roll(pos, -1)))


def match_distance(a, b, period: float = math.pi) -> float:
    """Largest cyclic distance from a point of ``a`` to its nearest point of ``b``
    (requires equal counts; ``inf`` otherwise)."""
    if len(a) != len(b):
        return math.inf
    if not len(a):
        return 0.0
    a = np.asarray(a)[:, None]
    b = np.asarray(b)[None, :]
    d = np.abs(a - b) % period
    d = np.minimum(d, period - d)
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))
