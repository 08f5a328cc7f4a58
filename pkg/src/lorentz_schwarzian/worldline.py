"""Time-like worldlines ``tau -> (x(tau), y(tau))`` and their Lorentz curvature.

Curvature is computed two ways: by the closed formula in null coordinates
(:func:`curvature_formula`) and from first principles through the
Levi-Civita connection (:func:`curvature_oracle`). Only the outer derivative
``rho'`` in :func:`rho_prime_lhs` is numerical; everything else uses exact jets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .diffeo import CircleDiffeo
from .errors import DomainError, IntegrationError, TimelikeError
from .jets import Jet3, elementary_jet, jet_compose
from .metric import as_metric, christoffel, extra_term
from .schwarzian import ZeroReport, count_zeros_periodic, relative_schwarzian, schwarzian

TIMELIKE_MARGIN = 1e-8
STENCIL_H = 1e-4
# omega = AREA_SCALE * sqrt|det g_ij| dx^dy. The Riemannian area form of
# g dx dy is (g/2) dx^dy; doubling it makes flat graphs y = f(x) have
# curvature f'' f'^(-3/2).
AREA_SCALE = 2.0


@dataclass(frozen=True)
class Worldline:
    x_jet: Callable
    y_jet: Callable
    kind: str = "explicit"  # "graph" | "graph_angle" | "explicit" | "reparametrized"
    chart: str = "affine"
    domain: tuple | None = None
    name: str = ""
    diffeo: CircleDiffeo | None = None

    @property
    def closed(self) -> bool:
        return self.kind == "graph_angle"

    def point(self, tau):
        return self.x_jet(tau).v, self.y_jet(tau).v


@dataclass
class ResidualReport:
    n_points: int
    max_abs: float
    rms: float
    worst_point: float
    details: list = field(default_factory=list)  # (tau, lhs, rhs, residual)
    failures: list = field(default_factory=list)  # (tau, message)


# --- constructors -------------------------------------------------------

def _as_array(t):
    return np.asarray(t, dtype=float) if isinstance(t, np.ndarray) else float(t)


def graph(f, name: str = "") -> Worldline:
    """Graph ``y = f(x)`` in the affine chart, parametrized by ``tau = x``.

    ``f`` is a :class:`CircleDiffeo` or any callable returning a :class:`Jet3`.
    """
    fn = f.jet_affine if isinstance(f, CircleDiffeo) else f
    return Worldline(Jet3.identity, lambda t: fn(_as_array(t)), "graph", "affine",
                     name=name or getattr(f, "kind", "graph"),
                     diffeo=f if isinstance(f, CircleDiffeo) else None)


def graph_angle(f: CircleDiffeo, name: str = "") -> Worldline:
    """Closed graph ``psi = phi(theta)`` in angle coordinates, ``tau = theta``, period pi."""
    return Worldline(Jet3.identity, lambda t: f.jet_angle(_as_array(t)), "graph_angle",
                     "angle", (0.0, math.pi), name or f.kind, f)


def _wavy_component(c0, c1, amp, freq, phase):
    def jet(t):
        t = _as_array(t)
        s, c = np.sin(freq * t + phase), np.cos(freq * t + phase)
        return Jet3(c0 + c1 * t + amp * s, c1 + amp * freq * c,
                    -amp * freq ** 2 * s, -amp * freq ** 3 * c)
    return jet


EXPLICIT_CURVES = {
    "diagonal": lambda: (Jet3.identity, Jet3.identity),
    "exp_graph": lambda: (Jet3.identity, lambda t: elementary_jet("exp", _as_array(t))),
    "cube_graph": lambda: (Jet3.identity, lambda t: elementary_jet("power", _as_array(t), 3)),
    "hyperbola": lambda: (Jet3.identity, lambda t: elementary_jet("power", _as_array(t), -1) * -1.0),
    "wavy": lambda x=(0.0, 1.0, 0.3, 1.0, 0.0), y=(0.0, 1.0, 0.3, 1.5, 0.5): (
        _wavy_component(*x), _wavy_component(*y)),
}


def explicit(name: str, **params) -> Worldline:
    """Worldline from the closed-form catalog :data:`EXPLICIT_CURVES`.

    ``wavy`` components are ``c0 + c1 t + amp sin(freq t + phase)``; pass
    ``x=(c0, c1, amp, freq, phase)`` and ``y=(...)``.
    """
    try:
        xj, yj = EXPLICIT_CURVES[name](**params)
    except KeyError:
        raise ValueError(f"unknown explicit curve {name!r}") from None
    return Worldline(xj, yj, "explicit", "affine", name=name)


def random_wavy(rng: np.random.Generator, span: float = 1.0) -> Worldline:
    """Random increasing ``wavy`` curve; both components have slope >= 0.2."""
    comps = []
    for _ in range(2):
        freq = rng.uniform(0.5, 3.0)
        c1 = rng.uniform(0.5, 1.5)
        amp = rng.uniform(-1, 1) * (c1 - 0.2) / freq
        comps.append((rng.uniform(-span, span), c1, amp, freq, rng.uniform(0, 2 * math.pi)))
    return explicit("wavy", x=comps[0], y=comps[1])


def reparametrize(w: Worldline, h: Callable) -> Worldline:
    """The curve ``sigma -> w(h(sigma))``; ``h`` returns jets with ``h' > 0``."""
    def comp(jet_fn):
        def jet(s):
            hs = h(s)
            return jet_compose(jet_fn(hs.v), hs)
        return jet
    return Worldline(comp(w.x_jet), comp(w.y_jet), "reparametrized", w.chart, None,
                     w.name + "_reparam", w.diffeo)


# --- evaluation ---------------------------------------------------------

def _state(w: Worldline, gm, tau):
    gm = as_metric(gm)
    if gm.chart != w.chart:
        raise ValueError(f"worldline chart {w.chart!r} does not match metric chart {gm.chart!r}")
    jx, jy = w.x_jet(tau), w.y_jet(tau)
    return gm, jx, jy, gm.evaluate(jx.v, jy.v)


def _timelike(mv, jx, jy, tau, margin):
    gvv = mv.g * jx.d1 * jy.d1
    bad = np.logical_not(gvv > margin)
    if np.any(bad):
        where = float(np.broadcast_to(tau, np.shape(bad))[bad].flat[0]) if np.ndim(bad) else tau
        raise TimelikeError(f"curve is not time-like at tau = {where} (g(v,v) <= {margin:g})",
                            where=where)
    return gvv


def velocity_norm(w: Worldline, gm, tau, margin: float = TIMELIKE_MARGIN):
    """``g(v, v) = g(x, y) x' y'``."""
    _, jx, jy, mv = _state(w, gm, tau)
    return _timelike(mv, jx, jy, tau, margin)


def proper_time(w: Worldline, gm, tau0: float, tau1: float, tol: float = 1e-10,
                scan: int = 257) -> float:
    """Lorentz arc-length ``int sqrt(g(v, v)) d tau`` by adaptive quadrature."""
    if not tau1 > tau0:
        raise IntegrationError(f"need tau1 > tau0, got [{tau0}, {tau1}]")
    for t in np.linspace(tau0, tau1, scan):
        try:
            velocity_norm(w, gm, float(t))
        except DomainError as exc:
            raise IntegrationError(f"inadmissible point tau = {t}: {exc}", where=float(t)) from exc
    val, _ = quad(lambda t: math.sqrt(velocity_norm(w, gm, t)), tau0, tau1,
                  epsabs=tol, epsrel=1e-13, limit=500)
    return val


def curvature_formula(w: Worldline, gm, tau):
    """``rho = (x'y'' - x''y') / (g^1/2 (x'y')^3/2) - (x' g_x - y' g_y) / (g^3/2 (x'y')^1/2)``."""
    _, jx, jy, mv = _state(w, gm, tau)
    _timelike(mv, jx, jy, tau, TIMELIKE_MARGIN)
    p = jx.d1 * jy.d1
    return ((jx.d1 * jy.d2 - jx.d2 * jy.d1) / (np.sqrt(mv.g) * p ** 1.5)
            - (jx.d1 * mv.gx - jy.d1 * mv.gy) / (mv.g ** 1.5 * np.sqrt(p)))


def curvature_oracle(w: Worldline, gm, tau):
    """``rho = omega(v, a) g(v, v)^(-3/2)`` with ``a = nabla_v v``."""
    gm, jx, jy, mv = _state(w, gm, tau)
    _timelike(mv, jx, jy, tau, TIMELIKE_MARGIN)
    gamma = christoffel(gm, jx.v, jy.v)
    v = np.stack(np.broadcast_arrays(jx.d1, jy.d1))
    vdot = np.stack(np.broadcast_arrays(jx.d2, jy.d2))
    acc = vdot + np.einsum("ijk...,j...,k...->i...", gamma, v, v)
    G = 0.5 * np.multiply.outer(np.array([[0.0, 1.0], [1.0, 0.0]]), mv.g)
    gvv = np.einsum("ij...,i...,j...->...", G, v, v)
    vol = np.sqrt(np.abs(G[0, 0] * G[1, 1] - G[0, 1] * G[1, 0]))
    omega = AREA_SCALE * vol * (v[0] * acc[1] - v[1] * acc[0])
    return omega * gvv ** -1.5


def identity_rhs(w: Worldline, gm, tau):
    """``S(y) - S(x) - x'^2 [bracket_x] + y'^2 [bracket_y]``."""
    gm, jx, jy, _ = _state(w, gm, tau)
    bx = extra_term(gm, "x", jx.v, jy.v)
    by = extra_term(gm, "y", jx.v, jy.v)
    return schwarzian(jy) - schwarzian(jx) - jx.d1 ** 2 * bx + jy.d1 ** 2 * by


def rho_prime_lhs(w: Worldline, gm, tau, h: float = STENCIL_H):
    """``sqrt(g(v, v)) * rho'``, with ``rho'`` from the fourth-order five-point stencil."""
    tau = _as_array(tau)
    offsets = np.array([-2.0, -1.0, 1.0, 2.0]) * h
    pts = np.add.outer(offsets, tau)
    r = curvature_formula(w, gm, pts)
    drho = (8 * (r[2] - r[1]) - (r[3] - r[0])) / (12 * h)
    return np.sqrt(velocity_norm(w, gm, tau)) * drho


def theorem_residual(w: Worldline, gm, taus, h: float = STENCIL_H,
                     min_success: float = 0.8) -> ResidualReport:
    """Pointwise ``sqrt(g(v,v)) rho' - (S(y) - S(x))`` over ``taus``.

    Samples that fail to evaluate are recorded in ``failures``; the report is
    an error only if fewer than ``min_success`` of the samples succeed.
    """
    taus = np.asarray(taus, dtype=float)
    try:
        lhs, rhs = _lhs_rhs(w, gm, taus, h)
        ok = np.ones(len(taus), dtype=bool)
        failures = []
    except DomainError:
        lhs, rhs = np.full(len(taus), np.nan), np.full(len(taus), np.nan)
        ok = np.zeros(len(taus), dtype=bool)
        failures = []
        for i, t in enumerate(taus):
            try:
                lhs[i], rhs[i] = _lhs_rhs(w, gm, float(t), h)
                ok[i] = True
            except DomainError as exc:
                failures.append((float(t), str(exc)))
    if ok.sum() < min_success * len(taus) or not ok.any():
        raise DomainError(f"only {ok.sum()} of {len(taus)} samples admissible; "
                          f"first failure: {failures[0] if failures else None}")
    res = lhs[ok] - rhs[ok]
    i = int(np.argmax(np.abs(res)))
    details = [(float(t), float(a), float(b), float(a - b))
               for t, a, b in zip(taus[ok], lhs[ok], rhs[ok])]
    return ResidualReport(int(ok.sum()), float(np.abs(res[i])), float(np.sqrt(np.mean(res ** 2))),
                          float(taus[ok][i]), details, failures)


def _lhs_rhs(w, gm, tau, h):
    _, jx, jy, _ = _state(w, gm, tau)
    return rho_prime_lhs(w, gm, tau, h), relative_schwarzian(jx, jy).value


def vertices(w: Worldline, gm, n_grid: int = 4096, refine_tol: float = 1e-10,
             h: float = STENCIL_H) -> ZeroReport:
    """Critical points of the curvature along a closed angle-chart graph."""
    if not w.closed:
        raise ValueError("vertices need a closed worldline (graph_angle)")
    gm = as_metric(gm)
    return count_zeros_periodic(lambda t: rho_prime_lhs(w, gm, t, h), n_grid, refine_tol,
                                period=math.pi)


def admissible_samples(w: Worldline, gm, n: int, rng: np.random.Generator,
                       interval=(-2.0, 2.0), max_coord: float = 5.0,
                       min_denominator: float = 0.05, max_rounds: int = 50) -> np.ndarray:
    """Draw ``n`` parameters whose whole stencil stays in the chart window
    ``|x|, |y| <= max_coord`` and keeps ``|D| >= min_denominator`` for family
    metrics. Rejected draws are resampled."""
    gm = as_metric(gm)
    den = getattr(gm, "quad", None) if gm.chart == "affine" else None
    offsets = np.arange(-2, 3) * STENCIL_H
    out = []
    for _ in range(max_rounds):
        cand = rng.uniform(*interval, size=4 * n)
        try:
            keep = _window_mask(w, den, np.add.outer(offsets, cand), max_coord, min_denominator)
        except DomainError:
            keep = np.array([_sample_ok(w, den, t + offsets, max_coord, min_denominator)
                             for t in cand], dtype=bool)
        out.extend(cand[keep][: n - len(out)].tolist())
        if len(out) == n:
            return np.array(out)
    raise DomainError(f"could not find {n} admissible samples on {w.name!r}")


def _window_mask(w, den, pts, max_coord, min_denominator):
    x, y = w.point(pts)
    keep = (np.abs(x) <= max_coord) & (np.abs(y) <= max_coord)
    if den is not None:
        keep &= np.abs(den.denominator(x, y)) >= min_denominator
    return keep.all(axis=0)


def _sample_ok(w, den, pts, max_coord, min_denominator):
    try:
        return bool(_window_mask(w, den, pts, max_coord, min_denominator))
    except DomainError:
        return False
