"""Orientation-preserving diffeomorphisms of RP^1.

A diffeomorphism is represented by a lift ``phi`` in the angle coordinate:
smooth, strictly increasing, with ``phi(theta + pi) = phi(theta) + pi``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DomainError, GenerationError
from .jets import Jet3, jet_compose
from .projective import MobiusMap, affine_from_angle_jet, mobius_lift_jet

VALIDATION_GRID = 4096
MIN_SLOPE = 1e-6
FIXED_POINT_MARGIN = 1e-4


class CircleDiffeo:
    """Base class; subclasses implement :meth:`jet_angle` and :meth:`descriptor`."""

    kind = "abstract"

    def jet_angle(self, theta) -> Jet3:
        raise NotImplementedError

    def jet_affine(self, x) -> Jet3:
        x = np.asarray(x, dtype=float) if isinstance(x, np.ndarray) else float(x)
        return affine_from_angle_jet(self.jet_angle(np.arctan(x)), x)

    def __call__(self, theta):
        return self.jet_angle(theta).v

    def __matmul__(self, other: CircleDiffeo) -> ComposedDiffeo:
        return ComposedDiffeo([self, other])

    def descriptor(self) -> dict:
        raise NotImplementedError

    @property
    def is_mobius(self) -> bool:
        return False

    def validate(self, grid: int = VALIDATION_GRID):
        """Check monotonicity and pi-equivariance of the lift on a grid."""
        theta = np.linspace(0.0, np.pi, grid, endpoint=False)
        j = self.jet_angle(theta)
        slope = float(np.min(j.d1))
        if slope < MIN_SLOPE:
            raise DomainError(f"lift is not increasing: min phi' = {slope:.3g}")
        shifted = self.jet_angle(theta[:256] + np.pi).v - j.v[:256]
        if np.max(np.abs(shifted - np.pi)) > 1e-12:
            raise DomainError("lift violates phi(theta + pi) = phi(theta) + pi")


@dataclass(frozen=True)
class Rotation(CircleDiffeo):
    alpha: float
    kind = "rotation"

    def jet_angle(self, theta) -> Jet3:
        j = Jet3.identity(theta)
        return Jet3(j.v + self.alpha, j.d1, j.d2, j.d3)

    @property
    def is_mobius(self) -> bool:
        return True

    def descriptor(self) -> dict:
        return {"kind": "rotation", "alpha": self.alpha}


@dataclass(frozen=True)
class FourierDiffeo(CircleDiffeo):
    """``phi(theta) = theta + alpha + sum_k a_k sin(2k theta) + b_k cos(2k theta)``."""

    alpha: float
    coeffs: tuple = ()
    seed: int | None = None
    kind = "fourier"

    def __post_init__(self):
        coeffs = tuple((int(k), float(a), float(b)) for k, a, b in self.coeffs)
        if any(k < 1 for k, _, _ in coeffs):
            raise ValueError("Fourier modes must be positive integers")
        object.__setattr__(self, "coeffs", coeffs)
        self.validate()

    def jet_angle(self, theta) -> Jet3:
        theta = np.asarray(theta, dtype=float) if isinstance(theta, np.ndarray) else float(theta)
        v = theta + self.alpha
        d1 = 1.0 + 0.0 * theta
        d2 = 0.0 * theta
        d3 = 0.0 * theta
        for k, a, b in self.coeffs:
            w = 2 * k
            s, c = np.sin(w * theta), np.cos(w * theta)
            v = v + a * s + b * c
            d1 = d1 + w * (a * c - b * s)
            d2 = d2 - w ** 2 * (a * s + b * c)
            d3 = d3 - w ** 3 * (a * c - b * s)
        return Jet3(v, d1, d2, d3)

    def descriptor(self) -> dict:
        return {"kind": "fourier", "alpha": self.alpha,
                "coeffs": [list(c) for c in self.coeffs], "seed": self.seed}


@dataclass(frozen=True)
class MobiusDiffeo(CircleDiffeo):
    m: MobiusMap
    kind = "mobius"

    def jet_angle(self, theta) -> Jet3:
        return mobius_lift_jet(self.m, theta)

    @property
    def is_mobius(self) -> bool:
        return True

    def descriptor(self) -> dict:
        return {"kind": "mobius", "matrix": self.m.matrix.tolist()}


@dataclass(frozen=True)
class ComposedDiffeo(CircleDiffeo):
    """``parts[0] o parts[1] o ...``; the last part is applied first."""

    parts: list = field(default_factory=list)
    kind = "composed"

    def __post_init__(self):
        if not self.parts:
            raise ValueError("composition of zero diffeomorphisms")
        object.__setattr__(self, "parts", tuple(self.parts))

    def jet_angle(self, theta) -> Jet3:
        j = self.parts[-1].jet_angle(theta)
        for f in reversed(self.parts[:-1]):
            j = jet_compose(f.jet_angle(j.v), j)
        return j

    @property
    def is_mobius(self) -> bool:
        return all(p.is_mobius for p in self.parts)

    def descriptor(self) -> dict:
        return {"kind": "composed", "parts": [p.descriptor() for p in self.parts]}


def identity_diffeo() -> CircleDiffeo:
    return Rotation(0.0)


def diffeo_jet_angle(f: CircleDiffeo, theta) -> Jet3:
    return f.jet_angle(theta)


def diffeo_jet_affine(f: CircleDiffeo, x) -> Jet3:
    return f.jet_affine(x)


def from_descriptor(desc: dict) -> CircleDiffeo:
    kind = desc.get("kind")
    if kind == "rotation":
        return Rotation(float(desc["alpha"]))
    if kind == "fourier":
        return FourierDiffeo(float(desc.get("alpha", 0.0)),
                             tuple(tuple(c) for c in desc.get("coeffs", ())),
                             desc.get("seed"))
    if kind == "mobius":
        return MobiusDiffeo(MobiusMap.from_matrix(desc["matrix"]))
    if kind == "composed":
        return ComposedDiffeo([from_descriptor(p) for p in desc["parts"]])
    if kind == "random":
        return random_diffeo(int(desc["seed"]), int(desc.get("n_modes", 3)),
                             float(desc.get("amplitude", 0.3)))
    raise ValueError(f"unknown diffeo kind {kind!r}")


def random_diffeo(seed: int, n_modes: int = 3, amplitude: float = 0.3,
                  max_retries: int = 20) -> CircleDiffeo:
    """Random Fourier-perturbed rotation, deterministic in ``seed``.

    Mode ``k`` coefficients are uniform in ``[-amplitude/k^2, amplitude/k^2]``.
    If the lift fails to be monotone, the whole perturbation is halved.
    """
    rng = np.random.default_rng(seed)
    alpha = float(rng.uniform(0.0, math.pi))
    ks = np.arange(1, n_modes + 1)
    raw = rng.uniform(-1.0, 1.0, size=(n_modes, 2)) / ks[:, None] ** 2
    if amplitude == 0 or n_modes == 0:
        return Rotation(alpha)
    scale = amplitude
    for _ in range(max_retries + 1):
        coeffs = tuple((int(k), float(scale * a), float(scale * b))
                       for k, (a, b) in zip(ks, raw))
        try:
            return FourierDiffeo(alpha, coeffs, seed)
        except DomainError:
            scale /= 2
    raise GenerationError(f"seed {seed}: no monotone lift after {max_retries} retries")


def fixed_point_margin(f: CircleDiffeo, m, grid: int = 1024) -> float:
    """Distance of ``phi_f - phi_m`` from the lattice ``pi Z``.

    ``m`` is a :class:`MobiusMap` or another :class:`CircleDiffeo`. The
    difference of lifts is pi-periodic; ``f(x) = m(x)`` somewhere iff its
    range touches a multiple of pi. Returns 0 when a coincidence is found.
    """
    if grid < 64:
        raise ValueError("grid must be at least 64")
    g = MobiusDiffeo(m) if isinstance(m, MobiusMap) else m

    def diff(t):
        return f.jet_angle(t).v - g.jet_angle(t).v

    theta = np.linspace(0.0, np.pi, grid, endpoint=False)
    d = diff(theta)
    step = np.pi / grid
    lo = _refine_extremum(diff, theta[np.argmin(d)], step, float(d.min()), sign=1.0)
    hi = _refine_extremum(diff, theta[np.argmax(d)], step, float(d.max()), sign=-1.0)
    k = math.floor(lo / math.pi)
    if hi >= (k + 1) * math.pi:
        return 0.0
    return max(0.0, min(lo - k * math.pi, (k + 1) * math.pi - hi))


def _refine_extremum(fn, t0, step, best, sign):
    res = minimize_scalar(lambda t: sign * fn(t), bounds=(t0 - step, t0 + step),
                          method="bounded", options={"xatol": 1e-12})
    return min(best, float(res.fun) * sign) if sign > 0 else max(best, float(res.fun) * sign)


def fixed_point_free(f: CircleDiffeo, m, grid: int = 1024,
                     margin: float = FIXED_POINT_MARGIN) -> bool:
    """True when ``f`` and ``m`` never agree, with separation above ``margin``."""
    return fixed_point_margin(f, m, grid) > margin
