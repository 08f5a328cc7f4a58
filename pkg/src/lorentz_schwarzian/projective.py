"""PSL(2, R) acting on the real projective line.

Points of RP^1 are homogeneous pairs ``(p, q)`` with affine coordinate
``x = p / q`` and angle coordinate ``theta`` in ``[0, pi)`` such that
``(p, q) ~ (sin theta, cos theta)``; hence ``x = tan(theta)``. In this
convention the rotation matrix ``((cos a, sin a), (-sin a, cos a))`` shifts
``theta`` by ``a``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .jets import Jet3, elementary_jet, jet_compose

CHART_EPS = 1e-12


@dataclass(frozen=True)
class MobiusMap:
    """Element of PSL(2, R), stored as the unit-determinant matrix
    ``((alpha, beta), (gamma, delta))``.

    Any matrix with positive determinant may be passed; it is divided by the
    positive square root of its determinant.
    """

    alpha: float
    beta: float
    gamma: float
    delta: float

    def __post_init__(self):
        det = self.alpha * self.delta - self.beta * self.gamma
        if not det > 0:
            raise DomainError(f"Mobius matrix needs positive determinant, got {det}")
        s = math.sqrt(det)
        for name in ("alpha", "beta", "gamma", "delta"):
            object.__setattr__(self, name, float(getattr(self, name)) / s)

    @classmethod
    def from_matrix(cls, m) -> MobiusMap:
        m = np.asarray(m, dtype=float)
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    @classmethod
    def identity(cls) -> MobiusMap:
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def rotation(cls, angle: float) -> MobiusMap:
        c, s = math.cos(angle), math.sin(angle)
        return cls(c, s, -s, c)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.alpha, self.beta], [self.gamma, self.delta]])

    def __call__(self, x):
        """Affine action ``x -> (alpha x + beta) / (gamma x + delta)``."""
        return (self.alpha * x + self.beta) / (self.gamma * x + self.delta)

    def __matmul__(self, other: MobiusMap) -> MobiusMap:
        return mobius_compose(self, other)

    def equals(self, other: MobiusMap, tol: float = 1e-12) -> bool:
        a, b = self.matrix, other.matrix
        return bool(np.allclose(a, b, atol=tol, rtol=0) or np.allclose(a, -b, atol=tol, rtol=0))

    def iwasawa(self):
        """Split into ``rotation(psi) @ T`` with ``T`` upper triangular, positive diagonal."""
        psi = math.atan2(-self.gamma, self.alpha)
        c, s = math.cos(psi), math.sin(psi)
        t = np.array([[c, -s], [s, c]]) @ self.matrix
        return psi, t


@dataclass(frozen=True)
class RP1Point:
    """Homogeneous point ``[p : q]``, normalized to ``(sin theta, cos theta)``
    with ``theta`` in ``[0, pi)``."""

    p: float
    q: float

    def __post_init__(self):
        n = math.hypot(self.p, self.q)
        if n == 0:
            raise DomainError("(0, 0) is not a point of RP^1")
        p, q = self.p / n, self.q / n
        if p < 0 or (p == 0 and q < 0):
            p, q = -p, -q
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @classmethod
    def from_affine(cls, x: float) -> RP1Point:
        return cls(x, 1.0)

    @classmethod
    def from_angle(cls, theta: float) -> RP1Point:
        return cls(math.sin(theta), math.cos(theta))

    @classmethod
    def infinity(cls) -> RP1Point:
        return cls(1.0, 0.0)

    @property
    def is_infinite(self) -> bool:
        return abs(self.q) <= CHART_EPS

    @property
    def affine(self) -> float:
        if self.is_infinite:
            raise DomainError("point at infinity has no affine coordinate")
        return self.p / self.q

    @property
    def angle(self) -> float:
        theta = math.atan2(self.p, self.q)
        return theta % math.pi

    def isclose(self, other: RP1Point, tol: float = 1e-12) -> bool:
        return abs(self.p * other.q - self.q * other.p) <= tol


@dataclass(frozen=True)
class PairMobius:
    """An element of PSL(2,R) x PSL(2,R); ``left`` acts on x, ``right`` on y."""

    left: MobiusMap
    right: MobiusMap

    @classmethod
    def identity(cls) -> PairMobius:
        return cls(MobiusMap.identity(), MobiusMap.identity())

    def __matmul__(self, other: PairMobius) -> PairMobius:
        return PairMobius(self.left @ other.left, self.right @ other.right)

    def apply(self, x, y):
        return self.left(x), self.right(y)


def mobius_apply(m: MobiusMap, p: RP1Point) -> RP1Point:
    return RP1Point(m.alpha * p.p + m.beta * p.q, m.gamma * p.p + m.delta * p.q)


def mobius_compose(m1: MobiusMap, m2: MobiusMap) -> MobiusMap:
    """``m1 o m2``: apply ``m2`` first."""
    return MobiusMap.from_matrix(m1.matrix @ m2.matrix)


def mobius_inverse(m: MobiusMap) -> MobiusMap:
    return MobiusMap(m.delta, -m.beta, -m.gamma, m.alpha)


def mobius_jet(m: MobiusMap, x, eps: float = CHART_EPS) -> Jet3:
    """Exact jet of the affine action at ``x``."""
    w = m.gamma * x + m.delta
    if np.any(np.abs(w) <= eps):
        raise DomainError(f"Mobius map has a chart pole near x = {x}")
    inv = 1.0 / w
    return Jet3((m.alpha * x + m.beta) * inv, inv ** 2,
                -2 * m.gamma * inv ** 3, 6 * m.gamma ** 2 * inv ** 4)


def mobius_lift_jet(m: MobiusMap, theta) -> Jet3:
    """Jet of the continuous lift of ``m`` in the angle coordinate.

    The lift satisfies ``phi(theta + pi) = phi(theta) + pi``. It is pinned by
    writing ``m = rotation(psi) @ T`` and letting ``T`` (which fixes the point
    at infinity) fix ``theta = pi/2`` in the lift.
    """
    theta = np.asarray(theta, dtype=float) if isinstance(theta, np.ndarray) else float(theta)
    psi, t = m.iwasawa()
    k = np.floor((theta + np.pi / 2) / np.pi)
    red = theta - k * np.pi
    s, c = np.sin(red), np.cos(red)
    value = np.arctan2(t[0, 0] * s + t[0, 1] * c, t[1, 1] * c) + k * np.pi + psi

    st, ct = np.sin(theta), np.cos(theta)
    u = m.alpha * st + m.beta * ct
    w = m.gamma * st + m.delta * ct
    du = m.alpha * ct - m.beta * st
    dw = m.gamma * ct - m.delta * st
    r = u * u + w * w
    r1 = 2 * (u * du + w * dw)
    r2 = 2 * (du * du + dw * dw) - 2 * r
    # u, w solve z'' = -z, so r''' = -4 r'
    slope = 1.0 / r
    return Jet3(value, slope, -r1 * slope ** 2, -r2 * slope ** 2 + 2 * r1 ** 2 * slope ** 3)


def angle_chart_jet(direction: str, value) -> Jet3:
    """Jet of the chart transport: ``tan`` (``to_affine``) or ``arctan`` (``to_angle``)."""
    if direction == "to_affine":
        return elementary_jet("tan", value)
    if direction == "to_angle":
        return elementary_jet("arctan", value)
    raise ValueError(f"unknown direction {direction!r}")


def affine_from_angle_jet(lift_jet: Jet3, x) -> Jet3:
    """Transport a lift jet at ``arctan(x)`` to the affine chart: ``tan o phi o arctan``."""
    inner = angle_chart_jet("to_angle", x)
    return jet_compose(angle_chart_jet("to_affine", lift_jet.v), jet_compose(lift_jet, inner))
