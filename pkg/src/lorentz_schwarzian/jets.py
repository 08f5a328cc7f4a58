"""Third-order Taylor jets.

A :class:`Jet3` carries ``(f, f', f'', f''')`` at a point. Fields may be
floats or equally-shaped numpy arrays; every operation is elementwise, so a
jet over a whole grid costs a handful of vector operations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

POLE_EPS = 1e-12


def _finite(*values) -> bool:
    return all(np.all(np.isfinite(v)) for v in values)


@dataclass(frozen=True, eq=False)
class Jet3:
    v: float | np.ndarray
    d1: float | np.ndarray = 0.0
    d2: float | np.ndarray = 0.0
    d3: float | np.ndarray = 0.0

    def __post_init__(self):
        if not _finite(self.v, self.d1, self.d2, self.d3):
            raise DomainError("non-finite jet component")

    @classmethod
    def constant(cls, c) -> Jet3:
        z = np.zeros_like(c, dtype=float) if isinstance(c, np.ndarray) else 0.0
        return cls(c, z, z, z)

    @classmethod
    def identity(cls, x) -> Jet3:
        if isinstance(x, np.ndarray):
            x = x.astype(float)
            return cls(x, np.ones_like(x), np.zeros_like(x), np.zeros_like(x))
        return cls(float(x), 1.0, 0.0, 0.0)

    def as_tuple(self):
        return (self.v, self.d1, self.d2, self.d3)

    def allclose(self, other, rtol=1e-12, atol=1e-12) -> bool:
        return all(np.allclose(a, b, rtol=rtol, atol=atol)
                   for a, b in zip(self.as_tuple(), _lift(other).as_tuple()))

    def __getitem__(self, idx) -> Jet3:
        return Jet3(self.v[idx], self.d1[idx], self.d2[idx], self.d3[idx])

    def __repr__(self):
        return f"Jet3(v={self.v!r}, d1={self.d1!r}, d2={self.d2!r}, d3={self.d3!r})"

    def __add__(self, other):
        return jet_add(self, _lift(other))

    __radd__ = __add__

    def __sub__(self, other):
        return jet_sub(self, _lift(other))

    def __rsub__(self, other):
        return jet_sub(_lift(other), self)

    def __mul__(self, other):
        return jet_mul(self, _lift(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return jet_div(self, _lift(other))

    def __rtruediv__(self, other):
        return jet_div(_lift(other), self)

    def __neg__(self):
        return Jet3(-self.v, -self.d1, -self.d2, -self.d3)


def _lift(x) -> Jet3:
    return x if isinstance(x, Jet3) else Jet3.constant(x)


def jet_add(a: Jet3, b: Jet3) -> Jet3:
    return Jet3(a.v + b.v, a.d1 + b.d1, a.d2 + b.d2, a.d3 + b.d3)


def jet_sub(a: Jet3, b: Jet3) -> Jet3:
    return Jet3(a.v - b.v, a.d1 - b.d1, a.d2 - b.d2, a.d3 - b.d3)


def jet_mul(a: Jet3, b: Jet3) -> Jet3:
    return Jet3(
        a.v * b.v,
        a.d1 * b.v + a.v * b.d1,
        a.d2 * b.v + 2 * a.d1 * b.d1 + a.v * b.d2,
        a.d3 * b.v + 3 * a.d2 * b.d1 + 3 * a.d1 * b.d2 + a.v * b.d3,
    )


def jet_div(a: Jet3, b: Jet3) -> Jet3:
    if np.any(b.v == 0):
        raise DomainError("division by a jet with zero value")
    return jet_mul(a, jet_compose(elementary_jet("power", b.v, -1), b))


def jet_compose(outer: Jet3, inner: Jet3) -> Jet3:
    """Jet of ``g o f`` from the jet of ``g`` at ``f(x)`` and the jet of ``f`` at ``x``."""
    f1, f2, f3 = inner.d1, inner.d2, inner.d3
    return Jet3(
        outer.v,
        outer.d1 * f1,
        outer.d2 * f1 ** 2 + outer.d1 * f2,
        outer.d3 * f1 ** 3 + 3 * outer.d2 * f1 * f2 + outer.d1 * f3,
    )


def elementary_jet(kind: str, x, *params) -> Jet3:
    """Exact jet of a named elementary function at ``x``.

    ``kind`` is one of ``exp``, ``sin``, ``cos``, ``tan``, ``arctan``,
    ``power`` (extra parameter ``n``) or ``affine`` (parameters ``p, q`` for
    ``p*x + q``).
    """
    x = np.asarray(x, dtype=float) if isinstance(x, np.ndarray) else float(x)
    if kind == "exp":
        e = np.exp(x)
        return Jet3(e, e, e, e)
    if kind == "sin":
        s, c = np.sin(x), np.cos(x)
        return Jet3(s, c, -s, -c)
    if kind == "cos":
        s, c = np.sin(x), np.cos(x)
        return Jet3(c, -s, -c, s)
    if kind == "tan":
        c = np.cos(x)
        if np.any(np.abs(c) < POLE_EPS):
            raise DomainError(f"tan evaluated at a pole: {x}")
        t = np.tan(x)
        s2 = 1 + t * t
        return Jet3(t, s2, 2 * t * s2, 2 * s2 * (1 + 3 * t * t))
    if kind == "arctan":
        q = 1.0 / (1 + x * x)
        return Jet3(np.arctan(x), q, -2 * x * q * q, (6 * x * x - 2) * q ** 3)
    if kind == "power":
        (n,) = params
        integral = n == int(n)
        if np.any(x == 0) and (n < 0 or not integral and n < 3):
            raise DomainError(f"power({n}) is singular at 0")
        if not integral and np.any(x < 0):
            raise DomainError(f"power({n}) undefined for negative base")
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = [_falling(n, k) * _pow(x, n - k) if _falling(n, k) else 0.0 * x
                     for k in range(4)]
        return Jet3(*terms)
    if kind == "affine":
        p, q = params
        z = np.zeros_like(x) if isinstance(x, np.ndarray) else 0.0
        return Jet3(p * x + q, p + z, z, z)
    raise ValueError(f"unknown elementary function {kind!r}")


def _falling(n, k):
    out = 1.0
    for i in range(k):
        out *= n - i
    return out


def _pow(x, e):
    # x**0 must be 1 even at x == 0; integer exponents keep negative bases real
    if e == 0:
        return np.ones_like(x) if isinstance(x, np.ndarray) else 1.0
    if e == int(e):
        return x ** int(e) if e > 0 else 1.0 / x ** int(-e)
    return x ** e


def identity_jet(x) -> Jet3:
    return Jet3.identity(x)


def constant_jet(c) -> Jet3:
    return Jet3.constant(c)


def polynomial_jet(coeffs, x) -> Jet3:
    """Jet of ``sum(coeffs[k] * x**k)`` by Horner's rule on jets."""
    X = Jet3.identity(x)
    acc = Jet3.constant(coeffs[-1] * (np.ones_like(x) if isinstance(x, np.ndarray) else 1.0))
    for c in reversed(coeffs[:-1]):
        acc = acc * X + c
    return acc

