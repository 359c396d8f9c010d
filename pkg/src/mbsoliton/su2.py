"""Exact arithmetic on 2x2 complex matrices over the basis {I, H, F, E}.

H, F, E span su(2) and multiply like the quaternion units i, j, k:

    H^2 = F^2 = E^2 = -I,   HF = E,  FE = H,  EH = F,

so every 2x2 complex matrix decomposes uniquely as id*I + h*H + f*F + e*E.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularMatrix

H = np.array([[1j, 0.0], [0.0, -1j]])
F = np.array([[0.0, 1.0], [-1.0, 0.0]], dtype=complex)
E = np.array([[0.0, 1j], [1j, 0.0]])
I2 = np.eye(2, dtype=complex)

_DET_RTOL = 1e-12


@dataclass(frozen=True)
class Su2Vector:
    """Coefficients (h, f, e) on the su(2) basis."""

    h: complex = 0.0
    f: complex = 0.0
    e: complex = 0.0

    def to_gl2(self) -> "Gl2Vector":
        return Gl2Vector(0.0, self.h, self.f, self.e)


@dataclass(frozen=True)
class Gl2Vector:
    """Coefficients (id, h, f, e) on the full basis {I, H, F, E}."""

    id: complex = 0.0
    h: complex = 0.0
    f: complex = 0.0
    e: complex = 0.0

    def __add__(self, other):
        return Gl2Vector(self.id + other.id, self.h + other.h,
                         self.f + other.f, self.e + other.e)

    def __sub__(self, other):
        return Gl2Vector(self.id - other.id, self.h - other.h,
                         self.f - other.f, self.e - other.e)

    def scaled(self, s):
        return Gl2Vector(s * self.id, s * self.h, s * self.f, s * self.e)

    def max_abs(self) -> float:
        return max(abs(self.id), abs(self.h), abs(self.f), abs(self.e))

    def trace(self) -> complex:
        return 2.0 * self.id

    def su2_part(self) -> Su2Vector:
        return Su2Vector(self.h, self.f, self.e)


ZERO_GL2 = Gl2Vector()


def to_matrix(v) -> np.ndarray:
    """Reconstruct the 2x2 matrix from an Su2Vector or Gl2Vector."""
    ident = getattr(v, "id", 0.0)
    return ident * I2 + v.h * H + v.f * F + v.e * E


def from_matrix(m) -> Gl2Vector:
    """Closed-form coefficient extraction, exact inverse of to_matrix."""
    a11, a12 = m[0, 0], m[0, 1]
    a21, a22 = m[1, 0], m[1, 1]
    return Gl2Vector(
        id=0.5 * (a11 + a22),
        h=-0.5j * (a11 - a22),
        f=0.5 * (a12 - a21),
        e=-0.5j * (a12 + a21),
    )


def gl2_mul(a: Gl2Vector, b: Gl2Vector) -> Gl2Vector:
    """Product in the quaternion-like basis, equals from_matrix(M(a) @ M(b))."""
    return Gl2Vector(
        id=a.id * b.id - a.h * b.h - a.f * b.f - a.e * b.e,
        h=a.id * b.h + a.h * b.id + a.f * b.e - a.e * b.f,
        f=a.id * b.f + a.f * b.id + a.e * b.h - a.h * b.e,
        e=a.id * b.e + a.e * b.id + a.h * b.f - a.f * b.h,
    )


def su2_commutator(a: Su2Vector, b: Su2Vector) -> Su2Vector:
    """[a, b] on the (H, F, E) coefficients; twice the cross product."""
    return Su2Vector(
        h=2.0 * (a.f * b.e - a.e * b.f),
        f=2.0 * (a.e * b.h - a.h * b.e),
        e=2.0 * (a.h * b.f - a.f * b.h),
    )


def mat_inv2(n: np.ndarray) -> np.ndarray:
    """2x2 inverse via adjugate; SingularMatrix below relative tolerance."""
    det = n[0, 0] * n[1, 1] - n[0, 1] * n[1, 0]
    scale = max(abs(n[0, 0]), abs(n[0, 1]), abs(n[1, 0]), abs(n[1, 1]), 1e-300)
    if abs(det) <= _DET_RTOL * scale * scale:
        raise SingularMatrix(f"|det| = {abs(det):.3e} below tolerance")
    return np.array([[n[1, 1], -n[0, 1]], [-n[1, 0], n[0, 0]]]) / det


def conjugate(n: np.ndarray, v) -> Gl2Vector:
    """Decomposition of n @ M(v) @ n^(-1) for invertible n."""
    return from_matrix(n @ to_matrix(v) @ mat_inv2(n))
