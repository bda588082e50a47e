"""Physical constants, error types and small complex linear algebra.

Vectors are complex numpy arrays of shape (3,), matrices are (3, 3) or
(4, 4). Index 0 of a 4x4 matrix is the time slot. The dot and cross
products are complex-bilinear: nothing is ever conjugated.
"""
from dataclasses import dataclass
from fractions import Fraction

import numpy as np


class FrameError(Exception):
    """Base class for every error raised by this package."""


class SingularMatrix(FrameError):
    pass


class LightSpeedVelocity(FrameError):
    pass


class DegenerateGamma(FrameError):
    pass


class NotOrthogonal(FrameError):
    pass


class DegenerateComposition(FrameError):
    pass


class ZeroVelocity(FrameError):
    pass


class NotLorentz(FrameError):
    pass


class LightlikeRow(FrameError):
    pass


class NotUnit(FrameError):
    pass


class IsotropicVector(FrameError):
    pass


class ConstraintViolation(FrameError):
    pass


class DegenerateDirection(FrameError):
    pass


class RankDeficientSampling(FrameError):
    pass


class NoConvergence(FrameError):
    def __init__(self, msg, best_residual=None):
        super().__init__(msg)
        self.best_residual = best_residual


class StepTooSmall(FrameError):
    pass


class QuadratureFailure(FrameError):
    def __init__(self, msg, diagnostics=None):
        super().__init__(msg)
        self.diagnostics = diagnostics or {}


class NotParallel(FrameError):
    pass


class ZeroB(FrameError):
    pass


@dataclass(frozen=True)
class Constants:
    """Speed of light, permittivity and permeability.

    ``mu0`` defaults to ``1/(eps0 c^2)``; if given it must agree with that
    to a relative 1e-14.
    """
    c: float = 1.0
    eps0: float = 1.0
    mu0: float = None

    def __post_init__(self):
        if not (self.c > 0 and self.eps0 > 0):
            raise ValueError("c and eps0 must be positive")
        if self.mu0 is None:
            object.__setattr__(self, "mu0", 1.0 / (self.eps0 * self.c ** 2))
        if not self.mu0 > 0:
            raise ValueError("mu0 must be positive")
        if abs(self.mu0 * self.eps0 * self.c ** 2 - 1.0) > 1e-14:
            raise ValueError("mu0 * eps0 * c**2 must equal 1")

    @classmethod
    def si(cls):
        return cls(c=299792458.0, eps0=8.8541878128e-12)


UNIT = Constants()


def vec(*xs):
    """Complex 3-vector from three numbers or one iterable."""
    if len(xs) == 1:
        xs = xs[0]
    a = np.asarray(xs, dtype=complex).reshape(3)
    if not np.all(np.isfinite(a)):
        raise ValueError("vector components must be finite")
    return a


E1, E2, E3 = np.eye(3, dtype=complex)


def cdot(a, b):
    """Bilinear dot product, sum of a_i b_i with no conjugation."""
    return complex(np.sum(np.asarray(a) * np.asarray(b)))


def cross(a, b):
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    return np.array([a[1] * b[2] - a[2] * b[1],
                     a[2] * b[0] - a[0] * b[2],
                     a[0] * b[1] - a[1] * b[0]])


def sq(a):
    """Bilinear square a.a of a vector."""
    return cdot(a, a)


def cross_matrix(w):
    """Matrix W with W @ x == cross(w, x)."""
    w = np.asarray(w, dtype=complex)
    return np.array([[0, -w[2], w[1]],
                     [w[2], 0, -w[0]],
                     [-w[1], w[0], 0]], dtype=complex)


def matmul(*ms):
    out = np.asarray(ms[0], dtype=complex)
    for m in ms[1:]:
        out = out @ np.asarray(m, dtype=complex)
    return out


def transpose(m):
    return np.asarray(m).T.copy()


def det(m):
    return complex(np.linalg.det(np.asarray(m, dtype=complex)))


def inverse(m):
    """Inverse with a scaled determinant guard.

    Raises SingularMatrix when |det M| <= 1e-13 * ||M||^n.
    """
    m = np.asarray(m, dtype=complex)
    n = m.shape[0]
    scale = np.linalg.norm(m) ** n
    if scale == 0 or abs(det(m)) <= 1e-13 * scale:
        raise SingularMatrix("matrix is numerically singular")
    return np.linalg.inv(m)


def det_exact(rows):
    """Exact determinant of a square matrix of rationals (fraction-free
    Bareiss elimination). Entries may be ints, Fractions or strings."""
    a = [[Fraction(x) for x in row] for row in rows]
    n = len(a)
    if any(len(r) != n for r in a):
        raise ValueError("matrix must be square")
    sign, prev = 1, Fraction(1)
    for k in range(n - 1):
        if a[k][k] == 0:
            for r in range(k + 1, n):
                if a[r][k] != 0:
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return Fraction(0)
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]
