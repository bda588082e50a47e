"""Boosts, rotations, reflections and their compositions.

Internally every 4x4 matrix acts on column vectors (ct, x, y, z). The
(t, x, y, z) form of a boost is A_c^-1 B A_c with A_c = diag(c, 1, 1, 1).
Velocities may be complex; gamma then needs a square-root branch, carried
explicitly by a ``Branch`` value.
"""
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .core import (UNIT, E1, DegenerateComposition, DegenerateGamma, FrameError,
                   IsotropicVector, LightlikeRow, LightSpeedVelocity,
                   NotLorentz, NotOrthogonal, NotUnit, ZeroVelocity, cdot,
                   cross, cross_matrix, sq, vec)

ETA = np.diag([1.0, -1.0, -1.0, -1.0]).astype(complex)


class Branch(Enum):
    PRINCIPAL = 1
    NEGATED = -1


class Convention(Enum):
    TIME_T = "t"
    TIME_CT = "ct"


def _principal_sqrt(z):
    z = complex(z)
    # a signed zero imaginary part would flip the root across the cut
    return np.sqrt(complex(z.real, z.imag + 0.0))


def gamma(v, branch=Branch.PRINCIPAL, const=UNIT):
    r"""Lorentz factor $1/\sqrt{1 - v\cdot v/c^2}$ for a complex velocity.

    The principal root has its cut on the negative real axis, so for real
    v > c the result is -i/sqrt(v^2/c^2 - 1).
    """
    v = vec(v)
    c2 = const.c ** 2
    v2 = sq(v)
    if abs(v2 - c2) <= 1e-10 * c2:
        raise LightSpeedVelocity("v.v equals c^2")
    g = 1.0 / _principal_sqrt(1.0 - v2 / c2)
    return g if branch is Branch.PRINCIPAL else -g


def branch_for(v, target, const=UNIT):
    """The branch whose gamma is closest to ``target``."""
    g = gamma(v, Branch.PRINCIPAL, const)
    return Branch.PRINCIPAL if abs(g - target) <= abs(g + target) else Branch.NEGATED


@dataclass(frozen=True)
class BoostSpec:
    v: np.ndarray
    branch: Branch = Branch.PRINCIPAL
    convention: Convention = Convention.TIME_CT

    def __post_init__(self):
        object.__setattr__(self, "v", vec(self.v))

    def gamma(self, const=UNIT):
        return gamma(self.v, self.branch, const)

    def matrix(self, const=UNIT):
        return boost_matrix(self.v, self.branch, const, self.convention)


def conversion_matrix(const=UNIT):
    """A_c = diag(c, 1, 1, 1), mapping (t, x) coordinates to (ct, x)."""
    return np.diag([const.c, 1.0, 1.0, 1.0]).astype(complex)


def to_time_t(L, const=UNIT):
    A = conversion_matrix(const)
    return np.linalg.inv(A) @ L @ A


def to_time_ct(L, const=UNIT):
    A = conversion_matrix(const)
    return A @ L @ np.linalg.inv(A)


def boost_matrix(v, branch=Branch.PRINCIPAL, const=UNIT,
                 convention=Convention.TIME_CT, gamma_value=None):
    """B = I + g b + g^2/(g+1) b^2 with b_0j = b_j0 = -v_j/c.

    ``gamma_value`` overrides the square root, which is how composed boosts
    keep the branch implied by the product formula for gamma.
    """
    v = vec(v)
    g = gamma(v, branch, const) if gamma_value is None else complex(gamma_value)
    if abs(g + 1) < 1e-12:
        raise DegenerateGamma("gamma = -1")
    b = np.zeros((4, 4), dtype=complex)
    b[0, 1:] = b[1:, 0] = -v / const.c
    B = np.eye(4, dtype=complex) + g * b + g * g / (g + 1) * (b @ b)
    if convention is Convention.TIME_T:
        B = to_time_t(B, const)
    return B


@dataclass(frozen=True)
class Orthogonal3:
    """A (possibly complex) 3x3 matrix with m m^T = I."""
    m: np.ndarray
    det_sign: int = field(default=None)

    def __post_init__(self):
        m = np.asarray(self.m, dtype=complex).reshape(3, 3)
        object.__setattr__(self, "m", m)
        scale = max(1.0, float(np.linalg.norm(m)) ** 2)
        eye = np.eye(3)
        if (np.linalg.norm(m @ m.T - eye) > 1e-11 * scale
                or np.linalg.norm(m.T @ m - eye) > 1e-11 * scale):
            raise NotOrthogonal("m m^T != I")
        d = complex(np.linalg.det(m))
        s = 1 if d.real > 0 else -1
        if abs(d - s) > 1e-11 * scale:
            raise NotOrthogonal("det is not +-1")
        if self.det_sign is not None and self.det_sign != s:
            raise NotOrthogonal("det_sign does not match the matrix")
        object.__setattr__(self, "det_sign", s)

    def __call__(self, x):
        return self.m @ vec(x)

    def __matmul__(self, other):
        return Orthogonal3(self.m @ other.m)

    @property
    def T(self):
        return Orthogonal3(self.m.T)


IDENTITY3 = Orthogonal3(np.eye(3))


def rotation_matrix(g):
    """Embed g in the spatial block of a 4x4 matrix."""
    if not isinstance(g, Orthogonal3):
        g = Orthogonal3(g)
    R = np.eye(4, dtype=complex)
    R[1:, 1:] = g.m
    return R


def composed_gamma(u, v, branch_u=Branch.PRINCIPAL, branch_v=Branch.PRINCIPAL,
                   const=UNIT):
    """gamma of u*v from the product rule gamma_u gamma_v (1 + u.v/c^2)."""
    return (gamma(u, branch_u, const) * gamma(v, branch_v, const)
            * (1 + cdot(u, v) / const.c ** 2))


def velocity_compose(u, v, branch_u=Branch.PRINCIPAL, const=UNIT):
    """Einstein sum u*v: velocity of a frame moving at v relative to one
    moving at u."""
    u, v = vec(u), vec(v)
    c2 = const.c ** 2
    d = 1 + cdot(u, v) / c2
    if abs(d) < 1e-12:
        raise DegenerateComposition("1 + u.v/c^2 vanishes")
    if not np.any(u):
        return v.copy()
    if abs(sq(u)) < 1e-14 * max(1.0, float(np.linalg.norm(u)) ** 2):
        raise ZeroVelocity("u.u vanishes for a nonzero complex u")
    gu = gamma(u, branch_u, const)
    return (u + v) / d + gu / (c2 * (gu + 1)) * cross(u, cross(u, v)) / d


def thomas_rotation(u, v, branch_u=Branch.PRINCIPAL, branch_v=Branch.PRINCIPAL,
                    const=UNIT):
    """Rotation g with B_v B_u = R_g B_{u*v}, from g = I - c1 W + c2 W^2."""
    u, v = vec(u), vec(v)
    c2 = const.c ** 2
    dot = 1 + cdot(u, v) / c2
    cond = dot ** 2 - (1 - sq(u) / c2) * (1 - sq(v) / c2)
    if abs(cond) < 1e-14:
        raise DegenerateComposition("(1+u.v/c^2)^2 - (1-u^2/c^2)(1-v^2/c^2) vanishes")
    gu = gamma(u, branch_u, const)
    gv = gamma(v, branch_v, const)
    guv = gu * gv * dot
    den = (gu + 1) * (gv + 1) * (guv + 1)
    if abs(den) < 1e-14:
        raise DegenerateComposition("a gamma equals -1")
    c1 = -gu * gv * (gu + gv + guv + 1) / (c2 * den)
    k2 = gu ** 2 * gv ** 2 / (c2 * c2 * den)
    W = cross_matrix(cross(u, v))
    return Orthogonal3(np.eye(3) - c1 * W + k2 * (W @ W))


def composed_boost(u, v, branch_u=Branch.PRINCIPAL, branch_v=Branch.PRINCIPAL,
                   const=UNIT):
    """B_{u*v} built with the product-rule gamma (branch bookkeeping)."""
    w = velocity_compose(u, v, branch_u, const)
    return boost_matrix(w, const=const,
                        gamma_value=composed_gamma(u, v, branch_u, branch_v, const))


def conjugate_boost(g, v, branch=Branch.PRINCIPAL, const=UNIT):
    """Frobenius norm of R_g B_v - B_{g(v)} R_g."""
    if not isinstance(g, Orthogonal3):
        g = Orthogonal3(g)
    R = rotation_matrix(g)
    lhs = R @ boost_matrix(v, branch, const)
    rhs = boost_matrix(g(v), branch, const) @ R
    return float(np.linalg.norm(lhs - rhs))


def is_lorentz(L, tol=1e-9):
    L = np.asarray(L, dtype=complex)
    scale = max(1.0, float(np.linalg.norm(L)) ** 2)
    return np.linalg.norm(L.T @ ETA @ L - ETA) <= tol * scale


@dataclass(frozen=True)
class FrameMap:
    L: np.ndarray
    g: Orthogonal3
    boost: BoostSpec
    gamma: complex

    def recompose(self, const=UNIT):
        return rotation_matrix(self.g) @ boost_matrix(
            self.boost.v, const=const, gamma_value=self.gamma)


def decompose(L, const=UNIT):
    """Split L (in ct convention) as R_g B_v, reading v off row 0."""
    L = np.asarray(L, dtype=complex)
    if not is_lorentz(L):
        raise NotLorentz("L^T eta L != eta")
    g00 = L[0, 0]
    if abs(g00) < 1e-12:
        raise LightlikeRow("L_00 vanishes")
    v = -const.c * L[0, 1:] / g00
    B = boost_matrix(v, const=const, gamma_value=g00)
    Binv = boost_matrix(-v, const=const, gamma_value=g00)
    G = L @ Binv
    g = Orthogonal3(G[1:, 1:])
    try:
        branch = branch_for(v, g00, const)
    except FrameError:
        branch = Branch.PRINCIPAL
    fm = FrameMap(L, g, BoostSpec(v, branch), g00)
    if np.linalg.norm(rotation_matrix(g) @ B - L) > 1e-9 * max(1.0, float(np.linalg.norm(L))):
        raise NotLorentz("recomposition failed")
    return fm


def _check_u(u, const):
    u = vec(u)
    c2 = const.c ** 2
    u2 = sq(u)
    if abs(u2) < 1e-14 or abs(u2 - c2) <= 1e-10 * c2:
        raise DegenerateComposition("u.u must avoid 0 and c^2")
    return u


def solve_w(u, v, const=UNIT):
    """w with B_w B_u = R_h B_{v e1} for some rotation h.

    Since B_w B_u = R_h B_{u*w}, this needs u*w = v e1, solved by left
    cancellation: w = (-u)*(v e1).
    """
    u = _check_u(u, const)
    return velocity_compose(-u, complex(v) * E1, const=const)


def solve_w_printed(u, v, const=UNIT):
    """The alternative (v e1)*(-u). It agrees with ``solve_w`` only when u
    is parallel to e1; otherwise B_w B_u has a boost part other than v e1."""
    u = _check_u(u, const)
    return velocity_compose(complex(v) * E1, -u, const=const)


def solve_w_limit(u, const=UNIT):
    """Large-v limit of ``solve_w``:
    -c^2 e1/u1 + k (u^2 e1/u1 - u) with k = gamma_u / (c^2 (gamma_u + 1))."""
    u = _check_u(u, const)
    if u[0] == 0:
        raise DegenerateComposition("u1 must be nonzero")
    c2 = const.c ** 2
    gu = gamma(u, const=const)
    k = gu / (c2 * (gu + 1))
    return -c2 * E1 / u[0] + k * (sq(u) * E1 / u[0] - u)


def limit_boost(direction):
    """Entrywise limit of B_{f n} as f -> infinity (gamma -> 0,
    f gamma -> -ic, f^2 gamma^2 -> -c^2). Independent of c."""
    n = np.asarray(direction, dtype=complex).reshape(3)
    if np.any(np.abs(n.imag) > 0) or abs(np.linalg.norm(n) - 1) > 1e-12:
        raise NotUnit("direction must be a real unit vector")
    n = n.real
    L = np.zeros((4, 4), dtype=complex)
    L[0, 1:] = L[1:, 0] = 1j * n
    L[1:, 1:] = np.eye(3) - np.outer(n, n)
    return L


def limit_boost_inverse(direction):
    """Limit of B_{-f n}, the inverse of ``limit_boost(n)``."""
    return limit_boost(-np.asarray(direction, dtype=float))


def rotation_taking_e1_to(v):
    """g in SG(3) with g e1 = v / sqrt(v.v), principal root.

    The other columns come from bilinear Gram-Schmidt on whichever basis
    vector gives the best-conditioned residual; the last is a cross product
    so det g = +1.
    """
    v = vec(v)
    v2 = sq(v)
    if abs(v2) < 1e-12 * max(1e-300, float(np.linalg.norm(v)) ** 2):
        raise IsotropicVector("v.v vanishes")
    n = v / _principal_sqrt(v2)
    best = None
    for e in np.eye(3, dtype=complex):
        q = e - cdot(e, n) * n
        if best is None or abs(sq(q)) > abs(sq(best)):
            best = q
    m2 = best / _principal_sqrt(sq(best))
    m3 = cross(n, m2)
    return Orthogonal3(np.column_stack([n, m2, m3]))
