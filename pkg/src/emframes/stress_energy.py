r"""Electromagnetic stress-energy, its frame transformation, and the
linear constraint equations on its first derivatives.

The stress block follows the sign used throughout this package,
$p_{ij} = -\epsilon_0(e_ie_j + c^2b_ib_j - \tfrac12\delta_{ij}(e^2+c^2b^2))$,
which is minus the conventional Maxwell stress tensor. With it the 4x4
matrix M (M00 = sigma, M0i = c g_i, Mij = p_ij) is the contravariant
stress-energy tensor, so M' = L M L^T.

Derivative unknowns are indexed by ``UNKNOWNS``: the ten quantities
sigma, g1..g3, p11, p12, p13, p22, p23, p33, each differentiated along
x, y, z, t.
"""
import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .core import (UNIT, ConstraintViolation, DegenerateDirection,
                   LightSpeedVelocity, NotLorentz, RankDeficientSampling,
                   cdot, cross, det_exact, vec)
from .kinematics import Branch, boost_matrix, gamma, is_lorentz, limit_boost

QUANTITIES = ("sigma", "g1", "g2", "g3", "p11", "p12", "p13", "p22", "p23", "p33")
UNKNOWNS = tuple(f"{q}_{d}" for q in QUANTITIES for d in "xyzt")
INDEX = {n: i for i, n in enumerate(UNKNOWNS)}


@dataclass(frozen=True)
class StressEnergy:
    sigma: complex
    g: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "sigma", complex(self.sigma))
        object.__setattr__(self, "g", vec(self.g))
        p = np.asarray(self.p, dtype=complex).reshape(3, 3)
        if np.linalg.norm(p - p.T) > 1e-12 * max(1.0, np.linalg.norm(p)):
            raise ValueError("stress block must be symmetric")
        object.__setattr__(self, "p", p)

    def as_matrix(self, const=UNIT):
        M = np.empty((4, 4), complex)
        M[0, 0] = self.sigma
        M[0, 1:] = M[1:, 0] = const.c * self.g
        M[1:, 1:] = self.p
        return M

    @classmethod
    def from_matrix(cls, M, const=UNIT):
        M = np.asarray(M, dtype=complex)
        p = 0.5 * (M[1:, 1:] + M[1:, 1:].T)
        return cls(M[0, 0], 0.5 * (M[0, 1:] + M[1:, 0]) / const.c, p)

    def trace_defect(self):
        return abs(np.trace(self.p) - self.sigma)


def _stress(E, B, const):
    c2 = const.c ** 2
    e2 = cdot(E, E)
    b2 = cdot(B, B)
    sigma = const.eps0 / 2 * (e2 + c2 * b2)
    p = -const.eps0 * (np.outer(E, E) + c2 * np.outer(B, B)) + np.eye(3) * sigma
    return sigma, const.eps0 * cross(E, B), p


def build_stress_energy(fld, const=UNIT):
    sigma, g, p = _stress(fld.E, fld.B, const)
    return StressEnergy(sigma, g, p)


def transform_stress_energy(M, L, const=UNIT):
    """Summation rule M'_{ab} = L_ai L_bj M_ij."""
    L = np.asarray(L, dtype=complex)
    if not is_lorentz(L):
        raise NotLorentz("L^T eta L != eta")
    return StressEnergy.from_matrix(L @ M.as_matrix(const) @ L.T, const)


@dataclass(frozen=True)
class StressEnergyJet:
    """Values and (x, y, z, t) partials of sigma, g and p, plus the force
    density f = rho E + J x B, all at one point."""
    sigma: complex
    dsigma: np.ndarray
    g: np.ndarray
    dg: np.ndarray
    p: np.ndarray
    dp: np.ndarray
    f: np.ndarray

    def partial(self, name):
        """Partial derivative by unknown name, e.g. ``'p12_y'``."""
        q, d = name.split("_")
        k = "xyzt".index(d)
        if q == "sigma":
            return self.dsigma[k]
        if q[0] == "g":
            return self.dg[int(q[1]) - 1, k]
        return self.dp[int(q[1]) - 1, int(q[2]) - 1, k]

    def vector(self):
        return np.array([self.partial(n) for n in UNKNOWNS])


def stress_energy_jet(jet, const=UNIT):
    """Product-rule first derivatives of sigma, g and p from a field jet."""
    E, B, dE, dB = jet.E, jet.B, jet.dE, jet.dB
    c2, e0 = const.c ** 2, const.eps0
    sigma, g, p = _stress(E, B, const)
    dsigma = e0 * (E @ dE + c2 * (B @ dB))
    dg = e0 * (np.stack([cross(dE[:, k], B) + cross(E, dB[:, k]) for k in range(4)], axis=1))
    dp = np.empty((3, 3, 4), complex)
    for k in range(4):
        dp[:, :, k] = (-e0 * (np.outer(dE[:, k], E) + np.outer(E, dE[:, k])
                              + c2 * (np.outer(dB[:, k], B) + np.outer(B, dB[:, k])))
                       + np.eye(3) * dsigma[k])
    f = jet.rho * E + cross(jet.J, B)
    return StressEnergyJet(sigma, dsigma, g, dg, p, dp, f)


# ------------------------------------------------ surface (boost) equations

@dataclass(frozen=True)
class SurfaceCoefficients:
    alpha: complex
    beta: complex
    gamma: complex
    delta: complex
    epsilon: complex
    xi: complex
    eta: complex
    theta: complex

    def as_tuple(self):
        return (self.alpha, self.beta, self.gamma, self.delta, self.epsilon,
                self.xi, self.eta, self.theta)


def surface_coefficients(v, const=UNIT, branch=Branch.PRINCIPAL):
    """Coefficients of the divergence-free condition for a boost of speed v
    along one axis, written in rest-frame derivatives."""
    c = const.c
    v = complex(v)
    if abs(v * v - c * c) <= 1e-10 * c * c:
        raise LightSpeedVelocity("v = +-c")
    g = gamma([v, 0, 0], branch, const)
    b = v / c
    g3 = g ** 3
    return SurfaceCoefficients(
        alpha=-b * g3 / c,
        beta=(b * b + 1) * g3 - g,
        gamma=g * b / c - g3 * b / c,
        delta=-b * g3 * v / c ** 3,
        epsilon=(b * b + 1) * g3 * v / c ** 2,
        xi=-b * g3 * v / c ** 3,
        eta=g,
        theta=g * b / c,
    )


def surface_equation_residual(jet, v, axis=1, const=UNIT, branch=Branch.PRINCIPAL):
    """Left-hand side of the surface condition along ``axis`` (1, 2 or 3).

    For jets obeying Maxwell's equations this equals the divergence of the
    momentum density in the frame boosted with speed v along the axis.
    """
    a = axis - 1
    k = surface_coefficients(v, const, branch)
    s = stress_energy_jet(jet, const)
    div_g = s.dg[0, 0] + s.dg[1, 1] + s.dg[2, 2]
    return (k.alpha * s.dsigma[a] + k.beta * s.dg[a, a] + k.gamma * s.dp[a, a, a]
            + k.delta * s.dsigma[3] + k.epsilon * s.dg[a, 3] + k.xi * s.dp[a, a, 3]
            + k.eta * div_g + k.theta * (s.f[a] + s.dg[a, 3]))


def limit_equation_residual(jet, axis=1, const=UNIT):
    """d/dt (E x B)_a + (1/eps0) sum over b != a of d p_ab / d x_b."""
    a = axis - 1
    s = stress_energy_jet(jet, const)
    others = sum(s.dp[a, b, b] for b in range(3) if b != a)
    return s.dg[a, 3] / const.eps0 + others / const.eps0


def limit_force_residual(jet, axis=1, const=UNIT):
    """f_a + d p_aa / d x_a, which vanishes in the limit frame."""
    a = axis - 1
    s = stress_energy_jet(jet, const)
    return s.f[a] + s.dp[a, a, a]


def momentum_balance_residual(jet, const=UNIT):
    """dg_i/dt + sum_j d p_ij / d x_j + f_i, zero for Maxwell jets."""
    s = stress_energy_jet(jet, const)
    return s.dg[:, 3] + np.einsum("ijj->i", s.dp[:, :, :3]) + s.f


# ------------------------------------------------------- triples and rows

@dataclass(frozen=True)
class OrthonormalTriple:
    r"""theta = (s, alpha, beta), theta' and theta'' = theta x theta'.

    With ``t = v1 / sqrt(1 + kappa^2)`` the constraint set is
    s^2+alpha^2+beta^2 = 1, t^2+gamma^2+delta^2 = 1, s t+alpha gamma+beta delta = 0.

    ``convention='orthonormal'`` takes theta' = (t, gamma, delta), which the
    constraints make orthonormal to theta. ``convention='printed'`` takes the
    first component of theta' to be s t, matching the closed-form
    lambda/mu/nu tables as printed; that triple is orthonormal only when
    t = 0 or s is 0 or 1.
    """
    s: float
    alpha: float
    beta: float
    gamma: float
    delta: float
    v1: float = 0.0
    kappa: float = 0.0
    convention: str = "orthonormal"

    @property
    def t(self):
        return self.v1 / np.sqrt(1 + self.kappa ** 2)

    @property
    def theta(self):
        return np.array([self.s, self.alpha, self.beta], dtype=complex)

    @property
    def theta_p(self):
        first = self.t if self.convention == "orthonormal" else self.s * self.t
        return np.array([first, self.gamma, self.delta], dtype=complex)

    @property
    def theta_pp(self):
        return cross(self.theta, self.theta_p)

    def rows(self):
        return np.array([self.theta, self.theta_p, self.theta_pp])

    def lam(self, i, j):
        a, b = self.theta, self.theta_p
        return a[i - 1] * b[j - 1] + b[i - 1] * a[j - 1]

    def mu(self, i, j):
        a, b = self.theta, self.theta_pp
        return a[i - 1] * b[j - 1] + b[i - 1] * a[j - 1]

    def nu(self, i, j):
        a, b = self.theta_p, self.theta_pp
        return a[i - 1] * a[j - 1] + b[i - 1] * b[j - 1]

    def constraint_residuals(self):
        s, al, be, ga, de, t = self.s, self.alpha, self.beta, self.gamma, self.delta, self.t
        return np.array([s * s + al * al + be * be - 1, t * t + ga * ga + de * de - 1,
                         s * t + al * ga + be * de])

    def orthonormality_defect(self):
        a, b = self.theta, self.theta_p
        return max(abs(cdot(a, a) - 1), abs(cdot(b, b) - 1), abs(cdot(a, b)))

    def algebra_identity(self):
        """theta''_1^2 + theta'_1^2 + theta_1^2, which is 1 when the three
        vectors are the rows of an orthogonal matrix."""
        return (self.theta_pp[0] ** 2 + self.theta_p[0] ** 2 + self.theta[0] ** 2)


def orthonormal_triple(s, alpha, beta, gamma, delta, v1=0.0, kappa=0.0,
                       convention="orthonormal", check=True, tol=1e-12):
    if convention not in ("orthonormal", "printed"):
        raise ValueError("convention must be 'orthonormal' or 'printed'")
    tr = OrthonormalTriple(float(s), float(alpha), float(beta), float(gamma),
                           float(delta), float(v1), float(kappa), convention)
    if check:
        if abs(tr.v1) > 1 + tol or np.max(np.abs(tr.constraint_residuals())) > tol:
            raise ConstraintViolation("parameters violate the triple constraints")
    return tr


def triple_from_rows(theta, theta_p, convention="orthonormal"):
    """Triple from a real orthonormal pair, with kappa = 0 and v1 = t."""
    th = np.real_if_close(np.asarray(theta, dtype=complex)).astype(float)
    tp = np.real_if_close(np.asarray(theta_p, dtype=complex)).astype(float)
    v1 = tp[0] if convention == "orthonormal" else (tp[0] / th[0] if th[0] else 0.0)
    return orthonormal_triple(th[0], th[1], th[2], tp[1], tp[2], v1=v1,
                              convention=convention)


def sample_triple(rng, convention="orthonormal", kappa_max=0.0):
    """Random admissible triple; s in [0, 1), kappa in [0, kappa_max]."""
    while True:
        s = rng.uniform(0.0, 1.0)
        kappa = rng.uniform(0.0, kappa_max) if kappa_max > 0 else 0.0
        t = rng.uniform(-1.0, 1.0) / np.sqrt(1 + kappa ** 2)
        tau, r = np.sqrt(1 - s * s), np.sqrt(1 - t * t)
        if tau * r < 1e-6:
            continue
        cc = -s * t / (tau * r)
        if abs(cc) > 1:
            continue
        phi = rng.uniform(0, 2 * np.pi)
        psi = phi + rng.choice((-1.0, 1.0)) * np.arccos(cc)
        tr = orthonormal_triple(s, tau * np.cos(phi), tau * np.sin(phi),
                                r * np.cos(psi), r * np.sin(psi),
                                v1=t * np.sqrt(1 + kappa ** 2), kappa=kappa,
                                convention=convention, check=False)
        if np.max(np.abs(tr.constraint_residuals())) <= 1e-12:
            return tr


def _row():
    return np.zeros(len(UNKNOWNS), complex)


def _put(r, name, val):
    r[INDEX[name]] += val


def _finite_row(speed, tr, u1_over_u, gu, const):
    """Printed 40-term equation at boost speed ``speed`` with w = s*speed."""
    c, e = const.c, const.eps0
    c2 = c * c
    u = speed
    w = tr.theta[0] * u
    th, tp, tpp = tr.theta, tr.theta_p, tr.theta_pp
    L, M, N = tr.lam, tr.mu, tr.nu
    r = _row()
    P = lambda n, v: _put(r, n, v / e)
    P("sigma_x", -w ** 3 * gu ** 3 / (u * c2))
    P("sigma_y", w * gu ** 2 * u * N(1, 2) / c2)
    P("sigma_z", w * gu ** 2 * u * N(1, 3) / c2)
    P("sigma_t", w * gu ** 3 * (-1 + u1_over_u ** 2 / c2) / c2)
    P("g1_x", w * gu ** 3 * (u * u + 2 * w * w * c2 / u ** 2 - c2) / c2)
    P("g1_y", -2 * w * gu ** 2 * N(1, 2))
    P("g1_z", -2 * w * gu ** 2 * N(1, 3))
    P("g1_t", w * gu ** 3 * (2 * w * w - u * u + c2) / (u * c2))
    for k in (2, 3):
        lk, mk = L(1, k), M(1, k)
        P(f"g{k}_x", u * gu ** 2 * (th[k - 1] - tp[0] * lk - tpp[0] * mk))
        P(f"g{k}_y", u * gu * (-tp[1] * lk - tpp[1] * mk))
        P(f"g{k}_z", u * gu * (-tp[2] * lk - tpp[2] * mk))
        P(f"g{k}_t", gu ** 2 * (th[k - 1] - u * u / c2 * (tp[0] * lk + tpp[0] * mk)))
        P(f"p1{k}_x", gu ** 2 * (-th[k - 1] * u * u + c2 * tp[0] * lk + c2 * tpp[0] * mk) / c2)
        P(f"p1{k}_y", gu * (tp[1] * lk + tpp[1] * mk))
        P(f"p1{k}_z", gu * (tp[2] * lk + tpp[2] * mk))
        P(f"p1{k}_t", gu ** 2 * u * (-th[k - 1] + tp[0] * lk + tpp[0] * mk) / c2)
    P("p11_x", gu ** 3 * w * (1 - w * w / c2 - u * u / c2) / u)
    P("p11_y", gu ** 2 * w * N(1, 2) / u)
    P("p11_z", gu ** 2 * w * N(1, 3) / u)
    P("p11_t", -gu ** 3 * w ** 3 / (c2 * u * u))
    P("p22_x", th[1] * gu * N(1, 2))
    P("p22_y", th[1] * N(2, 2))
    P("p22_z", th[1] * N(2, 3))
    P("p22_t", th[1] * u * gu * N(1, 2) / c2)
    l23, m23 = L(2, 3), M(2, 3)
    P("p23_x", gu * (tp[0] * l23 + tpp[0] * m23))
    P("p23_y", tp[1] * l23 + tpp[1] * m23)
    P("p23_z", tp[2] * l23 + tpp[2] * m23)
    P("p23_t", gu ** 2 * u * (tp[0] * l23 + tpp[0] * m23) / c2)
    P("p33_x", th[2] * gu * N(1, 3))
    P("p33_y", th[2] * N(2, 3))
    P("p33_z", th[2] * N(3, 3))
    P("p33_t", th[2] * u * gu / c2)
    return r


def big_equation_coefficients(u, triple, const=UNIT):
    """The printed 40-term equation for a real boost velocity u, as an
    array indexed by ``UNKNOWNS``."""
    u = np.asarray(u, dtype=float).reshape(3)
    speed = float(np.linalg.norm(u))
    if u[0] == 0 or np.hypot(u[1], u[2]) == 0:
        raise DegenerateDirection("need u1 != 0 and u not along e1")
    if not 0 < speed < const.c:
        raise LightSpeedVelocity("need 0 < |u| < c")
    gu = gamma([speed, 0, 0], const=const)
    return _finite_row(speed, triple, u[0] / speed, gu, const)


def big_equation_at_speed(speed, triple, const=UNIT):
    """The same row evaluated at any real speed, including speed > c where
    the principal gamma behaves like c/(i speed). Uses w = s * speed."""
    s = float(np.real(triple.theta[0]))
    gu = gamma([speed, 0, 0], const=const)
    return _finite_row(float(speed), triple, np.sqrt(max(0.0, 1 - s * s)), gu, const)


def limit_equation_row(triple, const=UNIT):
    """Closed-form large-speed limit of the 40-term equation, as printed."""
    c, e = const.c, const.eps0
    ic = 1j * c
    th, tp, tpp = triple.theta, triple.theta_p, triple.theta_pp
    L, M, N = triple.lam, triple.mu, triple.nu
    s = th[0]
    r = _row()
    P = lambda n, v: _put(r, n, v / e)
    P("sigma_y", -N(1, 2) * s)
    P("sigma_z", -N(1, 3) * s)
    P("g1_x", s * ic)
    for k in (2, 3):
        lk, mk = L(1, k), M(1, k)
        P(f"g{k}_y", -ic * (-tp[1] * lk - tpp[1] * mk))
        P(f"g{k}_z", -ic * (-tp[2] * lk - tpp[2] * mk))
        P(f"g{k}_t", tp[0] * lk + tpp[0] * mk)
    P("p12_x", th[1])
    P("p13_x", th[2])
    P("p22_y", th[1] * N(2, 2))
    P("p22_z", th[1] * N(2, 3))
    P("p22_t", -1j * th[1] * N(1, 2) / c)
    P("p23_y", tp[1] * L(2, 3) + tpp[1] * M(2, 3))
    P("p23_z", tp[2] * L(2, 3) + tpp[2] * M(2, 3))
    P("p33_y", th[2] * N(2, 3))
    P("p33_z", th[2] * N(3, 3))
    P("p33_t", -1j / c)
    return r


def scaled_limit_row(triple, const=UNIT):
    """Closed-form next-order row (the 40-term equation times the speed, in
    the limit), as printed once the leading-order zeros are imposed."""
    c, e = const.c, const.eps0
    ic = 1j * c
    th, tp, tpp = triple.theta, triple.theta_p, triple.theta_pp
    L, M, N = triple.lam, triple.mu, triple.nu
    s = th[0]
    r = _row()
    P = lambda n, v: _put(r, n, v / e)
    P("sigma_x", -ic * s ** 3)
    P("g1_y", 2 * c * c * N(1, 2) * s)
    P("g1_z", 2 * c * c * N(1, 3) * s)
    P("g1_t", s * ic * (2 * s * s - 1))
    for k in (2, 3):
        lk, mk = L(1, k), M(1, k)
        P(f"g{k}_x", -c * c * (th[k - 1] - tp[0] * lk - tpp[0] * mk))
        P(f"p1{k}_y", -ic * (tp[1] * lk + tpp[1] * mk))
        P(f"p1{k}_z", -ic * (tp[2] * lk + tpp[2] * mk))
        P(f"p1{k}_t", -(-th[k - 1] + tp[0] * lk + tpp[0] * mk))
    P("p11_x", -s * (s * s + 1) * ic)
    P("p22_x", -ic * th[1] * N(1, 2))
    P("p23_x", -ic * (tp[0] * L(2, 3) + tpp[0] * M(2, 3)))
    P("p23_t", -(tp[0] * L(2, 3) + tpp[0] * M(2, 3)))
    P("p33_x", -ic * th[2] * N(1, 3))
    return r


def _component(i, j, c):
    if i == 0 and j == 0:
        return "sigma", 1.0
    if i == 0 or j == 0:
        return f"g{i + j}", c
    a, b = sorted((i, j))
    return f"p{a}{b}", 1.0


def tensor_row(L, const=UNIT, column=1, rows=(0, 2, 3)):
    """Coefficients of sum over a in ``rows`` of d'_a M'_{a,column} in terms
    of rest-frame derivative unknowns, for the frame reached by L.

    With rows (0, 2, 3) and column 1 this is dt g1' + dy' p12' + dz' p13'
    in the new frame, times c (since M'_01 = c g1' and d'_0 = d'_t / c).
    """
    L = np.asarray(L, dtype=complex)
    Linv = np.linalg.inv(L)
    c = const.c
    r = _row()
    for a in rows:
        for b in range(4):
            da = Linv[b, a]
            if da == 0:
                continue
            suffix, fd = ("t", 1 / c) if b == 0 else ("xyz"[b - 1], 1.0)
            for i in range(4):
                for j in range(4):
                    f = L[a, i] * L[column, j] * da
                    if f == 0:
                        continue
                    q, fq = _component(i, j, c)
                    r[INDEX[f"{q}_{suffix}"]] += f * fq * fd
    return r


def _frame(triple):
    R = np.eye(4, dtype=complex)
    R[1:, 1:] = triple.rows()
    return R


def derived_equation_row(speed, triple, const=UNIT):
    """Tensor-transformation oracle for the 40-term equation: rotate by the
    triple after a boost of ``speed`` along x, then impose the limit-frame
    momentum equation."""
    L = _frame(triple) @ boost_matrix([speed, 0, 0], const=const)
    return tensor_row(L, const) / const.eps0


def derived_limit_row(triple, const=UNIT):
    L = _frame(triple) @ limit_boost([1.0, 0.0, 0.0])
    return tensor_row(L, const) / const.eps0


def combined_g2z_coefficient(triple, const=UNIT):
    """Coefficient of dg2/dz once dg3/dy = -dg2/dz is substituted."""
    tp, tpp = triple.theta_p, triple.theta_pp
    L, M = triple.lam, triple.mu
    return 1j * const.c * (tp[2] * L(1, 2) + tpp[2] * M(1, 2)
                           - tp[1] * L(1, 3) - tpp[1] * M(1, 3)) / const.eps0


# --------------------------------------------------- the 4x4 A-matrix

# Rational parts of the printed A-matrix. Rows 2 and 3 carry an extra factor
# 1/sqrt(2) and every entry a factor 1/eps0.
A_PRINTED_RATIONAL = (
    ("0", "0", "0", "2/3"),
    ("-1/2", "13/6", "-7/12", "1/6"),
    ("1/2", "2", "5/12", "-13/6"),
    ("0", "19/12", "0", "-1"),
)
A_ROW_SCALE = (1.0, 2 ** -0.5, 2 ** -0.5, 1.0)


def a_matrix_printed(const=UNIT):
    R = np.array([[float(Fraction(x)) for x in row]
                  for row in A_PRINTED_RATIONAL])
    return np.diag(A_ROW_SCALE) @ R / const.eps0


def a_matrix_determinant_exact():
    """det(A) * eps0^4 as an exact Fraction (the two 1/sqrt(2) row factors
    contribute exactly 1/2)."""
    return det_exact(A_PRINTED_RATIONAL) / 2


def a_matrix_determinant(const=UNIT):
    return float(np.linalg.det(a_matrix_printed(const)))


def a_matrix_from_coefficients(const=UNIT, convention="orthonormal"):
    """Rebuild the A-matrix from the four reduced coefficient expressions
    (in dp33/dy, dp33/dz, dp22/dz, dp23/dy) at s = 0 and
    angle in {0, pi/4, 3pi/4, pi/2}."""
    rows = []
    for a in (0.0, np.pi / 4, 3 * np.pi / 4, np.pi / 2):
        tr = orthonormal_triple(0.0, np.cos(a), np.sin(a), -np.sin(a), np.cos(a),
                                convention=convention)
        th, tp, tpp = tr.theta, tr.theta_p, tr.theta_pp
        L, M, N = tr.lam, tr.mu, tr.nu
        s = th[0]
        t2, t3 = th[1], th[2]
        l23t = tp[2] * L(2, 3) + tpp[2] * M(2, 3)
        rows.append([
            t3 * N(2, 3),
            N(1, 2) * s / 6 + N(1, 3) * s - t2 / 12 + 19 * t3 / 12 + l23t / 12
            + t2 * N(2, 2) / 6 + t3 * N(3, 3),
            -N(1, 2) * s / 6 + t2 / 12 + 5 * t3 / 12 - l23t / 12 - t2 * N(2, 2) / 6
            + t2 * N(2, 3),
            -2 * N(1, 2) * s / 3 - 2 * t2 / 3 - t3 / 3 + 2 * l23t / 3 + t2 * N(2, 2) / 3
            + tp[1] * L(2, 3) + tpp[1] * M(2, 3),
        ])
    return np.array(rows) / const.eps0


# ------------------------------------------------------ nullspace analysis

NEWEQUATIONS_ZEROS = (
    "sigma_y", "sigma_z", "g1_x", "g2_y", "g2_z", "g2_t", "g3_y", "g3_z", "g3_t",
    "p12_x", "p13_x", "p22_y", "p22_z", "p22_t", "p23_y", "p23_z", "p33_y",
    "p33_z", "p33_t",
)


def newequations3_combinations(const=UNIT):
    """Named combinations listed as vanishing at next order."""
    c2 = const.c ** 2
    ic = 1j * const.c
    combos = {
        "sigma_x+3*p11_x": {"sigma_x": 1, "p11_x": 3},
        "g1_t+p11_x": {"g1_t": 1, "p11_x": 1},
        "p12_t-c^2*g2_x": {"p12_t": 1, "g2_x": -c2},
        "p13_t-c^2*g3_x": {"p13_t": 1, "g3_x": -c2},
        "ic*p23_x+p23_t": {"p23_x": ic, "p23_t": 1},
    }
    for n in ("g1_y", "g1_z", "p12_y", "p12_z", "p13_y", "p13_z", "p22_x", "p33_x"):
        combos[n] = {n: 1}
    out = {}
    for name, d in combos.items():
        v = _row()
        for k, a in d.items():
            v[INDEX[k]] = a
        out[name] = v
    return out


def permute_row(row, tau):
    """Relabel unknowns by the axis permutation tau (1-based tuple with
    tau[i-1] = image of axis i)."""
    out = np.zeros_like(row)
    for n, i in INDEX.items():
        out[INDEX[_permute_name(n, tau)]] = row[i]
    return out


def _permute_name(name, tau):
    q, d = name.split("_")
    d2 = d if d == "t" else "xyz"[tau["xyz".index(d)] - 1]
    if q == "sigma":
        q2 = q
    elif q[0] == "g":
        q2 = f"g{tau[int(q[1]) - 1]}"
    else:
        a, b = sorted((tau[int(q[1]) - 1], tau[int(q[2]) - 1]))
        q2 = f"p{a}{b}"
    return f"{q2}_{d2}"


@dataclass
class ForcedZeroReport:
    rank: int
    nullity: int
    samples: int
    status: dict
    witness: dict
    combinations: dict = field(default_factory=dict)
    singular_values: list = field(default_factory=list)

    @property
    def forced(self):
        return [n for n in UNKNOWNS if self.status[n] == "forced-zero"]

    def to_json(self):
        return json.dumps({
            "rank": self.rank, "nullity": self.nullity, "samples": self.samples,
            "unknowns": {n: {"status": self.status[n], "max_null_component": self.witness[n]}
                         for n in UNKNOWNS},
            "combinations": self.combinations,
        }, indent=2, sort_keys=True)


def analyse_rows(A, combinations=None, rank_tol=1e-8, comp_tol=1e-6, samples=None):
    """Numerical nullspace of stacked rows and the unknowns it pins to 0."""
    A = np.asarray(A, dtype=complex)
    _, sv, Vh = np.linalg.svd(A)
    rank = int(np.sum(sv > rank_tol * sv[0])) if sv.size and sv[0] > 0 else 0
    N = Vh[rank:].conj().T
    witness = {n: (float(np.max(np.abs(N[i]))) if N.shape[1] else 0.0)
               for i, n in enumerate(UNKNOWNS)}
    status = {n: "forced-zero" if witness[n] < comp_tol else "free" for n in UNKNOWNS}
    combo_report = {}
    for name, v in (combinations or {}).items():
        res = float(np.max(np.abs(v @ N)) / np.linalg.norm(v)) if N.shape[1] else 0.0
        ok = res < comp_tol
        combo_report[name] = {"forced": ok, "residual": res}
        if ok:
            for i in np.flatnonzero(v):
                if status[UNKNOWNS[i]] == "free":
                    status[UNKNOWNS[i]] = "combination"
    return ForcedZeroReport(rank, N.shape[1], len(A) if samples is None else samples,
                            status, witness, combo_report, [float(x) for x in sv])


def nullspace_analysis(sampler, count=80, const=UNIT, rows=("limit", "scaled"),
                       combinations=None, rank_tol=1e-8, comp_tol=1e-6):
    """Stack coefficient rows at ``count`` sampled triples and report which
    derivative unknowns (and which combinations) the rows force to vanish.

    ``sampler()`` returns an OrthonormalTriple. ``rows`` picks any of
    'limit' (printed leading order), 'scaled' (printed next order) and
    'derived' (tensor-derived leading order).
    """
    if count < 60:
        raise RankDeficientSampling("need at least 60 samples")
    makers = {"limit": limit_equation_row, "scaled": scaled_limit_row,
              "derived": derived_limit_row}
    triples = [sampler() for _ in range(count)]
    A = np.array([makers[k](tr, const) for tr in triples for k in rows])
    half = analyse_rows(A[: len(A) // 2], rank_tol=rank_tol, comp_tol=comp_tol)
    if combinations is None:
        combinations = newequations3_combinations(const)
    rep = analyse_rows(A, combinations, rank_tol, comp_tol, samples=count)
    if half.rank != rep.rank:
        raise RankDeficientSampling("rank still growing with samples; resample with more")
    return rep


def permute_stress_energy(M, tau):
    """sigma' = sigma, g'_i = g_tau(i), p'_ij = p_tau(i)tau(j)."""
    idx = [t - 1 for t in tau]
    if sorted(idx) != [0, 1, 2]:
        raise ValueError("tau must permute (1, 2, 3)")
    return StressEnergy(M.sigma, M.g[idx], M.p[np.ix_(idx, idx)])


def permutation_matrix(tau):
    """P with (P x)_i = x_tau(i)."""
    P = np.zeros((3, 3))
    for i, t in enumerate(tau):
        P[i, t - 1] = 1.0
    return P


ALL_PERMUTATIONS = tuple(itertools.permutations((1, 2, 3)))
