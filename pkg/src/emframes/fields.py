"""Charge, current, fields and potentials under frame changes, plus
first-order field jets and their Maxwell residuals.

A jet stores values and first partials at one spacetime point. Partials are
always ordered (x, y, z, t). Frame matrices act on (ct, x, y, z).
"""
from dataclasses import dataclass, replace

import numpy as np

from .core import (UNIT, IsotropicVector, NoConvergence, StepTooSmall, cdot,
                   cross, sq, vec)
from .kinematics import BoostSpec, Orthogonal3, limit_boost

LEVI = np.zeros((3, 3, 3))
for _i, _j, _k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    LEVI[_i, _j, _k] = 1.0
    LEVI[_i, _k, _j] = -1.0


@dataclass(frozen=True)
class ChargeCurrent:
    rho: complex
    J: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "rho", complex(self.rho))
        object.__setattr__(self, "J", vec(self.J))


@dataclass(frozen=True)
class EMField:
    E: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "E", vec(self.E))
        object.__setattr__(self, "B", vec(self.B))


@dataclass(frozen=True)
class FourPotential:
    V_over_c: complex
    A: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "V_over_c", complex(self.V_over_c))
        object.__setattr__(self, "A", vec(self.A))


def _arr(x, shape):
    return np.asarray(x, dtype=complex).reshape(shape).copy()


@dataclass(frozen=True)
class FieldJet:
    """First-order Taylor data of (E, B, rho, J) at ``point`` = (x, y, z, t).

    ``dE[i, k]`` is the partial of E_i along coordinate k of (x, y, z, t).
    """
    point: np.ndarray
    E: np.ndarray
    dE: np.ndarray
    B: np.ndarray
    dB: np.ndarray
    rho: complex = 0.0
    drho: np.ndarray = None
    J: np.ndarray = None
    dJ: np.ndarray = None

    def __post_init__(self):
        s = object.__setattr__
        s(self, "point", _arr(self.point, 4))
        s(self, "E", _arr(self.E, 3))
        s(self, "dE", _arr(self.dE, (3, 4)))
        s(self, "B", _arr(self.B, 3))
        s(self, "dB", _arr(self.dB, (3, 4)))
        s(self, "rho", complex(self.rho))
        s(self, "drho", np.zeros(4, complex) if self.drho is None else _arr(self.drho, 4))
        s(self, "J", np.zeros(3, complex) if self.J is None else _arr(self.J, 3))
        s(self, "dJ", np.zeros((3, 4), complex) if self.dJ is None else _arr(self.dJ, (3, 4)))
        for a in (self.point, self.E, self.dE, self.B, self.dB, self.drho, self.J, self.dJ):
            if not np.all(np.isfinite(a)):
                raise ValueError("jet entries must be finite")

    @classmethod
    def zero(cls, point=(0, 0, 0, 0)):
        return cls(point, np.zeros(3), np.zeros((3, 4)), np.zeros(3), np.zeros((3, 4)))

    def field(self):
        return EMField(self.E, self.B)

    def charge_current(self):
        return ChargeCurrent(self.rho, self.J)

    def coefficients(self):
        """The 30 field coefficients: for E1..E3 then B1..B3, the value
        followed by the x, y, z, t partials."""
        rows = [np.concatenate([[self.E[i]], self.dE[i]]) for i in range(3)]
        rows += [np.concatenate([[self.B[i]], self.dB[i]]) for i in range(3)]
        return np.concatenate(rows)

    def with_coefficients(self, z):
        z = np.asarray(z, dtype=complex).reshape(6, 5)
        return replace(self, E=z[:3, 0], dE=z[:3, 1:], B=z[3:, 0], dB=z[3:, 1:])

    def evaluate(self, point):
        """Linear Taylor evaluation at another point."""
        d = np.asarray(point, dtype=complex) - self.point
        return (self.E + self.dE @ d, self.B + self.dB @ d,
                self.rho + self.drho @ d, self.J + self.dJ @ d)


def divergence(dF):
    return dF[0, 0] + dF[1, 1] + dF[2, 2]


def curl(dF):
    return np.array([dF[2, 1] - dF[1, 2], dF[0, 2] - dF[2, 0], dF[1, 0] - dF[0, 1]])


# ---------------------------------------------------------------- providers

class FieldProvider:
    """Deterministic map (x, y, z, t) -> (E, B, rho, J).

    Subclasses override ``__call__`` and, when they can, ``jet`` with exact
    derivatives. The fallback jet uses central differences.
    """
    fd_step = 1e-4

    def __call__(self, x, y, z, t):
        raise NotImplementedError

    def jet(self, point, scale=1.0):
        p = np.asarray(point, dtype=complex)
        E, B, rho, J = self(*p)
        h = self.fd_step * scale
        dE = np.zeros((3, 4), complex)
        dB = np.zeros((3, 4), complex)
        drho = np.zeros(4, complex)
        dJ = np.zeros((3, 4), complex)
        for k in range(4):
            e = np.zeros(4)
            e[k] = h
            Ep, Bp, rp, Jp = self(*(p + e))
            Em, Bm, rm, Jm = self(*(p - e))
            dE[:, k] = (np.asarray(Ep) - Em) / (2 * h)
            dB[:, k] = (np.asarray(Bp) - Bm) / (2 * h)
            drho[k] = (rp - rm) / (2 * h)
            dJ[:, k] = (np.asarray(Jp) - Jm) / (2 * h)
        return FieldJet(p, E, dE, B, dB, rho, drho, J, dJ)


class ConstantFields(FieldProvider):
    def __init__(self, E, B, rho=0.0, J=(0, 0, 0)):
        self.E, self.B, self.rho, self.J = vec(E), vec(B), complex(rho), vec(J)

    def __call__(self, x, y, z, t):
        return self.E.copy(), self.B.copy(), self.rho, self.J.copy()

    def jet(self, point, scale=1.0):
        z = np.zeros((3, 4))
        return FieldJet(point, self.E, z, self.B, z, self.rho, None, self.J, None)


def crossed_fields(E0=1.0, B0=1.0):
    """Uniform E along x and B along y."""
    return ConstantFields([E0, 0, 0], [0, B0, 0])


class PlaneWave(FieldProvider):
    r"""Vacuum plane wave $E = E_0\cos(k\,n\cdot x - \omega t + \phi)$,
    $B = n\times E/c$, with $\omega = ck$ and $E_0 \perp n$."""

    def __init__(self, E0=(0, 1, 0), direction=(1, 0, 0), k=1.0, phase=0.0, const=UNIT):
        n = np.asarray(direction, dtype=float)
        self.n = n / np.linalg.norm(n)
        self.E0 = vec(E0)
        if abs(cdot(self.E0, self.n)) > 1e-12 * max(1.0, np.linalg.norm(self.E0)):
            raise ValueError("polarisation must be transverse")
        self.k, self.phase, self.const = float(k), float(phase), const
        self.omega = const.c * self.k

    def _arg(self, x, y, z, t):
        return self.k * (self.n[0] * x + self.n[1] * y + self.n[2] * z) - self.omega * t + self.phase

    def __call__(self, x, y, z, t):
        E = self.E0 * np.cos(self._arg(x, y, z, t))
        return E, cross(self.n, E) / self.const.c, 0.0, np.zeros(3, complex)

    def jet(self, point, scale=1.0):
        p = np.asarray(point, dtype=complex)
        a = self._arg(*p)
        grad = np.array([*(self.k * self.n), -self.omega])
        E = self.E0 * np.cos(a)
        dE = -np.outer(self.E0 * np.sin(a), grad)
        nx = cross(self.n, self.E0) / self.const.c
        return FieldJet(p, E, dE, nx * np.cos(a), -np.outer(nx * np.sin(a), grad))

    def potential_jet(self, point):
        """Jet of (V, A) with V = 0 and A = (E0/omega) sin(arg)."""
        p = np.asarray(point, dtype=complex)
        a = self._arg(*p)
        grad = np.array([*(self.k * self.n), -self.omega])
        A = self.E0 / self.omega * np.sin(a)
        dA = np.outer(self.E0 / self.omega * np.cos(a), grad)
        return PotentialJet(p, 0.0, np.zeros(4), A, dA)


class PolynomialJet(FieldProvider):
    """Fields that are exactly the linear Taylor polynomial of a jet."""

    def __init__(self, jet):
        self.base = jet

    def __call__(self, x, y, z, t):
        return self.base.evaluate([x, y, z, t])

    def jet(self, point, scale=1.0):
        E, B, rho, J = self(*point)
        b = self.base
        return FieldJet(point, E, b.dE, B, b.dB, rho, b.drho, J, b.dJ)


class FunctionProvider(FieldProvider):
    """Wrap a plain function returning (E, B, rho, J)."""

    def __init__(self, fn):
        self.fn = fn

    def __call__(self, x, y, z, t):
        E, B, rho, J = self.fn(x, y, z, t)
        return vec(E), vec(B), complex(rho), vec(J)


# --------------------------------------------------------- rotations, O(3)

def _as_orth(g):
    return g if isinstance(g, Orthogonal3) else Orthogonal3(g)


def transform_scalar_rotation(f, g):
    """f^g with f^g(g x, t) = f(x, t)."""
    g = _as_orth(g)

    def fg(x, y, z, t):
        return f(*(g.m.T @ np.array([x, y, z])), t)
    return fg


def transform_vector_rotation(F, g):
    """F' with F'(g x, t) = g F(x, t)."""
    g = _as_orth(g)

    def Fg(x, y, z, t):
        return g.m @ np.asarray(F(*(g.m.T @ np.array([x, y, z])), t))
    return Fg


def scalar_jet_rotation(value, grad, g):
    """Value and (x, y, z, t) gradient of f^g at the image point."""
    g = _as_orth(g)
    grad = np.asarray(grad, dtype=complex)
    return value, np.concatenate([g.m @ grad[:3], grad[3:]])


def vector_jet_rotation(F, dF, g):
    g = _as_orth(g)
    dF = np.asarray(dF, dtype=complex)
    out = np.empty((3, 4), complex)
    out[:, :3] = g.m @ dF[:, :3] @ g.m.T
    out[:, 3] = g.m @ dF[:, 3]
    return g.m @ np.asarray(F, dtype=complex), out


def _rotate_jet(jet, g):
    s = g.det_sign
    E, dE = vector_jet_rotation(jet.E, jet.dE, g)
    B, dB = vector_jet_rotation(jet.B, jet.dB, g)
    J, dJ = vector_jet_rotation(jet.J, jet.dJ, g)
    rho, drho = scalar_jet_rotation(jet.rho, jet.drho, g)
    pt = np.concatenate([g.m @ jet.point[:3], jet.point[3:]])
    return FieldJet(pt, E, dE, s * B, s * dB, rho, drho, J, dJ)


class _RotatedProvider(FieldProvider):
    def __init__(self, base, g):
        self.base, self.g = base, g

    def __call__(self, x, y, z, t):
        E, B, rho, J = self.base(*(self.g.m.T @ np.array([x, y, z])), t)
        m = self.g.m
        return m @ E, self.g.det_sign * (m @ B), rho, m @ J

    def jet(self, point, scale=1.0):
        p = np.asarray(point, dtype=complex)
        src = np.concatenate([self.g.m.T @ p[:3], p[3:]])
        return _rotate_jet(self.base.jet(src, scale), self.g)


def transform_em_rotation(obj, g):
    """Apply g in O(3) (or G(3)): E -> E^g, B -> sign(g) B^g, J -> J^g.

    Accepts an EMField, a FieldJet or a FieldProvider.
    """
    g = _as_orth(g)
    if isinstance(obj, EMField):
        return EMField(g(obj.E), g.det_sign * g(obj.B))
    if isinstance(obj, FieldJet):
        return _rotate_jet(obj, g)
    if isinstance(obj, FieldProvider):
        return _RotatedProvider(obj, g)
    raise TypeError("expected EMField, FieldJet or FieldProvider")


# ------------------------------------------------------------------ boosts

def _split(v, F):
    v2 = sq(v)
    if abs(v2) < 1e-14 * max(1e-300, float(np.linalg.norm(v)) ** 2):
        raise IsotropicVector("cannot split along an isotropic velocity")
    par = v * cdot(v, F) / v2
    return par, F - par


def _boost_args(b, const):
    if isinstance(b, BoostSpec):
        return b.v, b.gamma(const)
    v = vec(b)
    return v, BoostSpec(v).gamma(const)


def transform_cc_boost(cc, b, const=UNIT):
    v, g = _boost_args(b, const)
    if not np.any(v):
        return cc
    Jpar, Jperp = _split(v, cc.J)
    rho = g * (cc.rho - cdot(v, cc.J) / const.c ** 2)
    return ChargeCurrent(rho, g * (Jpar - v * cc.rho) + Jperp)


def transform_em_boost(fld, b, const=UNIT):
    v, g = _boost_args(b, const)
    if not np.any(v):
        return fld
    Epar, Eperp = _split(v, fld.E)
    Bpar, Bperp = _split(v, fld.B)
    return EMField(Epar + g * (Eperp + cross(v, fld.B)),
                   Bpar + g * (Bperp - cross(v, fld.E) / const.c ** 2))


def transform_potential_boost(p, b, const=UNIT):
    v, g = _boost_args(b, const)
    if not np.any(v):
        return p
    Apar, Aperp = _split(v, p.A)
    c = const.c
    return FourPotential(g * (p.V_over_c - cdot(v, p.A) / c),
                         g * (Apar - p.V_over_c * v / c) + Aperp)


@dataclass(frozen=True)
class PotentialJet:
    point: np.ndarray
    V: complex
    dV: np.ndarray
    A: np.ndarray
    dA: np.ndarray

    def __post_init__(self):
        s = object.__setattr__
        s(self, "point", _arr(self.point, 4))
        s(self, "V", complex(self.V))
        s(self, "dV", _arr(self.dV, 4))
        s(self, "A", _arr(self.A, 3))
        s(self, "dA", _arr(self.dA, (3, 4)))


def fields_from_potential(pj):
    """E = -grad V - dA/dt and B = curl A at the jet point."""
    return EMField(-pj.dV[:3] - pj.dA[:, 3], curl(pj.dA))


# ------------------------------------------------- general frame matrices

def faraday(E, B, c):
    """Contravariant field tensor: F^{0i} = -E_i/c, F^{ij} = -eps_ijk B_k."""
    F = np.zeros((4, 4), complex)
    F[0, 1:] = -np.asarray(E) / c
    F[1:, 0] = np.asarray(E) / c
    F[1:, 1:] = -np.einsum("ijk,k->ij", LEVI, np.asarray(B, dtype=complex))
    return F


def fields_from_faraday(F, c):
    E = -c * F[0, 1:]
    B = -np.array([F[2, 3], F[3, 1], F[1, 2]])
    return E, B


def transform_em_matrix(fld, L, const=UNIT):
    """Fields in the frame reached by L, via F' = L F L^T."""
    F = faraday(fld.E, fld.B, const.c)
    E, B = fields_from_faraday(L @ F @ L.T, const.c)
    return EMField(E, B)


def transform_cc_matrix(cc, L, const=UNIT):
    j = L @ np.concatenate([[const.c * cc.rho], cc.J])
    return ChargeCurrent(j[0] / const.c, j[1:])


def corresponding_point(point, L, const=UNIT):
    """Image of (x, y, z, t) under L acting on (ct, x, y, z)."""
    p = np.asarray(point, dtype=complex)
    X = L @ np.concatenate([[const.c * p[3]], p[:3]])
    return np.concatenate([X[1:], [X[0] / const.c]])


def _to_ct(P, c):
    return np.concatenate([P[..., 3:] / c, P[..., :3]], axis=-1)


def _from_ct(D, c):
    return np.concatenate([D[..., 1:], c * D[..., :1]], axis=-1)


def transform_partials(P, L, const=UNIT):
    """Chain rule d/dx'_mu = sum_nu (L^-1)_{nu mu} d/dx_nu on (x,y,z,t)
    ordered partials (last axis)."""
    Linv = np.linalg.inv(L)
    return _from_ct(_to_ct(np.asarray(P, dtype=complex), const.c) @ Linv, const.c)


def transform_jet(jet, L, const=UNIT):
    """Jet of the transformed fields at the corresponding point."""
    L = np.asarray(L, dtype=complex)
    c = const.c
    fld = transform_em_matrix(jet.field(), L, const)
    cc = transform_cc_matrix(jet.charge_current(), L, const)
    dE = np.empty((3, 4), complex)
    dB = np.empty((3, 4), complex)
    dj = np.empty((4, 4), complex)
    for k in range(4):
        f = transform_em_matrix(EMField(jet.dE[:, k], jet.dB[:, k]), L, const)
        dE[:, k], dB[:, k] = f.E, f.B
        dj[:, k] = L @ np.concatenate([[c * jet.drho[k]], jet.dJ[:, k]])
    dE = transform_partials(dE, L, const)
    dB = transform_partials(dB, L, const)
    dj = transform_partials(dj, L, const)
    return FieldJet(corresponding_point(jet.point, L, const), fld.E, dE, fld.B, dB,
                    cc.rho, dj[0] / c, cc.J, dj[1:])


def transform_potential_jet(pj, L, const=UNIT):
    c = const.c
    L = np.asarray(L, dtype=complex)
    a = L @ np.concatenate([[pj.V / c], pj.A])
    da = np.empty((4, 4), complex)
    for k in range(4):
        da[:, k] = L @ np.concatenate([[pj.dV[k] / c], pj.dA[:, k]])
    da = transform_partials(da, L, const)
    return PotentialJet(corresponding_point(pj.point, L, const), c * a[0], c * da[0], a[1:], da[1:])


class TransformedProvider(FieldProvider):
    """The provider seen from the frame reached by L."""

    def __init__(self, base, L, const=UNIT):
        self.base, self.L, self.const = base, np.asarray(L, dtype=complex), const
        self.Linv = np.linalg.inv(self.L)

    def _source(self, point):
        return corresponding_point(point, self.Linv, self.const)

    def __call__(self, x, y, z, t):
        src = self._source([x, y, z, t])
        if np.all(np.abs(np.imag(src)) == 0):
            src = src.real
        E, B, rho, J = self.base(*src)
        f = transform_em_matrix(EMField(E, B), self.L, self.const)
        q = transform_cc_matrix(ChargeCurrent(rho, J), self.L, self.const)
        return f.E, f.B, q.rho, q.J

    def jet(self, point, scale=1.0):
        src = self._source(point)
        if np.all(np.abs(np.imag(src)) == 0):
            src = src.real
        return transform_jet(self.base.jet(src, scale), self.L, self.const)


# ------------------------------------------------------------ limit frames

def transform_limit(fld, cc, direction, const=UNIT):
    """Fields and sources in the limit frame of infinite speed along n."""
    n = np.asarray(direction, dtype=float)
    limit_boost(n)
    c = const.c
    n = n.astype(complex)
    E_par = n * cdot(n, fld.E)
    B_par = n * cdot(n, fld.B)
    J_perp = cc.J - n * cdot(n, cc.J)
    E = E_par - 1j * c * cross(n, fld.B)
    B = B_par + 1j / c * cross(n, fld.E)
    rho = 1j / c * cdot(n, cc.J)
    return EMField(E, B), ChargeCurrent(rho, 1j * c * n * cc.rho + J_perp)


# ---------------------------------------------------------------- residuals

def maxwell_residual(jet, const=UNIT):
    """Gauss, Faraday x3, no monopole, Ampere x3 left-hand sides."""
    out = np.empty(8, complex)
    out[0] = divergence(jet.dE) - jet.rho / const.eps0
    out[1:4] = curl(jet.dE) + jet.dB[:, 3]
    out[4] = divergence(jet.dB)
    out[5:8] = curl(jet.dB) - const.mu0 * jet.J - const.mu0 * const.eps0 * jet.dE[:, 3]
    return out


def continuity_residual(jet):
    return jet.drho[3] + divergence(jet.dJ)


def maxwell_constraint_system(cc, const=UNIT):
    """The 8 x 30 linear system M z = r satisfied by the 30 field
    coefficients of a jet that obeys Maxwell with sources ``cc``."""
    zero = FieldJet.zero()
    base = maxwell_residual(replace(zero, rho=cc.rho, J=cc.J), const)
    M = np.empty((8, 30), complex)
    for k in range(30):
        z = np.zeros(30)
        z[k] = 1.0
        M[:, k] = maxwell_residual(zero.with_coefficients(z), const)
    return M, -base


def solve_jet_constraints(point, cc, v, axis=1, const=UNIT, rng=None,
                          max_iter=100, tol_linear=1e-10, tol_surface=1e-8):
    """A jet at ``point`` obeying the 8 Maxwell conditions with sources
    ``cc`` and the quadratic surface condition for boost speed v on
    ``axis``.

    The linear conditions are solved exactly and the quadratic one by damped
    Newton inside their solution space, starting from a seeded random
    point of that space (or from the minimum-norm solution if ``rng`` is
    None).
    """
    from .stress_energy import surface_equation_residual

    M, r = maxwell_constraint_system(cc, const)
    z0 = np.linalg.lstsq(M, r, rcond=None)[0]
    _, sv, Vh = np.linalg.svd(M)
    rank = int(np.sum(sv > 1e-12 * sv[0]))
    N = Vh[rank:].conj().T
    template = FieldJet(point, np.zeros(3), np.zeros((3, 4)), np.zeros(3),
                        np.zeros((3, 4)), cc.rho, None, cc.J, None)

    def q(xi):
        return surface_equation_residual(template.with_coefficients(z0 + N @ xi), v, axis, const)

    xi = np.zeros(N.shape[1], complex) if rng is None else rng.normal(size=N.shape[1]).astype(complex)
    best = abs(q(xi))
    for _ in range(max_iter):
        val = q(xi)
        if abs(val) < tol_surface:
            break
        h = 1e-3
        grad = np.array([(q(xi + h * e) - q(xi - h * e)) / (2 * h) for e in np.eye(len(xi))])
        gg = np.vdot(grad, grad).real
        if gg == 0:
            break
        step = -val * grad.conj() / gg
        lam = 1.0
        while lam > 1e-6:
            cand = xi + lam * step
            if abs(q(cand)) < abs(val):
                xi = cand
                break
            lam /= 2
        else:
            break
        best = min(best, abs(q(xi)))
    jet = template.with_coefficients(z0 + N @ xi)
    lin = np.max(np.abs(maxwell_residual(jet, const)))
    surf = abs(q(xi))
    if lin > tol_linear or surf > tol_surface:
        raise NoConvergence("jet constraints not met", best_residual=max(lin, surf))
    return jet


def dalembertian_residual(f, point, h, const=UNIT, scale=1.0):
    """Central-difference (1/c^2) f_tt - laplacian f at ``point``."""
    if h < 1e-5 * scale:
        raise StepTooSmall("step below 1e-5 of the scale")
    p = np.asarray(point, dtype=float)
    f0 = f(*p)
    second = []
    for k in range(4):
        e = np.zeros(4)
        e[k] = h
        second.append((f(*(p + e)) - 2 * f0 + f(*(p - e))) / h ** 2)
    return second[3] / const.c ** 2 - (second[0] + second[1] + second[2])
