"""Time reversal, Poynting-flux scans over balls, E parallel to B
extraction and decay bookkeeping."""
import csv
import io
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import lebedev_rule

from .core import UNIT, NotParallel, QuadratureFailure, ZeroB, cross
from .fields import FieldJet, FieldProvider, curl, maxwell_residual

SPHERE_ORDER = 41       # 590-point rule
SPHERE_ORDER_CHECK = 47  # 770-point rule


@dataclass
class Scenario:
    provider: FieldProvider
    t0: float = 0.0
    radii: tuple = ()
    decaying: bool = None
    const: object = UNIT

    def __post_init__(self):
        r = np.asarray(self.radii, dtype=float)
        if r.size and (r[0] <= 0 or np.any(np.diff(r) <= 0)):
            raise ValueError("radii must be positive and strictly increasing")
        self.radii = tuple(float(x) for x in r)


class ReversedProvider(FieldProvider):
    """rho'(x, t) = rho(x, t0 - t), J' = -J, E' = E, B' = -B."""

    def __init__(self, base, t0):
        self.base, self.t0 = base, t0

    def __call__(self, x, y, z, t):
        E, B, rho, J = self.base(x, y, z, self.t0 - t)
        return np.asarray(E), -np.asarray(B), rho, -np.asarray(J)

    def jet(self, point, scale=1.0):
        p = np.asarray(point, dtype=complex)
        j = self.base.jet([p[0], p[1], p[2], self.t0 - p[3]], scale)
        flip = np.array([1, 1, 1, -1])
        return FieldJet(p, j.E, j.dE * flip, -j.B, -j.dB * flip,
                        j.rho, j.drho * flip, -j.J, -j.dJ * flip)


def reverse_process(s, t0=None):
    t0 = s.t0 if t0 is None else t0
    base = s.provider
    # reversing twice gives back the original provider
    if isinstance(base, ReversedProvider) and base.t0 == t0:
        prov = base.base
    else:
        prov = ReversedProvider(base, t0)
    return Scenario(prov, t0, s.radii, s.decaying, s.const)


def poynting_divergence(jet):
    """div(E x B) = B . curl E - E . curl B from a jet."""
    return jet.B @ curl(jet.dE) - jet.E @ curl(jet.dB)


def max_maxwell_residual(provider, points, const=UNIT):
    return max(np.max(np.abs(maxwell_residual(provider.jet(p), const))) for p in points)


# -------------------------------------------------------------- flux scan

@dataclass
class FluxRow:
    r: float
    volume_integral: complex
    surface_integral: complex
    abs_error_estimate: float
    absolute_flux: float


@dataclass
class FluxTable:
    t: float
    rows: list = field(default_factory=list)

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        imag = any(abs(r.volume_integral.imag) + abs(r.surface_integral.imag) > 0
                   for r in self.rows)
        head = ["r", "volume_integral", "surface_integral", "abs_error_estimate"]
        if imag:
            head += ["volume_integral_imag", "surface_integral_imag"]
        w.writerow(head)
        for row in self.rows:
            vals = [row.r, row.volume_integral.real, row.surface_integral.real,
                    row.abs_error_estimate]
            if imag:
                vals += [row.volume_integral.imag, row.surface_integral.imag]
            w.writerow([repr(float(v)) for v in vals])
        return buf.getvalue()


def _sphere(order):
    x, w = lebedev_rule(order)
    return x.T, w


def _surface(provider, t, r, order):
    pts, w = _sphere(order)
    total = absolute = 0.0
    for n, wi in zip(pts, w):
        E, B, _, _ = provider(*(r * n), t)
        s = cross(E, B) @ n
        total = total + wi * s
        absolute += wi * abs(s)
    return total * r * r, absolute * r * r


def _shell(provider, t, a, b, nr, order):
    pts, w = _sphere(order)
    xr, wr = np.polynomial.legendre.leggauss(nr)
    rs = 0.5 * (b - a) * xr + 0.5 * (b + a)
    wr = 0.5 * (b - a) * wr * rs ** 2
    total = 0.0
    for r, wri in zip(rs, wr):
        acc = 0.0
        for n, wi in zip(pts, w):
            acc = acc + wi * poynting_divergence(provider.jet([*(r * n), t], scale=max(r, 1.0)))
        total = total + wri * acc
    return total


def flux_scan(s, t, radii=None, radial_points=(12, 18), roundoff=1e-12):
    """Volume integral of div(E x B) over B(0, r) and surface integral of
    (E x B).n over its boundary, for each radius.

    Each integral is computed with a coarse and a fine rule. The error
    estimate is the spread between them plus a roundoff allowance of
    ``roundoff`` times the absolute Poynting flux through the sphere. When
    the two integrals differ by more than that estimate the scan stops
    with QuadratureFailure.
    """
    radii = s.radii if radii is None else tuple(float(r) for r in radii)
    if not radii or radii[0] <= 0 or np.any(np.diff(radii) <= 0):
        raise ValueError("radii must be positive and strictly increasing")
    table = FluxTable(t)
    vol_lo = vol_hi = 0.0
    a = 0.0
    for r in radii:
        vol_lo = vol_lo + _shell(s.provider, t, a, r, radial_points[0], SPHERE_ORDER)
        vol_hi = vol_hi + _shell(s.provider, t, a, r, radial_points[1], SPHERE_ORDER_CHECK)
        a = r
        sur, absolute = _surface(s.provider, t, r, SPHERE_ORDER)
        sur_hi, _ = _surface(s.provider, t, r, SPHERE_ORDER_CHECK)
        err = abs(vol_hi - vol_lo) + abs(sur_hi - sur) + roundoff * max(1.0, absolute)
        gap = abs(vol_lo - sur)
        if not np.isfinite(gap) or gap > err:
            raise QuadratureFailure(
                f"volume and surface flux disagree at r={r}",
                {"r": r, "volume": complex(vol_lo), "surface": complex(sur),
                 "gap": float(gap), "error_estimate": float(err)})
        table.rows.append(FluxRow(r, complex(vol_lo), complex(sur), float(err), float(absolute)))
    return table


def radiating_verdict(table, tol_abs=1e-8, tol_rel=1e-6):
    """'non-radiating' when the flux at the largest radius is below
    tol_abs + tol_rel * (absolute Poynting flux through that sphere)."""
    last = table.rows[-1]
    ok = abs(last.surface_integral) < tol_abs + tol_rel * last.absolute_flux
    return "non-radiating" if ok else "radiating"


# ------------------------------------------------------- parallel fields

def extract_parallel(fld, eps=1e-300):
    """lambda with E = lambda B, or NotParallel / ZeroB."""
    E, B = np.asarray(fld.E, complex), np.asarray(fld.B, complex)
    nb = np.linalg.norm(B)
    if nb <= 1e-12:
        raise ZeroB("B vanishes")
    ne = np.linalg.norm(E)
    if np.linalg.norm(cross(E, B)) > 1e-10 * (ne * nb + eps):
        raise NotParallel("E x B does not vanish")
    return complex(np.vdot(B, E) / np.vdot(B, B))


# ------------------------------------------------------------------ decay

@dataclass
class DecayReport:
    radii: tuple
    max_E: tuple
    max_B: tuple
    envelope: tuple
    decaying: bool


def decay_check(s, t, radii=None, order=SPHERE_ORDER, tail_ratio=0.5):
    """Maximum of |E| and |B| over sphere points per radius.

    Decaying means the combined maxima never increase (up to 1e-12
    relative) and the last one is below ``tail_ratio`` times the first.
    """
    radii = s.radii if radii is None else tuple(float(r) for r in radii)
    if np.any(np.diff(radii) <= 0):
        raise ValueError("radii must be increasing")
    pts, _ = _sphere(order)
    mE, mB = [], []
    for r in radii:
        e = b = 0.0
        for n in pts:
            E, B, _, _ = s.provider(*(r * n), t)
            e = max(e, float(np.linalg.norm(E)))
            b = max(b, float(np.linalg.norm(B)))
        mE.append(e)
        mB.append(b)
    m = np.maximum(mE, mB)
    env = np.maximum.accumulate(m[::-1])[::-1]
    monotone = bool(np.all(np.diff(m) <= 1e-12 * np.maximum(m[:-1], 1e-300)))
    decaying = bool(len(m) > 1 and monotone and m[-1] <= tail_ratio * m[0])
    return DecayReport(tuple(radii), tuple(mE), tuple(mB), tuple(env.tolist()), decaying)
