"""Command line: ``verify``, ``transform`` and ``scan``.

Exit codes: 0 success, 1 a check failed, 2 bad configuration or input,
3 quadrature failure. Reports are written atomically when ``--out`` is
given and are byte-identical for identical inputs and seeds.
"""
import argparse
import json
import os
import sys
import tempfile
from dataclasses import dataclass, field

import numpy as np

from .core import Constants, FrameError, QuadratureFailure, cross
from .fields import (ChargeCurrent, ConstantFields, EMField, FieldJet, PlaneWave,
                     PolynomialJet, corresponding_point, crossed_fields,
                     maxwell_residual, transform_cc_matrix, transform_em_boost,
                     transform_em_matrix, transform_em_rotation, transform_jet)
from .kinematics import (Branch, Orthogonal3, boost_matrix, composed_boost,
                         composed_gamma, conjugate_boost, gamma, limit_boost,
                         rotation_matrix, thomas_rotation, velocity_compose)
from .nonradiating import (Scenario, extract_parallel, flux_scan,
                           poynting_divergence, reverse_process)
from .stress_energy import (a_matrix_determinant, a_matrix_determinant_exact,
                            build_stress_energy, sample_triple,
                            stress_energy_jet, surface_equation_residual,
                            transform_stress_energy)

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_QUADRATURE = 0, 1, 2, 3
DET_A_CLAIMED = "19/72"


class ConfigError(Exception):
    pass


# ----------------------------------------------------------- serialization

def encode(x):
    """JSON-ready form: complex numbers become [re, im]."""
    if isinstance(x, dict):
        return {k: encode(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [encode(v) for v in x]
    if isinstance(x, np.ndarray):
        return encode(x.tolist())
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real) + 0.0, float(x.imag) + 0.0]
    if isinstance(x, (float, np.floating)):
        return float(x) + 0.0
    if isinstance(x, np.integer):
        return x.item()
    return x


def _num(x):
    if isinstance(x, (list, tuple)):
        if len(x) != 2:
            raise ConfigError(f"complex number must be [re, im], got {x!r}")
        return complex(float(x[0]), float(x[1]))
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ConfigError(f"expected a number, got {x!r}")
    return complex(x)


def write_atomic(path, text):
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit(text, out):
    if out:
        write_atomic(out, text)
    else:
        sys.stdout.write(text)


def dumps(obj):
    return json.dumps(encode(obj), indent=2, sort_keys=True) + "\n"


# ------------------------------------------------------------- scenarios

@dataclass
class ScenarioFile:
    """Parsed scenario: constants, provider spec, frame chain, radii."""
    constants: dict = field(default_factory=lambda: {"c": 1.0, "eps0": 1.0})
    provider: dict = field(default_factory=dict)
    frames: list = field(default_factory=list)
    t0: float = 0.0
    radii: list = field(default_factory=list)
    analysis: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict):
            raise ConfigError("scenario must be a JSON object")
        unknown = set(d) - {"constants", "provider", "frames", "t0", "radii", "analysis"}
        if unknown:
            raise ConfigError(f"unknown scenario keys: {sorted(unknown)}")
        consts = {"c": 1.0, "eps0": 1.0, **d.get("constants", {})}
        sf = cls({"c": float(consts["c"]), "eps0": float(consts["eps0"])},
                 d.get("provider", {"kind": "constant", "E": [0, 0, 0], "B": [0, 0, 0]}),
                 list(d.get("frames", [])), float(d.get("t0", 0.0)),
                 [float(r) for r in d.get("radii", [])], dict(d.get("analysis", {})))
        sf.validate()
        return sf

    def to_dict(self):
        return {"constants": self.constants, "provider": self.provider,
                "frames": self.frames, "t0": self.t0, "radii": self.radii,
                "analysis": self.analysis}

    def const(self):
        try:
            return Constants(self.constants["c"], self.constants["eps0"])
        except ValueError as e:
            raise ConfigError(str(e)) from None

    def validate(self):
        self.const()
        self.build_provider()
        self.chain()
        r = self.radii
        if r and (r[0] <= 0 or any(b <= a for a, b in zip(r, r[1:]))):
            raise ConfigError("radii must be positive and strictly increasing")

    def build_provider(self):
        p = dict(self.provider)
        kind = p.pop("kind", None)
        const = self.const()
        try:
            if kind == "constant":
                return ConstantFields(_vec(p.get("E", [0, 0, 0])), _vec(p.get("B", [0, 0, 0])),
                                      _num(p.get("rho", 0.0)), _vec(p.get("J", [0, 0, 0])))
            if kind == "crossed":
                return crossed_fields(float(p.get("E0", 1.0)), float(p.get("B0", 1.0)))
            if kind == "plane_wave":
                return PlaneWave(_vec(p.get("E0", [0, 1, 0])),
                                 [float(x) for x in p.get("direction", [1, 0, 0])],
                                 float(p.get("k", 1.0)), float(p.get("phase", 0.0)), const)
            if kind == "polynomial_jet":
                jet = FieldJet(
                    [float(x) for x in p.get("point", [0, 0, 0, 0])],
                    _vec(p.get("E", [0, 0, 0])), _mat(p.get("dE"), (3, 4)),
                    _vec(p.get("B", [0, 0, 0])), _mat(p.get("dB"), (3, 4)),
                    _num(p.get("rho", 0.0)), _mat(p.get("drho"), (4,)),
                    _vec(p.get("J", [0, 0, 0])), _mat(p.get("dJ"), (3, 4)))
                return PolynomialJet(jet)
        except (ValueError, TypeError) as e:
            raise ConfigError(f"bad provider parameters: {e}") from None
        raise ConfigError(f"unknown provider kind {kind!r}")

    def chain(self):
        """The frame chain composed left to right as one 4x4 matrix."""
        const = self.const()
        L = np.eye(4, dtype=complex)
        for entry in self.frames:
            if not isinstance(entry, dict) or len(entry) != 1:
                raise ConfigError("each frame entry needs exactly one of boost/rotation/limit")
            (kind, arg), = entry.items()
            try:
                if kind == "boost":
                    v = _vec(arg["velocity"])
                    br = Branch[arg.get("branch", "principal").upper()]
                    M = boost_matrix(v, br, const)
                elif kind == "rotation":
                    M = rotation_matrix(Orthogonal3(_mat(arg, (3, 3))))
                elif kind == "limit":
                    M = limit_boost([float(x) for x in arg["direction"]])
                else:
                    raise ConfigError(f"unknown frame kind {kind!r}")
            except (FrameError, KeyError, ValueError, TypeError) as e:
                raise ConfigError(f"invalid frame {entry!r}: {e}") from None
            L = M @ L
        return L


def _vec(x):
    return _mat(x, (3,))


def _mat(x, shape):
    if x is None:
        return np.zeros(shape, complex)
    return np.array(_conv(x, shape, shape), dtype=complex).reshape(shape)


def _conv(x, shape, full):
    """Walk nested lists against the expected shape; each leaf is a number
    or an [re, im] pair."""
    if not shape:
        return _num(x)
    if not isinstance(x, (list, tuple)) or len(x) != shape[0]:
        raise ConfigError(f"expected an array of shape {full}")
    return [_conv(v, shape[1:], full) for v in x]


def load_scenario(path):
    try:
        with open(path, encoding="utf-8") as f:
            d = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read scenario: {e}") from None
    return ScenarioFile.from_dict(d)


def save_scenario(sf, path):
    write_atomic(path, json.dumps(sf.to_dict(), indent=2, sort_keys=True) + "\n")


# ----------------------------------------------------------- verify suites

def _rand_orth(rng):
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q * np.sign(np.diag(r))
    return Orthogonal3(q)


def _rand_velocity(rng, vmax, c=1.0):
    d = rng.normal(size=3)
    return d / np.linalg.norm(d) * rng.uniform(0, vmax) * c


def _record(res, name, value, tol):
    r = res.setdefault(name, {"max_residual": 0.0, "tol": tol})
    r["max_residual"] = max(r["max_residual"], float(value))


def suite_kinematics(rng, trials, tol=None):
    res = {}
    for _ in range(trials):
        g = _rand_orth(rng)
        v = _rand_velocity(rng, 0.99)
        _record(res, "conjugation", conjugate_boost(g, v), tol or 1e-10)
        u, w = _rand_velocity(rng, 0.99), _rand_velocity(rng, 0.99)
        R = rotation_matrix(thomas_rotation(u, w))
        lhs = boost_matrix(w) @ boost_matrix(u)
        _record(res, "thomas_composition", np.linalg.norm(lhs - R @ composed_boost(u, w)),
                tol or 1e-9)
        th = thomas_rotation(u, w)
        _record(res, "rotated_sum", np.linalg.norm(th(velocity_compose(u, w))
                                                   - velocity_compose(w, u)), tol or 1e-9)
        uv = velocity_compose(u, w)
        gg = composed_gamma(u, w)
        _record(res, "gamma_composition", abs(gamma(uv) - gg) / abs(gg), tol or 1e-10)
    return res


def suite_fields(rng, trials, tol=None):
    res = {}
    for _ in range(trials):
        n = rng.normal(size=3)
        n /= np.linalg.norm(n)
        e0 = cross(n, rng.normal(size=3))
        pw = PlaneWave(e0, n, k=rng.uniform(0.5, 2.0), phase=rng.uniform(0, 6))
        p = rng.normal(size=4)
        jet = pw.jet(p)
        _record(res, "maxwell_rest", np.max(np.abs(maxwell_residual(jet))), tol or 1e-12)
        g = _rand_orth(rng)
        _record(res, "maxwell_rotated",
                np.max(np.abs(maxwell_residual(transform_em_rotation(jet, g)))), tol or 1e-9)
        L = boost_matrix(_rand_velocity(rng, 0.9))
        _record(res, "maxwell_boosted",
                np.max(np.abs(maxwell_residual(transform_jet(jet, L)))), tol or 1e-9)
        v = _rand_velocity(rng, 0.9)
        fld = EMField(rng.normal(size=3), rng.normal(size=3))
        a = transform_em_boost(fld, v)
        b = transform_em_matrix(fld, boost_matrix(v))
        _record(res, "boost_cross_path", np.linalg.norm(a.E - b.E) + np.linalg.norm(a.B - b.B),
                tol or 1e-9)
    return res


def suite_stress(rng, trials, tol=None):
    from .fields import maxwell_constraint_system
    res = {}
    for _ in range(trials):
        fld = EMField(rng.normal(size=3), rng.normal(size=3))
        M = build_stress_energy(fld)
        _record(res, "trace_identity", M.trace_defect(), tol or 1e-10)
        v = rng.uniform(-0.9, 0.9)
        L = boost_matrix([v, 0, 0])
        a = transform_stress_energy(M, L).as_matrix()
        b = build_stress_energy(transform_em_boost(fld, [v, 0, 0])).as_matrix()
        _record(res, "stress_cross_path", np.max(np.abs(a - b)), tol or 1e-9)
        tr = sample_triple(rng)
        _record(res, "algebra_identity", abs(tr.algebra_identity() - 1), tol or 1e-12)
        cc = ChargeCurrent(rng.normal(), rng.normal(size=3))
        Ms, r = maxwell_constraint_system(cc)
        z0 = np.linalg.lstsq(Ms, r, rcond=None)[0]
        _, _, Vh = np.linalg.svd(Ms)
        z = z0 + Vh[8:].conj().T @ rng.normal(size=22)
        jet = FieldJet(np.zeros(4), np.zeros(3), np.zeros((3, 4)), np.zeros(3),
                       np.zeros((3, 4)), cc.rho, None, cc.J, None).with_coefficients(z)
        s = rng.uniform(-0.9, 0.9)
        j2 = stress_energy_jet(transform_jet(jet, boost_matrix([s, 0, 0])))
        div = j2.dg[0, 0] + j2.dg[1, 1] + j2.dg[2, 2]
        _record(res, "surface_equation_oracle", abs(div - surface_equation_residual(jet, s)),
                tol or 1e-9)
    return res


def check_det_a():
    exact = a_matrix_determinant_exact()
    from fractions import Fraction
    claimed = Fraction(DET_A_CLAIMED)
    return {"det_A_exact": f"{exact.numerator}/{exact.denominator}",
            "det_A_float": a_matrix_determinant(), "claimed": DET_A_CLAIMED,
            "max_residual": float(abs(exact - claimed) / claimed), "tol": 1e-12}


def suite_nonradiating(rng, trials, tol=None):
    res = {}
    for _ in range(trials):
        n = rng.normal(size=3)
        n /= np.linalg.norm(n)
        pw = PlaneWave(cross(n, rng.normal(size=3)), n, k=rng.uniform(0.5, 2.0))
        t0 = rng.uniform(0, 2)
        s = Scenario(pw, t0=t0)
        rs = reverse_process(s)
        p = rng.normal(size=4)
        mirror = [p[0], p[1], p[2], t0 - p[3]]
        d1 = poynting_divergence(rs.provider.jet(p))
        d0 = poynting_divergence(pw.jet(mirror))
        _record(res, "reversal_divergence_flip", abs(d1 + d0), tol or 1e-10)
        _record(res, "reversal_maxwell",
                np.max(np.abs(maxwell_residual(rs.provider.jet(p)))), tol or 1e-10)
        B = rng.normal(size=3) + 1j * rng.normal(size=3)
        lam = complex(rng.normal(), rng.normal())
        got = extract_parallel(EMField(lam * B, B))
        _record(res, "extract_parallel", abs(got - lam), tol or 1e-9)
    tab = flux_scan(Scenario(crossed_fields(), radii=(1.0, 2.0)), 0.0)
    _record(res, "constant_field_flux", max(abs(r.surface_integral) for r in tab.rows),
            tol or 1e-8)
    return res


SUITES = {"kinematics": suite_kinematics, "fields": suite_fields,
          "stress": suite_stress, "nonradiating": suite_nonradiating}


def cmd_verify(args):
    if args.trials is not None and args.trials <= 0:
        raise ConfigError("--trials must be positive")
    trials = args.trials or 200
    rng = np.random.default_rng(args.seed)
    names = list(SUITES) if args.suite == "all" else [args.suite]
    report = {"suite": args.suite, "seed": args.seed, "trials": trials, "identities": {}}
    for name in names:
        for k, v in SUITES[name](rng, trials, args.tol).items():
            report["identities"][f"{name}.{k}"] = v
    if "detA" in (args.check or []):
        report["identities"]["stress.detA"] = check_det_a()
    for v in report["identities"].values():
        v["pass"] = bool(v["max_residual"] < v["tol"])
    report["pass"] = all(v["pass"] for v in report["identities"].values())
    emit(dumps(report), args.out)
    return EXIT_OK if report["pass"] else EXIT_FAIL


def _parse_floats(text, n=None, name="value"):
    try:
        xs = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"bad {name}: {text!r}") from None
    if n is not None and len(xs) != n:
        raise ConfigError(f"{name} needs {n} comma-separated numbers")
    return xs


def _state(fld, cc, const):
    M = build_stress_energy(fld, const)
    return {"rho": cc.rho, "J": cc.J, "E": fld.E, "B": fld.B,
            "stress_energy": {"sigma": M.sigma, "g": M.g, "p": M.p}}


def cmd_transform(args):
    sf = load_scenario(args.scenario)
    const = sf.const()
    prov = sf.build_provider()
    L = sf.chain()
    at = _parse_floats(args.at, 4, "--at") if args.at else [0.0, 0.0, 0.0, sf.t0]
    E, B, rho, J = prov(*at)
    fld, cc = EMField(E, B), ChargeCurrent(rho, J)
    report = {
        "point": at, "before": _state(fld, cc, const),
        "corresponding_point": corresponding_point(at, L, const),
        "after": _state(transform_em_matrix(fld, L, const), transform_cc_matrix(cc, L, const),
                        const),
        "matrix": L,
    }
    emit(dumps(report), args.out)
    return EXIT_OK


def cmd_scan(args):
    sf = load_scenario(args.scenario)
    radii = _parse_floats(args.radii, name="--radii") if args.radii else sf.radii
    if not radii or radii[0] <= 0 or any(b <= a for a, b in zip(radii, radii[1:])):
        raise ConfigError("radii must be positive and strictly increasing")
    s = Scenario(sf.build_provider(), sf.t0, radii, const=sf.const())
    t = sf.t0 if args.time is None else args.time
    tab = flux_scan(s, t)
    if args.format == "json":
        text = dumps({"t": t, "rows": [r.__dict__ for r in tab.rows]})
    else:
        text = tab.to_csv()
    emit(text, args.out)
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="emframes", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out", help="write the report to this path")
        sp.add_argument("--format", choices=("json", "csv"), default=None)

    v = sub.add_parser("verify", help="run a seeded identity suite")
    v.add_argument("suite", choices=(*SUITES, "all"))
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--trials", type=int, default=None)
    v.add_argument("--tol", type=float, default=None, help="override every tolerance")
    v.add_argument("--check", action="append", choices=("detA",))
    common(v)
    v.set_defaults(func=cmd_verify)

    t = sub.add_parser("transform", help="apply a scenario's frame chain at a point")
    t.add_argument("scenario")
    t.add_argument("--at", help="x,y,z,t")
    common(t)
    t.set_defaults(func=cmd_transform)

    s = sub.add_parser("scan", help="radial Poynting flux table")
    s.add_argument("scenario")
    s.add_argument("--time", type=float, default=None)
    s.add_argument("--radii", help="comma-separated increasing radii")
    common(s)
    s.set_defaults(func=cmd_scan)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_CONFIG if e.code else EXIT_OK
    if args.format == "csv" and args.command != "scan":
        print("error: csv output is only available for scan", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except QuadratureFailure as e:
        print(f"quadrature failure: {e} {encode(e.diagnostics)}", file=sys.stderr)
        return EXIT_QUADRATURE


if __name__ == "__main__":
    sys.exit(main())
