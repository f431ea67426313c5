"""Command line interface.

Exit codes: 0 success, 1 a check failed, 2 bad input.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys

import numpy as np

from . import io as tio
from . import model as mdl
from . import torsion as tor
from . import zeta as zt
from .complexes import ComplexError
from .detline import DetLineError, refined_torsion
from .fixtures import KINDS, FixtureError, FixtureSpec, gen_complex, gen_spectrum
from .spectral import SpectralError
from .suite import REGISTRY, SuiteError, run_suite

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

#: relative tolerance for modulus identities and the lambda-split law
IDENTITY_TOL = 1e-8


def fmt(z) -> str:
    z = complex(z)
    return f"{z.real:.17g} {z.imag:+.17g}i"


def _out(key, value):
    print(f"{key:<22} {value}")


def _parse_complex(text: str) -> complex:
    parts = text.split(",")
    try:
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(f"expected RE or RE,IM, got {text!r}")


def _parse_trunc(text: str) -> zt.Truncation:
    parts = text.split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError("expected n,k,lmax,tol")
    try:
        return zt.Truncation(int(parts[0]), int(parts[1]), float(parts[2]), float(parts[3]))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


# --------------------------------------------------------------------------
# complex


def cmd_complex(args) -> int:
    cx = tio.load(args.file, expect="graded-complex")
    if args.action == "validate":
        rep = tor.validate(cx)
        for k, v in rep.as_dict().items():
            _out(k, v)
        return EXIT_OK if rep.assumption1 and rep.assumption2 else EXIT_FAIL
    osig = tor.odd_signature(cx)
    theta = args.theta if args.theta is not None else tor.default_theta(osig)
    if args.action == "torsion":
        et = tor.eta_Bev(osig, theta)
        _out("theta", f"{theta:.17g}")
        _out("det_gr(B_ev)", fmt(tor.graded_det_Bev(osig, theta)))
        _out("xi", fmt(tor.xi(osig, theta)))
        _out("eta0", fmt(et.eta0))
        _out("m_plus", et.m_plus)
        _out("m_minus", et.m_minus)
        _out("eta", fmt(et.eta))
        _out("T", fmt(tor.refined_T(osig, theta, args.eta_tr, args.rank)))
        _out("tau", fmt(tor.cappell_miller(cx).value))
        _out("rho_Gamma", fmt(refined_torsion(cx).coeff))
        return EXIT_OK
    checks = tor.check_identities(cx, theta, args.eta_tr, args.rank)
    ok = True
    for c in checks:
        print(
            f"{c.name:<26} lhs={fmt(c.lhs)} rhs={fmt(c.rhs)} "
            f"modulus_rel_err={c.modulus_rel_err:.3e} nu={c.nu} phase_residual={c.phase_residual:.3e}"
        )
        ok &= c.modulus_rel_err <= IDENTITY_TOL
        if c.name.startswith("lambda_split"):
            ok &= c.rel_err <= IDENTITY_TOL
    if args.theta is None:
        _out("predicted nu", f"detcrucial={tor.predicted_nu(cx)} comparison={tor.predicted_nu_comparison(cx)}")
    return EXIT_OK if ok else EXIT_FAIL


# --------------------------------------------------------------------------
# zeta


def _zeta_csv(rows, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["s_re", "s_im", "log_R_re", "log_R_im", "tail_bound"])
        for s, v in rows:
            w.writerow([f"{s.real:.17g}", f"{s.imag:.17g}", f"{v.value.real:.17g}", f"{v.value.imag:.17g}", f"{v.tail_bound:.17g}"])


def cmd_zeta(args) -> int:
    spec = tio.load(args.file, expect="length-spectrum")
    trunc = args.trunc or zt.Truncation()
    if args.action == "eval":
        rows = []
        for s in args.s:
            R = zt.log_ruelle(s, spec, trunc)
            Z = zt.log_selberg(s, spec, trunc, mode=args.mode)
            _out("s", fmt(s))
            _out("log_R", fmt(R.value))
            _out("log_R tail_bound", f"{R.tail_bound:.17g}")
            _out(f"log_Z ({args.mode})", fmt(Z.value))
            _out("log_Z tail_bound", f"{Z.tail_bound:.17g}")
            rows.append((s, R))
        if args.csv:
            _zeta_csv(rows, args.csv)
        return EXIT_OK
    ok = True
    for s in args.s:
        f = zt.factorization(s, spec, trunc)
        _out("s", fmt(s))
        _out("log_R", fmt(f.log_ruelle))
        _out("sum_p (-1)^p log_Z", fmt(f.log_selberg_alternating))
        _out("residual", f"{f.residual:.17g}")
        _out("error_bound", f"{f.error_bound:.17g}")
        ok &= f.residual <= max(trunc.tail_tol, f.error_bound)
    return EXIT_OK if ok else EXIT_FAIL


# --------------------------------------------------------------------------
# model, fixtures, suite


def cmd_model(args) -> int:
    m = tio.load(args.file, expect="model-spectral-data")
    if any(m.d_chi):
        _out("d_chi", list(m.d_chi))
        _out("singularity_order", mdl.singularity_order(m.d, m.d_chi))
        return EXIT_OK
    r = mdl.ruelle_at_zero_model(m)
    sym = mdl.is_duality_symmetric(m)
    _out("R(0) lower form", fmt(r.lower_form))
    _out("R(0) upper form", fmt(r.upper_form))
    _out("discrepancy", f"{r.discrepancy:.3e}")
    _out("duality_symmetric", sym)
    return EXIT_FAIL if sym and r.discrepancy > 1e-10 else EXIT_OK


def cmd_fixtures(args) -> int:
    spec = FixtureSpec(
        args.kind,
        d=args.d,
        dims=tuple(args.dims) if args.dims else None,
        seed=args.seed,
        n_classes=args.n_classes,
    )
    obj = gen_spectrum(spec) if args.kind == "synthetic-spectrum" else gen_complex(spec)
    if args.output == "-":
        print(tio.dumps(tio.to_dict(obj)))
    else:
        tio.save(obj, args.output)
    return EXIT_OK


def cmd_suite(args) -> int:
    report = run_suite(args.names, args.seeds)
    for line in report.lines():
        print(line)
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            fh.write(report.to_csv(timing=args.timing))
    return EXIT_OK if report.passed else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="torsionlab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("complex", help="odd signature operator, torsions and identities of a complex")
    c.add_argument("action", choices=["validate", "torsion", "identities"])
    c.add_argument("file")
    c.add_argument("--theta", type=float, help="Agmon angle in (-pi, 0); default: gap around -pi/2")
    c.add_argument("--eta-tr", type=float, default=0.0, dest="eta_tr")
    c.add_argument("--rank", type=int, default=1)
    c.set_defaults(func=cmd_complex)

    z = sub.add_parser("zeta", help="truncated Selberg/Ruelle zeta functions")
    z.add_argument("action", choices=["eval", "factorize"])
    z.add_argument("file")
    z.add_argument("--s", type=_parse_complex, action="append", required=True, help="RE,IM (repeatable)")
    z.add_argument("--trunc", type=_parse_trunc, help="n_max,k_max,l_max,tail_tol")
    z.add_argument("--mode", choices=["sym", "closed"], default="sym")
    z.add_argument("--csv", help="write s_re,s_im,log_R_re,log_R_im,tail_bound rows")
    z.set_defaults(func=cmd_zeta)

    m = sub.add_parser("model", help="model evaluation of R(0)")
    m.add_argument("action", choices=["ruelle-zero"])
    m.add_argument("file")
    m.set_defaults(func=cmd_model)

    f = sub.add_parser("fixtures", help="generate fixtures")
    f.add_argument("action", choices=["gen"])
    f.add_argument("--kind", choices=KINDS, required=True)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--d", type=int, default=3)
    f.add_argument("--dims", type=int, nargs="+")
    f.add_argument("--n-classes", type=int, default=5, dest="n_classes")
    f.add_argument("-o", "--output", required=True, help="output file, or - for stdout")
    f.set_defaults(func=cmd_fixtures)

    s = sub.add_parser("suite", help="run verification checks")
    s.add_argument("action", choices=["run", "list"])
    s.add_argument("--names", nargs="*")
    s.add_argument("--seeds", type=int, nargs="*")
    s.add_argument("--csv")
    s.add_argument("--timing", action="store_true", help="add run times to the CSV")
    s.set_defaults(func=cmd_suite)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "suite" and args.action == "list":
        print("\n".join(REGISTRY))
        return EXIT_OK
    try:
        return args.func(args)
    except tio.SchemaError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (
        ComplexError,
        DetLineError,
        SpectralError,
        FixtureError,
        SuiteError,
        mdl.ModelError,
        zt.ConvergenceError,
        zt.TruncationError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
