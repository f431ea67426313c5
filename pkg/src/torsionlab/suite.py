"""Verification harness: one registered check per identity family.

Every check is a pure function of a seed and returns a :class:`CheckResult`
with the worst residual it saw and the tolerance it was held to. The CSV
output of a report is byte-identical for identical seeds and names; run
times are only written when asked for.
"""

from __future__ import annotations

import cmath
import csv
import io
import itertools
import math
import os
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import model as mdl
from . import spectral as sc
from . import torsion as tor
from . import zeta as zt
from .detline import (
    DetLineElement,
    block_permutation_sign,
    default_frame,
    default_split,
    fuse,
    phi,
    refined_torsion,
)
from .fixtures import FixtureSpec, gen_complex, gen_spectrum, toy_complex

DEFAULT_SEEDS = (0,)

#: phase integers pinned on the d=1 toy complex (a > 0)
PINNED_NU_DETCRUCIAL = 1
PINNED_NU_COMPARISON = 2


class SuiteError(ValueError):
    pass


@dataclass(frozen=True)
class CheckResult:
    name: str
    seed: int
    passed: bool
    max_residual: float
    tolerance: float
    runtime: float = 0.0
    detail: str = ""

    @property
    def status(self) -> str:
        return "PASS" if self.passed else "FAIL"


@dataclass
class SuiteReport:
    results: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def to_csv(self, timing: bool = False) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        head = ["name", "seed", "status", "max_residual", "tolerance", "detail"]
        w.writerow(head + (["runtime_s"] if timing else []))
        for r in self.results:
            row = [r.name, r.seed, r.status, f"{r.max_residual:.17g}", f"{r.tolerance:.17g}", r.detail]
            w.writerow(row + ([f"{r.runtime:.3f}"] if timing else []))
        return buf.getvalue()

    def lines(self) -> list[str]:
        return [
            f"{r.status} {r.name} seed={r.seed} max_residual={r.max_residual:.3e} "
            f"tol={r.tolerance:.1e} time={r.runtime:.2f}s {r.detail}".rstrip()
            for r in self.results
        ]


def _sub_seed(seed: int, i: int) -> int:
    return int(np.random.SeedSequence([seed, i]).generate_state(2, np.uint32).view(np.uint64)[0])


def _rng(seed: int, tag: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, tag, 7919]))


def _result(name, seed, worst, tol, detail="", passed=None) -> CheckResult:
    ok = bool(worst <= tol) if passed is None else passed
    return CheckResult(name, seed, ok, float(worst), tol, 0.0, detail)


def complex_fixtures(seed: int, count: int, ds=(3, 5), kinds=("random-acyclic-complex", "hermitian-model-complex")):
    """``count`` deterministic fixtures cycling through ``ds`` and ``kinds``."""
    out = []
    for i in range(count):
        kind = kinds[i % len(kinds)]
        d = ds[(i // len(kinds)) % len(ds)]
        out.append(gen_complex(FixtureSpec(kind, d=d, seed=_sub_seed(seed, i))))
    return out


# --------------------------------------------------------------------------
# checks


def check_det_theta(seed: int) -> CheckResult:
    """det_theta against the LU determinant, 200 matrices, 3 admissible angles each."""
    rng = _rng(seed, 1)
    worst = 0.0
    for _ in range(200):
        n = int(rng.integers(2, 21))
        M = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2 * n)
        spec = sc.spectral_decompose(M)
        ref = complex(np.linalg.det(M))
        args = [cmath.phase(l) for l, _ in spec.entries]
        angles = []
        while len(angles) < 3:
            th = float(rng.uniform(-math.pi, math.pi))
            if sc.angular_clearance([l for l, _ in spec.entries], th) > 1e-6 and all(
                sc.angular_distance(th, a) > 1e-6 for a in args
            ):
                angles.append(th)
        for th in angles:
            worst = max(worst, abs(sc.det_theta(spec, th) - ref) / abs(ref))
    return _result("det-theta", seed, worst, 1e-9)


def check_eta_counts(seed: int) -> CheckResult:
    """Exhaustive sign patterns, including symmetric spectra and similarity-transformed matrices."""
    rng = _rng(seed, 2)
    worst = 0.0
    for npos, nneg, nup, ndown in itertools.product(range(4), repeat=4):
        vals = (
            list(rng.uniform(0.1, 3, npos) + 1j * rng.uniform(-3, 3, npos))
            + list(-rng.uniform(0.1, 3, nneg) + 1j * rng.uniform(-3, 3, nneg))
            + list(1j * rng.uniform(0.1, 3, nup))
            + list(-1j * rng.uniform(0.1, 3, ndown))
        )
        if not vals:
            continue
        expected = (npos - nneg + nup - ndown) / 2
        got = sc.eta(sc.Spectrum.from_values(vals)).eta
        worst = max(worst, abs(got - expected))
        sym = sc.eta(sc.Spectrum.from_values(vals + [-v for v in vals])).eta
        worst = max(worst, abs(sym))
        if len(vals) <= 6:
            S = np.eye(len(vals)) + 0.3 * rng.standard_normal((len(vals), len(vals)))
            M = S @ np.diag(vals) @ np.linalg.inv(S)
            worst = max(worst, abs(sc.eta(sc.spectral_decompose(M)).eta - expected))
    return _result("eta-counts", seed, worst, 0.0)


def check_detline_choices(seed: int) -> CheckResult:
    """Fusion sign law against explicit wedges; phi for two split choices on 100 complexes."""
    rng = _rng(seed, 3)
    worst = 0.0
    for i in range(100):
        # fusion: det [w | v] = (-1)^{dim V dim W} det [v | w]
        p, q = int(rng.integers(0, 4)), int(rng.integers(0, 4))
        if p + q:
            M = rng.standard_normal((p + q, p + q)) + 1j * rng.standard_normal((p + q, p + q))
            V, W = M[:, :p], M[:, p:]
            a = DetLineElement(complex(np.linalg.det(np.hstack([V, W]))), ("V", "W"), (p, q))
            swapped = a.reorder([1, 0])
            lit = complex(np.linalg.det(np.hstack([W, V])))
            worst = max(worst, abs(swapped.coeff - lit) / abs(lit))
        kinds = ("random-complex", "random-acyclic-complex")
        cx = gen_complex(FixtureSpec(kinds[i % 2], d=(1, 3, 5)[i % 3], seed=_sub_seed(seed, i)))
        frame = default_frame(cx)
        a = phi(cx, default_split(cx), frame=frame).coeff
        b = phi(cx, default_split(cx, np.random.default_rng(_sub_seed(seed, 10_000 + i))), frame=frame).coeff
        worst = max(worst, abs(a / b - 1))
    return _result("detline-choices", seed, worst, 1e-9)


def check_lambda_split(seed: int) -> CheckResult:
    worst = 0.0
    fixtures = complex_fixtures(seed, 50, kinds=("random-acyclic-complex", "random-complex", "hermitian-model-complex"))
    for cx in fixtures:
        frame = default_frame(cx)
        rho = refined_torsion(cx, frame=frame).coeff
        lams = tor.spectral_gaps(cx, 3)
        if len(lams) < 3:
            raise SuiteError(f"fixture with dims {cx.dims} has fewer than 3 spectral gaps")
        for lam in lams:
            g, r_low = tor.lambda_split(cx, lam, frame)
            worst = max(worst, abs(g * r_low / rho - 1))
    return _result("lambda-split", seed, worst, 1e-8)


def _identity_map(cx):
    return {c.name: c for c in tor.check_identities(cx, lambdas=[])}


def check_modulus_identities(seed: int) -> CheckResult:
    worst = 0.0
    for cx in complex_fixtures(seed, 100):
        ids = _identity_map(cx)
        dgr = ids["detcrucial"].lhs
        xi_re = math.log(abs(ids["modulus_xi"].rhs))
        tau = ids["comparison"].lhs
        worst = max(
            worst,
            ids["detcrucial"].modulus_rel_err,
            ids["comparison"].modulus_rel_err,
            abs(abs(tau) - abs(dgr) ** 2) / abs(dgr) ** 2,
            abs(abs(tau) - math.exp(2 * xi_re)) / math.exp(2 * xi_re),
        )
    return _result("modulus-identities", seed, worst, 1e-8)


def check_phase_pin(seed: int) -> CheckResult:
    """Phase integer of both identities against the single value pinned on the toy complex."""
    toy = _identity_map(toy_complex(2.0))
    pins = (toy["detcrucial"].nu, toy["comparison"].nu)
    if pins != (PINNED_NU_DETCRUCIAL, PINNED_NU_COMPARISON):
        raise SuiteError(f"toy oracle gives {pins}, pinned values are out of date")
    seen, mism, worst_res = set(), 0, 0.0
    for cx in complex_fixtures(seed, 100):
        ids = _identity_map(cx)
        a, b = ids["detcrucial"], ids["comparison"]
        seen.add((a.nu, b.nu))
        worst_res = max(worst_res, a.phase_residual, b.phase_residual)
        if (a.nu, b.nu) != pins:
            mism += 1
    detail = f"pinned={pins} observed={sorted(seen)} mismatches={mism}/100"
    return _result("phase-pin", seed, worst_res, 1e-8, detail, passed=mism == 0 and worst_res <= 1e-8)


def check_phase_rank_formula(seed: int) -> CheckResult:
    """Phase integers against the rank formula; residual of the phase itself."""
    worst, mism = 0.0, 0
    for cx in complex_fixtures(seed, 100):
        ids = _identity_map(cx)
        a, b = ids["detcrucial"], ids["comparison"]
        worst = max(worst, a.phase_residual, b.phase_residual)
        if a.nu != tor.predicted_nu(cx) or b.nu != tor.predicted_nu_comparison(cx):
            mism += 1
    return _result("phase-rank-formula", seed, worst, 1e-8, f"mismatches={mism}/100", passed=mism == 0 and worst <= 1e-8)


def check_cm_lambda(seed: int) -> CheckResult:
    worst = 0.0
    for cx in complex_fixtures(seed, 50):
        lams = tor.spectral_gaps(cx, 2)
        v = [tor.cappell_miller(cx, lam).value for lam in lams]
        lit = tor.cappell_miller_literal(cx)
        worst = max(worst, abs(v[0] / v[1] - 1), abs(v[0] / lit - 1))
    return _result("cm-lambda-independence", seed, worst, 1e-8)


def check_agmon_independence(seed: int) -> CheckResult:
    worst, used = 0.0, 0
    for cx in complex_fixtures(seed, 50):
        osig = tor.odd_signature(cx)
        split = tor.pm_split(osig)
        thetas = tor.admissible_thetas(osig, split)
        if len(thetas) < 2:
            continue
        used += 1
        ref_det = tor.graded_det_Bev(osig, thetas[0], split)
        ref_xi = tor.xi(osig, thetas[0])
        ref_eta = sc.eta(sc.spectral_decompose(osig.B_ev), thetas[0]).eta
        for th in thetas[1:]:
            worst = max(worst, abs(tor.graded_det_Bev(osig, th, split) / ref_det - 1))
            dx = tor.xi(osig, th) - ref_xi
            dx -= 1j * math.pi * round(dx.imag / math.pi)
            worst = max(worst, abs(dx), abs(sc.eta(sc.spectral_decompose(osig.B_ev), th).eta - ref_eta))
    return _result("agmon-independence", seed, worst, 1e-9, f"fixtures_with_2+_angles={used}/50")


def _spectra(seed: int, count: int = 20):
    return [
        gen_spectrum(FixtureSpec("synthetic-spectrum", d=(3, 5)[i % 2], seed=_sub_seed(seed, i)))
        for i in range(count)
    ]


def eval_point(spec: zt.LengthSpectrum, offset: float = 3.0) -> float:
    """Ruelle abscissa plus ``offset``."""
    return spec.growth_abscissa + 2 * zt.rho_norm(spec.d) + offset


def check_zeta_modes(seed: int) -> CheckResult:
    worst, over = 0.0, 0
    trunc = zt.Truncation()
    for sp in _spectra(seed):
        s = eval_point(sp)
        rho = zt.rho_norm(sp.d)
        for p in range(sp.d):
            a = zt.log_selberg(s + rho - p, sp, trunc, mode="sym", ext_degree=p)
            b = zt.log_selberg(s + rho - p, sp, trunc, mode="closed", ext_degree=p)
            r = abs(a.value - b.value)
            worst = max(worst, r)
            if r > a.error_bound + b.error_bound:
                over += 1
    return _result("zeta-modes", seed, worst, 1e-8, f"over_bound={over}", passed=worst <= 1e-8 and over == 0)


def check_factorization(seed: int) -> CheckResult:
    worst, over = 0.0, 0
    for sp in _spectra(seed):
        f = zt.factorization(eval_point(sp) + 0.5j, sp)
        worst = max(worst, f.residual)
        over += f.residual > f.error_bound
    return _result("factorization", seed, worst, 1e-8, f"over_bound={over}", passed=worst <= 1e-8 and over == 0)


def check_ruelle_zero(seed: int) -> CheckResult:
    toy = mdl.torsion_bridge(toy_complex(2.0))
    worst = abs(toy.ruelle_zero - 4)
    exact = toy.ruelle_zero == 4 and toy.cappell_miller == 4
    for cx in complex_fixtures(seed, 50):
        worst = max(worst, mdl.torsion_bridge(cx).rel_err)
    return _result("ruelle-zero-bridge", seed, worst, 1e-9, f"toy_exact={exact}", passed=worst <= 1e-9 and exact)


def check_exponent_identity(seed: int) -> CheckResult:
    rng = _rng(seed, 11)
    worst = 0.0
    for d in (1, 3, 5, 7, 9):
        for _ in range(50):
            half = rng.standard_normal((d + 1) // 2) + 1j * rng.uniform(-math.pi, math.pi, (d + 1) // 2)
            logs = list(half) + list(half[::-1])
            lo, up = mdl.exponent_forms(logs, d)
            worst = max(worst, abs(lo - up))
    return _result("exponent-identity", seed, worst, 1e-12)


SINGULARITY_GOLDEN = (
    (3, (0, 0), 0),
    (3, (1, 2), 0),
    (3, (0, 1), -2),
    (3, (1, 0), 4),
    (5, (1, 0, 0), 6),
    (5, (0, 1, 0), -4),
    (5, (0, 0, 1), 2),
    (5, (1, 1, 1), 4),
    (1, (3,), 6),
    (7, (1, 2, 3, 4), 8 - 12 + 12 - 8),
)


def check_singularity_order(seed: int) -> CheckResult:
    bad = [(d, dc, want) for d, dc, want in SINGULARITY_GOLDEN if mdl.singularity_order(d, dc) != want]
    return _result("singularity-order", seed, float(len(bad)), 0.0, f"mismatches={bad}" if bad else "")


def weight_ladder_oracle(d: int, p: int) -> tuple[np.ndarray, np.ndarray]:
    """(rho_m, highest weight of Lambda^p) for so(d-1) by explicit enumeration.

    Positive roots e_i +- e_j (i < j); weights of Lambda^p are sums of p
    distinct weights among +-e_i (and 0 when d-1 is odd); the highest one
    is the lexicographic maximum.
    """
    n = (d - 1) // 2
    basis = np.eye(n)
    roots = [basis[i] + s * basis[j] for i in range(n) for j in range(i + 1, n) for s in (1, -1)]
    rho_m = 0.5 * np.sum(roots, axis=0) if roots else np.zeros(n)
    std = [basis[i] for i in range(n)] + [-basis[i] for i in range(n)]
    if (d - 1) % 2:
        std.append(np.zeros(n))
    best = None
    for sub in itertools.combinations(range(len(std)), p):
        w = np.sum([std[i] for i in sub], axis=0) if sub else np.zeros(n)
        if best is None or tuple(w) > tuple(best):
            best = w
    return rho_m, best


def check_c_sigma(seed: int) -> CheckResult:
    """c(sigma_p) against (|rho| - p)^2 for d = 3, 5, 7 and every p."""
    worst, bad = 0.0, []
    for d in (3, 5, 7):
        rho = zt.rho_norm(d)
        for p in range(d):
            rm, nu = weight_ladder_oracle(d, p)
            c = mdl.c_sigma(nu, rm, rho)
            err = abs(c - (rho - p) ** 2)
            worst = max(worst, err)
            if err > 1e-12:
                bad.append(f"d={d},p={p}:{c:g}")
    return _result("c-sigma", seed, worst, 1e-12, " ".join(bad))


REGISTRY: dict[str, Callable[[int], CheckResult]] = {
    "det-theta": check_det_theta,
    "eta-counts": check_eta_counts,
    "detline-choices": check_detline_choices,
    "lambda-split": check_lambda_split,
    "modulus-identities": check_modulus_identities,
    "phase-pin": check_phase_pin,
    "phase-rank-formula": check_phase_rank_formula,
    "cm-lambda-independence": check_cm_lambda,
    "agmon-independence": check_agmon_independence,
    "zeta-modes": check_zeta_modes,
    "factorization": check_factorization,
    "ruelle-zero-bridge": check_ruelle_zero,
    "exponent-identity": check_exponent_identity,
    "singularity-order": check_singularity_order,
    "c-sigma": check_c_sigma,
}

#: acceptance criterion number for each check
CRITERION = {
    "det-theta": "1",
    "eta-counts": "2",
    "detline-choices": "3",
    "lambda-split": "4",
    "modulus-identities": "5",
    "phase-pin": "5",
    "phase-rank-formula": "5*",
    "cm-lambda-independence": "6",
    "agmon-independence": "7",
    "zeta-modes": "8",
    "factorization": "9",
    "ruelle-zero-bridge": "10",
    "exponent-identity": "11",
    "singularity-order": "12",
    "c-sigma": "13",
}


def default_seeds() -> list[int]:
    env = os.environ.get("TORSIONLAB_SEED")
    if env:
        try:
            return [int(x) for x in env.replace(",", " ").split()]
        except ValueError as exc:
            raise SuiteError(f"TORSIONLAB_SEED must list integers, got {env!r}") from exc
    return list(DEFAULT_SEEDS)


def run_check(name: str, seed: int) -> CheckResult:
    if name not in REGISTRY:
        raise SuiteError(f"unknown check {name!r}; known: {', '.join(REGISTRY)}")
    t0 = time.perf_counter()
    try:
        res = REGISTRY[name](seed)
    except (ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
        res = CheckResult(name, seed, False, math.inf, math.nan, 0.0, f"error: {exc}")
    return CheckResult(res.name, seed, res.passed, res.max_residual, res.tolerance, time.perf_counter() - t0, res.detail)


def run_suite(names=None, seeds=None) -> SuiteReport:
    """Run the named checks (all when ``names`` is None) for every seed."""
    names = list(REGISTRY) if names is None else list(names)
    for n in names:
        if n not in REGISTRY:
            raise SuiteError(f"unknown check {n!r}; known: {', '.join(REGISTRY)}")
    seeds = default_seeds() if seeds is None else list(seeds)
    report = SuiteReport()
    for name in names:
        for seed in seeds:
            report.results.append(run_check(name, seed))
    return report
