"""Odd signature operator of a finite complex and the torsions built from it.

Refined analytic torsion (graded determinant of the even part times a phase),
the number xi, the Cappell-Miller torsion, and a report comparing the
identities that relate them.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from . import spectral as sc
from .complexes import (
    ComplexError,
    GradedComplex,
    laplacian_blocks,
    null_space,
    rank,
    spectral_split,
)
from .detline import check_chirality, default_frame, refined_torsion

#: B counts as bijective when sigma_min(B) > ASSUMPTION2_RTOL * ||B||
ASSUMPTION2_RTOL = 1e-8


@dataclass(frozen=True)
class ValidationReport:
    assumption1: bool
    assumption2: bool
    d_squared_zero: bool
    chirality_involution: bool
    min_singular_B: float

    def as_dict(self):
        return dict(self.__dict__)


@dataclass(frozen=True, eq=False)
class OddSignature:
    complex: GradedComplex
    B: np.ndarray
    B_ev: np.ndarray
    B_sq_per_degree: tuple[np.ndarray, ...]
    even_degrees: tuple[int, ...]


@dataclass(frozen=True, eq=False)
class PMSplit:
    """Bases (in C^ev coordinates) of Lambda^ev_+ and Lambda^ev_- and B^ev on each."""

    plus_basis: np.ndarray
    minus_basis: np.ndarray
    B_plus: np.ndarray
    B_minus: np.ndarray
    spec_plus: sc.Spectrum
    spec_minus: sc.Spectrum
    dims_plus: tuple[int, ...] = field(default=())
    dims_minus: tuple[int, ...] = field(default=())


def validate(cx: GradedComplex) -> ValidationReport:
    cx.require_chirality()
    d = cx.d
    d2 = True
    for j in range(d - 1):
        prod = cx.partial[j + 1] @ cx.partial[j]
        scale = max(1.0, np.linalg.norm(cx.partial[j + 1]) * np.linalg.norm(cx.partial[j]))
        if prod.size and np.linalg.norm(prod) > 1e-10 * scale:
            d2 = False
    inv = True
    for j in range(d + 1):
        g = cx.gamma[d - j] @ cx.gamma[j]
        if g.size and np.linalg.norm(g - np.eye(cx.dims[j])) > 1e-8 * max(1.0, np.linalg.norm(cx.gamma[j]) ** 2):
            inv = False
    # exact at C^j: im d_{j-1} = ker d_j, i.e. ranks add up given d^2 = 0
    ranks = (0,) + cx.ranks() + (0,)
    exact = d2 and all(ranks[j] + ranks[j + 1] == cx.dims[j] for j in range(d + 1))
    B = cx.G @ cx.D + cx.D @ cx.G
    if B.size:
        s = np.linalg.svd(B, compute_uv=False)
        smin, bijective = float(s[-1]), bool(s[-1] > ASSUMPTION2_RTOL * s[0])
    else:
        smin, bijective = math.inf, True
    return ValidationReport(exact, bijective, d2, inv, smin)


def odd_signature(cx: GradedComplex) -> OddSignature:
    cx.require_chirality()
    B = cx.G @ cx.D + cx.D @ cx.G
    even = tuple(range(0, cx.d + 1, 2))
    idx = np.concatenate([np.arange(cx.offsets[j], cx.offsets[j + 1]) for j in even]).astype(int)
    B_ev = B[np.ix_(idx, idx)]
    return OddSignature(cx, B, B_ev, tuple(laplacian_blocks(cx)), even)


def flat_laplacian(cx: GradedComplex) -> np.ndarray:
    """d d^# + d^# d with the dual differential d^# = Gamma d Gamma."""
    D, G = cx.D, cx.G
    dual = G @ D @ G
    return D @ dual + dual @ D


def _even_embed(cx: GradedComplex, k: int, V: np.ndarray) -> np.ndarray:
    """Embed vectors of C^k (k even) into C^ev coordinates."""
    n_ev = sum(cx.dims[j] for j in range(0, cx.d + 1, 2))
    off = sum(cx.dims[j] for j in range(0, k, 2))
    out = np.zeros((n_ev, V.shape[1]), dtype=complex)
    out[off: off + cx.dims[k]] = V
    return out


def pm_split(osig: OddSignature, rtol: float = 1e-8) -> PMSplit:
    """Lambda^k_+ = Ker(d Gamma) and Lambda^k_- = Ker(Gamma d) on even degrees."""
    cx = osig.complex
    d = cx.d
    plus, minus, dp, dm = [], [], [], []
    for k in osig.even_degrees:
        Vp = null_space(cx.dmap(d - k) @ cx.gamma[k])
        Vm = null_space(cx.gamma[k + 1] @ cx.dmap(k)) if k < d else np.eye(cx.dims[k], dtype=complex)
        if Vp.shape[1] + Vm.shape[1] != cx.dims[k] or rank(np.hstack([Vp, Vm])) != cx.dims[k]:
            raise ComplexError(
                f"Lambda^{k}_+ and Lambda^{k}_- do not split C^{k} (B is not bijective)"
            )
        plus.append(_even_embed(cx, k, Vp))
        minus.append(_even_embed(cx, k, Vm))
        dp.append(Vp.shape[1])
        dm.append(Vm.shape[1])
    n_ev = osig.B_ev.shape[0]
    Wp = np.hstack(plus) if plus else np.zeros((n_ev, 0), dtype=complex)
    Wm = np.hstack(minus) if minus else np.zeros((n_ev, 0), dtype=complex)
    Bp = _restrict_invariant(osig.B_ev, Wp, rtol)
    Bm = _restrict_invariant(osig.B_ev, Wm, rtol)
    return PMSplit(Wp, Wm, Bp, Bm, sc.spectral_decompose(Bp), sc.spectral_decompose(Bm), tuple(dp), tuple(dm))


def _restrict_invariant(M, W, rtol):
    if W.shape[1] == 0:
        return np.zeros((0, 0), dtype=complex)
    X, *_ = np.linalg.lstsq(W, M @ W, rcond=None)
    if np.linalg.norm(W @ X - M @ W) > rtol * max(1.0, np.linalg.norm(M)) * np.linalg.norm(W):
        raise ComplexError("subspace is not invariant under B^ev")
    return X


# --------------------------------------------------------------------------
# Agmon angles


def _forbidden_args(osig: OddSignature, split: PMSplit) -> list[float]:
    forbidden = []
    for spec in (sc.spectral_decompose(osig.B_ev), split.spec_plus, split.spec_minus.negated()):
        forbidden += [cmath.phase(lam) for lam, _ in spec.entries if lam != 0]
    for L in osig.B_sq_per_degree:
        for lam, _ in sc.spectral_decompose(L).entries:
            if lam != 0:
                half = cmath.phase(lam) / 2
                forbidden += [half, half + math.pi]
    return forbidden


def default_theta(osig: OddSignature, split: PMSplit | None = None) -> float:
    """Agmon angle in (-pi, 0) for B^ev, B^ev_+, -B^ev_- with 2*theta Agmon for every B^2_k.

    Midpoint of the gap around -pi/2 among all forbidden directions.
    """
    split = split or pm_split(osig)
    return sc.choose_angle(_forbidden_args(osig, split), -math.pi, 0.0, prefer=-math.pi / 2)


def admissible_thetas(osig: OddSignature, split: PMSplit | None = None, min_width: float = 1e-6) -> list[float]:
    """Midpoints of every admissible gap in (-pi, 0), in increasing order."""
    split = split or pm_split(osig)
    lo, hi = -math.pi, 0.0
    cuts = sorted({lo + sc._wrap(a - lo) for a in _forbidden_args(osig, split)} | {lo, hi})
    cuts = [c for c in cuts if lo <= c <= hi]
    return [0.5 * (a + b) for a, b in zip(cuts, cuts[1:]) if b - a > min_width]


def laplacian_theta(blocks, lo=0.0, hi=2 * math.pi) -> float:
    """Widest-gap Agmon angle in (lo, hi) for all the given matrices."""
    forbidden = []
    for L in blocks:
        if L.size:
            forbidden += [cmath.phase(lam) for lam, _ in sc.spectral_decompose(L).entries if lam != 0]
    return sc.choose_angle(forbidden, lo, hi)


# --------------------------------------------------------------------------
# invariants


def graded_det_Bev(osig: OddSignature, theta: float | None = None, split: PMSplit | None = None) -> complex:
    split = split or pm_split(osig)
    if theta is None:
        theta = default_theta(osig, split)
    return sc.graded_det(split.spec_plus, split.spec_minus, theta, convention="negate-minus")


def xi(osig: OddSignature, theta: float | None = None) -> complex:
    """1/2 sum_k (-1)^{k+1} k Ldet_{2 theta}(B^2 on C^k)."""
    if theta is None:
        theta = default_theta(osig)
    total = 0j
    for k, L in enumerate(osig.B_sq_per_degree):
        if k == 0 or L.size == 0:
            continue
        ld = sc.ldet_theta(sc.spectral_decompose(L), 2 * theta)
        total += 0.5 * (-1) ** (k + 1) * k * ld
    return total


def eta_Bev(osig: OddSignature, theta: float | None = None) -> sc.EtaResult:
    return sc.eta(sc.spectral_decompose(osig.B_ev), theta)


def refined_T(osig: OddSignature, theta: float | None = None, eta_tr: float = 0.0, rank: int = 1) -> complex:
    """det_gr(B^ev) * exp(i pi rank eta_tr)."""
    return graded_det_Bev(osig, theta) * cmath.exp(1j * math.pi * rank * eta_tr)


def refined_T_prime(osig: OddSignature, theta: float | None = None, L_integral: float = 0.0, rank: int = 1) -> complex:
    """det_gr(B^ev) * exp(i pi (rank/2) L_integral).

    A different bounding manifold changes ``L_integral`` by an integer, so the
    value is defined up to a factor i^(k * rank).
    """
    return graded_det_Bev(osig, theta) * cmath.exp(1j * math.pi * rank / 2 * L_integral)


def cappell_miller_literal(cx: GradedComplex) -> complex:
    """prod_k det(B^2 on C^k)^{k (-1)^{k+1}} by plain determinants."""
    value = 1 + 0j
    for k, L in enumerate(laplacian_blocks(cx)):
        if k and L.size:
            value *= complex(np.linalg.det(L)) ** (k * (-1) ** (k + 1))
    return value


@dataclass(frozen=True)
class CappellMillerResult:
    scalar: complex
    finite_part: complex
    lam: float
    theta: float

    @property
    def value(self) -> complex:
        """scalar times the coordinate of rho (x) rho; a number when acyclic."""
        return self.scalar * self.finite_part


def cappell_miller(cx: GradedComplex, lam: float = 0.0, theta: float | None = None) -> CappellMillerResult:
    """tau_Gamma[0,lam] times prod_k det_theta(B^2 on C^k_(lam,inf))^{k(-1)^{k+1}}.

    The exponents are integers, so the scalar does not depend on the branch;
    it is formed from eigenvalue products and ``theta`` (in (0, 2 pi)) is
    only checked to be an Agmon angle.
    """
    check_chirality(cx)
    if cx.total_dim == 0:
        return CappellMillerResult(1 + 0j, 1 + 0j, lam, math.pi if theta is None else theta)
    low, high = spectral_split(cx, lam)
    blocks = laplacian_blocks(high.complex) if high.complex.total_dim else []
    if theta is None:
        theta = laplacian_theta(blocks) if blocks else math.pi
    scalar = 1 + 0j
    for k, L in enumerate(blocks):
        if k and L.size:
            spec = sc.spectral_decompose(L)
            for z, _ in spec.entries:
                sc.branch_log(z, theta)
            scalar *= complex(np.prod(np.linalg.eigvals(L))) ** (k * (-1) ** (k + 1))
    rho_low = refined_torsion(low.complex, frame=default_frame(cx), embed=low.basis)
    return CappellMillerResult(scalar, rho_low.coeff ** 2, lam, theta)


def lambda_split(cx: GradedComplex, lam: float, frame=None) -> tuple[complex, complex]:
    """(det_gr(B^ev_(lam,inf)), rho_Gamma[0,lam]) with rho expressed in ``frame``."""
    frame = frame or default_frame(cx)
    low, high = spectral_split(cx, lam)
    if high.complex.total_dim:
        dgr = graded_det_Bev(odd_signature(high.complex))
    else:
        dgr = 1 + 0j
    rho_low = refined_torsion(low.complex, frame=frame, embed=low.basis)
    return dgr, rho_low.coeff


def spectral_gaps(cx: GradedComplex, count: int = 3) -> list[float]:
    """``count`` admissible values of lambda for splitting ``cx``.

    0 when B^2 is invertible, then midpoints of the widest gaps in
    |spec B^2|, then (if still short) values above the whole spectrum.
    """
    mods = sorted({round(float(abs(z)), 12) for L in laplacian_blocks(cx) if L.size for z in np.linalg.eigvals(L)})
    out = []
    if not mods or mods[0] > 1e-6 * mods[-1]:
        out.append(0.0)
    gaps = sorted(
        ((b - a, 0.5 * (a + b)) for a, b in zip(mods, mods[1:]) if b - a > 1e-6 * max(1.0, b)),
        reverse=True,
    )
    out += [mid for _, mid in gaps[: max(0, count - len(out))]]
    top = mods[-1] if mods else 1.0
    while len(out) < count:
        out.append(top * (1.5 + len(out)))
    return sorted(out)[:count]


# --------------------------------------------------------------------------
# identity report


def phase_integer(ratio: complex) -> tuple[int, float]:
    """Nearest nu in {0,1,2,3} with ratio/|ratio| ~ exp(i pi nu / 2), and the angular residual."""
    ang = cmath.phase(ratio)
    q = ang / (math.pi / 2)
    nu = int(round(q))
    return nu % 4, abs(q - nu) * math.pi / 2


def predicted_nu(cx: GradedComplex) -> int:
    """Phase integer of det_gr / (e^xi e^{-i pi eta}) for an acyclic complex with B invertible.

    2 * sum_{j=1}^{r-1} rank d_{j-1} + (-1)^{r+1} rank d_{r-1}, mod 4, valid
    for the default angle (no eigenvalue of B^ev between the cut and the
    imaginary axis).
    """
    rk = cx.ranks()
    r = cx.r
    M = sum(rk[j - 1] for j in range(1, r))
    return (2 * M + (-1) ** (r + 1) * rk[r - 1]) % 4


def predicted_nu_comparison(cx: GradedComplex) -> int:
    """Phase integer of tau / (T^2 e^{2 pi i (eta - rank eta_tr)}): 2 * rank d_{r-1} mod 4."""
    return (2 * cx.ranks()[cx.r - 1]) % 4


@dataclass(frozen=True)
class IdentityCheck:
    name: str
    lhs: complex
    rhs: complex
    modulus_rel_err: float
    nu: int
    phase_residual: float

    @property
    def rel_err(self) -> float:
        """|lhs/rhs - 1|: the residual of the identity without any phase correction."""
        return abs(self.lhs / self.rhs - 1)

    def as_dict(self):
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "rel_err": self.rel_err,
            "modulus_rel_err": self.modulus_rel_err,
            "nu": self.nu,
            "phase_residual": self.phase_residual,
        }


def _compare(name, lhs, rhs) -> IdentityCheck:
    lhs, rhs = complex(lhs), complex(rhs)
    rel = abs(abs(lhs) - abs(rhs)) / max(abs(rhs), 1e-300)
    nu, res = phase_integer(lhs / rhs)
    return IdentityCheck(name, lhs, rhs, rel, nu, res)


def check_identities(
    cx: GradedComplex,
    theta: float | None = None,
    eta_tr: float = 0.0,
    rank: int = 1,
    lambdas=None,
) -> list[IdentityCheck]:
    """Compare det_gr = e^xi e^{-i pi eta}, tau = T^2 e^{2 pi i (eta - rank eta_tr)} and the lambda-split law."""
    osig = odd_signature(cx)
    split = pm_split(osig)
    if theta is None:
        theta = default_theta(osig, split)
    dgr = graded_det_Bev(osig, theta, split)
    x = xi(osig, theta)
    et = eta_Bev(osig).eta
    out = [
        _compare("detcrucial", dgr, cmath.exp(x) * cmath.exp(-1j * math.pi * et)),
        _compare("modulus_xi", abs(dgr), math.exp(x.real)),
    ]
    tau = cappell_miller(cx).value
    T = dgr * cmath.exp(1j * math.pi * rank * eta_tr)
    out.append(_compare("comparison", tau, T**2 * cmath.exp(2j * math.pi * (et - rank * eta_tr))))
    out.append(_compare("tau_vs_xi", tau, cmath.exp(2 * x)))
    frame = default_frame(cx)
    rho = refined_torsion(cx, frame=frame).coeff
    for lam in lambdas if lambdas is not None else spectral_gaps(cx):
        g, r_low = lambda_split(cx, lam, frame)
        out.append(_compare(f"lambda_split[{lam:.6g}]", rho, g * r_low))
    return out
