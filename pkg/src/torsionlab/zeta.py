"""Truncated twisted Selberg and Ruelle zeta functions from length-spectrum data.

For a primitive class the linearized flow on the unstable directions is
e^{-l} times a rotation, so it is encoded by its length and rotation angles;
the twist enters through chi(gamma_0) and the eigenvalues of sigma(m_0).
All sums run in a fixed order (class, n, k) and are accumulated with
math.fsum on real and imaginary parts, so results are bit-stable.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np


class ConvergenceError(ValueError):
    """Evaluation point outside the declared region of absolute convergence."""


class TruncationError(ValueError):
    """The rigorous tail bound exceeds the requested tolerance."""


@dataclass(frozen=True, eq=False)
class PrimitiveClass:
    length: float
    holonomy_angles: tuple[float, ...]
    chi: np.ndarray
    sigma_m_eigs: tuple[complex, ...] = (1 + 0j,)

    def __post_init__(self):
        if not self.length > 0:
            raise ValueError(f"class length must be positive, got {self.length}")
        chi = np.atleast_2d(np.asarray(self.chi, dtype=complex))
        if chi.shape[0] != chi.shape[1]:
            raise ValueError(f"chi must be square, got shape {chi.shape}")
        if np.linalg.matrix_rank(chi) < chi.shape[0]:
            raise ValueError("chi must be invertible")
        object.__setattr__(self, "chi", chi)
        object.__setattr__(self, "holonomy_angles", tuple(float(a) for a in self.holonomy_angles))
        eigs = tuple(complex(z) for z in self.sigma_m_eigs)
        if any(abs(abs(z) - 1) > 1e-10 for z in eigs):
            raise ValueError("sigma(m) eigenvalues must have unit modulus")
        object.__setattr__(self, "sigma_m_eigs", eigs)

    @property
    def rotation_eigs(self) -> np.ndarray:
        a = np.asarray(self.holonomy_angles)
        return np.concatenate([np.exp(1j * a), np.exp(-1j * a)])


@dataclass(frozen=True, eq=False)
class LengthSpectrum:
    d: int
    classes: tuple[PrimitiveClass, ...]
    growth_abscissa: float = 0.0

    def __post_init__(self):
        if self.d % 2 != 1 or self.d < 3:
            raise ValueError(f"d must be odd and at least 3, got {self.d}")
        classes = tuple(sorted(self.classes, key=lambda c: c.length))
        for c in classes:
            if len(c.holonomy_angles) != (self.d - 1) // 2:
                raise ValueError(f"expected {(self.d - 1) // 2} holonomy angles per class for d={self.d}")
        object.__setattr__(self, "classes", classes)


@dataclass(frozen=True)
class Truncation:
    n_max: int = 60
    k_max: int = 60
    l_max: float = math.inf
    tail_tol: float = 1e-8

    def __post_init__(self):
        if self.n_max < 1 or self.k_max < 0 or not self.l_max > 0 or not self.tail_tol > 0:
            raise ValueError("truncation parameters must be positive")


#: per-term relative rounding allowance (a few dozen ulps)
ROUNDOFF_ULPS = 64 * np.finfo(float).eps


@dataclass(frozen=True)
class ZetaValue:
    """Truncated value with a bound on the discarded terms and on rounding."""

    value: complex
    tail_bound: float
    roundoff_bound: float = 0.0

    @property
    def error_bound(self) -> float:
        return self.tail_bound + self.roundoff_bound


def rho_norm(d: int) -> float:
    """|rho| = (d-1)/2 for real hyperbolic space of odd dimension d."""
    if d % 2 != 1 or d < 3:
        raise ValueError(f"d must be odd and at least 3, got {d}")
    return (d - 1) / 2


# --------------------------------------------------------------------------
# symmetric functions


def _power_sums(x: np.ndarray, kmax: int) -> np.ndarray:
    p = np.empty(kmax + 1, dtype=complex)
    p[0] = len(x)
    xi = np.ones_like(x)
    for i in range(1, kmax + 1):
        xi = xi * x
        p[i] = xi.sum()
    return p


def complete_homogeneous(x, kmax: int) -> np.ndarray:
    """h_0..h_kmax of ``x`` via Newton's identities k h_k = sum_i p_i h_{k-i}."""
    x = np.asarray(x, dtype=complex)
    p = _power_sums(x, kmax)
    h = np.zeros(kmax + 1, dtype=complex)
    h[0] = 1
    for k in range(1, kmax + 1):
        h[k] = np.dot(p[1: k + 1], h[k - 1:: -1][:k]) / k
    return h


def elementary(x, pmax: int) -> np.ndarray:
    """e_0..e_pmax of ``x`` via k e_k = sum_i (-1)^{i-1} e_{k-i} p_i."""
    x = np.asarray(x, dtype=complex)
    p = _power_sums(x, pmax)
    e = np.zeros(pmax + 1, dtype=complex)
    e[0] = 1
    for k in range(1, pmax + 1):
        s = 0j
        for i in range(1, k + 1):
            s += (-1) ** (i - 1) * e[k - i] * p[i]
        e[k] = s / k
    return e


def _flow_eigs(angles, length, n):
    a = np.asarray(angles, dtype=float)
    rot = np.concatenate([np.exp(1j * n * a), np.exp(-1j * n * a)])
    return math.exp(-n * length) * rot


def sym_power_trace(angles, length: float, n: int, k: int) -> complex:
    """tr S^k(e^{-n l} R(angles)^n)."""
    if n < 0 or k < 0:
        raise ValueError("n and k must be nonnegative")
    return complex(complete_homogeneous(_flow_eigs(angles, length, n), k)[k])


def ext_power_trace(angles, n: int, p: int) -> complex:
    """tr Lambda^p(R(angles)^n), R acting on R^{2 len(angles)}."""
    m = 2 * len(angles)
    if not 0 <= p <= m:
        raise ValueError(f"p must lie in [0, {m}], got {p}")
    return complex(elementary(_flow_eigs(angles, 0.0, n), p)[p])


# --------------------------------------------------------------------------
# Euler products


def _chi_powers(chi: np.ndarray, n_max: int):
    """tr chi^n for n = 1..n_max."""
    out = []
    P = np.eye(chi.shape[0], dtype=complex)
    for _ in range(n_max):
        P = P @ chi
        out.append(complex(np.trace(P)))
    return out


def _fsum_complex(terms) -> complex:
    terms = list(terms)
    return complex(math.fsum(t.real for t in terms), math.fsum(t.imag for t in terms))


def _summed(terms, tail) -> ZetaValue:
    rnd = ROUNDOFF_ULPS * math.fsum(abs(t) for t in terms)
    return ZetaValue(_fsum_complex(terms), tail, rnd)


def _geometric_n_tail(c: float, r: float, n0: int) -> float:
    """Bound of sum_{n>=n0} c r^n / n."""
    if r >= 1:
        return math.inf
    return c * r**n0 / (n0 * (1 - r))


def _binomial_k_tail(m: int, q: float, K: int) -> float:
    """Bound of sum_{k>K} C(k+m-1, m-1) q^k."""
    if m == 0:
        return 0.0
    k = K + 1
    ratio = (k + m) / (k + 1) * q
    if ratio >= 1:
        return math.inf
    first = math.comb(k + m - 1, m - 1) * q**k
    return first / (1 - ratio)


def _check_region(re_s: float, bound: float, what: str, spec: LengthSpectrum):
    # an empty product converges everywhere
    if spec.classes and not re_s > bound:
        raise ConvergenceError(f"{what}: Re s = {re_s} is not beyond the declared abscissa {bound}")


def _class_ratio(cls: PrimitiveClass, re_exp: float) -> float:
    return float(np.linalg.norm(cls.chi, 2)) * math.exp(-re_exp * cls.length)


def log_selberg(
    s: complex,
    spec: LengthSpectrum,
    trunc: Truncation = Truncation(),
    mode: str = "sym",
    ext_degree: int = 0,
    check_tail: bool = True,
) -> ZetaValue:
    """log Z(s; sigma_p (x) sigma, chi) with sigma_p the p-th exterior power, p = ``ext_degree``.

    ``mode`` is "sym" (explicit symmetric-power sum up to k_max) or
    "closed" (the k-sum replaced by 1/det(I - Ad(m a)^n)).
    """
    if mode not in ("sym", "closed"):
        raise ValueError(f"mode must be 'sym' or 'closed', got {mode!r}")
    s = complex(s)
    d, rho = spec.d, rho_norm(spec.d)
    m = d - 1
    if not 0 <= ext_degree <= m:
        raise ValueError(f"ext_degree must lie in [0, {m}]")
    _check_region(s.real, spec.growth_abscissa + rho, "Selberg zeta", spec)
    terms, tail = [], 0.0
    sigma_bound = math.comb(m, ext_degree)
    for cls in spec.classes:
        l = cls.length
        dim_chi, dim_sig = cls.chi.shape[0], len(cls.sigma_m_eigs)
        r = _class_ratio(cls, s.real + rho)
        const = dim_chi * dim_sig * sigma_bound / (1 - math.exp(-l)) ** m
        if r >= 1:
            raise ConvergenceError(f"class of length {l} diverges at Re s = {s.real}")
        if l > trunc.l_max:
            tail += const * -math.log1p(-r)
            continue
        trchi = _chi_powers(cls.chi, trunc.n_max)
        sig = np.asarray(cls.sigma_m_eigs)
        for n in range(1, trunc.n_max + 1):
            trsig = complex(np.sum(sig**n)) * ext_power_trace(cls.holonomy_angles, n, ext_degree)
            pref = -trchi[n - 1] * trsig / n * cmath.exp(-(s + rho) * n * l)
            x = _flow_eigs(cls.holonomy_angles, l, n)
            if mode == "closed":
                terms.append(pref / complex(np.prod(1 - x)))
            else:
                h = complete_homogeneous(x, trunc.k_max)
                terms.extend(pref * hk for hk in h)
                tail += abs(pref) * _binomial_k_tail(m, math.exp(-n * l), trunc.k_max)
        q1 = math.exp(-(trunc.n_max + 1) * l)
        tail += dim_chi * dim_sig * sigma_bound / (1 - q1) ** m * _geometric_n_tail(1.0, r, trunc.n_max + 1)
    if check_tail and tail > trunc.tail_tol:
        raise TruncationError(f"tail bound {tail:.3e} exceeds tolerance {trunc.tail_tol:.3e}")
    return _summed(terms, tail)


def log_ruelle(
    s: complex,
    spec: LengthSpectrum,
    trunc: Truncation = Truncation(),
    check_tail: bool = True,
) -> ZetaValue:
    """log R(s; sigma, chi) = -sum_classes sum_n (1/n) tr chi^n tr sigma^n e^{-s n l}."""
    s = complex(s)
    rho = rho_norm(spec.d)
    _check_region(s.real, spec.growth_abscissa + 2 * rho, "Ruelle zeta", spec)
    terms, tail = [], 0.0
    for cls in spec.classes:
        l = cls.length
        dim_chi, dim_sig = cls.chi.shape[0], len(cls.sigma_m_eigs)
        r = _class_ratio(cls, s.real)
        if r >= 1:
            raise ConvergenceError(f"class of length {l} diverges at Re s = {s.real}")
        if l > trunc.l_max:
            tail += dim_chi * dim_sig * -math.log1p(-r)
            continue
        trchi = _chi_powers(cls.chi, trunc.n_max)
        sig = np.asarray(cls.sigma_m_eigs)
        for n in range(1, trunc.n_max + 1):
            trsig = complex(np.sum(sig**n))
            terms.append(-trchi[n - 1] * trsig / n * cmath.exp(-s * n * l))
        tail += dim_chi * dim_sig * _geometric_n_tail(1.0, r, trunc.n_max + 1)
    if check_tail and tail > trunc.tail_tol:
        raise TruncationError(f"tail bound {tail:.3e} exceeds tolerance {trunc.tail_tol:.3e}")
    return _summed(terms, tail)


def ruelle(s, spec, trunc: Truncation = Truncation()) -> complex:
    return cmath.exp(log_ruelle(s, spec, trunc).value)


@dataclass(frozen=True)
class FactorizationResult:
    residual: float
    tail_bound: float
    log_ruelle: complex
    log_selberg_alternating: complex
    roundoff_bound: float = 0.0

    @property
    def error_bound(self) -> float:
        return self.tail_bound + self.roundoff_bound


def factorization(s, spec, trunc: Truncation = Truncation(), mode: str = "sym") -> FactorizationResult:
    """Compare log R(s) with sum_p (-1)^p log Z(s + |rho| - p; sigma_p (x) sigma)."""
    s = complex(s)
    rho = rho_norm(spec.d)
    R = log_ruelle(s, spec, trunc, check_tail=False)
    parts, tail, rnd = [], R.tail_bound, R.roundoff_bound
    for p in range(spec.d):
        Z = log_selberg(s + rho - p, spec, trunc, mode=mode, ext_degree=p, check_tail=False)
        parts.append((-1) ** p * Z.value)
        tail += Z.tail_bound
        rnd += Z.roundoff_bound
    alt = _fsum_complex(parts)
    if tail > trunc.tail_tol:
        raise TruncationError(f"combined tail bound {tail:.3e} exceeds tolerance {trunc.tail_tol:.3e}")
    return FactorizationResult(abs(R.value - alt), tail, R.value, alt, rnd)


def factorization_residual(s, spec, trunc: Truncation = Truncation()) -> float:
    return factorization(s, spec, trunc).residual
