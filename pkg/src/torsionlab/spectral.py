"""Finite-dimensional non-self-adjoint spectral machinery.

Eigenvalues with algebraic multiplicities, branch logarithms cut along a ray,
Agmon angles, and the finite-sum versions of the zeta function, regularized
determinant, eta invariant and graded determinant.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

TWO_PI = 2.0 * math.pi

#: angular tolerance for "z lies on the cut ray"
CUT_TOL = 1e-12
#: relative tolerance deciding "purely imaginary"
AXIS_TOL = 1e-10


class SpectralError(ValueError):
    """Raised for invalid spectral input (zero eigenvalue, bad angle, ...)."""


class BranchCutError(SpectralError):
    """The argument of a logarithm lies on the cut ray."""


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues with algebraic multiplicities.

    ``projectors`` (optional) are the root-subspace projectors in the same
    order as ``entries``.
    """

    entries: tuple[tuple[complex, int], ...]
    projectors: tuple[np.ndarray, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        for lam, mult in self.entries:
            if int(mult) != mult or mult < 1:
                raise SpectralError(f"multiplicity must be a positive integer, got {mult}")
        if self.projectors is not None and len(self.projectors) != len(self.entries):
            raise SpectralError("one projector per eigenvalue entry required")

    @classmethod
    def from_values(cls, values: Sequence[complex]) -> "Spectrum":
        """Spectrum with each listed value counted once (repeats are merged)."""
        return cls(_group(np.asarray(values, dtype=complex), tol=0.0))

    @property
    def dim(self) -> int:
        return sum(m for _, m in self.entries)

    @property
    def values(self) -> np.ndarray:
        """Eigenvalues repeated according to multiplicity."""
        out = [lam for lam, m in self.entries for _ in range(m)]
        return np.asarray(out, dtype=complex)

    def negated(self) -> "Spectrum":
        return Spectrum(tuple((-lam, m) for lam, m in self.entries))

    def __len__(self):
        return len(self.entries)


@dataclass(frozen=True)
class AgmonAngle:
    theta: float
    epsilon: float


@dataclass(frozen=True)
class EtaResult:
    eta0: complex
    m_plus: int
    m_minus: int

    @property
    def eta(self) -> complex:
        return (self.eta0 + self.m_plus - self.m_minus) / 2


def _group(values: np.ndarray, tol: float) -> tuple[tuple[complex, int], ...]:
    """Single-linkage clustering of ``values`` at distance ``tol``."""
    n = len(values)
    if n == 0:
        return ()
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    order = np.lexsort((values.imag, values.real))
    # neighbours in sorted order are not enough for single linkage in the
    # plane, so compare all pairs; matrices here are small
    for a in range(n):
        for b in range(a + 1, n):
            if abs(values[a] - values[b]) <= tol:
                parent[find(a)] = find(b)
    clusters: dict[int, list[int]] = {}
    for i in order:
        clusters.setdefault(find(i), []).append(i)
    out = []
    for idx in clusters.values():
        center = complex(np.mean(values[idx]))
        out.append((center, len(idx)))
    out.sort(key=lambda e: (round(e[0].real, 12), round(e[0].imag, 12)))
    return tuple(out)


def spectral_decompose(M, tol: float | None = None, projectors: bool = False) -> Spectrum:
    """Eigenvalues of ``M`` grouped within ``tol`` with algebraic multiplicities.

    Default ``tol`` is ``1e-8 * ||M||``. With ``projectors=True`` the
    root-subspace projector of every cluster is attached.
    """
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise SpectralError(f"square matrix required, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise SpectralError("matrix has non-finite entries")
    if M.shape[0] == 0:
        return Spectrum((), () if projectors else None)
    if tol is None:
        tol = 1e-8 * max(np.linalg.norm(M, 2), 1e-300)
    try:
        vals = np.linalg.eigvals(M)
    except np.linalg.LinAlgError as exc:
        raise SpectralError(f"eigenvalue iteration did not converge: {exc}") from exc
    entries = _group(vals, tol)
    if not projectors:
        return Spectrum(entries)
    # cluster membership must use the same clustering as `entries`
    projs = []
    for lam, _ in entries:
        members = [v for v in vals if _nearest(v, entries) == lam]
        radius = max(abs(v - lam) for v in members) + 0.5 * tol
        projs.append(spectral_projector(M, lambda z, c=lam, r=radius: abs(z - c) <= r))
    return Spectrum(entries, tuple(projs))


def _nearest(v, entries):
    return min(entries, key=lambda e: abs(e[0] - v))[0]


def spectral_projector(M, select: Callable[[complex], bool]) -> np.ndarray:
    """Projector onto the sum of root subspaces whose eigenvalues satisfy ``select``.

    The projection is along the complementary invariant subspace. Computed
    from a reordered complex Schur form and one Sylvester solve.
    """
    M = np.asarray(M, dtype=complex)
    n = M.shape[0]
    if n == 0:
        return np.zeros((0, 0), dtype=complex)
    T, Q, k = scipy.linalg.schur(M, output="complex", sort=lambda z: bool(select(z)))
    if k == 0:
        return np.zeros((n, n), dtype=complex)
    if k == n:
        return np.eye(n, dtype=complex)
    T11, T12, T22 = T[:k, :k], T[:k, k:], T[k:, k:]
    # T11 X - X T22 = -T12 block-diagonalizes T
    X = scipy.linalg.solve_sylvester(T11, -T22, -T12)
    P = np.zeros((n, n), dtype=complex)
    P[:k, :k] = np.eye(k)
    P[:k, k:] = -X
    return Q @ P @ Q.conj().T


# --------------------------------------------------------------------------
# branches and angles


def _wrap(phi: float) -> float:
    """Reduce an angle to [0, 2*pi)."""
    r = math.fmod(phi, TWO_PI)
    if r < 0:
        r += TWO_PI
    if r >= TWO_PI:
        r -= TWO_PI
    return r


def angular_distance(a: float, b: float) -> float:
    """Distance between two angles on the circle, in [0, pi]."""
    r = _wrap(a - b)
    return min(r, TWO_PI - r)


def branch_log(z: complex, theta: float, cut_tol: float = CUT_TOL) -> complex:
    """Logarithm of ``z`` with imaginary part in ``(theta, theta + 2*pi)``."""
    z = complex(z)
    if z == 0:
        raise SpectralError("logarithm of zero")
    offset = _wrap(cmath.phase(z) - theta)
    if offset <= cut_tol or offset >= TWO_PI - cut_tol:
        raise BranchCutError(f"{z!r} lies on the cut ray at angle {theta!r}")
    return complex(math.log(abs(z)), theta + offset)


def is_agmon(spec: Spectrum, theta: float, epsilon: float) -> bool:
    """True iff no eigenvalue lies in the closed sector [theta-eps, theta+eps]."""
    if epsilon <= 0:
        raise SpectralError("epsilon must be positive")
    for lam, _ in spec.entries:
        if lam == 0:
            continue
        if angular_distance(cmath.phase(lam), theta) <= epsilon:
            return False
    return True


def angular_clearance(points: Sequence[complex], theta: float) -> float:
    """Smallest angular distance from ``theta`` to the nonzero ``points``."""
    d = math.pi
    for z in points:
        if z != 0:
            d = min(d, angular_distance(cmath.phase(complex(z)), theta))
    return d


def choose_angle(
    forbidden: Sequence[float],
    lo: float,
    hi: float,
    prefer: float | None = None,
) -> float:
    """Midpoint of the gap in ``forbidden`` containing ``prefer`` within (lo, hi).

    Without ``prefer`` the widest gap wins. Angles are taken mod 2*pi and
    mapped into [lo, lo + 2*pi).
    """
    cuts = sorted({lo + _wrap(a - lo) for a in forbidden} | {lo, hi})
    cuts = [c for c in cuts if lo <= c <= hi]
    gaps = [(a, b) for a, b in zip(cuts, cuts[1:]) if b - a > 0]
    if not gaps:
        raise SpectralError("no admissible angle")
    if prefer is not None:
        for a, b in gaps:
            if a < prefer < b:
                return 0.5 * (a + b)
        # prefer is forbidden itself: use the wider adjacent gap
        near = sorted(gaps, key=lambda g: min(abs(g[0] - prefer), abs(g[1] - prefer)))[:2]
        a, b = max(near, key=lambda g: g[1] - g[0])
        return 0.5 * (a + b)
    a, b = max(gaps, key=lambda g: g[1] - g[0])
    return 0.5 * (a + b)


def agmon_angle(spec: Spectrum, lo: float = -math.pi, hi: float = math.pi, prefer=None) -> AgmonAngle:
    """An Agmon angle for ``spec`` in (lo, hi) with its clearance as epsilon."""
    args = [cmath.phase(lam) for lam, _ in spec.entries if lam != 0]
    theta = choose_angle(args, lo, hi, prefer)
    eps = angular_clearance([lam for lam, _ in spec.entries], theta)
    return AgmonAngle(theta, 0.5 * eps)


# --------------------------------------------------------------------------
# zeta, determinants, eta


def _check_invertible(spec: Spectrum):
    for lam, _ in spec.entries:
        if lam == 0:
            raise SpectralError("spectrum contains zero; operator is not invertible")


def zeta_theta(spec: Spectrum, theta: float, s: complex) -> complex:
    """Finite-sum zeta function sum_k m_k exp(-s log_theta(lambda_k))."""
    _check_invertible(spec)
    return complex(sum(m * cmath.exp(-s * branch_log(lam, theta)) for lam, m in spec.entries))


def ldet_theta(spec: Spectrum, theta: float) -> complex:
    """Logarithm of the determinant along the branch cut at ``theta``."""
    _check_invertible(spec)
    re = math.fsum(m * math.log(abs(lam)) for lam, m in spec.entries)
    im = math.fsum(m * branch_log(lam, theta).imag for lam, m in spec.entries)
    return complex(re, im)


def det_theta(spec: Spectrum, theta: float) -> complex:
    return cmath.exp(ldet_theta(spec, theta))


def is_imaginary(lam: complex, tol: float = AXIS_TOL) -> bool:
    return abs(lam.real) <= tol * max(1.0, abs(lam))


def eta(spec: Spectrum, theta: float | None = None, axis_tol: float = AXIS_TOL) -> EtaResult:
    """Eta invariant of a finite spectrum.

    Eigenvalues on the imaginary axis (within ``axis_tol``) are excluded from
    ``eta0`` and counted in ``m_plus``/``m_minus`` instead. ``theta``, when
    given, is only checked to be off the spectrum; the count does not depend
    on it.
    """
    _check_invertible(spec)
    if theta is not None:
        for lam, _ in spec.entries:
            branch_log(lam, theta)
    eta0 = m_plus = m_minus = 0
    for lam, m in spec.entries:
        if is_imaginary(lam, axis_tol):
            if lam.imag > 0:
                m_plus += m
            else:
                m_minus += m
        elif lam.real > 0:
            eta0 += m
        else:
            eta0 -= m
    return EtaResult(complex(eta0), m_plus, m_minus)


def graded_det(
    spec_plus: Spectrum,
    spec_minus: Spectrum,
    theta: float,
    convention: str = "plain",
) -> complex:
    """det(D+)/det(D-) (``plain``) or det(D+)/det(-D-) (``negate-minus``)."""
    if convention == "plain":
        minus = spec_minus
    elif convention == "negate-minus":
        minus = spec_minus.negated()
    else:
        raise SpectralError(f"unknown convention {convention!r}")
    return cmath.exp(ldet_theta(spec_plus, theta) - ldet_theta(minus, theta))
