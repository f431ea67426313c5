"""Model evaluation of the determinant formula for the Ruelle zeta function.

The regularized determinants of the flat Hodge Laplacians are replaced by
plain products over finite eigenvalue lists, which keeps every exponent and
sign identity of the formula exact.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .complexes import GradedComplex, laplacian_blocks
from .zeta import rho_norm


class ModelError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ModelSpectralData:
    """Per-degree eigenvalues standing in for the flat Hodge Laplacians."""

    d: int
    eigenvalues: tuple[np.ndarray, ...]
    dim_V_chi: int = 1
    vol_ratio: float = 1.0
    d_chi: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.d % 2 != 1 or self.d < 1:
            raise ModelError(f"d must be odd and positive, got {self.d}")
        eigs = tuple(np.asarray(e, dtype=complex).ravel() for e in self.eigenvalues)
        if len(eigs) != self.d + 1:
            raise ModelError(f"need d+1={self.d + 1} eigenvalue lists, got {len(eigs)}")
        object.__setattr__(self, "eigenvalues", eigs)
        zeros = tuple(int(np.sum(e == 0)) for e in eigs)
        if self.d_chi is None:
            object.__setattr__(self, "d_chi", zeros)
        elif tuple(self.d_chi) != zeros:
            raise ModelError(f"d_chi {tuple(self.d_chi)} disagrees with zero counts {zeros}")
        else:
            object.__setattr__(self, "d_chi", tuple(int(x) for x in self.d_chi))


def vol_sphere(d: int) -> float:
    """Volume of the unit d-sphere, 2 pi^{(d+1)/2} / Gamma((d+1)/2)."""
    return 2 * math.pi ** ((d + 1) / 2) / math.gamma((d + 1) / 2)


# --------------------------------------------------------------------------
# weights


def c_sigma(nu: Sequence[float], rho_m: Sequence[float], rho: float) -> float:
    """-|rho|^2 - |rho_m|^2 + |nu + rho_m|^2."""
    nu, rho_m = np.asarray(nu, dtype=float), np.asarray(rho_m, dtype=float)
    if nu.shape != rho_m.shape:
        raise ModelError(f"weight vectors differ in length: {nu.shape} vs {rho_m.shape}")
    return float(-rho**2 - rho_m @ rho_m + (nu + rho_m) @ (nu + rho_m))


def rho_m(d: int) -> np.ndarray:
    """Half-sum of positive roots of so(d-1), d-1 = 2n: (n-1, n-2, ..., 0)."""
    n = (d - 1) // 2
    return np.arange(n - 1, -1, -1, dtype=float)


def sigma_p_weight(d: int, p: int) -> np.ndarray:
    """Highest weight of Lambda^p of the standard representation of so(d-1).

    (1,...,1,0,...,0) with min(p, d-1-p) ones; at p = (d-1)/2 this is the
    weight of the summand sigma_+.
    """
    n = (d - 1) // 2
    if not 0 <= p <= d - 1:
        raise ModelError(f"p must lie in [0, {d - 1}]")
    q = min(p, d - 1 - p)
    w = np.zeros(n)
    w[:q] = 1.0
    return w


def c_sigma_p(d: int, p: int) -> float:
    return c_sigma(sigma_p_weight(d, p), rho_m(d), rho_norm(d))


# --------------------------------------------------------------------------
# determinant formula


@dataclass(frozen=True)
class DetFormulaValue:
    """Value of a product whose exactly vanishing factors are tracked separately.

    ``value`` is the product of all nonzero factors and ``order`` the net
    number of vanishing factors (positive: zero, negative: pole). For
    ``order == 0`` ``value`` is the value of the product.
    """

    value: complex
    order: int = 0

    def __complex__(self):
        if self.order > 0:
            return 0j
        if self.order < 0:
            return complex(math.inf, 0)
        return complex(self.value)


def _sum_logs(values: np.ndarray) -> tuple[complex, int]:
    """sum of principal logs of the nonzero values and the count of zeros."""
    nz = values[values != 0]
    re = math.fsum(float(np.log(abs(v))) for v in nz)
    im = math.fsum(cmath.phase(v) for v in nz)
    return complex(re, im), int(len(values) - len(nz))


def volume_factor(s: complex, model: ModelSpectralData) -> complex:
    d = model.d
    sign = (-1) ** ((d - 1) // 2 + 1)
    return cmath.exp(sign * math.pi * (d + 1) * model.dim_V_chi * model.vol_ratio * s)


def det_formula_eval(s: complex, model: ModelSpectralData, exponent: str = "degree") -> DetFormulaValue:
    """prod_{k=0}^{d-1} prod_{p=k}^{d-1} det(Delta_k + s(s + 2(|rho| - p)))^{e(k,p)} times the volume factor.

    ``exponent="degree"`` uses e = (-1)^k, which restricts at s = 0 to the
    product over det(Delta_k)^{(d-k)(-1)^k}; ``exponent="printed"`` uses
    e = (-1)^p.
    """
    if exponent not in ("degree", "printed"):
        raise ModelError(f"exponent must be 'degree' or 'printed', got {exponent!r}")
    d, s = model.d, complex(s)
    rho = rho_norm(d) if d >= 3 else 0.0
    log_total, order = [], 0
    for k in range(d):
        for p in range(k, d):
            e = (-1) ** k if exponent == "degree" else (-1) ** p
            shifted = model.eigenvalues[k] + s * (s + 2 * (rho - p))
            lg, zeros = _sum_logs(shifted)
            log_total.append(e * lg)
            order += e * zeros
    lg = complex(math.fsum(z.real for z in log_total), math.fsum(z.imag for z in log_total))
    return DetFormulaValue(cmath.exp(lg) * volume_factor(s, model), order)


@dataclass(frozen=True)
class RuelleAtZero:
    lower_form: complex
    upper_form: complex

    @property
    def value(self) -> complex:
        return self.lower_form

    @property
    def discrepancy(self) -> float:
        return abs(self.lower_form - self.upper_form) / max(abs(self.upper_form), 1e-300)


def _check_injective(model: ModelSpectralData):
    for k, e in enumerate(model.eigenvalues):
        if np.any(e == 0):
            raise ModelError(
                f"Laplacian in degree {k} has a kernel; R(0) is singular, see singularity_order"
            )


def exponent_forms(log_x: Sequence[complex], d: int) -> tuple[complex, complex]:
    """(sum_{k<d} (d-k)(-1)^k log x_k, sum_{k>=1} k(-1)^{k-1} log x_k)."""
    lower = [(d - k) * (-1) ** k * log_x[k] for k in range(d)]
    upper = [k * (-1) ** (k - 1) * log_x[k] for k in range(1, d + 1)]

    def fs(z):
        return complex(math.fsum(t.real for t in z), math.fsum(t.imag for t in z))

    return fs(lower), fs(upper)


def ruelle_at_zero_model(model: ModelSpectralData) -> RuelleAtZero:
    """prod_{k=0}^{d-1} det(Delta_k)^{(d-k)(-1)^k} and prod_{k=1}^{d} det(Delta_k)^{k(-1)^{k-1}}.

    Plain determinants raised to integer powers, so no branch is involved.
    """
    _check_injective(model)
    d = model.d
    dets = [complex(np.prod(e)) if e.size else 1 + 0j for e in model.eigenvalues]
    lower = upper = 1 + 0j
    for k in range(d):
        lower *= dets[k] ** ((d - k) * (-1) ** k)
    for k in range(1, d + 1):
        upper *= dets[k] ** (k * (-1) ** (k - 1))
    return RuelleAtZero(lower, upper)


def is_duality_symmetric(model: ModelSpectralData, rtol: float = 1e-10) -> bool:
    dets = [complex(np.prod(e)) if e.size else 1 + 0j for e in model.eigenvalues]
    d = model.d
    return all(abs(dets[k] - dets[d - k]) <= rtol * max(abs(dets[k]), 1e-300) for k in range(d + 1))


def singularity_order(d: int, d_chi: Sequence[int]) -> int:
    """sum_{k=0}^{(d-1)/2} (d+1-2k)(-1)^k d_{chi,k}."""
    top = (d - 1) // 2
    if len(d_chi) < top + 1:
        raise ModelError(f"need at least {top + 1} kernel dimensions, got {len(d_chi)}")
    return sum((d + 1 - 2 * k) * (-1) ** k * int(d_chi[k]) for k in range(top + 1))


# --------------------------------------------------------------------------
# bridge to the torsion side


def model_from_complex(cx: GradedComplex, zero_tol: float = 1e-12) -> ModelSpectralData:
    """Eigenvalues of B^2 per degree as model Laplacian spectra."""
    eigs = []
    for L in laplacian_blocks(cx):
        ev = np.linalg.eigvals(L) if L.size else np.zeros(0, dtype=complex)
        scale = max(1.0, float(np.max(np.abs(ev)))) if ev.size else 1.0
        ev = np.where(np.abs(ev) <= zero_tol * scale, 0, ev)
        eigs.append(ev)
    return ModelSpectralData(cx.d, tuple(eigs))


@dataclass(frozen=True)
class BridgeReport:
    ruelle_zero: complex
    cappell_miller: complex
    rel_err: float
    modulus_xi_rel_err: float
    exponent_discrepancy: float
    comparison_nu: int
    comparison_residual: float

    def as_dict(self):
        return dict(self.__dict__)


def torsion_bridge(cx: GradedComplex, eta_tr: float = 0.0, rank: int = 1) -> BridgeReport:
    """R(0) of the model built from ``cx`` against its Cappell-Miller torsion."""
    from . import torsion

    if cx.total_dim == 0:
        return BridgeReport(1 + 0j, 1 + 0j, 0.0, 0.0, 0.0, 0, 0.0)
    model = model_from_complex(cx)
    rz = ruelle_at_zero_model(model)
    cm = torsion.cappell_miller(cx).value
    osig = torsion.odd_signature(cx)
    theta = torsion.default_theta(osig)
    x = torsion.xi(osig, theta)
    T = torsion.refined_T(osig, theta, eta_tr, rank)
    et = torsion.eta_Bev(osig).eta
    phase = rz.value / (T**2 * cmath.exp(2j * math.pi * (et - rank * eta_tr)))
    nu, res = torsion.phase_integer(phase)
    return BridgeReport(
        rz.value,
        cm,
        abs(rz.value - cm) / abs(cm),
        abs(abs(rz.value) - math.exp(2 * x.real)) / math.exp(2 * x.real),
        rz.discrepancy,
        nu,
        res,
    )
