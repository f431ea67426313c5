"""Seeded fixture families: complexes with chirality and synthetic length spectra."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .complexes import ComplexError, GradedComplex
from .zeta import LengthSpectrum, PrimitiveClass

KINDS = ("toy-d1", "random-acyclic-complex", "hermitian-model-complex", "random-complex", "synthetic-spectrum")
MAX_REDRAWS = 10


class FixtureError(ValueError):
    pass


@dataclass(frozen=True)
class FixtureSpec:
    kind: str
    d: int = 3
    dims: tuple[int, ...] | None = None
    seed: int = 0
    n_classes: int = 5
    eps: float = 1e-2
    betti: tuple[int, ...] | None = None
    # synthetic spectra
    chi_dim: int = 2
    sigma_dim: int = 1
    l_max: float = 3.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise FixtureError(f"unknown fixture kind {self.kind!r}; expected one of {KINDS}")
        if self.d % 2 != 1 or self.d < 1:
            raise FixtureError(f"d must be odd and positive, got {self.d}")
        if self.dims is not None:
            dims = tuple(int(n) for n in self.dims)
            object.__setattr__(self, "dims", dims)
            if len(dims) != self.d + 1:
                raise FixtureError(f"dims must have d+1={self.d + 1} entries")
            if dims != dims[::-1]:
                raise FixtureError(f"dims must be palindromic, got {dims}")
        if not 0 <= self.seed < 2**64:
            raise FixtureError("seed must be a 64-bit unsigned integer")


def _rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed))


def _randn(rng, m, n):
    return (rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))) / math.sqrt(2)


def _rand_gl(rng, n):
    """Random well-conditioned invertible matrix."""
    return _randn(rng, n, n) + 1.5 * math.sqrt(max(n, 1)) * np.eye(n)


def _rand_unitary(rng, n):
    q, r = np.linalg.qr(_randn(rng, n, n))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def acyclic_ranks(dims) -> tuple[int, ...]:
    """rank d_j forced by exactness: a_j = dim C^j - a_{j-1}."""
    ranks, prev = [], 0
    for n in dims[:-1]:
        a = n - prev
        ranks.append(a)
        prev = a
    if any(a < 0 for a in ranks) or prev != dims[-1]:
        raise FixtureError(f"dims {tuple(dims)} admit no acyclic complex")
    return tuple(ranks)


def default_dims(d: int, rng) -> tuple[int, ...]:
    """Random palindromic dims of an acyclic complex of length d (ranks 1 or 2)."""
    r = (d + 1) // 2
    half = [int(rng.integers(1, 3)) for _ in range(r)]
    ranks = half + half[-2::-1]
    dims = [ranks[0]] + [ranks[j - 1] + ranks[j] for j in range(1, d)] + [ranks[-1]]
    return tuple(dims)


def _scaffold(dims, ranks, betti, blocks):
    """Differential on C^j = B^j + H^j + A^j mapping A^j onto B^{j+1} by ``blocks[j]``."""
    d = len(dims) - 1
    partial = []
    for j in range(d):
        p = np.zeros((dims[j + 1], dims[j]), dtype=complex)
        a_prev = ranks[j - 1] if j > 0 else 0
        col = a_prev + betti[j]
        p[: ranks[j], col: col + ranks[j]] = blocks[j]
        partial.append(p)
    return partial


def _random_involution(rng, dims, d):
    gamma = [None] * (d + 1)
    for j in range((d + 1) // 2):
        G = _rand_gl(rng, dims[j])
        gamma[j] = G
        gamma[d - j] = np.linalg.inv(G)
    return gamma


def _conjugate(partial, gamma, S, d):
    Sinv = [np.linalg.inv(s) for s in S]
    partial = [S[j + 1] @ p @ Sinv[j] for j, p in enumerate(partial)]
    gamma = [S[d - j] @ g @ Sinv[j] for j, g in enumerate(gamma)]
    return partial, gamma


def _bijective(cx: GradedComplex) -> bool:
    from .torsion import validate

    return validate(cx).assumption2


def gen_complex(spec: FixtureSpec) -> GradedComplex:
    if spec.kind == "toy-d1":
        return toy_complex(2.0)
    if spec.kind == "synthetic-spectrum":
        raise FixtureError("synthetic-spectrum is generated by gen_spectrum")
    rng = _rng(spec.seed)
    for _ in range(MAX_REDRAWS):
        if spec.kind == "random-acyclic-complex":
            cx = _random_acyclic(spec, rng)
        elif spec.kind == "hermitian-model-complex":
            cx = _hermitian_model(spec, rng)
        else:
            cx = _random_complex(spec, rng)
            return cx
        if _bijective(cx):
            return cx
    raise FixtureError(f"B was singular in {MAX_REDRAWS} draws for {spec.kind} seed {spec.seed}")


def toy_complex(a: complex = 2.0) -> GradedComplex:
    """0 -> C -> C -> 0 with d = (a) and Gamma the identity cross-maps."""
    one = np.ones((1, 1), dtype=complex)
    return GradedComplex(1, (1, 1), (a * one,), (one, one))


def _random_acyclic(spec, rng):
    d = spec.d
    dims = spec.dims or default_dims(d, rng)
    ranks = acyclic_ranks(dims)
    partial = _scaffold(dims, ranks, (0,) * (d + 1), [_rand_gl(rng, a) for a in ranks])
    gamma = _random_involution(rng, dims, d)
    S = [_rand_gl(rng, n) for n in dims]
    partial, gamma = _conjugate(partial, gamma, S, d)
    return GradedComplex(d, dims, tuple(partial), tuple(gamma))


def _hermitian_model(spec, rng):
    """Unitary Gamma with Gamma d Gamma = d^*, deformed by ``eps``.

    In coordinates C^j = B^j + A^j the chirality swaps B^j with A^{d-j};
    d on A^j is f_j with f_{d-1-j} = f_j^* and f_{r-1} Hermitian, which makes
    B self-adjoint at eps = 0.
    """
    d, r = spec.d, (spec.d + 1) // 2
    dims = spec.dims or default_dims(d, rng)
    ranks = acyclic_ranks(dims)
    blocks = [None] * d
    for j in range(r - 1):
        f = _rand_gl(rng, ranks[j])
        blocks[j], blocks[d - 1 - j] = f, f.conj().T
    h = _randn(rng, ranks[r - 1], ranks[r - 1])
    h = h + h.conj().T
    # keep the middle block safely invertible
    w, v = np.linalg.eigh(h)
    w = np.sign(w) * (np.abs(w) + 1.0)
    blocks[r - 1] = (v * w) @ v.conj().T
    blocks = [b + spec.eps * _randn(rng, *b.shape) for b in blocks]
    partial = _scaffold(dims, ranks, (0,) * (d + 1), blocks)
    gamma = []
    for j in range(d + 1):
        a_prev = ranks[j - 1] if j > 0 else 0  # dim B^j
        a_j = ranks[j] if j < d else 0  # dim A^j
        g = np.zeros((dims[d - j], dims[j]), dtype=complex)
        # B^j -> A^{d-j} (last block of C^{d-j}); A^j -> B^{d-j} (first block)
        g[dims[d - j] - a_prev:, :a_prev] = np.eye(a_prev)
        g[:a_j, a_prev:] = np.eye(a_j)
        gamma.append(g)
    S = [scipy.linalg.expm(spec.eps * _randn(rng, n, n)) for n in dims]
    partial, gamma = _conjugate(partial, gamma, S, d)
    return GradedComplex(d, dims, tuple(partial), tuple(gamma))


def _random_complex(spec, rng):
    """Complex with cohomology: palindromic Betti numbers and a random involution."""
    d = spec.d
    if spec.dims is not None and spec.betti is not None:
        dims, betti = spec.dims, spec.betti
    elif spec.dims is None:
        base = default_dims(d, rng)
        half = [int(rng.integers(0, 2)) for _ in range((d + 1) // 2)]
        betti = tuple(half + half[::-1])
        dims = tuple(n + b for n, b in zip(base, betti))
    else:
        raise FixtureError("random-complex needs both dims and betti, or neither")
    betti = tuple(betti)
    if len(betti) != d + 1 or betti != betti[::-1]:
        raise FixtureError("betti numbers must be palindromic of length d+1")
    ranks = acyclic_ranks(tuple(n - b for n, b in zip(dims, betti)))
    partial = _scaffold(dims, ranks, betti, [_rand_gl(rng, a) for a in ranks])
    gamma = _random_involution(rng, dims, d)
    S = [_rand_gl(rng, n) for n in dims]
    partial, gamma = _conjugate(partial, gamma, S, d)
    return GradedComplex(d, dims, tuple(partial), tuple(gamma))


# --------------------------------------------------------------------------
# length spectra


def gen_spectrum(spec: FixtureSpec) -> LengthSpectrum:
    """Synthetic length spectrum with near-unitary twists.

    Lengths increase in [0.5, l_max]; chi = unitary * expm(eps * random).
    The growth abscissa is the largest log ||chi|| / l plus log(1 + N)/l_min.
    """
    d = spec.d
    if d < 3:
        raise FixtureError("length spectra need d >= 3")
    rng = _rng(spec.seed)
    N = spec.n_classes
    lengths = np.sort(rng.uniform(0.5, spec.l_max, N))
    classes = []
    for l in lengths:
        angles = tuple(float(a) for a in rng.uniform(-math.pi, math.pi, (d - 1) // 2))
        chi = _rand_unitary(rng, spec.chi_dim) @ scipy.linalg.expm(spec.eps * _randn(rng, spec.chi_dim, spec.chi_dim))
        sig = tuple(complex(np.exp(1j * t)) for t in rng.uniform(-math.pi, math.pi, spec.sigma_dim))
        classes.append(PrimitiveClass(float(l), angles, chi, sig))
    if classes:
        growth = max(max(0.0, math.log(np.linalg.norm(c.chi, 2))) / c.length for c in classes)
        growth += math.log(1 + N) / float(lengths[0])
    else:
        growth = 0.0
    return LengthSpectrum(d, tuple(classes), growth)
