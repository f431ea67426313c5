"""Finite cochain complexes with a chirality operator."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .spectral import spectral_projector

#: relative singular-value threshold for rank decisions
RANK_RTOL = 1e-10


class ComplexError(ValueError):
    """Malformed or inconsistent complex data."""


def rank(M, rtol: float = RANK_RTOL) -> int:
    M = np.asarray(M)
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(s > rtol * s[0])) if s[0] > 0 else 0


def null_space(M, rtol: float = RANK_RTOL) -> np.ndarray:
    """Orthonormal basis (columns) of the kernel of ``M``."""
    M = np.asarray(M, dtype=complex)
    n = M.shape[1]
    if M.shape[0] == 0 or n == 0:
        return np.eye(n, dtype=complex)
    _, s, vh = np.linalg.svd(M)
    k = int(np.sum(s > rtol * s[0])) if s.size and s[0] > 0 else 0
    return vh[k:].conj().T


def col_space(M, rtol: float = RANK_RTOL) -> np.ndarray:
    """Orthonormal basis (columns) of the range of ``M``."""
    M = np.asarray(M, dtype=complex)
    if M.size == 0:
        return np.zeros((M.shape[0], 0), dtype=complex)
    u, s, _ = np.linalg.svd(M)
    k = int(np.sum(s > rtol * s[0])) if s[0] > 0 else 0
    return u[:, :k]


def complement(Q: np.ndarray, within: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of span(Q) inside span(within).

    Both arguments have orthonormal columns and span(Q) is contained in
    span(within).
    """
    n = within.shape[0]
    if within.shape[1] == 0:
        return np.zeros((n, 0), dtype=complex)
    resid = within - Q @ (Q.conj().T @ within)
    k = within.shape[1] - Q.shape[1]
    if k <= 0:
        return np.zeros((n, 0), dtype=complex)
    u, _, _ = np.linalg.svd(resid, full_matrices=False)
    return u[:, :k]


def _as_matrix(M, shape, name) -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    if M.size == 0:
        M = M.reshape(shape)
    if M.shape != shape:
        raise ComplexError(f"{name}: expected shape {shape}, got {M.shape}")
    return M


@dataclass(frozen=True, eq=False)
class GradedComplex:
    """0 -> C^0 -> ... -> C^d -> 0 with differential blocks and chirality blocks.

    ``partial[j]`` maps C^j -> C^{j+1} (j = 0..d-1) and ``gamma[j]`` maps
    C^j -> C^{d-j} (j = 0..d). ``gamma`` may be None for a bare complex.
    """

    d: int
    dims: tuple[int, ...]
    partial: tuple[np.ndarray, ...]
    gamma: tuple[np.ndarray, ...] | None = None

    def __post_init__(self):
        d, dims = self.d, tuple(int(n) for n in self.dims)
        if d < 0:
            raise ComplexError("length d must be nonnegative")
        if len(dims) != d + 1 or any(n < 0 for n in dims):
            raise ComplexError(f"dims must list d+1={d + 1} nonnegative integers, got {dims}")
        object.__setattr__(self, "dims", dims)
        partial = list(self.partial)
        # accept a trailing zero map out of the top degree
        if len(partial) == d + 1 and np.asarray(partial[-1]).size == 0:
            partial = partial[:-1]
        if len(partial) != d:
            raise ComplexError(f"expected {d} differential blocks, got {len(partial)}")
        partial = tuple(
            _as_matrix(p, (dims[j + 1], dims[j]), f"partial[{j}]") for j, p in enumerate(partial)
        )
        object.__setattr__(self, "partial", partial)
        if self.gamma is not None:
            if len(self.gamma) != d + 1:
                raise ComplexError(f"expected {d + 1} chirality blocks, got {len(self.gamma)}")
            gamma = tuple(
                _as_matrix(g, (dims[d - j], dims[j]), f"gamma[{j}]") for j, g in enumerate(self.gamma)
            )
            object.__setattr__(self, "gamma", gamma)

    @property
    def r(self) -> int:
        return (self.d + 1) // 2

    @property
    def total_dim(self) -> int:
        return sum(self.dims)

    @cached_property
    def offsets(self) -> tuple[int, ...]:
        return tuple(int(x) for x in np.concatenate([[0], np.cumsum(self.dims)]))

    def block(self, j: int) -> slice:
        return slice(self.offsets[j], self.offsets[j + 1])

    def dmap(self, j: int) -> np.ndarray:
        """Differential out of degree j; the zero map for j = d (or j < 0 into C^0)."""
        if j < 0:
            return np.zeros((self.dims[0], 0), dtype=complex)
        if j >= self.d:
            return np.zeros((0, self.dims[self.d]), dtype=complex)
        return self.partial[j]

    def require_chirality(self):
        if self.gamma is None:
            raise ComplexError("complex has no chirality operator")
        if self.d % 2 != 1:
            raise ComplexError(f"chirality requires odd length, got d={self.d}")

    @cached_property
    def D(self) -> np.ndarray:
        """Total differential on the direct sum of all C^j."""
        N = self.total_dim
        D = np.zeros((N, N), dtype=complex)
        for j, p in enumerate(self.partial):
            D[self.block(j + 1), self.block(j)] = p
        return D

    @cached_property
    def G(self) -> np.ndarray:
        """Total chirality operator."""
        self.require_chirality()
        N = self.total_dim
        G = np.zeros((N, N), dtype=complex)
        for j, g in enumerate(self.gamma):
            G[self.block(self.d - j), self.block(j)] = g
        return G

    def scaled(self, t: complex) -> "GradedComplex":
        """Same complex with every differential multiplied by ``t``."""
        return GradedComplex(self.d, self.dims, tuple(t * p for p in self.partial), self.gamma)

    def ranks(self) -> tuple[int, ...]:
        return tuple(rank(p) for p in self.partial)

    def betti(self) -> tuple[int, ...]:
        rk = (0,) + self.ranks() + (0,)
        return tuple(self.dims[j] - rk[j] - rk[j + 1] for j in range(self.d + 1))


def zero_complex(d: int) -> GradedComplex:
    dims = (0,) * (d + 1)
    return GradedComplex(
        d,
        dims,
        tuple(np.zeros((0, 0), dtype=complex) for _ in range(d)),
        tuple(np.zeros((0, 0), dtype=complex) for _ in range(d + 1)),
    )


@dataclass(frozen=True, eq=False)
class Subcomplex:
    """A subcomplex given by orthonormal bases ``basis[j]`` of subspaces of C^j."""

    ambient: GradedComplex
    basis: tuple[np.ndarray, ...]
    complex: GradedComplex


def restrict(cx: GradedComplex, basis) -> Subcomplex:
    """Restrict ``cx`` to the invariant subspaces spanned by ``basis`` (orthonormal)."""
    basis = tuple(np.asarray(U, dtype=complex) for U in basis)
    dims = tuple(U.shape[1] for U in basis)
    partial = tuple(
        _clean(basis[j + 1].conj().T @ cx.partial[j] @ basis[j], cx.partial[j]) for j in range(cx.d)
    )
    gamma = None
    if cx.gamma is not None:
        gamma = tuple(_clean(basis[cx.d - j].conj().T @ g @ basis[j], g) for j, g in enumerate(cx.gamma))
    return Subcomplex(cx, basis, GradedComplex(cx.d, dims, partial, gamma))


def _clean(block, ambient, rtol=1e-11):
    """Zero a restricted block that is roundoff relative to the ambient map."""
    if block.size and np.linalg.norm(block) <= rtol * max(1.0, np.linalg.norm(ambient)):
        return np.zeros_like(block)
    return block


def laplacian_blocks(cx: GradedComplex) -> list[np.ndarray]:
    """B^2 restricted to each C^j, with B = Gamma d + d Gamma."""
    B = cx.G @ cx.D + cx.D @ cx.G
    B2 = B @ B
    return [B2[cx.block(j), cx.block(j)] for j in range(cx.d + 1)]


def spectral_split(cx: GradedComplex, lam: float, tol: float = 1e-8):
    """Split into the spectral subcomplexes C_[0,lam] and C_(lam,inf) of B^2.

    Returns ``(low, high)`` as :class:`Subcomplex`. Raises if an eigenvalue
    modulus is within ``tol * ||B^2||`` of ``lam`` or if the projections fail
    to commute with the differential and chirality.
    """
    cx.require_chirality()
    blocks = laplacian_blocks(cx)
    scale = max([np.linalg.norm(b, 2) for b in blocks if b.size] + [1.0])
    low_basis, high_basis, projs = [], [], []
    for j, L in enumerate(blocks):
        n = L.shape[0]
        if n == 0:
            low_basis.append(np.zeros((0, 0), dtype=complex))
            high_basis.append(np.zeros((0, 0), dtype=complex))
            projs.append(np.zeros((0, 0), dtype=complex))
            continue
        ev = np.linalg.eigvals(L)
        if np.any(np.abs(np.abs(ev) - lam) <= tol * scale):
            raise ComplexError(f"lambda={lam} lies on |spec B^2| in degree {j}")
        k_low = int(np.sum(np.abs(ev) <= lam))
        P = spectral_projector(L, lambda z: abs(z) <= lam)
        projs.append(P)
        low_basis.append(_range_basis(P, k_low))
        high_basis.append(_range_basis(np.eye(n) - P, n - k_low))
    _check_commutes(cx, projs, scale)
    return restrict(cx, low_basis), restrict(cx, high_basis)


def _range_basis(P, k):
    if k == 0:
        return np.zeros((P.shape[0], 0), dtype=complex)
    u, _, _ = np.linalg.svd(P)
    return u[:, :k]


def _check_commutes(cx, projs, scale, rtol=1e-7):
    for j in range(cx.d):
        p = cx.partial[j]
        if p.size and np.linalg.norm(p @ projs[j] - projs[j + 1] @ p) > rtol * max(1.0, np.linalg.norm(p)):
            raise ComplexError(f"spectral projection does not commute with partial[{j}]")
    for j, g in enumerate(cx.gamma):
        if g.size and np.linalg.norm(g @ projs[j] - projs[cx.d - j] @ g) > rtol * max(1.0, np.linalg.norm(g)):
            raise ComplexError(f"spectral projection does not commute with gamma[{j}]")
