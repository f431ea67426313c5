"""Determinant lines of finite complexes and the refined torsion of a chirality.

Every element of a determinant line is stored as one complex coordinate
against a fixed reference element: for det(C^j) the wedge of the standard
basis vectors in order, for det(C*) the alternating tensor product of those,
and for det(H*) the wedge of the representatives held by a
:class:`CohomologyFrame`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .complexes import (
    ComplexError,
    GradedComplex,
    col_space,
    complement,
    null_space,
    rank,
)


class DetLineError(ValueError):
    pass


@dataclass(frozen=True)
class GradedDims:
    d: int
    dims: tuple[int, ...]

    def __post_init__(self):
        if self.d % 2 != 1 or self.d < 1:
            raise DetLineError(f"d must be odd and positive, got {self.d}")
        if len(self.dims) != self.d + 1:
            raise DetLineError("dims must have length d+1")


@dataclass(frozen=True)
class DetLineElement:
    """``coeff`` times the reference element of det(V_1 + ... + V_k).

    ``tag`` names the summands in order and ``dims`` their dimensions;
    ``dual`` marks an element of the dual line.
    """

    coeff: complex
    tag: tuple[str, ...]
    dims: tuple[int, ...]
    dual: bool = False

    def inverse(self) -> "DetLineElement":
        if self.coeff == 0:
            raise DetLineError("zero element has no inverse")
        return DetLineElement(1 / self.coeff, self.tag, self.dims, not self.dual)

    def reorder(self, order: Sequence[int]) -> "DetLineElement":
        """Express the same element against the reference basis in summand ``order``."""
        order = list(order)
        if sorted(order) != list(range(len(self.tag))):
            raise DetLineError(f"{order} is not a permutation of the summands")
        return DetLineElement(
            self.coeff * block_permutation_sign(self.dims, order),
            tuple(self.tag[i] for i in order),
            tuple(self.dims[i] for i in order),
            self.dual,
        )


def block_permutation_sign(dims: Sequence[int], order: Sequence[int]) -> int:
    """Sign of the permutation moving blocks of sizes ``dims`` into ``order``."""
    parity = 0
    for a in range(len(order)):
        for b in range(a + 1, len(order)):
            if order[a] > order[b]:
                parity += dims[order[a]] * dims[order[b]]
    return -1 if parity % 2 else 1


def fuse(a: DetLineElement, b: DetLineElement) -> DetLineElement:
    """Fusion isomorphism det(V) (x) det(W) -> det(V + W) in coordinates."""
    if set(a.tag) & set(b.tag):
        raise DetLineError(f"summands overlap: {a.tag} and {b.tag}")
    if a.dual != b.dual:
        raise DetLineError("cannot fuse an element with a dual element")
    return DetLineElement(a.coeff * b.coeff, a.tag + b.tag, a.dims + b.dims, a.dual)


# --------------------------------------------------------------------------
# split choices and cohomology frames


@dataclass(frozen=True, eq=False)
class SplitChoice:
    """Bases (columns) of A^j and H^j with C^j = d(A^{j-1}) + H^j + A^j."""

    A: tuple[np.ndarray, ...]
    H: tuple[np.ndarray, ...]


def default_split(cx: GradedComplex, rng: np.random.Generator | None = None) -> SplitChoice:
    """Orthogonal split choice; with ``rng``, a random non-orthogonal one."""
    A, H = [], []
    for j in range(cx.d + 1):
        n = cx.dims[j]
        K = null_space(cx.dmap(j))
        Bj = col_space(cx.dmap(j - 1)) if j > 0 else np.zeros((n, 0), dtype=complex)
        Hj = complement(Bj, K)
        Aj = complement(K, np.eye(n, dtype=complex))
        if rng is not None:
            Hj = Hj @ _rand_gl(rng, Hj.shape[1]) + Bj @ _randn(rng, Bj.shape[1], Hj.shape[1])
            Aj = Aj @ _rand_gl(rng, Aj.shape[1]) + K @ _randn(rng, K.shape[1], Aj.shape[1])
        A.append(Aj)
        H.append(Hj)
    return SplitChoice(tuple(A), tuple(H))


def _randn(rng, m, n):
    return rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))


def _rand_gl(rng, n):
    return _randn(rng, n, n) + 2 * np.sqrt(n) * np.eye(n)


def check_split(cx: GradedComplex, choice: SplitChoice, rtol: float = 1e-8):
    d = cx.d
    if len(choice.A) != d + 1 or len(choice.H) != d + 1:
        raise DetLineError("split choice needs d+1 blocks")
    if choice.A[d].shape[1] != 0:
        raise DetLineError("A^d must be zero")
    for j in range(d + 1):
        A, H = choice.A[j], choice.H[j]
        dA = cx.dmap(j) @ A
        if rank(dA) != A.shape[1]:
            raise DetLineError(f"partial is not injective on A^{j}")
        if H.size and np.linalg.norm(cx.dmap(j) @ H) > rtol * max(1.0, np.linalg.norm(cx.dmap(j))) * np.linalg.norm(H):
            raise DetLineError(f"H^{j} is not contained in the kernel")
        Bj = cx.dmap(j - 1) @ choice.A[j - 1] if j > 0 else np.zeros((cx.dims[0], 0))
        M = np.hstack([Bj, H, A])
        if M.shape[0] != M.shape[1] or rank(M) != M.shape[0]:
            raise DetLineError(f"B^{j} + H^{j} + A^{j} is not a direct sum decomposition of C^{j}")


@dataclass(frozen=True, eq=False)
class CohomologyFrame:
    """Reference representatives of H^j and a basis of the boundaries, per degree."""

    reps: tuple[np.ndarray, ...]
    boundaries: tuple[np.ndarray, ...]

    def coordinate(self, j: int, vectors: np.ndarray, rtol: float = 1e-7) -> complex:
        """det of the matrix expressing the classes of ``vectors`` in the reference classes."""
        R, Bd = self.reps[j], self.boundaries[j]
        if vectors.shape[1] != R.shape[1]:
            raise DetLineError(f"degree {j}: expected {R.shape[1]} classes, got {vectors.shape[1]}")
        if R.shape[1] == 0:
            return 1.0 + 0j
        M = np.hstack([R, Bd])
        sol, *_ = np.linalg.lstsq(M, vectors, rcond=None)
        if np.linalg.norm(M @ sol - vectors) > rtol * max(1.0, np.linalg.norm(vectors)):
            raise DetLineError(f"degree {j}: vectors are not cocycles of the frame's complex")
        return complex(np.linalg.det(sol[: R.shape[1]]))


def default_frame(cx: GradedComplex) -> CohomologyFrame:
    reps, bds = [], []
    for j in range(cx.d + 1):
        K = null_space(cx.dmap(j))
        Bj = col_space(cx.dmap(j - 1)) if j > 0 else np.zeros((cx.dims[0], 0), dtype=complex)
        reps.append(complement(Bj, K))
        bds.append(Bj)
    return CohomologyFrame(tuple(reps), tuple(bds))


# --------------------------------------------------------------------------
# sign integers


def sign_N(dims_A: Sequence[int]) -> int:
    """1/2 sum_j dim A^j (dim A^j + (-1)^{j+1}), in exact integers."""
    twice = sum(a * (a + (-1) ** (j + 1)) for j, a in enumerate(dims_A))
    return twice // 2


def sign_R(dims: Sequence[int], d: int) -> int:
    """1/2 sum_{j<r} dim C^j (dim C^j + (-1)^{r+j}), in exact integers."""
    r = (d + 1) // 2
    twice = sum(dims[j] * (dims[j] + (-1) ** (r + j)) for j in range(r))
    return twice // 2


# --------------------------------------------------------------------------
# phi, c_Gamma, rho_Gamma


def _tag(cx):
    return tuple(f"H{j}" for j in range(cx.d + 1)), tuple(0 for _ in range(cx.d + 1))


def phi(
    cx: GradedComplex,
    choice: SplitChoice | None = None,
    c_bases: Sequence[np.ndarray] | None = None,
    frame: CohomologyFrame | None = None,
    embed: Sequence[np.ndarray] | None = None,
) -> DetLineElement:
    """Image under phi_{C*} of c_0 (x) c_1^{-1} (x) ... in det H*.

    ``c_bases[j]`` is a basis matrix of C^j whose wedge is c_j (default: the
    standard basis, i.e. the reference element). ``embed``/``frame`` express
    the resulting classes against the cohomology frame of an ambient complex
    containing ``cx`` through the basis matrices ``embed[j]``.
    """
    choice = choice or default_split(cx)
    check_split(cx, choice)
    if embed is None:
        embed = [np.eye(n, dtype=complex) for n in cx.dims]
        frame = frame or default_frame(cx)
    elif frame is None:
        raise DetLineError("an embedding needs the ambient cohomology frame")
    value = complex((-1) ** sign_N([a.shape[1] for a in choice.A]))
    for j in range(cx.d + 1):
        n = cx.dims[j]
        C = np.eye(n, dtype=complex) if c_bases is None else np.asarray(c_bases[j], dtype=complex)
        Bj = cx.dmap(j - 1) @ choice.A[j - 1] if j > 0 else np.zeros((n, 0), dtype=complex)
        M = np.hstack([Bj, choice.H[j], choice.A[j]])
        t = np.linalg.det(C) / np.linalg.det(M)
        k = frame.coordinate(j, np.asarray(embed[j]) @ choice.H[j])
        value *= (t * k) ** ((-1) ** j)
    tag, dims = _tag(cx)
    return DetLineElement(value, tag, dims)


def c_gamma(cx: GradedComplex, c_bases: Sequence[np.ndarray] | None = None) -> DetLineElement:
    """The element c_Gamma of det C* as a coordinate against the reference element."""
    check_chirality(cx)
    d, r = cx.d, cx.r
    value = complex((-1) ** sign_R(cx.dims, d))
    for j in range(r):
        n = cx.dims[j]
        C = np.eye(n, dtype=complex) if c_bases is None else np.asarray(c_bases[j], dtype=complex)
        value *= np.linalg.det(C) ** ((-1) ** j)
        value *= np.linalg.det(cx.gamma[j] @ C) ** ((-1) ** (d - j))
    return DetLineElement(value, tuple(f"C{j}" for j in range(d + 1)), cx.dims)


def check_chirality(cx: GradedComplex, rtol: float = 1e-8):
    cx.require_chirality()
    d = cx.d
    for j in range(d + 1):
        if cx.dims[j] != cx.dims[d - j]:
            raise DetLineError(f"dims are not palindromic at degree {j}")
        g = cx.gamma[d - j] @ cx.gamma[j]
        if g.size and np.linalg.norm(g - np.eye(cx.dims[j])) > rtol * max(1.0, np.linalg.norm(cx.gamma[j]) ** 2):
            raise DetLineError(f"chirality is not an involution on degree {j}")


def refined_torsion(
    cx: GradedComplex,
    choice: SplitChoice | None = None,
    frame: CohomologyFrame | None = None,
    embed: Sequence[np.ndarray] | None = None,
) -> DetLineElement:
    """rho_Gamma = phi_{C*}(c_Gamma) as a coordinate in det H*."""
    cg = c_gamma(cx)
    image = phi(cx, choice, frame=frame, embed=embed)
    return DetLineElement(cg.coeff * image.coeff, image.tag, image.dims)


__all__ = [
    "ComplexError",
    "CohomologyFrame",
    "DetLineElement",
    "DetLineError",
    "GradedDims",
    "SplitChoice",
    "block_permutation_sign",
    "c_gamma",
    "check_split",
    "default_frame",
    "default_split",
    "fuse",
    "phi",
    "refined_torsion",
    "sign_N",
    "sign_R",
]
