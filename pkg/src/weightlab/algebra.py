"""Finite-dimensional C*-algebras as direct sums of full matrix blocks.

An algebra is described by its block dimensions [n_1, ..., n_k]; an element
is a tuple of complex n_j x n_j matrices.  The canonical representation is
the block-diagonal embedding into N x N matrices with N = sum(n_j).

Coordinates: an element is flattened block by block, each block row-major,
giving a vector of length sum(n_j^2).  The matrix-unit basis e_{pq} of block
j sits at coordinate offset_j + p*n_j + q.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class AlgebraError(ValueError):
    pass


class ShapeError(AlgebraError):
    pass


class DomainError(AlgebraError):
    pass


@dataclass(frozen=True)
class FdAlgebra:
    """A finite direct sum of full matrix algebras."""

    block_dims: tuple[int, ...]

    def __post_init__(self):
        if len(self.block_dims) == 0:
            raise AlgebraError("algebra needs at least one block")
        if any(n < 1 for n in self.block_dims):
            raise AlgebraError("block dimensions must be >= 1")
        object.__setattr__(self, "block_dims", tuple(int(n) for n in self.block_dims))

    @property
    def total_dim(self) -> int:
        return sum(self.block_dims)

    @property
    def coord_dim(self) -> int:
        return sum(n * n for n in self.block_dims)

    @property
    def num_blocks(self) -> int:
        return len(self.block_dims)

    def block_offsets(self):
        """Coordinate offset of each block in the flattened vector."""
        offs = [0]
        for n in self.block_dims:
            offs.append(offs[-1] + n * n)
        return offs

    # ---- element constructors -------------------------------------------

    def element(self, blocks) -> "Element":
        return Element(self, tuple(np.asarray(b, dtype=complex) for b in blocks))

    def zero(self) -> "Element":
        return self.element([np.zeros((n, n)) for n in self.block_dims])

    def unit(self) -> "Element":
        return self.element([np.eye(n) for n in self.block_dims])

    def matrix_unit(self, block: int, p: int, q: int) -> "Element":
        blocks = [np.zeros((n, n), dtype=complex) for n in self.block_dims]
        blocks[block][p, q] = 1.0
        return self.element(blocks)

    def basis(self):
        """The matrix-unit basis in coordinate order."""
        for j, n in enumerate(self.block_dims):
            for p in range(n):
                for q in range(n):
                    yield self.matrix_unit(j, p, q)

    def from_vec(self, v) -> "Element":
        v = np.asarray(v, dtype=complex)
        if v.shape != (self.coord_dim,):
            raise ShapeError(f"expected coordinate vector of length {self.coord_dim}")
        blocks, k = [], 0
        for n in self.block_dims:
            blocks.append(v[k:k + n * n].reshape(n, n))
            k += n * n
        return self.element(blocks)

    def random_element(self, rng: np.random.Generator, scale: float = 1.0) -> "Element":
        return self.element([
            scale * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
            for n in self.block_dims
        ])

    def random_hermitian(self, rng: np.random.Generator, scale: float = 1.0) -> "Element":
        a = self.random_element(rng, scale)
        return 0.5 * (a + a.star())

    def random_positive(self, rng: np.random.Generator, scale: float = 1.0) -> "Element":
        a = self.random_element(rng, scale)
        return a.star() @ a

    def random_unitary(self, rng: np.random.Generator) -> "Element":
        blocks = []
        for n in self.block_dims:
            z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            q, r = np.linalg.qr(z)
            q = q @ np.diag(np.diag(r) / np.abs(np.diag(r)))
            blocks.append(q)
        return self.element(blocks)

    # ---- coordinate matrices of structural maps -------------------------

    def left_mul_matrix(self, a: "Element") -> np.ndarray:
        """Matrix of x -> a x on coordinates (block-diagonal kron(a_j, I))."""
        mats = [np.kron(a.blocks[j], np.eye(n)) for j, n in enumerate(self.block_dims)]
        return _block_diag(mats)

    def right_mul_matrix(self, a: "Element") -> np.ndarray:
        """Matrix of x -> x a on coordinates (block-diagonal kron(I, a_j^T))."""
        mats = [np.kron(np.eye(n), a.blocks[j].T) for j, n in enumerate(self.block_dims)]
        return _block_diag(mats)

    def adjoint_matrix(self) -> np.ndarray:
        """Real matrix P with coords(a*) = P @ conj(coords(a))."""
        d = self.coord_dim
        P = np.zeros((d, d))
        offs = self.block_offsets()
        for j, n in enumerate(self.block_dims):
            for p in range(n):
                for q in range(n):
                    P[offs[j] + q * n + p, offs[j] + p * n + q] = 1.0
        return P


def make_algebra(block_dims) -> FdAlgebra:
    return FdAlgebra(tuple(block_dims))


class Element:
    """A block-diagonal matrix in a fixed FdAlgebra."""

    __slots__ = ("algebra", "blocks")

    def __init__(self, algebra: FdAlgebra, blocks):
        blocks = tuple(np.asarray(b, dtype=complex) for b in blocks)
        if len(blocks) != algebra.num_blocks:
            raise ShapeError("wrong number of blocks")
        for b, n in zip(blocks, algebra.block_dims):
            if b.shape != (n, n):
                raise ShapeError(f"block shape {b.shape} does not match dimension {n}")
        self.algebra = algebra
        self.blocks = blocks

    def _check(self, other: "Element"):
        if self.algebra != other.algebra:
            raise ShapeError("elements belong to different algebras")

    def __add__(self, other):
        self._check(other)
        return Element(self.algebra, [a + b for a, b in zip(self.blocks, other.blocks)])

    def __sub__(self, other):
        self._check(other)
        return Element(self.algebra, [a - b for a, b in zip(self.blocks, other.blocks)])

    def __neg__(self):
        return Element(self.algebra, [-a for a in self.blocks])

    def __matmul__(self, other):
        self._check(other)
        return Element(self.algebra, [a @ b for a, b in zip(self.blocks, other.blocks)])

    def __mul__(self, c):
        return Element(self.algebra, [c * a for a in self.blocks])

    __rmul__ = __mul__

    def star(self) -> "Element":
        return Element(self.algebra, [b.conj().T for b in self.blocks])

    def to_vec(self) -> np.ndarray:
        return np.concatenate([b.reshape(-1) for b in self.blocks])

    def to_canonical(self) -> np.ndarray:
        """The block-diagonal N x N matrix of the canonical representation."""
        return _block_diag(list(self.blocks))

    def norm(self) -> float:
        """Operator norm: largest singular value across blocks."""
        return max(np.linalg.norm(b, 2) for b in self.blocks)

    def frobenius(self) -> float:
        return float(np.sqrt(sum(np.linalg.norm(b) ** 2 for b in self.blocks)))

    def trace(self) -> complex:
        return sum(np.trace(b) for b in self.blocks)

    def is_hermitian(self, tol: float = 1e-10) -> bool:
        return all(np.linalg.norm(b - b.conj().T, 2) <= tol for b in self.blocks)

    def __repr__(self):
        return f"Element(blocks={self.algebra.block_dims})"


def is_positive(a: Element, tol: float = 1e-10) -> bool:
    """Hermitian within tol and all eigenvalues >= -tol."""
    if not a.is_hermitian(tol):
        return False
    for b in a.blocks:
        w = np.linalg.eigvalsh(0.5 * (b + b.conj().T))
        if w.min() < -tol:
            return False
    return True


def func_calc(a: Element, f, hermitian_tol: float = 1e-10) -> Element:
    """Apply a scalar function to a Hermitian element blockwise.

    The function acts on the spectrum (eigendecomposition with eigenvalues
    ascending), never on individual eigenvectors, so degenerate eigenspaces
    are handled consistently.
    """
    if not a.is_hermitian(hermitian_tol):
        raise DomainError("functional calculus requires a Hermitian element")
    out = []
    for b in a.blocks:
        w, v = np.linalg.eigh(0.5 * (b + b.conj().T))
        out.append(v @ np.diag(np.asarray([f(x) for x in w], dtype=complex)) @ v.conj().T)
    return Element(a.algebra, out)


def positive_power(a: Element, exponent: complex, tol: float = 1e-10) -> Element:
    """a^exponent for positive definite a (needed for fractional and it powers)."""
    for b in a.blocks:
        w = np.linalg.eigvalsh(0.5 * (b + b.conj().T))
        if w.min() <= tol:
            raise DomainError("fractional/complex powers need a positive definite element")
    return func_calc(a, lambda x: np.power(complex(x), exponent))


def commutant(generators, dim: int):
    """Orthonormal basis (Frobenius) of {X : X A_i = A_i X for all i}.

    Solved as the nullspace of the stacked system vec(X A - A X) over
    row-major vectorization.
    """
    if len(generators) == 0:
        rows = np.zeros((1, dim * dim))
    else:
        rows = np.vstack([
            np.kron(np.eye(dim), np.asarray(A).T) - np.kron(np.asarray(A), np.eye(dim))
            for A in generators
        ])
    # nullspace via SVD; right singular vectors are orthonormal already
    _, s, vh = np.linalg.svd(rows)
    smax = s.max() if s.size else 0.0
    cutoff = max(1e-12 * smax, 1e-14)
    rank = int(np.sum(s > cutoff))
    null = vh[rank:].conj()
    return [v.reshape(dim, dim) for v in null]


def span_projector(mats) -> np.ndarray:
    """Orthogonal projector (in vec space) onto the complex span of matrices."""
    if len(mats) == 0:
        d = 0
        return np.zeros((d, d))
    rows = np.vstack([np.asarray(m).reshape(1, -1) for m in mats])
    _, s, vh = np.linalg.svd(rows, full_matrices=False)
    rank = int(np.sum(s > 1e-10 * s.max()))
    q = vh[:rank]
    return q.conj().T @ q


def span_distance(mats_a, mats_b) -> float:
    """Frobenius distance between span projectors; 0 iff equal spans."""
    return float(np.linalg.norm(span_projector(mats_a) - span_projector(mats_b)))


def _block_diag(mats):
    n = sum(m.shape[0] for m in mats)
    out = np.zeros((n, n), dtype=complex)
    k = 0
    for m in mats:
        d = m.shape[0]
        out[k:k + d, k:k + d] = m
        k += d
    return out
