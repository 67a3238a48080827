"""Positive functionals with density blocks and the domination order.

A weight here is a finite positive functional phi(x) = sum_j trace(D_j x_j)
with per-block PSD densities.  The directed set of dominated functionals is
emulated by the canonical scalar chain (k/(k+1)) * phi, which turns every
net statement into a sequence limit with an explicit rate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import DomainError, Element, FdAlgebra, ShapeError, is_positive


class DegenerateWeightError(DomainError):
    pass


class DominationError(DomainError):
    pass


@dataclass(frozen=True)
class Functional:
    """A linear functional theta(a) = sum_j trace(T_j a_j)."""

    algebra: FdAlgebra
    rep: tuple

    def __post_init__(self):
        rep = tuple(np.asarray(t, dtype=complex) for t in self.rep)
        for t, n in zip(rep, self.algebra.block_dims):
            if t.shape != (n, n):
                raise ShapeError("representative block shape mismatch")
        object.__setattr__(self, "rep", rep)

    def __call__(self, a: Element) -> complex:
        if a.algebra != self.algebra:
            raise ShapeError("element from a different algebra")
        return complex(sum(np.trace(t @ b) for t, b in zip(self.rep, a.blocks)))

    def trace_norm(self) -> float:
        return float(sum(np.abs(np.linalg.svd(t, compute_uv=False)).sum() for t in self.rep))

    def conjugate(self) -> "Functional":
        """The functional a -> conj(theta(a*))."""
        return Functional(self.algebra, tuple(t.conj().T for t in self.rep))

    def sandwich(self, a: Element, b: Element) -> "Functional":
        """The functional y -> theta(b* y a)  (the 'a theta b*' composite)."""
        return Functional(self.algebra, tuple(
            ab @ t @ bb.conj().T for t, ab, bb in zip(self.rep, a.blocks, b.blocks)))


class Weight(Functional):
    """A positive functional with PSD density blocks."""

    def __init__(self, algebra: FdAlgebra, density):
        density = tuple(np.asarray(d, dtype=complex) for d in density)
        for d in density:
            h = 0.5 * (d + d.conj().T)
            if np.linalg.norm(d - h, 2) > 1e-10:
                raise DomainError("density blocks must be Hermitian")
            if np.linalg.eigvalsh(h).min() < -1e-10:
                raise DomainError("density blocks must be PSD")
        super().__init__(algebra, density)

    @property
    def density(self):
        return self.rep

    def faithful(self, tol: float = 1e-10) -> bool:
        return all(np.linalg.eigvalsh(0.5 * (d + d.conj().T)).min() > tol
                   for d in self.density)

    def is_zero(self, tol: float = 1e-14) -> bool:
        return all(np.linalg.norm(d) <= tol for d in self.density)

    def support(self):
        """Per-block range projections of the densities."""
        projs = []
        for d in self.density:
            w, v = np.linalg.eigh(0.5 * (d + d.conj().T))
            keep = w > 1e-12 * max(w.max(), 1e-300)
            q = v[:, keep]
            projs.append(q @ q.conj().T)
        return projs

    def scale(self, c: float) -> "Weight":
        if c < 0:
            raise DomainError("weights scale by nonnegative reals")
        return Weight(self.algebra, tuple(c * d for d in self.density))

    def gram_matrix(self) -> np.ndarray:
        """Gram matrix G[i,k] = phi(b_i* b_k) on the matrix-unit basis.

        Per block this is kron(I_n, D^T).
        """
        blocks = [np.kron(np.eye(n), d.T)
                  for n, d in zip(self.algebra.block_dims, self.density)]
        out = np.zeros((self.algebra.coord_dim, self.algebra.coord_dim), dtype=complex)
        k = 0
        for b in blocks:
            m = b.shape[0]
            out[k:k + m, k:k + m] = b
            k += m
        return out


def trace_weight(algebra: FdAlgebra) -> Weight:
    return Weight(algebra, tuple(np.eye(n) for n in algebra.block_dims))


def random_faithful_weight(algebra: FdAlgebra, rng: np.random.Generator,
                           floor: float = 0.05) -> Weight:
    """Normalized W*W density with a spectral floor, per block."""
    dens = []
    for n in algebra.block_dims:
        w = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        d = w.conj().T @ w + floor * np.eye(n)
        dens.append(d / np.trace(d).real)
    return Weight(algebra, dens)


def is_dominated(omega: Weight, phi: Weight, tol: float = 1e-10) -> bool:
    """omega <= phi on positives, i.e. D_phi - D_omega PSD blockwise."""
    if omega.algebra != phi.algebra:
        raise ShapeError("weights on different algebras")
    for do, dp in zip(omega.density, phi.density):
        diff = dp - do
        diff = 0.5 * (diff + diff.conj().T)
        if np.linalg.eigvalsh(diff).min() < -tol:
            return False
    return True


def gphi_chain(phi: Weight, m: int):
    """The canonical increasing chain (k/(k+1)) * phi, k = 1..m."""
    if m < 1:
        raise DomainError("chain length must be >= 1")
    return [phi.scale(k / (k + 1)) for k in range(1, m + 1)]


def random_dominated_chain(phi: Weight, m: int, rng: np.random.Generator):
    """An increasing chain of weights dominated by phi, ending near phi.

    Interpolates D_k = (1 - t_k) * D_start + t_k * D_phi with t_k increasing,
    where D_start is a random PSD compression of D_phi.
    """
    start = []
    for d in phi.density:
        n = d.shape[0]
        r = rng.uniform(0.1, 0.6)
        start.append(r * d)
    chain = []
    for k in range(1, m + 1):
        t = k / (m + 1)
        chain.append(Weight(phi.algebra, tuple(
            (1 - t) * s + t * d for s, d in zip(start, phi.density))))
    return chain


def combes_sup(phi: Weight, x: Element, m: int):
    """Supremum of the canonical chain against the exact value, with rate.

    Returns (sup_m, exact, certified_gap_bound).
    """
    if not is_positive(x, 1e-9):
        raise DomainError("combes_sup needs a positive element")
    exact = phi(x).real
    sup_m = max((w(x).real for w in gphi_chain(phi, m)), default=0.0)
    return sup_m, exact, exact / (m + 1)


def functional_abs(theta: Functional):
    """The absolute value |theta| and the polar partial isometries.

    With theta(a) = sum trace(T_j a_j) and polar decomposition T = U|T|, the
    absolute value uses |T*| = (T T*)^{1/2}: |theta|(a) = sum trace(|T*|_j a_j).
    Then || |theta| || = ||theta|| and |theta(a)|^2 <= ||theta|| |theta|(a* a).
    """
    abs_blocks, u_blocks = [], []
    for t in theta.rep:
        uu, s, vh = np.linalg.svd(t)
        abs_blocks.append(uu @ np.diag(s) @ uu.conj().T)   # |T*| = U S U*
        u_blocks.append(uu @ vh)
    return Weight(theta.algebra, abs_blocks), theta.algebra.element(u_blocks)
