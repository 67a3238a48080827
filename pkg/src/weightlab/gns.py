"""GNS construction, cut-off operators and the bicommutant lift.

The GNS space is obtained by eigendecomposing the Gram matrix
G[i,k] = phi(b_i* b_k) on the matrix-unit basis, dropping the kernel
(eigenvalues <= 1e-12 * max), and mapping coordinates through
Lam = S^{1/2} V*.  Then <Lam a, Lam b> = phi(b* a) with the convention
that the inner product is linear in its first argument: <u, v> = v* u.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import DomainError, Element, FdAlgebra, commutant, span_distance
from .weights import DegenerateWeightError, DominationError, Weight, is_dominated

KERNEL_CUT = 1e-12


@dataclass
class GnsTriple:
    algebra: FdAlgebra
    weight: Weight
    dim_h: int
    lam_matrix: np.ndarray          # (dim_h, coord_dim)
    lam_pinv: np.ndarray            # (coord_dim, dim_h)
    gram: np.ndarray
    pi_basis: list = field(repr=False)   # representation matrices of the matrix units

    def lam(self, a: Element) -> np.ndarray:
        return self.lam_matrix @ a.to_vec()

    def pi(self, a: Element) -> np.ndarray:
        return self.lam_matrix @ self.algebra.left_mul_matrix(a) @ self.lam_pinv

    def lam_preimage(self, v: np.ndarray) -> Element:
        """Minimal-norm algebra element with lam(a) = v."""
        return self.algebra.from_vec(self.lam_pinv @ v)


@dataclass
class CutoffData:
    omega: Weight
    t_op: np.ndarray
    t_sqrt: np.ndarray
    xi: np.ndarray | None = None


def gns_construct(phi: Weight) -> GnsTriple:
    if phi.is_zero():
        raise DegenerateWeightError("the zero weight has no GNS construction")
    alg = phi.algebra
    g = phi.gram_matrix()
    g = 0.5 * (g + g.conj().T)
    w, v = np.linalg.eigh(g)
    keep = w > KERNEL_CUT * w.max()
    wk, vk = w[keep], v[:, keep]
    lam = np.diag(np.sqrt(wk)) @ vk.conj().T
    lam_pinv = vk @ np.diag(1.0 / np.sqrt(wk))
    triple = GnsTriple(alg, phi, int(keep.sum()), lam, lam_pinv, g, [])
    triple.pi_basis = [triple.pi(b) for b in alg.basis()]
    return triple


def expected_gns_dim(phi: Weight) -> int:
    """sum_j n_j * rank(D_j)."""
    total = 0
    for n, d in zip(phi.algebra.block_dims, phi.density):
        w = np.linalg.eigvalsh(0.5 * (d + d.conj().T))
        total += n * int(np.sum(w > KERNEL_CUT * max(w.max(), 1e-300)))
    return total


def t_omega(gns: GnsTriple, phi: Weight, omega: Weight,
            tol: float = 1e-9) -> CutoffData:
    """The cut-off operator with <T lam(a), lam(b)> = omega(b* a).

    Solved from the Gram-weighted linear system T = Lp* G_omega Lp with
    Lp the pseudo-inverse of lam; independent of any closed form.
    """
    if not is_dominated(omega, phi, tol):
        raise DominationError("omega is not dominated by phi")
    g_om = omega.gram_matrix()
    t = gns.lam_pinv.conj().T @ g_om @ gns.lam_pinv
    t = 0.5 * (t + t.conj().T)
    w, v = np.linalg.eigh(t)
    t_sqrt = v @ np.diag(np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T
    return CutoffData(omega, t, t_sqrt)


def xi_omega(gns: GnsTriple, phi: Weight, omega: Weight,
             tol: float = 1e-9) -> CutoffData:
    """Solve T^{1/2} lam(a) = pi(a) xi for the minimal-norm xi."""
    cut = t_omega(gns, phi, omega, tol)
    rows = np.vstack(gns.pi_basis)
    rhs = np.concatenate([
        cut.t_sqrt @ gns.lam_matrix[:, i] for i in range(gns.algebra.coord_dim)
    ])
    xi, *_ = np.linalg.lstsq(rows, rhs, rcond=None)
    resid = float(np.linalg.norm(rows @ xi - rhs))
    if resid > tol * (1.0 + np.linalg.norm(rhs)):
        raise DomainError(f"xi_omega inconsistent: residual {resid:.3e}")
    cut.xi = xi
    return cut


@dataclass
class LiftReport:
    bicommutant_dim: int
    span_gap: float          # distance span(pi(A)'' ) vs span(pi(A))
    kernel_blocks: list
    lift_max_dev: float      # max |phi_tilde(pi(a)) - phi(a)| over the basis


def wstar_lift(gns: GnsTriple, phi: Weight):
    """Bicommutant of the GNS representation and the lifted functional.

    Returns (bicommutant basis, phi_tilde as a callable on dim_h matrices,
    LiftReport).  The pull-back through pi is the minimal-norm preimage;
    it is well defined because phi vanishes on the blocks pi kills.
    """
    gens = gns.pi_basis
    first = commutant(gens, gns.dim_h)
    second = commutant(first, gns.dim_h)
    gap = span_distance(second, gens)

    pi_cols = np.column_stack([m.reshape(-1) for m in gens])
    pi_pinv = np.linalg.pinv(pi_cols)

    def phi_tilde(x: np.ndarray) -> complex:
        c = pi_pinv @ np.asarray(x, dtype=complex).reshape(-1)
        return phi(gns.algebra.from_vec(c))

    kernel_blocks = [
        j for j, d in enumerate(phi.density)
        if np.linalg.eigvalsh(0.5 * (d + d.conj().T)).max() <= KERNEL_CUT
    ]
    devs = [abs(phi_tilde(pm) - phi(b))
            for pm, b in zip(gens, gns.algebra.basis())]
    report = LiftReport(len(second), gap, kernel_blocks, max(devs))
    return second, phi_tilde, report


class InvarianceError(DomainError):
    pass


def check_automorphism(alg: FdAlgebra, alpha: np.ndarray, tol: float = 1e-9) -> float:
    """Max deviation of alpha (coordinate matrix) from a *-automorphism."""
    basis = list(alg.basis())
    dev = 0.0
    p_star = alg.adjoint_matrix()
    for i, a in enumerate(basis):
        va = alpha @ a.to_vec()
        # adjoint preservation
        vstar = alpha @ (p_star @ np.conj(a.to_vec()))
        dev = max(dev, float(np.linalg.norm(p_star @ np.conj(va) - vstar)))
        fa = alg.from_vec(va)
        for b in basis:
            ab = alg.from_vec(alpha @ (a @ b).to_vec())
            fb = alg.from_vec(alpha @ b.to_vec())
            dev = max(dev, float(np.linalg.norm((fa @ fb - ab).to_vec())))
    return dev


def ad_unitary_matrix(alg: FdAlgebra, w: Element) -> np.ndarray:
    """Coordinate matrix of x -> w x w*."""
    return alg.left_mul_matrix(w) @ alg.right_mul_matrix(w.star())


def estimate_invariance_factor(phi: Weight, alpha: np.ndarray) -> float:
    """Average of phi(alpha(p)) / phi(p) over unit-normalized positive probes."""
    alg = phi.algebra
    rng = np.random.default_rng(0)
    ratios = []
    for _ in range(8):
        p = alg.random_positive(rng)
        p = p * (1.0 / p.norm())
        num = phi(alg.from_vec(alpha @ p.to_vec())).real
        den = phi(p).real
        if den > 1e-12:
            ratios.append(num / den)
    return float(np.mean(ratios)) if ratios else 1.0


def lift_automorphism(gns: GnsTriple, phi: Weight, alpha: np.ndarray,
                      r: float | None = None, tol: float = 1e-9) -> np.ndarray:
    """Unitary U with U lam(a) = r^{-1/2} lam(alpha(a)), given phi o alpha = r phi."""
    dev = check_automorphism(gns.algebra, alpha, tol)
    if dev > tol:
        raise InvarianceError(f"not a *-automorphism: deviation {dev:.3e}")
    if r is None:
        r = estimate_invariance_factor(phi, alpha)
    inv_dev = 0.0
    for b in gns.algebra.basis():
        inv_dev = max(inv_dev, abs(phi(gns.algebra.from_vec(alpha @ b.to_vec())) - r * phi(b)))
    if inv_dev > tol * (1.0 + abs(r)):
        raise InvarianceError(f"relative invariance violated: max deviation {inv_dev:.3e}")
    u = (r ** -0.5) * gns.lam_matrix @ alpha @ gns.lam_pinv
    unit_dev = np.linalg.norm(u.conj().T @ u - np.eye(gns.dim_h), 2)
    if unit_dev > tol:
        raise InvarianceError(f"implementing operator not unitary: {unit_dev:.3e}")
    return u
