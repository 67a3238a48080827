"""Slice maps on A (x) B, KSGNS vectors and their cut-off identities.

A (x) B is realized blockwise-Kronecker: for each block pair (i, j) an
(n_i m_j) x (n_i m_j) matrix, A-index major.  Slices are index contractions
against the trace representative of the sliced functional.

Elements of the module A (x) H are stored through their H-components:
a list (q_i)_{i < dim_H} of A-elements, with module inner product
<c (x) u, d (x) w> = d* c <u, w>_H.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import DomainError, Element, FdAlgebra, ShapeError, is_positive
from .dynamics import AntilinearMap, ModularTriple, OneParamGroup, analytic_ext
from .gns import CutoffData, GnsTriple
from .weights import Functional, Weight, functional_abs, gphi_chain


class OrderError(DomainError):
    pass


class CpError(DomainError):
    pass


class TensorElement:
    """An element of A (x) B as a grid of Kronecker blocks."""

    __slots__ = ("alg_a", "alg_b", "blocks")

    def __init__(self, alg_a: FdAlgebra, alg_b: FdAlgebra, blocks):
        self.alg_a = alg_a
        self.alg_b = alg_b
        grid = []
        for i, n in enumerate(alg_a.block_dims):
            row = []
            for j, m in enumerate(alg_b.block_dims):
                blk = np.asarray(blocks[i][j], dtype=complex)
                if blk.shape != (n * m, n * m):
                    raise ShapeError(f"pair block ({i},{j}) has shape {blk.shape}")
                row.append(blk)
            grid.append(row)
        self.blocks = grid

    def _check(self, other: "TensorElement"):
        if self.alg_a != other.alg_a or self.alg_b != other.alg_b:
            raise ShapeError("tensor elements over different algebras")

    def __add__(self, other):
        self._check(other)
        return TensorElement(self.alg_a, self.alg_b, [
            [x + y for x, y in zip(r1, r2)]
            for r1, r2 in zip(self.blocks, other.blocks)])

    def __sub__(self, other):
        self._check(other)
        return TensorElement(self.alg_a, self.alg_b, [
            [x - y for x, y in zip(r1, r2)]
            for r1, r2 in zip(self.blocks, other.blocks)])

    def __matmul__(self, other):
        self._check(other)
        return TensorElement(self.alg_a, self.alg_b, [
            [x @ y for x, y in zip(r1, r2)]
            for r1, r2 in zip(self.blocks, other.blocks)])

    def __mul__(self, c):
        return TensorElement(self.alg_a, self.alg_b, [
            [c * x for x in row] for row in self.blocks])

    __rmul__ = __mul__

    def star(self) -> "TensorElement":
        return TensorElement(self.alg_a, self.alg_b, [
            [x.conj().T for x in row] for row in self.blocks])

    def norm(self) -> float:
        return max(np.linalg.norm(x, 2) for row in self.blocks for x in row)

    def frobenius(self) -> float:
        return float(np.sqrt(sum(np.linalg.norm(x) ** 2
                                 for row in self.blocks for x in row)))

    def pair_view(self, i: int, j: int) -> np.ndarray:
        """Block (i, j) reshaped to indices (p, r, q, s): A-row, B-row, A-col, B-col."""
        n, m = self.alg_a.block_dims[i], self.alg_b.block_dims[j]
        return self.blocks[i][j].reshape(n, m, n, m)


def tensor_zero(alg_a: FdAlgebra, alg_b: FdAlgebra) -> TensorElement:
    return TensorElement(alg_a, alg_b, [
        [np.zeros((n * m, n * m)) for m in alg_b.block_dims]
        for n in alg_a.block_dims])


def tensor_embed(a: Element, b: Element) -> TensorElement:
    """The elementary tensor a (x) b."""
    return TensorElement(a.algebra, b.algebra, [
        [np.kron(ab, bb) for bb in b.blocks] for ab in a.blocks])


def tensor_unit(alg_a: FdAlgebra, alg_b: FdAlgebra) -> TensorElement:
    return tensor_embed(alg_a.unit(), alg_b.unit())


def random_tensor(alg_a: FdAlgebra, alg_b: FdAlgebra,
                  rng: np.random.Generator, scale: float = 1.0) -> TensorElement:
    return TensorElement(alg_a, alg_b, [
        [scale * (rng.standard_normal((n * m, n * m))
                  + 1j * rng.standard_normal((n * m, n * m)))
         for m in alg_b.block_dims]
        for n in alg_a.block_dims])


def tensor_is_positive(x: TensorElement, tol: float = 1e-9) -> bool:
    for row in x.blocks:
        for blk in row:
            if np.linalg.norm(blk - blk.conj().T, 2) > tol:
                return False
            if np.linalg.eigvalsh(0.5 * (blk + blk.conj().T)).min() < -tol:
                return False
    return True


def a_components(x: TensorElement, block: int, p: int, q: int) -> Element:
    """The B-element x_{pq} in the expansion x = sum e_{pq} (x) x_{pq}."""
    return x.alg_b.element([x.pair_view(block, j)[p, :, q, :]
                            for j in range(x.alg_b.num_blocks)])


def assemble_from_a_components(alg_a: FdAlgebra, parts) -> TensorElement:
    """Inverse of a_components: parts[(k, p, q)] is a B-element."""
    some = next(iter(parts.values()))
    alg_b = some.algebra
    out = tensor_zero(alg_a, alg_b)
    for (k, p, q), y in parts.items():
        n = alg_a.block_dims[k]
        for j, m in enumerate(alg_b.block_dims):
            v = out.pair_view(k, j)
            v[p, :, q, :] += y.blocks[j]
            out.blocks[k][j] = v.reshape(n * m, n * m)
    return out


# ---------------------------------------------------------------------------
# slices

def slice_b(x: TensorElement, theta: Functional) -> Element:
    """(iota (x) theta)(x) in A: contract the B indices against theta's
    representative (for a Weight this is the D-weighted partial trace)."""
    if theta.algebra != x.alg_b:
        raise ShapeError("functional not on the right-hand factor")
    out = []
    for i, n in enumerate(x.alg_a.block_dims):
        acc = np.zeros((n, n), dtype=complex)
        for j in range(x.alg_b.num_blocks):
            acc += np.einsum("prqs,sr->pq", x.pair_view(i, j), theta.rep[j])
        out.append(acc)
    return x.alg_a.element(out)


def slice_a(x: TensorElement, theta: Functional) -> Element:
    """(theta (x) iota)(x) in B: contract the A indices."""
    if theta.algebra != x.alg_a:
        raise ShapeError("functional not on the left-hand factor")
    out = []
    for j, m in enumerate(x.alg_b.block_dims):
        acc = np.zeros((m, m), dtype=complex)
        for i in range(x.alg_a.num_blocks):
            acc += np.einsum("prqs,qp->rs", x.pair_view(i, j), theta.rep[i])
        out.append(acc)
    return x.alg_b.element(out)


def slice_phi(x: TensorElement, phi: Weight, chain_len: int = 0):
    """(iota (x) phi)(x), optionally with the chain certificate.

    With chain_len > 0 also returns the deviations along the canonical
    dominated chain, whose k-th entry is ||(iota (x) phi)(x)|| / (k+1) for
    positive x.
    """
    val = slice_b(x, phi)
    if chain_len <= 0:
        return val
    devs = [(slice_b(x, w) - val).norm() for w in gphi_chain(phi, chain_len)]
    return val, devs


theta_slice = slice_a


def fubini_check(x: TensorElement, theta: Functional, phi: Weight) -> float:
    """|theta((iota (x) phi)(x)) - phi((theta (x) iota)(x))|."""
    return abs(theta(slice_b(x, phi)) - phi(slice_a(x, theta)))


def slice_reconstruct(x: TensorElement, phi: Weight) -> Element:
    """Rebuild (iota (x) phi)(x) entry by entry from dual-basis functionals."""
    alg_a = x.alg_a
    out = []
    for k, n in enumerate(alg_a.block_dims):
        acc = np.zeros((n, n), dtype=complex)
        for p in range(n):
            for q in range(n):
                # theta = Tr(e_qp .) picks out the (p, q) entry
                rep = [np.zeros((d, d), dtype=complex) for d in alg_a.block_dims]
                rep[k][q, p] = 1.0
                theta = Functional(alg_a, rep)
                acc[p, q] = phi(slice_a(x, theta))
        out.append(acc)
    return alg_a.element(out)


def cs_operator_inequality(x: TensorElement, y: TensorElement, phi: Weight) -> float:
    """min eigenvalue of ||(i(x)phi)(y*y)|| (i(x)phi)(x*x) - M*M, M = (i(x)phi)(y*x)."""
    m = slice_b(y.star() @ x, phi)
    lhs = m.star() @ m
    rhs = float(slice_b(y.star() @ y, phi).norm()) * slice_b(x.star() @ x, phi)
    diff = rhs - lhs
    return min(np.linalg.eigvalsh(0.5 * (b + b.conj().T)).min() for b in diff.blocks)


def abs_theta_inequality(x: TensorElement, theta: Functional) -> float:
    """min eigenvalue of ||theta|| (|theta| (x) iota)(x*x) - (theta (x) i)(x)* (...)."""
    s = slice_a(x, theta)
    lhs = s.star() @ s
    abs_theta, _ = functional_abs(theta)
    rhs = theta.trace_norm() * slice_a(x.star() @ x, abs_theta)
    diff = rhs - lhs
    return min(np.linalg.eigvalsh(0.5 * (b + b.conj().T)).min() for b in diff.blocks)


# ---------------------------------------------------------------------------
# the KSGNS vector (iota (x) Lambda_phi)(x) in A (x) H_phi

@dataclass
class KsgnsVector:
    alg_a: FdAlgebra
    gns: GnsTriple
    components: list            # q_i in A, i < dim_H

    def module_inner(self, other: "KsgnsVector") -> Element:
        """<self, other> = other* . self = sum_i qo_i* qs_i."""
        acc = self.alg_a.zero()
        for qs, qo in zip(self.components, other.components):
            acc = acc + qo.star() @ qs
        return acc

    def right_action(self, a: Element) -> "KsgnsVector":
        return KsgnsVector(self.alg_a, self.gns,
                           [q @ a for q in self.components])

    def apply_h_operator(self, s: np.ndarray) -> "KsgnsVector":
        """(1 (x) S) v: components q'_i = sum_k S[i,k] q_k."""
        comps = []
        for i in range(self.gns.dim_h):
            acc = self.alg_a.zero()
            for k in range(self.gns.dim_h):
                if s[i, k] != 0:
                    acc = acc + s[i, k] * self.components[k]
            comps.append(acc)
        return KsgnsVector(self.alg_a, self.gns, comps)

    def contract_h(self, v: np.ndarray) -> Element:
        """(1 (x) theta_v*) applied to the vector: sum_i conj(v_i) q_i."""
        acc = self.alg_a.zero()
        for vi, q in zip(v, self.components):
            acc = acc + np.conj(vi) * q
        return acc

    def pair_with_elementary(self, b: Element, v: np.ndarray) -> Element:
        """<self, b (x) v> = sum_i conj(v_i) b* q_i, an element of A."""
        return b.star() @ self.contract_h(v)

    def norm(self) -> float:
        return float(np.sqrt(max(
            np.linalg.eigvalsh(0.5 * (blk + blk.conj().T)).max()
            for blk in self.module_inner(self).blocks)))

    def distance(self, other: "KsgnsVector") -> float:
        return float(np.sqrt(sum(
            (qs - qo).frobenius() ** 2
            for qs, qo in zip(self.components, other.components))))


def ksgns(x: TensorElement, phi: Weight, gns: GnsTriple) -> KsgnsVector:
    """Components q_i with theta(q_i) = <Lam((theta (x) iota)(x)), e_i>,
    evaluated on the dual basis of A: q_i[k][p,q] = Lam(x_{pq})[i]."""
    comps = [[np.zeros((n, n), dtype=complex) for n in x.alg_a.block_dims]
             for _ in range(gns.dim_h)]
    for k, n in enumerate(x.alg_a.block_dims):
        for p in range(n):
            for q in range(n):
                lam = gns.lam(a_components(x, k, p, q))
                for i in range(gns.dim_h):
                    comps[i][k][p, q] = lam[i]
    return KsgnsVector(x.alg_a, gns,
                       [x.alg_a.element(c) for c in comps])


def ksgns_rotated(x: TensorElement, phi: Weight, gns: GnsTriple,
                  u: np.ndarray) -> KsgnsVector:
    """KSGNS components against the rotated orthonormal basis u e_i."""
    base = ksgns(x, phi, gns)
    # f_i = sum_k u[k,i] e_k  =>  q^f_i = sum_k conj(u[k,i]) q_k
    return base.apply_h_operator(u.conj().T)


def apply_pi_tensor(x: TensorElement, gns: GnsTriple, v: KsgnsVector) -> KsgnsVector:
    """(iota (x) pi)(x) applied to a module vector."""
    out = [v.alg_a.zero() for _ in range(gns.dim_h)]
    for k, n in enumerate(x.alg_a.block_dims):
        for p in range(n):
            for q in range(n):
                e_pq = x.alg_a.matrix_unit(k, p, q)
                pi_b = gns.pi(a_components(x, k, p, q))
                for i in range(gns.dim_h):
                    coeff_src = [pi_b[i, m] for m in range(gns.dim_h)]
                    acc = v.alg_a.zero()
                    for m, c in enumerate(coeff_src):
                        if c != 0:
                            acc = acc + c * v.components[m]
                    out[i] = out[i] + e_pq @ acc
    return KsgnsVector(v.alg_a, gns, out)


def unit_module_vector(alg_a: FdAlgebra, gns: GnsTriple, xi: np.ndarray) -> KsgnsVector:
    """1 (x) xi as a module vector."""
    return KsgnsVector(alg_a, gns,
                       [complex(c) * alg_a.unit() for c in xi])


def apply_b_tensor(x: TensorElement, b: Element, side: str = "right") -> TensorElement:
    """x (1 (x) b) or (1 (x) b) x."""
    one_b = tensor_embed(x.alg_a.unit(), b)
    return x @ one_b if side == "right" else one_b @ x


def apply_a_tensor(x: TensorElement, a: Element, side: str = "right") -> TensorElement:
    one_a = tensor_embed(a, x.alg_b.unit())
    return x @ one_a if side == "right" else one_a @ x


def ksgns_cutoff(x: TensorElement, phi: Weight, gns: GnsTriple,
                 cut: CutoffData, y: TensorElement | None = None):
    """Both cut-off identities; returns (dev_vector_identity, dev_pairing).

    (1 (x) T^{1/2}) v_x = (iota (x) pi)(x) (1 (x) theta_xi)  and
    <(1 (x) T) v_x, v_y>_module = (iota (x) omega)(y* x).
    """
    vx = ksgns(x, phi, gns)
    lhs = vx.apply_h_operator(cut.t_sqrt)
    rhs = apply_pi_tensor(x, gns, unit_module_vector(x.alg_a, gns, cut.xi))
    dev1 = lhs.distance(rhs)

    if y is None:
        y = x
    vy = ksgns(y, phi, gns)
    paired = vx.apply_h_operator(cut.t_op).module_inner(vy)
    direct = slice_b(y.star() @ x, cut.omega)
    dev2 = (paired - direct).norm()
    return dev1, dev2


def dominated_convergence(xs, x: TensorElement, phi: Weight, tol: float = 1e-9):
    """Rates ||(i(x)phi)(x_k) - (i(x)phi)(x)|| for 0 <= x_k <= x, x_k -> x."""
    for xk in xs:
        if not tensor_is_positive(xk, tol):
            raise OrderError("sequence member not positive")
        if not tensor_is_positive(x - xk, tol):
            raise OrderError("sequence member not dominated by the limit")
    target = slice_b(x, phi)
    return [(slice_b(xk, phi) - target).norm() for xk in xs]


def apply_b_map(x: TensorElement, theta_mat: np.ndarray) -> TensorElement:
    """(iota (x) theta)(x) for a linear map theta on B given on coordinates."""
    parts = {}
    for k, n in enumerate(x.alg_a.block_dims):
        for p in range(n):
            for q in range(n):
                y = a_components(x, k, p, q)
                parts[(k, p, q)] = x.alg_b.from_vec(theta_mat @ y.to_vec())
    return assemble_from_a_components(x.alg_a, parts)


def slice_automorphism(x: TensorElement, phi: Weight, gns: GnsTriple,
                       theta_mat: np.ndarray, r: float, u: np.ndarray):
    """Covariance identities for a relatively invariant automorphism of B.

    Returns (dev of (1 (x) U) v_x = r^{-1/2} v_{(i(x)theta)(x)},
             dev of (i(x)phi)((i(x)theta)(x)) = r (i(x)phi)(x))."""
    xt = apply_b_map(x, theta_mat)
    lhs = ksgns(x, phi, gns).apply_h_operator(u)
    vt = ksgns(xt, phi, gns)
    vt_scaled = KsgnsVector(vt.alg_a, gns, [(r ** -0.5) * q for q in vt.components])
    dev1 = lhs.distance(vt_scaled)
    dev2 = (slice_b(xt, phi) - r * slice_b(x, phi)).norm()
    return dev1, dev2


def slice_module_props(x: TensorElement, phi: Weight, gns: GnsTriple,
                       a: Element, b: Element,
                       modular: ModularTriple | None = None,
                       group: OneParamGroup | None = None):
    """The right-module identity, and for KMS data the two sigma identities.

    Returns (dev_module, dev_kms_vector, dev_kms_weight); the last two are
    None without modular data.
    """
    vx = ksgns(x, phi, gns)
    dev_mod = ksgns(apply_a_tensor(x, a), phi, gns).distance(vx.right_action(a))

    if modular is None or group is None:
        return dev_mod, None, None

    # (iota (x) Lam)(x (1 (x) b)) = (1 (x) J pi(sigma_{i/2}(b))* J) (iota (x) Lam)(x)
    sb = analytic_ext(group, 0.5j, b)
    op = modular.j_conj.conjugate_matrix(gns.pi(sb).conj().T)
    dev_v = ksgns(apply_b_tensor(x, b), phi, gns).distance(vx.apply_h_operator(op))

    # (iota (x) phi)(x (1 (x) b)) = (iota (x) phi)((1 (x) sigma_i(b)) x)
    sib = analytic_ext(group, 1j, b)
    dev_w = (slice_b(apply_b_tensor(x, b), phi)
             - slice_b(apply_b_tensor(x, sib, side="left"), phi)).norm()
    return dev_mod, dev_v, dev_w


# ---------------------------------------------------------------------------
# CP maps between algebras, given as (V, W) pair lists on the canonical reps

@dataclass
class PairedMap:
    """rho(a) = sum_l V_l a_canonical W_l*, landing in B's canonical rep.

    With W_l = V_l this is completely positive; general pairs allow designed
    failures.
    """

    alg_a: FdAlgebra
    alg_b: FdAlgebra
    pairs: list   # list of (V, W), each N_B x N_A

    def __call__(self, a: Element) -> Element:
        if a.algebra != self.alg_a:
            raise ShapeError("element from a different algebra")
        ac = a.to_canonical()
        full = sum(v @ ac @ w.conj().T for v, w in self.pairs)
        blocks, k = [], 0
        for m in self.alg_b.block_dims:
            blocks.append(full[k:k + m, k:k + m])
            k += m
        out = self.alg_b.element(blocks)
        off = np.linalg.norm(full - out.to_canonical())
        if off > 1e-9 * (1.0 + np.linalg.norm(full)):
            raise ShapeError("map does not land in the target algebra blocks")
        return out

    def choi_min_eig(self) -> float:
        """min eigenvalue of the block matrix [rho(b_i* b_j)] over A's basis."""
        basis = list(self.alg_a.basis())
        d = len(basis)
        nb = self.alg_b.total_dim
        big = np.zeros((d * nb, d * nb), dtype=complex)
        for i, bi in enumerate(basis):
            for j, bj in enumerate(basis):
                big[i * nb:(i + 1) * nb, j * nb:(j + 1) * nb] = \
                    self(bi.star() @ bj).to_canonical()
        big = 0.5 * (big + big.conj().T)
        return float(np.linalg.eigvalsh(big).min())

    def is_cp(self, tol: float = 1e-9) -> bool:
        return self.choi_min_eig() >= -tol


def kraus_map(alg_a: FdAlgebra, alg_b: FdAlgebra, kraus) -> PairedMap:
    return PairedMap(alg_a, alg_b, [(np.asarray(v, dtype=complex),) * 2
                                    for v in kraus])


def apply_rho_tensor(rho: PairedMap, x: TensorElement) -> TensorElement:
    """(rho (x) iota)(x) for x in A (x) C."""
    out = None
    for k, n in enumerate(x.alg_a.block_dims):
        for p in range(n):
            for q in range(n):
                term = tensor_embed(rho(x.alg_a.matrix_unit(k, p, q)),
                                    a_components(x, k, p, q))
                out = term if out is None else out + term
    return out


def cp_slice(rho: PairedMap, x: TensorElement, phi: Weight, gns: GnsTriple,
             v: np.ndarray, tol: float = 1e-9):
    """The two commutation identities for a CP map against the slice.

    Returns (dev of (i_B (x) phi)((rho (x) i)(x)) = rho((i_A (x) phi)(x)),
             dev of the component identity with witness v)."""
    if not rho.is_cp(tol):
        raise CpError("map is not completely positive (Choi test failed)")
    y = apply_rho_tensor(rho, x)
    dev1 = (slice_b(y, phi) - rho(slice_b(x, phi))).norm()
    comp_b = ksgns(y, phi, gns).contract_h(v)
    comp_a = rho(ksgns(x, phi, gns).contract_h(v))
    dev2 = (comp_b - comp_a).norm()
    return dev1, dev2


def lemma6_check(x: TensorElement, phi: Weight, gns: GnsTriple,
                 a: Element, b: Element, omega: Functional,
                 v: np.ndarray) -> float:
    """|omega(<v_x a, b (x) v>) - <Lam((a omega b* (x) iota)(x)), v>|."""
    vx = ksgns(x, phi, gns)
    lhs = omega(vx.right_action(a).pair_with_elementary(b, v))
    composite = omega.sandwich(a, b)        # y -> omega(b* y a)
    rhs = np.vdot(v, gns.lam(slice_a(x, composite)))
    return abs(lhs - complex(rhs))
