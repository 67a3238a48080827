"""Tensor-product weights and the joint GNS space.

The product algebra of A and B is itself an FdAlgebra with blocks n_i * m_j
(A-index major), so the joint GNS construction reuses the plain one.  The
comparison isometry U : H_phi (x) H_psi -> H_joint is built from the
coordinate embedding E with E (vec a (x) vec b) = vec(a (x) b).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import Element, FdAlgebra, ShapeError, make_algebra
from .dynamics import (AntilinearMap, FaithfulnessError, ModularTriple,
                       OneParamGroup, analytic_ext, modular_group_of,
                       modular_objects)
from .gns import GnsTriple, gns_construct, lift_automorphism, t_omega, xi_omega
from .slicemaps import TensorElement, slice_b, tensor_embed
from .weights import Functional, Weight, is_dominated


def product_algebra(alg_a: FdAlgebra, alg_b: FdAlgebra) -> FdAlgebra:
    return make_algebra([n * m for n in alg_a.block_dims
                         for m in alg_b.block_dims])


def to_product_element(x: TensorElement, prod: FdAlgebra) -> Element:
    return prod.element([blk for row in x.blocks for blk in row])


def from_product_element(e: Element, alg_a: FdAlgebra, alg_b: FdAlgebra) -> TensorElement:
    it = iter(e.blocks)
    return TensorElement(alg_a, alg_b,
                         [[next(it) for _ in alg_b.block_dims]
                          for _ in alg_a.block_dims])


def coordinate_embedding(alg_a: FdAlgebra, alg_b: FdAlgebra) -> np.ndarray:
    """Permutation E with E (vec a (x) vec b) = vec(a (x) b) in product coords."""
    prod = product_algebra(alg_a, alg_b)
    e = np.zeros((prod.coord_dim, alg_a.coord_dim * alg_b.coord_dim))
    offs_a, offs_b = alg_a.block_offsets(), alg_b.block_offsets()
    offs_p = prod.block_offsets()
    pb = 0
    for k, n in enumerate(alg_a.block_dims):
        for j, m in enumerate(alg_b.block_dims):
            for p in range(n):
                for q in range(n):
                    idx_a = offs_a[k] + p * n + q
                    for r in range(m):
                        for s in range(m):
                            idx_b = offs_b[j] + r * m + s
                            row = offs_p[pb] + (p * m + r) * (n * m) + (q * m + s)
                            e[row, idx_a * alg_b.coord_dim + idx_b] = 1.0
            pb += 1
    return e


def tensor_weight(phi: Weight, psi: Weight) -> Weight:
    """The product weight with densities D_i (x) E_j blockwise."""
    return Weight(product_algebra(phi.algebra, psi.algebra),
                  [np.kron(d, e) for d in phi.density for e in psi.density])


def tensor_weight_certificate(phi: Weight, psi: Weight, x: TensorElement,
                              chain_len: int = 8):
    """Values of (omega_k (x) theta_k)(x) along product chains against the
    exact value, with the 2/(k+1) rate bound for positive x."""
    prod = product_algebra(phi.algebra, psi.algebra)
    xe = to_product_element(x, prod)
    exact = tensor_weight(phi, psi)(xe).real
    gaps, bounds = [], []
    for k in range(1, chain_len + 1):
        c = k / (k + 1)
        val = tensor_weight(phi.scale(c), psi.scale(c))(xe).real
        gaps.append(exact - val)
        bounds.append(2.0 * exact / (k + 1))
    return exact, gaps, bounds


@dataclass
class JointGns:
    alg_a: FdAlgebra
    alg_b: FdAlgebra
    prod: FdAlgebra
    weight: Weight              # phi (x) psi
    gns_a: GnsTriple
    gns_b: GnsTriple
    gns_joint: GnsTriple
    embed: np.ndarray           # E on coordinates
    u: np.ndarray               # H_a (x) H_b -> H_joint

    def lam_tensor(self, x: TensorElement) -> np.ndarray:
        """(Lam_phi (x) Lam_psi)(x) := U* Lam_joint(x) in H_a (x) H_b."""
        return self.u.conj().T @ self.gns_joint.lam(to_product_element(x, self.prod))

    def pi_tensor(self, x: TensorElement) -> np.ndarray:
        """(pi_phi (x) pi_psi)(x) = U* pi_joint(x) U."""
        return self.u.conj().T @ self.gns_joint.pi(
            to_product_element(x, self.prod)) @ self.u


def joint_gns(phi: Weight, psi: Weight) -> JointGns:
    prod = product_algebra(phi.algebra, psi.algebra)
    pw = tensor_weight(phi, psi)
    ga, gb = gns_construct(phi), gns_construct(psi)
    gj = gns_construct(pw)
    e = coordinate_embedding(phi.algebra, psi.algebra)
    w_pinv = np.kron(ga.lam_pinv, gb.lam_pinv)
    u = gj.lam_matrix @ e @ w_pinv
    return JointGns(phi.algebra, psi.algebra, prod, pw, ga, gb, gj, e, u)


def lam_restricted_matrix(gns: GnsTriple, cut) -> np.ndarray:
    """Matrix of Lam_omega(a) = pi(a) xi_omega on algebra coordinates."""
    return np.column_stack([m @ cut.xi for m in gns.pi_basis])


def tensor_cutoff(joint: JointGns, omega: Weight, theta: Weight,
                  x: TensorElement, tol: float = 1e-9):
    """The two cut-off identities on the joint space.

    Returns (dev of (T_om^{1/2} (x) T_th^{1/2}) v = (pi (x) pi)(x)(xi (x) xi),
             dev of (T_om^{1/2} (x) 1) v = (Lam_om (x) Lam_psi)(x))."""
    cut_a = xi_omega(joint.gns_a, joint.gns_a.weight, omega, tol)
    cut_b = xi_omega(joint.gns_b, joint.gns_b.weight, theta, tol)
    v = joint.lam_tensor(x)

    lhs1 = np.kron(cut_a.t_sqrt, cut_b.t_sqrt) @ v
    rhs1 = joint.pi_tensor(x) @ np.kron(cut_a.xi, cut_b.xi)
    dev1 = float(np.linalg.norm(lhs1 - rhs1))

    lhs2 = np.kron(cut_a.t_sqrt, np.eye(joint.gns_b.dim_h)) @ v
    lam_om = lam_restricted_matrix(joint.gns_a, cut_a)
    rhs2 = np.kron(lam_om, joint.gns_b.lam_matrix) @ (
        joint.embed.T @ to_product_element(x, joint.prod).to_vec())
    dev2 = float(np.linalg.norm(lhs2 - rhs2))
    return dev1, dev2


def tensor_fubini(x: TensorElement, phi: Weight, psi: Weight,
                  a: Element | None = None):
    """Returns (dev of phi((i (x) psi)(x)) = (phi (x) psi)(x),
                dev of phi((i (x) a psi a*)(x)) = (phi(x)psi)((1(x)a*) x (1(x)a)))."""
    prod = product_algebra(phi.algebra, psi.algebra)
    pw = tensor_weight(phi, psi)
    dev1 = abs(phi(slice_b(x, psi)) - pw(to_product_element(x, prod)))
    if a is None:
        return dev1, None
    sand = psi.sandwich(a, a)   # y -> psi(a* y a)
    one_a = tensor_embed(phi.algebra.unit(), a)
    moved = one_a.star() @ x @ one_a
    dev2 = abs(phi(slice_b(x, sand)) - pw(to_product_element(moved, prod)))
    return dev1, dev2


def vector_functional(gns: GnsTriple, u: np.ndarray, w: np.ndarray) -> Functional:
    """omega_{u,w}(b) = <pi(b) u, w> as a Functional on the algebra."""
    rep = [np.zeros((n, n), dtype=complex) for n in gns.algebra.block_dims]
    for j, n in enumerate(gns.algebra.block_dims):
        for r in range(n):
            for s in range(n):
                val = np.vdot(w, gns.pi(gns.algebra.matrix_unit(j, r, s)) @ u)
                rep[j][s, r] = val
    return Functional(gns.algebra, rep)


def basis_expansion(joint: JointGns, x: TensorElement, y: Element,
                    onb: np.ndarray | None = None):
    """Expansion of (Lam (x) Lam)(x (1 (x) y)) over an orthonormal basis of H_psi.

    Returns (dev_expansion, dev_sum) where dev_sum compares
    sum_i ||Lam_phi(q_i)||^2 with (phi (x) psi)((1 (x) y)* x* x (1 (x) y)).
    """
    gb = joint.gns_b
    if onb is None:
        onb = np.eye(gb.dim_h)
    lam_y = gb.lam(y)
    one_y = tensor_embed(joint.alg_a.unit(), y)
    xy = x @ one_y
    target = joint.lam_tensor(xy)

    expansion = np.zeros_like(target)
    sum_sq = 0.0
    for i in range(gb.dim_h):
        e_i = onb[:, i]
        q_i = slice_b(x, vector_functional(gb, lam_y, e_i))
        lam_q = joint.gns_a.lam(q_i)
        expansion = expansion + np.kron(lam_q, e_i)
        sum_sq += float(np.vdot(lam_q, lam_q).real)
    dev_exp = float(np.linalg.norm(expansion - target))
    exact = joint.weight(to_product_element(xy.star() @ xy, joint.prod)).real
    dev_sum = abs(sum_sq - exact)
    return dev_exp, dev_sum


def tensor_rel_invariance(joint: JointGns, alpha: np.ndarray, lam_factor: float,
                          beta: np.ndarray, nu_factor: float, x: TensorElement,
                          tol: float = 1e-9):
    """Props on relative invariance of product weights.

    Returns (dev of (phi(x)psi)((alpha(x)beta)(x)) = lam nu (phi(x)psi)(x),
             dev of (Lam(x)Lam)((a(x)b)(x)) = (lam nu)^{1/2} (U(x)V)(Lam(x)Lam)(x)).
    """
    u = lift_automorphism(joint.gns_a, joint.gns_a.weight, alpha, lam_factor, tol)
    v = lift_automorphism(joint.gns_b, joint.gns_b.weight, beta, nu_factor, tol)
    ab = joint.embed @ np.kron(alpha, beta) @ joint.embed.T
    xe = to_product_element(x, joint.prod)
    xt = joint.prod.from_vec(ab @ xe.to_vec())
    dev1 = abs(joint.weight(xt) - lam_factor * nu_factor * joint.weight(xe))

    lhs = joint.u.conj().T @ joint.gns_joint.lam(xt)
    rhs = np.sqrt(lam_factor * nu_factor) * (np.kron(u, v) @ joint.lam_tensor(x))
    dev2 = float(np.linalg.norm(lhs - rhs))
    return dev1, dev2


def kms_tensor(joint: JointGns, tol: float = 1e-9,
               rng: np.random.Generator | None = None):
    """Modular data of phi (x) psi against the factor data.

    Returns a dict of deviations: nabla (U(nabla (x) nabla')U*), j (same for
    the conjugations), group (sigma (x) sigma' vs the product modular group),
    spectrum (multiset of products), module (the KMS module identity).
    """
    phi, psi = joint.gns_a.weight, joint.gns_b.weight
    if not (phi.faithful() and psi.faithful()):
        raise FaithfulnessError("kms_tensor needs faithful factors")
    rng = rng or np.random.default_rng(0)
    mod_a = modular_objects(phi, joint.gns_a)
    mod_b = modular_objects(psi, joint.gns_b)
    mod_j = modular_objects(joint.weight, joint.gns_joint)
    u = joint.u

    nabla_cmp = u @ np.kron(mod_a.nabla, mod_b.nabla) @ u.conj().T
    dev_nabla = float(np.linalg.norm(nabla_cmp - mod_j.nabla, 2))

    kj_cmp = u @ np.kron(mod_a.j_conj.k, mod_b.j_conj.k) @ u.T
    dev_j = float(np.linalg.norm(kj_cmp - mod_j.j_conj.k, 2))

    ga = modular_group_of(phi)
    gb = modular_group_of(psi)
    gj = modular_group_of(joint.weight)
    dev_group = 0.0
    for t in (-1.0, 0.5, 1.3):
        for _ in range(3):
            a = phi.algebra.random_element(rng)
            b = psi.algebra.random_element(rng)
            x = tensor_embed(analytic_ext(ga, complex(t), a),
                             analytic_ext(gb, complex(t), b))
            direct = analytic_ext(gj, complex(t),
                                  to_product_element(tensor_embed(a, b), joint.prod))
            dev_group = max(dev_group, (to_product_element(x, joint.prod)
                                        - direct).norm())

    spec_j = np.sort(np.linalg.eigvalsh(mod_j.nabla))
    spec_prod = np.sort(np.outer(np.linalg.eigvalsh(mod_a.nabla),
                                 np.linalg.eigvalsh(mod_b.nabla)).reshape(-1))
    dev_spec = float(np.max(np.abs(spec_j - spec_prod)))

    a = psi.algebra.random_element(rng)
    x = joint_random(joint, rng)
    one_a = tensor_embed(joint.alg_a.unit(), a)
    lhs = joint.lam_tensor(x @ one_a)
    sa = analytic_ext(gb, 0.5j, a)
    op = mod_b.j_conj.conjugate_matrix(joint.gns_b.pi(sa).conj().T)
    rhs = np.kron(np.eye(joint.gns_a.dim_h), op) @ joint.lam_tensor(x)
    dev_module = float(np.linalg.norm(lhs - rhs))

    return {"nabla": dev_nabla, "j": dev_j, "group": dev_group,
            "spectrum": dev_spec, "module": dev_module}


def joint_random(joint: JointGns, rng: np.random.Generator) -> TensorElement:
    from .slicemaps import random_tensor
    return random_tensor(joint.alg_a, joint.alg_b, rng)


def state_case(joint: JointGns, x: TensorElement) -> float:
    """For states, (Lam (x) Lam)(x) = (pi (x) pi)(x)(xi (x) xi) with xi = Lam(1)."""
    xi_a = joint.gns_a.lam(joint.alg_a.unit())
    xi_b = joint.gns_b.lam(joint.alg_b.unit())
    lhs = joint.lam_tensor(x)
    rhs = joint.pi_tensor(x) @ np.kron(xi_a, xi_b)
    return float(np.linalg.norm(lhs - rhs))
