"""Check registry and suite runner.

Every check is a pure function of (context, rng, tolerance) returning its
max deviation; pass means deviation <= tolerance.  Checks are seeded
individually from (instance seed, check id) so execution order and thread
count do not affect results.
"""

from __future__ import annotations

import os
import time
import zlib
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import dynamics, gns, hullx, slicemaps, tensorprod, weights
from .algebra import commutant, func_calc, is_positive, span_distance
from .dynamics import (act, analytic_ext, gaussian_smooth, gibbs_weight,
                       integrate_commute, kms_check, modular_group_of,
                       modular_objects, tomita_check, uniqueness_harness)
from .gns import (expected_gns_dim, gns_construct, lift_automorphism, t_omega,
                  wstar_lift, xi_omega)
from .serialize import SCHEMA_VERSION
from .slicemaps import (PairedMap, abs_theta_inequality, cp_slice,
                        cs_operator_inequality, dominated_convergence,
                        fubini_check, ksgns, ksgns_cutoff, lemma6_check,
                        random_tensor, slice_automorphism, slice_b,
                        slice_module_props, slice_reconstruct, tensor_embed,
                        tensor_is_positive)
from .tensorprod import (basis_expansion, joint_gns, kms_tensor, state_case,
                         tensor_cutoff, tensor_fubini, tensor_rel_invariance,
                         tensor_weight, to_product_element)
from .weights import (Functional, Weight, combes_sup, functional_abs,
                      gphi_chain, is_dominated, random_faithful_weight)

DEFAULT_TOL = {"algebraic": 1e-9, "kms": 1e-7, "quadrature": 1e-6}


def build_context(inst: dict) -> dict:
    """Precompute the shared objects every check draws on."""
    alg = inst["algebra"]
    phi = inst["weight"]
    if phi.faithful():
        phi_f = phi
    else:
        phi_f = Weight(alg, [d + 0.05 * np.eye(n)
                             for d, n in zip(phi.density, alg.block_dims)])
    talg = inst["tensor_algebra"]
    psi = inst["tensor_weight"]
    psi_f = psi if psi.faithful() else Weight(
        talg, [d + 0.05 * np.eye(n) for d, n in zip(psi.density, talg.block_dims)])
    ctx = {
        "seed": inst["seed"],
        "alg": alg, "phi": phi, "phi_f": phi_f,
        "gns": gns_construct(phi),
        "gns_f": gns_construct(phi_f),
        "talg": talg, "psi": psi_f,
        "gns_psi": gns_construct(psi_f),
    }
    ctx["sigma"] = modular_group_of(phi_f)
    ctx["modular"] = modular_objects(phi_f, ctx["gns_f"])
    ctx["sigma_psi"] = modular_group_of(psi_f)
    ctx["modular_psi"] = modular_objects(psi_f, ctx["gns_psi"])
    ctx["joint"] = joint_gns(phi_f, psi_f)
    return ctx


# ---------------------------------------------------------------------------
# gns suite (includes the algebra/weights substrate invariants)

def check_algebra_substrate(ctx, rng, tol):
    alg = ctx["alg"]
    dev = 0.0
    for _ in range(10):
        a = alg.random_element(rng)
        dev = max(dev, abs((a.star() @ a).norm() - a.norm() ** 2)
                  / (1.0 + a.norm() ** 2))
        b = alg.random_positive(rng)
        lhs = (b @ a).norm() ** 2
        rhs = b.norm() * (a.star() @ b @ a).norm()
        dev = max(dev, max(0.0, lhs - rhs))
    # functional calculus is multiplicative on the spectrum
    p = alg.random_positive(rng) + 0.1 * alg.unit()
    fg = func_calc(p, lambda x: np.sqrt(x) * np.log(x))
    f_g = func_calc(p, np.sqrt) @ func_calc(p, np.log)
    dev = max(dev, (fg - f_g).norm())
    # bicommutant of the canonical representation
    basis = [b.to_canonical() for b in alg.basis()]
    dev = max(dev, span_distance(commutant(commutant(basis, alg.total_dim),
                                           alg.total_dim), basis))
    return dev


def check_weight_order(ctx, rng, tol):
    alg, phi = ctx["alg"], ctx["phi"]
    dev = 0.0
    for _ in range(10):
        a = alg.random_element(rng)
        dev = max(dev, max(0.0, -phi(a.star() @ a).real))
    chain = gphi_chain(phi, 6)
    for earlier, later in zip(chain, chain[1:]):
        if not is_dominated(earlier, later):
            dev = max(dev, 1.0)
    if not is_dominated(chain[-1], phi):
        dev = max(dev, 1.0)
    theta = Functional(alg, [rng.standard_normal((n, n))
                             + 1j * rng.standard_normal((n, n))
                             for n in alg.block_dims])
    abs_t, _ = functional_abs(theta)
    dev = max(dev, abs(theta.trace_norm() - abs_t.trace_norm())
              / (1.0 + theta.trace_norm()))
    for _ in range(50):
        a = alg.random_element(rng)
        lhs = abs(theta(a)) ** 2
        rhs = theta.trace_norm() * abs_t(a.star() @ a).real
        dev = max(dev, max(0.0, lhs - rhs) / (1.0 + rhs))
    return dev


def check_gns_construct(ctx, rng, tol):
    g, phi, alg = ctx["gns"], ctx["phi"], ctx["alg"]
    if g.dim_h != expected_gns_dim(phi):
        return 1.0
    dev = 0.0
    basis = list(alg.basis())
    for a in basis:
        for b in basis:
            dev = max(dev, abs(np.vdot(g.lam(b), g.lam(a)) - phi(b.star() @ a)))
    for _ in range(6):
        a = alg.random_element(rng)
        b = alg.random_element(rng)
        dev = max(dev, np.linalg.norm(g.pi(a) @ g.pi(b) - g.pi(a @ b), 2))
        dev = max(dev, np.linalg.norm(g.pi(a.star()) - g.pi(a).conj().T, 2))
        dev = max(dev, float(np.linalg.norm(g.pi(a) @ g.lam(b) - g.lam(a @ b))))
    dev = max(dev, np.linalg.norm(g.pi(alg.unit()) - np.eye(g.dim_h), 2))
    return dev


def check_combes(ctx, rng, tol):
    alg, phi = ctx["alg"], ctx["phi"]
    dev = 0.0
    for m in (5, 17):
        x = alg.random_positive(rng)
        sup_m, exact, bound = combes_sup(phi, x, m)
        dev = max(dev, abs(exact - sup_m) - bound)
    return max(dev, 0.0)


def random_dominated(phi, rng):
    dens = []
    for d in phi.density:
        n = d.shape[0]
        w, v = np.linalg.eigh(0.5 * (d + d.conj().T))
        scale = rng.uniform(0.05, 0.95, size=n)
        dens.append(v @ np.diag(w * scale) @ v.conj().T)
    return Weight(phi.algebra, dens)


def check_gns_cutoff(ctx, rng, tol):
    g, phi, alg = ctx["gns"], ctx["phi"], ctx["alg"]
    dev = 0.0
    basis = list(alg.basis())
    for _ in range(3):
        omega = random_dominated(phi, rng)
        cut = xi_omega(g, phi, omega)
        w = np.linalg.eigvalsh(cut.t_op)
        dev = max(dev, max(0.0, -w.min()), max(0.0, w.max() - 1.0))
        for m in g.pi_basis:
            dev = max(dev, np.linalg.norm(cut.t_op @ m - m @ cut.t_op, 2))
        for a in basis:
            for b in basis:
                dev = max(dev, abs(np.vdot(g.lam(b), cut.t_op @ g.lam(a))
                                   - omega(b.star() @ a)))
            dev = max(dev, float(np.linalg.norm(
                cut.t_sqrt @ g.lam(a) - g.pi(a) @ cut.xi)))
    return dev


def check_cutoff_chain(ctx, rng, tol):
    g, phi = ctx["gns"], ctx["phi"]
    dev = 0.0
    for k, omega in enumerate(gphi_chain(phi, 6), start=1):
        cut = t_omega(g, phi, omega)
        gap = np.linalg.norm(cut.t_op - np.eye(g.dim_h), 2)
        dev = max(dev, abs(gap - 1.0 / (k + 1)))
    return dev


def check_wstar_lift(ctx, rng, tol):
    g, phi = ctx["gns"], ctx["phi"]
    second, phi_tilde, rep = wstar_lift(g, phi)
    dev = max(rep.span_gap, rep.lift_max_dev)
    for _ in range(20):
        a = ctx["alg"].random_element(rng)
        dev = max(dev, abs(phi_tilde(g.pi(a)) - phi(a)))
    return dev


def check_lift_automorphism(ctx, rng, tol):
    phi, g, alg = ctx["phi_f"], ctx["gns_f"], ctx["alg"]
    d_el = alg.element(phi.density)
    w = func_calc(d_el, lambda x: np.exp(1j * x))
    alpha = gns.ad_unitary_matrix(alg, w)
    u = lift_automorphism(g, phi, alpha, 1.0)
    dev = np.linalg.norm(u.conj().T @ u - np.eye(g.dim_h), 2)
    for _ in range(4):
        b = alg.random_element(rng)
        ab = alg.from_vec(alpha @ b.to_vec())
        dev = max(dev, np.linalg.norm(u @ g.pi(b) @ u.conj().T - g.pi(ab), 2))
        dev = max(dev, float(np.linalg.norm(u @ g.lam(b) - g.lam(ab))))
    return dev


# ---------------------------------------------------------------------------
# kms suite

def check_kms_gibbs(ctx, rng, tol):
    rep = kms_check(ctx["phi_f"], ctx["sigma"], tol, rng)
    return max(rep.dev_invariant, rep.dev_half_shift, rep.dev_strip)


def check_kms_fail(ctx, rng, tol):
    phi, alg = ctx["phi_f"], ctx["alg"]
    h = []
    for hb, n in zip(ctx["sigma"].h, alg.block_dims):
        noise = rng.standard_normal((n, n))
        h.append(hb + np.diag(np.arange(n, dtype=float) + 1.0)
                 + 0.5 * (noise + noise.T))
    perturbed = dynamics.OneParamGroup(alg, tuple(h))
    rep = kms_check(phi, perturbed, tol, rng)
    worst = max(rep.dev_invariant, rep.dev_half_shift, rep.dev_strip)
    if ctx["alg"].total_dim == ctx["alg"].num_blocks:
        return 0.0     # all blocks are scalars, every group is trivial
    return 0.0 if (not rep.passed and worst > 1e-3) else 1.0


def check_gaussian_smooth(ctx, rng, tol):
    alg, g = ctx["alg"], ctx["sigma"]
    dev = 0.0
    for n in (1.0, 2.0, 4.0):
        x = alg.random_element(rng)
        quad, exact = gaussian_smooth(g, x, n)
        dev = max(dev, (quad - exact).norm())
        for s in (-0.7, 1.1):
            left = act(g, s, exact)
            _, right = gaussian_smooth(g, act(g, s, x), n)
            dev = max(dev, (left - right).norm())
    return dev


def check_uniqueness(ctx, rng, tol):
    phi = ctx["phi_f"]
    if not uniqueness_harness(phi, phi):
        return 1.0
    if uniqueness_harness(phi, phi.scale(2.0)):
        return 1.0
    tr = weights.trace_weight(ctx["alg"])
    spread = max(np.linalg.norm(d / np.trace(d).real
                                - np.eye(d.shape[0]) / d.shape[0], 2)
                 for d in phi.density)
    if spread > 1e-6 and uniqueness_harness(phi, tr):
        return 1.0
    return 0.0


# ---------------------------------------------------------------------------
# modular suite

def check_modular_objects(ctx, rng, tol):
    mod, g = ctx["modular"], ctx["gns_f"]
    t, j = mod.t_conj, mod.j_conj
    dim = g.dim_h
    dev = np.linalg.norm(t.adjoint().compose_antilinear(t) - mod.nabla, 2)
    dev = max(dev, np.linalg.norm(
        j.compose_linear_right(mod.nabla_power(0.5)).k - t.k, 2))
    dev = max(dev, np.linalg.norm(j.compose_antilinear(j) - np.eye(dim), 2))
    dev = max(dev, np.linalg.norm(j.k @ j.k.conj().T - np.eye(dim), 2))
    for p in (1.0, -1.0, 0.5, -0.5, 0.25):
        lhs = j.k @ np.conj(mod.nabla_power(p)) @ np.conj(j.k)
        dev = max(dev, np.linalg.norm(lhs - mod.nabla_power(-p), 2))
    for t_par in (-1.0, 0.4):
        lhs = j.k @ np.conj(mod.nabla_power(1j * t_par)) @ np.conj(j.k)
        dev = max(dev, np.linalg.norm(lhs - mod.nabla_power(1j * t_par), 2))
    return dev


def check_modular_group(ctx, rng, tol):
    phi, g, mod, sigma = ctx["phi_f"], ctx["gns_f"], ctx["modular"], ctx["sigma"]
    dev = 0.0
    for t in np.linspace(-1.5, 1.5, 7):
        for _ in range(3):
            a = ctx["alg"].random_element(rng)
            lhs = mod.nabla_power(1j * float(t)) @ g.lam(a)
            rhs = g.lam(act(sigma, float(t), a))
            dev = max(dev, float(np.linalg.norm(lhs - rhs)))
        for _ in range(3):
            x = ctx["alg"].random_element(rng)
            dev = max(dev, abs(phi(act(sigma, float(t), x)) - phi(x)))
    return dev


def check_prop62(ctx, rng, tol):
    g, mod, sigma = ctx["gns_f"], ctx["modular"], ctx["sigma"]
    dev = 0.0
    for _ in range(6):
        x = ctx["alg"].random_element(rng)
        a = ctx["alg"].random_element(rng)
        sa = analytic_ext(sigma, 0.5j, a)
        op = mod.j_conj.conjugate_matrix(g.pi(sa).conj().T)
        dev = max(dev, float(np.linalg.norm(g.lam(x @ a) - op @ g.lam(x))))
    return dev


def check_prop63(ctx, rng, tol):
    phi, sigma = ctx["phi_f"], ctx["sigma"]
    dev = 0.0
    for _ in range(10):
        a = ctx["alg"].random_element(rng)
        x = ctx["alg"].random_element(rng)
        dev = max(dev, abs(phi(a @ x) - phi(x @ analytic_ext(sigma, -1j, a))))
    return dev


# ---------------------------------------------------------------------------
# tomita suite

def check_tomita(ctx, rng, tol):
    ok, gap = tomita_check(ctx["gns_f"], ctx["modular"], tol)
    return gap


def check_pi_bicommutant(ctx, rng, tol):
    g = ctx["gns_f"]
    second = commutant(commutant(g.pi_basis, g.dim_h), g.dim_h)
    return span_distance(second, g.pi_basis)


# ---------------------------------------------------------------------------
# slice suite (x in A (x) B, weight psi on B)

def check_slice_fubini(ctx, rng, tol):
    alg_a, alg_b, psi = ctx["alg"], ctx["talg"], ctx["psi"]
    dev = 0.0
    for _ in range(10):
        x = random_tensor(alg_a, alg_b, rng)
        theta = Functional(alg_a, [rng.standard_normal((n, n))
                                   + 1j * rng.standard_normal((n, n))
                                   for n in alg_a.block_dims])
        dev = max(dev, fubini_check(x, theta, psi))
        dev = max(dev, (slice_reconstruct(x, psi) - slice_b(x, psi)).norm())
    xp = random_tensor(alg_a, alg_b, rng)
    xp = xp.star() @ xp
    val = slice_b(xp, psi)
    if not is_positive(val, tol):
        dev = max(dev, 1.0)
    w = random_tensor(alg_a, alg_b, rng)
    y = xp + w.star() @ w
    if not is_positive(slice_b(y, psi) - val, tol):
        dev = max(dev, 1.0)
    return dev


def check_slice_cs(ctx, rng, tol):
    dev = 0.0
    for _ in range(25):
        x = random_tensor(ctx["alg"], ctx["talg"], rng)
        y = random_tensor(ctx["alg"], ctx["talg"], rng)
        dev = max(dev, max(0.0, -cs_operator_inequality(x, y, ctx["psi"])))
    return dev


def check_slice_abs(ctx, rng, tol):
    dev = 0.0
    for _ in range(25):
        x = random_tensor(ctx["alg"], ctx["talg"], rng)
        theta = Functional(ctx["alg"], [rng.standard_normal((n, n))
                                        + 1j * rng.standard_normal((n, n))
                                        for n in ctx["alg"].block_dims])
        dev = max(dev, max(0.0, -abs_theta_inequality(x, theta)))
    return dev


def check_ksgns(ctx, rng, tol):
    psi, gp = ctx["psi"], ctx["gns_psi"]
    dev = 0.0
    for _ in range(5):
        x = random_tensor(ctx["alg"], ctx["talg"], rng)
        y = random_tensor(ctx["alg"], ctx["talg"], rng)
        vx, vy = ksgns(x, psi, gp), ksgns(y, psi, gp)
        dev = max(dev, (vx.module_inner(vy) - slice_b(y.star() @ x, psi)).norm())
        dev = max(dev, (vx.module_inner(vx) - slice_b(x.star() @ x, psi)).norm())
        # basis independence of sum q_i* q_i
        q, _ = np.linalg.qr(rng.standard_normal((gp.dim_h, gp.dim_h))
                            + 1j * rng.standard_normal((gp.dim_h, gp.dim_h)))
        rot = vx.apply_h_operator(q)
        dev = max(dev, (rot.module_inner(rot) - vx.module_inner(vx)).norm())
    a = ctx["alg"].random_element(rng)
    b = ctx["talg"].random_element(rng)
    v_el = ksgns(tensor_embed(a, b), psi, gp)
    lam_b = gp.lam(b)
    direct = [complex(c) * a for c in lam_b]
    dev = max(dev, max((q - d).frobenius()
                       for q, d in zip(v_el.components, direct)))
    return dev


def check_slice_cutoff(ctx, rng, tol):
    psi, gp = ctx["psi"], ctx["gns_psi"]
    dev = 0.0
    for _ in range(3):
        omega = random_dominated(psi, rng)
        cut = xi_omega(gp, psi, omega)
        x = random_tensor(ctx["alg"], ctx["talg"], rng)
        y = random_tensor(ctx["alg"], ctx["talg"], rng)
        d1, d2 = ksgns_cutoff(x, psi, gp, cut, y)
        dev = max(dev, d1, d2)
    return dev


def check_dominated_convergence(ctx, rng, tol):
    x = random_tensor(ctx["alg"], ctx["talg"], rng)
    x = x.star() @ x
    xs = [(k / (k + 1.0)) * x for k in range(1, 7)]
    rates = dominated_convergence(xs, x, ctx["psi"])
    target = slice_b(x, ctx["psi"]).norm()
    dev = max(abs(r - target / (k + 1.0))
              for k, r in enumerate(rates, start=1))

    # monotone compressions x_k = x^{1/2} p_k x^{1/2} with p_k increasing to 1
    roots = [[None] * len(row) for row in x.blocks]
    for i, row in enumerate(x.blocks):
        for j, blk in enumerate(row):
            w, v = np.linalg.eigh(0.5 * (blk + blk.conj().T))
            roots[i][j] = v @ np.diag(np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T
    units = [[rng.standard_normal(b.shape[0]) + 1j * rng.standard_normal(b.shape[0])
              for b in row] for row in x.blocks]
    units = [[u / np.linalg.norm(u) for u in row] for row in units]
    xs2 = []
    for k in range(1, 6):
        blocks = []
        for i, row in enumerate(x.blocks):
            rb = []
            for j, blk in enumerate(row):
                u = units[i][j]
                p = np.eye(blk.shape[0]) - (1.0 / (k + 1)) * np.outer(u, u.conj())
                rb.append(roots[i][j] @ p @ roots[i][j])
            blocks.append(rb)
        xs2.append(slicemaps.TensorElement(x.alg_a, x.alg_b, blocks))
    rates2 = dominated_convergence(xs2, x, ctx["psi"])
    for k, r in enumerate(rates2, start=1):
        if k > 1 and r > rates2[k - 2] + tol:
            dev = max(dev, r - rates2[k - 2])
    return dev


def check_slice_module(ctx, rng, tol):
    psi, gp = ctx["psi"], ctx["gns_psi"]
    x = random_tensor(ctx["alg"], ctx["talg"], rng)
    a = ctx["alg"].random_element(rng)
    b = ctx["talg"].random_element(rng)
    d_mod, d_v, d_w = slice_module_props(x, psi, gp, a, b,
                                         ctx["modular_psi"], ctx["sigma_psi"])
    return max(d_mod, d_v, d_w)


def check_slice_aut(ctx, rng, tol):
    psi, gp, talg = ctx["psi"], ctx["gns_psi"], ctx["talg"]
    d_el = talg.element(psi.density)
    w = func_calc(d_el, lambda v: np.exp(1j * v))
    theta_mat = gns.ad_unitary_matrix(talg, w)
    u = lift_automorphism(gp, psi, theta_mat, 1.0)
    x = random_tensor(ctx["alg"], talg, rng)
    d1, d2 = slice_automorphism(x, psi, gp, theta_mat, 1.0, u)
    return max(d1, d2)


def check_cp_slice(ctx, rng, tol):
    alg_a, alg_c, psi, gp = ctx["alg"], ctx["talg"], ctx["psi"], ctx["gns_psi"]
    na, nb = alg_a.total_dim, alg_a.total_dim
    kraus = [rng.standard_normal((nb, na)) + 1j * rng.standard_normal((nb, na))
             for _ in range(2)]
    # keep the map block-respecting: compress each Kraus to the block pattern
    mask = np.zeros((na, na))
    k0 = 0
    for n in alg_a.block_dims:
        mask[k0:k0 + n, k0:k0 + n] = 1.0
        k0 += n
    rho = PairedMap(alg_a, alg_a, [(v * mask, v * mask) for v in kraus])
    if not rho.is_cp():
        return 1.0
    x = random_tensor(alg_a, alg_c, rng)
    v = rng.standard_normal(gp.dim_h) + 1j * rng.standard_normal(gp.dim_h)
    d1, d2 = cp_slice(rho, x, psi, gp, v)
    bad = PairedMap(alg_a, alg_a, [(kraus[0] * mask, -(kraus[0] * mask))])
    rejected = 0.0
    try:
        cp_slice(bad, x, psi, gp, v)
        if bad.choi_min_eig() < -1e-6:
            rejected = 1.0
    except slicemaps.CpError:
        pass
    return max(d1, d2, rejected)


def check_lemma6(ctx, rng, tol):
    psi, gp = ctx["psi"], ctx["gns_psi"]
    dev = 0.0
    for _ in range(6):
        x = random_tensor(ctx["alg"], ctx["talg"], rng)
        a = ctx["alg"].random_element(rng)
        b = ctx["alg"].random_element(rng)
        omega = Functional(ctx["alg"], [rng.standard_normal((n, n))
                                        + 1j * rng.standard_normal((n, n))
                                        for n in ctx["alg"].block_dims])
        v = rng.standard_normal(gp.dim_h) + 1j * rng.standard_normal(gp.dim_h)
        dev = max(dev, lemma6_check(x, psi, gp, a, b, omega, v))
    return dev


# ---------------------------------------------------------------------------
# tensor suite (phi on A, psi on B, both faithful surrogates)

def check_tensor_weight(ctx, rng, tol):
    phi, psi = ctx["phi_f"], ctx["psi"]
    pw = tensor_weight(phi, psi)
    dev = 0.0
    for _ in range(5):
        a = ctx["alg"].random_element(rng)
        b = ctx["talg"].random_element(rng)
        xe = to_product_element(tensor_embed(a, b), pw.algebra)
        dev = max(dev, abs(pw(xe) - phi(a) * psi(b)))
    x = random_tensor(ctx["alg"], ctx["talg"], rng)
    x = x.star() @ x
    from .tensorprod import tensor_weight_certificate
    _, gaps, bounds = tensor_weight_certificate(phi, psi, x)
    dev = max(dev, max(max(0.0, g - b) for g, b in zip(gaps, bounds)))
    return dev


def check_joint_gns(ctx, rng, tol):
    joint = ctx["joint"]
    u = joint.u
    dh = joint.gns_a.dim_h * joint.gns_b.dim_h
    dev = np.linalg.norm(u.conj().T @ u - np.eye(dh), 2)
    dev = max(dev, np.linalg.norm(u @ u.conj().T
                                  - np.eye(joint.gns_joint.dim_h), 2))
    for _ in range(3):
        a = ctx["alg"].random_element(rng)
        b = ctx["talg"].random_element(rng)
        x = tensor_embed(a, b)
        lhs = joint.lam_tensor(x)
        rhs = np.kron(joint.gns_a.lam(a), joint.gns_b.lam(b))
        dev = max(dev, float(np.linalg.norm(lhs - rhs)))
        xe = to_product_element(x, joint.prod)
        dev = max(dev, np.linalg.norm(
            u @ joint.pi_tensor(x) - joint.gns_joint.pi(xe) @ u, 2))
    for _ in range(3):
        x = random_tensor(ctx["alg"], ctx["talg"], rng)
        v = joint.lam_tensor(x)
        xe = to_product_element(x.star() @ x, joint.prod)
        dev = max(dev, abs(float(np.vdot(v, v).real) - joint.weight(xe).real))
    return dev


def check_tensor_cutoff(ctx, rng, tol):
    joint = ctx["joint"]
    omega = random_dominated(ctx["phi_f"], rng)
    theta = random_dominated(ctx["psi"], rng)
    x = random_tensor(ctx["alg"], ctx["talg"], rng)
    d1, d2 = tensor_cutoff(joint, omega, theta, x)
    return max(d1, d2)


def check_tensor_fubini(ctx, rng, tol):
    dev = 0.0
    for _ in range(6):
        x = random_tensor(ctx["alg"], ctx["talg"], rng)
        a = ctx["talg"].random_element(rng)
        d1, d2 = tensor_fubini(x, ctx["phi_f"], ctx["psi"], a)
        dev = max(dev, d1, d2)
    return dev


def check_basis_expansion(ctx, rng, tol):
    joint = ctx["joint"]
    dev = 0.0
    for _ in range(3):
        x = random_tensor(ctx["alg"], ctx["talg"], rng)
        y = ctx["talg"].random_element(rng)
        d1, d2 = basis_expansion(joint, x, y)
        dev = max(dev, d1, d2)
        q, _ = np.linalg.qr(rng.standard_normal((joint.gns_b.dim_h,) * 2)
                            + 1j * rng.standard_normal((joint.gns_b.dim_h,) * 2))
        d1r, d2r = basis_expansion(joint, x, y, q)
        dev = max(dev, d1r, d2r)
    return dev


def check_tensor_relinv(ctx, rng, tol):
    joint = ctx["joint"]
    phi, psi = ctx["phi_f"], ctx["psi"]
    wa = func_calc(ctx["alg"].element(phi.density), lambda v: np.exp(1j * v))
    wb = func_calc(ctx["talg"].element(psi.density), lambda v: np.exp(2j * v))
    alpha = gns.ad_unitary_matrix(ctx["alg"], wa)
    beta = gns.ad_unitary_matrix(ctx["talg"], wb)
    x = random_tensor(ctx["alg"], ctx["talg"], rng)
    d1, d2 = tensor_rel_invariance(joint, alpha, 1.0, beta, 1.0, x)
    mis = 0.0
    try:
        tensor_rel_invariance(joint, alpha, 2.0, beta, 1.0, x)
        mis = 1.0
    except gns.InvarianceError:
        pass
    return max(d1, d2, mis)


def check_kms_tensor(ctx, rng, tol):
    devs = kms_tensor(ctx["joint"], rng=rng)
    return max(devs.values())


def check_state_case(ctx, rng, tol):
    phi, psi = ctx["phi_f"], ctx["psi"]
    sphi = phi.scale(1.0 / sum(np.trace(d).real for d in phi.density))
    spsi = psi.scale(1.0 / sum(np.trace(d).real for d in psi.density))
    joint = joint_gns(sphi, spsi)
    dev = 0.0
    for _ in range(3):
        x = random_tensor(ctx["alg"], ctx["talg"], rng)
        dev = max(dev, state_case(joint, x))
    return dev


# ---------------------------------------------------------------------------
# hullx suite

def check_hull_project(ctx, rng, tol):
    dev = 0.0
    for npts in (4, 8, 12):
        pts = [rng.standard_normal(6) for _ in range(npts)]
        target = rng.standard_normal(6) * 1.5
        near, lam, gap = hullx.hull_project(pts, target)
        _, _, best = hullx.hull_project_bruteforce(pts, target)
        dev = max(dev, abs(float(np.linalg.norm(near - target)) - best))
        dev = max(dev, max(0.0, -lam.min()), abs(lam.sum() - 1.0))
    return dev


def check_convex_extract(ctx, rng, tol):
    dev = 0.0
    dim = 5
    x_lim = rng.standard_normal(dim)
    x_lim /= np.linalg.norm(x_lim)  # keeps the 1/n tail inside the sample
    w1 = rng.standard_normal(dim)
    w2 = rng.standard_normal(dim)
    pts, vals = [], []
    for i in range(1, 81):
        pts.append((1.0 - 1.0 / (i + 1)) * x_lim)
        vals.append(w1 if i % 2 == 0 else w2)
    prob = hullx.ExtractionProblem(pts, vals, x_lim)
    v, records = hullx.convex_extract(prob, n_max=50)
    for rec in records:
        if not rec.feasible:
            dev = max(dev, max(rec.dev_value - 1.0 / rec.n,
                               rec.dev_point - 1.0 / rec.n))
    max_y = max(float(np.linalg.norm(rec.y)) for rec in records)
    max_x = max(float(np.linalg.norm(p)) for p in pts)
    dev = max(dev, max(0.0, max_y - max_x - 1e-12))
    return dev


def check_strong_star(ctx, rng, tol):
    dim = 3
    x_lim = rng.standard_normal((dim, dim))
    x_lim /= np.linalg.norm(x_lim, 2)  # unit spectral norm
    wit = [w / np.linalg.norm(w) for w in
           (rng.standard_normal(dim) for _ in range(2))]
    pts = [(1.0 - 1.0 / (i + 1)) * x_lim for i in range(1, 61)]
    vals = [rng.standard_normal(4) * 0 + (1.0 if i % 2 else -1.0)
            * np.ones(4) for i in range(1, 61)]
    v, records = hullx.strong_star_variant(pts, vals, x_lim, wit, n_max=30)
    dev = 0.0
    for rec in records:
        if not rec.feasible:
            dev = max(dev, max(rec.dev_value - 1.0 / rec.n,
                               rec.dev_point - 1.0 / rec.n))
    return dev


# ---------------------------------------------------------------------------
# integrate suite

def check_integrate_commute(ctx, rng, tol):
    alg, g = ctx["alg"], ctx["sigma"]
    a = alg.random_element(rng)
    f = lambda t: np.exp(-t * t)
    _, _, dev1 = integrate_commute(f, g, a, ctx["gns_f"].lam_matrix)
    hom = np.eye(alg.coord_dim)  # the identity *-homomorphism on coordinates
    _, _, dev2 = integrate_commute(f, g, a, hom)
    return max(dev1, dev2)


def check_int_res1(ctx, rng, tol):
    alg, g = ctx["alg"], ctx["sigma"]
    a = alg.random_element(rng)
    f = lambda t: np.exp(-t * t)
    f_mass = float(np.sqrt(np.pi))
    full, _, _ = integrate_commute(f, g, a, np.eye(alg.coord_dim))
    dev = 0.0
    for k in (1, 3, 9):
        ak = (k / (k + 1.0)) * a
        part, _, _ = integrate_commute(f, g, ak, np.eye(alg.coord_dim))
        gap = alg.from_vec(full - part).norm()
        bound = a.norm() / (k + 1.0) * f_mass
        dev = max(dev, max(0.0, gap - bound - 1e-10))
    return dev


# ---------------------------------------------------------------------------
# registry

CHECKS = [
    # (id, suite, anchor, tolerance, fn)
    ("gns.algebra", "gns", "Lemma weight.lem1", 1e-9, check_algebra_substrate),
    ("gns.weights", "gns", "Def sweight.def1", 1e-9, check_weight_order),
    ("gns.construct", "gns", "GNS construction (§1.1)", 1e-10, check_gns_construct),
    ("gns.combes", "gns", "Thm weight.thm1", 1e-10, check_combes),
    ("gns.cutoff", "gns", "Notation weight.not1", 1e-9, check_gns_cutoff),
    ("gns.chain", "gns", "Prop weight.prop5", 1e-10, check_cutoff_chain),
    ("gns.lift", "gns", "Def weight.def6", 1e-9, check_wstar_lift),
    ("gns.autlift", "gns", "§2 lifted automorphism", 1e-9, check_lift_automorphism),
    ("kms.gibbs", "kms", "Def sweight.def2", 1e-7, check_kms_gibbs),
    ("kms.fail", "kms", "Def sweight.def2", 1e-7, check_kms_fail),
    ("kms.smooth", "kms", "Prop sweight.prop1", 1e-8, check_gaussian_smooth),
    ("kms.uniqueness", "kms", "Cor sweight.cor1", 1e-7, check_uniqueness),
    ("modular.objects", "modular", "Prop weight.prop6", 1e-9, check_modular_objects),
    ("modular.group", "modular", "Def sweight.def2", 1e-9, check_modular_group),
    ("modular.prop62", "modular", "Prop weight.prop6 (2)", 1e-8, check_prop62),
    ("modular.prop63", "modular", "Prop weight.prop6 (3)", 1e-8, check_prop63),
    ("tomita.jmj", "tomita", "§2 Tomita-Takesaki", 1e-8, check_tomita),
    ("tomita.bicommutant", "tomita", "§2 bicommutant", 1e-9, check_pi_bicommutant),
    ("slice.fubini", "slice", "Prop weight.prop1", 1e-10, check_slice_fubini),
    ("slice.cs", "slice", "Prop weight.prop3", 1e-9, check_slice_cs),
    ("slice.abs", "slice", "§3 |θ| lemma", 1e-9, check_slice_abs),
    ("slice.ksgns", "slice", "Prop weight.prop2", 1e-9, check_ksgns),
    ("slice.cutoff", "slice", "Result cutoff / Cor weight.cor1", 1e-9, check_slice_cutoff),
    ("slice.domconv", "slice", "Prop weight.prop8", 1e-9, check_dominated_convergence),
    ("slice.module", "slice", "§3 module + KMS propositions", 1e-8, check_slice_module),
    ("slice.aut", "slice", "§3 automorphism covariance", 1e-9, check_slice_aut),
    ("slice.cp", "slice", "§3 CP proposition", 1e-9, check_cp_slice),
    ("slice.lem6", "slice", "Lemma weight.lem6", 1e-9, check_lemma6),
    ("tensor.weight", "tensor", "§4 product weight", 1e-9, check_tensor_weight),
    ("tensor.joint", "tensor", "Def leukedef", 1e-9, check_joint_gns),
    ("tensor.cutoff", "tensor", "Prop weight.prop12", 1e-9, check_tensor_cutoff),
    ("tensor.fubini", "tensor", "Results tensor.res1/res2", 1e-10, check_tensor_fubini),
    ("tensor.basis", "tensor", "Prop tensor.prop1", 1e-9, check_basis_expansion),
    ("tensor.relinv", "tensor", "Props weight.prop16/17", 1e-9, check_tensor_relinv),
    ("tensor.kms", "tensor", "§4 KMS prop / Prop tensor.prop2", 1e-8, check_kms_tensor),
    ("tensor.state", "tensor", "Prop weight.prop13", 1e-9, check_state_case),
    ("hullx.project", "hullx", "Lemma app.lem1 (projection)", 1e-8, check_hull_project),
    ("hullx.extract", "hullx", "Lemma app.lem1", 1e-9, check_convex_extract),
    ("hullx.strongstar", "hullx", "Lemma app.lem2", 1e-9, check_strong_star),
    ("integrate.commute", "integrate", "§5 integral commutation", 1e-10, check_integrate_commute),
    ("integrate.res1", "integrate", "Result int.res1", 1e-9, check_int_res1),
]

SUITES = ("gns", "kms", "modular", "tomita", "slice", "tensor", "hullx", "integrate")


def coverage_manifest():
    """suite id -> check ids; every suite must be nonempty."""
    man = {s: [] for s in SUITES}
    for cid, suite, *_ in CHECKS:
        man[suite].append(cid)
    return man


def check_rng(seed: int, check_id: str) -> np.random.Generator:
    return np.random.default_rng([seed, zlib.crc32(check_id.encode())])


def run_suites(inst: dict, suites=None, tol_override: float | None = None):
    """Execute the selected suites; returns the report dict."""
    suites = list(suites) if suites else list(SUITES)
    for s in suites:
        if s not in SUITES:
            raise ValueError(f"unknown suite: {s}")
    ctx = build_context(inst)
    selected = [c for c in CHECKS if c[1] in suites]

    max_workers = int(os.environ.get("WEIGHTLAB_THREADS", "0")) or None

    def run_one(entry):
        cid, suite, anchor, tol, fn = entry
        tol = tol_override if tol_override is not None else tol
        rng = check_rng(inst["seed"], cid)
        start = time.perf_counter()
        try:
            dev = float(fn(ctx, rng, tol))
            error = None
        except Exception as exc:   # a crashed check is a failed check
            dev, error = float("inf"), f"{type(exc).__name__}: {exc}"
        elapsed = time.perf_counter() - start
        return {
            "id": cid, "suite": suite, "anchor": anchor,
            "deviation": dev if np.isfinite(dev) else 1e308,
            "tolerance": tol, "passed": bool(dev <= tol),
            "seconds": round(elapsed, 4),
            **({"error": error} if error else {}),
        }

    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        records = list(pool.map(run_one, selected))

    records.sort(key=lambda r: r["id"])
    failed = [r for r in records if not r["passed"]]
    return {
        "schema_version": SCHEMA_VERSION,
        "seed": inst["seed"],
        "suites": suites,
        "environment": {"numpy": np.__version__},
        "counts": {"total": len(records), "passed": len(records) - len(failed),
                   "failed": len(failed)},
        "checks": records,
    }
