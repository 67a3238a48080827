import numpy as np
import pytest

from weightlab.algebra import make_algebra
from weightlab.dynamics import (AntilinearMap, FaithfulnessError, OneParamGroup,
                                act, analytic_ext, gaussian_smooth,
                                gibbs_weight, integrate_commute, kms_check,
                                modular_group_of, modular_objects, tomita_check,
                                trivial_group, uniqueness_harness)
from weightlab.gns import gns_construct
from weightlab.weights import Weight, random_faithful_weight, trace_weight


def diag_group(values):
    alg = make_algebra([len(values)])
    return alg, OneParamGroup(alg, (np.diag(np.asarray(values, dtype=float)),))


def test_group_law():
    alg = make_algebra([2, 2])
    rng = np.random.default_rng(0)
    h = tuple(0.5 * (m + m.conj().T) for m in
              (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
               for _ in range(2)))
    g = OneParamGroup(alg, h)
    x = alg.random_element(rng)
    assert (act(g, 0.0, x) - x).norm() <= 1e-12
    for s, t in [(0.3, -1.1), (1.7, 0.4)]:
        lhs = act(g, s, act(g, t, x))
        rhs = act(g, s + t, x)
        assert (lhs - rhs).norm() <= 1e-10
    sa = act(g, 0.9, x.star())
    assert (sa - act(g, 0.9, x).star()).norm() <= 1e-10


def test_act_eigenbasis_phase():
    alg, g = diag_group([0.0, 1.5])
    e12 = alg.matrix_unit(0, 0, 1)
    out = act(g, 2.0, e12)
    assert out.blocks[0][0, 1] == pytest.approx(np.exp(-3.0j))


def test_analytic_ext():
    alg, g = diag_group([0.0, 2.0])
    assert (analytic_ext(g, 0.5j, alg.unit()) - alg.unit()).norm() <= 1e-12
    e12 = alg.matrix_unit(0, 0, 1)
    out = analytic_ext(g, 0.5j, e12)
    assert out.blocks[0][0, 1] == pytest.approx(np.e)
    rng = np.random.default_rng(1)
    x, y = alg.random_element(rng), alg.random_element(rng)
    z = 0.3 - 0.8j
    lhs = analytic_ext(g, z, x) @ analytic_ext(g, z, y)
    assert (lhs - analytic_ext(g, z, x @ y)).norm() <= 1e-9
    assert (analytic_ext(g, 1.2, x) - act(g, 1.2, x)).norm() <= 1e-12


def test_gaussian_smooth_invariant_element():
    alg, g = diag_group([0.0, 2.0])
    quad, exact = gaussian_smooth(g, alg.unit(), 1.0)
    assert (quad - alg.unit()).norm() <= 1e-10
    assert (exact - alg.unit()).norm() <= 1e-12


def test_gaussian_smooth_closed_form():
    alg, g = diag_group([0.0, 2.0])
    e12 = alg.matrix_unit(0, 0, 1)
    quad, exact = gaussian_smooth(g, e12, 1.0)
    assert exact.blocks[0][0, 1] == pytest.approx(np.exp(-1.0), abs=1e-12)
    assert (quad - exact).norm() <= 1e-8


def test_gaussian_smooth_quadrature_accuracy():
    alg = make_algebra([3])
    rng = np.random.default_rng(2)
    h = rng.standard_normal((3, 3))
    g = OneParamGroup(alg, (0.5 * (h + h.T),))
    for n in (1.0, 2.0, 4.0):
        x = alg.random_element(rng)
        quad, exact = gaussian_smooth(g, x, n)
        assert (quad - exact).norm() <= 1e-8


def test_kms_tracial_trivial():
    alg = make_algebra([2])
    rep = kms_check(trace_weight(alg), trivial_group(alg))
    assert rep.passed


def test_kms_gibbs_pair():
    alg = make_algebra([3])
    rng = np.random.default_rng(3)
    h = rng.standard_normal((3, 3))
    h = 0.5 * (h + h.T)
    phi = gibbs_weight(alg, [h])
    g = modular_group_of(phi)
    rep = kms_check(phi, g, 1e-8)
    assert rep.passed, (rep.dev_invariant, rep.dev_half_shift, rep.dev_strip)


def test_kms_designed_failure():
    alg = make_algebra([2])
    phi = Weight(alg, [np.diag([0.2, 0.8])])
    bad = OneParamGroup(alg, (np.array([[0.0, 1.0], [1.0, 0.0]]),))
    rep = kms_check(phi, bad, 1e-7)
    assert not rep.passed
    assert max(rep.dev_invariant, rep.dev_half_shift, rep.dev_strip) > 1e-3


def test_modular_group_example():
    alg = make_algebra([2])
    phi = Weight(alg, [np.diag([1 / 3, 2 / 3])])
    sig = modular_group_of(phi)
    e12 = alg.matrix_unit(0, 0, 1)
    out = act(sig, 1.0, e12)
    assert out.blocks[0][0, 1] == pytest.approx(2.0 ** (-1j))
    assert kms_check(phi, sig, 1e-9).passed


def test_modular_group_needs_faithful():
    alg = make_algebra([2])
    with pytest.raises(FaithfulnessError):
        modular_group_of(Weight(alg, [np.diag([1.0, 0.0])]))


def test_modular_objects_tracial():
    alg = make_algebra([2])
    tr = trace_weight(alg)
    g = gns_construct(tr)
    mod = modular_objects(tr, g)
    assert np.linalg.norm(mod.nabla - np.eye(4), 2) <= 1e-10
    rng = np.random.default_rng(4)
    a = alg.random_element(rng)
    assert np.linalg.norm(mod.j_conj(g.lam(a)) - g.lam(a.star())) <= 1e-10


def test_modular_spectrum_example():
    alg = make_algebra([2])
    phi = Weight(alg, [np.diag([1 / 3, 2 / 3])])
    mod = modular_objects(phi, gns_construct(phi))
    spec = np.sort(np.linalg.eigvalsh(mod.nabla))
    assert np.allclose(spec, [0.5, 1.0, 1.0, 2.0], atol=1e-10)


def test_modular_triple_invariants():
    alg = make_algebra([2, 3])
    rng = np.random.default_rng(5)
    phi = random_faithful_weight(alg, rng)
    g = gns_construct(phi)
    mod = modular_objects(phi, g)
    t, j = mod.t_conj, mod.j_conj
    dim = g.dim_h
    assert np.linalg.norm(t.adjoint().compose_antilinear(t) - mod.nabla, 2) <= 1e-10
    assert np.linalg.norm(
        j.compose_linear_right(mod.nabla_power(0.5)).k - t.k, 2) <= 1e-9
    assert np.linalg.norm(j.compose_antilinear(j) - np.eye(dim), 2) <= 1e-10
    # J antiunitary
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    w = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    assert abs(np.vdot(j(w), j(v)) - np.conj(np.vdot(w, v))) <= 1e-10
    for p in (1.0, -1.0, 0.5, -0.5, 0.25):
        lhs = j.k @ np.conj(mod.nabla_power(p)) @ np.conj(j.k)
        assert np.linalg.norm(lhs - mod.nabla_power(-p), 2) <= 1e-9
    for tt in (-0.7, 1.3):
        lhs = j.k @ np.conj(mod.nabla_power(1j * tt)) @ np.conj(j.k)
        assert np.linalg.norm(lhs - mod.nabla_power(1j * tt), 2) <= 1e-9


def test_nabla_implements_sigma():
    alg = make_algebra([2, 2])
    rng = np.random.default_rng(6)
    phi = random_faithful_weight(alg, rng)
    g = gns_construct(phi)
    mod = modular_objects(phi, g)
    sig = modular_group_of(phi)
    for t in np.linspace(-1.0, 1.0, 5):
        a = alg.random_element(rng)
        lhs = mod.nabla_power(1j * float(t)) @ g.lam(a)
        assert np.linalg.norm(lhs - g.lam(act(sig, float(t), a))) <= 1e-9


def test_prop6_identities():
    alg = make_algebra([2])
    rng = np.random.default_rng(7)
    phi = random_faithful_weight(alg, rng)
    g = gns_construct(phi)
    mod = modular_objects(phi, g)
    sig = modular_group_of(phi)
    for _ in range(5):
        x, a = alg.random_element(rng), alg.random_element(rng)
        sa = analytic_ext(sig, 0.5j, a)
        op = mod.j_conj.conjugate_matrix(g.pi(sa).conj().T)
        assert np.linalg.norm(g.lam(x @ a) - op @ g.lam(x)) <= 1e-8
        assert abs(phi(a @ x) - phi(x @ analytic_ext(sig, -1j, a))) <= 1e-8


def test_tomita():
    alg = make_algebra([2, 3])
    phi = random_faithful_weight(alg, np.random.default_rng(8))
    g = gns_construct(phi)
    mod = modular_objects(phi, g)
    ok, gap = tomita_check(g, mod)
    assert ok, gap
    # dimension bookkeeping: JMJ has the dimension of the commutant
    from weightlab.algebra import commutant
    comm = commutant(g.pi_basis, g.dim_h)
    jmj = [mod.j_conj.conjugate_matrix(m) for m in g.pi_basis]
    rank = np.linalg.matrix_rank(np.vstack([m.reshape(1, -1) for m in jmj]))
    assert rank == len(comm)


def test_uniqueness_harness():
    alg = make_algebra([2])
    phi = Weight(alg, [np.diag([0.25, 0.75])])
    assert uniqueness_harness(phi, phi)
    assert not uniqueness_harness(phi, phi.scale(2.0))
    assert not uniqueness_harness(phi, trace_weight(alg).scale(0.5))


def test_antilinear_composition_rules():
    rng = np.random.default_rng(9)
    k1 = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    k2 = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    a1, a2 = AntilinearMap(k1), AntilinearMap(k2)
    v = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    assert np.allclose(a1(a2(v)), a1.compose_antilinear(a2) @ v)
    w = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    assert np.vdot(w, a1(v)) == pytest.approx(np.vdot(v, a1.adjoint()(w)))


def test_integrate_commute():
    alg = make_algebra([2, 2])
    rng = np.random.default_rng(10)
    phi = random_faithful_weight(alg, rng)
    g = modular_group_of(phi)
    gns = gns_construct(phi)
    a = alg.random_element(rng)
    f = lambda t: np.exp(-t * t)
    _, _, dev_id = integrate_commute(f, g, a, np.eye(alg.coord_dim))
    assert dev_id <= 1e-12
    _, _, dev_lam = integrate_commute(f, g, a, gns.lam_matrix)
    assert dev_lam <= 1e-10


def test_integrate_res1_rate():
    alg = make_algebra([2])
    rng = np.random.default_rng(11)
    phi = random_faithful_weight(alg, rng)
    g = modular_group_of(phi)
    a = alg.random_element(rng)
    f = lambda t: np.exp(-t * t)
    full, _, _ = integrate_commute(f, g, a, np.eye(alg.coord_dim))
    for k in (1, 2, 5, 20):
        part, _, _ = integrate_commute(f, g, (k / (k + 1.0)) * a,
                                       np.eye(alg.coord_dim))
        gap = alg.from_vec(full - part).norm()
        assert gap <= a.norm() / (k + 1.0) * np.sqrt(np.pi) + 1e-10
