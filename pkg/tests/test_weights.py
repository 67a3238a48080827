import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from weightlab.algebra import DomainError, ShapeError, make_algebra
from weightlab.weights import (Functional, Weight, combes_sup, functional_abs,
                               gphi_chain, is_dominated,
                               random_dominated_chain, random_faithful_weight,
                               trace_weight)


def test_eval_trace():
    alg = make_algebra([2])
    tr = trace_weight(alg)
    assert tr(alg.unit()) == pytest.approx(2.0)
    phi = Weight(alg, [np.diag([1 / 3, 2 / 3])])
    assert phi(alg.matrix_unit(0, 0, 0)).real == pytest.approx(1 / 3)


def test_weight_rejects_bad_density():
    alg = make_algebra([2])
    with pytest.raises(DomainError):
        Weight(alg, [np.array([[0.0, 1.0], [0.0, 0.0]])])
    with pytest.raises(DomainError):
        Weight(alg, [np.diag([1.0, -0.5])])


def test_eval_shape_error():
    phi = trace_weight(make_algebra([2]))
    with pytest.raises(ShapeError):
        phi(make_algebra([3]).unit())


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_positivity_on_positives(seed):
    rng = np.random.default_rng(seed)
    alg = make_algebra([2, 2])
    phi = random_faithful_weight(alg, rng)
    a = alg.random_element(rng)
    assert phi(a.star() @ a).real >= -1e-10


def test_is_dominated_scalars():
    alg = make_algebra([2, 3])
    phi = random_faithful_weight(alg, np.random.default_rng(0))
    assert is_dominated(phi.scale(0.5), phi)
    assert not is_dominated(phi.scale(2.0), phi)


def test_domination_transitivity():
    alg = make_algebra([2])
    rng = np.random.default_rng(1)
    chi = random_faithful_weight(alg, rng)
    phi = chi.scale(0.8)
    omega = phi.scale(0.6)
    assert is_dominated(omega, phi) and is_dominated(phi, chi)
    assert is_dominated(omega, chi)


def test_domination_agrees_with_sampling():
    alg = make_algebra([2, 2])
    rng = np.random.default_rng(2)
    phi = random_faithful_weight(alg, rng)
    omega = phi.scale(0.7)
    assert is_dominated(omega, phi)
    for _ in range(200):
        x = alg.random_positive(rng)
        assert phi(x).real - omega(x).real >= -1e-10


def test_gphi_chain():
    alg = make_algebra([2])
    phi = trace_weight(alg)
    chain = gphi_chain(phi, 3)
    assert [w.density[0][0, 0].real for w in chain] == \
        pytest.approx([1 / 2, 2 / 3, 3 / 4])
    rng = np.random.default_rng(3)
    x = alg.random_positive(rng)
    vals = [w(x).real for w in chain]
    assert vals == sorted(vals)
    assert is_dominated(chain[-1], phi)
    # directedness shadow: later elements dominate earlier ones
    for earlier, later in zip(chain, chain[1:]):
        assert is_dominated(earlier, later)


def test_random_dominated_chain():
    alg = make_algebra([2, 3])
    rng = np.random.default_rng(4)
    phi = random_faithful_weight(alg, rng)
    chain = random_dominated_chain(phi, 5, rng)
    for w in chain:
        assert is_dominated(w, phi)
    for earlier, later in zip(chain, chain[1:]):
        assert is_dominated(earlier, later)


def test_combes_sup():
    alg = make_algebra([2])
    phi = trace_weight(alg)
    sup_m, exact, bound = combes_sup(phi, alg.unit(), 9)
    assert sup_m == pytest.approx(1.8)
    assert exact == pytest.approx(2.0)
    assert abs(exact - sup_m) <= bound + 1e-12
    assert combes_sup(phi, alg.zero(), 5)[0] == 0.0
    with pytest.raises(DomainError):
        combes_sup(phi, alg.element([np.diag([1.0, -1.0])]), 3)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 30))
def test_combes_rate(seed, m):
    rng = np.random.default_rng(seed)
    alg = make_algebra([2, 2])
    phi = random_faithful_weight(alg, rng)
    x = alg.random_positive(rng)
    sup_m, exact, bound = combes_sup(phi, x, m)
    assert abs(exact - sup_m) <= bound + 1e-12


def test_functional_abs_matrix_unit():
    alg = make_algebra([2])
    theta = Functional(alg, [np.array([[0.0, 1.0], [0.0, 0.0]])])
    abs_t, u = functional_abs(theta)
    assert np.allclose(abs_t.density[0], np.diag([1.0, 0.0]))
    assert theta.trace_norm() == pytest.approx(1.0)
    rng = np.random.default_rng(5)
    for _ in range(1000):
        a = alg.random_element(rng)
        lhs = abs(theta(a)) ** 2
        rhs = theta.trace_norm() * abs_t(a.star() @ a).real
        assert lhs <= rhs + 1e-9 * (1 + rhs)


def test_functional_abs_positive_and_negative():
    alg = make_algebra([2, 2])
    phi = random_faithful_weight(alg, np.random.default_rng(6))
    abs_p, _ = functional_abs(phi)
    assert max(np.linalg.norm(a - d) for a, d in
               zip(abs_p.density, phi.density)) <= 1e-12
    neg = Functional(alg, [-d for d in phi.density])
    abs_n, _ = functional_abs(neg)
    assert max(np.linalg.norm(a - d) for a, d in
               zip(abs_n.density, phi.density)) <= 1e-12


def test_functional_abs_norm_identity():
    alg = make_algebra([3])
    rng = np.random.default_rng(7)
    theta = Functional(alg, [rng.standard_normal((3, 3))
                             + 1j * rng.standard_normal((3, 3))])
    abs_t, _ = functional_abs(theta)
    assert abs(theta.trace_norm() - abs_t.trace_norm()) <= \
        1e-10 * (1 + theta.trace_norm())


def test_conjugate_functional():
    alg = make_algebra([2])
    rng = np.random.default_rng(8)
    theta = Functional(alg, [rng.standard_normal((2, 2))
                             + 1j * rng.standard_normal((2, 2))])
    a = alg.random_element(rng)
    assert theta.conjugate()(a) == pytest.approx(np.conj(theta(a.star())))


def test_sandwich_functional():
    alg = make_algebra([2, 2])
    rng = np.random.default_rng(9)
    omega = random_faithful_weight(alg, rng)
    a, b, y = (alg.random_element(rng) for _ in range(3))
    composite = omega.sandwich(a, b)
    assert composite(y) == pytest.approx(omega(b.star() @ y @ a))
