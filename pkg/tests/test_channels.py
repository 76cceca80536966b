import numpy as np
import pytest

from oqwalk import channels, core
from oqwalk.analysis import ChainParams, steady_state, transition_matrix
from oqwalk.matrixkit import (
    I2,
    X,
    Y,
    Z,
    haar_unitary,
    projector,
    random_density,
    random_pure_state,
    trace_distance,
)

PLUS = projector(np.array([1, 1]) / np.sqrt(2))
MINUS = projector(np.array([1, -1]) / np.sqrt(2))


def identity_chain(n, omega=0.5):
    return core.LinearChainSpec(n, omega, [np.eye(2)] * (n - 1))


def test_coefficient_evolution_starts_at_identity():
    a = channels.coefficient_evolution(identity_chain(4), np.ones(4) / 4, 0)
    assert np.array_equal(a, np.eye(4))


def test_coefficient_evolution_matches_transition_matrix():
    rng = np.random.default_rng(0)
    for _ in range(10):
        n = int(rng.integers(2, 8))
        omega = rng.uniform(0.1, 0.9)
        steps = int(rng.integers(1, 12))
        chain = identity_chain(n, omega)
        a = channels.coefficient_evolution(chain, np.ones(n) / n, steps)
        t = np.linalg.matrix_power(transition_matrix(ChainParams(n, omega)), steps)
        for j in range(n):
            np.testing.assert_allclose(a[:, j], t @ np.eye(n)[j], atol=1e-15)


def test_coefficient_evolution_long_run_limit():
    # every column converges to the stationary occupation of the row node
    chain = identity_chain(8, 2 / 3)
    a = channels.coefficient_evolution(chain, np.ones(8) / 8, 2000)
    x = steady_state(ChainParams(8, 2 / 3))
    for j in range(8):
        np.testing.assert_allclose(a[:, j], x, atol=1e-8)


def test_coefficient_evolution_rejects_bad_masses():
    with pytest.raises(ValueError):
        channels.coefficient_evolution(identity_chain(3), [0.5, 0.2, 0.2], 1)


def test_postselect():
    state = core.DiagonalState(2, {0: 0.25 * I2})
    out = channels.postselect(state, 0)
    np.testing.assert_allclose(out, 0.5 * I2, atol=1e-15)
    assert abs(np.trace(out) - 1.0) < 1e-14
    with pytest.raises(ValueError, match="post-select"):
        channels.postselect(state, 1)


@pytest.mark.parametrize("p,rho,expected", [
    (0.0, PLUS, PLUS),
    (1.0, PLUS, MINUS),
    (0.5, PLUS, np.eye(2) / 2),
])
def test_dephasing_special_cases(p, rho, expected):
    real = channels.dephasing_realization(p, rho)
    np.testing.assert_allclose(channels.limit_state(real), expected, atol=1e-14)


def test_dephasing_one_step_is_channel_output():
    rng = np.random.default_rng(1)
    for p in (0.1, 0.37, 0.8):
        rho = projector(random_pure_state(2, rng))
        real = channels.dephasing_realization(p, rho, omega=0.6)
        after = core.step(real.spec, real.initial)
        out = channels.postselect(after, 1)
        np.testing.assert_allclose(out, (1 - p) * rho + p * (Z @ rho @ Z), atol=1e-14)


def test_dephasing_converges_in_one_step():
    real = channels.dephasing_realization(0.3, PLUS)
    iterated, steps = channels.iterate_limit(real)
    assert steps == 1
    np.testing.assert_allclose(iterated, channels.limit_state(real), atol=1e-14)


@pytest.mark.parametrize("lam,rho,expected", [
    (0.0, PLUS, PLUS),
    (1.0, PLUS, np.eye(2) / 2),
    (0.4, projector([1, 0]), np.diag([0.8, 0.2])),
])
def test_depolarizing_special_cases(lam, rho, expected):
    real = channels.depolarizing_realization(lam, np.asarray(rho, dtype=complex))
    np.testing.assert_allclose(channels.limit_state(real), expected, atol=1e-14)


def test_depolarizing_matches_mixture_form():
    rng = np.random.default_rng(2)
    for lam in (0.15, 0.4, 0.9):
        rho = random_density(2, rng)
        real = channels.depolarizing_realization(lam, rho)
        np.testing.assert_allclose(channels.limit_state(real),
                                   (1 - lam) * rho + lam * np.eye(2) / 2, atol=1e-13)


def test_depolarizing_iterate_agrees_with_analytic():
    real = channels.depolarizing_realization(0.4, PLUS)
    iterated = channels.limit_state(real, "iterate", max_steps=500, tol=1e-10)
    assert trace_distance(iterated, channels.limit_state(real)) <= 1e-9


def test_iterate_waits_for_mass_to_arrive():
    # all weight on the first node of a three-node chain: the readout node
    # is empty after one step and becomes populated later
    rng = np.random.default_rng(20)
    rho = random_density(2, rng)
    pairs = [(1.0, haar_unitary(2, rng)), (0.0, I2), (0.0, Z)]
    real = channels.embed_random_unitary(pairs, rho)
    iterated, steps = channels.iterate_limit(real, max_steps=2000, tol=1e-12)
    assert steps >= 2
    assert trace_distance(iterated, real.analytic_limit) <= 1e-10


def test_iterate_reports_nonconvergence():
    real = channels.depolarizing_realization(0.4, PLUS, omega=0.5)
    with pytest.raises(RuntimeError, match="convergence"):
        channels.iterate_limit(real, max_steps=3, tol=1e-30)


def test_embed_single_pair():
    rng = np.random.default_rng(3)
    rho = random_density(2, rng)
    real = channels.embed_random_unitary([(1.0, np.eye(2))], rho)
    np.testing.assert_allclose(channels.limit_state(real), rho, atol=1e-14)


def test_embed_reproduces_dephasing():
    rng = np.random.default_rng(4)
    rho = projector(random_pure_state(2, rng))
    for p in np.linspace(0, 1, 11):
        via_embed = channels.limit_state(
            channels.embed_random_unitary([(1 - p, I2), (p, Z)], rho))
        via_dephasing = channels.limit_state(channels.dephasing_realization(p, rho))
        np.testing.assert_allclose(via_embed, via_dephasing, atol=1e-13)


def test_embed_four_pauli_mix_equals_depolarizing():
    rng = np.random.default_rng(5)
    rho = random_density(2, rng)
    lam = 0.62
    pairs = [(1 - 3 * lam / 4, I2), (lam / 4, X), (lam / 4, Y), (lam / 4, Z)]
    via_embed = channels.limit_state(channels.embed_random_unitary(pairs, rho))
    depol = channels.depolarizing_realization(lam, rho)
    assert trace_distance(via_embed, depol.analytic_limit) <= 1e-12


def test_embed_validation():
    rho = np.eye(2) / 2
    with pytest.raises(ValueError, match="sum"):
        channels.embed_random_unitary([(0.6, I2), (0.6, Z)], rho)
    with pytest.raises(ValueError, match="unitary"):
        channels.embed_random_unitary([(1.0, np.diag([1.0, 0.5]))], rho)
    with pytest.raises(ValueError, match="non-negative"):
        channels.embed_random_unitary([(1.5, I2), (-0.5, Z)], rho)


def test_embed_qutrit_walker():
    rng = np.random.default_rng(6)
    rho = random_density(3, rng)
    pairs = [(0.5, haar_unitary(3, rng)), (0.3, haar_unitary(3, rng)),
             (0.2, haar_unitary(3, rng))]
    real = channels.embed_random_unitary(pairs, rho)
    expected = sum(q * v @ rho @ v.conj().T for q, v in pairs)
    np.testing.assert_allclose(channels.limit_state(real), expected, atol=1e-13)
    iterated = channels.limit_state(real, "iterate", max_steps=2000, tol=1e-12)
    assert trace_distance(iterated, expected) <= 1e-8


def test_limits_do_not_depend_on_omega():
    rng = np.random.default_rng(7)
    rho = projector(random_pure_state(2, rng))
    omegas = (0.5, 0.6, 0.7, 0.9)
    deph = [channels.limit_state(channels.dephasing_realization(0.3, rho, w), "iterate",
                                 max_steps=2000, tol=1e-13) for w in omegas]
    depol = [channels.limit_state(channels.depolarizing_realization(0.4, rho, w), "iterate",
                                  max_steps=5000, tol=1e-13) for w in omegas]
    for group in (deph, depol):
        for other in group[1:]:
            assert trace_distance(group[0], other) <= 1e-12


def test_analytic_limits_are_states():
    rng = np.random.default_rng(8)
    for _ in range(20):
        m = int(rng.integers(1, 5))
        weights = rng.dirichlet(np.ones(m))
        pairs = [(weights[i], haar_unitary(2, rng)) for i in range(m)]
        real = channels.embed_random_unitary(pairs, random_density(2, rng))
        limit = channels.limit_state(real)
        assert abs(np.trace(limit).real - 1.0) < 1e-12
        assert np.linalg.eigvalsh((limit + limit.conj().T) / 2).min() >= -1e-12


def test_embedded_maps_are_unital():
    # feeding the maximally mixed state returns it unchanged
    rng = np.random.default_rng(9)
    for _ in range(10):
        m = int(rng.integers(1, 5))
        weights = rng.dirichlet(np.ones(m))
        pairs = [(weights[i], haar_unitary(2, rng)) for i in range(m)]
        real = channels.embed_random_unitary(pairs, np.eye(2) / 2)
        assert trace_distance(channels.limit_state(real), np.eye(2) / 2) <= 1e-12
