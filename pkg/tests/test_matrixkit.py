import numpy as np
import pytest

from oqwalk.matrixkit import (
    I2,
    X,
    Z,
    complete_isometry,
    dagger,
    haar_unitary,
    is_unitary,
    kron,
    partial_trace,
    projector,
    psd_sqrt,
    random_density,
    random_pure_state,
    trace_distance,
)


def test_kron_identity():
    assert np.array_equal(kron(I2, I2), np.eye(4))


def test_kron_edge_operator():
    # X tensor |1><0| under (walker, node) ordering: the only nonzero
    # entries map |0>|0> -> |1>|1| and |1>|0> -> |0>|1>, i.e. rows 3 and 1
    ket10 = np.zeros((2, 2), dtype=complex)
    ket10[1, 0] = 1.0
    m = kron(X, ket10)
    expected = np.zeros((4, 4), dtype=complex)
    expected[3, 0] = 1.0
    expected[1, 2] = 1.0
    assert np.array_equal(m, expected)


def test_kron_bilinear():
    rng = np.random.default_rng(0)
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    b = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    np.testing.assert_allclose(kron(0.37 * a, b), 0.37 * kron(a, b), atol=1e-14)


def test_is_unitary():
    assert is_unitary(np.eye(8), 1e-12)
    theta = 0.7
    ry = np.array([[np.cos(theta / 2), -np.sin(theta / 2)],
                   [np.sin(theta / 2), np.cos(theta / 2)]])
    assert is_unitary(ry, 1e-12)
    assert not is_unitary(np.diag([1.0, 0.5]), 1e-12)


def test_is_unitary_rejects_non_square():
    with pytest.raises(ValueError):
        is_unitary(np.ones((2, 3)))


def test_psd_sqrt_basics():
    assert np.allclose(psd_sqrt(I2), I2)
    assert np.allclose(psd_sqrt(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]))


def test_psd_sqrt_projector():
    a = 0.25 * (I2 + X)
    s = psd_sqrt(a)
    np.testing.assert_allclose(s @ s, a, atol=1e-9)


def test_psd_sqrt_random_psd():
    rng = np.random.default_rng(42)
    for dim in (2, 3, 8, 17, 32):
        a = random_density(dim, rng) * rng.uniform(0.5, 4.0)
        s = psd_sqrt(a)
        assert np.abs(s - s.conj().T).max() < 1e-12
        np.testing.assert_allclose(s @ s, a, atol=1e-9)


def test_psd_sqrt_rejections():
    with pytest.raises(ValueError):
        psd_sqrt(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(ValueError):
        psd_sqrt(np.diag([1.0, -0.5]))


def test_partial_trace_product_state():
    rho = kron(projector([1, 0]), projector([1, 1] / np.sqrt(2)))
    np.testing.assert_allclose(partial_trace(rho, [2, 2], keep=[0]),
                               projector([1, 0]), atol=1e-14)


def test_partial_trace_bell():
    bell = projector(np.array([1, 0, 0, 1]) / np.sqrt(2))
    for keep in ([0], [1]):
        np.testing.assert_allclose(partial_trace(bell, [2, 2], keep=keep),
                                   np.eye(2) / 2, atol=1e-14)


def test_partial_trace_preserves_trace():
    rng = np.random.default_rng(1)
    for _ in range(20):
        rho = random_density(8, rng)
        reduced = partial_trace(rho, [2, 4], keep=[1])
        assert abs(np.trace(reduced) - np.trace(rho)) < 1e-13


def test_partial_trace_composes():
    rng = np.random.default_rng(2)
    rho = random_density(12, rng)
    two_calls = partial_trace(partial_trace(rho, [2, 3, 2], keep=[0, 1]),
                              [2, 3], keep=[0])
    one_call = partial_trace(rho, [2, 3, 2], keep=[0])
    np.testing.assert_allclose(two_calls, one_call, atol=1e-13)


def test_partial_trace_dim_mismatch():
    with pytest.raises(ValueError):
        partial_trace(np.eye(6), [2, 2], keep=[0])


def test_trace_distance_values():
    rho = projector([1, 0])
    assert trace_distance(rho, rho) == 0.0
    assert abs(trace_distance(projector([1, 0]), projector([0, 1])) - 1.0) < 1e-14
    assert abs(trace_distance(projector([1, 0]), np.eye(2) / 2) - 0.5) < 1e-14


def test_trace_distance_metric_properties():
    rng = np.random.default_rng(3)
    for _ in range(10):
        a, b, c = (random_density(4, rng) for _ in range(3))
        assert abs(trace_distance(a, b) - trace_distance(b, a)) < 1e-13
        assert trace_distance(a, a) < 1e-13
        assert trace_distance(a, c) <= trace_distance(a, b) + trace_distance(b, c) + 1e-13


def test_trace_distance_dim_mismatch():
    with pytest.raises(ValueError):
        trace_distance(np.eye(2), np.eye(3))


def test_complete_isometry_basis_column():
    v = np.zeros((4, 1), dtype=complex)
    v[0, 0] = 1.0
    u = complete_isometry(v)
    assert np.array_equal(u[:, :1], v)
    assert is_unitary(u, 1e-10)


def test_complete_isometry_stacked_kraus():
    # noise-channel Kraus pair stacked into a single column block: acting on
    # |0> x |psi| the completion must branch into both Kraus images
    k0, k1 = np.sqrt(0.75) * I2, np.sqrt(0.25) * X
    v = np.vstack([k0, k1])
    u = complete_isometry(v)
    assert is_unitary(u, 1e-10)
    rng = np.random.default_rng(4)
    psi = random_pure_state(2, rng)
    padded = np.concatenate([psi, np.zeros(2)])
    expected = np.concatenate([k0 @ psi, k1 @ psi])
    np.testing.assert_allclose(u @ padded, expected, atol=1e-12)


def test_complete_isometry_random():
    rng = np.random.default_rng(5)
    for _ in range(50):
        dim = rng.integers(2, 9)
        cols = rng.integers(1, dim + 1)
        v = haar_unitary(dim, rng)[:, :cols]
        u = complete_isometry(v)
        assert is_unitary(u, 1e-10)
        assert np.array_equal(u[:, :cols], v)


def test_complete_isometry_rejects_bad_columns():
    with pytest.raises(ValueError, match="orthonormal"):
        complete_isometry(np.array([[1.0], [1.0]]))


def test_dagger():
    m = np.array([[1, 2j], [3, 4]], dtype=complex)
    assert np.array_equal(dagger(m), m.conj().T)


def test_haar_unitary_deterministic():
    u1 = haar_unitary(4, np.random.default_rng(11))
    u2 = haar_unitary(4, np.random.default_rng(11))
    assert np.array_equal(u1, u2)
    assert is_unitary(u1, 1e-12)


def test_z_on_plus():
    plus = projector([1, 1] / np.sqrt(2))
    minus = projector([1, -1] / np.sqrt(2))
    np.testing.assert_allclose(Z @ plus @ Z, minus, atol=1e-15)
