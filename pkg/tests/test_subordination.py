import logging

import numpy as np
import pytest

import oracles
from ovkron.opvalued import (HalfPlaneError, MatrixCauchyMap, q_map, unit_measure_map, xhat_kl_map)
from ovkron.scalar import ScalarMeasure, cauchy_of_measure, measure_transform, semicircle_transform
from ovkron.subordination import (ConvergenceError, FixedPointConfig, additive_residual, additive_subordinator,
                                  multiplicative_residual, multiplicative_subordinator)

A = ScalarMeasure.from_atoms([0.5, 1.5])
B_ = ScalarMeasure.from_atoms([0.75, 1.25])
TIGHT = FixedPointConfig(tolerance=1e-13)


def scalar_map(mu):
    return MatrixCauchyMap.scalar(lambda z: measure_transform(mu, z))


def semicircle_map(variance=1.0):
    return MatrixCauchyMap.scalar(lambda z: semicircle_transform(z, variance))


def test_config_validation():
    with pytest.raises(ValueError):
        FixedPointConfig(tolerance=0)
    with pytest.raises(ValueError):
        FixedPointConfig(damping=0)
    with pytest.raises(ValueError):
        FixedPointConfig(damping=1.5)
    with pytest.raises(ValueError):
        FixedPointConfig(max_iterations=0)


# additive ------------------------------------------------------------------------


def test_zero_partner_is_identity():
    rng = np.random.default_rng(0)
    B = np.diag(rng.uniform(-1, 1, 4) + 1j * rng.uniform(0.2, 2, 4))
    GX = unit_measure_map(A, 2, 4)
    res = additive_subordinator(GX, MatrixCauchyMap.zero(4), B)
    assert np.allclose(res.omega, B, atol=1e-14)
    assert np.allclose(res.value, GX(B), atol=1e-14)


def test_two_semicircles():
    res = additive_subordinator(semicircle_map(), semicircle_map(), np.array([[3j]]), TIGHT)
    expected = (3j - np.sqrt(-9 - 8 + 0j)) / 4
    assert res.value[0, 0] == pytest.approx(complex(semicircle_transform(3j, 2.0)), abs=1e-12)
    assert res.value[0, 0] == pytest.approx(expected, abs=1e-12)


def test_semicircles_batch_near_axis():
    x = np.linspace(-3, 3, 41)
    z = x + 0.05j
    res = additive_subordinator(semicircle_map(0.5), semicircle_map(1.5), z[:, None], TIGHT, diagonal=True)
    assert np.allclose(res.value[:, 0], semicircle_transform(z, 2.0), atol=1e-9)
    assert np.all(res.omega.imag > 0)


def test_additive_swap_symmetry_dense():
    rng = np.random.default_rng(1)
    GX = unit_measure_map(A, 0, 4)
    GY = unit_measure_map(B_, 2, 4)
    for _ in range(5):
        L = rng.standard_normal((4, 4))
        B = rng.standard_normal((4, 4)) * 0.3
        B = (B + B.T) / 2 + 1j * (L @ L.T + 0.3 * np.eye(4))
        r1 = additive_subordinator(GX, GY, B, TIGHT)
        r2 = additive_subordinator(GY, GX, B, TIGHT)
        assert np.max(np.abs(r1.value - r2.value)) <= 1e-9


def test_additive_swap_symmetry_diagonal():
    rng = np.random.default_rng(2)
    GX = q_map([A, B_], [B_, A])
    GY = xhat_kl_map(np.array([1.0, 0.5]), [1, 0])
    d = rng.uniform(-3, 3, (20, 4)) + 1j * rng.uniform(0.05, 1, (20, 4))
    r1 = additive_subordinator(GX, GY, d, TIGHT, diagonal=True)
    r2 = additive_subordinator(GY, GX, d, TIGHT, diagonal=True)
    assert np.max(np.abs(r1.value - r2.value)) <= 1e-9


def test_additive_scalar_moments():
    res = lambda z: additive_subordinator(scalar_map(A), scalar_map(B_), z[:, None], TIGHT,  # noqa: E731
                                          diagonal=True).value[:, 0]
    got = oracles.moments_from_transform(res, 6.0, 9)
    expected = oracles.free_additive_moments(oracles.moments_of(A.atoms, A.weights, 9),
                                             oracles.moments_of(B_.atoms, B_.weights, 9))
    assert np.allclose(got, expected, rtol=1e-6, atol=1e-6)


def test_additive_residual_within_ten_tolerances():
    rng = np.random.default_rng(3)
    GX = q_map([A, B_], [B_, A])
    GY = xhat_kl_map(np.array([1.0, 0.7]), [0, 1])
    cfg = FixedPointConfig(tolerance=1e-11)
    d = rng.uniform(-3, 3, (50, 4)) + 1j * rng.uniform(0.01, 1, (50, 4))
    res = additive_subordinator(GX, GY, d, cfg, diagonal=True)
    for k in range(50):
        scale = max(1.0, np.max(np.abs(res.omega[k])))
        assert additive_residual(GX, GY, d[k:k + 1], res.omega[k:k + 1], diagonal=True) <= 10 * cfg.tolerance * scale


def test_additive_rejects_lower_argument_and_mismatch():
    with pytest.raises(HalfPlaneError):
        additive_subordinator(semicircle_map(), semicircle_map(), np.array([[-1j]]))
    with pytest.raises(HalfPlaneError):
        additive_subordinator(semicircle_map(), semicircle_map(), np.array([[-1j]]), diagonal=True)
    with pytest.raises(ValueError):
        additive_subordinator(MatrixCauchyMap.zero(2), MatrixCauchyMap.zero(3), 1j * np.eye(2))


def test_non_convergence_is_reported():
    cfg = FixedPointConfig(tolerance=1e-15, max_iterations=2)
    z = np.array([[0.5 + 1e-3j]])
    with pytest.raises(ConvergenceError) as info:
        additive_subordinator(semicircle_map(), semicircle_map(), z, cfg, diagonal=True)
    assert info.value.result is not None and np.isfinite(info.value.result.residual).all()
    res = additive_subordinator(semicircle_map(), semicircle_map(), z, cfg, diagonal=True, strict=False)
    assert not res.all_converged and res.iterations[0] == 2


def test_damping_changes_path_not_answer():
    z = np.array([[1 + 0.1j]])
    a = additive_subordinator(semicircle_map(), semicircle_map(), z, TIGHT, diagonal=True)
    b = additive_subordinator(semicircle_map(), semicircle_map(), z, FixedPointConfig(tolerance=1e-13, damping=0.3),
                              diagonal=True)
    assert np.allclose(a.value, b.value, atol=1e-10)
    assert b.iterations[0] > a.iterations[0]


def test_warm_start_saves_iterations():
    z = np.array([[1 + 1e-3j]])
    cold = additive_subordinator(semicircle_map(), semicircle_map(), z, TIGHT, diagonal=True)
    warm = additive_subordinator(semicircle_map(), semicircle_map(), z, TIGHT, diagonal=True, omega0=cold.omega)
    assert warm.iterations[0] <= 2
    assert np.allclose(warm.value, cold.value, atol=1e-12)


def test_solve_log_is_key_value(caplog):
    with caplog.at_level(logging.DEBUG, logger="ovkron.subordination"):
        additive_subordinator(semicircle_map(), semicircle_map(), np.array([[2j]]))
    line = caplog.records[-1].getMessage()
    fields = dict(tok.split("=", 1) for tok in line.split())
    assert fields["solve"] == "additive"
    assert {"iterations_max", "residual_max", "converged", "damping_events"} <= set(fields)
    float(fields["residual_max"])


# multiplicative -------------------------------------------------------------------


def test_multiplicative_deterministic_factor():
    c = 1.7
    GX = MatrixCauchyMap.deterministic(c * np.eye(1))
    for z in (2j, 1 + 0.3j, -0.5 + 0.1j):
        res = multiplicative_subordinator(GX, scalar_map(B_), z, TIGHT)
        assert res.value[0, 0] == pytest.approx(cauchy_of_measure(B_, z / c) / c, abs=1e-10)


def test_multiplicative_identity_factor():
    GY = MatrixCauchyMap.deterministic(np.eye(2))
    GX = q_map([A], [B_])
    for z in (2j, 1 + 0.3j):
        res = multiplicative_subordinator(GX, GY, z, TIGHT)
        assert np.allclose(res.value, GX(z * np.eye(2)), atol=1e-10)
        batch = multiplicative_subordinator(GX, GY, np.array([z]), TIGHT, diagonal=True)
        assert np.allclose(batch.value[0], np.diag(GX(z * np.eye(2))), atol=1e-10)


def test_multiplicative_scalar_moments():
    G = lambda z: multiplicative_subordinator(scalar_map(A), scalar_map(B_), z, TIGHT,  # noqa: E731
                                              diagonal=True).value[:, 0]
    got = oracles.moments_from_transform(G, 4.0, 9)
    expected = oracles.free_multiplicative_moments(oracles.moments_of(A.atoms, A.weights, 9),
                                                   oracles.moments_of(B_.atoms, B_.weights, 9))
    assert np.allclose(got, expected, rtol=1e-6, atol=1e-6)


def test_multiplicative_residual_within_ten_tolerances():
    cfg = FixedPointConfig(tolerance=1e-11)
    z = np.linspace(0.1, 3, 30) + 0.02j
    res = multiplicative_subordinator(scalar_map(A), scalar_map(B_), z, cfg, diagonal=True)
    for k in range(z.size):
        scale = max(1.0, np.max(np.abs(res.omega[k])))
        assert multiplicative_residual(scalar_map(A), scalar_map(B_), z[k:k + 1], res.omega[k:k + 1],
                                       diagonal=True) <= 10 * cfg.tolerance * scale


def test_multiplicative_dense_and_diagonal_agree():
    GX = q_map([A, B_], [A, B_])
    GY = xhat_kl_map(np.array([1.0, 0.8]), [1, 0])
    for z in (1.2 + 0.2j, 0.3 + 0.05j, 4j):
        dense = multiplicative_subordinator(GX, GY, z, TIGHT).value
        batch = multiplicative_subordinator(GX, GY, np.array([z]), TIGHT, diagonal=True).value[0]
        assert np.allclose(np.diag(dense), batch, atol=1e-10)
        assert np.all(batch.imag < 0)


def test_multiplicative_rejects_lower_zeta():
    with pytest.raises(HalfPlaneError):
        multiplicative_subordinator(scalar_map(A), scalar_map(B_), -1j)
    with pytest.raises(HalfPlaneError):
        multiplicative_subordinator(scalar_map(A), scalar_map(B_), np.array([1 + 1j, 1 - 1j]), diagonal=True)
