import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_density
from oqent.circuits import cnot, psi_alpha
from oqent.qcore import (
    SIGMA_I,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    DimensionError,
    InvalidHamiltonianError,
    basis_ket,
    density_matrix,
    gate_fidelity,
    ket,
    kron,
    optimize_z_phases,
    partial_transpose,
    propagator,
    state_fidelity,
    trace_norm,
)

BELL = density_matrix(psi_alpha(np.pi / 2))


def test_kron_examples():
    np.testing.assert_array_equal(kron(SIGMA_I, SIGMA_I), np.eye(4))
    assert kron(SIGMA_X, SIGMA_Y)[0, 3] == -1j
    p0 = np.diag([1, 0]).astype(complex)
    np.testing.assert_array_equal(kron(p0, p0), np.outer(basis_ket("00"), basis_ket("00")))


FIXED_OPERATORS = [SIGMA_I, SIGMA_X, SIGMA_Y, SIGMA_Z, np.diag([1, 0]).astype(complex), np.diag([0, 1]).astype(complex)]


@given(st.lists(st.sampled_from(range(len(FIXED_OPERATORS))), min_size=3, max_size=3))
def test_kron_associative_on_fixed_operators(idx):
    a, b, c = (FIXED_OPERATORS[i] for i in idx)
    np.testing.assert_array_equal(kron(kron(a, b), c), kron(a, kron(b, c)))


def test_kron_associative_on_random_matrices_to_rounding():
    rng = np.random.default_rng(1)
    a, b, c = (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) for _ in range(3))
    np.testing.assert_allclose(kron(kron(a, b), c), kron(a, kron(b, c)), rtol=0, atol=1e-15)


def test_ket_rejects_unnormalized():
    with pytest.raises(ValueError):
        ket([1, 1])


def test_density_matrix_rejects_negative_eigenvalue():
    with pytest.raises(ValueError):
        density_matrix(np.diag([1.2, -0.2, 0, 0]))


def test_propagator_zero_and_pi_rotation():
    np.testing.assert_allclose(propagator(np.zeros((4, 4)), 3.7), np.eye(4), atol=1e-15)
    f = 2.5e6
    u = propagator(f * SIGMA_X / 2, 1 / (2 * f))
    np.testing.assert_allclose(u, -1j * SIGMA_X, atol=1e-12)


def test_propagator_inverse_and_unitarity():
    rng = np.random.default_rng(2)
    g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    h = (g + g.conj().T) * 1e6
    u = propagator(h, 2e-7)
    assert np.max(np.abs(u.conj().T @ u - np.eye(4))) <= 1e-10
    np.testing.assert_allclose(u @ propagator(h, -2e-7), np.eye(4), atol=1e-10)


def test_propagator_rejects_non_hermitian():
    with pytest.raises(InvalidHamiltonianError):
        propagator(np.array([[0, 1], [0, 0]], dtype=complex), 1.0)


def test_partial_transpose_examples():
    rho00 = density_matrix(basis_ket("00"))
    np.testing.assert_array_equal(partial_transpose(rho00, "second"), rho00)
    eig = np.sort(np.linalg.eigvalsh(partial_transpose(BELL, "second")))
    np.testing.assert_allclose(eig, [-0.5, 0.5, 0.5, 0.5], atol=1e-12)
    with pytest.raises(DimensionError):
        partial_transpose(np.eye(2) / 2)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), side=st.sampled_from(["first", "second"]))
def test_partial_transpose_properties(seed, side):
    rho = random_density(np.random.default_rng(seed))
    pt = partial_transpose(rho, side)
    np.testing.assert_array_equal(partial_transpose(pt, side), rho)
    assert abs(np.trace(pt) - 1) < 1e-12
    assert trace_norm(pt) >= 1 - 1e-12
    assert abs(trace_norm(rho) - 1) < 1e-12


def test_trace_norm_examples():
    assert trace_norm(np.eye(4)) == pytest.approx(4)
    assert trace_norm(partial_transpose(BELL)) == pytest.approx(2, abs=1e-12)
    for bits in ("00", "01"):
        assert trace_norm(partial_transpose(density_matrix(basis_ket(bits)))) == pytest.approx(1, abs=1e-12)


def test_state_fidelity_examples():
    rho00 = density_matrix(basis_ket("00"))
    assert state_fidelity(rho00, basis_ket("00")) == 1.0
    assert state_fidelity(rho00, basis_ket("11")) == 0.0
    assert state_fidelity(np.eye(4) / 4, psi_alpha(0.3)) == pytest.approx(0.25)
    with pytest.raises(DimensionError):
        state_fidelity(rho00, np.array([1, 0], dtype=complex))


def test_gate_fidelity_examples():
    rng = np.random.default_rng(3)
    u = propagator(np.diag(rng.normal(size=4)) + kron(SIGMA_X, SIGMA_Y), 0.3)
    assert gate_fidelity(u, u) == pytest.approx(1)
    assert gate_fidelity(np.eye(4), cnot().matrix) == pytest.approx(0.4)
    assert gate_fidelity(u, np.exp(1.234j) * u) == pytest.approx(1)
    with pytest.raises(ValueError):
        gate_fidelity(2 * np.eye(4), np.eye(4))


def test_z_phase_correction_recovers_gate():
    phases = np.array([0.4, -1.1, 2.0, 0.7])
    pre = np.exp(1j * np.array([0, phases[1], phases[0], phases[0] + phases[1]]))
    post = np.exp(1j * np.array([0, phases[3], phases[2], phases[2] + phases[3]]))
    v = cnot().matrix
    u = post[:, None] * v * pre[None, :]
    assert gate_fidelity(u, v) < 0.9
    assert gate_fidelity(u, v, correct_z_phases=True) == pytest.approx(1, abs=1e-9)
    overlap, _ = optimize_z_phases(u, v)
    assert overlap == pytest.approx(4, abs=1e-8)
