import numpy as np
import pytest
from scipy.linalg import expm

from subspace_sim.circuits import Circuit, Gate, build_shallow_hea, random_circuit
from subspace_sim.errors import ResourceError
from subspace_sim.pauli import PauliSum
from subspace_sim.statevector import (DenseState, apply_circuit, circuit_unitary, expectation, loss,
                                      parameter_shift_gradient, reduced_density)


def dense_unitary(circuit, params):
    """Independent reference: product of expm(-i theta G) and explicit Clifford matrices."""
    from subspace_sim.statevector import CLIFFORD_MATRICES
    n = circuit.n
    U = np.eye(2 ** n, dtype=complex)
    for g in circuit.gates:
        if g.kind == "rotation":
            U_g = expm(-1j * g.angle_for(params) * g.generator.to_matrix())
        else:
            U_g = circuit_unitary(Circuit(n, [g]))
        U = U_g @ U
    return U


def test_rotation_convention():
    c = Circuit(1, [Gate.rotation(PauliSum.from_label("X"), param_slot=0)], 1)
    st = apply_circuit(DenseState.zero(1), c, [np.pi / 4])
    assert expectation(st, PauliSum.from_label("Z")) == pytest.approx(0.0, abs=1e-14)
    assert expectation(st, PauliSum.from_label("Y")) == pytest.approx(-1.0)


def test_matches_dense_reference():
    c = random_circuit(4, 25, seed=11)
    p = np.random.default_rng(0).uniform(0, 2 * np.pi, c.n_params)
    psi = apply_circuit(DenseState.zero(4), c, p).amplitudes
    ref = dense_unitary(c, p)[:, 0]
    assert np.allclose(psi, ref, atol=1e-12)


def test_norm_preserved():
    c = build_shallow_hea(6, 3)
    p = np.random.default_rng(1).uniform(0, 2 * np.pi, c.n_params)
    assert apply_circuit(DenseState.zero(6), c, p).norm() == pytest.approx(1.0, abs=1e-12)


def test_parameter_shift_matches_finite_difference():
    c = build_shallow_hea(4, 2)
    obs = PauliSum.from_label("ZIII")
    p = np.random.default_rng(2).uniform(0, 2 * np.pi, c.n_params)
    for slot in (0, 5):
        g = parameter_shift_gradient(None, c, p, obs, slot)
        h = 1e-6
        e = np.zeros_like(p)
        e[slot] = h
        fd = (loss(None, c, p + e, obs) - loss(None, c, p - e, obs)) / (2 * h)
        assert g == pytest.approx(fd, abs=1e-7)


def test_reduced_density_trace_and_hermiticity():
    c = random_circuit(5, 20, seed=4)
    p = np.random.default_rng(3).uniform(0, 2 * np.pi, c.n_params)
    rho = reduced_density(apply_circuit(DenseState.zero(5), c, p), [1, 3])
    assert np.trace(rho) == pytest.approx(1.0)
    assert np.allclose(rho, rho.conj().T)


def test_qubit_cap():
    with pytest.raises(ResourceError):
        DenseState.zero(40)
