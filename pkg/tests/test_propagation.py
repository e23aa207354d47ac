import numpy as np
import pytest

from subspace_sim.circuits import Circuit, Gate, build_qcnn, build_shallow_hea, qcnn_observable, random_circuit
from subspace_sim.errors import ResourceError
from subspace_sim.pauli import PauliSum
from subspace_sim.propagation import (TruncationPolicy, backpropagate, loss_from_expectations,
                                      product_state_expectations, split_observable)
from subspace_sim.shadows import acquire
from subspace_sim.statevector import DenseState, apply_circuit, expectation, loss


def test_untruncated_matches_oracle_with_cliffords():
    c = random_circuit(5, 40, seed=7)
    obs = PauliSum.from_label("ZIIXI")
    p = np.random.default_rng(0).uniform(0, 2 * np.pi, c.n_params)
    heis = backpropagate(obs, c, p)
    val, err = loss_from_expectations(heis, DenseState.zero(5))
    assert err == 0
    assert val == pytest.approx(loss(None, c, p, obs), abs=1e-12)


def test_qcnn_untruncated():
    c, sched = build_qcnn(8)
    obs = qcnn_observable(sched, 8)
    p = np.random.default_rng(1).uniform(0, 2 * np.pi, c.n_params)
    heis = backpropagate(obs, c, p)
    assert loss_from_expectations(heis, DenseState.zero(8))[0] == pytest.approx(
        loss(None, c, p, obs), abs=1e-10)


def test_rotation_step_rule():
    # exp(i a Z) X exp(-i a Z) = cos 2a X - sin 2a Y
    c = Circuit(1, [Gate.rotation(PauliSum.from_label("Z"), param_slot=0)], 1)
    out = backpropagate(PauliSum.from_label("X"), c, [0.3])
    assert out.coeff("X") == pytest.approx(np.cos(0.6))
    assert out.coeff("Y") == pytest.approx(-np.sin(0.6))


def test_weight_truncation_logs_discard():
    c = build_shallow_hea(6, 3)
    p = np.random.default_rng(2).uniform(0, 2 * np.pi, c.n_params)
    pol = TruncationPolicy(max_weight=2)
    out = backpropagate(PauliSum.from_label("IIZIII"), c, p, pol)
    assert out.weights().max() <= 2
    full = backpropagate(PauliSum.from_label("IIZIII"), c, p)
    assert pol.discard_log > 0
    assert out.mass() <= full.mass() + 1e-12


def test_term_cap():
    c = random_circuit(8, 200, seed=1, max_weight=3)
    with pytest.raises(ResourceError):
        backpropagate(PauliSum.from_label("Z" * 8), c, np.ones(c.n_params),
                      TruncationPolicy(term_cap=50))


def test_split():
    op = PauliSum.from_terms([(1.0, "ZII"), (1.0, "ZZI"), (1.0, "ZZZ")])
    lo, hi = split_observable(op, 2)
    assert len(lo) == 2 and len(hi) == 1


def test_product_state_expectations():
    op = PauliSum.from_terms([(1.0, "ZX"), (0.5, "YI")])
    local = np.array([[0.0, 0.6, 0.8], [1.0, 0.0, 0.0]])
    assert product_state_expectations(op, local) == pytest.approx(0.8 + 0.3)


def test_shadow_source_consistent():
    c = build_shallow_hea(4, 1)
    p = np.random.default_rng(3).uniform(0, 2 * np.pi, c.n_params)
    heis = backpropagate(PauliSum.from_label("IZII"), c, p)
    ds = acquire(None, 20000, seed=4, n=4)
    val, err = loss_from_expectations(heis, ds)
    assert abs(val - loss(None, c, p, PauliSum.from_label("IZII"))) < 5 * err + 1e-3
