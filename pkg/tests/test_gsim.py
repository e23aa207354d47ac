import numpy as np
import pytest

from subspace_sim.circuits import Circuit, Gate, build_hva, build_sn_equivariant, random_prep, tfim_terms
from subspace_sim.dla import adjoint_generator, lie_closure
from subspace_sim.errors import ConsistencyError, InadmissibleError
from subspace_sim.gsim import adjoint_gate_action, gsim_loss, prepare_instance
from subspace_sim.pauli import PauliSum
from subspace_sim.statevector import loss


def test_tfim_matches_oracle():
    n = 6
    c = build_hva(tfim_terms(n), 3)
    obs = tfim_terms(n)[0]
    prep = random_prep(n, 2, seed=5)
    inst = prepare_instance(c, obs, prep)
    rng = np.random.default_rng(0)
    for _ in range(5):
        p = rng.uniform(0, 2 * np.pi, c.n_params)
        assert gsim_loss(inst, p) == pytest.approx(loss(prep, c, p, obs), abs=1e-10)


def test_sn_matches_oracle():
    n = 4
    c = build_sn_equivariant(n, 2)
    obs = PauliSum.from_terms([(1.0, "ZZII"), (1.0, "ZIZI"), (1.0, "ZIIZ"), (1.0, "IZZI"),
                               (1.0, "IZIZ"), (1.0, "IIZZ")])
    inst = prepare_instance(c, obs, None)
    p = np.random.default_rng(1).uniform(0, 2 * np.pi, c.n_params)
    assert gsim_loss(inst, p) == pytest.approx(loss(None, c, p, obs), abs=1e-10)


def test_adjoint_action_orthogonal():
    b = lie_closure(build_hva(tfim_terms(4), 1).generators())
    M = adjoint_generator(tfim_terms(4)[1], b)
    A = adjoint_gate_action(M, 0.7)
    assert np.allclose(A.T @ A, np.eye(b.dim), atol=1e-12)


def test_non_antisymmetric_rejected():
    with pytest.raises(ConsistencyError):
        adjoint_gate_action(np.eye(3), 0.1)


def test_observable_outside_algebra():
    c = build_hva(tfim_terms(4), 1)
    with pytest.raises(InadmissibleError):
        prepare_instance(c, PauliSum.from_label("YIII"), None)


def test_clifford_inadmissible():
    c = Circuit(2, [Gate.clifford("CX", (0, 1))])
    with pytest.raises(InadmissibleError):
        prepare_instance(c, PauliSum.from_label("ZI"), None)
