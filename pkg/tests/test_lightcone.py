import numpy as np
import pytest

from subspace_sim.circuits import Circuit, build_shallow_hea, random_prep
from subspace_sim.lightcone import backward_cone, cone_bound, reduced_loss, reduced_loss_from_shadows
from subspace_sim.pauli import PauliString, PauliSum
from subspace_sim.shadows import acquire
from subspace_sim.statevector import DenseState, apply_circuit, loss, prepare, reduced_density


def z(n, q):
    return PauliSum.from_word(PauliString.from_sparse(n, {q: "Z"}))


def test_cone_n10_L3():
    c = build_shallow_hea(10, 3)
    cone = backward_cone(c, [4])
    assert cone.qubit_set == (2, 3, 4, 5, 6, 7)
    assert cone.size <= cone_bound(1, 3)


def test_reduced_loss_matches_oracle():
    n = 8
    c = build_shallow_hea(n, 3)
    prep = random_prep(n, 1, seed=2)
    obs = z(n, 3)
    cone = backward_cone(c, obs.support())
    rho = reduced_density(prepare(prep, n), list(cone.qubit_set))
    rng = np.random.default_rng(4)
    for _ in range(5):
        p = rng.uniform(0, 2 * np.pi, c.n_params)
        assert reduced_loss(cone, rho, obs, p) == pytest.approx(loss(prep, c, p, obs), abs=1e-12)


def test_empty_cone_for_identity():
    c = build_shallow_hea(4, 1)
    cone = backward_cone(c, [])
    assert cone.size == 0


def test_shadow_route_within_error():
    n = 6
    c = build_shallow_hea(n, 1)
    obs = z(n, 2)
    p = np.random.default_rng(5).uniform(0, 2 * np.pi, c.n_params)
    cone = backward_cone(c, obs.support())
    ds = acquire(None, 20000, seed=3, n=n)
    est = reduced_loss_from_shadows(cone, ds, obs, p, target_stderr=0.05)
    exact = loss(None, c, p, obs)
    assert abs(est.value - exact) < 5 * est.stderr + 1e-3
