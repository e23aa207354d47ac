import numpy as np
import pytest

from subspace_sim.circuits import (ParamDistribution, build_matchgate, build_shallow_hea,
                                   build_u1_equivariant, random_circuit)
from subspace_sim.diagnostics import (SubspaceDescriptor, Thresholds, classify, discrete_vs_continuous,
                                      fit_log_variance, leakage, oracle_evaluator, u1_twirl,
                                      variance_scan, variance_stderr, weight_histogram, x_layer_bloch)
from subspace_sim.pauli import PauliString, PauliSum
from subspace_sim.statevector import DenseState, apply_circuit, expectation
from subspace_sim.circuits import Circuit, Gate


def test_classify_rules():
    th = Thresholds()
    assert classify([1, 0.5, 0.25], {"slope": -0.69, "r2": 0.99}, th) == "exponential-decay"
    assert classify([1, 1, 1], {"slope": 0.0, "r2": 1.0}, th) == "polynomial-or-flat"
    assert classify([0, 0, 0], None, th) == "polynomial-or-flat"
    assert classify([1, 0.9, 0.8], {"slope": -0.1, "r2": 0.99}, th) == "inconclusive"


def test_fit_recovers_slope():
    ns = np.array([2, 4, 6, 8])
    fit = fit_log_variance(ns, np.exp(-0.5 * ns + 1))
    assert fit["slope"] == pytest.approx(-0.5)
    assert fit["r2"] == pytest.approx(1.0)


def test_variance_stderr_gaussian():
    x = np.random.default_rng(0).normal(size=20000)
    # Var(s^2) = 2 sigma^4 / (N - 1) for Gaussian data
    assert variance_stderr(x) == pytest.approx(np.sqrt(2 / 19999), rel=0.05)


def test_variance_scan_thread_independent():
    ev = oracle_evaluator(lambda n: build_shallow_hea(n, 1),
                          lambda n: PauliSum.from_word(PauliString.from_sparse(n, {0: "Z"})))
    a = variance_scan(ev, ParamDistribution.uniform(), [3, 4], 30, seed=2, threads=1)
    b = variance_scan(ev, ParamDistribution.uniform(), [3, 4], 30, seed=2, threads=3)
    assert a.to_json() == b.to_json()
    assert a.to_csv().startswith("n,n_samples,mean,variance,stderr_of_variance\r\n")


def test_bloch_vectors():
    for t in [0.0, 0.3, 1.1]:
        c = Circuit(1, [Gate.rotation(PauliSum.from_label("X"), angle=t)])
        st = apply_circuit(DenseState.zero(1), c)
        want = [expectation(st, PauliSum.from_label(p)) for p in "XYZ"]
        assert np.allclose(x_layer_bloch(np.array([t]))[0], want)


def test_matchgate_leakage_zero():
    c = build_matchgate(5, 3)
    p = np.random.default_rng(0).uniform(0, 2 * np.pi, c.n_params)
    obs = PauliSum.from_word(PauliString.from_sparse(5, {0: "Z"}))
    assert leakage(c, p, obs, SubspaceDescriptor("majorana", eta=2)) <= 1e-10


def test_u1_twirl_projects():
    op = PauliSum.from_terms([(1.0, "XXI"), (1.0, "XYI"), (2.0, "ZIZ"), (1.0, "XII")])
    tw = u1_twirl(op)
    # dense reference: average exp(-i a Ztot) O exp(i a Ztot) over a fine angle grid
    from subspace_sim.pauli import total_z
    zd = np.diag(total_z(3).to_matrix()).real
    M = op.to_matrix()
    ref = np.zeros_like(M)
    grid = np.linspace(0, np.pi, 64, endpoint=False)
    for a in grid:
        ph = np.exp(-1j * a * zd)
        ref += (ph[:, None] * M) * ph.conj()[None, :]
    assert np.allclose(tw.to_matrix(), ref / len(grid), atol=1e-12)
    assert tw.allclose(PauliSum.from_terms([(0.5, "XXI"), (0.5, "YYI"), (0.5, "XYI"), (-0.5, "YXI"),
                                            (2.0, "ZIZ")]))
    c = build_u1_equivariant(3, 2)
    assert leakage(c, np.ones(c.n_params), PauliSum.from_label("ZIZ"),
                   SubspaceDescriptor("u1_equivariant")) <= 1e-10


def test_hea_local_leakage_support():
    c = build_shallow_hea(8, 2)
    p = np.random.default_rng(1).uniform(0, 2 * np.pi, c.n_params)
    obs = PauliSum.from_word(PauliString.from_sparse(8, {3: "Z"}))
    assert leakage(c, p, obs, SubspaceDescriptor("support", qubits=(2, 3, 4, 5))) <= 1e-10
    assert leakage(c, p, obs, SubspaceDescriptor("support", qubits=(3,))) > 1e-3


def test_random_u_continuous_decay():
    n = 6
    u = random_circuit(n, 40, seed=3)
    rep = discrete_vs_continuous(u.bind(np.random.default_rng(0).uniform(0, 6, u.n_params)),
                                 PauliSum.from_word(PauliString.from_sparse(n, {0: "Z"})),
                                 [1, 2, 3, 4], 400, seed=1)
    c = [r["E_cont_high"] for r in rep["rows"]]
    assert all(a >= b for a, b in zip(c, c[1:]))
    assert c[-1] < c[0]


def test_weight_histogram():
    op = PauliSum.from_terms([(1.0, "XI"), (2.0, "ZZ")])
    assert weight_histogram(op) == {1: 1.0, 2: 4.0}
