"""Global versus local cost under a shallow circuit.

The loss variance of Z on every qubit shrinks exponentially with n while the
variance of a single-qubit Z stays flat; the decision rule labels both.
"""
from subspace_sim.circuits import ParamDistribution, build_shallow_hea
from subspace_sim.diagnostics import oracle_evaluator, variance_scan
from subspace_sim.pauli import PauliString, PauliSum

build = lambda n: build_shallow_hea(n, 2)
observables = {
    "global Z...Z": lambda n: PauliSum.from_label("Z" * n),
    "local Z_1": lambda n: PauliSum.from_word(PauliString.from_sparse(n, {0: "Z"})),
}
for name, obs in observables.items():
    rep = variance_scan(oracle_evaluator(build, obs), ParamDistribution.uniform(), [4, 6, 8, 10], 200, seed=7)
    print(name)
    for r in rep.records:
        print(f"  n={r['n']:2d}  Var = {r['variance']:.5f} +/- {r['stderr_of_variance']:.5f}")
    print(f"  slope {rep.fit['slope']:.3f}, r^2 {rep.fit['r2']:.3f} -> {rep.classification}")
