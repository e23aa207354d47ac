"""Local observables under a shallow brickwork circuit only see a light cone.

Builds a 12-qubit, 3-layer hardware-efficient circuit, finds the backward cone
of Z on qubit 5, and evaluates the loss on the reduced circuit from (a) the
exact reduced state and (b) classical shadows of the input state.
"""
import numpy as np

from subspace_sim.circuits import build_shallow_hea, random_prep
from subspace_sim.lightcone import backward_cone, reduced_loss, reduced_loss_from_shadows
from subspace_sim.pauli import PauliString, PauliSum
from subspace_sim.shadows import acquire
from subspace_sim.statevector import loss, prepare, reduced_density

n, L = 12, 3
circuit = build_shallow_hea(n, L)
prep = random_prep(n, 1, seed=0)
obs = PauliSum.from_word(PauliString.from_sparse(n, {5: "Z"}))
params = np.random.default_rng(0).uniform(0, 2 * np.pi, circuit.n_params)

cone = backward_cone(circuit, obs.support())
print(f"{len(circuit.gates)} gates in total, {len(cone.gate_indices)} inside the cone")
print(f"cone qubits: {cone.qubit_set}")

rho = reduced_density(prepare(prep, n), list(cone.qubit_set))
exact = loss(prep, circuit, params, obs)
print(f"oracle loss        {exact:+.12f}")
print(f"reduced-cone loss  {reduced_loss(cone, rho, obs, params):+.12f}")

ds = acquire(prep, 20_000, seed=1)
est = reduced_loss_from_shadows(cone, ds, obs, params, target_stderr=0.05)
print(f"shadow estimate    {est.value:+.4f} +/- {est.stderr:.4f} ({est.status})")
