"""Circuits with a small dynamical Lie algebra are simulated in the algebra.

Computes the algebra of the transverse-field Ising generators and of matchgate
generators, then reproduces oracle losses with g-sim in a vector space whose
dimension is polynomial in n.
"""
import numpy as np

from subspace_sim.circuits import build_hva, build_matchgate, tfim_terms
from subspace_sim.dla import lie_closure
from subspace_sim.gsim import gsim_loss, prepare_instance
from subspace_sim.pauli import PauliString, PauliSum
from subspace_sim.statevector import loss

for n in (4, 6, 8):
    mg = lie_closure(build_matchgate(n, 1).generators()).dim
    tf = lie_closure(build_hva(tfim_terms(n), 1).generators()).dim
    print(f"n={n}: matchgate dim {mg} (n(2n-1) = {n * (2 * n - 1)}), TFIM dim {tf}, full su(2^n) {4 ** n - 1}")

n = 8
circuit = build_hva(tfim_terms(n), 4)
obs = tfim_terms(n)[0]
inst = prepare_instance(circuit, obs, None)
rng = np.random.default_rng(3)
for _ in range(3):
    p = rng.uniform(0, 2 * np.pi, circuit.n_params)
    print(f"g-sim {gsim_loss(inst, p):+.12f}   oracle {loss(None, circuit, p, obs):+.12f}")
