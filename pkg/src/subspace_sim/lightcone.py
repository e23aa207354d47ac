"""Backward light-cone reduction for local observables on shallow circuits."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .circuits import Circuit, Gate
from .errors import ConsistencyError, DimensionError, ResourceError
from .pauli import PauliSum, remap
from .propagation import backpropagate
from .shadows import DEFAULT_BATCHES, LOCALITY_BUDGET, ShadowDataset, estimate_observable
from .statevector import REDUCED_CAP, DenseState, _check_params, apply_circuit, expectation

RHO_TOL = 1e-8


@dataclass(frozen=True)
class LightCone:
    """Qubits that can influence the observable and the gates acting on them.

    ``kept_gates`` is a sub-circuit of the original (same ``n`` and
    ``n_params``, original order); ``gate_indices`` are positions in the
    original gate list.
    """

    qubit_set: tuple[int, ...]
    kept_gates: Circuit
    gate_indices: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.qubit_set)

    def reduced_circuit(self) -> Circuit:
        """``kept_gates`` relabelled onto qubits ``0..size-1`` (order of ``qubit_set``)."""
        pos = {q: i for i, q in enumerate(self.qubit_set)}
        gates = []
        for g in self.kept_gates.gates:
            if g.kind == "clifford":
                gates.append(Gate.clifford(g.name, [pos[q] for q in g.qubits], layer=g.layer))
            else:
                gen = remap(g.generator, self.qubit_set)
                gates.append(Gate("rotation", tuple(pos[q] for q in g.qubits), generator=gen,
                                  param_slot=g.param_slot, angle=g.angle, layer=g.layer))
        return Circuit(self.size, gates, self.kept_gates.n_params)


def backward_cone(circuit: Circuit, support) -> LightCone:
    """Sweep gates in reverse, keeping every gate that overlaps the growing support."""
    supp = set(int(q) for q in support)
    if any(not 0 <= q < circuit.n for q in supp):
        raise DimensionError("support qubit outside the circuit")
    kept = []
    for i in range(len(circuit.gates) - 1, -1, -1):
        g = circuit.gates[i]
        if supp.intersection(g.qubits):
            kept.append(i)
            supp.update(g.qubits)
    kept.reverse()
    sub = Circuit(circuit.n, [circuit.gates[i] for i in kept], circuit.n_params)
    return LightCone(tuple(sorted(supp)), sub, tuple(kept))


def _check_rho(rho: np.ndarray, c: int) -> None:
    if rho.shape != (1 << c, 1 << c):
        raise DimensionError(f"reduced state must be {1 << c} x {1 << c}")
    if not np.allclose(rho, rho.conj().T, atol=RHO_TOL):
        raise ConsistencyError("reduced state is not Hermitian")
    if abs(np.trace(rho).real - 1) > RHO_TOL:
        raise ConsistencyError("reduced state does not have unit trace")


def _cone_obs(cone: LightCone, obs: PauliSum) -> PauliSum:
    inside = set(cone.qubit_set)
    if not set(obs.support()) <= inside:
        raise ConsistencyError("observable support escapes the light cone")
    return remap(obs, cone.qubit_set)


def reduced_loss(cone: LightCone, rho_reduced: np.ndarray, obs: PauliSum, params=None,
                 cap: int = REDUCED_CAP) -> float:
    """``Tr[rho_c U_c^dag O U_c]`` on the cone qubits.

    ``rho_reduced`` is ordered like ``cone.qubit_set`` (first listed qubit
    most significant), e.g. from :func:`statevector.reduced_density`. The
    trace is taken over the eigen-ensemble of ``rho_reduced``, so memory
    stays ``O(2**c * rank)``.
    """
    c = cone.size
    if c > cap:
        raise ResourceError(f"light cone of {c} qubits exceeds cap {cap}", partial=c)
    params = _check_params(cone.kept_gates, params)
    rho = np.asarray(rho_reduced, dtype=complex)
    _check_rho(rho, c)
    local = _cone_obs(cone, obs)
    w, V = np.linalg.eigh(rho)
    if w.min() < -RHO_TOL:
        raise ConsistencyError("reduced state is not positive semidefinite")
    circ = cone.reduced_circuit()
    total = 0.0
    for p, v in zip(w, V.T):
        if p <= 1e-15:
            continue
        st = apply_circuit(DenseState(c, v), circ, params)
        total += p * expectation(st, local)
    return float(total)


@dataclass(frozen=True)
class ShadowLoss:
    """Shadow estimate with its standard error; ``status`` is ``"ok"`` or ``"insufficient"``."""

    value: float
    stderr: float
    status: str = "ok"
    n_words: int = 0


def reduced_loss_from_shadows(cone: LightCone, dataset: ShadowDataset, obs: PauliSum, params=None,
                              *, target_stderr: float | None = None,
                              batches: int = DEFAULT_BATCHES,
                              budget: int = LOCALITY_BUDGET) -> ShadowLoss:
    """Expand ``O(theta)`` in Pauli words on the cone and estimate it from a shadow dataset.

    When ``target_stderr`` is given and not met, the result carries status
    ``"insufficient"`` (and a warning is issued) instead of failing.
    """
    if dataset.n != cone.kept_gates.n:
        raise DimensionError("dataset and circuit differ in qubit count")
    if cone.size > budget:
        raise ResourceError(f"light cone of {cone.size} qubits exceeds shadow locality budget {budget}",
                            partial=cone.size)
    _cone_obs(cone, obs)
    heis = backpropagate(obs, cone.kept_gates, params)
    val, err = estimate_observable(dataset, heis, batches=batches, budget=budget)
    status = "ok"
    if target_stderr is not None and not err <= target_stderr:
        status = "insufficient"
        warnings.warn(f"achieved stderr {err:.3g} above target {target_stderr:.3g}", RuntimeWarning,
                      stacklevel=2)
    return ShadowLoss(val, err, status, len(heis))


def cone_bound(support_size: int, n_layers: int) -> int:
    """Brickwork growth bound ``|support| + 2 L``."""
    return support_size + 2 * n_layers


def shots_for_stderr(single_shot_var: float, target: float) -> int:
    """Shots so that ``sqrt(var / shots) <= target``."""
    return int(math.ceil(single_shot_var / target ** 2))
