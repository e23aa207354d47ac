"""Heisenberg back-propagation of observables in the Pauli basis.

A rotation ``exp(-i a P)`` maps a word ``Q`` to itself if it commutes with
``P`` and to ``cos(2a) Q + sin(2a) i P Q`` otherwise. Clifford gates permute
words up to sign. After every gate the :class:`TruncationPolicy` is applied.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .circuits import Circuit
from .errors import DimensionError, ResourceError, UnanswerableWordError
from .pauli import PauliString, PauliSum, mul_phase, popcount
from .statevector import CLIFFORD_MATRICES, _check_params

_PHASES = np.array([1, 1j, -1, -1j], dtype=complex)


@dataclass
class TruncationPolicy:
    """Limits applied after every gate; ``None`` means unlimited.

    Cuts run in order: weight, coefficient magnitude, term count (ties in
    the term-count cut go to the larger ``|coeff|`` and then to the smaller
    packed word key). ``discard_log`` accumulates the squared magnitude of
    every discarded coefficient during the most recent run.
    """

    max_weight: int | None = None
    min_coeff: float = 0.0
    max_terms: int | None = None
    term_cap: int = 5_000_000
    discard_log: float = field(default=0.0, compare=False)

    @property
    def unlimited(self) -> bool:
        return self.max_weight is None and self.min_coeff <= 0 and self.max_terms is None

    def apply(self, n, keys, coeffs):
        drop = 0.0
        if self.max_weight is not None:
            x, z = keys >> n, keys & ((1 << n) - 1)
            keep = popcount(x | z) <= self.max_weight
            if not keep.all():
                drop += float(np.sum(np.abs(coeffs[~keep]) ** 2))
                keys, coeffs = keys[keep], coeffs[keep]
        if self.min_coeff > 0:
            keep = np.abs(coeffs) >= self.min_coeff
            if not keep.all():
                drop += float(np.sum(np.abs(coeffs[~keep]) ** 2))
                keys, coeffs = keys[keep], coeffs[keep]
        if self.max_terms is not None and keys.size > self.max_terms:
            order = np.lexsort((keys, -np.abs(coeffs)))
            cut = order[self.max_terms:]
            drop += float(np.sum(np.abs(coeffs[cut]) ** 2))
            keep = np.sort(order[:self.max_terms])
            keys, coeffs = keys[keep], coeffs[keep]
        self.discard_log += drop
        return keys, coeffs


def _clifford_table(name: str):
    """Heisenberg action ``G^dag P G`` on local words: (new local index, sign)."""
    mat = CLIFFORD_MATRICES[name]
    k = 1 if mat.shape[0] == 2 else 2
    new_idx = np.zeros(4 ** k, dtype=np.int64)
    sign = np.zeros(4 ** k, dtype=float)
    words = {}
    for lx in range(1 << k):
        for lz in range(1 << k):
            # local bit i refers to the i-th listed target qubit
            w = PauliString(k, lx, lz)
            words[(lx, lz)] = w
    for (lx, lz), w in words.items():
        conj = mat.conj().T @ _local_matrix(w, k) @ mat
        for (mx, mz), v in words.items():
            ov = np.trace(_local_matrix(v, k).conj().T @ conj) / (1 << k)
            if abs(ov) > 0.5:
                new_idx[lx | (lz << k)] = mx | (mz << k)
                sign[lx | (lz << k)] = ov.real
                break
    return k, new_idx, sign


def _local_matrix(w: PauliString, k: int) -> np.ndarray:
    # local qubit 0 is the most significant factor, matching apply_matrix
    return w.to_matrix()


_TABLES = {name: _clifford_table(name) for name in CLIFFORD_MATRICES}


def _clifford_step(n, keys, coeffs, name, qubits):
    k, new_idx, sign = _TABLES[name]
    x, z = keys >> n, keys & ((1 << n) - 1)
    lx = np.zeros_like(x)
    lz = np.zeros_like(z)
    for i, q in enumerate(qubits):
        lx |= ((x >> q) & 1) << i
        lz |= ((z >> q) & 1) << i
    loc = lx | (lz << k)
    nl = new_idx[loc]
    clear = 0
    for q in qubits:
        clear |= 1 << q
    x = x & ~clear
    z = z & ~clear
    for i, q in enumerate(qubits):
        x |= ((nl >> i) & 1) << q
        z |= ((nl >> (k + i)) & 1) << q
    return (x << n) | z, coeffs * sign[loc]


def _rotation_step(n, keys, coeffs, word: PauliString, angle: float):
    px, pz = word.x, word.z
    x, z = keys >> n, keys & ((1 << n) - 1)
    anti = ((popcount(x & pz) + popcount(z & px)) & 1).astype(bool)
    if not anti.any():
        return keys, coeffs
    c2, s2 = math.cos(2 * angle), math.sin(2 * angle)
    ax, az, ac = x[anti], z[anti], coeffs[anti]
    # i * P * Q
    ph = (1 + mul_phase(np.full_like(ax, px), np.full_like(az, pz), ax, az)) % 4
    new_keys = ((ax ^ px) << n) | (az ^ pz)
    new_coeffs = s2 * ac * _PHASES[ph]
    coeffs = coeffs.copy()
    coeffs[anti] *= c2
    keys = np.concatenate([keys, new_keys])
    coeffs = np.concatenate([coeffs, new_coeffs])
    order = np.argsort(keys, kind="stable")
    keys, coeffs = keys[order], coeffs[order]
    starts = np.flatnonzero(np.r_[True, keys[1:] != keys[:-1]])
    keys = keys[starts]
    coeffs = np.add.reduceat(coeffs, starts)
    nz = np.abs(coeffs) > 1e-15
    return keys[nz], coeffs[nz]


def backpropagate(obs: PauliSum, circuit: Circuit, params=None,
                  policy: TruncationPolicy | None = None) -> PauliSum:
    """Heisenberg picture ``U^dag O U`` processed gate by gate in reverse.

    ``policy.discard_log`` is reset at the start of the run.
    """
    if obs.n != circuit.n:
        raise DimensionError("observable and circuit differ in qubit count")
    params = _check_params(circuit, params)
    policy = policy if policy is not None else TruncationPolicy()
    policy.discard_log = 0.0
    n = obs.n
    keys, coeffs = obs.keys.copy(), obs.coeffs.copy()
    keys, coeffs = policy.apply(n, keys, coeffs)
    for g in reversed(circuit.gates):
        if g.kind == "clifford":
            keys, coeffs = _clifford_step(n, keys, coeffs, g.name, g.qubits)
            order = np.argsort(keys)
            keys, coeffs = keys[order], coeffs[order]
        else:
            angle = g.angle_for(params)
            for w, c in g.terms():
                keys, coeffs = _rotation_step(n, keys, coeffs, w, c * angle)
        keys, coeffs = policy.apply(n, keys, coeffs)
        if keys.size > policy.term_cap:
            raise ResourceError(f"propagated sum exceeded {policy.term_cap} terms",
                                partial=int(keys.size))
    return PauliSum(n, keys, coeffs, prune=0.0)


def truncation_error_bound(policy: TruncationPolicy) -> float:
    """Accumulated discarded squared mass of the last run.

    A heuristic indicator only; it is not a rigorous bound on the loss error.
    """
    return policy.discard_log


def split_observable(obs: PauliSum, k: int) -> tuple[PauliSum, PauliSum]:
    """Split into terms of weight ``<= k`` and ``> k``."""
    w = obs.weights()
    return obs.select(w <= k), obs.select(w > k)


def loss_from_expectations(propagated: PauliSum, source) -> tuple[float, float]:
    """``sum_P alpha_P <P>`` and its standard error.

    ``source`` may be a :class:`DenseState` (exact, stderr 0), a
    :class:`ShadowDataset` (statistical), or any object with an
    ``estimate(PauliSum) -> (value, stderr)`` method.
    """
    from .shadows import ShadowDataset, estimate_observable
    from .statevector import DenseState, apply_word

    if isinstance(source, DenseState):
        if source.n != propagated.n:
            raise DimensionError("state and observable differ in qubit count")
        psi = source.amplitudes
        total = 0.0
        for w, c in propagated:
            total += (c * np.vdot(psi, apply_word(psi, source.n, w))).real
        return float(total), 0.0
    if isinstance(source, ShadowDataset):
        return estimate_observable(source, propagated)
    if hasattr(source, "estimate"):
        return source.estimate(propagated)
    raise UnanswerableWordError("unsupported expectation source", words=[])


def product_state_expectations(op: PauliSum, local: np.ndarray) -> float:
    """``<op>`` in a product state given per-qubit Bloch vectors ``local[j] = (<X>, <Y>, <Z>)``."""
    n = op.n
    x, z = op.x, op.z
    val = op.coeffs.copy()
    for j in range(n):
        bx = (x >> j) & 1
        bz = (z >> j) & 1
        f = np.ones(len(op))
        f = np.where((bx == 1) & (bz == 0), local[j, 0], f)
        f = np.where((bx == 1) & (bz == 1), local[j, 1], f)
        f = np.where((bx == 0) & (bz == 1), local[j, 2], f)
        val = val * f
    return float(np.sum(val).real)
