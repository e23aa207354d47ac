"""Exact dense statevector simulator used as ground truth.

Amplitude index convention: qubit 0 is the most significant bit, matching the
Kronecker order of :meth:`PauliString.to_matrix`.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .circuits import Circuit, Gate
from .errors import ArgumentError, DimensionError, ResourceError, UnsupportedGateError
from .pauli import PauliString, PauliSum

QUBIT_CAP = 20
REDUCED_CAP = 14

_S2 = 1 / math.sqrt(2)
CLIFFORD_MATRICES = {
    "H": np.array([[_S2, _S2], [_S2, -_S2]], dtype=complex),
    "S": np.diag([1, 1j]).astype(complex),
    "SDG": np.diag([1, -1j]).astype(complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.diag([1, -1]).astype(complex),
    "CX": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
    "CZ": np.diag([1, 1, 1, -1]).astype(complex),
    "SWAP": np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex),
}


@dataclass
class DenseState:
    """Pure ``n``-qubit state as a length ``2**n`` complex vector."""

    n: int
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (1 << self.n,):
            raise DimensionError(f"expected {1 << self.n} amplitudes, got {self.amplitudes.shape}")

    @classmethod
    def zero(cls, n: int, cap: int = QUBIT_CAP) -> "DenseState":
        _check_cap(n, cap)
        a = np.zeros(1 << n, dtype=complex)
        a[0] = 1.0
        return cls(n, a)

    @classmethod
    def from_bits(cls, bits: str) -> "DenseState":
        n = len(bits)
        a = np.zeros(1 << n, dtype=complex)
        a[int(bits, 2) if n else 0] = 1.0
        return cls(n, a)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "DenseState":
        return DenseState(self.n, self.amplitudes.copy())


def _check_cap(n, cap):
    if n > cap:
        raise ResourceError(f"{n} qubits exceeds the dense-oracle cap of {cap}", partial=n)


@functools.lru_cache(maxsize=32)
def _indices(n: int) -> np.ndarray:
    return np.arange(1 << n, dtype=np.int64)


def index_mask(mask: int, n: int) -> int:
    """Convert a qubit bitmask (bit j = qubit j) to an amplitude-index mask."""
    out = 0
    for j in range(n):
        if (mask >> j) & 1:
            out |= 1 << (n - 1 - j)
    return out


def apply_word(psi: np.ndarray, n: int, word: PauliString) -> np.ndarray:
    """Return ``P |psi>`` for a (phased) Pauli word."""
    xm = index_mask(word.x, n)
    zm = index_mask(word.z, n)
    idx = _indices(n)
    ph = (1j) ** ((bin(word.x & word.z).count("1") + word.phase) % 4)
    signs = 1 - 2 * (np.bitwise_count(idx & zm) & 1).astype(np.int8)
    out = np.empty_like(psi)
    out[idx ^ xm] = ph * signs * psi
    return out


def _rotate_word(psi, n, word, angle):
    c, s = math.cos(angle), math.sin(angle)
    return c * psi - 1j * s * apply_word(psi, n, word)


def apply_matrix(psi: np.ndarray, n: int, qubits, mat: np.ndarray) -> np.ndarray:
    """Apply a ``2**k x 2**k`` matrix to ``qubits`` (first listed = most significant)."""
    k = len(qubits)
    t = psi.reshape((2,) * n)
    t = np.moveaxis(t, list(qubits), list(range(k)))
    shp = t.shape
    t = (mat @ t.reshape(1 << k, -1)).reshape(shp)
    t = np.moveaxis(t, list(range(k)), list(qubits))
    return np.ascontiguousarray(t).reshape(-1)


def apply_gate(psi: np.ndarray, n: int, gate: Gate, angle: float | None,
               shifts: dict | None = None, gate_index: int = -1) -> np.ndarray:
    if gate.kind == "clifford":
        return apply_matrix(psi, n, gate.qubits, CLIFFORD_MATRICES[gate.name])
    for t, (w, c) in enumerate(gate.terms()):
        a = c * angle
        if shifts:
            a += shifts.get((gate_index, t), 0.0)
        psi = _rotate_word(psi, n, w, a)
    return psi


def apply_circuit(state: DenseState, circuit: Circuit, params=None, *, shifts=None) -> DenseState:
    """Evolve ``state`` through ``circuit``.

    ``shifts`` optionally maps ``(gate_index, term_index)`` to an extra angle
    added to that single-word rotation (used by the parameter-shift rule).
    """
    if state.n != circuit.n:
        raise DimensionError(f"state has {state.n} qubits, circuit {circuit.n}")
    params = _check_params(circuit, params)
    psi = state.amplitudes
    for i, g in enumerate(circuit.gates):
        angle = None if g.kind == "clifford" else g.angle_for(params)
        psi = apply_gate(psi, state.n, g, angle, shifts, i)
    return DenseState(state.n, psi)


def _check_params(circuit, params):
    if params is None:
        params = np.zeros(0)
    params = np.asarray(params, dtype=float)
    if params.shape != (circuit.n_params,):
        raise DimensionError(f"expected {circuit.n_params} parameters, got {params.shape}")
    return params


def prepare(state_prep: Circuit | None, n: int, prep_params=None, cap: int = QUBIT_CAP) -> DenseState:
    """``|0...0>`` evolved through ``state_prep`` (``None`` means no preparation)."""
    st = DenseState.zero(n, cap)
    if state_prep is None:
        return st
    return apply_circuit(st, state_prep, prep_params)


def expectation(state: DenseState, op) -> float:
    """``<psi| P |psi>`` for a word or a Hermitian Pauli sum (real part)."""
    if isinstance(op, str):
        op = PauliString.from_label(op)
    if isinstance(op, PauliString):
        if op.n != state.n:
            raise DimensionError("word and state differ in qubit count")
        return float(np.vdot(state.amplitudes, apply_word(state.amplitudes, state.n, op)).real)
    if op.n != state.n:
        raise DimensionError("operator and state differ in qubit count")
    total = 0.0
    for w, c in op:
        total += (c * np.vdot(state.amplitudes, apply_word(state.amplitudes, state.n, w))).real
    return float(total)


def expectations(state: DenseState, ops) -> np.ndarray:
    return np.array([expectation(state, o) for o in ops], dtype=float)


def loss(state_prep: Circuit | None, circuit: Circuit, params, obs: PauliSum,
         prep_params=None) -> float:
    """``<psi(theta)| O |psi(theta)>`` with ``psi`` prepared from ``|0...0>``."""
    if not obs.is_hermitian():
        raise ArgumentError("observable must be Hermitian")
    if obs.n != circuit.n:
        raise DimensionError("observable and circuit differ in qubit count")
    st = prepare(state_prep, circuit.n, prep_params)
    st = apply_circuit(st, circuit, params)
    return expectation(st, obs)


def reduced_density(state: DenseState, qubits, cap: int = REDUCED_CAP) -> np.ndarray:
    """Partial trace onto the ordered qubit list (first listed = most significant)."""
    qubits = list(qubits)
    if len(qubits) > cap:
        raise ResourceError(f"reduced state on {len(qubits)} qubits exceeds cap {cap}",
                            partial=len(qubits))
    if len(set(qubits)) != len(qubits) or any(not 0 <= q < state.n for q in qubits):
        raise DimensionError("invalid qubit subset")
    k = len(qubits)
    rest = [q for q in range(state.n) if q not in qubits]
    t = state.amplitudes.reshape((2,) * state.n).transpose(qubits + rest)
    m = t.reshape(1 << k, -1)
    return m @ m.conj().T


def parameter_shift_gradient(state_prep, circuit: Circuit, params, obs: PauliSum, slot: int,
                             prep_params=None) -> float:
    """Exact ``d loss / d theta_slot`` via shifts of +-pi/4 per single-word rotation.

    For ``exp(-i a P)`` with ``P**2 = 1`` the loss is ``A + B cos 2a + C sin 2a``,
    so ``dl/da = l(a + pi/4) - l(a - pi/4)``. Slots shared by several gates
    (or generators with several words / non-unit coefficients) are handled by
    the chain rule, shifting one word rotation at a time.
    """
    params = _check_params(circuit, params)
    users = circuit.slot_gates(slot)
    if not users:
        raise ArgumentError(f"slot {slot} is not used by any gate")
    st0 = prepare(state_prep, circuit.n, prep_params)
    grad = 0.0
    for gi in users:
        g = circuit.gates[gi]
        if g.kind != "rotation":
            raise UnsupportedGateError("parameter shift needs a Pauli rotation", gate_index=gi)
        for t, (_, c) in enumerate(g.terms()):
            vals = []
            for s in (math.pi / 4, -math.pi / 4):
                st = apply_circuit(st0, circuit, params, shifts={(gi, t): s})
                vals.append(expectation(st, obs))
            grad += c * (vals[0] - vals[1])
    return float(grad)


def circuit_unitary(circuit: Circuit, params=None) -> np.ndarray:
    """Dense unitary of the circuit (small n only; for tests)."""
    n = circuit.n
    _check_cap(n, 12)
    params = _check_params(circuit, params)
    dim = 1 << n
    cols = []
    for b in range(dim):
        e = np.zeros(dim, dtype=complex)
        e[b] = 1
        cols.append(apply_circuit(DenseState(n, e), circuit, params).amplitudes)
    return np.array(cols).T


def sector_amplitudes(state: DenseState, masks: np.ndarray) -> np.ndarray:
    """Amplitudes at qubit bitmasks ``masks`` (bit j = qubit j)."""
    n = state.n
    idx = np.zeros_like(masks)
    for j in range(n):
        idx |= ((masks >> j) & 1) << (n - 1 - j)
    return state.amplitudes[idx]
