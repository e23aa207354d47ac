"""Evolution of U(1)-equivariant circuits inside a fixed Hamming-weight sector.

Basis states are qubit bitmasks (bit j = qubit j) with exactly ``k`` ones,
indexed in colexicographic order: the mask with set positions
``c_0 < c_1 < ... < c_{k-1}`` has rank ``sum_i C(c_i, i + 1)``.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .circuits import Circuit, Gate, commutes_with_total_z
from .errors import ArgumentError, DimensionError, InadmissibleError, ResourceError, UnsupportedGateError
from .pauli import PauliString, PauliSum, popcount
from .statevector import _check_params

INDEX_LIMIT = 2 ** 62
SECTOR_CAP = 2 ** 26
_PHASES = np.array([1, 1j, -1, -1j], dtype=complex)


def sector_dim(n: int, k: int, limit: int = INDEX_LIMIT) -> int:
    """``C(n, k)``; raises :class:`ResourceError` above ``limit``."""
    if not 0 <= k <= n:
        raise ArgumentError("need 0 <= k <= n")
    d = math.comb(n, k)
    if d > limit:
        raise ResourceError(f"C({n}, {k}) = {d} exceeds the index limit", partial=d)
    return d


@functools.lru_cache(maxsize=16)
def _binom_table(n: int) -> np.ndarray:
    t = np.zeros((n + 1, n + 2), dtype=np.int64)
    for a in range(n + 1):
        for b in range(n + 2):
            t[a, b] = math.comb(a, b)
    return t


def colex_rank(mask: int, n: int) -> int:
    r, i = 0, 0
    for p in range(n):
        if (mask >> p) & 1:
            i += 1
            r += math.comb(p, i)
    return r


def colex_unrank(rank: int, n: int, k: int) -> int:
    mask = 0
    for i in range(k, 0, -1):
        p = i - 1
        while math.comb(p + 1, i) <= rank:
            p += 1
        rank -= math.comb(p, i)
        mask |= 1 << p
    return mask


def rank_array(masks: np.ndarray, n: int) -> np.ndarray:
    """Vectorized colex rank."""
    table = _binom_table(n)
    r = np.zeros(masks.shape, dtype=np.int64)
    cnt = np.zeros(masks.shape, dtype=np.int64)
    for p in range(n):
        bit = (masks >> p) & 1
        cnt += bit
        r += bit * table[p, cnt]
    return r


@functools.lru_cache(maxsize=16)
def sector_masks(n: int, k: int) -> np.ndarray:
    """All weight-``k`` masks in colex order."""
    d = sector_dim(n, k)
    if d > SECTOR_CAP:
        raise ResourceError(f"sector dimension {d} exceeds cap {SECTOR_CAP}", partial=d)
    out = np.zeros(d, dtype=np.int64)
    # walk colex order with Gosper's hack
    m = (1 << k) - 1
    for i in range(d):
        out[i] = m
        if k == 0:
            break
        c = m & -m
        r = m + c
        m = (((r ^ m) >> 2) // c) | r
    return out


@dataclass
class SectorState:
    """Amplitudes over the weight-``k`` sector of ``n`` qubits (colex order)."""

    n: int
    k: int
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (sector_dim(self.n, self.k),):
            raise DimensionError("amplitude vector does not match C(n, k)")

    @property
    def masks(self) -> np.ndarray:
        return sector_masks(self.n, self.k)

    def index(self, bits) -> int:
        mask = _to_mask(bits, self.n) if isinstance(bits, str) else int(bits)
        if bin(mask).count("1") != self.k:
            raise ArgumentError("bitstring is not in this sector")
        return colex_rank(mask, self.n)

    def bits(self, i: int) -> str:
        m = colex_unrank(i, self.n, self.k)
        return "".join("1" if (m >> j) & 1 else "0" for j in range(self.n))

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def to_dense(self) -> np.ndarray:
        """Full ``2**n`` statevector (qubit 0 most significant), for comparisons."""
        from .statevector import index_mask
        out = np.zeros(1 << self.n, dtype=complex)
        idx = np.array([index_mask(int(m), self.n) for m in self.masks], dtype=np.int64)
        out[idx] = self.amplitudes
        return out


def _to_mask(bits: str, n: int | None = None) -> int:
    if n is not None and len(bits) != n:
        raise ArgumentError(f"bitstring must have {n} characters")
    if set(bits) - {"0", "1"}:
        raise ArgumentError("bitstring must contain only 0 and 1")
    return sum(1 << j for j, b in enumerate(bits) if b == "1")


def embed_state(bits: str, k: int | None = None) -> SectorState:
    """Computational basis state ``|bits>`` (qubit 0 leftmost) in its sector."""
    n = len(bits)
    mask = _to_mask(bits)
    w = bin(mask).count("1")
    if k is not None and w != k:
        raise ArgumentError(f"bitstring has weight {w}, expected {k}")
    amps = np.zeros(sector_dim(n, w), dtype=complex)
    amps[colex_rank(mask, n)] = 1.0
    return SectorState(n, w, amps)


def _split_generator(gen: PauliSum):
    """Diagonal words and Givens pairs ``c (X_iX_j + Y_iY_j)`` of an equivariant generator."""
    diag, pairs = [], {}
    for w, c in gen:
        c = c.real
        if w.x == 0:
            diag.append((w.z, c))
            continue
        if w.weight() != 2 or w.x != (w.x | w.z) or bin(w.x).count("1") != 2:
            raise UnsupportedGateError(f"word {w.label} is neither diagonal nor a hopping term")
        # XX has z = 0, YY has z = x
        kind = "XX" if w.z == 0 else ("YY" if w.z == w.x else None)
        if kind is None:
            raise UnsupportedGateError(f"word {w.label} is neither diagonal nor a hopping term")
        pairs.setdefault(w.x, {})[kind] = c
    out = []
    for xm, d in pairs.items():
        if set(d) != {"XX", "YY"} or abs(d["XX"] - d["YY"]) > 1e-12:
            raise UnsupportedGateError("hopping terms must appear as c (XX + YY)")
        out.append((xm, d["XX"]))
    return diag, out


_DIAG_CLIFFORD = {"Z": np.pi, "S": np.pi / 2, "SDG": -np.pi / 2}


def apply_sector_gate(state: SectorState, gate: Gate, params=None) -> SectorState:
    """Apply one gate inside the sector.

    Supported: rotations whose generator is a sum of diagonal (Z-type) words
    and hopping pairs ``c (X_iX_j + Y_iY_j)``, and the Clifford gates Z, S,
    SDG, CZ, SWAP.

    Raises
    ------
    UnsupportedGateError
        For gates that do not preserve the Hamming weight.
    """
    n, masks = state.n, state.masks
    psi = state.amplitudes.copy()
    if gate.kind == "clifford":
        q = gate.qubits
        if gate.name in _DIAG_CLIFFORD:
            bit = (masks >> q[0]) & 1
            psi = psi * np.exp(1j * _DIAG_CLIFFORD[gate.name] * bit)
        elif gate.name == "CZ":
            both = ((masks >> q[0]) & (masks >> q[1]) & 1).astype(bool)
            psi[both] *= -1
        elif gate.name == "SWAP":
            a, b = q
            diff = (((masks >> a) ^ (masks >> b)) & 1).astype(bool)
            flip = masks ^ ((1 << a) | (1 << b))
            src = np.arange(masks.size)
            tgt = src.copy()
            tgt[diff] = rank_array(flip[diff], n)
            out = np.empty_like(psi)
            out[tgt] = psi[src]
            psi = out
        else:
            raise UnsupportedGateError(f"Clifford {gate.name} does not preserve Hamming weight")
        return SectorState(n, state.k, psi)
    theta = gate.angle if gate.param_slot is None else float(np.asarray(params)[gate.param_slot])
    diag, pairs = _split_generator(gate.generator)
    if diag:
        phase = np.zeros(masks.size)
        for zm, c in diag:
            sign = 1 - 2 * (popcount(masks & zm) & 1)
            phase += c * sign
        psi = psi * np.exp(-1j * theta * phase)
    for xm, c in pairs:
        # (XX + YY) swaps |..1_i..0_j..> <-> |..0_i..1_j..> with amplitude 2
        a = 2 * c * theta
        ca, sa = math.cos(a), math.sin(a)
        one = (popcount(masks & xm) == 1)
        src = np.flatnonzero(one)
        partner = rank_array(masks[src] ^ xm, n)
        new = psi.copy()
        new[src] = ca * psi[src] - 1j * sa * psi[partner]
        psi = new
    return SectorState(n, state.k, psi)


def evolve(state: SectorState, circuit: Circuit, params=None) -> SectorState:
    if circuit.n != state.n:
        raise DimensionError("state and circuit differ in qubit count")
    params = _check_params(circuit, params)
    for i, g in enumerate(circuit.gates):
        try:
            state = apply_sector_gate(state, g, params)
        except UnsupportedGateError as exc:
            raise UnsupportedGateError(str(exc), gate_index=i) from None
    return state


def sector_expectation(state: SectorState, obs: PauliSum) -> float:
    """``<psi|O|psi>`` evaluated word by word on sector masks."""
    masks, n = state.masks, state.n
    psi = state.amplitudes
    total = 0.0 + 0.0j
    for w, c in obs:
        tgt = masks ^ w.x
        ok = popcount(tgt) == state.k
        if not ok.any():
            continue
        src = np.flatnonzero(ok)
        # W |m> = i^{|x&z|} (-1)^{|z&m|} |m ^ x>
        sign = 1 - 2 * (popcount(masks[src] & w.z) & 1)
        ph = _PHASES[(bin(w.x & w.z).count("1") + w.phase) % 4]
        cols = rank_array(tgt[src], n)
        total += c * ph * np.sum(np.conj(psi[cols]) * sign * psi[src])
    return float(total.real)


def sector_loss(state_prep, circuit: Circuit, params, obs: PauliSum) -> float:
    """Loss of a U(1)-equivariant circuit evaluated in the input's Hamming sector.

    ``state_prep`` is a bitstring (qubit 0 leftmost) or a :class:`SectorState`.

    Raises
    ------
    InadmissibleError
        If ``obs`` does not commute with ``sum_j Z_j``.
    """
    if obs.n != circuit.n:
        raise DimensionError("observable and circuit differ in qubit count")
    if not commutes_with_total_z(obs):
        raise InadmissibleError("observable is not U(1)-equivariant")
    state = embed_state(state_prep) if isinstance(state_prep, str) else state_prep
    return sector_expectation(evolve(state, circuit, params), obs)
