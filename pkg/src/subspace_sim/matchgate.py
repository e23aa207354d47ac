"""Matchgate (free-fermion) circuits in the Majorana picture.

Majoranas are indexed 1..2n with the Jordan-Wigner map

    c_{2j-1} = Z_1 ... Z_{j-1} X_j,     c_{2j} = Z_1 ... Z_{j-1} Y_j

(1-based qubit ``j`` is qubit ``j - 1`` of a :class:`PauliString`). A monomial
on the sorted index set ``S`` is ``i**(eta (eta - 1) / 2) c_{s_1} ... c_{s_eta}``,
which is Hermitian. Quadratic generators ``H = s i c_a c_b`` act on single
Majoranas by the rotation ``U^dag c_mu U = sum_nu R[mu, nu] c_nu``; an
eta-monomial transforms with the eta-th compound matrix ``det R[S, T]``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .circuits import Circuit
from .errors import ArgumentError, ConsistencyError, InadmissibleError, ResourceError
from .pauli import PauliString, PauliSum
from .statevector import _check_params

MODULE_CAP = 10 ** 6
INDEX_LIMIT = 2 ** 62


@dataclass(frozen=True)
class MajoranaMonomial:
    """Sorted 1-based Majorana indices with a real weight."""

    indices: tuple[int, ...]
    weight: float = 1.0

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ArgumentError("Majorana indices must be strictly increasing")
        if idx and idx[0] < 1:
            raise ArgumentError("Majorana indices start at 1")
        object.__setattr__(self, "indices", idx)

    @property
    def eta(self) -> int:
        return len(self.indices)


def majorana(n: int, mu: int) -> PauliString:
    """Single Jordan-Wigner Majorana ``c_mu`` (1-based) on ``n`` qubits."""
    if not 1 <= mu <= 2 * n:
        raise ArgumentError(f"Majorana index {mu} outside 1..{2 * n}")
    j = (mu - 1) // 2
    z = (1 << j) - 1
    x = 1 << j
    if mu % 2 == 0:
        z |= 1 << j
    return PauliString(n, x, z)


def majorana_to_pauli(m, n: int) -> PauliString:
    """Jordan-Wigner image of a monomial, including the Hermitizing phase."""
    idx = m.indices if isinstance(m, MajoranaMonomial) else tuple(m)
    if idx and max(idx) > 2 * n:
        raise ArgumentError(f"index {max(idx)} exceeds 2n = {2 * n}")
    out = PauliString(n)
    for mu in idx:
        out = out * majorana(n, mu)
    eta = len(idx)
    return PauliString(n, out.x, out.z, (out.phase + eta * (eta - 1) // 2) % 4)


def pauli_to_majorana(word: PauliString) -> tuple[tuple[int, ...], int]:
    """Majorana index set of a Pauli word and the sign ``s`` with ``word = s * monomial``.

    Decoding runs from the last qubit to the first, tracking the parity of
    Majoranas already placed on later qubits (each contributes a ``Z``).
    """
    n = word.n
    idx: list[int] = []
    parity = 0
    for j in range(n - 1, -1, -1):
        xb, zb = (word.x >> j) & 1, (word.z >> j) & 1
        ch = "IZXY"[2 * xb + zb]
        if parity == 0:
            own = {"I": (), "X": (1,), "Y": (2,), "Z": (1, 2)}[ch]
        else:
            own = {"Z": (), "Y": (1,), "X": (2,), "I": (1, 2)}[ch]
        idx = [2 * j + o for o in own] + idx
        parity ^= len(own) & 1
    idx_t = tuple(idx)
    mono = majorana_to_pauli(idx_t, n)
    # both are +-1 (or +-i) times the same canonical word
    rel = (word.phase - mono.phase) % 4
    if rel not in (0, 2):
        raise ConsistencyError("word and monomial differ by an imaginary phase")
    return idx_t, 1 if rel == 0 else -1


def majorana_degree(word: PauliString) -> int:
    """Number of Majoranas in the monomial equal (up to sign) to ``word``."""
    return len(pauli_to_majorana(word.canonical())[0])


@dataclass(frozen=True)
class RotationMatrix:
    """Real orthogonal ``2n x 2n`` matrix with unit determinant."""

    R: np.ndarray

    def __post_init__(self):
        R = np.asarray(self.R, dtype=float)
        if R.ndim != 2 or R.shape[0] != R.shape[1] or R.shape[0] % 2:
            raise ArgumentError("rotation must be a square 2n x 2n matrix")
        if not np.allclose(R.T @ R, np.eye(R.shape[0]), atol=1e-9):
            raise ConsistencyError("rotation is not orthogonal")
        if abs(np.linalg.det(R) - 1) > 1e-9:
            raise ConsistencyError("rotation determinant is not +1")
        object.__setattr__(self, "R", R)


def _gate_pairs(gen: PauliSum) -> list[tuple[int, int, float]]:
    """``(a, b, s * coeff)`` with ``H = sum coeff * s * i c_a c_b``; 0-based a < b."""
    out = []
    for w, c in gen:
        idx, s = pauli_to_majorana(w)
        if len(idx) != 2:
            raise InadmissibleError(f"generator word {w.label} is not quadratic in Majoranas")
        out.append((idx[0] - 1, idx[1] - 1, s * c.real))
    return out


def circuit_rotation(circuit: Circuit, params=None) -> RotationMatrix:
    """``R = R_L ... R_1`` with ``U^dag c_mu U = sum_nu R[mu, nu] c_nu``.

    For ``exp(-i t s i c_a c_b)`` the block is
    ``c_a -> cos 2t c_a + s sin 2t c_b``, ``c_b -> cos 2t c_b - s sin 2t c_a``.

    Raises
    ------
    InadmissibleError
        If a gate is a Clifford gate or a generator word is not quadratic.
    """
    params = _check_params(circuit, params)
    dim = 2 * circuit.n
    R = np.eye(dim)
    for i, g in enumerate(circuit.gates):
        if g.kind != "rotation":
            raise InadmissibleError("matchgate circuits use rotations only", gate_index=i)
        try:
            pairs = _gate_pairs(g.generator)
        except InadmissibleError as exc:
            raise InadmissibleError(str(exc), gate_index=i) from None
        theta = g.angle_for(params)
        G = np.eye(dim)
        for a, b, s in pairs:
            t = 2 * theta * s
            blk = np.eye(dim)
            blk[a, a] = blk[b, b] = math.cos(t)
            blk[a, b] = math.sin(t)
            blk[b, a] = -math.sin(t)
            G = blk @ G
        R = G @ R
    return RotationMatrix(R)


def module_dim(n: int, eta: int, limit: int = INDEX_LIMIT) -> int:
    """``C(2n, eta)``."""
    if not 0 <= eta <= 2 * n:
        raise ArgumentError("need 0 <= eta <= 2n")
    d = math.comb(2 * n, eta)
    if d > limit:
        raise ResourceError(f"C({2 * n}, {eta}) = {d} exceeds the index limit", partial=d)
    return d


def subsets(n: int, eta: int) -> list[tuple[int, ...]]:
    """All 1-based ``eta``-subsets of ``1..2n`` in lexicographic order."""
    return list(itertools.combinations(range(1, 2 * n + 1), eta))


def compound(R: np.ndarray, eta: int, rows=None, cols=None) -> np.ndarray:
    """Compound matrix ``C[S, T] = det R[S, T]`` over 1-based index subsets."""
    R = np.asarray(R)
    dim = R.shape[0]
    rows = list(itertools.combinations(range(1, dim + 1), eta)) if rows is None else rows
    cols = list(itertools.combinations(range(1, dim + 1), eta)) if cols is None else cols
    if eta == 0:
        return np.ones((len(rows), len(cols)))
    ci = np.array(cols, dtype=np.int64) - 1
    out = np.empty((len(rows), len(cols)))
    for r, S in enumerate(rows):
        sub = R[np.array(S) - 1]                      # eta x dim
        blocks = sub[:, ci].transpose(1, 0, 2)        # cols x eta x eta
        out[r] = np.linalg.det(blocks)
    return out


def module_loss(circuit: Circuit, params, obs_monomials, state_correlations,
                cap: int = MODULE_CAP) -> float:
    """Loss of an ``eta``-monomial observable under a matchgate circuit.

    Parameters
    ----------
    obs_monomials : list of MajoranaMonomial
        All with the same ``eta``.
    state_correlations : dict or callable
        Map from index tuples ``T`` to ``<monomial_T>``; missing keys count as
        zero. A callable receives the list of all ``eta``-subsets and
        returns their expectations.
    """
    obs_monomials = list(obs_monomials)
    if not obs_monomials:
        return 0.0
    etas = {m.eta for m in obs_monomials}
    if len(etas) != 1:
        raise ArgumentError("observable monomials must share eta")
    eta = etas.pop()
    n = circuit.n
    if eta > n:
        raise ArgumentError("only eta <= n is supported")
    if module_dim(n, eta) > cap:
        raise ResourceError(f"module dimension {module_dim(n, eta)} exceeds cap {cap}",
                            partial=module_dim(n, eta))
    R = circuit_rotation(circuit, params).R
    if callable(state_correlations):
        cols = subsets(n, eta)
        corr = np.asarray(state_correlations(cols), dtype=float)
    else:
        items = [(tuple(k), float(v)) for k, v in state_correlations.items() if v != 0]
        if not items:
            return 0.0
        cols = [k for k, _ in items]
        corr = np.array([v for _, v in items])
    rows = [m.indices for m in obs_monomials]
    w = np.array([m.weight for m in obs_monomials], dtype=float)
    C = compound(R, eta, rows, cols)
    return float(w @ C @ corr)


def observable_to_monomials(obs: PauliSum) -> list[MajoranaMonomial]:
    """Rewrite a Hermitian Pauli sum as weighted Majorana monomials."""
    out = []
    for w, c in obs:
        idx, s = pauli_to_majorana(w)
        out.append(MajoranaMonomial(idx, s * c.real))
    return out


def majorana_correlations(state_prep: Circuit | None, n: int, eta: int, prep_params=None):
    """Callable returning ``<monomial_T>`` for a list of subsets, queried as Pauli expectations."""
    from .shadows import direct_expectations

    def corr(cols):
        ops = [PauliSum.from_word(majorana_to_pauli(T, n)) for T in cols]
        return direct_expectations(state_prep, ops, n=n, prep_params=prep_params)
    return corr
