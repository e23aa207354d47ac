"""Simulated data acquisition: Pauli classical shadows and direct expectation queries.

The "device" is the dense statevector oracle. Each shot picks an independent
uniformly random measurement basis X, Y or Z per qubit, rotates it onto Z and
samples a bitstring from the exact Born distribution.
"""
from __future__ import annotations

import hashlib
import io
import math
from dataclasses import dataclass

import numpy as np

from .circuits import Circuit
from .errors import ArgumentError, DimensionError, UnanswerableWordError
from .pauli import PauliString, PauliSum
from .statevector import QUBIT_CAP, DenseState, expectation, prepare

LOCALITY_BUDGET = 6
DEFAULT_BATCHES = 10
BASIS_CHARS = "XYZ"

_S2 = 1 / math.sqrt(2)
# maps the +1 eigenvector of X / Y / Z onto |0>
_BASIS_ROT = np.array([
    [[_S2, _S2], [_S2, -_S2]],                     # H
    [[_S2, -1j * _S2], [_S2, 1j * _S2]],           # H S^dag
    [[1, 0], [0, 1]],
], dtype=complex)


@dataclass(frozen=True)
class ShadowDataset:
    """Per-shot basis labels (0, 1, 2 for X, Y, Z) and outcome bits, both ``(shots, n)``."""

    n: int
    bases: np.ndarray
    outcomes: np.ndarray
    seed: int
    state_prep_id: str

    def __post_init__(self):
        b = np.asarray(self.bases, dtype=np.uint8)
        o = np.asarray(self.outcomes, dtype=np.uint8)
        if b.ndim != 2 or b.shape != o.shape or b.shape[1] != self.n:
            raise DimensionError("bases and outcomes must both have shape (shots, n)")
        object.__setattr__(self, "bases", b)
        object.__setattr__(self, "outcomes", o)

    @property
    def shots(self) -> int:
        return int(self.bases.shape[0])

    def __eq__(self, other):
        if not isinstance(other, ShadowDataset):
            return NotImplemented
        return (self.n == other.n and self.seed == other.seed
                and self.state_prep_id == other.state_prep_id
                and np.array_equal(self.bases, other.bases)
                and np.array_equal(self.outcomes, other.outcomes))

    def to_text(self) -> str:
        out = io.StringIO()
        out.write(f"shadow/v1 n={self.n} shots={self.shots} seed={self.seed} prep={self.state_prep_id}\n")
        chars = np.frombuffer(BASIS_CHARS.encode(), dtype=np.uint8)[self.bases]
        bits = (self.outcomes + ord("0")).astype(np.uint8)
        for row_b, row_o in zip(chars, bits):
            out.write(row_b.tobytes().decode() + " " + row_o.tobytes().decode() + "\n")
        return out.getvalue()

    @classmethod
    def from_text(cls, text: str) -> "ShadowDataset":
        lines = text.splitlines()
        if not lines or not lines[0].startswith("shadow/v1 "):
            raise ArgumentError("missing 'shadow/v1' header")
        fields = dict(tok.split("=", 1) for tok in lines[0].split()[1:])
        n, shots = int(fields["n"]), int(fields["shots"])
        body = lines[1:1 + shots]
        if len(body) != shots:
            raise ArgumentError(f"header announces {shots} shots, found {len(body)}")
        bases = np.zeros((shots, n), dtype=np.uint8)
        outs = np.zeros((shots, n), dtype=np.uint8)
        lut = {c: i for i, c in enumerate(BASIS_CHARS)}
        for i, line in enumerate(body):
            b, o = line.split(" ")
            if len(b) != n or len(o) != n:
                raise ArgumentError(f"shot {i} does not have {n} labels and bits")
            bases[i] = [lut[c] for c in b]
            outs[i] = [int(c) for c in o]
        return cls(n, bases, outs, int(fields["seed"]), fields["prep"])

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_text())

    @classmethod
    def load(cls, path) -> "ShadowDataset":
        with open(path, encoding="utf-8") as fh:
            return cls.from_text(fh.read())


def circuit_id(circuit: Circuit | None, n: int) -> str:
    """Short content hash naming a preparation circuit."""
    if circuit is None:
        return f"zero{n}"
    return hashlib.sha256(circuit.to_json().encode()).hexdigest()[:16]


def acquire(state_prep: Circuit | None, n_shots: int, seed: int, *, n: int | None = None,
            prep_params=None, cap: int = QUBIT_CAP, chunk: int = 4096) -> ShadowDataset:
    """Collect ``n_shots`` random-Pauli-basis measurements of the prepared state."""
    n = state_prep.n if state_prep is not None else n
    if n is None:
        raise ArgumentError("n is required when state_prep is None")
    state = prepare(state_prep, n, prep_params, cap=cap)
    return acquire_from_state(state, n_shots, seed, circuit_id(state_prep, n), chunk=chunk)


def acquire_from_state(state: DenseState, n_shots: int, seed: int, prep_id: str = "state",
                       chunk: int = 4096) -> ShadowDataset:
    n = state.n
    rng = np.random.default_rng(seed)
    bases = rng.integers(0, 3, size=(n_shots, n), dtype=np.uint8)
    u = rng.random(n_shots)
    outcomes = np.zeros((n_shots, n), dtype=np.uint8)
    psi = state.amplitudes
    weights = 1 << np.arange(n - 1, -1, -1)
    for s in range(0, n_shots, chunk):
        lab = bases[s:s + chunk]
        m = lab.shape[0]
        t = np.broadcast_to(psi, (m, psi.size)).reshape((m,) + (2,) * n)
        for j in range(n):
            mats = _BASIS_ROT[lab[:, j]]
            t = np.moveaxis(t, j + 1, 1)
            shp = t.shape
            t = np.einsum("bij,bjr->bir", mats, t.reshape(m, 2, -1)).reshape(shp)
            t = np.moveaxis(t, 1, j + 1)
        probs = np.abs(t.reshape(m, -1)) ** 2
        cdf = np.cumsum(probs, axis=1)
        cdf /= cdf[:, -1:]
        idx = np.minimum((cdf < u[s:s + m, None]).sum(axis=1), psi.size - 1)
        outcomes[s:s + m] = ((idx[:, None] & weights[None, :]) > 0).astype(np.uint8)
    return ShadowDataset(n, bases, outcomes, int(seed), prep_id)


def single_shot_values(ds: ShadowDataset, word: PauliString,
                       budget: int = LOCALITY_BUDGET) -> np.ndarray:
    """Per-shot unbiased estimates ``prod_j 3 (+-1)`` (0 when a basis mismatches)."""
    if word.n != ds.n:
        raise DimensionError("word and dataset differ in qubit count")
    supp = word.support()
    if len(supp) > budget:
        raise UnanswerableWordError(
            f"word {word.label} has weight {len(supp)} > locality budget {budget}", [word.label])
    if not supp:
        return np.ones(ds.shots)
    # label index: X=0, Y=1, Z=2
    need = np.array([0 if ((word.x >> j) & 1) and not ((word.z >> j) & 1) else
                     1 if ((word.x >> j) & 1) else 2 for j in supp], dtype=np.uint8)
    match = np.all(ds.bases[:, supp] == need[None, :], axis=1)
    parity = np.sum(ds.outcomes[:, supp], axis=1) & 1
    return np.where(match, (3.0 ** len(supp)) * (1 - 2 * parity.astype(float)), 0.0)


def median_of_means(values: np.ndarray, batches: int = DEFAULT_BATCHES) -> tuple[float, float]:
    """Median of ``batches`` contiguous batch means, with stderr ``std(means)/sqrt(batches)``."""
    if batches < 1 or batches > values.size:
        raise ArgumentError("batches must be in [1, shots]")
    means = np.array([b.mean() for b in np.array_split(values, batches)])
    err = float(np.std(means, ddof=1) / math.sqrt(batches)) if batches > 1 else float("nan")
    return float(np.median(means)), err


def estimate_pauli(ds: ShadowDataset, word, batches: int = DEFAULT_BATCHES,
                   budget: int = LOCALITY_BUDGET) -> tuple[float, float]:
    """Median-of-means shadow estimate of ``<word>`` and its standard error."""
    if isinstance(word, str):
        word = PauliString.from_label(word)
    vals = single_shot_values(ds, word, budget) * word.coefficient.real
    return median_of_means(vals, batches)


def estimate_observable(ds: ShadowDataset, op: PauliSum, batches: int = DEFAULT_BATCHES,
                        budget: int = LOCALITY_BUDGET) -> tuple[float, float]:
    """Estimate ``<op>`` by combining the per-shot word estimates before batching.

    Combining per shot keeps correlations between words inside the error bar.
    """
    too_big = [w.label for w, _ in op if w.weight() > budget]
    if too_big:
        raise UnanswerableWordError(
            f"{len(too_big)} word(s) exceed the locality budget {budget}", too_big)
    vals = np.zeros(ds.shots)
    for w, c in op:
        vals += c.real * single_shot_values(ds, w, budget)
    return median_of_means(vals, batches)


class ShadowSource:
    """Adapter exposing a dataset through ``estimate(op)``."""

    def __init__(self, ds: ShadowDataset, batches: int = DEFAULT_BATCHES,
                 budget: int = LOCALITY_BUDGET):
        self.ds, self.batches, self.budget = ds, batches, budget

    def estimate(self, op: PauliSum) -> tuple[float, float]:
        return estimate_observable(self.ds, op, self.batches, self.budget)

    def __call__(self, ops) -> np.ndarray:
        return np.array([self.estimate(o)[0] for o in ops])


def direct_expectations(state_prep: Circuit | None, observables, *, n: int | None = None,
                        prep_params=None, cap: int = QUBIT_CAP) -> np.ndarray:
    """Exact expectations of each observable in the prepared state."""
    observables = list(observables)
    if state_prep is not None:
        n = state_prep.n
    elif n is None:
        if not observables:
            return np.zeros(0)
        n = observables[0].n
    state = prepare(state_prep, n, prep_params, cap=cap)
    return np.array([expectation(state, o) for o in observables], dtype=float)


def qcnn_shadow_count(eps: float, delta: float, k: int, d: int, n: int,
                      op_norm: float = 1.0) -> int:
    """Copies of the input state sufficient for the QCNN Clifford-shadow guarantee.

    ``ceil(300 ||O||^2 / eps^2 * 2**k * (n**d + n - k + ln(2/delta)))``.
    Only the count is provided; the global Clifford-shadow estimator itself
    is not implemented.
    """
    if not 0 < eps < 1 or not 0 < delta < 1:
        raise ArgumentError("eps and delta must lie in (0, 1)")
    if not 0 <= k <= n or d < 0 or op_norm < 0:
        raise ArgumentError("need 0 <= k <= n, d >= 0, op_norm >= 0")
    val = 300.0 * op_norm ** 2 / eps ** 2 * 2 ** k * (n ** d + n - k + math.log(2.0 / delta))
    return int(math.ceil(val))
