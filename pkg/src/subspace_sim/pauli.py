"""Symplectic Pauli words and sparse Pauli sums.

An n-qubit Pauli word is stored as two n-bit integers ``x`` and ``z`` (bit ``j``
refers to qubit ``j``) together with a phase exponent ``k`` meaning ``i**k``.
The canonical (phase-free) word attached to ``(x, z)`` is

    W(x, z) = prod_j  i**(x_j z_j) X_j**x_j Z_j**z_j

so that ``x_j = z_j = 1`` is exactly ``Y_j``. Every canonical word is
Hermitian, which means a Pauli sum is Hermitian iff its coefficients are real.

Text labels list qubit 0 first: ``"XIZ"`` is X on qubit 0 and Z on qubit 2.

Pauli sums keep their terms in two sorted numpy arrays (packed keys and
complex coefficients). A packed key is ``(x << n) | z`` and must fit in a
signed 64-bit integer, which limits sums to ``MAX_SUM_QUBITS`` qubits.
"""
from __future__ import annotations

from typing import Iterable, Iterator

import numpy as np

from .errors import ArgumentError, DimensionError

MAX_SUM_QUBITS = 31
DEFAULT_PRUNE = 1e-14

_PHASES = np.array([1, 1j, -1, -1j], dtype=complex)
_PHASE_LABEL = {0: "+", 1: "+i", 2: "-", 3: "-i"}
_CHAR_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}

SINGLE_QUBIT = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _popcount(v: int) -> int:
    return bin(v).count("1")


def popcount(a: np.ndarray) -> np.ndarray:
    """Element-wise popcount of an integer array (as int64)."""
    return np.bitwise_count(a).astype(np.int64)


def mul_phase(x1, z1, x2, z2):
    """Phase exponent ``k`` with ``W(x1,z1) W(x2,z2) = i**k W(x1^x2, z1^z2)``.

    Works for Python ints and for int64 arrays alike.
    """
    if isinstance(x1, np.ndarray) or isinstance(x2, np.ndarray):
        pc = popcount
    else:
        pc = _popcount
    x3 = x1 ^ x2
    z3 = z1 ^ z2
    return (pc(x1 & z1) + pc(x2 & z2) + 2 * pc(z1 & x2) - pc(x3 & z3)) % 4


class PauliString:
    """A single n-qubit Pauli word with a phase in {+1, +i, -1, -i}.

    Instances are immutable and hashable; equality compares bits and phase.
    """

    __slots__ = ("n", "x", "z", "phase")

    def __init__(self, n: int, x: int = 0, z: int = 0, phase: int = 0):
        if n < 0:
            raise ArgumentError("qubit count must be non-negative")
        mask = (1 << n) - 1
        if x & ~mask or z & ~mask:
            raise DimensionError(f"bit vectors do not fit in {n} qubits")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "x", int(x))
        object.__setattr__(self, "z", int(z))
        object.__setattr__(self, "phase", int(phase) % 4)

    def __setattr__(self, name, value):
        raise AttributeError("PauliString is immutable")

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        """Parse an optional sign prefix (``+``, ``-``, ``+i``, ``-i``, ``i``) and a word."""
        phase = 0
        body = label.strip()
        for prefix, k in (("+i", 1), ("-i", 3), ("i", 1), ("+", 0), ("-", 2)):
            if body.startswith(prefix) and len(body) > len(prefix) and body[len(prefix)] in "IXYZ":
                phase = k
                body = body[len(prefix):]
                break
        x = z = 0
        for j, ch in enumerate(body):
            try:
                bx, bz = _CHAR_BITS[ch]
            except KeyError:
                raise ArgumentError(f"invalid Pauli character {ch!r} in {label!r}") from None
            x |= bx << j
            z |= bz << j
        return cls(len(body), x, z, phase)

    @classmethod
    def single(cls, n: int, qubit: int, char: str) -> "PauliString":
        """The word acting as ``char`` on ``qubit`` and identity elsewhere."""
        if not 0 <= qubit < n:
            raise DimensionError(f"qubit {qubit} out of range for n={n}")
        bx, bz = _CHAR_BITS[char]
        return cls(n, bx << qubit, bz << qubit)

    @classmethod
    def from_sparse(cls, n: int, ops: dict[int, str]) -> "PauliString":
        """Build a word from ``{qubit: char}``."""
        x = z = 0
        for q, ch in ops.items():
            if not 0 <= q < n:
                raise DimensionError(f"qubit {q} out of range for n={n}")
            bx, bz = _CHAR_BITS[ch]
            x |= bx << q
            z |= bz << q
        return cls(n, x, z)

    @property
    def x_bits(self) -> tuple[int, ...]:
        return tuple((self.x >> j) & 1 for j in range(self.n))

    @property
    def z_bits(self) -> tuple[int, ...]:
        return tuple((self.z >> j) & 1 for j in range(self.n))

    @property
    def label(self) -> str:
        """Phase-free text label, qubit 0 leftmost."""
        out = []
        for j in range(self.n):
            bx, bz = (self.x >> j) & 1, (self.z >> j) & 1
            out.append("IZXY"[bx * 2 + bz])
        return "".join(out)

    @property
    def key(self) -> tuple[int, int]:
        return (self.x, self.z)

    @property
    def coefficient(self) -> complex:
        return complex(_PHASES[self.phase])

    def canonical(self) -> "PauliString":
        return PauliString(self.n, self.x, self.z, 0)

    def weight(self) -> int:
        return _popcount(self.x | self.z)

    def support(self) -> tuple[int, ...]:
        m = self.x | self.z
        return tuple(j for j in range(self.n) if (m >> j) & 1)

    def is_hermitian(self) -> bool:
        return self.phase % 2 == 0

    def commutes(self, other: "PauliString") -> bool:
        _check_n(self.n, other.n)
        return (_popcount(self.x & other.z) + _popcount(self.z & other.x)) % 2 == 0

    def __mul__(self, other):
        if isinstance(other, PauliString):
            _check_n(self.n, other.n)
            k = mul_phase(self.x, self.z, other.x, other.z)
            return PauliString(self.n, self.x ^ other.x, self.z ^ other.z,
                               self.phase + other.phase + k)
        if isinstance(other, PauliSum):
            return PauliSum.from_word(self) @ other
        return NotImplemented

    def __neg__(self):
        return PauliString(self.n, self.x, self.z, self.phase + 2)

    def __eq__(self, other):
        if not isinstance(other, PauliString):
            return NotImplemented
        return (self.n, self.x, self.z, self.phase) == (other.n, other.x, other.z, other.phase)

    def __hash__(self):
        return hash((self.n, self.x, self.z, self.phase))

    def __repr__(self):
        return f"PauliString({_PHASE_LABEL[self.phase]}{self.label})"

    def to_matrix(self) -> np.ndarray:
        """Dense ``2**n x 2**n`` matrix (qubit 0 is the most significant factor)."""
        m = np.array([[1.0 + 0j]])
        for ch in self.label:
            m = np.kron(m, SINGLE_QUBIT[ch])
        return _PHASES[self.phase] * m


def _check_n(a: int, b: int) -> None:
    if a != b:
        raise DimensionError(f"qubit count mismatch: {a} vs {b}")


def multiply(p: PauliString, q: PauliString) -> PauliString:
    """Product ``p q`` as a phased word."""
    return p * q


def weight(p: PauliString) -> int:
    return p.weight()


def commutator(p, q) -> "PauliSum":
    """``[p, q] = pq - qp`` for words or sums."""
    if isinstance(p, PauliString):
        p = PauliSum.from_word(p)
    if isinstance(q, PauliString):
        q = PauliSum.from_word(q)
    return p.commutator(q)


def _aggregate(keys: np.ndarray, coeffs: np.ndarray, prune: float):
    if keys.size == 0:
        return keys.astype(np.int64), coeffs.astype(complex)
    order = np.argsort(keys, kind="stable")
    keys = keys[order]
    coeffs = coeffs[order]
    starts = np.flatnonzero(np.r_[True, keys[1:] != keys[:-1]])
    ukeys = keys[starts]
    ucoeffs = np.add.reduceat(coeffs, starts)
    keep = np.abs(ucoeffs) >= prune if prune > 0 else ucoeffs != 0
    return ukeys[keep], ucoeffs[keep]


class PauliSum:
    """Sparse linear combination of canonical Pauli words.

    Parameters
    ----------
    n : int
        Number of qubits (at most ``MAX_SUM_QUBITS``).
    keys, coeffs : array_like
        Packed word keys ``(x << n) | z`` and matching complex coefficients.
        Duplicate keys are summed and coefficients below ``prune`` in
        magnitude are dropped.
    """

    __slots__ = ("n", "keys", "coeffs", "prune")

    def __init__(self, n: int, keys=(), coeffs=(), prune: float = DEFAULT_PRUNE, _sorted=False):
        if n > MAX_SUM_QUBITS:
            raise DimensionError(f"Pauli sums support at most {MAX_SUM_QUBITS} qubits")
        keys = np.asarray(keys, dtype=np.int64).ravel()
        coeffs = np.asarray(coeffs, dtype=complex).ravel()
        if keys.shape != coeffs.shape:
            raise DimensionError("keys and coefficients differ in length")
        if not _sorted:
            keys, coeffs = _aggregate(keys, coeffs, prune)
        keys.flags.writeable = False
        coeffs.flags.writeable = False
        self.n = n
        self.keys = keys
        self.coeffs = coeffs
        self.prune = prune

    # construction -------------------------------------------------------
    @classmethod
    def zero(cls, n: int) -> "PauliSum":
        return cls(n)

    @classmethod
    def identity(cls, n: int, coeff: complex = 1.0) -> "PauliSum":
        return cls(n, [0], [coeff])

    @classmethod
    def from_word(cls, word: PauliString, coeff: complex = 1.0) -> "PauliSum":
        key = (word.x << word.n) | word.z
        return cls(word.n, [key], [coeff * _PHASES[word.phase]])

    @classmethod
    def from_label(cls, label: str, coeff: complex = 1.0) -> "PauliSum":
        return cls.from_word(PauliString.from_label(label), coeff)

    @classmethod
    def from_terms(cls, terms: Iterable, n: int | None = None) -> "PauliSum":
        """Build from ``(coeff, word)`` pairs where ``word`` is a label or PauliString."""
        keys, coeffs = [], []
        for coeff, word in terms:
            if isinstance(word, str):
                word = PauliString.from_label(word)
            if n is None:
                n = word.n
            _check_n(n, word.n)
            keys.append((word.x << word.n) | word.z)
            coeffs.append(coeff * _PHASES[word.phase])
        if n is None:
            raise ArgumentError("cannot infer qubit count from an empty term list")
        return cls(n, keys, coeffs)

    @classmethod
    def from_dict(cls, terms: dict, n: int | None = None) -> "PauliSum":
        return cls.from_terms(((c, w) for w, c in terms.items()), n=n)

    def _new(self, keys, coeffs, sorted_=False) -> "PauliSum":
        return PauliSum(self.n, keys, coeffs, prune=self.prune, _sorted=sorted_)

    def with_prune(self, prune: float) -> "PauliSum":
        return PauliSum(self.n, self.keys, self.coeffs, prune=prune)

    # accessors ----------------------------------------------------------
    @property
    def x(self) -> np.ndarray:
        return self.keys >> self.n

    @property
    def z(self) -> np.ndarray:
        return self.keys & ((1 << self.n) - 1)

    def __len__(self) -> int:
        return int(self.keys.size)

    def __iter__(self) -> Iterator[tuple[PauliString, complex]]:
        mask = (1 << self.n) - 1
        for k, c in zip(self.keys.tolist(), self.coeffs.tolist()):
            yield PauliString(self.n, k >> self.n, k & mask), c

    def words(self) -> list[PauliString]:
        return [w for w, _ in self]

    def coeff(self, word) -> complex:
        """Coefficient of a (canonical) word, 0 if absent."""
        if isinstance(word, str):
            word = PauliString.from_label(word)
        key = (word.x << self.n) | word.z
        i = np.searchsorted(self.keys, key)
        if i < self.keys.size and self.keys[i] == key:
            return complex(self.coeffs[i]) * complex(np.conj(_PHASES[word.phase]))
        return 0j

    def to_dict(self) -> dict[str, complex]:
        return {w.label: c for w, c in self}

    def weights(self) -> np.ndarray:
        return popcount(self.x | self.z)

    def support(self) -> tuple[int, ...]:
        m = int(np.bitwise_or.reduce(self.x | self.z)) if len(self) else 0
        return tuple(j for j in range(self.n) if (m >> j) & 1)

    def is_zero(self) -> bool:
        return self.keys.size == 0

    def is_hermitian(self, atol: float = 1e-12) -> bool:
        return bool(np.all(np.abs(self.coeffs.imag) <= atol))

    def norm(self) -> float:
        """Normalized Hilbert-Schmidt norm ``sqrt(Tr[A^dag A] / 2**n)``."""
        return float(np.sqrt(np.sum(np.abs(self.coeffs) ** 2)))

    def mass(self) -> float:
        """Sum of squared coefficient magnitudes (squared HS norm)."""
        return float(np.sum(np.abs(self.coeffs) ** 2))

    def real(self) -> "PauliSum":
        return self._new(self.keys, self.coeffs.real.astype(complex))

    def select(self, mask: np.ndarray) -> "PauliSum":
        return self._new(self.keys[mask], self.coeffs[mask], sorted_=True)

    # arithmetic ---------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, PauliString):
            other = PauliSum.from_word(other)
        if not isinstance(other, PauliSum):
            return NotImplemented
        _check_n(self.n, other.n)
        return self._new(np.concatenate([self.keys, other.keys]),
                         np.concatenate([self.coeffs, other.coeffs]))

    __radd__ = __add__

    def __neg__(self):
        return self._new(self.keys, -self.coeffs, sorted_=True)

    def __sub__(self, other):
        if isinstance(other, PauliString):
            other = PauliSum.from_word(other)
        return self + (-other)

    def __mul__(self, scalar):
        if isinstance(scalar, (PauliSum, PauliString)):
            return self @ scalar
        return self._new(self.keys, self.coeffs * complex(scalar))

    def __rmul__(self, scalar):
        return self.__mul__(scalar)

    def __truediv__(self, scalar):
        return self * (1.0 / scalar)

    def __matmul__(self, other):
        if isinstance(other, PauliString):
            other = PauliSum.from_word(other)
        if not isinstance(other, PauliSum):
            return NotImplemented
        _check_n(self.n, other.n)
        keys, coeffs = _product_terms(self, other, only_anticommuting=False)
        return self._new(keys, coeffs)

    def commutator(self, other: "PauliSum") -> "PauliSum":
        """``[self, other]``; only anticommuting word pairs contribute (twice)."""
        _check_n(self.n, other.n)
        keys, coeffs = _product_terms(self, other, only_anticommuting=True)
        return self._new(keys, 2 * coeffs)

    def adjoint(self) -> "PauliSum":
        return self._new(self.keys, np.conj(self.coeffs), sorted_=True)

    def __eq__(self, other):
        if not isinstance(other, PauliSum):
            return NotImplemented
        return (self.n == other.n and np.array_equal(self.keys, other.keys)
                and np.array_equal(self.coeffs, other.coeffs))

    __hash__ = None

    def allclose(self, other: "PauliSum", atol: float = 1e-10) -> bool:
        d = self - other
        return bool(d.keys.size == 0 or np.max(np.abs(d.coeffs)) <= atol)

    def __repr__(self):
        if not len(self):
            return f"PauliSum(n={self.n}, 0)"
        body = " + ".join(f"{_fmt(c)}*{w.label}" for w, c in list(self)[:8])
        more = "" if len(self) <= 8 else f" + ... ({len(self)} terms)"
        return f"PauliSum({body}{more})"

    # dense / text -------------------------------------------------------
    def to_matrix(self) -> np.ndarray:
        dim = 1 << self.n
        out = np.zeros((dim, dim), dtype=complex)
        for w, c in self:
            out += c * w.to_matrix()
        return out

    def to_text(self) -> str:
        """One ``coeff<TAB>word`` line per term; exact round-trip via :meth:`from_text`."""
        lines = []
        for w, c in self:
            lines.append(f"{_fmt(c)}\t{w.label}")
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_text(cls, text: str, n: int | None = None) -> "PauliSum":
        terms = []
        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            try:
                c, word = line.split("\t") if "\t" in line else line.split()
            except ValueError:
                raise ArgumentError(f"malformed Pauli sum line: {raw!r}") from None
            terms.append((complex(c.replace(" ", "")), word))
        if not terms:
            if n is None:
                raise ArgumentError("empty Pauli sum text needs an explicit qubit count")
            return cls(n)
        return cls.from_terms(terms, n=n)


def _fmt(c: complex) -> str:
    c = complex(c)
    if c.imag == 0:
        return repr(c.real)
    return repr(c)


def _product_terms(a: PauliSum, b: PauliSum, only_anticommuting: bool):
    n = a.n
    if len(a) == 0 or len(b) == 0:
        return np.zeros(0, np.int64), np.zeros(0, complex)
    mask = (1 << n) - 1
    ax, az = a.keys >> n, a.keys & mask
    bx, bz = b.keys >> n, b.keys & mask
    out_k, out_c = [], []
    # chunk over the larger operand to bound memory
    chunk = max(1, 4_000_000 // max(len(b), 1))
    for s in range(0, len(a), chunk):
        x1 = ax[s:s + chunk, None]
        z1 = az[s:s + chunk, None]
        c1 = a.coeffs[s:s + chunk, None]
        if only_anticommuting:
            anti = (popcount(x1 & bz[None, :]) + popcount(z1 & bx[None, :])) & 1
            i, j = np.nonzero(anti)
            x1s, z1s, c1s = x1[i, 0], z1[i, 0], c1[i, 0]
            x2s, z2s, c2s = bx[j], bz[j], b.coeffs[j]
        else:
            x1s = np.broadcast_to(x1, (x1.shape[0], len(b))).ravel()
            z1s = np.broadcast_to(z1, (z1.shape[0], len(b))).ravel()
            c1s = np.broadcast_to(c1, (c1.shape[0], len(b))).ravel()
            reps = x1.shape[0]
            x2s, z2s, c2s = np.tile(bx, reps), np.tile(bz, reps), np.tile(b.coeffs, reps)
        k = mul_phase(x1s, z1s, x2s, z2s)
        out_k.append(((x1s ^ x2s) << n) | (z1s ^ z2s))
        out_c.append(c1s * c2s * _PHASES[k])
    return np.concatenate(out_k), np.concatenate(out_c)


def hs_inner(a, b) -> complex:
    """Normalized Hilbert-Schmidt inner product ``Tr[a^dag b] / 2**n``."""
    if isinstance(a, PauliString):
        a = PauliSum.from_word(a)
    if isinstance(b, PauliString):
        b = PauliSum.from_word(b)
    _check_n(a.n, b.n)
    _, ia, ib = np.intersect1d(a.keys, b.keys, assume_unique=True, return_indices=True)
    return complex(np.sum(np.conj(a.coeffs[ia]) * b.coeffs[ib]))


def total_z(n: int) -> PauliSum:
    """``sum_j Z_j``."""
    return PauliSum(n, [1 << j for j in range(n)], np.ones(n))


def pauli_key(word: PauliString) -> int:
    return (word.x << word.n) | word.z


def remap(op: PauliSum, qubits) -> PauliSum:
    """Restrict ``op`` to the ordered qubit list ``qubits`` (new qubit i = old ``qubits[i]``).

    Every term must be supported inside ``qubits``.
    """
    qubits = list(qubits)
    m = len(qubits)
    inside = 0
    for q in qubits:
        inside |= 1 << q
    x, z = op.x, op.z
    if np.any((x | z) & ~inside):
        raise DimensionError("operator support escapes the requested qubit set")
    nx = np.zeros_like(x)
    nz = np.zeros_like(z)
    for i, q in enumerate(qubits):
        nx |= ((x >> q) & 1) << i
        nz |= ((z >> q) & 1) << i
    return PauliSum(m, (nx << m) | nz, op.coeffs)


def embed(op: PauliSum, qubits, n: int) -> PauliSum:
    """Inverse of :func:`remap`: place an ``len(qubits)``-qubit operator onto ``qubits`` of ``n``."""
    qubits = list(qubits)
    x, z = op.x, op.z
    nx = np.zeros_like(x)
    nz = np.zeros_like(z)
    for i, q in enumerate(qubits):
        nx |= ((x >> i) & 1) << q
        nz |= ((z >> i) & 1) << q
    return PauliSum(n, (nx << n) | nz, op.coeffs)
