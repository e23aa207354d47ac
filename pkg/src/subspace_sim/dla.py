"""Dynamical Lie algebra closure, structure constants and adjoint matrices.

Algebra elements are stored as Hermitian Pauli sums (real coefficients), i.e.
we work with the Hermitian form ``i g``. The commutator that closes the real
span of Hermitian operators is ``i [A, B]``. Structure constants follow

    [B_a, B_b] = i sum_c f_abc B_c,      f_abc = -i <B_c, [B_a, B_b]>

with the normalized inner product ``<A, B> = Tr[A^dag B] / 2**n``.
"""
from __future__ import annotations

import json
from functools import cached_property

import numpy as np

from .errors import ConsistencyError, DimensionError, ResourceError
from .pauli import PauliSum

DIM_CAP = 4096
RANK_TOL = 1e-10
CLOSURE_TOL = 1e-8


class _WordSpace:
    """Growing index of Pauli words with dense real coordinate rows."""

    def __init__(self):
        self.index: dict[int, int] = {}
        self.rows = np.zeros((0, 0))

    def coords(self, op: PauliSum, grow=True) -> np.ndarray:
        keys = op.keys.tolist()
        new = [k for k in keys if k not in self.index]
        if new and grow:
            for k in new:
                self.index[k] = len(self.index)
            self.rows = np.pad(self.rows, ((0, 0), (0, len(self.index) - self.rows.shape[1])))
        v = np.zeros(len(self.index))
        for k, c in zip(keys, op.coeffs.real.tolist()):
            j = self.index.get(k)
            if j is not None:
                v[j] = c
        return v

    def add_row(self, v):
        self.rows = np.vstack([self.rows, v[None, :]]) if self.rows.size else v[None, :].copy()


class LieBasis:
    """Orthonormal Hermitian basis of a Lie algebra.

    Attributes
    ----------
    n : int
        Qubit count.
    basis : list of PauliSum
        Orthonormal (normalized HS inner product) Hermitian elements.
    """

    def __init__(self, n: int, basis: list[PauliSum]):
        self.n = n
        self.basis = list(basis)
        keys = np.unique(np.concatenate([b.keys for b in self.basis])) if self.basis else np.zeros(0, np.int64)
        self._keys = keys
        mat = np.zeros((len(self.basis), keys.size))
        for a, b in enumerate(self.basis):
            mat[a, np.searchsorted(keys, b.keys)] = b.coeffs.real
        self._mat = mat

    @property
    def dim(self) -> int:
        return len(self.basis)

    def __len__(self):
        return self.dim

    @cached_property
    def f(self) -> np.ndarray:
        return structure_constants(self)

    def coords(self, op: PauliSum) -> tuple[np.ndarray, np.ndarray, float]:
        """Coefficients on the word index, plus the part outside it."""
        if op.n != self.n:
            raise DimensionError("operator and basis differ in qubit count")
        idx = np.searchsorted(self._keys, op.keys)
        idx = np.minimum(idx, max(self._keys.size - 1, 0))
        inside = (self._keys.size > 0) & (self._keys[idx] == op.keys) if self._keys.size else np.zeros(len(op), bool)
        v = np.zeros(self._keys.size, dtype=complex)
        v[idx[inside]] = op.coeffs[inside]
        outside = float(np.sum(np.abs(op.coeffs[~inside]) ** 2))
        return v, op.coeffs[~inside], outside

    def project(self, op: PauliSum) -> tuple[np.ndarray, float]:
        v, _, outside = self.coords(op)
        coeffs = self._mat @ v
        resid_in = v - self._mat.T @ coeffs
        resid = float(np.sqrt(np.sum(np.abs(resid_in) ** 2) + outside))
        return coeffs, resid

    def element(self, coeffs) -> PauliSum:
        return PauliSum(self.n, self._keys, np.asarray(coeffs) @ self._mat)

    def to_dict(self) -> dict:
        f = self.f
        a, b, c = np.nonzero(np.abs(f) > 1e-12)
        return {
            "schema_version": 1,
            "n": self.n,
            "dim": self.dim,
            "basis": [el.to_text() for el in self.basis],
            "f": [{"a": int(i), "b": int(j), "c": int(k), "value": float(f[i, j, k])}
                  for i, j, k in zip(a, b, c)],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "LieBasis":
        n = int(d["n"])
        out = cls(n, [PauliSum.from_text(t, n=n) for t in d["basis"]])
        if "f" in d:
            f = np.zeros((out.dim,) * 3)
            for e in d["f"]:
                f[e["a"], e["b"], e["c"]] = e["value"]
            out.__dict__["f"] = f
        return out


def i_commutator(a: PauliSum, b: PauliSum) -> PauliSum:
    """``i [a, b]``; Hermitian whenever ``a`` and ``b`` are."""
    return (a.commutator(b) * 1j).real()


def lie_closure(generators, dim_cap: int = DIM_CAP, tol: float = RANK_TOL) -> LieBasis:
    """Orthonormal basis of the real Lie algebra generated by Hermitian ``generators``.

    New elements ``i[g, B_a]`` are formed between generators and basis
    elements, orthogonalized by two passes of Gram-Schmidt and kept when the
    residual exceeds ``tol`` (relative to the candidate norm, floored at 1).

    Raises
    ------
    ResourceError
        If the dimension exceeds ``dim_cap``; ``.partial`` holds the dimension
        reached.
    """
    gens = [g.real() for g in generators]
    if not gens:
        raise DimensionError("need at least one generator")
    n = gens[0].n
    for g in gens:
        if g.n != n:
            raise DimensionError("generators act on different qubit counts")
        if not g.is_hermitian():
            raise ConsistencyError("generators must be Hermitian")
    space = _WordSpace()
    basis: list[PauliSum] = []

    def try_add(cand: PauliSum) -> bool:
        if cand.is_zero():
            return False
        scale = max(1.0, cand.norm())
        v = space.coords(cand)
        if basis:
            for _ in range(2):
                v = v - space.rows.T @ (space.rows @ v)
        nv = np.linalg.norm(v)
        if nv <= tol * scale:
            return False
        v = v / nv
        space.add_row(v)
        keys = np.fromiter(space.index.keys(), dtype=np.int64, count=len(space.index))
        nz = np.abs(v) > 1e-15
        basis.append(PauliSum(n, keys[nz], v[nz], prune=0.0))
        if len(basis) > dim_cap:
            raise ResourceError(f"Lie closure exceeded dim_cap={dim_cap}", partial=len(basis))
        return True

    for g in gens:
        try_add(g)
    queue = list(range(len(basis)))
    while queue:
        a = queue.pop(0)
        for g in gens:
            if try_add(i_commutator(g, basis[a])):
                queue.append(len(basis) - 1)
    return LieBasis(n, basis)


def structure_constants(basis: LieBasis, tol: float = CLOSURE_TOL) -> np.ndarray:
    """``f[a, b, c]`` with ``[B_a, B_b] = i sum_c f_abc B_c``.

    Raises
    ------
    ConsistencyError
        If some commutator leaves the span by more than ``tol``.
    """
    d = basis.dim
    f = np.zeros((d, d, d))
    for a in range(d):
        for b in range(a + 1, d):
            # -i [A, B] = -(i [A, B])
            comm = -i_commutator(basis.basis[a], basis.basis[b])
            if comm.is_zero():
                continue
            coeffs, resid = basis.project(comm)
            if resid > tol:
                raise ConsistencyError(f"basis not closed: residual {resid:.2e} at ({a}, {b})")
            f[a, b] = coeffs.real
            f[b, a] = -coeffs.real
    return f


def adjoint_generator(H: PauliSum, basis: LieBasis, tol: float = CLOSURE_TOL) -> np.ndarray:
    """Matrix ``M[c, b] = <B_c, i [H, B_b]>``; ``exp(t M)`` is the coefficient map of ``O -> e^{itH} O e^{-itH}``.

    Raises
    ------
    ConsistencyError
        If ``H`` is not in the span of the basis.
    """
    _, resid = basis.project(H)
    if resid > tol:
        raise ConsistencyError(f"generator lies outside the algebra (residual {resid:.2e})")
    d = basis.dim
    M = np.zeros((d, d))
    for b in range(d):
        comm = i_commutator(H, basis.basis[b])
        if comm.is_zero():
            continue
        coeffs, _ = basis.project(comm)
        M[:, b] = coeffs.real
    return M


def project_onto_algebra(A: PauliSum, basis: LieBasis) -> tuple[np.ndarray, float]:
    """Coefficients ``v_a = <B_a, A>`` and the norm of ``A - sum_a v_a B_a``."""
    coeffs, resid = basis.project(A)
    return (coeffs.real if np.allclose(coeffs.imag, 0) else coeffs), resid
