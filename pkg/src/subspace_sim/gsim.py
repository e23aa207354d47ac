"""g-sim: loss evaluation in the adjoint representation of the circuit's Lie algebra.

The observable is evolved in the Heisenberg picture as a coefficient vector
over an orthonormal algebra basis; the state enters only through the vector
of basis expectations ``e_a = Tr[rho B_a]``, acquired once.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .circuits import Circuit
from .dla import LieBasis, adjoint_generator, lie_closure, project_onto_algebra
from .errors import ConsistencyError, DimensionError, InadmissibleError
from .pauli import PauliSum
from .statevector import DenseState, _check_params, expectation, prepare

SPAN_TOL = 1e-8
ANTISYM_TOL = 1e-10


class _AdjointAction:
    """``exp(t M)`` for a fixed real antisymmetric ``M``, via one cached eigendecomposition."""

    def __init__(self, M: np.ndarray):
        # -iM is Hermitian, so M = V diag(i w) V^dag
        w, V = scipy.linalg.eigh(-1j * M)
        self.w, self.V = w, V
        self.Vh = V.conj().T

    def __call__(self, t: float) -> np.ndarray:
        return ((self.V * np.exp(1j * t * self.w)) @ self.Vh).real

    def apply(self, t: float, v: np.ndarray) -> np.ndarray:
        return (self.V @ (np.exp(1j * t * self.w) * (self.Vh @ v))).real


def adjoint_gate_action(matrix: np.ndarray, angle: float) -> np.ndarray:
    """Orthogonal ``exp(angle * matrix)`` for an antisymmetric adjoint matrix.

    Raises
    ------
    ConsistencyError
        If ``matrix`` is not antisymmetric.
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DimensionError("adjoint matrix must be square")
    if not np.allclose(matrix, -matrix.T, atol=ANTISYM_TOL):
        raise ConsistencyError("adjoint matrix is not antisymmetric")
    return scipy.linalg.expm(angle * matrix)


@dataclass(eq=False)
class GsimInstance:
    """Prepared g-sim problem: algebra, observable and state coefficients, gate adjoints.

    Attributes
    ----------
    gate_adjoints : list
        One entry per circuit gate: ``(matrix, action)`` where ``matrix`` is
        the adjoint generator of the gate's Hermitian generator ``G`` and
        ``action(t)`` returns ``exp(t * matrix)``.
    state_residual : float
        Relative norm of the part of the state outside the algebra span
        (reported, not used). ``nan`` when the state is only known through
        expectations.
    """

    circuit: Circuit
    basis: LieBasis
    obs_coeffs: np.ndarray
    state_coeffs: np.ndarray
    gate_adjoints: list = field(repr=False)
    state_residual: float = float("nan")

    @property
    def dim(self) -> int:
        return self.basis.dim


def _state_coeffs(basis: LieBasis, source, n: int) -> tuple[np.ndarray, float]:
    if source is None or isinstance(source, Circuit):
        source = prepare(source, n)
    if isinstance(source, DenseState):
        if source.n != n:
            raise DimensionError("state and circuit differ in qubit count")
        e = np.array([expectation(source, b) for b in basis.basis])
        # pure state: ||rho||^2 = 2**-n, in-span part sum(e**2) 4**-n
        return e, float(np.sqrt(max(0.0, 1.0 - np.sum(e ** 2) / 2.0 ** n)))
    if hasattr(source, "estimate"):
        return np.array([source.estimate(b)[0] for b in basis.basis]), float("nan")
    if callable(source):
        return np.asarray(source(basis.basis), dtype=float), float("nan")
    e = np.asarray(source, dtype=float)
    if e.shape != (basis.dim,):
        raise DimensionError(f"expected {basis.dim} state coefficients")
    return e, float("nan")


def prepare_instance(circuit: Circuit, obs: PauliSum, state_source=None,
                     basis: LieBasis | None = None) -> GsimInstance:
    """Build the adjoint data for ``circuit`` and ``obs``.

    Parameters
    ----------
    state_source
        ``None`` (``|0...0>``), a preparation :class:`Circuit`, a
        :class:`DenseState`, an object with ``estimate(op)`` (e.g. a shadow
        source), a callable mapping a list of operators to expectations, or
        the expectation vector itself.
    basis
        Algebra basis; computed by :func:`lie_closure` of the circuit's
        generators when omitted.

    Raises
    ------
    InadmissibleError
        If a gate generator or ``obs`` lies outside the algebra span.
    """
    if obs.n != circuit.n:
        raise DimensionError("observable and circuit differ in qubit count")
    if any(g.kind != "rotation" for g in circuit.gates):
        idx = next(i for i, g in enumerate(circuit.gates) if g.kind != "rotation")
        raise InadmissibleError("g-sim needs parameterized Pauli rotations only", gate_index=idx)
    if basis is None:
        basis = lie_closure(circuit.generators())
    cache: dict[bytes, tuple] = {}
    adjoints = []
    for i, g in enumerate(circuit.gates):
        key = g.generator.keys.tobytes() + g.generator.coeffs.tobytes()
        if key not in cache:
            _, resid = project_onto_algebra(g.generator, basis)
            if resid > SPAN_TOL:
                raise InadmissibleError(f"gate {i} generator lies outside the algebra", gate_index=i)
            M = adjoint_generator(g.generator, basis)
            cache[key] = (M, _AdjointAction(M))
        adjoints.append(cache[key])
    o, resid = project_onto_algebra(obs, basis)
    if resid > SPAN_TOL:
        raise InadmissibleError(f"observable lies outside the algebra (residual {resid:.2e})")
    e, sres = _state_coeffs(basis, state_source, circuit.n)
    return GsimInstance(circuit, basis, np.asarray(o, dtype=float), e, adjoints, sres)


def evolve_observable(inst: GsimInstance, params) -> np.ndarray:
    """Heisenberg-evolved observable coefficients ``U^dag O U``."""
    params = _check_params(inst.circuit, params)
    v = inst.obs_coeffs.copy()
    for g, (_, action) in zip(reversed(inst.circuit.gates), reversed(inst.gate_adjoints)):
        # U = exp(-i a G): U^dag O U = exp(a ad_{iG}) -> coefficient map exp(a M)
        v = action.apply(g.angle_for(params), v)
    return v


def gsim_loss(inst: GsimInstance, params) -> float:
    """Loss ``<rho, U^dag O U>`` from the adjoint representation."""
    v = evolve_observable(inst, params)
    n0 = np.linalg.norm(inst.obs_coeffs)
    if abs(np.linalg.norm(v) - n0) > 1e-9 * max(1.0, n0):
        raise ConsistencyError("adjoint evolution failed to preserve the coefficient norm")
    val = float(inst.state_coeffs @ v)
    bound = np.linalg.norm(inst.state_coeffs) * n0
    if abs(val) > bound * (1 + 1e-9) + 1e-12:
        raise ConsistencyError("loss exceeds the Cauchy-Schwarz bound")
    return val
