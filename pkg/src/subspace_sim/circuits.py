"""Gates, circuits, parameter distributions and ansatz builders.

Every parameterized gate is ``exp(-i * theta * G)`` with ``G`` a Hermitian Pauli
sum whose words mutually commute, so the gate factorizes exactly into
single-word rotations ``exp(-i * theta * c_j * P_j)``. There is no factor 1/2
in the exponent. Fixed Clifford gates (H, S, CX, ...) are carried by name.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ArgumentError, DimensionError
from .pauli import PauliString, PauliSum, popcount, total_z

SCHEMA_VERSION = 1

CLIFFORD_ARITY = {"H": 1, "S": 1, "SDG": 1, "X": 1, "Y": 1, "Z": 1,
                  "CX": 2, "CZ": 2, "SWAP": 2}


@dataclass(frozen=True)
class Gate:
    """One circuit element.

    ``kind`` is ``"rotation"`` (``generator`` set, exactly one of
    ``param_slot`` / ``angle`` set) or ``"clifford"`` (``name`` set, no
    parameter). ``qubits`` lists the qubits the gate touches; for rotations
    it is the support of the generator.
    """

    kind: str
    qubits: tuple[int, ...]
    generator: PauliSum | None = None
    name: str | None = None
    param_slot: int | None = None
    angle: float | None = None
    layer: int = 0

    def __post_init__(self):
        if self.kind == "rotation":
            if self.generator is None:
                raise ArgumentError("rotation gate needs a generator")
            if (self.param_slot is None) == (self.angle is None):
                raise ArgumentError("rotation gate needs exactly one of param_slot / angle")
            if not self.generator.is_hermitian():
                raise ArgumentError("rotation generator must be Hermitian")
            if not _words_commute(self.generator):
                raise ArgumentError("rotation generator words must mutually commute")
        elif self.kind == "clifford":
            if self.name not in CLIFFORD_ARITY:
                raise ArgumentError(f"unknown Clifford gate {self.name!r}")
            if self.param_slot is not None or self.angle is not None:
                raise ArgumentError("Clifford gates take no parameter")
            if len(self.qubits) != CLIFFORD_ARITY[self.name]:
                raise ArgumentError(f"{self.name} acts on {CLIFFORD_ARITY[self.name]} qubit(s)")
            if len(set(self.qubits)) != len(self.qubits):
                raise ArgumentError("repeated target qubit")
        else:
            raise ArgumentError(f"unknown gate kind {self.kind!r}")

    @classmethod
    def rotation(cls, generator, param_slot=None, angle=None, layer=0) -> "Gate":
        if isinstance(generator, (str, PauliString)):
            generator = (PauliSum.from_label(generator) if isinstance(generator, str)
                         else PauliSum.from_word(generator))
        generator = generator.real()
        return cls("rotation", generator.support(), generator=generator,
                   param_slot=param_slot, angle=None if angle is None else float(angle),
                   layer=layer)

    @classmethod
    def clifford(cls, name: str, qubits: Sequence[int], layer=0) -> "Gate":
        return cls("clifford", tuple(int(q) for q in qubits), name=name.upper(), layer=layer)

    @property
    def is_parameterized(self) -> bool:
        return self.param_slot is not None

    def terms(self) -> list[tuple[PauliString, float]]:
        """Generator words with their real coefficients."""
        return [(w, c.real) for w, c in self.generator]

    def angle_for(self, params) -> float:
        return float(params[self.param_slot]) if self.param_slot is not None else self.angle


def _words_commute(op: PauliSum) -> bool:
    if len(op) < 2:
        return True
    x, z = op.x, op.z
    anti = (popcount(x[:, None] & z[None, :]) + popcount(z[:, None] & x[None, :])) & 1
    return not anti.any()


@dataclass(frozen=True)
class Circuit:
    """Ordered gate list on ``n`` qubits with ``n_params`` parameter slots."""

    n: int
    gates: tuple[Gate, ...] = ()
    n_params: int = 0

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        last = -math.inf
        for i, g in enumerate(self.gates):
            if any(not 0 <= q < self.n for q in g.qubits):
                raise DimensionError(f"gate {i} targets a qubit outside 0..{self.n - 1}")
            if g.generator is not None and g.generator.n != self.n:
                raise DimensionError(f"gate {i} generator has {g.generator.n} qubits, circuit {self.n}")
            if g.param_slot is not None and not 0 <= g.param_slot < self.n_params:
                raise DimensionError(f"gate {i} param_slot {g.param_slot} >= n_params {self.n_params}")
            if g.layer < last:
                raise ArgumentError("layer tags must be non-decreasing")
            last = g.layer

    @property
    def layer_tags(self) -> tuple[int, ...]:
        return tuple(g.layer for g in self.gates)

    @property
    def n_layers(self) -> int:
        return len(set(self.layer_tags))

    def __len__(self):
        return len(self.gates)

    def generators(self) -> list[PauliSum]:
        """Distinct rotation generators in order of first appearance."""
        seen, out = [], []
        for g in self.gates:
            if g.kind != "rotation":
                continue
            if not any(g.generator == s for s in seen):
                seen.append(g.generator)
                out.append(g.generator)
        return out

    def slot_gates(self, slot: int) -> list[int]:
        return [i for i, g in enumerate(self.gates) if g.param_slot == slot]

    def append(self, other: "Circuit", shift_params=True) -> "Circuit":
        """Concatenate ``other`` after this circuit (its slots shifted past ours)."""
        if other.n != self.n:
            raise DimensionError("circuits act on different qubit counts")
        off = self.n_params if shift_params else 0
        base = max(self.layer_tags, default=-1) + 1
        gates = list(self.gates)
        for g in other.gates:
            gates.append(Gate(g.kind, g.qubits, g.generator, g.name,
                              None if g.param_slot is None else g.param_slot + off,
                              g.angle, g.layer + base))
        n_params = self.n_params + other.n_params if shift_params else max(self.n_params, other.n_params)
        return Circuit(self.n, gates, n_params)

    def bind(self, params) -> "Circuit":
        """Replace every parameter slot by its value as a constant angle."""
        params = np.asarray(params, dtype=float)
        gates = [g if g.param_slot is None else
                 Gate(g.kind, g.qubits, g.generator, g.name, None,
                      float(params[g.param_slot]) * 1.0, g.layer)
                 for g in self.gates]
        return Circuit(self.n, gates, 0)

    # serialization ------------------------------------------------------
    def to_dict(self) -> dict:
        gates = []
        for g in self.gates:
            d = {"kind": g.kind, "qubits": list(g.qubits), "layer": g.layer}
            if g.kind == "rotation":
                d["generator"] = [[c.real, w.label] for w, c in g.generator]
                if g.param_slot is not None:
                    d["param_slot"] = g.param_slot
                else:
                    d["angle"] = g.angle
            else:
                d["name"] = g.name
            gates.append(d)
        return {"schema_version": SCHEMA_VERSION, "n": self.n,
                "n_params": self.n_params, "gates": gates}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_dict(cls, d: dict) -> "Circuit":
        if d.get("schema_version", SCHEMA_VERSION) != SCHEMA_VERSION:
            raise ArgumentError(f"unsupported circuit schema_version {d.get('schema_version')}")
        try:
            n = int(d["n"])
            gates = []
            for i, gd in enumerate(d["gates"]):
                layer = int(gd.get("layer", 0))
                if gd["kind"] == "rotation":
                    gen = PauliSum.from_terms([(float(c), w) for c, w in gd["generator"]], n=n)
                    g = Gate.rotation(gen, param_slot=gd.get("param_slot"),
                                      angle=gd.get("angle"), layer=layer)
                    if "qubits" in gd and tuple(gd["qubits"]) != g.qubits:
                        raise ArgumentError(f"gates[{i}].qubits disagrees with generator support")
                elif gd["kind"] == "clifford":
                    g = Gate.clifford(gd["name"], gd["qubits"], layer=layer)
                else:
                    raise ArgumentError(f"gates[{i}].kind: unknown value {gd['kind']!r}")
                gates.append(g)
            return cls(n, gates, int(d.get("n_params", 0)))
        except KeyError as e:
            raise ArgumentError(f"missing circuit field {e}") from None

    @classmethod
    def from_json(cls, text: str) -> "Circuit":
        return cls.from_dict(json.loads(text))


# -------------------------------------------------------------------------
# parameter distributions

@dataclass(frozen=True)
class ParamDistribution:
    """Sampling law for circuit parameters.

    ``kind`` is ``"uniform"`` (params ``lo, hi``), ``"discrete"``
    (params ``values``) or ``"gaussian"`` (params ``mean, std``).
    ``overrides`` maps slot indices to other distributions.
    """

    kind: str
    params: dict = field(default_factory=dict)
    overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind == "uniform":
            if not self.params.get("lo", 0.0) <= self.params.get("hi", 2 * math.pi):
                raise ArgumentError("uniform distribution needs lo <= hi")
        elif self.kind == "discrete":
            vals = self.params.get("values", ())
            if len(vals) == 0:
                raise ArgumentError("discrete distribution needs a non-empty value set")
            if not all(math.isfinite(v) for v in vals):
                raise ArgumentError("discrete values must be finite")
        elif self.kind == "gaussian":
            if self.params.get("std", 1.0) < 0:
                raise ArgumentError("gaussian std must be non-negative")
        else:
            raise ArgumentError(f"unknown distribution kind {self.kind!r}")

    @classmethod
    def uniform(cls, lo=0.0, hi=2 * math.pi) -> "ParamDistribution":
        return cls("uniform", {"lo": float(lo), "hi": float(hi)})

    @classmethod
    def discrete(cls, values) -> "ParamDistribution":
        return cls("discrete", {"values": [float(v) for v in values]})

    @classmethod
    def gaussian(cls, mean=0.0, std=None, *, L=None, c=0.25) -> "ParamDistribution":
        """Gaussian; if ``std`` is omitted it is ``sqrt(c / L)``."""
        if std is None:
            if L is None:
                raise ArgumentError("gaussian needs std or L")
            std = math.sqrt(c / L)
        return cls("gaussian", {"mean": float(mean), "std": float(std)})

    @classmethod
    def small_angle(cls, n: int, M: int, L: int, const: float = math.pi) -> "ParamDistribution":
        """Uniform on ``[-const/(n M L), +const/(n M L)]``."""
        w = const / (n * M * L)
        return cls.uniform(-w, w)

    def _draw(self, rng: np.random.Generator) -> float:
        p = self.params
        if self.kind == "uniform":
            return float(rng.uniform(p.get("lo", 0.0), p.get("hi", 2 * math.pi)))
        if self.kind == "discrete":
            vals = p["values"]
            return float(vals[int(rng.integers(len(vals)))])
        return float(rng.normal(p.get("mean", 0.0), p.get("std", 1.0)))

    def sample_slot(self, seed: int, slot: int) -> float:
        dist = self.overrides.get(slot, self)
        return dist._draw(np.random.default_rng([int(seed), int(slot)]))

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "params": dict(self.params)}
        if self.overrides:
            d["overrides"] = {str(k): v.to_dict() for k, v in sorted(self.overrides.items())}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ParamDistribution":
        over = {int(k): cls.from_dict(v) for k, v in d.get("overrides", {}).items()}
        return cls(d["kind"], dict(d.get("params", {})), over)


def sample_params(dist: ParamDistribution, n_params: int, seed: int) -> np.ndarray:
    """Parameter vector; entry ``i`` depends only on ``(seed, i)``."""
    return np.array([dist.sample_slot(seed, i) for i in range(n_params)], dtype=float)


# -------------------------------------------------------------------------
# builders

def _word(n, ops) -> PauliSum:
    return PauliSum.from_word(PauliString.from_sparse(n, ops))


def hea_block(n: int, a: int, b: int, slot: int, layer: int) -> list[Gate]:
    """RY(a) RY(b), RZZ(a,b), RY(a) RY(b): five parameterized rotations."""
    return [
        Gate.rotation(_word(n, {a: "Y"}), param_slot=slot, layer=layer),
        Gate.rotation(_word(n, {b: "Y"}), param_slot=slot + 1, layer=layer),
        Gate.rotation(_word(n, {a: "Z", b: "Z"}), param_slot=slot + 2, layer=layer),
        Gate.rotation(_word(n, {a: "Y"}), param_slot=slot + 3, layer=layer),
        Gate.rotation(_word(n, {b: "Y"}), param_slot=slot + 4, layer=layer),
    ]


ROTATIONS_PER_BLOCK = 5


def brickwork_pairs(n: int, layer: int) -> list[tuple[int, int]]:
    start = layer % 2
    return [(a, a + 1) for a in range(start, n - 1, 2)]


def build_shallow_hea(n: int, L: int, seed_structure: int | None = None) -> Circuit:
    """One-dimensional brickwork hardware-efficient ansatz with ``L`` layers.

    Even layers couple (0,1), (2,3), ...; odd layers couple (1,2), (3,4), ...
    ``seed_structure`` is accepted for interface stability; the structure
    is deterministic.
    """
    if n < 2:
        raise ArgumentError("shallow HEA needs n >= 2")
    if L < 0:
        raise ArgumentError("L must be non-negative")
    gates, slot = [], 0
    for layer in range(L):
        for a, b in brickwork_pairs(n, layer):
            gates += hea_block(n, a, b, slot, layer)
            slot += ROTATIONS_PER_BLOCK
    return Circuit(n, gates, slot)


def build_matchgate(n: int, L: int) -> Circuit:
    """``L`` repetitions of (Z_j rotations on all j) then (X_j X_{j+1} rotations)."""
    if n < 2:
        raise ArgumentError("matchgate circuit needs n >= 2")
    gates, slot = [], 0
    for rep in range(L):
        for j in range(n):
            gates.append(Gate.rotation(_word(n, {j: "Z"}), param_slot=slot, layer=2 * rep))
            slot += 1
        for j in range(n - 1):
            gates.append(Gate.rotation(_word(n, {j: "X", j + 1: "X"}), param_slot=slot,
                                       layer=2 * rep + 1))
            slot += 1
    return Circuit(n, gates, slot)


def givens_generator(n: int, i: int, j: int) -> PauliSum:
    """``(X_i X_j + Y_i Y_j) / 2``."""
    return 0.5 * (_word(n, {i: "X", j: "X"}) + _word(n, {i: "Y", j: "Y"}))


def build_u1_equivariant(n: int, L: int) -> Circuit:
    """Layers of Z rotations followed by nearest-neighbour Givens rotations."""
    if n < 2:
        raise ArgumentError("U(1) circuit needs n >= 2")
    gates, slot = [], 0
    for rep in range(L):
        for j in range(n):
            gates.append(Gate.rotation(_word(n, {j: "Z"}), param_slot=slot, layer=2 * rep))
            slot += 1
        for j in range(n - 1):
            gates.append(Gate.rotation(givens_generator(n, j, j + 1), param_slot=slot,
                                       layer=2 * rep + 1))
            slot += 1
    return Circuit(n, gates, slot)


def sn_generators(n: int) -> list[PauliSum]:
    """Permutation-symmetric one- and two-body generators: sum X, sum Y, sum_{i<j} Z_i Z_j."""
    sx = PauliSum(n, [1 << (n + j) for j in range(n)], np.ones(n))
    sy = PauliSum(n, [(1 << (n + j)) | (1 << j) for j in range(n)], np.ones(n))
    zz = PauliSum(n, [(1 << i) | (1 << j) for i in range(n) for j in range(i + 1, n)],
                  np.ones(n * (n - 1) // 2))
    return [sx, sy, zz]


def build_sn_equivariant(n: int, L: int) -> Circuit:
    """``L`` layers of exp(-i a sum X) exp(-i b sum Y) exp(-i c sum Z_iZ_j)."""
    if n < 2:
        raise ArgumentError("S_n circuit needs n >= 2")
    gens = sn_generators(n)
    gates, slot = [], 0
    for rep in range(L):
        for g in gens:
            gates.append(Gate.rotation(g, param_slot=slot, layer=rep))
            slot += 1
    return Circuit(n, gates, slot)


def tfim_terms(n: int, periodic: bool = False) -> list[PauliSum]:
    """Transverse-field Ising terms ``[sum Z_j Z_{j+1}, sum X_j]``."""
    pairs = [(j, j + 1) for j in range(n - 1)]
    if periodic and n > 2:
        pairs.append((n - 1, 0))
    zz = sum((_word(n, {a: "Z", b: "Z"}) for a, b in pairs), PauliSum(n))
    xs = sum((_word(n, {j: "X"}) for j in range(n)), PauliSum(n))
    return [zz, xs]


def build_hva(hamiltonian_terms: Sequence[PauliSum], L: int) -> Circuit:
    """Hamiltonian variational ansatz ``prod_l prod_i exp(-i theta_{l,i} H_i)``.

    Each term must be Hermitian and made of mutually commuting words.
    """
    if not hamiltonian_terms:
        raise ArgumentError("HVA needs at least one term")
    n = hamiltonian_terms[0].n
    for t in hamiltonian_terms:
        if t.n != n:
            raise DimensionError("HVA terms act on different qubit counts")
        if not t.is_hermitian():
            raise ArgumentError("HVA term is not Hermitian")
        if not _words_commute(t):
            raise ArgumentError("HVA term words must commute to be exponentiated exactly")
    gates, slot = [], 0
    for layer in range(L):
        for t in hamiltonian_terms:
            gates.append(Gate.rotation(t, param_slot=slot, layer=layer))
            slot += 1
    return Circuit(n, gates, slot)


@dataclass(frozen=True)
class QcnnSchedule:
    """Active qubit sets before each stage, qubits traced out per stage, final support."""

    stages: tuple[tuple[int, ...], ...]
    discarded: tuple[tuple[int, ...], ...]
    final_active: tuple[int, ...]

    @property
    def n_stages(self) -> int:
        return len(self.stages)


def build_qcnn(n: int, pooling_gates: bool = False) -> tuple[Circuit, QcnnSchedule]:
    """Convolution + pooling QCNN on ``n = 2**m`` qubits.

    Stage ``s`` applies a brickwork convolution (two sublayers of HEA blocks)
    on the active qubits; all stages but the last then pool by tracing out
    the even-position active qubits. With ``pooling_gates`` each traced
    qubit ``d`` is first coupled to its right neighbour ``k`` by ``Z_d X_k``
    and ``Z_d Z_k`` rotations. The final observable acts on the two
    remaining active qubits.
    """
    if n < 4 or n & (n - 1):
        raise ArgumentError("QCNN needs n a power of two, n >= 4")
    m = n.bit_length() - 1
    active = list(range(n))
    gates, slot, layer = [], 0, 0
    stages, discarded = [], []
    for stage in range(m):
        stages.append(tuple(active))
        for sub in range(2):
            pairs = [(active[i], active[i + 1]) for i in range(sub, len(active) - 1, 2)]
            for a, b in pairs:
                gates += hea_block(n, a, b, slot, layer)
                slot += ROTATIONS_PER_BLOCK
            if pairs:
                layer += 1
        if stage == m - 1:
            discarded.append(())
            break
        gone, keep = active[0::2], active[1::2]
        if pooling_gates:
            for d, k in zip(gone, keep):
                gates.append(Gate.rotation(_word(n, {d: "Z", k: "X"}), param_slot=slot, layer=layer))
                gates.append(Gate.rotation(_word(n, {d: "Z", k: "Z"}), param_slot=slot + 1,
                                           layer=layer))
                slot += 2
            layer += 1
        discarded.append(tuple(gone))
        active = keep
    return Circuit(n, gates, slot), QcnnSchedule(tuple(stages), tuple(discarded), tuple(active))


def qcnn_observable(schedule: QcnnSchedule, n: int, label: str = "ZZ") -> PauliSum:
    """Two-qubit observable on the final active pair."""
    a, b = schedule.final_active[-2:] if len(schedule.final_active) >= 2 else (None, None)
    if a is None:
        raise ArgumentError("schedule has fewer than two final qubits")
    return _word(n, {a: label[0], b: label[1]})


def build_parity(n: int, target: int = 0) -> Circuit:
    """CX cascade writing the parity of all qubits onto ``target``."""
    gates = [Gate.clifford("CX", (j, target), layer=k)
             for k, j in enumerate(q for q in range(n) if q != target)]
    return Circuit(n, gates, 0)


def controlled_x_power_generator(n: int, control: int, target: int) -> PauliSum:
    """``Z_c + X_t - Z_c X_t``: ``exp(-i (pi t / 4) G)`` equals ``CX**t`` up to a global phase."""
    return (_word(n, {control: "Z"}) + _word(n, {target: "X"})
            - _word(n, {control: "Z", target: "X"}))


def build_fractional_parity(n: int, t: float, target: int = 0) -> Circuit:
    """Parity cascade of fractional CNOTs ``CX**t`` from every qubit onto ``target``.

    ``t = 1`` computes the parity exactly (see :func:`build_parity`);
    ``t < 1`` spreads the Heisenberg image of ``Z_target`` over parities of
    all subsets.
    """
    gates = []
    for k, j in enumerate(q for q in range(n) if q != target):
        gates.append(Gate.rotation(controlled_x_power_generator(n, j, target),
                                   angle=math.pi * t / 4, layer=k))
    return Circuit(n, gates, 0)


def random_circuit(n: int, n_gates: int, seed: int, max_weight: int = 2,
                   cliffords: bool = False, local: bool = True) -> Circuit:
    """Random Pauli-rotation circuit, one parameter slot per rotation.

    With ``local`` the words act on ``max_weight`` consecutive qubits,
    otherwise on random qubit subsets. With ``cliffords`` a quarter of the
    gates are random H/S/CX/CZ.
    """
    rng = np.random.default_rng(seed)
    gates, slot = [], 0
    for k in range(n_gates):
        if cliffords and rng.random() < 0.25:
            name = ["H", "S", "CX", "CZ"][int(rng.integers(4))]
            if CLIFFORD_ARITY[name] == 1:
                gates.append(Gate.clifford(name, (int(rng.integers(n)),), layer=k))
            else:
                a, b = rng.choice(n, 2, replace=False)
                gates.append(Gate.clifford(name, (int(a), int(b)), layer=k))
            continue
        w = int(rng.integers(1, min(max_weight, n) + 1))
        if local:
            start = int(rng.integers(0, n - w + 1))
            qs = range(start, start + w)
        else:
            qs = rng.choice(n, w, replace=False)
        ops = {int(q): "XYZ"[int(rng.integers(3))] for q in qs}
        gates.append(Gate.rotation(_word(n, ops), param_slot=slot, layer=k))
        slot += 1
    return Circuit(n, gates, slot)


def product_state_prep(n: int, angles_y, angles_z=None) -> Circuit:
    """Fixed-angle RY (then RZ) on every qubit: a product-state preparation."""
    gates = []
    for j in range(n):
        gates.append(Gate.rotation(_word(n, {j: "Y"}), angle=float(angles_y[j]), layer=0))
        if angles_z is not None:
            gates.append(Gate.rotation(_word(n, {j: "Z"}), angle=float(angles_z[j]), layer=1))
    gates.sort(key=lambda g: g.layer)
    return Circuit(n, gates, 0)


def basis_state_prep(bits: str) -> Circuit:
    """X gates preparing the computational basis state ``|bits>`` (qubit 0 leftmost)."""
    n = len(bits)
    return Circuit(n, [Gate.clifford("X", (j,)) for j, b in enumerate(bits) if b == "1"], 0)


def random_prep(n: int, depth: int, seed: int) -> Circuit:
    """Fixed-angle brickwork preparation circuit of the given depth."""
    hea = build_shallow_hea(n, depth) if depth > 0 else Circuit(n, (), 0)
    rng = np.random.default_rng(seed)
    return hea.bind(rng.uniform(0, 2 * np.pi, hea.n_params))


def commutes_with_total_z(op: PauliSum) -> bool:
    return op.commutator(total_z(op.n)).is_zero()
