"""Concentration diagnostics: variance scans, DLA-dimension trends, leakage, and
the discrete-versus-continuous initialization experiment.

Loss evaluators are factories ``build(n) -> (n_params, f)`` where ``f(params)``
returns the loss; the scan draws per-sample parameters from seeds derived as
``derive_seed(seed, n, sample)`` so results do not depend on thread count.
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .circuits import Circuit, Gate, ParamDistribution, sample_params
from .dla import LieBasis, lie_closure, project_onto_algebra
from .errors import ArgumentError, DimensionError, ResourceError
from .pauli import PauliString, PauliSum, popcount
from .propagation import TruncationPolicy, _rotation_step, backpropagate, product_state_expectations, split_observable
from .seeds import derive_seed

REPORT_SCHEMA = 1
CSV_FIELDS = ("n", "n_samples", "mean", "variance", "stderr_of_variance")


@dataclass(frozen=True)
class Thresholds:
    """Decision rule: exponential-decay iff slope < ``decay_slope`` with r^2 > ``min_r2``;
    polynomial-or-flat iff slope > ``flat_slope``; otherwise inconclusive."""

    decay_slope: float = -0.2
    min_r2: float = 0.9
    flat_slope: float = -0.05


@dataclass
class VarianceReport:
    records: list
    fit: dict | None
    classification: str
    thresholds: dict
    seed: int
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"schema_version": REPORT_SCHEMA, "tool_version": __version__,
                "records": self.records, "fit": self.fit,
                "classification": self.classification, "thresholds": self.thresholds,
                "seed": self.seed, "config": self.config}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\r\n")
        w.writerow(CSV_FIELDS)
        for r in self.records:
            w.writerow([repr(r[k]) if isinstance(r[k], float) else r[k] for k in CSV_FIELDS])
        return out.getvalue()


def variance_stderr(values: np.ndarray) -> float:
    """Standard error of the unbiased sample variance from the fourth central moment."""
    N = values.size
    if N < 4:
        return float("nan")
    d = values - values.mean()
    m2 = np.mean(d ** 2)
    m4 = np.mean(d ** 4)
    var_s2 = (m4 - (N - 3) / (N - 1) * m2 ** 2) / N
    return float(math.sqrt(max(var_s2, 0.0)))


def fit_log_variance(ns, variances) -> dict | None:
    """Least-squares fit of ``log(variance)`` against ``n``; ``None`` if undefined."""
    ns = np.asarray(ns, dtype=float)
    v = np.asarray(variances, dtype=float)
    if ns.size < 3 or np.any(v <= 0):
        return None
    y = np.log(v)
    slope, intercept = np.polyfit(ns, y, 1)
    resid = y - (slope * ns + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return {"slope": float(slope), "intercept": float(intercept), "r2": r2}


def classify(variances, fit, th: Thresholds = Thresholds()) -> str:
    v = np.asarray(variances, dtype=float)
    if v.size and np.all(v == 0):
        return "polynomial-or-flat"
    if fit is None:
        return "inconclusive"
    if fit["slope"] < th.decay_slope and fit["r2"] > th.min_r2:
        return "exponential-decay"
    if fit["slope"] > th.flat_slope:
        return "polynomial-or-flat"
    return "inconclusive"


def _map(fn, items, threads):
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(fn, items))
    return [fn(i) for i in items]


def sample_losses(loss_evaluator, dist: ParamDistribution, n: int, samples: int, seed: int,
                  threads: int = 1) -> np.ndarray:
    n_params, f = loss_evaluator(n)

    def one(i):
        try:
            return f(sample_params(dist, n_params, derive_seed(seed, n, i)))
        except Exception as exc:
            raise type(exc)(f"evaluator failed at n={n}, sample={i}: {exc}") from exc
    return np.array(_map(one, range(samples), threads), dtype=float)


def variance_scan(loss_evaluator, dist: ParamDistribution, n_list, samples_per_n: int = 200,
                  seed: int = 0, *, thresholds: Thresholds = Thresholds(), threads: int = 1,
                  config: dict | None = None) -> VarianceReport:
    """Sample variance of the loss over ``theta ~ dist`` for each ``n``, with a log-variance fit."""
    if samples_per_n < 2:
        raise ArgumentError("need at least two samples per size")
    records = []
    for n in n_list:
        vals = sample_losses(loss_evaluator, dist, n, samples_per_n, seed, threads)
        records.append({"n": int(n), "n_samples": int(vals.size), "mean": float(vals.mean()),
                        "variance": float(vals.var(ddof=1)),
                        "stderr_of_variance": variance_stderr(vals)})
    ns = [r["n"] for r in records]
    var = [r["variance"] for r in records]
    fit = fit_log_variance(ns, var)
    return VarianceReport(records, fit, classify(var, fit, thresholds), asdict(thresholds),
                          int(seed), dict(config or {}))


# ----------------------------------------------------------------------
# evaluators

def oracle_evaluator(build_circuit, build_obs, state_prep=None):
    """Evaluator backed by the statevector oracle."""
    from .statevector import apply_circuit, expectation, prepare

    def factory(n):
        circ, obs = build_circuit(n), build_obs(n)
        prep = state_prep(n) if callable(state_prep) else state_prep
        st0 = prepare(prep, n)
        return circ.n_params, lambda p: expectation(apply_circuit(st0, circ, p), obs)
    return factory


def gsim_evaluator(build_circuit, build_obs, state_prep=None):
    """Evaluator backed by g-sim (one instance per size)."""
    from .gsim import gsim_loss, prepare_instance

    def factory(n):
        circ, obs = build_circuit(n), build_obs(n)
        prep = state_prep(n) if callable(state_prep) else state_prep
        inst = prepare_instance(circ, obs, prep)
        return circ.n_params, lambda p: gsim_loss(inst, p)
    return factory


FAMILIES = ("matchgate", "tfim-hva", "su2")


def _family(name: str, n: int, depth_multiplier: int):
    from .circuits import build_hva, build_matchgate, tfim_terms
    z1 = PauliSum.from_word(PauliString.from_sparse(n, {0: "Z"}))
    if name == "matchgate":
        return build_matchgate(n, depth_multiplier * n), z1
    if name == "tfim-hva":
        terms = tfim_terms(n)
        return build_hva(terms, depth_multiplier * n), terms[0]
    if name == "su2":
        gates = []
        for rep in range(depth_multiplier):
            gates.append(Gate.rotation(PauliSum.from_word(PauliString.from_sparse(n, {0: "X"})),
                                       param_slot=2 * rep, layer=rep))
            gates.append(Gate.rotation(PauliSum.from_word(PauliString.from_sparse(n, {0: "Z"})),
                                       param_slot=2 * rep + 1, layer=rep))
        return Circuit(n, gates, 2 * depth_multiplier), z1
    raise ArgumentError(f"unknown circuit family {name!r}; choose from {FAMILIES}")


def dla_variance_trend(family: str, n_list, samples: int = 200, seed: int = 0, *,
                       depth_multiplier: int = 4, dim_cap: int = 4096, threads: int = 1) -> dict:
    """Loss variance against ``dim(g)`` for a circuit family with ``rho = |0><0|``.

    Circuits have ``depth_multiplier * n`` layers (``depth_multiplier`` for
    ``su2``). Returns rows ``{n, dim, variance, var_times_dim}`` and the
    max/min ratio of ``variance * dim``.
    """
    from .gsim import gsim_loss, prepare_instance
    rows = []
    dist = ParamDistribution.uniform()
    for n in n_list:
        circ, obs = _family(family, n, depth_multiplier)
        basis = lie_closure(circ.generators(), dim_cap=dim_cap)
        inst = prepare_instance(circ, obs, None, basis=basis)
        vals = sample_losses(lambda _n: (circ.n_params, lambda p: gsim_loss(inst, p)),
                             dist, n, samples, seed, threads)
        var = float(vals.var(ddof=1))
        rows.append({"n": int(n), "dim": basis.dim, "variance": var,
                     "stderr_of_variance": variance_stderr(vals), "var_times_dim": var * basis.dim})
    prods = [r["var_times_dim"] for r in rows]
    ratio = max(prods) / min(prods) if min(prods) > 0 else float("inf")
    return {"schema_version": REPORT_SCHEMA, "family": family, "rows": rows,
            "ratio_max_min": ratio, "seed": int(seed), "depth_multiplier": depth_multiplier}


# ----------------------------------------------------------------------
# subspaces and leakage

@dataclass(frozen=True)
class SubspaceDescriptor:
    """Operator subspace used for leakage.

    kinds: ``words`` (explicit Pauli labels), ``max_weight`` (words of
    weight <= k), ``support`` (words inside a qubit set), ``majorana``
    (Jordan-Wigner monomials of degree ``eta``), ``algebra`` (span of a
    :class:`LieBasis`), ``u1_equivariant`` (operators commuting with
    ``sum_j Z_j``).
    """

    kind: str
    words: tuple[str, ...] = ()
    max_weight: int | None = None
    qubits: tuple[int, ...] = ()
    eta: int | None = None
    basis: LieBasis | None = field(default=None, compare=False)

    def outside_mass(self, op: PauliSum) -> float:
        """Squared norm of the component of ``op`` outside the subspace."""
        c2 = np.abs(op.coeffs) ** 2
        if self.kind == "words":
            keys = np.array(sorted(PauliSum.from_terms([(1.0, w) for w in self.words], n=op.n).keys),
                            dtype=np.int64) if self.words else np.zeros(0, np.int64)
            inside = np.isin(op.keys, keys)
            return float(np.sum(c2[~inside]))
        if self.kind == "max_weight":
            return float(np.sum(c2[op.weights() > self.max_weight]))
        if self.kind == "support":
            mask = 0
            for q in self.qubits:
                mask |= 1 << q
            inside = ((op.x | op.z) & ~mask) == 0
            return float(np.sum(c2[~inside]))
        if self.kind == "majorana":
            from .matchgate import majorana_degree
            deg = np.array([majorana_degree(w) for w, _ in op], dtype=int)
            return float(np.sum(c2[deg != self.eta]))
        if self.kind == "algebra":
            _, resid = project_onto_algebra(op, self.basis)
            return float(resid ** 2)
        if self.kind == "u1_equivariant":
            return float((op - u1_twirl(op)).mass()) if len(op) else 0.0
        raise ArgumentError(f"unknown subspace kind {self.kind!r}")


def u1_twirl(op: PauliSum) -> PauliSum:
    """Projection onto the ``sum_j Z_j``-commuting part by an exact discrete twirl.

    Conjugation by ``prod_j exp(-i a Z_j)`` multiplies the charge-``q``
    component by ``exp(2 i q a)`` with ``|q| <= n``, so averaging over
    ``a_m = pi m / (2n + 1)``, ``m = 0..2n`` keeps exactly ``q = 0``.
    """
    n = op.n
    M = 2 * n + 1
    acc = PauliSum(n)
    for m in range(M):
        a = math.pi * m / M
        keys, coeffs = op.keys.copy(), op.coeffs.copy()
        for j in range(n):
            keys, coeffs = _rotation_step(n, keys, coeffs, PauliString(n, 0, 1 << j), a)
        acc = acc + PauliSum(n, keys, coeffs, prune=0.0)
    return acc / M


def leakage(circuit: Circuit, params, obs: PauliSum, subspace: SubspaceDescriptor,
            term_cap: int = 2_000_000) -> float:
    """Fraction of the squared norm of ``U^dag O U`` outside ``subspace``.

    Raises
    ------
    ResourceError
        If exact propagation exceeds ``term_cap`` terms; use a truncated
        estimate instead.
    """
    try:
        heis = backpropagate(obs, circuit, params, TruncationPolicy(term_cap=term_cap))
    except ResourceError as exc:
        raise ResourceError(f"{exc}; exact leakage unavailable, use a truncated estimate",
                            partial=exc.partial) from None
    total = heis.mass()
    if total == 0:
        return 0.0
    return float(min(1.0, max(0.0, subspace.outside_mass(heis) / total)))


# ----------------------------------------------------------------------
# discrete vs continuous initialization

DISCRETE_ANGLES = (0.0, math.pi / 2, math.pi, 3 * math.pi / 2, 2 * math.pi)


def x_layer_bloch(thetas: np.ndarray) -> np.ndarray:
    """Bloch vectors of ``exp(-i theta X)|0>``: ``(0, -sin 2theta, cos 2theta)``."""
    t = np.asarray(thetas, dtype=float)
    return np.stack([np.zeros_like(t), -np.sin(2 * t), np.cos(2 * t)], axis=-1)


def discrete_vs_continuous(circuit_u: Circuit, obs: PauliSum, k_list, samples: int = 200,
                           seed: int = 0, u_params=None) -> dict:
    """``E|<A^H>|`` and ``E|<A^L>|`` under discrete and continuous X-layer angles.

    The composite circuit is ``U (prod_i exp(-i theta_i X_i))`` on ``|0...0>``;
    ``A = U^dag O U`` is propagated once and split at weight ``k``. The same
    angle draws are reused for every ``k``.
    """
    n = circuit_u.n
    if obs.n != n:
        raise DimensionError("observable and circuit differ in qubit count")
    A = backpropagate(obs, circuit_u, u_params)
    disc = ParamDistribution.discrete(DISCRETE_ANGLES)
    cont = ParamDistribution.uniform(0.0, 2 * math.pi)
    draws = {
        "disc": [sample_params(disc, n, derive_seed(seed, "disc", s)) for s in range(samples)],
        "cont": [sample_params(cont, n, derive_seed(seed, "cont", s)) for s in range(samples)],
    }
    rows = []
    for k in k_list:
        low, high = split_observable(A, int(k))
        row = {"k": int(k), "n_low_terms": len(low), "n_high_terms": len(high)}
        for name, thetas in draws.items():
            hi = np.array([abs(product_state_expectations(high, x_layer_bloch(t))) for t in thetas])
            lo = np.array([abs(product_state_expectations(low, x_layer_bloch(t))) for t in thetas])
            row[f"E_{name}_high"] = float(hi.mean())
            row[f"E_{name}_low"] = float(lo.mean())
        row["ratio_disc_over_cont_high"] = (row["E_disc_high"] / row["E_cont_high"]
                                            if row["E_cont_high"] > 0 else float("inf"))
        rows.append(row)
    return {"schema_version": REPORT_SCHEMA, "n": n, "samples": samples, "seed": int(seed),
            "n_terms": len(A), "rows": rows}


def weight_histogram(op: PauliSum) -> dict[int, float]:
    """Squared coefficient mass per Pauli weight."""
    w = op.weights()
    c2 = np.abs(op.coeffs) ** 2
    return {int(k): float(c2[w == k].sum()) for k in np.unique(w)}
