"""Command-line experiment runner.

Every command reads one JSON config (``--config``); ``--seed``, ``--threads``
and ``--out`` override the corresponding top-level fields. Outputs are UTF-8
JSON (sorted keys) and RFC-4180 CSV written under the output directory, each
embedding the resolved config, the schema version and the tool version.

Exit codes: 0 success, 1 runtime failure, 2 invalid config, 3 engine
inadmissible for the circuit, 4 resource limit exceeded. Failures print a
JSON error record on stderr and write no output files.
"""
from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from . import circuits as C
from .errors import ArgumentError, InadmissibleError, ResourceError, SubspaceSimError
from .pauli import PauliString, PauliSum
from .seeds import derive_seed

OUTPUT_SCHEMA = 1
COMMANDS = ("dla", "simulate", "variance-scan", "shadows", "compare", "leakage", "split-ab")
ENGINES = ("oracle", "gsim", "lightcone", "hamming", "matchgate", "pauli-prop")
BUILDERS = ("shallow_hea", "matchgate", "u1", "sn", "hva_tfim", "qcnn", "parity",
            "fractional_parity", "random", "random_prep")

_CIRCUIT = {
    "type": "object",
    "oneOf": [
        {"required": ["builder"]},
        {"required": ["path"]},
    ],
    "properties": {
        "builder": {"enum": list(BUILDERS)},
        "args": {"type": "object"},
        "path": {"type": "string"},
        "bind_seed": {"type": "integer"},
    },
    "additionalProperties": False,
}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["experiment"],
    "properties": {
        "schema_version": {"const": 1},
        "experiment": {"enum": list(COMMANDS)},
        "n": {"type": "integer", "minimum": 1, "maximum": 31},
        "n_list": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
        "circuit": _CIRCUIT,
        "state_prep": {
            "type": "object",
            "properties": {
                "bits": {"type": "string", "pattern": "^[01]+$"},
                "circuit": _CIRCUIT,
            },
            "additionalProperties": False,
        },
        "observable": {"type": "string", "minLength": 1},
        "distribution": {
            "type": "object",
            "required": ["kind"],
            "properties": {"kind": {"enum": ["uniform", "discrete", "gaussian"]},
                           "params": {"type": "object"}, "overrides": {"type": "object"}},
            "additionalProperties": False,
        },
        "engine": {"enum": list(ENGINES)},
        "engines": {"type": "array", "items": {"enum": list(ENGINES)}, "minItems": 2, "maxItems": 2},
        "truncation": {
            "type": "object",
            "properties": {"max_weight": {"type": ["integer", "null"], "minimum": 0},
                           "min_coeff": {"type": "number", "minimum": 0},
                           "max_terms": {"type": ["integer", "null"], "minimum": 1}},
            "additionalProperties": False,
        },
        "samples": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0},
        "threads": {"type": "integer", "minimum": 1},
        "tolerance": {"type": "number", "exclusiveMinimum": 0},
        "shots": {"type": "integer", "minimum": 1},
        "batches": {"type": "integer", "minimum": 1},
        "dataset": {"type": "string"},
        "k_list": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 1},
        "subspace": {
            "type": "object",
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["words", "max_weight", "support", "majorana", "algebra",
                                  "u1_equivariant"]},
                "words": {"type": "array", "items": {"type": "string"}},
                "max_weight": {"type": "integer", "minimum": 0},
                "qubits": {"type": "array", "items": {"type": "integer", "minimum": 0}},
                "eta": {"type": "integer", "minimum": 0},
            },
            "additionalProperties": False,
        },
        "thresholds": {"type": "object"},
        "out": {"type": "string"},
    },
    "additionalProperties": False,
}

DEFAULTS = {"schema_version": 1, "seed": 0, "samples": 20, "tolerance": 1e-8, "threads": 1,
            "distribution": {"kind": "uniform"}, "out": "out"}


class ConfigError(ArgumentError):
    def __init__(self, message, path="$"):
        super().__init__(message)
        self.path = path


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment configuration (a JSON document)."""

    data: dict

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        validate_config(d)
        return cls(copy.deepcopy(d))

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from None
        return cls.from_dict(d)

    def to_json(self) -> str:
        return json.dumps(self.data, sort_keys=True, indent=2)

    def resolved(self) -> dict:
        out = copy.deepcopy(DEFAULTS)
        out.update(copy.deepcopy(self.data))
        return out


def validate_config(d) -> None:
    v = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(v.iter_errors(d), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        path = "$" + "".join(f"[{p}]" if isinstance(p, int) else f".{p}" for p in e.absolute_path)
        raise ConfigError(e.message, path)


# ----------------------------------------------------------------------
# resolution helpers

def build_circuit(spec: dict, n: int | None, base_dir: Path = Path(".")) -> C.Circuit:
    if "path" in spec:
        p = Path(spec["path"])
        p = p if p.is_absolute() else base_dir / p
        try:
            circ = C.Circuit.from_json(p.read_text(encoding="utf-8"))
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise ConfigError(f"cannot load circuit: {exc}", "$.circuit.path") from None
    else:
        args = dict(spec.get("args", {}))
        name = spec["builder"]
        if n is None and "n" not in args:
            raise ConfigError("qubit count 'n' is required for builder circuits", "$.n")
        args.setdefault("n", n)
        try:
            circ = _BUILD[name](**args)
        except TypeError as exc:
            raise ConfigError(f"bad arguments for builder {name!r}: {exc}", "$.circuit.args") from None
        if isinstance(circ, tuple):
            circ = circ[0]
    if "bind_seed" in spec:
        rng = np.random.default_rng(spec["bind_seed"])
        circ = circ.bind(rng.uniform(0, 2 * math.pi, circ.n_params))
    return circ


_BUILD = {
    "shallow_hea": lambda n, L: C.build_shallow_hea(n, L),
    "matchgate": lambda n, L: C.build_matchgate(n, L),
    "u1": lambda n, L: C.build_u1_equivariant(n, L),
    "sn": lambda n, L: C.build_sn_equivariant(n, L),
    "hva_tfim": lambda n, L, periodic=False: C.build_hva(C.tfim_terms(n, periodic), L),
    "qcnn": lambda n, pooling_gates=False: C.build_qcnn(n, pooling_gates),
    "parity": lambda n, target=0: C.build_parity(n, target),
    "fractional_parity": lambda n, t, target=0: C.build_fractional_parity(n, t, target),
    "random": lambda n, n_gates, seed, max_weight=2: C.random_circuit(n, n_gates, seed, max_weight),
    "random_prep": lambda n, depth, seed: C.random_prep(n, depth, seed),
}


def parse_observable(text: str, n: int) -> PauliSum:
    """Pauli-sum text, a bare word label, or ``global_z`` / ``local_z:<q>`` / ``qcnn_zz``
    / ``tfim_zz`` / ``sn_zz``."""
    t = text.strip()
    if t == "global_z":
        return PauliSum.from_label("Z" * n)
    if t.startswith("local_z:"):
        return PauliSum.from_word(PauliString.from_sparse(n, {int(t.split(":")[1]): "Z"}))
    if t == "qcnn_zz":
        _, sched = C.build_qcnn(n)
        return C.qcnn_observable(sched, n)
    if t == "tfim_zz":
        return C.tfim_terms(n)[0]
    if t == "sn_zz":
        return C.sn_generators(n)[2]
    try:
        if "\t" in t or "\n" in t or " " in t:
            op = PauliSum.from_text(t, n=n)
        else:
            op = PauliSum.from_label(t)
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"cannot parse observable: {exc}", "$.observable") from None
    if op.n != n:
        raise ConfigError(f"observable acts on {op.n} qubits, circuit on {n}", "$.observable")
    return op


def _prep(cfg: dict, n: int, base: Path):
    sp = cfg.get("state_prep")
    if not sp:
        return None, None
    if "bits" in sp:
        if len(sp["bits"]) != n:
            raise ConfigError("state_prep.bits length differs from n", "$.state_prep.bits")
        return C.basis_state_prep(sp["bits"]), sp["bits"]
    return build_circuit(sp["circuit"], n, base), None


def _dist(cfg: dict) -> C.ParamDistribution:
    d = cfg["distribution"]
    try:
        return C.ParamDistribution.from_dict({"kind": d["kind"], "params": d.get("params", {}),
                                              "overrides": d.get("overrides", {})})
    except (ArgumentError, KeyError, TypeError) as exc:
        raise ConfigError(f"bad distribution: {exc}", "$.distribution") from None


def _policy(cfg: dict):
    from .propagation import TruncationPolicy
    t = cfg.get("truncation") or {}
    return TruncationPolicy(max_weight=t.get("max_weight"), min_coeff=t.get("min_coeff", 0.0),
                            max_terms=t.get("max_terms"))


def make_engine(engine: str, circuit: C.Circuit, obs: PauliSum, prep, bits, cfg: dict):
    """Return ``f(params) -> (loss, extra)`` for the named engine."""
    from . import statevector as sv
    n = circuit.n
    if engine == "oracle":
        st0 = sv.prepare(prep, n)
        return lambda p: (sv.expectation(sv.apply_circuit(st0, circuit, p), obs), {})
    if engine == "gsim":
        from .gsim import gsim_loss, prepare_instance
        inst = prepare_instance(circuit, obs, prep)
        return lambda p: (gsim_loss(inst, p), {})
    if engine == "lightcone":
        from .lightcone import backward_cone, reduced_loss
        cone = backward_cone(circuit, obs.support())
        rho = sv.reduced_density(sv.prepare(prep, n), list(cone.qubit_set))
        return lambda p: (reduced_loss(cone, rho, obs, p), {"cone_size": cone.size})
    if engine == "hamming":
        from .hamming import sector_loss
        if bits is None:
            raise InadmissibleError("hamming engine needs state_prep.bits")
        return lambda p: (sector_loss(bits, circuit, p, obs), {})
    if engine == "matchgate":
        from .matchgate import (majorana_correlations, module_loss, observable_to_monomials,
                                subsets)
        mons = observable_to_monomials(obs)
        etas = {m.eta for m in mons}
        if len(etas) != 1:
            raise InadmissibleError("observable mixes Majorana degrees")
        eta = etas.pop()
        cols = subsets(n, eta)
        table = dict(zip(cols, majorana_correlations(prep, n, eta)(cols)))
        return lambda p: (module_loss(circuit, p, mons, table), {})
    if engine == "pauli-prop":
        from .propagation import backpropagate, loss_from_expectations
        st0 = sv.prepare(prep, n)

        def f(p):
            pol = _policy(cfg)
            heis = backpropagate(obs, circuit, p, pol)
            return loss_from_expectations(heis, st0)[0], {"terms": len(heis),
                                                          "discarded_mass": pol.discard_log}
        return f
    raise ConfigError(f"unknown engine {engine!r}", "$.engine")


def _params(cfg, circuit, i):
    return C.sample_params(_dist(cfg), circuit.n_params, derive_seed(cfg["seed"], "theta", i))


# ----------------------------------------------------------------------
# commands

def _needs(cfg, *keys):
    for k in keys:
        if k not in cfg:
            raise ConfigError(f"'{k}' is required for experiment {cfg['experiment']!r}", f"$.{k}")


def cmd_dla(cfg, base):
    from .dla import lie_closure
    _needs(cfg, "circuit")
    circ = build_circuit(cfg["circuit"], cfg.get("n"), base)
    basis = lie_closure(circ.generators())
    return {"dla.json": {"dim": basis.dim, "n": circ.n, "algebra": basis.to_dict()}}


def cmd_simulate(cfg, base):
    _needs(cfg, "circuit", "observable", "engine")
    circ = build_circuit(cfg["circuit"], cfg.get("n"), base)
    obs = parse_observable(cfg["observable"], circ.n)
    prep, bits = _prep(cfg, circ.n, base)
    f = make_engine(cfg["engine"], circ, obs, prep, bits, cfg)
    rows = []
    for i in range(cfg["samples"]):
        val, extra = f(_params(cfg, circ, i))
        rows.append({"sample": i, "loss": val, **extra})
    return {"simulate.json": {"engine": cfg["engine"], "rows": rows},
            "simulate.csv": _csv(["sample", "loss"], rows)}


def cmd_compare(cfg, base):
    _needs(cfg, "circuit", "observable", "engines")
    circ = build_circuit(cfg["circuit"], cfg.get("n"), base)
    obs = parse_observable(cfg["observable"], circ.n)
    prep, bits = _prep(cfg, circ.n, base)
    a, b = cfg["engines"]
    fa = make_engine(a, circ, obs, prep, bits, cfg)
    fb = make_engine(b, circ, obs, prep, bits, cfg)
    rows = []
    for i in range(cfg["samples"]):
        p = _params(cfg, circ, i)
        (va, ea), (vb, eb) = fa(p), fb(p)
        rows.append({"sample": i, a: va, b: vb, "abs_diff": abs(va - vb),
                     **{f"{a}.{k}": v for k, v in ea.items()},
                     **{f"{b}.{k}": v for k, v in eb.items()}})
    diffs = np.array([r["abs_diff"] for r in rows])
    summary = {"engines": [a, b], "max_abs_diff": float(diffs.max()),
               "mean_abs_diff": float(diffs.mean()), "tolerance": cfg["tolerance"],
               "pass": bool(diffs.max() <= cfg["tolerance"]), "rows": rows}
    return {"compare.json": summary, "compare.csv": _csv(["sample", a, b, "abs_diff"], rows)}


def cmd_variance_scan(cfg, base):
    from .diagnostics import Thresholds, variance_scan
    _needs(cfg, "circuit", "observable", "n_list")
    engine = cfg.get("engine", "oracle")
    spec = cfg["circuit"]
    prep_spec = cfg.get("state_prep")

    def factory(n):
        circ = build_circuit(spec, n, base)
        obs = parse_observable(cfg["observable"], n)
        prep, bits = _prep(cfg, n, base) if prep_spec and "circuit" in prep_spec else (None, None)
        f = make_engine(engine, circ, obs, prep, bits, cfg)
        return circ.n_params, lambda p: f(p)[0]
    th = Thresholds(**cfg.get("thresholds", {}))
    rep = variance_scan(factory, _dist(cfg), cfg["n_list"], cfg["samples"], cfg["seed"],
                        thresholds=th, threads=cfg["threads"])
    d = rep.to_dict()
    d.pop("config")
    return {"variance.json": d, "variance.csv": rep.to_csv()}


def cmd_leakage(cfg, base):
    from .diagnostics import SubspaceDescriptor, leakage
    from .dla import lie_closure
    _needs(cfg, "circuit", "observable", "subspace")
    circ = build_circuit(cfg["circuit"], cfg.get("n"), base)
    obs = parse_observable(cfg["observable"], circ.n)
    s = dict(cfg["subspace"])
    kind = s.pop("kind")
    basis = lie_closure(circ.generators()) if kind == "algebra" else None
    desc = SubspaceDescriptor(kind, words=tuple(s.get("words", ())), max_weight=s.get("max_weight"),
                              qubits=tuple(s.get("qubits", ())), eta=s.get("eta"), basis=basis)
    rows = [{"sample": i, "leakage": leakage(circ, _params(cfg, circ, i), obs, desc)}
            for i in range(cfg["samples"])]
    vals = np.array([r["leakage"] for r in rows])
    return {"leakage.json": {"median": float(np.median(vals)), "max": float(vals.max()),
                             "rows": rows},
            "leakage.csv": _csv(["sample", "leakage"], rows)}


def cmd_split_ab(cfg, base):
    from .diagnostics import discrete_vs_continuous
    _needs(cfg, "circuit", "observable", "k_list")
    circ = build_circuit(cfg["circuit"], cfg.get("n"), base)
    obs = parse_observable(cfg["observable"], circ.n)
    u_params = _params(cfg, circ, 0) if circ.n_params else None
    rep = discrete_vs_continuous(circ, obs, cfg["k_list"], cfg["samples"], cfg["seed"], u_params)
    fields = ["k", "E_cont_high", "E_disc_high", "E_cont_low", "E_disc_low", "ratio_disc_over_cont_high"]
    return {"split_ab.json": rep, "split_ab.csv": _csv(fields, rep["rows"])}


def cmd_shadows(cfg, base, action):
    from .shadows import ShadowDataset, ShadowSource, acquire
    if action == "acquire":
        _needs(cfg, "shots")
        n = cfg.get("n")
        sp = cfg.get("state_prep")
        if n is None and sp and "bits" in sp:
            n = len(sp["bits"])
        if n is None and sp and "circuit" in sp:
            n = build_circuit(sp["circuit"], None, base).n
        if n is None:
            raise ConfigError("'n' or a state_prep is required", "$.n")
        prep, _ = _prep(cfg, n, base)
        ds = acquire(prep, cfg["shots"], cfg["seed"], n=n)
        return {"shadows.txt": ds.to_text(),
                "shadows.json": {"n": n, "shots": ds.shots, "prep_id": ds.state_prep_id}}
    _needs(cfg, "dataset", "observable")
    p = Path(cfg["dataset"])
    try:
        ds = ShadowDataset.load(p if p.is_absolute() else base / p)
    except (OSError, ValueError, KeyError) as exc:
        raise ConfigError(f"cannot load dataset: {exc}", "$.dataset") from None
    obs = parse_observable(cfg["observable"], ds.n)
    val, err = ShadowSource(ds, batches=cfg.get("batches", 10)).estimate(obs)
    return {"estimate.json": {"value": val, "stderr": err, "shots": ds.shots}}


def _csv(fields, rows) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\r\n")
    w.writerow(fields)
    for r in rows:
        w.writerow([repr(r[f]) if isinstance(r.get(f), float) else r.get(f, "") for f in fields])
    return out.getvalue()


# ----------------------------------------------------------------------
# entry point

def _threads(arg: int | None) -> int | None:
    if arg is not None:
        return arg
    env = os.environ.get("SUBSPACE_SIM_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError("SUBSPACE_SIM_THREADS must be an integer", "$env.SUBSPACE_SIM_THREADS")
    return None


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="subspace-sim", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"subspace-sim {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        if name == "shadows":
            sp.add_argument("action", choices=["acquire", "estimate"])
        sp.add_argument("--config", required=True, type=Path)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--threads", type=int)
        sp.add_argument("--out", type=Path)
    return p


_COMMANDS = {"dla": cmd_dla, "simulate": cmd_simulate, "variance-scan": cmd_variance_scan,
             "compare": cmd_compare, "leakage": cmd_leakage, "split-ab": cmd_split_ab}


def _fail(code: int, kind: str, message: str, **extra) -> int:
    rec = {"error": kind, "message": message, "exit_code": code, **extra}
    sys.stderr.write(json.dumps(rec, sort_keys=True) + "\n")
    return code


def run(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        try:
            text = args.config.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        raw = json.loads(text) if text.strip() else None
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        if "experiment" not in raw:
            raw = {**raw, "experiment": args.command}
        if args.seed is not None:
            raw["seed"] = args.seed
        threads = _threads(args.threads)
        if threads is not None:
            raw["threads"] = threads
        if args.out is not None:
            raw["out"] = str(args.out)
        cfg = ExperimentConfig.from_dict(raw).resolved()
        if cfg["experiment"] != args.command:
            raise ConfigError(f"config is for {cfg['experiment']!r}, command is {args.command!r}",
                              "$.experiment")
        base = args.config.resolve().parent
        if args.command == "shadows":
            files = cmd_shadows(cfg, base, args.action)
        else:
            files = _COMMANDS[args.command](cfg, base)
    except json.JSONDecodeError as exc:
        return _fail(2, "schema", f"invalid JSON: {exc}", path="$")
    except ConfigError as exc:
        return _fail(2, "schema", str(exc), path=exc.path)
    except InadmissibleError as exc:
        return _fail(3, "inadmissible", str(exc), gate_index=exc.gate_index)
    except ResourceError as exc:
        return _fail(4, "resource", str(exc), partial=exc.partial)
    except (SubspaceSimError, ValueError) as exc:
        return _fail(1, "runtime", str(exc))
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    header = {"schema_version": OUTPUT_SCHEMA, "tool_version": f"subspace-sim {__version__}",
              "command": args.command, "config": cfg}
    for name, payload in files.items():
        path = out / name
        if name.endswith(".json"):
            text = json.dumps({**header, "result": payload}, sort_keys=True, indent=2) + "\n"
        else:
            text = payload
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return 0


def main() -> None:
    sys.exit(run())
