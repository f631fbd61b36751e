"""Reproducible experiment runner.

Subcommands wrap each part of the library behind JSON configs and emit
CSV (RFC 4180) or JSON artifacts. All randomness derives from one master
seed through counter-based child seeds, so reruns are byte-identical
(modulo the timestamp comment, which --no-timestamp suppresses) and
adding instances never reshuffles earlier ones.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import models
from .cnf import CnfInstance, parse_dimacs, write_dimacs
from .counting import COUNT_LIMIT, count_solutions
from .dense import (
    DENSE_LIMIT,
    build_energy_diagonal,
    entanglement_entropy,
    ite_evolve,
    schmidt,
    solution_weight,
)
from .evolution import IteSchedule, count_estimate, flat_run, ite_run, verify_certificate
from .generator import generate_satisfiable, random_instance, unique_solution_filter
from .magic import exact_stabilizer_entropy, markov_m2, sample_m1
from .mps import Mps, TruncationPolicy
from .seeding import child_seed


def _utc_stamp() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def write_csv(path: Path, header: list[str], rows: list[list], meta: str | None) -> None:
    with open(path, "w", newline="") as fh:
        if meta is not None:
            fh.write(f"# {meta}\r\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, np.integer):
        return str(int(value))
    return str(value)


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    with open(path) as fh:
        return json.load(fh)


def _resolve_m(config: dict) -> tuple[int, int]:
    n = int(config["n"])
    if "m" in config:
        m = int(config["m"])
    elif "alpha" in config:
        m = int(round(float(config["alpha"]) * n))
    else:
        raise SystemExit("config needs either 'm' or 'alpha'")
    return n, m


def _make_instance(config: dict, seed: int, index: int = 0) -> CnfInstance:
    if "instances_dir" in config:
        files = sorted(Path(config["instances_dir"]).glob("*.cnf"))
        if index >= len(files):
            raise SystemExit(
                f"instances_dir has {len(files)} files, instance {index} requested"
            )
        return parse_dimacs(files[index].read_text())
    n, m = _resolve_m(config)
    kind = config.get("ensemble", "satisfiable")
    budget = int(config.get("budget", 10_000))
    if kind == "satisfiable":
        return generate_satisfiable(n, m, seed, budget=budget)
    if kind == "unique":
        return unique_solution_filter(n, m, seed, budget=budget)
    if kind == "random":
        return random_instance(np.random.default_rng(seed), n, m)
    raise SystemExit(f"unknown ensemble {kind!r}")


def _num_instances(config: dict) -> int:
    if "instances" in config:
        return int(config["instances"])
    if "instances_dir" in config:
        return len(sorted(Path(config["instances_dir"]).glob("*.cnf")))
    return 1


def _policy(config: dict, renormalize: bool) -> TruncationPolicy:
    chi = config.get("chi", 256)
    return TruncationPolicy(
        chi=None if chi in (None, "none", 0) else int(chi),
        eps=float(config.get("eps", 1e-10)),
        renormalize=renormalize,
    )


# -- generate -----------------------------------------------------------------


def cmd_generate(args) -> int:
    config = _load_config(args.config)
    n, m = _resolve_m(config)
    instances = int(config.get("instances", 1))
    out_dir = Path(args.out or "instances")
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = []
    for i in range(instances):
        seed = child_seed(args.seed, i)
        inst = _make_instance(config, seed)
        name = f"instance_{i:04d}.cnf"
        (out_dir / name).write_text(write_dimacs(inst))
        entry = {
            "file": name,
            "n": inst.n,
            "m": inst.m,
            "alpha": inst.alpha,
            "seed": seed,
        }
        if config.get("count_solutions", False) and inst.n <= COUNT_LIMIT:
            entry["solutions"] = count_solutions(inst)
        manifest.append(entry)
    payload = {"master_seed": args.seed, "instances": manifest}
    if not args.no_timestamp:
        payload["generated"] = _utc_stamp()
    (out_dir / "manifest.json").write_text(json.dumps(payload, indent=2, sort_keys=True))
    print(f"wrote {instances} instances to {out_dir}")
    return 0


# -- evolve ---------------------------------------------------------------------

EVOLVE_HEADER = [
    "row", "backend", "instance", "seed", "n", "m", "alpha", "cut", "tau",
    "entropy", "norm_sq", "solution_weight", "max_bond",
    "bump_height", "bump_tau", "max_delta_s",
]


def _dense_ite_trace(inst: CnfInstance, schedule: IteSchedule, cut: int):
    diag = build_energy_diagonal(inst, limit=max(DENSE_LIMIT, inst.n))
    taus = [0.0] + [
        step * schedule.dtau
        for step in range(1, schedule.steps + 1)
        if step % schedule.record_every == 0 or step == schedule.steps
    ]
    entropies, weights, norms = [], [], []
    for tau in taus:
        state = ite_evolve(diag, tau)
        entropies.append(entanglement_entropy(schmidt(state, cut)))
        weights.append(solution_weight(state, inst))
        raw = np.exp(-2 * tau * diag.astype(float)).mean()
        norms.append(float(raw))
    return np.array(taus), np.array(entropies), np.array(weights), np.array(norms)


def _evolve_one(payload):
    config, master_seed, index, backend = payload
    seed = child_seed(master_seed, index)
    inst = _make_instance(config, seed, index)
    cut = int(config.get("cut", inst.n // 2))
    schedule = IteSchedule(
        dtau=float(config.get("dtau", 0.05)),
        tau_max=float(config.get("tau_max", 12.0)),
        record_every=int(config.get("record_every", 1)),
    )
    rows = []
    base = [index, seed, inst.n, inst.m, inst.alpha, cut]
    results = {}
    if backend in ("mps", "both"):
        trace = ite_run(inst, schedule, _policy(config, renormalize=True), cut)
        results["mps"] = (trace.grid, trace.half_chain_entropy, trace.solution_weight,
                          trace.norm_sq, trace.max_bond)
    if backend in ("dense", "both"):
        taus, ent, weights, norms = _dense_ite_trace(inst, schedule, cut)
        results["dense"] = (taus, ent, weights, norms, [None] * len(taus))
    max_delta = None
    if backend == "both":
        max_delta = float(np.max(np.abs(results["mps"][1] - results["dense"][1])))
    for name, (taus, ent, weights, norms, bonds) in results.items():
        for i in range(len(taus)):
            rows.append(
                ["record", name, *base, taus[i], ent[i], norms[i],
                 weights[i], bonds[i], None, None, None]
            )
        peak = int(np.argmax(ent))
        rows.append(
            ["summary", name, *base, None, None, None, None, None,
             float(ent[peak]), float(taus[peak]), max_delta]
        )
    return rows, max_delta


def cmd_evolve(args) -> int:
    config = _load_config(args.config)
    backend = args.backend or config.get("backend", "mps")
    instances = _num_instances(config)
    payloads = [(config, args.seed, i, backend) for i in range(instances)]
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            outcomes = list(pool.map(_evolve_one, payloads))
    else:
        outcomes = [_evolve_one(p) for p in payloads]
    rows = [row for out, _ in outcomes for row in out]
    rows = [[_fmt(v) for v in row] for row in rows]
    out = Path(args.out or "evolve.csv")
    meta = None if args.no_timestamp else f"satmps evolve {_utc_stamp()} seed={args.seed}"
    write_csv(out, EVOLVE_HEADER, rows, meta)
    print(f"wrote {out}")
    tolerance = float(config.get("cross_check_tolerance", 1e-3))
    if backend == "both":
        worst = max(delta for _, delta in outcomes)
        if worst > tolerance:
            print(f"backend cross-check FAILED: max |dS| = {worst:.3e} > {tolerance}")
            return 1
        print(f"backend cross-check ok: max |dS| = {worst:.3e}")
    return 0


# -- flat -----------------------------------------------------------------------

FLAT_HEADER = [
    "row", "instance", "seed", "n", "m", "alpha", "cut", "m_applied",
    "entropy", "norm_sq", "count_estimate", "max_bond",
    "exact_count", "certificate", "min_fidelity",
]


def _flat_one(payload):
    config, master_seed, index, snapshot_dir = payload
    seed = child_seed(master_seed, index)
    inst = _make_instance(config, seed, index)
    cut = int(config.get("cut", inst.n // 2))
    policy = _policy(config, renormalize=False)
    trace, final = flat_run(inst, policy, cut)
    rows = []
    base = [index, seed, inst.n, inst.m, inst.alpha, cut]
    for i, m_applied in enumerate(trace.grid):
        rows.append(
            ["record", *base, int(m_applied), float(trace.half_chain_entropy[i]),
             float(trace.norm_sq[i]), float(trace.norm_sq[i] * 2.0**inst.n),
             int(trace.max_bond[i]), None, None, None]
        )
    exact = count_solutions(inst) if inst.n <= COUNT_LIMIT else None
    cert = verify_certificate(final, inst, float(config.get("tolerance", 1e-8)))
    rows.append(
        ["summary", *base, inst.m, None, final.norm_sq(), count_estimate(final),
         final.max_bond(), exact, cert["invariant"], cert["min_fidelity"]]
    )
    if snapshot_dir is not None:
        final.save(Path(snapshot_dir) / f"instance_{index:04d}.mps")
    mismatch = exact is not None and round(count_estimate(final)) != exact
    return rows, cert["invariant"], mismatch


def cmd_flat(args) -> int:
    config = _load_config(args.config)
    instances = _num_instances(config)
    snapshot_dir = config.get("snapshot_dir")
    if snapshot_dir:
        Path(snapshot_dir).mkdir(parents=True, exist_ok=True)
    payloads = [(config, args.seed, i, snapshot_dir) for i in range(instances)]
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            outcomes = list(pool.map(_flat_one, payloads))
    else:
        outcomes = [_flat_one(p) for p in payloads]
    rows = [[_fmt(v) for v in row] for out, _, _ in outcomes for row in out]
    out = Path(args.out or "flat.csv")
    meta = None if args.no_timestamp else f"satmps flat {_utc_stamp()} seed={args.seed}"
    write_csv(out, FLAT_HEADER, rows, meta)
    print(f"wrote {out}")
    truncated = config.get("chi") not in (None, "none", 0)
    bad = [i for i, (_, ok, mism) in enumerate(outcomes) if mism and not truncated]
    failed_cert = [i for i, (_, ok, _) in enumerate(outcomes) if not ok]
    if failed_cert:
        print(f"certificate failed for instances {failed_cert}")
    if bad:
        print(f"count cross-check FAILED for instances {bad}")
        return 1
    return 0


# -- models ---------------------------------------------------------------------


def cmd_models(args) -> int:
    config = _load_config(args.config)
    out_dir = Path(args.out or "model_curves")
    out_dir.mkdir(parents=True, exist_ok=True)
    kinds = config.get("kinds", ["constants", "diagonal", "reservoir", "rowmodel"])
    meta = None if args.no_timestamp else f"satmps models {_utc_stamp()} seed={args.seed}"

    if "constants" in kinds:
        consts = models.initial_schmidt_constants()
        rows = [
            ["alpha_star", f"{models.critical_alpha_star(3):.3f}"],
            ["alpha_sharp", f"{models.alpha_sharp():.3f}"],
            ["schmidt_A", f"{consts['A']:.4f}"],
            ["schmidt_B", f"{consts['B']:.4f}"],
        ]
        rows = [[name, value, "", "", ""] for name, value in rows]
        write_csv(out_dir / "constants.csv", ["name", "value", "seed", "n", "alpha"], rows, meta)

    if "diagonal" in kinds:
        spec = config.get("diagonal", {})
        rows = []
        for n in spec.get("n_list", [10, 14, 20]):
            for i, f in enumerate(spec.get("f_list", [0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9])):
                result = models.diagonal_model_entropy(models.DiagonalModelParams(n, f))
                seed = child_seed(args.seed, 1, n, i)
                samples = models.sample_combinatorial_entropy(
                    n, f, int(spec.get("samples", 20)), seed
                )
                rows.append([
                    _fmt(seed), n, "", "", _fmt(f), _fmt(result["mean"]),
                    _fmt(result["lower"]), _fmt(result["upper"]),
                    _fmt(float(samples.mean())), _fmt(float(samples.std(ddof=1))),
                ])
        write_csv(
            out_dir / "diagonal.csv",
            ["seed", "n", "m", "alpha", "f", "model_mean", "lower", "upper", "sample_mean", "sample_std"],
            rows, meta,
        )

    if "reservoir" in kinds:
        spec = config.get("reservoir", {})
        rows = []
        for n in spec.get("n_list", [14]):
            m_max = int(spec.get("m_max", math.ceil(5.2 * n)))
            for state in models.model_entropy_curve(n, m_max):
                rows.append([
                    "", n, state.m, _fmt(state.m / n), _fmt(state.correlations),
                    _fmt(state.log_dim), _fmt(state.entropy),
                ])
        write_csv(
            out_dir / "reservoir.csv",
            ["seed", "n", "m", "alpha", "correlations", "log_dim", "entropy"],
            rows, meta,
        )

    if "rowmodel" in kinds:
        spec = config.get("rowmodel", {})
        n = int(spec.get("n", 20))
        m_grid = spec.get(
            "m_grid", list(range(0, int(5.0 * n) + 1, max(1, n // 5)))
        )
        rows = []
        for corrections in (True, False):
            for j, m in enumerate(m_grid):
                seed = child_seed(args.seed, 2, int(corrections), j)
                result = models.row_model_simulate(
                    models.RowModelConfig(
                        n=n, m=int(m), samples=int(spec.get("samples", 4000)),
                        corrections=corrections, seed=seed,
                    )
                )
                rows.append([
                    _fmt(seed), n, int(m), _fmt(m / n), str(corrections).lower(),
                    _fmt(result.mean_log), _fmt(result.std_log),
                    _fmt(result.mean_log_surviving), _fmt(result.std_log_surviving),
                    _fmt(result.survival_fraction),
                ])
        write_csv(
            out_dir / "rowmodel.csv",
            ["seed", "n", "m", "alpha", "corrections", "mean_log", "std_log",
             "mean_log_surviving", "std_log_surviving", "survival_fraction"],
            rows, meta,
        )

    print(f"wrote model curves to {out_dir}")
    return 0


# -- magic ----------------------------------------------------------------------

MAGIC_HEADER = [
    "instance", "seed", "n", "m", "alpha", "tau", "order", "method",
    "value", "stderr", "samples",
]


def cmd_magic(args) -> int:
    from .evolution import ite_steps

    config = _load_config(args.config)
    instances = _num_instances(config)
    orders = config.get("orders", [1])
    num_samples = int(config.get("samples", 1000))
    chain_length = int(config.get("chain_length", 20000))
    schedule = IteSchedule(
        dtau=float(config.get("dtau", 0.05)),
        tau_max=float(config.get("tau_max", 6.0)),
        record_every=int(config.get("record_every", 10)),
    )
    policy = _policy(config, renormalize=True)
    rows = []
    for index in range(instances):
        seed = child_seed(args.seed, index)
        inst = _make_instance(config, seed, index)
        base = [index, seed, inst.n, inst.m, inst.alpha]
        exact_ok = inst.n <= 8 and config.get("exact", True)
        diag = build_energy_diagonal(inst) if exact_ok else None
        for tau, mps in ite_steps(inst, schedule, policy):
            for order in orders:
                if order == 1:
                    est = sample_m1(mps, num_samples, child_seed(seed, int(tau / schedule.dtau), 1))
                else:
                    est = markov_m2(mps, chain_length, seed=child_seed(seed, int(tau / schedule.dtau), 2))
                rows.append([*base, tau, order, "sampled" if order == 1 else "chain",
                             est.value, est.stderr, est.samples])
                if exact_ok:
                    state = ite_evolve(diag, tau)
                    rows.append([*base, tau, order, "exact",
                                 exact_stabilizer_entropy(state, order), 0.0, 0])
    rows = [[_fmt(v) for v in row] for row in rows]
    out = Path(args.out or "magic.csv")
    meta = None if args.no_timestamp else f"satmps magic {_utc_stamp()} seed={args.seed}"
    write_csv(out, MAGIC_HEADER, rows, meta)
    print(f"wrote {out}")
    return 0


# -- verify ---------------------------------------------------------------------


def cmd_verify(args) -> int:
    mps = Mps.load(args.snapshot)
    inst = parse_dimacs(Path(args.cnf).read_text())
    if inst.n != mps.n:
        print(f"size mismatch: snapshot n={mps.n}, instance n={inst.n}")
        return 2
    result = verify_certificate(mps, inst, args.tolerance)
    count = result["count"]
    print(
        f"invariant={str(result['invariant']).lower()} "
        f"count={count!r} rounded={round(count)} min_fidelity={result['min_fidelity']!r}"
    )
    return 0 if result["invariant"] else 1


# -- entry point ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="satmps",
        description="random 3-SAT through imaginary-time evolved matrix product states",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--seed", type=int, default=0, help="master seed")
        p.add_argument("--out", help="output path")
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--no-timestamp", action="store_true",
                       help="omit the timestamped comment line (byte-stable output)")

    p = sub.add_parser("generate", help="emit DIMACS instances plus a manifest")
    common(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("evolve", help="imaginary-time evolution traces")
    common(p)
    p.add_argument("--backend", choices=["mps", "dense", "both"])
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("flat", help="projector protocol traces and certificates")
    common(p)
    p.set_defaults(func=cmd_flat)

    p = sub.add_parser("models", help="statistical model curves")
    common(p)
    p.set_defaults(func=cmd_models)

    p = sub.add_parser("magic", help="stabilizer entropy sweeps")
    common(p)
    p.set_defaults(func=cmd_magic)

    p = sub.add_parser("verify", help="check an MPS snapshot as a #SAT certificate")
    p.add_argument("snapshot")
    p.add_argument("cnf")
    p.add_argument("--tolerance", type=float, default=1e-8)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
