"""Command-line front end: instance generation, exact oracles, variational
sweeps, and hardware resource estimates.

Exit codes: 0 success, 2 for validation problems (bad flags, malformed or
inconsistent config), 1 for runtime failures (I/O, compute errors).

Sweeps are driven by a TOML config; every CLI flag listed under a command
overrides the matching config entry. Outputs under --out-dir:

    records/<algorithm>_n<k>_a<alpha>_s<seed>.json   per-run records
    runs.csv      per-layer rows (seconds column is wall-clock: the one
                  column exempt from the byte-identical determinism rule)
    summary.csv   per-(n, alpha, algorithm, layer) stats across seeds;
                  byte-identical across repeat invocations
    estimates.csv resource rows per device (estimate command)
"""

from __future__ import annotations

import argparse
import json
import math
import sys

try:
    import tomllib
except ModuleNotFoundError:  # stdlib only from 3.11 on
    import tomli as tomllib
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

from .adapt import run_adapt_qaoa
from .exact import branch_and_bound_min, brute_force_min
from .hardware import (
    builtin_device_profiles,
    estimate_resources,
    load_device_profiles,
    write_estimates_csv,
)
from .optimizer import OptimizerConfig
from .problem import generate_instance, load_instance, save_instance
from .qaoa import (
    RunConfig,
    approximation_ratio,
    run_standard_qaoa,
    save_record,
    write_records_csv,
)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_VALIDATION = 2


class ValidationFailure(Exception):
    """Bad user input (flags or config); maps to exit code 2."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Full sweep description; defaults reproduce the headline protocol
    (sizes 6/10/14, alphas 0.2/0.6, 10 seeds, 30 layers, 10^4 shots,
    1500-iteration optimizer cap)."""

    sizes: tuple[int, ...] = (6, 10, 14)
    alphas: tuple[float, ...] = (0.2, 0.6)
    seeds: tuple[int, ...] = tuple(range(1, 11))
    algorithms: tuple[str, ...] = ("standard", "adapt")
    layers: int = 30
    mode: str = "exact"
    shots: int = 10_000
    gamma0: float = 0.01
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    devices: tuple[str, ...] = (
        "ibm_brisbane",
        "ibm_brisbane_square",
        "ibm_brisbane_alltoall",
        "quantinuum_h2",
    )
    estimate_layers: int = 30
    estimate_iterations: int = 1500
    estimate_shots: int = 10_000

    def run_config(self) -> RunConfig:
        return RunConfig(
            mode=self.mode, shots=self.shots, optimizer=self.optimizer, gamma0=self.gamma0
        )


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ValidationFailure(message)


def _int_tuple(doc, section, key, minimum) -> tuple[int, ...]:
    values = doc[section][key]
    _require(isinstance(values, list) and values, f"[{section}].{key} must be a non-empty list")
    out = []
    for v in values:
        _require(isinstance(v, int) and v >= minimum, f"[{section}].{key} entries must be integers >= {minimum}")
        out.append(v)
    return tuple(out)


def load_config(path) -> ExperimentConfig:
    """Parse and validate a TOML sweep config; unknown keys are errors."""
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ValidationFailure(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ValidationFailure(f"config is not valid TOML: {exc}") from exc

    known = {
        "problem": {"sizes", "alphas", "seeds"},
        "run": {"algorithms", "layers", "mode", "shots", "gamma0"},
        "optimizer": {
            "max_iterations", "x_tolerance", "f_tolerance", "bracket_bound",
            "max_evaluations",
        },
        "estimate": {"devices", "layers", "iterations", "shots"},
    }
    for section, body in doc.items():
        _require(section in known, f"unknown config section [{section}]")
        _require(isinstance(body, dict), f"[{section}] must be a table")
        for key in body:
            _require(key in known[section], f"unknown key [{section}].{key}")

    cfg = ExperimentConfig()
    if "problem" in doc:
        p = doc["problem"]
        if "sizes" in p:
            cfg = replace(cfg, sizes=_int_tuple(doc, "problem", "sizes", 1))
        if "alphas" in p:
            alphas = p["alphas"]
            _require(isinstance(alphas, list) and alphas, "[problem].alphas must be a non-empty list")
            for a in alphas:
                _require(isinstance(a, (int, float)) and 0.0 <= float(a) <= 1.0,
                         "[problem].alphas entries must lie in [0, 1]")
            cfg = replace(cfg, alphas=tuple(float(a) for a in alphas))
        if "seeds" in p:
            cfg = replace(cfg, seeds=_int_tuple(doc, "problem", "seeds", 0))
    if "run" in doc:
        r = doc["run"]
        if "algorithms" in r:
            algos = r["algorithms"]
            _require(isinstance(algos, list) and algos, "[run].algorithms must be a non-empty list")
            for a in algos:
                _require(a in ("standard", "adapt"), f"[run].algorithms entries must be standard/adapt, got {a!r}")
            cfg = replace(cfg, algorithms=tuple(algos))
        if "layers" in r:
            _require(isinstance(r["layers"], int) and r["layers"] >= 0, "[run].layers must be an integer >= 0")
            cfg = replace(cfg, layers=r["layers"])
        if "mode" in r:
            _require(r["mode"] in ("exact", "shots"), "[run].mode must be 'exact' or 'shots'")
            cfg = replace(cfg, mode=r["mode"])
        if "shots" in r:
            _require(isinstance(r["shots"], int) and r["shots"] >= 1, "[run].shots must be an integer >= 1")
            cfg = replace(cfg, shots=r["shots"])
        if "gamma0" in r:
            g = r["gamma0"]
            _require(isinstance(g, (int, float)) and float(g) > 0, "[run].gamma0 must be > 0")
            cfg = replace(cfg, gamma0=float(g))
    if "optimizer" in doc:
        o = doc["optimizer"]
        kwargs = {}
        for key, attr, kind, check in (
            ("max_iterations", "max_iterations", int, lambda v: v >= 1),
            ("x_tolerance", "x_tolerance", float, lambda v: v > 0),
            ("f_tolerance", "f_tolerance", float, lambda v: v > 0),
            ("bracket_bound", "bracket_bound", float, lambda v: v > 0),
            ("max_evaluations", "max_evaluations", int, lambda v: v >= 1),
        ):
            if key in o:
                v = o[key]
                _require(isinstance(v, (int, float)) and check(kind(v)),
                         f"[optimizer].{key} is out of range")
                kwargs[attr] = kind(v)
        try:
            cfg = replace(cfg, optimizer=OptimizerConfig(**kwargs))
        except ValueError as exc:
            raise ValidationFailure(f"[optimizer]: {exc}") from exc
    if "estimate" in doc:
        e = doc["estimate"]
        if "devices" in e:
            devs = e["devices"]
            _require(isinstance(devs, list) and devs, "[estimate].devices must be a non-empty list")
            cfg = replace(cfg, devices=tuple(str(d) for d in devs))
        if "layers" in e:
            _require(isinstance(e["layers"], int) and e["layers"] >= 1, "[estimate].layers must be >= 1")
            cfg = replace(cfg, estimate_layers=e["layers"])
        if "iterations" in e:
            _require(isinstance(e["iterations"], int) and e["iterations"] >= 1, "[estimate].iterations must be >= 1")
            cfg = replace(cfg, estimate_iterations=e["iterations"])
        if "shots" in e:
            _require(isinstance(e["shots"], int) and e["shots"] >= 1, "[estimate].shots must be >= 1")
            cfg = replace(cfg, estimate_shots=e["shots"])
    return cfg


def _parse_int_list(text: str, what: str) -> tuple[int, ...]:
    try:
        return tuple(int(tok) for tok in text.split(",") if tok.strip() != "")
    except ValueError as exc:
        raise ValidationFailure(f"--{what} must be a comma-separated integer list") from exc


def _parse_float_list(text: str, what: str) -> tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in text.split(",") if tok.strip() != "")
    except ValueError as exc:
        raise ValidationFailure(f"--{what} must be a comma-separated number list") from exc


# -- commands -------------------------------------------------------------------

def cmd_gen(args) -> int:
    _require(args.n >= 1, "--n must be >= 1")
    _require(0.0 <= args.alpha <= 1.0, "--alpha must lie in [0, 1]")
    inst = generate_instance(args.n, args.seed, alpha=args.alpha)
    if args.out:
        save_instance(inst, args.out)
    else:
        from .problem import instance_to_json_dict

        json.dump(instance_to_json_dict(inst), sys.stdout, indent=2)
        sys.stdout.write("\n")
    return EXIT_OK


def cmd_oracle(args) -> int:
    if args.instance:
        inst = load_instance(args.instance)
    else:
        _require(args.n is not None and args.seed is not None,
                 "oracle needs --instance or both --n and --seed")
        _require(args.n >= 1, "--n must be >= 1")
        _require(0.0 <= args.alpha <= 1.0, "--alpha must lie in [0, 1]")
        inst = generate_instance(args.n, args.seed, alpha=args.alpha)
    _require(args.gap_tolerance >= 0.0, "--gap-tolerance must be >= 0")
    if args.method == "brute-force":
        sol = brute_force_min(inst)
    else:
        sol = branch_and_bound_min(inst, gap_tolerance=args.gap_tolerance)
    doc = {
        "n": inst.n,
        "alpha": inst.alpha,
        "seed": inst.seed,
        "minimizer": list(sol.minimizer),
        "value": sol.value,
        "method": sol.method,
        "nodes": sol.nodes,
        "gap_at_termination": sol.gap_at_termination,
    }
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    else:
        json.dump(doc, sys.stdout, indent=2)
        sys.stdout.write("\n")
    return EXIT_OK


def _apply_solve_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    if args.sizes:
        cfg = replace(cfg, sizes=_parse_int_list(args.sizes, "sizes"))
    if args.alphas:
        alphas = _parse_float_list(args.alphas, "alphas")
        for a in alphas:
            _require(0.0 <= a <= 1.0, "--alphas entries must lie in [0, 1]")
        cfg = replace(cfg, alphas=alphas)
    if args.seeds:
        cfg = replace(cfg, seeds=_parse_int_list(args.seeds, "seeds"))
    if args.layers is not None:
        _require(args.layers >= 0, "--layers must be >= 0")
        cfg = replace(cfg, layers=args.layers)
    if args.mode:
        cfg = replace(cfg, mode=args.mode)
    if args.shots is not None:
        _require(args.shots >= 1, "--shots must be >= 1")
        cfg = replace(cfg, shots=args.shots)
    if args.algorithm:
        cfg = replace(
            cfg,
            algorithms=("standard", "adapt") if args.algorithm == "both" else (args.algorithm,),
        )
    return cfg


def summary_rows(records) -> list[str]:
    """Aggregate ratio/cost statistics across seeds, keyed and sorted by
    (n, alpha, algorithm, layer). Layer 0 is the unoptimized |+>^n point."""
    groups: dict[tuple, list[tuple[float, float]]] = {}
    for record in records:
        key0 = (record.n, record.alpha, record.algorithm, 0)
        groups.setdefault(key0, []).append(
            (record.c0, approximation_ratio(record.c0, record.c_exact))
        )
        for rec in record.layers:
            key = (record.n, record.alpha, record.algorithm, rec.layer)
            groups.setdefault(key, []).append((rec.cost, rec.ratio))
    rows = []
    for (n, alpha, algorithm, layer) in sorted(groups, key=lambda k: (k[0], k[1], k[2], k[3])):
        vals = groups[(n, alpha, algorithm, layer)]
        costs = [c for c, _ in vals]
        ratios = [r for _, r in vals]
        rows.append(
            f"{n},{alpha!r},{algorithm},{layer},{len(vals)},"
            f"{sum(costs) / len(costs)!r},{sum(ratios) / len(ratios)!r},"
            f"{min(ratios)!r},{max(ratios)!r}"
        )
    return rows


SUMMARY_CSV_HEADER = "n,alpha,algorithm,layer,runs,mean_cost,mean_ratio,min_ratio,max_ratio"


def cmd_solve(args) -> int:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    cfg = _apply_solve_overrides(cfg, args)
    out_dir = Path(args.out_dir)
    records_dir = out_dir / "records"
    records_dir.mkdir(parents=True, exist_ok=True)
    run_cfg = cfg.run_config()
    records = []
    for n in cfg.sizes:
        for alpha in cfg.alphas:
            for seed in cfg.seeds:
                inst = generate_instance(n, seed, alpha=alpha)
                for algorithm in cfg.algorithms:
                    if algorithm == "standard":
                        record = run_standard_qaoa(inst, cfg.layers, config=run_cfg, seed=seed)
                    else:
                        record = run_adapt_qaoa(inst, cfg.layers, config=run_cfg, seed=seed)
                    records.append(record)
                    save_record(
                        record,
                        records_dir / f"{algorithm}_n{n}_a{alpha}_s{seed}.json",
                    )
                    if not args.quiet:
                        final = record.layers[-1].ratio if record.layers else math.nan
                        print(
                            f"solve {algorithm} n={n} alpha={alpha} seed={seed}: "
                            f"r_{record.total_layers}={final:.4f}"
                        )
    write_records_csv(records, out_dir / "runs.csv")
    with open(out_dir / "summary.csv", "w") as fh:
        fh.write(SUMMARY_CSV_HEADER + "\n")
        for row in summary_rows(records):
            fh.write(row + "\n")
    return EXIT_OK


def cmd_estimate(args) -> int:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    if args.layers is not None:
        _require(args.layers >= 1, "--layers must be >= 1")
        cfg = replace(cfg, estimate_layers=args.layers)
    if args.iterations is not None:
        _require(args.iterations >= 1, "--iterations must be >= 1")
        cfg = replace(cfg, estimate_iterations=args.iterations)
    if args.shots is not None:
        _require(args.shots >= 1, "--shots must be >= 1")
        cfg = replace(cfg, estimate_shots=args.shots)
    if args.sizes:
        cfg = replace(cfg, sizes=_parse_int_list(args.sizes, "sizes"))
    profiles = builtin_device_profiles()
    if args.devices_file:
        profiles.update(load_device_profiles(args.devices_file))
    device_names = tuple(args.device) if args.device else cfg.devices
    for name in device_names:
        _require(name in profiles, f"unknown device {name!r}; known: {sorted(profiles)}")
    seed = args.seed if args.seed is not None else cfg.seeds[0]
    alpha = cfg.alphas[0]
    estimates = []
    for n in cfg.sizes:
        inst = generate_instance(n, seed, alpha=alpha)
        for name in device_names:
            profile = profiles[name]
            _require(
                n <= profile.topology.num_nodes,
                f"n={n} exceeds the {name} node count {profile.topology.num_nodes}",
            )
            est = estimate_resources(
                inst,
                profile,
                layers=cfg.estimate_layers,
                iterations=cfg.estimate_iterations,
                shots=cfg.estimate_shots,
                seed=seed,
            )
            estimates.append(est)
            if not args.quiet:
                print(
                    f"estimate {name} n={n}: swaps={est.swaps} "
                    f"t_total={est.total_time_s:.3e} s  e_1layer={est.error_probability:.4f}"
                )
    out = Path(args.out) if args.out else Path(args.out_dir) / "estimates.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    write_estimates_csv(estimates, out)
    return EXIT_OK


# -- argument parsing -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fsqaoa",
        description="Variational feature selection on QUBO instances with "
        "hardware resource estimation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="generate a random instance as JSON")
    p_gen.add_argument("--n", type=int, required=True)
    p_gen.add_argument("--seed", type=int, required=True)
    p_gen.add_argument("--alpha", type=float, default=0.5)
    p_gen.add_argument("--out", default=None, help="output path (default stdout)")
    p_gen.set_defaults(func=cmd_gen)

    p_oracle = sub.add_parser("oracle", help="exact minimum of an instance")
    p_oracle.add_argument("--instance", default=None, help="instance JSON path")
    p_oracle.add_argument("--n", type=int, default=None)
    p_oracle.add_argument("--seed", type=int, default=None)
    p_oracle.add_argument("--alpha", type=float, default=0.5)
    p_oracle.add_argument(
        "--method", choices=("brute-force", "branch-and-bound"), default="brute-force"
    )
    p_oracle.add_argument("--gap-tolerance", type=float, default=0.0)
    p_oracle.add_argument("--out", default=None, help="output path (default stdout)")
    p_oracle.set_defaults(func=cmd_oracle)

    p_solve = sub.add_parser("solve", help="run the variational sweep")
    p_solve.add_argument("--config", default=None, help="TOML sweep config")
    p_solve.add_argument("--out-dir", required=True)
    p_solve.add_argument("--sizes", default=None, help="override [problem].sizes, e.g. 6,10")
    p_solve.add_argument("--alphas", default=None, help="override [problem].alphas")
    p_solve.add_argument("--seeds", default=None, help="override [problem].seeds")
    p_solve.add_argument("--layers", type=int, default=None)
    p_solve.add_argument("--mode", choices=("exact", "shots"), default=None)
    p_solve.add_argument("--shots", type=int, default=None)
    p_solve.add_argument(
        "--algorithm", choices=("standard", "adapt", "both"), default=None
    )
    p_solve.add_argument("--quiet", action="store_true")
    p_solve.set_defaults(func=cmd_solve)

    p_est = sub.add_parser("estimate", help="hardware time/error estimates")
    p_est.add_argument("--config", default=None, help="TOML sweep config")
    p_est.add_argument("--device", action="append", default=None,
                       help="device name (repeatable; default: config devices)")
    p_est.add_argument("--devices-file", default=None,
                       help="JSON file with extra device profiles")
    p_est.add_argument("--sizes", default=None, help="override problem sizes")
    p_est.add_argument("--seed", type=int, default=None)
    p_est.add_argument("--layers", type=int, default=None)
    p_est.add_argument("--iterations", type=int, default=None)
    p_est.add_argument("--shots", type=int, default=None)
    p_est.add_argument("--out", default=None, help="CSV output path")
    p_est.add_argument("--out-dir", default=".", help="directory for estimates.csv")
    p_est.add_argument("--quiet", action="store_true")
    p_est.set_defaults(func=cmd_estimate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ValueError, OSError, KeyError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
