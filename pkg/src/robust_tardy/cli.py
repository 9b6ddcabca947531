"""Command-line front end: ``solve``, ``verify``, ``gen`` and ``bench``.

Exit codes: 0 ok, 1 verification failure or solver disagreement, 2 bad
input, 3 no exact algorithm within the configured caps.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable

from . import common_due_date, fpt, multi_due_date, oracle, xp
from .generators import (
    DUE_DATE_STYLES,
    KSumInstance,
    PartitionInstance,
    gen_ksum_reduction,
    gen_partition_reduction,
    gen_random,
)
from .model import CapExceeded, EarlySetSolution, Instance, InstanceError, evaluate_schedule, validate_instance

FORMAT_VERSION = 1
EXIT_OK, EXIT_MISMATCH, EXIT_INPUT, EXIT_CAP = 0, 1, 2, 3
ALGORITHMS = ("auto", "oracle", "xp", "fpt", "common-dd", "multi-dd", "moore")
CAP_NAMES = {"gamma": "gamma", "k": "k", "oracle-n": "oracle_n", "states": "states", "due-dates": "due_dates"}


@dataclass(frozen=True)
class Caps:
    gamma: int = xp.DEFAULT_MAX_GAMMA
    k: int = fpt.DEFAULT_MAX_K
    oracle_n: int = oracle.DEFAULT_MAX_N
    states: int = multi_due_date.DEFAULT_MAX_STATES
    due_dates: int = multi_due_date.DEFAULT_MAX_CLASSES


@dataclass(frozen=True)
class SolveConfig:
    algo: str = "auto"
    caps: Caps = field(default_factory=Caps)
    strict_paper_step10: bool = False
    threads: int = 1


def parse_caps(text: str) -> Caps:
    caps = Caps()
    if not text:
        return caps
    updates = {}
    for item in text.split(","):
        name, sep, value = item.partition("=")
        name = name.strip()
        if not sep or name not in CAP_NAMES:
            raise argparse.ArgumentTypeError(f"bad cap {item!r}; known caps: {', '.join(CAP_NAMES)}")
        try:
            number = int(value)
        except ValueError:
            raise argparse.ArgumentTypeError(f"cap {name} needs an integer") from None
        if number <= 0:
            raise argparse.ArgumentTypeError(f"cap {name} must be positive")
        updates[CAP_NAMES[name]] = number
    return replace(caps, **updates)


def load_instance(path: str | Path) -> Instance:
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise InstanceError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InstanceError(f"{path}: invalid JSON ({exc.msg})") from None
    return validate_instance(raw)


def instance_digest(inst: Instance) -> str:
    blob = json.dumps(inst.to_dict(), sort_keys=True, separators=(",", ":"))
    return "sha256:" + hashlib.sha256(blob.encode()).hexdigest()


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def parameter_report(inst: Instance, caps: Caps) -> dict[str, Any]:
    return {
        "n": inst.n,
        "gamma": inst.budget,
        "k": inst.num_uncertain,
        "v_d": len(inst.due_dates),
        "caps": {"gamma": caps.gamma, "k": caps.k, "oracle-n": caps.oracle_n, "states": caps.states},
    }


def _multi_dd_fits(inst: Instance, caps: Caps) -> bool:
    v_d = len(inst.due_dates)
    return v_d <= caps.due_dates and multi_due_date.state_bound(inst) <= caps.states


def applicable(inst: Instance, caps: Caps) -> list[str]:
    """Exact algorithms that accept ``inst`` within ``caps``, in auto-policy order."""
    k, g, v_d = inst.num_uncertain, inst.budget, len(inst.due_dates)
    algos = []
    if g >= k:
        algos.append("moore")
    if v_d <= 1:
        algos.append("common-dd")
    if k <= caps.k:
        algos.append("fpt")
    if g <= caps.gamma:
        algos.append("xp")
    if _multi_dd_fits(inst, caps):
        algos.append("multi-dd")
    if inst.n <= caps.oracle_n:
        algos.append("oracle")
    if g == 0 < k:
        # nothing can deviate; listed last so the auto policy order is unchanged
        algos.append("moore")
    return algos


def run_algorithm(inst: Instance, algo: str, config: SolveConfig) -> EarlySetSolution:
    caps = config.caps
    if algo == "auto":
        choices = applicable(inst, caps)
        if not choices:
            raise CapExceeded("auto", inst.n, caps.oracle_n)
        algo = choices[0]
    solvers: dict[str, Callable[[], EarlySetSolution]] = {
        "oracle": lambda: oracle.solve_bruteforce(inst, caps.oracle_n).best,
        "xp": lambda: xp.solve_xp(inst, caps.gamma),
        "fpt": lambda: fpt.solve_fpt(
            inst, caps.k, strict=config.strict_paper_step10, workers=config.threads
        ),
        "common-dd": lambda: common_due_date.solve_common_due_date(inst),
        "multi-dd": lambda: multi_due_date.solve_multi_due_date(inst, caps.due_dates, caps.states),
        "moore": lambda: fpt.solve_collapsed(inst),
    }
    sol = solvers[algo]()
    sol.info["algorithm"] = algo
    return sol


def solution_record(inst: Instance, sol: EarlySetSolution, wall_time: float | None = None) -> dict[str, Any]:
    record = {
        "format": FORMAT_VERSION,
        "instance_digest": instance_digest(inst),
        "algorithm": sol.info.get("algorithm"),
        "objective": sol.objective,
        "early": sorted(sol.early),
        "sigma": list(sol.sigma),
        "certificate": [{"id": j, "worst_completion": c} for j, c in sol.certificate.items()],
    }
    if "mu" in sol.info:
        record["mu"] = sol.info["mu"]
    if wall_time is not None:
        record["wall_time_s"] = round(wall_time, 6)
    return record


def verify_record(inst: Instance, record: dict[str, Any]) -> tuple[bool, str]:
    """Re-evaluate the recorded permutation; the tardy set and objective must match."""
    digest = record.get("instance_digest")
    if digest is not None and digest != instance_digest(inst):
        return False, "instance digest does not match"
    try:
        ev = evaluate_schedule(inst, record["sigma"])
    except (KeyError, TypeError, ValueError) as exc:
        return False, f"bad permutation: {exc}"
    early = set(record.get("early", []))
    for j in ev.sigma:
        claimed_tardy = j not in early
        if bool(ev.tardy_flag[j]) != claimed_tardy:
            state = "tardy" if ev.tardy_flag[j] else "early"
            return False, f"job {j} is {state} (worst completion {ev.worst_completion[j]}, due {inst.job(j).d})"
    if record.get("objective") != ev.objective:
        return False, f"objective {record.get('objective')} but schedule has {ev.objective} tardy jobs"
    return True, f"ok: objective {ev.objective}"


def cmd_solve(args) -> int:
    inst = load_instance(args.input)
    config = SolveConfig(args.algo, args.caps, args.strict_paper_step10, args.threads)
    start = time.perf_counter()
    try:
        sol = run_algorithm(inst, args.algo, config)
    except CapExceeded as exc:
        report = parameter_report(inst, config.caps)
        report["error"] = "no tractable exact algorithm for these parameters" if args.algo == "auto" else str(exc)
        sys.stderr.write(dumps(report))
        return EXIT_CAP
    except InstanceError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    elapsed = time.perf_counter() - start if args.timing else None
    _emit(dumps(solution_record(inst, sol, elapsed)), args.output)
    return EXIT_OK


def cmd_verify(args) -> int:
    inst = load_instance(args.instance)
    try:
        record = json.loads(Path(args.solution).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"error: cannot read solution: {exc}\n")
        return EXIT_INPUT
    ok, message = verify_record(inst, record)
    print(("PASS " if ok else "FAIL ") + message)
    return EXIT_OK if ok else EXIT_MISMATCH


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def cmd_gen(args) -> int:
    if args.kind == "ksum":
        gen = gen_ksum_reduction(KSumInstance(tuple(args.a), args.k, args.b), args.m)
    elif args.kind == "partition":
        gen = gen_partition_reduction(PartitionInstance(tuple(args.a)), args.m)
    else:
        if args.count > 1:
            outdir = Path(args.output or ".")
            outdir.mkdir(parents=True, exist_ok=True)
            for t in range(args.count):
                gen = _random_from_args(args, args.seed + t)
                (outdir / f"random_{args.seed + t:06d}.json").write_text(dumps(gen.to_dict()))
            return EXIT_OK
        gen = _random_from_args(args, args.seed)
    _emit(dumps(gen.to_dict()), args.output)
    return EXIT_OK


def _random_from_args(args, seed: int):
    return gen_random(
        n=args.n,
        gamma=args.gamma,
        max_p=args.max_p,
        max_dev=args.max_dev,
        due_date_style=args.style,
        k_uncertain=args.k_uncertain,
        seed=seed,
        max_d=args.max_d,
        num_due_dates=args.num_due_dates,
    )


def bench_instance(path: str, config: SolveConfig, timing: bool) -> list[list[str]]:
    """Rows ``[instance, algo, objective, agreement, time]`` for every applicable algorithm."""
    name = Path(path).name
    try:
        inst = load_instance(path)
    except InstanceError as exc:
        return [[name, "-", "", f"error: {exc}", ""]]
    results = []
    for algo in applicable(inst, config.caps):
        start = time.perf_counter()
        sol = run_algorithm(inst, algo, replace(config, threads=1))
        elapsed = time.perf_counter() - start
        results.append((algo, sol.objective, elapsed))
    agreement = "ok" if len({r[1] for r in results}) <= 1 else "MISMATCH"
    return [
        [name, algo, str(obj), agreement, f"{elapsed:.6f}" if timing else ""] for algo, obj, elapsed in results
    ]


def _bench_job(payload):
    return bench_instance(*payload)


def cmd_bench(args) -> int:
    corpus = Path(args.corpus)
    if not corpus.is_dir():
        sys.stderr.write(f"error: {corpus} is not a directory\n")
        return EXIT_INPUT
    paths = sorted(str(p) for p in corpus.glob("*.json"))
    config = SolveConfig("auto", args.caps, args.strict_paper_step10, 1)
    payloads = [(p, config, args.timing) for p in paths]
    if args.threads > 1 and len(paths) > 1:
        with ProcessPoolExecutor(max_workers=args.threads) as pool:
            blocks = list(pool.map(_bench_job, payloads))
    else:
        blocks = [_bench_job(p) for p in payloads]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["format", "instance", "algo", "objective", "agreement", "time_s"])
    failed = False
    for rows in blocks:
        for row in rows:
            failed |= row[3] != "ok"
            writer.writerow([FORMAT_VERSION] + row)
    _emit(buf.getvalue(), args.output)
    return EXIT_MISMATCH if failed else EXIT_OK


def _emit(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="robust-tardy", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def solver_flags(p):
        p.add_argument("--caps", type=parse_caps, default=Caps(), help="e.g. gamma=4,k=20,oracle-n=22,states=10000000")
        p.add_argument("--strict-paper-step10", action="store_true", help="literal slack bound in the FPT sweep")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--timing", action="store_true", help="include wall times (makes output nondeterministic)")
        p.add_argument("--output", "-o")

    p = sub.add_parser("solve", help="solve an instance file")
    p.add_argument("input_pos", nargs="?", metavar="INPUT")
    p.add_argument("--input", "-i")
    p.add_argument("--algo", choices=ALGORITHMS, default="auto")
    solver_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="re-check a solution record against its instance")
    p.add_argument("instance")
    p.add_argument("solution")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("gen", help="write a generated instance")
    gsub = p.add_subparsers(dest="kind", required=True)
    g = gsub.add_parser("ksum")
    g.add_argument("--a", type=_int_list, required=True)
    g.add_argument("--k", type=int, required=True)
    g.add_argument("--b", type=int, required=True)
    g.add_argument("--m", type=int)
    g.add_argument("--output", "-o")
    g = gsub.add_parser("partition")
    g.add_argument("--a", type=_int_list, required=True)
    g.add_argument("--m", type=int)
    g.add_argument("--output", "-o")
    g = gsub.add_parser("random")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--gamma", type=int, default=1)
    g.add_argument("--max-p", type=int, default=10)
    g.add_argument("--max-dev", type=int, default=10)
    g.add_argument("--max-d", type=int)
    g.add_argument("--style", choices=DUE_DATE_STYLES, default="uniform")
    g.add_argument("--num-due-dates", type=int, default=3)
    g.add_argument("--k-uncertain", type=int)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--count", type=int, default=1, help="write COUNT files into the --output directory")
    g.add_argument("--output", "-o")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="run every applicable algorithm on a corpus directory")
    p.add_argument("corpus")
    solver_flags(p)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    if args.command == "solve":
        args.input = args.input or args.input_pos
        if not args.input:
            parser.error("solve needs an input file")
    try:
        return args.func(args)
    except InstanceError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
