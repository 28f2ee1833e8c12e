"""``ttscore`` command line: score, compare, generate, reduce-3cnf, emit-cnf, validate.

Reports go to stdout as JSON (CSV for ``compare``); a short human summary
goes to stderr.  Failures print ``{"error": {...}}`` to stdout and exit
nonzero.
"""

from __future__ import annotations

import argparse
import csv
import json
import random
import sys
from pathlib import Path

from ttscore import __version__
from ttscore.encoder.dimacs import dumps_weighted_dimacs
from ttscore.encoder.exact import weighted_formula
from ttscore.errors import (
    CapExceeded,
    ConsistencyError,
    ScenarioValidationError,
    TTScoreError,
)
from ttscore.estimator import default_workers
from ttscore.hardness import parse_dimacs_3cnf, reduce_3cnf
from ttscore.model.generate import generate_random_scenario
from ttscore.model.io import dumps_scenario, load_scenario
from ttscore.model.network import FaultModel, validate_scenario
from ttscore.report import METHODS, run_method
from ttscore.scheme.validation import validate_scheme
from ttscore.simulator.outcomes import simulate

EXIT_INPUT = 2
EXIT_CAP = 3
EXIT_INTERNAL = 4


def _write(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _say(msg: str) -> None:
    print(msg, file=sys.stderr)


def _method_kwargs(args) -> dict:
    return dict(epsilon=args.epsilon, delta=args.delta, n=args.n, seed=args.seed,
                workers=args.workers, cap=args.cap)


def _dump_trace(s, seed: int) -> None:
    faults, outcome = simulate(s, random.Random(seed))
    ids = s.message_ids
    _say(f"# trace seed={seed}; slot: positions ({', '.join(ids)}) | active edges")
    for i, conf in enumerate(outcome.configurations):
        active = "" if i == 0 else " | " + ",".join(sorted(faults.active[i - 1]))
        _say(f"{i}: " + " ".join(conf[m] for m in ids) + active)


def cmd_score(args) -> int:
    s = load_scenario(args.scenario)
    rep = run_method(s, args.method, path=args.scenario, **_method_kwargs(args))
    print(rep.to_json())
    if rep.score is not None:
        _say(f"{args.method}: score {rep.score:.6f} ({rep.duration_s:.3f} s)")
    else:
        lo, hi = rep.interval
        _say(f"{args.method}: score in [{lo:.6f}, {hi:.6f}] ({rep.duration_s:.3f} s)")
    if args.trace:
        _dump_trace(s, args.seed)
    return 0


def cmd_compare(args) -> int:
    s = load_scenario(args.scenario)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    unknown = [m for m in methods if m not in METHODS]
    if not methods or unknown:
        raise argparse.ArgumentTypeError(f"--methods: unknown method(s) {unknown}; choose from {METHODS}")
    rows = [run_method(s, m, path=args.scenario, **_method_kwargs(args)) for m in methods]
    ref = rows[0].value
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["method", "score", "lower", "upper", "error", "duration_s"])
    for rep in rows:
        lo, hi = rep.interval if rep.interval else ("", "")
        score = "" if rep.score is None else repr(rep.score)
        w.writerow([rep.method, score, lo, hi, repr(abs(rep.value - ref)), f"{rep.duration_s:.6f}"])
        _say(f"{rep.method:12s} {rep.value:.6f}  error {abs(rep.value - ref):.2e}")
    return 0


def cmd_generate(args) -> int:
    s = generate_random_scenario(
        args.vertices, args.seed, args.messages, n_edges=args.edges, timeout=args.timeout,
        guarantee=args.guarantee, fault_model=FaultModel(args.fault_model),
        p_crash=args.p_crash, p_omit=args.p_omit,
    )
    _write(dumps_scenario(s), args.out)
    _say(f"generated {len(s.network.vertices)} vertices, {len(s.network.edges)} edges, "
         f"{len(s.messages)} messages, t={s.timeout}")
    return 0


def cmd_reduce_3cnf(args) -> int:
    f = parse_dimacs_3cnf(Path(args.cnf).read_text(encoding="utf-8"))
    s = reduce_3cnf(f)
    _write(dumps_scenario(s), args.out)
    _say(f"reduced {f.n} variables, {len(f.clauses)} clauses: score = 1 - #SAT / {2 ** f.n}")
    return 0


def cmd_emit_cnf(args) -> int:
    s = load_scenario(args.scenario)
    wf = weighted_formula(s, goal=args.goal)
    _write(dumps_weighted_dimacs(wf), args.out)
    _say(f"{wf.cnf.num_vars} variables, {len(wf.cnf.clauses)} clauses, gamma {wf.gamma:.6g}")
    return 0


def cmd_validate(args) -> int:
    s = load_scenario(args.scenario, validate=False)
    problems = validate_scenario(s)
    complete = True
    if not problems:
        rep = validate_scheme(s.scheme, s, seed=args.seed)
        problems, complete = rep.violations, rep.complete
    print(json.dumps({"valid": not problems, "complete": complete, "violations": problems}, indent=2))
    _say(("valid" if not problems else f"{len(problems)} violation(s)")
         + ("" if complete else " (sampled, not exhaustive)"))
    return 0 if not problems else 1


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _add_method_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--epsilon", type=float, default=0.01, help="error bound (monte-carlo, iterative)")
    p.add_argument("--delta", type=float, default=0.99, help="confidence (monte-carlo)")
    p.add_argument("--n", type=_positive_int, default=None, help="sample count, overriding epsilon/delta")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=_positive_int, default=None,
                   help="worker processes (default: TTSCORE_WORKERS or CPU count)")
    p.add_argument("--cap", type=_positive_int, default=None, help="size cap for exact engines")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ttscore", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"ttscore {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="score a scenario")
    p.add_argument("scenario")
    p.add_argument("--method", choices=METHODS, default="monte-carlo")
    _add_method_flags(p)
    p.add_argument("--trace", action="store_true", help="dump one simulated outcome to stderr")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("compare", help="score with several methods; CSV with error vs the first")
    p.add_argument("scenario")
    p.add_argument("--methods", default="wmc,monte-carlo", help="comma-separated, reference first")
    _add_method_flags(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("generate", help="random scenario with a hot-potato scheme")
    p.add_argument("--vertices", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--messages", type=int, default=2)
    p.add_argument("--edges", type=int, default=None)
    p.add_argument("--timeout", type=int, default=None)
    p.add_argument("--guarantee", type=int, default=None)
    p.add_argument("--fault-model", choices=[m.value for m in FaultModel], default="permanent")
    p.add_argument("--p-crash", type=float, default=0.01)
    p.add_argument("--p-omit", type=float, default=0.01)
    p.add_argument("--out")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("reduce-3cnf", help="scenario whose score encodes the model count of a 3CNF")
    p.add_argument("cnf")
    p.add_argument("--out")
    p.set_defaults(func=cmd_reduce_3cnf)

    p = sub.add_parser("emit-cnf", help="weighted DIMACS for a scenario")
    p.add_argument("scenario")
    p.add_argument("--goal", choices=("good", "bad"), default="good")
    p.add_argument("--out")
    p.set_defaults(func=cmd_emit_cnf)

    p = sub.add_parser("validate", help="structural and behavioural scheme checks")
    p.add_argument("scenario")
    p.add_argument("--seed", type=int, default=0, help="seed for sampled checks")
    p.set_defaults(func=cmd_validate)
    return parser


def _fail(exc: Exception, code: int) -> int:
    err = {"type": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, ScenarioValidationError):
        err["violations"] = exc.violations
    if isinstance(exc, CapExceeded):
        err["cap"] = exc.cap
        err["estimate"] = exc.estimate
    print(json.dumps({"error": err}, indent=2))
    _say(f"error: {exc}")
    return code


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "workers", 0) is None:
        args.workers = default_workers()
    try:
        return args.func(args)
    except CapExceeded as exc:
        return _fail(exc, EXIT_CAP)
    except ConsistencyError as exc:
        return _fail(exc, EXIT_INTERNAL)
    except (TTScoreError, OSError, ValueError) as exc:
        return _fail(exc, EXIT_INPUT)


if __name__ == "__main__":
    sys.exit(main())
