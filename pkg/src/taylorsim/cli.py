"""Command-line driver.

Exit status: 0 when every check passes, 1 when a bound or consistency check
fails, 2 on malformed input.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .correction import simulate
from .exceptions import ConsistencyError, InvalidInputError, PlanInfeasibleError
from .hamiltonian import ProblemInstance, parse_instance, random_pauli_instance
from .harness import bounds_table, rows_to_csv, sweep_epsilon, sweep_time, verify_circuit

DEFAULT_EPS = "1e-3,1e-6,1e-9,1e-12"
DEFAULT_T = "0.5,1,2,4"


class InputError(Exception):
    pass


def _floats(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise InputError(f"not a comma-separated list of numbers: {text!r}") from None


def _load_instance(args) -> ProblemInstance:
    if args.instance:
        try:
            with open(args.instance) as fh:
                p = parse_instance(fh.read())
        except OSError as exc:
            raise InputError(str(exc)) from None
    elif args.seed is not None:
        rng = np.random.default_rng(args.seed)
        d = random_pauli_instance(rng, n_qubits=2, n_terms=3)
        p = ProblemInstance(d, t=1.0, epsilon=1e-8)
    else:
        raise InputError("either --instance or --seed is required")
    if args.delta is not None:
        p = ProblemInstance(p.decomposition, p.t, p.epsilon, args.delta)
    return p


def _emit(text, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        print(text)


def _require_valid(p):
    problems = p.violations()
    if problems:
        raise InputError("invalid instance: " + "; ".join(map(str, problems)))


def cmd_validate(args):
    p = _load_instance(args)
    problems = p.violations()
    _emit(json.dumps({"ok": not problems, "violations": [str(v) for v in problems]}, indent=2),
          args.out)
    return 2 if problems else 0


def cmd_simulate(args):
    p = _load_instance(args)
    _require_valid(p)
    _, report = simulate(p, mode=args.mode, strict=False)
    _emit(report.to_json(), args.out)
    return 0 if report.passed else 1


def cmd_bounds(args):
    p = _load_instance(args)
    _require_valid(p)
    table = bounds_table(p)
    _emit(json.dumps({"bounds": table}, indent=2), args.out)
    return 0 if all(b["pass"] for b in table) else 1


def _sweep(args, rows):
    _emit(rows_to_csv(rows).rstrip("\n"), args.out)
    # the CSV columns are fixed, so the per-row verdict goes to stderr
    for row in rows:
        print(f"# T={row.T!r} epsilon={row.epsilon!r}: {row.winner} "
              f"({row.count_corrected} vs {row.count_uncorrected})", file=sys.stderr)
    return 0 if all(r.within_bound for r in rows) else 1


def cmd_sweep_epsilon(args):
    p = _load_instance(args)
    return _sweep(args, sweep_epsilon(p, _floats(args.eps_list), args.mode, args.workers))


def cmd_sweep_time(args):
    p = _load_instance(args)
    return _sweep(args, sweep_time(p, _floats(args.t_list), args.mode, args.workers))


def cmd_verify_circuit(args):
    p = _load_instance(args)
    _require_valid(p)
    result = verify_circuit(p)
    _emit(json.dumps(result, indent=2), args.out)
    return 0 if result["pass"] else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="taylorsim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help):
        sp = sub.add_parser(name, help=help)
        sp.add_argument("--instance", help="instance JSON document")
        sp.add_argument("--out", help="output file (default: stdout)")
        sp.add_argument("--mode", choices=("operator", "circuit"), default="operator")
        sp.add_argument("--delta", type=float, help="override the segment-stage accuracy")
        sp.add_argument("--seed", type=int, help="generate a random 2-qubit instance")
        sp.set_defaults(func=func)
        return sp

    add("validate", cmd_validate, "check an instance against the structural assumptions")
    add("simulate", cmd_simulate, "run the corrected pipeline and write a JSON report")
    add("bounds", cmd_bounds, "print the series-level bound table")
    add("verify-circuit", cmd_verify_circuit, "compare dense circuits with operator formulas")
    sp = add("sweep-epsilon", cmd_sweep_epsilon, "sweep the target accuracy (CSV)")
    sp.add_argument("--eps-list", default=DEFAULT_EPS)
    sp.add_argument("--workers", type=int, default=None)
    sp = add("sweep-time", cmd_sweep_time, "sweep the evolution time (CSV)")
    sp.add_argument("--t-list", default=DEFAULT_T)
    sp.add_argument("--workers", type=int, default=None)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        return args.func(args)
    except (InputError, InvalidInputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ConsistencyError, PlanInfeasibleError) as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
