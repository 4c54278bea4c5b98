"""Command-line front end: read an instance, run one stage, print JSON."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from typing import Any, Sequence

from .aopt import aopt_solve
from .blocks import to_msp
from .errors import SeqKnapError
from .generate import gen_random, parse_params
from .inequalities import DEFAULT_SUBSET_CAP, describe_polytope, generate_I
from .instance import Instance, capacity_partition, fraction_to_json, instance_to_dict, load_instance
from .optima import RestrictedProblem, enumerate_optima
from .verify import verify_instance

EXIT_OK, EXIT_ERROR, EXIT_COUNTEREXAMPLE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _positive(text: str) -> int:
    value = int(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of integers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("instance", nargs="?", help="instance JSON file")
    common.add_argument("--input", help="instance JSON file (same as the positional argument)")
    common.add_argument("--output", help="write the report here instead of stdout")
    common.add_argument("--pretty", action="store_true", help="human-readable text instead of JSON")
    common.add_argument("--seed", type=int, help="use a random instance with this seed")
    common.add_argument("--random", nargs="*", metavar="KEY=VALUE", help="random-instance parameters, e.g. n=4 m=2")

    problem = argparse.ArgumentParser(add_help=False)
    problem.add_argument("--k", type=_positive, help="largest block type (1-based, default: all)")
    problem.add_argument("--b", type=_positive, help="largest size class (1-based, default: all)")
    problem.add_argument("--F", type=_int_list, help="part capacities, comma-separated (default: the instance's)")

    parser = _Parser(prog="seqknap", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("partition", parents=[common], help="capacity partition per knapsack and part")
    sub.add_parser("solve", parents=[common], help="optimal assignment")
    sub.add_parser("transform", parents=[common], help="blocks and the single-knapsack block model")
    p = sub.add_parser("enumerate", parents=[common, problem], help="optimal block assignments with the branch tree")
    p.add_argument("--budget-branches", "--budget", type=_positive, default=10**5)
    p = sub.add_parser("inequalities", parents=[common, problem], help="inequality family of a restricted problem")
    p.add_argument("--no-dedup", action="store_true", help="one inequality per selection, duplicates kept")
    p = sub.add_parser("describe", parents=[common], help="item-level inequality system over all item subsets")
    p.add_argument("--subset-cap", type=_positive, default=DEFAULT_SUBSET_CAP)
    p.add_argument("--allow-large", action="store_true", help="ignore the subset cap")
    p = sub.add_parser("verify", parents=[common], help="cross-check every stage against exhaustive enumeration")
    p.add_argument("--budget-points", type=_positive, default=10**6)
    p.add_argument("--budget-branches", type=_positive, default=10**5)
    p.add_argument("--subset-cap", type=_positive, default=64)
    return parser


def _instance(args) -> Instance:
    path = args.input or args.instance
    if path:
        return load_instance(path)
    if args.seed is not None or args.random is not None:
        return gen_random(args.seed or 0, parse_params(" ".join(args.random or ())))
    raise SeqKnapError("no instance given (pass a file, --input, or --seed)")


def _problem(args, instance: Instance) -> RestrictedProblem:
    msp = to_msp(instance)
    full = RestrictedProblem.full(msp)
    k = full.k if args.k is None else args.k - 1
    b = full.b if args.b is None else args.b - 1
    F = full.F if args.F is None else tuple(args.F)
    if not (0 <= k < msp.t and 0 <= b < msp.l):
        raise SeqKnapError(f"--k must be in 1..{msp.t} and --b in 1..{msp.l}")
    problem = RestrictedProblem(msp, k, b, F, lower_k=full.k)
    problem.validate()
    return problem


def _problem_json(problem: RestrictedProblem) -> dict:
    return {"k": problem.k + 1, "b": problem.b + 1, "F": list(problem.F)}


def cmd_partition(args, instance: Instance) -> dict:
    part = capacity_partition(instance)
    return {"sizes": list(instance.sizes), "r": [list(row) for row in part.r], "column_sums": list(part.column_sums())}


def cmd_solve(args, instance: Instance) -> dict:
    return aopt_solve(instance).to_json(instance)


def cmd_transform(args, instance: Instance) -> dict:
    msp = to_msp(instance)
    return {
        "sizes": list(msp.sizes),
        "part_capacities": list(msp.part_capacities),
        "blocks": [
            {
                "w": w + 1,
                "members": [instance.items[j].index + 1 for j in block.members],
                "f": msp.f[w],
                "p": fraction_to_json(msp.p[w]),
                "multiplicity": block.multiplicity,
                "per_class": list(msp.tilde_b[w]),
            }
            for w, block in enumerate(msp.blocks)
        ],
    }


def cmd_enumerate(args, instance: Instance) -> dict:
    problem = _problem(args, instance)
    result = enumerate_optima(problem, args.budget_branches, record_tree=True)
    msp = problem.msp
    return {
        "problem": _problem_json(problem),
        "branches": result.branches,
        "best": None if result.best is None else fraction_to_json(result.best),
        "optima": [y.to_json()["y"] for y in result.optima],
        "candidates": [
            {"profit": fraction_to_json(msp.profit(y)), "y": y.to_json()["y"]} for y in result.candidates
        ],
        "tree": result.tree,
    }


def cmd_inequalities(args, instance: Instance) -> dict:
    problem = _problem(args, instance)
    family = generate_I(problem, dedup=not args.no_dedup)
    return {"problem": _problem_json(problem), "inequalities": [i.to_json() for i in family]}


def cmd_describe(args, instance: Instance) -> dict:
    system = describe_polytope(instance, args.subset_cap, args.allow_large)
    return {"inequalities": [i.to_json(instance) for i in system]}


def cmd_verify(args, instance: Instance) -> dict:
    report = verify_instance(instance, args.budget_points, args.budget_branches, args.subset_cap)
    return {"instance": instance_to_dict(instance), **report.to_json()}


COMMANDS = {
    "partition": cmd_partition,
    "solve": cmd_solve,
    "transform": cmd_transform,
    "enumerate": cmd_enumerate,
    "inequalities": cmd_inequalities,
    "describe": cmd_describe,
    "verify": cmd_verify,
}


def _render(value: Any, indent: int = 0) -> list[str]:
    pad = "  " * indent
    if isinstance(value, dict):
        lines = []
        for key, item in value.items():
            if isinstance(item, (dict, list)) and item and not _flat(item):
                lines.append(f"{pad}{key}:")
                lines.extend(_render(item, indent + 1))
            else:
                lines.append(f"{pad}{key}: {_inline(item)}")
        return lines
    if isinstance(value, list):
        lines = []
        for item in value:
            if isinstance(item, (dict, list)) and not _flat(item):
                lines.append(f"{pad}-")
                lines.extend(_render(item, indent + 1))
            else:
                lines.append(f"{pad}- {_inline(item)}")
        return lines
    return [f"{pad}{_inline(value)}"]


def _flat(value) -> bool:
    items = value.values() if isinstance(value, dict) else value
    return all(not isinstance(v, (dict, list)) for v in items)


def _inline(value) -> str:
    if isinstance(value, dict):
        return "  ".join(f"{k}={_inline(v)}" for k, v in value.items())
    if isinstance(value, list):
        return "[" + ", ".join(_inline(v) for v in value) + "]"
    if value is None:
        return "-"
    return str(value)


def main(argv: Sequence[str] | None = None) -> int:
    level = os.environ.get("SEQKNAP_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        instance = _instance(args)
        report = COMMANDS[args.command](args, instance)
    except (SeqKnapError, ValueError, OSError) as exc:
        print(f"seqknap: error: {exc}", file=sys.stderr)
        return EXIT_ERROR

    text = "\n".join(_render(report)) if args.pretty else json.dumps(report, indent=2, ensure_ascii=False)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    if args.command == "verify" and not report["ok"]:
        return EXIT_COUNTEREXAMPLE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
