"""The weightlab command line: gen / run / report.

Exit codes: 0 success, 1 check failure, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .algebra import AlgebraError, make_algebra
from .dynamics import modular_group_of
from .serialize import (InstanceError, instance_from_json, instance_to_json,
                        report_from_json, report_to_json)
from .suites import SUITES, run_suites
from .weights import Weight, random_faithful_weight

USAGE_ERROR = 2


def parse_blocks(text: str):
    try:
        dims = [int(p) for p in text.split(",") if p.strip() != ""]
    except ValueError:
        raise InstanceError(f"bad block list: {text!r}")
    if not dims or any(d < 1 for d in dims):
        raise InstanceError(f"bad block list: {text!r}")
    return dims


def generate_instance(blocks, seed: int, faithful: bool, tensor_blocks) -> dict:
    alg = make_algebra(blocks)
    rng = np.random.default_rng(seed)
    if faithful:
        phi = random_faithful_weight(alg, rng)
    else:
        dens = []
        for n in alg.block_dims:
            w = rng.standard_normal((max(n - 1, 1), n)) \
                + 1j * rng.standard_normal((max(n - 1, 1), n))
            d = w.conj().T @ w
            tr = np.trace(d).real
            dens.append(d / tr if tr > 1e-12 else np.eye(n) / n)
        phi = Weight(alg, dens)
    talg = make_algebra(tensor_blocks)
    psi = random_faithful_weight(talg, rng)
    if phi.faithful():
        group_h = list(modular_group_of(phi).h)
    else:
        group_h = [np.zeros((n, n)) for n in alg.block_dims]
    return {"seed": seed, "algebra": alg, "weight": phi, "group_h": group_h,
            "tensor_algebra": talg, "tensor_weight": psi, "faithful": faithful}


def cmd_gen(args) -> int:
    try:
        blocks = parse_blocks(args.blocks)
        tblocks = parse_blocks(args.tensor_blocks)
        inst = generate_instance(blocks, args.seed, args.faithful, tblocks)
    except (InstanceError, AlgebraError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    text = instance_to_json(inst)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_run(args) -> int:
    try:
        with open(args.instance) as fh:
            inst = instance_from_json(fh.read())
    except (OSError, InstanceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    suites = None
    if args.suite and args.suite != "all":
        suites = [s.strip() for s in args.suite.split(",") if s.strip()]
        bad = [s for s in suites if s not in SUITES]
        if bad:
            print(f"error: unknown suite(s): {', '.join(bad)}", file=sys.stderr)
            return USAGE_ERROR
    report = run_suites(inst, suites, args.tol)
    text = report_to_json(report)
    if args.json:
        with open(args.json, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    counts = report["counts"]
    print(f"{counts['passed']}/{counts['total']} checks passed",
          file=sys.stderr)
    for rec in report["checks"]:
        if not rec["passed"]:
            print(f"FAIL {rec['id']} [{rec['anchor']}] "
                  f"deviation {rec['deviation']:.3e} > {rec['tolerance']:.1e}",
                  file=sys.stderr)
    return 0 if counts["failed"] == 0 else 1


def cmd_report(args) -> int:
    from .reporting import figure_path_for, render_figure, render_markdown
    try:
        with open(args.infile) as fh:
            report = report_from_json(fh.read())
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    if args.format != "md":
        print(f"error: unsupported format {args.format!r}", file=sys.stderr)
        return USAGE_ERROR
    md = render_markdown(report)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(md)
        fig = render_figure(report, figure_path_for(args.out))
        print(f"wrote {args.out} and {fig}", file=sys.stderr)
    else:
        sys.stdout.write(md)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="weightlab",
                                description="numerical weight-theory harness")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a deterministic instance")
    g.add_argument("--blocks", required=True, help="e.g. 2,3")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--faithful", action="store_true")
    g.add_argument("--tensor-blocks", default="2", help="partner algebra blocks")
    g.add_argument("--out", default=None)
    g.set_defaults(fn=cmd_gen)

    r = sub.add_parser("run", help="run verification suites")
    r.add_argument("instance")
    r.add_argument("--suite", default="all",
                   help="comma list of {%s} or 'all'" % ",".join(SUITES))
    r.add_argument("--tol", type=float, default=None,
                   help="override every per-check tolerance")
    r.add_argument("--json", default=None, help="write the report here")
    r.set_defaults(fn=cmd_run)

    m = sub.add_parser("report", help="render a report")
    m.add_argument("--in", dest="infile", required=True)
    m.add_argument("--format", default="md")
    m.add_argument("--out", default=None,
                   help="markdown path; a PNG figure is written alongside")
    m.set_defaults(fn=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE_ERROR if exc.code not in (0, None) else 0
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
