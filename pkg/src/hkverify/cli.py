"""hkctl: build models, run verification suites, construct twistor paths.

Exit codes: 0 all checks pass, 1 a check failed, 2 bad input or configuration.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from pathlib import Path

from .algebra import validate_algebra
from .exact import ExactError, identity
from .models import ModelError, ModelSpec, apolar_model, load_model, make_lattice, save_model
from .suite import CHECKS, SuiteConfig, assemble_report, dump_report, model_bm, run_check
from .twistor import (
    PeriodSpace,
    PreconditionNS,
    SearchExhausted,
    TwistorError,
    _frame_plane,
    admissible_instance,
    base_frame,
    connect_admissible,
    connect_planes,
    is_admissible,
    neron_severi,
    ns_from_vectors,
    random_plane_image,
    validate_path,
)

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def max_height() -> int:
    raw = os.environ.get("HKCTL_MAX_HEIGHT", "20")
    try:
        h = int(raw)
    except ValueError:
        raise InputError(f"HKCTL_MAX_HEIGHT must be an integer, got {raw!r}")
    if h < 1:
        raise InputError("HKCTL_MAX_HEIGHT must be positive")
    return h


def parse_gram(text: str) -> list[list[int]]:
    """'diag:1,1,1,-1' or a path to a JSON file {"gram": [[int]]}."""
    if text.startswith("diag:"):
        try:
            entries = [int(x) for x in text[5:].split(",") if x.strip()]
        except ValueError:
            raise InputError(f"bad diagonal list {text!r}")
        n = len(entries)
        return [[entries[i] if i == j else 0 for j in range(n)] for i in range(n)]
    p = Path(text)
    if not p.exists():
        raise InputError(f"no such Gram file {text!r} (use diag:... or a JSON file)")
    try:
        data = json.loads(p.read_text())
        return [[int(x) for x in row] for row in data["gram"]]
    except (ValueError, KeyError, TypeError) as exc:
        raise InputError(f"bad Gram file {text!r}: {exc}")


def _emit(report: dict, path: str | None) -> None:
    text = dump_report(report)
    if path:
        Path(path).write_text(text)
    sys.stdout.write(text)


# ---------------------------------------------------------------- build

def cmd_build(args) -> int:
    gram = parse_gram(args.q)
    try:
        spec = ModelSpec.make(args.b, args.m, gram)
    except ModelError as exc:
        raise InputError(f"{type(exc).__name__}: {exc}")
    A = apolar_model(spec)
    rep = validate_algebra(A)
    if not rep.ok:
        sys.stderr.write("validation failed: " + ", ".join(rep.failures()) + "\n")
        return EXIT_FAIL
    Path(args.output).write_bytes(save_model(A))
    sys.stdout.write(json.dumps({"output": args.output, "dims": [A.dims[k] for k in range(0, A.top_degree + 1, 2)]}) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------- verify

def cmd_verify(args) -> int:
    if args.list:
        for name in sorted(CHECKS):
            sys.stdout.write(name + "\n")
        return EXIT_OK
    if not args.model:
        raise InputError("verify needs a model file (or --list)")
    names = sorted(CHECKS) if args.suite == "all" else [s for s in args.suite.split(",") if s]
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise InputError(f"unknown suite(s) {unknown}; see hkctl verify --list")
    try:
        A = load_model(Path(args.model).read_bytes())
    except OSError as exc:
        raise InputError(f"cannot read model: {exc}")
    except ModelError as exc:
        raise InputError(f"{type(exc).__name__}: {exc}")
    b, m = model_bm(A)
    seeds = args.seed or [0]
    config = SuiteConfig(names, seeds, [(b, m, args.model)], args.report)
    records = [run_check(n, A, s) for n in names for s in seeds]
    report = assemble_report(records, config)
    _emit(report, args.report)
    return EXIT_OK if report["summary"]["fail"] == 0 else EXIT_FAIL


# ---------------------------------------------------------------- twistor

def _parse_ns(text: str | None, n: int):
    if not text:
        return []
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if not (tok.startswith("e") and tok[1:].isdigit() and 1 <= int(tok[1:]) <= n):
            raise InputError(f"bad --ns entry {tok!r}; use e1..e{n}")
        k = int(tok[1:]) - 1
        out.append([1 if i == k else 0 for i in range(n)])
    return out


def cmd_twistor(args) -> int:
    gram = parse_gram(args.gram)
    h = max_height()
    try:
        lattice = make_lattice(gram)
        d = None if args.rational else args.d
        ps = PeriodSpace.make(gram, d)
    except (ModelError, TwistorError) as exc:
        raise InputError(f"{type(exc).__name__}: {exc}")
    n = ps.b
    rng = random.Random(args.seed)
    report = {"mode": args.mode, "seed": args.seed, "gram": gram, "d": d, "max_height": h}
    try:
        if args.mode == "connect":
            base = _frame_plane(ps, base_frame(ps, identity(n)))
            W1 = random_plane_image(ps, identity(n), base.frame, rng, 2)
            W2 = random_plane_image(ps, identity(n), base.frame, rng, 2)
            path = connect_planes(ps, W1, W2, h)
            errs = validate_path(ps, path)
            report.update({"length": path.length, "validator_errors": errs, "notes": path.notes})
            ok = not errs
        else:
            Q = ns_from_vectors(_parse_ns(args.ns, n), n)
            inst = admissible_instance(lattice, Q, rng, d)
            path = connect_admissible(lattice, Q, inst[0], inst[1], inst[2], inst[3],
                                      seed=args.seed, d=d, max_height=h)
            adm = is_admissible(lattice, path)
            errs = validate_path(ps, path)
            report.update({"length": path.length, "validator_errors": errs, "admissible": adm["admissible"],
                           "checks": adm["checks"], "ns": Q.to_json(),
                           "vertex_ns": [neron_severi(lattice, v).to_json() for v in path.vertices]})
            ok = adm["admissible"] and not errs
    except (SearchExhausted, PreconditionNS, TwistorError) as exc:
        report.update({"status": "fail", "error": f"{type(exc).__name__}: {exc}"})
        if isinstance(exc, SearchExhausted):
            report["search"] = {"max_height": exc.max_height, "max_steps": exc.max_steps}
        _emit(report, args.report)
        return EXIT_FAIL
    report["status"] = "pass" if ok else "fail"
    if args.output:
        Path(args.output).write_text(json.dumps(path.to_json(ps), sort_keys=True, indent=1) + "\n")
    _emit(report, args.report)
    return EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------- entry point

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hkctl", description="Exact verification of hyperkaehler model algebras.")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="build an apolar model and write it as JSON")
    b.add_argument("--b", type=int, required=True)
    b.add_argument("--m", type=int, required=True)
    b.add_argument("--q", required=True, help="diag:1,1,1,-1 or a JSON file with a gram field")
    b.add_argument("-o", "--output", required=True)
    b.set_defaults(func=cmd_build)

    v = sub.add_parser("verify", help="run named checks on a model file")
    v.add_argument("model", nargs="?")
    v.add_argument("--suite", default="all", help="check name, comma list or 'all'")
    v.add_argument("--seed", type=int, action="append")
    v.add_argument("--report")
    v.add_argument("--list", action="store_true", help="list check names and exit")
    v.set_defaults(func=cmd_verify)

    t = sub.add_parser("twistor", help="construct and validate twistor paths")
    t.add_argument("--gram", required=True)
    t.add_argument("--mode", choices=("connect", "admissible"), default="connect")
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--ns", help="generators of Q, e.g. e5")
    t.add_argument("--d", type=int, default=3, help="quadratic extension Q(sqrt d)")
    t.add_argument("--rational", action="store_true", help="force rational scalars")
    t.add_argument("--report")
    t.add_argument("-o", "--output", help="path file")
    t.set_defaults(func=cmd_twistor)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (InputError, ExactError) as exc:
        sys.stderr.write(f"hkctl: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
