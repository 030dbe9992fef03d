"""flatd2 command line.

Exit codes: 0 decided (any verdict), 1 usage or model error,
2 degeneracy or sampling failure.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .. import corpus
from ..decision import ModelError, classify
from ..flatout import (
    ExtractionError, OracleError, derive_ubar1, extract_flat_output, prolongation_oracle,
    verify_flat_output,
)
from ..liealg import DegeneracyError
from ..symexpr import DEFAULT_SAMPLES, DEFAULT_SEED, ExprError, ParseError, SamplingError, parse_expr
from .document import parse_document
from .report import build_report, render_text

SEED_ENV = "FLATD2_SEED"


class _Usage(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _Usage(f"{self.prog}: {message}")


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError:
        raise _Usage(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _model_text(arg: str) -> str:
    p = Path(arg)
    if p.is_file():
        return p.read_text()
    stem = p.name[:-6] if p.name.endswith(".model") else p.name
    if stem in corpus.NAMES and not p.parent.parts:
        return corpus.text(stem)
    raise _Usage(f"no model file {arg!r} and no bundled model of that name")


def _parser() -> _Parser:
    ap = _Parser(prog="flatd2", description="Flatness with difference d <= 2 for two-input systems.")
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("model", help="model file, or the name of a bundled model")
        p.add_argument("--seed", type=int, default=None, help=f"sampling seed (default ${SEED_ENV} or {DEFAULT_SEED})")
        p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
        p.add_argument("--json", metavar="PATH", help="write the JSON report here ('-' for stdout)")

    p = sub.add_parser("check", help="classify a model")
    common(p)
    p.add_argument("--max-d", type=int, choices=(0, 1, 2), default=2)
    p = sub.add_parser("flat-output", help="classify, then extract and verify flat outputs")
    common(p)
    p = sub.add_parser("oracle", help="prolong a new input and test static feedback linearizability")
    common(p)
    p.add_argument("--input-expr", required=True, help="new input as an expression in x and u")
    p.add_argument("--d", type=int, choices=(1, 2), required=True)
    sub.add_parser("corpus", help="list the bundled models")
    return ap


def _emit(report, json_path, out):
    if json_path == "-":
        out.write(report.dumps())
        return
    out.write(render_text(report))
    if json_path:
        Path(json_path).write_text(report.dumps())


def run_cli(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = _parser().parse_args(argv)
        if args.cmd == "corpus":
            for name in corpus.NAMES:
                doc = parse_document(corpus.text(name))
                out.write(f"{name}\tn={len(doc.states)}\t{' '.join(doc.states)} | {' '.join(doc.inputs)}\n")
            return 0
        seed = args.seed if args.seed is not None else _default_seed()
        if args.samples < 1:
            raise _Usage("--samples must be positive")
        doc = parse_document(_model_text(args.model))
        sys_model = doc.build(seed, args.samples)
        if args.cmd == "check":
            cls = classify(sys_model, args.max_d)
            _emit(build_report(sys_model, cls), args.json, out)
            return 0
        cls = classify(sys_model)
        if args.cmd == "flat-output":
            pairs, oracle = [], []
            trace = cls.trace
            if trace.accepted:
                for b in trace.accepted_branches:
                    cand = extract_flat_output(sys_model, trace, b.branch_id)
                    pairs.append((cand, verify_flat_output(sys_model, trace, cand)))
                    if b.vc_field is not None and trace.k1 == 1 and cls.d:
                        ub = derive_ubar1(sys_model, b.vc_field)
                        if ub is not None:
                            oracle.append(prolongation_oracle(sys_model, ub, cls.d))
            _emit(build_report(sys_model, cls, pairs, oracle), args.json, out)
            return 0
        # oracle
        try:
            ubar1 = parse_expr(args.input_expr, doc.symbols())
        except ParseError as e:
            raise _Usage(f"--input-expr: {e}") from None
        try:
            res = prolongation_oracle(sys_model, ubar1, args.d)
        except OracleError as e:
            out.write(f"rejected: {e}\n")
            return 0
        _emit(build_report(sys_model, cls, (), [res]), args.json, out)
        return 0
    except _Usage as e:
        err.write(f"{e}\n")
        return 1
    except (DegeneracyError, SamplingError) as e:
        err.write(f"degenerate sampling: {e}\n")
        return 2
    except ParseError as e:
        err.write(f"parse error at {e.line}:{e.column}: {e.message}\n")
        return 1
    except (ModelError, ExtractionError, ExprError, OSError) as e:
        err.write(f"error: {e}\n")
        return 1


def main() -> None:
    sys.exit(run_cli())
