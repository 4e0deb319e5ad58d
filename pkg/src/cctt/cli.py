"""Batch checker command line.

`cctt check FILE... [--corpus DIR] [--max-steps N] [--trace-conv]` checks
each file's declarations in order against the ambient-clock context and
reports one `PASS|FAIL|SKIP file:decl` line per declaration.  Exit status
0 means every expectation was met, 1 means some expectation was violated,
2 means a usage or I/O problem.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from .checker import CheckState, PRELUDE, check, check_is_type
from .conversion import conv, whnf
from .errors import CcttError, IoError, ParseError, UnboundVariable
from .parser import (
    ConvCheck, DataDefinition, Definition, Elaborator, surface_module,
)
from .syntax import ClockElim, Con, Hit, TopRef


def _referenced_names(obj, out):
    match obj:
        case TopRef(name):
            out.add(name)
        case Hit(name=name) | Con(name=name) | ClockElim(name=name):
            out.add(name)
    if dataclasses.is_dataclass(obj):
        for f in dataclasses.fields(obj):
            _referenced_names(getattr(obj, f.name), out)
    elif isinstance(obj, tuple):
        for item in obj:
            _referenced_names(item, out)


def referenced_names(*objs):
    out = set()
    for obj in objs:
        _referenced_names(obj, out)
    return out


class Report:
    def __init__(self, trace=False):
        self.lines = []
        self.failed = 0
        self.trace = trace

    def record(self, status, path, decl, detail=None):
        line = f"{status} {path}:{decl}"
        if detail:
            line += f"  [{detail}]"
        print(line)
        self.lines.append((status, path, decl))
        if status == "FAIL":
            self.failed += 1


def _run_decl(state, report, path, name, decl, trace):
    """Check one elaborated declaration; returns True on success."""
    match decl:
        case Definition(name=name, ty=ty, body=body):
            state.add_definition(name, ty, body)
            return None
        case DataDefinition(sig=sig):
            state.add_signature(sig)
            return None
        case ConvCheck(name=name, ty=ty, lhs=lhs, rhs=rhs,
                       want_equal=want):
            check_is_type(state, PRELUDE, ty)
            check(state, PRELUDE, lhs, ty)
            check(state, PRELUDE, rhs, ty)
            got = conv(state, PRELUDE, ty, lhs, rhs)
            if trace:
                print(f"TRACE {path}:{name}:"
                      f" {whnf(state, PRELUDE, lhs)!r}"
                      f" ~ {whnf(state, PRELUDE, rhs)!r}")
            return got == want
    raise TypeError(f"not a declaration: {decl!r}")


def check_file(path, text, max_steps, report, trace=False):
    if "--expect-fail(ParseError)" in text:
        try:
            surface_module(text)
        except ParseError:
            report.record("PASS", path, "module")
            return
        report.record("FAIL", path, "module",
                      "expected a parse error, but the file parsed")
        return
    try:
        sdecls = surface_module(text)
    except ParseError as err:
        report.record("FAIL", path, "module", str(err))
        return
    state = CheckState(max_steps=max_steps)
    elab = Elaborator()
    failed = set()
    for sdecl in sdecls:
        name = elab.decl_name(sdecl)
        expect = getattr(sdecl, "expect", None)
        err = None
        skip = False
        conv_ok = None
        try:
            decl = elab.decl(sdecl)
            refs = referenced_names(decl)
            if refs & failed:
                skip = True
            else:
                conv_ok = _run_decl(state, report, path, name, decl, trace)
        except UnboundVariable as e:
            if e.payload.get("name") in failed:
                skip = True
            else:
                err = e
        except CcttError as e:
            err = e
        if skip:
            report.record("SKIP", path, name)
            failed.add(name)
            continue
        if conv_ok is not None:
            # Conversion expectations carry their own verdict.
            if conv_ok:
                report.record("PASS", path, name)
            else:
                report.record("FAIL", path, name,
                              "conversion check came out the other way")
            continue
        if expect is not None and expect[0] == "fail":
            if err is None:
                report.record("FAIL", path, name,
                              f"expected {expect[1]}, but it checked")
                failed.add(name)
            elif err.error_class == expect[1]:
                report.record("PASS", path, name)
                failed.add(name)
            else:
                report.record("FAIL", path, name,
                              f"expected {expect[1]}, got"
                              f" {err.error_class}: {err.message}")
                failed.add(name)
            continue
        if err is None:
            report.record("PASS", path, name)
        else:
            report.record("FAIL", path, name,
                          f"{err.error_class}: {err.message}")
            failed.add(name)


def gather_files(paths, corpus):
    files = [Path(p) for p in paths]
    if corpus is not None:
        root = Path(corpus)
        if not root.is_dir():
            raise IoError(f"corpus directory {corpus} does not exist")
        files.extend(sorted(root.rglob("*.cctt")))
    if not files:
        raise IoError("no input files")
    return files


def main(argv=None):
    parser = argparse.ArgumentParser(prog="cctt")
    sub = parser.add_subparsers(dest="command")
    chk = sub.add_parser("check", help="check .cctt files")
    chk.add_argument("files", nargs="*")
    chk.add_argument("--corpus", metavar="DIR",
                     help="also check every .cctt file under DIR")
    chk.add_argument("--max-steps", type=int, default=1_000_000,
                     help="reduction step budget per file")
    chk.add_argument("--trace-conv", action="store_true",
                     help="print normal forms for conversion checks")
    args = parser.parse_args(argv)
    if args.command != "check":
        parser.print_usage(sys.stderr)
        return 2
    report = Report(trace=args.trace_conv)
    try:
        files = gather_files(args.files, args.corpus)
        for path in files:
            try:
                text = path.read_text(encoding="utf-8")
            except OSError as err:
                raise IoError(f"cannot read {path}: {err}") from err
            check_file(str(path), text, args.max_steps, report,
                       trace=args.trace_conv)
    except IoError as err:
        print(f"error: {err.message}", file=sys.stderr)
        return 2
    total = len(report.lines)
    passed = sum(1 for s, _, _ in report.lines if s == "PASS")
    skipped = sum(1 for s, _, _ in report.lines if s == "SKIP")
    print(f"{total} declarations: {passed} passed, {report.failed} failed,"
          f" {skipped} skipped")
    return 1 if report.failed else 0


if __name__ == "__main__":
    sys.exit(main())
