"""Command line: ``isarify translate FILE`` and ``isarify batch DIR``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from pathlib import Path
from typing import Optional

from .kernel import KernelError
from .frontend import ParseError
from .options import PRINT_MODES, Options
from .pipeline import FileResult, counts, translate_source

log = logging.getLogger("isarify")

REPORT_SCHEMA = 1
DEFAULT_TIMEOUT = 30.0


def _add_translation_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--no-smart-goals", action="store_true",
                   help="state every goal of every step (linear form)")
    p.add_argument("--no-named-facts", action="store_true",
                   help="no h_k_j labels; glue with fact+")
    p.add_argument("--no-smart-unfolds", action="store_true",
                   help="give every unfolding its own step")
    p.add_argument("--dummy-subproofs", action="store_true",
                   help="restate hoisted subproofs where they occurred")
    p.add_argument("--subgoal-fix-fresh", action="store_true",
                   help="rename subgoal parameters that shadow variables")
    p.add_argument("--print-types", choices=PRINT_MODES, default="necessary")
    p.add_argument("--fact-name-prefix", default="h", metavar="S")
    p.add_argument("--timeout-secs", type=float, default=DEFAULT_TIMEOUT, metavar="N",
                   help="per-proof wall-clock limit (default 30)")
    p.add_argument("--ascii", action="store_true", help="print ASCII instead of symbols")
    p.add_argument("-v", "--verbose", action="store_true")


def options_from_args(a: argparse.Namespace) -> Options:
    return Options(named_facts=not a.no_named_facts, smart_goals=not a.no_smart_goals,
                   smart_unfolds=not a.no_smart_unfolds, dummy_subproofs=a.dummy_subproofs,
                   subgoal_fix_fresh=a.subgoal_fix_fresh, print_types=a.print_types,
                   fact_name_prefix=a.fact_name_prefix)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="isarify",
                                 description="Translate apply scripts into structured proofs.")
    sub = ap.add_subparsers(dest="cmd", required=True)
    t = sub.add_parser("translate", help="translate one theory file")
    t.add_argument("path")
    t.add_argument("-o", dest="output", metavar="FILE", help="write here instead of stdout")
    t.add_argument("--report", metavar="FILE", help="write a JSON report")
    _add_translation_flags(t)
    b = sub.add_parser("batch", help="translate every .mthy file under a directory")
    b.add_argument("dir")
    b.add_argument("-o", dest="output", metavar="DIR",
                   help="write translated theories into this directory")
    b.add_argument("--report", metavar="FILE", default=None,
                   help="JSON report path (default: stdout)")
    b.add_argument("--jobs", type=int, default=1, metavar="N")
    _add_translation_flags(b)
    return ap


def _file_entry(res: FileResult) -> dict:
    return {"path": res.path, "error": res.error, "counts": counts(res.proofs),
            "proofs": [p.as_json() for p in res.proofs]}


def make_report(results, opts: Options, timeout: float) -> dict:
    results = sorted(results, key=lambda r: r.path)
    all_proofs = [p for r in results for p in r.proofs]
    return {
        "schema": REPORT_SCHEMA,
        "options": asdict(opts),
        "timeout_secs": timeout,
        "files": [_file_entry(r) for r in results],
        "aggregate": counts(all_proofs),
    }


def _translate_file(path: str, rel: str, opts: Options, timeout: float,
                    ascii_: bool) -> FileResult:
    src = Path(path).read_text(encoding="utf-8")
    try:
        return translate_source(src, opts, timeout, ascii_, path=rel)
    except (ParseError, KernelError, ValueError) as err:
        return FileResult(rel, src, [], error=f"{type(err).__name__}: {err}")


def cmd_translate(a: argparse.Namespace) -> int:
    opts = options_from_args(a)
    try:
        src = Path(a.path).read_text(encoding="utf-8")
    except OSError as err:
        print(f"isarify: {err}", file=sys.stderr)
        return 1
    try:
        res = translate_source(src, opts, a.timeout_secs, a.ascii, path=a.path)
    except (ParseError, KernelError, ValueError) as err:
        print(f"isarify: {a.path}: {err}", file=sys.stderr)
        return 1
    for p in res.proofs:
        if p.status != "success":
            what = p.status if p.status == "partial" else f"failed ({p.category})"
            print(f"isarify: {a.path}:{p.line}: {p.name or 'lemma'}: {what}: {p.reason}",
                  file=sys.stderr)
    if a.output:
        Path(a.output).write_text(res.text, encoding="utf-8")
    else:
        sys.stdout.write(res.text)
    if a.report:
        _write_json(a.report, make_report([res], opts, a.timeout_secs))
    return 0


def _discover(root: Path) -> list[Path]:
    return sorted(p for p in root.rglob("*.mthy") if p.is_file())


def cmd_batch(a: argparse.Namespace) -> int:
    opts = options_from_args(a)
    root = Path(a.dir)
    if not root.is_dir():
        print(f"isarify: {root}: not a directory", file=sys.stderr)
        return 1
    try:
        files = _discover(root)
        jobs = [(str(p), p.relative_to(root).as_posix()) for p in files]
        if a.jobs > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=a.jobs) as ex:
                futs = [ex.submit(_translate_file, p, rel, opts, a.timeout_secs, a.ascii)
                        for p, rel in jobs]
                results = [f.result() for f in futs]
        else:
            results = [_translate_file(p, rel, opts, a.timeout_secs, a.ascii)
                       for p, rel in jobs]
        if a.output:
            out = Path(a.output)
            for r in results:
                dest = out / r.path
                dest.parent.mkdir(parents=True, exist_ok=True)
                dest.write_text(r.text, encoding="utf-8")
        report = make_report(results, opts, a.timeout_secs)
        if a.report:
            _write_json(a.report, report)
        else:
            sys.stdout.write(json.dumps(report, indent=2, ensure_ascii=False) + "\n")
    except OSError as err:
        print(f"isarify: {err}", file=sys.stderr)
        return 1
    agg = report["aggregate"]
    print(f"isarify: {agg['total']} proofs: {agg['success']} success, {agg['partial']} partial, "
          f"{agg['fail']['total']} failed", file=sys.stderr)
    return 0


def _write_json(path: str, data: dict) -> None:
    Path(path).write_text(json.dumps(data, indent=2, ensure_ascii=False) + "\n",
                          encoding="utf-8")


def main(argv: Optional[list] = None) -> int:
    a = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if a.verbose else logging.ERROR,
                        format="%(name)s: %(message)s")
    try:
        options_from_args(a)
    except ValueError as err:
        print(f"isarify: {err}", file=sys.stderr)
        return 1
    if a.cmd == "translate":
        return cmd_translate(a)
    return cmd_batch(a)


if __name__ == "__main__":
    sys.exit(main())
