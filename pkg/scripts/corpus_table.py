"""Translate a directory of theories and print per-file outcome counts.

    python scripts/corpus_table.py [DIR] [--json FILE] [translation flags]

Columns follow the batch report: total, success, partial and the three
failure kinds.  Extra arguments are passed to ``isarify batch``."""

from __future__ import annotations

import argparse
import contextlib
import io
import json
import sys
from pathlib import Path

from isarify import cli

ROOT = Path(__file__).resolve().parent.parent
COLUMNS = ("total", "success", "partial", "print", "timeout", "misc")


def row(name: str, c: dict) -> list:
    f = c["fail"]
    return [name, c["total"], c["success"], c["partial"], f["print"], f["timeout"], f["misc"]]


def format_table(report: dict) -> str:
    rows = [row(f["path"] + (" (error)" if f["error"] else ""), f["counts"])
            for f in report["files"]]
    rows.append(row("all", report["aggregate"]))
    header = ["file", *COLUMNS]
    widths = [max(len(str(r[i])) for r in rows + [header]) for i in range(len(header))]

    def fmt(r):
        return "  ".join(str(v).ljust(w) if i == 0 else str(v).rjust(w)
                         for i, (v, w) in enumerate(zip(r, widths)))

    lines = [fmt(header), fmt(["-" * w for w in widths])]
    lines += [fmt(r) for r in rows[:-1]]
    lines += [fmt(["-" * w for w in widths]), fmt(rows[-1])]
    return "\n".join(lines)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("dir", nargs="?", default=str(ROOT / "corpus"))
    ap.add_argument("--json", metavar="FILE", help="also keep the full report")
    a, rest = ap.parse_known_args(argv)
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = cli.main(["batch", a.dir, *rest])
    if code:
        return code
    report = json.loads(buf.getvalue())
    if a.json:
        Path(a.json).write_text(buf.getvalue(), encoding="utf-8")
    print(format_table(report))
    slow = sorted((p["seconds"], f["path"], p["name"]) for f in report["files"]
                  for p in f["proofs"])[-3:]
    if slow:
        print("\nslowest proofs: " + ", ".join(f"{f}:{n} {s:.3f}s" for s, f, n in reversed(slow)))
    return 0


if __name__ == "__main__":
    sys.exit(main())
