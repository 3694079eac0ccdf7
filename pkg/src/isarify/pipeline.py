"""Translating whole theory files and classifying the outcome of each proof."""

from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass, field
from typing import Optional

from .budget import DeadlineExceeded, deadline
from .checker import Verdict, check_text
from .isar import IsarDoc, RawApply, Subproof
from .options import Options
from .theory import Lemma, LoadedTheory, load_theory
from .translate import Translator, TranslationFailure, render

log = logging.getLogger(__name__)

MARKER = "isarify"
CATEGORIES = ("print", "timeout", "misc")


@dataclass
class ProofReport:
    """Outcome for one eligible proof."""

    name: Optional[str]
    line: int
    status: str  # success | partial | fail
    category: Optional[str] = None  # print | timeout | misc for failures
    reason: Optional[str] = None
    verdict: Optional[str] = None
    raw_segments: int = 0
    linear_fallbacks: int = 0
    sorry_fallbacks: int = 0
    text: Optional[str] = field(default=None, repr=False)
    replaced: bool = False
    seconds: float = 0.0

    def as_json(self) -> dict:
        d = asdict(self)
        d.pop("text")
        return d


def _has(doc: IsarDoc, kind) -> bool:
    for el in doc.elements:
        p = getattr(el, "proof", None)
        if isinstance(p, kind):
            return True
        if isinstance(p, Subproof) and _has(p.doc, kind):
            return True
    return False


def _line_of(src: str, offset: int) -> int:
    return src.count("\n", 0, max(offset, 0)) + 1


def translate_lemma(lem: Lemma, src: str = "", opts: Optional[Options] = None,
                    timeout: Optional[float] = None, ascii_: bool = False) -> ProofReport:
    """Translate one loaded lemma and check the result from its text."""
    opts = opts or lem.options
    rep = ProofReport(lem.name, _line_of(src, lem.decl.span[0]), "fail")
    t0 = time.monotonic()
    try:
        _translate_into(rep, lem, opts, timeout, ascii_)
    finally:
        rep.seconds = round(lem.seconds + time.monotonic() - t0, 6)
    return rep


def _fail(rep: ProofReport, category: str, reason: str) -> None:
    rep.status, rep.category, rep.reason = "fail", category, reason


def _translate_into(rep: ProofReport, lem: Lemma, opts: Options, timeout, ascii_) -> None:
    if lem.decl.body is None:
        return _fail(rep, "misc", f"proof does not parse: {lem.decl.error}")
    if lem.timed_out:
        return _fail(rep, "timeout", lem.error or "time limit")
    if lem.trace is None:
        return _fail(rep, "misc", lem.error or "proof was not replayed")
    if lem.trace.budget_exhausted:
        return _fail(rep, "timeout", "step budget exhausted during replay")
    remaining = None if timeout is None else max(timeout - lem.seconds, 0.0)
    tr = Translator(opts, lem.ctx, ascii_)
    try:
        with deadline(remaining):
            doc = tr.translate(lem.trace, lem.lctx)
            text = render(doc)
            verdict = check_text(text, lem.goals, lem.lctx)
    except DeadlineExceeded as err:
        return _fail(rep, "timeout", str(err))
    except TranslationFailure as err:
        return _fail(rep, err.category, str(err))
    rep.text = text
    rep.verdict = verdict.status
    rep.raw_segments = tr.stats.raw_segments
    rep.linear_fallbacks = tr.stats.linear_fallbacks
    rep.sorry_fallbacks = tr.stats.sorry_fallbacks
    _classify(rep, lem, doc, verdict)


def _classify(rep: ProofReport, lem: Lemma, doc: IsarDoc, v: Verdict) -> None:
    input_cheated = lem.trace.outcome == "cheated" or lem.trace.used_cheated
    if v.status == "invalid":
        if v.budget_exhausted:
            return _fail(rep, "timeout", f"checker budget exhausted: {v.reason}")
        return _fail(rep, "misc", f"translation rejected: {v.reason}")
    if rep.sorry_fallbacks:
        rep.status = "partial"
        rep.reason = f"{rep.sorry_fallbacks} step(s) left as sorry"
        # a working proof is not traded for one with holes
        rep.replaced = input_cheated
        return
    if v.status == "cheated" and not input_cheated:
        return _fail(rep, "misc", "translation is cheated but the script was not")
    rep.replaced = True
    if _has(doc, RawApply):
        rep.status = "partial"
        rep.reason = "schematic goals kept in apply style"
    else:
        rep.status = "success"


@dataclass
class FileResult:
    path: str
    text: str  # the rewritten theory
    proofs: list
    error: Optional[str] = None

    def counts(self) -> dict:
        return counts(self.proofs)


def counts(proofs) -> dict:
    c = {"total": 0, "success": 0, "partial": 0,
         "fail": {"print": 0, "timeout": 0, "misc": 0, "total": 0}}
    for p in proofs:
        c["total"] += 1
        if p.status == "fail":
            c["fail"][p.category] += 1
            c["fail"]["total"] += 1
        else:
            c[p.status] += 1
    return c


def translate_source(src: str, opts: Optional[Options] = None, timeout: Optional[float] = None,
                     ascii_: bool = False, path: str = "<string>") -> FileResult:
    """Translate every eligible proof of a theory text.  Declaration errors
    propagate; per-proof problems are reported."""
    loaded = load_theory(src, options=opts, timeout=timeout)
    return rewrite(loaded, timeout=timeout, ascii_=ascii_, path=path)


def rewrite(loaded: LoadedTheory, timeout: Optional[float] = None, ascii_: bool = False,
            path: str = "<string>") -> FileResult:
    src = loaded.src
    proofs = []
    edits = []  # (start, end, replacement)
    for lem in loaded.lemmas:
        if not lem.eligible:
            continue
        rep = translate_lemma(lem, src, lem.options, timeout, ascii_)
        proofs.append(rep)
        start, end = lem.decl.span[0], lem.decl.body_span
        marker = _marker(rep)
        if marker:
            edits.append((start, start, marker + "\n"))
        if rep.replaced and rep.text is not None:
            b0, b1 = end
            line_start = src.rfind("\n", 0, b0) + 1
            if not src[line_start:b0].strip():
                b0 = line_start
            edits.append((b0, b1, rep.text))
    out = src
    for a, b, text in sorted(edits, key=lambda x: (x[0], x[1]), reverse=True):
        out = out[:a] + text + out[b:]
    return FileResult(path, out, proofs)


def _marker(rep: ProofReport) -> Optional[str]:
    if rep.status == "partial":
        return f"(* {MARKER}: partial *)"
    if rep.status == "fail":
        return f"(* {MARKER}: failed ({rep.category}) *)"
    return None
