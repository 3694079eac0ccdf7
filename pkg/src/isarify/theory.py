"""Loading theory files: declarations, lemma contexts and proof replay."""

from __future__ import annotations

import functools
import logging
import time
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional

from .budget import DeadlineExceeded, deadline
from .frontend import (
    AxiomDecl, ConstsDecl, DefaultTypeDecl, DefsDecl, LemmaDecl, NotationDecl,
    OptionsDecl, TypeDecl, VerbatimIsar, parse_theory_text,
)
from .kernel import (
    EQUIV, Free, KernelError, Term, Theorem, Theory, dest_binop, frees_of, generalize,
    instantiate_frees, list_imp,
)
from .methods import LocalContext
from .options import Options, with_overrides
from .replay import IllegalCommand, Trace, run_script
from .syntax import parse_terms, parse_type

log = logging.getLogger(__name__)


class DuplicateName(KernelError):
    pass


class LoadError(KernelError):
    pass


@dataclass
class Lemma:
    """A lemma with its statement context and replay results."""

    decl: LemmaDecl
    ctx: Theory  # theory in which the lemma is stated
    goals: tuple = ()
    lctx: Optional[LocalContext] = None
    assumptions: list = field(default_factory=list)  # [(name, (Theorem, ...))]
    defines: dict = field(default_factory=dict)  # local const name -> definiens
    trace: Optional[Trace] = None
    error: Optional[str] = None
    timed_out: bool = False
    options: Options = field(default_factory=Options)
    theorems: tuple = ()
    seconds: float = 0.0  # time spent replaying

    @property
    def name(self) -> Optional[str]:
        return self.decl.name

    @property
    def eligible(self) -> bool:
        return self.decl.has_apply


@dataclass
class LoadedTheory:
    ctx: Theory
    lemmas: list
    decls: list
    src: str


def _parse_prop_texts(texts, ctx: Theory, allow_tvars: bool = True) -> list[Term]:
    terms, _ = parse_terms(list(texts), ctx, allow_tvars=allow_tvars)
    return terms


def _add_facts(ctx: Theory, name: str, thms, simp=False, intro=False) -> Theory:
    if name in ctx.facts:
        raise DuplicateName(f"duplicate fact name {name}")
    return ctx.add_facts(name, thms, simp=simp, intro=intro)


def apply_decl(ctx: Theory, d) -> Theory:
    """Process a non-lemma declaration."""
    if isinstance(d, TypeDecl):
        if d.name in ctx.types:
            raise DuplicateName(f"duplicate type {d.name}")
        return ctx.add_type(d.name)
    if isinstance(d, ConstsDecl):
        for name, ty in d.consts:
            if ctx.const_type(name) is not None:
                raise DuplicateName(f"duplicate constant {name}")
            ctx = ctx.add_const(name, parse_type(ty, ctx))
        return ctx
    if isinstance(d, DefsDecl):
        t = _parse_prop_texts([d.text], ctx)[0]
        eq = dest_binop(t, EQUIV)
        from .kernel import Const, is_closed
        if eq is None or not isinstance(eq[0], Const) or frees_of(eq[1]) or not is_closed(eq[1]):
            raise LoadError(f"definition {d.name} must have the form c ≡ closed term")
        ctx = _add_facts(ctx, d.name, [Theorem(t, "axiom")])
        defs = dict(ctx.defs)
        defs[eq[0].name] = d.name
        return ctx.copy(defs=defs)
    if isinstance(d, AxiomDecl):
        thms = [Theorem(generalize(t), "axiom") for t in _parse_prop_texts(d.props, ctx)]
        return _add_facts(ctx, d.name, thms, simp="simp" in d.attrs, intro="intro" in d.attrs)
    if isinstance(d, NotationDecl):
        if ctx.const_type(d.const) is None:
            raise LoadError(f"notation for unknown constant {d.const}")
        notation = dict(ctx.notation)
        notation[d.const] = d.symbol
        return ctx.copy(notation=notation)
    if isinstance(d, DefaultTypeDecl):
        return ctx.copy(default_type=parse_type(d.type_text, ctx))
    raise TypeError(f"unknown declaration {d!r}")


def lemma_context(decl: LemmaDecl, ctx: Theory) -> tuple:
    """Goals, local context, named assumptions and local definitions of a lemma."""
    fixed = {}
    for name, ty in decl.fixes:
        fixed[name] = Free(name, parse_type(ty, ctx)) if ty is not None else None
    def_texts = [t for _, t in decl.defines]
    assm_texts = [t for _, ts in decl.assumes for t in ts]
    texts = def_texts + assm_texts + list(decl.shows)
    # a defined name is a local variable of the lemma
    for text in def_texts:
        lhs = text.split("≡")[0].split("==")[0].strip()
        if lhs.isidentifier() and lhs not in fixed and ctx.const_type(lhs) is None:
            fixed[lhs] = None
    terms, ftypes = parse_terms(texts, ctx, fixed)
    scope = {}
    for t in terms:
        for f in frees_of(t):
            scope.setdefault(f.name, f)
    for name, f in fixed.items():
        if f is not None:
            scope[name] = f
    nd, na = len(def_texts), len(assm_texts)
    defs_t, assm_t, shows_t = terms[:nd], terms[nd:nd + na], terms[nd + na:]
    lctx = LocalContext(ctx, scope=scope)
    defines = {}
    for (label, _), t in zip(decl.defines, defs_t):
        eq = dest_binop(t, EQUIV)
        if eq is None or not isinstance(eq[0], Free):
            raise LoadError("defines needs the form x ≡ t")
        name = label or f"{eq[0].name}_def"
        lctx = lctx.add_named(name, [Theorem(t, "proven")])
        defines[eq[0].name] = eq[1]
    assumptions = []
    k = 0
    all_assms = []
    for label, ts in decl.assumes:
        thms = tuple(Theorem(t, "proven") for t in assm_t[k:k + len(ts)])
        k += len(ts)
        all_assms.extend(thms)
        if label:
            lctx = lctx.add_named(label, thms)
            assumptions.append((label, thms))
        else:
            lctx = lctx.add_anon(thms)
    if all_assms:
        lctx = lctx.add_named("assms", all_assms)
    return tuple(shows_t), lctx, assumptions, defines, assm_t


def export(goals, assm_props, defines: dict, provenance: str) -> tuple:
    """The lemma's theorems: assumptions as premises, definitions expanded,
    free variables turned into schematics."""
    out = []
    for g in goals:
        t = list_imp(assm_props, g)
        t = instantiate_frees(t, defines)
        out.append(Theorem(generalize(t), provenance))
    return tuple(out)


def _verbatim_hook(goals, lctx, text: str) -> bool:
    from .checker import check_text
    v = check_text(text, goals, lctx)
    return v.status == "valid"


def load_theory(src: str, base: Optional[Theory] = None, options: Optional[Options] = None,
                timeout: Optional[float] = None) -> LoadedTheory:
    """Process a theory file.  Lemmas are replayed in order and registered
    (possibly as cheated) for later use.  Declaration errors raise."""
    ctx = base if base is not None else prelude()
    opts = options or Options()
    decls = parse_theory_text(src)
    lemmas = []
    for d in decls:
        if isinstance(d, OptionsDecl):
            opts = with_overrides(opts, d.settings)
            continue
        if not isinstance(d, LemmaDecl):
            ctx = apply_decl(ctx, d)
            continue
        lem = process_lemma(d, ctx, opts, timeout)
        lemmas.append(lem)
        if d.name:
            ctx = _add_facts(ctx, d.name, lem.theorems, simp="simp" in d.attrs,
                             intro="intro" in d.attrs)
    return LoadedTheory(ctx, lemmas, decls, src)


def process_lemma(d: LemmaDecl, ctx: Theory, opts: Options,
                  timeout: Optional[float] = None) -> Lemma:
    lem = Lemma(d, ctx, options=opts)
    t0 = time.monotonic()
    goals, lctx, assumptions, defines, assm_t = lemma_context(d, ctx)
    lem.goals, lem.lctx, lem.assumptions, lem.defines = goals, lctx, assumptions, defines
    prov = "cheated"
    if d.body is None:
        lem.error = d.error
    else:
        try:
            with deadline(timeout):
                if len(d.body) == 1 and isinstance(d.body[0], VerbatimIsar):
                    ok = _verbatim_hook(goals, lctx, d.body[0].text)
                    prov = "proven" if ok else "cheated"
                else:
                    tr = run_script(goals, d.body, lctx, opts.subgoal_fix_fresh)
                    lem.trace = tr
                    if tr.outcome == "complete" and not tr.used_cheated:
                        prov = "proven"
        except DeadlineExceeded as e:
            lem.timed_out = True
            lem.error = str(e)
        except IllegalCommand as e:
            lem.error = str(e)
    lem.theorems = export(goals, assm_t, defines, prov)
    lem.seconds = time.monotonic() - t0
    return lem


@functools.lru_cache(maxsize=1)
def prelude() -> Theory:
    """The standard theory every file is loaded on top of."""
    src = resources.files("isarify").joinpath("prelude.mthy").read_text(encoding="utf-8")
    loaded = load_theory(src, base=Theory())
    return loaded.ctx
