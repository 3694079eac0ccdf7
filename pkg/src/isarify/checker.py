"""Checking structured proofs.

The checker works on documents parsed back from text, so it never sees the
translator's internal trace.  Inference is shared with the method engine.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

from .budget import DeadlineExceeded
from .frontend import ParseError, parse_isar
from .isar import (
    Assume, ByProof, DefaultProof, Fix, Have, ImmediateProof, IsarDoc, Note, RawApply,
    SorryProof, Subproof, VerbatimProof, label_groups,
)
from .kernel import (
    Free, KernelError, Term, Theorem, alpha_eq, forall_intro, frees_of, list_imp, mk_goal,
    strip_goal, incr_bounds,
)
from .methods import (
    Fact, Insert, LocalContext, Seq, resolve_fact_ref, resolve_refs,
)
from .replay import (
    SearchBudgetExceeded, _immediate, _method_refs, all_goals_method, run_script,
    terminal_search,
)
from .rewrite import StepBudgetExceeded, normalize, rules_from
from .syntax import parse_terms

log = logging.getLogger(__name__)


class StepFailed(KernelError):
    pass


@dataclass
class Verdict:
    status: str  # valid | cheated | invalid
    reason: Optional[str] = None
    index: Optional[int] = None
    budget_exhausted: bool = False

    @property
    def ok(self) -> bool:
        return self.status != "invalid"


@dataclass
class Env:
    """Facts and variables visible at a point of a structured proof."""

    lctx: LocalContext
    fixes: list = field(default_factory=list)  # Frees fixed in this block
    pending_types: dict = field(default_factory=dict)  # untyped fix name -> None
    assumes: list = field(default_factory=list)  # props assumed in this block
    cheated: bool = False
    taken: set = field(default_factory=set)  # names of shadowed variables


def parse_props(texts, env: Env) -> list[Term]:
    fixed = dict(env.lctx.scope)
    fixed.update(env.pending_types)
    terms, ftypes = parse_terms(list(texts), env.lctx.ctx, fixed)
    # untyped fixes get their type from first use
    for name in list(env.pending_types):
        if name in ftypes:
            f = Free(_fresh_internal(name, env), ftypes[name])
            terms = [_rename_free(t, name, f) for t in terms]
            env.pending_types.pop(name)
            env.lctx.scope[name] = f
            env.fixes = [f if (isinstance(x, str) and x == name) else x for x in env.fixes]
    return terms


def _fresh_internal(name: str, env: Env) -> str:
    used = {f.name for f in env.lctx.scope.values() if f is not None} | env.taken
    if name not in used:
        return name
    k = 1
    while f"{name}__{k}" in used:
        k += 1
    return f"{name}__{k}"


def _rename_free(t: Term, name: str, f: Free) -> Term:
    from .kernel import instantiate_frees
    return instantiate_frees(t, {name: f})


def _prepare(e: Have, props: list[Term], env: Env) -> tuple[tuple, tuple]:
    """Goals and chained facts for a statement after its using/unfolding clauses."""
    goals = tuple(props)
    chained: tuple = ()
    for kind, refs in e.clauses:
        thms = resolve_refs(refs, env.lctx)
        if any(t.cheated for t in thms):
            env.cheated = True
        if kind == "using":
            chained = chained + tuple(thms)
        else:
            rules = rules_from(("unfolding", t) for t in thms)
            goals = tuple(normalize(g, rules) for g in goals)
            chained = tuple(Theorem(normalize(t.prop, rules), t.provenance) for t in chained)
    return goals, chained


def check_step(e: Have, env: Env, trusted: Optional[bool] = None) -> list[Theorem]:
    """Prove the element's statements in ``env``; raises :class:`StepFailed`.

    With ``trusted`` set the proof is not run and the statements are taken as
    proven (or cheated when ``trusted`` is True), for proofs checked already."""
    try:
        props = parse_props(e.props, env)
    except KernelError as err:
        raise StepFailed(f"cannot read statement: {err}") from err
    try:
        if trusted is not None:
            cheated = trusted
        else:
            goals, chained = _prepare(e, props, env)
            cheated = _run_proof(e.proof, goals, chained, env)
    except (StepBudgetExceeded, SearchBudgetExceeded) as err:
        raise StepFailed(f"budget exhausted: {err}") from err
    except StepFailed:
        raise
    except KernelError as err:
        raise StepFailed(str(err)) from err
    prov = "cheated" if cheated else "proven"
    return [Theorem(p, prov) for p in props]


def _refs_cheated(m, env: Env) -> bool:
    bad = False
    for r in _method_refs(m):
        try:
            bad |= any(t.cheated for t in resolve_fact_ref(r, env.lctx))
        except KernelError:
            pass
    if _uses_fact_search(m):
        bad |= any(t.cheated for t in env.lctx.local_theorems())
    return bad


def _uses_fact_search(m) -> bool:
    if isinstance(m, Fact) and not m.facts:
        return True
    for x in getattr(m, "methods", ()) or ():
        if _uses_fact_search(x):
            return True
    inner = getattr(m, "method", None)
    return inner is not None and _uses_fact_search(inner)


def _run_proof(p, goals: tuple, chained: tuple, env: Env) -> bool:
    """Run a proof part; returns whether the result is cheated."""
    cheated = any(t.cheated for t in chained)
    if isinstance(p, ByProof):
        parts = tuple(x for x in (p.primary, p.glue) if x is not None)
        m = parts[0] if len(parts) == 1 else Seq(parts)
        cheated |= _refs_cheated(m, env)
        if chained:
            m = Seq((Insert(chained, all_goals_method(m)), m))
        if terminal_search(m, goals, env.lctx) is None:
            raise StepFailed("method does not solve the statement")
        return cheated
    if isinstance(p, ImmediateProof):
        if not _immediate(goals, chained):
            raise StepFailed("immediate proof failed")
        return cheated
    if isinstance(p, DefaultProof):
        from .methods import Standard
        m = Standard() if not chained else Seq((Insert(chained, False), Standard()))
        if terminal_search(m, goals, env.lctx) is None:
            raise StepFailed("default proof failed")
        return cheated
    if isinstance(p, SorryProof):
        return True
    if isinstance(p, Subproof):
        if chained:
            goals = tuple(_insert_hyps(g, chained) for g in goals)
        v = check_block(p.doc, goals, env)
        if v.status == "invalid":
            raise StepFailed(f"subproof: {v.reason}")
        return cheated or v.status == "cheated"
    if isinstance(p, VerbatimProof):
        try:
            doc = parse_isar(p.text)
        except ParseError:
            log.warning("structured block outside the supported subset; treated as cheated")
            return True
        return _run_proof(Subproof(doc), goals, chained, env)
    if isinstance(p, RawApply):
        tr = run_script(goals, p.commands, env.lctx.copy(), chained=chained)
        if any(e.failed for e in tr.flat()):
            raise StepFailed("apply segment failed")
        if tr.outcome == "incomplete":
            raise StepFailed("apply segment left goals")
        return cheated or tr.outcome == "cheated" or tr.used_cheated
    raise StepFailed(f"unknown proof form {p!r}")


def _insert_hyps(g: Term, thms) -> Term:
    params, hyps, concl = strip_goal(g)
    k = len(params)
    return mk_goal(params, hyps + [incr_bounds(t.prop, k) for t in thms], concl)


def _exported(prop: Term, env: Env) -> Term:
    fixes = [f for f in env.fixes if isinstance(f, Free)]
    return forall_intro(fixes, list_imp(env.assumes, prop))


def _discharge(pending: list, prop: Term, env: Env) -> bool:
    """Remove the first pending goal that ``prop`` establishes."""
    cands = [_exported(prop, env)]
    used = {f.name for f in frees_of(list_imp(env.assumes, prop))}
    occurring = [f for f in env.fixes if isinstance(f, Free) and f.name in used]
    cands.append(forall_intro(occurring, list_imp(env.assumes, prop)))
    for i, g in enumerate(pending):
        if any(alpha_eq(g, c) for c in cands):
            pending.pop(i)
            return True
    return False


class BlockChecker:
    """Incremental checking of one ``proof … qed`` block.

    ``add`` processes one element and raises on failure without changing the
    block state, so callers can try alternatives for the same position."""

    def __init__(self, goals: tuple, outer: Env):
        self.env = Env(outer.lctx.copy(), taken=set(outer.taken))
        self.env.taken |= {f.name for g in goals for f in frees_of(g)}
        self.pending = list(goals)
        self.cheated = False

    def _snapshot(self):
        e = self.env
        return (e.lctx.copy(), list(e.fixes), dict(e.pending_types), list(e.assumes),
                set(e.taken), list(self.pending))

    def _restore(self, snap) -> None:
        e = self.env
        e.lctx, e.fixes, e.pending_types, e.assumes, e.taken, self.pending = snap
        e.cheated = False

    def add(self, e, trusted: Optional[bool] = None) -> None:
        snap = self._snapshot()
        try:
            self.cheated |= self._add(e, trusted)
        except BaseException:
            self._restore(snap)
            raise

    def _add(self, e, trusted: Optional[bool]) -> bool:
        env = self.env
        if isinstance(e, Note):
            thms = resolve_refs(e.facts, env.lctx)
            env.lctx = env.lctx.add_named(e.name, thms) if e.name else env.lctx.add_anon(thms)
            return any(t.cheated for t in thms)
        if isinstance(e, Fix):
            for name, ty_text in e.names:
                old = env.lctx.scope.pop(name, None)
                if old is not None:
                    env.taken.add(old.name)
                if ty_text is None:
                    env.pending_types[name] = None
                    env.fixes.append(name)
                else:
                    from .syntax import parse_type
                    f = Free(_fresh_internal(name, env), parse_type(ty_text, env.lctx.ctx))
                    env.taken.add(f.name)
                    env.lctx.scope[name] = f
                    env.fixes.append(f)
            return False
        if isinstance(e, Assume):
            props = parse_props(e.props, env)
            thms = [Theorem(p, "proven") for p in props]
            env.assumes.extend(props)
            env.lctx = env.lctx.add_named(e.label, thms) if e.label else env.lctx.add_anon(thms)
            return False
        if isinstance(e, Have):
            thms = check_step(e, env, trusted)
            cheated = env.cheated or any(t.cheated for t in thms)
            env.cheated = False
            for lab, named in label_groups(e.labels, thms).items():
                env.lctx = env.lctx.add_named(lab, named)
            env.lctx = env.lctx.add_anon(thms)
            if e.show:
                for t in thms:
                    if not _discharge(self.pending, t.prop, env):
                        raise StepFailed("show does not match a pending goal")
            return cheated
        raise StepFailed(f"unsupported element {e!r}")

    def finish(self) -> Verdict:
        if self.pending:
            return Verdict("invalid", f"{len(self.pending)} goal(s) not shown")
        return Verdict("cheated" if self.cheated else "valid")


def check_block(doc: IsarDoc, goals: tuple, outer: Env) -> Verdict:
    bc = BlockChecker(goals, outer)
    for idx, e in enumerate(doc.elements):
        try:
            bc.add(e)
        except StepFailed as err:
            return Verdict("invalid", str(err), idx,
                           budget_exhausted="budget exhausted" in str(err))
        except DeadlineExceeded:
            raise
        except KernelError as err:
            return Verdict("invalid", str(err), idx)
    v = bc.finish()
    if v.status == "invalid":
        v.index = len(doc.elements)
    return v


def check_document(doc: IsarDoc, goals, lctx: LocalContext) -> Verdict:
    """Check ``doc`` as a proof of ``goals`` in the lemma context ``lctx``."""
    return check_block(doc, tuple(goals), Env(lctx))


def check_text(text: str, goals, lctx: LocalContext) -> Verdict:
    try:
        doc = parse_isar(text)
    except ParseError as err:
        return Verdict("invalid", f"parse error: {err}")
    return check_document(doc, goals, lctx)
