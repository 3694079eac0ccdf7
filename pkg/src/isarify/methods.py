"""Proof methods as lazy, backtracking goal-list transformers.

A proof state here is a tuple of goal terms.  ``eval_method`` yields the
successor states in a deterministic order; ``Seq`` backtracks across both
components, which is what terminal ``by`` relies on.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import islice
from typing import Iterator, Optional

from .budget import check_deadline
from .kernel import (
    BOOL, FALSE, TRUE, Const, KernelError, Term, Theorem, Theory, dest_imp, dest_trueprop,
    mk_goal, strip_goal, incr_bounds, vars_of,
)
from .rewrite import RewriteRule, StepBudgetExceeded, normalize, rules_from
from .unify import (
    NonPatternProblem, Subst, apply_subst, lift_over_params, prepare_rule, unify,
    unify_all,
)

log = logging.getLogger(__name__)

AUTO_DEPTH = 8


class MethodError(KernelError):
    pass


class MethodFailed(MethodError):
    pass


class UnknownFact(MethodError):
    pass


class SelectionOutOfRange(MethodError):
    pass


class OFMismatch(MethodError):
    pass


class WhereUnknownVar(MethodError):
    pass


# ---------------------------------------------------------------------------
# Syntax


@dataclass(frozen=True)
class FactRef:
    name: Optional[str] = None
    literal: Optional[str] = None
    selection: Optional[int] = None
    attrs: tuple = ()  # ("OF", (FactRef, ...)) | ("where", ((var, text), ...))

    def render(self) -> str:
        base = self.name if self.name is not None else f"‹{self.literal}›"
        if self.selection is not None:
            base += f"({self.selection})"
        if self.attrs:
            parts = []
            for kind, arg in self.attrs:
                if kind == "OF":
                    parts.append("OF " + " ".join(r.render() for r in arg))
                elif kind == "where":
                    parts.append("where " + " and ".join(f"{v} = {_quote(t)}" for v, t in arg))
                else:
                    parts.append(kind)
            base += "[" + ", ".join(parts) + "]"
        return base


def _quote(text: str) -> str:
    import re
    return text if re.fullmatch(r"[A-Za-z_][A-Za-z0-9_']*|\d+", text) else f'"{text}"'


class Method:
    __slots__ = ()


@dataclass(frozen=True)
class Rule(Method):
    facts: tuple = ()


@dataclass(frozen=True)
class Erule(Method):
    facts: tuple = ()


@dataclass(frozen=True)
class Assumption(Method):
    pass


@dataclass(frozen=True)
class Fact(Method):
    facts: tuple = ()


@dataclass(frozen=True)
class Simp(Method):
    add: tuple = ()


@dataclass(frozen=True)
class SimpAll(Method):
    add: tuple = ()


@dataclass(frozen=True)
class Auto(Method):
    pass


@dataclass(frozen=True)
class Standard(Method):
    pass


@dataclass(frozen=True)
class Insert(Method):
    """Insert theorems as hypotheses; internal, used for chained facts."""

    thms: tuple = ()
    all_goals: bool = False


@dataclass(frozen=True)
class Dash(Method):
    pass


@dataclass(frozen=True)
class Seq(Method):
    methods: tuple


@dataclass(frozen=True)
class Alt(Method):
    methods: tuple


@dataclass(frozen=True)
class Plus(Method):
    method: Method


@dataclass(frozen=True)
class Try(Method):
    method: Method


_ATOM_NAMES = {Assumption: "assumption", Auto: "auto", Standard: "standard", Dash: "-"}


def render_method(m: Method, top: bool = False) -> str:
    """Concrete syntax; ``top`` renders the form used after apply/by."""
    s = _render(m)
    if top and not _bare_ok(m):
        return f"({s})"
    return s


def _bare_ok(m: Method) -> bool:
    if isinstance(m, (Plus, Try)):
        return _bare_ok(m.method) and not isinstance(m.method, (Seq, Alt))
    if isinstance(m, (Assumption, Auto, Standard, Dash)):
        return True
    if isinstance(m, (Fact, Rule, Erule)) and not m.facts:
        return True
    return isinstance(m, (Simp, SimpAll)) and not m.add


def _render(m: Method) -> str:
    if type(m) in _ATOM_NAMES:
        return _ATOM_NAMES[type(m)]
    if isinstance(m, (Rule, Erule, Fact)):
        name = {Rule: "rule", Erule: "erule", Fact: "fact"}[type(m)]
        return " ".join([name] + [f.render() for f in m.facts])
    if isinstance(m, (Simp, SimpAll)):
        name = "simp" if isinstance(m, Simp) else "simp_all"
        return name + (" add: " + " ".join(f.render() for f in m.add) if m.add else "")
    if isinstance(m, Insert):
        return "insert"
    if isinstance(m, Seq):
        return ", ".join(_render_inner(x, Seq) for x in m.methods)
    if isinstance(m, Alt):
        return " | ".join(_render_inner(x, Alt) for x in m.methods)
    if isinstance(m, (Plus, Try)):
        inner = m.method
        s = _render(inner)
        if not _bare_ok(inner) or isinstance(inner, (Seq, Alt)):
            s = f"({s})"
        return s + ("+" if isinstance(m, Plus) else "?")
    raise TypeError(f"unknown method {m!r}")


def _render_inner(m: Method, parent) -> str:
    s = _render(m)
    if isinstance(m, (Seq, Alt)):
        return f"({s})"
    return s


# ---------------------------------------------------------------------------
# Local context


@dataclass
class LocalContext:
    """Facts and fixed variables visible inside a proof."""

    ctx: Theory
    facts: dict = field(default_factory=dict)  # name -> tuple[Theorem, ...]
    anon: tuple = ()  # unnamed local facts, in order of introduction
    scope: dict = field(default_factory=dict)  # display name -> Free
    simp_extra: tuple = ()  # (name, Theorem) pairs

    def copy(self) -> "LocalContext":
        return LocalContext(self.ctx, dict(self.facts), self.anon, dict(self.scope),
                            self.simp_extra)

    def add_named(self, name: str, thms) -> "LocalContext":
        out = self.copy()
        out.facts[name] = tuple(thms)
        return out

    def add_anon(self, thms) -> "LocalContext":
        out = self.copy()
        out.anon = self.anon + tuple(thms)
        return out

    def fix(self, frees) -> "LocalContext":
        out = self.copy()
        for f in frees:
            out.scope[f.name if not isinstance(f, tuple) else f[0]] = \
                f if not isinstance(f, tuple) else f[1]
        return out

    def local_theorems(self) -> list[Theorem]:
        out: list[Theorem] = []
        for thms in self.facts.values():
            out.extend(thms)
        out.extend(self.anon)
        return out

    def fixed_for_parse(self) -> dict:
        return dict(self.scope)


def resolve_fact_ref(r: FactRef, lctx: LocalContext) -> list[Theorem]:
    from .syntax import parse_term
    if r.literal is not None:
        try:
            prop = parse_term(r.literal, lctx.ctx, lctx.fixed_for_parse())
        except KernelError as e:
            raise UnknownFact(f"cannot parse fact literal ‹{r.literal}›: {e}") from e
        hits = [t for t in reversed(lctx.local_theorems()) if t.prop == prop]
        if not hits:
            raise UnknownFact(f"no fact ‹{r.literal}› in context")
        thms = [hits[0]]
    elif r.name in lctx.facts:
        thms = list(lctx.facts[r.name])
    elif r.name in lctx.ctx.facts:
        thms = list(lctx.ctx.facts[r.name])
    else:
        raise UnknownFact(f"unknown fact {r.name}")
    if r.selection is not None:
        if not 1 <= r.selection <= len(thms):
            raise SelectionOutOfRange(f"{r.name}({r.selection}) out of range 1..{len(thms)}")
        thms = [thms[r.selection - 1]]
    for kind, arg in r.attrs:
        if kind == "OF":
            args = [t for ref in arg for t in resolve_fact_ref(ref, lctx)]
            thms = [_apply_of(t, args) for t in thms]
        elif kind == "where":
            thms = [_apply_where(t, arg, lctx) for t in thms]
    return thms


def _apply_of(thm: Theorem, args: list[Theorem]) -> Theorem:
    """Discharge the leading premises of ``thm`` with ``args`` in order."""
    prop = prepare_rule(thm.prop, [])
    s = Subst()
    prov = [thm] + list(args)
    for a in args:
        d = dest_imp(apply_subst(s, prop))
        if d is None:
            raise OFMismatch("too many OF arguments")
        fact = prepare_rule(a.prop, [prop, *s.terms.values()])
        try:
            s = next(iter(unify(d[0], fact, subst=s)))
        except (StopIteration, NonPatternProblem):
            raise OFMismatch("OF argument does not match premise") from None
        prop = d[1]
    out = apply_subst(s, prop)
    from .kernel import combine_provenance
    return Theorem(_reset_indices(out), combine_provenance(prov))


def _reset_indices(t: Term) -> Term:
    from .kernel import Var, Abs, App
    names: dict = {}

    def go(u: Term) -> Term:
        if isinstance(u, Var):
            if u.key not in names:
                base, n = u.name, 0
                taken = set(names.values())
                while (base, n) in taken:
                    n += 1
                names[u.key] = (base, n)
            name, idx = names[u.key]
            return Var(name, idx, u.ty)
        if isinstance(u, Abs):
            return Abs(u.hint, u.ty, go(u.body))
        if isinstance(u, App):
            return App(go(u.fun), go(u.arg))
        return u

    return go(t)


def _apply_where(thm: Theorem, pairs, lctx: LocalContext) -> Theorem:
    from .syntax import parse_term
    from .unify import varify_params
    prop = varify_params(thm.prop, 0)
    vs = {v.name: v for v in vars_of(prop)}
    s = Subst()
    for var, text in pairs:
        name = var.lstrip("?")
        if name not in vs:
            raise WhereUnknownVar(f"no schematic ?{name} in fact")
        from .kernel import unify_types, type_of, type_vars
        want = vs[name].ty
        val = parse_term(text, lctx.ctx, lctx.fixed_for_parse(), as_prop=False,
                         default_type=None if type_vars(want) else want)
        ts = unify_types(vs[name].ty, type_of(val), s.types)
        if ts is None:
            raise WhereUnknownVar(f"type mismatch instantiating ?{name}")
        s = s.with_types(ts).bind(vs[name], val)
    return Theorem(apply_subst(s, prop), thm.provenance)


def resolve_refs(refs, lctx: LocalContext) -> list[Theorem]:
    out: list[Theorem] = []
    for r in refs:
        out.extend(resolve_fact_ref(r, lctx))
    return out


# ---------------------------------------------------------------------------
# Evaluation

State = tuple  # tuple[Term, ...]


def eval_method(m: Method, goals: State, lctx: LocalContext) -> Iterator[State]:
    """Lazily enumerate successor states.  Unknown facts raise; everything
    else that fails simply yields nothing."""
    check_deadline()
    if isinstance(m, Dash):
        yield goals
        return
    if isinstance(m, Seq):
        yield from _seq(m.methods, goals, lctx)
        return
    if isinstance(m, Alt):
        for sub in m.methods:
            yield from eval_method(sub, goals, lctx)
        return
    if isinstance(m, Plus):
        for s1 in eval_method(m.method, goals, lctx):
            yield from _star(m.method, s1, lctx)
        return
    if isinstance(m, Try):
        got = False
        for s1 in eval_method(m.method, goals, lctx):
            got = True
            yield s1
        if not got:
            yield goals
        return
    if isinstance(m, Insert):
        yield _insert(goals, m.thms, m.all_goals)
        return
    if not goals:
        return
    try:
        if isinstance(m, Rule):
            rules = resolve_refs(m.facts, lctx) if m.facts else \
                lctx.ctx.fact_list(lctx.ctx.intro)
            yield from _guard(tac_rule, rules, goals)
        elif isinstance(m, Standard):
            yield from _guard(tac_rule, lctx.ctx.fact_list(lctx.ctx.intro), goals)
        elif isinstance(m, Erule):
            yield from _guard(tac_erule, resolve_refs(m.facts, lctx), goals)
        elif isinstance(m, Assumption):
            yield from _guard(tac_assumption, goals)
        elif isinstance(m, Fact):
            thms = resolve_refs(m.facts, lctx) if m.facts else list(reversed(lctx.local_theorems()))
            yield from _guard(tac_fact, thms, goals)
        elif isinstance(m, Simp):
            r = tac_simp(goals, _simp_rules(m.add, lctx), 1)
            if r is not None:
                yield r
        elif isinstance(m, SimpAll):
            r = tac_simp(goals, _simp_rules(m.add, lctx), len(goals))
            if r is not None:
                yield r
        elif isinstance(m, Auto):
            r = tac_auto(goals, lctx)
            if r is not None:
                yield r
        else:
            raise TypeError(f"unknown method {m!r}")
    except StepBudgetExceeded:
        raise


def _guard(fn, *args) -> Iterator[State]:
    try:
        yield from fn(*args)
    except NonPatternProblem as e:
        log.debug("unification outside the pattern fragment: %s", e)


def _seq(methods: tuple, goals: State, lctx: LocalContext) -> Iterator[State]:
    if not methods:
        yield goals
        return
    for s1 in eval_method(methods[0], goals, lctx):
        yield from _seq(methods[1:], s1, lctx)


def _star(m: Method, goals: State, lctx: LocalContext) -> Iterator[State]:
    """Apply ``m`` as often as possible (deepest first), then stop."""
    got = False
    for s1 in eval_method(m, goals, lctx):
        if s1 == goals:
            continue
        got = True
        yield from _star(m, s1, lctx)
    if not got:
        yield goals


def _insert(goals: State, thms, all_goals: bool) -> State:
    if not thms or not goals:
        return goals
    props = [t.prop for t in thms]
    n = len(goals) if all_goals else 1
    out = []
    for i, g in enumerate(goals):
        if i < n:
            params, hyps, concl = strip_goal(g)
            k = len(params)
            extra = [incr_bounds(p, k) for p in props]
            out.append(mk_goal(params, hyps + extra, concl))
        else:
            out.append(g)
    return tuple(out)


def _instantiate(s: Subst, terms) -> tuple:
    return tuple(apply_subst(s, t) for t in terms)


def _split_rule(prop: Term) -> tuple[list[Term], Term]:
    prems = []
    while (d := dest_imp(prop)) is not None:
        prems.append(d[0])
        prop = d[1]
    return prems, prop


def _new_goal(params, hyps: list[Term], prem: Term) -> Term:
    """``⋀params. hyps ⟹ prem`` in normal form (prem may carry its own ⋀/⟹)."""
    pp, ph, pc = strip_goal(prem)
    k = len(pp)
    return mk_goal(list(params) + pp, [incr_bounds(h, k) for h in hyps] + ph, pc)


def tac_rule(rules: list[Theorem], goals: State) -> Iterator[State]:
    """Backward resolution of goal 1 with each rule in turn."""
    g, rest = goals[0], goals[1:]
    params, hyps, concl = strip_goal(g)
    bs = tuple(ty for _, ty in params)
    for thm in rules:
        prop = prepare_rule(thm.prop, list(goals))
        prems, rconcl = _split_rule(lift_over_params(prop, params))
        for s in unify(rconcl, concl, bs):
            new = [_new_goal(params, hyps, p) for p in prems]
            yield _instantiate(s, new + list(rest))


def tac_erule(rules: list[Theorem], goals: State) -> Iterator[State]:
    """Elimination: resolve goal 1 with a rule and solve its first premise
    with one of the goal's hypotheses, which is then dropped."""
    g, rest = goals[0], goals[1:]
    params, hyps, concl = strip_goal(g)
    bs = tuple(ty for _, ty in params)
    for thm in rules:
        prop = prepare_rule(thm.prop, list(goals))
        prems, rconcl = _split_rule(lift_over_params(prop, params))
        if not prems:
            continue
        major, others = prems[0], prems[1:]
        for i, h in enumerate(hyps):
            for s in unify_all([(bs, major, h), (bs, rconcl, concl)]):
                rest_hyps = hyps[:i] + hyps[i + 1:]
                new = [_new_goal(params, rest_hyps, p) for p in others]
                yield _instantiate(s, new + list(rest))


def tac_assumption(goals: State) -> Iterator[State]:
    g, rest = goals[0], goals[1:]
    params, hyps, concl = strip_goal(g)
    bs = tuple(ty for _, ty in params)
    for h in hyps:
        for s in unify(h, concl, bs):
            yield _instantiate(s, rest)


def tac_fact(thms: list[Theorem], goals: State) -> Iterator[State]:
    """Close goal 1 with a fact that unifies with it, either as a whole or
    as a rule whose premises are all hypotheses of the goal."""
    g, rest = goals[0], goals[1:]
    for thm in thms:
        prop = prepare_rule(thm.prop, list(goals))
        for s in unify(prop, g):
            yield _instantiate(s, rest)
    params, hyps, concl = strip_goal(g)
    if not params and not hyps:
        return
    for thm in thms:
        for state in tac_rule([thm], (g,)):
            closed = _close_by_assumption(state)
            if closed is not None:
                yield _instantiate(Subst(), rest)
                break


def _close_by_assumption(goals: State) -> Optional[State]:
    if not goals:
        return ()
    for s in tac_assumption(goals):
        r = _close_by_assumption(s)
        if r is not None:
            return r
    return None


# ---------------------------------------------------------------------------
# Simplification


def _simp_rules(add, lctx: LocalContext) -> list[RewriteRule]:
    pairs = [(n, t) for n in lctx.ctx.simp for t in lctx.ctx.facts.get(n, ())]
    pairs += list(lctx.simp_extra)
    for r in add:
        for t in resolve_fact_ref(r, lctx):
            pairs.append((r.render(), t))
    return rules_from(pairs)


_TRUE = Const(TRUE, BOOL)
_FALSE = Const(FALSE, BOOL)


def simp_goal(g: Term, rules: list[RewriteRule]) -> Optional[tuple]:
    """Simplify one goal.  Returns ``()`` when solved, ``(g',)`` when
    rewritten, ``None`` when nothing changed."""
    params, hyps, concl = strip_goal(g)
    bs = tuple(ty for _, ty in params)
    local: list[RewriteRule] = []
    new_hyps: list[Term] = []
    for h in hyps:
        h2 = normalize(h, rules + local, binders=bs)
        body = dest_trueprop(h2)
        if body == _FALSE:
            return ()
        if body == _TRUE:
            continue
        new_hyps.append(h2)
        local.extend(_hyp_rules(h2, bs))
    c2 = normalize(concl, rules + local, binders=bs)
    body = dest_trueprop(c2)
    if body == _TRUE or c2 in new_hyps:
        return ()
    out = mk_goal(params, new_hyps, c2)
    if out == g:
        return None
    return (out,)


def _hyp_rules(h: Term, bs: tuple) -> list[RewriteRule]:
    """Use a (simplified) hypothesis as a rewrite rule, if it is safe."""
    from .kernel import EQ, dest_binop
    body = dest_trueprop(h)
    if body is None:
        return []
    eq = dest_binop(body, EQ)
    if eq is not None:
        lhs, rhs = eq
        if not _occurs_in(lhs, rhs) and not vars_of(lhs):
            return [RewriteRule(lhs, rhs, "hyp")]
        return [RewriteRule(body, _TRUE, "hyp")]
    from .kernel import NOT, App
    if isinstance(body, App) and isinstance(body.fun, Const) and body.fun.name == NOT:
        return [RewriteRule(body.arg, _FALSE, "hyp")]
    if vars_of(body):
        return []
    return [RewriteRule(body, _TRUE, "hyp")]


def _occurs_in(small: Term, big: Term) -> bool:
    from .kernel import subterms
    return any(s == small for s in subterms(big))


def tac_simp(goals: State, rules: list[RewriteRule], n: int) -> Optional[State]:
    """Simplify the first ``n`` goals; fail if none of them changes."""
    out: list[Term] = []
    changed = False
    for i, g in enumerate(goals):
        if i >= n:
            out.append(g)
            continue
        r = simp_goal(g, rules)
        if r is None:
            out.append(g)
        else:
            changed = True
            out.extend(r)
    return tuple(out) if changed else None


def tac_auto(goals: State, lctx: LocalContext) -> Optional[State]:
    """Simplify every goal, then try to close each one by assumption or a
    bounded search with the default intro rules."""
    rules = _simp_rules((), lctx)
    intro = lctx.ctx.fact_list(lctx.ctx.intro)
    out: list[Term] = []
    changed = False
    for g in goals:
        r = simp_goal(g, rules)
        cur = (g,) if r is None else r
        if r is not None:
            changed = True
        for h in cur:
            if _auto_close(h, intro, rules, AUTO_DEPTH):
                changed = True
            else:
                out.append(h)
    return tuple(out) if changed else None


def _auto_close(g: Term, intro: list[Theorem], rules, depth: int) -> bool:
    if any(True for _ in islice(_guard(tac_assumption, (g,)), 1)):
        return True
    if depth == 0:
        return False
    for thm in intro:
        for state in islice(_guard(tac_rule, [thm], (g,)), 4):
            if all(_auto_close_simp(x, intro, rules, depth - 1) for x in state):
                return True
    return False


def _auto_close_simp(g: Term, intro, rules, depth: int) -> bool:
    r = simp_goal(g, rules)
    if r == ():
        return True
    return _auto_close(g if r is None else r[0], intro, rules, depth)
