"""Directed rewriting: the engine behind simp, simp_all, auto and unfolding."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Optional

from .budget import check_deadline
from .kernel import (
    BOOL, EQ, EQUIV, FALSE, NOT, TRUE, Abs, App, Const, KernelError, Term, TFun, Theorem,
    Var, dest_binop, dest_imp, dest_trueprop, maxidx, vars_of,
)
from .unify import apply_subst, match_pattern, rename_apart, varify_params

log = logging.getLogger(__name__)
_NOT_TY = TFun(BOOL, BOOL)

DEFAULT_MAX_STEPS = 10_000
MAX_TERM_DEPTH = 300  # rewriting past this depth is treated as divergence


class IllFormedRule(KernelError):
    pass


class StepBudgetExceeded(KernelError):
    pass


@dataclass(frozen=True)
class RewriteRule:
    lhs: Term
    rhs: Term
    name: str = ""


def rules_of(thm: Theorem, name: str = "") -> list[RewriteRule]:
    """Rewrite rules read off a theorem.  Equations rewrite left to right;
    any other unconditional fact ``P`` becomes ``P = True`` (``¬P`` becomes
    ``P = False``).  Conditional facts are skipped."""
    prop = varify_params(thm.prop, 0)
    if dest_imp(prop) is not None:
        log.warning("ignoring conditional rewrite rule %s", name or prop)
        return []
    eq = dest_binop(prop, EQUIV)
    if eq is None:
        body = dest_trueprop(prop)
        if body is None:
            return []
        eq = dest_binop(body, EQ)
        if eq is None:
            if isinstance(body, App) and body.fun == Const(NOT, _NOT_TY):
                eq = (body.arg, Const(FALSE, BOOL))
            elif body == Const(TRUE, BOOL):
                return []
            else:
                eq = (body, Const(TRUE, BOOL))
    lhs, rhs = eq
    lvars = {v.key for v in vars_of(lhs)}
    if any(v.key not in lvars for v in vars_of(rhs)):
        raise IllFormedRule(f"rule {name or ''} introduces schematics on its right-hand side")
    if isinstance(lhs, Var):
        raise IllFormedRule(f"rule {name or ''} has a bare schematic left-hand side")
    return [RewriteRule(lhs, rhs, name)]


def rules_from(thms: Iterable[tuple[str, Theorem]]) -> list[RewriteRule]:
    out: list[RewriteRule] = []
    for name, thm in thms:
        try:
            out.extend(rules_of(thm, name))
        except IllFormedRule as e:
            log.warning("%s", e)
    return out


def _fresh_rules(rules: list[RewriteRule], t: Term) -> list[RewriteRule]:
    inc = maxidx([t]) + 1
    if inc == 0:
        return rules
    return [RewriteRule(rename_apart(r.lhs, inc), rename_apart(r.rhs, inc), r.name)
            for r in rules]


def rewrite_step(t: Term, rules: list[RewriteRule], binders: tuple = ()) -> Optional[Term]:
    """Rewrite the leftmost-outermost redex of ``t``; ``None`` if there is none."""
    rules = _fresh_rules(rules, t)
    return _step(t, rules, tuple(binders))


def _step(t: Term, rules: list[RewriteRule], bs: tuple) -> Optional[Term]:
    for r in rules:
        s = match_pattern(r.lhs, t, binders=bs)
        if s is not None:
            out = apply_subst(s, r.rhs)
            if out != t:
                return out
    if isinstance(t, Abs):
        b = _step(t.body, rules, bs + (t.ty,))
        return None if b is None else Abs(t.hint, t.ty, b)
    if isinstance(t, App):
        f = _step(t.fun, rules, bs)
        if f is not None:
            return App(f, t.arg)
        a = _step(t.arg, rules, bs)
        if a is not None:
            return App(t.fun, a)
    return None


def _depth(t: Term) -> int:
    best, todo = 0, [(t, 1)]
    while todo:
        u, d = todo.pop()
        best = max(best, d)
        if isinstance(u, App):
            todo.append((u.fun, d + 1))
            todo.append((u.arg, d + 1))
        elif isinstance(u, Abs):
            todo.append((u.body, d + 1))
    return best


def normalize(t: Term, rules: list[RewriteRule], max_steps: int = DEFAULT_MAX_STEPS,
              binders: tuple = ()) -> Term:
    """Rewrite to a fixpoint, raising :class:`StepBudgetExceeded` after
    ``max_steps`` steps."""
    rules = _fresh_rules(rules, t)
    bs = tuple(binders)
    for _ in range(max_steps):
        nxt = _step(t, rules, bs)
        if nxt is None:
            return t
        t = nxt
        check_deadline()
        if _depth(t) > MAX_TERM_DEPTH:
            raise StepBudgetExceeded(f"rewriting grew a term beyond depth {MAX_TERM_DEPTH}")
    if _step(t, rules, bs) is None:
        return t
    raise StepBudgetExceeded(f"rewriting did not terminate within {max_steps} steps")
