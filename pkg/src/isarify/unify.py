"""Substitutions, higher-order pattern unification, matching and rule lifting.

Unification works on open terms: each equation carries the types of the
binders it sits under, so goal parameters appear as loose ``Bound`` indices.
Flex terms whose arguments are distinct bound variables are solved in the
Miller fragment.  Flex terms applied to schematic-free arguments are solved
by abstracting occurrences of those arguments, enumerated lazily; this is the
source of the alternatives that ``back`` walks through.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Iterator, Optional

from .kernel import (
    Abs, App, Bound, Const, Free, KernelError, Term, Theorem, Type, TVar, Var, beta_norm,
    dest_all, fun_type, incr_bounds, list_comb, loose_bounds, map_types, maxidx,
    mk_goal, strip_comb, strip_goal, subst_type, type_of, unify_types, vars_of,
    term_type_vars,
)


class NonPatternProblem(KernelError):
    pass


@dataclass(frozen=True)
class Subst:
    terms: dict = field(default_factory=dict)  # (name, index) -> Term
    types: dict = field(default_factory=dict)  # tvar name -> Type
    maxidx: int = -1

    def bind(self, v: Var, t: Term) -> "Subst":
        terms = dict(self.terms)
        terms[v.key] = t
        return Subst(terms, self.types, self.maxidx)

    def with_types(self, types: dict) -> "Subst":
        return Subst(self.terms, types, self.maxidx)

    def fresh_var(self, name: str, ty: Type) -> tuple[Var, "Subst"]:
        idx = self.maxidx + 1
        return Var(name, idx, ty), Subst(self.terms, self.types, idx)

    def normalized(self) -> "Subst":
        """Fully resolved bindings (idempotent form)."""
        terms = {k: apply_subst(self, v) for k, v in self.terms.items()}
        types = {k: subst_type(v, self.types) for k, v in self.types.items()}
        return Subst(terms, types, self.maxidx)

    def __len__(self) -> int:
        return len(self.terms)


EMPTY = Subst()


def apply_subst(s: Subst, t: Term) -> Term:
    """Instantiate schematics (and type variables) and beta-normalize."""
    if not s.terms and not s.types:
        return t
    return beta_norm(_inst(s, t))


def _inst(s: Subst, t: Term) -> Term:
    if isinstance(t, Var):
        if t.key in s.terms:
            return _inst(s, s.terms[t.key])
        return Var(t.name, t.index, subst_type(t.ty, s.types)) if s.types else t
    if isinstance(t, (Const, Free)):
        return type(t)(t.name, subst_type(t.ty, s.types)) if s.types else t
    if isinstance(t, Abs):
        return Abs(t.hint, subst_type(t.ty, s.types), _inst(s, t.body))
    if isinstance(t, App):
        return App(_inst(s, t.fun), _inst(s, t.arg))
    return t


def _occurs(s: Subst, key: tuple, t: Term) -> bool:
    return any(v.key == key for v in vars_of(apply_subst(s, t)))


def _type_of(s: Subst, t: Term, bs: tuple) -> Type:
    if s.types:
        t = map_types(t, lambda ty: subst_type(ty, s.types))
        bs = tuple(subst_type(b, s.types) for b in bs)
    return type_of(t, bs)


# ---------------------------------------------------------------------------
# Unification


def unify(t: Term, u: Term, binders: tuple = (), subst: Optional[Subst] = None) -> Iterator[Subst]:
    """Lazily enumerate unifiers of ``t`` and ``u`` (deterministic order)."""
    return unify_all([(binders, t, u)], subst)


def unify_all(eqs: list, subst: Optional[Subst] = None) -> Iterator[Subst]:
    s = subst if subst is not None else EMPTY
    m = maxidx([t for _, a, b in eqs for t in (a, b)])
    if m > s.maxidx:
        s = Subst(s.terms, s.types, m)
    return _solve(list(eqs), s, 0)


def _solve(eqs: list, s: Subst, stuck: int) -> Iterator[Subst]:
    if not eqs:
        yield s
        return
    (bs, t, u), rest = eqs[0], eqs[1:]
    t = apply_subst(s, t)
    u = apply_subst(s, u)
    if t == u:
        yield from _solve(rest, s, 0)
        return
    if isinstance(t, Abs) or isinstance(u, Abs):
        if isinstance(t, Abs) and isinstance(u, Abs):
            ts = unify_types(t.ty, u.ty, s.types)
            if ts is None:
                return
            yield from _solve([(bs + (t.ty,), t.body, u.body)] + rest, s.with_types(ts), 0)
            return
        lam, other = (t, u) if isinstance(t, Abs) else (u, t)
        eta = App(incr_bounds(other, 1), Bound(0))
        yield from _solve([(bs + (lam.ty,), lam.body, eta)] + rest, s, 0)
        return
    ht, ta = strip_comb(t)
    hu, ua = strip_comb(u)
    tflex, uflex = isinstance(ht, Var), isinstance(hu, Var)
    if not tflex and not uflex:
        s2 = _rigid_heads(ht, hu, s)
        if s2 is None or len(ta) != len(ua):
            return
        yield from _solve([(bs, a, b) for a, b in zip(ta, ua)] + rest, s2, 0)
        return
    if not tflex:
        ht, ta, hu, ua, t, u = hu, ua, ht, ta, u, t
        tflex, uflex = uflex, tflex
    if uflex and _is_pattern(ta) and _is_pattern(ua):
        for s2 in _flex_flex(bs, ht, ta, hu, ua, s):
            yield from _solve(rest, s2, 0)
        return
    if not uflex and _is_pattern(ta):
        s2 = _flex_rigid_pattern(bs, ht, ta, u, s)
        if s2 is not None:
            yield from _solve(rest, s2, 0)
        return
    if rest and stuck <= len(rest):
        yield from _solve(rest + [(bs, t, u)], s, stuck + 1)
        return
    if any(vars_of(a) for a in ta):
        raise NonPatternProblem(f"schematic {ht.name} applied to non-pattern arguments")
    for s2 in _abstract_occurrences(bs, ht, ta, u, s):
        yield from _solve(rest, s2, 0)


def _rigid_heads(a: Term, b: Term, s: Subst) -> Optional[Subst]:
    if isinstance(a, Bound) and isinstance(b, Bound):
        return s if a.index == b.index else None
    if type(a) is not type(b) or not isinstance(a, (Const, Free)) or a.name != b.name:
        return None
    ts = unify_types(a.ty, b.ty, s.types)
    return None if ts is None else s.with_types(ts)


def _is_pattern(args: list) -> bool:
    idx = [a.index for a in args if isinstance(a, Bound)]
    return len(idx) == len(args) and len(set(idx)) == len(idx)


def _bind_checked(bs: tuple, v: Var, body_args: list, body: Term, s: Subst) -> Optional[Subst]:
    """Bind ``v`` to ``λargs. body`` after type and occurs checks."""
    arg_tys = [_type_of(s, a, bs) for a in body_args]
    lam = body
    for a, ty in reversed(list(zip(body_args, arg_tys))):
        lam = Abs("x", ty, lam)
    try:
        res_ty = _type_of(s, lam, ())
    except KernelError:
        return None
    ts = unify_types(v.ty, res_ty, s.types)
    if ts is None:
        return None
    s = s.with_types(ts)
    if _occurs(s, v.key, lam):
        return None
    return s.bind(v, lam)


def _rename_bounds(u: Term, mapping: dict[int, int]) -> Optional[Term]:
    """Map loose bounds of ``u`` through ``mapping`` (None if one is missing)."""

    def go(t: Term, d: int) -> Term:
        if isinstance(t, Bound):
            if t.index < d:
                return t
            j = t.index - d
            if j not in mapping:
                raise _Escape
            return Bound(mapping[j] + d)
        if isinstance(t, Abs):
            return Abs(t.hint, t.ty, go(t.body, d + 1))
        if isinstance(t, App):
            return App(go(t.fun, d), go(t.arg, d))
        return t

    try:
        return go(u, 0)
    except _Escape:
        return None


class _Escape(Exception):
    pass


def _flex_rigid_pattern(bs: tuple, v: Var, args: list, u: Term, s: Subst) -> Optional[Subst]:
    n = len(args)
    mapping = {a.index: n - 1 - k for k, a in enumerate(args)}
    body = _rename_bounds(u, mapping)
    if body is None:
        return None
    return _bind_checked(bs, v, args, body, s)


def _flex_flex(bs, f: Var, fa: list, g: Var, ga: list, s: Subst) -> Iterator[Subst]:
    res_ty = _type_of(s, list_comb(f, fa), bs)
    if f.key == g.key:
        if len(fa) != len(ga):
            return
        common = [k for k, (a, b) in enumerate(zip(fa, ga)) if a.index == b.index]
        tys = [_type_of(s, fa[k], bs) for k in common]
        h, s = s.fresh_var(f.name, fun_type(*tys, res_ty))
        n = len(fa)
        body = list_comb(h, [Bound(n - 1 - k) for k in common])
        s2 = _bind_checked(bs, f, fa, body, s)
        if s2 is not None:
            yield s2
        return
    gidx = [b.index for b in ga]
    common = [a for a in fa if a.index in gidx]
    tys = [_type_of(s, a, bs) for a in common]
    h, s = s.fresh_var(f.name, fun_type(*tys, res_ty))
    nf, ng = len(fa), len(ga)
    fpos = {a.index: k for k, a in enumerate(fa)}
    gpos = {a.index: k for k, a in enumerate(ga)}
    fbody = list_comb(h, [Bound(nf - 1 - fpos[a.index]) for a in common])
    gbody = list_comb(h, [Bound(ng - 1 - gpos[a.index]) for a in common])
    s2 = _bind_checked(bs, f, fa, fbody, s)
    if s2 is None:
        return
    s3 = _bind_checked(bs, g, ga, gbody, s2)
    if s3 is not None:
        yield s3


def _abstract_occurrences(bs: tuple, v: Var, args: list, u: Term, s: Subst) -> Iterator[Subst]:
    """Solve ``?v args = u`` for schematic-free ``args`` by choosing, for every
    outermost occurrence of an argument in ``u``, whether to abstract it.
    The all-abstracted solution comes first; the first occurrence toggles
    fastest."""
    n = len(args)
    occs: list[tuple[tuple, list[int]]] = []

    def scan(t: Term, d: int, path: tuple) -> None:
        hits = [k for k, a in enumerate(args) if incr_bounds(a, d) == t]
        if hits:
            occs.append((path, hits))
            return
        if isinstance(t, Abs):
            scan(t.body, d + 1, path + (0,))
        elif isinstance(t, App):
            scan(t.fun, d, path + (0,))
            scan(t.arg, d, path + (1,))

    scan(u, 0, ())
    options = [hits + [None] for _, hits in occs]
    for combo in product(*reversed(options)):
        choice = {occs[i][0]: k for i, k in enumerate(reversed(combo))}
        body = _build_abstraction(u, n, choice)
        if body is None:
            continue
        s2 = _bind_checked(bs, v, args, body, s)
        if s2 is not None:
            yield s2


def _build_abstraction(u: Term, n: int, choice: dict) -> Optional[Term]:
    def go(t: Term, d: int, path: tuple) -> Term:
        k = choice.get(path, None) if path in choice else None
        if path in choice and k is not None:
            return Bound(d + n - 1 - k)
        if isinstance(t, Bound):
            if t.index >= d:
                raise _Escape
            return t
        if isinstance(t, Abs):
            return Abs(t.hint, t.ty, go(t.body, d + 1, path + (0,)))
        if isinstance(t, App):
            return App(go(t.fun, d, path + (0,)), go(t.arg, d, path + (1,)))
        return t

    try:
        return go(u, 0, ())
    except _Escape:
        return None


# ---------------------------------------------------------------------------
# Matching


def match_pattern(pat: Term, t: Term, subst: Optional[Subst] = None,
                  binders: tuple = ()) -> Optional[Subst]:
    """One-sided first-order matching: only ``pat`` may contain schematics.
    ``binders`` types the loose bounds of ``t``."""
    s = subst if subst is not None else EMPTY
    return _match(pat, t, 0, s, tuple(binders))


def _match(p: Term, t: Term, d: int, s: Subst, bs: tuple) -> Optional[Subst]:
    if isinstance(p, Var):
        if any(b < d for b in loose_bounds(t)):
            return None
        val = incr_bounds(t, -d) if d else t
        outer = bs[:len(bs) - d] if d else bs
        try:
            vty = type_of(val, outer)
        except KernelError:
            return None
        ts = unify_types(p.ty, vty, s.types)
        if ts is None:
            return None
        s = s.with_types(ts)
        if p.key in s.terms:
            return s if apply_subst(s, s.terms[p.key]) == val else None
        return s.bind(p, val)
    if isinstance(p, (Const, Free)):
        if type(p) is not type(t) or p.name != t.name:
            return None
        ts = unify_types(p.ty, t.ty, s.types)
        return None if ts is None else s.with_types(ts)
    if isinstance(p, Bound):
        return s if p == t else None
    if isinstance(p, Abs):
        if not isinstance(t, Abs):
            return None
        ts = unify_types(p.ty, t.ty, s.types)
        if ts is None:
            return None
        return _match(p.body, t.body, d + 1, s.with_types(ts), bs + (t.ty,))
    if isinstance(p, App):
        if not isinstance(t, App):
            return None
        s2 = _match(p.fun, t.fun, d, s, bs)
        return None if s2 is None else _match(p.arg, t.arg, d, s2, bs)
    return None


# ---------------------------------------------------------------------------
# Lifting


def rename_apart(prop: Term, inc: int) -> Term:
    """Shift schematic indices and rename type variables of a stored theorem
    so they are fresh relative to a state whose maximal index is ``inc - 1``."""
    tv = {v: TVar(f"{v}_{inc}") for v in term_type_vars(prop)}

    def go(t: Term) -> Term:
        if isinstance(t, Var):
            return Var(t.name, t.index + inc, subst_type(t.ty, tv))
        if isinstance(t, Abs):
            return Abs(t.hint, subst_type(t.ty, tv), go(t.body))
        if isinstance(t, App):
            return App(go(t.fun), go(t.arg))
        if isinstance(t, (Const, Free)):
            return type(t)(t.name, subst_type(t.ty, tv))
        return t

    return go(prop)


def varify_params(prop: Term, index: int) -> Term:
    """Turn outermost meta-quantified variables into schematics."""
    from .kernel import subst_bound
    while True:
        a = dest_all(prop)
        if a is None:
            return prop
        prop = subst_bound(Var(a.hint, index, a.ty), a.body)


def lift_over_params(t: Term, params: list[tuple[str, Type]]) -> Term:
    """Replace each schematic ``?v :: τ`` by ``?v :: T1 ⇒ … ⇒ τ`` applied to the
    goal parameters (loose bounds, Bound 0 = last param)."""
    if not params:
        return t
    n = len(params)
    ptys = [ty for _, ty in params]

    def go(u: Term, d: int) -> Term:
        if isinstance(u, Var):
            lifted = Var(u.name, u.index, fun_type(*ptys, u.ty))
            return list_comb(lifted, [Bound(d + n - 1 - k) for k in range(n)])
        if isinstance(u, Abs):
            return Abs(u.hint, u.ty, go(u.body, d + 1))
        if isinstance(u, App):
            return App(go(u.fun, d), go(u.arg, d))
        return u

    return go(incr_bounds(t, n), 0)


def prepare_rule(prop: Term, goal_terms: list[Term]) -> Term:
    """Fresh, schematic copy of a rule relative to the given goal terms."""
    inc = maxidx(goal_terms) + 1
    return varify_params(rename_apart(prop, inc), inc)


def lift_rule(rule: Theorem, goal: Term, ctx=None) -> Theorem:
    """Lift a rule over the parameters and hypotheses of ``goal``: every
    premise and the conclusion become ``⋀params. hyps ⟹ …``."""
    from .kernel import dest_imp, mk_imp
    params, hyps, _ = strip_goal(goal)
    prop = prepare_rule(rule.prop, [goal])
    if not params and not hyps:
        return Theorem(prop, rule.provenance)
    prems = []
    t = prop
    while (d := dest_imp(t)) is not None:
        prems.append(d[0])
        t = d[1]

    def wrap(x: Term) -> Term:
        return mk_goal(params, hyps, lift_over_params(x, params))

    out = wrap(t)
    for p in reversed(prems):
        out = mk_imp(wrap(p), out)
    return Theorem(out, rule.provenance)
