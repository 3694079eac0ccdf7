"""Brute-force reference implementations used as test oracles.

None of these share code with the package beyond the term datatypes."""

from __future__ import annotations

import itertools
from typing import Optional

from isarify.kernel import Abs, App, Bound, Const, Free, TBase, TFun, Term, Var

I = TBase("i")


# ---------------------------------------------------------------------------
# first-order terms as nested tuples: ("v", name) or ("f", name, args)

def fo_to_term(t) -> Term:
    if t[0] == "v":
        return Var(t[1], 0, I)
    name, args = t[1], t[2]
    ty = I
    for _ in args:
        ty = TFun(I, ty)
    out: Term = Const(name, ty)
    for a in args:
        out = App(out, fo_to_term(a))
    return out


def term_to_fo(t: Term):
    args = []
    while isinstance(t, App):
        args.append(term_to_fo(t.arg))
        t = t.fun
    if isinstance(t, Var):
        assert not args
        return ("v", f"{t.name}.{t.index}")
    assert isinstance(t, Const), t
    return ("f", t.name, tuple(reversed(args)))


def fo_subst(s: dict, t):
    if t[0] == "v":
        return fo_subst(s, s[t[1]]) if t[1] in s else t
    return ("f", t[1], tuple(fo_subst(s, a) for a in t[2]))


def fo_occurs(s: dict, name: str, t) -> bool:
    t = fo_subst(s, t)
    if t[0] == "v":
        return t[1] == name
    return any(fo_occurs(s, name, a) for a in t[2])


def robinson(a, b) -> Optional[dict]:
    """Most general unifier by the textbook equation-solving procedure."""
    s: dict = {}
    todo = [(a, b)]
    while todo:
        x, y = todo.pop()
        x, y = fo_subst(s, x), fo_subst(s, y)
        if x == y:
            continue
        if x[0] != "v" and y[0] == "v":
            x, y = y, x
        if x[0] == "v":
            if fo_occurs(s, x[1], y):
                return None
            s[x[1]] = y
            continue
        if x[1] != y[1] or len(x[2]) != len(y[2]):
            return None
        todo.extend(zip(x[2], y[2]))
    return s


def fo_variant(a, b) -> bool:
    """Equal up to a bijective renaming of variables."""
    fwd: dict = {}
    bwd: dict = {}

    def go(x, y) -> bool:
        if x[0] == "v" or y[0] == "v":
            if x[0] != y[0]:
                return False
            if fwd.setdefault(x[1], y[1]) != y[1] or bwd.setdefault(y[1], x[1]) != x[1]:
                return False
            return True
        return x[1] == y[1] and len(x[2]) == len(y[2]) and all(map(go, x[2], y[2]))

    return go(a, b)


def fo_match(pat, t) -> Optional[dict]:
    """One-sided matching; variables of ``t`` are treated as constants."""
    s: dict = {}

    def go(p, u) -> bool:
        if p[0] == "v":
            if p[1] in s:
                return s[p[1]] == u
            s[p[1]] = u
            return True
        return u[0] == "f" and p[1] == u[1] and len(p[2]) == len(u[2]) and all(map(go, p[2], u[2]))

    return s if go(pat, t) else None


# ---------------------------------------------------------------------------
# maximum matching of goal lists

def max_alpha_matching(pre, post, eq) -> int:
    """Size of a maximum matching between ``pre`` and ``post`` under ``eq``,
    by trying every injective assignment."""
    best = 0
    n, m = len(pre), len(post)
    for k in range(min(n, m), 0, -1):
        for left in itertools.combinations(range(n), k):
            for right in itertools.permutations(range(m), k):
                if all(eq(pre[i], post[j]) for i, j in zip(left, right)):
                    return k
    return best


# ---------------------------------------------------------------------------
# comments

def strip_comments(src: str) -> Optional[str]:
    """Remove nested ``(* … *)`` comments with a depth counter; ``None`` when
    a comment is left open."""
    out, depth, i = [], 0, 0
    while i < len(src):
        two = src[i:i + 2]
        if two == "(*":
            depth += 1
            i += 2
        elif two == "*)" and depth:
            depth -= 1
            i += 2
        else:
            if depth == 0:
                out.append(src[i])
            i += 1
    return None if depth else "".join(out)


# ---------------------------------------------------------------------------
# rewriting

def term_match(p: Term, t: Term, s: dict) -> Optional[dict]:
    """First-order matching on kernel terms without binders in ``p``."""
    if isinstance(p, Var):
        if p.key in s:
            return s if s[p.key] == t else None
        s = dict(s)
        s[p.key] = t
        return s
    if isinstance(p, App):
        if not isinstance(t, App):
            return None
        s2 = term_match(p.fun, t.fun, s)
        return None if s2 is None else term_match(p.arg, t.arg, s2)
    if isinstance(p, (Const, Free)):
        return s if isinstance(t, type(p)) and t.name == p.name else None
    return s if p == t else None


def term_inst(s: dict, t: Term) -> Term:
    if isinstance(t, Var):
        return s.get(t.key, t)
    if isinstance(t, App):
        return App(term_inst(s, t.fun), term_inst(s, t.arg))
    if isinstance(t, Abs):
        return Abs(t.hint, t.ty, term_inst(s, t.body))
    return t


def one_step_reducts(t: Term, rules) -> list[Term]:
    """Every term reachable by one rewrite at any position with any rule."""
    out = []
    for r in rules:
        s = term_match(r.lhs, t, {})
        if s is not None:
            out.append(term_inst(s, r.rhs))
    if isinstance(t, App):
        out += [App(f, t.arg) for f in one_step_reducts(t.fun, rules)]
        out += [App(t.fun, a) for a in one_step_reducts(t.arg, rules)]
    return out


def all_normal_forms(t: Term, rules, limit: int = 20000) -> set:
    seen = {t}
    todo = [t]
    nfs = set()
    while todo:
        u = todo.pop()
        nxt = one_step_reducts(u, rules)
        if not nxt:
            nfs.add(u)
        for v in nxt:
            if v not in seen:
                seen.add(v)
                todo.append(v)
                if len(seen) > limit:
                    raise RuntimeError("rewrite search space too large")
    return nfs


def has_binder(t: Term) -> bool:
    if isinstance(t, Abs):
        return True
    if isinstance(t, App):
        return has_binder(t.fun) or has_binder(t.arg)
    return isinstance(t, Bound)


# ---------------------------------------------------------------------------
# segment partition

def partition_by_scan(flags: list[bool]) -> list[tuple[str, list[int]]]:
    """Segments of positions given whether each step leaves a schematic goal.
    Position i is raw iff it leaves a schematic or its predecessor did."""
    raw = [f or (i > 0 and flags[i - 1]) for i, f in enumerate(flags)]
    out: list[tuple[str, list[int]]] = []
    for i, r in enumerate(raw):
        kind = "raw" if r else "plain"
        # a raw run closes after a step without schematics
        starts_new = (not out or out[-1][0] != kind
                      or (kind == "raw" and not flags[i - 1]))
        if starts_new:
            out.append((kind, [i]))
        else:
            out[-1][1].append(i)
    return out


# ---------------------------------------------------------------------------
# random first-order problems

FUNS = (("f", 2), ("g", 1), ("a", 0), ("b", 0))
VARS = ("x", "y", "z")


def random_fo_term(rng, depth: int):
    if depth <= 1 or rng.random() < 0.3:
        if rng.random() < 0.5:
            return ("v", rng.choice(VARS))
        name = rng.choice(("a", "b"))
        return ("f", name, ())
    name, ar = rng.choice(FUNS[:2])
    return ("f", name, tuple(random_fo_term(rng, depth - 1) for _ in range(ar)))


def _mutate(rng, t, depth: int):
    r = rng.random()
    if r < 0.2:
        return ("v", rng.choice(VARS))
    if t[0] == "v" and r < 0.5:
        return random_fo_term(rng, max(depth, 1))
    if t[0] == "f":
        return ("f", t[1], tuple(_mutate(rng, a, depth - 1) for a in t[2]))
    return t


def fo_depth(t) -> int:
    return 1 if t[0] == "v" or not t[2] else 1 + max(fo_depth(a) for a in t[2])


def random_fo_problem(rng, max_depth: int = 4):
    """A pair of terms of depth at most ``max_depth``; about half are related
    by mutation so that many of them unify."""
    a = random_fo_term(rng, max_depth)
    if rng.random() < 0.6:
        b = _mutate(rng, a, max_depth)
        if fo_depth(b) > max_depth:
            b = random_fo_term(rng, max_depth)
    else:
        b = random_fo_term(rng, max_depth)
    return a, b
