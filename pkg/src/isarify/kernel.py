"""Types, terms, theorems and theory contexts for a small Pure-style meta-logic.

Terms use de Bruijn indices for bound variables.  ``Abs.hint`` is excluded from
equality and hashing, so ``==`` on terms is alpha-equivalence (types included).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional


class KernelError(Exception):
    pass


class TypeCheckError(KernelError):
    pass


# ---------------------------------------------------------------------------
# Types


class Type:
    __slots__ = ()


@dataclass(frozen=True)
class TBase(Type):
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class TFun(Type):
    dom: Type
    cod: Type

    def __str__(self) -> str:
        d = str(self.dom)
        if isinstance(self.dom, TFun):
            d = f"({d})"
        return f"{d} ⇒ {self.cod}"


@dataclass(frozen=True)
class TVar(Type):
    """Type variable: ``'a`` in polymorphic theorems, ``?T<n>`` during inference."""

    name: str

    def __str__(self) -> str:
        return self.name


PROP = TBase("prop")
BOOL = TBase("bool")


def fun_type(*tys: Type) -> Type:
    """``fun_type(a, b, c)`` is ``a ⇒ b ⇒ c``."""
    out = tys[-1]
    for ty in reversed(tys[:-1]):
        out = TFun(ty, out)
    return out


def strip_fun_type(ty: Type) -> tuple[list[Type], Type]:
    args = []
    while isinstance(ty, TFun):
        args.append(ty.dom)
        ty = ty.cod
    return args, ty


def type_vars(ty: Type, acc: Optional[set] = None) -> set[str]:
    acc = set() if acc is None else acc
    if isinstance(ty, TVar):
        acc.add(ty.name)
    elif isinstance(ty, TFun):
        type_vars(ty.dom, acc)
        type_vars(ty.cod, acc)
    return acc


def subst_type(ty: Type, tsub: dict[str, Type]) -> Type:
    if not tsub:
        return ty
    if isinstance(ty, TVar):
        if ty.name in tsub:
            return subst_type(tsub[ty.name], tsub)
        return ty
    if isinstance(ty, TFun):
        return TFun(subst_type(ty.dom, tsub), subst_type(ty.cod, tsub))
    return ty


def unify_types(a: Type, b: Type, tsub: dict[str, Type]) -> Optional[dict[str, Type]]:
    """Extend ``tsub`` so that ``a`` and ``b`` become equal; ``None`` on clash."""
    a = subst_type(a, tsub)
    b = subst_type(b, tsub)
    if a == b:
        return tsub
    if isinstance(a, TVar):
        if a.name in type_vars(b):
            return None
        return {**tsub, a.name: b}
    if isinstance(b, TVar):
        return unify_types(b, a, tsub)
    if isinstance(a, TFun) and isinstance(b, TFun):
        tsub = unify_types(a.dom, b.dom, tsub)
        if tsub is None:
            return None
        return unify_types(a.cod, b.cod, tsub)
    return None


# ---------------------------------------------------------------------------
# Terms


class Term:
    __slots__ = ()


@dataclass(frozen=True)
class Const(Term):
    name: str
    ty: Type


@dataclass(frozen=True)
class Free(Term):
    name: str
    ty: Type


@dataclass(frozen=True)
class Var(Term):
    """Schematic variable ``?name``; identity is the pair (name, index)."""

    name: str
    index: int
    ty: Type

    @property
    def key(self) -> tuple[str, int]:
        return (self.name, self.index)


@dataclass(frozen=True)
class Bound(Term):
    index: int


@dataclass(frozen=True)
class Abs(Term):
    hint: str = field(compare=False)
    ty: Type
    body: Term


@dataclass(frozen=True)
class App(Term):
    fun: Term
    arg: Term


# meta connectives and prelude constants; symbolic names never clash with identifiers
IMP = "⟹"
ALL = "⋀"
EQUIV = "≡"
TRUEPROP = "Trueprop"
CONJ = "∧"
DISJ = "∨"
IMPL = "⟶"
NOT = "¬"
EQ = "="
FORALL = "∀"
EXISTS = "∃"
TRUE = "True"
FALSE = "False"

_A = TVar("'a")

META_CONSTS: dict[str, Type] = {
    IMP: fun_type(PROP, PROP, PROP),
    ALL: fun_type(TFun(_A, PROP), PROP),
    EQUIV: fun_type(_A, _A, PROP),
    TRUEPROP: TFun(BOOL, PROP),
}


def imp_const() -> Const:
    return Const(IMP, META_CONSTS[IMP])


def mk_imp(a: Term, b: Term) -> Term:
    return App(App(imp_const(), a), b)


def list_imp(hyps: Iterable[Term], concl: Term) -> Term:
    for h in reversed(list(hyps)):
        concl = mk_imp(h, concl)
    return concl


def mk_all(name: str, ty: Type, body: Term) -> Term:
    """Meta-quantify an already-abstracted body (Bound 0 is the new variable)."""
    return App(Const(ALL, TFun(TFun(ty, PROP), PROP)), Abs(name, ty, body))


def list_all(params: Iterable[tuple[str, Type]], body: Term) -> Term:
    for name, ty in reversed(list(params)):
        body = mk_all(name, ty, body)
    return body


def mk_trueprop(t: Term) -> Term:
    return App(Const(TRUEPROP, META_CONSTS[TRUEPROP]), t)


def mk_equiv(a: Term, b: Term, ty: Type) -> Term:
    return App(App(Const(EQUIV, fun_type(ty, ty, PROP)), a), b)


def mk_bool_const(name: str) -> Const:
    return Const(name, BOOL)


def dest_binop(t: Term, name: str) -> Optional[tuple[Term, Term]]:
    if isinstance(t, App) and isinstance(t.fun, App) and isinstance(t.fun.fun, Const) \
            and t.fun.fun.name == name:
        return t.fun.arg, t.arg
    return None


def dest_imp(t: Term) -> Optional[tuple[Term, Term]]:
    return dest_binop(t, IMP)


def dest_all(t: Term) -> Optional[Abs]:
    if isinstance(t, App) and isinstance(t.fun, Const) and t.fun.name == ALL \
            and isinstance(t.arg, Abs):
        return t.arg
    return None


def dest_trueprop(t: Term) -> Optional[Term]:
    if isinstance(t, App) and isinstance(t.fun, Const) and t.fun.name == TRUEPROP:
        return t.arg
    return None


def strip_comb(t: Term) -> tuple[Term, list[Term]]:
    args = []
    while isinstance(t, App):
        args.append(t.arg)
        t = t.fun
    args.reverse()
    return t, args


def list_comb(head: Term, args: Iterable[Term]) -> Term:
    for a in args:
        head = App(head, a)
    return head


# ---------------------------------------------------------------------------
# de Bruijn machinery


def loose_bounds(t: Term, lev: int = 0, acc: Optional[set] = None) -> set[int]:
    """Loose bound indices of ``t``, relative to the outside of ``t``."""
    acc = set() if acc is None else acc
    if isinstance(t, Bound):
        if t.index >= lev:
            acc.add(t.index - lev)
    elif isinstance(t, Abs):
        loose_bounds(t.body, lev + 1, acc)
    elif isinstance(t, App):
        loose_bounds(t.fun, lev, acc)
        loose_bounds(t.arg, lev, acc)
    return acc


def is_closed(t: Term) -> bool:
    return not loose_bounds(t)


def incr_bounds(t: Term, inc: int, lev: int = 0) -> Term:
    if inc == 0:
        return t
    if isinstance(t, Bound):
        return Bound(t.index + inc) if t.index >= lev else t
    if isinstance(t, Abs):
        return Abs(t.hint, t.ty, incr_bounds(t.body, inc, lev + 1))
    if isinstance(t, App):
        return App(incr_bounds(t.fun, inc, lev), incr_bounds(t.arg, inc, lev))
    return t


def subst_bound(arg: Term, body: Term) -> Term:
    """Instantiate Bound 0 of ``body`` (the body of an Abs) with ``arg``."""

    def go(t: Term, lev: int) -> Term:
        if isinstance(t, Bound):
            if t.index > lev:
                return Bound(t.index - 1)
            if t.index == lev:
                return incr_bounds(arg, lev)
            return t
        if isinstance(t, Abs):
            return Abs(t.hint, t.ty, go(t.body, lev + 1))
        if isinstance(t, App):
            return App(go(t.fun, lev), go(t.arg, lev))
        return t

    return go(body, 0)


def abstract_over(t: Term, target: Term) -> Term:
    """Replace occurrences of the closed term ``target`` in ``t`` by Bound 0
    (``t`` becomes the body of a new Abs)."""

    def go(u: Term, lev: int) -> Term:
        if u == target:
            return Bound(lev)
        if isinstance(u, Bound):
            return Bound(u.index + 1) if u.index >= lev else u
        if isinstance(u, Abs):
            return Abs(u.hint, u.ty, go(u.body, lev + 1))
        if isinstance(u, App):
            return App(go(u.fun, lev), go(u.arg, lev))
        return u

    return go(t, 0)


def beta_norm(t: Term) -> Term:
    if isinstance(t, Abs):
        return Abs(t.hint, t.ty, beta_norm(t.body))
    if isinstance(t, App):
        f = beta_norm(t.fun)
        a = beta_norm(t.arg)
        if isinstance(f, Abs):
            return beta_norm(subst_bound(a, f.body))
        return App(f, a)
    return t


def map_types(t: Term, f) -> Term:
    if isinstance(t, Const):
        return Const(t.name, f(t.ty))
    if isinstance(t, Free):
        return Free(t.name, f(t.ty))
    if isinstance(t, Var):
        return Var(t.name, t.index, f(t.ty))
    if isinstance(t, Abs):
        return Abs(t.hint, f(t.ty), map_types(t.body, f))
    if isinstance(t, App):
        return App(map_types(t.fun, f), map_types(t.arg, f))
    return t


def subterms(t: Term) -> Iterator[Term]:
    yield t
    if isinstance(t, Abs):
        yield from subterms(t.body)
    elif isinstance(t, App):
        yield from subterms(t.fun)
        yield from subterms(t.arg)


def vars_of(t: Term) -> list[Var]:
    seen: dict = {}
    for s in subterms(t):
        if isinstance(s, Var) and s.key not in seen:
            seen[s.key] = s
    return list(seen.values())


def frees_of(t: Term) -> list[Free]:
    seen: dict = {}
    for s in subterms(t):
        if isinstance(s, Free) and s.name not in seen:
            seen[s.name] = s
    return list(seen.values())


def term_type_vars(t: Term) -> set[str]:
    acc: set[str] = set()
    for s in subterms(t):
        if isinstance(s, (Const, Free, Var, Abs)):
            type_vars(s.ty, acc)
    return acc


def contains_schematic(t: Term) -> bool:
    return any(isinstance(s, Var) for s in subterms(t))


def maxidx(terms: Iterable[Term]) -> int:
    m = -1
    for t in terms:
        for v in vars_of(t):
            m = max(m, v.index)
    return m


def alpha_eq(t: Term, u: Term) -> bool:
    return t == u


# ---------------------------------------------------------------------------
# Typing


def type_of(t: Term, binders: tuple[Type, ...] = ()) -> Type:
    """Type of ``t``; ``binders[-1]`` is the type of Bound 0."""
    if isinstance(t, (Const, Free, Var)):
        return t.ty
    if isinstance(t, Bound):
        if t.index >= len(binders):
            raise TypeCheckError(f"loose bound variable {t.index}")
        return binders[-1 - t.index]
    if isinstance(t, Abs):
        return TFun(t.ty, type_of(t.body, binders + (t.ty,)))
    if isinstance(t, App):
        fty = type_of(t.fun, binders)
        aty = type_of(t.arg, binders)
        if not isinstance(fty, TFun):
            raise TypeCheckError(f"applying a non-function of type {fty}")
        if fty.dom != aty:
            raise TypeCheckError(f"expected argument of type {fty.dom}, got {aty}")
        return fty.cod
    raise TypeCheckError(f"not a term: {t!r}")


def typecheck(t: Term, ctx: Optional["Theory"] = None) -> Type:
    """Unique type of the closed term ``t``; checks constant signatures when
    ``ctx`` is given."""
    if ctx is not None:
        for s in subterms(t):
            if isinstance(s, Const):
                scheme = ctx.const_type(s.name)
                if scheme is None:
                    raise TypeCheckError(f"unknown constant {s.name}")
                if unify_types(scheme, s.ty, {}) is None:
                    raise TypeCheckError(f"constant {s.name} used at type {s.ty}")
    return type_of(t)


# ---------------------------------------------------------------------------
# Goals


def strip_goal(g: Term) -> tuple[list[tuple[str, Type]], list[Term], Term]:
    """Split ``⋀params. hyps ⟹ concl``; hyps and concl keep loose bounds that
    refer to the params (Bound 0 is the last param)."""
    params: list[tuple[str, Type]] = []
    hyps: list[tuple[Term, int]] = []
    t = g
    while True:
        a = dest_all(t)
        if a is not None:
            params.append((a.hint, a.ty))
            t = a.body
            continue
        d = dest_imp(t)
        if d is not None:
            hyps.append((d[0], len(params)))
            t = d[1]
            continue
        break
    n = len(params)
    return params, [incr_bounds(h, n - depth) for h, depth in hyps], t


def mk_goal(params: list[tuple[str, Type]], hyps: list[Term], concl: Term) -> Term:
    return list_all(params, list_imp(hyps, concl))


def hhf_norm(g: Term) -> Term:
    """Normal form with all parameters outermost and hypotheses flattened."""
    params, hyps, concl = strip_goal(g)
    return mk_goal(params, hyps, concl)


def instantiate_frees(t: Term, mapping: dict[str, Term]) -> Term:
    """Replace Frees by name with closed terms."""
    if not mapping:
        return t
    if isinstance(t, Free) and t.name in mapping:
        return mapping[t.name]
    if isinstance(t, Abs):
        return Abs(t.hint, t.ty, instantiate_frees(t.body, mapping))
    if isinstance(t, App):
        return App(instantiate_frees(t.fun, mapping), instantiate_frees(t.arg, mapping))
    return t


def generalize(t: Term, names: Optional[Iterable[str]] = None) -> Term:
    """Turn Frees (all, or those named) into index-0 schematics."""
    names = None if names is None else set(names)
    mapping = {f.name: Var(f.name, 0, f.ty) for f in frees_of(t)
               if names is None or f.name in names}
    return instantiate_frees(t, mapping)


def forall_intro(frees: Iterable[Free], t: Term) -> Term:
    """``⋀frees. t`` by abstraction (innermost last)."""
    for f in reversed(list(frees)):
        t = mk_all(f.name, f.ty, abstract_over(t, f))
    return t


# ---------------------------------------------------------------------------
# Theorems and theories


@dataclass(frozen=True)
class Theorem:
    prop: Term
    provenance: str = "proven"  # axiom | proven | cheated

    @property
    def cheated(self) -> bool:
        return self.provenance == "cheated"


def combine_provenance(thms: Iterable[Theorem]) -> str:
    return "cheated" if any(t.cheated for t in thms) else "proven"


@dataclass
class Theory:
    types: frozenset = frozenset({"prop", "bool"})
    consts: dict = field(default_factory=dict)
    facts: dict = field(default_factory=dict)  # name -> tuple[Theorem, ...]
    defs: dict = field(default_factory=dict)  # const name -> def fact name
    simp: tuple = ()  # fact names in the default simp set
    intro: tuple = ()  # fact names in the default intro set
    notation: dict = field(default_factory=dict)  # const -> print-only symbol
    default_type: Optional[Type] = None

    def const_type(self, name: str) -> Optional[Type]:
        if name in META_CONSTS:
            return META_CONSTS[name]
        return self.consts.get(name)

    def copy(self, **changes) -> "Theory":
        base = dict(types=self.types, consts=dict(self.consts), facts=dict(self.facts),
                    defs=dict(self.defs), simp=self.simp, intro=self.intro,
                    notation=dict(self.notation), default_type=self.default_type)
        base.update(changes)
        return Theory(**base)

    def add_type(self, name: str) -> "Theory":
        if name in self.types:
            raise KernelError(f"duplicate type {name}")
        return self.copy(types=self.types | {name})

    def add_const(self, name: str, ty: Type) -> "Theory":
        if name in self.consts or name in META_CONSTS:
            raise KernelError(f"duplicate constant {name}")
        self._check_type(ty)
        consts = dict(self.consts)
        consts[name] = ty
        return self.copy(consts=consts)

    def add_facts(self, name: str, thms: Iterable[Theorem], simp: bool = False,
                  intro: bool = False) -> "Theory":
        if name in self.facts:
            raise KernelError(f"duplicate fact name {name}")
        facts = dict(self.facts)
        facts[name] = tuple(thms)
        out = self.copy(facts=facts)
        if simp:
            out.simp = out.simp + (name,)
        if intro:
            out.intro = out.intro + (name,)
        return out

    def _check_type(self, ty: Type) -> None:
        if isinstance(ty, TBase) and ty.name not in self.types:
            raise KernelError(f"undeclared type {ty.name}")
        if isinstance(ty, TFun):
            self._check_type(ty.dom)
            self._check_type(ty.cod)

    def fact_list(self, names: Iterable[str]) -> list[Theorem]:
        out: list[Theorem] = []
        for n in names:
            out.extend(self.facts.get(n, ()))
        return out


def replace(obj, **changes):
    return dataclasses.replace(obj, **changes)
