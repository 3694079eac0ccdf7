"""Concrete term syntax: lexer, Pratt parser with type inference, and printer."""

from __future__ import annotations

import re
from dataclasses import dataclass
from itertools import count
from typing import Iterable, Optional

from .kernel import (
    BOOL, CONJ, DISJ, EQ, EQUIV, IMP, IMPL, NOT, PROP, TRUEPROP, Abs, App, Bound,
    Const, Free, KernelError, TBase, TFun, Term, Theory, Type, TypeCheckError, TVar, Var,
    dest_trueprop, frees_of, map_types, strip_comb, subst_type, type_of, type_vars, unify_types,
)


class TermSyntaxError(KernelError):
    def __init__(self, msg: str, pos: int = -1):
        super().__init__(f"{msg} (at {pos})" if pos >= 0 else msg)
        self.pos = pos


class UnknownConstant(KernelError):
    pass


class PrintRoundTripFailure(KernelError):
    pass


# ---------------------------------------------------------------------------
# Lexer

_SYMBOLS = [
    ("==>", IMP), ("⟹", IMP), ("!!", "⋀"), ("⋀", "⋀"), ("==", EQUIV), ("≡", EQUIV),
    ("/\\", CONJ), ("∧", CONJ), ("\\/", DISJ), ("∨", DISJ), ("-->", IMPL), ("⟶", IMPL),
    ("∀", "∀"), ("∃", "∃"), ("¬", NOT), ("~", NOT), ("<=", "≤"), ("≤", "≤"),
    ("=>", "⇒"), ("⇒", "⇒"), ("::", "::"), ("[|", "⟦"), ("|]", "⟧"), ("⟦", "⟦"),
    ("⟧", "⟧"), ("λ", "λ"), ("%", "λ"), ("=", EQ), ("<", "<"), ("(", "("), (")", ")"),
    (".", "."), (",", ","), (";", ";"),
]
_WORD_SYMBOLS = {"ALL": "∀", "EX": "∃"}
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_']*")
_TVAR = re.compile(r"'[A-Za-z_][A-Za-z0-9_]*")
_SCHEM = re.compile(r"\?([A-Za-z_][A-Za-z0-9_']*)(?:\.(\d+))?")
_NUM = re.compile(r"\d+")


@dataclass(frozen=True)
class Tok:
    kind: str  # ident | tvar | schem | sym | end
    value: object
    pos: int


def lex(src: str) -> list[Tok]:
    toks: list[Tok] = []
    i, n = 0, len(src)
    while i < n:
        c = src[i]
        if c.isspace():
            i += 1
            continue
        m = _SCHEM.match(src, i)
        if m:
            toks.append(Tok("schem", (m.group(1), int(m.group(2) or 0)), i))
            i = m.end()
            continue
        m = _TVAR.match(src, i)
        if m:
            toks.append(Tok("tvar", m.group(0), i))
            i = m.end()
            continue
        m = _IDENT.match(src, i) or _NUM.match(src, i)
        if m:
            word = m.group(0)
            if word in _WORD_SYMBOLS:
                toks.append(Tok("sym", _WORD_SYMBOLS[word], i))
            else:
                toks.append(Tok("ident", word, i))
            i = m.end()
            continue
        for text, sym in _SYMBOLS:
            if src.startswith(text, i):
                toks.append(Tok("sym", sym, i))
                i += len(text)
                break
        else:
            raise TermSyntaxError(f"unexpected character {c!r}", i)
    toks.append(Tok("end", None, n))
    return toks


# ---------------------------------------------------------------------------
# Raw syntax trees


@dataclass(frozen=True)
class RName:
    name: str
    pos: int


@dataclass(frozen=True)
class RSchem:
    name: str
    index: int


@dataclass(frozen=True)
class RApp:
    fun: object
    arg: object


@dataclass(frozen=True)
class ROp:
    op: str
    args: tuple


@dataclass(frozen=True)
class RBinder:
    kind: str
    vars: tuple  # (name, raw type or None)
    body: object


@dataclass(frozen=True)
class RAnnot:
    term: object
    ty: object


@dataclass(frozen=True)
class RBrackets:
    hyps: tuple
    concl: object


# (precedence, associativity)
INFIX = {
    IMP: (1, "right"), EQUIV: (2, "none"), IMPL: (25, "right"), DISJ: (30, "right"),
    CONJ: (35, "right"), EQ: (50, "left"), "≤": (50, "left"), "<": (50, "left"),
}
BINDERS = {"⋀", "∀", "∃", "λ"}
NOT_PREC = 40


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.toks = lex(src)
        self.i = 0

    @property
    def tok(self) -> Tok:
        return self.toks[self.i]

    def advance(self) -> Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def is_sym(self, s: str) -> bool:
        return self.tok.kind == "sym" and self.tok.value == s

    def expect(self, s: str) -> None:
        if not self.is_sym(s):
            raise TermSyntaxError(f"expected {s!r}", self.tok.pos)
        self.advance()

    def parse_all(self):
        t = self.term(0)
        if self.tok.kind != "end":
            raise TermSyntaxError("trailing input", self.tok.pos)
        return t

    def starts_atom(self) -> bool:
        t = self.tok
        return t.kind in ("ident", "schem") or (t.kind == "sym" and t.value == "(")

    def term(self, min_prec: int):
        left = self.prefix()
        while self.tok.kind == "sym" and self.tok.value in INFIX:
            op = self.tok.value
            prec, assoc = INFIX[op]
            if prec < min_prec:
                break
            self.advance()
            rhs = self.term(prec if assoc == "right" else prec + 1)
            left = ROp(op, (left, rhs))
            if assoc == "none" and self.is_sym(op):
                raise TermSyntaxError(f"non-associative operator {op}", self.tok.pos)
        return left

    def prefix(self):
        t = self.tok
        if t.kind == "sym" and t.value in BINDERS:
            self.advance()
            vs = self.binder_vars()
            self.expect(".")
            # object binders stop at meta connectives, ⋀ extends over them
            return RBinder(t.value, tuple(vs), self.term(0 if t.value == "⋀" else 3))
        if t.kind == "sym" and t.value == NOT:
            self.advance()
            return ROp(NOT, (self.term(NOT_PREC),))
        if t.kind == "sym" and t.value == "⟦":
            self.advance()
            hyps = [self.term(0)]
            while self.is_sym(";"):
                self.advance()
                hyps.append(self.term(0))
            self.expect("⟧")
            self.expect(IMP)
            return RBrackets(tuple(hyps), self.term(1))
        return self.application()

    def binder_vars(self) -> list:
        vs = []
        while True:
            if self.tok.kind == "ident":
                vs.append((self.advance().value, None))
            elif self.is_sym("("):
                self.advance()
                if self.tok.kind != "ident":
                    raise TermSyntaxError("expected variable", self.tok.pos)
                name = self.advance().value
                self.expect("::")
                vs.append((name, self.type_()))
                self.expect(")")
            else:
                break
        if not vs:
            raise TermSyntaxError("expected bound variable", self.tok.pos)
        if self.is_sym("::"):
            self.advance()
            ty = self.type_()
            vs = [(n, ty if t is None else t) for n, t in vs]
        return vs

    def application(self):
        if not self.starts_atom():
            raise TermSyntaxError("expected term", self.tok.pos)
        head = self.atom()
        while self.starts_atom():
            head = RApp(head, self.atom())
        return head

    def atom(self):
        t = self.advance()
        if t.kind == "ident":
            return RName(t.value, t.pos)
        if t.kind == "schem":
            return RSchem(*t.value)
        # "("
        inner = self.term(0)
        if self.is_sym("::"):
            self.advance()
            inner = RAnnot(inner, self.type_())
        self.expect(")")
        return inner

    def type_(self):
        left = self.type_atom()
        if self.is_sym("⇒"):
            self.advance()
            return ("fun", left, self.type_())
        return left

    def type_atom(self):
        t = self.advance()
        if t.kind == "ident":
            return ("base", t.value)
        if t.kind == "tvar":
            return ("tvar", t.value)
        if t.kind == "sym" and t.value == "(":
            ty = self.type_()
            self.expect(")")
            return ty
        raise TermSyntaxError("expected type", t.pos)


def parse_type(src: str, ctx: Optional[Theory] = None) -> Type:
    p = _Parser(src)
    raw = p.type_()
    if p.tok.kind != "end":
        raise TermSyntaxError("trailing input in type", p.tok.pos)
    return _elab_type(raw, ctx)


def _elab_type(raw, ctx: Optional[Theory]) -> Type:
    kind = raw[0]
    if kind == "base":
        if ctx is not None and raw[1] not in ctx.types:
            raise TypeCheckError(f"undeclared type {raw[1]}")
        return TBase(raw[1])
    if kind == "tvar":
        return TVar(raw[1])
    return TFun(_elab_type(raw[1], ctx), _elab_type(raw[2], ctx))


# ---------------------------------------------------------------------------
# Elaboration with type inference


class _Elab:
    def __init__(self, ctx: Theory, fixed: dict, allow_tvars: bool):
        self.ctx = ctx
        self.fixed = fixed  # name -> Free, or None when the type is still open
        self.allow_tvars = allow_tvars
        self.tsub: dict[str, Type] = {}
        self.fresh = count()
        self.free_types: dict[str, Type] = {}
        self.schem_types: dict[tuple, Type] = {}

    def tv(self) -> TVar:
        return TVar(f"?T{next(self.fresh)}")

    def unify(self, a: Type, b: Type, what: str = "") -> None:
        res = unify_types(a, b, self.tsub)
        if res is None:
            raise TypeCheckError(
                f"type mismatch{' in ' + what if what else ''}: "
                f"{subst_type(a, self.tsub)} vs {subst_type(b, self.tsub)}")
        self.tsub = res

    def resolve(self, ty: Type) -> Type:
        return subst_type(ty, self.tsub)

    def instance(self, scheme: Type) -> Type:
        ren = {v: self.tv() for v in sorted(type_vars(scheme))}
        return subst_type(scheme, ren)

    def coerce(self, t: Term, ty: Type, expected: Type) -> Term:
        exp = self.resolve(expected)
        if exp == PROP:
            got = self.resolve(ty)
            if got == PROP:
                return t
            self.unify(got, BOOL, "proposition")
            return App(Const(TRUEPROP, TFun(BOOL, PROP)), t)
        self.unify(ty, expected)
        return t

    def prop(self, node, bs) -> Term:
        t, ty = self.elab(node, bs)
        return self.coerce(t, ty, PROP)

    def const(self, name: str) -> tuple[Term, Type]:
        scheme = self.ctx.const_type(name)
        if scheme is None:
            raise UnknownConstant(f"unknown constant {name}")
        ty = self.instance(scheme)
        return Const(name, ty), ty

    def apply_args(self, head: Term, hty: Type, args, bs) -> tuple[Term, Type]:
        for a in args:
            dom, cod = self.tv(), self.tv()
            self.unify(hty, TFun(dom, cod), "application")
            at, aty = self.elab(a, bs)
            head = App(head, self.coerce(at, aty, dom))
            hty = cod
        return head, hty

    def elab(self, node, bs: list) -> tuple[Term, Type]:
        if isinstance(node, RName):
            name = node.name
            for i, (bname, bty) in enumerate(reversed(bs)):
                if bname == name:
                    return Bound(i), bty
            if name in self.fixed:
                f = self.fixed[name]
                if f is not None:
                    return f, f.ty
                ty = self.free_types.setdefault(name, self.tv())
                return Free(name, ty), ty
            if self.ctx.const_type(name) is not None:
                return self.const(name)
            ty = self.free_types.setdefault(name, self.tv())
            return Free(name, ty), ty
        if isinstance(node, RSchem):
            ty = self.schem_types.setdefault((node.name, node.index), self.tv())
            return Var(node.name, node.index, ty), ty
        if isinstance(node, RApp):
            args = []
            while isinstance(node, RApp):
                args.append(node.arg)
                node = node.fun
            head, hty = self.elab(node, bs)
            return self.apply_args(head, hty, reversed(args), bs)
        if isinstance(node, ROp):
            head, hty = self.const(node.op)
            return self.apply_args(head, hty, node.args, bs)
        if isinstance(node, RBrackets):
            head, hty = self.const(IMP)
            t = self.prop(node.concl, bs)
            for h in reversed(node.hyps):
                t = App(App(Const(IMP, hty), self.prop(h, bs)), t)
            return t, PROP
        if isinstance(node, RAnnot):
            t, ty = self.elab(node.term, bs)
            want = _elab_type(node.ty, self.ctx)
            return self.coerce(t, ty, want), want
        if isinstance(node, RBinder):
            return self.binder(node, bs)
        raise TermSyntaxError(f"bad syntax node {node!r}")

    def binder(self, node: RBinder, bs: list) -> tuple[Term, Type]:
        vs = [(n, _elab_type(t, self.ctx) if t is not None else self.tv()) for n, t in node.vars]
        inner = bs + vs
        if node.kind == "⋀":
            body, bty = self.prop(node.body, inner), PROP
        elif node.kind in ("∀", "∃"):
            bt, bty0 = self.elab(node.body, inner)
            body, bty = self.coerce(bt, bty0, BOOL), BOOL
        else:
            body, bty = self.elab(node.body, inner)
        for name, vty in reversed(vs):
            lam = Abs(name, vty, body)
            if node.kind == "λ":
                body, bty = lam, TFun(vty, bty)
            else:
                body = App(Const(node.kind, TFun(TFun(vty, bty), bty)), lam)
        return body, bty

    def finish(self, t: Term) -> Term:
        t = map_types(t, self.resolve)
        return t


def parse_terms(srcs: Iterable[str], ctx: Theory, fixed: Optional[dict] = None,
                as_prop: bool = True, allow_tvars: bool = False,
                default_type: Optional[Type] = None) -> tuple[list[Term], dict[str, Type]]:
    """Parse several sources with one shared type-inference problem.

    Returns the terms and the inferred types of the free variables that were
    not already fixed with a type.
    """
    el = _Elab(ctx, dict(fixed or {}), allow_tvars)
    raw = [_Parser(s).parse_all() for s in srcs]
    out = []
    for r in raw:
        if as_prop:
            out.append(el.prop(r, []))
        else:
            out.append(el.elab(r, [])[0])
    out = [el.finish(t) for t in out]
    leftover = sorted(set().union(*[_inference_vars(t) for t in out])) if out else []
    if leftover:
        dflt = default_type or ctx.default_type
        if allow_tvars:
            names = iter(f"'{c}" for c in "abcdefghijklmnopqrstuvwxyz")
            ren = {v: TVar(next(names)) for v in leftover}
        elif dflt is not None:
            ren = {v: dflt for v in leftover}
        else:
            culprits = sorted({f.name for t in out for f in frees_of(t)
                               if _inference_vars_ty(f.ty)})
            raise TypeCheckError(
                "cannot infer type" + (f" of {', '.join(culprits)}" if culprits else ""))
        out = [map_types(t, lambda ty: subst_type(ty, ren)) for t in out]
    for t in out:
        type_of(t)
    free_types = {}
    for t in out:
        for f in frees_of(t):
            if el.fixed.get(f.name) is None:
                free_types[f.name] = f.ty
    return out, free_types


def parse_term(src: str, ctx: Theory, fixed: Optional[dict] = None, as_prop: bool = True,
               allow_tvars: bool = False, default_type: Optional[Type] = None) -> Term:
    return parse_terms([src], ctx, fixed, as_prop, allow_tvars, default_type)[0][0]


def _inference_vars_ty(ty: Type) -> set[str]:
    return {v for v in type_vars(ty) if v.startswith("?T")}


def _inference_vars(t: Term) -> set[str]:
    from .kernel import term_type_vars
    return {v for v in term_type_vars(t) if v.startswith("?T")}


# ---------------------------------------------------------------------------
# Printer

_ASCII = {IMP: "==>", "⋀": "!!", EQUIV: "==", CONJ: "/\\", DISJ: "\\/", IMPL: "-->",
          "∀": "ALL ", "∃": "EX ", NOT: "~", "≤": "<=", "λ": "%", "⇒": "=>"}


def _sym(s: str, ascii_: bool) -> str:
    return _ASCII.get(s, s) if ascii_ else s


def pretty_type(ty: Type, ascii_: bool = False) -> str:
    s = str(ty)
    return s.replace("⇒", "=>") if ascii_ else s


def _variant(name: str, used: set[str]) -> str:
    if name not in used:
        return name
    base = name
    suffix = "a"
    while True:
        cand = base + suffix
        if cand not in used:
            return cand
        # a, b, ..., z, aa, ab, ...
        chars = list(suffix)
        i = len(chars) - 1
        while i >= 0 and chars[i] == "z":
            chars[i] = "a"
            i -= 1
        if i < 0:
            chars.insert(0, "a")
        else:
            chars[i] = chr(ord(chars[i]) + 1)
        suffix = "".join(chars)


class _Printer:
    def __init__(self, annotate: bool, ascii_: bool, used: set[str], notation: dict):
        self.annotate = annotate
        self.ascii = ascii_
        self.used = used
        self.notation = notation
        self.seen: set = set()

    def sym(self, s: str) -> str:
        return _sym(s, self.ascii)

    def ty(self, ty: Type) -> str:
        return pretty_type(ty, self.ascii)

    def fmt(self, t: Term, names: list[str], prec: int) -> str:
        inner = dest_trueprop(t)
        if inner is not None:
            return self.fmt(inner, names, prec)
        head, args = strip_comb(t)
        if isinstance(head, Const):
            name = head.name
            if name in ("⋀", "∀", "∃") and len(args) == 1 and isinstance(args[0], Abs):
                return self.binder(name, args[0], names, prec)
            if name in self.notation and len(args) in (1, 2):
                sym = self.notation[name]
                if len(args) == 1:
                    s = f"{sym} {self.fmt(args[0], names, NOT_PREC)}"
                    return f"({s})" if prec > NOT_PREC else s
                s = f"{self.fmt(args[0], names, 51)} {sym} {self.fmt(args[1], names, 51)}"
                return f"({s})" if prec > 50 else s
            if name in INFIX and len(args) == 2:
                p, assoc = INFIX[name]
                # comparisons nest only with explicit parentheses
                lp = p + 1 if assoc != "left" or p == 50 else p
                rp = p + 1 if assoc != "right" else p
                s = f"{self.fmt(args[0], names, lp)} {self.sym(name)} {self.fmt(args[1], names, rp)}"
                return f"({s})" if prec > p else s
            if name == NOT and len(args) == 1:
                s = f"{self.sym(NOT)} {self.fmt(args[0], names, NOT_PREC)}"
                return f"({s})" if prec > NOT_PREC else s
        if isinstance(head, Abs) and not args:
            return self.binder("λ", head, names, prec)
        if args:
            parts = [self.fmt(head, names, 1000)] + [self.fmt(a, names, 1000) for a in args]
            s = " ".join(parts)
            return f"({s})" if prec > 999 else s
        return self.atom(head, names, prec)

    def atom(self, t: Term, names: list[str], prec: int) -> str:
        if isinstance(t, Bound):
            return names[-1 - t.index]
        if isinstance(t, Const):
            return t.name
        if isinstance(t, Free):
            return self.annot(t.name, t.name, t.ty)
        if isinstance(t, Var):
            s = f"?{t.name}" if t.index == 0 else f"?{t.name}.{t.index}"
            return self.annot(("?", t.name, t.index), s, t.ty)
        if isinstance(t, Abs):
            return self.binder("λ", t, names, prec)
        return self.fmt(t, names, prec)

    def annot(self, key, s: str, ty: Type) -> str:
        if self.annotate and key not in self.seen:
            self.seen.add(key)
            return f"({s} :: {self.ty(ty)})"
        return s

    def binder(self, kind: str, lam: Abs, names: list[str], prec: int) -> str:
        vs = []
        body: Term = lam
        while True:
            name = _variant(lam.hint or "x", self.used | set(names))
            names = names + [name]
            vs.append((name, lam.ty))
            body = lam.body
            if kind == "λ":
                if isinstance(body, Abs):
                    lam = body
                    continue
                break
            head, args = strip_comb(body)
            if isinstance(head, Const) and head.name == kind and len(args) == 1 \
                    and isinstance(args[0], Abs):
                lam = args[0]
                continue
            break
        if self.annotate:
            if len(vs) == 1:
                vtext = f"{vs[0][0]} :: {self.ty(vs[0][1])}"
            else:
                vtext = " ".join(f"({n} :: {self.ty(ty)})" for n, ty in vs)
        else:
            vtext = " ".join(n for n, _ in vs)
        s = f"{self.sym(kind)}{vtext}. {self.fmt(body, names, 0)}"
        s = s.replace("ALL  ", "ALL ").replace("EX  ", "EX ")
        return f"({s})" if prec > 0 else s


def _print(t: Term, annotate: bool, ascii_: bool, avoid: Iterable[str], notation: dict) -> str:
    used = {f.name for f in frees_of(t)} | set(avoid)
    return _Printer(annotate, ascii_, used, notation).fmt(t, [], 0)


def pretty_term(t: Term, mode: str = "none", ctx: Optional[Theory] = None,
                avoid: Iterable[str] = (), ascii_: bool = False,
                fixed: Optional[dict] = None, check: bool = False) -> str:
    """Render ``t``; ``mode`` is none, all or necessary.

    ``necessary`` prints without annotations when that text reparses (under
    ``fixed``) to exactly ``t``; otherwise it falls back to full annotations,
    raising :class:`PrintRoundTripFailure` if even those do not round-trip.
    """
    notation = ctx.notation if ctx is not None else {}
    avoid = set(avoid)
    if mode == "none":
        return _print(t, False, ascii_, avoid, notation)
    if mode == "all":
        s = _print(t, True, ascii_, avoid, notation)
        if check and not _round_trips(s, t, ctx, fixed):
            raise PrintRoundTripFailure(f"printed term does not reparse: {s}")
        return s
    if mode != "necessary":
        raise ValueError(f"unknown print mode {mode}")
    if ctx is None:
        raise ValueError("necessary mode needs a theory to reparse against")
    s = _print(t, False, ascii_, avoid, notation)
    if _round_trips(s, t, ctx, fixed):
        return s
    s = _print(t, True, ascii_, avoid, notation)
    if _round_trips(s, t, ctx, fixed):
        return s
    raise PrintRoundTripFailure(f"printed term does not reparse: {s}")


def _round_trips(s: str, t: Term, ctx: Optional[Theory], fixed: Optional[dict]) -> bool:
    if ctx is None:
        return True
    try:
        u = parse_term(s, ctx, fixed, as_prop=type_of(t) == PROP, default_type=None)
    except KernelError:
        return False
    return u == t
