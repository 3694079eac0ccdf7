"""Outer syntax: tokenizer, proof-script commands, theory files and the
structured-proof subset accepted by the checker."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from .isar import (
    Assume, ByProof, DefaultProof, Fix, Have, ImmediateProof, IsarDoc, Note, RawApply,
    SorryProof, Subproof,
)
from .kernel import KernelError
from .methods import (
    Alt, Assumption, Auto, Dash, Erule, Fact, FactRef, Method, Plus, Rule, Seq, Simp,
    SimpAll, Standard, Try, render_method,
)


class ParseError(KernelError):
    def __init__(self, msg: str, span: tuple = (-1, -1)):
        super().__init__(f"{msg} at {span[0]}" if span[0] >= 0 else msg)
        self.span = span


class UnterminatedString(ParseError):
    pass


class UnterminatedCartouche(ParseError):
    pass


class UnterminatedComment(ParseError):
    pass


class UnbalancedProof(ParseError):
    pass


# ---------------------------------------------------------------------------
# Tokens

KEYWORDS = frozenset("""
apply by done using unfolding subgoal prefer defer back supply proof qed sorry
lemma theorem typedecl consts defs axiom notation default_type options
fixes assumes defines shows and for note fix assume have show
""".split())

DECL_KEYWORDS = frozenset("lemma theorem typedecl consts defs axiom notation "
                          "default_type options".split())

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_']*")
_NAT = re.compile(r"\d+")
_SYMS = ["::", "..", "(", ")", "[", "]", ",", "|", "+", "?", ":", "=", "-", "."]


@dataclass(frozen=True)
class Token:
    kind: str  # kw | ident | nat | string | cartouche | sym
    value: str
    start: int
    end: int


def tokenize(src: str) -> list[Token]:
    toks: list[Token] = []
    i, n = 0, len(src)
    while i < n:
        c = src[i]
        if c.isspace():
            i += 1
        elif src.startswith("(*", i):
            i = _skip_comment(src, i)
        elif c == '"':
            j = i + 1
            buf = []
            while j < n and src[j] != '"':
                if src[j] == "\\" and j + 1 < n:
                    j += 1
                buf.append(src[j])
                j += 1
            if j >= n:
                raise UnterminatedString("unterminated string", (i, n))
            toks.append(Token("string", "".join(buf), i, j + 1))
            i = j + 1
        elif c == "‹":
            depth, j = 1, i + 1
            while j < n and depth:
                if src[j] == "‹":
                    depth += 1
                elif src[j] == "›":
                    depth -= 1
                j += 1
            if depth:
                raise UnterminatedCartouche("unterminated cartouche", (i, n))
            toks.append(Token("cartouche", src[i + 1:j - 1], i, j))
            i = j
        elif (m := _IDENT.match(src, i)):
            w = m.group(0)
            toks.append(Token("kw" if w in KEYWORDS else "ident", w, i, m.end()))
            i = m.end()
        elif (m := _NAT.match(src, i)):
            toks.append(Token("nat", m.group(0), i, m.end()))
            i = m.end()
        else:
            for s in _SYMS:
                if src.startswith(s, i):
                    toks.append(Token("sym", s, i, i + len(s)))
                    i += len(s)
                    break
            else:
                raise ParseError(f"unexpected character {c!r}", (i, i + 1))
    return toks


def _skip_comment(src: str, i: int) -> int:
    depth, j, n = 0, i, len(src)
    while j < n:
        if src.startswith("(*", j):
            depth += 1
            j += 2
        elif src.startswith("*)", j):
            depth -= 1
            j += 2
            if depth == 0:
                return j
        else:
            j += 1
    raise UnterminatedComment("unterminated comment", (i, n))


# ---------------------------------------------------------------------------
# Commands


@dataclass(frozen=True)
class Command:
    span: tuple = field(default=(-1, -1), compare=False, kw_only=True)


@dataclass(frozen=True)
class Apply(Command):
    method: Method


@dataclass(frozen=True)
class By(Command):
    method: Method
    method2: Optional[Method] = None


@dataclass(frozen=True)
class Done(Command):
    pass


@dataclass(frozen=True)
class ImmediateDot(Command):
    pass


@dataclass(frozen=True)
class DoubleDot(Command):
    pass


@dataclass(frozen=True)
class Using(Command):
    facts: tuple


@dataclass(frozen=True)
class Unfolding(Command):
    facts: tuple


@dataclass(frozen=True)
class Subgoal(Command):
    name: Optional[str] = None
    for_names: Optional[tuple] = None


@dataclass(frozen=True)
class Prefer(Command):
    n: int


@dataclass(frozen=True)
class Defer(Command):
    n: Optional[int] = None


@dataclass(frozen=True)
class Back(Command):
    pass


@dataclass(frozen=True)
class Supply(Command):
    name: Optional[str]
    facts: tuple


@dataclass(frozen=True)
class VerbatimIsar(Command):
    text: str


@dataclass(frozen=True)
class Sorry(Command):
    pass


TERMINALS = (By, Done, ImmediateDot, DoubleDot, VerbatimIsar, Sorry)
APPLY_LIKE = (Apply, By, ImmediateDot, DoubleDot)


def render_command(c: Command) -> str:
    if isinstance(c, Apply):
        return "apply " + render_method(c.method, top=True)
    if isinstance(c, By):
        s = "by " + render_method(c.method, top=True)
        return s + (" " + render_method(c.method2, top=True) if c.method2 else "")
    if isinstance(c, Done):
        return "done"
    if isinstance(c, ImmediateDot):
        return "."
    if isinstance(c, DoubleDot):
        return ".."
    if isinstance(c, Using):
        return "using " + " ".join(f.render() for f in c.facts)
    if isinstance(c, Unfolding):
        return "unfolding " + " ".join(f.render() for f in c.facts)
    if isinstance(c, Subgoal):
        s = "subgoal" + (f" {c.name}" if c.name else "")
        return s + (" for " + " ".join(c.for_names) if c.for_names else "")
    if isinstance(c, Prefer):
        return f"prefer {c.n}"
    if isinstance(c, Defer):
        return "defer" + (f" {c.n}" if c.n is not None else "")
    if isinstance(c, Back):
        return "back"
    if isinstance(c, Supply):
        head = f"supply {c.name} = " if c.name else "supply "
        return head + " ".join(f.render() for f in c.facts)
    if isinstance(c, VerbatimIsar):
        return c.text
    if isinstance(c, Sorry):
        return "sorry"
    raise TypeError(f"unknown command {c!r}")


def render_script(cmds) -> str:
    """One command per line, indented by subgoal depth."""
    lines, depth = [], 0
    for c in cmds:
        lines.append("  " * (depth + 1) + render_command(c))
        if isinstance(c, Subgoal):
            depth += 1
        elif isinstance(c, TERMINALS) and depth > 0:
            depth -= 1
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Parser

METHOD_NAMES = {"rule", "erule", "assumption", "fact", "simp", "simp_all", "auto", "standard"}


class _P:
    def __init__(self, src: str, toks: list[Token], pos: int = 0):
        self.src = src
        self.toks = toks
        self.i = pos

    # token helpers
    def peek(self, k: int = 0) -> Optional[Token]:
        j = self.i + k
        return self.toks[j] if j < len(self.toks) else None

    def at(self, kind: str, value: Optional[str] = None, k: int = 0) -> bool:
        t = self.peek(k)
        return t is not None and t.kind == kind and (value is None or t.value == value)

    def at_sym(self, s: str, k: int = 0) -> bool:
        return self.at("sym", s, k)

    def at_kw(self, s: str, k: int = 0) -> bool:
        return self.at("kw", s, k)

    def next(self) -> Token:
        t = self.peek()
        if t is None:
            raise ParseError("unexpected end of input", (len(self.src), len(self.src)))
        self.i += 1
        return t

    def expect(self, kind: str, value: Optional[str] = None) -> Token:
        t = self.peek()
        if t is None or t.kind != kind or (value is not None and t.value != value):
            what = value or kind
            got = "end of input" if t is None else repr(t.value)
            raise ParseError(f"expected {what}, got {got}", self.span_here())
        self.i += 1
        return t

    def span_here(self) -> tuple:
        t = self.peek()
        return (t.start, t.end) if t else (len(self.src), len(self.src))

    def name(self) -> str:
        t = self.peek()
        if t is not None and t.kind in ("ident", "nat"):
            self.i += 1
            return t.value
        raise ParseError("expected a name", self.span_here())

    # facts
    def starts_fact(self) -> bool:
        t = self.peek()
        return t is not None and (t.kind in ("ident", "nat", "cartouche"))

    def fact_ref(self) -> FactRef:
        t = self.next()
        if t.kind == "cartouche":
            ref = FactRef(literal=t.value)
        elif t.kind in ("ident", "nat"):
            ref = FactRef(name=t.value)
        else:
            raise ParseError("expected a fact reference", (t.start, t.end))
        if self.at_sym("(") and self.at("nat", k=1) and self.at_sym(")", k=2):
            self.i += 1
            sel = int(self.next().value)
            self.i += 1
            ref = FactRef(ref.name, ref.literal, sel)
        if self.at_sym("["):
            self.i += 1
            attrs = []
            while True:
                attrs.append(self.attribute())
                if self.at_sym(","):
                    self.i += 1
                    continue
                break
            self.expect("sym", "]")
            ref = FactRef(ref.name, ref.literal, ref.selection, tuple(attrs))
        return ref

    def attribute(self):
        t = self.expect("ident")
        if t.value == "OF":
            refs = []
            while self.starts_fact():
                refs.append(self.fact_ref())
            if not refs:
                raise ParseError("OF needs arguments", (t.start, t.end))
            return ("OF", tuple(refs))
        if t.value == "where":
            pairs = []
            while True:
                var = self.next()
                if var.kind == "sym" and var.value == "?":
                    var = self.next()
                if var.kind != "ident":
                    raise ParseError("expected a variable", (var.start, var.end))
                self.expect("sym", "=")
                val = self.next()
                if val.kind not in ("ident", "nat", "string", "cartouche"):
                    raise ParseError("expected a term", (val.start, val.end))
                pairs.append((var.value, val.value))
                if self.at_kw("and"):
                    self.i += 1
                    continue
                break
            return ("where", tuple(pairs))
        raise ParseError(f"unknown attribute {t.value}", (t.start, t.end))

    def fact_refs(self, at_least_one: bool = True) -> tuple:
        refs = []
        while self.starts_fact():
            refs.append(self.fact_ref())
        if at_least_one and not refs:
            raise ParseError("expected fact references", self.span_here())
        return tuple(refs)

    # methods
    def method_top(self) -> Method:
        if self.at_sym("("):
            self.i += 1
            m = self.method()
            self.expect("sym", ")")
        elif self.at_sym("-"):
            self.i += 1
            m = Dash()
        else:
            t = self.expect("ident")
            if t.value not in METHOD_NAMES:
                raise ParseError(f"unknown method {t.value}", (t.start, t.end))
            m = self._atom(t.value, with_args=False)
        return self.suffixes(m)

    def suffixes(self, m: Method) -> Method:
        while self.at_sym("+") or self.at_sym("?"):
            m = Plus(m) if self.next().value == "+" else Try(m)
        return m

    def method(self) -> Method:
        alts = [self.seq()]
        while self.at_sym("|"):
            self.i += 1
            alts.append(self.seq())
        return alts[0] if len(alts) == 1 else Alt(tuple(alts))

    def seq(self) -> Method:
        parts = [self.unit()]
        while self.at_sym(","):
            self.i += 1
            parts.append(self.unit())
        return parts[0] if len(parts) == 1 else Seq(tuple(parts))

    def unit(self) -> Method:
        if self.at_sym("("):
            self.i += 1
            m = self.method()
            self.expect("sym", ")")
        elif self.at_sym("-"):
            self.i += 1
            m = Dash()
        else:
            t = self.expect("ident")
            if t.value not in METHOD_NAMES:
                raise ParseError(f"unknown method {t.value}", (t.start, t.end))
            m = self._atom(t.value, with_args=True)
        return self.suffixes(m)

    def _atom(self, name: str, with_args: bool) -> Method:
        if name in ("rule", "erule", "fact"):
            refs = self.fact_refs(at_least_one=False) if with_args else ()
            return {"rule": Rule, "erule": Erule, "fact": Fact}[name](refs)
        if name in ("simp", "simp_all"):
            add = ()
            if with_args and self.at("ident", "add") and self.at_sym(":", 1):
                self.i += 2
                add = self.fact_refs()
            return Simp(add) if name == "simp" else SimpAll(add)
        return {"assumption": Assumption, "auto": Auto, "standard": Standard}[name]()

    def starts_method_top(self) -> bool:
        t = self.peek()
        return t is not None and (
            (t.kind == "sym" and t.value in ("(", "-")) or
            (t.kind == "ident" and t.value in METHOD_NAMES))

    # script commands
    def command(self) -> Command:
        t = self.peek()
        if t is None:
            raise ParseError("unexpected end of proof", (len(self.src), len(self.src)))
        start = t.start
        if t.kind == "sym" and t.value in (".", ".."):
            self.i += 1
            c = ImmediateDot() if t.value == "." else DoubleDot()
            return _with_span(c, (start, t.end))
        if t.kind != "kw":
            raise ParseError(f"unknown proof command {t.value!r}", (t.start, t.end))
        kw = t.value
        if kw == "proof":
            return self.verbatim()
        self.i += 1
        if kw == "apply":
            c = Apply(self.method_top())
        elif kw == "by":
            m1 = self.method_top()
            m2 = self.method_top() if self.starts_method_top() else None
            c = By(m1, m2)
        elif kw == "done":
            c = Done()
        elif kw == "sorry":
            c = Sorry()
        elif kw == "back":
            c = Back()
        elif kw == "using":
            c = Using(self.fact_refs())
        elif kw == "unfolding":
            c = Unfolding(self.fact_refs())
        elif kw == "subgoal":
            name = None
            if self.at("ident") and not self.at_sym(":", 1):
                name = self.next().value
            fors = None
            if self.at_kw("for"):
                self.i += 1
                names = []
                while self.at("ident"):
                    names.append(self.next().value)
                if not names:
                    raise ParseError("for needs names", self.span_here())
                fors = tuple(names)
            c = Subgoal(name, fors)
        elif kw == "prefer":
            n = int(self.expect("nat").value)
            if n < 1:
                raise ParseError("prefer index must be positive", (t.start, t.end))
            c = Prefer(n)
        elif kw == "defer":
            n = None
            if self.at("nat"):
                n = int(self.next().value)
                if n < 1:
                    raise ParseError("defer index must be positive", (t.start, t.end))
            c = Defer(n)
        elif kw == "supply":
            name = None
            if self.at("ident") and self.at_sym("=", 1):
                name = self.next().value
                self.i += 1
            c = Supply(name, self.fact_refs())
        else:
            raise ParseError(f"unexpected {kw!r} in proof script", (t.start, t.end))
        end = self.toks[self.i - 1].end
        return _with_span(c, (start, end))

    def verbatim(self) -> Command:
        start_tok = self.expect("kw", "proof")
        depth = 1
        while depth:
            t = self.peek()
            if t is None:
                raise UnbalancedProof("proof without matching qed", (start_tok.start, len(self.src)))
            self.i += 1
            if t.kind == "kw" and t.value == "proof":
                depth += 1
            elif t.kind == "kw" and t.value == "qed":
                depth -= 1
        end = self.toks[self.i - 1].end
        return VerbatimIsar(self.src[start_tok.start:end], span=(start_tok.start, end))

    def body(self) -> list[Command]:
        """Commands up to the terminal command closing the proof."""
        cmds: list[Command] = []
        depth = 0
        while True:
            c = self.command()
            cmds.append(c)
            if isinstance(c, Subgoal):
                depth += 1
            elif isinstance(c, TERMINALS):
                if depth == 0:
                    return cmds
                depth -= 1

    # structured proofs
    def isar_proof(self) -> IsarDoc:
        self.expect("kw", "proof")
        dash = False
        if self.at_sym("(") and self.at_sym("-", 1) and self.at_sym(")", 2):
            self.i += 3
            dash = True
        elif self.at_sym("-"):
            self.i += 1
            dash = True
        elems = []
        while not self.at_kw("qed"):
            elems.append(self.isar_element())
        self.i += 1
        return IsarDoc(tuple(elems), dash)

    def isar_element(self):
        t = self.next()
        if t.kind != "kw":
            raise ParseError(f"unexpected {t.value!r} in structured proof", (t.start, t.end))
        if t.value == "note":
            name = None
            if self.at_sym("=", 1):
                name = self.name()
                self.i += 1
            return Note(name, self.fact_refs())
        if t.value == "fix":
            names = []
            while True:
                n = self.expect("ident").value
                ty = None
                if self.at_sym("::"):
                    self.i += 1
                    ty = self.type_text()
                names.append((n, ty))
                if self.at_kw("and"):
                    self.i += 1
                    continue
                if self.at("ident"):
                    continue
                break
            return Fix(tuple(names))
        if t.value == "assume":
            label = self.opt_label()
            return Assume(label, self.props())
        if t.value in ("have", "show"):
            labels, props = self.labelled_props()
            clauses = []
            while self.at_kw("using") or self.at_kw("unfolding"):
                kind = self.next().value
                clauses.append((kind, self.fact_refs()))
            proof = self.isar_proof_part()
            return Have(labels, props, proof, tuple(clauses), show=t.value == "show")
        raise ParseError(f"unexpected {t.value!r} in structured proof", (t.start, t.end))

    def isar_proof_part(self):
        if self.at_kw("by"):
            self.i += 1
            m1 = self.method_top()
            m2 = self.method_top() if self.starts_method_top() else None
            return ByProof(m1, m2)
        if self.at_sym("."):
            self.i += 1
            return ImmediateProof()
        if self.at_sym(".."):
            self.i += 1
            return DefaultProof()
        if self.at_kw("sorry"):
            self.i += 1
            return SorryProof()
        if self.at_kw("proof"):
            return Subproof(self.isar_proof())
        return RawApply(tuple(self.body()))

    def opt_label(self) -> Optional[str]:
        if (self.at("ident") or self.at("nat")) and self.at_sym(":", 1):
            label = self.next().value
            self.i += 1
            return label
        return None

    def type_text(self) -> str:
        t = self.next()
        if t.kind not in ("string", "ident"):
            raise ParseError("expected a type", (t.start, t.end))
        return t.value

    def labelled_props(self) -> tuple[tuple, tuple]:
        """``l1: "A" "B" and "C" and l2: "D"``; a label covers its group."""
        labels, props = [], []
        while True:
            label = self.opt_label()
            for p in self.props(allow_and=False):
                labels.append(label)
                props.append(p)
            if self.at_kw("and") and (self.at("string", k=1) or self.at_sym(":", 2)):
                self.i += 1
                continue
            return tuple(labels), tuple(props)

    def props(self, allow_and: bool = True) -> tuple:
        out = [self.expect("string").value]
        while True:
            if self.at("string"):
                out.append(self.next().value)
            elif allow_and and self.at_kw("and") and self.at("string", k=1):
                self.i += 1
                out.append(self.next().value)
            else:
                return tuple(out)


def _with_span(c: Command, span: tuple) -> Command:
    object.__setattr__(c, "span", span)
    return c


def parse_script(src: str) -> list[Command]:
    """Parse a proof body; trailing material after the closing command is an error."""
    p = _P(src, tokenize(src))
    cmds = p.body()
    if p.peek() is not None:
        t = p.peek()
        raise ParseError("trailing commands after the proof is closed", (t.start, t.end))
    return cmds


def parse_method(src: str) -> Method:
    p = _P(src, tokenize(src))
    m = p.method()
    if p.peek() is not None:
        raise ParseError("trailing input after method", p.span_here())
    return m


def parse_isar(src: str) -> IsarDoc:
    """Parse a ``proof … qed`` block in the structured subset."""
    p = _P(src, tokenize(src))
    doc = p.isar_proof()
    if p.peek() is not None:
        raise ParseError("trailing input after qed", p.span_here())
    return doc


# ---------------------------------------------------------------------------
# Theory files


@dataclass
class TypeDecl:
    name: str
    span: tuple = (-1, -1)


@dataclass
class ConstsDecl:
    consts: list  # [(name, type text)]
    span: tuple = (-1, -1)


@dataclass
class DefsDecl:
    name: str
    text: str
    span: tuple = (-1, -1)


@dataclass
class AxiomDecl:
    name: str
    attrs: tuple
    props: tuple
    span: tuple = (-1, -1)


@dataclass
class NotationDecl:
    const: str
    symbol: str
    span: tuple = (-1, -1)


@dataclass
class DefaultTypeDecl:
    type_text: str
    span: tuple = (-1, -1)


@dataclass
class OptionsDecl:
    settings: list  # [(name, value text)]
    span: tuple = (-1, -1)


@dataclass
class LemmaDecl:
    name: Optional[str]
    attrs: tuple
    fixes: list  # [(name, type text or None)]
    assumes: list  # [(name or None, (text, ...))]
    defines: list  # [(name or None, text)]
    shows: list  # [text]
    body: Optional[list]  # None when the proof failed to parse
    span: tuple = (-1, -1)
    body_span: tuple = (-1, -1)
    error: Optional[str] = None
    error_has_apply: bool = False

    @property
    def has_apply(self) -> bool:
        if self.body is None:
            return self.error_has_apply
        return any(isinstance(c, Apply) for c in self.body)


def parse_theory_text(src: str) -> list:
    """Declarations in file order.  A lemma whose proof does not parse is
    kept with ``body=None``; header-level errors are fatal."""
    toks = tokenize(src)
    p = _P(src, toks)
    decls = []
    while p.peek() is not None:
        t = p.peek()
        if t.kind != "kw" or t.value not in DECL_KEYWORDS:
            raise ParseError(f"expected a declaration, got {t.value!r}", (t.start, t.end))
        decls.append(_decl(p))
    return decls


def _decl(p: _P):
    t = p.next()
    start = t.start
    kw = t.value
    if kw == "typedecl":
        d = TypeDecl(p.expect("ident").value)
    elif kw == "consts":
        cs = []
        while p.at("ident") or p.at("string") or p.at("nat"):
            name = p.next().value
            p.expect("sym", "::")
            cs.append((name, p.type_text()))
        if not cs:
            raise ParseError("consts needs declarations", (t.start, t.end))
        d = ConstsDecl(cs)
    elif kw == "defs":
        name = p.name()
        p.expect("sym", ":")
        d = DefsDecl(name, p.expect("string").value)
    elif kw == "axiom":
        name = p.name()
        attrs = _attrs(p)
        p.expect("sym", ":")
        d = AxiomDecl(name, attrs, p.props())
    elif kw == "notation":
        const = p.next()
        if const.kind not in ("ident", "string", "nat"):
            raise ParseError("expected a constant", (const.start, const.end))
        d = NotationDecl(const.value, p.expect("string").value)
    elif kw == "default_type":
        d = DefaultTypeDecl(p.type_text())
    elif kw == "options":
        settings = []
        while p.at("ident"):
            name = p.next().value
            p.expect("sym", "=")
            v = p.next()
            settings.append((name, v.value))
        d = OptionsDecl(settings)
    else:
        return _lemma(p, start)
    d.span = (start, p.toks[p.i - 1].end)
    return d


def _attrs(p: _P) -> tuple:
    if not p.at_sym("["):
        return ()
    p.i += 1
    out = []
    while True:
        out.append(p.expect("ident").value)
        if p.at_sym(","):
            p.i += 1
            continue
        break
    p.expect("sym", "]")
    return tuple(out)


def _named_props(p: _P) -> list:
    out = []
    while True:
        label = p.opt_label()
        out.append((label, p.props()))
        if p.at_kw("and") and not p.at("string", k=1):
            p.i += 1
            continue
        return out


def _lemma(p: _P, start: int) -> LemmaDecl:
    name, attrs = None, ()
    if (p.at("ident") or p.at("nat")) and (p.at_sym(":", 1) or p.at_sym("[", 1)):
        name = p.next().value
        attrs = _attrs(p)
        p.expect("sym", ":")
    fixes, assumes, defines, shows = [], [], [], []
    if p.at("string"):
        shows = list(p.props())
    else:
        if p.at_kw("fixes"):
            p.i += 1
            while True:
                n = p.expect("ident").value
                ty = None
                if p.at_sym("::"):
                    p.i += 1
                    ty = p.type_text()
                fixes.append((n, ty))
                if p.at_kw("and"):
                    p.i += 1
                    continue
                if p.at("ident"):
                    continue
                break
        # defines and assumes may come in either order
        while p.at_kw("assumes") or p.at_kw("defines"):
            kw = p.next().value
            items = _named_props(p)
            if kw == "assumes":
                assumes.extend(items)
            else:
                for label, texts in items:
                    defines.extend((label, x) for x in texts)
        p.expect("kw", "shows")
        for _, texts in _named_props(p):
            shows.extend(texts)
    body_start = p.peek().start if p.peek() else len(p.src)
    body, error, saw_apply = None, None, False
    save = p.i
    try:
        body = p.body()
    except ParseError as e:
        error = str(e)
        p.i = save
        while p.peek() is not None and not (p.peek().kind == "kw" and p.peek().value in DECL_KEYWORDS):
            if p.at_kw("apply"):
                saw_apply = True
            p.i += 1
    end = p.toks[p.i - 1].end
    return LemmaDecl(name, attrs, fixes, assumes, defines, shows, body, (start, end),
                     (body_start, end), error, saw_apply)
