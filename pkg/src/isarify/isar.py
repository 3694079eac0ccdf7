"""Structured proof documents: element types and rendering."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

from .kernel import Term
from .methods import FactRef, Method, render_method

Prop = Union[Term, str]


@dataclass(frozen=True)
class ByProof:
    """``by m1 [m2]``; either part may be absent but not both."""

    primary: Optional[Method] = None
    glue: Optional[Method] = None


@dataclass(frozen=True)
class ImmediateProof:
    pass


@dataclass(frozen=True)
class DefaultProof:
    pass


@dataclass(frozen=True)
class SorryProof:
    pass


@dataclass(frozen=True)
class Subproof:
    doc: "IsarDoc"


@dataclass(frozen=True)
class RawApply:
    commands: tuple  # frontend commands, ending in a terminal one


@dataclass(frozen=True)
class VerbatimProof:
    text: str


ProofPart = Union[ByProof, ImmediateProof, DefaultProof, SorryProof, Subproof, RawApply,
                  VerbatimProof]


@dataclass(frozen=True)
class Note:
    name: Optional[str]
    facts: tuple


@dataclass(frozen=True)
class Fix:
    names: tuple  # ((name, type text or None), ...)


@dataclass(frozen=True)
class Assume:
    label: Optional[str]
    props: tuple


@dataclass(frozen=True)
class Have:
    labels: tuple  # one label (or None) per statement; a label names its run
    props: tuple
    proof: ProofPart
    clauses: tuple = ()  # (("using" | "unfolding", (FactRef, ...)), ...)
    show: bool = False
    comment: Optional[str] = None


@dataclass(frozen=True)
class IsarDoc:
    elements: tuple = ()
    dash: bool = True  # proof(-) versus bare proof


Element = Union[Note, Fix, Assume, Have]


def fact_glue(labels) -> Optional[Method]:
    """``(fact l1, fact l2, ...)`` for the given labels, None for none."""
    from .methods import Fact, Seq
    labels = list(labels)
    if not labels:
        return None
    facts = tuple(Fact((FactRef(name=l),)) for l in labels)
    return facts[0] if len(facts) == 1 else Seq(facts)


def fact_plus() -> Method:
    from .methods import Fact, Plus
    return Plus(Fact())


def render_doc(doc: IsarDoc, show_prop: Callable[[Term], str], indent: int = 0,
               render_commands: Optional[Callable] = None) -> str:
    """Render a document.  ``show_prop`` prints a term statement (without
    quotes); string statements are emitted as they are."""
    lines: list[str] = []
    _render(doc, show_prop, indent, lines, render_commands)
    return "\n".join(lines)


def _q(p: Prop, show_prop) -> str:
    return '"' + (p if isinstance(p, str) else show_prop(p)) + '"'


def _render(doc: IsarDoc, show_prop, indent: int, out: list, render_commands) -> None:
    pad = " " * indent
    out.append(pad + ("proof(-)" if doc.dash else "proof"))
    inner = " " * (indent + 2)
    for e in doc.elements:
        if isinstance(e, Note):
            head = f"note {e.name} = " if e.name else "note "
            out.append(inner + head + " ".join(f.render() for f in e.facts))
        elif isinstance(e, Fix):
            out.append(inner + "fix " + " and ".join(
                n if t is None else f'{n} :: "{t}"' for n, t in e.names))
        elif isinstance(e, Assume):
            lab = f"{e.label}: " if e.label else ""
            out.append(inner + "assume " + lab + " and ".join(_q(p, show_prop) for p in e.props))
        elif isinstance(e, Have):
            _render_have(e, show_prop, indent + 2, out, render_commands)
        else:
            raise TypeError(f"unknown element {e!r}")
    out.append(pad + "qed")


def _render_have(e: Have, show_prop, indent: int, out: list, render_commands) -> None:
    pad = " " * indent
    head = ("show " if e.show else "have ") + render_statements(e.labels, e.props, show_prop)
    for kind, refs in e.clauses:
        head += f" {kind} " + " ".join(r.render() for r in refs)
    p = e.proof
    tail = f" (* {e.comment} *)" if e.comment else ""
    if isinstance(p, ByProof):
        out.append(pad + head + " " + render_by(p) + tail)
    elif isinstance(p, ImmediateProof):
        out.append(pad + head + " ." + tail)
    elif isinstance(p, DefaultProof):
        out.append(pad + head + " .." + tail)
    elif isinstance(p, SorryProof):
        out.append(pad + head + " sorry" + tail)
    elif isinstance(p, Subproof):
        out.append(pad + head + tail)
        _render(p.doc, show_prop, indent, out, render_commands)
    elif isinstance(p, VerbatimProof):
        out.append(pad + head + tail)
        out.extend(_reindent(p.text, indent))
    elif isinstance(p, RawApply):
        out.append(pad + head + tail)
        if render_commands is None:
            from .frontend import render_command
            render_commands = lambda cs: [render_command(c) for c in cs]
        for line in render_commands(p.commands):
            out.append(pad + "  " + line)
    else:
        raise TypeError(f"unknown proof {p!r}")


def render_statements(labels, props, show_prop) -> str:
    """Consecutive statements under one label share it; groups are joined by
    ``and``."""
    parts: list[str] = []
    prev = object()
    for lab, p in zip(labels, props):
        if lab is not None and lab == prev:
            parts[-1] += " " + _q(p, show_prop)
        else:
            parts.append((f"{lab}: " if lab else "") + _q(p, show_prop))
        prev = lab
    return " and ".join(parts)


def label_groups(labels, items) -> dict:
    """Label -> items it names, in order."""
    out: dict = {}
    for lab, x in zip(labels, items):
        if lab is not None:
            out.setdefault(lab, []).append(x)
    return out


def render_by(p: ByProof) -> str:
    if p.primary is None:
        return "by " + render_method(p.glue, top=True)
    if p.glue is None:
        return "by " + render_method(p.primary, top=True)
    return "by (" + render_method(p.primary) + ") " + render_method(p.glue, top=True)


def _reindent(text: str, indent: int) -> list[str]:
    lines = text.splitlines()
    if not lines:
        return []
    rest = [l for l in lines[1:] if l.strip()]
    strip = min((len(l) - len(l.lstrip()) for l in rest), default=0)
    # the closing qed sits at the block's base indentation
    base = len(lines[-1]) - len(lines[-1].lstrip()) if len(lines) > 1 else 0
    strip = min(strip, base)
    out = [" " * indent + lines[0].strip()]
    for l in lines[1:]:
        out.append(" " * indent + l[strip:] if l.strip() else "")
    return out
