"""Turning replay traces into structured proofs.

The trace is read backwards: every effective command becomes a ``have`` whose
statement is the goals the command settled and whose proof is the command's
method followed by ``fact`` glue for the goals it left behind.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Optional

from .checker import BlockChecker, Env, StepFailed, parse_props
from .frontend import (
    Apply, By, Command, Defer, Done, DoubleDot, ImmediateDot, Prefer, Sorry, Subgoal, Supply,
    Unfolding, Using, VerbatimIsar,
)
from .isar import (
    ByProof, DefaultProof, Fix, Have, ImmediateProof, IsarDoc, Note, RawApply, SorryProof,
    Subproof, VerbatimProof, fact_glue, fact_plus, render_doc,
)
from .kernel import (
    Free, KernelError, Term, Theory, contains_schematic, frees_of, instantiate_frees,
)
from .methods import Fact
from .options import Options
from .replay import Trace, TraceEntry, display_name
from .syntax import PrintRoundTripFailure, parse_terms, pretty_term, pretty_type

log = logging.getLogger(__name__)

APPLY_LIKE = (Apply, By, ImmediateDot, DoubleDot)
TERMINAL = (By, ImmediateDot, DoubleDot)


class TranslationFailure(KernelError):
    """A lemma that cannot be translated; ``category`` is print or misc."""

    def __init__(self, category: str, message: str):
        super().__init__(message)
        self.category = category


# ---------------------------------------------------------------------------
# Goal differences


@dataclass(frozen=True)
class GoalDiff:
    pre: tuple
    post: tuple
    pairs: tuple  # (pre index, post index) of goals left untouched
    consumed_idx: tuple
    introduced_idx: tuple

    @property
    def unchanged(self) -> tuple:
        return tuple(self.pre[i] for i, _ in self.pairs)

    @property
    def consumed(self) -> tuple:
        return tuple(self.pre[i] for i in self.consumed_idx)

    @property
    def introduced(self) -> tuple:
        return tuple(self.post[j] for j in self.introduced_idx)


def diff_goals(pre, post) -> GoalDiff:
    """Match alpha-equivalent goals of ``pre`` and ``post``.

    Equal goals are paired latest with latest: a method works on the front of
    the state and leaves its tail alone, so among duplicates the trailing
    occurrences are the untouched ones.  Alpha-equivalence is an equivalence
    relation, hence any such greedy pairing is a maximum matching."""
    pre, post = tuple(pre), tuple(post)
    waiting: dict[Term, list[int]] = {}
    for i, g in enumerate(pre):
        waiting.setdefault(g, []).append(i)
    pairs, introduced = [], []
    for j in range(len(post) - 1, -1, -1):
        q = waiting.get(post[j])
        if q:
            pairs.append((q.pop(), j))
        else:
            introduced.append(j)
    pairs.sort(key=lambda p: p[1])
    introduced.reverse()
    matched = {i for i, _ in pairs}
    consumed = tuple(i for i in range(len(pre)) if i not in matched)
    return GoalDiff(pre, post, tuple(pairs), consumed, tuple(introduced))


# ---------------------------------------------------------------------------
# Labels


@dataclass(eq=False)
class _Slot:
    """One goal occurrence, followed from the state that introduced it."""

    term: Term
    label: str


def _fresh_label(label: str, taken: set) -> str:
    if label not in taken:
        return label
    log.warning("label %s shadows an existing fact; using a primed variant", label)
    while label in taken:
        label += "'"
    return label


def _label_frame(goals, entries, prefix: str, taken: set):
    """Slots of the initial state and (pre, post) slots of every entry.  Labels
    are ``prefix_k_j``: ``k`` counts the states that bring new goals (the
    initial one is 1), ``j`` is the position among that state's new goals."""
    def new(k, j, t):
        return _Slot(t, _fresh_label(f"{prefix}_{k}_{j}", taken))

    cur = [new(1, j, g) for j, g in enumerate(goals, 1)]
    first = list(cur)
    k = 1
    out = []
    for e in entries:
        pre = cur
        d = diff_goals(e.pre, e.post)
        post: list = [None] * len(e.post)
        for i, j in d.pairs:
            post[j] = pre[i]
        if d.introduced_idx:
            k += 1
            for n, j in enumerate(d.introduced_idx, 1):
                post[j] = new(k, n, e.post[j])
        out.append((pre, post))
        cur = post
    return first, out


def assign_labels(trace: Trace, prefix: str = "h", taken=()) -> dict:
    """``(state, position) -> label`` for the outer proof; state 0 is the
    initial one and state ``i`` the one after the ``i``-th command."""
    first, per_entry = _label_frame(trace.goals, trace.entries, prefix, set(taken))
    out = {(0, j): s.label for j, s in enumerate(first)}
    for i, (_, post) in enumerate(per_entry, 1):
        for j, s in enumerate(post):
            out[(i, j)] = s.label
    return out


# ---------------------------------------------------------------------------
# Schematic segments


def _schematic(e: TraceEntry) -> bool:
    return any(contains_schematic(g) for g in e.post)


def partition_schematic_segments(entries) -> list[tuple[str, list]]:
    """Split a command sequence into ``("plain", …)`` and ``("raw", …)`` runs.
    A raw run starts at a command leaving a schematic goal and extends up to
    and including the command after which no schematic goal remains."""
    if isinstance(entries, Trace):
        entries = entries.entries
    out: list[tuple[str, list]] = []
    run: list = []
    kind = "plain"
    for e in entries:
        if kind == "plain":
            if _schematic(e):
                if run:
                    out.append(("plain", run))
                run, kind = [e], "raw"
            else:
                run.append(e)
        else:
            run.append(e)
            if not _schematic(e):
                out.append(("raw", run))
                run, kind = [], "plain"
    if run:
        out.append((kind, run))
    return out


# ---------------------------------------------------------------------------
# Statement printing


class _Printer:
    def __init__(self, opts: Options, ctx: Theory, ascii_: bool):
        self.opts = opts
        self.ctx = ctx
        self.ascii = ascii_

    def stmt(self, t: Term, scope: dict) -> str:
        """Print ``t`` under the display names of ``scope`` (display -> Free)."""
        ren: dict[str, Term] = {}
        shown: dict[str, Free] = {}
        for f in frees_of(t):
            d = display_name(f.name)
            other = shown.setdefault(d, f)
            if other != f:
                raise TranslationFailure(
                    "misc", f"statement would show two variables named {d}")
            if d != f.name:
                ren[f.name] = Free(d, f.ty)
        u = instantiate_frees(t, ren) if ren else t
        fixed = _shown_scope(scope)
        try:
            return pretty_term(u, self.opts.print_types, self.ctx, avoid=set(fixed),
                               ascii_=self.ascii, fixed=fixed, check=True)
        except PrintRoundTripFailure as err:
            raise TranslationFailure("print", str(err)) from err

    def type_needed(self, name: str, ty, text: str, scope: dict) -> bool:
        """Would ``fix name`` without a type give ``name`` the type ``ty`` when
        ``text`` is read?"""
        if self.opts.print_types == "all":
            return True
        if self.opts.print_types == "none":
            return False
        fixed = _shown_scope(scope)
        fixed[name] = None
        try:
            _, ftypes = parse_terms([text], self.ctx, fixed)
        except KernelError:
            return True
        return ftypes.get(name) != ty

    def type_text(self, ty) -> str:
        return pretty_type(ty, self.ascii)


def _shown_scope(scope: dict) -> dict:
    """Variables in scope under the names they are printed with."""
    out = {}
    for f in scope.values():
        if f is not None:
            d = display_name(f.name)
            out[d] = Free(d, f.ty)
    return out


# ---------------------------------------------------------------------------
# Steps


@dataclass
class _Step:
    """One forward element in the making, with its alternative forms."""

    pre: list  # slots
    post: list
    proof: Callable  # glue method -> proof part
    clauses: tuple = ()
    fixed_proof: bool = False  # sorry and verbatim proofs: statement only
    scope: dict = field(default_factory=dict)
    dummy: bool = False  # restatement of a hoisted subproof
    verbatim: bool = False  # copied structured block; a sorry here is the input's own gap


@dataclass
class _Stats:
    linear_fallbacks: int = 0
    sorry_fallbacks: int = 0
    raw_segments: int = 0
    verbatim: int = 0


class Translator:
    """Build the structured proof of one lemma from its trace."""

    def __init__(self, opts: Options, ctx: Theory, ascii_: bool = False, taken=()):
        self.opts = opts
        self.ctx = ctx
        self.printer = _Printer(opts, ctx, ascii_)
        self.taken = set(taken) | set(ctx.facts)
        self.stats = _Stats()

    # -- glue
    def _glue(self, slots) -> Optional[object]:
        if not slots:
            return None
        if self.opts.named_facts:
            return fact_glue(s.label for s in slots)
        return fact_plus()

    def _labels(self, slots) -> tuple:
        if not self.opts.named_facts:
            return tuple(None for _ in slots)
        return tuple(s.label for s in slots)

    # -- frames
    def translate(self, trace: Trace, lctx) -> IsarDoc:
        if trace.outcome == "incomplete":
            raise TranslationFailure("misc", "the script leaves goals open")
        env = Env(lctx)
        taken = self.taken | set(lctx.facts)
        doc, _ = self._frame(trace.goals, trace.goals, trace.entries, env, dict(lctx.scope),
                             (), (), taken)
        return doc

    def _frame(self, goals, check_goals, entries, outer: Env, scope: dict, fixes: tuple,
               history: tuple, taken: set) -> tuple[IsarDoc, bool]:
        """Translate the commands of one (sub)proof whose goals are ``goals``;
        ``check_goals`` are the same goals as the checker reads them.  Returns
        the block and whether it is cheated."""
        taken = set(taken)
        for e in entries:
            if isinstance(e.command, Supply) and e.command.name:
                taken.add(e.command.name)
            if isinstance(e.command, Subgoal) and e.command.name:
                taken.add(e.command.name)
        first, per_entry = _label_frame(goals, entries, self.opts.fact_name_prefix, taken)
        slots_of = {id(e): ps for e, ps in zip(entries, per_entry)}
        hoisted: list = []  # ("note", Note) | ("subgoal", entry, slot)
        steps: list[_Step] = []
        history = list(history)
        for kind, run in partition_schematic_segments(entries):
            if kind == "raw":
                steps.append(self._raw_step(run, slots_of, history, hoisted, scope))
                if any(e.consumed_chained for e in run) or any(
                        isinstance(e.command, Subgoal) for e in run):
                    history = []
                continue
            i = 0
            while i < len(run):
                i, history = self._plain(run, i, slots_of, history, hoisted, steps, scope)
        return self._assemble(goals, check_goals, hoisted, steps, outer, scope, fixes, taken)

    def _plain(self, run, i, slots_of, history, hoisted, steps, scope):
        e = run[i]
        c = e.command
        pre, post = slots_of[id(e)]
        if e.failed and isinstance(c, (Using, Unfolding, Supply)):
            if pre:
                steps.append(_Step(pre, [], lambda g: SorryProof(), fixed_proof=True,
                                   scope=e.scope))
            return i + 1, history
        if isinstance(c, (Using, Unfolding)):
            j = i
            while j < len(run) and isinstance(run[j].command, (Using, Unfolding)) \
                    and not run[j].failed:
                j += 1
            nxt = run[j] if j < len(run) else None
            if self.opts.smart_unfolds and nxt is not None and \
                    isinstance(nxt.command, APPLY_LIKE):
                clauses = tuple(history) + tuple(_clause(x.command) for x in run[i:j])
                steps.append(self._apply_step(nxt, pre, slots_of[id(nxt)][1], clauses))
                return j + 1, []
            history = list(history)
            for x in run[i:j]:
                if isinstance(x.command, Using):
                    history.append(_clause(x.command))
                    continue
                xpre, xpost = slots_of[id(x)]
                unfold = (_clause(x.command),)
                steps.append(_Step(xpre, xpost, lambda g: ByProof(None, g or fact_plus()),
                                   clauses=unfold, scope=x.scope))
                if any(k == "using" for k, _ in history):
                    history.append(_clause(x.command))
            return j, history
        if isinstance(c, APPLY_LIKE):
            clauses = tuple(history) if e.consumed_chained else ()
            steps.append(self._apply_step(e, pre, post, clauses))
            return i + 1, []
        if isinstance(c, Subgoal):
            hoisted.append(("subgoal", e, pre[0], tuple(history)))
            if self.opts.dummy_subproofs:
                steps.append(_Step([pre[0]], [], lambda g: ByProof(Fact(), None),
                                   fixed_proof=True, scope=e.scope, dummy=True))
            return i + 1, []
        if isinstance(c, Supply):
            hoisted.append(("note", Note(c.name, c.facts)))
            return i + 1, history
        if isinstance(c, (Prefer, Defer)):
            return i + 1, history
        if isinstance(c, Done):
            if e.failed and pre:
                steps.append(_Step(pre, [], lambda g: SorryProof(), fixed_proof=True,
                                   scope=e.scope))
            return i + 1, history
        if isinstance(c, Sorry):
            if pre:
                steps.append(_Step(pre, [], lambda g: SorryProof(), fixed_proof=True,
                                   clauses=tuple(history), scope=e.scope))
            return i + 1, []
        if isinstance(c, VerbatimIsar):
            self.stats.verbatim += 1
            text = c.text
            steps.append(_Step(pre, [], lambda g: VerbatimProof(text), fixed_proof=True,
                               clauses=tuple(history), scope=e.scope, verbatim=True))
            return i + 1, []
        raise TranslationFailure("misc", f"unsupported command {type(c).__name__}")

    def _apply_step(self, e: TraceEntry, pre, post, clauses) -> _Step:
        c = e.command
        if e.failed:
            return _Step(pre, post, lambda g: SorryProof(), clauses=clauses,
                         fixed_proof=True, scope=e.scope)
        if isinstance(c, By):
            m, m2 = c.method, c.method2
            proof = lambda g: ByProof(m, m2)
        elif isinstance(c, ImmediateDot):
            proof = lambda g: ImmediateProof()
        elif isinstance(c, DoubleDot):
            proof = lambda g: DefaultProof()
        else:
            m = c.method
            proof = lambda g: ByProof(m, g)
        return _Step(pre, post, proof, clauses=clauses, scope=e.scope)

    def _raw_step(self, run, slots_of, history, hoisted, scope) -> _Step:
        self.stats.raw_segments += 1
        cmds: list[Command] = []

        def collect(es):
            for x in es:
                if x.alternatives_taken:
                    raise TranslationFailure(
                        "misc", "back inside a schematic segment cannot be replayed")
                if isinstance(x.command, Supply) and not x.failed:
                    hoisted.append(("note", Note(x.command.name, x.command.facts)))
                cmds.append(x.command)
                collect(x.children)
                if isinstance(x.command, Subgoal) and x.children and \
                        not isinstance(x.children[-1].command, (Done, Sorry, VerbatimIsar)
                                       + TERMINAL):
                    cmds.append(Done())

        collect(run)
        pre = slots_of[id(run[0])][0]
        post = slots_of[id(run[-1])][1]
        clauses = tuple(history) if any(e.consumed_chained for e in run) else ()
        terminal = isinstance(cmds[-1], TERMINAL + (Sorry, VerbatimIsar))
        if isinstance(cmds[-1], Done) and run[-1].command is cmds[-1]:
            terminal = True

        def proof(glue):
            tail = [] if terminal else ([Apply(method=glue)] if glue else []) + [Done()]
            return RawApply(tuple(cmds) + tuple(tail))

        return _Step(pre, post, proof, clauses=clauses, scope=run[0].scope)

    # -- assembly and validation
    def _have(self, step: _Step, stated, glue_slots, show=False) -> Have:
        props = tuple(self.printer.stmt(s.term, step.scope) for s in stated)
        # the hoisted subproof already carries the name of a dummy's goal
        labels = (None,) * len(stated) if step.dummy else self._labels(stated)
        return Have(labels, props, step.proof(self._glue(glue_slots)), step.clauses, show=show)

    def _candidates(self, step: _Step) -> list[tuple[str, list, list]]:
        if step.fixed_proof:
            consumed, _ = _slot_diff(step.pre, step.post)
            return [("fixed", consumed, [])] if consumed else []
        d = _slot_diff(step.pre, step.post)
        linear = ("linear", step.pre, step.post)
        out = []
        if self.opts.smart_goals:
            consumed, introduced = d
            if consumed:
                out.append(("smart", consumed, introduced))
            elif not introduced:
                return []
        out.append(linear)
        return out

    def _assemble(self, goals, check_goals, hoisted, steps, outer: Env, scope, fixes,
                  taken) -> tuple[IsarDoc, bool]:
        bc = BlockChecker(tuple(check_goals), outer)
        elements: list = []
        if fixes:
            fx = Fix(fixes)
            bc.add(fx)
            elements.append(fx)
        for h in hoisted:
            if h[0] == "note":
                try:
                    bc.add(h[1])
                except (StepFailed, KernelError) as err:
                    raise TranslationFailure("misc", f"note: {err}") from err
                elements.append(h[1])
            else:
                _, e, slot, hist = h
                elements.append(self._subproof(e, slot, hist, bc, scope, taken))
        forward = list(reversed(steps))
        total = Counter(goals)
        for n, step in enumerate(forward):
            last = n == len(forward) - 1
            cands = self._candidates(step)
            if not cands:
                continue
            chosen = None
            for kind, stated, glue in cands:
                show = last and Counter(s.term for s in stated) == total
                el = self._have(step, stated, glue, show)
                try:
                    bc.add(el)
                except (StepFailed, KernelError) as err:
                    log.info("step %s rejected (%s form): %s", el.props, kind, err)
                    continue
                chosen = el
                if kind == "linear" and self.opts.smart_goals:
                    self.stats.linear_fallbacks += 1
                break
            if chosen is None:
                stated = cands[0][1]
                el = Have(self._labels(stated),
                          tuple(self.printer.stmt(s.term, step.scope) for s in stated),
                          SorryProof(), step.clauses,
                          show=last and Counter(s.term for s in stated) == total)
                try:
                    bc.add(el)
                except (StepFailed, KernelError) as err:
                    raise TranslationFailure("misc", f"statement rejected: {err}") from err
                if step.verbatim:
                    log.warning("structured block does not check; replaced by sorry")
                else:
                    self.stats.sorry_fallbacks += 1
                chosen = el
            elements.append(chosen)
        if bc.pending:
            final = Have(tuple(None for _ in goals),
                         tuple(self.printer.stmt(g, scope) for g in goals),
                         ByProof(None, fact_plus()), show=True)
            try:
                bc.add(final)
            except (StepFailed, KernelError) as err:
                raise TranslationFailure("misc", f"final show rejected: {err}") from err
            elements.append(final)
        verdict = bc.finish()
        if verdict.status == "invalid":
            raise TranslationFailure("misc", "translated block does not prove its goals")
        return IsarDoc(tuple(elements)), verdict.status == "cheated"

    def _subproof(self, e: TraceEntry, slot: _Slot, history, bc: BlockChecker, scope,
                  taken) -> Have:
        c: Subgoal = e.command
        inner = dict(scope)
        names = []
        for sk in e.skolems:
            shown = display_name(sk.name)
            inner[shown] = Free(sk.name, sk.ty)
            names.append((shown, sk.ty))
        body_text = self.printer.stmt(e.focused, inner)
        fixes = tuple((n, self.printer.type_text(ty) if self.printer.type_needed(
            n, ty, body_text, inner) else None) for n, ty in names)
        stmt = self.printer.stmt(slot.term, e.scope)
        label = c.name or (slot.label if self.opts.named_facts else None)
        try:
            goal = parse_props([stmt], bc.env)[0]
        except KernelError as err:
            raise TranslationFailure("misc", f"subgoal statement: {err}") from err
        doc, cheated = self._frame((e.focused,), (goal,), e.children, bc.env, inner, fixes,
                                   history, taken)
        el = Have((label,), (stmt,), Subproof(doc))
        if c.name:
            # the subgoal's name also stands for its goal slot in glue
            slot.label = c.name
        try:
            bc.add(el, trusted=cheated)
        except (StepFailed, KernelError) as err:
            raise TranslationFailure("misc", f"subproof: {err}") from err
        return el


def _clause(c) -> tuple:
    return ("using" if isinstance(c, Using) else "unfolding", tuple(c.facts))


def _slot_diff(pre, post) -> tuple[list, list]:
    d = diff_goals([s.term for s in pre], [s.term for s in post])
    return [pre[i] for i in d.consumed_idx], [post[j] for j in d.introduced_idx]


# ---------------------------------------------------------------------------
# Whole lemmas


def render(doc: IsarDoc, indent: int = 0) -> str:
    """Text of a translated proof; statements are already printed."""
    return render_doc(doc, str, indent)


def translate(trace: Trace, opts: Options, lemma) -> IsarDoc:
    """Structured proof of ``lemma`` (a loaded lemma) from its replay ``trace``."""
    return Translator(opts, lemma.ctx).translate(trace, lemma.lctx)
