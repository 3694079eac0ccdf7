"""Replaying apply-style scripts and recording a trace of proof states."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterator, Optional

from .budget import check_deadline
from .frontend import (
    Apply, Back, By, Command, Defer, Done, DoubleDot, ImmediateDot, Prefer, Sorry,
    Subgoal, Supply, Unfolding, Using, VerbatimIsar,
)
from .kernel import (
    Free, KernelError, Term, Theorem, contains_schematic, frees_of, mk_goal,
    strip_goal, Abs,
)
from .methods import (
    Auto, FactRef, Insert, LocalContext, Method, MethodError, Seq, SimpAll, Standard,
    eval_method, resolve_fact_ref, tac_assumption, tac_fact,
)
from .rewrite import StepBudgetExceeded, normalize, rules_from
from .syntax import _variant

log = logging.getLogger(__name__)

SEARCH_BUDGET = 10_000


class IllegalCommand(KernelError):
    pass


class NoSuchGoal(IllegalCommand):
    pass


class SearchBudgetExceeded(KernelError):
    pass


@dataclass(frozen=True)
class Skolem:
    display: str  # name as written (or the parameter's hint)
    name: str  # name of the Free in goals
    ty: object
    renamed_from: Optional[str] = None  # set when subgoal_fix_fresh renamed it


@dataclass
class TraceEntry:
    command: Command
    pre: tuple
    post: tuple
    consumed_chained: tuple = ()
    chained_after: tuple = ()
    skolems: tuple = ()
    supplied: Optional[tuple] = None  # (name or None, thms)
    failed: bool = False
    alternatives_taken: int = 0
    children: list = field(default_factory=list)
    focused: Optional[Term] = None  # Subgoal: goal after skolemization
    error: Optional[str] = None
    budget_exhausted: bool = False
    scope: dict = field(default_factory=dict)  # display name -> Free, for printing


@dataclass
class Trace:
    goals: tuple
    entries: list
    outcome: str  # complete | incomplete | cheated
    budget_exhausted: bool = False
    used_cheated: bool = False

    def flat(self) -> Iterator[TraceEntry]:
        def go(es):
            for e in es:
                yield e
                yield from go(e.children)
        return go(self.entries)


@dataclass
class _Frame:
    goals: tuple
    lctx: LocalContext
    chained: tuple = ()
    saved: tuple = ()
    name: Optional[str] = None
    focus: Optional[Term] = None  # the parent goal being proven
    entries: list = field(default_factory=list)
    alt: Optional[list] = None  # [iterator, entry] for back
    cheated: bool = False
    owner: Optional[TraceEntry] = None


def all_goals_method(m: Method) -> bool:
    """Does ``m`` act on every goal (and hence see every goal's chained facts)?"""
    if isinstance(m, (SimpAll, Auto)):
        return True
    for attr in ("methods",):
        if hasattr(m, attr):
            return any(all_goals_method(x) for x in getattr(m, attr))
    if hasattr(m, "method"):
        return all_goals_method(m.method)
    return False


def _method_refs(m: Method) -> list[FactRef]:
    out = []
    for attr in ("facts", "add"):
        out.extend(getattr(m, attr, ()) or ())
    for x in getattr(m, "methods", ()) or ():
        out.extend(_method_refs(x))
    if hasattr(m, "method"):
        out.extend(_method_refs(m.method))
    return out


def terminal_search(m: Method, goals: tuple, lctx: LocalContext,
                    budget: int = SEARCH_BUDGET) -> Optional[tuple]:
    """First state in ``m``'s sequence whose goals all close (remaining goals
    are tried by assumption); ``None`` if none within ``budget`` alternatives."""
    for k, st in enumerate(eval_method(m, goals, lctx)):
        if k >= budget:
            raise SearchBudgetExceeded(f"no solved state within {budget} alternatives")
        if not st or _close_all(st):
            return ()
    return None


def _close_all(goals: tuple) -> bool:
    while goals:
        check_deadline()
        nxt = next(iter(tac_assumption(goals)), None)
        if nxt is None:
            return False
        goals = nxt
    return True


def _immediate(goals: tuple, facts: tuple) -> bool:
    """``.``: every goal is closed by one of the chained facts (or trivially)."""
    while goals:
        nxt = next(iter(tac_fact(list(facts), goals)), None)
        if nxt is None:
            nxt = next(iter(tac_assumption(goals)), None)
        if nxt is None:
            return False
        goals = nxt
    return True


def skolemize_focus(goal: Term, for_names: Optional[tuple], existing: set,
                    fix_fresh: bool) -> tuple[list[Skolem], Term]:
    """Fix the goal's parameters as Frees.  Names from ``for`` bind the first
    parameters; the rest keep their hints, made fresh.  A chosen name that
    clashes with a free of the goal gets a distinct internal name (or, with
    ``fix_fresh``, a fresh letter-suffixed one)."""
    params, hyps, concl = strip_goal(goal)
    body = mk_goal([], hyps, concl)
    for_names = tuple(for_names or ())
    if len(for_names) > len(params):
        raise IllegalCommand("more names in 'for' than goal parameters")
    in_goal = {f.name for f in frees_of(goal)}
    used = set(existing) | in_goal
    skolems: list[Skolem] = []
    frees: list[Free] = []
    for i, (hint, ty) in enumerate(params):
        if i < len(for_names):
            name = for_names[i]
            if name in used:
                if fix_fresh:
                    fresh = _variant(name, used)
                    sk = Skolem(name, fresh, ty, renamed_from=name)
                else:
                    fresh = _internal(name, used)
                    sk = Skolem(name, fresh, ty)
            else:
                sk = Skolem(name, name, ty)
        else:
            fresh = _variant(hint, used) if hint in used else hint
            sk = Skolem(fresh, fresh, ty)
        used.add(sk.name)
        skolems.append(sk)
        frees.append(Free(sk.name, ty))
    # Bound 0 is the last parameter
    n = len(frees)
    for k, f in enumerate(frees):
        body = _inst_bound(body, n - 1 - k, f)
    return skolems, body


def _internal(name: str, used: set) -> str:
    k = 1
    while f"{name}__{k}" in used:
        k += 1
    return f"{name}__{k}"


def display_name(free_name: str) -> str:
    return free_name.split("__")[0] if "__" in free_name else free_name


def _inst_bound(t: Term, idx: int, f: Free) -> Term:
    from .kernel import App, Bound

    def go(u: Term, d: int) -> Term:
        if isinstance(u, Bound):
            if u.index == idx + d:
                return f
            return Bound(u.index - 1) if u.index > idx + d else u
        if isinstance(u, Abs):
            return Abs(u.hint, u.ty, go(u.body, d + 1))
        if isinstance(u, App):
            return App(go(u.fun, d), go(u.arg, d))
        return u

    return go(t, 0)


def _verbatim_proves(text: str, f: "_Frame") -> bool:
    """A structured block in a script counts as a proof when it checks."""
    from .checker import _insert_hyps, check_text
    goals = tuple(_insert_hyps(g, f.chained) for g in f.goals) if f.chained else f.goals
    return check_text(text, goals, f.lctx).status == "valid"


class Replay:
    """Step-by-step interpreter; ``run`` drives a whole script."""

    def __init__(self, goals, lctx: LocalContext, fix_fresh: bool = False, chained=()):
        self.goals0 = tuple(goals)
        self.frames = [_Frame(tuple(goals), lctx, chained=tuple(chained))]
        self.fix_fresh = fix_fresh
        self.budget_exhausted = False
        self.used_cheated = False
        self.finished = False
        self.last_was_apply = False

    @property
    def frame(self) -> _Frame:
        return self.frames[-1]

    def run(self, cmds) -> Trace:
        for c in cmds:
            if self.finished:
                raise IllegalCommand("command after the proof is finished")
            self.step(c)
        if not self.finished:
            outcome = "incomplete"
        elif self.frames[0].cheated:
            outcome = "cheated"
        else:
            outcome = "complete"
        return Trace(self.goals0, self.frames[0].entries, outcome, self.budget_exhausted,
                     self.used_cheated)

    # -- helpers
    def _entry(self, c: Command, pre, post, **kw) -> TraceEntry:
        e = TraceEntry(c, tuple(pre), tuple(post), scope=dict(self.frame.lctx.scope), **kw)
        self.frame.entries.append(e)
        return e

    def _note_refs(self, refs) -> None:
        for r in refs:
            try:
                if any(t.cheated for t in resolve_fact_ref(r, self.frame.lctx)):
                    self.used_cheated = True
            except KernelError:
                pass

    def _close_frame(self) -> None:
        f = self.frames.pop()
        if not self.frames:
            self.frames.append(f)
            self.finished = True
            return
        parent = self.frame
        thm = Theorem(f.focus, "cheated" if f.cheated else "proven")
        if f.cheated:
            parent.cheated = True
        lctx = parent.lctx
        parent.lctx = lctx.add_named(f.name, [thm]) if f.name else lctx.add_anon([thm])
        parent.goals = f.saved
        parent.alt = None
        if f.owner is not None:
            f.owner.post = tuple(f.saved)

    def _sorry(self, n: Optional[int] = None) -> tuple:
        """Discharge the first ``n`` goals (all if None) by cheating."""
        f = self.frame
        f.cheated = True
        return () if n is None else f.goals[n:]

    # -- commands
    def step(self, c: Command) -> None:
        check_deadline()
        f = self.frame
        was_apply, self.last_was_apply = self.last_was_apply, False
        if isinstance(c, Apply):
            self._apply(c)
            self.last_was_apply = True
        elif isinstance(c, Back):
            if not was_apply or f.alt is None:
                raise IllegalCommand("back without a preceding apply")
            it, e = f.alt
            try:
                nxt = next(it)
            except StopIteration:
                raise IllegalCommand("back: no further alternatives") from None
            e.post = tuple(nxt)
            e.alternatives_taken += 1
            f.goals = e.post
            self.last_was_apply = True
        elif isinstance(c, (By, ImmediateDot, DoubleDot)):
            self._terminal(c)
        elif isinstance(c, Done):
            if f.goals:
                self._entry(c, f.goals, (), failed=True, error="goals remain at done")
                self._sorry()
            else:
                self._entry(c, (), ())
            f.goals = ()
            self._close_frame()
        elif isinstance(c, (Sorry, VerbatimIsar)):
            self._entry(c, f.goals, ())
            if not (isinstance(c, VerbatimIsar) and _verbatim_proves(c.text, f)):
                self._sorry()
            f.goals = ()
            self._close_frame()
        elif isinstance(c, Using):
            try:
                thms = [t for r in c.facts for t in resolve_fact_ref(r, f.lctx)]
            except MethodError as e:
                self._entry(c, f.goals, f.goals, failed=True, error=str(e),
                            chained_after=f.chained)
                f.cheated = True
                return
            self._note_refs(c.facts)
            f.chained = f.chained + tuple(thms)
            self._entry(c, f.goals, f.goals, chained_after=f.chained)
        elif isinstance(c, Unfolding):
            self._unfolding(c)
        elif isinstance(c, Subgoal):
            self._subgoal(c)
        elif isinstance(c, Prefer):
            if not 1 <= c.n <= len(f.goals):
                raise NoSuchGoal(f"prefer {c.n}: no such goal")
            g = f.goals
            new = (g[c.n - 1],) + g[:c.n - 1] + g[c.n:]
            self._entry(c, g, new, chained_after=f.chained)
            f.goals = new
        elif isinstance(c, Defer):
            n = c.n or 1
            if not 1 <= n <= len(f.goals):
                raise NoSuchGoal(f"defer {n}: no such goal")
            g = f.goals
            new = g[:n - 1] + g[n:] + (g[n - 1],)
            self._entry(c, g, new, chained_after=f.chained)
            f.goals = new
        elif isinstance(c, Supply):
            try:
                thms = [t for r in c.facts for t in resolve_fact_ref(r, f.lctx)]
            except MethodError as e:
                self._entry(c, f.goals, f.goals, failed=True, error=str(e))
                f.cheated = True
                return
            self._note_refs(c.facts)
            f.lctx = f.lctx.add_named(c.name, thms) if c.name else f.lctx.add_anon(thms)
            self._entry(c, f.goals, f.goals, supplied=(c.name, tuple(thms)),
                        chained_after=f.chained)
        else:
            raise IllegalCommand(f"unsupported command {c!r}")

    def _insert_chained(self, m: Method) -> tuple[Method, tuple]:
        f = self.frame
        chained = f.chained
        f.chained = ()
        if not chained:
            return m, ()
        return Seq((Insert(chained, all_goals_method(m)), m)), chained

    def _apply(self, c: Apply) -> None:
        f = self.frame
        pre = f.goals
        self._note_refs(_method_refs(c.method))
        m, chained = self._insert_chained(c.method)
        err, budget = None, False
        if not pre:
            err = "no goals"
            st = None
        else:
            it = eval_method(m, pre, f.lctx)
            try:
                st = next(it, None)
            except StepBudgetExceeded as e:
                st, err, budget = None, str(e), True
            except MethodError as e:
                st, err = None, str(e)
        if st is None:
            n = len(pre) if all_goals_method(c.method) else 1
            post = self._sorry(n)
            e = self._entry(c, pre, post, consumed_chained=chained, failed=True,
                            error=err or "method failed", budget_exhausted=budget)
            self.budget_exhausted |= budget
            f.goals = post
            f.alt = None
            return
        e = self._entry(c, pre, st, consumed_chained=chained)
        f.goals = tuple(st)
        f.alt = [it, e]

    def _terminal(self, c) -> None:
        f = self.frame
        pre = f.goals
        if isinstance(c, By):
            self._note_refs(_method_refs(c.method))
            if c.method2 is not None:
                self._note_refs(_method_refs(c.method2))
            base = c.method if c.method2 is None else Seq((c.method, c.method2))
        elif isinstance(c, DoubleDot):
            base = Standard()
        else:
            base = None
        chained = f.chained
        err, budget = None, False
        try:
            if base is None:
                f.chained = ()
                ok = _immediate(pre, chained)
            else:
                m, chained = self._insert_chained(base)
                ok = terminal_search(m, pre, f.lctx) is not None
        except (StepBudgetExceeded, SearchBudgetExceeded) as e:
            ok, err, budget = False, str(e), True
        except MethodError as e:
            ok, err = False, str(e)
        if not ok:
            self._sorry()
        self.budget_exhausted |= budget
        self._entry(c, pre, (), consumed_chained=chained, failed=not ok,
                    error=None if ok else (err or "terminal method failed"),
                    budget_exhausted=budget)
        f.goals = ()
        f.alt = None
        self._close_frame()

    def _unfolding(self, c: Unfolding) -> None:
        f = self.frame
        pre = f.goals
        try:
            thms = [(r.render(), t) for r in c.facts for t in resolve_fact_ref(r, f.lctx)]
            rules = rules_from(thms)
            goals = tuple(normalize(g, rules) for g in pre)
            chained = tuple(Theorem(normalize(t.prop, rules), t.provenance) for t in f.chained)
        except StepBudgetExceeded as e:
            self.budget_exhausted = True
            self._entry(c, pre, pre, failed=True, error=str(e), budget_exhausted=True,
                        chained_after=f.chained)
            f.cheated = True
            return
        except MethodError as e:
            self._entry(c, pre, pre, failed=True, error=str(e), chained_after=f.chained)
            f.cheated = True
            return
        self._note_refs(c.facts)
        f.chained = chained
        f.goals = goals
        self._entry(c, pre, goals, chained_after=chained)

    def _subgoal(self, c: Subgoal) -> None:
        f = self.frame
        if not f.goals:
            raise IllegalCommand("subgoal: no goals")
        goal = f.goals[0]
        existing = {x.name for x in f.lctx.scope.values()}
        skolems, body = skolemize_focus(goal, c.for_names, existing, self.fix_fresh)
        e = self._entry(c, f.goals, f.goals[1:], skolems=tuple(skolems), focused=body)
        lctx = f.lctx.fix((sk.display, Free(sk.name, sk.ty)) for sk in skolems)
        child = _Frame((body,), lctx, chained=f.chained, saved=f.goals[1:], name=c.name,
                       focus=goal, entries=e.children, owner=e)
        f.chained = ()
        f.alt = None
        self.frames.append(child)


def run_script(goals, cmds, lctx: LocalContext, fix_fresh: bool = False,
               chained=()) -> Trace:
    return Replay(goals, lctx, fix_fresh, chained).run(cmds)


def trace_has_schematics(trace: Trace) -> bool:
    return any(contains_schematic(g) for e in trace.flat() for g in e.post)


def format_trace(trace: Trace, show=None) -> str:
    """Line-oriented dump for debugging: one block per entry."""
    from .frontend import render_command
    from .syntax import pretty_term
    show = show or (lambda t: pretty_term(t))
    lines = [f"outcome: {trace.outcome}"]

    def go(es, depth):
        pad = "  " * depth
        for e in es:
            flags = []
            if e.failed:
                flags.append("FAILED")
            if e.alternatives_taken:
                flags.append(f"back x{e.alternatives_taken}")
            lines.append(pad + "> " + render_command(e.command).splitlines()[0]
                         + (f"  [{', '.join(flags)}]" if flags else ""))
            lines.append(pad + "  goals: [" + ", ".join(show(g) for g in e.post) + "]")
            go(e.children, depth + 1)

    go(trace.entries, 0)
    return "\n".join(lines)
