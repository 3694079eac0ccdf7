import random

import pytest
from hypothesis import given, settings, strategies as st

from isarify.kernel import Free, TBase, TFun, Theorem
from isarify.rewrite import StepBudgetExceeded, normalize, rewrite_step, rules_from, rules_of
from isarify.syntax import parse_term
from isarify.theory import prelude

from oracles import all_normal_forms, has_binder, one_step_reducts

BOOL = TBase("bool")
ATOMS = {"A": Free("A", BOOL), "B": Free("B", BOOL)}


def simp_rules():
    ctx = prelude()
    rules = rules_from((n, t) for n in ctx.simp for t in ctx.facts[n])
    return [r for r in rules if not has_binder(r.lhs) and not has_binder(r.rhs)]


RULES = simp_rules()


def random_bool_text(rng, depth):
    if depth == 0 or rng.random() < 0.25:
        return rng.choice(("A", "B", "True", "False"))
    op = rng.choice(("∧", "∨", "⟶", "=", "¬"))
    if op == "¬":
        return f"(¬ {random_bool_text(rng, depth - 1)})"
    return f"({random_bool_text(rng, depth - 1)} {op} {random_bool_text(rng, depth - 1)})"


def random_bool_term(seed, depth=3):
    text = random_bool_text(random.Random(seed), depth)
    return parse_term(text, prelude(), dict(ATOMS), as_prop=False)


@settings(max_examples=200)
@given(st.integers(0, 2**32 - 1))
def test_normal_form_is_reachable_by_some_strategy(seed):
    t = random_bool_term(seed)
    nf = normalize(t, RULES)
    assert nf in all_normal_forms(t, RULES)


@settings(max_examples=200)
@given(st.integers(0, 2**32 - 1))
def test_normal_form_has_no_redex(seed):
    t = random_bool_term(seed)
    assert one_step_reducts(normalize(t, RULES), RULES) == []


@settings(max_examples=100)
@given(st.integers(0, 2**32 - 1))
def test_single_step_is_one_of_the_oracle_reducts(seed):
    t = random_bool_term(seed)
    step = rewrite_step(t, RULES)
    reducts = one_step_reducts(t, RULES)
    assert (step is None) == (not reducts)
    if step is not None:
        assert step in reducts


def test_leftmost_outermost_order():
    ctx = prelude()
    t = parse_term("(True ∧ (True ∧ A))", ctx, dict(ATOMS), as_prop=False)
    once = rewrite_step(t, RULES)
    assert once == parse_term("True ∧ A", ctx, dict(ATOMS), as_prop=False)


def test_step_budget_stops_divergence():
    ctx = prelude().add_type("i")
    i = TBase("i")
    g = Free("g", TFun(i, i))
    fixed = {"g": g, "a": Free("a", i)}
    loop = parse_term("g x = g (g x)", ctx, dict(fixed, x=Free("x", i)))
    from isarify.kernel import generalize
    rules = rules_of(Theorem(generalize(loop, ["x"])))
    with pytest.raises(StepBudgetExceeded):
        normalize(parse_term("g a", ctx, fixed, as_prop=False), rules, max_steps=50)


def test_conditional_rules_are_skipped():
    ctx = prelude()
    t = parse_term("A ⟹ B = True", ctx, dict(ATOMS))
    assert rules_of(Theorem(t)) == []
