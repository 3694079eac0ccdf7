import pytest

from isarify.kernel import Free, TBase, TFun
from isarify.syntax import (
    PrintRoundTripFailure, TermSyntaxError, parse_term, pretty_term, pretty_type,
)
from isarify.theory import load_theory, prelude

BOOL = TBase("bool")
NAT = TBase("nat")


def corpus_terms(corpus_loaded):
    for name, loaded in corpus_loaded.items():
        for lem in loaded.lemmas:
            yield name, lem.ctx, lem.goals
            if lem.trace is not None:
                for e in lem.trace.flat():
                    yield name, lem.ctx, e.pre + e.post


def test_print_all_round_trips_on_corpus(corpus_loaded):
    checked = 0
    for name, ctx, terms in corpus_terms(corpus_loaded):
        for t in terms:
            s = pretty_term(t, "all", ctx)
            u = parse_term(s, ctx, allow_tvars=True)
            assert u == t, (name, s)
            checked += 1
    assert checked > 200


def test_print_necessary_round_trips_on_corpus(corpus_loaded):
    for name, ctx, terms in corpus_terms(corpus_loaded):
        for t in terms:
            s = pretty_term(t, "necessary", ctx)
            assert parse_term(s, ctx) == t, (name, s)


def test_nat_binder_needs_annotation():
    ctx = load_theory('typedecl i\ndefault_type i\n').ctx
    t = parse_term("∀x :: nat. 0 ≤ x", ctx)
    bare = pretty_term(t, "none", ctx)
    assert "nat" not in bare
    assert parse_term(bare, ctx) != t
    shown = pretty_term(t, "necessary", ctx)
    assert shown == "∀x :: nat. 0 ≤ x"
    assert parse_term(shown, ctx) == t


def test_necessary_omits_inferable_types():
    ctx = prelude()
    t = parse_term("A ∧ B", ctx, {"A": Free("A", BOOL), "B": Free("B", BOOL)})
    assert pretty_term(t, "necessary", ctx) == "A ∧ B"


def test_ascii_output_reparses():
    ctx = prelude()
    fixed = {"P": Free("P", TFun(NAT, BOOL))}
    t = parse_term("∀x. P x ⟶ ¬ ¬ P x", ctx, fixed)
    s = pretty_term(t, "none", ctx, ascii_=True)
    assert s.isascii()
    assert parse_term(s, ctx, fixed) == t


def test_ambiguous_notation_is_a_print_failure():
    ctx = load_theory('consts both :: "bool ⇒ bool ⇒ bool"\nnotation both "∧"\n').ctx
    t = parse_term("both A B", ctx, {"A": Free("A", BOOL), "B": Free("B", BOOL)})
    with pytest.raises(PrintRoundTripFailure):
        pretty_term(t, "necessary", ctx)


def test_unknown_type_cannot_be_inferred():
    with pytest.raises(Exception):
        parse_term("P x", prelude())


def test_operator_precedence():
    ctx = prelude()
    fixed = {n: Free(n, BOOL) for n in "ABC"}
    t = parse_term("A ∧ B ∨ C ⟶ A", ctx, fixed)
    u = parse_term("((A ∧ B) ∨ C) ⟶ A", ctx, fixed)
    assert t == u
    assert pretty_term(t, "none", ctx) == "A ∧ B ∨ C ⟶ A"


def test_pretty_type():
    assert pretty_type(TFun(NAT, TFun(NAT, BOOL))) == "nat ⇒ nat ⇒ bool"
    assert pretty_type(TFun(TFun(NAT, NAT), BOOL), ascii_=True) == "(nat => nat) => bool"


def test_syntax_errors_raise():
    with pytest.raises(TermSyntaxError):
        parse_term("A ∧", prelude(), {"A": Free("A", BOOL)})
