import pytest
from hypothesis import given, strategies as st

from isarify.frontend import (
    Apply, Back, By, Defer, Done, DoubleDot, ImmediateDot, LemmaDecl, ParseError, Prefer,
    Sorry, Subgoal, Supply, UnbalancedProof, Unfolding, UnterminatedComment, Using,
    VerbatimIsar, parse_isar, parse_script, parse_theory_text, render_script, tokenize,
)
from isarify.isar import Have, Subproof

from conftest import corpus_files
from oracles import strip_comments

COMMAND_KINDS = {
    "apply": Apply, "by": By, "done": Done, ".": ImmediateDot, "..": DoubleDot,
    "using": Using, "unfolding": Unfolding, "subgoal": Subgoal, "prefer": Prefer,
    "defer": Defer, "back": Back, "supply": Supply, "proof": VerbatimIsar, "sorry": Sorry,
}


def corpus_bodies():
    for p in corpus_files():
        for d in parse_theory_text(p.read_text(encoding="utf-8")):
            if isinstance(d, LemmaDecl) and d.body is not None:
                yield p.name, d.body


def test_render_then_parse_is_identity_on_corpus():
    n = 0
    for name, body in corpus_bodies():
        assert parse_script(render_script(body)) == body, name
        n += 1
    assert n >= 50


def test_every_command_appears_in_corpus():
    seen = set()
    for _, body in corpus_bodies():
        seen |= {type(c) for c in body}
    missing = [k for k, cls in COMMAND_KINDS.items() if cls not in seen]
    assert not missing


def _no_stray_closers(pieces):
    out, depth = [], 0
    for x in pieces:
        if x == "*)":
            if not depth:
                continue
            depth -= 1
        elif x == "(*":
            depth += 1
        out.append(x)
    return "".join(out)


comment_sources = st.lists(st.sampled_from(["(*", "*)", "a", "x1", " ", "\n", "*", "("]),
                           max_size=30).map(_no_stray_closers)


@given(comment_sources)
def test_nested_comments_match_counter_oracle(src):
    expected = strip_comments(src)
    if expected is None:
        with pytest.raises(ParseError):
            tokenize(src)
        return
    try:
        want = [t.value for t in tokenize(expected)]
    except ParseError:
        # a lone "*" or "(" outside comments is rejected either way
        with pytest.raises(ParseError):
            tokenize(src)
        return
    assert [t.value for t in tokenize(src)] == want


def test_unterminated_nested_comment():
    with pytest.raises(UnterminatedComment):
        tokenize("(* outer (* inner *) still open")


def test_comment_inside_string_is_text():
    toks = tokenize('"(* not a comment *)"')
    assert [t.kind for t in toks] == ["string"]


def test_script_with_subgoals():
    body = parse_script("""
      apply (rule conjI)
       subgoal for x
        by simp
      subgoal premises_free
        apply auto
        done
      done""")
    kinds = [type(c).__name__ for c in body]
    assert kinds == ["Apply", "Subgoal", "By", "Subgoal", "Apply", "Done", "Done"]
    assert body[1].for_names == ("x",)


def test_by_with_two_methods():
    (c,) = parse_script("by (rule conjI) (fact a, fact b)")
    assert isinstance(c, By) and c.method2 is not None


def test_prefer_needs_positive_index():
    with pytest.raises(ParseError):
        parse_script("prefer 0 apply simp done")


def test_unbalanced_verbatim_block():
    with pytest.raises(UnbalancedProof):
        parse_script("proof - show A by simp")


def test_trailing_commands_rejected():
    with pytest.raises(ParseError):
        parse_script("by simp apply simp")


def test_unparsable_proof_keeps_lemma():
    decls = parse_theory_text('lemma x: "A"\n  apply (rule a)\n  frobnicate\n  done\n')
    (lem,) = decls
    assert lem.body is None and lem.error and lem.has_apply


def test_lemma_header_forms():
    (lem,) = parse_theory_text(
        'lemma l: fixes P defines "R ≡ P" assumes 1: "P" and 2: "R ⟶ Q" shows "Q" "R"\n'
        '  by simp\n')
    assert lem.fixes == [("P", None)]
    assert [n for n, _ in lem.assumes] == ["1", "2"]
    assert lem.shows == ["Q", "R"]


def test_isar_subset_parses():
    doc = parse_isar('''proof(-)
      fix x :: nat
      assume a: "P x"
      have h: "Q" and "R" using a by (rule r) fact+
      have "S"
      proof -
        show "S" by simp
      qed
      note n = h
      show "T" by (fact n)
    qed''')
    haves = [e for e in doc.elements if isinstance(e, Have)]
    assert haves[0].labels == ("h", None)
    assert isinstance(haves[1].proof, Subproof)
    assert haves[-1].show
