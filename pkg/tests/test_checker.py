import random
import re

from hypothesis import given, settings, strategies as st

from isarify.checker import check_text
from isarify.pipeline import translate_source
from isarify.theory import load_theory

from scriptgen import N_ATOMS, generate

SRC = """
consts A :: bool  B :: bool  C :: bool
axiom ab: "A ⟹ B"
axiom a: "A"

lemma other: "C"
  sorry

lemma target: "B ∧ A"
  apply (rule conjI)
   apply (rule ab)
   apply (rule a)
  apply (rule a)
  done
"""

_loaded = load_theory(SRC)
LEM = _loaded.lemmas[1]


def check(text):
    return check_text(text, LEM.goals, LEM.lctx)


def test_valid_structured_proof():
    v = check("""proof(-)
  have h: "A" by (rule a)
  have "B" by (rule ab) (fact h)
  show "B ∧ A" by (rule conjI) fact+
qed""")
    assert v.status == "valid", v.reason


def test_wrong_method_is_invalid():
    v = check("""proof(-)
  have "B" by (rule a)
  show "B ∧ A" by (rule conjI) fact+
qed""")
    assert v.status == "invalid"
    assert v.index == 0


def test_unshown_goal_is_invalid():
    v = check("""proof(-)
  have "A" by (rule a)
qed""")
    assert v.status == "invalid"


def test_sorry_makes_cheated():
    v = check("""proof(-)
  have "B" sorry
  show "B ∧ A" by (rule conjI) (fact, rule a)
qed""")
    assert v.status == "cheated", v.reason


def test_citing_a_cheated_lemma_makes_cheated():
    v = check("""proof(-)
  have "C" by (rule other)
  show "B ∧ A" by (rule conjI) (rule ab, rule a, rule a)
qed""")
    assert v.status == "cheated", v.reason


def test_unparsable_text_is_invalid():
    assert check("proof(-)\n  have \"A\" by\nqed").status == "invalid"


def test_forward_reference_is_invalid():
    v = check("""proof(-)
  have "B" by (rule ab) (fact h)
  have h: "A" by (rule a)
  show "B ∧ A" by (rule conjI) fact+
qed""")
    assert v.status == "invalid"


def test_checker_is_deterministic():
    text = translate_source(SRC).proofs[-1].text
    assert repr(check(text)) == repr(check(text))
    assert check(text).status == "valid"


# ---------------------------------------------------------------------------
# no false positives

STMT = re.compile(r'\b(have|show)\b([^"\n]*)"([^"]*)"')


def _spots(text):
    return [(m, a) for m in STMT.finditer(text) for a in re.finditer(r"P\d+", m.group(3))]


def mutate_statement(text: str, rng: random.Random):
    """Swap one atom of one stated prop for an atom not already in it.
    Returns the mutated text and the span of the mutated element's line."""
    spots = _spots(text)
    if not spots:
        return None
    m, a = rng.choice(spots)
    present = set(re.findall(r"P\d+", m.group(3)))
    choices = [f"P{k}" for k in range(N_ATOMS) if f"P{k}" not in present]
    new_stmt = m.group(3)[:a.start()] + rng.choice(choices) + m.group(3)[a.end():]
    return text[:m.start(3)] + new_stmt + text[m.end(3):], m.start()


def drop_element(text: str, pos: int) -> str:
    """Delete the element whose statement starts at ``pos``, with its
    subproof if it has one."""
    lines = text.split("\n")
    row = text.count("\n", 0, pos)
    end = row + 1
    if end < len(lines) and lines[end].strip() == "proof(-)":
        indent = len(lines[end]) - len(lines[end].lstrip())
        while not (lines[end].strip() == "qed"
                   and len(lines[end]) - len(lines[end].lstrip()) == indent):
            end += 1
        end += 1
    return "\n".join(lines[:row] + lines[end:])


def _translated(seed, named):
    from isarify.options import Options
    g = generate(seed, allow_using=True)
    lem = load_theory(g.text).lemmas[-1]
    if not lem.eligible:
        return None, None
    text = translate_source(g.text, Options(named_facts=named)).proofs[0].text
    assert check_text(text, lem.goals, lem.lctx).status == "valid"
    return lem, text


@settings(max_examples=150)
@given(st.integers(0, 10**6), st.integers(0, 10**6))
def test_atom_swap_is_never_valid_with_named_facts(seed, mseed):
    # every statement is cited by its own label, so each one is needed
    lem, text = _translated(seed, True)
    if lem is None:
        return
    out = mutate_statement(text, random.Random(mseed))
    if out is not None:
        assert check_text(out[0], lem.goals, lem.lctx).status != "valid", out[0]


@settings(max_examples=150)
@given(st.integers(0, 10**6), st.integers(0, 10**6))
def test_atom_swap_accepted_only_for_redundant_statements(seed, mseed):
    # with fact+ glue a statement may be implied by others; a mutation may be
    # accepted only if the proof stands without that element altogether
    lem, text = _translated(seed, False)
    if lem is None:
        return
    out = mutate_statement(text, random.Random(mseed))
    if out is None:
        return
    bad, pos = out
    if check_text(bad, lem.goals, lem.lctx).status == "valid":
        pruned = drop_element(text, pos)
        assert check_text(pruned, lem.goals, lem.lctx).status == "valid", (bad, pruned)


def test_drop_element_removes_subproofs():
    text = 'proof(-)\n  have "A"\n  proof(-)\n    show "A" by x\n  qed\n  show "B" by y\nqed'
    assert drop_element(text, text.index("have")) == 'proof(-)\n  show "B" by y\nqed'


def test_atom_swap_on_every_statement_of_a_chain():
    g = generate(7)
    lem = load_theory(g.text).lemmas[-1]
    text = translate_source(g.text).proofs[0].text
    for m in STMT.finditer(text):
        for a in re.finditer(r"P\d+", m.group(3)):
            for k in range(N_ATOMS):
                if f"P{k}" in m.group(3):
                    continue
                stmt = m.group(3)[:a.start()] + f"P{k}" + m.group(3)[a.end():]
                bad = text[:m.start(3)] + stmt + text[m.end(3):]
                assert check_text(bad, lem.goals, lem.lctx).status != "valid", bad
