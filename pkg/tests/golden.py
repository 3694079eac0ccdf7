"""Expected translations of the worked examples and a tolerant comparison.

Expected texts use ``[...]`` for elided material: a line consisting of it
matches any number of lines, elsewhere it matches any text within a line.
Comparison ignores comments, indentation and blank lines, treats juxtaposed
statements ``"A" "B"`` like ``"A" and "B"`` and a single-word method in
parentheses like the bare word."""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from pathlib import Path

from isarify.options import Options
from isarify.pipeline import translate_source

from oracles import strip_comments

GOLDEN_DIR = Path(__file__).resolve().parent.parent / "corpus" / "golden"
PLAIN = Options(named_facts=False)


def normalize(text: str) -> list[str]:
    text = strip_comments(text)
    assert text is not None
    out = []
    for line in text.splitlines():
        line = " ".join(line.split())
        if not line or line.startswith("lemma ") or line.startswith(("assumes ", "fixes ")):
            continue
        line = re.sub(r'(?<=")\s+(?=")', " and ", line)
        line = re.sub(r"(?<=\s)\((\w+)\)", r"\1", line)
        out.append(line)
    return out


def erase_labels(text: str, prefix: str = "h") -> str:
    """Drop generated ``prefix_k_j`` labels, turning label glue into ``fact+``."""
    lab = rf"{re.escape(prefix)}_\d+_\d+'*"
    text = re.sub(rf"\b{lab}: ", "", text)
    return re.sub(rf"\((?:fact {lab}(?:, )?)+\)", "fact+", text)


def _line_regex(line: str) -> re.Pattern:
    parts = [re.escape(p) for p in line.split("[...]")]
    return re.compile(".*".join(parts) + r"\Z")


def matches(expected: str, actual: str, fragment: bool = False) -> bool:
    want = normalize(expected)
    if fragment:
        want = ["[...]"] + want + ["[...]"]
    have = normalize(actual)

    def go(i: int, j: int) -> bool:
        if i == len(want):
            return j == len(have)
        if want[i] == "[...]":
            return any(go(i + 1, k) for k in range(j, len(have) + 1))
        return j < len(have) and bool(_line_regex(want[i]).match(have[j])) and go(i + 1, j + 1)

    return go(0, 0)


@dataclass
class Case:
    name: str
    file: str
    expected: str
    options: Options = field(default_factory=Options)
    fragment: bool = False
    absent: tuple = ()  # normalized lines that must not occur

    def translate(self) -> str:
        src = (GOLDEN_DIR / self.file).read_text(encoding="utf-8")
        res = translate_source(src, self.options)
        return res.proofs[-1].text

    @property
    def labeled(self) -> bool:
        return self.options.named_facts

    def with_named_facts(self) -> "Case":
        return replace(self, options=replace(self.options, named_facts=True))

    def check(self, text: str) -> bool:
        lines = normalize(text)
        return matches(self.expected, text, self.fragment) and not any(
            a in lines for a in self.absent)


def _ten(linear: bool) -> str:
    rows = []
    for k in range(10, 1, -1):
        goals = [f'"A{n}"' for n in range(k, 11)] if linear else [f'"A{k}"']
        glue = " fact+" if linear and k < 10 else ""
        proof = f"(rule T{k}){glue}" if glue else f"(rule T{k})"
        rows.append(f"have {' and '.join(goals)} by {proof}")
    all_goals = " and ".join(f'"A{n}"' for n in range(1, 11))
    if linear:
        rows.append(f"show {all_goals} by (rule T1) fact+")
    else:
        rows.append('have "A1" by (rule T1)')
        rows.append(f"show {all_goals} by fact+")
    return "proof(-)\n" + "\n".join(rows) + "\nqed\n"


CASES = [
    Case("apply_prf", "apply_prf.mthy", """
proof(-)
  have h_3_1: "C" by (rule L4)
  have h_2_2: "B2" by (rule L3) (fact h_3_1)
  have h_2_1: "B1" by (rule L2)
  show h_1_1: "A" by (rule L1) (fact h_2_1, fact h_2_2)
qed
"""),
    Case("ten_goals_smart", "ten_goals.mthy", _ten(False), PLAIN),
    Case("ten_goals_linear", "ten_goals.mthy", _ten(True), Options(named_facts=False,
                                                                     smart_goals=False)),
    Case("supply_note", "supply.mthy", """
lemma "True" "P ⟹ P ∨ Q"
proof(-)
  note myThms = TrueI disjI1
  have "P ⟹ P ∨ Q" by (rule myThms(2))
  have "True" by (rule myThms(1))
  show "True" "P ⟹ P ∨ Q" by fact+ (* Final combined show *)
qed
""", PLAIN),
    Case("subgoal_named", "subgoal_named.mthy", """
have myFact: "P"
proof(-)
  [...]
qed
have "P ∨ Q" by (rule disjI1[OF myFact])
show "P" "P ∨ Q" by fact+
""", PLAIN, fragment=True, absent=('have "P" by fact',)),
    Case("subgoal_dummy", "subgoal_named.mthy", """
have myFact: "P"
proof(-)
  [...]
qed
have "P ∨ Q" by (rule disjI1[OF myFact])
have "P" by fact (* Subproof dummy *)
show "P" "P ∨ Q" by fact+  (* Final combined show *)
""", Options(named_facts=False, dummy_subproofs=True), fragment=True),
    Case("unfolding_per_command", "unfolding.mthy", """
proof(-)
  have "P" by (rule 1)
  have "Q" using 1 2 unfolding R_def by simp (* Repetitive unfolding after using *)
  have "R" unfolding R_def by fact+ (* Captures effects of unfolding on goals *)
  show "Q" and "R" by fact+ (* Combined show *)
qed
""", Options(named_facts=False, smart_unfolds=False)),
    Case("unfolding_smart", "unfolding.mthy", """
proof(-)
  have "P" by (rule 1)
  show "Q" and "R" using 1 2 unfolding R_def by (simp) fact+
qed
""", PLAIN),
    Case("shadowing_fresh", "shadowing.mthy", """
have "⋀x. P x y"
proof(-)
  fix ya (* Renamed local variable *)
  [...]
  show "P ya y" by [...]
qed
""", PLAIN, fragment=True),
    Case("back_free", "back.mthy", """
lemma "⟦ x = f x; T (f x) (f x) x ⟧ ⟹ T x x x"
proof(-)
  have "T (f x) (f x) x ⟹ T (f x) (f x) x" by (assumption)
  show "x = f x ⟹ T (f x) (f x) x ⟹ T x x x" by (erule ssubst) fact+
qed
""", PLAIN),
]
