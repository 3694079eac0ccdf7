"""Translate the corpus under each single-flag variation of the defaults and
report outcome counts and output size, to compare translation styles."""

from __future__ import annotations

import dataclasses
import logging
import sys
from pathlib import Path

from isarify.pipeline import counts, translate_lemma
from isarify.theory import load_theory

ROOT = Path(__file__).resolve().parent.parent

VARIANTS = {
    "defaults": {},
    "linear goals": {"smart_goals": False},
    "anonymous facts": {"named_facts": False},
    "per-command unfolding": {"smart_unfolds": False},
    "dummy subproofs": {"dummy_subproofs": True},
    "fresh subgoal names": {"subgoal_fix_fresh": True},
    "all types": {"print_types": "all"},
    "no types": {"print_types": "none"},
}


def run(changes: dict) -> tuple[dict, int]:
    reps = []
    for path in sorted((ROOT / "corpus").rglob("*.mthy")):
        loaded = load_theory(path.read_text(encoding="utf-8"))
        for lem in loaded.lemmas:
            if lem.eligible:
                opts = dataclasses.replace(lem.options, **changes)
                reps.append(translate_lemma(lem, loaded.src, opts, timeout=30.0))
    size = sum(len(r.text.splitlines()) for r in reps if r.text)
    return counts(reps), size


def main() -> int:
    logging.basicConfig(level=logging.ERROR)
    print(f"{'variant':24} {'total':>5} {'ok':>5} {'part':>5} {'fail':>5} {'lines':>6}")
    for name, changes in VARIANTS.items():
        c, size = run(changes)
        print(f"{name:24} {c['total']:5} {c['success']:5} {c['partial']:5} "
              f"{c['fail']['total']:5} {size:6}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
