"""Translation switches."""

from __future__ import annotations

import re
from dataclasses import dataclass, fields, replace

PRINT_MODES = ("none", "all", "necessary")


@dataclass(frozen=True)
class Options:
    named_facts: bool = True
    smart_goals: bool = True
    smart_unfolds: bool = True
    dummy_subproofs: bool = False
    subgoal_fix_fresh: bool = False
    print_types: str = "necessary"
    fact_name_prefix: str = "h"

    def __post_init__(self):
        if self.print_types not in PRINT_MODES:
            raise ValueError(f"print_types must be one of {PRINT_MODES}")
        if not re.fullmatch(r"[A-Za-z][A-Za-z0-9_']*", self.fact_name_prefix):
            raise ValueError(f"invalid fact name prefix {self.fact_name_prefix!r}")


def with_overrides(opts: Options, settings) -> Options:
    """Apply ``(name, text)`` pairs, e.g. from an ``options`` theory command."""
    known = {f.name: f for f in fields(Options)}
    changes = {}
    for name, text in settings:
        if name not in known:
            raise ValueError(f"unknown option {name}")
        if known[name].type in ("bool", bool):
            if text not in ("true", "false"):
                raise ValueError(f"option {name} expects true or false")
            changes[name] = text == "true"
        else:
            changes[name] = text
    return replace(opts, **changes)
