"""Random theories with complete apply scripts, for property tests.

Atoms ``P0 … P{n-1}`` are proven by rules whose premises are atoms of higher
index, so every generated script terminates.  The generator simulates the
goal state itself and only emits commands whose effect it knows."""

from __future__ import annotations

import random
from dataclasses import dataclass, field

N_ATOMS = 9


@dataclass
class Generated:
    text: str
    commands: list = field(default_factory=list)
    uses_subgoal: bool = False
    uses_back: bool = False
    uses_using: bool = False


def _theory(rng: random.Random) -> tuple[list[str], dict]:
    lines = ["consts " + "  ".join(f"P{i} :: bool" for i in range(N_ATOMS))]
    rules: dict[int, list[tuple[str, list[int]]]] = {}
    for i in range(N_ATOMS):
        higher = list(range(i + 1, N_ATOMS))
        count = 1 if not higher else rng.choice((1, 2))
        rules[i] = []
        for k in range(count):
            n_prem = 0 if not higher else rng.choice((0, 1, 1, 2, 2))
            prems = sorted(rng.sample(higher, min(n_prem, len(higher))))
            name = f"r{i}_{k}"
            stmt = " ⟹ ".join([f"P{j}" for j in prems] + [f"P{i}"])
            lines.append(f'axiom {name}: "{stmt}"')
            rules[i].append((name, prems))
    return lines, rules


def generate(seed: int, allow_subgoal: bool = True, allow_back: bool = True,
             allow_using: bool = False, allow_reorder: bool = True) -> Generated:
    rng = random.Random(seed)
    lines, rules = _theory(rng)
    out = Generated("")
    goals = sorted(rng.sample(range(N_ATOMS), rng.choice((1, 1, 2, 3))))

    def frame(goals: list[int], depth: int, cmds: list[str]) -> None:
        reorders = 2
        while goals:
            g = goals[0]
            r = rng.random()
            if allow_reorder and reorders and len(goals) > 1 and r < 0.15:
                reorders -= 1
                if rng.random() < 0.5:
                    n = rng.randint(2, len(goals))
                    cmds.append(f"prefer {n}")
                    goals.insert(0, goals.pop(n - 1))
                else:
                    cmds.append("defer")
                    goals.append(goals.pop(0))
                continue
            if allow_subgoal and depth < 2 and r < 0.3:
                out.uses_subgoal = True
                cmds.append("subgoal")
                frame([g], depth + 1, cmds)
                goals.pop(0)
                continue
            k = rng.randrange(len(rules[g]))
            name, prems = rules[g][k]
            if allow_using and r > 0.85:
                out.uses_using = True
                cmds.append(f"using {name}")
            if len(goals) == 1 and not prems and rng.random() < 0.5:
                cmds.append(f"by (rule {name})")
                goals.pop(0)
                return
            if allow_back and k == 1 and rng.random() < 0.5:
                out.uses_back = True
                cmds.append(f"apply (rule {rules[g][0][0]} {name})")
                cmds.append("back")
            else:
                cmds.append(f"apply (rule {name})")
            goals[:1] = list(prems)
        cmds.append("done")

    cmds: list[str] = []
    frame(list(goals), 0, cmds)
    shows = " ".join(f'"P{g}"' for g in goals)
    lines.append("")
    lines.append(f"lemma generated: {shows}")
    lines.extend("  " + c for c in cmds)
    out.text = "\n".join(lines) + "\n"
    out.commands = cmds
    return out
