"""Text format for derivation fixtures.

::

    # comment
    def *: n @ 10          B{*} x := B{n} x & !<>[10] B{n} !x
    hyp: <formula>
    goal: <formula>
    <index> | <formula> | <Rule> | <premise indices, comma separated> [| note]
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources

from .derivation import Definition, Derivation, DerivationError, DerivationStep, Rule
from .parser import FormulaSyntaxError, parse_formula


@dataclass(frozen=True)
class ProofFixture:
    name: str
    derivation: Derivation
    definitions: dict


def loads_fixture(text: str, name: str = "<string>") -> ProofFixture:
    hyps, steps, defs, goal = [], [], {}, None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip() if not raw.lstrip().startswith("#") else ""
        if not line:
            continue
        try:
            if line.startswith("def "):
                head, body = line[4:].split(":", 1)
                base, budget = body.split("@")
                tag = head.strip()
                defs[tag] = Definition(tag, base.strip(), Fraction(budget.strip()))
            elif line.startswith("hyp:"):
                hyps.append(parse_formula(line[4:]))
            elif line.startswith("goal:"):
                goal = parse_formula(line[5:])
            else:
                # formulas may contain "|", so locate the rule column from the right
                parts = line.split("|")
                names = [j for j, part in enumerate(parts) if part.strip() in Rule.__members__]
                if not names or names[-1] < 2 or len(parts) < names[-1] + 2:
                    raise DerivationError("a step needs index | formula | rule | premises")
                j = names[-1]
                premises = tuple(int(p) for p in parts[j + 1].split(",") if p.strip())
                steps.append(DerivationStep(int(parts[0]), parse_formula("|".join(parts[1:j])),
                                            Rule.parse(parts[j].strip()), premises,
                                            "|".join(parts[j + 2:]).strip()))
        except (FormulaSyntaxError, DerivationError, ValueError) as exc:
            raise DerivationError(f"{name}:{lineno}: {exc}") from None
    if goal is None:
        if not steps:
            raise DerivationError(f"{name}: no steps")
        goal = steps[-1].conclusion
    return ProofFixture(name, Derivation(tuple(hyps), tuple(steps), goal), defs)


def load_fixture(path) -> ProofFixture:
    path = os.fspath(path)
    with open(path, encoding="utf-8") as fh:
        return loads_fixture(fh.read(), os.path.basename(path))


def bundled_fixture_names() -> list[str]:
    root = resources.files("ehpo.logic") / "proofs"
    return sorted(p.name[:-6] for p in root.iterdir() if p.name.endswith(".proof"))


def bundled_fixture(name: str) -> ProofFixture:
    res = resources.files("ehpo.logic") / "proofs" / f"{name}.proof"
    return loads_fixture(res.read_text(encoding="utf-8"), f"{name}.proof")
