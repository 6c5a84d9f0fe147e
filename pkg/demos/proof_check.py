"""Checking a derivation, then breaking it on purpose.

The bundled fixture derives a formula and its negation from the assumption
that the defended reasoner can be pushed to p and to !p within budget 10.
Every mutant (a rule swapped, premises reordered, a conclusion perturbed)
must be rejected by the checker.

Run:  python3 demos/proof_check.py
"""

from collections import Counter

from ehpo.logic import check_derivation, format_formula
from ehpo.logic.derivation import all_mutants
from ehpo.logic.fixtures import bundled_fixture, bundled_fixture_names


def main() -> None:
    fx = bundled_fixture("defended_reasoner")
    for step in fx.derivation.steps:
        prem = ", ".join(map(str, step.premises))
        print(f"{step.index:>3}  {format_formula(step.conclusion):<44} {step.rule.name} {prem}")
    print(f"\nverdict: {'accepted' if check_derivation(fx.derivation, fx.definitions) else 'rejected'}")

    for name in bundled_fixture_names():
        fx = bundled_fixture(name)
        mutants = all_mutants(fx.derivation)
        survivors = [m for m in mutants if check_derivation(m.derivation, fx.definitions)]
        kinds = Counter(m.kind for m in mutants)
        print(f"{name:>18}: {len(mutants)} mutants {dict(kinds)}, {len(survivors)} accepted")

    fx = bundled_fixture("defended_reasoner")
    bad = all_mutants(fx.derivation)[40]
    result = check_derivation(bad.derivation, fx.definitions)
    print(f"\nexample mutant ({bad.kind} at step {bad.index}, {bad.detail}): step {result.index}: {result.reason}")


if __name__ == "__main__":
    main()
