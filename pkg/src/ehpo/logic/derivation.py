"""Rule-checked derivations.

A derivation is a list of numbered steps.  Each step names a rule and the
earlier steps it uses; the checker instantiates the rule's schema at those
premises and compares the claimed conclusion.  Comparison is up to sugar
and double negation (see :func:`canon`), except for ``Symmetry``, which is
matched on desugared structure so that it only fires on a literal box.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .formula import (
    And,
    Atom,
    Believes,
    Formula,
    Implies,
    Not,
    Possibly,
    box,
    canon,
    desugar,
    format_formula,
    negate,
)

MAX_TAUTOLOGY_ATOMS = 16


class Rule(enum.Enum):
    Assumption = (0, "hypothesis of the derivation")
    Tautology = (0, "propositional tautology")
    DefSubstitution = (1, "unfold a defined belief operator")
    ConjElimLeft = (1, "keep the left conjunct, possibly under modal operators")
    ConjElimRight = (1, "keep the right conjunct, possibly under modal operators")
    DiamondCollapse = (1, "keep only the innermost of two stacked operators with the same budget")
    DiamondDistAnd = (1, "push a diamond into both conjuncts")
    Necessitation = (1, "box or believe a hypothesis-free theorem")
    Distribution = (1, "box or belief distributes over implication")
    Reflexivity = (1, "a implies <>[t]a")
    Transitivity = (1, "<>[t]<>[s]a implies <>[t+s]a")
    Symmetry = (1, "<>[s][]_t a implies []_t a")
    Consistency = (1, "B a implies !B !a")
    ModusPonens = (2, "from a -> b and a infer b")
    ModusTollens = (2, "from a -> b and !b infer !a")
    ContradictionIntro = (2, "from a and !a infer their conjunction")
    ConjIntro = (2, "from a and b infer a & b")

    def __init__(self, arity: int, description: str):
        self.arity = arity
        self.description = description

    @classmethod
    def parse(cls, name: str) -> "Rule":
        try:
            return cls[name]
        except KeyError:
            raise DerivationError(f"unknown rule {name!r}") from None


class DerivationError(ValueError):
    pass


@dataclass(frozen=True)
class Definition:
    """``B{tag} x`` abbreviates ``B{base} x & !<>[budget] B{base} !x``."""

    tag: str
    base: str
    budget: Fraction

    def unfold(self, inner: Formula) -> Formula:
        return And(Believes(self.base, inner),
                   Not(Possibly(self.budget, Believes(self.base, Not(inner)))))


@dataclass(frozen=True)
class DerivationStep:
    index: int
    conclusion: Formula
    rule: Rule
    premises: tuple[int, ...] = ()
    note: str = ""

    def __post_init__(self):
        object.__setattr__(self, "premises", tuple(self.premises))


@dataclass(frozen=True)
class Derivation:
    hypotheses: tuple[Formula, ...]
    steps: tuple[DerivationStep, ...]
    goal: Formula

    def __post_init__(self):
        object.__setattr__(self, "hypotheses", tuple(self.hypotheses))
        object.__setattr__(self, "steps", tuple(self.steps))


@dataclass(frozen=True)
class CheckResult:
    ok: bool
    index: int | None = None
    reason: str = ""
    expected: str = ""

    def __bool__(self):
        return self.ok


ACCEPT = CheckResult(True)


def _reject(index, reason, expected=""):
    return CheckResult(False, index, reason, expected)


def _defs(definitions) -> dict[str, Definition]:
    if definitions is None:
        return {}
    if isinstance(definitions, Mapping):
        return dict(definitions)
    return {d.tag: d for d in definitions}


# -- individual rule schemas ---------------------------------------------------
# Each takes canonical premises and the canonical conclusion and returns None
# on success or a description of the expected shape.

def _strip_prefix(f: Formula, k: int):
    ops = []
    for _ in range(k):
        if isinstance(f, Possibly):
            ops.append(("dia", f.budget))
        elif isinstance(f, Believes):
            ops.append(("bel", f.tag))
        else:
            return None, None
        f = f.inner
    return ops, f


def _conj_elim(prem: Formula, concl: Formula, side: str):
    for k in itertools.count():
        ops_p, inner_p = _strip_prefix(prem, k)
        if ops_p is None:
            break
        ops_c, inner_c = _strip_prefix(concl, k)
        if ops_c != ops_p:
            break
        if isinstance(inner_p, And):
            part = inner_p.left if side == "left" else inner_p.right
            if part == inner_c:
                return None
    return f"M...(a & b) -> M...{'a' if side == 'left' else 'b'}"


def _unfold_walk(p: Formula, q: Formula, defs: Mapping[str, Definition]):
    """Return the number of unfoldings turning p into q, or None."""
    if p == q:
        return 0
    if isinstance(p, Believes) and p.tag in defs and canon(defs[p.tag].unfold(p.inner)) == q:
        return 1
    if type(p) is not type(q):
        return None
    if isinstance(p, Not):
        return _unfold_walk(p.inner, q.inner, defs)
    if isinstance(p, Possibly):
        return _unfold_walk(p.inner, q.inner, defs) if p.budget == q.budget else None
    if isinstance(p, Believes):
        return _unfold_walk(p.inner, q.inner, defs) if p.tag == q.tag else None
    if isinstance(p, And):
        left = _unfold_walk(p.left, q.left, defs)
        right = _unfold_walk(p.right, q.right, defs)
        return None if left is None or right is None else left + right
    return None


def _tautology(f: Formula) -> bool:
    letters: dict[Formula, int] = {}

    def collect(g):
        if isinstance(g, Not):
            collect(g.inner)
        elif isinstance(g, And):
            collect(g.left)
            collect(g.right)
        else:
            letters.setdefault(g, len(letters))

    collect(f)
    if len(letters) > MAX_TAUTOLOGY_ATOMS:
        raise DerivationError(f"tautology check limited to {MAX_TAUTOLOGY_ATOMS} letters")

    def value(g, row):
        if isinstance(g, Not):
            return not value(g.inner, row)
        if isinstance(g, And):
            return value(g.left, row) and value(g.right, row)
        return row[letters[g]]

    return all(value(f, row) for row in itertools.product((False, True), repeat=len(letters)))


def _split_implication(f: Formula):
    """Canonical ``a -> b`` is ``!(a & !b)``; return ``(a, b)`` or None."""
    if isinstance(f, Not) and isinstance(f.inner, And):
        return f.inner.left, negate(f.inner.right)
    return None


def _check_schema(rule: Rule, prems: Sequence[Formula], concl: Formula, raw_prems: Sequence[Formula],
                  raw_concl: Formula, defs: Mapping[str, Definition]):
    if rule is Rule.Tautology:
        return None if _tautology(concl) else "a propositional tautology"

    if rule is Rule.DefSubstitution:
        n = _unfold_walk(prems[0], concl, defs)
        if n is None:
            return "premise with defined belief operators replaced by their definitions"
        return None if n > 0 else "at least one defined belief operator unfolded"

    if rule in (Rule.ConjElimLeft, Rule.ConjElimRight):
        return _conj_elim(prems[0], concl, "left" if rule is Rule.ConjElimLeft else "right")

    p = prems[0] if prems else None

    if rule is Rule.DiamondCollapse:
        shape = "<>[t]<>[t]a -> <>[t]a or <>[t]!<>[t]a -> !<>[t]a"
        if not isinstance(p, Possibly):
            return shape
        inner = p.inner
        if isinstance(inner, Possibly) and inner.budget == p.budget and inner == concl:
            return None
        if (isinstance(inner, Not) and isinstance(inner.inner, Possibly)
                and inner.inner.budget == p.budget and inner == concl):
            return None
        return shape

    if rule is Rule.DiamondDistAnd:
        if isinstance(p, Possibly) and isinstance(p.inner, And):
            want = And(Possibly(p.budget, p.inner.left), Possibly(p.budget, p.inner.right))
            return None if want == concl else f"{format_formula(want)}"
        return "<>[t](a & b) -> <>[t]a & <>[t]b"

    if rule is Rule.Necessitation:
        if isinstance(concl, Believes):
            return None if canon(Believes(concl.tag, p)) == concl else "B{tag} a"
        if isinstance(concl, Not) and isinstance(concl.inner, Possibly):
            return None if canon(box(concl.inner.budget, p)) == concl else "[]_t a"
        return "[]_t a or B{tag} a"

    if rule is Rule.Distribution:
        # [](a -> b) is !<>[t](a & !b); B(a -> b) is B !(a & !b)
        if isinstance(p, Not) and isinstance(p.inner, Possibly) and isinstance(p.inner.inner, And):
            t, body = p.inner.budget, p.inner.inner
            a, b = body.left, negate(body.right)
            want = canon(Implies(box(t, a), box(t, b)))
        elif isinstance(p, Believes) and _split_implication(p.inner):
            a, b = _split_implication(p.inner)
            want = canon(Implies(Believes(p.tag, a), Believes(p.tag, b)))
        else:
            return "[]_t(a -> b) or B{tag}(a -> b) as premise"
        return None if want == concl else format_formula(want)

    if rule is Rule.Reflexivity:
        if isinstance(concl, Possibly) and concl.inner == p:
            return None
        return "<>[t]a"

    if rule is Rule.Transitivity:
        if isinstance(p, Possibly) and isinstance(p.inner, Possibly):
            want = Possibly(p.budget + p.inner.budget, p.inner.inner)
            return None if want == concl else format_formula(want)
        return "<>[t]<>[s]a as premise"

    if rule is Rule.Symmetry:
        rp, rc = desugar(raw_prems[0]), desugar(raw_concl)
        if (isinstance(rp, Possibly) and isinstance(rp.inner, Not) and isinstance(rp.inner.inner, Possibly)
                and isinstance(rp.inner.inner.inner, Not) and rp.inner == rc):
            return None
        return "<>[s]!<>[t]!a -> !<>[t]!a"

    if rule is Rule.Consistency:
        if isinstance(p, Believes):
            want = Not(Believes(p.tag, negate(p.inner)))
            return None if want == concl else format_formula(want)
        return "B{tag} a as premise"

    if rule is Rule.ModusPonens:
        imp = _split_implication(prems[0])
        if imp is None:
            return "first premise an implication"
        a, b = imp
        if prems[1] != a:
            return f"second premise {format_formula(a)}"
        return None if concl == b else format_formula(b)

    if rule is Rule.ModusTollens:
        imp = _split_implication(prems[0])
        if imp is None:
            return "first premise an implication"
        a, b = imp
        if prems[1] != negate(b):
            return f"second premise {format_formula(negate(b))}"
        want = negate(a)
        return None if concl == want else format_formula(want)

    if rule is Rule.ContradictionIntro:
        a, b = prems
        if b != negate(a):
            return "premises a and !a"
        want = And(a, b)
        return None if concl == want else format_formula(want)

    if rule is Rule.ConjIntro:
        want = And(prems[0], prems[1])
        return None if concl == want else format_formula(want)

    raise DerivationError(f"no schema for rule {rule.name}")


def check_step(step: DerivationStep, earlier_conclusions: Mapping[int, Formula], definitions=None, *,
               hypotheses: Iterable[Formula] = (), hypothesis_dependent: Iterable[int] = ()) -> CheckResult:
    """Accept iff the conclusion instantiates the rule's schema at the premises."""
    rule = step.rule
    if not isinstance(rule, Rule):
        return _reject(step.index, f"unknown rule {rule!r}")
    if len(step.premises) != rule.arity:
        return _reject(step.index, f"arity mismatch: {rule.name} takes {rule.arity} premises, "
                                   f"got {len(step.premises)}")
    for i in step.premises:
        if i >= step.index:
            return _reject(step.index, f"premise {i} does not precede step {step.index}")
        if i not in earlier_conclusions:
            return _reject(step.index, f"premise {i} is not an earlier step")
    raw_prems = [earlier_conclusions[i] for i in step.premises]
    prems = [canon(f) for f in raw_prems]
    concl = canon(step.conclusion)

    if rule is Rule.Assumption:
        if any(canon(h) == concl for h in hypotheses):
            return ACCEPT
        return _reject(step.index, "schema mismatch: conclusion is not a hypothesis", "one of the hypotheses")
    if rule is Rule.Necessitation:
        dependent = set(hypothesis_dependent)
        if step.premises[0] in dependent:
            return _reject(step.index, "necessitation needs a premise that rests on no hypothesis")

    expected = _check_schema(rule, prems, concl, raw_prems, step.conclusion, _defs(definitions))
    if expected is None:
        return ACCEPT
    return _reject(step.index, f"schema mismatch for {rule.name}", expected)


def is_contradiction(f: Formula) -> bool:
    f = canon(f)
    return isinstance(f, And) and (f.right == negate(f.left) or f.left == negate(f.right))


def check_derivation(derivation: Derivation, definitions=None) -> CheckResult:
    """Check every step in order; report the first failure."""
    defs = _defs(definitions)
    if not derivation.steps:
        return _reject(None, "derivation has no steps")
    earlier: dict[int, Formula] = {}
    dependent: set[int] = set()
    for step in derivation.steps:
        if step.index in earlier:
            return _reject(step.index, f"duplicate step index {step.index}")
        result = check_step(step, earlier, defs, hypotheses=derivation.hypotheses,
                            hypothesis_dependent=dependent)
        if not result:
            return result
        earlier[step.index] = step.conclusion
        if step.rule is Rule.Assumption or any(i in dependent for i in step.premises):
            dependent.add(step.index)
    last = derivation.steps[-1]
    if canon(last.conclusion) != canon(derivation.goal):
        return _reject(last.index, "last step does not conclude the goal", format_formula(derivation.goal))
    if is_contradiction(derivation.goal) and last.rule is not Rule.ContradictionIntro:
        return _reject(last.index, "a contradiction goal must be closed by ContradictionIntro")
    return ACCEPT


# -- consistency ---------------------------------------------------------------

@dataclass(frozen=True)
class AuditResult:
    ok: bool
    witness: Formula | None = None

    def __bool__(self):
        return self.ok


def consistency_audit(conclusion_set: Iterable[Formula]) -> AuditResult:
    """Reject iff some formula and its negation are both present."""
    seen = {canon(f) for f in conclusion_set}
    for f in sorted(seen, key=format_formula):
        if negate(f) in seen:
            positive = f.inner if isinstance(f, Not) else f
            return AuditResult(False, positive)
    return ACCEPT_AUDIT


ACCEPT_AUDIT = AuditResult(True)


# -- mutation harness ------------------------------------------------------------

@dataclass(frozen=True)
class Mutant:
    kind: str
    index: int
    derivation: Derivation
    detail: str = ""


def _with_step(derivation: Derivation, pos: int, step: DerivationStep) -> Derivation:
    steps = list(derivation.steps)
    steps[pos] = step
    return replace(derivation, steps=tuple(steps))


def rule_swaps(derivation: Derivation) -> list[Mutant]:
    out = []
    for pos, step in enumerate(derivation.steps):
        for rule in Rule:
            if rule is not step.rule:
                out.append(Mutant("rule-swap", step.index, _with_step(derivation, pos, replace(step, rule=rule)),
                                  f"{step.rule.name} -> {rule.name}"))
    return out


def premise_swaps(derivation: Derivation) -> list[Mutant]:
    """Every non-identity reordering of a multi-premise step's premises."""
    out = []
    for pos, step in enumerate(derivation.steps):
        for perm in itertools.permutations(step.premises):
            if perm != step.premises:
                out.append(Mutant("premise-swap", step.index,
                                  _with_step(derivation, pos, replace(step, premises=perm)), str(perm)))
    return out


def _bump_budget(f: Formula):
    if isinstance(f, Possibly):
        return Possibly(f.budget + 1, f.inner)
    if isinstance(f, Atom):
        return None
    if isinstance(f, (Not, Believes)):
        inner = _bump_budget(f.inner)
        return None if inner is None else replace(f, inner=inner)
    left = _bump_budget(f.left)
    if left is not None:
        return replace(f, left=left)
    right = _bump_budget(f.right)
    return None if right is None else replace(f, right=right)


def _rename_atom(f: Formula, old: str, new: str) -> Formula:
    if isinstance(f, Atom):
        return Atom(new) if f.name == old else f
    if isinstance(f, (Not, Possibly, Believes)):
        return replace(f, inner=_rename_atom(f.inner, old, new))
    return replace(f, left=_rename_atom(f.left, old, new), right=_rename_atom(f.right, old, new))


def conclusion_perturbations(derivation: Derivation) -> list[Mutant]:
    """Negate, shift the first budget, or rename one atom in a conclusion."""
    out = []
    for pos, step in enumerate(derivation.steps):
        c = step.conclusion
        variants = [("negate", Not(c))]
        bumped = _bump_budget(c)
        if bumped is not None:
            variants.append(("budget+1", bumped))
        for name in sorted({g.name for g in _atoms(c)}):
            variants.append((f"rename {name}", _rename_atom(c, name, name + "_x")))
        for label, new in variants:
            out.append(Mutant("conclusion", step.index,
                              _with_step(derivation, pos, replace(step, conclusion=new)), label))
    return out


def _atoms(f: Formula):
    if isinstance(f, Atom):
        yield f
    elif isinstance(f, (Not, Possibly, Believes)):
        yield from _atoms(f.inner)
    else:
        yield from _atoms(f.left)
        yield from _atoms(f.right)


def all_mutants(derivation: Derivation) -> list[Mutant]:
    return rule_swaps(derivation) + premise_swaps(derivation) + conclusion_perturbations(derivation)
