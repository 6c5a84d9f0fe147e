"""Formulas of the multimodal logic.

``Or`` and ``Implies`` are sugar: ``a | b`` means ``!(!a & !b)`` and
``a -> b`` means ``!a | b``.  Equality and hashing compare desugared
structure, so ``p -> q``, ``!p | q`` and ``!(!!p & !q)`` are equal.
Double negations are *not* identified by ``==``; use :func:`canon` for
that.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterator


class Formula:
    __slots__ = ()

    @cached_property
    def key(self) -> tuple:
        return _key(self)

    def __eq__(self, other):
        if not isinstance(other, Formula):
            return NotImplemented
        return self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __str__(self):
        return format_formula(self)


@dataclass(frozen=True, eq=False)
class Atom(Formula):
    name: str


@dataclass(frozen=True, eq=False)
class Not(Formula):
    inner: Formula


@dataclass(frozen=True, eq=False)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, eq=False)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, eq=False)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, eq=False)
class Possibly(Formula):
    budget: Fraction
    inner: Formula

    def __post_init__(self):
        budget = Fraction(self.budget)
        if budget < 0:
            raise ValueError(f"budget must be nonnegative, got {budget}")
        object.__setattr__(self, "budget", budget)


@dataclass(frozen=True, eq=False)
class Believes(Formula):
    tag: str
    inner: Formula


def _key(f: Formula) -> tuple:
    if isinstance(f, Atom):
        return ("atom", f.name)
    if isinstance(f, Not):
        return ("not", f.inner.key)
    if isinstance(f, And):
        return ("and", f.left.key, f.right.key)
    if isinstance(f, Or):
        return ("not", ("and", ("not", f.left.key), ("not", f.right.key)))
    if isinstance(f, Implies):
        return _key(Or(Not(f.left), f.right))
    if isinstance(f, Possibly):
        return ("dia", f.budget, f.inner.key)
    if isinstance(f, Believes):
        return ("bel", f.tag, f.inner.key)
    raise TypeError(f"not a formula: {f!r}")


def desugar(f: Formula) -> Formula:
    """Rewrite into the core connectives Atom, Not, And, Possibly, Believes."""
    if isinstance(f, Atom):
        return f
    if isinstance(f, Not):
        return Not(desugar(f.inner))
    if isinstance(f, And):
        return And(desugar(f.left), desugar(f.right))
    if isinstance(f, Or):
        return Not(And(Not(desugar(f.left)), Not(desugar(f.right))))
    if isinstance(f, Implies):
        return Not(And(desugar(f.left), Not(desugar(f.right))))
    if isinstance(f, Possibly):
        return Possibly(f.budget, desugar(f.inner))
    if isinstance(f, Believes):
        return Believes(f.tag, desugar(f.inner))
    raise TypeError(f"not a formula: {f!r}")


def canon(f: Formula) -> Formula:
    """Desugared form with every double negation removed."""
    f = desugar(f)
    return _strip(f)


def _strip(f: Formula) -> Formula:
    if isinstance(f, Atom):
        return f
    if isinstance(f, Not):
        inner = _strip(f.inner)
        return inner.inner if isinstance(inner, Not) else Not(inner)
    if isinstance(f, And):
        return And(_strip(f.left), _strip(f.right))
    if isinstance(f, Possibly):
        return Possibly(f.budget, _strip(f.inner))
    if isinstance(f, Believes):
        return Believes(f.tag, _strip(f.inner))
    raise TypeError(f"not a core formula: {f!r}")


def negate(f: Formula) -> Formula:
    """Canonical negation: strips one ``!`` instead of adding a second."""
    f = canon(f)
    return f.inner if isinstance(f, Not) else Not(f)


def equivalent_syntax(a: Formula, b: Formula) -> bool:
    """Equal up to sugar and double negation."""
    return canon(a) == canon(b)


def box(budget, inner: Formula) -> Formula:
    """``[]_t a`` abbreviates ``!<>[t]!a``."""
    return Not(Possibly(budget, Not(inner)))


def subformulas(f: Formula) -> Iterator[Formula]:
    yield f
    for child in children(f):
        yield from subformulas(child)


def children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, Atom):
        return ()
    if isinstance(f, (Not, Possibly, Believes)):
        return (f.inner,)
    return (f.left, f.right)


def atoms(f: Formula) -> set[str]:
    return {g.name for g in subformulas(f) if isinstance(g, Atom)}


def depth(f: Formula) -> int:
    return 1 + max((depth(c) for c in children(f)), default=0)


# -- printing ----------------------------------------------------------------

# binding strength; larger binds tighter
_PREC = {Implies: 1, Or: 2, And: 3}
_UNARY = 4


def format_budget(b: Fraction) -> str:
    b = Fraction(b)
    return str(b.numerator) if b.denominator == 1 else f"{b.numerator}/{b.denominator}"


def format_formula(f: Formula) -> str:
    """Concrete syntax that parses back to an equal formula."""
    return _fmt(f)


def _prec(f: Formula) -> int:
    return _PREC.get(type(f), _UNARY)


def _fmt(f: Formula) -> str:
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Not):
        return "!" + _wrap(f.inner, _UNARY)
    if isinstance(f, Possibly):
        return f"<>[{format_budget(f.budget)}]" + _wrap(f.inner, _UNARY)
    if isinstance(f, Believes):
        return f"B{{{f.tag}}}" + _wrap(f.inner, _UNARY)
    op = {And: " & ", Or: " | ", Implies: " -> "}[type(f)]
    p = _prec(f)
    if isinstance(f, Implies):
        # right-associative
        left, right = _wrap(f.left, p + 1), _wrap(f.right, p)
    else:
        # left-associative
        left, right = _wrap(f.left, p), _wrap(f.right, p + 1)
    return left + op + right


def _wrap(f: Formula, needed: int) -> str:
    text = _fmt(f)
    return f"({text})" if _prec(f) < needed else text
