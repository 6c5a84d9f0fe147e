"""Multimodal formulas, parsing and rule-checked derivations."""

from .derivation import (
    CheckResult,
    Definition,
    Derivation,
    DerivationError,
    DerivationStep,
    Rule,
    all_mutants,
    check_derivation,
    check_step,
    consistency_audit,
)
from .fixtures import ProofFixture, bundled_fixture, bundled_fixture_names, load_fixture, loads_fixture
from .formula import And, Atom, Believes, Formula, Implies, Not, Or, Possibly, canon, format_formula, negate
from .parser import FormulaSyntaxError, parse_formula
