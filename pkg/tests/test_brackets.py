from __future__ import annotations

from fractions import Fraction

import pytest

from ncleapfrog.algebra import RingValue
from ncleapfrog.brackets import (
    BracketEngine,
    Space,
    check_equal,
    double_bracket,
    eval_expr,
    induced_bracket,
    natural_form,
)
from ncleapfrog.words import EMPTY, AtomRegistry, NCExpr, TensorExpr, TripleTensor
from tests.conftest import rational

a1, b1, c1, d1 = (NCExpr.gen(name) for name in ("a1", "b1", "c1", "d1"))
A, B = (("a1", 1),), (("b1", 1),)


def f1_registry() -> AtomRegistry:
    registry = AtomRegistry()
    registry.register("F1", b1 + a1 * d1 * c1)
    return registry


# ---------------------------------------------------------
# Double brackets
# ---------------------------------------------------------


def test_face_letters():
    assert double_bracket(b1, a1) == TensorExpr.pure(B, A, Fraction(1, 2))
    assert double_bracket(a1, b1) == TensorExpr.pure(A, B, Fraction(-1, 2))
    assert double_bracket(a1, a1).is_zero()


def test_letters_of_different_faces_commute():
    assert double_bracket(b1, NCExpr.gen("a2")).is_zero()


def test_bracket_is_skew():
    engine = BracketEngine()
    x, y = a1 * d1 + b1, c1 * b1
    assert engine.double_bracket(x, y) == -engine.double_bracket(y, x).swap()


def test_inverse_letter_rule():
    inverse = NCExpr.gen("a1", -1)
    assert double_bracket(b1, inverse) == TensorExpr.pure((("a1", -1), ("b1", 1)), EMPTY, Fraction(-1, 2))


def test_unknown_generator_is_rejected():
    with pytest.raises(ValueError):
        double_bracket(NCExpr.gen("x1"), a1)


def test_atom_brackets_follow_the_inverse_rule():
    registry = f1_registry()
    # F1 (b1 + a1 d1 c1) = 1, so its bracket with anything vanishes
    unit = NCExpr.gen("F1") * (b1 + a1 * d1 * c1)
    lhs = double_bracket(unit, a1, registry)
    assert not lhs.is_zero()
    assert check_equal(lhs, TensorExpr(), Space.TENSOR, registry, points=3, d=2)


# ---------------------------------------------------------
# Induced and cyclic brackets
# ---------------------------------------------------------


def test_induced_bracket_multiplies():
    assert induced_bracket(b1, a1) == Fraction(1, 2) * b1 * a1


def test_natural_form_rotates_words():
    assert natural_form(b1 * a1) == a1 * b1
    assert natural_form(a1 * b1 * NCExpr.gen("a1", -1)) == b1


def test_cyclic_bracket_is_skew():
    engine = BracketEngine()
    x, y = a1 * b1, c1 * d1 * b1
    assert (engine.h0_bracket(x, y) + engine.h0_bracket(y, x)).is_zero()


def test_cyclic_jacobi_identity():
    assert BracketEngine().h0_jacobiator(a1, b1, c1).is_zero()


def test_double_jacobiator_does_not_vanish():
    expected = TripleTensor.from_mapping({(A, A, B): Fraction(-1, 4)})
    assert BracketEngine().double_jacobiator(a1, a1, b1) == expected


# ---------------------------------------------------------
# Evaluation
# ---------------------------------------------------------


def test_evaluate_expression_and_tensor():
    x, y = rational([[1, 2], [0, 1]]), rational([[0, 1], [1, 0]])
    assignment = {"a1": x, "b1": y}
    assert eval_expr(a1 * b1 - 2, assignment) == x * y - 2
    assert eval_expr(TensorExpr.pure(A, B), assignment) == x.kron(y)


def test_atoms_evaluate_to_inverses():
    registry = f1_registry()
    assignment = {name: RingValue.identity(2) * k for k, name in enumerate(("a1", "b1", "c1", "d1"), start=1)}
    # b1 + a1 d1 c1 = 2 + 12 = 14
    assert eval_expr(NCExpr.gen("F1"), assignment, registry) == RingValue.identity(2) * Fraction(1, 14)


def test_empty_assignment_needs_dimension():
    with pytest.raises(ValueError):
        eval_expr(NCExpr.const(2), {})
    assert eval_expr(NCExpr.const(2), {}, d=2) == RingValue.identity(2) * 2


def test_unassigned_generator():
    with pytest.raises(ValueError):
        eval_expr(a1 * b1, {"a1": RingValue.identity(2)})


# ---------------------------------------------------------
# Identity testing
# ---------------------------------------------------------


def test_equal_expressions():
    result = check_equal(induced_bracket(b1, a1), Fraction(1, 2) * b1 * a1, points=4, d=2)
    assert result.equal
    assert result.points == 4


def test_commutator_differs_in_the_algebra_but_not_cyclically():
    result = check_equal(a1 * b1, b1 * a1, points=4, d=2, seed=3)
    assert not result
    assert result.failing_point == 0
    assert result.seed == 3
    assert check_equal(a1 * b1, b1 * a1, Space.CYCLIC, points=4, d=2)


def test_atom_identity():
    registry = f1_registry()
    lhs = NCExpr.gen("F1") * (b1 + a1 * d1 * c1)
    assert check_equal(lhs, NCExpr.const(), registry=registry, points=3, d=2)
