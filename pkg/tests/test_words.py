from __future__ import annotations

from fractions import Fraction

import pytest

from ncleapfrog.errors import UnregisteredInverse
from ncleapfrog.words import (
    EMPTY,
    AtomRegistry,
    NCExpr,
    TensorExpr,
    TripleTensor,
    concat,
    cyclic_normal_word,
    format_expr,
    format_word,
    invert_word,
    letters,
    parse_expr,
    reduce_word,
)

a1, b1 = NCExpr.gen("a1"), NCExpr.gen("b1")
A, B, C = (("a1", 1),), (("b1", 1),), (("c1", 1),)

# ---------------------------------------------------------
# Words
# ---------------------------------------------------------


def test_reduction_merges_and_cancels():
    assert reduce_word([("a1", 1), ("b1", 1), ("b1", -1), ("a1", 2)]) == (("a1", 3),)
    assert reduce_word([("a1", 1), ("a1", -1)]) == EMPTY


def test_word_times_inverse_is_empty():
    word = (("a1", 2), ("b1", -1))
    assert concat(word, invert_word(word)) == EMPTY
    assert invert_word(word) == (("b1", 1), ("a1", -2))


def test_letters_expand_powers():
    assert letters((("a1", -2), ("b1", 1))) == [("a1", -1), ("a1", -1), ("b1", 1)]


def test_cyclic_normal_form():
    assert cyclic_normal_word(B + A) == (("a1", 1), ("b1", 1))
    assert cyclic_normal_word((("a1", 1), ("b1", 1), ("a1", -1))) == B
    assert cyclic_normal_word((("a1", 1), ("a1", -1))) == EMPTY


def test_word_text():
    assert format_word(EMPTY) == "1"
    assert format_word((("a1", 2), ("b1", -1))) == "a1^2*b1^-1"


# ---------------------------------------------------------
# Expressions
# ---------------------------------------------------------


def test_products_do_not_commute():
    assert a1 * b1 != b1 * a1
    assert (a1 + 1) * (a1 - 1) == a1 * a1 - 1


def test_numbers_combine_with_expressions():
    assert 1 - a1 == NCExpr.const() - a1
    assert (a1 * Fraction(1, 2)) * 2 == a1
    assert (a1 - a1).is_zero()


def test_monomial_inverse():
    expr = NCExpr.word(A + B, 2)
    assert expr.inverse() == NCExpr.word((("b1", -1), ("a1", -1)), Fraction(1, 2))


def test_generator_names_are_checked():
    with pytest.raises(ValueError):
        NCExpr.gen("a")


def test_text_form_is_canonical():
    expr = Fraction(1, 2) * b1 * a1 - NCExpr.gen("a1", -1) * NCExpr.gen("F1")
    assert format_expr(expr) == "-a1^-1*F1 + 1/2*b1*a1"
    assert parse_expr("-a1^-1*F1 + 1/2*b1*a1") == expr


def test_parse_constants_and_cancellation():
    assert parse_expr("2*a1*a1^-1") == NCExpr.const(2)
    assert parse_expr("0").is_zero()
    assert format_expr(parse_expr("3 - b1")) == "3 - b1"


@pytest.mark.parametrize("text", ["", "a1**b1", "a1 +", "a1^x"])
def test_malformed_text_is_rejected(text):
    with pytest.raises(ValueError):
        parse_expr(text)


# ---------------------------------------------------------
# Atoms
# ---------------------------------------------------------


def test_sum_inverse_needs_a_registered_atom():
    total = b1 + a1 * NCExpr.gen("d1") * NCExpr.gen("c1")
    with pytest.raises(UnregisteredInverse):
        total.inverse()
    registry = AtomRegistry()
    F1 = registry.register("F1", total)
    assert total.inverse(registry) == F1
    assert registry.compress(total) == NCExpr.gen("F1", -1)
    assert registry.compress(a1) == a1


def test_atoms_cannot_be_redefined():
    registry = AtomRegistry()
    registry.register("F1", a1 + b1)
    registry.register("F1", a1 + b1)
    with pytest.raises(ValueError):
        registry.register("F1", a1 - b1)


def test_unknown_atom_definition():
    with pytest.raises(UnregisteredInverse):
        AtomRegistry().definition("F1")


def test_base_generators_look_through_atoms():
    registry = AtomRegistry()
    registry.register("F1", b1 + a1 * NCExpr.gen("d1") * NCExpr.gen("c1"))
    expr = NCExpr.gen("F1") * NCExpr.gen("e2")
    assert registry.base_generators(expr) == ["a1", "b1", "c1", "d1", "e2"]


# ---------------------------------------------------------
# Tensors
# ---------------------------------------------------------


def test_tensor_swap_and_multiply():
    t = TensorExpr.pure(B, A, Fraction(1, 2))
    assert t.swap() == TensorExpr.pure(A, B, Fraction(1, 2))
    assert t.multiply() == Fraction(1, 2) * b1 * a1
    assert str(t) == "1/2*b1 ⊗ a1"


def test_tensor_sandwich():
    t = TensorExpr.pure(A, B)
    assert t.sandwich(C, EMPTY, EMPTY, A) == TensorExpr.pure(C + A, B + A)
    assert t.sandwich(EMPTY, (("a1", -1),), EMPTY, EMPTY) == TensorExpr.pure(EMPTY, B)


def test_tensor_arithmetic():
    t = TensorExpr.pure(A, B)
    assert (t - t).is_zero()
    assert str(TensorExpr()) == "0"
    assert t * 2 == t + t


def test_triple_rotation_cycles():
    t = TripleTensor.from_mapping({(A, B, C): Fraction(1)})
    assert t.rotate() == TripleTensor.from_mapping({(C, A, B): Fraction(1)})
    assert t.rotate().rotate().rotate() == t
