"""Tests for jet variables, differential polynomials and formal brackets."""

from fractions import Fraction

import pytest

from maxgrowth.errors import DomainError, IncompleteJet, OrderOverflow
from maxgrowth.flags import AffineMap, pushforward
from maxgrowth.jetalg import (
    DiffPoly,
    DiffVec,
    JetPoint,
    JetSpace,
    JetVar,
    bracket,
    derive,
    evaluate,
    evaluate_poly,
    generator_field,
    jet_of_frame,
    max_order,
    multi_indices,
    pure_derivative_extract,
    substitute,
)
from maxgrowth.parsing import parse_frame

HEISENBERG = "dim 3\nX1 = d1\nX2 = d2 + x1*d3\n"


def _var(space: JetSpace, i: int, j: int, *d: int) -> DiffPoly:
    return DiffPoly.var(space, JetVar(i, j, d))


def test_jet_var_is_canonical() -> None:
    """Multi-indices are stored sorted."""
    var = JetVar(1, 2, (2, 1))
    assert var.derivative == (1, 2)
    assert var.order == 2
    assert var == JetVar(1, 2, (1, 2))
    assert var.differentiated(1) == JetVar(1, 2, (1, 1, 2))
    assert str(JetVar(2, 3, (1,))) == "u^3_{2,(1)}"


def test_multi_indices() -> None:
    """Unordered multi-indices by size."""
    assert multi_indices(2, 2) == [(), (1,), (2,), (1, 1), (1, 2), (2, 2)]


def test_space_index_errors() -> None:
    """Out-of-budget orders and unknown fields are rejected."""
    space = JetSpace(1, 1, 2)
    with pytest.raises(OrderOverflow):
        space.index(JetVar(1, 1, (1, 1)))
    with pytest.raises(DomainError):
        space.index(JetVar(2, 1))
    with pytest.raises(DomainError):
        JetSpace(0, 1, 1)


def test_derive_leibniz() -> None:
    """D_1(u^1_1 u^2_2) expands by the Leibniz rule."""
    space = JetSpace(2, 2, 3)
    p = _var(space, 1, 1) * _var(space, 2, 2)
    expected = _var(space, 1, 1, 1) * _var(space, 2, 2) + _var(
        space, 1, 1
    ) * _var(space, 2, 2, 1)
    assert derive(p, 1) == expected


def test_derive_constant_is_zero() -> None:
    """Constants have zero derivative."""
    space = JetSpace(1, 2, 2)
    assert not derive(DiffPoly.constant(space, 5), 2)


def test_derive_order_overflow() -> None:
    """Derivatives beyond the jet order are refused."""
    space = JetSpace(1, 1, 2)
    with pytest.raises(OrderOverflow):
        derive(_var(space, 1, 1, 1), 1)
    with pytest.raises(DomainError):
        derive(_var(space, 1, 1), 2)


def test_derivations_commute() -> None:
    """D_a D_b = D_b D_a on low-order polynomials."""
    space = JetSpace(2, 2, 4)
    p = _var(space, 1, 1) * _var(space, 2, 1, 2) + _var(space, 1, 2) * 3
    assert derive(derive(p, 1), 2) == derive(derive(p, 2), 1)


def test_generator_field() -> None:
    """A_(a) has the 0-jet variables of field a as components."""
    space = JetSpace(2, 2, 1)
    field = generator_field(space, 2)
    assert field.components == (_var(space, 2, 1), _var(space, 2, 2))
    with pytest.raises(DomainError):
        generator_field(space, 3)


def test_bracket_order_bound_and_budget() -> None:
    """Order of A_I is |I| - 1; lengths beyond r are refused."""
    space = JetSpace(2, 2, 3)
    assert max_order(bracket((1,), space)) == 0
    assert max_order(bracket((1, 2), space)) == 1
    assert max_order(bracket((1, 1, 2), space)) == 2
    assert bracket((1, 1), space).is_zero()
    with pytest.raises(OrderOverflow):
        bracket((1, 2, 1, 2), space)
    with pytest.raises(DomainError):
        bracket((), space)


def test_bracket_multilinearity() -> None:
    """Each monomial carries one factor per slot of the multi-index."""
    space = JetSpace(2, 2, 3)
    for multi in [(1, 2), (1, 1, 2), (2, 1, 2)]:
        expected = {f: multi.count(f) for f in (1, 2)}
        for comp in bracket(multi, space).components:
            for monom, _ in comp.terms():
                counts = dict.fromkeys((1, 2), 0)
                for var, exp in monom:
                    counts[var.field_index] += exp
                assert counts == expected


def test_substitute() -> None:
    """Empty substitution is the identity; assignments are simultaneous."""
    space = JetSpace(2, 2, 2)
    p = _var(space, 1, 1) * _var(space, 2, 1, 2) + _var(space, 2, 1)
    assert substitute(p, {}) == p
    result = substitute(
        p, {JetVar(1, 1): Fraction(1), JetVar(2, 1): _var(space, 1, 2)}
    )
    assert result == _var(space, 2, 1, 2) + _var(space, 1, 2)


def test_heisenberg_jet() -> None:
    """First-order jet of the Heisenberg frame at the origin."""
    frame = parse_frame(HEISENBERG)
    jet = jet_of_frame(frame, [0, 0, 0], 1)
    assert jet.values[JetVar(2, 3, (1,))] == 1
    first_order = [
        v for v in jet.space.variables if v.order == 1 and v != JetVar(2, 3, (1,))
    ]
    assert all(jet.values[v] == 0 for v in first_order)
    assert pure_derivative_extract(jet, 2, 1, 1) == (0, 0, 1)
    assert pure_derivative_extract(jet, 2, 1, 0) == (0, 1, 0)
    assert evaluate(bracket((1,), jet.space), jet) == (1, 0, 0)
    assert evaluate(bracket((1, 2), jet.space), jet) == (0, 0, 1)
    assert evaluate(bracket((2, 1), jet.space), jet) == (0, 0, -1)


def test_constant_frame_jet() -> None:
    """Constant frames have vanishing derivatives."""
    frame = parse_frame("dim 3\nX1 = d1\nX2 = d2\n")
    jet = jet_of_frame(frame, [1, 2, 3], 2)
    assert all(jet.values[v] == 0 for v in jet.space.variables if v.order)
    assert jet.field_values() == [(1, 0, 0), (0, 1, 0)]


def test_jet_translation() -> None:
    """The jet at p equals the jet of the translated frame at 0."""
    frame = parse_frame("dim 2\nX1 = d1 + x2^2*d2\nX2 = x1*x2*d1 + d2\n")
    p = (Fraction(1, 2), Fraction(-3))
    moved = pushforward(frame, AffineMap.of([[1, 0], [0, 1]], [-p[0], -p[1]]))
    assert jet_of_frame(frame, p, 2).values == jet_of_frame(moved, [0, 0], 2).values


def test_evaluate_zero_and_incomplete() -> None:
    """Zero fields evaluate to zero; missing variables are reported."""
    space = JetSpace(1, 2, 1)
    point = JetPoint.from_zero_jet(space, [[3, 4]])
    assert evaluate(DiffVec.zero(space), point) == (0, 0)
    assert evaluate_poly(_var(space, 1, 2), point) == 4
    with pytest.raises(IncompleteJet):
        JetPoint(space, (Fraction(0), Fraction(0)), {})
    with pytest.raises(OrderOverflow):
        pure_derivative_extract(point, 1, 1, 1)


def test_extract_unknown_field_is_incomplete() -> None:
    """Extracting a field the jet does not carry reports a missing variable."""
    point = JetPoint.from_zero_jet(JetSpace(1, 2, 2), [[1, 0]])
    assert pure_derivative_extract(point, 1, 2, 1) == (0, 0)
    with pytest.raises(IncompleteJet):
        pure_derivative_extract(point, 2, 1, 0)
