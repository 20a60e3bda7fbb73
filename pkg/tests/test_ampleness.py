"""Tests for matrix-space classification and convex witnesses."""

from fractions import Fraction

import pytest

from maxgrowth import catalog
from maxgrowth.ampleness import (
    ConvexWitness,
    MatrixSpaceSpec,
    Verdict,
    adapted_frame,
    classify_matrix_space,
    det_affine_in_free_column,
    direction_chart,
    generic_verdict_table,
    gl_convex_decomposition,
    hull_membership_witness,
)
from maxgrowth.errors import (
    DomainError,
    NormalDirection,
    NotAmple,
    Unclassified,
)
from maxgrowth.linalg import det, dot, identity
from maxgrowth.suites import SuiteContext

E1 = (1, 0, 0)
E2 = (0, 1, 0)


def _spec(rows: int, cols: int, fixed: list[tuple[int, ...]], rho: int) -> MatrixSpaceSpec:
    return MatrixSpaceSpec(
        rows, cols, tuple(tuple(Fraction(x) for x in c) for c in fixed), rho
    )


@pytest.mark.parametrize(
    ("spec", "expected"),
    [
        (_spec(3, 3, [E1], 3), Verdict.AMPLE_NON_THIN),
        (_spec(3, 3, [E1, E2], 3), Verdict.NOT_AMPLE_HYPERPLANE),
        (_spec(2, 4, [(1, 0), (0, 1)], 2), Verdict.TRIVIALLY_AMPLE_FULL),
        (_spec(4, 3, [(1, 0, 0, 0)], 3), Verdict.AMPLE_THIN_COMPLEMENT),
        (_spec(3, 2, [E1, E1], 2), Verdict.EMPTY_TRIVIALLY_AMPLE),
        (_spec(3, 3, [], 3), Verdict.AMPLE_NON_THIN),
    ],
)
def test_classify_matrix_space(spec: MatrixSpaceSpec, expected: Verdict) -> None:
    """Reference cases of the classification."""
    assert classify_matrix_space(spec) is expected


def test_classify_unclassified() -> None:
    """Non-maximal rank and dependent fixed columns are left open."""
    with pytest.raises(Unclassified):
        classify_matrix_space(_spec(3, 3, [E1], 2))
    with pytest.raises(Unclassified):
        classify_matrix_space(_spec(3, 4, [E1, E1], 3))


def test_matrix_space_spec_validation() -> None:
    """Shapes are checked at construction."""
    with pytest.raises(DomainError):
        _spec(3, 1, [E1, E2], 1)
    with pytest.raises(DomainError):
        _spec(3, 3, [E1], 4)
    with pytest.raises(DomainError):
        _spec(3, 3, [(1, 0)], 3)


def test_gl_decomposition_of_identity() -> None:
    """I2 splits into two matrices of negative determinant."""
    witness = gl_convex_decomposition([[1, 0], [0, 1]])
    half = Fraction(1, 2)
    assert witness.members == (
        (half, ((3, 0), (0, -1))),
        (half, ((-1, 0), (0, 3))),
    )
    assert witness.average() == identity(2)
    assert witness.is_valid(identity(2), -1)
    assert all(det(m) == -3 for _, m in witness.members)


def test_gl_decomposition_same_sign_is_trivial() -> None:
    """Asking for the sign of det(M) returns M itself."""
    witness = gl_convex_decomposition([[1, 0], [0, 1]], sign=1)
    assert witness.members == ((1, identity(2)),)


def test_gl_decomposition_singular() -> None:
    """Singular matrices go through the μ-shift."""
    m = [[1, 0], [0, 0]]
    positive = gl_convex_decomposition(m)
    assert len(positive.members) == 2
    assert positive.is_valid(((1, 0), (0, 0)), 1)
    negative = gl_convex_decomposition(m, sign=-1)
    assert len(negative.members) == 4
    assert negative.is_valid(((1, 0), (0, 0)), -1)


@pytest.mark.parametrize(
    "m",
    [
        [[2, 1, 0], [0, 1, 3], [1, 0, 1]],
        [[0, 0, 0], [0, 0, 0], [0, 0, 0]],
        [[1, 2, 3], [2, 4, 6], [0, 1, -1]],
        [[Fraction(1, 2), 0, 0, 1], [0, 1, 0, 0], [0, 0, -3, 0], [1, 0, 0, 0]],
    ],
)
def test_gl_decomposition_is_valid(m: list[list[Fraction | int]]) -> None:
    """Witnesses re-average exactly to the target."""
    target = tuple(tuple(Fraction(x) for x in row) for row in m)
    witness = gl_convex_decomposition(m)
    assert witness.average() == target
    assert sum(w for w, _ in witness.members) == 1


@pytest.mark.parametrize("n", [2, 3, 4])
def test_gl_decomposition_on_random_matrices(n: int) -> None:
    """Fifty random rational matrices split into either sign component."""
    ctx = SuiteContext(seed=n)
    for _ in range(50):
        m = tuple(ctx.rationals(n) for _ in range(n))
        assert gl_convex_decomposition(m).is_valid(m)
        for sign in (1, -1):
            assert gl_convex_decomposition(m, sign=sign).is_valid(m, sign)


def test_gl_decomposition_refuses_lines() -> None:
    """GL(1) is not covered."""
    with pytest.raises(NotAmple):
        gl_convex_decomposition([[2]])


def test_convex_witness_validation() -> None:
    """Bad weights or signs invalidate a witness."""
    m = ((Fraction(1),),)
    assert not ConvexWitness(((Fraction(2), m),)).is_valid(((2,),))
    assert not ConvexWitness(((Fraction(1), m),)).is_valid(m, -1)


def test_det_affine_in_free_column() -> None:
    """det(e1 | e2 | w) = w3; dependent columns give zero."""
    functional = det_affine_in_free_column([[1, 0], [0, 1], [0, 0]])
    assert functional.coefficients == (0, 0, 1)
    assert functional((4, -2, 7)) == 7
    assert not functional.is_zero()
    assert det_affine_in_free_column([[1, 2], [2, 4], [0, 0]]).is_zero()
    assert det_affine_in_free_column([[0, 1], [1, 0], [0, 0]])((0, 0, 1)) == -1
    with pytest.raises(DomainError):
        det_affine_in_free_column([[1, 0, 0], [0, 1, 0]])


def test_hull_identity_negative_component() -> None:
    """I2 lies in the hull of the negative component."""
    spec = _spec(2, 2, [], 2)
    witness = hull_membership_witness(spec, [[1, 0], [0, 1]], -1, 100, 0)
    assert witness is not None
    assert witness.is_valid(identity(2), -1)


def test_hull_trivial_and_mismatch() -> None:
    """Matching sign is a singleton; wrong fixed columns is not found."""
    spec = _spec(3, 3, [E1, E2], 3)
    target = ((1, 0, 0), (0, 1, 0), (0, 0, 2))
    witness = hull_membership_witness(spec, target, 1, 100, 0)
    assert witness is not None
    assert len(witness.members) == 1
    other = ((0, 0, 0), (1, 1, 0), (0, 0, 2))
    assert hull_membership_witness(spec, other, 1, 100, 0) is None


@pytest.mark.parametrize("sign", [1, -1])
def test_hull_misses_hyperplane(sign: int) -> None:
    """Targets on the kernel of det are outside either component."""
    spec = _spec(3, 3, [E1, E2], 3)
    target = ((1, 0, 1), (0, 1, 1), (0, 0, 0))
    assert hull_membership_witness(spec, target, sign, 2000, 7) is None


def test_hull_sampled_witness() -> None:
    """The zero matrix is an average of positive-determinant samples."""
    spec = _spec(2, 2, [], 2)
    zero = ((0, 0), (0, 0))
    witness = hull_membership_witness(spec, zero, 1, 500, 3)
    assert witness is not None
    assert witness.is_valid(zero, 1)


def test_hull_requires_square() -> None:
    """Sign components only exist in the square case."""
    with pytest.raises(DomainError):
        hull_membership_witness(_spec(3, 2, [E1], 2), [[1, 0], [0, 1], [0, 0]], 1, 10, 0)


def test_adapted_frame() -> None:
    """First field pairs to 1 with v, the others to 0."""
    frame = catalog.frame("heisenberg")
    v = (Fraction(1), Fraction(1), Fraction(0))
    adapted = adapted_frame(frame, [0, 0, 0], v)
    assert adapted[0] == (Fraction(1, 2), Fraction(1, 2), 0)
    assert dot(adapted[0], v) == 1
    assert dot(adapted[1], v) == 0
    with pytest.raises(NormalDirection):
        adapted_frame(frame, [0, 0, 0], (0, 0, 1))
    with pytest.raises(DomainError):
        adapted_frame(frame, [0, 0, 0], (0, 0, 0))


def test_direction_chart() -> None:
    """The first chart coordinate is ⟨v, ·⟩."""
    chart = direction_chart((1, 2, 0))
    assert chart((1, 2, 0))[0] == 5
    assert chart((-2, 1, 0))[0] == 0
    assert det(chart.linear) != 0
    with pytest.raises(DomainError):
        direction_chart((0, 0))


def test_generic_table_rank_two() -> None:
    """k = 2: the top order can hit the hyperplane obstruction."""
    table = generic_verdict_table(2, 4)
    assert table.growth == (2, 3, 4)
    assert [(r.order, r.m_i, r.verdict) for r in table.rows] == [
        (1, 1, Verdict.AMPLE_THIN_COMPLEMENT),
        (2, 2, Verdict.AMPLE_THIN_COMPLEMENT),
        (3, 3, Verdict.NOT_AMPLE_HYPERPLANE),
        (3, 4, Verdict.TRIVIALLY_AMPLE_FULL),
    ]
    assert table.final_verdict is Verdict.NOT_AMPLE_HYPERPLANE
    assert not table.ample
    assert not generic_verdict_table(2, 5).ample


def test_generic_table_rank_three() -> None:
    """k = 3: worst case is ample but not thin."""
    table = generic_verdict_table(3, 6)
    assert [(r.order, r.m_i, r.verdict) for r in table.rows] == [
        (1, 1, Verdict.AMPLE_THIN_COMPLEMENT),
        (2, 4, Verdict.AMPLE_NON_THIN),
        (2, 5, Verdict.AMPLE_THIN_COMPLEMENT),
        (2, 6, Verdict.TRIVIALLY_AMPLE_FULL),
    ]
    assert table.final_verdict is Verdict.AMPLE_NON_THIN
    assert table.ample
    assert generic_verdict_table(3, 14).ample
