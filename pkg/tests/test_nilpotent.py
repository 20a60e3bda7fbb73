"""Tests for stratified algebras and their nilpotent frames."""

from fractions import Fraction
from math import factorial

import pytest

from maxgrowth import catalog
from maxgrowth.errors import InvalidAlgebra
from maxgrowth.flags import lie_flag, poly_lie_bracket
from maxgrowth.linalg import identity, matmul
from maxgrowth.nilpotent import (
    StratifiedAlgebra,
    bch_coefficients,
    free_nilpotent_algebra,
    left_invariant_fields,
    maximal_growth_algebra,
    nilpotent_frame,
    validate_algebra,
)

ONE = Fraction(1)


@pytest.mark.parametrize("name", ["heisenberg", "engel", "free23", "free32"])
def test_catalog_algebras_are_valid(name: str) -> None:
    """Catalog algebras pass every check."""
    report = validate_algebra(catalog.algebra(name))
    assert report.valid
    assert report.violation is None


@pytest.mark.parametrize(
    ("brackets", "layers", "violation", "witnesses"),
    [
        ({(1, 4): {3: ONE}}, (2, 1), "indices", [1, 4]),
        ({(2, 1): {3: ONE}}, (2, 1), "antisymmetry", [2, 1]),
        ({(1, 2): {1: ONE}}, (2, 1), "grading", [1, 2, 1]),
        ({}, (2, 1), "generation", [2]),
        (
            {
                (1, 2): {4: ONE},
                (1, 3): {5: ONE},
                (2, 3): {6: ONE},
                (1, 6): {7: ONE},
            },
            (3, 3, 1),
            "jacobi",
            [1, 2, 3],
        ),
        (
            {
                (1, 2): {4: ONE},
                (1, 3): {5: ONE},
                (2, 3): {6: ONE},
                (1, 6): {7: ONE},
            },
            (3, 3, 2),
            "generation",
            [3],
        ),
    ],
)
def test_validation_failures(
    brackets: dict[tuple[int, int], dict[int, Fraction]],
    layers: tuple[int, ...],
    violation: str,
    witnesses: list[int],
) -> None:
    """The first violated condition is reported with its witnesses."""
    alg = StratifiedAlgebra(layers, brackets)
    report = validate_algebra(alg)
    assert not report.valid
    assert report.violation == violation
    assert report.witnesses == witnesses
    with pytest.raises(InvalidAlgebra) as exc:
        nilpotent_frame(alg)
    assert exc.value.report.violation == violation


def test_structure_antisymmetric_completion() -> None:
    """Only i < j is stored; the rest follows."""
    alg = catalog.algebra("heisenberg")
    assert alg.structure(1, 2) == {3: 1}
    assert alg.structure(2, 1) == {3: -1}
    assert alg.structure(1, 1) == {}
    assert alg.bracket({1: Fraction(2)}, {2: Fraction(3), 1: ONE}) == {3: 6}
    assert alg.layer_of(3) == 2
    assert list(alg.layer_range(1)) == [1, 2]


def test_bch_coefficients() -> None:
    """Taylor coefficients of z / (1 - exp(-z))."""
    assert bch_coefficients(6) == (
        1,
        Fraction(1, 2),
        Fraction(1, 12),
        0,
        Fraction(-1, 720),
        0,
        Fraction(1, 30240),
    )


def test_bch_coefficients_invert_shift_series() -> None:
    """(1 - exp(-Z)) / Z times the series is I for a nilpotent shift Z."""
    size = 7
    shift = tuple(
        tuple(Fraction(int(j == i + 1)) for j in range(size)) for i in range(size)
    )
    powers = [identity(size)]
    for _ in range(size - 1):
        powers.append(matmul(powers[-1], shift))

    def series(coeffs: list[Fraction]) -> tuple[tuple[Fraction, ...], ...]:
        return tuple(
            tuple(
                sum((c * p[i][j] for c, p in zip(coeffs, powers, strict=True)), Fraction(0))
                for j in range(size)
            )
            for i in range(size)
        )

    inverse_side = series(
        [Fraction((-1) ** j, factorial(j + 1)) for j in range(size)]
    )
    coeffs = series([Fraction(c) for c in bch_coefficients(size - 1)])
    assert matmul(inverse_side, coeffs) == identity(size)


def test_heisenberg_left_invariant_fields() -> None:
    """Exponential coordinates give ∂1 - x2/2 ∂3 and ∂2 + x1/2 ∂3."""
    fields = left_invariant_fields(catalog.algebra("heisenberg"))
    assert fields[0].value([0, 2, 0]) == (1, 0, -1)
    assert fields[1].value([4, 0, 0]) == (0, 1, 2)
    assert fields[2].value([7, 7, 7]) == (0, 0, 1)
    assert poly_lie_bracket(fields[0], fields[1]) == fields[2]


@pytest.mark.parametrize(
    ("name", "dims"),
    [
        ("heisenberg", (2, 3)),
        ("engel", (2, 3, 4)),
        ("free23", (2, 3, 5)),
        ("free32", (3, 6)),
    ],
)
def test_nilpotent_frame_growth(name: str, dims: tuple[int, ...]) -> None:
    """The nilpotent frame has the layer dimensions as growth vector."""
    frame = nilpotent_frame(catalog.algebra(name))
    assert frame.rank == dims[0]
    for p in ([0] * dims[-1], [Fraction(1, 3)] * dims[-1]):
        assert lie_flag(frame, p, len(dims)).dims == dims


def test_nilpotent_frame_without_certification() -> None:
    """Skipping certification gives the same fields."""
    alg = catalog.algebra("engel")
    assert nilpotent_frame(alg, certify=False) == nilpotent_frame(alg)


def test_free_nilpotent_algebra() -> None:
    """Layers follow the Witt dimensions and the algebra is valid."""
    alg = free_nilpotent_algebra(2, 3)
    assert alg.layer_dims == (2, 1, 2)
    assert alg.labels[:3] == ("X1", "X2", "[X1,X2]")
    assert validate_algebra(alg).valid
    assert free_nilpotent_algebra(3, 3).layer_dims == (3, 3, 8)


@pytest.mark.parametrize(
    ("k", "n", "layers"),
    [(2, 4, (2, 1, 1)), (3, 8, (3, 3, 2)), (2, 5, (2, 1, 2)), (3, 6, (3, 3))],
)
def test_maximal_growth_algebra(k: int, n: int, layers: tuple[int, ...]) -> None:
    """Truncating the last free layer keeps a valid stratified algebra."""
    alg = maximal_growth_algebra(k, n)
    assert alg.layer_dims == layers
    assert alg.dim == n
    assert validate_algebra(alg).valid


def test_maximal_growth_frame_from_catalog() -> None:
    """free:K:N names resolve to nilpotent frames."""
    frame = catalog.frame("free:2:4")
    assert lie_flag(frame, [0, 0, 0, 0], 3).dims == (2, 3, 4)
