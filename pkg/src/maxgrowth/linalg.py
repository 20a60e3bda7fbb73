"""Algèbre linéaire exacte sur ℚ.

Les vecteurs et matrices circulent sous forme de tuples de ``Fraction`` ;
les calculs (rang, déterminant, noyau, réduction) sont délégués à
``DomainMatrix`` de sympy sur le domaine ``QQ``.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from fractions import Fraction
from typing import Annotated, Any

from pydantic import PlainSerializer, PlainValidator
from sympy.polys.domains import QQ
from sympy.polys.matrices import DomainMatrix

from .errors import DomainError, ZeroDenominator

type Vector = tuple[Fraction, ...]
type Matrix = tuple[Vector, ...]


def to_qq(value: Fraction | int) -> Any:
    """Convertit un rationnel Python en élément de QQ."""
    q = Fraction(value)
    return QQ(q.numerator, q.denominator)


def from_qq(value: Any) -> Fraction:
    """Convertit un élément de QQ en ``Fraction``."""
    return Fraction(int(value.numerator), int(value.denominator))


def parse_rational(text: str | int | Fraction) -> Fraction:
    """Lit un rationnel exact ``p`` ou ``p/q`` (jamais de flottant)."""
    if isinstance(text, Fraction | int):
        return Fraction(text)
    raw = text.strip()
    num, sep, den = raw.partition("/")
    try:
        if sep and int(den) == 0:
            raise ZeroDenominator(f"dénominateur nul dans {raw!r}", 1, 1)
        return Fraction(int(num), int(den)) if sep else Fraction(int(num))
    except ValueError as err:
        raise DomainError(f"rationnel invalide: {raw!r}") from err


def parse_vector(text: str) -> Vector:
    """Lit une liste ``q1,…,qn`` de rationnels."""
    return tuple(parse_rational(part) for part in text.split(","))


def _dm(rows: Sequence[Sequence[Fraction]], ncols: int) -> DomainMatrix:
    data = [[to_qq(x) for x in row] for row in rows]
    return DomainMatrix(data, (len(data), ncols), QQ)


def _rows(dm: DomainMatrix) -> list[list[Fraction]]:
    return [[from_qq(x) for x in row] for row in dm.to_list()]


def rank(vectors: Sequence[Sequence[Fraction]]) -> int:
    """Rang exact d'une famille de vecteurs (donnés en lignes)."""
    if not vectors or not vectors[0]:
        return 0
    return int(_dm(vectors, len(vectors[0])).rank())


def det(matrix: Sequence[Sequence[Fraction]]) -> Fraction:
    """Déterminant exact d'une matrice carrée."""
    n = len(matrix)
    if any(len(row) != n for row in matrix):
        raise DomainError("matrice non carrée")
    return from_qq(_dm(matrix, n).det())


def inverse(matrix: Sequence[Sequence[Fraction]]) -> Matrix:
    """Inverse exacte ; lève DomainError si la matrice est singulière."""
    if det(matrix) == 0:
        raise DomainError("matrice singulière")
    inv = _dm(matrix, len(matrix)).inv()
    return tuple(tuple(row) for row in _rows(inv))


def nullspace(matrix: Sequence[Sequence[Fraction]], ncols: int) -> list[Vector]:
    """Base du noyau à droite de ``matrix`` (ncols colonnes)."""
    if not matrix:
        return [
            tuple(Fraction(int(i == j)) for j in range(ncols))
            for i in range(ncols)
        ]
    basis = _dm(matrix, ncols).nullspace()
    return [tuple(row) for row in _rows(basis) if any(row)]


def pivot_columns(columns: Sequence[Sequence[Fraction]]) -> list[int]:
    """Indices d'une sous-famille libre maximale (première rencontrée)."""
    if not columns or not columns[0]:
        return []
    dim = len(columns[0])
    as_rows = [[col[i] for col in columns] for i in range(dim)]
    _, pivots = _dm(as_rows, len(columns)).rref()
    return list(pivots)


def solve(
    matrix: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]
) -> Vector | None:
    """Une solution exacte de ``matrix · x = rhs`` ou None si incompatible.

    Les variables libres sont fixées à 0.
    """
    ncols = len(matrix[0]) if matrix else 0
    augmented = [[*row, b] for row, b in zip(matrix, rhs, strict=True)]
    reduced, pivots = _dm(augmented, ncols + 1).rref()
    if ncols in pivots:
        return None
    rows = _rows(reduced)
    x = [Fraction(0)] * ncols
    for r, col in enumerate(pivots):
        x[col] = rows[r][ncols]
    return tuple(x)


def transpose(matrix: Sequence[Sequence[Fraction]]) -> Matrix:
    """Transposée."""
    return tuple(tuple(col) for col in zip(*matrix, strict=True))


def matmul(
    a: Sequence[Sequence[Fraction]], b: Sequence[Sequence[Fraction]]
) -> Matrix:
    """Produit matriciel exact."""
    cols = transpose(b)
    return tuple(
        tuple(sum((x * y for x, y in zip(row, col, strict=True)), Fraction(0))
              for col in cols)
        for row in a
    )


def matvec(
    a: Sequence[Sequence[Fraction]], v: Sequence[Fraction]
) -> Vector:
    """Produit matrice-vecteur exact."""
    return tuple(dot(row, v) for row in a)


def dot(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    """Produit scalaire euclidien."""
    return sum((x * y for x, y in zip(u, v, strict=True)), Fraction(0))


def poly_value(poly: Any, lookup: Callable[[int], Fraction]) -> Fraction:
    """Évalue un ``PolyElement`` sur ℚ.

    ``lookup(i)`` donne la valeur du i-ème générateur ; il n'est appelé
    que pour les générateurs présents.
    """
    cache: dict[int, Fraction] = {}
    total = Fraction(0)
    for monom, coeff in poly.items():
        term = from_qq(coeff)
        for idx, exp in enumerate(monom):
            if exp:
                if idx not in cache:
                    cache[idx] = lookup(idx)
                term *= cache[idx] ** exp
        total += term
    return total


def identity(n: int) -> Matrix:
    """Matrice identité n×n."""
    return tuple(
        tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)
    )


# Rationnel exact dans les modèles pydantic, sérialisé en "p/q"
Rational = Annotated[
    Fraction,
    PlainValidator(parse_rational),
    PlainSerializer(str, return_type=str),
]
