"""Algèbres de Lie libres : bases de Hall, dimension de Witt.

Fournit aussi les vecteurs de croissance maximaux et le critère de
type libre.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from functools import cache
from itertools import accumulate
from typing import Self

from sympy import divisors, factorint

from .errors import CapExceeded, DomainError

DEFAULT_HALL_CAP = 200_000


@dataclass(frozen=True)
class Leaf:
    """Générateur X_g."""

    generator: int

    @property
    def length(self) -> int:
        """Nombre de feuilles."""
        return 1

    def __str__(self) -> str:
        """Notation X_g."""
        return f"X{self.generator}"


@dataclass(frozen=True)
class Node:
    """Crochet [left, right]."""

    left: BracketExpr
    right: BracketExpr
    length: int = field(init=False, compare=False)

    def __post_init__(self) -> None:
        """Longueur = somme des longueurs des sous-arbres."""
        object.__setattr__(
            self, "length", self.left.length + self.right.length
        )

    def __str__(self) -> str:
        """Notation [a,b]."""
        return f"[{self.left},{self.right}]"


type BracketExpr = Leaf | Node


def order_key(e: BracketExpr) -> tuple[object, ...]:
    """Clé de l'ordre total : longueur puis comparaison récursive."""
    if isinstance(e, Leaf):
        return (1, (e.generator,))
    return (e.length, order_key(e.left), order_key(e.right))


def multidegree(e: BracketExpr) -> Counter[int]:
    """Nombre d'occurrences de chaque générateur."""
    if isinstance(e, Leaf):
        return Counter({e.generator: 1})
    return multidegree(e.left) + multidegree(e.right)


def right_nested(indices: tuple[int, ...]) -> BracketExpr:
    """[X_b1,[X_b2,…[X_bℓ−1,X_bℓ]…]] ; l'indice de gauche est extérieur."""
    if not indices:
        raise DomainError("multi-indice vide")
    expr: BracketExpr = Leaf(indices[-1])
    for g in reversed(indices[:-1]):
        expr = Node(Leaf(g), expr)
    return expr


def ad_power(i: int, j: int, power: int) -> BracketExpr:
    """ad_{X_i}^power(X_j), paire intérieure ordonnée comme dans H."""
    if power < 1 or i == j:
        raise DomainError("ad_power attend i ≠ j et une puissance ≥ 1")
    inner: BracketExpr = (
        Node(Leaf(i), Leaf(j)) if j > i else Node(Leaf(j), Leaf(i))
    )
    for _ in range(power - 1):
        inner = Node(Leaf(i), inner)
    return inner


@cache
def mobius(m: int) -> int:
    """Fonction de Möbius classique."""
    if m < 1:
        raise DomainError(f"mobius attend m ≥ 1, reçu {m}")
    exponents = factorint(m).values()
    if any(e > 1 for e in exponents):
        return 0
    return -1 if len(exponents) % 2 else 1


@cache
def witt_dimension(k: int, length: int) -> int:
    """Dimension de la couche de longueur ``length`` de l'algèbre libre.

    Entiers Python exacts (pas de dépassement possible) ; la divisibilité
    par la longueur est vérifiée.
    """
    if k < 1 or length < 1:
        raise DomainError(f"witt_dimension attend k, ℓ ≥ 1 (k={k}, ℓ={length})")
    total = sum(mobius(d) * k ** (length // d) for d in divisors(length))
    quotient, remainder = divmod(total, length)
    if remainder:
        raise ArithmeticError(
            f"somme de Witt non divisible: {total} / {length}"
        )
    return quotient


@dataclass(frozen=True)
class GrowthVector:
    """Vecteur de croissance (𝔫_1, …, 𝔫_r)."""

    entries: tuple[int, ...]

    def __post_init__(self) -> None:
        """Entrées strictement croissantes et positives."""
        if not self.entries or self.entries[0] < 1:
            raise DomainError("vecteur de croissance vide ou non positif")
        if any(b <= a for a, b in zip(self.entries, self.entries[1:])):
            raise DomainError(
                f"vecteur de croissance non strictement croissant: {self.entries}"
            )

    @property
    def step(self) -> int:
        """Pas r."""
        return len(self.entries)

    def dominated_by(self, other: Self) -> bool:
        """Ordre partiel terme à terme (entrées absentes = dernière valeur)."""
        width = max(self.step, other.step)

        def padded(v: tuple[int, ...]) -> list[int]:
            return [*v, *[v[-1]] * (width - len(v))]

        return all(
            a <= b
            for a, b in zip(padded(self.entries), padded(other.entries))
        )

    def __str__(self) -> str:
        """Notation (a, b, c)."""
        return "(" + ", ".join(map(str, self.entries)) + ")"


def cumulative_witt(k: int, step: int) -> list[int]:
    """Sommes cumulées Σ_{i≤j} d_{k,i} pour j = 1..step."""
    return list(accumulate(witt_dimension(k, i) for i in range(1, step + 1)))


def maximal_growth_vector(k: int, n: int) -> GrowthVector:
    """Vecteur de croissance maximal d'une distribution de rang k sur ℝⁿ."""
    if k < 2 or k >= n:  # noqa: PLR2004
        raise DomainError(f"il faut 2 ≤ k < n (k={k}, n={n})")
    entries: list[int] = []
    total = 0
    length = 0
    while total < n:
        length += 1
        total += witt_dimension(k, length)
        entries.append(min(total, n))
    logging.debug("Vecteur de croissance maximal (%d, %d): %s", k, n, entries)
    return GrowthVector(tuple(entries))


def is_free_type(gv: GrowthVector, k: int) -> bool:
    """Vrai si la dernière entrée est la somme de Witt non tronquée."""
    return gv.entries[-1] == cumulative_witt(k, gv.step)[-1]


@dataclass(frozen=True)
class HallBasis:
    """Base de Hall par couches 𝒱_1, …, 𝒱_ℓmax."""

    k: int
    layers: tuple[tuple[BracketExpr, ...], ...]

    @property
    def max_length(self) -> int:
        """Longueur maximale générée."""
        return len(self.layers)

    def layer(self, length: int) -> tuple[BracketExpr, ...]:
        """Couche 𝒱_length (vide au-delà de max_length)."""
        if 1 <= length <= self.max_length:
            return self.layers[length - 1]
        return ()

    def elements(self) -> list[BracketExpr]:
        """Concaténation des couches dans l'ordre total."""
        return [e for layer in self.layers for e in layer]

    def __contains__(self, e: object) -> bool:
        """Appartenance (par égalité structurelle)."""
        if not isinstance(e, Leaf | Node) or e.length > self.max_length:
            return False
        return e in self.layer(e.length)


def _hall_pair(a: BracketExpr, b: BracketExpr) -> bool:
    """Condition iii pour [a, b] avec a, b déjà dans H."""
    if order_key(a) >= order_key(b):
        return False
    return isinstance(b, Leaf) or order_key(b.left) <= order_key(a)


def hall_basis(
    k: int, max_length: int, cap: int = DEFAULT_HALL_CAP
) -> HallBasis:
    """Énumère la base de Hall couche par couche.

    Lève CapExceeded si le nombre total d'éléments dépasse ``cap``.
    """
    if k < 1 or max_length < 1:
        raise DomainError(f"hall_basis attend k, ℓmax ≥ 1 (k={k}, ℓ={max_length})")
    expected = sum(witt_dimension(k, i) for i in range(1, max_length + 1))
    if expected > cap:
        raise CapExceeded(
            f"base de Hall ({k}, {max_length}) : {expected} éléments > {cap}"
        )
    layers: list[tuple[BracketExpr, ...]] = [
        tuple(Leaf(g) for g in range(1, k + 1))
    ]
    for length in range(2, max_length + 1):
        candidates = [
            Node(a, b)
            for left_len in range(1, length)
            for a in layers[left_len - 1]
            for b in layers[length - left_len - 1]
            if _hall_pair(a, b)
        ]
        layers.append(tuple(sorted(candidates, key=order_key)))
        logging.debug("Couche de Hall %d: %d éléments", length, len(candidates))
    return HallBasis(k=k, layers=tuple(layers))


def is_hall_element(e: BracketExpr, basis: HallBasis) -> bool:
    """Conditions i–iii relativement à l'ordre de ``basis``."""
    if isinstance(e, Leaf):
        return 1 <= e.generator <= basis.k
    return (
        is_hall_element(e.left, basis)
        and is_hall_element(e.right, basis)
        and _hall_pair(e.left, e.right)
    )
