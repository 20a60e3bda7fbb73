"""Drapeaux de Lie de repères polynomiaux.

Un repère est un k-uplet de champs de vecteurs polynomiaux à
coefficients rationnels sur ℝⁿ. Le drapeau 𝒟_1 ⊂ 𝒟_2 ⊂ … est calculé en
un point à partir des crochets indexés par la base de Hall, ou bien
directement depuis un jet (drapeau formel).
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
from functools import cache
from typing import Any, Self

from pydantic import BaseModel
from sympy.polys.domains import QQ
from sympy.polys.orderings import grlex
from sympy.polys.rings import PolyRing

from . import jetalg
from .errors import CrossCheckFailed, DegenerateFrame, DomainError
from .freelie import (
    DEFAULT_HALL_CAP,
    BracketExpr,
    Leaf,
    hall_basis,
    is_free_type,
    maximal_growth_vector,
    right_nested,
)
from .linalg import (
    Matrix,
    Rational,
    Vector,
    det,
    inverse,
    matvec,
    poly_value,
    rank,
    to_qq,
)

# Contrôle croisé exhaustif limité à k ≤ 3 et aux longueurs ≤ 4
DEBUG_MAX_RANK = 3
DEBUG_MAX_LENGTH = 4


@cache
def coordinate_ring(n: int) -> Any:
    """Anneau ℚ[x1, …, xn] (ordre grlex)."""
    if n < 1:
        raise DomainError(f"dimension invalide: {n}")
    return PolyRing([f"x{i}" for i in range(1, n + 1)], QQ, grlex)


def _as_point(p: Sequence[Fraction | int]) -> Vector:
    return tuple(Fraction(x) for x in p)


@dataclass(frozen=True)
class PolyField:
    """Σ X^j ∂_j, composantes dans ℚ[x1, …, xn]."""

    components: tuple[Any, ...]

    @classmethod
    def constant(cls, vector: Sequence[Fraction | int]) -> Self:
        """Champ constant."""
        ring = coordinate_ring(len(vector))
        return cls(tuple(ring.ground_new(to_qq(c)) for c in vector))

    @property
    def dim(self) -> int:
        """Dimension ambiante n."""
        return len(self.components)

    @property
    def ring(self) -> Any:
        """Anneau des coefficients."""
        return coordinate_ring(self.dim)

    def value(self, p: Sequence[Fraction | int]) -> Vector:
        """Valeur exacte au point p."""
        point = _as_point(p)
        return tuple(poly_value(c, point.__getitem__) for c in self.components)

    def __add__(self, other: PolyField) -> PolyField:
        """Somme."""
        return PolyField(
            tuple(a + b for a, b in zip(self.components, other.components, strict=True))
        )

    def scaled(self, factor: Fraction | int) -> PolyField:
        """Produit par une constante rationnelle."""
        q = to_qq(factor)
        return PolyField(tuple(c * q for c in self.components))

    def is_zero(self) -> bool:
        """Vrai pour le champ nul."""
        return not any(self.components)


@dataclass(frozen=True)
class Frame:
    """k-uplet de champs polynomiaux sur ℝⁿ."""

    fields: tuple[PolyField, ...]

    def __post_init__(self) -> None:
        """Au moins un champ, dimension commune."""
        if not self.fields:
            raise DomainError("repère vide")
        if len({f.dim for f in self.fields}) != 1:
            raise DomainError("champs de dimensions différentes")

    @property
    def rank(self) -> int:
        """k."""
        return len(self.fields)

    @property
    def dim(self) -> int:
        """n."""
        return self.fields[0].dim

    @property
    def ring(self) -> Any:
        """Anneau ℚ[x1, …, xn]."""
        return coordinate_ring(self.dim)

    def values(self, p: Sequence[Fraction | int]) -> list[Vector]:
        """Valeurs des k champs en p."""
        return [f.value(p) for f in self.fields]

    def recombine(self, g: Sequence[Sequence[Fraction]]) -> Frame:
        """fr·G : le champ b devient Σ_a G[a][b] X_a (G constante)."""
        k = self.rank
        if len(g) != k or det(g) == 0:
            raise DomainError("G doit être une matrice k×k inversible")
        new_fields = []
        for b in range(k):
            total = PolyField.constant([0] * self.dim)
            for a in range(k):
                if g[a][b]:
                    total = total + self.fields[a].scaled(g[a][b])
            new_fields.append(total)
        return Frame(tuple(new_fields))


def poly_lie_bracket(x: PolyField, y: PolyField) -> PolyField:
    """[X, Y] = Σ (X^j ∂_j Y^i − Y^j ∂_j X^i) ∂_i."""
    if x.dim != y.dim:
        raise DomainError("champs de dimensions différentes")
    gens = x.ring.gens
    comps = []
    for i in range(x.dim):
        total = x.ring.zero
        for j, gen in enumerate(gens):
            if x.components[j]:
                total += x.components[j] * y.components[i].diff(gen)
            if y.components[j]:
                total -= y.components[j] * x.components[i].diff(gen)
        comps.append(total)
    return PolyField(tuple(comps))


class FieldEvaluator:
    """Champs crochets d'un repère, mémorisés par expression."""

    def __init__(self, frame: Frame) -> None:
        """Repère source."""
        self.frame = frame
        self._memo: dict[BracketExpr, PolyField] = {}

    def field(self, expr: BracketExpr) -> PolyField:
        """Champ associé à l'expression (crochet classique)."""
        cached = self._memo.get(expr)
        if cached is not None:
            return cached
        if isinstance(expr, Leaf):
            if not 1 <= expr.generator <= self.frame.rank:
                raise DomainError(f"générateur {expr.generator} hors repère")
            result = self.frame.fields[expr.generator - 1]
        else:
            result = poly_lie_bracket(
                self.field(expr.left), self.field(expr.right)
            )
        self._memo[expr] = result
        return result


def tree_field(expr: BracketExpr, frame: Frame) -> PolyField:
    """Crochet classique itéré selon l'expression."""
    return FieldEvaluator(frame).field(expr)


def nested_field(indices: Sequence[int], frame: Frame) -> PolyField:
    """[F_b1,[F_b2,…]] selon la convention d'imbrication à droite."""
    return tree_field(right_nested(tuple(indices)), frame)


class FlagReport(BaseModel):
    """Drapeau de Lie en un point."""

    point: tuple[Rational, ...]
    dims: tuple[int, ...]
    step: int
    maximal: bool
    free_type: bool
    bracket_generating: bool
    stabilized_below: bool
    regular: bool


def _report(
    point: Vector, k: int, n: int, dims: list[int]
) -> FlagReport:
    final = dims[-1]
    step = dims.index(final) + 1
    generating = final == n
    realized = dims[:step]
    regular = all(b > a for a, b in zip(realized, realized[1:]))
    maximal = free = False
    if generating and 2 <= k < n:  # noqa: PLR2004
        gv = maximal_growth_vector(k, n)
        maximal = tuple(realized) == gv.entries
        free = maximal and is_free_type(gv, k)
    if not regular:
        logging.warning("Point non régulier: dims %s en %s", dims, point)
    return FlagReport(
        point=point,
        dims=tuple(dims),
        step=step,
        maximal=maximal,
        free_type=free,
        bracket_generating=generating,
        stabilized_below=not generating and len(dims) > 1
        and dims[-1] == dims[-2],
        regular=regular,
    )


def _dims_from_values(
    layered: Sequence[Sequence[Vector]], n: int
) -> list[int]:
    dims: list[int] = []
    span: list[Vector] = []
    for layer in layered:
        if dims and dims[-1] == n:
            dims.append(n)
            continue
        span.extend(layer)
        dims.append(rank(span))
    return dims


def _check_independent(values: Sequence[Vector], k: int) -> None:
    if rank(values) < k:
        raise DegenerateFrame(f"valeurs du repère liées: {values}")


def lie_flag(
    frame: Frame,
    p: Sequence[Fraction | int],
    max_step: int,
    *,
    debug: bool = False,
    cap: int = DEFAULT_HALL_CAP,
) -> FlagReport:
    """Dimensions de 𝒟_1(p) ⊂ … ⊂ 𝒟_max_step(p)."""
    point = _as_point(p)
    k, n = frame.rank, frame.dim
    if len(point) != n:
        raise DomainError(f"point de dimension {len(point)} ≠ {n}")
    if max_step < 1:
        raise DomainError("max_step doit être ≥ 1")
    _check_independent(frame.values(point), k)
    evaluator = FieldEvaluator(frame)
    basis = hall_basis(k, max_step, cap)
    layered: list[list[Vector]] = []
    for length in range(1, max_step + 1):
        if layered and rank([v for layer in layered for v in layer]) == n:
            layered.append([])
            continue
        layered.append(
            [evaluator.field(e).value(point) for e in basis.layer(length)]
        )
    dims = _dims_from_values(layered, n)
    logging.info("Drapeau en %s: %s", point, dims)
    if debug:
        _cross_check(evaluator, point, dims)
    return _report(point, k, n, dims)


def _cross_check(
    evaluator: FieldEvaluator, point: Vector, dims: list[int]
) -> None:
    """Compare avec l'ensemble complet des crochets imbriqués."""
    k = evaluator.frame.rank
    if k > DEBUG_MAX_RANK:
        return
    span: list[Vector] = []
    for length in range(1, min(len(dims), DEBUG_MAX_LENGTH) + 1):
        span.extend(
            evaluator.field(right_nested(multi)).value(point)
            for multi in jetalg.all_multi_indices(k, length)
        )
        if rank(span) != dims[length - 1]:
            raise CrossCheckFailed(
                f"rang {rank(span)} ≠ {dims[length - 1]} à la longueur {length}"
            )
    logging.debug("Contrôle croisé des crochets réussi")


def formal_flag(
    point: jetalg.JetPoint, max_step: int, *, cap: int = DEFAULT_HALL_CAP
) -> FlagReport:
    """Drapeau formel calculé uniquement depuis le jet."""
    k, n = point.space.k, point.space.n
    _check_independent(point.field_values(), k)
    space = jetalg.JetSpace(k, n, max_step)
    basis = hall_basis(k, max_step, cap)
    layered = [
        [
            jetalg.evaluate(jetalg.tree_bracket(e, space), point)
            for e in basis.layer(length)
        ]
        for length in range(1, max_step + 1)
    ]
    return _report(point.base, k, n, _dims_from_values(layered, n))


@dataclass(frozen=True)
class AffineMap:
    """y = L·x + b à coefficients rationnels."""

    linear: Matrix
    shift: Vector

    @classmethod
    def of(
        cls,
        linear: Sequence[Sequence[Fraction | int]],
        shift: Sequence[Fraction | int] | None = None,
    ) -> Self:
        """Construction depuis des listes."""
        lin = tuple(tuple(Fraction(x) for x in row) for row in linear)
        return cls(lin, _as_point(shift or [0] * len(lin)))

    def __call__(self, p: Sequence[Fraction | int]) -> Vector:
        """Image d'un point."""
        image = matvec(self.linear, _as_point(p))
        return tuple(a + b for a, b in zip(image, self.shift, strict=True))


def pushforward(frame: Frame, amap: AffineMap) -> Frame:
    """(A_* X)(y) = L · X(L⁻¹(y − b))."""
    n = frame.dim
    if len(amap.linear) != n:
        raise DomainError("application affine de mauvaise dimension")
    if det(amap.linear) == 0:
        raise DomainError("partie linéaire singulière")
    linv = inverse(amap.linear)
    ring = frame.ring
    gens = ring.gens
    shifted = [gens[j] - to_qq(amap.shift[j]) for j in range(n)]
    substitution = [
        (
            gens[i],
            sum(
                (shifted[j] * to_qq(linv[i][j]) for j in range(n) if linv[i][j]),
                ring.zero,
            ),
        )
        for i in range(n)
    ]
    fields = []
    for fld in frame.fields:
        pulled = [c.compose(substitution) for c in fld.components]
        fields.append(
            PolyField(
                tuple(
                    sum(
                        (pulled[j] * to_qq(amap.linear[i][j])
                         for j in range(n) if amap.linear[i][j]),
                        ring.zero,
                    )
                    for i in range(n)
                )
            )
        )
    return Frame(tuple(fields))
