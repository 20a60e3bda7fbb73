"""Algèbres de Lie stratifiées et repères invariants à gauche.

Les constantes de structure c^m_ij ne sont données que pour i < j ;
la complétion antisymétrique est implicite. Le repère d'un groupe
nilpotent est obtenu en coordonnées exponentielles par la partie
linéaire en ξ de BCH : X̃_ξ(x) = Σ β_n ad_x^n(ξ), β_n étant les
coefficients de z/(1 − e^{−z}).
"""

from __future__ import annotations

import logging
from collections import defaultdict
from collections.abc import Mapping
from dataclasses import dataclass
from fractions import Fraction
from functools import cache
from typing import Any, Literal

from pydantic import BaseModel, Field
from sympy import Symbol, exp, series

from .errors import CertificationFailed, InvalidAlgebra
from .flags import Frame, PolyField, coordinate_ring, poly_lie_bracket
from .freelie import (
    DEFAULT_HALL_CAP,
    BracketExpr,
    Leaf,
    hall_basis,
    maximal_growth_vector,
)
from .linalg import rank, solve, to_qq

type Structure = Mapping[tuple[int, int], Mapping[int, Fraction]]
type LieVector = dict[int, Fraction]


@dataclass(frozen=True, eq=False)
class StratifiedAlgebra:
    """𝔤 = 𝔤_1 ⊕ … ⊕ 𝔤_r, base e_1..e_N rangée par couches."""

    layer_dims: tuple[int, ...]
    brackets: Structure
    labels: tuple[str, ...] = ()

    @property
    def dim(self) -> int:
        """N = Σ d_i."""
        return sum(self.layer_dims)

    @property
    def step(self) -> int:
        """Nombre de couches r."""
        return len(self.layer_dims)

    def layer_range(self, a: int) -> range:
        """Indices (1-basés) de la couche a."""
        start = sum(self.layer_dims[: a - 1])
        return range(start + 1, start + self.layer_dims[a - 1] + 1)

    def layer_of(self, m: int) -> int:
        """Couche contenant e_m."""
        total = 0
        for a, d in enumerate(self.layer_dims, start=1):
            total += d
            if m <= total:
                return a
        raise IndexError(m)

    def structure(self, i: int, j: int) -> LieVector:
        """[e_i, e_j] avec complétion antisymétrique."""
        if i < j:
            return dict(self.brackets.get((i, j), {}))
        if i > j:
            return {m: -c for m, c in self.brackets.get((j, i), {}).items()}
        return {}

    def bracket(self, u: Mapping[int, Fraction], v: Mapping[int, Fraction]) -> LieVector:
        """Crochet bilinéaire de deux vecteurs (base → coefficient)."""
        out: defaultdict[int, Fraction] = defaultdict(Fraction)
        for i, a in u.items():
            for j, b in v.items():
                for m, c in self.structure(i, j).items():
                    out[m] += a * b * c
        return {m: c for m, c in out.items() if c}


class ValidationReport(BaseModel):
    """Résultat de validate_algebra ; la première violation est gardée."""

    valid: bool
    violation: (
        Literal["indices", "antisymmetry", "grading", "jacobi", "generation"]
        | None
    ) = None
    witnesses: list[int] = Field(default_factory=list)
    message: str = "ok"


def _fail(kind: Any, witnesses: list[int], message: str) -> ValidationReport:
    logging.info("Algèbre invalide (%s): %s", kind, message)
    return ValidationReport(
        valid=False, violation=kind, witnesses=witnesses, message=message
    )


def validate_algebra(alg: StratifiedAlgebra) -> ValidationReport:  # noqa: C901, PLR0911
    """Indices, antisymétrie, graduation, génération puis Jacobi."""
    n, r = alg.dim, alg.step
    if not alg.layer_dims or any(d < 1 for d in alg.layer_dims):
        return _fail("indices", [], f"dimensions de couches invalides {alg.layer_dims}")
    for (i, j), row in alg.brackets.items():
        for m in (i, j, *row):
            if not 1 <= m <= n:
                return _fail("indices", [i, j], f"indice e{m} hors de 1..{n}")
        if i >= j and any(row.values()):
            return _fail(
                "antisymmetry", [i, j],
                f"paire ({i}, {j}) : seules les paires i < j sont admises",
            )
    for (i, j), row in alg.brackets.items():
        target = alg.layer_of(i) + alg.layer_of(j)
        for m, c in row.items():
            if c and alg.layer_of(m) != target:
                return _fail(
                    "grading", [i, j, m],
                    f"[e{i},e{j}] a une composante sur e{m} hors de la couche {target}",
                )
    for a in range(1, r):
        images = [
            alg.structure(i, m)
            for i in alg.layer_range(1)
            for m in alg.layer_range(a)
        ]
        vectors = [
            tuple(img.get(m, Fraction(0)) for m in range(1, n + 1))
            for img in images
        ]
        if rank(vectors) != alg.layer_dims[a]:
            return _fail(
                "generation", [a + 1],
                f"[𝔤_1, 𝔤_{a}] n'engendre pas la couche {a + 1}",
            )
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            for k in range(j + 1, n + 1):
                ei, ej, ek = {i: Fraction(1)}, {j: Fraction(1)}, {k: Fraction(1)}
                total: defaultdict[int, Fraction] = defaultdict(Fraction)
                for a, b, c in ((ei, ej, ek), (ej, ek, ei), (ek, ei, ej)):
                    for m, v in alg.bracket(a, alg.bracket(b, c)).items():
                        total[m] += v
                if any(total.values()):
                    return _fail(
                        "jacobi", [i, j, k],
                        f"Jacobi non vérifiée pour (e{i}, e{j}, e{k})",
                    )
    return ValidationReport(valid=True)


@cache
def bch_coefficients(order: int) -> tuple[Fraction, ...]:
    """β_0..β_order, coefficients de Taylor de z/(1 − e^{−z})."""
    z = Symbol("z")
    expansion = series(z / (1 - exp(-z)), z, 0, order + 1).removeO()
    coeffs = []
    for i in range(order + 1):
        c = expansion.coeff(z, i)
        coeffs.append(Fraction(int(c.p), int(c.q)))
    logging.debug("Coefficients BCH: %s", coeffs)
    return tuple(coeffs)


def left_invariant_fields(alg: StratifiedAlgebra) -> list[PolyField]:
    """X̃_{e_1}, …, X̃_{e_N} en coordonnées exponentielles."""
    n = alg.dim
    ring = coordinate_ring(n)
    x = ring.gens
    table = [
        (a, b, m, to_qq(c))
        for a in range(1, n + 1)
        for b in range(1, n + 1)
        for m, c in alg.structure(a, b).items()
    ]
    beta = [to_qq(c) for c in bch_coefficients(max(alg.step - 1, 0))]

    def ad_x(w: list[Any]) -> list[Any]:
        out = [ring.zero] * n
        for a, b, m, c in table:
            if w[b - 1]:
                out[m - 1] += x[a - 1] * w[b - 1] * c
        return out

    fields = []
    for i in range(n):
        w = [ring.zero] * n
        w[i] = ring.one
        total = list(w)
        for power in range(1, len(beta)):
            w = ad_x(w)
            if not any(w):
                break
            total = [t + wi * beta[power] for t, wi in zip(total, w, strict=True)]
        fields.append(PolyField(tuple(total)))
    return fields


def _certify(alg: StratifiedAlgebra, fields: list[PolyField]) -> None:
    n = alg.dim
    origin = [0] * n
    for i, fld in enumerate(fields, start=1):
        expected = tuple(Fraction(int(m == i)) for m in range(1, n + 1))
        if fld.value(origin) != expected:
            raise CertificationFailed(f"X̃_{i}(0) ≠ e_{i}")
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            lhs = poly_lie_bracket(fields[i - 1], fields[j - 1])
            rhs = PolyField.constant(origin)
            for m, c in alg.structure(i, j).items():
                rhs = rhs + fields[m - 1].scaled(c)
            if lhs != rhs:
                raise CertificationFailed(
                    f"[X̃_{i}, X̃_{j}] ≠ Σ c^m X̃_m"
                )


def nilpotent_frame(alg: StratifiedAlgebra, *, certify: bool = True) -> Frame:
    """Extensions invariantes à gauche de la base de 𝔤_1 sur ℝ^N.

    Les identités [X̃_i, X̃_j] = Σ c^m_ij X̃_m et X̃_i(0) = e_i sont
    vérifiées exactement sur toute la base (CertificationFailed sinon).
    """
    report = validate_algebra(alg)
    if not report.valid:
        raise InvalidAlgebra(report)
    fields = left_invariant_fields(alg)
    if certify:
        _certify(alg, fields)
        logging.info("Repère nilpotent certifié (N=%d)", alg.dim)
    return Frame(tuple(fields[: alg.layer_dims[0]]))


type Word = tuple[int, ...]


def _commutator(p: Mapping[Word, int], q: Mapping[Word, int]) -> dict[Word, int]:
    out: defaultdict[Word, int] = defaultdict(int)
    for w1, c1 in p.items():
        for w2, c2 in q.items():
            out[w1 + w2] += c1 * c2
            out[w2 + w1] -= c1 * c2
    return {w: c for w, c in out.items() if c}


def _associative_expansion(
    expr: BracketExpr, memo: dict[BracketExpr, dict[Word, int]]
) -> dict[Word, int]:
    """Image dans l'algèbre associative libre ([a,b] = ab − ba)."""
    if expr not in memo:
        if isinstance(expr, Leaf):
            memo[expr] = {(expr.generator,): 1}
        else:
            memo[expr] = _commutator(
                _associative_expansion(expr.left, memo),
                _associative_expansion(expr.right, memo),
            )
    return memo[expr]


def free_nilpotent_algebra(
    k: int, step: int, cap: int = DEFAULT_HALL_CAP
) -> StratifiedAlgebra:
    """Algèbre libre nilpotente de pas ``step`` sur k générateurs.

    La base est la base de Hall ; chaque [h_i, h_j] est décomposé sur la
    couche voulue par résolution exacte dans l'algèbre associative.
    """
    basis = hall_basis(k, step, cap)
    elements = basis.elements()
    index = {e: i for i, e in enumerate(elements, start=1)}
    memo: dict[BracketExpr, dict[Word, int]] = {}
    brackets: dict[tuple[int, int], dict[int, Fraction]] = {}
    for pos, a in enumerate(elements):
        for b in elements[pos + 1:]:
            length = a.length + b.length
            if length > step:
                continue
            target = _commutator(
                _associative_expansion(a, memo), _associative_expansion(b, memo)
            )
            if not target:
                continue
            layer = basis.layer(length)
            columns = [_associative_expansion(e, memo) for e in layer]
            words = sorted(set(target).union(*columns))
            matrix = [[Fraction(col.get(w, 0)) for col in columns] for w in words]
            coeffs = solve(matrix, [Fraction(target.get(w, 0)) for w in words])
            if coeffs is None:
                raise CertificationFailed(f"[{a},{b}] hors de la couche {length}")
            row = {index[e]: c for e, c in zip(layer, coeffs, strict=True) if c}
            if row:
                brackets[(index[a], index[b])] = row
    return StratifiedAlgebra(
        layer_dims=tuple(len(basis.layer(i)) for i in range(1, step + 1)),
        brackets=brackets,
        labels=tuple(str(e) for e in elements),
    )


def maximal_growth_algebra(
    k: int, n: int, cap: int = DEFAULT_HALL_CAP
) -> StratifiedAlgebra:
    """Quotient de l'algèbre libre réalisant le vecteur maximal (k, n).

    Seuls les n − 𝔫_{r−1} premiers éléments de la dernière couche sont
    gardés ; cette couche est centrale, le quotient reste une algèbre.
    """
    gv = maximal_growth_vector(k, n)
    free = free_nilpotent_algebra(k, gv.step, cap)
    if free.dim == n:
        return free
    brackets = {}
    for (i, j), row in free.brackets.items():
        if i > n or j > n:
            continue
        kept = {m: c for m, c in row.items() if m <= n}
        if kept:
            brackets[(i, j)] = kept
    return StratifiedAlgebra(
        layer_dims=(*free.layer_dims[:-1], n - gv.entries[-2]),
        brackets=brackets,
        labels=free.labels[:n],
    )
