"""Algèbre des coordonnées de jet u^j_{i,I}.

Polynômes différentiels à coefficients rationnels exacts, dérivations
directionnelles D_t et crochets de Lie formels. Un polynôme est un
dictionnaire creux monôme → coefficient ; un monôme est un tuple trié
de couples (indice de variable, exposant), l'indice renvoyant à
``JetSpace.variables``.

Convention d'imbrication : ``bracket((b1, …, bℓ))`` désigne
[F_b1,[F_b2,…[F_bℓ−1,F_bℓ]…]], l'indice de gauche est extérieur.
"""

from __future__ import annotations

import logging
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction
from functools import cache, cached_property
from itertools import combinations_with_replacement
from typing import TYPE_CHECKING, Any, Self

from .errors import DomainError, IncompleteJet, OrderOverflow
from .freelie import BracketExpr, Leaf, right_nested
from .linalg import Vector, poly_value

if TYPE_CHECKING:
    from .flags import Frame

type Scalar = Fraction | int
type Monomial = tuple[tuple[int, int], ...]
type Terms = dict[Monomial, Scalar]


@dataclass(frozen=True, order=True)
class JetVar:
    """Coordonnée u^component_{field_index, derivative}."""

    field_index: int
    component: int
    derivative: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        """Stockage canonique (multi-indice trié)."""
        object.__setattr__(self, "derivative", tuple(sorted(self.derivative)))

    @property
    def order(self) -> int:
        """|I|."""
        return len(self.derivative)

    def differentiated(self, t: int) -> JetVar:
        """D_t(u^j_{i,J}) = u^j_{i,(J,t)}."""
        return JetVar(self.field_index, self.component, (*self.derivative, t))

    def __str__(self) -> str:
        """Notation u^j_{i,(I)}."""
        idx = ",".join(map(str, self.derivative))
        return f"u^{self.component}_{{{self.field_index},({idx})}}"


def multi_indices(n: int, max_size: int) -> list[tuple[int, ...]]:
    """Multi-indices non ordonnés sur 1..n de taille ≤ max_size."""
    return [
        combo
        for size in range(max_size + 1)
        for combo in combinations_with_replacement(range(1, n + 1), size)
    ]


@cache
def _variables(k: int, n: int, r: int) -> tuple[JetVar, ...]:
    derivatives = multi_indices(n, r - 1)
    return tuple(
        JetVar(i, j, d)
        for i in range(1, k + 1)
        for j in range(1, n + 1)
        for d in derivatives
    )


@cache
def _index(k: int, n: int, r: int) -> dict[JetVar, int]:
    return {v: idx for idx, v in enumerate(_variables(k, n, r))}


@cache
def _shift(k: int, n: int, r: int) -> tuple[tuple[int, ...], ...]:
    """shift[idx][t−1] : indice de D_t(variable idx), −1 au-delà de r−1."""
    index = _index(k, n, r)
    return tuple(
        tuple(index.get(v.differentiated(t), -1) for t in range(1, n + 1))
        for v in _variables(k, n, r)
    )


@dataclass(frozen=True)
class JetSpace:
    """Paramètres (k, n, r) : k champs sur ℝⁿ, jets d'ordre r−1."""

    k: int
    n: int
    r: int

    def __post_init__(self) -> None:
        """k, n, r ≥ 1."""
        if min(self.k, self.n, self.r) < 1:
            raise DomainError(f"JetSpace invalide: {self}")

    @property
    def variables(self) -> tuple[JetVar, ...]:
        """Toutes les variables, dans l'ordre des indices."""
        return _variables(self.k, self.n, self.r)

    def index(self, var: JetVar) -> int:
        """Indice de ``var`` ; OrderOverflow si hors budget."""
        try:
            return _index(self.k, self.n, self.r)[var]
        except KeyError:
            if var.order > self.r - 1:
                raise OrderOverflow(
                    f"{var} dépasse l'ordre {self.r - 1}"
                ) from None
            raise DomainError(f"{var} hors de {self}") from None


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    merged = dict(a)
    for idx, exp in b:
        merged[idx] = merged.get(idx, 0) + exp
    return tuple(sorted(merged.items()))


def _accumulate(acc: Terms, monom: Monomial, coeff: Scalar) -> None:
    total = acc.get(monom, 0) + coeff
    if total:
        acc[monom] = total
    else:
        acc.pop(monom, None)


def _add_product(
    acc: Terms, p: Mapping[Monomial, Scalar], q: Mapping[Monomial, Scalar],
    sign: int = 1,
) -> None:
    for m1, c1 in p.items():
        for m2, c2 in q.items():
            _accumulate(acc, _mono_mul(m1, m2), sign * c1 * c2)


@dataclass(frozen=True)
class DiffPoly:
    """Polynôme différentiel (aucun coefficient nul stocké)."""

    space: JetSpace
    coeffs: Mapping[Monomial, Scalar]

    @classmethod
    def constant(cls, space: JetSpace, value: Scalar) -> Self:
        """Polynôme constant."""
        return cls(space, {(): value} if value else {})

    @classmethod
    def var(cls, space: JetSpace, var: JetVar) -> Self:
        """Variable de jet isolée."""
        return cls(space, {((space.index(var), 1),): 1})

    def _coerce(self, other: DiffPoly | Scalar) -> Mapping[Monomial, Scalar]:
        if isinstance(other, DiffPoly):
            if other.space != self.space:
                raise DomainError("espaces de jets différents")
            return other.coeffs
        return {(): other} if other else {}

    def _combine(self, other: DiffPoly | Scalar, sign: int) -> DiffPoly:
        acc = dict(self.coeffs)
        for monom, coeff in self._coerce(other).items():
            _accumulate(acc, monom, sign * coeff)
        return DiffPoly(self.space, acc)

    def __add__(self, other: DiffPoly | Scalar) -> DiffPoly:
        """Somme."""
        return self._combine(other, 1)

    def __sub__(self, other: DiffPoly | Scalar) -> DiffPoly:
        """Différence."""
        return self._combine(other, -1)

    def __mul__(self, other: DiffPoly | Scalar) -> DiffPoly:
        """Produit."""
        acc: Terms = {}
        _add_product(acc, self.coeffs, self._coerce(other))
        return DiffPoly(self.space, acc)

    __rmul__ = __mul__

    def __neg__(self) -> DiffPoly:
        """Opposé."""
        return DiffPoly(self.space, {m: -c for m, c in self.coeffs.items()})

    def __bool__(self) -> bool:
        """Faux pour le polynôme nul."""
        return bool(self.coeffs)

    def variables(self) -> set[JetVar]:
        """Variables effectivement présentes."""
        variables = self.space.variables
        return {variables[idx] for monom in self.coeffs for idx, _ in monom}

    @property
    def order(self) -> int:
        """Ordre max des variables présentes (0 pour une constante)."""
        return max((v.order for v in self.variables()), default=0)

    def terms(self) -> list[tuple[tuple[tuple[JetVar, int], ...], Fraction]]:
        """Monômes par degré total décroissant."""
        variables = self.space.variables
        ordered = sorted(
            self.coeffs.items(),
            key=lambda item: (sum(e for _, e in item[0]), item[0]),
            reverse=True,
        )
        return [
            (tuple((variables[idx], exp) for idx, exp in monom), Fraction(coeff))
            for monom, coeff in ordered
        ]

    def __str__(self) -> str:
        """Forme développée lisible."""
        if not self.coeffs:
            return "0"
        parts = []
        for monom, coeff in self.terms():
            factors = [
                str(v) if e == 1 else f"{v}^{e}" for v, e in monom
            ]
            parts.append("*".join([str(coeff), *factors]) if factors else str(coeff))
        return " + ".join(parts)


@dataclass(frozen=True)
class DiffVec:
    """Σ P_i ∂_i avec P_i différentiels."""

    components: tuple[DiffPoly, ...]

    @property
    def space(self) -> JetSpace:
        """Espace commun des composantes."""
        return self.components[0].space

    @classmethod
    def zero(cls, space: JetSpace) -> Self:
        """Champ formel nul."""
        return cls(tuple(DiffPoly.constant(space, 0) for _ in range(space.n)))

    def __add__(self, other: DiffVec) -> DiffVec:
        """Somme composante par composante."""
        return DiffVec(
            tuple(a + b for a, b in zip(self.components, other.components, strict=True))
        )

    def __sub__(self, other: DiffVec) -> DiffVec:
        """Différence composante par composante."""
        return DiffVec(
            tuple(a - b for a, b in zip(self.components, other.components, strict=True))
        )

    def is_zero(self) -> bool:
        """Vrai si toutes les composantes sont nulles."""
        return not any(self.components)

    def variables(self) -> set[JetVar]:
        """Union des variables des composantes."""
        return set().union(*(c.variables() for c in self.components))

    @property
    def order(self) -> int:
        """Ordre max sur les composantes."""
        return max(c.order for c in self.components)


def derive(p: DiffPoly, t: int) -> DiffPoly:
    """Dérivation directionnelle D_t (linéaire, Leibniz)."""
    space = p.space
    if not 1 <= t <= space.n:
        raise DomainError(f"direction {t} hors de 1..{space.n}")
    shift = _shift(space.k, space.n, space.r)
    acc: Terms = {}
    for monom, coeff in p.coeffs.items():
        for pos, (idx, exp) in enumerate(monom):
            target = shift[idx][t - 1]
            if target < 0:
                raise OrderOverflow(
                    f"D_{t} indéfinie à l'ordre {space.r - 1} "
                    f"({space.variables[idx]})"
                )
            rest = (
                (*monom[:pos], (idx, exp - 1), *monom[pos + 1:])
                if exp > 1
                else (*monom[:pos], *monom[pos + 1:])
            )
            _accumulate(acc, _mono_mul(rest, ((target, 1),)), coeff * exp)
    return DiffPoly(space, acc)


type Jacobian = tuple[tuple[DiffPoly, ...], ...]


def _jacobian(v: DiffVec) -> Jacobian:
    """jac[i][j] = D_{j+1}(v^i)."""
    n = v.space.n
    return tuple(
        tuple(derive(c, t) for t in range(1, n + 1)) for c in v.components
    )


def _lie(a: DiffVec, b: DiffVec, da: Jacobian, db: Jacobian) -> DiffVec:
    space = a.space
    n = space.n
    comps = []
    for i in range(n):
        acc: Terms = {}
        for j in range(n):
            _add_product(acc, a.components[j].coeffs, db[i][j].coeffs)
            _add_product(acc, b.components[j].coeffs, da[i][j].coeffs, -1)
        comps.append(DiffPoly(space, acc))
    return DiffVec(tuple(comps))


def lie(a: DiffVec, b: DiffVec) -> DiffVec:
    """Crochet formel : C^i = Σ_j a^j D_j(b^i) − b^j D_j(a^i)."""
    return _lie(a, b, _jacobian(a), _jacobian(b))


def generator_field(space: JetSpace, a: int) -> DiffVec:
    """A_(a) = Σ_i u^i_{a,()} ∂_i."""
    if not 1 <= a <= space.k:
        raise DomainError(f"champ {a} hors de 1..{space.k}")
    return DiffVec(
        tuple(DiffPoly.var(space, JetVar(a, i)) for i in range(1, space.n + 1))
    )


@cache
def tree_bracket(expr: BracketExpr, space: JetSpace) -> DiffVec:
    """Crochet formel d'une expression de crochets quelconque."""
    if expr.length > space.r:
        raise OrderOverflow(f"longueur {expr.length} > r = {space.r}")
    if isinstance(expr, Leaf):
        return generator_field(space, expr.generator)
    return _lie(
        tree_bracket(expr.left, space),
        tree_bracket(expr.right, space),
        _tree_jacobian(expr.left, space),
        _tree_jacobian(expr.right, space),
    )


@cache
def _tree_jacobian(expr: BracketExpr, space: JetSpace) -> Jacobian:
    # Partagé entre tous les crochets qui contiennent ``expr``
    return _jacobian(tree_bracket(expr, space))


def bracket(indices: Sequence[int], space: JetSpace) -> DiffVec:
    """A_I pour un multi-indice ordonné I (imbrication à droite)."""
    multi = tuple(indices)
    if not multi:
        raise DomainError("multi-indice vide")
    if len(multi) > space.r:
        raise OrderOverflow(f"|I| = {len(multi)} > r = {space.r}")
    logging.debug("Crochet formel %s dans %s", multi, space)
    return tree_bracket(right_nested(multi), space)


def max_order(p: DiffPoly | DiffVec) -> int:
    """Ordre d'un polynôme ou d'un champ différentiel."""
    return p.order


def pure_t_vars(v: DiffVec | DiffPoly, t: int, m: int) -> set[JetVar]:
    """Variables présentes dont le multi-indice est (t, …, t), m fois."""
    target = (t,) * m
    return {var for var in v.variables() if var.derivative == target}


def substitute(
    p: DiffPoly, assignment: Mapping[JetVar, Scalar | DiffPoly]
) -> DiffPoly:
    """Substitution simultanée ; les variables non assignées restent."""
    space = p.space
    replacements: dict[int, Mapping[Monomial, Scalar]] = {}
    for var, value in assignment.items():
        if isinstance(value, DiffPoly):
            if value.space != space:
                raise DomainError("substitution depuis un autre espace")
            replacements[space.index(var)] = value.coeffs
        else:
            replacements[space.index(var)] = {(): value} if value else {}
    if not replacements:
        return p
    acc: Terms = {}
    for monom, coeff in p.coeffs.items():
        kept = tuple((idx, e) for idx, e in monom if idx not in replacements)
        piece: Terms = {kept: coeff}
        for idx, exp in monom:
            for _ in range(exp if idx in replacements else 0):
                product: Terms = {}
                _add_product(product, piece, replacements[idx])
                piece = product
        for m, c in piece.items():
            _accumulate(acc, m, c)
    return DiffPoly(space, acc)


def substitute_vec(
    v: DiffVec, assignment: Mapping[JetVar, Scalar | DiffPoly]
) -> DiffVec:
    """``substitute`` composante par composante."""
    return DiffVec(tuple(substitute(c, assignment) for c in v.components))


@dataclass(frozen=True, eq=False)
class JetPoint:
    """Point de J^{r−1} : base x et valeurs de toutes les u^j_{i,I}."""

    space: JetSpace
    base: Vector
    values: Mapping[JetVar, Fraction]

    def __post_init__(self) -> None:
        """Affectation totale sur l'espace."""
        if len(self.base) != self.space.n:
            raise DomainError("point de base de mauvaise dimension")
        missing = [v for v in self.space.variables if v not in self.values]
        if missing:
            raise IncompleteJet(f"{len(missing)} variables manquantes, ex. {missing[0]}")

    @cached_property
    def table(self) -> tuple[Fraction, ...]:
        """Valeurs rangées selon ``space.variables``."""
        return tuple(self.values[v] for v in self.space.variables)

    @classmethod
    def from_zero_jet(
        cls, space: JetSpace, zero_jet: Sequence[Sequence[Scalar]],
        base: Sequence[Scalar] | None = None,
    ) -> Self:
        """Jet dont toutes les dérivées sont nulles."""
        values = {
            v: Fraction(zero_jet[v.field_index - 1][v.component - 1])
            if v.order == 0 else Fraction(0)
            for v in space.variables
        }
        point = tuple(Fraction(x) for x in (base or [0] * space.n))
        return cls(space, point, values)

    def field_values(self) -> list[Vector]:
        """0-jet : valeurs des k champs."""
        return [
            pure_derivative_extract(self, i, 1, 0)
            for i in range(1, self.space.k + 1)
        ]


def _lookup(
    space: JetSpace, point: JetPoint, used: set[JetVar]
) -> Callable[[int], Fraction]:
    if space == point.space:
        return point.table.__getitem__
    missing = sorted(used - point.values.keys())
    if missing:
        raise IncompleteJet(f"{missing[0]} absente du jet")
    variables = space.variables
    return lambda idx: point.values[variables[idx]]


def _value(coeffs: Mapping[Monomial, Scalar], lookup: Callable[[int], Fraction]) -> Fraction:
    total = Fraction(0)
    for monom, coeff in coeffs.items():
        term: Scalar = coeff
        for idx, exp in monom:
            x = lookup(idx)
            if not x:
                break
            term = term * (x if exp == 1 else x**exp)
        else:
            total += term
    return total


def evaluate_poly(p: DiffPoly, point: JetPoint) -> Fraction:
    """Valeur exacte d'un polynôme différentiel en un jet."""
    return _value(p.coeffs, _lookup(p.space, point, p.variables()))


def evaluate(v: DiffVec, point: JetPoint) -> Vector:
    """Valeur exacte A(F) ∈ ℚⁿ."""
    lookup = _lookup(v.space, point, v.variables())
    return tuple(_value(c.coeffs, lookup) for c in v.components)


def pure_derivative_extract(
    point: JetPoint, i: int, t: int, m: int
) -> Vector:
    """P^m_t(F_i) = (u^1_{i,(t…t)}, …, u^n_{i,(t…t)})."""
    if m > point.space.r - 1:
        raise OrderOverflow(f"ordre {m} > {point.space.r - 1}")
    wanted = [JetVar(i, j, (t,) * m) for j in range(1, point.space.n + 1)]
    try:
        return tuple(point.values[var] for var in wanted)
    except KeyError as err:
        raise IncompleteJet(f"{err.args[0]} absente du jet") from None


def jet_of_frame(frame: Frame, p: Sequence[Scalar], order: int) -> JetPoint:
    """j^order du repère en p : dérivées partielles exactes."""
    space = JetSpace(frame.rank, frame.dim, order + 1)
    point = tuple(Fraction(x) for x in p)
    gens = frame.ring.gens
    values: dict[JetVar, Fraction] = {}
    for i, fld in enumerate(frame.fields, start=1):
        for j, comp in enumerate(fld.components, start=1):
            derived: dict[tuple[int, ...], Any] = {(): comp}
            for multi in multi_indices(space.n, order):
                if multi:
                    derived[multi] = derived[multi[:-1]].diff(gens[multi[-1] - 1])
                values[JetVar(i, j, multi)] = poly_value(
                    derived[multi], point.__getitem__
                )
    return JetPoint(space, point, values)


def all_multi_indices(k: int, length: int) -> Iterable[tuple[int, ...]]:
    """Tous les multi-indices ordonnés de longueur ``length`` sur 1..k."""
    if length == 0:
        yield ()
        return
    for head in range(1, k + 1):
        for tail in all_multi_indices(k, length - 1):
            yield (head, *tail)
