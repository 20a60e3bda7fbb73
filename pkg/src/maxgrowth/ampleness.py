"""Amplitude des tranches de sous-espaces principaux.

Classification des espaces de matrices à colonnes fixées, décompositions
convexes explicites dans GL(n), obstruction hyperplane, repères adaptés
et analyse de cas ordre par ordre pour un repère à croissance maximale.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from enum import StrEnum
from fractions import Fraction
from itertools import count

import numpy as np
from pydantic import BaseModel
from scipy.optimize import linprog

from .errors import (
    CertificationFailed,
    CrossCheckFailed,
    DegenerateFrame,
    DomainError,
    InconsistentFormalSolution,
    NormalDirection,
    NotAmple,
    NotFormalSolution,
    Unclassified,
)
from .flags import (
    DEBUG_MAX_LENGTH,
    DEBUG_MAX_RANK,
    AffineMap,
    FieldEvaluator,
    Frame,
    lie_flag,
    pushforward,
)
from .freelie import (
    DEFAULT_HALL_CAP,
    BracketExpr,
    hall_basis,
    maximal_growth_vector,
    multidegree,
    right_nested,
)
from .jetalg import all_multi_indices
from .linalg import (
    Matrix,
    Vector,
    det,
    dot,
    identity,
    nullspace,
    pivot_columns,
    rank,
    solve,
    transpose,
)

# Seuil de support pour la solution flottante de linprog
_SUPPORT_TOL = 1e-9
_MAX_EPSILON_TRIES = 8


class Verdict(StrEnum):
    """Verdict d'amplitude d'une tranche."""

    EMPTY_TRIVIALLY_AMPLE = "EmptyTriviallyAmple"
    TRIVIALLY_AMPLE_FULL = "TriviallyAmpleFull"
    AMPLE_THIN_COMPLEMENT = "AmpleThinComplement"
    AMPLE_NON_THIN = "AmpleNonThin"
    NOT_AMPLE_HYPERPLANE = "NotAmpleHyperplane"


# Du plus favorable au plus défavorable
SEVERITY = (
    Verdict.EMPTY_TRIVIALLY_AMPLE,
    Verdict.TRIVIALLY_AMPLE_FULL,
    Verdict.AMPLE_THIN_COMPLEMENT,
    Verdict.AMPLE_NON_THIN,
    Verdict.NOT_AMPLE_HYPERPLANE,
)


def _sign(x: Fraction) -> int:
    return (x > 0) - (x < 0)


@dataclass(frozen=True)
class MatrixSpaceSpec:
    """Matrices ℓ×q dont les k premières colonnes sont fixées, rang ρ."""

    rows: int
    cols: int
    fixed_columns: tuple[Vector, ...]
    required_rank: int

    def __post_init__(self) -> None:
        """k ≤ q, ρ ≤ min(ℓ, q), colonnes de longueur ℓ."""
        if self.fixed_count > self.cols:
            raise DomainError(f"k = {self.fixed_count} > q = {self.cols}")
        if not 0 <= self.required_rank <= min(self.rows, self.cols):
            raise DomainError(f"rang requis {self.required_rank} invalide")
        if any(len(c) != self.rows for c in self.fixed_columns):
            raise DomainError("colonne fixée de mauvaise longueur")

    @property
    def fixed_count(self) -> int:
        """k."""
        return len(self.fixed_columns)

    @property
    def square(self) -> bool:
        """ℓ = q."""
        return self.rows == self.cols


def classify_matrix_space(spec: MatrixSpaceSpec) -> Verdict:  # noqa: PLR0911
    """Verdict pour l'ensemble des matrices de rang maximal de ``spec``."""
    ell, q, k = spec.rows, spec.cols, spec.fixed_count
    rho = spec.required_rank
    if rho != min(ell, q):
        raise Unclassified(f"rang requis {rho} non maximal (ℓ={ell}, q={q})")
    s = rank(spec.fixed_columns)
    free = q - k
    if s + free < rho:
        return Verdict.EMPTY_TRIVIALLY_AMPLE
    if s == rho:
        return Verdict.TRIVIALLY_AMPLE_FULL
    if s < k:
        raise Unclassified(
            f"colonnes fixées liées sans vider l'ensemble (ℓ={ell}, q={q}, k={k})"
        )
    if not spec.square:
        return Verdict.AMPLE_THIN_COMPLEMENT
    if free >= 2:  # noqa: PLR2004
        return Verdict.AMPLE_NON_THIN
    return Verdict.NOT_AMPLE_HYPERPLANE


@dataclass(frozen=True)
class ConvexWitness:
    """Combinaison convexe explicite (poids, matrice)."""

    members: tuple[tuple[Fraction, Matrix], ...]

    def average(self) -> Matrix:
        """Σ poids · matrice."""
        rows = len(self.members[0][1])
        cols = len(self.members[0][1][0])
        return tuple(
            tuple(
                sum((w * m[i][j] for w, m in self.members), Fraction(0))
                for j in range(cols)
            )
            for i in range(rows)
        )

    def is_valid(self, target: Matrix, sign: int | None = None) -> bool:
        """Poids > 0 de somme 1, moyenne exacte, signes des dét. attendus."""
        weights = [w for w, _ in self.members]
        if any(w <= 0 for w in weights) or sum(weights) != 1:
            return False
        if self.average() != target:
            return False
        if sign is None:
            return True
        return all(_sign(det(m)) == sign for _, m in self.members)


def _columns_to_matrix(columns: Sequence[Vector]) -> Matrix:
    return transpose(columns)


def _two_column_split(
    m: Matrix, epsilon: Fraction, pair: tuple[int, int]
) -> tuple[Matrix, Matrix]:
    """M_1 = (…(2+ε)v_a…−εv_b…), M_2 = (…−εv_a…(2+ε)v_b…)."""
    a, b = pair
    cols = list(transpose(m))
    big, small = 2 + epsilon, -epsilon
    first, second = list(cols), list(cols)
    first[a] = tuple(big * x for x in cols[a])
    first[b] = tuple(small * x for x in cols[b])
    second[a] = tuple(small * x for x in cols[a])
    second[b] = tuple(big * x for x in cols[b])
    return _columns_to_matrix(first), _columns_to_matrix(second)


def _split_nonsingular(
    m: Matrix, pair: tuple[int, int], epsilon: Fraction
) -> list[tuple[Fraction, Matrix]]:
    """Deux matrices de signe opposé à det(M), moyenne M."""
    target = -_sign(det(m))
    eps = epsilon
    for _ in range(_MAX_EPSILON_TRIES):
        m1, m2 = _two_column_split(m, eps, pair)
        if _sign(det(m1)) == target and _sign(det(m2)) == target:
            half = Fraction(1, 2)
            return [(half, m1), (half, m2)]
        eps += 1
    raise CertificationFailed("aucun ε ne donne deux membres réguliers")


def gl_convex_decomposition(
    m: Sequence[Sequence[Fraction | int]],
    *,
    sign: int | None = None,
    epsilon: Fraction | int = 1,
    pair: tuple[int, int] = (0, 1),
) -> ConvexWitness:
    """Écrit M comme moyenne de matrices inversibles de même signe.

    Par défaut : signe opposé à det(M) si M est inversible, positif si M
    est singulière (décalage M = ½·2(M − μI) + ½·2μI).
    """
    matrix: Matrix = tuple(tuple(Fraction(x) for x in row) for row in m)
    n = len(matrix)
    if n < 2:  # noqa: PLR2004
        raise NotAmple("n = 1 : GL(1) a deux composantes demi-droites")
    eps = Fraction(epsilon)
    d = det(matrix)
    if d:
        wanted = sign if sign is not None else -_sign(d)
        members = (
            [(Fraction(1), matrix)]
            if wanted == _sign(d)
            else _split_nonsingular(matrix, pair, eps)
        )
    else:
        wanted = sign if sign is not None else 1
        ident = identity(n)
        mu = next(
            Fraction(mu)
            for mu in count(1)
            if det(_affine(matrix, ident, Fraction(1), -mu))
        )
        logging.debug("Décalage singulier μ = %s", mu)
        halves = (
            _affine(matrix, ident, Fraction(2), -2 * mu),
            _affine(matrix, ident, Fraction(0), 2 * mu),
        )
        members = []
        for part in halves:
            if _sign(det(part)) == wanted:
                members.append((Fraction(1, 2), part))
            else:
                members.extend(
                    (w / 2, piece)
                    for w, piece in _split_nonsingular(part, pair, eps)
                )
    witness = ConvexWitness(tuple(members))
    if not witness.is_valid(matrix, wanted):
        raise CertificationFailed("témoin convexe invalide")
    return witness


def _affine(m: Matrix, ident: Matrix, a: Fraction, b: Fraction) -> Matrix:
    """a·M + b·I."""
    return tuple(
        tuple(a * x + b * y for x, y in zip(row, irow, strict=True))
        for row, irow in zip(m, ident, strict=True)
    )


@dataclass(frozen=True)
class LinearFunctional:
    """w ↦ Σ c_i w_i + constante."""

    coefficients: Vector
    constant: Fraction = field(default=Fraction(0))

    def __call__(self, w: Sequence[Fraction | int]) -> Fraction:
        """Évaluation exacte."""
        return self.constant + dot(self.coefficients, [Fraction(x) for x in w])

    def is_zero(self) -> bool:
        """Vrai pour la fonctionnelle nulle."""
        return not any(self.coefficients) and not self.constant


def det_affine_in_free_column(
    fixed: Sequence[Sequence[Fraction | int]],
) -> LinearFunctional:
    """Cofacteurs de w ↦ det(fixed | w), fixed étant n×(n−1)."""
    rows = [tuple(Fraction(x) for x in row) for row in fixed]
    n = len(rows)
    if n == 1:
        return LinearFunctional((Fraction(1),))
    if any(len(row) != n - 1 for row in rows):
        raise DomainError("la matrice fixée doit être n×(n−1)")
    coeffs = tuple(
        (-1) ** (i + n - 1) * det(rows[:i] + rows[i + 1:])
        for i in range(n)
    )
    return LinearFunctional(coeffs)


def hull_membership_witness(
    spec: MatrixSpaceSpec,
    target: Sequence[Sequence[Fraction | int]],
    sign: int,
    budget: int,
    seed: int,
) -> ConvexWitness | None:
    """Cherche ``target`` dans l'enveloppe convexe d'une composante.

    La composante est celle des matrices de ``spec`` (cas carré) dont le
    déterminant a le signe ``sign``. None signifie « non trouvé » et
    n'est pas une preuve d'absence.
    """
    if not spec.square:
        raise DomainError("hull_membership_witness suppose ℓ = q")
    matrix: Matrix = tuple(tuple(Fraction(x) for x in row) for row in target)
    k, q = spec.fixed_count, spec.cols
    cols = transpose(matrix)
    if tuple(cols[:k]) != spec.fixed_columns:
        logging.info("Cible incompatible avec les colonnes fixées")
        return None
    d = det(matrix)
    if _sign(d) == sign:
        return ConvexWitness(((Fraction(1), matrix),))
    if d and q - k >= 2:  # noqa: PLR2004
        witness = gl_convex_decomposition(matrix, sign=sign, pair=(k, k + 1))
        if witness.is_valid(matrix, sign):
            return witness
    return _sampled_witness(spec, matrix, sign, budget, seed)


def _sampled_witness(
    spec: MatrixSpaceSpec, matrix: Matrix, sign: int, budget: int, seed: int
) -> ConvexWitness | None:
    """Échantillonnage signé puis résolution exacte sur le support."""
    ell, k, q = spec.rows, spec.fixed_count, spec.cols
    free = q - k
    if free == 0 or budget < 1:
        return None
    rng = np.random.default_rng(seed)
    bound = 2 * int(max((abs(x) for row in matrix for x in row), default=1)) + 2
    samples = rng.integers(-bound, bound + 1, size=(budget, ell, free))
    fixed = np.array(
        [[float(c[i]) for c in spec.fixed_columns] for i in range(ell)]
    ).reshape(ell, k)
    full = np.concatenate(
        [np.broadcast_to(fixed, (budget, ell, k)), samples], axis=2
    )
    dets = np.linalg.det(full)
    keep = np.flatnonzero(sign * dets > _SUPPORT_TOL)
    if keep.size == 0:
        return None
    free_target = np.array(
        [[float(matrix[i][k + j]) for j in range(free)] for i in range(ell)]
    ).ravel()
    a_eq = np.vstack(
        [samples[keep].reshape(keep.size, ell * free).T, np.ones(keep.size)]
    )
    b_eq = np.append(free_target, 1.0)
    result = linprog(
        np.zeros(keep.size), A_eq=a_eq, b_eq=b_eq, bounds=(0, None),
        method="highs",
    )
    if result.status != 0:
        logging.info("Aucune combinaison convexe trouvée (%s)", result.message)
        return None
    support = keep[np.flatnonzero(result.x > _SUPPORT_TOL)]
    members = [
        tuple(
            tuple(
                spec.fixed_columns[j][i] if j < k
                else Fraction(int(samples[s, i, j - k]))
                for j in range(q)
            )
            for i in range(ell)
        )
        for s in support
    ]
    system = [
        [m[i][k + j] for m in members]
        for i in range(ell)
        for j in range(free)
    ] + [[Fraction(1)] * len(members)]
    rhs = [matrix[i][k + j] for i in range(ell) for j in range(free)]
    weights = solve(system, [*rhs, Fraction(1)])
    if weights is None:
        return None
    witness = ConvexWitness(
        tuple((w, m) for w, m in zip(weights, members, strict=True) if w)
    )
    return witness if witness.is_valid(matrix, sign) else None


def _adapted_matrix(values: Sequence[Vector], v: Vector) -> Matrix:
    """G (k×k) : colonne 1 = projection de v, ⟨X_1, v⟩ = 1, puis X_1^⊥."""
    if not any(v):
        raise DomainError("direction nulle")
    k = len(values)
    if rank(values) < k:
        raise DegenerateFrame("valeurs du repère liées")
    gram = [[dot(a, b) for b in values] for a in values]
    vt_v = [dot(a, v) for a in values]
    if not any(vt_v):
        raise NormalDirection(f"{v} est orthogonal à 𝒟")
    coeffs = solve(gram, vt_v)
    if coeffs is None:
        raise DegenerateFrame("matrice de Gram singulière")
    proj_sq = dot(coeffs, vt_v)
    first = tuple(c / proj_sq for c in coeffs)
    others = nullspace([vt_v], k)
    return transpose([first, *others])


def adapted_frame(
    frame: Frame, p: Sequence[Fraction | int], v: Sequence[Fraction | int]
) -> tuple[Vector, ...]:
    """Valeurs en p du repère adapté à la direction v."""
    values = frame.values(p)
    g = _adapted_matrix(values, tuple(Fraction(x) for x in v))
    n = frame.dim
    return tuple(
        tuple(
            sum((g[a][b] * values[a][i] for a in range(len(values))), Fraction(0))
            for i in range(n)
        )
        for b in range(len(values))
    )


def direction_chart(v: Sequence[Fraction | int]) -> AffineMap:
    """Carte linéaire rationnelle : coordonnée t = ⟨v, ·⟩, puis v^⊥."""
    direction = tuple(Fraction(x) for x in v)
    if not any(direction):
        raise DomainError("direction nulle")
    rows = [direction, *nullspace([direction], len(direction))]
    return AffineMap.of(rows)


class SliceReport(BaseModel):
    """Verdict d'amplitude à l'ordre i."""

    order: int
    m_i: int | None
    n_i: int
    verdict: Verdict
    normal: bool
    t_rank: int | None = None


def _is_pure_t(expr: BracketExpr, length: int) -> bool:
    """Multidegré (t^{length−1}, m) avec m ≠ t, t étant le champ 1."""
    md = multidegree(expr)
    others = sum(c for g, c in md.items() if g != 1)
    return expr.length == length and md[1] == length - 1 and others == 1


def _slice_verdict(
    order: int,
    step: int,
    k: int,
    n: int,
    n_i: int,
    perp_basis: Sequence[Vector],
) -> Verdict:
    m_i = len(perp_basis)
    q = m_i + k - 1
    if order < step:
        if q != n_i:
            raise NotFormalSolution(
                f"ordre {order}: m_i + k − 1 = {q} ≠ 𝔫_i = {n_i}"
            )
        rho = q
    else:
        if n > q:
            raise InconsistentFormalSolution(
                f"n = {n} > m_r + k − 1 = {q}"
            )
        rho = n
    spec = MatrixSpaceSpec(
        rows=n, cols=q, fixed_columns=tuple(perp_basis), required_rank=rho
    )
    return classify_matrix_space(spec)


def _debug_perp_rank(
    evaluator: FieldEvaluator, point: Vector, order: int
) -> int:
    """Rang de 𝒟^i_⊥ sur tous les multi-indices ordonnés."""
    k = evaluator.frame.rank
    values = []
    for length in range(1, order + 1):
        for multi in all_multi_indices(k, length):
            pure = (
                length == order
                and multi.count(1) == order - 1
                and len(multi) - multi.count(1) == 1
            )
            if not pure:
                values.append(evaluator.field(right_nested(multi)).value(point))
    return rank(values)


def slice_report(  # noqa: PLR0913
    frame: Frame,
    p: Sequence[Fraction | int],
    v: Sequence[Fraction | int],
    step: int | None = None,
    *,
    debug: bool = False,
    cap: int = DEFAULT_HALL_CAP,
) -> list[SliceReport]:
    """Analyse de cas pour i = 1..r le long de la direction v.

    Direction normale : une ligne TriviallyAmpleFull par ordre i ≤ r − 1.
    """
    k, n = frame.rank, frame.dim
    if k < 2:  # noqa: PLR2004
        raise NotFormalSolution(f"rang {k} < 2 : aucune croissance maximale")
    gv = maximal_growth_vector(k, n)
    r = step if step is not None else gv.step
    if r != gv.step:
        raise NotFormalSolution(f"pas {r} ≠ pas maximal {gv.step}")
    flag = lie_flag(frame, p, r, cap=cap)
    if not flag.maximal:
        raise NotFormalSolution(f"croissance {flag.dims} non maximale {gv}")
    direction = tuple(Fraction(x) for x in v)
    if len(direction) != n or not any(direction):
        raise DomainError("direction nulle ou de mauvaise dimension")
    if not any(dot(val, direction) for val in frame.values(p)):
        logging.info("Direction normale : tranches trivialement amples")
        return [
            SliceReport(
                order=i, m_i=None, n_i=gv.entries[i - 1],
                verdict=Verdict.TRIVIALLY_AMPLE_FULL, normal=True,
            )
            for i in range(1, r)
        ]
    adapted = frame.recombine(_adapted_matrix(frame.values(p), direction))
    chart = direction_chart(direction)
    moved = pushforward(adapted, chart)
    point = chart(p)
    evaluator = FieldEvaluator(moved)
    basis = hall_basis(k, r, cap)
    reports = []
    for order in range(1, r + 1):
        perp = [
            evaluator.field(e).value(point)
            for e in basis.elements()
            if e.length < order
            or (e.length == order and not _is_pure_t(e, order))
        ]
        pure = [
            evaluator.field(e).value(point)
            for e in basis.layer(order)
            if _is_pure_t(e, order)
        ]
        perp_basis = [perp[i] for i in pivot_columns(perp)]
        if debug and k <= DEBUG_MAX_RANK and order <= DEBUG_MAX_LENGTH:
            full = _debug_perp_rank(evaluator, point, order)
            if full != len(perp_basis):
                raise CrossCheckFailed(
                    f"ordre {order}: rang Hall {len(perp_basis)} ≠ {full}"
                )
        n_i = gv.entries[order - 1]
        verdict = _slice_verdict(order, r, k, n, n_i, perp_basis)
        logging.debug("Tranche %d: m_i=%d verdict=%s", order, len(perp_basis), verdict)
        reports.append(
            SliceReport(
                order=order,
                m_i=len(perp_basis),
                n_i=n_i,
                verdict=verdict,
                normal=False,
                t_rank=rank(pure),
            )
        )
    return reports


class VerdictRow(BaseModel):
    """Ligne du tableau générique."""

    order: int
    m_i: int
    n_i: int
    verdict: Verdict


class AmplenessTable(BaseModel):
    """Classification générique pour (k, n)."""

    rank: int
    dim: int
    growth: tuple[int, ...]
    rows: list[VerdictRow]
    final_verdict: Verdict
    ample: bool


def generic_verdict_table(k: int, n: int) -> AmplenessTable:
    """Tableau des verdicts indépendant du repère.

    Pour i < r, m_i = 𝔫_i − k + 1 ; pour i = r toutes les valeurs de m_r
    compatibles avec 𝔫_{r−1} ≤ m_r ≤ n et n ≤ m_r + k − 1.
    """
    gv = maximal_growth_vector(k, n)
    r = gv.step
    rows = []
    for order in range(1, r):
        n_i = gv.entries[order - 1]
        m_i = n_i - k + 1
        rows.append(
            VerdictRow(
                order=order, m_i=m_i, n_i=n_i,
                verdict=_slice_verdict(order, r, k, n, n_i, _standard(m_i, n)),
            )
        )
    last = []
    for m_r in range(max(gv.entries[-2], n - k + 1), n + 1):
        last.append(
            VerdictRow(
                order=r, m_i=m_r, n_i=n,
                verdict=_slice_verdict(r, r, k, n, n, _standard(m_r, n)),
            )
        )
    final = max((row.verdict for row in last), key=SEVERITY.index)
    return AmplenessTable(
        rank=k,
        dim=n,
        growth=gv.entries,
        rows=rows + last,
        final_verdict=final,
        ample=final is not Verdict.NOT_AMPLE_HYPERPLANE,
    )


def _standard(m: int, n: int) -> list[Vector]:
    return [
        tuple(Fraction(int(i == j)) for i in range(n)) for j in range(m)
    ]
