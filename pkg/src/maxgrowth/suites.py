"""Suites d'invariants exécutées par ``maxgrowth check``."""

from __future__ import annotations

import logging
from collections.abc import Callable, Iterator
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

import numpy as np
from pydantic import BaseModel

from . import catalog
from .ampleness import (
    MatrixSpaceSpec,
    Verdict,
    classify_matrix_space,
    det_affine_in_free_column,
    generic_verdict_table,
    gl_convex_decomposition,
    hull_membership_witness,
    slice_report,
)
from .errors import MaxGrowthError
from .flags import AffineMap, Frame, formal_flag, lie_flag, nested_field, pushforward
from .freelie import (
    DEFAULT_HALL_CAP,
    hall_basis,
    is_free_type,
    is_hall_element,
    maximal_growth_vector,
    witt_dimension,
)
from .jetalg import (
    DiffPoly,
    DiffVec,
    JetSpace,
    JetVar,
    all_multi_indices,
    bracket,
    evaluate,
    jet_of_frame,
    max_order,
    pure_t_vars,
    substitute_vec,
)
from .linalg import Vector, det, identity, transpose
from .nilpotent import nilpotent_frame

# Vecteurs de croissance de référence : (k, n) → (entrées, type libre)
REFERENCE_GROWTH = {
    (2, 5): ((2, 3, 5), True),
    (2, 8): ((2, 3, 5, 8), True),
    (3, 14): ((3, 6, 14), True),
    (4, 30): ((4, 10, 30), True),
    (3, 8): ((3, 6, 8), False),
    (4, 11): ((4, 10, 11), False),
}


class CheckResult(BaseModel):
    """Bilan d'une suite."""

    suite: str
    passed: bool
    checks: int
    failures: list[str]


@dataclass
class SuiteContext:
    """Paramètres communs aux suites.

    ``samples`` compte les points de jet et les directions tirés par
    invariant ; les autres compteurs fixent la taille des balayages.
    """

    seed: int = 0
    samples: int = 10
    gl_samples: int = 50
    affine_samples: int = 20
    frame_changes: int = 10
    hull_budget: int = 10_000
    cap: int = DEFAULT_HALL_CAP
    rng: np.random.Generator = field(init=False)

    def __post_init__(self) -> None:
        """Générateur reproductible."""
        self.rng = np.random.default_rng(self.seed)

    def rationals(self, size: int, bound: int = 3) -> Vector:
        """Rationnels p/q avec |p| ≤ bound, 1 ≤ q ≤ 4."""
        nums = self.rng.integers(-bound, bound + 1, size=size)
        dens = self.rng.integers(1, 5, size=size)
        return tuple(Fraction(int(a), int(b)) for a, b in zip(nums, dens, strict=True))

    def invertible(self, n: int) -> tuple[Vector, ...]:
        """Matrice rationnelle inversible aléatoire."""
        while True:
            rows = tuple(self.rationals(n) for _ in range(n))
            if det(rows):
                return rows


class _Recorder:
    def __init__(self) -> None:
        self.checks = 0
        self.failures: list[str] = []

    def expect(self, condition: bool, label: str) -> None:
        self.checks += 1
        if not condition:
            logging.warning("Échec: %s", label)
            self.failures.append(label)

    def result(self, suite: str) -> CheckResult:
        return CheckResult(
            suite=suite,
            passed=not self.failures,
            checks=self.checks,
            failures=self.failures,
        )


def hall_suite(ctx: SuiteContext) -> CheckResult:
    """Comptages de Witt, éléments de Hall, vecteurs de référence."""
    rec = _Recorder()
    for k in (2, 3, 4):
        basis = hall_basis(k, 6, ctx.cap)
        for length in range(1, 7):
            rec.expect(
                len(basis.layer(length)) == witt_dimension(k, length),
                f"|V_{length}| = witt({k}, {length})",
            )
        rec.expect(
            all(is_hall_element(e, basis) for e in basis.layer(4)),
            f"éléments de Hall reconnus (k={k})",
        )
    rec.expect(witt_dimension(3, 3) == 8, "witt(3, 3) = 8")
    for (k, n), (entries, free) in REFERENCE_GROWTH.items():
        gv = maximal_growth_vector(k, n)
        rec.expect(gv.entries == entries, f"mgv({k}, {n}) = {entries}")
        rec.expect(is_free_type(gv, k) is free, f"type libre de mgv({k}, {n})")
    return rec.result("hall")


# (k, n) des identités formelles, crochets de longueur ≤ JET_MAX_LENGTH
JET_SPACES = ((2, 2), (2, 3), (3, 2), (3, 3))
JET_MAX_LENGTH = 4
ORACLE_FRAMES = ("heisenberg", "martinet", "engel", "cartan", "free32")


def _multis(k: int, max_length: int) -> Iterator[tuple[int, ...]]:
    for length in range(2, max_length + 1):
        yield from all_multi_indices(k, length)


def _adapted_checks(rec: _Recorder, space: JetSpace, t: int) -> None:
    """F_1 = ∂_t, F_2 ⊥ ∂_t : seul P^{ℓ−1}_t(F_2) garde des dérivées pures."""
    adapted = {JetVar(1, t): Fraction(1), JetVar(2, t): Fraction(0)}
    killed = {JetVar(1, t): Fraction(0), JetVar(2, t): Fraction(0)}
    for length in range(2, space.r + 1):
        multi = (1,) * (length - 1) + (2,)
        reduced = substitute_vec(bracket(multi, space), adapted)
        top = DiffVec(
            tuple(
                DiffPoly.var(space, JetVar(2, i, (t,) * (length - 1)))
                for i in range(1, space.n + 1)
            )
        )
        rec.expect(
            not pure_t_vars(reduced - top, t, length - 1),
            f"{space}: décomposition adaptée {multi}",
        )
        rec.expect(
            not pure_t_vars(
                substitute_vec(bracket(multi, space), killed), t, length - 1
            ),
            f"{space}: effet perpendiculaire {multi}",
        )


def jet_suite(ctx: SuiteContext) -> CheckResult:
    """Identités des crochets formels et équivalence avec l'oracle."""
    rec = _Recorder()
    for k, n in JET_SPACES:
        space = JetSpace(k, n, JET_MAX_LENGTH)
        for multi in _multis(k, JET_MAX_LENGTH):
            swapped = (*multi[:-2], multi[-1], multi[-2])
            rec.expect(
                (bracket(multi, space) + bracket(swapped, space)).is_zero(),
                f"{space}: antisymétrie {multi}",
            )
            rec.expect(
                max_order(bracket(multi, space)) <= len(multi) - 1,
                f"{space}: ordre de {multi}",
            )
        for a, b, c in product(range(1, k + 1), repeat=3):
            total = (
                bracket((a, b, c), space)
                + bracket((b, c, a), space)
                + bracket((c, a, b), space)
            )
            rec.expect(total.is_zero(), f"{space}: Jacobi ({a}, {b}, {c})")
        _adapted_checks(rec, space, n)
    for name in ORACLE_FRAMES:
        frame = catalog.frame(name, ctx.cap)
        for _ in range(ctx.samples):
            p = ctx.rationals(frame.dim)
            jet = jet_of_frame(frame, p, JET_MAX_LENGTH - 1)
            for multi in _multis(frame.rank, JET_MAX_LENGTH):
                rec.expect(
                    evaluate(bracket(multi, jet.space), jet)
                    == nested_field(multi, frame).value(p),
                    f"oracle {name} {multi} en {p}",
                )
    return rec.result("jet")


def _dims(frame: Frame, p: Vector, steps: int) -> tuple[int, ...]:
    return lie_flag(frame, p, steps).dims


def flags_suite(ctx: SuiteContext) -> CheckResult:
    """Invariance des drapeaux et repères nilpotents."""
    rec = _Recorder()
    for name in ("heisenberg", "martinet", "engel", "cartan", "free32"):
        frame = catalog.frame(name, ctx.cap)
        steps = maximal_growth_vector(frame.rank, frame.dim).step + 1
        p = ctx.rationals(frame.dim)
        base = _dims(frame, p, steps)
        for _ in range(ctx.affine_samples):
            amap = AffineMap.of(ctx.invertible(frame.dim), ctx.rationals(frame.dim))
            rec.expect(
                _dims(pushforward(frame, amap), amap(p), steps) == base,
                f"{name}: invariance affine en {p}",
            )
        for _ in range(ctx.frame_changes):
            g = ctx.invertible(frame.rank)
            rec.expect(
                _dims(frame.recombine(g), p, steps) == base,
                f"{name}: invariance par changement de repère {g}",
            )
    for name, dims in (
        ("heisenberg", (2, 3)),
        ("engel", (2, 3, 4)),
        ("free23", (2, 3, 5)),
    ):
        frame = nilpotent_frame(catalog.algebra(name, ctx.cap))
        origin = [0] * frame.dim
        rec.expect(
            _dims(frame, origin, len(dims)) == dims,
            f"repère nilpotent {name}",
        )
    heis = catalog.frame("heisenberg", ctx.cap)
    p = ctx.rationals(3)
    rec.expect(
        formal_flag(jet_of_frame(heis, p, 2), 3).dims == _dims(heis, p, 3),
        "drapeau formel = drapeau classique",
    )
    return rec.result("flags")


def _std_columns(n: int, k: int) -> tuple[Vector, ...]:
    return identity(n)[:k]


def ampleness_suite(ctx: SuiteContext) -> CheckResult:
    """Classification, témoins convexes et dichotomie k = 2 / k ≥ 3."""
    rec = _Recorder()
    cases = (
        (3, 3, 1, Verdict.AMPLE_NON_THIN),
        (3, 3, 2, Verdict.NOT_AMPLE_HYPERPLANE),
        (2, 4, 2, Verdict.TRIVIALLY_AMPLE_FULL),
    )
    for rows, cols, k, expected in cases:
        spec = MatrixSpaceSpec(rows, cols, _std_columns(rows, k), min(rows, cols))
        rec.expect(
            classify_matrix_space(spec) is expected,
            f"classification ℓ={rows} q={cols} k={k}",
        )
    for n in (2, 3, 4):
        for _ in range(ctx.gl_samples):
            m = tuple(ctx.rationals(n) for _ in range(n))
            try:
                witness = gl_convex_decomposition(m)
                rec.expect(witness.is_valid(m), f"décomposition GL de {m}")
            except MaxGrowthError as err:
                rec.expect(False, f"décomposition GL de {m}: {err}")
    functional = det_affine_in_free_column(transpose(_std_columns(3, 2)))
    rec.expect(
        functional.coefficients == (0, 0, 1),
        "det(e1 | e2 | w) = w3",
    )
    hyper = MatrixSpaceSpec(3, 3, _std_columns(3, 2), 3)
    kernel_target = ((1, 0, 1), (0, 1, 1), (0, 0, 0))
    for sign in (1, -1):
        rec.expect(
            hull_membership_witness(hyper, kernel_target, sign, ctx.hull_budget, ctx.seed)
            is None,
            f"cible du noyau hors de l'enveloppe ({sign:+d})",
        )
    heis = catalog.frame("heisenberg", ctx.cap)
    last = slice_report(heis, [0, 0, 0], [0, 1, 0])[-1]
    rec.expect(
        last.verdict is Verdict.NOT_AMPLE_HYPERPLANE,
        "Heisenberg: hyperplan à l'ordre r",
    )
    engel = catalog.frame("engel", ctx.cap)
    for _ in range(ctx.samples):
        v = ctx.rationals(4)
        if not any(v):
            continue
        verdicts = {rep.verdict for rep in slice_report(engel, [0] * 4, v)}
        rec.expect(
            Verdict.AMPLE_NON_THIN not in verdicts,
            f"Engel: ni ample ni mince en {v}",
        )
    free = catalog.frame("free32", ctx.cap)
    for _ in range(ctx.samples):
        v = ctx.rationals(6)
        if not any(v):
            continue
        reports = slice_report(free, [0] * 6, v)
        rec.expect(
            all(rep.verdict is not Verdict.NOT_AMPLE_HYPERPLANE for rep in reports),
            f"rang 3: aucune obstruction hyperplane en {v}",
        )
        for rep in reports[:-1]:
            if rep.normal:
                continue
            rec.expect(
                rep.verdict is Verdict.AMPLE_THIN_COMPLEMENT,
                f"rang 3: complément mince à l'ordre {rep.order} en {v}",
            )
            rec.expect(
                rep.m_i is not None and rep.m_i + free.rank - 1 == rep.n_i,
                f"rang 3: m_i + k − 1 = 𝔫_i à l'ordre {rep.order} en {v}",
            )
            rec.expect(
                rep.t_rank == free.rank - 1,
                f"rang 3: rang de 𝒟^i_t = k − 1 à l'ordre {rep.order} en {v}",
            )
    rec.expect(
        not generic_verdict_table(2, 4).ample,
        "tableau générique (2, 4) non ample",
    )
    rec.expect(generic_verdict_table(3, 6).ample, "tableau générique (3, 6) ample")
    return rec.result("ampleness")


SUITES: dict[str, Callable[[SuiteContext], CheckResult]] = {
    "hall": hall_suite,
    "jet": jet_suite,
    "flags": flags_suite,
    "ampleness": ampleness_suite,
}


def run_suite(name: str, ctx: SuiteContext) -> CheckResult:
    """Exécute une suite ; une erreur du domaine compte comme un échec."""
    logging.info("Suite %s démarrée", name)
    try:
        return SUITES[name](ctx)
    except MaxGrowthError as err:
        logging.warning("Suite %s interrompue: %s", name, err)
        return CheckResult(
            suite=name,
            passed=False,
            checks=1,
            failures=[f"{type(err).__name__}: {err}"],
        )
