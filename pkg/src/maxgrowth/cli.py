"""Interface en ligne de commande de maxgrowth.

Sous-commandes : witt, hall, mgv, growth, nilpotentize, slice,
ampleness et check. Codes de sortie : 0 succès, 1 erreur du domaine ou
suite en échec, 2 erreur d'usage (argparse).
"""
# PYTHON_ARGCOMPLETE_OK

from __future__ import annotations

import argparse
import asyncio
import logging
import os
import sys
from dataclasses import dataclass

import aiofiles
import argcomplete
from pydantic import BaseModel, PositiveInt, TypeAdapter, ValidationError

from . import catalog
from .ampleness import SliceReport, generic_verdict_table, slice_report
from .config import Config, OutputFormat, guess_default_config_path, load_config
from .errors import MaxGrowthError
from .flags import Frame, lie_flag
from .freelie import hall_basis, is_free_type, maximal_growth_vector, witt_dimension
from .linalg import parse_vector
from .nilpotent import StratifiedAlgebra, nilpotent_frame
from .parsing import format_frame, parse_algebra, parse_frame
from .suites import SUITES, CheckResult, SuiteContext, run_suite

_FORMATS = [f.value for f in OutputFormat]
_POSITIVE = TypeAdapter(PositiveInt)


def _positive_int(text: str) -> int:
    """Type argparse : entier ≥ 1 (erreur d'usage sinon)."""
    try:
        return _POSITIVE.validate_python(int(text))
    except (ValueError, ValidationError):
        raise argparse.ArgumentTypeError(
            f"entier ≥ 1 attendu, reçu {text!r}"
        ) from None


# Options communes aux sous-commandes (--format après la sous-commande)
_common = argparse.ArgumentParser(add_help=False)
_common.add_argument(
    "--format",
    dest="format",
    choices=_FORMATS,
    default=argparse.SUPPRESS,
    help="Format de sortie.",
)

# Gestion des arguments de ligne de commande
parser: argparse.ArgumentParser = argparse.ArgumentParser(
    prog="maxgrowth",
    description="Distributions à croissance maximale et amplitude",
)
parser.add_argument(
    "-c",
    "--config",
    help="Le fichier de configuration à utiliser",
    default=None,
)
parser.add_argument(
    "-l",
    "--log-level",
    help="Défini le niveau de journalisation",
    dest="log_level",
    metavar="log_level",
    default="WARNING",
    choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
)
parser.add_argument(
    "--format",
    dest="format",
    choices=_FORMATS,
    default=None,
    help="Format de sortie (text ou json).",
)
parser.add_argument(
    "--seed", type=int, default=None, help="Graine des tirages aléatoires."
)
parser.add_argument(
    "--hall-cap",
    type=_positive_int,
    default=None,
    help="Nombre maximum d'éléments de Hall énumérés.",
)
parser.add_argument(
    "--concurrency",
    type=_positive_int,
    default=None,
    help="Nombre maximum de suites exécutées simultanément (check).",
)
parser.add_argument(
    "--debug-spanning",
    dest="debug_spanning",
    action="store_true",
    default=None,
    help="Contrôle croisé avec tous les crochets imbriqués.",
)
parser.add_argument(
    "--no-debug-spanning",
    dest="debug_spanning",
    action="store_false",
    default=None,
    help="Désactive le contrôle croisé (par défaut).",
)

commands = parser.add_subparsers(dest="command", required=True)

witt_cmd = commands.add_parser(
    "witt", parents=[_common], help="Dimension de Witt"
)
witt_cmd.add_argument("--generators", type=int, required=True)
witt_cmd.add_argument("--length", type=int, required=True)

hall_cmd = commands.add_parser(
    "hall", parents=[_common], help="Base de Hall par longueur"
)
hall_cmd.add_argument("--generators", type=int, required=True)
hall_cmd.add_argument("--max-length", type=int, required=True)

mgv_cmd = commands.add_parser(
    "mgv", parents=[_common], help="Vecteur de croissance maximal"
)
mgv_cmd.add_argument("--rank", type=int, required=True)
mgv_cmd.add_argument("--dim", type=int, required=True)


def _frame_source(sub: argparse.ArgumentParser) -> None:
    group = sub.add_mutually_exclusive_group(required=True)
    group.add_argument("--frame", help="Fichier de repère")
    group.add_argument("--catalog", help="Nom d'un repère du catalogue")


growth_cmd = commands.add_parser(
    "growth", parents=[_common], help="Drapeau de Lie en un point"
)
_frame_source(growth_cmd)
growth_cmd.add_argument("--point", required=True, help='"q1,…,qn"')
growth_cmd.add_argument("--max-step", type=int, default=None)

nil_cmd = commands.add_parser(
    "nilpotentize", parents=[_common], help="Repère invariant à gauche"
)
nil_source = nil_cmd.add_mutually_exclusive_group(required=True)
nil_source.add_argument("--algebra", help="Fichier d'algèbre")
nil_source.add_argument("--catalog", help="Nom d'une algèbre du catalogue")
nil_source.add_argument(
    "--rank", type=int, help="Algèbre à croissance maximale (avec --dim)"
)
nil_cmd.add_argument("--dim", type=int, default=None)
nil_cmd.add_argument("--out", default=None, help="Fichier de sortie")

slice_cmd = commands.add_parser(
    "slice", parents=[_common], help="Analyse d'amplitude par ordre"
)
_frame_source(slice_cmd)
slice_cmd.add_argument("--point", required=True)
slice_cmd.add_argument("--direction", required=True, help='"v1,…,vn"')
slice_cmd.add_argument("--step", type=int, default=None)

ample_cmd = commands.add_parser(
    "ampleness", parents=[_common], help="Tableau générique des verdicts"
)
ample_cmd.add_argument("--rank", type=int, required=True)
ample_cmd.add_argument("--dim", type=int, required=True)

check_cmd = commands.add_parser(
    "check", parents=[_common], help="Suites d'invariants"
)
check_cmd.add_argument(
    "--suite", choices=[*SUITES, "all"], default="all"
)


def _env_int(name: str, minimum: int | None = None) -> int | None:
    """Retourne la valeur int d'une variable d'environnement si valide."""
    val = os.getenv(name)
    if val is None:
        return None
    try:
        value = int(val)
    except ValueError:
        logging.warning("Variable d'environnement %s invalide: %r", name, val)
        return None
    if minimum is not None and value < minimum:
        logging.warning("Variable d'environnement %s < %d: %r", name, minimum, val)
        return None
    return value


def _env_bool(name: str) -> bool | None:
    """Interprète une variable d'environnement booléenne (1/0, true/false…)."""
    val = os.getenv(name)
    if val is None:
        return None
    v = val.strip().lower()
    if v in {"1", "true", "yes", "on"}:
        return True
    if v in {"0", "false", "no", "off"}:
        return False
    logging.warning("Variable d'environnement %s invalide: %r", name, val)
    return None


@dataclass
class RuntimeParams:
    """Paramètres effectifs (CLI > ENV > YAML)."""

    hall_cap: int
    seed: int
    samples: int
    hull_budget: int
    concurrency: int
    debug_spanning: bool
    output_format: OutputFormat


def _pick[T](cli: T | None, env: T | None, default: T) -> T:
    if cli is not None:
        return cli
    return env if env is not None else default


def _resolve_params(
    arguments: argparse.Namespace, config: Config
) -> RuntimeParams:
    """Calcule les paramètres effectifs (CLI > ENV > YAML)."""
    fmt = getattr(arguments, "format", None)
    return RuntimeParams(
        hall_cap=_pick(arguments.hall_cap, _env_int("MXG_HALL_CAP", 1), config.hall_cap),
        seed=_pick(arguments.seed, _env_int("MXG_SEED"), config.seed),
        samples=_pick(None, _env_int("MXG_SAMPLES", 1), config.samples),
        hull_budget=config.hull_budget,
        concurrency=_pick(
            arguments.concurrency, _env_int("MXG_CONCURRENCY", 1), config.concurrency
        ),
        debug_spanning=_pick(
            arguments.debug_spanning,
            _env_bool("MXG_DEBUG_SPANNING"),
            config.debug_spanning,
        ),
        output_format=OutputFormat(fmt) if fmt else config.output_format,
    )


class WittReport(BaseModel):
    """Sortie de ``witt``."""

    generators: int
    length: int
    dimension: int


class HallReport(BaseModel):
    """Sortie de ``hall`` : éléments par longueur."""

    generators: int
    layers: list[list[str]]


class GrowthVectorReport(BaseModel):
    """Sortie de ``mgv``."""

    rank: int
    dim: int
    growth: tuple[int, ...]
    step: int
    free_type: bool


class NilpotentizeReport(BaseModel):
    """Sortie de ``nilpotentize``."""

    layers: tuple[int, ...]
    frame: str


def _flag(value: bool) -> str:
    return str(value).lower()


async def _read(path: str) -> str:
    async with aiofiles.open(path) as f:
        return await f.read()


async def _frame(arguments: argparse.Namespace, params: RuntimeParams) -> Frame:
    if arguments.catalog:
        return catalog.frame(arguments.catalog, params.hall_cap)
    return parse_frame(await _read(arguments.frame))


async def _algebra(
    arguments: argparse.Namespace, params: RuntimeParams
) -> StratifiedAlgebra:
    if arguments.catalog:
        return catalog.algebra(arguments.catalog, params.hall_cap)
    if arguments.rank is not None:
        if arguments.dim is None:
            parser.error("--rank exige --dim")
        return catalog.algebra(
            f"free:{arguments.rank}:{arguments.dim}", params.hall_cap
        )
    return parse_algebra(await _read(arguments.algebra))


def _cmd_witt(arguments: argparse.Namespace, params: RuntimeParams) -> str:
    dim = witt_dimension(arguments.generators, arguments.length)
    if params.output_format is OutputFormat.JSON:
        return WittReport(
            generators=arguments.generators,
            length=arguments.length,
            dimension=dim,
        ).model_dump_json()
    return str(dim)


def _cmd_hall(arguments: argparse.Namespace, params: RuntimeParams) -> str:
    basis = hall_basis(arguments.generators, arguments.max_length, params.hall_cap)
    layers = [
        [str(e) for e in basis.layer(length)]
        for length in range(1, arguments.max_length + 1)
    ]
    if params.output_format is OutputFormat.JSON:
        return HallReport(
            generators=arguments.generators, layers=layers
        ).model_dump_json()
    return "\n".join(
        f"{length} ({len(layer)}): {' '.join(layer)}"
        for length, layer in enumerate(layers, start=1)
    )


def _cmd_mgv(arguments: argparse.Namespace, params: RuntimeParams) -> str:
    gv = maximal_growth_vector(arguments.rank, arguments.dim)
    free = is_free_type(gv, arguments.rank)
    if params.output_format is OutputFormat.JSON:
        return GrowthVectorReport(
            rank=arguments.rank,
            dim=arguments.dim,
            growth=gv.entries,
            step=gv.step,
            free_type=free,
        ).model_dump_json()
    return f"{gv} step={gv.step} free_type={_flag(free)}"


async def _cmd_growth(
    arguments: argparse.Namespace, params: RuntimeParams
) -> str:
    frame = await _frame(arguments, params)
    point = parse_vector(arguments.point)
    max_step = arguments.max_step
    if max_step is None:
        k, n = frame.rank, frame.dim
        max_step = (
            maximal_growth_vector(k, n).step + 1 if 2 <= k < n else 1  # noqa: PLR2004
        )
    report = lie_flag(
        frame,
        point,
        max_step,
        debug=params.debug_spanning,
        cap=params.hall_cap,
    )
    if params.output_format is OutputFormat.JSON:
        return report.model_dump_json()
    return (
        f"dims={report.dims} step={report.step} "
        f"maximal={_flag(report.maximal)} free_type={_flag(report.free_type)} "
        f"bracket_generating={_flag(report.bracket_generating)} "
        f"regular={_flag(report.regular)}"
    )


async def _cmd_nilpotentize(
    arguments: argparse.Namespace, params: RuntimeParams
) -> str:
    alg = await _algebra(arguments, params)
    text = format_frame(nilpotent_frame(alg))
    if arguments.out:
        async with aiofiles.open(arguments.out, "w") as f:
            await f.write(text)
        logging.info("Repère écrit dans %s", arguments.out)
    if params.output_format is OutputFormat.JSON:
        return NilpotentizeReport(
            layers=alg.layer_dims, frame=text
        ).model_dump_json()
    return "" if arguments.out else text.rstrip("\n")


async def _cmd_slice(
    arguments: argparse.Namespace, params: RuntimeParams
) -> str:
    frame = await _frame(arguments, params)
    reports = slice_report(
        frame,
        parse_vector(arguments.point),
        parse_vector(arguments.direction),
        arguments.step,
        debug=params.debug_spanning,
        cap=params.hall_cap,
    )
    if params.output_format is OutputFormat.JSON:
        return TypeAdapter(list[SliceReport]).dump_json(reports).decode()
    return "\n".join(
        f"i={rep.order} m_i={rep.m_i} n_i={rep.n_i} t_rank={rep.t_rank} "
        f"normal={_flag(rep.normal)} verdict={rep.verdict}"
        for rep in reports
    )


def _cmd_ampleness(arguments: argparse.Namespace, params: RuntimeParams) -> str:
    table = generic_verdict_table(arguments.rank, arguments.dim)
    if params.output_format is OutputFormat.JSON:
        return table.model_dump_json()
    rows = [
        f"i={row.order} m_i={row.m_i} n_i={row.n_i} verdict={row.verdict}"
        for row in table.rows
    ]
    rows.append(f"final={table.final_verdict} ample={_flag(table.ample)}")
    return "\n".join(rows)


async def _run_checks(
    names: list[str], params: RuntimeParams
) -> list[CheckResult]:
    """Exécute les suites dans des threads, bornées par un sémaphore."""
    sem = asyncio.Semaphore(params.concurrency)

    async def run(name: str) -> CheckResult:
        async with sem:
            ctx = SuiteContext(
                seed=params.seed,
                samples=params.samples,
                hull_budget=params.hull_budget,
                cap=params.hall_cap,
            )
            return await asyncio.to_thread(run_suite, name, ctx)

    results = await asyncio.gather(
        *(run(name) for name in names), return_exceptions=True
    )
    out: list[CheckResult] = []
    for name, r in zip(names, results, strict=True):
        if isinstance(r, BaseException):
            logging.exception("Suite %s en erreur", name, exc_info=r)
            out.append(
                CheckResult(suite=name, passed=False, checks=0, failures=[repr(r)])
            )
        else:
            out.append(r)
    return out


async def _cmd_check(
    arguments: argparse.Namespace, params: RuntimeParams
) -> tuple[str, bool]:
    names = list(SUITES) if arguments.suite == "all" else [arguments.suite]
    results = await _run_checks(names, params)
    ok = all(r.passed for r in results)
    if params.output_format is OutputFormat.JSON:
        return TypeAdapter(list[CheckResult]).dump_json(results).decode(), ok
    lines = []
    for r in results:
        status = "ok" if r.passed else "ÉCHEC"
        lines.append(f"{r.suite}: {status} ({r.checks} vérifications)")
        lines.extend(f"  - {failure}" for failure in r.failures)
    return "\n".join(lines), ok


async def _dispatch(  # noqa: PLR0911
    arguments: argparse.Namespace, params: RuntimeParams
) -> tuple[str, bool]:
    """Exécute la sous-commande ; retourne (sortie, succès)."""
    match arguments.command:
        case "witt":
            return _cmd_witt(arguments, params), True
        case "hall":
            return _cmd_hall(arguments, params), True
        case "mgv":
            return _cmd_mgv(arguments, params), True
        case "growth":
            return await _cmd_growth(arguments, params), True
        case "nilpotentize":
            return await _cmd_nilpotentize(arguments, params), True
        case "slice":
            return await _cmd_slice(arguments, params), True
        case "ampleness":
            return _cmd_ampleness(arguments, params), True
        case _:
            return await _cmd_check(arguments, params)


async def _load(config_arg: str | None) -> Config:
    """Charge la configuration demandée ou découverte, sinon les défauts."""
    explicit = config_arg is not None or os.getenv("MXG_CONFIG") is not None
    path = (
        os.path.abspath(os.path.join(os.getcwd(), config_arg))
        if config_arg is not None
        else guess_default_config_path()
    )
    if path is None:
        logging.debug("Aucun fichier de configuration, valeurs par défaut.")
        return Config()
    if not os.path.exists(path):
        if not explicit:
            return Config()
        print(
            f"{path} : Le fichier de configuration spécifié n'existe pas.",
            file=sys.stderr,
        )
        sys.exit(1)
    elif not os.access(path, os.R_OK):
        print(
            f"Impossible de lire {path} : permission non accordée.",
            file=sys.stderr,
        )
        sys.exit(1)
    try:
        return await load_config(path)
    except ValidationError as err:
        print(f"{path} : configuration invalide.\n{err}", file=sys.stderr)
        sys.exit(1)


async def main() -> None:
    """Fonction principale."""
    argcomplete.autocomplete(parser)
    arguments = parser.parse_args()
    logging.basicConfig(
        level=arguments.log_level,
        format="%(asctime)s (%(levelname)s) [%(name)s] %(message)s",
    )
    config = await _load(arguments.config)
    params = _resolve_params(arguments, config)
    try:
        output, ok = await _dispatch(arguments, params)
    except MaxGrowthError as err:
        print(f"{type(err).__name__}: {err}", file=sys.stderr)
        sys.exit(1)
    except OSError as err:
        print(f"{err.filename} : {err.strerror}", file=sys.stderr)
        sys.exit(1)
    if output:
        print(output)
    if not ok:
        sys.exit(1)
