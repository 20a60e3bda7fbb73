"""Exemples nommés : repères polynomiaux et algèbres stratifiées.

Les noms ``free:K:N`` désignent l'algèbre à croissance maximale de rang K
sur ℝ^N et son repère nilpotent.
"""

from __future__ import annotations

import re

from .errors import DomainError
from .flags import Frame
from .freelie import DEFAULT_HALL_CAP
from .nilpotent import StratifiedAlgebra, maximal_growth_algebra, nilpotent_frame
from .parsing import parse_algebra, parse_frame

FRAMES: dict[str, str] = {
    "heisenberg": "dim 3\nX1 = d1\nX2 = d2 + x1*d3\n",
    # Non régulier sur {x1 = 0}
    "martinet": "dim 3\nX1 = d1\nX2 = d2 + x1^2*d3\n",
    "engel": "dim 4\nX1 = d1\nX2 = d2 + x1*d3 + x3*d4\n",
    "cartan": (
        "dim 5\nX1 = d1\n"
        "X2 = d2 + x1*d3 + 1/2*x1^2*d4 + x1*x2*d5\n"
    ),
    "free32": (
        "dim 6\nX1 = d1\nX2 = d2 + x1*d4\n"
        "X3 = d3 + x1*d5 + x2*d6\n"
    ),
}

ALGEBRAS: dict[str, str] = {
    "heisenberg": "layers 2 1\nbracket e1 e2 = e3\n",
    "engel": "layers 2 1 1\nbracket e1 e2 = e3\nbracket e1 e3 = e4\n",
    "free23": (
        "layers 2 1 2\nbracket e1 e2 = e3\n"
        "bracket e1 e3 = e4\nbracket e2 e3 = e5\n"
    ),
    "free32": (
        "layers 3 3\nbracket e1 e2 = e4\n"
        "bracket e1 e3 = e5\nbracket e2 e3 = e6\n"
    ),
}

_FREE = re.compile(r"free:(\d+):(\d+)")


def names() -> list[str]:
    """Noms disponibles (hors famille free:K:N)."""
    return sorted(set(FRAMES) | set(ALGEBRAS))


def algebra(name: str, cap: int = DEFAULT_HALL_CAP) -> StratifiedAlgebra:
    """Algèbre nommée."""
    if m := _FREE.fullmatch(name):
        return maximal_growth_algebra(int(m[1]), int(m[2]), cap)
    if name not in ALGEBRAS:
        raise DomainError(f"algèbre inconnue: {name}")
    return parse_algebra(ALGEBRAS[name])


def frame(name: str, cap: int = DEFAULT_HALL_CAP) -> Frame:
    """Repère nommé ; free:K:N passe par le repère nilpotent."""
    if _FREE.fullmatch(name):
        return nilpotent_frame(algebra(name, cap))
    if name not in FRAMES:
        raise DomainError(f"repère inconnu: {name}")
    return parse_frame(FRAMES[name])
