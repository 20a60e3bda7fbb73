"""Exceptions du domaine.

Chaque erreur est affichée par la CLI sous la forme ``<Nom>: <message>``,
le nom de la classe identifiant le module d'origine.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .nilpotent import ValidationReport


class MaxGrowthError(Exception):
    """Base de toutes les erreurs du domaine."""


class DomainError(MaxGrowthError):
    """Paramètres hors du domaine de définition."""


class CapExceeded(MaxGrowthError):  # noqa: N818 - nom du domaine
    """Énumération trop grande pour la limite configurée."""


class OrderOverflow(MaxGrowthError):  # noqa: N818
    """Ordre de jet supérieur au budget r−1."""


class IncompleteJet(MaxGrowthError):  # noqa: N818
    """Variable de jet absente du point d'évaluation."""


class DegenerateFrame(MaxGrowthError):  # noqa: N818
    """Les valeurs du repère sont liées au point considéré."""


class NotFormalSolution(MaxGrowthError):  # noqa: N818
    """Le repère n'a pas la croissance maximale attendue."""


class InconsistentFormalSolution(MaxGrowthError):  # noqa: N818
    """Rangs incompatibles avec une solution formelle."""


class NormalDirection(MaxGrowthError):  # noqa: N818
    """Direction orthogonale à la distribution."""


class Unclassified(MaxGrowthError):  # noqa: N818
    """Combinaison de paramètres non couverte par l'analyse de cas."""


class NotAmple(MaxGrowthError):  # noqa: N818
    """Cas dégénéré où aucune décomposition convexe n'existe."""


class CertificationFailed(MaxGrowthError):  # noqa: N818
    """Une identité exacte attendue n'est pas vérifiée."""


class CrossCheckFailed(MaxGrowthError):  # noqa: N818
    """Le contrôle croisé (mode debug) donne des rangs différents."""


class InvalidAlgebra(MaxGrowthError):  # noqa: N818
    """Algèbre stratifiée rejetée par la validation."""

    def __init__(self, report: ValidationReport) -> None:
        """Conserve le rapport de validation."""
        super().__init__(report.message)
        self.report = report


class ParseError(MaxGrowthError):
    """Erreur de syntaxe positionnée (ligne, colonne)."""

    def __init__(self, message: str, line: int, column: int) -> None:
        """Construit le message avec sa position."""
        super().__init__(f"ligne {line}, colonne {column}: {message}")
        self.line = line
        self.column = column


class IndexOutOfRange(ParseError):  # noqa: N818
    """Indice de coordonnée ou de base hors bornes."""


class ZeroDenominator(ParseError):  # noqa: N818
    """Rationnel de dénominateur nul."""
