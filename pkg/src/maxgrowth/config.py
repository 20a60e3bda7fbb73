"""Configuration de maxgrowth.

Fichier YAML facultatif cherché dans les emplacements standard
(cross-platform) via platformdirs ; toutes les valeurs ont un défaut.
"""

from __future__ import annotations

import logging
import os
from enum import StrEnum
from pathlib import Path

import aiofiles
import yaml
from platformdirs import PlatformDirs
from pydantic import BaseModel, Field

from .freelie import DEFAULT_HALL_CAP

APP_NAME = "maxgrowth"
CONFIG_ENV = "MXG_CONFIG"


def _user_config_dir() -> Path:
    """Répertoire de configuration utilisateur (platformdirs)."""
    return Path(PlatformDirs(APP_NAME).user_config_dir)


def _candidate_config_paths() -> list[Path]:
    """Chemins candidats, dans l'ordre de recherche."""
    dirs = PlatformDirs(APP_NAME)
    candidates = [
        Path.cwd() / "config.yaml",
        _user_config_dir() / "config.yaml",
        Path(dirs.site_config_dir) / "config.yaml",
    ]
    if os.name == "posix":
        candidates.append(Path("/etc") / APP_NAME / "config.yaml")
    return candidates


def guess_default_config_path() -> str | None:
    """Devine le fichier de configuration.

    Ordre de recherche:
    - MXG_CONFIG (si défini)
    - ./config.yaml
    - <user_config_dir>/config.yaml
    - <site_config_dir>/config.yaml
    - /etc/maxgrowth/config.yaml (POSIX)

    Retourne None si aucun fichier n'existe : les défauts s'appliquent.
    """
    env_cfg = os.getenv(CONFIG_ENV)
    if env_cfg:
        return os.path.abspath(env_cfg)
    for p in _candidate_config_paths():
        if p.exists():
            return str(p)
    return None


class OutputFormat(StrEnum):
    """Formats de sortie de la CLI."""

    TEXT = "text"
    JSON = "json"


class Config(BaseModel):
    """Configuration principale."""

    hall_cap: int = Field(default=DEFAULT_HALL_CAP, gt=0)
    debug_spanning: bool = Field(default=False)
    seed: int = Field(default=0)
    samples: int = Field(default=10, gt=0)
    hull_budget: int = Field(default=10_000, gt=0)
    concurrency: int = Field(default=4, gt=0)
    output_format: OutputFormat = Field(default=OutputFormat.TEXT)


async def load_config(config_file: str) -> Config:
    """Charge la configuration depuis un fichier YAML."""
    async with aiofiles.open(config_file) as f:
        content: str = await f.read()
    logging.debug("Fichier de configuration %s chargé.", config_file)
    raw_config = yaml.safe_load(content) or {}
    return Config.model_validate(raw_config)
