"""
Where report artifacts go: one text blob per artifact name, such as
"rot.json", "rot.txt" or "holonomy.csv".
"""

import os
import re
from abc import ABC, abstractmethod
from typing import Dict, List, Optional

from kybra_simple_logging import get_logger

from .errors import ConfigError

logger = get_logger(__name__)

ARTIFACT_SUFFIXES = (".json", ".txt", ".csv")

_NAME = re.compile(r"^[A-Za-z0-9_][A-Za-z0-9_.+-]*$")


def check_artifact_name(name: str) -> str:
    """Names are flat file names with a known suffix; task labels end up in them."""
    if not _NAME.match(name or "") or not name.endswith(ARTIFACT_SUFFIXES):
        raise ConfigError(
            f"Invalid artifact name '{name}'; labels may use letters, digits, '_', '-', '+' and '.'"
        )
    return name


class Storage(ABC):
    """Artifact store used by ReportBook"""

    def write(self, name: str, text: str) -> None:
        self._write(check_artifact_name(name), text)

    def read(self, name: str) -> Optional[str]:
        return self._read(check_artifact_name(name))

    def __contains__(self, name: str) -> bool:
        return self.read(name) is not None

    @abstractmethod
    def _write(self, name: str, text: str) -> None:
        raise NotImplementedError

    @abstractmethod
    def _read(self, name: str) -> Optional[str]:
        raise NotImplementedError

    @abstractmethod
    def names(self) -> List[str]:
        """Stored artifact names, sorted"""
        raise NotImplementedError


class MemoryStorage(Storage):
    """Keeps artifacts in a dict; used by tests and library callers"""

    def __init__(self):
        self._artifacts: Dict[str, str] = {}

    def _write(self, name: str, text: str) -> None:
        self._artifacts[name] = text

    def _read(self, name: str) -> Optional[str]:
        return self._artifacts.get(name)

    def names(self) -> List[str]:
        return sorted(self._artifacts)


class DirectoryStorage(Storage):
    """One file per artifact under root, created on first write.

    Text is written without newline translation so report bytes do not
    depend on the platform.
    """

    def __init__(self, root: str):
        self.root = root

    def _write(self, name: str, text: str) -> None:
        os.makedirs(self.root, exist_ok=True)
        path = os.path.join(self.root, name)
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        logger.debug(f"Wrote {path}")

    def _read(self, name: str) -> Optional[str]:
        path = os.path.join(self.root, name)
        if not os.path.isfile(path):
            return None
        with open(path, encoding="utf-8", newline="") as f:
            return f.read()

    def names(self) -> List[str]:
        if not os.path.isdir(self.root):
            return []
        return sorted(
            name
            for name in os.listdir(self.root)
            if name.endswith(ARTIFACT_SUFFIXES) and os.path.isfile(os.path.join(self.root, name))
        )
