# src/principal_trace/reports/base.py

import os
import sys
import tempfile
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import aiofiles
from loguru import logger

from ..errors import OutputUnwritableError


@dataclass
class Report:
    """Tabla de resultados: metadatos clave=valor, columnas y filas."""

    name: str
    columns: list[str]
    rows: list[list[Any]] = field(default_factory=list)
    metadata: dict[str, Any] = field(default_factory=dict)

    def add_row(self, *values: Any):
        if len(values) != len(self.columns):
            raise ValueError(f"La fila tiene {len(values)} valores y hay {len(self.columns)} columnas")
        self.rows.append(list(values))

    def column(self, name: str) -> list[Any]:
        index = self.columns.index(name)
        return [row[index] for row in self.rows]


def format_value(value: Any) -> str:
    """Floats con 17 cifras significativas y punto decimal; el resto como texto."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.17g}"
    if value is None:
        return ""
    return str(value)


async def write_atomic(path: Path, text: str, what: str = "el reporte") -> Path:
    """Escribe text en path vía un temporal del mismo directorio y os.replace."""
    path = Path(path)
    tmp_name = None
    try:
        fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
        os.close(fd)
        async with aiofiles.open(tmp_name, "w", encoding="utf-8", newline="") as f:
            await f.write(text)
        os.replace(tmp_name, path)
    except OSError as e:
        if tmp_name and os.path.exists(tmp_name):
            os.unlink(tmp_name)
        logger.error(f"No se pudo escribir {what} en {path}: {e}")
        raise OutputUnwritableError(f"No se pudo escribir {what} en {path}: {e}") from e
    return path


class ReportWriter(ABC):
    """
    Clase base abstracta para los formatos de reporte.
    La escritura es atómica: archivo temporal en el mismo directorio + os.replace.
    """

    @abstractmethod
    def render(self, report: Report) -> str:
        """Devuelve el reporte completo como texto."""
        pass

    async def write(self, report: Report, path: Optional[Path] = None) -> Optional[Path]:
        text = self.render(report)
        if path is None:
            sys.stdout.write(text)
            sys.stdout.flush()
            return None

        path = await write_atomic(path, text)
        logger.success(f"Reporte '{report.name}' escrito en {path}")
        return path
