# src/principal_trace/reports/__init__.py

from .base import Report, ReportWriter, write_atomic
from .csv_writer import CsvReportWriter
from .json_writer import JsonReportWriter


def get_writer(fmt: str) -> ReportWriter:
    """
    Factory que devuelve el escritor de reportes para el formato pedido.
    """
    if fmt == "csv":
        return CsvReportWriter()
    elif fmt == "json":
        return JsonReportWriter()
    else:
        raise ValueError(f"Formato de reporte desconocido: '{fmt}'")


__all__ = ["Report", "ReportWriter", "CsvReportWriter", "JsonReportWriter", "get_writer", "write_atomic"]
