# src/principal_trace/reports/csv_writer.py

import csv
import io

from .base import Report, ReportWriter, format_value


class CsvReportWriter(ReportWriter):
    """Metadatos como líneas `# clave=valor`, luego cabecera y filas."""

    def render(self, report: Report) -> str:
        buffer = io.StringIO()
        buffer.write(f"# report={report.name}\n")
        for key in sorted(report.metadata):
            buffer.write(f"# {key}={format_value(report.metadata[key])}\n")
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(report.columns)
        for row in report.rows:
            writer.writerow([format_value(v) for v in row])
        return buffer.getvalue()
