# src/principal_trace/reports/json_writer.py

import json
import math

from .base import Report, ReportWriter


def _jsonable(value):
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return str(value)


class JsonReportWriter(ReportWriter):
    def render(self, report: Report) -> str:
        document = {
            "report": report.name,
            "metadata": {k: _jsonable(v) for k, v in report.metadata.items()},
            "columns": list(report.columns),
            "rows": [[_jsonable(v) for v in row] for row in report.rows],
        }
        return json.dumps(document, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
