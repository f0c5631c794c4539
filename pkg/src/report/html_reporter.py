"""
HTML report generator for benchmark results.
"""

import os
from datetime import datetime
from typing import Any, Dict, List, Optional

import pandas as pd
from jinja2 import Environment

from ..logger import get_logger

logger = get_logger()

REPORT_TEMPLATE = """<!DOCTYPE html>
<html lang="en">
<head>
    <meta charset="UTF-8">
    <meta name="viewport" content="width=device-width, initial-scale=1.0">
    <title>Sensor Cleaning Benchmark Report</title>
    <style>
        * { margin: 0; padding: 0; box-sizing: border-box; }
        body {
            font-family: 'Segoe UI', Tahoma, Geneva, Verdana, sans-serif;
            background: linear-gradient(135deg, #667eea 0%, #764ba2 100%);
            min-height: 100vh;
            padding: 20px;
        }
        .container { max-width: 1200px; margin: 0 auto; }
        .header { text-align: center; color: white; margin-bottom: 30px; }
        .header h1 { font-size: 2.2em; margin-bottom: 10px; text-shadow: 2px 2px 4px rgba(0,0,0,0.3); }
        .section {
            background: white;
            border-radius: 15px;
            padding: 25px;
            margin-bottom: 30px;
            box-shadow: 0 10px 30px rgba(0,0,0,0.1);
            overflow-x: auto;
        }
        .section h2 { color: #667eea; margin-bottom: 15px; }
        .summary-grid {
            display: grid;
            grid-template-columns: repeat(auto-fit, minmax(200px, 1fr));
            gap: 20px;
        }
        .summary-item {
            text-align: center;
            padding: 20px;
            background: #f8f9fa;
            border-radius: 10px;
            border-left: 4px solid #667eea;
        }
        .summary-item h3 { color: #667eea; margin-bottom: 10px; }
        .summary-item .value { font-size: 1.4em; font-weight: bold; color: #333; }
        table { border-collapse: collapse; width: 100%; font-size: 0.9em; }
        th, td { padding: 6px 10px; border-bottom: 1px solid #eee; text-align: right; }
        th { background: #f8f9fa; color: #555; }
        td.label, th.label { text-align: left; }
        tr.average td { font-weight: bold; border-top: 2px solid #667eea; }
        td.best { color: #28a745; font-weight: bold; }
        .timestamp { text-align: center; color: white; margin-top: 30px; opacity: 0.8; }
    </style>
</head>
<body>
<div class="container">
    <div class="header">
        <h1>Sensor Cleaning Benchmark Report</h1>
        <p>MAE of cleaned states against pre-injection ground truth (normalized units)</p>
    </div>

    <div class="section">
        <h2>Best method per fault campaign</h2>
        <div class="summary-grid">
        {% for fault, label in best.items() %}
            <div class="summary-item"><h3>{{ fault }}</h3><div class="value">{{ label }}</div></div>
        {% endfor %}
        </div>
    </div>

    <div class="section">
        <h2>MAE by process</h2>
        <table>
            <tr>{% for col in columns %}<th class="{{ 'label' if loop.index <= 2 else '' }}">{{ col }}</th>{% endfor %}</tr>
            {% for row in rows %}
            <tr class="{{ 'average' if row.process == 'average' else '' }}">
                <td class="label">{{ row.fault }}</td><td class="label">{{ row.process }}</td>
                {% for label in labels %}
                <td class="{{ 'best' if row.best == label else '' }}">{{ '%.4f' % row.cells[label] if row.cells[label] == row.cells[label] else '-' }}</td>
                {% endfor %}
            </tr>
            {% endfor %}
        </table>
    </div>

    <div class="section">
        <h2>Runs</h2>
        <table>
            <tr><th class="label">fault</th><th class="label">method</th><th>average MAE</th><th>runtime (s)</th></tr>
            {% for run in runs %}
            <tr><td class="label">{{ run.fault }}</td><td class="label">{{ run.label }}</td>
                <td>{{ '%.4f' % run.average }}</td><td>{{ '%.2f' % run.runtime }}</td></tr>
            {% endfor %}
        </table>
    </div>

    {% if meta %}
    <div class="section">
        <h2>Setup</h2>
        <table>
            {% for key, value in meta.items() %}
            <tr><td class="label">{{ key }}</td><td class="label">{{ value }}</td></tr>
            {% endfor %}
        </table>
    </div>
    {% endif %}

    <div class="timestamp"><p>Report generated on {{ generated }}</p></div>
</div>
</body>
</html>
"""


class HTMLReporter:
    """Generate HTML reports for benchmark results."""

    def __init__(self, output_dir: str = "reports"):
        self.output_dir = output_dir
        self.template = Environment(autoescape=True).from_string(REPORT_TEMPLATE)
        os.makedirs(output_dir, exist_ok=True)

    def generate_report(
        self,
        table: pd.DataFrame,
        runs: List[Any],
        meta: Optional[Dict[str, Any]] = None,
        best: Optional[Dict[str, str]] = None,
        filename: str = None,
    ) -> str:
        """
        Generate an HTML report from the summary table and the runs.

        Args:
            table: ``BenchRunner.summary_table()`` output
            runs: BenchmarkRun list (runtimes are shown here only)
            meta: Benchmark setup shown at the bottom
            best: Best method label per fault
            filename: Optional filename for the report

        Returns:
            str: Path to the generated HTML file
        """
        if filename is None:
            timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
            filename = f"bench_report_{timestamp}.html"

        filepath = os.path.join(self.output_dir, filename)
        with open(filepath, "w", encoding="utf-8") as f:
            f.write(self.render(table, runs, meta or {}, best or {}))

        logger.info(f"HTML report generated: {filepath}")
        return filepath

    def render(
        self,
        table: pd.DataFrame,
        runs: List[Any],
        meta: Dict[str, Any],
        best: Dict[str, str],
    ) -> str:
        labels = [c for c in table.columns if c not in ("fault", "process")]
        rows = []
        for record in table.to_dict(orient="records"):
            values = {label: record[label] for label in labels}
            finite = {k: v for k, v in values.items() if v == v}
            rows.append(
                {
                    "fault": record["fault"],
                    "process": record["process"],
                    "cells": values,
                    "best": min(finite, key=finite.get) if finite else None,
                }
            )
        return self.template.render(
            columns=list(table.columns),
            labels=labels,
            rows=rows,
            runs=runs,
            meta=meta,
            best=best,
            generated=datetime.now().strftime("%Y-%m-%d %H:%M:%S"),
        )
