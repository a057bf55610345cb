"""HTML validation report generator using Jinja2 templates."""

from __future__ import annotations

from datetime import datetime, timezone
from pathlib import Path
from typing import Any

import jinja2

from ..core.results import BuildStats, ErrorStats
from .targets import TargetChecker, config_key

_HTML_TEMPLATE = """\
<!DOCTYPE html>
<html lang="en">
<head>
<meta charset="utf-8">
<title>{{ title }}</title>
<style>
  body { font: 14px/1.5 system-ui, sans-serif; color: #222; background: #fafafa;
         max-width: 1100px; margin: 0 auto; padding: 0 20px 40px; }
  h1 { font-size: 22px; margin: 28px 0 2px; }
  h2 { font-size: 15px; margin: 28px 0 8px; text-transform: uppercase;
       letter-spacing: 0.04em; color: #555; }
  .sub { color: #777; font-size: 12px; }
  .totals { display: flex; gap: 28px; margin-top: 18px; }
  .totals b { display: block; font-size: 26px; }
  .ok { color: #2b7a3d; }
  .bad { color: #b3261e; }
  table.errors, table.build { border-collapse: collapse; width: 100%; background: #fff; }
  table.errors th, table.errors td, table.build th, table.build td {
      padding: 5px 10px; border-bottom: 1px solid #e4e4e4; }
  table.errors td.num { text-align: right; font-family: ui-monospace, monospace; }
  table.build th { text-align: left; width: 40%; font-weight: 500; color: #555; }
  .ratio { width: 120px; height: 8px; background: #eee; border-radius: 4px; }
  .ratio span { display: block; height: 8px; border-radius: 4px; }
</style>
</head>
<body>
<h1>{{ title }}</h1>
<div class="sub">{{ timestamp }} &middot; eta {{ eta }} &middot; g {{ g }}</div>

<div class="totals">
  <div><b>{{ rows|length }}</b>configurations</div>
  <div class="ok"><b>{{ passed }}</b>within limit</div>
  <div class="bad"><b>{{ rows|length - passed }}</b>above limit</div>
  <div><b>{{ "%.3f"|format(worst) }}%</b>worst mean error</div>
</div>

<h2>Relative error against the oracle (%)</h2>
<table class="errors">
  <tr><th>rho</th><th>theta</th><th>model</th><th>mean</th><th>p50</th><th>p95</th>
    <th>p99</th><th>n</th><th>excluded</th><th>limit</th><th>mean / limit</th><th></th></tr>
  {% for row in rows %}
  <tr>
    <td class="num">{{ row.rho }}</td>
    <td class="num">{{ "%.0f"|format(row.theta_deg) }}&deg;</td>
    <td>{{ row.model }}</td>
    <td class="num {{ 'ok' if row.passed else 'bad' }}">{{ "%.4f"|format(row.mean) }}</td>
    <td class="num">{{ "%.4f"|format(row.p50) }}</td>
    <td class="num">{{ "%.4f"|format(row.p95) }}</td>
    <td class="num">{{ "%.4f"|format(row.p99) }}</td>
    <td class="num">{{ row.n }}</td>
    <td class="num">{{ row.excluded }}</td>
    {% if row.limit is not none %}
    <td class="num">{{ "%.4f"|format(row.limit) }}</td>
    <td><div class="ratio"><span class="{{ 'ok' if row.passed else 'bad' }}"
      style="width: {{ [100 * row.mean / row.limit, 100]|min if row.limit > 0 else 100 }}%;
             background: currentColor;"></span></div></td>
    {% else %}
    <td class="num">-</td><td></td>
    {% endif %}
    <td class="{{ 'ok' if row.passed else 'bad' }}">{{ 'PASS' if row.passed else 'FAIL' }}</td>
  </tr>
  {% endfor %}
</table>

{% if build %}
<h2>Table build statistics</h2>
<table class="build">
  {% for key, value in build.items() %}
  <tr><th>{{ key }}</th><td>{{ value }}</td></tr>
  {% endfor %}
</table>
{% endif %}
</body>
</html>
"""


class HTMLReportGenerator:
    """Generate a self-contained HTML report from validation results."""

    def __init__(self, title: str = "GWC BSSRDF Validation Report", checker: TargetChecker | None = None):
        self.title = title
        self.checker = checker or TargetChecker()

    def rows(self, results: list[ErrorStats], threshold: float | None = None) -> list[dict[str, Any]]:
        rows = []
        for stats in results:
            published = self.checker.baseline.get(config_key(stats))
            if threshold is not None:
                limit = threshold
            elif published is not None:
                limit = self.checker.limit(published)
            else:
                limit = None
            rows.append({
                "rho": stats.config.rho,
                "theta_deg": stats.config.theta_deg,
                "model": stats.model,
                "mean": stats.mean_rel_error,
                "p50": stats.p50,
                "p95": stats.p95,
                "p99": stats.p99,
                "n": stats.n_samples,
                "excluded": stats.excluded,
                "limit": limit,
                "passed": limit is None or stats.mean_rel_error <= limit,
            })
        return rows

    def generate(
        self,
        results: list[ErrorStats],
        output_path: str | Path = "report.html",
        build_stats: BuildStats | None = None,
        threshold: float | None = None,
    ) -> Path:
        template = jinja2.Template(_HTML_TEMPLATE)
        rows = self.rows(results, threshold)
        first = results[0].config if results else None

        html = template.render(
            title=self.title,
            timestamp=datetime.now(timezone.utc).strftime("%Y-%m-%d %H:%M UTC"),
            eta=first.eta if first else "-",
            g=first.g if first else "-",
            rows=rows,
            passed=sum(1 for row in rows if row["passed"]),
            worst=max((row["mean"] for row in rows), default=0.0),
            build=build_stats.to_dict() if build_stats else None,
        )

        output_path = Path(output_path)
        output_path.parent.mkdir(parents=True, exist_ok=True)
        output_path.write_text(html, encoding="utf-8")
        return output_path
