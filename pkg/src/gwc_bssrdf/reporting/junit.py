"""JUnit XML output for validation sweeps."""

from __future__ import annotations

import xml.etree.ElementTree as ET
from datetime import datetime, timezone
from pathlib import Path

from ..core.results import ErrorStats


class JUnitXMLWriter:
    """One testcase per validated (rho, theta); it fails when the mean relative
    error exceeds the threshold."""

    def __init__(self, suite_name: str = "gwc-bssrdf"):
        self.suite_name = suite_name

    def write(
        self,
        results: list[ErrorStats],
        threshold: float,
        output_path: str | Path = "results.xml",
    ) -> Path:
        testsuite = ET.Element("testsuite")
        testsuite.set("name", self.suite_name)
        testsuite.set("timestamp", datetime.now(timezone.utc).isoformat())

        failures = 0
        for stats in results:
            testcase = ET.SubElement(testsuite, "testcase")
            testcase.set("classname", f"{self.suite_name}.{stats.model}")
            testcase.set("name", stats.config.label())

            if stats.mean_rel_error > threshold:
                failures += 1
                failure = ET.SubElement(testcase, "failure")
                failure.set("message", f"mean relative error above {threshold}%")
                failure.text = (
                    f"Expected: <= {threshold}%\n"
                    f"Actual: {stats.mean_rel_error:.5f}% "
                    f"(p99 {stats.p99:.5f}%, n={stats.n_samples})"
                )

        testsuite.set("tests", str(len(results)))
        testsuite.set("failures", str(failures))
        testsuite.set("errors", "0")

        tree = ET.ElementTree(testsuite)
        output_path = Path(output_path)
        output_path.parent.mkdir(parents=True, exist_ok=True)
        ET.indent(tree, space="  ")
        tree.write(output_path, encoding="unicode", xml_declaration=True)
        return output_path
