"""Accuracy targets: compare validation results against published mean errors."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from ..core.results import ErrorStats

logger = logging.getLogger(__name__)

# Published mean relative error (%) for eta = 1.33, g = 0, keyed "rho/theta_deg".
PUBLISHED_MEAN_ERRORS: dict[str, float] = {
    "0.5/0": 0.026, "0.9/0": 0.026, "0.99/0": 0.021,
    "0.5/60": 0.08, "0.9/60": 0.26, "0.99/60": 0.25,
    "0.5/89": 0.22, "0.9/89": 0.53, "0.99/89": 0.48,
}


def config_key(stats: ErrorStats) -> str:
    return f"{stats.config.rho:g}/{round(stats.config.theta_deg):d}"


@dataclass
class TargetResult:
    """Outcome of a target check."""

    passed: bool
    checked: list[dict[str, Any]] = field(default_factory=list)
    failures: list[dict[str, Any]] = field(default_factory=list)
    untracked: list[str] = field(default_factory=list)


class TargetChecker:
    """
    Compare measured mean relative errors against a baseline of published
    values.

    A configuration passes when its mean stays within ``factor`` times the
    published value (never tighter than ``floor`` percent) and never above
    ``ceiling`` percent.  Baselines are plain JSON so alternatives can be
    kept next to the tables they describe.
    """

    def __init__(
        self,
        baseline: dict[str, float] | None = None,
        factor: float = 3.0,
        floor: float = 0.05,
        ceiling: float = 1.0,
    ):
        self.baseline = dict(PUBLISHED_MEAN_ERRORS if baseline is None else baseline)
        self.factor = factor
        self.floor = floor
        self.ceiling = ceiling

    @classmethod
    def from_file(cls, path: str | Path, **kwargs: Any) -> TargetChecker:
        with open(path) as fh:
            return cls(json.load(fh), **kwargs)

    def save_baseline(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as fh:
            json.dump(self.baseline, fh, indent=2)
        return path

    def limit(self, published: float) -> float:
        return min(max(self.factor * published, self.floor), self.ceiling)

    def check(self, results: list[ErrorStats]) -> TargetResult:
        checked: list[dict[str, Any]] = []
        failures: list[dict[str, Any]] = []
        untracked: list[str] = []

        for stats in results:
            key = config_key(stats)
            published = self.baseline.get(key)
            if published is None:
                untracked.append(key)
                continue
            limit = self.limit(published)
            entry = {
                "config": key,
                "published": published,
                "measured": round(stats.mean_rel_error, 5),
                "limit": limit,
            }
            checked.append(entry)
            if stats.mean_rel_error > limit:
                logger.warning("%s: mean %.4f%% exceeds limit %.4f%%", key, stats.mean_rel_error, limit)
                failures.append(entry)

        return TargetResult(
            passed=not failures,
            checked=checked,
            failures=failures,
            untracked=untracked,
        )
