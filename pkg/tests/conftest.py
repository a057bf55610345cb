"""Shared pytest fixtures: a coarse table built once per session."""

from __future__ import annotations

import math
import os

import pytest

from gwc_bssrdf.core.medium import MediumParams
from gwc_bssrdf.model.table import BssrdfTable, BuildConfig, TableGrids, build_table

ETA = 1.33
G = 0.0

# Same r_first and r_max (about 243 mfp) as the full grid, with fewer radii.
COARSE_GRIDS = dict(n_rho=12, n_theta=4, n_r=24, r_first=0.0025, r_growth=1.647)
COARSE_SAMPLES = 32

WORKERS = os.cpu_count() or 1


@pytest.fixture(scope="session")
def coarse_grids() -> TableGrids:
    return TableGrids.build(**COARSE_GRIDS)


@pytest.fixture(scope="session")
def diagnostics_path(tmp_path_factory: pytest.TempPathFactory):
    return tmp_path_factory.mktemp("build") / "diagnostics.h5"


@pytest.fixture(scope="session")
def coarse_table(coarse_grids: TableGrids, diagnostics_path) -> BssrdfTable:
    """Table for eta = 1.33, g = 0 on reduced grids; diagnostics kept on disk."""
    config = BuildConfig(grids=coarse_grids, diagnostics=diagnostics_path)
    return build_table(ETA, G, build_samples=COARSE_SAMPLES, config=config)


@pytest.fixture(scope="session")
def full_table() -> BssrdfTable:
    """Full 100 x 10 x 64 table; only requested by slow tests."""
    return build_table(ETA, G, config=BuildConfig(grids=TableGrids.build(), workers=WORKERS))


@pytest.fixture
def skin_medium() -> MediumParams:
    return MediumParams.from_albedo(ETA, G, 0.95)


@pytest.fixture
def grazing() -> float:
    return math.radians(89.0)
