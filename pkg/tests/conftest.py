# -*- coding: utf-8 -*-
"""Shared fixtures: seeded generators, small grids and prebuilt geometries."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from ahsolve.calculus.cones import cone_distance
from ahsolve.calculus.operators import SymmetricOperator
from ahsolve.catalog import make_background
from ahsolve.geometry.fields import build_geometry
from ahsolve.geometry.grid import PeriodicGrid


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture
def grid1() -> PeriodicGrid:
    return PeriodicGrid.uniform(1, 8)


@pytest.fixture
def grid2() -> PeriodicGrid:
    return PeriodicGrid.uniform(2, 4)


@pytest.fixture
def flat1(grid1):
    return build_geometry(grid1, "flat")


@pytest.fixture
def flat2(grid2):
    return build_geometry(grid2, "flat")


@pytest.fixture
def perturbed2(grid2):
    return build_geometry(grid2, "perturbed_j", 0.1)


@pytest.fixture
def sigma1_n1() -> SymmetricOperator:
    return SymmetricOperator.log_sigma_k(1, 1)


@pytest.fixture
def sigma2_n2() -> SymmetricOperator:
    return SymmetricOperator.log_sigma_k(2, 2)


@pytest.fixture
def identity2(grid2) -> np.ndarray:
    return make_background(grid2, {"name": "identity"})


@pytest.fixture
def write_problem(tmp_path):
    """Write a JSON problem file and return its path."""

    def _write(data: dict, name: str = "problem.json") -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return path

    return _write


@pytest.fixture
def cone_points(rng):
    """Draw interior cone points; entries may be negative when k < n."""

    def _draw(op: SymmetricOperator, count: int) -> np.ndarray:
        # all entries ≥ 1 after the lift, then slide back to `margin` off the boundary
        lifted = rng.uniform(-3.0, 3.0, size=(count, op.n)) + 4.0
        margin = rng.uniform(0.5, 2.0, size=count)
        return lifted - (cone_distance(op.cone, lifted) - margin)[:, None]

    return _draw
