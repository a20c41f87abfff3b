"""Shared fixtures: seeded generators, small D-optimal instances and the test quartic."""

import json

import numpy as np
import pytest

from src.core.oracles import RelSmoothPair
from src.services.objectives import DOptimalDesign, UnivariatePolynomial
from src.services.problem_loader import random_design_matrix
from src.services.references import LogBarrierSimplexRef

# f(x) = x^4 - 4x^3 + 7x^2 - 5x + 3, so f''(x) = 12 (x - 1)^2 + 2
QUARTIC_COEFFICIENTS = [3.0, -5.0, 7.0, -4.0, 1.0]


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def dopt_H():
    return random_design_matrix(3, 10, seed=0)


@pytest.fixture
def dopt_pair(dopt_H):
    return RelSmoothPair(DOptimalDesign(dopt_H), LogBarrierSimplexRef(10), 1.0, 0.0)


@pytest.fixture
def quartic_1d():
    return UnivariatePolynomial(QUARTIC_COEFFICIENTS)


@pytest.fixture
def write_spec(tmp_path):
    """Write a problem spec dict (or raw text) to a file and return its path."""
    def write(content, name="problem.json"):
        path = tmp_path / name
        path.write_text(content if isinstance(content, str) else json.dumps(content), encoding="utf-8")
        return path
    return write
