import os
import sys

import numpy as np
import pytest

CURRENT_DIR = os.path.dirname(__file__)
REPO_DIR = os.path.abspath(os.path.join(CURRENT_DIR, "..", ".."))
if REPO_DIR not in sys.path:
    sys.path.insert(0, REPO_DIR)

from asn_rtf.models.layout import NodeLayout
from asn_rtf.services.simulation.scene_generator import random_scene


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: Monte-Carlo checks that take minutes")


def random_hpd(rng: np.random.Generator, dim: int, floor: float = 0.1) -> np.ndarray:
    b = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return b @ b.conj().T / dim + floor * np.eye(dim)


def random_vector(rng: np.random.Generator, dim: int) -> np.ndarray:
    return rng.standard_normal(dim) + 1j * rng.standard_normal(dim)


@pytest.fixture
def layout():
    return NodeLayout(node_sizes=(4, 4, 4, 3))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def oracle_scene(layout):
    return random_scene(layout, bins=17, seed=7, frames=200)


@pytest.fixture
def write_config(tmp_path):
    # Writes config text to tmp_path and returns the file path
    def _write_config(text: str, name: str = "experiment.ini"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path
    return _write_config
