import os

import numpy as np
import pytest
from hypothesis import strategies as st

SAMPLES_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "samples")

seeds = st.integers(min_value=0, max_value=2**32 - 1)
shapes = st.sampled_from([(2, 1), (3, 1), (4, 2), (5, 3), (6, 2)])


def sample_path(name: str) -> str:
    return os.path.join(SAMPLES_DIR, name)


def kron_sylvester(D, T):
    """Reference solve of DS + SD = T through the vectorised (I⊗D + D⊗I) system."""
    D = np.asarray(D, dtype=np.float64)
    T = np.asarray(T, dtype=np.float64)
    k = D.shape[0]
    op = np.kron(np.eye(k), D) + np.kron(D.T, np.eye(k))
    return np.linalg.solve(op, T.reshape(-1, order="F")).reshape(k, k, order="F")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(autouse=True)
def _isolated_env(monkeypatch, tmp_path):
    for name in ("BWRANK_SEED", "BWRANK_DT", "BWRANK_RANK_TOL", "BWRANK_ANGLE_TOL", "BWRANK_LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)
    monkeypatch.setenv("BWRANK_RUNS_DIR", str(tmp_path / "runs"))
