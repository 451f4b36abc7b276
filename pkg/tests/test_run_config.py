import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from bwrank.utils.errors import ConfigError
from bwrank.utils.run_config import config_from_dict, load_run_config
from conftest import sample_path

BASE = {
    "n": 3,
    "k": 1,
    "Q0": [[1.0], [0.0], [0.0]],
    "D0": [[2.0]],
    "B0": [[0.1], [0.2]],
    "S0": [[0.3]],
}


def test_example3_sample_loads():
    cfg = load_run_config(sample_path("ex3-a.json"))
    assert (cfg.n, cfg.k, cfg.label) == (5, 3, "ex3-a")
    assert_allclose(cfg.frame.full, np.eye(5))
    assert_allclose(cfg.S0.entries, 0.25 * np.eye(3))
    assert cfg.reortho is True
    assert [o.kind for o in cfg.outputs] == ["csv", "svg"]
    assert cfg.seed == 7


def test_non_symmetric_t0_is_symmetrised():
    cfg = load_run_config(sample_path("ex3-b.json"))
    T0 = np.array([[0.15, -0.35, 0.2], [0.5, -0.25, 0.1], [-0.5, 0.5, 0.0]])
    assert_allclose(cfg.S0.entries, 0.25 * (T0 + T0.T), atol=1e-15)
    assert cfg.plot_entries["S"] == [[0, 0], [1, 1], [2, 2]]


def test_label_defaults_to_file_stem(tmp_path):
    path = tmp_path / "my-run.json"
    path.write_text(json.dumps(BASE))
    cfg = load_run_config(path)
    assert cfg.label == "my-run"
    assert cfg.system == "geodesic"
    assert cfg.outputs == []


def test_frame_completion_and_explicit_complement():
    cfg = config_from_dict(BASE)
    assert_allclose(cfg.frame.full.T @ cfg.frame.full, np.eye(3), atol=1e-14)
    explicit = config_from_dict({**BASE, "Qperp0": [[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]]})
    assert_allclose(explicit.frame.Qperp, [[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]])


def test_t0_converted_through_sylvester():
    data = {k: v for k, v in BASE.items() if k != "S0"}
    cfg = config_from_dict({**data, "T0": [[1.2]]})
    assert cfg.S0.entries[0, 0] == pytest.approx(1.2 / 4.0)


def test_seed_from_environment_wins(monkeypatch):
    monkeypatch.setenv("BWRANK_SEED", "99")
    assert config_from_dict({**BASE, "seed": 3}).seed == 99
    monkeypatch.delenv("BWRANK_SEED")
    assert config_from_dict({**BASE, "seed": 3}).seed == 3


def test_negative_environment_seed_is_rejected(monkeypatch):
    monkeypatch.setenv("BWRANK_SEED", "-4")
    with pytest.raises(ConfigError):
        config_from_dict(BASE)


def test_tolerances_are_carried():
    cfg = config_from_dict({**BASE, "rank_tol": 1e-9, "angle_tol": 1e-6})
    assert (cfg.rank_tol, cfg.angle_tol) == (1e-9, 1e-6)


def test_reortho_accepts_on_off_strings():
    assert config_from_dict({**BASE, "reortho": "off"}).reortho is False
    assert config_from_dict({**BASE, "reortho": "on"}).reortho is True


@pytest.mark.parametrize("patch", [
    {"T0": [[0.1]]},
    {"colour": "blue"},
    {"D0": [[-1.0]]},
    {"B0": [[0.1, 0.2]]},
    {"Q0": [[1.0], [1.0], [0.0]]},
    {"k": 4},
    {"dt": 0.0},
    {"system": "euler"},
    {"outputs": [{"kind": "png", "path": "x.png"}]},
    {"plot_entries": {"X": [[0, 0]]}},
    {"D0": "not a matrix"},
    {"seed": -1},
    {"seed": "seven"},
    {"seed": 1.5},
    {"seed": True},
    {"angle_tol": 0.0},
    {"angle_tol": "tight"},
    {"rank_tol": 2.0},
])
def test_invalid_configs_are_rejected(patch):
    with pytest.raises(ConfigError):
        config_from_dict({**BASE, **patch})


def test_missing_keys_rejected():
    data = dict(BASE)
    del data["B0"]
    with pytest.raises(ConfigError):
        config_from_dict(data)


def test_malformed_sample_and_unreadable_files(tmp_path):
    with pytest.raises(ConfigError):
        load_run_config(sample_path("malformed.json"))
    with pytest.raises(ConfigError):
        load_run_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{ not json")
    with pytest.raises(ConfigError):
        load_run_config(bad)


def test_initial_state_carries_config_data():
    s = config_from_dict(BASE).initial_state()
    assert_allclose(s.D, [[2.0]])
    assert_allclose(s.B, [[0.1], [0.2]])
    assert_allclose(s.S, [[0.3]])
