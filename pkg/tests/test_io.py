import json

import numpy as np
import pytest

from kingman import io
from kingman.convolution import SampleBatch
from kingman.fluctuations import harvest_wh_pairs
from kingman.processes import PathGrid, SymmetricLevySpec, simulate_kl_path
from kingman.radchf import LevyPair
from kingman.verify import TEST_PAIRS


def test_batch_round_trip(tmp_path, rng):
    batch = SampleBatch(0.5, rng.exponential(size=(50, 3)), seed=9, meta={"law": "test"})
    csv_path, json_path = io.save_batch(batch, tmp_path / "b")
    assert csv_path.read_text().splitlines()[0] == "x1,x2,x3"
    side = json.loads(json_path.read_text())
    assert side["s"] == 0.5 and side["dim"] == 3 and side["n"] == 50 and side["seed"] == 9
    back = io.load_batch(tmp_path / "b")
    np.testing.assert_array_equal(back.data, batch.data)
    assert back.order == batch.order and back.seed == 9 and back.meta == {"law": "test"}


def test_batch_accepts_csv_suffix(tmp_path):
    io.save_batch(SampleBatch(0.0, [1.0, 2.0]), tmp_path / "b")
    assert io.load_batch(tmp_path / "b.csv").n == 2


def test_batch_without_sidecar(tmp_path):
    io.write_csv(tmp_path / "raw.csv", ["x1"], np.array([[1.0], [2.0]]))
    with pytest.raises(ValueError):
        io.load_batch(tmp_path / "raw")
    assert io.load_batch(tmp_path / "raw", s=1.0).order.s == 1.0


def test_batch_sidecar_mismatch(tmp_path):
    io.save_batch(SampleBatch(0.0, [1.0, 2.0]), tmp_path / "b")
    side = tmp_path / "b.json"
    meta = json.loads(side.read_text())
    meta["n"] = 5
    side.write_text(json.dumps(meta))
    with pytest.raises(ValueError):
        io.load_batch(tmp_path / "b")


def test_single_path_schema(tmp_path):
    path = PathGrid([0.0, 0.5, 1.0], np.array([[0.0, 0.0], [1.0, 2.0], [3.0, 4.0]]), seed=3)
    csv_path, _ = io.save_path(path, tmp_path / "p")
    assert csv_path.read_text().splitlines()[0] == "t,x1,x2"
    back = io.load_path(tmp_path / "p")
    np.testing.assert_array_equal(back.states, path.states)
    np.testing.assert_array_equal(back.times, path.times)
    assert back.seed == 3


def test_path_batch_round_trip(tmp_path, rng):
    paths = simulate_kl_path(TEST_PAIRS["atom+lambda"], [0.0, 0.25, 1.0], rng, n_paths=7, dt=0.1)
    csv_path, _ = io.save_path(paths, tmp_path / "kl")
    assert csv_path.read_text().splitlines()[0] == "path,t,x1,x2"
    back = io.load_path(tmp_path / "kl")
    np.testing.assert_array_equal(back.states, paths.states)


def test_pairs_round_trip(tmp_path):
    pairs = harvest_wh_pairs(SymmetricLevySpec(1.0, [(0.5, 2.0)]), 1.5, 200, 1e-2, np.random.default_rng(1))
    csv_path, json_path = io.save_pairs(pairs, tmp_path / "wh", seed=1)
    assert csv_path.read_text().splitlines()[0] == "g_bar,x_bar,g_comp,x_comp"
    side = json.loads(json_path.read_text())
    assert side["p"] == 1.5 and side["n"] == 200 and side["dt"] == 1e-2 and side["seed"] == 1
    assert side["spec"] == {"sigma": 1.0, "jump_atoms": [[0.5, 2.0]]}
    back = io.load_pairs(tmp_path / "wh")
    np.testing.assert_array_equal(back.columns(), pairs.columns())


def test_levy_pair_round_trip(tmp_path):
    pair = LevyPair(1.0, [0.6, 0.0], [[0.8, 1.5]], [0.7])
    io.save_levy_pair(pair, tmp_path / "pair.json")
    back = io.load_levy_pair(tmp_path / "pair.json")
    assert back.to_dict() == pair.to_dict()


def test_float_format_is_exact(tmp_path):
    values = np.array([[0.1], [1 / 3], [np.nextafter(1.0, 2.0)], [1e-300]])
    io.write_csv(tmp_path / "f.csv", ["x1"], values)
    _, back = io.read_csv(tmp_path / "f.csv")
    np.testing.assert_array_equal(back, values)


def test_ragged_csv(tmp_path):
    (tmp_path / "bad.csv").write_text("x1,x2\n1,2,3\n")
    with pytest.raises(ValueError):
        io.read_csv(tmp_path / "bad.csv")
