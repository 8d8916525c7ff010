"""Model and store files: bit-identical predictions after round trips."""

from __future__ import annotations

import numpy as np
import pytest

from sitgen.features.encoders import N_SP_FEATURES
from sitgen.gbdt import (
    SpTrainConfig,
    forest_to_bytes,
    read_forest,
    sp_predict,
    sp_train,
    write_forest,
)
from sitgen.nn import UamatConfig, UamatModel, forward, load_model, model_to_bytes, save_model
from sitgen.service import (
    TagStore,
    build_tag_store,
    read_store,
    store_to_bytes,
    write_store,
)


@pytest.fixture(scope="module")
def forest():
    rng = np.random.default_rng(0)
    X = rng.uniform(size=(200, N_SP_FEATURES))
    y = rng.integers(0, 4, size=200)
    return sp_train(X, y, SpTrainConfig(rounds=12, max_depth=4), c=4)


@pytest.fixture(scope="module")
def model():
    cfg = UamatConfig(c=4, n_mels=16, n_frames=32, user_dim=8, width=0.25, init_seed=3)
    return UamatModel.build(cfg)


class TestForestFile:
    def test_round_trip_bit_identical_predictions(self, forest, tmp_path):
        path = tmp_path / "sp.spf"
        write_forest(path, forest)
        again = read_forest(path)
        rng = np.random.default_rng(1)
        for _ in range(100):
            x = rng.uniform(size=N_SP_FEATURES)
            a = sp_predict(forest, x).probs
            b = sp_predict(again, x).probs
            assert a == b  # exact float equality

    def test_round_trip_preserves_config_and_loss(self, forest, tmp_path):
        path = tmp_path / "sp.spf"
        write_forest(path, forest)
        again = read_forest(path)
        assert again.c == forest.c
        assert again.config == forest.config
        assert again.train_loss_history == pytest.approx(forest.train_loss_history)
        assert again.feature_names == forest.feature_names

    def test_bytes_deterministic(self, forest):
        assert forest_to_bytes(forest) == forest_to_bytes(forest)

    def test_double_round_trip_same_bytes(self, forest, tmp_path):
        p1 = tmp_path / "a.spf"
        write_forest(p1, forest)
        again = read_forest(p1)
        assert forest_to_bytes(again) == p1.read_bytes()

    def test_corrupted_magic_rejected(self, forest, tmp_path):
        path = tmp_path / "sp.spf"
        write_forest(path, forest)
        raw = bytearray(path.read_bytes())
        raw[:4] = b"JUNK"
        path.write_bytes(bytes(raw))
        with pytest.raises(ValueError):
            read_forest(path)

    def test_truncated_rejected(self, forest, tmp_path):
        path = tmp_path / "sp.spf"
        write_forest(path, forest)
        path.write_bytes(path.read_bytes()[:-20])
        with pytest.raises(ValueError):
            read_forest(path)


class TestModelFile:
    def test_round_trip_bit_identical_predictions(self, model, tmp_path):
        path = tmp_path / "m.uam"
        save_model(path, model)
        again = load_model(path)
        rng = np.random.default_rng(2)
        for _ in range(100):
            mel = rng.normal(size=(16, 32)).astype(np.float32)
            user = rng.normal(size=8).astype(np.float32)
            a = forward(model, mel, user).probs
            b = forward(again, mel, user).probs
            assert a == b

    def test_round_trip_preserves_config(self, model, tmp_path):
        path = tmp_path / "m.uam"
        save_model(path, model)
        again = load_model(path)
        assert again.config == model.config

    def test_expected_c_guard(self, model, tmp_path):
        path = tmp_path / "m.uam"
        save_model(path, model)
        assert load_model(path, expected_c=4).config.c == 4
        with pytest.raises(ValueError):
            load_model(path, expected_c=8)

    def test_bytes_deterministic(self, model):
        assert model_to_bytes(model) == model_to_bytes(model)

    def test_corruption_rejected(self, model, tmp_path):
        path = tmp_path / "m.uam"
        save_model(path, model)
        raw = bytearray(path.read_bytes())
        raw[:4] = b"JUNK"
        path.write_bytes(bytes(raw))
        with pytest.raises(ValueError):
            load_model(path)

    def test_truncated_rejected(self, model, tmp_path):
        path = tmp_path / "m.uam"
        save_model(path, model)
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(ValueError):
            load_model(path)


def small_store(model):
    rng = np.random.default_rng(4)
    tracks = [f"t{i:03d}" for i in range(6)]
    users = [f"u{i:03d}" for i in range(4)]
    mels = {t: rng.normal(size=(16, 32)).astype(np.float32) for t in tracks}
    embeddings = {u: rng.normal(size=8).astype(np.float32) for u in users}
    return build_tag_store(model, tracks, users, mels, embeddings)


class TestStoreFile:
    def test_round_trip_bit_identical(self, model, tmp_path):
        store = small_store(model)
        path = tmp_path / "s.tgs"
        write_store(path, store)
        again = read_store(path)
        assert again.store_hash() == store.store_hash()
        assert again.c == store.c
        assert again.model_hash == store.model_hash
        assert again.track_ids == store.track_ids
        assert again.user_ids == store.user_ids
        np.testing.assert_array_equal(again.probs, store.probs)
        for t in store.track_ids:
            for u in store.user_ids:
                a, b = store.lookup(t, u), again.lookup(t, u)
                assert (a is None) == (b is None)
                if a is not None:
                    assert a.probs == b.probs

    def test_bytes_deterministic(self, model):
        store = small_store(model)
        assert store_to_bytes(store) == store_to_bytes(store)

    def test_corruption_rejected(self, model, tmp_path):
        store = small_store(model)
        path = tmp_path / "s.tgs"
        write_store(path, store)
        raw = bytearray(path.read_bytes())
        raw[:4] = b"JUNK"
        path.write_bytes(bytes(raw))
        with pytest.raises(ValueError):
            read_store(path)

    def test_truncation_rejected(self, model, tmp_path):
        store = small_store(model)
        path = tmp_path / "s.tgs"
        write_store(path, store)
        path.write_bytes(path.read_bytes()[:-4])
        with pytest.raises(ValueError):
            read_store(path)
