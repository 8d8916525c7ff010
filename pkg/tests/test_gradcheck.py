"""Finite-difference gradient verification, including a broken-gradient probe."""

from __future__ import annotations

import numpy as np
import pytest

from sitgen.nn.gradcheck import grad_check
from sitgen.nn.layers import Dense
from sitgen.nn.model import UamatConfig, UamatModel


def small_setup(seed=0, n=4):
    cfg = UamatConfig(
        c=4, n_mels=16, n_frames=16, user_dim=5, width=0.1,
        dtype="float64", init_seed=seed,
    )
    model = UamatModel.build(cfg)
    rng = np.random.default_rng(seed + 100)
    mels = rng.normal(size=(n, cfg.n_mels, cfg.n_frames))
    users = rng.normal(size=(n, cfg.user_dim))
    labels = rng.integers(0, cfg.c, size=n)
    return model, mels, users, labels


class TestGradCheck:
    def test_small_model_passes_tolerance(self):
        model, mels, users, labels = small_setup()
        err = grad_check(
            model, mels, users, labels, samples_per_layer_type=10, seed=0
        )
        assert err < 1e-4

    def test_error_is_deterministic(self):
        model, mels, users, labels = small_setup(seed=1)
        e1 = grad_check(model, mels, users, labels, samples_per_layer_type=5, seed=3)
        model2, mels2, users2, labels2 = small_setup(seed=1)
        e2 = grad_check(model2, mels2, users2, labels2, samples_per_layer_type=5, seed=3)
        assert e1 == e2

    def test_detects_corrupted_backward(self, monkeypatch):
        # Scale one parameter gradient by 5%: the check must degrade by
        # orders of magnitude. This guards against the checker silently
        # agreeing with whatever the backward pass computes.
        model, mels, users, labels = small_setup(seed=2)
        original = Dense.backward

        def corrupted(self, grad):
            out = original(self, grad)
            self.g["w"] = self.g["w"] * 1.05
            return out

        monkeypatch.setattr(Dense, "corrupted_marker", True, raising=False)
        monkeypatch.setattr(Dense, "backward", corrupted)
        err = grad_check(
            model, mels, users, labels, samples_per_layer_type=10, seed=0
        )
        assert err > 1e-3

    def test_float32_model_rejected(self):
        cfg = UamatConfig(
            c=4, n_mels=16, n_frames=16, user_dim=5, width=0.1,
            dtype="float32", init_seed=0,
        )
        model = UamatModel.build(cfg)
        rng = np.random.default_rng(0)
        with pytest.raises(ValueError):
            grad_check(
                model,
                rng.normal(size=(2, 16, 16)),
                rng.normal(size=(2, 5)),
                rng.integers(0, 4, size=2),
            )
