"""Optimizer loop: overfitting, early stopping, holdout stratification."""

from __future__ import annotations

import numpy as np
import pytest

from sitgen.nn.model import UamatConfig, UamatModel
from sitgen.nn.training import TrainConfig, stratified_holdout, train


def separable_dataset(cfg, n_per_class=8, seed=0):
    """Each class gets a distinct bright band in the mel and a user offset."""
    rng = np.random.default_rng(seed)
    mels, users, labels = [], [], []
    band = cfg.n_mels // cfg.c
    for k in range(cfg.c):
        for _ in range(n_per_class):
            m = rng.normal(scale=0.1, size=(cfg.n_mels, cfg.n_frames))
            m[k * band : (k + 1) * band, :] += 3.0
            u = rng.normal(scale=0.1, size=cfg.user_dim)
            u[k % cfg.user_dim] += 2.0
            mels.append(m)
            users.append(u)
            labels.append(k)
    order = rng.permutation(len(labels))
    return (
        np.array(mels, dtype=np.float32)[order],
        np.array(users, dtype=np.float32)[order],
        np.array(labels, dtype=np.int64)[order],
    )


def tiny_model(seed=0, dropout=0.0):
    cfg = UamatConfig(
        c=4, n_mels=16, n_frames=16, user_dim=4, width=0.1, dropout=dropout,
        init_seed=seed,
    )
    return UamatModel.build(cfg), cfg


class TestTrainLoop:
    def test_overfits_separable_data(self):
        model, mcfg = tiny_model()
        mels, users, labels = separable_dataset(mcfg)
        cfg = TrainConfig(
            lr0=3e-3, batch_size=8, max_epochs=30, patience=30,
            val_fraction=0.25, seed=0,
        )
        model, history = train(model, mels, users, labels, cfg)
        final = history.epochs[-1]
        assert final.train_accuracy > 0.9
        assert len(history.epochs) <= 30

    def test_early_stopping_restores_best_epoch(self):
        model, mcfg = tiny_model()
        mels, users, labels = separable_dataset(mcfg, n_per_class=6)
        cfg = TrainConfig(
            lr0=3e-3, batch_size=8, max_epochs=40, patience=3,
            val_fraction=0.25, seed=1,
        )
        model, history = train(model, mels, users, labels, cfg)
        best = history.best_epoch
        val_losses = [e.val_loss for e in history.epochs]
        assert history.best_val_loss == pytest.approx(min(val_losses))
        assert val_losses[best] == pytest.approx(history.best_val_loss)
        # stop happened within patience epochs of the best one
        assert len(history.epochs) <= best + 1 + cfg.patience

    def test_deterministic_given_seed(self):
        results = []
        for _ in range(2):
            model, mcfg = tiny_model(seed=3)
            mels, users, labels = separable_dataset(mcfg, seed=3)
            cfg = TrainConfig(
                lr0=1e-3, batch_size=8, max_epochs=3, patience=3,
                val_fraction=0.25, seed=7,
            )
            _, history = train(model, mels, users, labels, cfg)
            results.append([e.train_loss for e in history.epochs])
        assert results[0] == results[1]

    def test_loss_decreases_from_start(self):
        model, mcfg = tiny_model()
        mels, users, labels = separable_dataset(mcfg)
        cfg = TrainConfig(
            lr0=3e-3, batch_size=8, max_epochs=10, patience=10,
            val_fraction=0.25, seed=0,
        )
        _, history = train(model, mels, users, labels, cfg)
        losses = [e.train_loss for e in history.epochs]
        assert losses[-1] < losses[0]

    def test_lr_schedule_decays_by_iteration(self):
        # 16 rows, 4 held out -> 12 train rows = 3 batches per epoch; with
        # decay every 3 iterations the rate halves exactly once per epoch.
        model, mcfg = tiny_model()
        mels, users, labels = separable_dataset(mcfg, n_per_class=4)
        cfg = TrainConfig(
            lr0=1e-2, decay_rate=0.5, decay_every=3, batch_size=4,
            max_epochs=4, patience=4, val_fraction=0.25, seed=0,
        )
        _, history = train(model, mels, users, labels, cfg)
        lrs = [e.lr for e in history.epochs]
        assert lrs[0] == pytest.approx(1e-2)  # last iteration of epoch 0
        assert lrs[1] == pytest.approx(5e-3)
        assert all(b <= a for a, b in zip(lrs, lrs[1:]))
        assert cfg.lr_at(0) == pytest.approx(1e-2)
        assert cfg.lr_at(3) == pytest.approx(5e-3)
        assert cfg.lr_at(6) == pytest.approx(2.5e-3)

    def test_empty_input_rejected(self):
        model, mcfg = tiny_model()
        with pytest.raises(ValueError):
            train(
                model,
                np.zeros((0, 16, 16)),
                np.zeros((0, 4)),
                np.zeros(0, dtype=np.int64),
                TrainConfig(),
            )


class TestStratifiedHoldout:
    def test_respects_fraction_per_class(self):
        labels = np.array([0] * 40 + [1] * 40 + [2] * 20)
        train_idx, val_idx = stratified_holdout(
            labels, 0.25, np.random.default_rng(0)
        )
        assert len(val_idx) == 10 + 10 + 5
        for cls, expect in ((0, 10), (1, 10), (2, 5)):
            assert int(np.sum(labels[val_idx] == cls)) == expect

    def test_partition_is_exact(self):
        labels = np.random.default_rng(1).integers(0, 4, size=57)
        train_idx, val_idx = stratified_holdout(
            labels, 0.2, np.random.default_rng(2)
        )
        combined = np.sort(np.concatenate([train_idx, val_idx]))
        np.testing.assert_array_equal(combined, np.arange(57))

    def test_every_class_keeps_a_training_row(self):
        labels = np.array([0, 0, 1, 2, 3])
        train_idx, val_idx = stratified_holdout(
            labels, 0.9, np.random.default_rng(3)
        )
        for cls in range(4):
            assert int(np.sum(labels[train_idx] == cls)) >= 1

    def test_singleton_class_stays_in_train(self):
        labels = np.array([0, 0, 0, 0, 1])
        train_idx, val_idx = stratified_holdout(
            labels, 0.5, np.random.default_rng(4)
        )
        assert 4 in train_idx
        assert 4 not in val_idx

    def test_deterministic_given_rng(self):
        labels = np.random.default_rng(5).integers(0, 4, size=80)
        a = stratified_holdout(labels, 0.2, np.random.default_rng(9))
        b = stratified_holdout(labels, 0.2, np.random.default_rng(9))
        np.testing.assert_array_equal(a[0], b[0])
        np.testing.assert_array_equal(a[1], b[1])
