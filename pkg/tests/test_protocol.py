"""Evaluation protocol driver: design matrices, per-seed cells, aggregation,
report serialization, text/CSV rendering, and the local-vs-global study."""

import csv
import io

import numpy as np
import pytest

from sitgen.datagen.splits import SplitKind, make_split
from sitgen.datagen.synth import SynthConfig, synth_generate
from sitgen.eval.metrics import accuracy, joint_overlap
from sitgen.eval.protocol import (
    EvalData,
    EvalReport,
    LocalVsGlobalRow,
    SeedResult,
    UamatExperimentConfig,
    combine_seed_results,
    local_vs_global,
    prepare_sp_matrices,
    run_protocol,
    run_protocol_seed,
    sp_design_matrix,
)
from sitgen.eval.render import (
    confusion_csv,
    format_mean_std,
    local_vs_global_csv,
    render_local_vs_global,
    render_report_table,
    report_csv,
)
from sitgen.features.encoders import SP_FEATURE_NAMES
from sitgen.gbdt import SpTrainConfig

FAST_SP = SpTrainConfig(rounds=15, max_depth=3)
FAST_UAMAT = UamatExperimentConfig(
    max_epochs=2, patience=2, batch_size=32, embedding_dim=8, als_iterations=4
)


@pytest.fixture(scope="module")
def bundle():
    return synth_generate(
        SynthConfig(
            n_users=20, n_tracks=60, n_streams=800, c=4, signal_strength=0.9,
            seed=13, n_mels=16, n_frames=16,
        )
    )


@pytest.fixture(scope="module")
def data(bundle):
    return EvalData(demographics=bundle.demographics, audio=bundle.audio)


@pytest.fixture(scope="module")
def sp_report(bundle, data):
    return run_protocol(
        bundle.streams, 4, SplitKind.WARM, data, seeds=(0, 1),
        branches=("sp",), sp_cfg=FAST_SP,
    )


@pytest.fixture(scope="module")
def dual_report(bundle, data):
    return run_protocol(
        bundle.streams, 4, SplitKind.WARM, data, seeds=(0,),
        branches=("sp", "uamat"), sp_cfg=FAST_SP, uamat_cfg=FAST_UAMAT,
    )


class TestDesignMatrix:
    def test_shapes_and_labels(self, bundle):
        streams = list(bundle.streams[:100])
        x, y, vocab = sp_design_matrix(streams, bundle.demographics)
        assert x.shape == (100, len(SP_FEATURE_NAMES))
        assert np.array_equal(
            y, np.array([s.situation.index for s in streams])
        )
        assert np.all(np.isfinite(x))

    def test_vocab_built_from_train_side_only(self, bundle):
        split = make_split(list(bundle.streams), SplitKind.WARM, 0.2, seed=0)
        x_train, y_train, x_test, y_test, vocab = prepare_sp_matrices(
            split, bundle.demographics
        )
        assert x_train.shape == (len(split.train), len(SP_FEATURE_NAMES))
        assert x_test.shape == (len(split.test), len(SP_FEATURE_NAMES))
        train_countries = {
            bundle.demographics[s.user].country for s in split.train
        }
        for country in train_countries:
            assert vocab.code(country) > 0


class TestProtocolCell:
    def test_report_structure(self, sp_report):
        assert sp_report.kind == "warm"
        assert sp_report.c == 4 and sp_report.k == 3
        assert sp_report.branches == ("sp",)
        assert sp_report.seeds == [0, 1]
        assert len(sp_report.per_seed) == 2
        for key in ("sp_accuracy", "sp_accuracy_at_k", "sp_auc"):
            assert key in sp_report.mean and key in sp_report.std
        assert "overlap" not in sp_report.mean

    def test_mean_and_std_aggregate_per_seed_rows(self, sp_report):
        for key in sp_report.mean:
            vals = [r.metrics[key] for r in sp_report.per_seed]
            assert sp_report.mean[key] == pytest.approx(np.mean(vals))
            assert sp_report.std[key] == pytest.approx(np.std(vals))

    def test_confusion_counts_all_test_rows(self, bundle, sp_report):
        conf = sp_report.confusion["sp"]
        assert conf.shape == (4, 4)
        n_test = sum(
            len(make_split(list(bundle.streams), SplitKind.WARM, 0.2, s).test)
            for s in (0, 1)
        )
        assert conf.sum() == n_test

    def test_learned_model_beats_chance(self, sp_report):
        assert sp_report.mean["sp_accuracy"] > 40.0  # chance = 25
        assert sp_report.mean["sp_auc"] > 0.7

    def test_deterministic(self, bundle, data):
        again = run_protocol(
            bundle.streams, 4, SplitKind.WARM, data, seeds=(0, 1),
            branches=("sp",), sp_cfg=FAST_SP,
        )
        rerun = run_protocol(
            bundle.streams, 4, "warm", data, seeds=(0, 1),
            branches=("sp",), sp_cfg=FAST_SP,
        )
        assert again.to_json_str() == rerun.to_json_str()

    def test_cold_regimes_run(self, bundle, data):
        for kind in (SplitKind.COLD_USER, SplitKind.COLD_TRACK):
            rep = run_protocol(
                bundle.streams, 4, kind, data, seeds=(0,),
                branches=("sp",), sp_cfg=FAST_SP,
            )
            assert rep.kind == kind.value
            assert rep.mean["sp_accuracy"] > 40.0

    def test_k_clamped_to_c(self, bundle, data):
        rep = run_protocol(
            bundle.streams, 4, SplitKind.WARM, data, seeds=(0,),
            branches=("sp",), sp_cfg=FAST_SP, k=9,
        )
        assert rep.k == 4
        assert rep.mean["sp_accuracy_at_k"] == pytest.approx(100.0)


class TestDualBranch:
    def test_overlap_present_and_bounded(self, dual_report):
        row = dual_report.per_seed[0].metrics
        assert "overlap" in row
        assert row["overlap"] <= min(row["sp_accuracy"], row["uamat_accuracy"]) + 1e-9
        assert row["overlap"] >= 0.0

    def test_both_branches_report_and_confuse(self, dual_report):
        for b in ("sp", "uamat"):
            assert f"{b}_accuracy" in dual_report.mean
            assert dual_report.confusion[b].shape == (4, 4)

    def test_overlap_matches_direct_computation(self, bundle, data):
        from sitgen.eval.protocol import run_sp_branch, run_uamat_branch

        split = make_split(list(bundle.streams), SplitKind.WARM, 0.2, seed=0)
        labels = np.array([s.situation.index for s in split.test])
        _f, sp_probs = run_sp_branch(split, 4, bundle.demographics, FAST_SP)
        _m, ua_probs = run_uamat_branch(split, 4, data, FAST_UAMAT, seed=0)
        ua, sp, overlap = joint_overlap(ua_probs, sp_probs, labels)
        row = {}
        rep, _conf = run_protocol_seed(
            bundle.streams, 4, SplitKind.WARM, data, 0,
            branches=("sp", "uamat"), sp_cfg=FAST_SP, uamat_cfg=FAST_UAMAT,
        )
        row = rep.metrics
        assert row["overlap"] == pytest.approx(overlap)
        assert row["sp_accuracy"] == pytest.approx(sp)
        assert row["uamat_accuracy"] == pytest.approx(ua)


class TestValidation:
    def test_unknown_branch_rejected(self, bundle, data):
        with pytest.raises(ValueError):
            run_protocol_seed(
                bundle.streams, 4, SplitKind.WARM, data, 0, branches=("svm",)
            )

    def test_unlabeled_streams_rejected(self, bundle, data):
        import dataclasses

        bad = [dataclasses.replace(bundle.streams[0], situation=None)]
        bad += list(bundle.streams[:50])
        with pytest.raises(ValueError):
            run_protocol_seed(bad, 4, SplitKind.WARM, data, 0, branches=("sp",))

    def test_labels_outside_subset_rejected(self, bundle, data):
        big = synth_generate(
            SynthConfig(
                n_users=10, n_tracks=96, n_streams=60, c=12,
                signal_strength=0.5, seed=1, n_mels=16, n_frames=16,
            )
        )
        with pytest.raises(ValueError):
            run_protocol_seed(
                big.streams, 4, SplitKind.WARM, data, 0, branches=("sp",)
            )

    def test_uamat_without_audio_rejected(self, bundle):
        no_audio = EvalData(demographics=bundle.demographics, audio=None)
        with pytest.raises(ValueError):
            run_protocol_seed(
                bundle.streams, 4, SplitKind.WARM, no_audio, 0,
                branches=("uamat",), uamat_cfg=FAST_UAMAT,
            )


class TestReportSerialization:
    def test_json_round_trip(self, dual_report):
        back = EvalReport.from_json(dual_report.to_json())
        assert back.kind == dual_report.kind
        assert back.c == dual_report.c and back.k == dual_report.k
        assert back.branches == dual_report.branches
        assert back.seeds == dual_report.seeds
        for a, b in zip(back.per_seed, dual_report.per_seed):
            assert a.seed == b.seed
            assert a.metrics == pytest.approx(b.metrics)
        assert back.mean == pytest.approx(dual_report.mean)
        assert back.std == pytest.approx(dual_report.std)
        for b_name in dual_report.confusion:
            assert np.array_equal(back.confusion[b_name], dual_report.confusion[b_name])

    def test_json_string_stable(self, dual_report):
        s1 = dual_report.to_json_str()
        s2 = EvalReport.from_json(dual_report.to_json()).to_json_str()
        assert s1 == s2


class TestRendering:
    def test_format_mean_std(self):
        assert format_mean_std(58.916, 1.234) == "58.92(1.23)"
        assert format_mean_std(0.91234, 0.00456, decimals=4) == "0.9123(0.0046)"

    def test_report_csv_values_round_trip(self, sp_report):
        rows = list(csv.reader(io.StringIO(report_csv(sp_report))))
        header = rows[0]
        assert header[0] == "row"
        keys = header[1:]
        assert rows[-2][0] == "mean" and rows[-1][0] == "std"
        for i, seed_row in enumerate(rows[1:-2]):
            assert seed_row[0] == f"seed={sp_report.seeds[i]}"
            for j, key in enumerate(keys):
                assert float(seed_row[j + 1]) == sp_report.per_seed[i].metrics[key]
        for j, key in enumerate(keys):
            assert float(rows[-2][j + 1]) == sp_report.mean[key]
            assert float(rows[-1][j + 1]) == sp_report.std[key]

    def test_confusion_csv_matches_matrix(self, sp_report):
        rows = list(csv.reader(io.StringIO(confusion_csv(sp_report, "sp"))))
        matrix = sp_report.confusion["sp"]
        assert rows[0] == ["true"] + [f"pred_{j}" for j in range(4)]
        for i, row in enumerate(rows[1:]):
            assert [int(v) for v in row[1:]] == list(matrix[i])
        with pytest.raises(KeyError):
            confusion_csv(sp_report, "uamat")

    def test_text_table_lists_every_branch_row(self, dual_report, sp_report):
        text = render_report_table([dual_report, sp_report])
        lines = text.splitlines()
        assert lines[0].split()[:3] == ["split", "subset", "branch"]
        body = lines[2:]
        assert len(body) == 3  # sp+uamat rows, then sp-only row
        assert "Overlap" in lines[0]
        assert render_report_table([]) == "(no reports)\n"

    def test_mean_std_cells_match_report(self, sp_report):
        text = render_report_table([sp_report])
        want = format_mean_std(
            sp_report.mean["sp_accuracy"], sp_report.std["sp_accuracy"]
        )
        assert want in text


class TestCombine:
    def test_combine_preserves_seed_order_and_sums_confusion(self):
        r0 = SeedResult(seed=5, metrics={"sp_accuracy": 60.0})
        r1 = SeedResult(seed=9, metrics={"sp_accuracy": 70.0})
        c0 = {"sp": np.array([[3, 1], [0, 4]], dtype=np.int64)}
        c1 = {"sp": np.array([[2, 2], [1, 3]], dtype=np.int64)}
        rep = combine_seed_results(
            SplitKind.WARM, 2, 3, ("sp",), [(r0, c0), (r1, c1)]
        )
        assert rep.seeds == [5, 9]
        assert rep.k == 2
        assert rep.mean["sp_accuracy"] == pytest.approx(65.0)
        assert rep.std["sp_accuracy"] == pytest.approx(5.0)
        assert np.array_equal(rep.confusion["sp"], np.array([[5, 3], [1, 7]]))


class TestLocalVsGlobal:
    def test_rows_cover_locations(self, bundle):
        rows, skipped = local_vs_global(
            list(bundle.streams), 4, bundle.demographics,
            seeds=(0, 1), sp_cfg=FAST_SP,
        )
        assert {r.location for r in rows} == {"FR", "BR"}
        assert skipped == []
        for r in rows:
            assert r.n_test > 0
            assert 0.0 <= r.global_accuracy <= 100.0
            assert 0.0 <= r.local_accuracy <= 100.0

    def test_small_locations_skipped(self, bundle):
        rows, skipped = local_vs_global(
            list(bundle.streams), 4, bundle.demographics,
            seeds=(0,), sp_cfg=FAST_SP, min_location_streams=10_000,
        )
        assert rows == [] and set(skipped) == {"FR", "BR"}

    def test_needs_two_locations(self, bundle):
        import dataclasses

        mono = [
            dataclasses.replace(s, location="FR") for s in bundle.streams[:200]
        ]
        with pytest.raises(ValueError):
            local_vs_global(mono, 4, bundle.demographics, seeds=(0,))

    def test_csv_and_table_render(self):
        rows = [
            LocalVsGlobalRow("BR", 120, 61.25, 64.5),
            LocalVsGlobalRow("FR", 240, 70.0, 69.125),
        ]
        text = local_vs_global_csv(rows)
        parsed = list(csv.reader(io.StringIO(text)))
        assert parsed[0] == ["location", "n_test", "global_accuracy", "local_accuracy"]
        assert float(parsed[1][2]) == 61.25 and float(parsed[2][3]) == 69.125
        table = render_local_vs_global(rows)
        assert "BR" in table and "70.00" in table
