"""Device/demographic feature encodings and the 11-d predictor input."""

from __future__ import annotations

import math
from datetime import datetime, timedelta

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sitgen.domain import (
    Demographics,
    DeviceSnapshot,
    DeviceType,
    Gender,
    NetworkType,
    Stream,
)
from sitgen.features.encoders import (
    AGE_CLAMP_HIGH,
    AGE_CLAMP_LOW,
    N_DEMOGRAPHIC_FEATURES,
    N_DEVICE_FEATURES,
    N_SP_FEATURES,
    SP_FEATURE_NAMES,
    UNKNOWN_AGE_NORM,
    CountryVocab,
    assemble_sp_features,
    assemble_sp_features_batch,
    encode_device,
    encode_device_batch,
    encode_demographics,
)


def snap_at(ts, device=DeviceType.MOBILE, network=NetworkType.WIFI):
    return DeviceSnapshot.at(ts, device, network)


class TestDeviceEncoding:
    def test_layout(self):
        assert N_DEVICE_FEATURES == 8
        assert N_DEMOGRAPHIC_FEATURES == 3
        assert N_SP_FEATURES == 11
        assert len(SP_FEATURE_NAMES) == 11

    def test_midnight_monday(self):
        f = encode_device(snap_at(datetime(2024, 3, 11, 0, 0, 0)))
        assert f.linear_time == 0.0
        assert f.linear_day == 0.0
        assert f.circ_time_x == pytest.approx(1.0)
        assert f.circ_time_y == pytest.approx(0.0, abs=1e-12)
        assert f.circ_day_x == pytest.approx(1.0)
        assert f.circ_day_y == pytest.approx(0.0, abs=1e-12)

    def test_noon_is_half_turn(self):
        f = encode_device(snap_at(datetime(2024, 3, 11, 12, 0, 0)))
        assert f.linear_time == pytest.approx(0.5)
        assert f.circ_time_x == pytest.approx(-1.0)
        assert f.circ_time_y == pytest.approx(0.0, abs=1e-9)

    def test_six_am_is_quarter_turn(self):
        f = encode_device(snap_at(datetime(2024, 3, 11, 6, 0, 0)))
        assert f.circ_time_x == pytest.approx(0.0, abs=1e-9)
        assert f.circ_time_y == pytest.approx(1.0)

    def test_wraparound_continuity(self):
        # 23:59:59 and 00:00:00 are adjacent on the circle but far apart
        # on the linear encoding (the reason both are included).
        late = encode_device(snap_at(datetime(2024, 3, 11, 23, 59, 59)))
        early = encode_device(snap_at(datetime(2024, 3, 11, 0, 0, 0)))
        circular_dist = math.hypot(
            late.circ_time_x - early.circ_time_x,
            late.circ_time_y - early.circ_time_y,
        )
        assert circular_dist < 1e-3
        assert abs(late.linear_time - early.linear_time) > 0.99

    def test_device_network_codes(self):
        f = encode_device(
            snap_at(
                datetime(2024, 3, 11, 9),
                device=DeviceType.TABLET,
                network=NetworkType.PLANE,
            )
        )
        assert f.device_code == 2
        assert f.network_code == 3

    def test_vector_order_matches_names(self):
        f = encode_device(snap_at(datetime(2024, 3, 13, 15, 30)))
        v = f.vector()
        assert v.shape == (8,)
        assert v[0] == f.linear_time
        assert v[1] == f.linear_day
        assert v[6] == f.device_code
        assert v[7] == f.network_code

    @given(
        st.integers(min_value=0, max_value=86399),
        st.integers(min_value=0, max_value=6),
    )
    def test_circular_identity_property(self, sec, extra_days
    ):
        ts = datetime(2024, 3, 11) + timedelta(days=extra_days, seconds=sec)
        f = encode_device(snap_at(ts))
        assert abs(f.circ_time_x**2 + f.circ_time_y**2 - 1.0) <= 1e-9
        assert abs(f.circ_day_x**2 + f.circ_day_y**2 - 1.0) <= 1e-9
        assert 0.0 <= f.linear_time < 1.0
        assert 0.0 <= f.linear_day < 1.0

    def test_batch_matches_scalar_path(self):
        stamps = [
            datetime(2024, 3, 11, 0, 0, 0),
            datetime(2024, 3, 12, 7, 45, 13),
            datetime(2024, 3, 16, 23, 59, 59),
        ]
        devices = [DeviceType.MOBILE, DeviceType.DESKTOP, DeviceType.TABLET]
        networks = [NetworkType.MOBILE, NetworkType.LAN, NetworkType.PLANE]
        rows = encode_device_batch(
            np.array([t.hour * 3600 + t.minute * 60 + t.second for t in stamps]),
            np.array([t.weekday() for t in stamps]),
            np.array([d.code for d in devices]),
            np.array([n.code for n in networks]),
        )
        for i, (t, d, n) in enumerate(zip(stamps, devices, networks)):
            expected = encode_device(snap_at(t, d, n)).vector()
            np.testing.assert_allclose(rows[i], expected, atol=1e-12)


class TestCountryVocab:
    def test_codes_sorted_and_unknown_zero(self):
        vocab = CountryVocab(["SE", "BR", "FR", "BR"])
        assert vocab.code("BR") == 1
        assert vocab.code("FR") == 2
        assert vocab.code("SE") == 3
        assert vocab.code("??") == 0
        assert vocab.code("XX") == 0
        assert vocab.code(None) == 0
        assert len(vocab) == 4

    def test_unknown_marker_never_enters_vocab(self):
        vocab = CountryVocab(["??", "SE"])
        assert len(vocab) == 2

    def test_deterministic_regardless_of_input_order(self):
        a = CountryVocab(["SE", "BR", "FR"])
        b = CountryVocab(["FR", "SE", "BR"])
        assert a.to_json() == b.to_json()

    def test_json_round_trip(self):
        vocab = CountryVocab(["SE", "BR"])
        again = CountryVocab.from_json(vocab.to_json())
        for c in ("SE", "BR", "??", "ZZ"):
            assert vocab.code(c) == again.code(c)


class TestDemographicEncoding:
    def test_known_adult(self):
        vocab = CountryVocab(["SE"])
        f = encode_demographics(Demographics(30, "SE", Gender.F), vocab)
        assert f.age_norm == pytest.approx((30 - AGE_CLAMP_LOW) / (AGE_CLAMP_HIGH - AGE_CLAMP_LOW))
        assert f.country_code == 1
        assert f.gender_code == 1

    def test_age_clamping(self):
        vocab = CountryVocab([])
        low = encode_demographics(Demographics(5, "??", Gender.M), vocab)
        high = encode_demographics(Demographics(110, "??", Gender.M), vocab)
        assert low.age_norm == 0.0
        assert high.age_norm == 1.0

    def test_unknown_age_midpoint(self):
        vocab = CountryVocab([])
        f = encode_demographics(Demographics(), vocab)
        assert f.age_norm == UNKNOWN_AGE_NORM == 0.5
        assert f.country_code == 0
        assert f.gender_code == 0

    @given(st.integers(min_value=0, max_value=120))
    def test_age_norm_bounds_property(self, age):
        vocab = CountryVocab([])
        f = encode_demographics(Demographics(age=age), vocab)
        assert 0.0 <= f.age_norm <= 1.0


class TestAssembled:
    def test_eleven_dims_device_then_demo(self):
        vocab = CountryVocab(["SE"])
        snap = snap_at(datetime(2024, 3, 11, 9, 30))
        g = Demographics(40, "SE", Gender.M)
        x = assemble_sp_features(snap, g, vocab)
        assert x.shape == (11,)
        np.testing.assert_array_equal(x[:8], encode_device(snap).vector())
        np.testing.assert_array_equal(x[8:], encode_demographics(g, vocab).vector())

    def test_batch_matches_scalar_and_handles_unknown_user(self):
        vocab = CountryVocab(["SE"])
        known = Demographics(25, "SE", Gender.F)
        streams = [
            Stream("t1", "known", snap_at(datetime(2024, 3, 11, 8))),
            Stream("t2", "stranger", snap_at(datetime(2024, 3, 12, 22))),
        ]
        batch = assemble_sp_features_batch(streams, {"known": known}, vocab)
        assert batch.shape == (2, 11)
        np.testing.assert_allclose(
            batch[0], assemble_sp_features(streams[0].device, known, vocab), atol=1e-12
        )
        np.testing.assert_allclose(
            batch[1],
            assemble_sp_features(streams[1].device, Demographics(), vocab),
            atol=1e-12,
        )


class TestCircularIdentityBulk:
    def test_hundred_thousand_random_timestamps(self):
        # The full-scale (1e6) sweep runs in the acceptance suite; this is
        # the fast everyday version of the same invariant.
        rng = np.random.default_rng(7)
        n = 100_000
        seconds = rng.integers(0, 86400, size=n)
        dow = rng.integers(0, 7, size=n)
        rows = encode_device_batch(
            seconds, dow, np.zeros(n, dtype=int), np.zeros(n, dtype=int)
        )
        time_norm = rows[:, 2] ** 2 + rows[:, 3] ** 2
        day_norm = rows[:, 4] ** 2 + rows[:, 5] ** 2
        assert np.max(np.abs(time_norm - 1.0)) <= 1e-9
        assert np.max(np.abs(day_norm - 1.0)) <= 1e-9
