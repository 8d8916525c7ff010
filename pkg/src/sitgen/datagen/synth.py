"""Seeded synthetic corpus generator for desk-scale experiments.

The generative model, per stream of user u:

1. situation c ~ per-user prior (a near-uniform global prior tilted by the
   user's archetype and an individual wobble, both scaled by
   ``signal_strength``),
2. hour of day ~ mixture of two wrapped Gaussians for c (w.p. s) or uniform
   (w.p. 1-s); the calendar date and hence day of week is uniform,
3. device and network types ~ situation-specific categorical tables (w.p. s)
   or uniform (w.p. 1-s),
4. track ~ the situation's affinity pool, preferring the user's archetype
   sub-pool (w.p. s), or uniform over all tracks (w.p. 1-s).

Each track also gets a fixed audio proxy: its affinity situation's spectral
template plus per-track noise scaled by (1 - signal_strength). Because all
situation dependence interpolates to uniform at signal_strength 0, the
exact posteriors below collapse to the prior there, and the prior itself
collapses to uniform.

Oracles: the bundle exposes the exact posteriors of its own generative
process (`sp_posteriors`, `device_posteriors`, `audio_posterior`), which
give the Bayes-optimal accuracy any classifier can be measured against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import datetime, timedelta

import numpy as np

from ..domain import (
    Demographics,
    DeviceSnapshot,
    DeviceType,
    Gender,
    NetworkType,
    Situation,
    Stream,
    TaxonomySubset,
)
from ..features.als import InteractionMatrix
from .keywords import DEFAULT_KEYWORDS
from .labeling import Playlist

N_ARCHETYPES = 4

# Hour-of-day mixture: (primary mean, secondary mean); weights below.
HOUR_MEANS = {
    Situation.WORK: (10.0, 15.0),
    Situation.GYM: (18.0, 7.0),
    Situation.PARTY: (21.0, 0.5),
    Situation.SLEEP: (23.0, 13.0),
    Situation.MORNING: (8.0, 6.0),
    Situation.RUN: (7.0, 18.0),
    Situation.NIGHT: (1.0, 23.0),
    Situation.DANCE: (21.0, 23.0),
    Situation.CAR: (8.0, 17.5),
    Situation.TRAIN: (8.5, 18.0),
    Situation.RELAX: (20.5, 14.0),
    Situation.CLUB: (23.5, 1.5),
}
HOUR_WEIGHTS = (0.75, 0.25)
HOUR_SIGMA = 1.0

# P(device type | situation) over (mobile, desktop, tablet) at full signal.
DEVICE_TABLE = {
    Situation.WORK: (0.15, 0.75, 0.10),
    Situation.GYM: (0.90, 0.02, 0.08),
    Situation.PARTY: (0.70, 0.10, 0.20),
    Situation.SLEEP: (0.15, 0.05, 0.80),
    Situation.MORNING: (0.55, 0.30, 0.15),
    Situation.RUN: (0.95, 0.01, 0.04),
    Situation.NIGHT: (0.45, 0.35, 0.20),
    Situation.DANCE: (0.50, 0.25, 0.25),
    Situation.CAR: (0.92, 0.03, 0.05),
    Situation.TRAIN: (0.85, 0.05, 0.10),
    Situation.RELAX: (0.35, 0.25, 0.40),
    Situation.CLUB: (0.70, 0.05, 0.25),
}

# P(network type | situation) over (mobile, wifi, lan, plane) at full signal.
NETWORK_TABLE = {
    Situation.WORK: (0.04, 0.41, 0.54, 0.01),
    Situation.GYM: (0.85, 0.13, 0.01, 0.01),
    Situation.PARTY: (0.50, 0.40, 0.09, 0.01),
    Situation.SLEEP: (0.02, 0.94, 0.03, 0.01),
    Situation.MORNING: (0.30, 0.60, 0.09, 0.01),
    Situation.RUN: (0.90, 0.08, 0.01, 0.01),
    Situation.NIGHT: (0.15, 0.70, 0.14, 0.01),
    Situation.DANCE: (0.25, 0.65, 0.09, 0.01),
    Situation.CAR: (0.85, 0.10, 0.04, 0.01),
    Situation.TRAIN: (0.70, 0.20, 0.05, 0.05),
    Situation.RELAX: (0.10, 0.80, 0.09, 0.01),
    Situation.CLUB: (0.45, 0.50, 0.04, 0.01),
}

# Age bands per archetype: demographics reveal the archetype exactly.
ARCHETYPE_AGE_BANDS = ((16, 34), (34, 52), (52, 70), (70, 88))

PRIOR_WOBBLE = 0.2          # global prior deviates <= 20% from uniform
ARCHETYPE_TILT_SIGMA = 0.5  # log-scale archetype preference spread
INDIVIDUAL_TILT_SIGMA = 0.35
ARCHETYPE_POOL_SHARE = 0.6  # in-pool probability mass on the archetype sub-pool
AUDIO_NOISE_SCALE = 1.0

_BASE_DATE = datetime(2019, 1, 1)
_DATE_RANGE_DAYS = 364


@dataclass(frozen=True)
class SynthConfig:
    n_users: int = 200
    n_tracks: int = 1000
    n_streams: int = 20000
    c: int = 4
    signal_strength: float = 0.9
    locations: tuple[tuple[str, float], ...] = (("FR", 0.6), ("BR", 0.4))
    seed: int = 0
    n_mels: int = 32
    n_frames: int = 64
    # optional per-location offset (hours) added to every situation's clock,
    # for experiments contrasting locally vs globally trained models
    location_hour_shifts: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        for name in ("n_users", "n_tracks", "n_streams", "n_mels", "n_frames"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        TaxonomySubset(self.c)  # validates membership of {4, 8, 12}
        if self.n_tracks < self.c * N_ARCHETYPES:
            raise ValueError(
                "n_tracks must give every situation a track sub-pool per "
                f"archetype: need >= {self.c * N_ARCHETYPES}, got {self.n_tracks}"
            )
        if not 0.0 <= self.signal_strength <= 1.0:
            raise ValueError(
                f"signal_strength must be in [0,1], got {self.signal_strength}"
            )
        total = sum(w for _, w in self.locations)
        if not self.locations or abs(total - 1.0) > 1e-9:
            raise ValueError(f"location weights must sum to 1, got {total}")
        if self.location_hour_shifts is not None and len(
            self.location_hour_shifts
        ) != len(self.locations):
            raise ValueError(
                f"{len(self.location_hour_shifts)} hour shifts for "
                f"{len(self.locations)} locations"
            )

    @property
    def hour_shifts(self) -> tuple[float, ...]:
        if self.location_hour_shifts is None:
            return (0.0,) * len(self.locations)
        return self.location_hour_shifts


def wrapped_gaussian_pdf(t: np.ndarray, mean: float, sigma: float) -> np.ndarray:
    """Density on [0, 24) of a Gaussian wrapped around the 24-hour circle."""
    t = np.asarray(t, dtype=np.float64)
    out = np.zeros_like(t)
    for k in range(-4, 5):
        z = (t - mean + 24.0 * k) / sigma
        out += np.exp(-0.5 * z * z)
    return out / (sigma * math.sqrt(2.0 * math.pi))


def hour_density(situation: Situation, t: np.ndarray, signal_strength: float) -> np.ndarray:
    """Density of the sampled hour: signal mixture blended with uniform."""
    m1, m2 = HOUR_MEANS[situation]
    w1, w2 = HOUR_WEIGHTS
    f = w1 * wrapped_gaussian_pdf(t, m1, HOUR_SIGMA) + w2 * wrapped_gaussian_pdf(
        t, m2, HOUR_SIGMA
    )
    return signal_strength * f + (1.0 - signal_strength) / 24.0


def _blend(table_row: tuple[float, ...], s: float) -> np.ndarray:
    row = np.asarray(table_row, dtype=np.float64)
    return s * row + (1.0 - s) / len(row)


def _smooth_template(rng: np.random.Generator, n_mels: int, n_frames: int) -> np.ndarray:
    """Band-limited random field: coarse noise upsampled bilinearly."""
    coarse = rng.standard_normal((8, 8)) * 2.5
    rows = np.linspace(0, 7, n_mels)
    cols = np.linspace(0, 7, n_frames)
    r0 = np.floor(rows).astype(int).clip(0, 6)
    c0 = np.floor(cols).astype(int).clip(0, 6)
    fr = (rows - r0)[:, None]
    fc = (cols - c0)[None, :]
    top = coarse[r0][:, c0] * (1 - fc) + coarse[r0][:, c0 + 1] * fc
    bot = coarse[r0 + 1][:, c0] * (1 - fc) + coarse[r0 + 1][:, c0 + 1] * fc
    return (top * (1 - fr) + bot * fr).astype(np.float64)


@dataclass
class SynthBundle:
    """A generated corpus plus the exact distributions that produced it."""

    config: SynthConfig
    streams: list[Stream]
    playlists: list[Playlist]
    interactions: InteractionMatrix
    audio: dict[str, np.ndarray]
    demographics: dict[str, Demographics]
    user_ids: list[str]
    track_ids: list[str]
    # generator internals (exact, for the posterior oracles)
    user_priors: np.ndarray          # (n_users, C)
    configured_prior: np.ndarray     # (C,) stream-weighted mean of user priors
    user_archetypes: np.ndarray      # (n_users,) ints
    track_affinity: np.ndarray       # (n_tracks,) situation index
    track_archetype: np.ndarray      # (n_tracks,) archetype sub-label
    user_hour_shift: np.ndarray      # (n_users,) location clock offset
    user_stream_weight: np.ndarray   # (n_users,) share of streams per user
    true_labels: list[Situation] = field(default_factory=list)

    def __post_init__(self) -> None:
        self._user_index = {u: i for i, u in enumerate(self.user_ids)}
        self._track_index = {t: i for i, t in enumerate(self.track_ids)}

    @property
    def subset(self) -> TaxonomySubset:
        return TaxonomySubset(self.config.c)

    def user_index(self, user_id: str) -> int:
        return self._user_index[user_id]

    def track_index(self, track_id: str) -> int:
        return self._track_index[track_id]

    # ---- exact posteriors of the generative process ----

    def _stream_arrays(
        self, streams: list[Stream]
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        hours = np.array(
            [
                st.device.local_timestamp.hour
                + st.device.local_timestamp.minute / 60.0
                + st.device.local_timestamp.second / 3600.0
                for st in streams
            ]
        )
        dev = np.array([st.device.device_type.code for st in streams])
        net = np.array([st.device.network_type.code for st in streams])
        users = np.array([self._user_index[st.user] for st in streams])
        return hours, dev, net, users

    def sp_posteriors(self, streams: list[Stream]) -> np.ndarray:
        """P(c | user, hour, device, network) — full-information posterior
        for the real-time branch (user identity stands in for demographics,
        an upper bound on what an 11-d feature vector can reveal)."""
        c = self.config.c
        s = self.config.signal_strength
        hours, dev, net, users = self._stream_arrays(streams)
        # undo the user's location clock offset before the hour densities
        base_hours = (hours - self.user_hour_shift[users]) % 24.0
        lik = np.empty((len(streams), c))
        for k, situation in enumerate(self.subset.members):
            dev_p = _blend(DEVICE_TABLE[situation], s)
            net_p = _blend(NETWORK_TABLE[situation], s)
            lik[:, k] = hour_density(situation, base_hours, s) * dev_p[dev] * net_p[net]
        post = self.user_priors[users] * lik
        return post / post.sum(axis=1, keepdims=True)

    def device_posteriors(self, streams: list[Stream]) -> np.ndarray:
        """P(c | hour, device, network) — what a classifier using only the
        device features can at best achieve. Marginalizes exactly over the
        generator's users (their priors, stream shares, and clock offsets)."""
        c = self.config.c
        s = self.config.signal_strength
        hours, dev, net, _users = self._stream_arrays(streams)
        shifts = np.unique(self.user_hour_shift)
        # weight of each (shift, class) cell, summed over users
        w = np.zeros((len(shifts), c))
        for i, shift in enumerate(shifts):
            mask = self.user_hour_shift == shift
            w[i] = (self.user_stream_weight[mask, None] * self.user_priors[mask]).sum(
                axis=0
            )
        post = np.zeros((len(streams), c))
        for k, situation in enumerate(self.subset.members):
            dev_p = _blend(DEVICE_TABLE[situation], s)
            net_p = _blend(NETWORK_TABLE[situation], s)
            dens = np.zeros(len(streams))
            for i, shift in enumerate(shifts):
                dens += w[i, k] * hour_density(situation, (hours - shift) % 24.0, s)
            post[:, k] = dens * dev_p[dev] * net_p[net]
        return post / post.sum(axis=1, keepdims=True)

    def _track_given_situation(self, track_idx: int) -> np.ndarray:
        """(C, n_archetypes) array of P(track | c, archetype)."""
        cfg = self.config
        s = cfg.signal_strength
        c = cfg.c
        out = np.full((c, N_ARCHETYPES), (1.0 - s) / cfg.n_tracks)
        aff = int(self.track_affinity[track_idx])
        pool = np.flatnonzero(self.track_affinity == aff)
        sub = pool[self.track_archetype[pool] == self.track_archetype[track_idx]]
        in_pool = (1.0 - ARCHETYPE_POOL_SHARE) / len(pool)
        for a in range(N_ARCHETYPES):
            p = in_pool
            if self.track_archetype[track_idx] == a:
                p += ARCHETYPE_POOL_SHARE / len(sub)
            out[aff, a] += s * p
        return out

    def audio_posterior(self, track_id: str, user_id: str) -> np.ndarray:
        """P(c | audio proxy, user) — the offline branch's ceiling. The
        per-track noise makes proxies unique, so conditioning on the proxy
        equals conditioning on the track identity."""
        t = self._track_index[track_id]
        u = self._user_index[user_id]
        track_lik = self._track_given_situation(t)[:, self.user_archetypes[u]]
        post = self.user_priors[u] * track_lik
        return post / post.sum()

    def audio_posteriors(self, streams: list[Stream]) -> np.ndarray:
        return np.array(
            [self.audio_posterior(st.track, st.user) for st in streams]
        )

    # ---- Bayes accuracies (oracle argmax vs recorded truth) ----

    def bayes_sp_accuracy(self, streams: list[Stream]) -> float:
        return self._bayes_accuracy(self.sp_posteriors(streams), streams)

    def bayes_device_accuracy(self, streams: list[Stream]) -> float:
        return self._bayes_accuracy(self.device_posteriors(streams), streams)

    def bayes_audio_accuracy(self, streams: list[Stream]) -> float:
        return self._bayes_accuracy(self.audio_posteriors(streams), streams)

    @staticmethod
    def _bayes_accuracy(posteriors: np.ndarray, streams: list[Stream]) -> float:
        pred = np.argmax(posteriors, axis=1)
        truth = np.array([st.situation.index for st in streams])
        return float(np.mean(pred == truth))


def _user_priors(cfg: SynthConfig) -> tuple[np.ndarray, np.ndarray]:
    """Per-user situation priors and the archetype of each user."""
    c = cfg.c
    s = cfg.signal_strength
    rng_global = np.random.default_rng([cfg.seed, 1])
    wobble = rng_global.uniform(-1.0, 1.0, size=c)
    base = 1.0 + PRIOR_WOBBLE * s * wobble
    base /= base.sum()

    rng_arch = np.random.default_rng([cfg.seed, 2])
    arch_tilt = np.exp(
        s * ARCHETYPE_TILT_SIGMA * rng_arch.standard_normal((N_ARCHETYPES, c))
    )

    archetypes = np.arange(cfg.n_users) % N_ARCHETYPES
    priors = np.empty((cfg.n_users, c))
    for u in range(cfg.n_users):
        rng_u = np.random.default_rng([cfg.seed, 4, u])
        ind = np.exp(s * INDIVIDUAL_TILT_SIGMA * rng_u.standard_normal(c))
        p = base * arch_tilt[archetypes[u]] * ind
        priors[u] = p / p.sum()
    # proportional fitting: keep per-user tilts but pin the aggregate prior
    # to the near-uniform base, so the corpus-level class balance stays
    # within the configured +/-20% wobble of uniform
    for _ in range(50):
        agg = priors.mean(axis=0)
        priors *= (base / agg)[None, :]
        priors /= priors.sum(axis=1, keepdims=True)
    return priors, archetypes


def _sample_hour(rng: np.random.Generator, situation: Situation, s: float) -> float:
    if rng.random() >= s:
        return float(rng.uniform(0.0, 24.0))
    mean = HOUR_MEANS[situation][0 if rng.random() < HOUR_WEIGHTS[0] else 1]
    return float((mean + HOUR_SIGMA * rng.standard_normal()) % 24.0)


def _timestamp(rng: np.random.Generator, hour: float) -> datetime:
    day = int(rng.integers(0, _DATE_RANGE_DAYS))
    h = int(hour)
    m = int((hour - h) * 60.0)
    sec = int(((hour - h) * 60.0 - m) * 60.0)
    return _BASE_DATE + timedelta(days=day, hours=h, minutes=m, seconds=sec)


def _sample_track(
    rng: np.random.Generator,
    situation_idx: int,
    archetype: int,
    affinity: np.ndarray,
    track_arch: np.ndarray,
    s: float,
) -> int:
    if rng.random() >= s:
        return int(rng.integers(0, len(affinity)))
    pool = np.flatnonzero(affinity == situation_idx)
    if rng.random() < ARCHETYPE_POOL_SHARE:
        sub = pool[track_arch[pool] == archetype]
        return int(sub[rng.integers(0, len(sub))])
    return int(pool[rng.integers(0, len(pool))])


def _synth_playlists(
    cfg: SynthConfig, affinity: np.ndarray, track_ids: list[str]
) -> list[Playlist]:
    """Two keyword-titled playlists per situation, filter-friendly."""
    playlists = []
    subset = TaxonomySubset(cfg.c)
    for situation in subset.members:
        pool = np.flatnonzero(affinity == situation.index)
        words = DEFAULT_KEYWORDS[situation.value]
        for j in range(2):
            take = pool[j::2][:40]
            if len(take) == 0:
                take = pool[:1]
            tracks = tuple(track_ids[t] for t in take)
            playlists.append(
                Playlist(
                    id=f"p-{situation.value}-{j}",
                    title=f"{words[j % len(words)]} mix vol {j + 1}",
                    tracks=tracks,
                    track_artists={t: f"artist-{t}" for t in tracks},
                    track_albums={t: f"album-{t}" for t in tracks},
                )
            )
    return playlists


def synth_generate(cfg: SynthConfig) -> SynthBundle:
    """Generate a deterministic corpus; see the module docstring for the
    generative model. Per-user RNG streams keep generation order-free."""
    c = cfg.c
    s = cfg.signal_strength
    subset = TaxonomySubset(c)

    user_ids = [f"u{u:05d}" for u in range(cfg.n_users)]
    track_ids = [f"t{t:05d}" for t in range(cfg.n_tracks)]
    priors, archetypes = _user_priors(cfg)

    affinity = np.arange(cfg.n_tracks) % c
    track_arch = (np.arange(cfg.n_tracks) // c) % N_ARCHETYPES

    # demographics: age band encodes the archetype; country from locations
    demographics: dict[str, Demographics] = {}
    loc_names = [name for name, _ in cfg.locations]
    loc_weights = np.array([w for _, w in cfg.locations])
    shifts_by_loc = dict(zip(loc_names, cfg.hour_shifts))
    user_shift = np.zeros(cfg.n_users)
    for u, uid in enumerate(user_ids):
        rng_u = np.random.default_rng([cfg.seed, 11, u])
        lo, hi = ARCHETYPE_AGE_BANDS[archetypes[u]]
        age = int(rng_u.integers(lo, hi))
        country = loc_names[int(rng_u.choice(len(loc_names), p=loc_weights))]
        gender = Gender.F if rng_u.random() < 0.5 else Gender.M
        demographics[uid] = Demographics(age=age, country=country, gender=gender)
        user_shift[u] = shifts_by_loc[country]

    # audio proxies: situation template + frozen per-track noise
    templates = {
        k: _smooth_template(
            np.random.default_rng([cfg.seed, 5, k]), cfg.n_mels, cfg.n_frames
        )
        for k in range(c)
    }
    audio: dict[str, np.ndarray] = {}
    for t, tid in enumerate(track_ids):
        rng_t = np.random.default_rng([cfg.seed, 7, t])
        noise = rng_t.standard_normal((cfg.n_mels, cfg.n_frames))
        proxy = templates[int(affinity[t])] + (1.0 - s) * AUDIO_NOISE_SCALE * noise
        audio[tid] = proxy.astype(np.float32)

    device_types = tuple(DeviceType)
    network_types = tuple(NetworkType)
    streams: list[Stream] = []
    labels: list[Situation] = []
    counts: dict[tuple[str, str], float] = {}
    per_user = [cfg.n_streams // cfg.n_users] * cfg.n_users
    for i in range(cfg.n_streams % cfg.n_users):
        per_user[i] += 1

    for u, uid in enumerate(user_ids):
        rng = np.random.default_rng([cfg.seed, 3, u])
        country = demographics[uid].country
        for _ in range(per_user[u]):
            k = int(rng.choice(c, p=priors[u]))
            situation = subset.members[k]
            hour = (_sample_hour(rng, situation, s) + user_shift[u]) % 24.0
            ts = _timestamp(rng, hour)
            dev = device_types[int(rng.choice(3, p=_blend(DEVICE_TABLE[situation], s)))]
            net = network_types[
                int(rng.choice(4, p=_blend(NETWORK_TABLE[situation], s)))
            ]
            t = _sample_track(rng, k, archetypes[u], affinity, track_arch, s)
            tid = track_ids[t]
            streams.append(
                Stream(
                    track=tid,
                    user=uid,
                    device=DeviceSnapshot.at(ts, dev, net),
                    situation=situation,
                    location=country,
                )
            )
            labels.append(situation)
            counts[(uid, tid)] = counts.get((uid, tid), 0.0) + 1.0

    stream_weight = np.array(per_user, dtype=np.float64) / cfg.n_streams
    return SynthBundle(
        config=cfg,
        streams=streams,
        playlists=_synth_playlists(cfg, affinity, track_ids),
        interactions=InteractionMatrix.from_counts(counts),
        audio=audio,
        demographics=demographics,
        user_ids=user_ids,
        track_ids=track_ids,
        user_priors=priors,
        configured_prior=(stream_weight[:, None] * priors).sum(axis=0),
        user_archetypes=archetypes,
        track_affinity=affinity,
        track_archetype=track_arch,
        user_hour_shift=user_shift,
        user_stream_weight=stream_weight,
        true_labels=labels,
    )
