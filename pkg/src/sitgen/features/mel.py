"""Log-power mel spectrogram extraction from mono PCM.

Defaults (2048-sample Hann window, 1024 hop, 96 Slaney-scale mel bands,
reflect padding) reproduce a 96 x 646 matrix for a 30 s clip at 22050 Hz.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LOG_FLOOR = 1e-10


@dataclass(frozen=True)
class MelParams:
    n_fft: int = 2048
    hop: int = 1024
    n_mels: int = 96

    def __post_init__(self) -> None:
        if self.n_fft < 16 or self.hop < 1 or self.n_mels < 8:
            raise ValueError(f"invalid mel params: {self}")


@dataclass(frozen=True)
class MelSpectrogram:
    """F mel bands x T frames of log-power values."""

    data: np.ndarray

    def __post_init__(self) -> None:
        if self.data.ndim != 2:
            raise ValueError(f"expected 2-d matrix, got shape {self.data.shape}")
        f, t = self.data.shape
        if f < 8 or t < 8:
            raise ValueError(f"mel matrix too small: {f}x{t} (need >= 8x8)")
        if not np.all(np.isfinite(self.data)):
            raise ValueError("mel matrix contains non-finite entries")

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape


def hz_to_mel(hz):
    """Slaney-style mel scale: linear below 1 kHz, logarithmic above."""
    hz = np.asarray(hz, dtype=np.float64)
    linear = hz / (200.0 / 3.0)
    log_region = hz >= 1000.0
    min_log_mel = 1000.0 / (200.0 / 3.0)
    logstep = np.log(6.4) / 27.0
    with np.errstate(divide="ignore", invalid="ignore"):
        logged = min_log_mel + np.log(np.maximum(hz, 1e-12) / 1000.0) / logstep
    return np.where(log_region, logged, linear)


def mel_to_hz(mel):
    mel = np.asarray(mel, dtype=np.float64)
    min_log_mel = 1000.0 / (200.0 / 3.0)
    logstep = np.log(6.4) / 27.0
    linear = mel * (200.0 / 3.0)
    logged = 1000.0 * np.exp(logstep * (mel - min_log_mel))
    return np.where(mel >= min_log_mel, logged, linear)


def mel_filterbank(sample_rate: float, n_fft: int, n_mels: int) -> np.ndarray:
    """Triangular mel filters spanning 0..sample_rate/2, Slaney-normalized.

    Returns an (n_mels, n_fft//2 + 1) weight matrix.
    """
    fmax = sample_rate / 2.0
    mel_points = np.linspace(0.0, float(hz_to_mel(fmax)), n_mels + 2)
    hz_points = mel_to_hz(mel_points)
    fft_freqs = np.linspace(0.0, fmax, n_fft // 2 + 1)

    fb = np.zeros((n_mels, len(fft_freqs)))
    for m in range(n_mels):
        left, center, right = hz_points[m], hz_points[m + 1], hz_points[m + 2]
        up = (fft_freqs - left) / max(center - left, 1e-12)
        down = (right - fft_freqs) / max(right - center, 1e-12)
        fb[m] = np.maximum(0.0, np.minimum(up, down))
        # Slaney normalization: constant energy per band
        fb[m] *= 2.0 / (right - left)
    return fb


def _hann(n: int) -> np.ndarray:
    # periodic Hann, as used by STFT implementations
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)


def stft_power(pcm: np.ndarray, params: MelParams) -> np.ndarray:
    """Power spectrogram, reflect-padded so frame k is centered at k*hop."""
    n_fft, hop = params.n_fft, params.hop
    pad = n_fft // 2
    x = np.pad(pcm, pad, mode="reflect")
    n_frames = 1 + len(pcm) // hop
    window = _hann(n_fft)
    starts = np.arange(n_frames) * hop
    idx = starts[:, None] + np.arange(n_fft)[None, :]
    frames = x[idx] * window
    spectrum = np.fft.rfft(frames, axis=1)
    return (np.abs(spectrum) ** 2).T  # (n_fft//2+1, n_frames)


def mel_spectrogram(
    pcm: np.ndarray, sample_rate: float, params: MelParams = MelParams()
) -> MelSpectrogram:
    """Log-power mel matrix of a mono PCM vector.

    Raises if the signal is shorter than one analysis window, contains
    non-finite samples, or the sample rate is not positive.
    """
    pcm = np.asarray(pcm, dtype=np.float64)
    if pcm.ndim != 1:
        raise ValueError(f"expected mono 1-d PCM, got shape {pcm.shape}")
    if sample_rate <= 0:
        raise ValueError(f"sample_rate must be positive, got {sample_rate}")
    if not np.all(np.isfinite(pcm)):
        raise ValueError("PCM contains non-finite samples")
    if len(pcm) < params.n_fft:
        raise ValueError(
            f"PCM too short: {len(pcm)} samples < one window ({params.n_fft})"
        )
    power = stft_power(pcm, params)
    fb = mel_filterbank(sample_rate, params.n_fft, params.n_mels)
    return MelSpectrogram(np.log(LOG_FLOOR + fb @ power))
