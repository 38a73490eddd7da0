"""Multichannel time-series handling: synthesis, filtering, windowing, band power.

The processing chain mirrors a standard physiological-signal pipeline:
acquire (or synthesize) multichannel recordings, decimate to a working rate,
band-pass to the usable range, cut into overlapping fixed-length epochs, and
reduce each epoch to per-channel spectral band powers.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import signal as spsig

from .errors import (
    ConfigurationError,
    EmptyEpochSetError,
    MissingInputError,
    UnsupportedRateError,
)
from .features import SEGMENT_TAGS, FeatureTable
from .utils import rng_for


@dataclass(frozen=True)
class BandSpec:
    """A named frequency band [low_hz, high_hz)."""

    name: str
    low_hz: float
    high_hz: float

    def __post_init__(self):
        if not self.name:
            raise ConfigurationError("band name must be non-empty")
        if not (0 <= self.low_hz < self.high_hz):
            raise ConfigurationError(
                f"band {self.name!r} requires 0 <= low < high, got [{self.low_hz}, {self.high_hz}]"
            )

    @property
    def center_hz(self) -> float:
        return 0.5 * (self.low_hz + self.high_hz)


DEFAULT_BANDS = (
    BandSpec("delta", 0.1, 4.0),
    BandSpec("theta", 4.0, 8.0),
    BandSpec("alpha", 8.0, 12.0),
    BandSpec("beta", 12.0, 30.0),
)

DEFAULT_CHANNELS = ("AF7", "Fp1", "Fp2", "AF8")


@dataclass(frozen=True)
class Segment:
    """Half-open sample range [start, end) with a protocol tag."""

    tag: str
    start: int
    end: int

    def __post_init__(self):
        if self.tag not in SEGMENT_TAGS:
            raise ConfigurationError(f"segment tag must be one of {SEGMENT_TAGS}, got {self.tag!r}")
        if not (0 <= self.start < self.end):
            raise ConfigurationError(f"invalid segment range [{self.start}, {self.end})")


@dataclass
class RawRecording:
    """A continuous multichannel recording for one subject and session.

    ``samples`` is channel-major with shape (n_channels, n_samples).
    ``condition`` labels the session's task segment ("low"/"high") and may be
    None for recordings without a workload protocol.
    """

    channels: tuple[str, ...]
    rate_hz: float
    samples: np.ndarray
    segments: tuple[Segment, ...]
    subject_id: int
    condition: str | None = None

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        self.channels = tuple(self.channels)
        self.segments = tuple(self.segments)
        if self.rate_hz <= 0:
            raise ConfigurationError(f"rate_hz must be positive, got {self.rate_hz}")
        if self.samples.ndim != 2 or self.samples.shape[0] != len(self.channels):
            raise ConfigurationError(
                f"samples must have shape (n_channels={len(self.channels)}, n_samples)"
            )
        if self.condition not in (None, "low", "high"):
            raise ConfigurationError(f"condition must be 'low', 'high' or None, got {self.condition!r}")
        n = self.samples.shape[1]
        last_end = 0
        for seg in sorted(self.segments, key=lambda s: s.start):
            if seg.end > n:
                raise ConfigurationError(f"segment [{seg.start}, {seg.end}) exceeds {n} samples")
            if seg.start < last_end:
                raise ConfigurationError("segments overlap")
            last_end = seg.end

    @property
    def n_samples(self) -> int:
        return self.samples.shape[1]

    @property
    def duration_s(self) -> float:
        return self.n_samples / self.rate_hz


@dataclass
class EpochSet:
    """Fixed-length windows cut from one recording.

    ``epochs`` has shape (n_epochs, n_channels, epoch_samples); ``tags`` and
    ``starts`` give each window's segment tag and start sample in the source.
    """

    epochs: np.ndarray
    tags: np.ndarray
    starts: np.ndarray
    rate_hz: float
    epoch_len_s: float
    overlap_s: float
    channels: tuple[str, ...]
    subject_id: int
    condition: str | None = None

    @property
    def n_epochs(self) -> int:
        return self.epochs.shape[0]


@dataclass
class SyntheticEegConfig:
    """Recipe for one synthetic recording.

    Each channel carries one sinusoid per band (at the band's center
    frequency, with a random phase) plus white noise. Amplitudes can differ
    between the task segment and the two rest segments, which is what gives
    schemes that normalize by rest activity something to work with.
    """

    subject_id: int
    condition: str | None = None
    rate_hz: float = 500.0
    channels: tuple[str, ...] = DEFAULT_CHANNELS
    bands: tuple[BandSpec, ...] = DEFAULT_BANDS
    band_amplitudes: dict[str, float] = field(
        default_factory=lambda: {"delta": 1.0, "theta": 0.8, "alpha": 1.2, "beta": 0.6}
    )
    baseline1_amplitudes: dict[str, float] | None = None
    baseline2_amplitudes: dict[str, float] | None = None
    noise_level: float = 0.1
    task_s: float = 600.0
    baseline1_s: float = 60.0
    baseline2_s: float = 60.0
    seed: int = 0


def _segment_samples(cfg: SyntheticEegConfig, rng: np.random.Generator,
                     amplitudes: dict[str, float], n: int) -> np.ndarray:
    t = np.arange(n) / cfg.rate_hz
    out = rng.standard_normal((len(cfg.channels), n)) * cfg.noise_level
    freqs = np.array([b.center_hz for b in cfg.bands])
    amps = np.array([float(amplitudes.get(b.name, 0.0)) for b in cfg.bands])
    if np.any(amps < 0):
        raise ConfigurationError("band amplitudes must be non-negative")
    phases = rng.uniform(0.0, 2.0 * np.pi, size=(len(cfg.channels), len(cfg.bands)))
    # (C, B, T) -> sum over bands
    waves = amps[None, :, None] * np.sin(
        2.0 * np.pi * freqs[None, :, None] * t[None, None, :] + phases[:, :, None]
    )
    out += waves.sum(axis=1)
    return out


def generate_synthetic_eeg(cfg: SyntheticEegConfig) -> RawRecording:
    """Synthesize one recording laid out as baseline1, baseline2, task.

    Segments with zero duration are omitted; the task segment is required.
    Identical config and seed produce identical samples.
    """
    if cfg.rate_hz <= 0:
        raise ConfigurationError("rate_hz must be positive")
    if cfg.noise_level < 0:
        raise ConfigurationError("noise_level must be non-negative")
    if cfg.task_s <= 0:
        raise ConfigurationError("task duration must be positive")
    if cfg.baseline1_s < 0 or cfg.baseline2_s < 0:
        raise ConfigurationError("baseline durations must be non-negative")
    if not cfg.channels:
        raise ConfigurationError("at least one channel required")

    rng = rng_for(cfg.seed, "eeg", cfg.subject_id, cfg.condition or "")
    plan = [
        ("baseline1", cfg.baseline1_s, cfg.baseline1_amplitudes or cfg.band_amplitudes),
        ("baseline2", cfg.baseline2_s, cfg.baseline2_amplitudes or cfg.band_amplitudes),
        ("task", cfg.task_s, cfg.band_amplitudes),
    ]
    chunks, segments, cursor = [], [], 0
    for tag, dur_s, amps in plan:
        n = int(round(dur_s * cfg.rate_hz))
        if n <= 0:
            continue
        chunks.append(_segment_samples(cfg, rng, amps, n))
        segments.append(Segment(tag, cursor, cursor + n))
        cursor += n
    return RawRecording(
        channels=cfg.channels,
        rate_hz=cfg.rate_hz,
        samples=np.concatenate(chunks, axis=1),
        segments=tuple(segments),
        subject_id=cfg.subject_id,
        condition=cfg.condition,
    )


def downsample(rec: RawRecording, target_hz: float) -> RawRecording:
    """Decimate to ``target_hz`` after zero-phase anti-alias low-pass filtering.

    The source rate must be an integer multiple of the target rate; anything
    else raises :class:`UnsupportedRateError`. The anti-alias filter is an
    order-8 Butterworth low-pass with cutoff at 0.4 x target_hz, applied
    forward and backward. When target equals the source rate the recording is
    returned unchanged (no filtering).
    """
    if target_hz <= 0:
        raise ConfigurationError("target_hz must be positive")
    factor = rec.rate_hz / target_hz
    q = int(round(factor))
    if q < 1 or abs(factor - q) > 1e-9:
        raise UnsupportedRateError(
            f"cannot resample {rec.rate_hz} Hz to {target_hz} Hz: factor {factor:g} is not an integer"
        )
    if q == 1:
        return replace(rec, samples=rec.samples.copy())
    sos = spsig.butter(8, 0.4 * target_hz, btype="low", fs=rec.rate_hz, output="sos")
    filtered = spsig.sosfiltfilt(sos, rec.samples, axis=-1)
    samples = np.ascontiguousarray(filtered[:, ::q])
    segments = []
    for seg in rec.segments:
        start = -(-seg.start // q)  # ceil division: first kept sample at or after seg.start
        end = -(-seg.end // q)
        if end > start:
            segments.append(Segment(seg.tag, start, end))
    return RawRecording(rec.channels, target_hz, samples, tuple(segments),
                        rec.subject_id, rec.condition)


def bandpass_filter(rec: RawRecording, low_hz: float, high_hz: float) -> RawRecording:
    """Zero-phase band-pass between ``low_hz`` and ``high_hz``.

    Order-4 Butterworth run forward and backward, so the passband is flat to
    well within 1 dB and attenuation one octave past either edge exceeds
    20 dB. Edges must satisfy 0 < low < high < rate/2.
    """
    if not (0 < low_hz < high_hz < rec.rate_hz / 2):
        raise ConfigurationError(
            f"band edges must satisfy 0 < low < high < rate/2, got [{low_hz}, {high_hz}] at {rec.rate_hz} Hz"
        )
    sos = spsig.butter(4, [low_hz, high_hz], btype="bandpass", fs=rec.rate_hz, output="sos")
    samples = spsig.sosfiltfilt(sos, rec.samples, axis=-1)
    return replace(rec, samples=np.ascontiguousarray(samples))


def epoch(rec: RawRecording, epoch_len_s: float = 4.0, overlap_s: float = 3.0) -> EpochSet:
    """Cut overlapping windows, never crossing a segment boundary.

    Within a segment of duration T seconds the number of windows is
    floor((T - len) / (len - overlap)) + 1. A recording too short for a
    single window raises :class:`EmptyEpochSetError`.
    """
    if epoch_len_s <= 0:
        raise ConfigurationError("epoch length must be positive")
    if not (0 <= overlap_s < epoch_len_s):
        raise ConfigurationError("overlap must satisfy 0 <= overlap < epoch length")
    win = int(round(epoch_len_s * rec.rate_hz))
    stride = int(round((epoch_len_s - overlap_s) * rec.rate_hz))
    if win < 1 or stride < 1:
        raise ConfigurationError("epoch window and stride must span at least one sample")

    windows, tags, starts = [], [], []
    for seg in rec.segments:
        pos = seg.start
        while pos + win <= seg.end:
            windows.append(rec.samples[:, pos:pos + win])
            tags.append(seg.tag)
            starts.append(pos)
            pos += stride
    if not windows:
        raise EmptyEpochSetError(
            f"no window of {epoch_len_s} s fits in any segment of a "
            f"{rec.duration_s:.3f} s recording"
        )
    return EpochSet(
        epochs=np.stack(windows),
        tags=np.array(tags, dtype=object),
        starts=np.array(starts, dtype=np.int64),
        rate_hz=rec.rate_hz,
        epoch_len_s=epoch_len_s,
        overlap_s=overlap_s,
        channels=rec.channels,
        subject_id=rec.subject_id,
        condition=rec.condition,
    )


def band_power_features(epochs: EpochSet, bands: tuple[BandSpec, ...] = DEFAULT_BANDS) -> FeatureTable:
    """Mean squared amplitude per channel and band, one row per epoch.

    Each epoch is band-filtered (zero-phase order-4 Butterworth) and the
    power is the mean of the squared filtered samples. Feature columns are
    channel-major: ``f[c * n_bands + b]`` is channel c in band b. An empty
    epoch set yields an empty table with the right width.
    """
    if not bands:
        raise ConfigurationError("at least one band required")
    nyq = epochs.rate_hz / 2
    for b in bands:
        if b.high_hz >= nyq:
            raise ConfigurationError(
                f"band {b.name!r} upper edge {b.high_hz} Hz must lie below Nyquist ({nyq} Hz)"
            )
    n_ch = len(epochs.channels)
    dim = n_ch * len(bands)
    if epochs.n_epochs == 0:
        return FeatureTable(
            np.empty(0, dtype=np.int64),
            np.empty(0, dtype=object),
            np.empty(0, dtype=object),
            np.empty((0, dim)),
        )
    feats = np.empty((epochs.n_epochs, dim))
    for bi, band in enumerate(bands):
        if band.low_hz > 0:
            sos = spsig.butter(4, [band.low_hz, band.high_hz], btype="bandpass",
                               fs=epochs.rate_hz, output="sos")
        else:
            sos = spsig.butter(4, band.high_hz, btype="low", fs=epochs.rate_hz, output="sos")
        filtered = spsig.sosfiltfilt(sos, epochs.epochs, axis=-1)
        power = np.mean(filtered ** 2, axis=-1)  # (n_epochs, n_channels)
        feats[:, bi::len(bands)] = power
    cond = epochs.condition if epochs.condition is not None else ""
    return FeatureTable(
        np.full(epochs.n_epochs, epochs.subject_id, dtype=np.int64),
        np.full(epochs.n_epochs, cond, dtype=object),
        epochs.tags.copy(),
        feats,
    )


def save_recording(rec: RawRecording, base_path: str) -> tuple[str, str]:
    """Write ``<base>.json`` (header) and ``<base>.f32`` (samples).

    Samples are little-endian float32, channel-major (all of channel 0, then
    channel 1, ...). Returns the two paths.
    """
    header_path = base_path + ".json"
    data_path = base_path + ".f32"
    header = {
        "channels": list(rec.channels),
        "rate_hz": rec.rate_hz,
        "n_samples": rec.n_samples,
        "subject_id": int(rec.subject_id),
        "condition": rec.condition,
        "segments": [{"tag": s.tag, "start": s.start, "end": s.end} for s in rec.segments],
        "sample_file": os.path.basename(data_path),
        "dtype": "<f4",
        "layout": "channel-major",
    }
    with open(header_path, "w") as fh:
        json.dump(header, fh, indent=2, sort_keys=True)
        fh.write("\n")
    rec.samples.astype("<f4").tofile(data_path)
    return header_path, data_path


def load_recording(header_path: str) -> RawRecording:
    """Read a recording written by :func:`save_recording`."""
    if not os.path.exists(header_path):
        raise MissingInputError(f"recording header not found: {header_path}")
    with open(header_path) as fh:
        header = json.load(fh)
    data_path = os.path.join(os.path.dirname(header_path), header["sample_file"])
    if not os.path.exists(data_path):
        raise MissingInputError(f"sample file not found: {data_path}")
    raw = np.fromfile(data_path, dtype="<f4")
    n_ch = len(header["channels"])
    n = int(header["n_samples"])
    if raw.size != n_ch * n:
        raise ConfigurationError(
            f"sample file holds {raw.size} values, header promises {n_ch} x {n}"
        )
    samples = raw.reshape(n_ch, n).astype(np.float64)
    segments = tuple(Segment(s["tag"], int(s["start"]), int(s["end"])) for s in header["segments"])
    return RawRecording(
        channels=tuple(header["channels"]),
        rate_hz=float(header["rate_hz"]),
        samples=samples,
        segments=segments,
        subject_id=int(header["subject_id"]),
        condition=header.get("condition"),
    )


def parse_bands(spec: str) -> tuple[BandSpec, ...]:
    """Parse ``"name:lo:hi,name:lo:hi,..."`` into band specs."""
    bands = []
    for part in spec.split(","):
        part = part.strip()
        if not part:
            continue
        pieces = part.split(":")
        if len(pieces) != 3:
            raise ConfigurationError(f"band {part!r} must look like name:low:high")
        name, lo, hi = pieces
        try:
            bands.append(BandSpec(name, float(lo), float(hi)))
        except ValueError as exc:
            raise ConfigurationError(f"band {part!r} has non-numeric edges") from exc
    if not bands:
        raise ConfigurationError("no bands given")
    return tuple(bands)
