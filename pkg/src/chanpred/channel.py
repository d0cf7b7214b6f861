"""Sum-of-sinusoids Rayleigh flat fading, LS corruption and Jakes references.

Randomness comes from numpy's Philox4x32-10 counter-based generator
(``numpy.random.Philox``) keyed through ``numpy.random.SeedSequence``.
Channel and noise draws use separate streams, ``SeedSequence([seed, 0])``
and ``SeedSequence([seed, 1])``, so the same integer seed can drive both.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from chanpred.numerics import DomainError, bessel_j0, mean_power

CHANNEL_STREAM = 0
NOISE_STREAM = 1


def rng_for(seed: int, stream: int) -> np.random.Generator:
    """Seeded Philox generator for one of the fixed streams."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(stream)])))


@dataclass(frozen=True)
class SosParameters:
    """Per-path random parameters of the sum-of-sinusoids model."""

    attenuation_i: np.ndarray
    attenuation_q: np.ndarray
    arrival_angle: np.ndarray
    phase: np.ndarray
    stationarity_phase: np.ndarray
    seed: int | None = None

    @property
    def num_sinusoids(self) -> int:
        return self.attenuation_i.size

    def __post_init__(self):
        sizes = {a.size for a in (self.attenuation_i, self.attenuation_q, self.arrival_angle,
                                  self.phase, self.stationarity_phase)}
        if len(sizes) != 1 or self.attenuation_i.size < 1:
            raise DomainError("SOS parameter arrays must share a length >= 1")


def draw_sos_parameters(m: int, seed: int) -> SosParameters:
    """Draw ``m`` paths: Gaussian gains, uniform angles on [-pi, pi)."""
    if m < 1:
        raise DomainError(f"need at least one sinusoid, got m={m}")
    rng = rng_for(seed, CHANNEL_STREAM)
    gains = rng.standard_normal((2, m))
    # uniform() draws from [low, high), matching the half-open interval.
    angles = rng.uniform(-math.pi, math.pi, size=(3, m))
    return SosParameters(
        attenuation_i=gains[0],
        attenuation_q=gains[1],
        arrival_angle=angles[0],
        phase=angles[1],
        stationarity_phase=angles[2],
        seed=seed,
    )


@dataclass(frozen=True)
class ChannelTrace:
    samples: np.ndarray
    symbol_period: float
    max_doppler: float
    num_sinusoids: int
    seed: int | None = None

    def __len__(self):
        return self.samples.size


def generate_trace(params: SosParameters, fd_max: float, ts: float, length: int) -> ChannelTrace:
    """Evaluate the SOS channel at ``n*ts`` for ``n = 0 .. length-1``.

    Each path contributes ``A cos(theta) + j B sin(theta)`` with
    ``theta = (2 pi fd_max n ts + psi) cos(alpha) + phi``; the sum is scaled
    by ``1/sqrt(M)``.
    """
    if length < 1:
        raise DomainError(f"trace length must be >= 1, got {length}")
    if not ts > 0:
        raise DomainError(f"symbol period must be > 0, got {ts}")
    if not fd_max >= 0:
        raise DomainError(f"max Doppler must be >= 0, got {fd_max}")
    t = 2.0 * math.pi * fd_max * ts * np.arange(length, dtype=np.float64)
    theta = (t[:, None] + params.stationarity_phase) * np.cos(params.arrival_angle) + params.phase
    re = np.cos(theta) @ params.attenuation_i
    im = np.sin(theta) @ params.attenuation_q
    scale = 1.0 / math.sqrt(params.num_sinusoids)
    samples = (re + 1j * im) * scale
    return ChannelTrace(samples, float(ts), float(fd_max), params.num_sinusoids, params.seed)


def white_trace(length: int, seed: int, ts: float = 1e-3) -> ChannelTrace:
    """Unit-power i.i.d. CN(0, 1) stand-in for a channel (diagnostics only)."""
    rng = rng_for(seed, CHANNEL_STREAM)
    samples = (rng.standard_normal(length) + 1j * rng.standard_normal(length)) / math.sqrt(2.0)
    return ChannelTrace(samples, float(ts), math.inf, 0, seed)


def jakes_acf(lag: int, fd_max: float, ts: float) -> float:
    if not ts > 0:
        raise DomainError(f"symbol period must be > 0, got {ts}")
    return bessel_j0(2.0 * math.pi * fd_max * abs(lag) * ts)


def jakes_spectrum(f: float, fd_max: float) -> float:
    """Classical U-shaped Doppler spectrum, defined for ``|f| < fd_max``."""
    if not fd_max > 0:
        raise DomainError(f"max Doppler must be > 0, got {fd_max}")
    ratio = f / fd_max
    if abs(ratio) >= 1.0:
        raise DomainError(f"|f|={abs(f)} is outside the Doppler support ({fd_max} Hz)")
    return 1.0 / (math.pi * fd_max * math.sqrt(1.0 - ratio * ratio))


@dataclass(frozen=True)
class LsTrace:
    """Noisy least-squares channel estimates and their noise bookkeeping."""

    estimates: np.ndarray
    noise_variance: float
    snr_db: float
    truth: ChannelTrace = field(repr=False)

    def __len__(self):
        return self.estimates.size


def corrupt_to_ls(trace: ChannelTrace, snr_db: float, seed: int) -> LsTrace:
    """Add circular complex Gaussian noise at a per-sample SNR.

    Pilots are the unit symbol, so the LS division is the identity and the
    estimate is ``h + w``. ``snr_db = inf`` gives noiseless estimates.
    """
    if len(trace) < 1:
        raise DomainError("cannot corrupt an empty trace")
    if math.isinf(snr_db) and snr_db > 0:
        return LsTrace(trace.samples.copy(), 0.0, math.inf, trace)
    noise_variance = mean_power(trace.samples) / 10.0 ** (snr_db / 10.0)
    rng = rng_for(seed, NOISE_STREAM)
    noise = rng.standard_normal((2, len(trace))) * math.sqrt(noise_variance / 2.0)
    estimates = trace.samples + (noise[0] + 1j * noise[1])
    return LsTrace(estimates, float(noise_variance), float(snr_db), trace)


def write_trace_csv(path, trace: ChannelTrace, ls: LsTrace | None = None) -> None:
    """Export a trace as ``n,re,im`` (plus ``ls_re,ls_im`` when given)."""
    header = ["n", "re", "im"] + (["ls_re", "ls_im"] if ls is not None else [])
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for n, h in enumerate(trace.samples):
            row = [n, f"{h.real:.16e}", f"{h.imag:.16e}"]
            if ls is not None:
                e = ls.estimates[n]
                row += [f"{e.real:.16e}", f"{e.imag:.16e}"]
            writer.writerow(row)
