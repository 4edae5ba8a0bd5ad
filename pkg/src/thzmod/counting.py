"""Photon counting through spectral bandpass filters with a click detector.

The source is a weak coherent state, so the number of detected photons per
pulse is Poissonian and a non-number-resolving detector fires with
probability ``1 - exp(-(mu + noise))``. Monte-Carlo cells draw from
independent generators seeded by ``(seed, stream, row, column)``, which
makes the result independent of evaluation order and thread count.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .grid import ComplexEnvelope, FieldWaveform
from .modulation import ModulatorConfig
from .spectral import Spectrum, _map, modulated_spectrum, normalized_shape

_COUNTS_STREAM = 0
_FIELD_STREAM = 1

REFERENCE_AMPLITUDE = 0.9


@dataclass(frozen=True)
class BandFilter:
    """Super-Gaussian passband, ``T = exp(-ln2 * (2|lam - center|/width)^(2 order))``.

    ``order=1`` is Gaussian; ``order=math.inf`` is a rectangle covering the
    half-open interval ``[center - width/2, center + width/2)``.
    """

    center: float
    width_fwhm: float = 3e-9
    order: float = 4

    def __post_init__(self):
        if not self.width_fwhm > 0:
            raise ValueError("band width must be positive")
        if not self.order >= 1:
            raise ValueError("band order must be >= 1")

    def transmission(self, wavelengths) -> np.ndarray:
        lam = np.asarray(wavelengths, dtype=float)
        half = self.width_fwhm / 2
        if math.isinf(self.order):
            return ((lam >= self.center - half) & (lam < self.center + half)).astype(float)
        u = np.abs(lam - self.center) / half
        return np.exp(-math.log(2) * u ** (2 * self.order))


DEFAULT_BAND_CENTERS = (792e-9, 795e-9, 800e-9, 804.8e-9, 807.6e-9)
DEFAULT_RED_BAND = 804.8e-9


def default_bands(width: float = 3e-9, order: float = 4) -> list[BandFilter]:
    return [BandFilter(c, width, order) for c in DEFAULT_BAND_CENTERS]


@dataclass(frozen=True)
class CountingConfig:
    """Photon-counting run parameters.

    ``mean_photons`` is the detected mean per pulse for a unit-energy,
    unfiltered envelope (collection efficiency included). ``rep_rate`` is
    metadata only.
    """

    mean_photons: float = 0.9
    noise_per_pulse: float = 1e-4
    pulses_per_point: int = 10_000
    rep_rate: float = 100.0
    rng_seed: int = 0

    def __post_init__(self):
        if not self.mean_photons >= 0:
            raise ValueError("mean_photons must be non-negative")
        if not self.noise_per_pulse >= 0:
            raise ValueError("noise_per_pulse must be non-negative")
        if int(self.pulses_per_point) != self.pulses_per_point or self.pulses_per_point < 1:
            raise ValueError("pulses_per_point must be a positive integer")
        if not 0 <= int(self.rng_seed) < 2**64:
            raise ValueError("rng_seed must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class CountRecord:
    tau: float
    band_center: float
    clicks: int
    pulses: int
    expected_p: float
    fraction: float


@dataclass(frozen=True)
class FieldCountRow:
    amplitude: float
    tau: float
    clicks: int
    noise_clicks: int
    pulses: int
    expected_p: float
    expected_noise_p: float

    @property
    def clicks_per_pulse(self) -> float:
        return self.clicks / self.pulses

    @property
    def noise_per_pulse(self) -> float:
        return self.noise_clicks / self.pulses


def cell_rng(seed: int, *indices: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, indices)]))


def _trapz(y, x) -> float:
    return float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(x)))


def band_transmission_fraction(spec: Spectrum, band: BandFilter) -> float:
    """Fraction of the spectral energy passed by ``band`` (trapezoid rule over frequency)."""
    nu = spec.frequencies
    total = _trapz(spec.power, nu)
    if total == 0:
        raise ValueError("spectrum carries no power")
    return float(_trapz(band.transmission(spec.wavelengths) * spec.power, nu) / total)


def detected_mean(spec: Spectrum, band: BandFilter, cfg: CountingConfig) -> float:
    """Mean detected photons per pulse in ``band``; scales with the spectrum energy,
    so envelope losses (e.g. the Fresnel factor) carry through."""
    return cfg.mean_photons * spec.energy() * band_transmission_fraction(spec, band)


def click_probability(mean: float, noise: float) -> float:
    return -math.expm1(-(mean + noise))


def expected_clicks(fraction: float, cfg: CountingConfig) -> float:
    """Click probability per pulse for a band passing ``fraction`` of the photons."""
    if not 0 <= fraction <= 1:
        raise ValueError(f"fraction must lie in [0, 1], got {fraction}")
    return click_probability(cfg.mean_photons * fraction, cfg.noise_per_pulse)


def simulate_counts(
    scan: Sequence[tuple[float, Spectrum]],
    bands: Sequence[BandFilter],
    cfg: CountingConfig,
    threads: int = 1,
) -> list[CountRecord]:
    """Binomial click counts for every (delay, band) cell, rows ordered by delay then band."""
    n = int(cfg.pulses_per_point)
    cells = [(i, j) for i in range(len(scan)) for j in range(len(bands))]

    def one(cell):
        i, j = cell
        tau, spec = scan[i]
        band = bands[j]
        mu = detected_mean(spec, band, cfg)
        p = click_probability(mu, cfg.noise_per_pulse)
        clicks = int(cell_rng(cfg.rng_seed, _COUNTS_STREAM, i, j).binomial(n, p))
        return CountRecord(float(tau), band.center, clicks, n, p, mu / cfg.mean_photons if cfg.mean_photons else 0.0)

    return _map(one, cells, threads)


def linear_noise_model(cfg: CountingConfig, anchor: float = REFERENCE_AMPLITUDE) -> Callable[[float], float]:
    """Noise per pulse growing linearly with field amplitude through ``noise_per_pulse`` at ``anchor``."""
    return lambda amplitude: cfg.noise_per_pulse * amplitude / anchor


def best_delay(env, field_shape, band, taus, cfg: CountingConfig, mod: ModulatorConfig,
               amplitude: float = REFERENCE_AMPLITUDE, lossy: bool = False) -> float:
    """Delay with the highest expected count rate in ``band`` at ``amplitude``."""
    field = normalized_shape(field_shape).scaled(amplitude)
    means = [detected_mean(modulated_spectrum(env, field, float(t), mod, lossy), band, cfg) for t in taus]
    return float(taus[int(np.argmax(means))])


def field_count_scan(
    env: ComplexEnvelope,
    field_shape: FieldWaveform,
    red_band: BandFilter,
    amplitudes,
    cfg: CountingConfig,
    mod: ModulatorConfig,
    taus,
    noise_model: Callable[[float], float] | None = None,
    lossy: bool = False,
    threads: int = 1,
) -> list[FieldCountRow]:
    """Red-band clicks and signal-blocked noise clicks versus field amplitude.

    The delay is held at the value maximizing the red-band rate at the
    reference amplitude 0.9 (chosen from ``taus``).
    """
    amplitudes = [float(a) for a in amplitudes]
    if any(a < 0 for a in amplitudes):
        raise ValueError("amplitudes must be non-negative")
    noise_model = noise_model or linear_noise_model(cfg)
    tau = best_delay(env, field_shape, red_band, taus, cfg, mod, lossy=lossy)
    shape = normalized_shape(field_shape)
    n = int(cfg.pulses_per_point)

    def one(k):
        a = amplitudes[k]
        spec = modulated_spectrum(env, shape.scaled(a), tau, mod, lossy)
        noise = float(noise_model(a))
        p = click_probability(detected_mean(spec, red_band, cfg), noise)
        p_noise = click_probability(0.0, noise)
        clicks = int(cell_rng(cfg.rng_seed, _FIELD_STREAM, k, 0).binomial(n, p))
        noise_clicks = int(cell_rng(cfg.rng_seed, _FIELD_STREAM, k, 1).binomial(n, p_noise))
        return FieldCountRow(a, tau, clicks, noise_clicks, n, p, p_noise)

    return _map(one, range(len(amplitudes)), threads)
