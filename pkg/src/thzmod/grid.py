"""Uniform time/frequency grid and the Fourier-transform convention.

All internal quantities are SI (s, Hz, m). The envelope ``a(t)`` of a
near-infrared pulse is referenced to a carrier ``nu0`` through

    field(t) ~ Re{ a(t) * exp(+i 2 pi nu0 t) }

so that the forward transform

    A(nu) = sum_j a(t_j) exp(-i 2 pi nu t_j) dt

places a positive phase slope ``d(arg a)/dt`` at positive baseband frequency,
i.e. a blue shift. The absolute optical frequency of baseband bin ``nu`` is
``nu0 + nu`` and its vacuum wavelength is ``C / (nu0 + nu)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import cached_property

import numpy as np

C = 299_792_458.0  # m/s

FS = 1e-15
PS = 1e-12
THZ = 1e12
NM = 1e-9


@dataclass(frozen=True)
class TemporalGrid:
    """Uniform time axis ``t_start + k*dt`` with ``n`` samples.

    The conjugate (baseband) frequency axis is centred, ascending, with
    spacing ``df = 1/(n dt)`` and range ``[-1/(2dt), 1/(2dt))``.
    """

    n: int
    dt: float
    t_start: float = 0.0

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or isinstance(self.n, bool):
            raise ValueError(f"grid size must be an integer, got {self.n!r}")
        if self.n < 8 or (self.n & (self.n - 1)) != 0:
            raise ValueError(f"grid size must be a power of two >= 8, got {self.n}")
        if not np.isfinite(self.dt) or self.dt <= 0:
            raise ValueError(f"sample spacing dt must be positive, got {self.dt}")

    @cached_property
    def t(self) -> np.ndarray:
        return self.t_start + self.dt * np.arange(self.n)

    @property
    def df(self) -> float:
        return 1.0 / (self.n * self.dt)

    @property
    def span(self) -> float:
        return self.n * self.dt

    @cached_property
    def freqs(self) -> np.ndarray:
        return (np.arange(self.n) - self.n // 2) * self.df

    def index_of(self, time: float) -> int:
        """Index of the sample nearest to ``time``."""
        return int(np.clip(np.rint((time - self.t_start) / self.dt), 0, self.n - 1))


@dataclass(frozen=True, eq=False)
class ComplexEnvelope:
    """Slowly varying complex envelope on a grid, referenced to ``carrier_freq`` (Hz).

    Unit-energy pulses satisfy ``sum(|samples|^2) * dt == 1``.
    """

    grid: TemporalGrid
    samples: np.ndarray
    carrier_freq: float

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.complex128)
        if s.shape != (self.grid.n,):
            raise ValueError(f"envelope has {s.size} samples, grid has {self.grid.n}")
        s.flags.writeable = False
        object.__setattr__(self, "samples", s)

    @property
    def energy(self) -> float:
        return float(np.sum(np.abs(self.samples) ** 2) * self.grid.dt)

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.samples) ** 2

    def replace(self, samples) -> "ComplexEnvelope":
        return ComplexEnvelope(self.grid, samples, self.carrier_freq)


@dataclass(frozen=True, eq=False)
class FieldWaveform:
    """Real terahertz field on a grid in normalized units (1.0 = full pump)."""

    grid: TemporalGrid
    samples: np.ndarray
    meta: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.float64)
        if s.shape != (self.grid.n,):
            raise ValueError(f"waveform has {s.size} samples, grid has {self.grid.n}")
        s.flags.writeable = False
        object.__setattr__(self, "samples", s)

    @property
    def peak(self) -> float:
        return float(np.max(np.abs(self.samples)))

    def scaled(self, factor: float) -> "FieldWaveform":
        return FieldWaveform(self.grid, self.samples * factor, dict(self.meta))

    def replace(self, samples) -> "FieldWaveform":
        return FieldWaveform(self.grid, samples, dict(self.meta))


def make_grid(n: int, dt: float, t_start: float = 0.0) -> TemporalGrid:
    return TemporalGrid(n, float(dt), float(t_start))


def centered_grid(n: int = 4096, dt: float = 2 * FS) -> TemporalGrid:
    """Grid symmetric about t = 0 (sample n/2 sits exactly at zero)."""
    return make_grid(n, dt, -(n // 2) * dt)


def _ramp(grid: TemporalGrid) -> np.ndarray:
    return np.exp(-2j * np.pi * grid.freqs * grid.t_start)


def forward_transform(env: ComplexEnvelope) -> np.ndarray:
    """Spectrum of ``env`` on ``env.grid.freqs`` (unitary with the dt/df weights)."""
    g = env.grid
    return np.fft.fftshift(np.fft.fft(env.samples)) * g.dt * _ramp(g)


def inverse_transform(spectrum: np.ndarray, grid: TemporalGrid) -> np.ndarray:
    """Time samples whose forward transform is ``spectrum``."""
    spectrum = np.asarray(spectrum, dtype=np.complex128)
    if spectrum.shape != (grid.n,):
        raise ValueError(f"spectrum has {spectrum.size} bins, grid has {grid.n}")
    return np.fft.ifft(np.fft.ifftshift(spectrum / _ramp(grid))) / grid.dt


def delay(samples: np.ndarray, grid: TemporalGrid, shift: float) -> np.ndarray:
    """Band-limited (periodic) delay: returns ``x(t - shift)``.

    Real input stays real. Content must not wrap around the grid edges.
    """
    x = np.asarray(samples)
    if shift == 0.0:
        return x.copy()
    if np.isrealobj(x):
        f = np.fft.rfftfreq(grid.n, grid.dt)
        return np.fft.irfft(np.fft.rfft(x) * np.exp(-2j * np.pi * f * shift), grid.n)
    f = np.fft.fftfreq(grid.n, grid.dt)
    return np.fft.ifft(np.fft.fft(x) * np.exp(-2j * np.pi * f * shift))


def edge_energy_fraction(samples: np.ndarray, fraction: float = 0.01) -> float:
    """Share of ``sum |x|^2`` held in the outer ``fraction`` of samples (both ends)."""
    p = np.abs(np.asarray(samples)) ** 2
    total = p.sum()
    if total == 0:
        return 0.0
    k = max(1, int(round(len(p) * fraction / 2)))
    return float((p[:k].sum() + p[-k:].sum()) / total)


def wavelength_of(baseband: np.ndarray, carrier_freq: float) -> np.ndarray:
    return C / (carrier_freq + np.asarray(baseband))
