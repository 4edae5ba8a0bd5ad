"""Signal pulse and terahertz transient synthesis, trace I/O, electro-optic sampling."""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline

from .grid import (
    C,
    FS,
    ComplexEnvelope,
    FieldWaveform,
    TemporalGrid,
    edge_energy_fraction,
    inverse_transform,
)

FWHM_PER_SIGMA = 2.0 * math.sqrt(2.0 * math.log(2.0))

# Window width and asymmetry of the default single-cycle model. The asymmetry
# was found with ``modulation.calibrate_asymmetry`` so that, once kappa is
# set for a 1.2 nm red shift, the strongest blue shift is 1.0 nm.
DEFAULT_CYCLE_WIDTH = 500 * FS
DEFAULT_ASYMMETRY = 0.6026


@dataclass(frozen=True)
class PulseSpec:
    """Near-infrared signal pulse with a Gaussian power spectrum.

    Attributes
    ----------
    center_wavelength : float
        Carrier wavelength (m).
    spectral_fwhm : float
        Intensity FWHM of the spectrum in wavelength (m).
    chirp_gdd : float
        Group-delay dispersion (s^2) applied as spectral phase ``gdd/2 * (2 pi nu)^2``.
    energy_scale : float
        Pulse energy relative to unit energy.
    """

    center_wavelength: float = 800e-9
    spectral_fwhm: float = 7e-9
    chirp_gdd: float = 2500 * FS**2
    energy_scale: float = 1.0

    def __post_init__(self):
        if not self.center_wavelength > 0:
            raise ValueError("center_wavelength must be positive")
        if not 0 < self.spectral_fwhm < self.center_wavelength / 10:
            raise ValueError("spectral_fwhm must lie in (0, center_wavelength/10)")
        if not self.energy_scale >= 0:
            raise ValueError("energy_scale must be non-negative")

    @property
    def carrier_freq(self) -> float:
        return C / self.center_wavelength

    @property
    def bandwidth_hz(self) -> float:
        """Spectral intensity FWHM in frequency."""
        lam, dl = self.center_wavelength, self.spectral_fwhm
        return C / (lam - dl / 2) - C / (lam + dl / 2)

    @property
    def transform_limited_duration(self) -> float:
        return 2 * math.log(2) / math.pi / self.bandwidth_hz


@dataclass(frozen=True)
class ThzSpec:
    """Parametric terahertz transient.

    The waveform is the time derivative of a Gaussian-windowed cosine,
    ``d/dt [ g(t) cos(2 pi f_c (t - t_c) - asymmetry * pi/2) ]``, rescaled
    so that its largest excursion equals ``amplitude``. Zero asymmetry gives a
    waveform antisymmetric about ``t_center``; nonzero values unbalance the
    positive and negative half cycles. ``cycle_width`` is the FWHM of the
    Gaussian window for one cycle.
    """

    amplitude: float = 1.0
    center_freq: float = 1.4e12
    cycle_width: float = DEFAULT_CYCLE_WIDTH
    asymmetry: float = DEFAULT_ASYMMETRY
    t_center: float = 0.0

    def __post_init__(self):
        if not self.amplitude >= 0:
            raise ValueError("amplitude must be non-negative")
        if not self.center_freq > 0:
            raise ValueError("center_freq must be positive")
        if not self.cycle_width > 0:
            raise ValueError("cycle_width must be positive")
        if not -1 < self.asymmetry < 1:
            raise ValueError("asymmetry must lie in (-1, 1)")


def gaussian_pulse(spec: PulseSpec, grid: TemporalGrid) -> ComplexEnvelope:
    """Unit-energy (times ``energy_scale``) Gaussian pulse centred at t = 0."""
    dnu = spec.bandwidth_hz
    if spec.transform_limited_duration < 16 * grid.dt:
        raise ValueError(
            f"grid dt={grid.dt:.3g} s under-resolves a "
            f"{spec.transform_limited_duration:.3g} s pulse (need >= 16 samples per FWHM)"
        )
    nu = grid.freqs
    amp = np.exp(-2 * math.log(2) * (nu / dnu) ** 2)
    phase = 0.5 * spec.chirp_gdd * (2 * np.pi * nu) ** 2
    a = inverse_transform(amp * np.exp(1j * phase), grid)
    if edge_energy_fraction(a) > 1e-8:
        raise ValueError("pulse does not fit on the grid; increase n or dt")
    a *= math.sqrt(spec.energy_scale / (np.sum(np.abs(a) ** 2) * grid.dt))
    return ComplexEnvelope(grid, a, spec.carrier_freq)


def _check_resolution(spec: ThzSpec, grid: TemporalGrid):
    if spec.cycle_width < 16 * grid.dt or spec.center_freq * grid.dt > 1 / 16:
        raise ValueError(
            f"grid dt={grid.dt:.3g} s under-resolves the terahertz cycle "
            f"(width {spec.cycle_width:.3g} s, {spec.center_freq:.3g} Hz)"
        )


def _windowed_derivative(spec: ThzSpec, grid: TemporalGrid, n_cycles: int) -> np.ndarray:
    sigma = spec.cycle_width * n_cycles / FWHM_PER_SIGMA
    s = grid.t - spec.t_center
    w = 2 * np.pi * spec.center_freq
    phase = w * s - spec.asymmetry * np.pi / 2
    g = np.exp(-0.5 * (s / sigma) ** 2)
    e = -(s / sigma**2) * g * np.cos(phase) - w * g * np.sin(phase)
    peak = np.max(np.abs(e))
    if peak == 0:
        raise ValueError("terahertz waveform vanishes on the grid")
    return e / peak


def thz_multi_cycle(spec: ThzSpec, n_cycles: int, grid: TemporalGrid) -> FieldWaveform:
    """Transient with ``n_cycles`` oscillations; the window FWHM is ``n_cycles * cycle_width``."""
    if int(n_cycles) != n_cycles or n_cycles < 1:
        raise ValueError(f"n_cycles must be a positive integer, got {n_cycles}")
    _check_resolution(spec, grid)
    e = spec.amplitude * _windowed_derivative(spec, grid, int(n_cycles))
    if spec.amplitude > 0 and edge_energy_fraction(e) > 1e-8:
        raise ValueError("terahertz waveform does not fit on the grid")
    return FieldWaveform(grid, e)


def thz_single_cycle(spec: ThzSpec, grid: TemporalGrid) -> FieldWaveform:
    return thz_multi_cycle(spec, 1, grid)


def net_area_ratio(field: FieldWaveform) -> float:
    """|integral E dt| / integral |E| dt (0 for a DC-free transient)."""
    total = np.sum(np.abs(field.samples))
    return float(abs(np.sum(field.samples)) / total) if total else 0.0


def save_trace(field: FieldWaveform, path, comment: str | None = None) -> None:
    lines = ["# time_fs\tfield"]
    if comment:
        lines[:0] = [f"# {c}" for c in comment.splitlines()]
    for t, e in zip(field.grid.t, field.samples):
        lines.append(f"{t / FS:.17g}\t{e:.17g}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_trace(path) -> tuple[np.ndarray, np.ndarray]:
    """Parse a two-column ``time_fs<TAB>field`` file; returns (t in s, field)."""
    times, values = [], []
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"{path}:{lineno}: expected 2 columns, got {len(parts)}")
        try:
            t, e = float(parts[0]), float(parts[1])
        except ValueError:
            raise ValueError(f"{path}:{lineno}: unparsable row {line!r}") from None
        if times and t <= times[-1]:
            raise ValueError(f"{path}:{lineno}: time not strictly increasing")
        times.append(t)
        values.append(e)
    if len(times) < 8:
        raise ValueError(f"{path}: need at least 8 rows, found {len(times)}")
    return np.array(times) * FS, np.array(values)


def load_trace(path, grid: TemporalGrid) -> FieldWaveform:
    """Load a measured trace and resample it onto ``grid``.

    Uniformly sampled traces are resampled by sinc (band-limited)
    interpolation, others by a cubic spline. Samples outside the trace
    window are zero. No zero-area correction is applied: measured data are
    passed through as recorded, DC offset included.
    """
    t, e = read_trace(path)
    out = np.zeros(grid.n)
    inside = (grid.t >= t[0] - 1e-6 * FS) & (grid.t <= t[-1] + 1e-6 * FS)
    steps = np.diff(t)
    step = steps.mean()
    if np.max(np.abs(steps - step)) <= 1e-6 * step:
        u = (grid.t[inside, None] - t[None, :]) / step
        out[inside] = np.sinc(u) @ e
    else:
        out[inside] = CubicSpline(t, e)(np.clip(grid.t[inside], t[0], t[-1]))
    return FieldWaveform(grid, out, {"source": str(path)})


def eos_trace(field: FieldWaveform, probe: ComplexEnvelope, delays) -> list[tuple[float, float]]:
    """Electro-optic sampling: probe-intensity-weighted field at each delay.

    ``signal(tau) = sum |probe(t)|^2 E(t - tau) / sum |probe(t)|^2``.
    """
    delays = [float(d) for d in delays]
    if not delays:
        raise ValueError("delay list is empty")
    if field.grid != probe.grid:
        raise ValueError("field and probe live on different grids")
    g = field.grid
    weight = probe.intensity / probe.intensity.sum()
    f = np.fft.rfftfreq(g.n, g.dt)
    spec = np.fft.rfft(field.samples)
    out = []
    for tau in delays:
        shifted = np.fft.irfft(spec * np.exp(-2j * np.pi * f * tau), g.n)
        out.append((tau, float(weight @ shifted)))
    return out
