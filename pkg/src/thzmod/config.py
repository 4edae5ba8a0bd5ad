"""Scenario files: YAML with explicit unit suffixes on every physical quantity.

Example (all sections and keys optional; omitted values take the defaults)::

    grid:      {n: 4096, dt: 2 fs}
    pulse:     {center_wavelength: 800 nm, spectral_fwhm: 7 nm, chirp_gdd: 2500 fs^2}
    thz:       {amplitude: 1.0, center_freq: 1.4 THz, cycle_width: 500 fs,
                asymmetry: 0.6026, t_center: 0 fs, n_cycles: 1}
    crystal:   {d_eff: 234 pm/V, n_nir: 1.8, length: 0.3 mm,
                fresnel_loss: 0.2, walkoff: 0 fs/mm}
    modulator: {calibration_target: 1.2 nm, sign: 1}   # or {kappa: 0.48}
    scan:      {start: -2000 fs, stop: 2000 fs, step: 50 fs}
    bands:     [{center: 792 nm, width: 3 nm, order: 4}, ...]
    counting:  {mean_photons: 0.9, noise_per_pulse: 1.0e-4, pulses_per_point: 10000,
                rep_rate: 100 Hz, seed: 1, amplitude: 0.9, red_band: 804.8 nm,
                apply_loss: false}
    field_scan: {amplitudes: [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0]}
    output:    {dir: out}

``thz.trace`` (a path, relative to the scenario file) replaces the parametric
transient with a measured one.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .counting import DEFAULT_BAND_CENTERS, DEFAULT_RED_BAND, BandFilter, CountingConfig
from .fields import PulseSpec, ThzSpec
from .grid import FS, PS, TemporalGrid, centered_grid
from .modulation import CrystalConfig
from .units import UnitError, parse_quantity


class ConfigError(ValueError):
    pass


DEFAULT_AMPLITUDES = tuple(round(0.1 * k, 1) for k in range(1, 11))


@dataclass(frozen=True)
class Scenario:
    grid: TemporalGrid = field(default_factory=centered_grid)
    pulse: PulseSpec = field(default_factory=PulseSpec)
    thz: ThzSpec = field(default_factory=ThzSpec)
    n_cycles: int = 1
    trace: str | None = None
    crystal: CrystalConfig = field(default_factory=CrystalConfig)
    kappa: float | None = None
    calibration_target: float | None = 1.2e-9
    sign: int = 1
    scan_start: float = -2 * PS
    scan_stop: float = 2 * PS
    scan_step: float = 50 * FS
    bands: tuple[BandFilter, ...] = tuple(BandFilter(c) for c in DEFAULT_BAND_CENTERS)
    red_band: BandFilter = BandFilter(DEFAULT_RED_BAND)
    counting: CountingConfig = field(default_factory=lambda: CountingConfig(rng_seed=1))
    count_amplitude: float = 0.9
    apply_loss: bool = False
    amplitudes: tuple[float, ...] = DEFAULT_AMPLITUDES
    output_dir: str = "out"

    def taus(self) -> np.ndarray:
        k = int(round((self.scan_stop - self.scan_start) / self.scan_step))
        return self.scan_start + self.scan_step * np.arange(k + 1)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["grid"] = {"n": self.grid.n, "dt": self.grid.dt, "t_start": self.grid.t_start}
        d.pop("output_dir")
        return d

    def digest(self) -> str:
        text = json.dumps(self.to_dict(), sort_keys=True, default=repr)
        return hashlib.sha256(text.encode()).hexdigest()


class _Section:
    """Dict view that reports errors with dotted paths and rejects unknown keys."""

    def __init__(self, data, path: str):
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: expected a mapping, got {type(data).__name__}")
        self.data, self.path, self.used = data, path, set()

    def _key(self, key):
        self.used.add(key)
        return f"{self.path}.{key}" if self.path else key

    def has(self, key) -> bool:
        return key in self.data

    def quantity(self, key, kind, default):
        where = self._key(key)
        if key not in self.data:
            return default
        try:
            return parse_quantity(self.data[key], kind)
        except UnitError as exc:
            raise ConfigError(f"{where}: {exc}") from None

    def number(self, key, default, integer=False):
        where = self._key(key)
        if key not in self.data:
            return default
        v = self.data[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)) or (integer and not isinstance(v, int)):
            raise ConfigError(f"{where}: expected {'an integer' if integer else 'a number'}, got {v!r}")
        return v

    def flag(self, key, default):
        where = self._key(key)
        v = self.data.get(key, default)
        if not isinstance(v, bool):
            raise ConfigError(f"{where}: expected true/false, got {v!r}")
        return v

    def raw(self, key, default=None):
        self._key(key)
        return self.data.get(key, default)

    def section(self, key):
        return _Section(self.data.get(key), self._key(key))

    def finish(self):
        extra = sorted(set(self.data) - self.used)
        if extra:
            raise ConfigError(f"{self.path or '<root>'}: unknown key(s) {', '.join(map(str, extra))}")


def _build(where: str, factory, **kwargs):
    try:
        return factory(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _band(data, where: str, defaults=None) -> BandFilter:
    if isinstance(data, str):
        data = {"center": data}
    s = _Section(data, where)
    if not s.has("center"):
        raise ConfigError(f"{where}.center: required")
    order = s.raw("order", 4)
    if order in ("inf", "rect", "rectangular"):
        order = math.inf
    elif isinstance(order, bool) or not isinstance(order, (int, float)):
        raise ConfigError(f"{where}.order: expected a number or 'rect', got {order!r}")
    band = _build(
        where,
        BandFilter,
        center=s.quantity("center", "length", None),
        width_fwhm=s.quantity("width", "length", 3e-9),
        order=order,
    )
    s.finish()
    return band


def scenario_from_dict(data: dict, base_dir: Path | None = None) -> Scenario:
    root = _Section(data, "")
    d = Scenario()

    g = root.section("grid")
    n = g.number("n", d.grid.n, integer=True)
    dt = g.quantity("dt", "time", d.grid.dt)
    t_start = g.quantity("t_start", "time", -(n // 2) * dt)
    g.finish()
    grid = _build("grid", TemporalGrid, n=n, dt=dt, t_start=t_start)

    p = root.section("pulse")
    pulse = _build(
        "pulse",
        PulseSpec,
        center_wavelength=p.quantity("center_wavelength", "length", d.pulse.center_wavelength),
        spectral_fwhm=p.quantity("spectral_fwhm", "length", d.pulse.spectral_fwhm),
        chirp_gdd=p.quantity("chirp_gdd", "gdd", d.pulse.chirp_gdd),
        energy_scale=p.number("energy_scale", d.pulse.energy_scale),
    )
    p.finish()

    t = root.section("thz")
    thz = _build(
        "thz",
        ThzSpec,
        amplitude=t.number("amplitude", d.thz.amplitude),
        center_freq=t.quantity("center_freq", "frequency", d.thz.center_freq),
        cycle_width=t.quantity("cycle_width", "time", d.thz.cycle_width),
        asymmetry=t.number("asymmetry", d.thz.asymmetry),
        t_center=t.quantity("t_center", "time", d.thz.t_center),
    )
    n_cycles = t.number("n_cycles", 1, integer=True)
    if n_cycles < 1:
        raise ConfigError("thz.n_cycles: must be >= 1")
    trace = t.raw("trace")
    if trace is not None:
        if not isinstance(trace, str):
            raise ConfigError("thz.trace: expected a path")
        tp = Path(trace)
        if base_dir is not None and not tp.is_absolute():
            tp = base_dir / tp
        if not tp.is_file():
            raise ConfigError(f"thz.trace: file not found: {tp}")
        trace = str(tp)
    t.finish()

    c = root.section("crystal")
    crystal = _build(
        "crystal",
        CrystalConfig,
        d_eff=c.quantity("d_eff", "nonlinearity", d.crystal.d_eff),
        n_nir=c.number("n_nir", d.crystal.n_nir),
        length=c.quantity("length", "length", d.crystal.length),
        fresnel_loss=c.number("fresnel_loss", d.crystal.fresnel_loss),
        walkoff=c.quantity("walkoff", "walkoff", d.crystal.walkoff),
    )
    c.finish()

    m = root.section("modulator")
    kappa = m.number("kappa", None)
    target = m.quantity("calibration_target", "length", None)
    if not root.has("modulator"):
        target = d.calibration_target
    elif (kappa is None) == (target is None):
        raise ConfigError("modulator: give exactly one of kappa / calibration_target")
    if kappa is not None and kappa < 0:
        raise ConfigError("modulator.kappa: must be non-negative")
    if target is not None and target < 0:
        raise ConfigError("modulator.calibration_target: must be non-negative")
    sign = m.number("sign", 1, integer=True)
    if sign not in (1, -1):
        raise ConfigError("modulator.sign: must be +1 or -1")
    m.finish()

    s = root.section("scan")
    start = s.quantity("start", "time", d.scan_start)
    stop = s.quantity("stop", "time", d.scan_stop)
    step = s.quantity("step", "time", d.scan_step)
    s.finish()
    if not step > 0 or not stop >= start:
        raise ConfigError("scan: need step > 0 and stop >= start")

    raw_bands = root.raw("bands")
    if raw_bands is None:
        bands = d.bands
    else:
        if not isinstance(raw_bands, list) or not raw_bands:
            raise ConfigError("bands: expected a non-empty list")
        bands = tuple(_band(b, f"bands[{i}]") for i, b in enumerate(raw_bands))

    k = root.section("counting")
    try:
        counting = CountingConfig(
            mean_photons=k.number("mean_photons", 0.9),
            noise_per_pulse=k.number("noise_per_pulse", 1e-4),
            pulses_per_point=k.number("pulses_per_point", 10_000, integer=True),
            rep_rate=k.quantity("rep_rate", "frequency", 100.0),
            rng_seed=k.number("seed", 1, integer=True),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"counting: {exc}") from None
    amplitude = k.number("amplitude", d.count_amplitude)
    red = k.raw("red_band")
    red_band = d.red_band if red is None else _band(red, "counting.red_band")
    apply_loss = k.flag("apply_loss", False)
    k.finish()

    f = root.section("field_scan")
    amps = f.raw("amplitudes", list(DEFAULT_AMPLITUDES))
    f.finish()
    if not isinstance(amps, list) or not amps or any(isinstance(a, bool) or not isinstance(a, (int, float)) for a in amps):
        raise ConfigError("field_scan.amplitudes: expected a non-empty list of numbers")
    if any(a < 0 for a in amps) or amps != sorted(amps):
        raise ConfigError("field_scan.amplitudes: must be non-negative and ascending")

    o = root.section("output")
    out_dir = o.raw("dir", d.output_dir)
    o.finish()
    root.finish()

    return Scenario(
        grid=grid, pulse=pulse, thz=thz, n_cycles=n_cycles, trace=trace, crystal=crystal,
        kappa=kappa, calibration_target=target, sign=sign,
        scan_start=start, scan_stop=stop, scan_step=step,
        bands=bands, red_band=red_band, counting=counting, count_amplitude=float(amplitude),
        apply_loss=apply_loss, amplitudes=tuple(float(a) for a in amps), output_dir=str(out_dir),
    )


def load_scenario(path) -> Scenario:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config not found: {path}")
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from None
    return scenario_from_dict(data or {}, base_dir=path.parent)
