"""Terahertz-induced electro-optic phase on the signal envelope.

The phase imprinted on the signal at lab time ``t`` for delay ``tau`` is
``sign * kappa * E_eff(t - tau)``: linear in the field, with a single
calibrated constant ``kappa`` standing in for the material prefactor.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field, replace

import numpy as np

from .grid import ComplexEnvelope, FieldWaveform, delay


class CalibrationError(RuntimeError):
    """Root search could not bracket or reach the requested target."""


@dataclass(frozen=True)
class CrystalConfig:
    """Electro-optic crystal (defaults: 0.3 mm BNA).

    Only ``length``, ``walkoff`` and ``fresnel_loss`` enter the numerics;
    ``d_eff`` and ``n_nir`` are carried for reference since the phase
    prefactor is calibrated as a whole.

    Attributes
    ----------
    d_eff : float
        Effective nonlinear coefficient (m/V).
    n_nir : float
        Near-infrared refractive index (nominal).
    length : float
        Crystal thickness (m).
    fresnel_loss : float
        Lumped single-pass power loss at the faces.
    walkoff : float
        Signed inverse-velocity mismatch between signal envelope and
        terahertz phase front (s/m).
    """

    d_eff: float = 234e-12
    n_nir: float = 1.8
    length: float = 0.3e-3
    fresnel_loss: float = 0.20
    walkoff: float = 0.0

    def __post_init__(self):
        if not self.d_eff > 0:
            raise ValueError("d_eff must be positive")
        if not self.n_nir >= 1:
            raise ValueError("n_nir must be >= 1")
        if not self.length > 0:
            raise ValueError("length must be positive")
        if not 0 <= self.fresnel_loss < 1:
            raise ValueError("fresnel_loss must lie in [0, 1)")
        if not math.isfinite(self.walkoff):
            raise ValueError("walkoff must be finite")

    @property
    def slip(self) -> float:
        """Total signed delay slip across the crystal (s)."""
        return self.walkoff * self.length


@dataclass(frozen=True)
class ModulatorConfig:
    crystal: CrystalConfig = dc_field(default_factory=CrystalConfig)
    kappa: float = 0.0
    sign: int = 1

    def __post_init__(self):
        if not self.kappa >= 0:
            raise ValueError("kappa must be non-negative")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    def with_kappa(self, kappa: float) -> "ModulatorConfig":
        return replace(self, kappa=float(kappa))


def effective_field(field: FieldWaveform, crystal: CrystalConfig) -> FieldWaveform:
    """Field averaged over the delay slip accumulated through the crystal.

    Equivalent to convolving with a unit-area boxcar of width
    ``|walkoff| * length``; applied exactly in the Fourier domain.
    """
    g = field.grid
    slip = crystal.slip
    meta = dict(field.meta, effective=True)
    if slip == 0.0:
        return FieldWaveform(g, field.samples.copy(), meta)
    if abs(slip) >= g.span / 4:
        raise ValueError(
            f"walk-off boxcar ({abs(slip):.3g} s) exceeds a quarter of the grid span"
        )
    f = np.fft.rfftfreq(g.n, g.dt)
    h = np.exp(-1j * np.pi * f * slip) * np.sinc(f * slip)
    return FieldWaveform(g, np.fft.irfft(np.fft.rfft(field.samples) * h, g.n), meta)


def _check_effective(field: FieldWaveform, cfg: ModulatorConfig):
    if cfg.crystal.walkoff != 0.0 and not field.meta.get("effective"):
        raise ValueError("crystal has walk-off: pass the field through effective_field first")


def apply_phase(
    env: ComplexEnvelope,
    field: FieldWaveform,
    tau: float,
    cfg: ModulatorConfig,
    lossy: bool = False,
) -> ComplexEnvelope:
    """Imprint ``exp(i sign kappa E(t - tau))`` on ``env``.

    With ``lossy`` the amplitude is also scaled by ``sqrt(1 - fresnel_loss)``.
    """
    if env.grid != field.grid:
        raise ValueError("envelope and field live on different grids")
    _check_effective(field, cfg)
    e = delay(field.samples, field.grid, tau)
    out = env.samples * np.exp(1j * (cfg.sign * cfg.kappa) * e)
    if lossy:
        out = out * math.sqrt(1.0 - cfg.crystal.fresnel_loss)
    return env.replace(out)


def instantaneous_shift(field: FieldWaveform, cfg: ModulatorConfig) -> np.ndarray:
    """Instantaneous frequency offset (Hz) written onto a short probe at each time."""
    return cfg.sign * cfg.kappa * np.gradient(field.samples, field.grid.dt) / (2 * np.pi)


def _max_red(records) -> float:
    return max(r.shift for r in records)


def calibrate_kappa(
    target_redshift: float,
    field: FieldWaveform,
    pulse,
    cfg: ModulatorConfig,
    taus=None,
    bracket: tuple[float, float] = (0.0, 5.0),
    rtol: float = 1e-7,
    threads: int = 1,
) -> float:
    """Find kappa such that the largest red shift of a delay scan equals the target.

    Parameters
    ----------
    target_redshift : float
        Wanted maximum red shift in wavelength (m).
    field : FieldWaveform
        Terahertz field (already effective if the crystal has walk-off).
    pulse : PulseSpec
        Signal pulse, built on ``field.grid``.
    cfg : ModulatorConfig
        Supplies crystal and sign; its kappa is ignored.
    taus : sequence of float, optional
        Scan delays; defaults to the standard scan around the field.
    bracket : (float, float)
        Search interval for kappa.

    Returns
    -------
    float
        Calibrated kappa (rad per normalized field unit).
    """
    from .fields import gaussian_pulse
    from .spectral import default_taus, delay_scan

    if target_redshift < 0:
        raise ValueError("target red shift must be non-negative")
    if target_redshift == 0:
        return 0.0
    env = gaussian_pulse(pulse, field.grid)
    if taus is None:
        taus = default_taus(field)

    def red(kappa):
        return _max_red(delay_scan(env, field, taus, cfg.with_kappa(kappa), threads=threads))

    lo, hi = map(float, bracket)
    r_lo = red(lo) if lo > 0 else 0.0
    r_hi = red(hi)
    if not (r_lo <= target_redshift <= r_hi):
        raise CalibrationError(
            f"target {target_redshift:.4g} m not bracketed: red shift spans "
            f"[{r_lo:.4g}, {r_hi:.4g}] m over kappa in [{lo}, {hi}]"
        )
    # tighten the bracket around a linear-response estimate
    guess = lo + (hi - lo) * (target_redshift - r_lo) / (r_hi - r_lo)
    for a, b in ((0.95 * guess, 1.05 * guess), (0.7 * guess, 1.3 * guess)):
        a, b = max(a, lo), min(b, hi)
        if red(a) <= target_redshift <= red(b):
            lo, hi = a, b
            break
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if red(mid) < target_redshift:
            lo = mid
        else:
            hi = mid
    kappa = 0.5 * (lo + hi)
    achieved = red(kappa)
    if abs(achieved - target_redshift) > 1e-3 * target_redshift:
        raise CalibrationError(
            f"red shift is not monotone in kappa near {kappa:.6g}: "
            f"reached {achieved:.6g} m for target {target_redshift:.6g} m"
        )
    return kappa


def calibrate_asymmetry(
    target_red: float,
    target_blue: float,
    thz,
    pulse,
    grid,
    cfg: ModulatorConfig | None = None,
    bracket: tuple[float, float] = (0.0, 0.9),
    atol: float = 1e-3,
) -> tuple[float, float]:
    """Tune the waveform asymmetry so that red/blue extremes hit both targets.

    For each trial asymmetry kappa is recalibrated to ``target_red``; the
    strongest blue shift then decides the bisection direction (larger
    asymmetry, stronger blue lobe). Returns ``(asymmetry, kappa)``.
    """
    from .fields import gaussian_pulse, thz_single_cycle
    from .spectral import default_taus, delay_scan

    cfg = cfg or ModulatorConfig()
    env = gaussian_pulse(pulse, grid)

    def blue(asym):
        field = effective_field(thz_single_cycle(replace(thz, asymmetry=asym), grid), cfg.crystal)
        taus = default_taus(field)
        kappa = calibrate_kappa(target_red, field, pulse, cfg, taus=taus, rtol=1e-5)
        recs = delay_scan(env, field, taus, cfg.with_kappa(kappa))
        return -min(r.shift for r in recs), kappa

    lo, hi = bracket
    b_lo, _ = blue(lo)
    b_hi, _ = blue(hi)
    if not (b_lo <= target_blue <= b_hi):
        raise CalibrationError(
            f"blue target {target_blue:.4g} m outside [{b_lo:.4g}, {b_hi:.4g}] m"
        )
    while hi - lo > atol:
        mid = 0.5 * (lo + hi)
        if blue(mid)[0] < target_blue:
            lo = mid
        else:
            hi = mid
    asym = 0.5 * (lo + hi)
    return asym, blue(asym)[1]
