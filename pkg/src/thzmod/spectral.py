"""Power spectra, Gaussian line fits and delay / field-strength scans."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .grid import C, FS, PS, ComplexEnvelope, FieldWaveform, forward_transform
from .modulation import ModulatorConfig, apply_phase

FOUR_LN2 = 4.0 * math.log(2.0)

REFERENCE_OFFSET = -2 * PS
SCAN_HALF_RANGE = 2 * PS
SCAN_STEP = 50 * FS


class FitError(ValueError):
    """Spectrum cannot be fitted (empty, flat or too narrow)."""


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Power spectrum ordered by increasing wavelength.

    ``power`` is a density per unit frequency, so ``energy()`` (a sum over
    the uniform frequency bins) equals the time-domain pulse energy.
    ``frequencies`` holds the absolute optical frequency of each bin.
    """

    wavelengths: np.ndarray
    power: np.ndarray
    frequencies: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.wavelengths, dtype=float)
        p = np.asarray(self.power, dtype=float)
        nu = np.asarray(self.frequencies, dtype=float)
        if not (lam.shape == p.shape == nu.shape):
            raise ValueError("wavelengths, power and frequencies differ in length")
        if np.any(p < 0):
            raise ValueError("power must be non-negative")
        if lam.size > 1 and not np.all(np.diff(lam) > 0):
            raise ValueError("wavelengths must be strictly increasing")
        for name, a in (("wavelengths", lam), ("power", p), ("frequencies", nu)):
            a.flags.writeable = False
            object.__setattr__(self, name, a)

    @property
    def df(self) -> float:
        return float(abs(self.frequencies[0] - self.frequencies[1]))

    def energy(self) -> float:
        return float(self.power.sum() * self.df)


@dataclass(frozen=True)
class FitResult:
    amplitude: float
    center: float
    fwhm: float
    offset: float
    rms_residual: float
    converged: bool = True
    iterations: int = 0

    def params(self) -> np.ndarray:
        return np.array([self.amplitude, self.center, self.fwhm, self.offset])


@dataclass(frozen=True)
class ScanRecord:
    tau: float
    shift: float
    fwhm: float
    residual: float
    center: float = float("nan")
    converged: bool = True


@dataclass(frozen=True)
class FieldScanRow:
    amplitude: float
    max_blue: float
    max_red: float
    fwhm_min: float
    fwhm_max: float
    fwhm_ref: float

    @property
    def fwhm_depth(self) -> float:
        return self.fwhm_max - self.fwhm_min


def power_spectrum(env: ComplexEnvelope) -> Spectrum:
    spec = forward_transform(env)
    nu = env.carrier_freq + env.grid.freqs
    keep = nu > 0
    nu, p = nu[keep][::-1], (np.abs(spec[keep]) ** 2)[::-1]
    return Spectrum(C / nu, p, nu)


# -- Gaussian fitting -------------------------------------------------------


def _gauss(x, p):
    a, x0, w, o = p
    e = np.exp(-FOUR_LN2 * ((x - x0) / w) ** 2)
    return a * e + o, e


def _jacobian(x, p, e):
    a, x0, w, _ = p
    d = x - x0
    j = np.empty((x.size, 4))
    j[:, 0] = e
    j[:, 1] = a * e * 2 * FOUR_LN2 * d / w**2
    j[:, 2] = a * e * 2 * FOUR_LN2 * d**2 / w**3
    j[:, 3] = 1.0
    return j


def _lobes(y: np.ndarray) -> list[tuple[int, int]]:
    """Basins ``[start, stop)`` each containing one run above half maximum."""
    above = y >= 0.5 * y.max()
    edges = np.flatnonzero(np.diff(above.astype(int)))
    starts = list(edges[~above[edges]] + 1)
    stops = list(edges[above[edges]] + 1)
    if above[0]:
        starts.insert(0, 0)
    if above[-1]:
        stops.append(y.size)
    runs = list(zip(starts, stops))
    bounds = [0]
    for (_, s0), (s1, _) in zip(runs[:-1], runs[1:]):
        bounds.append(s0 + int(np.argmin(y[s0:s1])))
    bounds.append(y.size)
    return list(zip(bounds[:-1], bounds[1:]))


def fit_gaussian(
    spec: Spectrum,
    seed: FitResult | None = None,
    window: float = 0.005,
    max_iter: int = 200,
    tol: float = 1e-10,
) -> FitResult:
    """Least-squares Gaussian-plus-offset fit in wavelength.

    The fit covers the span from the first to the last point above
    ``window`` times the peak. Without a seed the
    start values come from the centroid and second moment. If the spectrum
    has several lobes above half maximum, only the basin of the lobe holding
    the most power is fitted. Levenberg-Marquardt iterations stop once the
    largest relative parameter step is below ``tol``; hitting ``max_iter``
    returns a result with ``converged=False``.
    """
    p_all = spec.power
    peak = p_all.max() if p_all.size else 0.0
    if not peak > 0:
        raise FitError("spectrum has no power")
    if np.count_nonzero(p_all >= 0.5 * peak) < 8:
        raise FitError("fewer than 8 points above half maximum")
    if np.ptp(p_all) == 0:
        raise FitError("flat spectrum")

    lo, hi = max(_lobes(p_all), key=lambda b: p_all[b[0]:b[1]].sum())
    # contiguous span, so noise in the wings is not cherry-picked by the threshold
    hit = lo + np.flatnonzero(p_all[lo:hi] > window * peak)
    sel = slice(hit[0], hit[-1] + 1)
    # nm and peak-normalized units keep the normal equations well conditioned
    x = spec.wavelengths[sel] / 1e-9
    y = p_all[sel] / peak

    if seed is None:
        m = y.sum()
        x0 = float((x * y).sum() / m)
        w = float(math.sqrt(8 * math.log(2) * (y * (x - x0) ** 2).sum() / m))
        p = np.array([y.max(), x0, w, 0.0])
    else:
        p = np.array([seed.amplitude / peak, seed.center / 1e-9, seed.fwhm / 1e-9, seed.offset / peak])

    scale = np.array([1.0, 1.0, 1.0, 1.0])
    model, e = _gauss(x, p)
    r = model - y
    sse = r @ r
    lam = 1e-3
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        j = _jacobian(x, p, e)
        jtj = j.T @ j
        g = j.T @ r
        damp = lam * np.maximum(np.diag(jtj), 1e-12 * np.trace(jtj))
        try:
            step = np.linalg.solve(jtj + np.diag(damp), -g)
        except np.linalg.LinAlgError:
            lam *= 10
            continue
        trial = p + step
        rel = np.max(np.abs(step) / np.maximum(np.abs(p), scale))
        if trial[2] > 0:
            t_model, t_e = _gauss(x, trial)
            t_r = t_model - y
            t_sse = t_r @ t_r
        else:
            t_sse = np.inf
        if t_sse <= sse:
            p, e, r, sse = trial, t_e, t_r, t_sse
            lam = max(lam / 10, 1e-12)
        else:
            lam *= 10
        if rel < tol:
            converged = True
            break
    p[2] = abs(p[2])
    rms = float(math.sqrt(sse / y.size) / p[0]) if p[0] != 0 else float("inf")
    return FitResult(
        amplitude=float(p[0] * peak),
        center=float(p[1] * 1e-9),
        fwhm=float(p[2] * 1e-9),
        offset=float(p[3] * peak),
        rms_residual=abs(rms),
        converged=converged,
        iterations=it,
    )


# -- scans ------------------------------------------------------------------


def field_center(field: FieldWaveform) -> float:
    """Intensity-weighted centre time of the field in its own frame."""
    w = field.samples**2
    if not w.sum():
        return 0.0
    return float((field.grid.t * w).sum() / w.sum())


def reference_delay(field: FieldWaveform) -> float:
    """Delay that leaves the pulse 2 ps away from the field (unmodulated reference)."""
    return REFERENCE_OFFSET - field_center(field)


def default_taus(field: FieldWaveform, half_range=SCAN_HALF_RANGE, step=SCAN_STEP) -> np.ndarray:
    """Standard scan: +-2 ps in 50 fs steps about overlap with the field centre."""
    k = int(round(half_range / step))
    centre = -round(field_center(field) / step) * step
    return centre + step * np.arange(-k, k + 1)


def _map(func, items, threads: int):
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(func, items))
    return [func(i) for i in items]


def modulated_spectrum(env, field, tau, cfg, lossy=False) -> Spectrum:
    return power_spectrum(apply_phase(env, field, tau, cfg, lossy=lossy))


def reference_fit(env: ComplexEnvelope, field: FieldWaveform, cfg: ModulatorConfig) -> FitResult:
    return fit_gaussian(modulated_spectrum(env, field, reference_delay(field), cfg))


def delay_scan(
    env: ComplexEnvelope,
    field: FieldWaveform,
    taus,
    cfg: ModulatorConfig,
    threads: int = 1,
    reference: FitResult | None = None,
) -> list[ScanRecord]:
    """Fit the modulated spectrum at each delay.

    Shifts are fitted centre minus the centre of the unmodulated reference
    fit (positive = red shift). Every per-delay fit is seeded from the
    reference so results do not depend on scan order or thread count.
    """
    taus = [float(t) for t in taus]
    if not taus:
        raise ValueError("delay list is empty")
    ref = reference or reference_fit(env, field, cfg)

    def one(tau):
        fit = fit_gaussian(modulated_spectrum(env, field, tau, cfg), seed=ref)
        return ScanRecord(
            tau=tau,
            shift=fit.center - ref.center,
            fwhm=fit.fwhm,
            residual=fit.rms_residual,
            center=fit.center,
            converged=fit.converged,
        )

    return _map(one, taus, threads)


def scan_spectra(env, field, taus, cfg, lossy=False, threads: int = 1) -> list[Spectrum]:
    return _map(lambda tau: modulated_spectrum(env, field, float(tau), cfg, lossy), list(taus), threads)


def normalized_shape(field: FieldWaveform) -> FieldWaveform:
    peak = field.peak
    if peak == 0:
        raise ValueError("field shape is identically zero")
    return field.scaled(1.0 / peak)


def field_scan(
    env: ComplexEnvelope,
    field_shape: FieldWaveform,
    amplitudes,
    cfg: ModulatorConfig,
    taus=None,
    threads: int = 1,
) -> list[FieldScanRow]:
    """Shift and bandwidth extremes of a delay scan for each field amplitude.

    ``field_shape`` is rescaled to unit peak and multiplied by each amplitude.
    Blue and red extremes are reported as non-negative magnitudes when present.
    """
    amplitudes = [float(a) for a in amplitudes]
    if any(a < 0 for a in amplitudes) or amplitudes != sorted(amplitudes):
        raise ValueError("amplitudes must be non-negative and ascending")
    shape = normalized_shape(field_shape)
    if taus is None:
        taus = default_taus(shape)
    ref = reference_fit(env, shape, cfg)
    rows = []
    for a in amplitudes:
        recs = delay_scan(env, shape.scaled(a), taus, cfg, threads=threads, reference=ref)
        shifts = np.array([r.shift for r in recs])
        widths = np.array([r.fwhm for r in recs])
        rows.append(
            FieldScanRow(
                amplitude=a,
                max_blue=float(-shifts.min()),
                max_red=float(shifts.max()),
                fwhm_min=float(widths.min()),
                fwhm_max=float(widths.max()),
                fwhm_ref=ref.fwhm,
            )
        )
    return rows
