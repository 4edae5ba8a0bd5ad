import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from thzmod import (
    FitError,
    ModulatorConfig,
    Spectrum,
    delay_scan,
    field_scan,
    fit_gaussian,
    instantaneous_shift,
    power_spectrum,
    apply_phase,
)
from thzmod.grid import C, ComplexEnvelope
from thzmod.spectral import reference_delay, reference_fit

FOUR_LN2 = 4 * math.log(2)


def _lambda_axis(n=801, lo=780e-9, hi=820e-9):
    lam = np.linspace(lo, hi, n)
    return lam, C / lam


def _gauss(lam, center, fwhm, amp=1.0, offset=0.0):
    return amp * np.exp(-FOUR_LN2 * ((lam - center) / fwhm) ** 2) + offset


# -- spectra ---------------------------------------------------------------


def test_spectrum_energy_matches_time_domain(env):
    assert power_spectrum(env).energy() == pytest.approx(env.energy, rel=1e-10)


def test_spectrum_axes(env):
    s = power_spectrum(env)
    assert np.all(np.diff(s.wavelengths) > 0)
    np.testing.assert_allclose(s.wavelengths * s.frequencies, C, rtol=1e-14)
    peak = s.wavelengths[np.argmax(s.power)]
    assert abs(peak - 800e-9) < 0.3e-9


def test_frequency_shift_theorem(env):
    k = 7
    g = env.grid
    moved = env.replace(env.samples * np.exp(2j * np.pi * k * g.df * g.t))
    p0 = power_spectrum(env).power
    p1 = power_spectrum(moved).power
    # ascending wavelength = descending frequency, so +k bins is -k positions
    np.testing.assert_allclose(p1[:-k], p0[k:], atol=1e-12 * p0.max())


def test_zero_envelope(grid):
    env = ComplexEnvelope(grid, np.zeros(grid.n, complex), 3.7e14)
    s = power_spectrum(env)
    assert s.energy() == 0.0
    with pytest.raises(FitError, match="no power"):
        fit_gaussian(s)


def test_spectrum_validation():
    with pytest.raises(ValueError):
        Spectrum(np.array([1.0, 2.0]), np.array([1.0, -1.0]), np.array([3.0, 1.5]))
    with pytest.raises(ValueError):
        Spectrum(np.array([2.0, 1.0]), np.array([1.0, 1.0]), np.array([1.5, 3.0]))


# -- Gaussian fits ---------------------------------------------------------


@pytest.mark.parametrize("center, fwhm, offset", [(800e-9, 7e-9, 0.0), (803.3e-9, 5.1e-9, 0.02), (797e-9, 9e-9, -0.001)])
def test_exact_gaussian_recovered(center, fwhm, offset):
    lam, nu = _lambda_axis()
    fit = fit_gaussian(Spectrum(lam, _gauss(lam, center, fwhm, 2.5, offset).clip(0), nu))
    assert fit.converged
    assert fit.center == pytest.approx(center, rel=1e-8)
    assert fit.fwhm == pytest.approx(fwhm, rel=1e-8)
    assert fit.amplitude == pytest.approx(2.5, rel=1e-8)


def test_noisy_gaussian_statistics():
    lam, nu = _lambda_axis(n=161)  # 0.25 nm spacing, like the default grid near 800 nm
    truth = _gauss(lam, 800e-9, 7e-9)
    centers, widths = [], []
    for seed in range(100):
        r = np.random.default_rng(seed)
        p = (truth + 0.01 * r.standard_normal(lam.size)).clip(0)
        fit = fit_gaussian(Spectrum(lam, p, nu))
        centers.append(fit.center)
        widths.append(fit.fwhm)
    # averaged over the seeded trials
    assert abs(np.mean(centers) - 800e-9) < 0.01e-9
    assert abs(np.mean(widths) / 7e-9 - 1) < 0.01
    # single trials stay close as well
    assert np.max(np.abs(np.array(centers) - 800e-9)) < 0.05e-9


def _grid_search(lam, p):
    """Exhaustive oracle: centre and width on a 0.01 nm lattice, amplitude and offset by linear LSQ."""
    x = lam / 1e-9
    best = (np.inf, None)
    for c in np.arange(x[np.argmax(p)] - 1, x[np.argmax(p)] + 1, 0.01):
        for w in np.arange(3.0, 9.0, 0.01):
            basis = np.column_stack([np.exp(-FOUR_LN2 * ((x - c) / w) ** 2), np.ones_like(x)])
            coef, *_ = np.linalg.lstsq(basis, p, rcond=None)
            sse = np.sum((basis @ coef - p) ** 2)
            if sse < best[0]:
                best = (sse, (c, w))
    return best[1]


def test_bimodal_fits_dominant_lobe():
    lam, nu = _lambda_axis(n=1201, lo=770e-9, hi=830e-9)
    p = _gauss(lam, 795e-9, 5e-9, 1.0) + _gauss(lam, 810e-9, 4e-9, 0.8)
    fit = fit_gaussian(Spectrum(lam, p, nu))
    # the oracle sees only the basin up to the valley between the peaks
    i1, i2 = np.argmin(np.abs(lam - 795e-9)), np.argmin(np.abs(lam - 810e-9))
    valley = i1 + np.argmin(p[i1:i2])
    keep = (np.arange(lam.size) < valley) & (p > 0.005 * p.max())
    c, w = _grid_search(lam[keep], p[keep])
    assert abs(fit.center / 1e-9 - c) <= 0.011
    assert abs(fit.fwhm / 1e-9 - w) <= 0.011
    assert abs(fit.center - 795e-9) < 0.2e-9


def test_fit_idempotent(env, field, mod):
    s = power_spectrum(apply_phase(env, field, -100e-15, mod))
    first = fit_gaussian(s)
    again = fit_gaussian(s, seed=first)
    np.testing.assert_allclose(again.params(), first.params(), rtol=1e-9)


def test_flat_and_narrow_spectra_raise():
    lam, nu = _lambda_axis()
    with pytest.raises(FitError, match="flat"):
        fit_gaussian(Spectrum(lam, np.ones(lam.size), nu))
    with pytest.raises(FitError, match="half maximum"):
        fit_gaussian(Spectrum(lam, _gauss(lam, 800e-9, 0.1e-9), nu))


def test_iteration_cap_flags_nonconvergence():
    lam, nu = _lambda_axis()
    fit = fit_gaussian(Spectrum(lam, _gauss(lam, 801e-9, 6e-9), nu), max_iter=1)
    assert not fit.converged and fit.iterations == 1


@settings(max_examples=30, deadline=None)
@given(
    center=st.floats(790e-9, 810e-9),
    fwhm=st.floats(3e-9, 12e-9),
    scale=st.floats(1e-6, 1e6),
)
def test_fit_scale_invariant(center, fwhm, scale):
    lam, nu = _lambda_axis()
    p = _gauss(lam, center, fwhm)
    a = fit_gaussian(Spectrum(lam, p, nu))
    b = fit_gaussian(Spectrum(lam, p * scale, nu))
    assert b.center == pytest.approx(a.center, rel=1e-9)
    assert b.fwhm == pytest.approx(a.fwhm, rel=1e-7)
    assert b.amplitude == pytest.approx(a.amplitude * scale, rel=1e-7)


# -- delay scans -----------------------------------------------------------


def test_far_delay_is_unmodulated(env, field, mod):
    ref = reference_fit(env, field, mod)
    unmod = fit_gaussian(power_spectrum(env))
    assert ref.center == pytest.approx(unmod.center, abs=1e-15)
    assert ref.fwhm == pytest.approx(unmod.fwhm, rel=1e-9)
    rec = delay_scan(env, field, [reference_delay(field)], mod)[0]
    assert abs(rec.shift) < 1e-15


def test_scan_order_and_thread_invariance(env, field, taus, mod):
    sub = taus[::4]
    base = delay_scan(env, field, sub, mod)
    rev = delay_scan(env, field, sub[::-1], mod)[::-1]
    par = delay_scan(env, field, sub, mod, threads=4)
    assert base == rev == par


def test_scan_follows_instantaneous_frequency(env, field, taus, mod):
    recs = delay_scan(env, field, taus, mod)
    g = field.grid
    dnu_fit = np.array([-C * r.shift / r.center**2 for r in recs])
    inst = instantaneous_shift(field, mod)
    dnu_inst = np.array([inst[g.index_of(-t)] for t in taus])
    r = np.corrcoef(dnu_fit, dnu_inst)[0, 1]
    assert r > 0.95
    # the extreme red and blue shifts line up with the field slope extrema
    assert abs(taus[np.argmin(dnu_fit)] - taus[np.argmin(dnu_inst)]) <= 50e-15
    assert abs(taus[np.argmax(dnu_fit)] - taus[np.argmax(dnu_inst)]) <= 50e-15


def test_empty_scan(env, field, mod):
    with pytest.raises(ValueError):
        delay_scan(env, field, [], mod)


def test_field_scan_zero_amplitude(env, field, mod):
    taus = np.arange(-10, 11) * 50e-15
    row = field_scan(env, field, [0.0], mod, taus=taus)[0]
    assert abs(row.max_red) < 1e-15 and abs(row.max_blue) < 1e-15
    assert row.fwhm_min == pytest.approx(row.fwhm_ref, rel=1e-9)
    assert row.fwhm_depth == pytest.approx(0.0, abs=1e-15)


def test_field_scan_rejects_unsorted(env, field, mod):
    with pytest.raises(ValueError):
        field_scan(env, field, [0.5, 0.2], mod)


def test_field_scan_full_amplitude_matches_calibration(env, field, taus, mod):
    row = field_scan(env, field, [1.0], mod, taus=taus)[0]
    assert row.max_red == pytest.approx(1.2e-9, rel=1e-5)
    assert row.fwhm_min < row.fwhm_ref < row.fwhm_max
