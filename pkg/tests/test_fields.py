import math

import numpy as np
import pytest

from thzmod import (
    ModulatorConfig,
    PulseSpec,
    ThzSpec,
    delay_scan,
    eos_trace,
    gaussian_pulse,
    load_trace,
    save_trace,
    thz_multi_cycle,
    thz_single_cycle,
)
from thzmod.fields import net_area_ratio
from thzmod.grid import C, FS, ComplexEnvelope, centered_grid, forward_transform
from thzmod.spectral import default_taus


def _fwhm(x, y):
    y = y / y.max()
    above = np.flatnonzero(y >= 0.5)
    i0, i1 = above[0], above[-1]
    left = np.interp(0.5, [y[i0 - 1], y[i0]], [x[i0 - 1], x[i0]])
    right = np.interp(0.5, [y[i1 + 1], y[i1]], [x[i1 + 1], x[i1]])
    return right - left


def _duration(env):
    return _fwhm(env.grid.t, env.intensity)


# -- signal pulse ----------------------------------------------------------


def test_transform_limited_7nm_duration(grid):
    env = gaussian_pulse(PulseSpec(chirp_gdd=0.0), grid)
    dnu = C / (800e-9 - 3.5e-9) - C / (800e-9 + 3.5e-9)
    assert _duration(env) == pytest.approx(0.441 / dnu, rel=5e-3)
    # reported ~130 fs for the filtered signal
    assert _duration(env) == pytest.approx(130e-15, rel=0.05)
    assert env.energy == pytest.approx(1.0, rel=1e-12)


def test_chirp_keeps_spectrum_and_lengthens(grid):
    tl = gaussian_pulse(PulseSpec(chirp_gdd=0.0), grid)
    ch = gaussian_pulse(PulseSpec(chirp_gdd=2500 * FS**2), grid)
    p_tl = np.abs(forward_transform(tl)) ** 2
    p_ch = np.abs(forward_transform(ch)) ** 2
    np.testing.assert_allclose(p_ch, p_tl, atol=1e-12 * p_tl.max())
    assert _duration(ch) > _duration(tl)
    # closed form for a chirped Gaussian
    t0 = _duration(tl)
    x = 4 * math.log(2) * 2500 * FS**2 / t0**2
    assert _duration(ch) == pytest.approx(t0 * math.sqrt(1 + x**2), rel=1e-3)


def test_double_bandwidth_halves_duration(grid):
    d7 = _duration(gaussian_pulse(PulseSpec(spectral_fwhm=7e-9, chirp_gdd=0.0), grid))
    d14 = _duration(gaussian_pulse(PulseSpec(spectral_fwhm=14e-9, chirp_gdd=0.0), grid))
    dnu7 = C / (800e-9 - 3.5e-9) - C / (800e-9 + 3.5e-9)
    dnu14 = C / (800e-9 - 7e-9) - C / (800e-9 + 7e-9)
    assert d14 / d7 == pytest.approx(dnu7 / dnu14, rel=2e-3)
    assert d14 == pytest.approx(67e-15, rel=0.02)


def test_spectral_fwhm_within_one_bin(grid):
    env = gaussian_pulse(PulseSpec(chirp_gdd=0.0), grid)
    p = np.abs(forward_transform(env)) ** 2
    dnu = PulseSpec().bandwidth_hz
    assert abs(_fwhm(grid.freqs, p) - dnu) < grid.df


def test_under_resolved_pulse_rejected():
    with pytest.raises(ValueError, match="under-resolves"):
        gaussian_pulse(PulseSpec(), centered_grid(4096, 20e-15))


@pytest.mark.parametrize(
    "kwargs",
    [dict(center_wavelength=0), dict(spectral_fwhm=0), dict(spectral_fwhm=90e-9)],
)
def test_pulse_spec_validation(kwargs):
    with pytest.raises(ValueError):
        PulseSpec(**kwargs)


# -- terahertz transients --------------------------------------------------


def test_symmetric_single_cycle(grid):
    f = thz_single_cycle(ThzSpec(asymmetry=0.0), grid)
    e = f.samples
    mid = grid.n // 2  # t = 0 sits on this sample
    np.testing.assert_allclose(e[mid + 1 : mid + 1000], -e[mid - 1 : mid - 1000 : -1], atol=1e-12)
    assert e.max() == pytest.approx(-e.min(), rel=1e-9)
    assert net_area_ratio(f) < 1e-6


@pytest.mark.parametrize("asym", [-0.7, -0.3, 0.0, 0.3, 0.6026, 0.9])
def test_peak_area_and_scaling(grid, asym):
    f = thz_single_cycle(ThzSpec(amplitude=0.7, asymmetry=asym), grid)
    assert f.peak == pytest.approx(0.7, abs=1e-9)
    assert net_area_ratio(f) < 1e-6
    g = thz_single_cycle(ThzSpec(amplitude=0.35, asymmetry=asym), grid)
    np.testing.assert_array_equal(g.samples, f.samples * 0.5)


def test_peak_ratio_monotone_in_asymmetry(grid):
    asyms = np.linspace(-0.9, 0.9, 19)
    ratios = []
    for a in asyms:
        e = thz_single_cycle(ThzSpec(asymmetry=a), grid).samples
        ratios.append(e.max() / -e.min())
    assert np.all(np.diff(ratios) > 0)
    assert ratios[9] == pytest.approx(1.0, abs=1e-9)


def test_dominant_frequency_near_center(grid):
    f = thz_single_cycle(ThzSpec(asymmetry=0.0), grid)
    spec = np.abs(np.fft.rfft(f.samples))
    nu = np.fft.rfftfreq(grid.n, grid.dt)
    assert nu[np.argmax(spec)] == pytest.approx(1.4e12, rel=0.25)


def test_support_about_one_picosecond(grid):
    f = thz_single_cycle(ThzSpec(), grid)
    big = grid.t[np.abs(f.samples) > 0.05]
    assert 0.6e-12 < big[-1] - big[0] < 1.4e-12


def test_zero_amplitude(grid):
    assert not np.any(thz_single_cycle(ThzSpec(amplitude=0.0), grid).samples)


def test_multi_cycle_reduces_to_single(grid):
    spec = ThzSpec()
    np.testing.assert_allclose(
        thz_multi_cycle(spec, 1, grid).samples, thz_single_cycle(spec, grid).samples, atol=1e-9
    )


@pytest.mark.parametrize("n", [0, -1, 1.5])
def test_multi_cycle_bad_count(grid, n):
    with pytest.raises(ValueError):
        thz_multi_cycle(ThzSpec(), n, grid)


def _local_extrema(y, floor):
    interior = y[1:-1]
    maxima = (interior > y[:-2]) & (interior >= y[2:]) & (interior > floor)
    minima = (interior < y[:-2]) & (interior <= y[2:]) & (interior < -floor)
    return int(maxima.sum()), int(minima.sum())


def test_multi_cycle_gives_several_shifts(grid, env, kappa):
    f = thz_multi_cycle(ThzSpec(asymmetry=0.0), 3, grid)
    assert net_area_ratio(f) < 1e-6
    taus = default_taus(f, half_range=2.5e-12, step=25e-15)
    shifts = np.array([r.shift for r in delay_scan(env, f, taus, ModulatorConfig(kappa=kappa))])
    n_red, n_blue = _local_extrema(shifts, 0.1 * np.abs(shifts).max())
    # oracle: extrema of dE/dt above the same relative floor
    de = np.gradient(f.samples)
    n_neg, n_pos = _local_extrema(-de, 0.1 * np.abs(de).max())
    assert n_red >= 2 and n_blue >= 2
    assert (n_red, n_blue) == (n_neg, n_pos)


def test_thz_under_resolved():
    with pytest.raises(ValueError, match="under-resolves"):
        thz_single_cycle(ThzSpec(), centered_grid(1024, 40e-15))


# -- trace files -----------------------------------------------------------


def test_trace_round_trip(tmp_path, grid, field):
    path = tmp_path / "trace.txt"
    save_trace(field, path, comment="synthetic\ndefault single cycle")
    back = load_trace(path, grid)
    assert np.max(np.abs(back.samples - field.samples)) < 1e-6


def test_trace_resampled_to_finer_grid(tmp_path, grid):
    coarse = centered_grid(1024, 8e-15)
    spec = ThzSpec(t_center=0.0)
    path = tmp_path / "coarse.txt"
    save_trace(thz_single_cycle(spec, coarse), path)
    fine = load_trace(path, grid)
    truth = thz_single_cycle(spec, grid).samples
    inside = np.abs(grid.t) < 2e-12
    assert np.max(np.abs(fine.samples[inside] - truth[inside])) < 1e-4


def test_trace_outside_window_is_zero(tmp_path, grid):
    path = tmp_path / "short.txt"
    t = np.arange(-500, 500, 10.0)
    path.write_text("".join(f"{x}\t{np.sin(x / 100)}\n" for x in t))
    f = load_trace(path, grid)
    assert not np.any(f.samples[grid.t < -501e-15])
    assert not np.any(f.samples[grid.t > 491e-15])


def test_trace_with_dc_offset_passes_through(tmp_path, grid):
    path = tmp_path / "dc.txt"
    t = np.arange(-400, 400, 2.0)
    path.write_text("".join(f"{x}\t0.25\n" for x in t))
    f = load_trace(path, grid)
    inside = (grid.t > -390e-15) & (grid.t < 390e-15)
    np.testing.assert_allclose(f.samples[inside], 0.25, atol=1e-12)
    assert net_area_ratio(f) == pytest.approx(1.0)


def test_trace_nonuniform_uses_spline(tmp_path, grid):
    t = np.sort(np.concatenate([np.linspace(-1000, 1000, 301), [3.3, 7.1]]))
    path = tmp_path / "nu.txt"
    path.write_text("".join(f"{x}\t{np.exp(-(x / 300) ** 2)}\n" for x in t))
    f = load_trace(path, grid)
    i = grid.index_of(0.0)
    assert f.samples[i] == pytest.approx(1.0, abs=1e-4)


@pytest.mark.parametrize(
    "body, message",
    [
        ("0\t1\n1\t2\n", "at least 8"),
        ("".join(f"{k}\t0\n" for k in range(8)) + "3\t0\n", ":9: time not strictly increasing"),
        ("# c\n" + "".join(f"{k}\t0\n" for k in range(4)) + "4\tfoo\n" + "".join(f"{k}\t0\n" for k in range(5, 9)), ":6: unparsable"),
        ("".join(f"{k}\t0\n" for k in range(8)) + "9\t1\t2\n", ":9: expected 2 columns"),
    ],
)
def test_trace_errors(tmp_path, grid, body, message):
    path = tmp_path / "bad.txt"
    path.write_text(body)
    with pytest.raises(ValueError, match=message):
        load_trace(path, grid)


# -- electro-optic sampling ------------------------------------------------


def test_eos_delta_probe_recovers_field(grid, field):
    s = np.zeros(grid.n, complex)
    s[grid.index_of(0.0)] = 1.0
    probe = ComplexEnvelope(grid, s, 3.7e14)
    taus = np.arange(-40, 41) * 20 * grid.dt
    trace = eos_trace(field, probe, taus)
    expect = [field.samples[grid.index_of(-tau)] for tau in taus]
    np.testing.assert_allclose([v for _, v in trace], expect, atol=1e-12)


def _probe_130fs(grid):
    dnu = 0.441 / 130e-15
    dl = dnu * (800e-9) ** 2 / C
    return gaussian_pulse(PulseSpec(spectral_fwhm=dl, chirp_gdd=0.0), grid)


def test_eos_gaussian_low_pass(grid):
    """Near-monochromatic 1.4 THz field: peak attenuated by the Gaussian low-pass factor."""
    probe = _probe_130fs(grid)
    f = thz_multi_cycle(ThzSpec(asymmetry=0.0), 3, grid)
    taus = np.arange(-500, 501) * grid.dt
    peak = max(abs(v) for _, v in eos_trace(f, probe, taus))
    factor = math.exp(-((math.pi * 1.4e12 * 130e-15 / math.sqrt(2 * math.log(2))) ** 2) / 2)
    assert peak / f.peak == pytest.approx(factor, rel=0.02)


def test_eos_matches_direct_convolution(grid):
    """Single cycle: compare with a direct sum over the analytic waveform moved in time."""
    probe = _probe_130fs(grid)
    w = probe.intensity / probe.intensity.sum()
    taus = np.arange(-20, 21) * 25 * grid.dt
    got = [v for _, v in eos_trace(thz_single_cycle(ThzSpec(), grid), probe, taus)]
    ref_peak = thz_single_cycle(ThzSpec(amplitude=1.0), grid).samples
    norm = np.max(np.abs(ref_peak))
    direct = []
    for tau in taus:
        moved = thz_single_cycle(ThzSpec(t_center=tau), grid).samples  # peak-normalized on grid
        direct.append(w @ moved / norm)
    np.testing.assert_allclose(got, direct, atol=1e-12)


def test_eos_zero_field_and_linearity(grid, field):
    probe = _probe_130fs(grid)
    taus = np.arange(-10, 11) * 50e-15
    zero = eos_trace(field.scaled(0.0), probe, taus)
    assert all(v == 0 for _, v in zero)
    a = np.array([v for _, v in eos_trace(field, probe, taus)])
    f2 = field.replace(field.samples * 2.5 + np.roll(field.samples, 100))
    b = np.array([v for _, v in eos_trace(f2, probe, taus)])
    c = np.array([v for _, v in eos_trace(field.replace(np.roll(field.samples, 100)), probe, taus)])
    np.testing.assert_allclose(b, 2.5 * a + c, atol=1e-12)


def test_eos_empty_delays(grid, field):
    with pytest.raises(ValueError):
        eos_trace(field, _probe_130fs(grid), [])
