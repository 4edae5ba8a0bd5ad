"""Figure rendering for CLI reports (PNG files written next to the CSVs).

Uses the object-oriented Agg canvas only, so no global pyplot state is
touched and rendering is safe from worker threads.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

BAND_COLORS = ("tab:purple", "tab:blue", "tab:green", "tab:orange", "tab:red")


def _figure(width=6.4, height=4.0, rows=1, cols=1, **kw):
    fig = Figure(figsize=(width, height), dpi=110)
    FigureCanvasAgg(fig)
    axes = fig.subplots(rows, cols, **kw)
    return fig, axes


def _save(fig: Figure, path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, format="png", metadata={"Software": None})
    return path


def plot_eos(tau_fs, signal, path):
    fig, ax = _figure()
    ax.plot(tau_fs, signal, color="k", lw=1.2)
    ax.axhline(0, color="0.7", lw=0.8)
    ax.set_xlabel("delay (fs)")
    ax.set_ylabel("EOS signal (norm.)")
    return _save(fig, path)


def plot_delay_scan(tau_fs, wavelength_nm, power_map, shift_nm, fwhm_nm, path):
    """Spectra map with the fitted shift and FWHM underneath."""
    fig, (a0, a1, a2) = _figure(6.4, 8.0, 3, 1, sharex=True)
    extent = [tau_fs[0], tau_fs[-1], wavelength_nm[0], wavelength_nm[-1]]
    a0.imshow(np.asarray(power_map).T, origin="lower", aspect="auto", extent=extent, cmap="magma")
    a0.set_ylabel("wavelength (nm)")
    a1.plot(tau_fs, shift_nm, "o-", ms=3, color="tab:red")
    a1.axhline(0, color="0.7", lw=0.8)
    a1.set_ylabel("shift (nm)")
    a2.plot(tau_fs, fwhm_nm, "o-", ms=3, color="tab:blue")
    a2.set_ylabel("FWHM (nm)")
    a2.set_xlabel("delay (fs)")
    return _save(fig, path)


def plot_field_scan(amplitude, max_blue, max_red, fwhm_min, fwhm_max, path):
    fig, (a0, a1) = _figure(6.4, 6.0, 2, 1, sharex=True)
    a0.plot(amplitude, max_red, "o-", color="tab:red", label="red shift")
    a0.plot(amplitude, max_blue, "s-", color="tab:blue", label="blue shift")
    a0.set_ylabel("max shift (nm)")
    a0.legend(frameon=False)
    a1.plot(amplitude, fwhm_max, "o-", color="k", label="max")
    a1.plot(amplitude, fwhm_min, "s--", color="k", label="min")
    a1.set_ylabel("FWHM (nm)")
    a1.set_xlabel("field amplitude (norm.)")
    a1.legend(frameon=False)
    return _save(fig, path)


def plot_counts(tau_fs, band_centers_nm, clicks_per_pulse, fractions, path):
    """Click rate per band (top) against classically integrated band power (bottom)."""
    fig, (a0, a1) = _figure(6.4, 6.0, 2, 1, sharex=True)
    for j, c in enumerate(band_centers_nm):
        color = BAND_COLORS[j % len(BAND_COLORS)]
        a0.plot(tau_fs, clicks_per_pulse[:, j], color=color, lw=1.0, label=f"{c:g} nm")
        a1.plot(tau_fs, fractions[:, j], color=color, lw=1.0)
    a0.set_ylabel("clicks / pulse")
    a0.legend(frameon=False, fontsize=8, ncol=3)
    a1.set_ylabel("band power fraction")
    a1.set_xlabel("delay (fs)")
    return _save(fig, path)


def plot_field_counts(amplitude, clicks_per_pulse, noise_per_pulse, path):
    fig, ax = _figure()
    ax.plot(amplitude, clicks_per_pulse, "o-", color="k")
    ax.set_xlabel("field amplitude (norm.)")
    ax.set_ylabel("clicks / pulse")
    ax2 = ax.twinx()
    ax2.plot(amplitude, noise_per_pulse, "s-", color="tab:orange")
    ax2.set_ylabel("noise clicks / pulse", color="tab:orange")
    return _save(fig, path)
