"""Command-line driver.

    thzmod <command> [--config PATH] [--seed N] [--out DIR] [--threads N] [--plot]

Commands: ``eos``, ``delay-scan``, ``field-scan``, ``counts``, ``calibrate``.
Output files are CSV with a ``#`` header block (tool version, scenario hash,
seed); ``--plot`` additionally renders PNG figures next to them. The output
directory is taken from ``--out``, then ``$THZMOD_OUT``, then the scenario.

Exit codes: 0 success, 1 configuration error, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, Scenario, load_scenario
from .counting import band_transmission_fraction, field_count_scan, simulate_counts
from .fields import eos_trace, gaussian_pulse, load_trace, thz_multi_cycle
from .grid import FS, NM
from .modulation import CalibrationError, ModulatorConfig, calibrate_kappa, effective_field
from .spectral import (
    FitError,
    delay_scan,
    field_scan,
    normalized_shape,
    power_spectrum,
    scan_spectra,
)

OUT_ENV = "THZMOD_OUT"
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.10g}"


class Report:
    """Collects output files in memory; nothing touches disk until ``write``."""

    def __init__(self, scenario: Scenario, command: str):
        self.scenario = scenario
        self.command = command
        self.files: dict[str, str] = {}
        self.figures: list[tuple[str, object, tuple]] = []
        self.notes: dict[str, str] = {}

    def header(self) -> list[str]:
        lines = [
            f"# thzmod {__version__}",
            f"# command: {self.command}",
            f"# scenario_sha256: {self.scenario.digest()}",
            f"# seed: {self.scenario.counting.rng_seed}",
        ]
        lines += [f"# {k}: {v}" for k, v in self.notes.items()]
        return lines

    def table(self, name: str, columns, rows):
        lines = self.header() + [",".join(columns)]
        lines += [",".join(_fmt(v) for v in row) for row in rows]
        self.files[name] = "\n".join(lines) + "\n"

    def figure(self, name: str, func, *args):
        self.figures.append((name, func, args))

    def write(self, out_dir: Path, plot: bool) -> list[Path]:
        out_dir.mkdir(parents=True, exist_ok=True)
        staged = []
        for name, text in self.files.items():
            tmp = out_dir / f".{name}.tmp"
            tmp.write_text(text, encoding="utf-8")
            staged.append((tmp, out_dir / name))
        if plot:
            for name, func, args in self.figures:
                tmp = out_dir / f".{name}.tmp"
                func(*args, tmp)
                staged.append((tmp, out_dir / name))
        for tmp, final in staged:
            os.replace(tmp, final)
        return [final for _, final in staged]


class Model:
    """Pulse, effective field and calibrated modulator for one scenario."""

    def __init__(self, sc: Scenario, threads: int = 1):
        self.sc = sc
        self.threads = threads
        self.env = gaussian_pulse(sc.pulse, sc.grid)
        if sc.trace:
            self.raw_field = load_trace(sc.trace, sc.grid)
        else:
            self.raw_field = thz_multi_cycle(sc.thz, sc.n_cycles, sc.grid)
        self.field = effective_field(self.raw_field, sc.crystal)
        self.taus = sc.taus()
        base = ModulatorConfig(crystal=sc.crystal, sign=sc.sign)
        if sc.kappa is not None:
            kappa = sc.kappa
        else:
            kappa = calibrate_kappa(
                sc.calibration_target, self.field, sc.pulse, base, taus=self.taus, threads=threads
            )
        self.mod = base.with_kappa(kappa)


def cmd_eos(sc: Scenario, rep: Report, threads: int):
    probe = gaussian_pulse(sc.pulse, sc.grid)
    field = load_trace(sc.trace, sc.grid) if sc.trace else thz_multi_cycle(sc.thz, sc.n_cycles, sc.grid)
    trace = eos_trace(field, probe, sc.taus())
    rep.table("eos.csv", ["tau_fs", "signal"], [(tau / FS, s) for tau, s in trace])
    from .plotting import plot_eos

    rep.figure("eos.png", plot_eos, [t / FS for t, _ in trace], [s for _, s in trace])


def _spectra_rows(sc: Scenario, model: Model, taus):
    lam0, width = sc.pulse.center_wavelength, sc.pulse.spectral_fwhm
    spectra = scan_spectra(model.env, model.field, taus, model.mod, threads=model.threads)
    keep = np.abs(spectra[0].wavelengths - lam0) <= 4 * width
    lam = spectra[0].wavelengths[keep]
    norm = []
    for s in spectra:
        p = s.power[keep]
        norm.append(p / p.max() if p.max() > 0 else p)
    return lam, np.array(norm)


def cmd_delay_scan(sc: Scenario, rep: Report, threads: int):
    model = Model(sc, threads)
    rep.notes["kappa"] = _fmt(model.mod.kappa)
    recs = delay_scan(model.env, model.field, model.taus, model.mod, threads=threads)
    rows = [(r.tau / FS, r.shift / NM, r.fwhm / NM, r.residual) for r in recs]
    rep.table("scan.csv", ["tau_fs", "shift_nm", "fwhm_nm", "residual"], rows)
    lam, pmap = _spectra_rows(sc, model, model.taus)
    spectra_rows = [
        (tau / FS, l / NM, p) for tau, prow in zip(model.taus, pmap) for l, p in zip(lam, prow)
    ]
    rep.table("spectra.csv", ["tau_fs", "wavelength_nm", "power_norm"], spectra_rows)
    from .plotting import plot_delay_scan

    rep.figure(
        "delay_scan.png", plot_delay_scan,
        model.taus / FS, lam / NM, pmap, [r[1] for r in rows], [r[2] for r in rows],
    )


def cmd_field_scan(sc: Scenario, rep: Report, threads: int):
    model = Model(sc, threads)
    rep.notes["kappa"] = _fmt(model.mod.kappa)
    table = field_scan(model.env, model.field, sc.amplitudes, model.mod, taus=model.taus, threads=threads)
    rows = [
        (r.amplitude, r.max_blue / NM, r.max_red / NM, r.fwhm_min / NM, r.fwhm_max / NM) for r in table
    ]
    rep.table("field_scan.csv", ["amplitude", "max_blue_nm", "max_red_nm", "fwhm_min_nm", "fwhm_max_nm"], rows)
    from .plotting import plot_field_scan

    cols = list(zip(*rows))
    rep.figure("field_scan.png", plot_field_scan, *cols)


def cmd_counts(sc: Scenario, rep: Report, threads: int):
    model = Model(sc, threads)
    cfg = sc.counting
    rep.notes["kappa"] = _fmt(model.mod.kappa)
    rep.notes["field_amplitude"] = _fmt(sc.count_amplitude)
    shape = normalized_shape(model.field)
    field = shape.scaled(sc.count_amplitude)
    spectra = scan_spectra(model.env, field, model.taus, model.mod, lossy=sc.apply_loss, threads=threads)
    scan = list(zip(model.taus, spectra))
    recs = simulate_counts(scan, sc.bands, cfg, threads=threads)
    rep.table(
        "counts.csv",
        ["tau_fs", "band_center_nm", "clicks", "pulses", "expected_p"],
        [(r.tau / FS, r.band_center / NM, r.clicks, r.pulses, r.expected_p) for r in recs],
    )
    fractions = np.array([[band_transmission_fraction(s, b) for b in sc.bands] for s in spectra])
    rep.table(
        "band_power.csv",
        ["tau_fs", "band_center_nm", "fraction"],
        [(tau / FS, b.center / NM, fractions[i, j])
         for i, tau in enumerate(model.taus) for j, b in enumerate(sc.bands)],
    )
    rows = field_count_scan(
        model.env, model.field, sc.red_band, sc.amplitudes, cfg, model.mod, model.taus,
        lossy=sc.apply_loss, threads=threads,
    )
    rep.notes["fixed_tau_fs"] = _fmt(rows[0].tau / FS)
    rep.table(
        "field_counts.csv",
        ["amplitude", "clicks_per_pulse", "noise_per_pulse"],
        [(r.amplitude, r.clicks_per_pulse, r.noise_per_pulse) for r in rows],
    )
    from .plotting import plot_counts, plot_field_counts

    rates = np.array([r.clicks / r.pulses for r in recs]).reshape(len(model.taus), len(sc.bands))
    rep.figure("counts.png", plot_counts, model.taus / FS, [b.center / NM for b in sc.bands], rates, fractions)
    rep.figure(
        "field_counts.png", plot_field_counts,
        [r.amplitude for r in rows], [r.clicks_per_pulse for r in rows], [r.noise_per_pulse for r in rows],
    )


def cmd_calibrate(sc: Scenario, rep: Report, threads: int):
    model = Model(sc, threads)
    recs = delay_scan(model.env, model.field, model.taus, model.mod, threads=threads)
    red = max(recs, key=lambda r: r.shift)
    blue = min(recs, key=lambda r: r.shift)
    target = sc.calibration_target
    row = (
        target / NM if target is not None else float("nan"),
        model.mod.kappa, red.shift / NM, -blue.shift / NM, red.tau / FS,
    )
    rep.table("calibration.csv", ["target_nm", "kappa", "max_red_nm", "max_blue_nm", "tau_red_fs"], [row])
    print(f"kappa = {model.mod.kappa:.10g} rad; max red shift {red.shift / NM:.6g} nm "
          f"at {red.tau / FS:.6g} fs; max blue shift {-blue.shift / NM:.6g} nm")


COMMANDS = {
    "eos": cmd_eos,
    "delay-scan": cmd_delay_scan,
    "field-scan": cmd_field_scan,
    "counts": cmd_counts,
    "calibrate": cmd_calibrate,
}


def _parse_amplitudes(text: str) -> tuple[float, ...]:
    try:
        amps = tuple(float(a) for a in text.split(",") if a.strip())
    except ValueError:
        raise ConfigError(f"--amplitudes: cannot parse {text!r}") from None
    if not amps or any(a < 0 for a in amps) or list(amps) != sorted(amps):
        raise ConfigError("--amplitudes: need non-negative ascending values")
    return amps


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="thzmod", description="Terahertz electro-optic modulation of weak near-infrared pulses.")
    parser.add_argument("--version", action="version", version=f"thzmod {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="scenario YAML file (defaults built in)")
    common.add_argument("--seed", type=int, help="override the counting RNG seed")
    common.add_argument("--out", type=Path, help=f"output directory (else ${OUT_ENV}, else scenario)")
    common.add_argument("--threads", type=int, default=1, help="worker threads for scans")
    common.add_argument("--plot", action="store_true", help="also render PNG figures")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name in ("field-scan", "counts"):
            p.add_argument("--amplitudes", help="comma-separated field amplitudes")
    return parser


def resolve_scenario(args) -> Scenario:
    sc = load_scenario(args.config) if args.config is not None else Scenario()
    if args.seed is not None:
        if not 0 <= args.seed < 2**64:
            raise ConfigError("--seed: must be an unsigned 64-bit integer")
        sc = dataclasses.replace(sc, counting=dataclasses.replace(sc.counting, rng_seed=args.seed))
    if getattr(args, "amplitudes", None):
        sc = dataclasses.replace(sc, amplitudes=_parse_amplitudes(args.amplitudes))
    if args.threads < 1:
        raise ConfigError("--threads: must be >= 1")
    return sc


def output_dir(args, sc: Scenario) -> Path:
    if args.out is not None:
        return args.out
    return Path(os.environ.get(OUT_ENV) or sc.output_dir)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        sc = resolve_scenario(args)
        rep = Report(sc, args.command)
        COMMANDS[args.command](sc, rep, args.threads)
        written = rep.write(output_dir(args, sc), args.plot)
    except ConfigError as exc:
        print(f"thzmod: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (CalibrationError, FitError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"thzmod: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"thzmod: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for path in written:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
