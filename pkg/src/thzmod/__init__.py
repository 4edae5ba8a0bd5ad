"""Numerical model of terahertz-driven electro-optic phase modulation of
weak near-infrared pulses: spectral shear, time lensing and photon counting.
"""
from .grid import (
    ComplexEnvelope,
    FieldWaveform,
    TemporalGrid,
    forward_transform,
    inverse_transform,
    make_grid,
)
from .fields import (
    PulseSpec,
    ThzSpec,
    eos_trace,
    gaussian_pulse,
    load_trace,
    save_trace,
    thz_multi_cycle,
    thz_single_cycle,
)
from .modulation import (
    CalibrationError,
    CrystalConfig,
    ModulatorConfig,
    apply_phase,
    calibrate_kappa,
    effective_field,
    instantaneous_shift,
)
from .spectral import (
    FitError,
    FitResult,
    ScanRecord,
    Spectrum,
    delay_scan,
    field_scan,
    fit_gaussian,
    power_spectrum,
)
from .counting import (
    BandFilter,
    CountingConfig,
    band_transmission_fraction,
    expected_clicks,
    field_count_scan,
    simulate_counts,
)

__version__ = "0.1.0"
