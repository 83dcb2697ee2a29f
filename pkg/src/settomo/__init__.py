"""Stimulated emission tomography toolkit: forward detection signals in the
low-gain regime and interferometric reconstruction of the joint modal function.
"""

from .errors import ConvergenceError, DegenerateKernelError, ReconstructionError
from .grids import (
    Field1D,
    Field2D,
    ModeGrid,
    dft2,
    idft2,
    inner_product,
    make_grid,
)
from .jsa import (
    CouplingParams,
    JointAmplitude,
    PhaseMatchingFunction,
    PumpProfile,
    build_jsa_pump_phasematch,
    gaussian_jsa,
    normalize,
)
from .kernels import BACKEND
from .oracle import GaussianTransform, build_transform, oracle_expectations
from .reconstruct import (
    MeasurementRecord,
    NoiseParams,
    apply_jitter_analytic,
    apply_jitter_monte_carlo,
    fidelity,
    invert_to_modal,
    nyquist_check,
    sample_signal_map,
)
from .schmidt import SchmidtData, reconstruct_from_schmidt, schmidt_decompose, schmidt_number
from .signals import (
    InterferometerSettings,
    SeedProfile,
    flat_seed,
    gaussian_seed,
    interferometric_signal_exact,
    interferometric_signal_lowgain,
    lowgain_stimulated_spectrum,
    point_seed,
    sipe_limit_spectrum,
    spontaneous_spectrum,
    stimulated_spectrum,
    total_signal_photons,
)

__version__ = "0.1.0"
