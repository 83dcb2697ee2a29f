"""Forward detection model: direct spectra and interferometric difference
signals, exact in the coupling strength and in the low-gain limit.

Conventions
-----------
The interferometric measurement map is

    S(q1, q2) = 2 * gain * sum_ij L_ij conj(a_i) conj(a'_j)
                * exp(i k_i q1) exp(i k'_j q2) * dk * dk'

sampled at ``(q1, q2) = (q_sigma, q_sigma + q_eta)``, where ``a`` is the seed
amplitude.  The detected intensity difference at quadrature angle theta is
``Re(exp(-i*theta) * S)``, so the theta = 0 and theta = pi/2 quadratures
recover Re(S) and Im(S) and together determine the complex map exactly.

The exact signal is computed from first moments of the Bogoliubov-evolved
fields expressed in the Schmidt basis.  The seed component orthogonal to the
retained idler Schmidt modes passes through the interaction unchanged and is
kept in the idler mean, so truncated or rank-deficient kernels are handled
exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import Field1D, ModeGrid
from .jsa import JointAmplitude
from .kernels import map_points
from .schmidt import SchmidtData

__all__ = [
    "SeedProfile",
    "InterferometerSettings",
    "flat_seed",
    "gaussian_seed",
    "point_seed",
    "spontaneous_spectrum",
    "stimulated_spectrum",
    "total_signal_photons",
    "lowgain_stimulated_spectrum",
    "sipe_limit_spectrum",
    "interferometric_signal_exact",
    "interferometric_signal_lowgain",
    "exact_map_complex",
    "lowgain_map_complex",
]


@dataclass(frozen=True)
class SeedProfile:
    """Complex seed amplitude injected into the idler beam."""

    alpha: Field1D

    @property
    def grid(self) -> ModeGrid:
        return self.alpha.grid

    @property
    def total_intensity(self) -> float:
        """Integrated seed intensity sum |alpha|^2 dk (mean photon number)."""
        return float(np.sum(np.abs(self.alpha.values) ** 2) * self.grid.spacing)

    @property
    def integrated_amplitude(self) -> complex:
        """sum alpha dk; its squared modulus is the narrowband-limit intensity scale."""
        return complex(np.sum(self.alpha.values) * self.grid.spacing)


@dataclass(frozen=True)
class InterferometerSettings:
    """Seed delay, idler arm delay and signal-arm quadrature phase."""

    q_sigma: float = 0.0
    q_eta: float = 0.0
    theta: float = 0.0


def flat_seed(grid: ModeGrid, amplitude: complex = 1.0) -> SeedProfile:
    """Constant-amplitude seed covering the whole grid."""
    values = np.full(grid.n_points, amplitude, dtype=np.complex128)
    return SeedProfile(alpha=Field1D(grid=grid, values=values))


def gaussian_seed(
    grid: ModeGrid, center: float, sigma: float, amplitude: complex = 1.0
) -> SeedProfile:
    """Gaussian seed amplitude exp(-(k - center)^2 / (2 sigma^2))."""
    if sigma <= 0:
        raise ValueError("seed width must be positive")
    k = grid.points
    values = amplitude * np.exp(-((k - center) ** 2) / (2.0 * sigma**2))
    return SeedProfile(alpha=Field1D(grid=grid, values=values))


def point_seed(grid: ModeGrid, k0: float, weight: complex = 1.0) -> SeedProfile:
    """Single-grid-point seed with integrated amplitude sum alpha dk = weight.

    The amplitude at the grid point nearest ``k0`` is weight / spacing, the
    discrete stand-in for a delta-function seed of that total weight.
    """
    idx = grid.nearest_index(k0)
    values = np.zeros(grid.n_points, dtype=np.complex128)
    values[idx] = weight / grid.spacing
    return SeedProfile(alpha=Field1D(grid=grid, values=values))


def _check_seed_grid(grid: ModeGrid, seed: SeedProfile) -> None:
    if seed.grid != grid:
        raise ValueError("seed grid does not match the kernel idler grid")


def _seed_projections(sd: SchmidtData, alpha: np.ndarray) -> np.ndarray:
    """Schmidt-basis projections beta_n = <phi_n, alpha>."""
    return np.conj(sd.phi_values) @ alpha * sd.grid_i.spacing


def spontaneous_spectrum(sd: SchmidtData, gain: float) -> np.ndarray:
    """Spontaneous signal spectral density on the signal grid.

    Args:
        sd: Schmidt decomposition of the kernel.
        gain: coupling magnitude (>= 0).

    Returns:
        ndarray: sum_n |psi_n(k)|^2 sinh(gain*sqrt_lambda_n)^2 per unit k.
    """
    if gain < 0:
        raise ValueError("gain must be >= 0")
    sh2 = np.sinh(gain * sd.sqrt_lambdas) ** 2
    return sh2 @ (np.abs(sd.psi_values) ** 2)


def stimulated_spectrum(sd: SchmidtData, gain: float, seed: SeedProfile) -> np.ndarray:
    """Total (spontaneous plus seeded) signal spectral density.

    The seeded part is |sum_n conj(beta_n) psi_n(k) sinh(gain*sqrt_lambda_n)|^2
    with beta_n the Schmidt projections of the seed amplitude.
    """
    _check_seed_grid(sd.grid_i, seed)
    sh = np.sinh(gain * sd.sqrt_lambdas)
    beta = _seed_projections(sd, seed.alpha.values)
    mean = (np.conj(beta) * sh) @ sd.psi_values
    return spontaneous_spectrum(sd, gain) + np.abs(mean) ** 2


def total_signal_photons(sd: SchmidtData, gain: float, seed: SeedProfile) -> float:
    """Mode-unresolved signal photon number sum_n sinh^2(gain*sqrt_lambda_n) (1 + |beta_n|^2)."""
    _check_seed_grid(sd.grid_i, seed)
    sh2 = np.sinh(gain * sd.sqrt_lambdas) ** 2
    beta = _seed_projections(sd, seed.alpha.values)
    return float(np.sum(sh2 * (1.0 + np.abs(beta) ** 2)))


def lowgain_stimulated_spectrum(
    ja: JointAmplitude, gain: float, seed: SeedProfile
) -> np.ndarray:
    """Leading-order seeded spectral density |gain * sum_j L(k, k'_j) conj(alpha_j) dk'|^2."""
    _check_seed_grid(ja.grid_i, seed)
    vec = ja.values @ np.conj(seed.alpha.values) * ja.grid_i.spacing
    return gain**2 * np.abs(vec) ** 2


def sipe_limit_spectrum(
    ja: JointAmplitude, gain: float, k0: float, seed_intensity: float
) -> np.ndarray:
    """Narrowband-seed limit gain^2 * intensity * |L(k, k0)|^2.

    Args:
        ja: joint amplitude.
        gain: coupling magnitude.
        k0: idler location of the narrow seed; snapped to the nearest grid
            point, out-of-grid values raise ValueError.
        seed_intensity: squared integrated seed amplitude |sum alpha dk|^2.
    """
    j0 = ja.grid_i.nearest_index(k0)
    return gain**2 * seed_intensity * np.abs(ja.values[:, j0]) ** 2


def exact_map_complex(
    sd: SchmidtData,
    gain: float,
    seed: SeedProfile,
    q_sigma: np.ndarray,
    q_eta: np.ndarray,
) -> np.ndarray:
    """Complex measurement map from exact first moments, one value per setting.

    Equals the quadrature assembly M(theta=0) + i M(theta=pi/2) and reduces to
    :func:`lowgain_map_complex` with an O(gain^3) error.
    """
    if sd.grid_s != sd.grid_i:
        raise ValueError("interferometric signals require equal signal/idler grids")
    _check_seed_grid(sd.grid_i, seed)
    if gain < 0:
        raise ValueError("gain must be >= 0")
    q_sigma = np.atleast_1d(np.asarray(q_sigma, dtype=float))
    q_eta = np.atleast_1d(np.asarray(q_eta, dtype=float))
    k = sd.grid_i.points
    dk = sd.grid_i.spacing
    arg = gain * sd.sqrt_lambdas
    sinh = np.sinh(arg)
    coshm1 = np.cosh(arg) - 1.0
    phi_conj = np.conj(sd.phi_values)
    out = np.empty(len(q_sigma), dtype=np.complex128)
    for idx in range(len(q_sigma)):
        phased = seed.alpha.values * np.exp(-1j * k * (q_sigma[idx] + q_eta[idx]))
        beta = phi_conj @ phased * dk
        mean_s = (sinh * np.conj(beta)) @ sd.psi_values
        mean_i = phased + (coshm1 * beta) @ sd.phi_values
        cross = mean_s * np.conj(mean_i) * np.exp(-1j * k * q_eta[idx])
        out[idx] = 2.0 * np.sum(cross) * dk
    return out


def lowgain_map_complex(
    ja: JointAmplitude,
    gain: float,
    seed: SeedProfile,
    q_sigma: np.ndarray,
    q_eta: np.ndarray,
) -> np.ndarray:
    """Leading-order complex measurement map S(q_sigma, q_sigma + q_eta)."""
    if ja.grid_s != ja.grid_i:
        raise ValueError("interferometric signals require equal signal/idler grids")
    _check_seed_grid(ja.grid_i, seed)
    q_sigma = np.atleast_1d(np.asarray(q_sigma, dtype=float))
    q_eta = np.atleast_1d(np.asarray(q_eta, dtype=float))
    ac = np.conj(seed.alpha.values)
    w = 2.0 * gain * ja.values * np.outer(ac, ac) * ja.kernel.measure
    return map_points(w, ja.grid_s.points, ja.grid_i.points, q_sigma, q_sigma + q_eta)


def interferometric_signal_exact(
    sd: SchmidtData,
    gain: float,
    seed: SeedProfile,
    settings: InterferometerSettings,
) -> float:
    """Exact balanced-detector intensity difference for one interferometer setting.

    Computed from the first moments of the evolved signal and idler fields;
    vacuum cross correlations between the beams vanish, so the difference is
    the quadrature projection of the complex map.
    """
    z = exact_map_complex(sd, gain, seed, settings.q_sigma, settings.q_eta)[0]
    return float(np.real(np.exp(-1j * settings.theta) * z))


def interferometric_signal_lowgain(
    ja: JointAmplitude,
    gain: float,
    seed: SeedProfile,
    settings: InterferometerSettings,
) -> float:
    """Low-gain intensity difference 2 Re[exp(-i theta) gain sum L conj(a) conj(a) phases]."""
    z = lowgain_map_complex(ja, gain, seed, settings.q_sigma, settings.q_eta)[0]
    return float(np.real(np.exp(-1j * settings.theta) * z))
