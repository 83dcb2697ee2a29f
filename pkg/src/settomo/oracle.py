"""Brute-force ground truth for the detection signals.

The exact Bogoliubov transform is obtained by exponentiating the quadratic
generator as a dense matrix (scaling and squaring), never via a singular
value decomposition, so this path shares no machinery with the Schmidt-basis
closed forms it is used to validate.  Sizes are capped at desk scale.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError
from .jsa import JointAmplitude
from .signals import InterferometerSettings

__all__ = ["GaussianTransform", "build_transform", "oracle_expectations", "OracleExpectations"]

MAX_POINTS_PER_BEAM = 16


def _expm(a: np.ndarray, tol: float = 1e-16, max_terms: int = 40) -> np.ndarray:
    """Matrix exponential by scaling and squaring with a truncated Taylor series."""
    norm = np.linalg.norm(a, 1)
    n_square = max(0, int(np.ceil(np.log2(norm / 0.25))) if norm > 0.25 else 0)
    scaled = a / (2.0**n_square)
    result = np.eye(a.shape[0], dtype=np.complex128)
    term = np.eye(a.shape[0], dtype=np.complex128)
    for k in range(1, max_terms + 1):
        term = term @ scaled / k
        result = result + term
        if np.linalg.norm(term, 1) < tol * np.linalg.norm(result, 1):
            break
    else:
        raise ConvergenceError(
            f"matrix exponential Taylor series did not converge: "
            f"generator 1-norm {norm}, last term norm {np.linalg.norm(term, 1)}"
        )
    for _ in range(n_square):
        result = result @ result
    return result


@dataclass(frozen=True)
class GaussianTransform:
    """Bogoliubov blocks mapping (a_s, a_i^dag) -> (C_s a_s + S a_i^dag, S2 a_s + C_i a_i^dag)."""

    k_signal: np.ndarray = field(repr=False)
    k_idler: np.ndarray = field(repr=False)
    dk_signal: float
    dk_idler: float
    gain: float
    c_signal: np.ndarray = field(repr=False)
    s_block: np.ndarray = field(repr=False)
    s2_block: np.ndarray = field(repr=False)
    c_idler: np.ndarray = field(repr=False)

    @property
    def n_signal(self) -> int:
        return len(self.k_signal)

    @property
    def n_idler(self) -> int:
        return len(self.k_idler)


def build_transform(ja: JointAmplitude, gain: float) -> GaussianTransform:
    """Exponentiate the two-beam quadratic generator for a discretized kernel.

    The generator acts on the stacked vector (a_s, a_i^dag) as
    ``[[0, g*M], [g*M^dag, 0]]`` with ``M_ij = L_ij sqrt(dk dk')``.  The
    resulting blocks satisfy the symplectic condition
    ``C_s C_s^dag - S S^dag = 1``, which is verified before returning.

    Raises:
        ValueError: more than 16 points per beam, or negative gain.
        ConvergenceError: exponential series or symplectic check failure.
    """
    if gain < 0:
        raise ValueError("gain must be >= 0")
    ns = ja.grid_s.n_points
    ni = ja.grid_i.n_points
    if ns > MAX_POINTS_PER_BEAM or ni > MAX_POINTS_PER_BEAM:
        raise ValueError(
            f"oracle is capped at {MAX_POINTS_PER_BEAM} points per beam, got {ns}x{ni}"
        )
    m = ja.values * np.sqrt(ja.grid_s.spacing * ja.grid_i.spacing)
    gen = np.zeros((ns + ni, ns + ni), dtype=np.complex128)
    gen[:ns, ns:] = gain * m
    gen[ns:, :ns] = gain * m.conj().T
    t = _expm(gen)
    c_s = t[:ns, :ns]
    s = t[:ns, ns:]
    s2 = t[ns:, :ns]
    c_i = t[ns:, ns:]
    residual = c_s @ c_s.conj().T - s @ s.conj().T - np.eye(ns)
    res_norm = float(np.linalg.norm(residual))
    if res_norm > 1e-10:
        raise ConvergenceError(f"symplectic condition violated: residual norm {res_norm}")
    return GaussianTransform(
        k_signal=ja.grid_s.points,
        k_idler=ja.grid_i.points,
        dk_signal=ja.grid_s.spacing,
        dk_idler=ja.grid_i.spacing,
        gain=gain,
        c_signal=c_s,
        s_block=s,
        s2_block=s2,
        c_idler=c_i,
    )


@dataclass(frozen=True)
class OracleExpectations:
    """First and second moment observables propagated through the transform."""

    signal_spectrum: np.ndarray
    n_total_signal: float
    n_diff_interferometric: float | None = None


def oracle_expectations(
    t: GaussianTransform,
    displacement: np.ndarray,
    settings: InterferometerSettings | None = None,
) -> OracleExpectations:
    """Propagate a seed displacement through the exact transform.

    Args:
        t: Bogoliubov transform blocks.
        displacement: length (n_signal + n_idler) complex vector of discrete
            mode amplitudes (amplitude density times sqrt(dk)); the signal
            block must vanish, seeding is on the idler beam only.
        settings: interferometer phases; when given (requires equal beam
            grids) the balanced intensity difference is also computed with
            the phases applied exactly as in the closed-form signal path.

    Returns:
        OracleExpectations: spectral density on the signal grid, total signal
        photon number, and optionally the interferometric difference.
    """
    ns = t.n_signal
    displacement = np.asarray(displacement, dtype=np.complex128)
    if displacement.shape != (ns + t.n_idler,):
        raise ValueError("displacement length must be n_signal + n_idler")
    if np.any(np.abs(displacement[:ns]) > 0):
        raise ValueError("displacement must live on the idler block only")
    seed = displacement[ns:]

    # <b_i> = sum_j S_ij conj(seed_j); photon number adds the vacuum part (S S^dag)_ii.
    mu_b = t.s_block @ np.conj(seed)
    vac = np.real(np.einsum("ij,ij->i", t.s_block, np.conj(t.s_block)))
    counts = np.abs(mu_b) ** 2 + vac
    spectrum = counts / t.dk_signal
    n_total = float(np.sum(counts))

    n_diff = None
    if settings is not None:
        if t.n_signal != t.n_idler or not np.allclose(t.k_signal, t.k_idler):
            raise ValueError("interferometric oracle requires equal beam grids")
        phased = seed * np.exp(-1j * t.k_idler * (settings.q_sigma + settings.q_eta))
        mu_b = t.s_block @ np.conj(phased)
        mu_c = np.conj(t.c_idler) @ phased
        z = 2.0 * np.sum(mu_b * np.conj(mu_c) * np.exp(-1j * t.k_idler * settings.q_eta))
        n_diff = float(np.real(np.exp(-1j * settings.theta) * z))
    return OracleExpectations(
        signal_spectrum=spectrum,
        n_total_signal=n_total,
        n_diff_interferometric=n_diff,
    )
