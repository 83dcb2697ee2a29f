"""Joint modal functions: normalized kernels, analytic fixtures and the
pump-times-phase-matching builder.

A :class:`JointAmplitude` holds a unit-L2-norm complex kernel over a
signal/idler grid pair.  The energy-conservation line collapses the pump
integral, so a kernel built from a pump profile and a phase-matching kernel
is ``f_p(k + k') * exp(i*chirp*(k + k')**2) * S(k, k')`` up to normalization;
the removed norm is retained as metadata because it tracks the pair-generation
strength of the device.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateKernelError
from .grids import (
    Field1D,
    Field2D,
    ModeGrid,
    field2d_from_dict,
    field2d_to_json,
    l2_norm_2d,
)

__all__ = [
    "PumpProfile",
    "PhaseMatchingFunction",
    "JointAmplitude",
    "CouplingParams",
    "normalize",
    "gaussian_jsa",
    "build_jsa_pump_phasematch",
    "joint_amplitude_to_json",
    "joint_amplitude_from_json",
]

NORM_TOL = 1e-12


@dataclass(frozen=True)
class JointAmplitude:
    """Unit-norm joint modal kernel plus the normalization metadata.

    ``norm_factor`` is the L2 norm removed when the kernel was normalized
    (1.0 for kernels constructed already normalized).  ``normalized`` is
    False only for derived kernels that are deliberately left attenuated,
    e.g. after applying an analytic jitter envelope.
    """

    kernel: Field2D
    norm_factor: float = 1.0
    normalized: bool = True

    def __post_init__(self) -> None:
        if self.normalized:
            norm = l2_norm_2d(self.kernel)
            if abs(norm - 1.0) > 1e-8:
                raise ValueError(f"kernel marked normalized but has L2 norm {norm}")

    @property
    def grid_s(self) -> ModeGrid:
        return self.kernel.grid_s

    @property
    def grid_i(self) -> ModeGrid:
        return self.kernel.grid_i

    @property
    def values(self) -> np.ndarray:
        return self.kernel.values


@dataclass(frozen=True)
class CouplingParams:
    """Effective coupling gamma split into magnitude, phase and device metadata.

    ``gain`` is the magnitude used as the hyperbolic argument in all signal
    formulas; ``gain_phase`` is absorbed into the kernel (a global rotation)
    when complex signals are formed.  ``chi`` (device constant) and
    ``pump_amp`` (pump amplitude) are optional bookkeeping satisfying
    ``gain == chi * pump_amp`` when both are given.
    """

    gain: float
    gain_phase: float = 0.0
    chi: float | None = None
    pump_amp: float | None = None

    def __post_init__(self) -> None:
        if self.gain < 0:
            raise ValueError(f"gain must be >= 0, got {self.gain}")
        if self.chi is not None and self.chi < 0:
            raise ValueError("chi must be >= 0")
        if self.pump_amp is not None and self.pump_amp < 0:
            raise ValueError("pump_amp must be >= 0")
        if self.chi is not None and self.pump_amp is not None:
            prod = self.chi * self.pump_amp
            if abs(prod - self.gain) > 1e-9 * max(1.0, abs(self.gain)):
                raise ValueError(
                    f"gain {self.gain} inconsistent with chi*pump_amp = {prod}"
                )

    def effective_kernel(self, j: JointAmplitude) -> JointAmplitude:
        """Kernel with the coupling phase folded in: exp(i*gain_phase) * L."""
        if self.gain_phase == 0.0:
            return j
        rotated = Field2D(
            grid_s=j.grid_s,
            grid_i=j.grid_i,
            values=np.exp(1j * self.gain_phase) * j.values,
        )
        return JointAmplitude(
            kernel=rotated, norm_factor=j.norm_factor, normalized=j.normalized
        )


@dataclass(frozen=True)
class PumpProfile:
    """Pump spectral amplitude along the energy-conservation variable k + k'.

    ``amplitude`` holds complex samples on the pump's own grid; values at
    arbitrary k + k' are obtained by linear interpolation, so the pump grid
    must cover every k_i + k'_j of the target kernel grids.  ``chirp`` is a
    quadratic spectral phase coefficient applied as exp(i*chirp*(k + k')**2).
    """

    amplitude: Field1D
    chirp: float = 0.0

    def value_at(self, u: np.ndarray) -> np.ndarray:
        pts = self.amplitude.grid.points
        u = np.asarray(u, dtype=float)
        if u.min() < pts[0] or u.max() > pts[-1]:
            raise ValueError(
                "pump profile not evaluable over the requested k + k' range "
                f"[{u.min()}, {u.max()}]; pump grid covers [{pts[0]}, {pts[-1]}]"
            )
        vals = self.amplitude.values
        re = np.interp(u, pts, vals.real)
        im = np.interp(u, pts, vals.imag)
        return (re + 1j * im) * np.exp(1j * self.chirp * u**2)


@dataclass(frozen=True)
class PhaseMatchingFunction:
    """Nonlinear-coupling / phase-matching kernel restricted by the energy delta."""

    values: Field2D


def normalize(kernel: Field2D) -> JointAmplitude:
    """Scale a kernel to unit L2 norm, reporting the removed norm.

    Raises:
        DegenerateKernelError: kernel is identically zero.
    """
    norm = l2_norm_2d(kernel)
    if norm == 0.0:
        raise DegenerateKernelError("cannot normalize an identically zero kernel")
    scaled = Field2D(
        grid_s=kernel.grid_s, grid_i=kernel.grid_i, values=kernel.values / norm
    )
    return JointAmplitude(kernel=scaled, norm_factor=norm)


def gaussian_jsa(
    sigma_plus: float,
    sigma_minus: float,
    chirp: float,
    grid_s: ModeGrid,
    grid_i: ModeGrid,
) -> JointAmplitude:
    """Double-Gaussian test kernel with optional quadratic phase.

    The kernel is ``exp(-(k+k')^2/(4*sigma_plus^2)) *
    exp(-(k-k')^2/(4*sigma_minus^2)) * exp(i*chirp*(k+k')^2)``, normalized.
    Equal widths give a separable (single Schmidt mode) kernel; the Schmidt
    spectrum of the unchirped kernel is geometric with ratio
    ``((sigma_minus - sigma_plus) / (sigma_minus + sigma_plus))**2``.

    Args:
        sigma_plus: width along the k + k' diagonal (> 0).
        sigma_minus: width along the k - k' antidiagonal (> 0).
        chirp: quadratic phase coefficient on (k + k')^2.
        grid_s: signal grid.
        grid_i: idler grid.

    Returns:
        JointAmplitude: the normalized kernel.
    """
    if sigma_plus <= 0 or sigma_minus <= 0:
        raise ValueError("gaussian_jsa widths must be positive")
    ks = grid_s.points[:, None]
    ki = grid_i.points[None, :]
    plus = ks + ki
    minus = ks - ki
    values = np.exp(
        -(plus**2) / (4.0 * sigma_plus**2)
        - (minus**2) / (4.0 * sigma_minus**2)
        + 1j * chirp * plus**2
    )
    return normalize(Field2D(grid_s=grid_s, grid_i=grid_i, values=values))


def build_jsa_pump_phasematch(
    pump: PumpProfile, pm: PhaseMatchingFunction
) -> JointAmplitude:
    """Joint kernel from a pump profile and a phase-matching kernel.

    The energy delta collapses the pump integral, leaving
    ``L(k, k') proportional to f_p(k + k') * S(k, k')`` on the grids of the
    phase-matching kernel.  The pre-normalization L2 norm (proportional to
    the per-pump-photon pair yield) is reported in ``norm_factor``.

    Raises:
        DegenerateKernelError: the product vanishes identically.
    """
    grid_s = pm.values.grid_s
    grid_i = pm.values.grid_i
    u = grid_s.points[:, None] + grid_i.points[None, :]
    values = pump.value_at(u) * pm.values.values
    return normalize(Field2D(grid_s=grid_s, grid_i=grid_i, values=values))


def _grid_dict(g: ModeGrid) -> dict:
    return {"center": g.center, "span": g.span, "n": g.n_points}


def joint_amplitude_to_json(
    j: JointAmplitude,
    coupling: CouplingParams | None = None,
    run_info: dict | None = None,
) -> str:
    """Serialize a JointAmplitude (kernel plus metadata block) to JSON.

    ``run_info`` optionally embeds provenance (toolkit version, config hash)
    without affecting how the file parses.
    """
    meta = {
        "norm_factor": j.norm_factor,
        "normalized": j.normalized,
        "gain": coupling.gain if coupling else None,
        "gain_phase": coupling.gain_phase if coupling else None,
        "chi": coupling.chi if coupling else None,
        "pump_amp": coupling.pump_amp if coupling else None,
    }
    parts = ['"kernel": ' + field2d_to_json(j.kernel), '"meta": ' + json.dumps(meta)]
    if run_info is not None:
        parts.append('"run": ' + json.dumps(run_info, sort_keys=True))
    return "{" + ", ".join(parts) + "}"


def joint_amplitude_from_json(text: str) -> tuple[JointAmplitude, CouplingParams | None]:
    """Parse a JointAmplitude and optional coupling metadata from JSON."""
    d = json.loads(text)
    kernel = field2d_from_dict(d["kernel"])
    meta = d.get("meta", {})
    j = JointAmplitude(
        kernel=kernel,
        norm_factor=float(meta.get("norm_factor", 1.0)),
        normalized=bool(meta.get("normalized", True)),
    )
    coupling = None
    if meta.get("gain") is not None:
        coupling = CouplingParams(
            gain=float(meta["gain"]),
            gain_phase=float(meta.get("gain_phase") or 0.0),
            chi=meta.get("chi"),
            pump_amp=meta.get("pump_amp"),
        )
    return j, coupling
