"""Schmidt decomposition of a joint modal kernel.

The discrete decomposition applies the measure weight sqrt(dk*dk') before
the SVD and removes it from the singular vectors afterwards, so discrete
orthonormality of the returned mode functions coincides with continuum
orthonormality under the midpoint quadrature inner product.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .grids import Field1D, Field2D, ModeGrid
from .jsa import JointAmplitude

__all__ = [
    "SchmidtData",
    "schmidt_decompose",
    "schmidt_number",
    "reconstruct_from_schmidt",
    "schmidt_to_json",
]


@dataclass(frozen=True)
class SchmidtData:
    """Singular values and orthonormal mode pairs of a joint kernel.

    ``psi_values`` and ``phi_values`` are (rank, n) arrays whose rows are the
    signal and idler mode functions; rows are rescaled so that
    sum(|psi|^2) * spacing == 1.  Each signal mode is rotated so that its
    largest-magnitude sample is real positive, with the idler mode
    counter-rotated (the SVD phase gauge is otherwise arbitrary).
    """

    grid_s: ModeGrid
    grid_i: ModeGrid
    sqrt_lambdas: np.ndarray = field(repr=False)
    psi_values: np.ndarray = field(repr=False)
    phi_values: np.ndarray = field(repr=False)
    truncation_tol: float = 0.0
    dropped_weight: float = 0.0

    def __post_init__(self) -> None:
        for name in ("sqrt_lambdas", "psi_values", "phi_values"):
            arr = np.ascontiguousarray(getattr(self, name))
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def rank(self) -> int:
        return len(self.sqrt_lambdas)

    @property
    def lambdas(self) -> np.ndarray:
        return self.sqrt_lambdas**2

    def psi(self, n: int) -> Field1D:
        return Field1D(grid=self.grid_s, values=self.psi_values[n])

    def phi(self, n: int) -> Field1D:
        return Field1D(grid=self.grid_i, values=self.phi_values[n])


def schmidt_decompose(j: JointAmplitude, tol: float = 1e-12) -> SchmidtData:
    """Decompose a normalized kernel into Schmidt mode pairs.

    Args:
        j: normalized joint amplitude.
        tol: relative truncation threshold; modes with
            lambda_n < tol * lambda_0 are dropped and their total weight
            reported in ``dropped_weight``.

    Returns:
        SchmidtData: descending singular values and mode functions satisfying
        ``kernel = sum_n sqrt_lambda_n * psi_n(k) * phi_n(k')``.

    Raises:
        ValueError: input not normalized, or tol outside [0, 1).
    """
    if not j.normalized:
        raise ValueError("schmidt_decompose requires a normalized kernel")
    if not 0.0 <= tol < 1.0:
        raise ValueError(f"truncation tol must be in [0, 1), got {tol}")
    ds = j.grid_s.spacing
    di = j.grid_i.spacing
    m = j.values * np.sqrt(ds * di)
    u, s, vh = np.linalg.svd(m, full_matrices=False)

    lambdas = s**2
    keep = lambdas >= tol * lambdas[0] if lambdas[0] > 0 else lambdas > -1
    dropped = float(np.sum(lambdas[~keep]))
    u = u[:, keep]
    s = s[keep]
    vh = vh[keep, :]

    # kernel = sum_n s_n u[:, n] vh[n, :] / sqrt(ds*di), so taking the idler
    # modes as the rows of vh leaves the expansion free of conjugates.
    psi = u.T / np.sqrt(ds)
    phi = vh / np.sqrt(di)

    # Gauge fix: largest-|psi| sample real positive, phi counter-rotated.
    for n in range(psi.shape[0]):
        idx = int(np.argmax(np.abs(psi[n])))
        ref = psi[n, idx]
        if np.abs(ref) > 0:
            phase = ref / np.abs(ref)
            psi[n] = psi[n] / phase
            phi[n] = phi[n] * phase

    return SchmidtData(
        grid_s=j.grid_s,
        grid_i=j.grid_i,
        sqrt_lambdas=s,
        psi_values=psi,
        phi_values=phi,
        truncation_tol=tol,
        dropped_weight=dropped,
    )


def schmidt_number(sd: SchmidtData) -> float:
    """Effective mode count K = (sum lambda)^2 / sum lambda^2."""
    lam = sd.lambdas
    return float(np.sum(lam) ** 2 / np.sum(lam**2))


def reconstruct_from_schmidt(sd: SchmidtData, n_max: int | None = None) -> Field2D:
    """Partial sum sum_{n < n_max} sqrt_lambda_n psi_n(k) phi_n(k').

    Args:
        sd: decomposition to resum.
        n_max: number of retained modes (default: all).

    Raises:
        ValueError: n_max outside [0, rank].
    """
    if n_max is None:
        n_max = sd.rank
    if not 0 <= n_max <= sd.rank:
        raise ValueError(f"n_max must be in [0, {sd.rank}], got {n_max}")
    values = np.einsum(
        "n,ni,nj->ij",
        sd.sqrt_lambdas[:n_max],
        sd.psi_values[:n_max],
        sd.phi_values[:n_max],
    )
    return Field2D(grid_s=sd.grid_s, grid_i=sd.grid_i, values=values)


def schmidt_to_json(sd: SchmidtData) -> str:
    """Export singular values and mode samples as JSON."""
    return json.dumps(
        {
            "sqrt_lambdas": sd.sqrt_lambdas.tolist(),
            "psi": [
                {"re": row.real.tolist(), "im": row.imag.tolist()}
                for row in sd.psi_values
            ],
            "phi": [
                {"re": row.real.tolist(), "im": row.imag.tolist()}
                for row in sd.phi_values
            ],
            "truncation_tol": sd.truncation_tol,
            "dropped_weight": sd.dropped_weight,
        }
    )
