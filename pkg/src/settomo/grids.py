"""Uniform mode grids, sampled complex fields and grid-aware Fourier transforms.

All continuum integrals in the toolkit are approximated by midpoint Riemann
sums on :class:`ModeGrid` objects, so quadrature weights are the constant
grid spacing and the discrete transforms below carry the integration measure
explicitly.  Transform phases are always referenced to the true grid
coordinates (including the grid center), never to array indices.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ModeGrid",
    "Field1D",
    "Field2D",
    "make_grid",
    "inner_product",
    "l2_norm_1d",
    "l2_norm_2d",
    "dft2",
    "idft2",
    "conjugate_grid",
    "field2d_to_json",
    "field2d_from_json",
]


@dataclass(frozen=True)
class ModeGrid:
    """Uniform 1D discretization of a mode variable (k, omega, q, tau, ...).

    Points follow the midpoint convention
    ``k_i = center - span/2 + (i + 1/2) * spacing`` with
    ``spacing = span / n_points``.  The stored fields are ``center``, ``span``
    and ``n_points``; spacing and points are derived, so
    ``spacing * n_points == span`` holds at the level of the stored values.
    """

    center: float
    span: float
    n_points: int

    def __post_init__(self) -> None:
        if not self.span > 0:
            raise ValueError(f"grid span must be positive, got {self.span}")
        if self.n_points < 2:
            raise ValueError(f"grid needs at least 2 points, got {self.n_points}")

    @property
    def spacing(self) -> float:
        return self.span / self.n_points

    @property
    def points(self) -> np.ndarray:
        i = np.arange(self.n_points)
        return self.center - 0.5 * self.span + (i + 0.5) * self.spacing

    def nearest_index(self, value: float) -> int:
        """Index of the grid point closest to ``value``.

        Raises:
            ValueError: if ``value`` lies outside ``[center - span/2, center + span/2]``.
        """
        lo = self.center - 0.5 * self.span
        hi = self.center + 0.5 * self.span
        if not (lo <= value <= hi):
            raise ValueError(f"value {value} outside grid range [{lo}, {hi}]")
        return int(np.argmin(np.abs(self.points - value)))


def make_grid(center: float, span: float, n_points: int) -> ModeGrid:
    """Construct a midpoint-sampled uniform grid.

    Args:
        center: midpoint of the covered interval.
        span: total covered length (> 0).
        n_points: number of samples (>= 2).

    Returns:
        ModeGrid: the grid value object.
    """
    return ModeGrid(center=float(center), span=float(span), n_points=int(n_points))


def _as_complex(values: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    arr = np.ascontiguousarray(values, dtype=np.complex128)
    if arr.shape != shape:
        raise ValueError(f"values shape {arr.shape} does not match grid shape {shape}")
    arr = arr.copy()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Field1D:
    """Complex samples of a one-beam mode function on a :class:`ModeGrid`."""

    grid: ModeGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", _as_complex(self.values, (self.grid.n_points,)))


@dataclass(frozen=True)
class Field2D:
    """Complex two-beam kernel samples, row-major with the signal index outer."""

    grid_s: ModeGrid
    grid_i: ModeGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        shape = (self.grid_s.n_points, self.grid_i.n_points)
        object.__setattr__(self, "values", _as_complex(self.values, shape))

    @property
    def measure(self) -> float:
        """Cell area spacing_s * spacing_i used as the 2D quadrature weight."""
        return self.grid_s.spacing * self.grid_i.spacing


def inner_product(a: Field1D, b: Field1D) -> complex:
    """Riemann-sum approximation of the L2 inner product int conj(a) b dk.

    Args:
        a: left factor (conjugated).
        b: right factor, on the same grid as ``a``.

    Returns:
        complex: sum(conj(a_i) * b_i) * spacing.
    """
    if a.grid != b.grid:
        raise ValueError("inner_product requires both fields on the same grid")
    return complex(np.vdot(a.values, b.values) * a.grid.spacing)


def l2_norm_1d(a: Field1D) -> float:
    return float(np.sqrt(np.sum(np.abs(a.values) ** 2) * a.grid.spacing))


def l2_norm_2d(f: Field2D) -> float:
    return float(np.sqrt(np.sum(np.abs(f.values) ** 2) * f.measure))


def conjugate_grid(grid: ModeGrid, center: float = 0.0) -> ModeGrid:
    """Canonical conjugate grid: n points, spacing 2*pi/(n*spacing)."""
    return ModeGrid(center=center, span=2.0 * np.pi / grid.spacing, n_points=grid.n_points)


def _phase_matrix(q: np.ndarray, k: np.ndarray, sign: int) -> np.ndarray:
    return np.exp(1j * sign * np.outer(q, k))


def dft2(
    f: Field2D,
    sign_s: int,
    sign_i: int,
    grid_s_out: ModeGrid | None = None,
    grid_i_out: ModeGrid | None = None,
    scale: float = 1.0,
) -> Field2D:
    """Grid-coordinate 2D Fourier transform with explicit Riemann measure.

    Computes ``F[m, n] = scale * sum_ij f[i, j] * exp(i*sign_s*q_m*k_i)
    * exp(i*sign_i*q'_n*k'_j) * dk * dk'`` where ``q`` runs over the output
    grids (default: the canonical conjugate grids centered at 0).  Phases use
    absolute grid coordinates, so off-center input grids transform correctly.

    Args:
        f: input field.
        sign_s: +1 or -1, sign of the exponent on the signal axis.
        sign_i: +1 or -1, sign of the exponent on the idler axis.
        grid_s_out: output grid for the first axis (default conjugate grid).
        grid_i_out: output grid for the second axis (default conjugate grid).
        scale: overall factor, e.g. 1/(2*pi)**2 for the inverse transform.

    Returns:
        Field2D: the transform on the output grids.
    """
    if sign_s not in (-1, 1) or sign_i not in (-1, 1):
        raise ValueError("transform signs must be +1 or -1")
    gs = grid_s_out if grid_s_out is not None else conjugate_grid(f.grid_s)
    gi = grid_i_out if grid_i_out is not None else conjugate_grid(f.grid_i)
    es = _phase_matrix(gs.points, f.grid_s.points, sign_s)
    ei = _phase_matrix(gi.points, f.grid_i.points, sign_i)
    out = es @ f.values @ ei.T * (f.measure * scale)
    return Field2D(grid_s=gs, grid_i=gi, values=out)


def idft2(
    f: Field2D,
    grid_s_out: ModeGrid | None = None,
    grid_i_out: ModeGrid | None = None,
) -> Field2D:
    """Inverse of :func:`dft2` with signs (+1, +1): signs (-1, -1) and measure 1/(2*pi)^2."""
    return dft2(
        f,
        sign_s=-1,
        sign_i=-1,
        grid_s_out=grid_s_out,
        grid_i_out=grid_i_out,
        scale=1.0 / (2.0 * np.pi) ** 2,
    )


def _fmt(x: float) -> str:
    # 17 significant digits round-trip IEEE-754 doubles exactly.
    return format(float(x), ".17g")


def _grid_json(grid: ModeGrid) -> str:
    return (
        "{"
        + f'"center": {_fmt(grid.center)}, "span": {_fmt(grid.span)}, "n": {grid.n_points}'
        + "}"
    )


def _matrix_json(m: np.ndarray) -> str:
    rows = ", ".join("[" + ", ".join(_fmt(x) for x in row) + "]" for row in m)
    return "[" + rows + "]"


def field2d_to_json(f: Field2D) -> str:
    """Serialize a Field2D to the toolkit's kernel JSON format."""
    return (
        "{"
        + f'"grid_s": {_grid_json(f.grid_s)}, '
        + f'"grid_i": {_grid_json(f.grid_i)}, '
        + f'"re": {_matrix_json(f.values.real)}, '
        + f'"im": {_matrix_json(f.values.imag)}'
        + "}"
    )


def grid_from_dict(d: dict) -> ModeGrid:
    return ModeGrid(center=float(d["center"]), span=float(d["span"]), n_points=int(d["n"]))


def field2d_from_json(text: str) -> Field2D:
    """Parse a Field2D from its JSON representation."""
    d = json.loads(text)
    return field2d_from_dict(d)


def field2d_from_dict(d: dict) -> Field2D:
    values = np.asarray(d["re"], dtype=float) + 1j * np.asarray(d["im"], dtype=float)
    return Field2D(
        grid_s=grid_from_dict(d["grid_s"]),
        grid_i=grid_from_dict(d["grid_i"]),
        values=values,
    )
