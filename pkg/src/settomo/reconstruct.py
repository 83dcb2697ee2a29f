"""Inverse problem: sample the interferometric map, invert it back to the
joint modal function, model timing jitter, and check sampling requirements.

A :class:`MeasurementRecord` stores the complex map S(q_sigma, q_sigma +
q_eta) assembled from the theta = 0 and theta = pi/2 quadratures on a regular
(q_sigma, q_eta) grid.  Inversion changes variables to the plain Fourier pair
(q1, q2) = (q_sigma, q_sigma + q_eta) analytically, as a phase re-indexing of
the transform kernel, so no resampling of the sheared coordinate is needed:

    kernel * conj(a) conj(a') * 2 * gain
        = 1/(2 pi)^2 * sum_mn S[m, n] exp(-i (k + k') q_sigma_m)
          * exp(-i k' q_eta_n) dq_sigma dq_eta

Deconvolving the seed divides by conj(a(k)) conj(a(k')) wherever the seed
amplitude product is above a relative floor; cells below the floor are masked
rather than imputed.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ReconstructionError
from .grids import Field2D, ModeGrid, _grid_json, _matrix_json, grid_from_dict
from .jsa import JointAmplitude
from .kernels import map_points
from .schmidt import SchmidtData
from .signals import SeedProfile, exact_map_complex, lowgain_map_complex

__all__ = [
    "MeasurementRecord",
    "NoiseParams",
    "NyquistReport",
    "sample_signal_map",
    "invert_to_modal",
    "fidelity",
    "apply_jitter_analytic",
    "apply_jitter_monte_carlo",
    "make_lowgain_map",
    "nyquist_check",
    "record_to_json",
    "record_from_json",
]

RNG_ALGORITHM = "PCG64"

PROVENANCES = ("exact", "lowgain", "external-file")


@dataclass(frozen=True)
class NoiseParams:
    """Gaussian jitter parameters for the two interferometer phase coordinates.

    The distributions are P(d) proportional to exp(-d^2 / delta), so a
    variance parameter ``delta`` attenuates a phase frequency u by
    exp(-u^2 * delta / 4).  ``delta_eta`` is the jitter of the coordinate
    that phases both kernel axes (the record's q_sigma coordinate in this
    toolkit's map labeling, frequency k + k'); ``delta_sigma`` is the jitter
    of the idler-axis coordinate (the record's q_eta, frequency k').
    """

    delta_eta: float = 0.0
    delta_sigma: float = 0.0
    mc_samples: int = 1
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.delta_eta < 0 or self.delta_sigma < 0:
            raise ValueError("jitter variance parameters must be >= 0")
        if self.mc_samples < 1:
            raise ValueError("mc_samples must be >= 1")


@dataclass(frozen=True)
class MeasurementRecord:
    """Sampled complex interferometric map over a (q_sigma, q_eta) grid."""

    grid_sigma: ModeGrid
    grid_eta: ModeGrid
    s: np.ndarray = field(repr=False)
    gain_used: float = 0.0
    provenance: str = "external-file"
    rng_algorithm: str | None = None
    rng_seed: int | None = None
    noise: NoiseParams | None = None
    se_re: np.ndarray | None = field(repr=False, default=None)
    se_im: np.ndarray | None = field(repr=False, default=None)

    def __post_init__(self) -> None:
        shape = (self.grid_sigma.n_points, self.grid_eta.n_points)
        s = np.ascontiguousarray(self.s, dtype=np.complex128).copy()
        if s.shape != shape:
            raise ValueError(f"record shape {s.shape} does not match grids {shape}")
        s.flags.writeable = False
        object.__setattr__(self, "s", s)
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")


def _cells(grid_sigma: ModeGrid, grid_eta: ModeGrid) -> tuple[np.ndarray, np.ndarray]:
    qs, qe = np.meshgrid(grid_sigma.points, grid_eta.points, indexing="ij")
    return qs.ravel(), qe.ravel()


def sample_signal_map(
    model: SchmidtData | JointAmplitude,
    gain: float,
    seed: SeedProfile,
    grid_sigma: ModeGrid,
    grid_eta: ModeGrid,
) -> MeasurementRecord:
    """Sample the complex map on a regular settings grid.

    Each cell holds M(theta=0) + i M(theta=pi/2); the sweep is deterministic.

    Args:
        model: SchmidtData for the exact signal, JointAmplitude for the
            low-gain form.
        gain: coupling magnitude.
        seed: seed amplitude (must not vanish identically).
        grid_sigma: seed-delay coordinate grid.
        grid_eta: arm-delay coordinate grid.
    """
    if not np.any(np.abs(seed.alpha.values) > 0):
        raise ValueError("sample_signal_map requires a nonzero seed")
    qs, qe = _cells(grid_sigma, grid_eta)
    if isinstance(model, SchmidtData):
        values = exact_map_complex(model, gain, seed, qs, qe)
        provenance = "exact"
    elif isinstance(model, JointAmplitude):
        values = lowgain_map_complex(model, gain, seed, qs, qe)
        provenance = "lowgain"
    else:
        raise TypeError("model must be SchmidtData or JointAmplitude")
    return MeasurementRecord(
        grid_sigma=grid_sigma,
        grid_eta=grid_eta,
        s=values.reshape(grid_sigma.n_points, grid_eta.n_points),
        gain_used=gain,
        provenance=provenance,
    )


def invert_to_modal(
    record: MeasurementRecord,
    seed: SeedProfile,
    gain: float,
    reg_eps: float = 1e-3,
) -> tuple[JointAmplitude, dict]:
    """Reconstruct the joint modal function from a sampled map.

    The output lives on the seed grid along both axes.  Cells where the seed
    amplitude product falls below ``reg_eps * max|alpha|^2`` are masked (set
    to zero and excluded from normalization); the mask is returned in the
    diagnostics together with the masked fraction, the pre-normalization
    kernel, and the relative forward-model residual.

    Args:
        record: sampled complex map.
        seed: seed amplitude used during acquisition.
        gain: coupling magnitude used during acquisition (> 0).
        reg_eps: relative seed-amplitude floor for the deconvolution.

    Returns:
        (JointAmplitude, dict): reconstructed kernel and diagnostics with
        keys ``mask``, ``masked_fraction``, ``raw``, ``residual``,
        ``nyquist_ok``.

    Raises:
        ValueError: gain is not positive.
        ReconstructionError: every cell is masked.
    """
    if gain <= 0:
        raise ValueError("invert_to_modal requires gain > 0")
    k = seed.grid.points
    grid = seed.grid
    qs = record.grid_sigma.points
    qe = record.grid_eta.points
    dqs = record.grid_sigma.spacing
    dqe = record.grid_eta.spacing

    nyquist_ok = _grid_nyquist_ok(grid, record.grid_sigma, record.grid_eta)
    if not nyquist_ok:
        warnings.warn(
            "record grids undersample the target kernel grid; "
            "reconstruction may alias",
            stacklevel=2,
        )

    # eta transform, then the sheared sigma transform as a phase re-indexing.
    e_eta = np.exp(-1j * np.outer(qe, k)) * dqe
    a = record.s @ e_eta
    b = a * np.exp(-1j * np.outer(qs, k)) * dqs
    e_sig = np.exp(-1j * np.outer(qs, k))
    r = (e_sig.T @ b) / (2.0 * np.pi) ** 2

    alpha = seed.alpha.values
    amp = np.abs(alpha)
    floor = reg_eps * np.max(amp) ** 2
    mask = np.outer(amp, amp) >= floor
    if not np.any(mask):
        raise ReconstructionError(
            "all cells fall below the seed-amplitude floor; nothing to reconstruct"
        )
    denom = 2.0 * gain * np.outer(np.conj(alpha), np.conj(alpha))
    raw = np.zeros_like(r)
    raw[mask] = r[mask] / denom[mask]

    raw_field = Field2D(grid_s=grid, grid_i=grid, values=raw)
    norm = float(np.sqrt(np.sum(np.abs(raw[mask]) ** 2) * raw_field.measure))
    if norm == 0.0:
        raise ReconstructionError("reconstructed kernel vanishes on the unmasked support")
    rec = JointAmplitude(
        kernel=Field2D(grid_s=grid, grid_i=grid, values=raw / norm),
        norm_factor=norm,
    )

    raw_ja = JointAmplitude(kernel=raw_field, norm_factor=1.0, normalized=False)
    qs_flat, qe_flat = _cells(record.grid_sigma, record.grid_eta)
    forward = lowgain_map_complex(raw_ja, gain, seed, qs_flat, qe_flat).reshape(
        record.s.shape
    )
    residual = float(np.linalg.norm(forward - record.s) / np.linalg.norm(record.s))

    diagnostics = {
        "mask": mask,
        "masked_fraction": float(1.0 - np.count_nonzero(mask) / mask.size),
        "raw": raw,
        "residual": residual,
        "nyquist_ok": nyquist_ok,
    }
    return rec, diagnostics


def _grid_nyquist_ok(
    kernel_grid: ModeGrid, grid_sigma: ModeGrid, grid_eta: ModeGrid
) -> bool:
    """Kernel-free sampling check: distinct target grid points must remain
    distinguishable, i.e. the q spacings resolve coordinate differences up to
    the grid span.  The canonical conjugate grids pass with equality."""
    limit = 2.0 * np.pi / kernel_grid.span * (1.0 + 1e-9)
    return bool(grid_sigma.spacing <= limit and grid_eta.spacing <= limit)


def fidelity(
    a: JointAmplitude, b: JointAmplitude, mask: np.ndarray | None = None
) -> float:
    """Normalized squared overlap |<A, B>|^2 / (<A, A> <B, B>) over unmasked cells.

    Insensitive to a global phase; sensitive to any relative phase structure.
    """
    if a.grid_s != b.grid_s or a.grid_i != b.grid_i:
        raise ValueError("fidelity requires kernels on the same grids")
    av = a.values
    bv = b.values
    if mask is not None:
        if not np.any(mask):
            raise ValueError("fidelity mask excludes every cell")
        av = av[mask]
        bv = bv[mask]
    overlap = np.vdot(av, bv)
    na = np.vdot(av, av).real
    nb = np.vdot(bv, bv).real
    if na == 0.0 or nb == 0.0:
        raise ValueError("fidelity undefined for a vanishing kernel")
    return float(np.abs(overlap) ** 2 / (na * nb))


def apply_jitter_analytic(ja: JointAmplitude, noise: NoiseParams) -> JointAmplitude:
    """Attenuate a kernel by the Gaussian-jitter envelope.

    Multiplies pointwise by exp(-(k + k')^2 delta_eta / 4) *
    exp(-k'^2 delta_sigma / 4); the 1/4 follows from averaging exp(i u d)
    over P(d) proportional to exp(-d^2 / delta).  The output is flagged
    unnormalized unless both deltas vanish.
    """
    if noise.delta_eta == 0.0 and noise.delta_sigma == 0.0:
        return ja
    ks = ja.grid_s.points[:, None]
    ki = ja.grid_i.points[None, :]
    envelope = np.exp(
        -((ks + ki) ** 2) * noise.delta_eta / 4.0 - ki**2 * noise.delta_sigma / 4.0
    )
    kernel = Field2D(grid_s=ja.grid_s, grid_i=ja.grid_i, values=ja.values * envelope)
    return JointAmplitude(kernel=kernel, norm_factor=ja.norm_factor, normalized=False)


def make_lowgain_map(ja: JointAmplitude, gain: float, seed: SeedProfile):
    """Map callable (q_sigma, q_eta) -> complex values for the low-gain model."""

    def _map(qs: np.ndarray, qe: np.ndarray) -> np.ndarray:
        return lowgain_map_complex(ja, gain, seed, qs, qe)

    return _map


def apply_jitter_monte_carlo(
    map_fn,
    noise: NoiseParams,
    grid_sigma: ModeGrid,
    grid_eta: ModeGrid,
    gain_used: float,
    provenance: str = "lowgain",
) -> MeasurementRecord:
    """Average a measurement map over jittered phase settings.

    Per cell, ``mc_samples`` jitter pairs are drawn (delta_eta jitters the
    q_sigma coordinate, delta_sigma the q_eta coordinate, matching the
    analytic envelope of :func:`apply_jitter_analytic`) and the map is
    averaged with a fixed summation order; per-cell standard errors of both
    quadratures are recorded.  With both deltas zero the noiseless map is
    returned unchanged.

    Args:
        map_fn: callable (q_sigma_array, q_eta_array) -> complex array.
        noise: jitter parameters, including the RNG seed.
        grid_sigma: record grid for the seed-delay coordinate.
        grid_eta: record grid for the arm-delay coordinate.
        gain_used: recorded coupling magnitude.
        provenance: recorded model provenance.
    """
    qs_flat, qe_flat = _cells(grid_sigma, grid_eta)
    shape = (grid_sigma.n_points, grid_eta.n_points)
    if noise.delta_eta == 0.0 and noise.delta_sigma == 0.0:
        values = np.asarray(map_fn(qs_flat, qe_flat)).reshape(shape)
        zeros = np.zeros(shape)
        return MeasurementRecord(
            grid_sigma=grid_sigma,
            grid_eta=grid_eta,
            s=values,
            gain_used=gain_used,
            provenance=provenance,
            rng_algorithm=RNG_ALGORITHM,
            rng_seed=noise.rng_seed,
            noise=noise,
            se_re=zeros,
            se_im=zeros,
        )

    rng = np.random.default_rng(noise.rng_seed)
    scale_sigma_coord = np.sqrt(noise.delta_eta / 2.0)
    scale_eta_coord = np.sqrt(noise.delta_sigma / 2.0)
    n_cells = len(qs_flat)
    mc = noise.mc_samples
    mean = np.empty(n_cells, dtype=np.complex128)
    se_re = np.empty(n_cells)
    se_im = np.empty(n_cells)
    for c in range(n_cells):
        d_sigma = rng.normal(0.0, scale_sigma_coord, mc)
        d_eta = rng.normal(0.0, scale_eta_coord, mc)
        vals = np.asarray(map_fn(qs_flat[c] + d_sigma, qe_flat[c] + d_eta))
        mean[c] = np.mean(vals)
        if mc > 1:
            se_re[c] = np.std(vals.real, ddof=1) / np.sqrt(mc)
            se_im[c] = np.std(vals.imag, ddof=1) / np.sqrt(mc)
        else:
            se_re[c] = 0.0
            se_im[c] = 0.0
    return MeasurementRecord(
        grid_sigma=grid_sigma,
        grid_eta=grid_eta,
        s=mean.reshape(shape),
        gain_used=gain_used,
        provenance=provenance,
        rng_algorithm=RNG_ALGORITHM,
        rng_seed=noise.rng_seed,
        noise=noise,
        se_re=se_re.reshape(shape),
        se_im=se_im.reshape(shape),
    )


@dataclass(frozen=True)
class NyquistReport:
    """Sampling assessment of a record grid pair against a kernel."""

    passed: bool
    dq_ok_sigma: bool
    dq_ok_eta: bool
    span_ok: bool
    required_dq_sigma: float
    required_dq_eta: float
    dq_sigma: float
    dq_eta: float
    boundary_ratio: float


def nyquist_check(
    ja: JointAmplitude,
    grid_sigma: ModeGrid,
    grid_eta: ModeGrid,
    seed: SeedProfile | None = None,
) -> NyquistReport:
    """Check that a settings grid can sample the kernel's map without aliasing.

    The per-axis frequency extents are the smallest symmetric intervals
    holding all but 1e-6 of the seed-weighted kernel mass: the q_sigma
    coordinate phases both axes (frequency k + k'), the q_eta coordinate the
    idler axis (frequency k').  The grid passes when each spacing is at most
    pi over the extent and the grid span contains the map support at the
    1e-4 amplitude level.
    """
    weight_i = np.ones(ja.grid_i.n_points)
    weight_s = np.ones(ja.grid_s.n_points)
    if seed is not None:
        if seed.grid != ja.grid_i or seed.grid != ja.grid_s:
            raise ValueError("seed-weighted check requires seed on both kernel grids")
        weight_i = np.abs(seed.alpha.values)
        weight_s = weight_i
    mass = np.abs(ja.values) ** 2 * np.outer(weight_s**2, weight_i**2)
    total = float(np.sum(mass))
    if total == 0.0:
        raise ValueError("kernel mass vanishes; nothing to check")

    ks = ja.grid_s.points[:, None]
    ki = ja.grid_i.points[None, :]
    k_u = _mass_extent(np.abs(ks + ki).ravel(), mass.ravel(), total)
    k_p = _mass_extent(np.abs(np.broadcast_to(ki, mass.shape)).ravel(), mass.ravel(), total)
    required_sigma = np.pi / k_u if k_u > 0 else np.inf
    required_eta = np.pi / k_p if k_p > 0 else np.inf
    dq_ok_sigma = grid_sigma.spacing <= required_sigma
    dq_ok_eta = grid_eta.spacing <= required_eta

    w = ja.values * np.outer(weight_s, weight_i) * ja.kernel.measure
    qs_flat, qe_flat = _cells(grid_sigma, grid_eta)
    amp = np.abs(
        map_points(w, ja.grid_s.points, ja.grid_i.points, qs_flat, qs_flat + qe_flat)
    ).reshape(grid_sigma.n_points, grid_eta.n_points)
    peak = float(np.max(amp))
    edge = float(
        max(amp[0].max(), amp[-1].max(), amp[:, 0].max(), amp[:, -1].max())
    )
    boundary_ratio = edge / peak if peak > 0 else 0.0
    span_ok = boundary_ratio <= 1e-4

    return NyquistReport(
        passed=bool(dq_ok_sigma and dq_ok_eta and span_ok),
        dq_ok_sigma=bool(dq_ok_sigma),
        dq_ok_eta=bool(dq_ok_eta),
        span_ok=bool(span_ok),
        required_dq_sigma=float(required_sigma),
        required_dq_eta=float(required_eta),
        dq_sigma=grid_sigma.spacing,
        dq_eta=grid_eta.spacing,
        boundary_ratio=boundary_ratio,
    )


def _mass_extent(coords: np.ndarray, mass: np.ndarray, total: float) -> float:
    """Smallest K with sum(mass[|coords| <= K]) >= (1 - 1e-6) * total."""
    order = np.argsort(coords)
    cum = np.cumsum(mass[order])
    idx = int(np.searchsorted(cum, (1.0 - 1e-6) * total))
    idx = min(idx, len(coords) - 1)
    return float(coords[order][idx])


def record_to_json(record: MeasurementRecord, run_info: dict | None = None) -> str:
    """Serialize a MeasurementRecord to the toolkit's record JSON format.

    ``run_info`` optionally embeds provenance (toolkit version, config hash).
    """
    rng = (
        json.dumps({"algorithm": record.rng_algorithm, "seed": record.rng_seed})
        if record.rng_algorithm is not None
        else "null"
    )
    noise = (
        json.dumps(
            {
                "delta_eta": record.noise.delta_eta,
                "delta_sigma": record.noise.delta_sigma,
                "mc_samples": record.noise.mc_samples,
            }
        )
        if record.noise is not None
        else "null"
    )
    parts = [
        f'"grid_sigma": {_grid_json(record.grid_sigma)}',
        f'"grid_eta": {_grid_json(record.grid_eta)}',
        f'"re": {_matrix_json(record.s.real)}',
        f'"im": {_matrix_json(record.s.imag)}',
        f'"gain_used": {format(record.gain_used, ".17g")}',
        f'"provenance": {json.dumps(record.provenance)}',
        f'"rng": {rng}',
        f'"noise": {noise}',
    ]
    if run_info is not None:
        parts.append('"run": ' + json.dumps(run_info, sort_keys=True))
    return "{" + ", ".join(parts) + "}"


def record_from_json(text: str) -> MeasurementRecord:
    """Parse a MeasurementRecord from JSON (external files included)."""
    d = json.loads(text)
    noise = None
    if d.get("noise"):
        nd = d["noise"]
        noise = NoiseParams(
            delta_eta=float(nd.get("delta_eta", 0.0)),
            delta_sigma=float(nd.get("delta_sigma", 0.0)),
            mc_samples=int(nd.get("mc_samples", 1)),
            rng_seed=int(d["rng"]["seed"]) if d.get("rng") else 0,
        )
    rng = d.get("rng") or {}
    return MeasurementRecord(
        grid_sigma=grid_from_dict(d["grid_sigma"]),
        grid_eta=grid_from_dict(d["grid_eta"]),
        s=np.asarray(d["re"], dtype=float) + 1j * np.asarray(d["im"], dtype=float),
        gain_used=float(d["gain_used"]),
        provenance=d.get("provenance", "external-file"),
        rng_algorithm=rng.get("algorithm"),
        rng_seed=rng.get("seed"),
        noise=noise,
    )
