import json

import numpy as np
import pytest

from settomo.errors import DegenerateKernelError
from settomo.grids import Field1D, Field2D, make_grid
from settomo.jsa import (
    CouplingParams,
    JointAmplitude,
    PhaseMatchingFunction,
    PumpProfile,
    build_jsa_pump_phasematch,
    gaussian_jsa,
    joint_amplitude_from_json,
    joint_amplitude_to_json,
    normalize,
)
from settomo.schmidt import schmidt_decompose, schmidt_number


def mehler_lambdas(sigma_plus, sigma_minus, n):
    """Analytic Schmidt spectrum of the unchirped double Gaussian."""
    mu = ((sigma_minus - sigma_plus) / (sigma_minus + sigma_plus)) ** 2
    return (1 - mu) * mu ** np.arange(n)


class TestGaussianJsa:
    def test_equal_widths_separable(self):
        grid = make_grid(0, 16, 96)
        ja = gaussian_jsa(1.3, 1.3, 0.0, grid, grid)
        sd = schmidt_decompose(ja)
        assert schmidt_number(sd) == pytest.approx(1.0, abs=1e-6)

    def test_mehler_spectrum(self, gauss128):
        sd = schmidt_decompose(gauss128)
        expected = mehler_lambdas(1.0, 3.0, 6)
        assert np.max(np.abs(sd.lambdas[:6] - expected)) < 1e-6

    def test_unit_norm(self):
        grid = make_grid(0.2, 20, 64)
        for sp, sm, c in [(0.5, 2.0, 0.0), (1.0, 3.0, 0.5), (2.0, 0.7, -1.1)]:
            ja = gaussian_jsa(sp, sm, c, grid, grid)
            norm = np.sum(np.abs(ja.values) ** 2) * ja.kernel.measure
            assert norm == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("sp,sm", [(0.0, 1.0), (1.0, -2.0)])
    def test_invalid_widths(self, sp, sm):
        grid = make_grid(0, 8, 16)
        with pytest.raises(ValueError):
            gaussian_jsa(sp, sm, 0.0, grid, grid)


class TestNormalize:
    def test_idempotent(self):
        grid = make_grid(0, 8, 32)
        ja = gaussian_jsa(1.0, 2.0, 0.3, grid, grid)
        again = normalize(ja.kernel)
        assert np.max(np.abs(again.values - ja.values)) < 1e-15
        assert again.norm_factor == pytest.approx(1.0, abs=1e-14)

    def test_reports_scale(self):
        grid = make_grid(0, 8, 32)
        ja = gaussian_jsa(1.0, 2.0, 0.0, grid, grid)
        scaled = Field2D(grid_s=grid, grid_i=grid, values=4.0 * ja.values)
        out = normalize(scaled)
        assert out.norm_factor == pytest.approx(4.0, rel=1e-12)
        assert np.max(np.abs(out.values - ja.values)) < 1e-14

    def test_zero_kernel_raises(self):
        grid = make_grid(0, 8, 8)
        zero = Field2D(grid_s=grid, grid_i=grid, values=np.zeros((8, 8)))
        with pytest.raises(DegenerateKernelError):
            normalize(zero)


class TestPumpPhasematch:
    def _pump(self, fn, chirp=0.0, span=80.0, n=801):
        grid = make_grid(0.0, span, n)
        return PumpProfile(
            amplitude=Field1D(grid=grid, values=fn(grid.points)), chirp=chirp
        )

    def _matched_pump(self, fn, kernel_grid, chirp=0.0):
        # pump sampled on the lattice of all k + k' sums, so interpolation is exact
        n = 2 * kernel_grid.n_points
        grid = make_grid(
            2.0 * kernel_grid.center + 0.5 * kernel_grid.spacing,
            2.0 * kernel_grid.span,
            n,
        )
        return PumpProfile(
            amplitude=Field1D(grid=grid, values=fn(grid.points)), chirp=chirp
        )

    def test_flat_pump_separable_pm(self):
        grid = make_grid(0, 16, 64)
        k = grid.points
        pm_vals = np.outer(np.exp(-(k**2) / 2), np.exp(-(k**2) / 2))
        pm = PhaseMatchingFunction(values=Field2D(grid_s=grid, grid_i=grid, values=pm_vals))
        pump = self._pump(lambda u: np.ones_like(u))
        ja = build_jsa_pump_phasematch(pump, pm)
        sd = schmidt_decompose(ja)
        assert schmidt_number(sd) == pytest.approx(1.0, abs=1e-6)

    def test_gaussian_pump_times_antidiagonal_pm_matches_fixture(self):
        grid = make_grid(0, 24, 96)
        k = grid.points
        sp, sm = 1.0, 3.0
        pm_vals = np.exp(-((k[:, None] - k[None, :]) ** 2) / (4 * sm**2))
        pm = PhaseMatchingFunction(values=Field2D(grid_s=grid, grid_i=grid, values=pm_vals))
        pump = self._matched_pump(lambda u: np.exp(-(u**2) / (4 * sp**2)), grid)
        ja = build_jsa_pump_phasematch(pump, pm)
        ref = gaussian_jsa(sp, sm, 0.0, grid, grid)
        assert np.max(np.abs(ja.values - ref.values)) < 1e-10
        sd = schmidt_decompose(ja)
        assert np.max(np.abs(sd.lambdas[:5] - mehler_lambdas(sp, sm, 5))) < 1e-5

    def test_pump_chirp_applied_on_sum_variable(self):
        grid = make_grid(0, 12, 48)
        k = grid.points
        pm_vals = np.exp(-((k[:, None] - k[None, :]) ** 2) / 8.0)
        pm = PhaseMatchingFunction(values=Field2D(grid_s=grid, grid_i=grid, values=pm_vals))
        pump = self._matched_pump(lambda u: np.exp(-(u**2) / 4.0), grid, chirp=0.7)
        ja = build_jsa_pump_phasematch(pump, pm)
        ref = gaussian_jsa(1.0, np.sqrt(2.0), 0.7, grid, grid)
        assert np.max(np.abs(ja.values - ref.values)) < 1e-10

    def test_zero_pump_raises(self):
        grid = make_grid(0, 8, 16)
        pm = PhaseMatchingFunction(
            values=Field2D(grid_s=grid, grid_i=grid, values=np.ones((16, 16)))
        )
        pump = self._pump(lambda u: np.zeros_like(u))
        with pytest.raises(DegenerateKernelError):
            build_jsa_pump_phasematch(pump, pm)

    def test_pump_not_evaluable_raises(self):
        grid = make_grid(0, 8, 16)
        pm = PhaseMatchingFunction(
            values=Field2D(grid_s=grid, grid_i=grid, values=np.ones((16, 16)))
        )
        pump = self._pump(lambda u: np.ones_like(u), span=4.0, n=41)
        with pytest.raises(ValueError):
            build_jsa_pump_phasematch(pump, pm)

    def test_rescaling_invariance(self):
        grid = make_grid(0, 16, 32)
        k = grid.points
        pm_vals = np.exp(-((k[:, None] - k[None, :]) ** 2) / 8.0)
        pm = PhaseMatchingFunction(values=Field2D(grid_s=grid, grid_i=grid, values=pm_vals))
        pm3 = PhaseMatchingFunction(
            values=Field2D(grid_s=grid, grid_i=grid, values=3.0 * pm_vals)
        )
        pump = self._pump(lambda u: np.exp(-(u**2) / 4.0))
        pump2 = self._pump(lambda u: 2.0 * np.exp(-(u**2) / 4.0))
        a = build_jsa_pump_phasematch(pump, pm)
        b = build_jsa_pump_phasematch(pump2, pm3)
        assert np.max(np.abs(a.values - b.values)) < 1e-12
        assert b.norm_factor == pytest.approx(6.0 * a.norm_factor, rel=1e-12)


class TestCouplingParams:
    def test_consistent_metadata(self):
        cp = CouplingParams(gain=0.06, gain_phase=0.1, chi=0.02, pump_amp=3.0)
        assert cp.gain == 0.06

    def test_inconsistent_metadata_raises(self):
        with pytest.raises(ValueError):
            CouplingParams(gain=0.5, chi=0.02, pump_amp=3.0)

    def test_negative_gain_raises(self):
        with pytest.raises(ValueError):
            CouplingParams(gain=-0.1)

    def test_effective_kernel_rotation(self):
        grid = make_grid(0, 8, 16)
        ja = gaussian_jsa(1.0, 2.0, 0.0, grid, grid)
        cp = CouplingParams(gain=0.1, gain_phase=0.7)
        rotated = cp.effective_kernel(ja)
        assert np.max(np.abs(rotated.values - np.exp(0.7j) * ja.values)) < 1e-15


class TestJointAmplitudeSerialization:
    def test_round_trip_with_metadata(self):
        grid = make_grid(0.3, 9.0, 12)
        ja = gaussian_jsa(0.8, 1.9, 0.2, grid, grid)
        cp = CouplingParams(gain=0.05, gain_phase=0.2, chi=0.01, pump_amp=5.0)
        text = joint_amplitude_to_json(ja, cp)
        back, cp_back = joint_amplitude_from_json(text)
        assert np.array_equal(back.values, ja.values)
        assert back.grid_s == ja.grid_s
        assert cp_back == cp

    def test_metadata_block_keys(self):
        grid = make_grid(0, 4, 4)
        ja = gaussian_jsa(1.0, 1.0, 0.0, grid, grid)
        d = json.loads(joint_amplitude_to_json(ja))
        assert set(d["meta"]) == {
            "norm_factor",
            "normalized",
            "gain",
            "gain_phase",
            "chi",
            "pump_amp",
        }

    def test_unnormalized_kernel_rejected(self):
        grid = make_grid(0, 4, 4)
        with pytest.raises(ValueError):
            JointAmplitude(
                kernel=Field2D(grid_s=grid, grid_i=grid, values=np.ones((4, 4))),
                normalized=True,
            )
