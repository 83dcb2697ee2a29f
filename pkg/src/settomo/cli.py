"""Config-driven command line front end.

One JSON config file describes a scenario; outputs are CSV tables, JSON
summaries and persisted kernels/records, all byte-reproducible for a given
config and seed (run timing goes to stdout, never into output files).

Exit codes: 0 success, 2 config error, 3 numeric error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConvergenceError, DegenerateKernelError, ReconstructionError
from .grids import Field1D, Field2D, ModeGrid, field2d_from_json, grid_from_dict
from .jsa import (
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
from .oracle import build_transform, oracle_expectations
from .reconstruct import (
    MeasurementRecord,
    NoiseParams,
    apply_jitter_analytic,
    apply_jitter_monte_carlo,
    fidelity,
    invert_to_modal,
    make_lowgain_map,
    nyquist_check,
    record_from_json,
    record_to_json,
    sample_signal_map,
)
from .schmidt import schmidt_decompose, schmidt_number, schmidt_to_json
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

SCENARIOS = (
    "jsa",
    "schmidt",
    "direct",
    "interf",
    "reconstruct",
    "noise-sweep",
    "gain-sweep",
    "oracle-check",
)

SCHEMA_VERSION = 1

_TOP_KEYS = {
    "schema_version",
    "scenario",
    "seed",
    "out_dir",
    "gain",
    "gain_phase",
    "tol",
    "model",
    "kernel",
    "seed_beam",
    "grid_sigma",
    "grid_eta",
    "record",
    "truth_kernel",
    "target_grid",
    "reg_eps",
    "noise_sweep",
    "gains",
    "settings",
    "trials",
    "max_points",
    "max_gain",
}

_REQUIRED = {
    "jsa": ["kernel"],
    "schmidt": ["kernel"],
    "direct": ["kernel", "seed_beam", "gain"],
    "interf": ["kernel", "seed_beam", "gain", "grid_sigma", "grid_eta"],
    "reconstruct": ["seed_beam", "gain"],
    "noise-sweep": ["kernel", "seed_beam", "gain", "grid_sigma", "grid_eta", "noise_sweep"],
    "gain-sweep": ["kernel", "seed_beam", "gains", "settings"],
    "oracle-check": [],
}

_DEFAULTS = {
    "seed": 0,
    "out_dir": "out",
    "gain_phase": 0.0,
    "tol": 1e-12,
    "model": "lowgain",
    "reg_eps": 1e-3,
    "trials": 100,
    "max_points": 8,
    "max_gain": 2.0,
}


class ConfigError(Exception):
    """Raised with one message per detected problem."""

    def __init__(self, errors: list[str]):
        super().__init__("; ".join(errors))
        self.errors = errors


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return str(x)


def _check_grid(errors: list[str], value, label: str) -> None:
    if not isinstance(value, dict):
        errors.append(f"{label}: expected an object with center/span/n")
        return
    for key in ("center", "span", "n"):
        if key not in value:
            errors.append(f"{label}: missing key {key!r}")
    for key in value:
        if key not in ("center", "span", "n"):
            errors.append(f"{label}: unknown key {key!r}")
    if isinstance(value.get("span"), (int, float)) and value["span"] <= 0:
        errors.append(f"{label}: span must be positive")
    if isinstance(value.get("n"), int) and value["n"] < 2:
        errors.append(f"{label}: n must be >= 2")


def _check_kernel(errors: list[str], value, label: str) -> None:
    if not isinstance(value, dict) or len(value) != 1:
        errors.append(f"{label}: expected exactly one of file/gaussian/pump_phasematch")
        return
    kind = next(iter(value))
    if kind == "file":
        if not isinstance(value["file"], str):
            errors.append(f"{label}.file: expected a path string")
    elif kind == "gaussian":
        g = value["gaussian"]
        if not isinstance(g, dict):
            errors.append(f"{label}.gaussian: expected an object")
            return
        for key in ("sigma_plus", "sigma_minus", "chirp", "grid"):
            if key not in g:
                errors.append(f"{label}.gaussian: missing key {key!r}")
        for key in g:
            if key not in ("sigma_plus", "sigma_minus", "chirp", "grid"):
                errors.append(f"{label}.gaussian: unknown key {key!r}")
        if "grid" in g:
            _check_grid(errors, g["grid"], f"{label}.gaussian.grid")
    elif kind == "pump_phasematch":
        p = value["pump_phasematch"]
        if not isinstance(p, dict):
            errors.append(f"{label}.pump_phasematch: expected an object")
            return
        for key in ("pump_grid", "pump_re", "pump_im", "chirp", "pm_file"):
            if key not in p:
                errors.append(f"{label}.pump_phasematch: missing key {key!r}")
        for key in p:
            if key not in ("pump_grid", "pump_re", "pump_im", "chirp", "pm_file"):
                errors.append(f"{label}.pump_phasematch: unknown key {key!r}")
    else:
        errors.append(f"{label}: unknown kernel kind {kind!r}")


def _check_seed_beam(errors: list[str], value) -> None:
    if not isinstance(value, dict) or len(value) != 1:
        errors.append("seed_beam: expected exactly one of flat/gaussian/point")
        return
    kind = next(iter(value))
    allowed = {
        "flat": {"amplitude"},
        "gaussian": {"center", "sigma", "amplitude"},
        "point": {"k0", "weight"},
    }
    if kind not in allowed:
        errors.append(f"seed_beam: unknown seed kind {kind!r}")
        return
    body = value[kind]
    if not isinstance(body, dict):
        errors.append(f"seed_beam.{kind}: expected an object")
        return
    for key in body:
        if key not in allowed[kind]:
            errors.append(f"seed_beam.{kind}: unknown key {key!r}")


def validate_config(cfg: dict) -> tuple[dict, list[str]]:
    """Schema-check a parsed config; returns (effective config, errors).

    All problems are collected and reported together; the effective config
    has defaults filled in.
    """
    errors: list[str] = []
    if not isinstance(cfg, dict):
        return {}, ["config root must be a JSON object"]
    for key in cfg:
        if key not in _TOP_KEYS:
            errors.append(f"unknown key {key!r}")
    if cfg.get("schema_version") != SCHEMA_VERSION:
        errors.append(f"schema_version must be {SCHEMA_VERSION}")
    scenario = cfg.get("scenario")
    if scenario not in SCENARIOS:
        errors.append(f"scenario must be one of {', '.join(SCENARIOS)}")
    effective = dict(_DEFAULTS)
    effective.update({k: v for k, v in cfg.items() if v is not None})

    if scenario in _REQUIRED:
        for key in _REQUIRED[scenario]:
            if key not in effective:
                errors.append(f"scenario {scenario!r} requires key {key!r}")
        if scenario == "reconstruct" and "record" not in effective:
            if "kernel" not in effective:
                errors.append(
                    "scenario 'reconstruct' requires 'record' or a 'kernel' "
                    "plus grids to generate one"
                )
            for key in ("grid_sigma", "grid_eta"):
                if key not in effective:
                    errors.append(f"scenario 'reconstruct' without a record requires {key!r}")
        if (
            scenario == "reconstruct"
            and "record" in effective
            and "truth_kernel" not in effective
            and "target_grid" not in effective
        ):
            errors.append(
                "scenario 'reconstruct' from a record file requires 'target_grid' "
                "or 'truth_kernel' to fix the output grid"
            )

    if "gain" in effective:
        gain = effective["gain"]
        if not isinstance(gain, (int, float)) or isinstance(gain, bool):
            errors.append("gain: expected a number")
        elif gain < 0:
            errors.append("gain: must be >= 0 (coupling magnitude invariant)")
    if "seed" in effective and (not isinstance(effective["seed"], int) or effective["seed"] < 0):
        errors.append("seed: expected a non-negative integer")
    if effective.get("model") not in ("exact", "lowgain"):
        errors.append("model: must be 'exact' or 'lowgain'")
    if "kernel" in effective:
        _check_kernel(errors, effective["kernel"], "kernel")
    if "truth_kernel" in effective:
        _check_kernel(errors, effective["truth_kernel"], "truth_kernel")
    if "seed_beam" in effective:
        _check_seed_beam(errors, effective["seed_beam"])
    for key in ("grid_sigma", "grid_eta"):
        if key in effective:
            _check_grid(errors, effective[key], key)
    if "record" in effective:
        rec = effective["record"]
        if not isinstance(rec, dict) or set(rec) != {"file"}:
            errors.append("record: expected an object with a single 'file' key")
    if "target_grid" in effective:
        _check_grid(errors, effective["target_grid"], "target_grid")
    if "noise_sweep" in effective:
        ns = effective["noise_sweep"]
        if not isinstance(ns, list) or not ns:
            errors.append("noise_sweep: expected a non-empty list")
        else:
            for idx, entry in enumerate(ns):
                if not isinstance(entry, dict):
                    errors.append(f"noise_sweep[{idx}]: expected an object")
                    continue
                for key in entry:
                    if key not in ("delta_eta", "delta_sigma", "mc_samples"):
                        errors.append(f"noise_sweep[{idx}]: unknown key {key!r}")
    if "gains" in effective:
        g = effective["gains"]
        ok_list = isinstance(g, list) and g and all(isinstance(x, (int, float)) for x in g)
        ok_log = isinstance(g, dict) and set(g) == {"log10_min", "log10_max", "n"}
        if not (ok_list or ok_log):
            errors.append("gains: expected a list of numbers or {log10_min, log10_max, n}")
    if "settings" in effective:
        st = effective["settings"]
        if not isinstance(st, dict) or not set(st) <= {"q_sigma", "q_eta", "theta"}:
            errors.append("settings: expected an object with q_sigma/q_eta/theta")
    return effective, errors


def _load_kernel(spec: dict, base: Path) -> JointAmplitude:
    kind = next(iter(spec))
    if kind == "file":
        path = base / spec["file"]
        ja, _ = joint_amplitude_from_json(path.read_text())
        return ja
    if kind == "gaussian":
        g = spec["gaussian"]
        grid = grid_from_dict(g["grid"])
        return gaussian_jsa(
            float(g["sigma_plus"]), float(g["sigma_minus"]), float(g["chirp"]), grid, grid
        )
    p = spec["pump_phasematch"]
    pump_grid = grid_from_dict(p["pump_grid"])
    amp = np.asarray(p["pump_re"], dtype=float) + 1j * np.asarray(p["pump_im"], dtype=float)
    pump = PumpProfile(
        amplitude=Field1D(grid=pump_grid, values=amp), chirp=float(p["chirp"])
    )
    pm = PhaseMatchingFunction(
        values=field2d_from_json((base / p["pm_file"]).read_text())
    )
    return build_jsa_pump_phasematch(pump, pm)


def _build_seed(spec: dict, grid: ModeGrid) -> SeedProfile:
    kind = next(iter(spec))
    body = spec[kind]
    if kind == "flat":
        return flat_seed(grid, float(body.get("amplitude", 1.0)))
    if kind == "gaussian":
        return gaussian_seed(
            grid,
            float(body.get("center", 0.0)),
            float(body["sigma"]),
            float(body.get("amplitude", 1.0)),
        )
    return point_seed(grid, float(body["k0"]), float(body.get("weight", 1.0)))


class _Writer:
    """Collects output files and writes them together (no partial outputs)."""

    def __init__(self, out_dir: Path, header: str):
        self.out_dir = out_dir
        self.header = header
        self.files: dict[str, str] = {}

    def csv(self, name: str, columns: list[str], rows) -> None:
        lines = [f"# {self.header}", ",".join(columns)]
        for row in rows:
            lines.append(",".join(_fmt(x) for x in row))
        self.files[name] = "\n".join(lines) + "\n"

    def json(self, name: str, text: str) -> None:
        self.files[name] = text + "\n"

    def flush(self) -> None:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        for name in sorted(self.files):
            (self.out_dir / name).write_text(self.files[name])


def _summary(cfg_hash: str, scenario: str, body: dict) -> str:
    head = {
        "schema_version": SCHEMA_VERSION,
        "scenario": scenario,
        "toolkit_version": __version__,
        "config_sha256": cfg_hash,
    }
    head.update(body)
    return json.dumps(head, indent=2, sort_keys=True)


def _gamma3_slope(gains: np.ndarray, diffs: np.ndarray) -> float:
    good = diffs > 0
    return float(np.polyfit(np.log(gains[good]), np.log(diffs[good]), 1)[0])


def run_scenario(cfg: dict, cfg_hash: str, out_dir: Path, base: Path) -> dict:
    """Execute a validated config; returns the summary dict written to disk."""
    scenario = cfg["scenario"]
    rng_seed = int(cfg["seed"])
    header = f"settomo {__version__} config_sha256={cfg_hash}"
    writer = _Writer(out_dir, header)
    run_info = {"toolkit_version": __version__, "config_sha256": cfg_hash}
    summary: dict = {"seed": rng_seed}

    kernel = None
    if "kernel" in cfg:
        kernel = _load_kernel(cfg["kernel"], base)
        if cfg.get("gain_phase"):
            coupling = CouplingParams(
                gain=float(cfg.get("gain", 0.0)), gain_phase=float(cfg["gain_phase"])
            )
            kernel = coupling.effective_kernel(kernel)

    if scenario == "jsa":
        ks = kernel.grid_s.points
        ki = kernel.grid_i.points
        rows = [
            (ks[i], ki[j], kernel.values[i, j].real, kernel.values[i, j].imag)
            for i in range(len(ks))
            for j in range(len(ki))
        ]
        writer.csv("jsa.csv", ["k_s", "k_i", "re", "im"], rows)
        writer.json("kernel.json", joint_amplitude_to_json(kernel, run_info=run_info))
        sd = schmidt_decompose(kernel, tol=float(cfg["tol"]))
        summary.update(
            {
                "norm_factor": kernel.norm_factor,
                "schmidt_number": schmidt_number(sd),
                "lambdas": sd.lambdas[:10].tolist(),
            }
        )

    elif scenario == "schmidt":
        sd = schmidt_decompose(kernel, tol=float(cfg["tol"]))
        rows = [(n, sd.sqrt_lambdas[n], sd.lambdas[n]) for n in range(sd.rank)]
        writer.csv("schmidt.csv", ["n", "sqrt_lambda", "lambda"], rows)
        writer.json("modes.json", schmidt_to_json(sd))
        summary.update(
            {
                "schmidt_number": schmidt_number(sd),
                "lambdas": sd.lambdas[:10].tolist(),
                "sum_lambdas": float(np.sum(sd.lambdas)),
                "dropped_weight": sd.dropped_weight,
            }
        )

    elif scenario == "direct":
        gain = float(cfg["gain"])
        seed_profile = _build_seed(cfg["seed_beam"], kernel.grid_i)
        sd = schmidt_decompose(kernel, tol=float(cfg["tol"]))
        exact = stimulated_spectrum(sd, gain, seed_profile)
        low = lowgain_stimulated_spectrum(kernel, gain, seed_profile)
        k0 = float(kernel.grid_i.points[np.argmax(np.abs(seed_profile.alpha.values))])
        intensity = abs(seed_profile.integrated_amplitude) ** 2
        sipe = sipe_limit_spectrum(kernel, gain, k0, intensity)
        ks = kernel.grid_s.points
        rows = list(zip(ks, exact, low, sipe))
        writer.csv(
            "direct.csv",
            ["k_s", "intensity_exact", "intensity_lowgain", "intensity_sipe"],
            rows,
        )
        summary.update(
            {
                "n_total_exact": total_signal_photons(sd, gain, seed_profile),
                "n_spontaneous": float(
                    np.sum(spontaneous_spectrum(sd, gain)) * kernel.grid_s.spacing
                ),
                "sipe_k0": k0,
                "sipe_intensity": intensity,
            }
        )

    elif scenario == "interf":
        gain = float(cfg["gain"])
        seed_profile = _build_seed(cfg["seed_beam"], kernel.grid_i)
        grid_sigma = grid_from_dict(cfg["grid_sigma"])
        grid_eta = grid_from_dict(cfg["grid_eta"])
        model = (
            schmidt_decompose(kernel, tol=float(cfg["tol"]))
            if cfg["model"] == "exact"
            else kernel
        )
        record = sample_signal_map(model, gain, seed_profile, grid_sigma, grid_eta)
        qs = grid_sigma.points
        qe = grid_eta.points
        rows = [
            (qs[m], qe[n], record.s[m, n].real, record.s[m, n].imag)
            for m in range(len(qs))
            for n in range(len(qe))
        ]
        writer.csv("interf.csv", ["q_sigma", "q_eta", "re_S", "im_S"], rows)
        writer.json("record.json", record_to_json(record, run_info=run_info))
        summary.update({"model": cfg["model"], "max_abs_signal": float(np.max(np.abs(record.s)))})

    elif scenario == "reconstruct":
        gain = float(cfg["gain"])
        if "record" in cfg:
            record = record_from_json((base / cfg["record"]["file"]).read_text())
            truth = _load_kernel(cfg["truth_kernel"], base) if "truth_kernel" in cfg else None
            seed_grid = truth.grid_i if truth is not None else grid_from_dict(cfg["target_grid"])
            seed_profile = _build_seed(cfg["seed_beam"], seed_grid)
        else:
            grid_sigma = grid_from_dict(cfg["grid_sigma"])
            grid_eta = grid_from_dict(cfg["grid_eta"])
            seed_profile = _build_seed(cfg["seed_beam"], kernel.grid_i)
            model = (
                schmidt_decompose(kernel, tol=float(cfg["tol"]))
                if cfg["model"] == "exact"
                else kernel
            )
            record = sample_signal_map(model, gain, seed_profile, grid_sigma, grid_eta)
            truth = _load_kernel(cfg["truth_kernel"], base) if "truth_kernel" in cfg else kernel
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            recovered, diag = invert_to_modal(
                record, seed_profile, gain, reg_eps=float(cfg["reg_eps"])
            )
        nyq = nyquist_check(recovered, record.grid_sigma, record.grid_eta, seed=seed_profile)
        writer.json("recovered_kernel.json", joint_amplitude_to_json(recovered, run_info=run_info))
        ks = recovered.grid_s.points
        rows = [
            (ks[i], ks[j], recovered.values[i, j].real, recovered.values[i, j].imag)
            for i in range(len(ks))
            for j in range(len(ks))
        ]
        writer.csv("reconstruct.csv", ["k_s", "k_i", "re_rec", "im_rec"], rows)
        summary.update(
            {
                "fidelity": fidelity(truth, recovered, mask=diag["mask"])
                if truth is not None
                else None,
                "masked_fraction": diag["masked_fraction"],
                "residual": diag["residual"],
                "nyquist_passed": nyq.passed,
                "required_dq_sigma": nyq.required_dq_sigma,
                "required_dq_eta": nyq.required_dq_eta,
            }
        )

    elif scenario == "noise-sweep":
        gain = float(cfg["gain"])
        seed_profile = _build_seed(cfg["seed_beam"], kernel.grid_i)
        grid_sigma = grid_from_dict(cfg["grid_sigma"])
        grid_eta = grid_from_dict(cfg["grid_eta"])
        map_fn = make_lowgain_map(kernel, gain, seed_profile)
        rows = []
        fracs = []
        peaks = []
        for entry in cfg["noise_sweep"]:
            noise = NoiseParams(
                delta_eta=float(entry.get("delta_eta", 0.0)),
                delta_sigma=float(entry.get("delta_sigma", 0.0)),
                mc_samples=int(entry.get("mc_samples", 1000)),
                rng_seed=rng_seed,
            )
            mc = apply_jitter_monte_carlo(
                map_fn, noise, grid_sigma, grid_eta, gain_used=gain
            )
            analytic = sample_signal_map(
                apply_jitter_analytic(kernel, noise),
                gain,
                seed_profile,
                grid_sigma,
                grid_eta,
            )
            diff = np.abs(mc.s - analytic.s)
            se = np.sqrt(mc.se_re**2 + mc.se_im**2)
            frac = float(np.mean(diff <= 3.0 * se + 1e-300))
            fracs.append(frac)
            peaks.append(float(np.max(np.abs(analytic.s))))
            rows.append(
                (
                    noise.delta_eta,
                    noise.delta_sigma,
                    noise.mc_samples,
                    frac,
                    float(np.max(diff)),
                    float(np.mean(se)),
                )
            )
        writer.csv(
            "noise.csv",
            ["delta_eta", "delta_sigma", "mc_samples", "frac_within_3se", "max_abs_diff", "mean_se"],
            rows,
        )
        summary.update(
            {
                "min_frac_within_3se": min(fracs),
                "analytic_peaks": peaks,
            }
        )

    elif scenario == "gain-sweep":
        seed_profile = _build_seed(cfg["seed_beam"], kernel.grid_i)
        st = cfg["settings"]
        settings = InterferometerSettings(
            q_sigma=float(st.get("q_sigma", 0.0)),
            q_eta=float(st.get("q_eta", 0.0)),
            theta=float(st.get("theta", 0.0)),
        )
        g = cfg["gains"]
        if isinstance(g, dict):
            gains = np.logspace(float(g["log10_min"]), float(g["log10_max"]), int(g["n"]))
        else:
            gains = np.asarray([float(x) for x in g])
        sd = schmidt_decompose(kernel, tol=float(cfg["tol"]))
        rows = []
        diffs = []
        for gval in gains:
            m_ex = interferometric_signal_exact(sd, float(gval), seed_profile, settings)
            m_lg = interferometric_signal_lowgain(kernel, float(gval), seed_profile, settings)
            diffs.append(abs(m_ex - m_lg))
            rows.append((float(gval), m_ex, m_lg, abs(m_ex - m_lg)))
        writer.csv(
            "gain_sweep.csv", ["gain", "signal_exact", "signal_lowgain", "abs_diff"], rows
        )
        summary.update({"gamma3_slope": _gamma3_slope(gains, np.asarray(diffs))})

    elif scenario == "oracle-check":
        trials = int(cfg["trials"])
        max_points = int(cfg["max_points"])
        max_gain = float(cfg["max_gain"])
        rng = np.random.default_rng(rng_seed)
        rows = []
        worst = 0.0
        for trial in range(trials):
            n = int(rng.integers(2, max_points + 1))
            grid = ModeGrid(center=float(rng.uniform(-1, 1)), span=float(rng.uniform(1, 5)), n_points=n)
            vals = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
            ja = normalize(Field2D(grid_s=grid, grid_i=grid, values=vals))
            alpha = rng.normal(size=n) + 1j * rng.normal(size=n)
            seed_profile = SeedProfile(alpha=Field1D(grid=grid, values=alpha))
            gain = float(rng.uniform(0.0, max_gain))
            settings = InterferometerSettings(
                q_sigma=float(rng.uniform(-2, 2)),
                q_eta=float(rng.uniform(-2, 2)),
                theta=float(rng.uniform(0, 2 * np.pi)),
            )
            sd = schmidt_decompose(ja, tol=0.0)
            spec_vals = stimulated_spectrum(sd, gain, seed_profile)
            ntot = total_signal_photons(sd, gain, seed_profile)
            m_ex = interferometric_signal_exact(sd, gain, seed_profile, settings)
            transform = build_transform(ja, gain)
            disp = np.concatenate(
                [np.zeros(n), alpha * np.sqrt(grid.spacing)]
            )
            oe = oracle_expectations(transform, disp, settings)
            scale = max(np.max(np.abs(spec_vals)), np.max(np.abs(oe.signal_spectrum)), 1e-300)
            dev_spec = float(np.max(np.abs(spec_vals - oe.signal_spectrum)) / scale)
            dev_tot = abs(ntot - oe.n_total_signal) / max(abs(ntot), abs(oe.n_total_signal), 1e-300)
            dev_int = abs(m_ex - oe.n_diff_interferometric) / max(
                abs(m_ex), abs(oe.n_diff_interferometric), 1e-6 * scale, 1e-300
            )
            worst = max(worst, dev_spec, dev_tot, dev_int)
            rows.append((trial, n, gain, dev_spec, dev_tot, dev_int))
        writer.csv(
            "oracle.csv",
            ["trial", "n_points", "gain", "dev_spectrum", "dev_total", "dev_interf"],
            rows,
        )
        summary.update({"max_rel_dev": worst, "trials": trials})
        if worst > 1e-8:
            writer.json("summary.json", _summary(cfg_hash, scenario, summary))
            writer.flush()
            raise ConvergenceError(
                f"oracle-check exceeded tolerance: max relative deviation {worst}"
            )

    writer.json("summary.json", _summary(cfg_hash, scenario, summary))
    writer.flush()
    return summary


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="settomo",
        description="Stimulated emission tomography simulation and reconstruction",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SCENARIOS + ("validate",):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to the JSON config file")
        if name != "validate":
            p.add_argument("--out", default=None, help="output directory")
            p.add_argument("--seed", type=int, default=None, help="override the config seed")
    args = parser.parse_args(argv)

    config_path = Path(args.config)
    try:
        raw = config_path.read_bytes()
        cfg = json.loads(raw)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"config-error: {exc}", file=sys.stderr)
        return 2
    effective, errors = validate_config(cfg)

    if args.command == "validate":
        if errors:
            for err in errors:
                print(f"config-error: {err}", file=sys.stderr)
            return 2
        print("ok")
        print(json.dumps(effective, indent=2, sort_keys=True))
        return 0

    if effective.get("scenario") != args.command:
        errors.append(
            f"config scenario {effective.get('scenario')!r} does not match "
            f"command {args.command!r}"
        )
    if errors:
        for err in errors:
            print(f"config-error: {err}", file=sys.stderr)
        return 2

    if args.seed is not None:
        effective["seed"] = args.seed
    out_dir = Path(args.out) if args.out else Path(effective["out_dir"])
    cfg_hash = hashlib.sha256(raw).hexdigest()
    base = config_path.parent

    # Resolve input files before any computation so failures leave no outputs.
    for spec_key in ("kernel", "truth_kernel"):
        spec = effective.get(spec_key)
        if spec and "file" in spec and not (base / spec["file"]).is_file():
            print(f"config-error: {spec_key} file not found: {spec['file']}", file=sys.stderr)
            return 2
        if spec and "pump_phasematch" in spec:
            pm_file = spec["pump_phasematch"].get("pm_file", "")
            if not (base / pm_file).is_file():
                print(f"config-error: pm file not found: {pm_file}", file=sys.stderr)
                return 2
    if effective.get("record") and not (base / effective["record"]["file"]).is_file():
        print(
            f"config-error: record file not found: {effective['record']['file']}",
            file=sys.stderr,
        )
        return 2

    start = time.perf_counter()
    try:
        run_scenario(effective, cfg_hash, out_dir, base)
    except (
        DegenerateKernelError,
        ReconstructionError,
        ConvergenceError,
        FloatingPointError,
        ValueError,
    ) as exc:
        print(f"numeric-error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return 3
    elapsed = time.perf_counter() - start
    print(f"{args.command}: ok ({elapsed:.3f}s) -> {out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
