"""Command-line front end.

    matterwave --config run.json --mode single --out results/ --seed 1

Modes: ``single``, ``pair``, ``budget``, ``sweep`` and ``verify``.  Results go
to ``<out>/result.json`` (sweeps also write ``<out>/sweep.csv``); every file
carries the config hash and seed.  The normalised config is echoed inside the
result and re-parses to the same run.

Exit codes: 0 success, 1 configuration error, 2 verification failure.
Set ``MATTERWAVE_LOG`` (e.g. ``DEBUG``) for log output on stderr.
"""
from __future__ import annotations

import argparse
import copy
import csv
import hashlib
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import budget as bud
from . import interferometer as ifo
from . import oracle
from .kernel import KernelParams

log = logging.getLogger("matterwave")

MODES = ("single", "pair", "budget", "sweep", "verify")
EXIT_OK, EXIT_CONFIG, EXIT_VERIFY = 0, 1, 2

DEFAULTS = {
    "mode": "single",
    "seed": 0,
    "samples": 0,
    "model": {
        "rabi": 1.0,
        "chi_a": 0.01,
        "amplitude": 100.0,
        "signal_phases": [0.0, 0.0, 0.0],
        "interrogation_time": 1.0,
        "link_mirrors": True,
    },
    "pair": {"linked": True, "second_amplitude": None, "second_signal_phases": None},
    "budget": {"atom_number": 1.0e6, "photon_number": 1.0e6, "k": 1.0},
    "lab": None,
    "sweep": {"axis": "atom_number", "start": 1.0e3, "stop": 1.0e9, "num": 121, "log": True},
    "gw": {"strain": 1e-20, "baseline": 1.0, "interrogation_time": 1.0, "wavenumber": 1.0, "time": 0.25, "c": 1.0},
}

LAB_FIELDS = (
    "pulse_length", "photon_number", "atom_number", "omega_laser", "omega_atom",
    "g13", "g23", "detuning", "omega30", "beam_area",
)


class ConfigError(ValueError):
    pass


# --------------------------------------------------------------------------
# config
# --------------------------------------------------------------------------


def _merge(base, override, path=""):
    if override is None:
        return base
    if not isinstance(base, dict):
        return override
    if not isinstance(override, dict):
        raise ConfigError(f"{path or 'config'}: expected an object")
    out = copy.deepcopy(base)
    for key, val in override.items():
        if key not in base:
            raise ConfigError(f"{path + '.' if path else ''}{key}: unknown field")
        out[key] = _merge(base[key], val, f"{path + '.' if path else ''}{key}")
    return out


def _num(cfg, path, positive=False, nonneg=False, integer=False):
    node = cfg
    for part in path.split("."):
        node = node[part]
    if isinstance(node, bool) or not isinstance(node, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {node!r}")
    if not math.isfinite(node):
        raise ConfigError(f"{path}: must be finite")
    if positive and not node > 0:
        raise ConfigError(f"{path}: must be positive")
    if nonneg and node < 0:
        raise ConfigError(f"{path}: must be non-negative")
    if integer and int(node) != node:
        raise ConfigError(f"{path}: must be an integer")
    return node


def _phases(val, path):
    if not (isinstance(val, list) and len(val) == 3 and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in val)):
        raise ConfigError(f"{path}: expected three numbers")
    return [float(v) for v in val]


def normalise_config(raw: dict | None, mode=None, seed=None, samples=None) -> dict:
    """Fill defaults, apply command-line overrides and validate."""
    if raw is not None and not isinstance(raw, dict):
        raise ConfigError("config: top level must be an object")
    cfg = _merge(DEFAULTS, raw or {})
    if mode is not None:
        cfg["mode"] = mode
    if seed is not None:
        cfg["seed"] = seed
    if samples is not None:
        cfg["samples"] = samples
    if cfg["mode"] not in MODES:
        raise ConfigError(f"mode: must be one of {', '.join(MODES)}")
    _num(cfg, "seed", nonneg=True, integer=True)
    if cfg["seed"] >= 2 ** 64:
        raise ConfigError("seed: must fit in 64 bits")
    _num(cfg, "samples", nonneg=True, integer=True)
    if 0 < cfg["samples"] < 1000:
        raise ConfigError("samples: use 0 (no Monte-Carlo) or at least 1000")
    cfg["seed"], cfg["samples"] = int(cfg["seed"]), int(cfg["samples"])
    _num(cfg, "model.rabi", positive=True)
    _num(cfg, "model.chi_a", nonneg=True)
    _num(cfg, "model.amplitude", positive=True)
    _num(cfg, "model.interrogation_time", positive=True)
    cfg["model"]["signal_phases"] = _phases(cfg["model"]["signal_phases"], "model.signal_phases")
    if not isinstance(cfg["model"]["link_mirrors"], bool):
        raise ConfigError("model.link_mirrors: expected true/false")
    pair = cfg["pair"]
    if not isinstance(pair["linked"], bool):
        raise ConfigError("pair.linked: expected true/false")
    if pair["second_amplitude"] is not None:
        _num(cfg, "pair.second_amplitude", positive=True)
    if pair["second_signal_phases"] is not None:
        pair["second_signal_phases"] = _phases(pair["second_signal_phases"], "pair.second_signal_phases")
    for key in ("atom_number", "photon_number", "k"):
        _num(cfg, f"budget.{key}", positive=True)
    if cfg["lab"] is not None:
        lab = cfg["lab"]
        if not isinstance(lab, dict):
            raise ConfigError("lab: expected an object")
        for key in lab:
            if key not in LAB_FIELDS:
                raise ConfigError(f"lab.{key}: unknown field")
        for key in LAB_FIELDS[:-1]:
            if key not in lab:
                raise ConfigError(f"lab.{key}: missing")
            _num(cfg, f"lab.{key}")
    sw = cfg["sweep"]
    if sw["axis"] not in ("atom_number", "gw_frequency"):
        raise ConfigError("sweep.axis: must be atom_number or gw_frequency")
    _num(cfg, "sweep.start", positive=True)
    _num(cfg, "sweep.stop", positive=True)
    _num(cfg, "sweep.num", positive=True, integer=True)
    if sw["stop"] <= sw["start"]:
        raise ConfigError("sweep.stop: must exceed sweep.start")
    if not isinstance(sw["log"], bool):
        raise ConfigError("sweep.log: expected true/false")
    sw["num"] = int(sw["num"])
    for key in ("strain", "baseline", "interrogation_time", "wavenumber", "c"):
        _num(cfg, f"gw.{key}", positive=True)
    _num(cfg, "gw.time")
    return cfg


def config_hash(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


# --------------------------------------------------------------------------
# runs
# --------------------------------------------------------------------------


def _spec(cfg, amplitude=None, phases=None) -> ifo.SequenceSpec:
    m = cfg["model"]
    return ifo.SequenceSpec.mach_zehnder(
        m["rabi"], m["chi_a"], amplitude or m["amplitude"], tuple(phases or m["signal_phases"]),
        interrogation_time=m["interrogation_time"], link_mirrors=m["link_mirrors"],
    )


def _cplx(z):
    return [float(np.real(z)), float(np.imag(z))]


def _summary(out: ifo.InterferometerOutput) -> dict:
    est = ifo.estimator(out)
    return {
        "mean_out": [_cplx(z) for z in out.mean_out],
        "atom_numbers": list(out.atom_numbers()),
        "delta_n_signal": out.delta_n_signal + 0.0,
        "signal_coefficient": out.signal_coefficient,
        "signal_gradient": ifo.signal_gradient(out.spec).tolist(),
        "variance": out.variance,
        "noise_parts": out.noise_parts,
        "estimate": est.estimate,
        "estimator_variance": est.variance,
        "curvature_estimate": est.curvature,
    }


def run_single(cfg):
    out = ifo.run_sequence(_spec(cfg))
    res = {"single": _summary(out)}
    if cfg["samples"]:
        res["monte_carlo"] = oracle.monte_carlo(out, cfg["samples"], cfg["seed"]).as_dict()
    return res, None


def run_pair_mode(cfg):
    p = cfg["pair"]
    pair = ifo.run_pair(_spec(cfg), _spec(cfg, p["second_amplitude"], p["second_signal_phases"]), linked=p["linked"])
    res = {
        "pair": {
            "linked": pair.linked,
            "first": _summary(pair.first),
            "second": _summary(pair.second),
            "second_parts": pair.second_parts(),
            "covariance": pair.covariance,
            "correlation": pair.correlation,
            "differential_signal": pair.differential_signal,
            "differential_variance": pair.differential_variance,
        }
    }
    if cfg["samples"]:
        res["monte_carlo"] = oracle.monte_carlo(pair, cfg["samples"], cfg["seed"]).as_dict()
    return res, None


def _budget_inputs(cfg):
    if cfg["lab"] is not None:
        lab = bud.LabParams(**cfg["lab"])
        mapped = bud.map_params(lab)
        return lab.atom_number, lab.photon_number, mapped.pulse_area, mapped
    b = cfg["budget"]
    return b["atom_number"], b["photon_number"], b["k"], None


def run_budget(cfg):
    n_a, n_l, k, mapped = _budget_inputs(cfg)
    nb = bud.error_budget(n_a, n_l, k, warn=False)
    opt = bud.optimize_atom_number(n_l, k)
    res = {
        "budget": nb.as_dict(),
        "optimum": {"atom_number": opt.atom_number, "variance": opt.variance, "sql_ratio": opt.sql_ratio},
    }
    if mapped is not None:
        res["mapping"] = {
            "g_eff": mapped.g_eff,
            "chi": mapped.chi,
            "rabi": mapped.rabi,
            "chi_a": mapped.chi_a,
            "field_amplitude": mapped.field_amplitude,
            "pulse_area": mapped.pulse_area,
            "identity_residual": mapped.identity_residual,
        }
    return res, None


def run_sweep(cfg):
    sw = cfg["sweep"]
    grid = (np.geomspace if sw["log"] else np.linspace)(sw["start"], sw["stop"], sw["num"])
    rows = []
    if sw["axis"] == "atom_number":
        _, n_l, k, _ = _budget_inputs(cfg)
        for n_a in grid:
            nb = bud.error_budget(float(n_a), n_l, k, warn=False)
            rows.append({"atom_number": n_a, "back_action": nb.back_action, "atom_shot": nb.atom_shot,
                         "optical": nb.optical, "total": nb.total})
        best = min(rows, key=lambda r: r["total"])
        summary = {"axis": "atom_number", "grid_minimum": best,
                   "closed_form_optimum": bud.optimize_atom_number(n_l, k).atom_number}
    else:
        g = cfg["gw"]
        for w in grid:
            rows.append({
                "omega": w,
                "phi_gw": ifo.gw_phase_response(w, g["strain"], g["baseline"], g["interrogation_time"],
                                                g["wavenumber"], g["time"], c=g["c"]),
                "low_frequency_limit": ifo.gw_low_frequency_limit(w, g["strain"], g["baseline"],
                                                                  g["interrogation_time"], g["wavenumber"]),
            })
        summary = {"axis": "gw_frequency", "points": len(rows)}
    return {"sweep": summary}, rows


def run_verify(cfg):
    report = oracle.OracleReport()
    m = cfg["model"]
    for theta in (math.pi / 4, math.pi / 2):
        params = KernelParams.from_rabi(m["rabi"], m["chi_a"] or 0.01, theta, phi=0.3)
        res = oracle.compare_with_analytic(params, mean_in=(0.6, 0.8j))
        for key in ("++1", "+-2", "-+1", "--2"):
            report.add(oracle.Check.make(f"rk4_{key}_theta{theta:.4f}", res[key], 0.0, 1e-6))
    for check in oracle.profile_checks().checks:
        report.add(check)
    n = cfg["samples"] or 20_000
    out = ifo.run_sequence(_spec(cfg))
    mc = oracle.monte_carlo(out, n, cfg["seed"])
    report.add(oracle.Check.make("mc_delta_n_variance", mc.cov[0, 0], out.variance, 4 * mc.se_cov[0, 0]))
    report.notes.append(oracle.EXP_FORM_NOTE)
    res = json.loads(report.to_json())
    return {"verify": res}, None


RUNNERS = {"single": run_single, "pair": run_pair_mode, "budget": run_budget, "sweep": run_sweep, "verify": run_verify}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, complex):
        return _cplx(obj)
    return obj


def run(cfg: dict, out_dir: Path) -> int:
    """Execute a normalised config; returns the exit status."""
    digest = config_hash(cfg)
    log.info("mode=%s hash=%s seed=%d", cfg["mode"], digest, cfg["seed"])
    result, rows = RUNNERS[cfg["mode"]](cfg)
    out_dir.mkdir(parents=True, exist_ok=True)
    doc = {"config_hash": digest, "seed": cfg["seed"], "mode": cfg["mode"], "config": cfg}
    doc.update(result)
    with open(out_dir / "result.json", "w") as fh:
        json.dump(_jsonable(doc), fh, indent=2)
    if rows:
        with open(out_dir / "sweep.csv", "w", newline="") as fh:
            fields = list(rows[0]) + ["config_hash", "seed"]
            writer = csv.DictWriter(fh, fieldnames=fields)
            writer.writeheader()
            for r in rows:
                writer.writerow({**{k: float(v) for k, v in r.items()}, "config_hash": digest, "seed": cfg["seed"]})
    if cfg["mode"] == "verify" and not result["verify"]["passed"]:
        failed = [c["name"] for c in result["verify"]["checks"] if not c["passed"]]
        log.error("verification failed: %s", ", ".join(failed))
        return EXIT_VERIFY
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="matterwave", description="Quantum noise of light-pulse atom interferometers.")
    ap.add_argument("--config", type=Path, help="JSON config file")
    ap.add_argument("--mode", choices=MODES, help="overrides the config mode")
    ap.add_argument("--out", type=Path, default=Path("matterwave-out"), help="output directory")
    ap.add_argument("--seed", type=int, help="64-bit seed for Monte-Carlo")
    ap.add_argument("--samples", type=int, help="Monte-Carlo samples (0 disables)")
    return ap


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("MATTERWAVE_LOG", "WARNING").upper(), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        raw = None
        if args.config is not None:
            try:
                raw = json.loads(args.config.read_text())
            except OSError as exc:
                raise ConfigError(f"cannot read {args.config}: {exc.strerror}") from None
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{args.config}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
        cfg = normalise_config(raw, args.mode, args.seed, args.samples)
        if cfg["lab"] is not None:
            try:
                bud.LabParams(**cfg["lab"])
            except ValueError as exc:
                raise ConfigError(f"lab: {exc}") from None
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(cfg, args.out)


if __name__ == "__main__":
    sys.exit(main())
