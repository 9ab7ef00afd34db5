"""Command-line scenario runner.

One subcommand per measurement scheme: `covariance` (direct matrix and
principal decomposition), `reconstruct` (six-variance plans, exact or
sampled), `twelveport` (moment propagation / full-state / sampled paths with
vacuum-noise correction), `ramsey` (pulse compilation and verification),
`bright` (reference-beam expansion), and `estimate` (ingest detector records
written by this tool or elsewhere).

Reports are JSON objects printed to stdout with round-trip float precision;
rerunning a command from the echoed `config` block reproduces every number
bit-exactly.  Exit codes: 0 success, 2 configuration or parse error,
3 hard invariant failure.  Statistical deviations never fail the process.

States are given in a small grammar:

    vac                          vacuum
    num:1,0                      number state, one count per mode
    coh:1.5,0;0,0                coherent amplitudes re,im per mode
    file:path.txt                serialized StateVector
    mix:[(0.5,num:1,0),(0.5,vac)]  convex mixture of the above
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__, atoms, bright, measure, multiport, protocol, spin
from ._backend import backend_name
from .atoms import AtomsError
from .bright import BrightError
from .fock import (
    Ensemble,
    FockBasis,
    FockError,
    TruncationWarning,
    coherent_state,
    embed_state,
    expectation,
    number_state,
    product_state,
    state_from_text,
    vacuum_state,
)
from .measure import MeasureError
from .multiport import MultiportError, TwelvePortConfig
from .protocol import COMBO_LABELS, ProtocolError
from .spin import SpinError, covariance_matrix, mean_vector, schwinger_set
from .su2 import SU2Error

INVARIANT_ERRORS = (FockError, SpinError, SU2Error, ProtocolError,
                    MeasureError, MultiportError, AtomsError, BrightError)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INVARIANT = 3


class CliError(ValueError):
    """Configuration or input parse problem; maps to exit code 2."""


# -- state mini-language ------------------------------------------------------

def _floats(text: str, what: str) -> list:
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise CliError(f"bad {what} {text!r}: expected comma-separated numbers") from None


def _split_mix_items(body: str) -> list:
    """Split '(w,spec),(w,spec)' at top-level commas between groups."""
    items = []
    depth = 0
    current = ""
    for ch in body:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise CliError(f"unbalanced parentheses in mix spec {body!r}")
        if ch == "," and depth == 0:
            if current:
                items.append(current)
            current = ""
        else:
            current += ch
    if depth != 0:
        raise CliError(f"unbalanced parentheses in mix spec {body!r}")
    if current:
        items.append(current)
    return items


def parse_state_spec(spec: str, mode_count: int, n_max: int):
    """Build the state a command acts on; see the module docstring grammar."""
    spec = spec.strip()
    basis = FockBasis(mode_count, n_max)
    if spec == "vac":
        return vacuum_state(basis)
    if spec.startswith("num:"):
        try:
            counts = [int(v) for v in spec[4:].split(",")]
        except ValueError:
            raise CliError(f"bad number-state spec {spec!r}") from None
        if len(counts) != mode_count:
            raise CliError(
                f"state spec {spec!r} has {len(counts)} modes, command needs {mode_count}")
        if min(counts) < 0 or sum(counts) > n_max:
            raise CliError(
                f"occupation {counts} does not fit under n_max={n_max}")
        return number_state(basis, counts)
    if spec.startswith("coh:"):
        groups = spec[4:].split(";")
        if len(groups) != mode_count:
            raise CliError(
                f"state spec {spec!r} has {len(groups)} modes, command needs {mode_count}")
        alphas = []
        for group in groups:
            pair = _floats(group, "coherent amplitude")
            if len(pair) != 2:
                raise CliError(
                    f"coherent amplitude {group!r} must be re,im")
            alphas.append(pair[0] + 1j * pair[1])
        return coherent_state(basis, alphas)
    if spec.startswith("file:"):
        path = spec[5:]
        try:
            state = state_from_text(Path(path).read_text())
        except OSError as exc:
            raise CliError(f"cannot read state file {path!r}: {exc}") from None
        except FockError as exc:
            raise CliError(f"cannot parse state file {path!r}: {exc}") from None
        if state.basis.mode_count != mode_count:
            raise CliError(
                f"state file has {state.basis.mode_count} modes, command needs {mode_count}")
        if state.basis.n_max != n_max:
            try:
                state = embed_state(state, basis)
            except FockError as exc:
                raise CliError(
                    f"state file does not fit under n_max={n_max}: {exc}") from None
        return state
    if spec.startswith("mix:"):
        body = spec[4:].strip()
        if not (body.startswith("[") and body.endswith("]")):
            raise CliError(f"mix spec must look like mix:[(w,spec),...], got {spec!r}")
        parts = []
        total = 0.0
        for item in _split_mix_items(body[1:-1]):
            item = item.strip()
            if not (item.startswith("(") and item.endswith(")")):
                raise CliError(f"mix component {item!r} must be (weight,spec)")
            inner = item[1:-1]
            head, _, rest = inner.partition(",")
            if not rest:
                raise CliError(f"mix component {item!r} must be (weight,spec)")
            try:
                weight = float(head)
            except ValueError:
                raise CliError(f"bad mixture weight {head!r}") from None
            if rest.strip().startswith("mix:"):
                raise CliError("nested mixtures are not supported")
            component = parse_state_spec(rest, mode_count, n_max)
            parts.append((weight, component))
            total += weight
        if not parts:
            raise CliError("mixture needs at least one component")
        if abs(total - 1.0) > 1e-9:
            raise CliError(f"mixture weights sum to {total!r}, expected 1")
        return Ensemble(basis, parts)
    raise CliError(f"unrecognized state spec {spec!r}")


def _truncation_weight(state) -> float:
    if isinstance(state, Ensemble):
        return max(part.truncation_weight for _, part in state.parts)
    return state.truncation_weight


# -- report plumbing ----------------------------------------------------------

def _vec(values) -> list:
    return [float(v) for v in np.asarray(values).reshape(-1)]


def _mat(values) -> list:
    arr = np.asarray(values, dtype=float)
    return [[float(v) for v in row] for row in arr]


class _Checks:
    """Collects named residual checks; any failure flips the exit code to 3."""

    def __init__(self):
        self.failed = []

    def residual(self, name: str, value: float, tolerance: float) -> dict:
        value = float(value)
        ok = bool(value <= tolerance)
        if not ok:
            self.failed.append(name)
        return {"value": value, "tolerance": float(tolerance), "pass": ok}

    def status(self) -> int:
        return EXIT_OK if not self.failed else EXIT_INVARIANT


def _environment() -> dict:
    return {"backend": backend_name(), "prng_version": measure.PRNG_VERSION,
            "package_version": __version__}


def _deviation_over_se(deviation: np.ndarray, se: np.ndarray) -> float:
    """max |dev|/se, with exact agreement counting as 0 even at se = 0."""
    dev = np.abs(np.asarray(deviation, dtype=float)).reshape(-1)
    err = np.asarray(se, dtype=float).reshape(-1)
    ratios = np.where(err > 0, dev / np.where(err > 0, err, 1.0),
                      np.where(dev > 0, np.inf, 0.0))
    return float(np.max(ratios))


def _require_sampling(cfg: dict) -> tuple:
    if cfg["shots"] is None:
        raise CliError("this mode needs --shots")
    if cfg["seed"] is None:
        raise CliError("sampled execution needs --seed")
    return int(cfg["shots"]), int(cfg["seed"])


# -- runners ------------------------------------------------------------------

def run_covariance(cfg: dict):
    state = parse_state_spec(cfg["state"], 2, cfg["nmax"])
    ops = schwinger_set(state.basis)
    means = mean_vector(ops, state)
    cov = covariance_matrix(ops, state)
    dec = spin.principal_decomposition(cov)
    recomposed = dec.rotation.T @ np.diag(dec.variances) @ dec.rotation
    checks = _Checks()
    report = {
        "command": "covariance",
        "config": cfg,
        "environment": _environment(),
        "truncation_weight": _truncation_weight(state),
        "j0_mean": _mean_of(ops.component(0), state),
        "means": _vec(means),
        "covariance": _mat(cov.matrix),
        "principal": dec.to_dict(),
        "residuals": {
            "principal_recomposition": checks.residual(
                "principal_recomposition",
                np.max(np.abs(recomposed - cov.matrix)), 1e-12),
            "psd_violation": checks.residual(
                "psd_violation", max(0.0, -cov.min_eigenvalue()), 1e-10),
        },
    }
    return report, checks.status()


def _mean_of(op, state) -> float:
    if isinstance(state, Ensemble):
        return float(sum(w * expectation(op, part).real for w, part in state.parts))
    return float(expectation(op, state).real)


def run_reconstruct(cfg: dict):
    state = parse_state_spec(cfg["state"], 2, cfg["nmax"])
    plan = (protocol.polarimetric_plan() if cfg["plan"] == "polarimetric"
            else protocol.interferometric_plan())
    ops = schwinger_set(state.basis)
    direct = covariance_matrix(ops, state)
    exact = protocol.execute_plan(plan, state)
    assembled = protocol.assemble_covariance(exact)
    checks = _Checks()
    report = {
        "command": "reconstruct",
        "config": cfg,
        "environment": _environment(),
        "truncation_weight": _truncation_weight(state),
        "plan": plan.to_dict(),
        "direct_covariance": _mat(direct.matrix),
        "variances": {label: float(exact.values[label]) for label in COMBO_LABELS},
        "assembled_covariance": _mat(assembled.matrix),
        "residuals": {
            "assembly_vs_direct": checks.residual(
                "assembly_vs_direct",
                np.max(np.abs(assembled.matrix - direct.matrix)), 1e-10),
        },
    }
    if cfg["shots"] is not None:
        shots, seed = _require_sampling(cfg)
        records = protocol.sample_plan_records(plan, state, shots, seed)
        paths = {}
        if cfg["records_out"]:
            for label in COMBO_LABELS:
                path = f"{cfg['records_out']}.{label}.csv"
                measure.write_records(records[label], path)
                paths[label] = path
        sampled = protocol.estimates_from_records(records)
        sampled_matrix = protocol.assemble_covariance(sampled)
        deviations = np.array([sampled.values[l] - exact.values[l]
                               for l in COMBO_LABELS])
        errors = np.array([sampled.standard_errors[l] for l in COMBO_LABELS])
        report["sampled"] = {
            "shots": shots,
            "seed": seed,
            "variances": {label: {"value": float(sampled.values[label]),
                                  "se": float(sampled.standard_errors[label])}
                          for label in COMBO_LABELS},
            "assembled_covariance": _mat(sampled_matrix.matrix),
            "max_deviation_se": _deviation_over_se(deviations, errors),
        }
        if paths:
            report["sampled"]["records_out"] = paths
    return report, checks.status()


def _tilde_block(stats: multiport.TildeStatistics, direct, checks: _Checks,
                 tag: str) -> dict:
    corrected = multiport.corrected_covariance(stats)
    offsets = stats.config.variance_offsets()
    return {
        "tilde_means": _vec(stats.means),
        "tilde_covariance": _mat(stats.covariance),
        "j0_mean": float(stats.j0_mean),
        "variance_offsets": [float(offsets[0]), float(offsets[1])],
        "corrected_covariance": _mat(corrected.matrix),
        "residuals": {
            "tilde_means_vs_direct": checks.residual(
                f"{tag}.tilde_means_vs_direct",
                np.max(np.abs(stats.means - direct["means"])), 1e-10),
            "corrected_vs_direct": checks.residual(
                f"{tag}.corrected_vs_direct",
                np.max(np.abs(corrected.matrix - direct["cov"])), 1e-10),
        },
    }


def run_twelveport(cfg: dict):
    config = TwelvePortConfig(cfg["t2"])
    state = parse_state_spec(cfg["state"], 2, cfg["nmax"])
    ops = schwinger_set(state.basis)
    direct = {"means": mean_vector(ops, state),
              "cov": covariance_matrix(ops, state).matrix}
    checks = _Checks()
    table = multiport.moment_table(state)
    stats = multiport.propagate_tilde_statistics(config, table)
    report = {
        "command": "twelveport",
        "config": cfg,
        "environment": _environment(),
        "truncation_weight": _truncation_weight(state),
        "direct_means": _vec(direct["means"]),
        "direct_covariance": _mat(direct["cov"]),
        "moments": _tilde_block(stats, direct, checks, "moments"),
    }
    if cfg["mode"] in ("fullstate", "all"):
        fstats = multiport.full_state_tilde_statistics(config, state, cfg["nmax"])
        block = _tilde_block(fstats, direct, checks, "fullstate")
        gap = max(np.max(np.abs(fstats.means - stats.means)),
                  np.max(np.abs(fstats.covariance - stats.covariance)))
        block["residuals"]["vs_moments"] = checks.residual(
            "fullstate.vs_moments", gap, 1e-10)
        report["fullstate"] = block
    if cfg["mode"] in ("sampled", "all"):
        shots, seed = _require_sampling(cfg)
        records = multiport.sample_twelve_port(config, state, cfg["nmax"],
                                               shots, seed)
        est = multiport.estimate_corrected_covariance(records, config)
        exact_corrected = multiport.corrected_covariance(stats).matrix
        report["sampled"] = {
            "shots": shots,
            "seed": seed,
            "corrected_covariance": _mat(est.matrix),
            "standard_errors": _mat(est.standard_errors),
            "j0_mean": float(est.j0_mean),
            "max_deviation_se": _deviation_over_se(
                est.matrix - exact_corrected, est.standard_errors),
        }
        if cfg["records_out"]:
            measure.write_records(records, cfg["records_out"])
            report["sampled"]["records_out"] = cfg["records_out"]
    return report, checks.status()


def run_ramsey(cfg: dict):
    sequence = atoms.ramsey_sequence(cfg["k"], cfg["sign"], cfg["m"],
                                     cfg["omega0"], cfg["rabi"])
    spin_set = spin.spin_j_set(cfg["spin"])
    _, record = atoms.compile_and_verify(sequence, spin_set)
    checks = _Checks()
    verification = record.to_dict()
    checks.residual("phase_aligned_distance", record.distance, record.tolerance)
    report = {
        "command": "ramsey",
        "config": cfg,
        "environment": _environment(),
        "sequence": sequence.to_dict(),
        "total_duration": float(sum(s.duration for s in sequence.segments)),
        "verification": verification,
    }
    return report, checks.status()


def run_bright(cfg: dict):
    state = parse_state_spec(cfg["state"], 1, cfg["nmax"])
    config = TwelvePortConfig(cfg["t2"])
    moments = bright.quadrature_moments(state)
    dec = bright.bright_decomposition(moments)
    alpha = cfg["alpha"]
    series = bright.series_covariance(alpha, dec)
    predicted_means = bright.mean_relations(alpha, moments)

    joint, weight = _bright_joint_state(alpha, state, cfg["nmax"])
    ops = schwinger_set(FockBasis(2, cfg["nmax"]))
    direct_cov = covariance_matrix(ops, joint)
    direct_means = mean_vector(ops, joint)
    # truncating weight w at the cutoff perturbs second moments by up to
    # ~ w n_max^2, so the direct-side comparison scales accordingly
    tolerance = (cfg["nmax"] + 1) ** 2 * weight + 1e-10

    rows = bright.convergence_report(cfg["alphas"], state, config)
    asym = bright.homodyne_asymptotics(alpha, config, moments)
    checks = _Checks()
    report = {
        "command": "bright",
        "config": cfg,
        "environment": _environment(),
        "truncation_weight": weight,
        "moments": moments.to_dict(),
        "decomposition": dec.to_dict(),
        "series": {
            "alpha": float(alpha),
            "covariance": _mat(series.matrix),
            "direct_covariance": _mat(direct_cov.matrix),
            "means": _vec(predicted_means),
            "direct_means": _vec(direct_means),
        },
        "asymptote": asym.to_dict(),
        "convergence": [row.to_dict() for row in rows],
        "residuals": {
            "series_vs_direct": checks.residual(
                "series_vs_direct",
                np.max(np.abs(series.matrix - direct_cov.matrix)), tolerance),
            "means_vs_direct": checks.residual(
                "means_vs_direct",
                np.max(np.abs(predicted_means - direct_means)), tolerance),
            "cross_moment": checks.residual(
                "cross_moment",
                max(row.cross_residual for row in rows), 1e-10),
        },
    }
    return report, checks.status()


def _bright_joint_state(alpha: float, state, n_max: int):
    """Two-mode coherent(alpha) x state on a joint truncated basis.

    Returns the joint state and its total discarded weight: the reference
    mode's Poisson tail plus whatever the joint cutoff clips, since the raw
    amplitude vectors passed to product_state carry no tail bookkeeping.
    """
    basis2 = FockBasis(2, n_max)
    reference = coherent_state(FockBasis(1, n_max), [alpha])
    if isinstance(state, Ensemble):
        parts = [(w, product_state(basis2, [reference.amplitudes, part.amplitudes]))
                 for w, part in state.parts]
        joint = Ensemble(basis2, parts)
    else:
        joint = product_state(basis2, [reference.amplitudes, state.amplitudes])
    weight = (reference.truncation_weight + _truncation_weight(joint)
              + _truncation_weight(state))
    return joint, weight


def run_estimate(cfg: dict):
    if not cfg["records"]:
        raise CliError("estimate needs at least one --records path")
    loaded = []
    for path in cfg["records"]:
        try:
            loaded.append((path, measure.read_records(path)))
        except (MeasureError, OSError, ValueError, KeyError) as exc:
            raise CliError(f"cannot parse records {path!r}: {exc}") from None
    report = {
        "command": "estimate",
        "config": cfg,
        "environment": _environment(),
        "sources": [path for path, _ in loaded],
    }
    override = TwelvePortConfig(cfg["t2"]) if cfg["t2"] is not None else None
    reconstruct_records = {}
    simultaneous = []
    generic = []
    for path, records in loaded:
        scheme = records.metadata.get("scheme")
        if scheme == "reconstruct":
            label = records.metadata.get("combo")
            if label not in COMBO_LABELS:
                raise CliError(f"records {path!r} carry unknown combo {label!r}")
            if label in reconstruct_records:
                raise CliError(f"duplicate records for combo {label!r}")
            reconstruct_records[label] = records
        elif scheme == "twelveport":
            simultaneous.append((path, records))
        else:
            generic.append((path, records))
    if reconstruct_records:
        missing = [l for l in COMBO_LABELS if l not in reconstruct_records]
        if missing:
            raise CliError(f"reconstruction needs all six combos; missing {missing}")
        sampled = protocol.estimates_from_records(reconstruct_records)
        assembled = protocol.assemble_covariance(sampled)
        report["reconstruct"] = {
            "plan": reconstruct_records["1+2"].metadata.get("plan"),
            "shots": reconstruct_records["1+2"].shots,
            "variances": {label: {"value": float(sampled.values[label]),
                                  "se": float(sampled.standard_errors[label])}
                          for label in COMBO_LABELS},
            "assembled_covariance": _mat(assembled.matrix),
        }
    if simultaneous:
        blocks = []
        for path, records in simultaneous:
            est = multiport.estimate_corrected_covariance(records, override)
            raw = measure.estimate_covariance_offdiag(records)
            blocks.append({
                "path": path,
                "shots": records.shots,
                "t_squared": float(est.config.t_squared),
                "corrected_covariance": _mat(est.matrix),
                "standard_errors": _mat(est.standard_errors),
                "j0_mean": float(est.j0_mean),
                "raw_covariance": raw.to_dict(),
            })
        report["twelveport"] = blocks
    if generic:
        blocks = []
        for path, records in generic:
            try:
                pairings = records.pairings()
            except MeasureError as exc:
                raise CliError(f"records {path!r}: {exc}") from None
            blocks.append({
                "path": path,
                "shots": records.shots,
                "estimates": [measure.estimate_mean_variance(records, p).to_dict()
                              for p in pairings],
            })
        report["generic"] = blocks
    return report, EXIT_OK


RUNNERS = {
    "covariance": run_covariance,
    "reconstruct": run_reconstruct,
    "twelveport": run_twelveport,
    "ramsey": run_ramsey,
    "bright": run_bright,
    "estimate": run_estimate,
}


# -- configuration ------------------------------------------------------------

DEFAULTS = {
    "covariance": {"state": "vac", "nmax": 8, "strict": False, "out": None},
    "reconstruct": {"state": "vac", "nmax": 8, "plan": "polarimetric",
                    "shots": None, "seed": None, "records_out": None,
                    "strict": False, "out": None},
    "twelveport": {"state": "vac", "nmax": 6, "t2": 2.0 / 3.0,
                   "mode": "moments", "shots": None, "seed": None,
                   "records_out": None, "strict": False, "out": None},
    "ramsey": {"k": 2, "sign": 1, "m": 4, "omega0": 1.0, "rabi": 0.05,
               "spin": 0.5, "strict": False, "out": None},
    "bright": {"state": "vac", "nmax": 16, "alpha": 1.5,
               "alphas": [1.0, 2.0, 4.0, 8.0], "t2": 2.0 / 3.0,
               "strict": False, "out": None},
    "estimate": {"records": [], "t2": None, "strict": False, "out": None},
}

_PLANS = ("polarimetric", "interferometric")
_MODES = ("moments", "fullstate", "sampled", "all")


def _coerce_int(cfg, key, minimum=None, optional=False):
    value = cfg[key]
    if value is None and optional:
        return
    try:
        out = int(value)
    except (TypeError, ValueError):
        raise CliError(f"{key} must be an integer, got {value!r}") from None
    if minimum is not None and out < minimum:
        raise CliError(f"{key} must be >= {minimum}, got {out}")
    cfg[key] = out


def _coerce_float(cfg, key, optional=False):
    value = cfg[key]
    if value is None and optional:
        return
    try:
        cfg[key] = float(value)
    except (TypeError, ValueError):
        raise CliError(f"{key} must be a number, got {value!r}") from None


def _validate_t2(value):
    if not 0.0 < value < 1.0:
        raise CliError(f"t2 must lie strictly between 0 and 1, got {value}")
    if abs(math.sqrt(value) - math.sqrt(1.0 - value)) < 1e-9:
        raise CliError("t2 = 1/2 makes t = r; the side ports degenerate")


def resolve_config(args: argparse.Namespace) -> dict:
    command = args.command
    cfg = dict(DEFAULTS[command])
    allowed = set(cfg)
    if args.config:
        try:
            file_cfg = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise CliError(f"cannot read config {args.config!r}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise CliError(f"config {args.config!r} is not valid JSON: {exc}") from None
        if not isinstance(file_cfg, dict):
            raise CliError("config file must hold a JSON object")
        unknown = sorted(set(file_cfg) - allowed - {"command"})
        if unknown:
            raise CliError(f"unknown config keys {unknown}")
        if file_cfg.get("command", command) != command:
            raise CliError(
                f"config is for command {file_cfg['command']!r}, not {command!r}")
        for key in allowed:
            if key in file_cfg:
                cfg[key] = file_cfg[key]
    for key in allowed:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value

    if "nmax" in cfg:
        _coerce_int(cfg, "nmax", minimum=1)
    if "shots" in cfg:
        _coerce_int(cfg, "shots", minimum=1, optional=True)
    if "seed" in cfg:
        _coerce_int(cfg, "seed", minimum=0, optional=True)
    if "t2" in cfg:
        _coerce_float(cfg, "t2", optional=(command == "estimate"))
        if cfg["t2"] is not None:
            _validate_t2(cfg["t2"])
    if "plan" in cfg and cfg["plan"] not in _PLANS:
        raise CliError(f"plan must be one of {_PLANS}, got {cfg['plan']!r}")
    if "mode" in cfg and cfg["mode"] not in _MODES:
        raise CliError(f"mode must be one of {_MODES}, got {cfg['mode']!r}")
    if command == "ramsey":
        _coerce_int(cfg, "k")
        _coerce_int(cfg, "sign")
        _coerce_int(cfg, "m")
        _coerce_float(cfg, "omega0")
        _coerce_float(cfg, "rabi")
        _coerce_float(cfg, "spin")
        if cfg["k"] not in (1, 2, 3):
            raise CliError(f"k must be 1, 2 or 3, got {cfg['k']}")
        if cfg["sign"] not in (1, -1):
            raise CliError(f"sign must be +1 or -1, got {cfg['sign']}")
        if cfg["m"] not in (2, 4):
            raise CliError(f"m must be 2 or 4, got {cfg['m']}")
        if cfg["omega0"] <= 0 or cfg["rabi"] <= 0:
            raise CliError("omega0 and rabi must be positive")
        doubled = 2.0 * cfg["spin"]
        if cfg["spin"] <= 0 or abs(doubled - round(doubled)) > 1e-12:
            raise CliError(f"spin must be a positive half-integer, got {cfg['spin']}")
    if command == "bright":
        _coerce_float(cfg, "alpha")
        if cfg["alpha"] < 0:
            raise CliError(f"alpha must be non-negative, got {cfg['alpha']}")
        alphas = cfg["alphas"]
        if isinstance(alphas, str):
            alphas = _floats(alphas, "alphas")
        try:
            cfg["alphas"] = [float(v) for v in alphas]
        except (TypeError, ValueError):
            raise CliError(f"alphas must be a list of numbers, got {alphas!r}") from None
        if not cfg["alphas"] or min(cfg["alphas"]) < 0:
            raise CliError("alphas must be non-empty and non-negative")
    if command == "estimate":
        records = cfg["records"]
        if isinstance(records, str):
            records = [records]
        if not isinstance(records, list) or not all(isinstance(p, str) for p in records):
            raise CliError("records must be a list of paths")
        cfg["records"] = records
    cfg["strict"] = bool(cfg["strict"])
    cfg["command"] = command
    return cfg


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="amcov",
        description="Angular-momentum covariance measurement schemes.")
    parser.add_argument("--version", action="version", version=f"amcov {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", default=None, metavar="PATH",
                        help="JSON config; explicit flags override it")
        sp.add_argument("--strict", action="store_const", const=True, default=None,
                        help="treat truncation warnings as errors")
        sp.add_argument("--out", default=None, metavar="PATH",
                        help="also write the report to this file")

    sp = sub.add_parser("covariance", help="direct covariance matrix and principal axes")
    sp.add_argument("--state", default=None)
    sp.add_argument("--nmax", type=int, default=None)
    common(sp)

    sp = sub.add_parser("reconstruct", help="six-variance reconstruction plans")
    sp.add_argument("--state", default=None)
    sp.add_argument("--nmax", type=int, default=None)
    sp.add_argument("--plan", choices=_PLANS, default=None)
    sp.add_argument("--shots", type=int, default=None)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--records-out", dest="records_out", default=None, metavar="PREFIX",
                    help="write per-combo detector records to PREFIX.<combo>.csv")
    common(sp)

    sp = sub.add_parser("twelveport", help="simultaneous 12-port scheme")
    sp.add_argument("--state", default=None)
    sp.add_argument("--nmax", type=int, default=None)
    sp.add_argument("--t2", type=float, default=None, help="transmission t^2")
    sp.add_argument("--mode", choices=_MODES, default=None)
    sp.add_argument("--shots", type=int, default=None)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--records-out", dest="records_out", default=None, metavar="PATH")
    common(sp)

    sp = sub.add_parser("ramsey", help="compile a standard element into drive segments")
    sp.add_argument("--k", type=int, default=None, help="component index 1..3")
    sp.add_argument("--sign", type=int, choices=(1, -1), default=None)
    sp.add_argument("--m", type=int, default=None, help="angle denominator: pi/m")
    sp.add_argument("--omega0", type=float, default=None)
    sp.add_argument("--rabi", type=float, default=None)
    sp.add_argument("--spin", type=float, default=None)
    common(sp)

    sp = sub.add_parser("bright", help="reference-beam expansion of the covariance")
    sp.add_argument("--state", default=None, help="one-mode spec for the signal mode")
    sp.add_argument("--nmax", type=int, default=None)
    sp.add_argument("--alpha", type=float, default=None)
    sp.add_argument("--alphas", default=None, help="comma list for the convergence ladder")
    sp.add_argument("--t2", type=float, default=None)
    common(sp)

    sp = sub.add_parser("estimate", help="estimate from detector record files")
    sp.add_argument("--records", action="extend", nargs="+", default=None,
                    metavar="PATH")
    sp.add_argument("--t2", type=float, default=None,
                    help="override the t^2 stored in record metadata")
    common(sp)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        runner = RUNNERS[cfg["command"]]
        if cfg["strict"]:
            with warnings.catch_warnings():
                warnings.simplefilter("error", TruncationWarning)
                report, status = runner(cfg)
        else:
            report, status = runner(cfg)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TruncationWarning as exc:
        print(f"error: truncation threshold exceeded: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except INVARIANT_ERRORS as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    text = json.dumps(report, indent=2, sort_keys=True)
    print(text)
    if cfg["out"]:
        Path(cfg["out"]).write_text(text + "\n")
    return status


if __name__ == "__main__":
    sys.exit(main())
