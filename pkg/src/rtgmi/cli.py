"""Command-line front end.

Commands: capacity, gmi, ladder, simulate, sweep.  Parameters come from an
optional flat key=value config file plus flags; flags win.  All SNR inputs
are in dB at this layer and converted to linear internally.  Outputs are a
versioned report.json, CSVs, and optional SVG plots, all deterministic for a
fixed (config, seed) so reruns are byte-identical.

Exit codes: 0 success, 1 numerical-consistency failure, 2 configuration
error, 3 unwritable output directory.
"""

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from .capacity import (DEFAULT_MC_SAMPLES, NATS_TO_BITS, psk_capacity,
                       psk_capacity_quadrature, rate_ladder)
from .errors import ConfigurationError, NumericalConsistencyError
from .fading import Ar1Fading, ClarkeFading, TabulatedFading
from .gmi import DEFAULT_MU_RANGE, gmi
from .prediction import DEFAULT_PREDICTOR_ORDER
from .psk import make_constellation, synthesize_block_at_rho
from .simulate import SchemeConfig, report_to_json, run
from .svgplot import LinePlot
from .utils import derive_seed

COMMANDS = ("capacity", "gmi", "ladder", "simulate", "sweep")
_NAMED_CONSTELLATIONS = {"bpsk": 2, "qpsk": 4, "8psk": 8, "16psk": 16}


class OutputDirError(OSError):
    pass


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def _parse_bool(text):
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigurationError(f"expected a boolean, got {text!r}")


def _parse_constellation(text):
    low = str(text).strip().lower()
    if low in _NAMED_CONSTELLATIONS:
        return _NAMED_CONSTELLATIONS[low]
    try:
        order = int(low)
    except ValueError:
        raise ConfigurationError(
            f"constellation must be one of {sorted(_NAMED_CONSTELLATIONS)} "
            f"or an integer order, got {text!r}") from None
    if order < 2:
        raise ConfigurationError("constellation order must be >= 2")
    return order


def _parse_grid(text):
    """START:STEP:STOP inclusive grid, all in dB."""
    parts = str(text).split(":")
    if len(parts) != 3:
        raise ConfigurationError(
            f"snr_db grid must be START:STEP:STOP, got {text!r}")
    try:
        start, step, stop = (float(p) for p in parts)
    except ValueError:
        raise ConfigurationError(
            f"snr_db grid must be numeric START:STEP:STOP, got {text!r}") from None
    if step <= 0 or stop < start:
        raise ConfigurationError("snr_db grid needs step > 0 and stop >= start")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [start + i * step for i in range(count)]


@dataclass(frozen=True)
class Param:
    parse: callable
    required: bool = False
    default: object = None


_COMMON = {
    "seed": Param(int, default=0),
    "output_dir": Param(str, default="."),
    "format": Param(str, default="both"),
    "plot": Param(_parse_bool, default=False),
}

_MODEL_KEYS = {
    "model": Param(str),
    "alpha": Param(float),
    "doppler": Param(float),
    "table": Param(str),
}

SCHEMAS = {
    "capacity": {
        **_COMMON,
        "constellation": Param(_parse_constellation, required=True),
        "snr_db": Param(float, required=True),
        "samples": Param(int, default=DEFAULT_MC_SAMPLES),
        "quadrature": Param(_parse_bool, default=False),
    },
    "gmi": {
        **_COMMON, **_MODEL_KEYS,
        "constellation": Param(_parse_constellation, required=True),
        "snr_db": Param(float, required=True),
        "K": Param(int, default=100_000),
        "curve_points": Param(int, default=33),
        "mu_min": Param(float, default=DEFAULT_MU_RANGE[0]),
        "mu_max": Param(float, default=DEFAULT_MU_RANGE[1]),
    },
    "ladder": {
        **_COMMON, **_MODEL_KEYS,
        "constellation": Param(_parse_constellation, required=True),
        "snr_db": Param(float, required=True),
        "L": Param(int, required=True),
        "predictor_order": Param(int, default=DEFAULT_PREDICTOR_ORDER),
        "samples": Param(int, default=DEFAULT_MC_SAMPLES),
    },
    "simulate": {
        **_COMMON, **_MODEL_KEYS,
        "constellation": Param(_parse_constellation, required=True),
        "snr_db": Param(float, required=True),
        "L": Param(int, required=True),
        "K": Param(int, required=True),
        "rate_fraction": Param(float, required=True),
        "trials": Param(int, default=1000),
        "genie": Param(_parse_bool, default=False),
        "predictor_order": Param(int, default=DEFAULT_PREDICTOR_ORDER),
        "error_target": Param(float, default=0.05),
        "gmi_K": Param(int, default=100_000),
    },
    "sweep": {
        **_COMMON,
        "constellation": Param(_parse_constellation, required=True),
        "snr_db": Param(_parse_grid, required=True),
        "samples": Param(int, default=DEFAULT_MC_SAMPLES),
    },
}

# commands whose model parameter is mandatory
_NEEDS_MODEL = {"gmi", "ladder", "simulate"}


def read_config_file(path):
    """Flat key=value lines; '#' starts a comment; blank lines skipped."""
    raw = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config file {path}: {exc}") from None
    for lineno, line in enumerate(lines, 1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigurationError(
                f"{path}:{lineno}: expected key=value, got {stripped!r}")
        key, value = stripped.split("=", 1)
        raw[key.strip()] = value.strip()
    return raw


def merge_parameters(command: str, file_values: dict, flag_values: dict) -> dict:
    schema = SCHEMAS[command]
    params = {key: spec.default for key, spec in schema.items()}
    for key, text in file_values.items():
        if key not in schema:
            raise ConfigurationError(
                f"unknown key for {command}: {key!r}")
        try:
            params[key] = schema[key].parse(text)
        except ConfigurationError:
            raise
        except (TypeError, ValueError):
            raise ConfigurationError(
                f"bad value for {key}: {text!r}") from None
    for key, value in flag_values.items():
        if value is None:
            continue
        if key not in schema:
            raise ConfigurationError(f"unknown key for {command}: {key!r}")
        params[key] = value
    for key, spec in schema.items():
        if spec.required and params[key] is None:
            raise ConfigurationError(f"missing required key: {key}")
    if params["format"] not in ("json", "csv", "both"):
        raise ConfigurationError(
            f"format must be json, csv, or both, got {params['format']!r}")
    if command in _NEEDS_MODEL and params.get("model") is None:
        raise ConfigurationError("missing required key: model")
    return params


def build_model(params):
    name = str(params["model"]).strip().lower()
    given = {k for k in ("alpha", "doppler", "table") if params.get(k) is not None}
    wanted = {"ar1": {"alpha"}, "clarke": {"doppler"}, "tabulated": {"table"}}
    if name not in wanted:
        raise ConfigurationError(
            f"model must be ar1, clarke, or tabulated, got {params['model']!r}")
    missing = wanted[name] - given
    extra = given - wanted[name]
    if missing:
        raise ConfigurationError(
            f"missing required key for model {name}: {sorted(missing)[0]}")
    if extra:
        raise ConfigurationError(
            f"key {sorted(extra)[0]!r} does not apply to model {name}")
    if name == "ar1":
        return Ar1Fading(float(params["alpha"]))
    if name == "clarke":
        return ClarkeFading(float(params["doppler"]))
    return TabulatedFading.from_csv(params["table"])


def _prepare_output_dir(path):
    try:
        os.makedirs(path, exist_ok=True)
        probe = os.path.join(path, ".write_probe")
        with open(probe, "w"):
            pass
        os.remove(probe)
    except OSError as exc:
        raise OutputDirError(f"output directory {path!r} is not writable: {exc}")


def _write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _run_capacity(params, out):
    rho = db_to_linear(params["snr_db"])
    est = psk_capacity(params["constellation"], rho, params["samples"],
                       params["seed"])
    payload = {
        "schema_version": 1,
        "command": "capacity",
        "constellation_order": params["constellation"],
        "snr_db": params["snr_db"],
        "rho_linear": rho,
        "samples": params["samples"],
        "seed": params["seed"],
        "capacity_nats": est.nats,
        "capacity_bits": est.bits,
        "ci_nats": est.ci,
        "clamped": est.clamped,
    }
    if params["quadrature"]:
        payload["quadrature_nats"] = psk_capacity_quadrature(
            params["constellation"], rho)
    if params["format"] in ("json", "both"):
        _write_json(os.path.join(out, "report.json"), payload)
    if params["format"] in ("csv", "both"):
        with open(os.path.join(out, "capacity.csv"), "w", newline="") as fh:
            fh.write("snr_db,rho_linear,capacity_nats,capacity_bits,ci_nats\n")
            fh.write(f"{params['snr_db']!r},{rho!r},{est.nats!r},"
                     f"{est.bits!r},{est.ci!r}\n")
    print(f"capacity: {est.bits:.6f} bits/symbol "
          f"+/- {est.ci * NATS_TO_BITS:.6f} (95% CI)")
    return 0


def _run_gmi(params, out):
    model = build_model(params)
    rho = db_to_linear(params["snr_db"])
    const = make_constellation(params["constellation"])
    block = synthesize_block_at_rho(model, rho, const, params["K"],
                                    derive_seed(params["seed"], 1))
    if not params["mu_min"] < params["mu_max"] < 0.0:
        raise ConfigurationError("need mu_min < mu_max < 0")
    report = gmi(block, const, mu_range=(params["mu_min"], params["mu_max"]),
                 curve_points=params["curve_points"],
                 seed=derive_seed(params["seed"], 2))
    payload = {
        "schema_version": 1,
        "command": "gmi",
        "model": params["model"],
        "constellation_order": params["constellation"],
        "snr_db": params["snr_db"],
        "rho_linear": rho,
        "block_length": params["K"],
        "seed": params["seed"],
        "mu_star": report.mu_star,
        "gmi_nats": report.gmi,
        "gmi_bits": report.gmi * NATS_TO_BITS,
        "ci_nats": report.ci_halfwidth,
        "g_at_minus_one_nats": report.g_at_minus_one,
        "g_at_minus_one_ci_nats": report.g_at_minus_one_ci,
        "clamped": report.clamped,
    }
    for key in ("alpha", "doppler", "table"):
        if params.get(key) is not None:
            payload[key] = params[key]
    if params["format"] in ("json", "both"):
        _write_json(os.path.join(out, "report.json"), payload)
    if params["format"] in ("csv", "both"):
        report.curve_to_csv(os.path.join(out, "lambda_curve.csv"))
    if params["plot"]:
        plot = LinePlot(title="log-MGF of the decoding metric",
                        xlabel="mu", ylabel="lambda_hat (nats)")
        plot.add("lambda_hat", report.lambda_curve[:, 0],
                 report.lambda_curve[:, 1])
        plot.save(os.path.join(out, "lambda_curve.svg"))
    print(f"gmi: {report.gmi * NATS_TO_BITS:.6f} bits/symbol "
          f"+/- {report.ci_halfwidth * NATS_TO_BITS:.6f} (95% CI), "
          f"mu* = {report.mu_star:.4f}")
    return 0


def _run_ladder(params, out):
    model = build_model(params)
    snr = db_to_linear(params["snr_db"])
    ladder = rate_ladder(model, params["L"], snr, params["constellation"],
                         params["predictor_order"], params["samples"],
                         params["seed"])
    payload = {
        "schema_version": 1,
        "command": "ladder",
        "model": params["model"],
        "constellation_order": params["constellation"],
        "snr_db": params["snr_db"],
        "snr_linear": snr,
        "interleave_depth": params["L"],
        "predictor_order": params["predictor_order"],
        "samples": params["samples"],
        "seed": params["seed"],
        "rho_linear": [float(v) for v in ladder.rho],
        "capacity_nats": [float(v) for v in ladder.capacity_nats],
        "capacity_ci_nats": [float(v) for v in ladder.capacity_ci],
        "l_average_nats": ladder.l_average,
        "l_average_bits": ladder.l_average * NATS_TO_BITS,
        "rt_estimate_nats": ladder.rt_estimate,
        "convergence_gap_nats": ladder.convergence_gap,
    }
    for key in ("alpha", "doppler", "table"):
        if params.get(key) is not None:
            payload[key] = params[key]
    if params["format"] in ("json", "both"):
        _write_json(os.path.join(out, "report.json"), payload)
    if params["format"] in ("csv", "both"):
        ladder.to_csv(os.path.join(out, "ladder.csv"))
    if params["plot"]:
        plot = LinePlot(title="per-subchannel rate ladder",
                        xlabel="subchannel index", ylabel="rate (bits/symbol)")
        plot.add("capacity", np.arange(params["L"]),
                 ladder.capacity_nats * NATS_TO_BITS)
        plot.save(os.path.join(out, "ladder.svg"))
    print(f"ladder: l_average {ladder.l_average * NATS_TO_BITS:.6f} bits/symbol "
          f"+/- {float(ladder.capacity_ci.max()) * NATS_TO_BITS:.6f} (95% CI), "
          f"convergence gap {ladder.convergence_gap * NATS_TO_BITS:.6f}")
    return 0


def _run_simulate(params, out):
    model = build_model(params)
    config = SchemeConfig(
        model=model,
        interleave_depth=params["L"],
        block_length=params["K"],
        constellation_order=params["constellation"],
        snr=db_to_linear(params["snr_db"]),
        rate_fraction=params["rate_fraction"],
        n_trials=params["trials"],
        master_seed=params["seed"],
        predictor_order=params["predictor_order"],
        genie=params["genie"],
        error_target=params["error_target"],
        gmi_block_length=params["gmi_K"],
    )
    report = run(config)
    if params["format"] in ("json", "both"):
        report_to_json(report, os.path.join(out, "report.json"))
    if params["format"] in ("csv", "both"):
        report.to_csv(os.path.join(out, "simulate.csv"))
    if params["plot"]:
        ls = np.arange(1, config.interleave_depth)
        plot = LinePlot(title="per-subchannel block error",
                        xlabel="subchannel index", ylabel="block error rate")
        plot.add("block error", ls, report.per_psc_block_error[1:])
        budget = config.error_target / config.interleave_depth
        plot.add("budget", ls, np.full(len(ls), budget))
        plot.save(os.path.join(out, "simulate.svg"))
    print(f"simulate: achieved {report.achieved_rate * NATS_TO_BITS:.6f} "
          f"bits/symbol, overall block error {report.overall_error:.4f} "
          f"+/- {report.overall_ci:.4f} (95% CI)")
    return 0


def _run_sweep(params, out):
    points = []
    for i, snr_db in enumerate(params["snr_db"]):
        rho = db_to_linear(snr_db)
        est = psk_capacity(params["constellation"], rho, params["samples"],
                           derive_seed(params["seed"], i))
        points.append((snr_db, rho, est))
    payload = {
        "schema_version": 1,
        "command": "sweep",
        "constellation_order": params["constellation"],
        "samples": params["samples"],
        "seed": params["seed"],
        "snr_db": [p[0] for p in points],
        "capacity_nats": [p[2].nats for p in points],
        "capacity_bits": [p[2].nats * NATS_TO_BITS for p in points],
        "ci_nats": [p[2].ci for p in points],
    }
    if params["format"] in ("json", "both"):
        _write_json(os.path.join(out, "report.json"), payload)
    if params["format"] in ("csv", "both"):
        with open(os.path.join(out, "sweep.csv"), "w", newline="") as fh:
            fh.write("snr_db,rho_linear,capacity_nats,capacity_bits,ci_nats\n")
            for snr_db, rho, est in points:
                fh.write(f"{snr_db!r},{rho!r},{est.nats!r},"
                         f"{est.bits!r},{est.ci!r}\n")
    if params["plot"]:
        plot = LinePlot(title="capacity vs SNR",
                        xlabel="SNR (dB)", ylabel="capacity (bits/symbol)")
        plot.add("capacity", [p[0] for p in points],
                 [p[2].bits for p in points])
        plot.save(os.path.join(out, "sweep.svg"))
    bits = [p[2].bits for p in points]
    max_ci = max(p[2].ci for p in points) * NATS_TO_BITS
    print(f"sweep: {len(points)} points, capacity {min(bits):.6f}.."
          f"{max(bits):.6f} bits/symbol, max CI +/- {max_ci:.6f}")
    return 0


_RUNNERS = {
    "capacity": _run_capacity,
    "gmi": _run_gmi,
    "ladder": _run_ladder,
    "simulate": _run_simulate,
    "sweep": _run_sweep,
}


def _add_common_flags(sub):
    sub.add_argument("--config", default=None, help="flat key=value file")
    sub.add_argument("--output-dir", dest="output_dir", default=None)
    sub.add_argument("--seed", type=int, default=None)
    sub.add_argument("--format", choices=("json", "csv", "both"), default=None)
    sub.add_argument("--plot", action="store_const", const=True, default=None)


def _add_model_flags(sub):
    sub.add_argument("--model", default=None,
                     help="ar1 | clarke | tabulated")
    sub.add_argument("--alpha", type=float, default=None)
    sub.add_argument("--doppler", type=float, default=None)
    sub.add_argument("--table", default=None,
                     help="CSV autocorrelation table (lag,re,im)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="rtgmi",
        description="PSK fading-channel rate estimation and recursive "
                    "decision-directed training simulation")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("capacity", help="memoryless PSK capacity at one SNR")
    _add_common_flags(p)
    p.add_argument("--constellation", default=None)
    p.add_argument("--snr-db", dest="snr_db", type=float, default=None)
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--quadrature", action="store_const", const=True,
                   default=None)

    p = subs.add_parser("gmi", help="GMI of the nearest-neighbor metric")
    _add_common_flags(p)
    _add_model_flags(p)
    p.add_argument("--constellation", default=None)
    p.add_argument("--snr-db", dest="snr_db", type=float, default=None)
    p.add_argument("--K", type=int, default=None, help="block length")
    p.add_argument("--curve-points", dest="curve_points", type=int,
                   default=None)
    p.add_argument("--mu-min", dest="mu_min", type=float, default=None)
    p.add_argument("--mu-max", dest="mu_max", type=float, default=None)

    p = subs.add_parser("ladder", help="per-subchannel rate ladder")
    _add_common_flags(p)
    _add_model_flags(p)
    p.add_argument("--constellation", default=None)
    p.add_argument("--snr-db", dest="snr_db", type=float, default=None)
    p.add_argument("--L", type=int, default=None, help="interleave depth")
    p.add_argument("--predictor-order", dest="predictor_order", type=int,
                   default=None)
    p.add_argument("--samples", type=int, default=None)

    p = subs.add_parser("simulate", help="end-to-end recursive training run")
    _add_common_flags(p)
    _add_model_flags(p)
    p.add_argument("--constellation", default=None)
    p.add_argument("--snr-db", dest="snr_db", type=float, default=None)
    p.add_argument("--L", type=int, default=None, help="interleave depth")
    p.add_argument("--K", type=int, default=None, help="codeword length")
    p.add_argument("--rate-fraction", dest="rate_fraction", type=float,
                   default=None)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--genie", action="store_const", const=True, default=None)
    p.add_argument("--predictor-order", dest="predictor_order", type=int,
                   default=None)
    p.add_argument("--error-target", dest="error_target", type=float,
                   default=None)
    p.add_argument("--gmi-K", dest="gmi_K", type=int, default=None)

    p = subs.add_parser("sweep", help="capacity over an SNR grid")
    _add_common_flags(p)
    p.add_argument("--constellation", default=None)
    p.add_argument("--snr-db", dest="snr_db", default=None,
                   help="START:STEP:STOP in dB")
    p.add_argument("--samples", type=int, default=None)

    return parser


def _flag_values(command: str, args: argparse.Namespace) -> dict:
    schema = SCHEMAS[command]
    out = {}
    for key in schema:
        if not hasattr(args, key):
            continue
        value = getattr(args, key)
        if value is None:
            continue
        # string-typed flags share the config-file parsers
        if key in ("constellation", "snr_db") and isinstance(value, str):
            value = schema[key].parse(value)
        out[key] = value
    return out


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        file_values = read_config_file(args.config) if args.config else {}
        flags = _flag_values(args.command, args)
        params = merge_parameters(args.command, file_values, flags)
        _prepare_output_dir(params["output_dir"])
        return _RUNNERS[args.command](params, params["output_dir"])
    except OutputDirError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except NumericalConsistencyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
