"""Command-line front end: ``stablenn <command> [options]``.

Commands: predict, simulate, verify, tailscan, surface, sample.  Settings come
from presets, a config file and ``--set key=value`` flags, applied in that
order.  Config files are INI text whose keys are dotted (``network.alpha``),
either written out in full or grouped under ``[network]``-style sections;
JSON files holding a flat ``{"network.alpha": ...}`` object are accepted too,
so the ``config`` echoed by a JSON run can be fed straight back in.

Exit codes: 0 success, 1 verification failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import itertools
import json
import sys

import numpy as np

from . import stable
from .activations import builtin
from .simulate import (
    EnsembleConfig,
    NetworkConfig,
    default_workers,
    sample_deep,
    sample_products,
    sample_shallow,
    sample_surface,
    sequential_law,
    to_csv,
    to_json,
)
from .stable import StableParams, sample
from .theory import deep_recursion, first_layer_scale, product_tail, shallow_limit
from .verify import DEFAULT_TOLERANCES, tail_scan, verify_samples

COMMANDS = ("predict", "simulate", "verify", "tailscan", "surface", "sample")


class ConfigError(ValueError):
    """Invalid or unknown configuration field."""


def _floats(text):
    if isinstance(text, (list, tuple)):
        return tuple(float(v) for v in text)
    return tuple(float(v) for v in str(text).replace(";", ",").split(",") if v.strip())


def _opt_float(text):
    return None if text in (None, "", "none", "None") else float(text)


def _choice(*options):
    def parse(text):
        if text not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return text

    return parse


def _int(text):
    v = float(text)
    if v != int(v):
        raise ValueError("expected an integer")
    return int(v)


# key -> (parser, default)
SCHEMA = {
    "model.architecture": (_choice("shallow", "deep"), "deep"),
    "activation.kind": (_choice("tanh", "identity", "relu", "odd_power", "positive_part_power"), "relu"),
    "activation.gamma": (_opt_float, None),
    "shallow.alpha0": (float, 1.0),
    "shallow.sigma0": (float, 1.0),
    "shallow.alpha1": (float, 1.0),
    "shallow.sigma1": (float, 1.0),
    "network.alpha": (float, 1.0),
    "network.sigma_w": (float, 1.0),
    "network.sigma_b": (float, 1.0),
    "network.input_x": (_floats, (1.0,)),
    "network.depth_L": (_int, 1),
    "network.bias_regime": (_choice("standard", "geometric"), "standard"),
    "network.scaling": (_choice("auto", "plain_n", "n_log_n"), "auto"),
    "ensemble.width_n": (_int, 1000),
    "ensemble.replications": (_int, 1000),
    "ensemble.seed": (_int, 0),
    "ensemble.growth_mode": (_choice("exact_sequential", "finite_width"), "exact_sequential"),
    "ensemble.block_size": (_int, 256),
    "ensemble.budget": (float, 1e10),
    "tolerances.ks": (float, DEFAULT_TOLERANCES["ks"]),
    "tolerances.alpha": (float, DEFAULT_TOLERANCES["alpha"]),
    "tolerances.scale": (float, DEFAULT_TOLERANCES["scale"]),
    "tolerances.tail": (float, DEFAULT_TOLERANCES["tail"]),
    "tailscan.draws": (_int, 10_000_000),
    "tailscan.levels": (_floats, (0.99, 0.999, 0.9999)),
    "surface.grid_min": (float, -3.0),
    "surface.grid_max": (float, 3.0),
    "surface.grid_points": (_int, 41),
    "sample.alpha": (float, 1.5),
    "sample.sigma": (float, 1.0),
    "sample.count": (_int, 100_000),
    "numerics.epsabs": (float, stable.NumericsConfig.epsabs),
    "numerics.epsrel": (float, stable.NumericsConfig.epsrel),
    "numerics.limit": (_int, stable.NumericsConfig.limit),
    "numerics.limlst": (_int, stable.NumericsConfig.limlst),
    "output.path": (str, ""),
    "output.format": (_choice("csv", "json"), "json"),
}

PRESETS = {
    "tanh": {
        "model.architecture": "shallow", "activation.kind": "tanh",
        "shallow.alpha0": 1.7, "shallow.alpha1": 1.7, "shallow.sigma0": 1.0, "shallow.sigma1": 1.0,
        "ensemble.width_n": 5000, "ensemble.replications": 10000,
    },
    "identity": {
        "model.architecture": "shallow", "activation.kind": "identity",
        "shallow.alpha0": 1.0, "shallow.alpha1": 1.0,
        "ensemble.width_n": 65536, "ensemble.replications": 4000,
        "tolerances.scale": 0.35,
    },
    "cube": {
        "model.architecture": "shallow", "activation.kind": "odd_power", "activation.gamma": 3.0,
        "shallow.alpha0": 1.5, "shallow.alpha1": 1.5,
        "ensemble.width_n": 10000, "ensemble.replications": 10000,
    },
    "z32": {
        "model.architecture": "shallow", "activation.kind": "positive_part_power", "activation.gamma": 1.5,
        "shallow.alpha0": 1.5, "shallow.alpha1": 1.0,
        "ensemble.width_n": 65536, "ensemble.replications": 4000,
        "tolerances.scale": 0.35,
    },
    "relu": {
        "model.architecture": "deep", "activation.kind": "relu",
        "network.alpha": 1.0, "network.sigma_w": 1.0, "network.sigma_b": 1.0, "network.input_x": "1",
        "network.depth_L": 2, "ensemble.width_n": 10000, "ensemble.replications": 10000,
        "tolerances.scale": 0.15,
    },
}


# --------------------------------------------------------------------------
# config loading


def _parse_value(key, raw):
    if key not in SCHEMA:
        raise ConfigError(f"unknown config key {key!r}")
    parser = SCHEMA[key][0]
    try:
        return parser(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key}: cannot parse {raw!r} ({exc})") from None


def read_config_file(path: str) -> dict:
    """Flat ``{dotted key: raw value}`` from an INI or JSON config file."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if text.lstrip().startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: expected a JSON object")
        return dict(data)
    cp = configparser.ConfigParser(interpolation=None, default_section="\0")
    cp.optionxform = str
    try:
        cp.read_string("[\0root]\n" + text, source=path)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    out = {}
    for section in cp.sections():
        for key, value in cp.items(section):
            out[key if section == "\0root" else f"{section}.{key}"] = value
    return out


def resolve_config(preset=None, file=None, overrides=(), seed=None, out=None, fmt=None) -> dict:
    """Defaults, then preset, file, ``key=value`` overrides and dedicated flags."""
    raw = {}
    if preset:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}; known: {', '.join(PRESETS)}")
        raw.update(PRESETS[preset])
    if file:
        raw.update(read_config_file(file))
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        k, v = item.split("=", 1)
        raw[k.strip()] = v.strip()
    if seed is not None:
        raw["ensemble.seed"] = seed
    if out is not None:
        raw["output.path"] = out
    if fmt is not None:
        raw["output.format"] = fmt
    cfg = {k: d for k, (_, d) in SCHEMA.items()}
    for k, v in raw.items():
        if k.startswith("derived."):
            continue  # informational values echoed by earlier runs
        cfg[k] = _parse_value(k, v)
    return cfg


def echo_config(cfg: dict) -> dict:
    """JSON-ready copy of the resolved config, excluding the output location.

    ``derived.*`` entries record values resolved at run time; they are
    skipped when the echo is read back as a config.
    """
    out = {}
    for k, v in cfg.items():
        if k.startswith("output."):
            continue
        out[k] = list(v) if isinstance(v, tuple) else v
    if cfg["model.architecture"] == "deep":
        try:
            out["derived.resolved_scaling"] = _network(cfg).resolved_scaling
        except ConfigError:
            pass
    return out


# --------------------------------------------------------------------------
# building library objects


def _activation(cfg):
    kind = cfg["activation.kind"]
    try:
        return builtin(kind, cfg["activation.gamma"]) if kind in ("odd_power", "positive_part_power") else builtin(kind)
    except ValueError as exc:
        raise ConfigError(f"activation: {exc}") from None


def _network(cfg) -> NetworkConfig:
    try:
        return NetworkConfig(
            cfg["network.alpha"], cfg["network.sigma_w"], cfg["network.sigma_b"], cfg["network.input_x"],
            cfg["network.depth_L"], _activation(cfg), cfg["network.bias_regime"], cfg["network.scaling"],
        )
    except ValueError as exc:
        raise ConfigError(f"network: {exc}") from None


def _ensemble(cfg) -> EnsembleConfig:
    try:
        return EnsembleConfig(
            cfg["ensemble.width_n"], cfg["ensemble.replications"], cfg["ensemble.seed"], cfg["ensemble.growth_mode"],
            cfg["ensemble.block_size"], cfg["ensemble.budget"],
        )
    except ValueError as exc:
        raise ConfigError(f"ensemble: {exc}") from None


def predict(cfg: dict):
    """Prediction for the configured model."""
    spec = _activation(cfg)
    if cfg["model.architecture"] == "shallow":
        return shallow_limit(cfg["shallow.alpha0"], cfg["shallow.sigma0"], cfg["shallow.alpha1"], cfg["shallow.sigma1"], spec)
    net = _network(cfg)
    sequential_law(net)  # rejects configurations outside the covered regimes
    seq = deep_recursion(net.alpha, net.sigma_w, net.sigma_b, net.input_x, net.depth_L, spec)
    return seq.prediction()


def _normalization_label(cfg) -> str:
    if cfg["model.architecture"] == "shallow":
        p = predict(cfg)
        base = "n log n" if p.log_correction else "n"
        return f"({base})^(-1/{p.scaling_exponent!r})"
    net = _network(cfg)
    if net.bias_regime == "geometric":
        return f"n^(-gamma^(l-1)/{net.alpha!r}) at layer l"
    base = "n log n" if net.resolved_scaling == "n_log_n" else "n"
    return f"({base})^(-1/{net.alpha!r})"


def simulate(cfg: dict, workers: int) -> np.ndarray:
    ens = _ensemble(cfg)
    if cfg["model.architecture"] == "shallow":
        return sample_shallow(
            ens.width_n, cfg["shallow.alpha0"], cfg["shallow.sigma0"], cfg["shallow.alpha1"], cfg["shallow.sigma1"],
            _activation(cfg), seed=ens.seed, replications=ens.replications, workers=workers,
            block_size=ens.block_size, budget=ens.budget,
        )
    return sample_deep(_network(cfg), ens, workers=workers)


def _surface_grid(cfg, d):
    axis = np.linspace(cfg["surface.grid_min"], cfg["surface.grid_max"], cfg["surface.grid_points"])
    return np.array(list(itertools.product(axis, repeat=d)))


# --------------------------------------------------------------------------
# command handlers; each returns (text, exit status)


def _cmd_predict(cfg, workers):
    pred = predict(cfg)
    payload = {"config": echo_config(cfg), "prediction": pred.to_dict()}
    if cfg["model.architecture"] == "deep":
        net = _network(cfg)
        payload["prediction"]["first_layer_scale"] = first_layer_scale(net.alpha, net.sigma_w, net.sigma_b, net.input_x)
    return json.dumps(payload, sort_keys=True, indent=2) + "\n", 0


def _cmd_simulate(cfg, workers):
    values = simulate(cfg, workers)
    conf = echo_config(cfg)
    label = _normalization_label(cfg)
    if cfg["output.format"] == "csv":
        return to_csv(values, conf, label), 0
    return to_json(values, conf, cfg["ensemble.seed"], label) + "\n", 0


def _cmd_verify(cfg, workers):
    values = simulate(cfg, workers)
    pred = predict(cfg)
    tol = {k.split(".", 1)[1]: v for k, v in cfg.items() if k.startswith("tolerances.")}
    report = verify_samples(values, pred, tol, width=cfg["ensemble.width_n"], seed=cfg["ensemble.seed"],
                            config=echo_config(cfg))
    text = report.to_json(indent=2) + "\n" if cfg["output.format"] == "json" else report.to_text() + "\n"
    return text, 0 if report.passed else 1


def _cmd_tailscan(cfg, workers):
    spec = _activation(cfg)
    a0, s0, a1, s1 = (cfg[f"shallow.{k}"] for k in ("alpha0", "sigma0", "alpha1", "sigma1"))
    asym = product_tail(a1, s1, a0, s0, spec)
    draws = sample_products(a1, s1, a0, s0, spec, cfg["tailscan.draws"], seed=cfg["ensemble.seed"], workers=workers)
    rows = tail_scan(draws, asym, cfg["tailscan.levels"])
    buf = io.StringIO()
    for k, v in sorted(echo_config(cfg).items()):
        buf.write(f"# {k} = {json.dumps(v)}\n")
    label = "S(z) * z^index / log z" if asym.log_factor else "S(z) * z^index"
    buf.write(f"# observed = {label}; index = {asym.index!r}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["level", "z", "observed", "predicted", "ratio"])
    for r in rows:
        w.writerow([repr(r.level), repr(r.z), repr(r.observed), repr(r.predicted), repr(r.ratio)])
    return buf.getvalue(), 0


def _cmd_surface(cfg, workers):
    net = _network(cfg)
    grid = _surface_grid(cfg, len(net.input_x))
    values = sample_surface(net, grid, cfg["ensemble.width_n"], seed=cfg["ensemble.seed"])
    buf = io.StringIO()
    for k, v in sorted(echo_config(cfg).items()):
        buf.write(f"# {k} = {json.dumps(v)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"x{i + 1}" for i in range(grid.shape[1])] + ["value"])
    for point, v in zip(grid, values):
        w.writerow([repr(float(c)) for c in point] + [repr(float(v))])
    return buf.getvalue(), 0


def _cmd_sample(cfg, workers):
    try:
        params = StableParams(cfg["sample.alpha"], sigma=cfg["sample.sigma"])
    except ValueError as exc:
        raise ConfigError(f"sample: {exc}") from None
    values = sample(params, cfg["sample.count"], cfg["ensemble.seed"])
    conf = echo_config(cfg)
    if cfg["output.format"] == "csv":
        return to_csv(values, conf, "raw draws"), 0
    return to_json(values, conf, cfg["ensemble.seed"], "raw draws") + "\n", 0


HANDLERS = {
    "predict": _cmd_predict,
    "simulate": _cmd_simulate,
    "verify": _cmd_verify,
    "tailscan": _cmd_tailscan,
    "surface": _cmd_surface,
    "sample": _cmd_sample,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stablenn", description="Large-width limits of Stable neural networks.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="INI or JSON config file with dotted keys")
    parser.add_argument("--preset", choices=sorted(PRESETS), help="start from a named example configuration")
    parser.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="override one config field (repeatable)")
    parser.add_argument("--seed", type=int, help="shortcut for ensemble.seed")
    parser.add_argument("--workers", type=int, help="worker threads (default: $STABLENN_WORKERS or 1)")
    parser.add_argument("--out", help="output path (default: stdout)")
    parser.add_argument("--format", choices=("csv", "json"), help="output format")
    return parser


def _apply_numerics(cfg):
    wanted = {k.split(".", 1)[1]: v for k, v in cfg.items() if k.startswith("numerics.")}
    if any(getattr(stable.numerics, k) != v for k, v in wanted.items()):
        stable.configure_numerics(**wanted)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args.preset, args.config, args.overrides, args.seed, args.out, args.format)
        _apply_numerics(cfg)
        workers = args.workers if args.workers is not None else default_workers()
        if workers < 1:
            raise ConfigError("--workers must be >= 1")
        text, status = HANDLERS[args.command](cfg, workers)
    except ValueError as exc:
        # ConfigError, BudgetError and parameter validation all land here
        print(f"stablenn: error: {exc}", file=sys.stderr)
        return 2
    path = cfg["output.path"]
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
