"""Command-line front end: JSON-configured runs emitting plot-ready CSV.

Every output starts with ``#``-prefixed metadata echoing the fully resolved
configuration and the package version, so a run can be reproduced from its
own output. Exit codes: 0 success, 1 configuration error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__, amm, gaussian, hydro, mclab, nongaussian, odes, pricing
from .numerics import QuadratureError

COMMANDS = ("density", "price", "swap", "bond", "amm", "hydro", "mc-verify", "implied-vol")


class ConfigError(ValueError):
    pass


def _thread_cap() -> int:
    raw = os.environ.get("AFFINE_KELVIN_THREADS", "")
    if not raw:
        return 1
    try:
        val = int(raw)
    except ValueError as exc:
        raise ConfigError(f"AFFINE_KELVIN_THREADS must be an integer, got {raw!r}") from exc
    return max(1, val)


def _parse_range(text: str) -> np.ndarray:
    """start:stop:count range or comma-separated list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"range must be start:stop:count, got {text!r}")
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        return np.linspace(start, stop, count)
    return np.array([float(v) for v in text.split(",") if v])


def _resolve(schema: dict, args: argparse.Namespace) -> dict:
    """Merge config-file values and flag overrides against the schema."""
    config = {}
    path = getattr(args, "config", None)
    if path:
        try:
            with open(path) as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        unknown = set(loaded) - set(schema)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        config.update(loaded)
    for key, (typ, default) in schema.items():
        flag = getattr(args, key, None)
        if flag is not None:
            config[key] = flag
        elif key not in config:
            if default is None:
                raise ConfigError(f"missing required parameter {key!r}")
            config[key] = default
        if typ is float:
            config[key] = float(config[key])
        elif typ is int:
            config[key] = int(config[key])
    return config


def _emit(args, config: dict, command: str, columns: list[str], rows: list[tuple],
          warnings: list[str] | None = None) -> None:
    lines = [f"# affine-kelvin {__version__}",
             f"# command: {command}",
             f"# config: {json.dumps(config, sort_keys=True)}"]
    for w in warnings or []:
        lines.append(f"# warning: {w}")
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    text = "\n".join(lines) + "\n"
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _fmt(v) -> str:
    if isinstance(v, float):
        return format(v, ".12g")
    return str(v)


# ---------------------------------------------------------------------------
# subcommand implementations

DENSITY_SCHEMA = {
    "model": (str, None), "T": (float, 1.0), "b": (float, 0.0), "sigma": (float, 1.0),
    "chi": (float, 0.1), "kappa": (float, 1.0), "epsilon": (float, 0.2),
    "a": (float, 1.0), "x0": (float, 0.0), "y0": (float, 0.0),
    "grid": (str, "64x64"), "span": (float, 4.0),
}


def _cmd_density(args):
    cfg = _resolve(DENSITY_SCHEMA, args)
    nx, ny = (int(v) for v in cfg["grid"].split("x"))
    T, model = cfg["T"], cfg["model"]
    rows = []
    if model == "kolmogorov":
        law = gaussian.kolmogorov_tpdf(cfg["b"], cfg["sigma"], 0.0, cfg["x0"], cfg["y0"], T)
    elif model == "augmented_ou":
        law = gaussian.augmented_ou_tpdf(
            gaussian.OUParams(cfg["chi"], cfg["kappa"], cfg["epsilon"]),
            0.0, cfg["x0"], cfg["y0"], T)
    elif model == "feller":
        params = nongaussian.FellerParams(cfg["chi"], cfg["kappa"], cfg["epsilon"])
        mean = params.theta + (cfg["y0"] - params.theta) * gaussian.A_kappa(cfg["kappa"], T)
        ybars = np.linspace(1e-4, mean + cfg["span"] * math.sqrt(mean), nx * ny)
        for yb in ybars:
            rows.append((yb, nongaussian.feller_tpdf(params, nongaussian.TYPE_I,
                                                     0.0, cfg["y0"], T, float(yb))))
        _emit(args, cfg, "density", ["ybar", "density"], rows)
        return
    elif model == "anomalous_ou":
        center = cfg["chi"] / cfg["kappa"]
        ybars = np.linspace(center - cfg["span"], center + cfg["span"], nx * ny)
        for yb in ybars:
            rows.append((yb, nongaussian.anomalous_ou_tpdf(
                cfg["chi"], cfg["kappa"], cfg["a"], 0.0, cfg["y0"], T, float(yb))))
        _emit(args, cfg, "density", ["ybar", "density"], rows)
        return
    else:
        raise ConfigError(f"unknown density model {model!r}")
    sx = math.sqrt(law.cov[0, 0])
    sy = math.sqrt(law.cov[1, 1])
    xs = np.linspace(law.mean[0] - cfg["span"] * sx, law.mean[0] + cfg["span"] * sx, nx)
    ys = np.linspace(law.mean[1] - cfg["span"] * sy, law.mean[1] + cfg["span"] * sy, ny)
    dens = law.density_grid(xs, ys)
    for i, xv in enumerate(xs):
        for j, yv in enumerate(ys):
            rows.append((float(xv), float(yv), float(dens[i, j])))
    _emit(args, cfg, "density", ["xbar", "ybar", "density"], rows)


PRICE_SCHEMA = {
    "model": (str, None), "S": (float, 1.0), "r": (float, 0.0),
    "sigma": (float, 0.2), "sigma_hat": (float, 0.2),
    "v0": (float, 0.15), "sigma0": (float, 0.2), "chi": (float, 0.2),
    "kappa": (float, 2.0), "epsilon": (float, 0.2), "rho": (float, -0.5),
    "a0": (float, 0.04), "a1": (float, -0.02), "A": (float, 1.0),
    "style": (str, "call"), "strikes": (str, "1.0"), "mats": (str, "1.0"),
    "implied_vol": (int, 0),
}


def _price_one(model_name, cfg, K, T):
    spec = pricing.VanillaSpec(float(K), float(T), cfg["style"])
    S, r = cfg["S"], cfg["r"]
    if model_name == "black_scholes":
        return pricing.black_scholes_price(spec, S, cfg["sigma"], r)
    if model_name == "bachelier":
        return pricing.bachelier_price(spec, S, cfg["sigma_hat"], r)
    if model_name == "heston":
        model = pricing.HestonParams(cfg["v0"], cfg["chi"], cfg["kappa"],
                                     cfg["epsilon"], cfg["rho"], r)
        return pricing.heston_price(spec, S, model)
    if model_name == "stein_stein":
        model = pricing.SteinSteinParams(cfg["sigma0"], cfg["chi"], cfg["kappa"],
                                         cfg["epsilon"], cfg["rho"], r)
        return pricing.stein_stein_price(spec, S, model)
    if model_name == "path_dependent":
        model = pricing.PathDependentParams(cfg["a0"], cfg["a1"], cfg["kappa"])
        return pricing.path_dependent_price(spec, S, cfg["A"], model)
    if model_name == "asian_geometric":
        return pricing.asian_price("geometric_bs", spec, S, cfg["sigma"], r)
    if model_name == "asian_arithmetic_bachelier":
        return pricing.asian_price("arithmetic_bachelier", spec, S, cfg["sigma_hat"], r)
    raise ConfigError(f"unknown pricing model {model_name!r}")


def _cmd_price(args):
    cfg = _resolve(PRICE_SCHEMA, args)
    strikes = _parse_range(cfg["strikes"])
    mats = _parse_range(cfg["mats"])
    tasks = [(K, T) for T in mats for K in strikes]
    workers = _thread_cap()
    with ThreadPoolExecutor(max_workers=workers) as pool:
        quotes = list(pool.map(lambda kt: _price_one(cfg["model"], cfg, *kt), tasks))
    columns = ["instrument", "strike", "maturity", "value", "error_estimate", "warnings"]
    if cfg["implied_vol"]:
        columns.append("implied_vol")
    rows = []
    warnings = []
    for (K, T), quote in zip(tasks, quotes):
        iid = f"{cfg['model']}_K{K:g}_T{T:g}"
        row = [iid, float(K), float(T), quote.value, quote.stderr_or_quaderr,
               ";".join(quote.warnings)]
        if cfg["implied_vol"]:
            spec = pricing.VanillaSpec(float(K), float(T), cfg["style"])
            try:
                row.append(pricing.implied_vol(quote.value, spec, cfg["S"], cfg["r"]))
            except ValueError:
                row.append(math.nan)
        warnings.extend(quote.warnings)
        rows.append(tuple(row))
    _emit(args, cfg, "price", columns, rows, warnings)


SWAP_SCHEMA = {
    "kind": (str, None), "chi": (float, 0.1), "kappa": (float, 1.2),
    "epsilon": (float, 0.2), "y0": (float, 0.15), "mats": (str, "1.0"),
    "strike": (float, 0.0), "phi": (int, 1), "r": (float, 0.0),
}


def _cmd_swap(args):
    cfg = _resolve(SWAP_SCHEMA, args)
    rows = []
    for T in _parse_range(cfg["mats"]):
        quote = pricing.vol_var_swap(cfg["kind"], cfg["chi"], cfg["kappa"],
                                     cfg["epsilon"], cfg["y0"], 0.0, float(T),
                                     strike=cfg["strike"] or None,
                                     phi=cfg["phi"], r=cfg["r"])
        rows.append((float(T), quote.value, quote.stderr_or_quaderr))
    _emit(args, cfg, "swap", ["maturity", "value", "error_estimate"], rows)


BOND_SCHEMA = {
    "model": (str, None), "chi": (float, 0.02), "kappa": (float, 0.5),
    "epsilon": (float, 0.05), "y": (float, 0.03), "mats": (str, "1.0"),
    "option_expiry": (float, 0.0), "strike": (float, 0.0), "phi": (int, 1),
}


def _cmd_bond(args):
    cfg = _resolve(BOND_SCHEMA, args)
    if cfg["model"] == "vasicek":
        model = pricing.VasicekParams(cfg["chi"], cfg["kappa"], cfg["epsilon"])
    elif cfg["model"] == "cir":
        model = pricing.CIRParams(cfg["chi"], cfg["kappa"], cfg["epsilon"])
    else:
        raise ConfigError(f"unknown bond model {cfg['model']!r}")
    rows = []
    option = cfg["option_expiry"] > 0.0
    for T in _parse_range(cfg["mats"]):
        quote = pricing.bond_price(model, cfg["y"], 0.0, float(T))
        if option:
            if not isinstance(model, pricing.VasicekParams):
                raise ConfigError("bond options are supported for the vasicek model")
            opt = pricing.bond_option_price(model, cfg["y"], 0.0, cfg["option_expiry"],
                                            float(T), cfg["strike"], cfg["phi"])
            rows.append((float(T), quote.value, opt.value))
        else:
            rows.append((float(T), quote.value, quote.stderr_or_quaderr))
    cols = ["maturity", "bond", "option" if option else "error_estimate"]
    _emit(args, cfg, "bond", cols, rows)


AMM_SCHEMA = {
    "rule": (str, "constant_product"), "alpha": (float, 10.0), "S": (str, "0.1:5:100"),
    "hedge": (int, 0), "chi": (float, 0.2), "kappa": (float, 2.0),
    "epsilon": (float, 0.2), "rho": (float, -0.5), "v0": (float, 0.15),
    "mats": (str, "0.25,0.5,1,2"),
}


def _cmd_amm(args):
    cfg = _resolve(AMM_SCHEMA, args)
    rule = amm.PoolRule(cfg["rule"], cfg["alpha"] if cfg["rule"] == "mixed" else None)
    if cfg["hedge"]:
        model = pricing.HestonParams(cfg["v0"], cfg["chi"], cfg["kappa"],
                                     cfg["epsilon"], cfg["rho"])
        rows = [(row["T"], row["exact"], row["log_contract"], row["entropy_contract"],
                 row["gap"]) for row in amm.hedge_gap_report(model, _parse_range(cfg["mats"]))]
        _emit(args, cfg, "amm",
              ["maturity", "exact", "log_contract", "entropy_contract", "gap"], rows)
        return
    rows = []
    for S in _parse_range(cfg["S"]):
        omega, lam = amm.impermanent_loss(rule, float(S))
        rows.append((float(S), omega, lam))
    _emit(args, cfg, "amm", ["S", "omega", "lambda"], rows)


HYDRO_SCHEMA = {
    "s": (float, 0.5), "w": (float, 1.0), "nu": (float, 0.0),
    "T": (float, 100.0), "dt": (float, 1e-3), "orientations": (int, 16),
}


def _cmd_hydro(args):
    cfg = _resolve(HYDRO_SCHEMA, args)
    flow = hydro.LinearFlow.planar(cfg["s"], cfg["w"])
    rows = [(row.angle, row.growth_exponent, int(row.bounded))
            for row in hydro.classify_stability(flow, cfg["orientations"], cfg["T"],
                                                cfg["dt"], nu=cfg["nu"])]
    _emit(args, cfg, "hydro", ["angle", "growth_exponent", "bounded"], rows)


MC_SCHEMA = {
    "process": (str, None), "params": (str, "{}"), "n_paths": (int, 10000),
    "dt": (float, 0.01), "T": (float, 1.0), "seed": (int, 0),
    "scheme": (str, "euler"), "dump_samples": (str, ""),
}


def _cmd_mc_verify(args):
    cfg = _resolve(MC_SCHEMA, args)
    params = json.loads(cfg["params"]) if isinstance(cfg["params"], str) else cfg["params"]
    spec = mclab.SimSpec(cfg["dt"], cfg["n_paths"], cfg["T"], cfg["seed"], cfg["scheme"])
    result = mclab.simulate(cfg["process"], params, spec)
    rows = [(name, val, se) for name, (val, se) in result.moments().items()]
    law = _analytic_law(cfg["process"], params, cfg["T"])
    if law is not None:
        verdict = mclab.verify_density(law, result)
        for name, info in verdict.details.items():
            rows.append((f"verdict_{name}", info["z"], float(info["z"] <= 3.0)))
    if cfg["dump_samples"]:
        with open(cfg["dump_samples"], "w") as fh:
            fh.write("path_id,xbar,ybar\n")
            xs = result.terminal_x
            for i, yv in enumerate(result.terminal_y):
                xv = math.nan if xs is None else xs[i]
                fh.write(f"{i},{xv:.12g},{yv:.12g}\n")
    _emit(args, cfg, "mc-verify", ["statistic", "value", "stderr_or_flag"], rows)


def _analytic_law(process, params, T):
    if process == "kolmogorov":
        return gaussian.kolmogorov_tpdf(params["b"], params["sigma"], 0.0,
                                        params.get("x0", 0.0), params.get("y0", 0.0), T)
    if process == "ou":
        return gaussian.ou_tpdf(gaussian.OUParams(params["chi"], params["kappa"],
                                                  params["epsilon"]),
                                0.0, params["y0"], T)
    if process == "augmented_ou":
        return gaussian.augmented_ou_tpdf(
            gaussian.OUParams(params["chi"], params["kappa"], params["epsilon"]),
            0.0, params.get("x0", 0.0), params["y0"], T)
    return None


IV_SCHEMA = {
    "price": (float, None), "S": (float, 1.0), "K": (float, 1.0),
    "T": (float, 1.0), "r": (float, 0.0), "style": (str, "call"),
}


def _cmd_implied_vol(args):
    cfg = _resolve(IV_SCHEMA, args)
    spec = pricing.VanillaSpec(cfg["K"], cfg["T"], cfg["style"])
    vol = pricing.implied_vol(cfg["price"], spec, cfg["S"], cfg["r"])
    _emit(args, cfg, "implied-vol", ["implied_vol"], [(vol,)])


# ---------------------------------------------------------------------------


def _add_schema_flags(parser: argparse.ArgumentParser, schema: dict) -> None:
    for key, (typ, default) in schema.items():
        flag = "--" + key.replace("_", "-")
        parser.add_argument(flag, dest=key, type=typ if typ is not str else str,
                            default=None,
                            help=f"{key} (default: {default!r})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="affine-kelvin",
        description="Affine-process densities and derivative pricing toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    handlers = {
        "density": (DENSITY_SCHEMA, _cmd_density),
        "price": (PRICE_SCHEMA, _cmd_price),
        "swap": (SWAP_SCHEMA, _cmd_swap),
        "bond": (BOND_SCHEMA, _cmd_bond),
        "amm": (AMM_SCHEMA, _cmd_amm),
        "hydro": (HYDRO_SCHEMA, _cmd_hydro),
        "mc-verify": (MC_SCHEMA, _cmd_mc_verify),
        "implied-vol": (IV_SCHEMA, _cmd_implied_vol),
    }
    for name, (schema, handler) in handlers.items():
        p = sub.add_parser(name, help=f"{name} computation",
                           formatter_class=argparse.ArgumentDefaultsHelpFormatter)
        p.add_argument("--config", default=None, help="JSON configuration file")
        p.add_argument("--output", default=None, help="output CSV path (default: stdout)")
        _add_schema_flags(p, schema)
        p.set_defaults(handler=handler)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (QuadratureError, odes.BlowUpError, ArithmeticError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
