"""Command-line front end: ``dynprobit simulate | fit | compare``.

Exit codes: 0 success, 1 I/O failure, 2 config error, 3 data error,
4 numerical error.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .compare import build_report
from .errors import (
    CapacityError,
    DegenerateModelError,
    DegenerateWeightsError,
    DomainError,
    InvalidInputError,
    InvalidSpecError,
    NumericalError,
)
from .io import (
    ConfigError,
    DataError,
    RunConfig,
    read_data,
    write_bands,
    write_data,
    write_json,
    write_results,
    write_truth,
)
from .mf import mf_fit, mf_moments
from .model import ModelSpec, build_design, build_prior_covariance, simulate_data
from .pfm import CaviConfig, cavi_fit, pfm_moments
from .sun import compute_sun_params, estimate_moments, sample_smoothing_iid
from .truncnorm import OrthantSamplerConfig

log = logging.getLogger("dynprobit")

EXIT_IO, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERICAL = 1, 2, 3, 4
METHOD_ORDER = ("iid", "pfm", "mf")


def _resolve(args):
    cfg = RunConfig.load(args.config)
    for name in ("data", "out", "method", "draws", "seed"):
        value = getattr(args, name, None)
        if value is not None:
            setattr(cfg, name, value)
    if getattr(args, "reference", None) is not None:
        cfg.reference = args.reference
    if cfg.out is None:
        raise ConfigError("no output directory: pass --out or set 'out' in the config")
    if cfg.draws < 2:
        raise ConfigError("draws must be at least 2")
    if cfg.seed < 0:
        raise ConfigError("seed must be nonnegative")
    return cfg


def _out_dir(cfg):
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def simulate_covariates(kind, n, p, rng):
    if kind == "gaussian":
        return rng.standard_normal((n, p))
    x = np.ones((n, p))
    if p > 1:
        if kind == "intercept_binary":
            x[:, 1:] = rng.integers(0, 2, size=(n, p - 1))
        else:
            x[:, 1:] = rng.standard_normal((n, p - 1))
    return x


def cmd_simulate(cfg: RunConfig):
    n = cfg.simulate.get("n", 241)
    kind = cfg.simulate.get("covariates", "intercept_binary")
    p = cfg.p or 2
    cov_ss, sim_ss = np.random.SeedSequence(cfg.seed).spawn(2)
    x = simulate_covariates(kind, n, p, np.random.default_rng(cov_ss))
    cfg.p = p
    spec = cfg.model_spec(x)
    sim = simulate_data(spec, sim_ss)
    out = _out_dir(cfg)
    write_data(out / "data.csv", sim.y, x)
    write_truth(out / "truth.csv", sim.theta)
    write_json(
        out / "metadata.json",
        {"command": "simulate", "version": __version__, "seed": cfg.seed, "n": n, "p": p, "config": cfg.to_dict()},
    )
    log.info("simulated n=%d p=%d into %s", n, p, out)


def _load_model(cfg):
    if cfg.data is None:
        raise ConfigError("no data file: pass --data or set 'data' in the config")
    y, x = read_data(cfg.data)
    spec = cfg.model_spec(x)
    return spec, build_prior_covariance(spec), build_design(spec, y)


def _sampler_config(cfg):
    try:
        return OrthantSamplerConfig(seed=cfg.seed, **cfg.sampler)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"sampler: {exc}") from None


def run_method(method, cfg, prior, design):
    if method == "iid":
        start = time.perf_counter()
        params = compute_sun_params(prior, design)
        draws = sample_smoothing_iid(params, cfg.draws, _sampler_config(cfg))
        return estimate_moments(draws, wall_time_seconds=time.perf_counter() - start)
    cavi = CaviConfig(**cfg.cavi)
    if method == "pfm":
        return pfm_moments(cavi_fit(prior, design, cavi), design)
    if method == "mf":
        return mf_moments(mf_fit(prior, design, cavi.tolerance, cavi.max_sweeps))
    raise ConfigError(f"unknown method {method!r}")


def _metadata(command, cfg, spec, summaries):
    return {
        "command": command,
        "version": __version__,
        "seed": cfg.seed,
        "n": spec.n,
        "p": spec.p,
        "data": cfg.data,
        "config": cfg.to_dict(),
        "methods": {name: s.diagnostics for name, s in summaries.items()},
    }


def cmd_fit(cfg: RunConfig):
    spec, prior, design = _load_model(cfg)
    methods = METHOD_ORDER if cfg.method == "all" else (cfg.method,)
    summaries = {m: run_method(m, cfg, prior, design) for m in methods}
    out = _out_dir(cfg)
    write_results(out / "results.csv", summaries.values(), spec.p)
    write_json(out / "metadata.json", _metadata("fit", cfg, spec, summaries))
    write_json(out / "timings.json", {m: s.wall_time_seconds for m, s in summaries.items()})


def cmd_compare(cfg: RunConfig):
    spec, prior, design = _load_model(cfg)
    summaries = {m: run_method(m, cfg, prior, design) for m in METHOD_ORDER}
    report = build_report(summaries, cfg.reference, spec.p)
    out = _out_dir(cfg)
    write_results(out / "results.csv", summaries.values(), spec.p)
    write_bands(out / "bands.csv", summaries.values(), spec.p)
    write_json(out / "comparison.json", report.accuracy_doc())
    write_json(out / "metadata.json", _metadata("compare", cfg, spec, summaries))
    write_json(out / "timings.json", report.wall_times)
    for name, m in report.metrics.items():
        log.info("%s vs %s: mean |diff| %s, log-sd |diff| %s", name, cfg.reference, m["mean_abs_diff"], m["log_sd_abs_diff"])
    return report


def build_parser():
    parser = argparse.ArgumentParser(prog="dynprobit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("simulate", "simulate a synthetic data set"),
        ("fit", "posterior means and sds with one or all methods"),
        ("compare", "accuracy and timing of pfm and mf against a reference"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int)
        if name != "simulate":
            p.add_argument("--data", help="data CSV with header t,y,x1..xp")
            p.add_argument("--draws", type=int, help="draws for the i.i.d. sampler")
        if name == "fit":
            p.add_argument("--method", choices=["iid", "pfm", "mf", "all"])
        if name == "compare":
            p.add_argument("--reference", choices=list(METHOD_ORDER))
    return parser


COMMANDS = {"simulate": cmd_simulate, "fit": cmd_fit, "compare": cmd_compare}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    try:
        cfg = _resolve(args)
        COMMANDS[args.command](cfg)
    except (ConfigError, InvalidSpecError) as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except (DataError, InvalidInputError) as exc:
        log.error("%s", exc)
        return EXIT_DATA
    except (DomainError, DegenerateModelError, CapacityError, DegenerateWeightsError, NumericalError, np.linalg.LinAlgError) as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERICAL
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_IO
    return 0


if __name__ == "__main__":
    sys.exit(main())
