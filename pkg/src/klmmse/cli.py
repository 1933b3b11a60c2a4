"""Command-line front end: one-shot bounds, experiment sweeps and MC validation.

Exit codes: 0 success, 2 configuration error, 3 solver non-convergence,
4 bound violation found by ``validate``. Log verbosity is read from the
``KLMMSE_LOG_LEVEL`` environment variable (default ``WARNING``).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import time

import numpy as np

from .errors import NonConvergent
from .gaussian_core import (
    GaussianDist,
    KlBall,
    SpdMatrix,
    matrix_from_json,
    matrix_to_json,
    toeplitz_exp_cov,
    vector_from_json,
)
from .mc_validation import McConfig, mc_verify_bounds
from .saddle_solver import SolverConfig, solve_bounds
from .sweeps import (
    default_eps_grid,
    default_p_grid,
    default_snr_grid,
    sweep_eps,
    sweep_gg,
    sweep_snr,
)

log = logging.getLogger("klmmse")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NONCONVERGENT = 3
EXIT_VIOLATION = 4

LOG_ENV = "KLMMSE_LOG_LEVEL"

DEFAULT_SIGMA_0 = {"toeplitz": {"dim": 10, "rate": 0.9}}


class ConfigError(ValueError):
    pass


def covariance_from_config(obj) -> SpdMatrix:
    """Build a covariance from the inline matrix schema or a generator object.

    Accepted forms: ``{"dim": K, "rows": [...]}``,
    ``{"toeplitz": {"dim": K, "rate": r}}`` and
    ``{"white": {"dim": K, "variance": v}}``.
    """
    if not isinstance(obj, dict):
        raise ConfigError(f"covariance must be a JSON object, got {type(obj).__name__}")
    if "toeplitz" in obj:
        params = obj["toeplitz"]
        return toeplitz_exp_cov(int(params["dim"]), float(params["rate"]))
    if "white" in obj:
        params = obj["white"]
        return SpdMatrix.identity(int(params["dim"]), float(params["variance"]))
    return SpdMatrix(matrix_from_json(obj))


def _center(cfg: dict) -> GaussianDist:
    cov = covariance_from_config(cfg.get("sigma_0", DEFAULT_SIGMA_0))
    if "mu_0" in cfg:
        return GaussianDist(vector_from_json(cfg["mu_0"]), cov)
    return GaussianDist.centered(cov)


def _solver(cfg: dict) -> SolverConfig:
    try:
        return SolverConfig.from_dict(cfg.get("solver"))
    except TypeError as exc:
        raise ConfigError(f"bad solver section: {exc}") from None


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path!r} is not valid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    return cfg


def _epsilon(cfg: dict, default: float | None = None) -> float:
    if "epsilon" not in cfg:
        if default is None:
            raise ConfigError("config is missing 'epsilon'")
        return default
    return float(cfg["epsilon"])


def cmd_bounds(cfg: dict, threads: int) -> tuple[dict, list[dict]]:
    center = _center(cfg)
    if "sigma_n" not in cfg:
        raise ConfigError("config is missing 'sigma_n'")
    sigma_n = covariance_from_config(cfg["sigma_n"])
    ball = KlBall(center, _epsilon(cfg))
    res = solve_bounds(ball, sigma_n, _solver(cfg))
    doc = {
        "epsilon": ball.radius,
        "lower": res.lower,
        "upper": res.upper,
        "nominal": res.nominal,
        "alpha_sup": res.sup.alpha,
        "alpha_inf": res.inf.alpha,
        "sigma_x_sup": matrix_to_json(res.sup.sigma_x.entries),
        "sigma_x_inf": matrix_to_json(res.inf.sigma_x.entries),
        "residuals": {
            b.branch.value: {
                "residual_eq3": b.residual_eq3,
                "residual_eq9": b.residual_eq9,
                "kl_achieved": b.kl_achieved,
                "iterations": b.iterations,
            }
            for b in (res.sup, res.inf)
        },
    }
    row = {k: doc[k] for k in ("epsilon", "lower", "nominal", "upper", "alpha_inf", "alpha_sup")}
    return doc, [row]


def cmd_sweep_snr(cfg: dict, threads: int) -> tuple[list[dict], list[dict]]:
    rows = sweep_snr(_center(cfg), _epsilon(cfg, 2.0), cfg.get("grid", default_snr_grid()),
                     threads, _solver(cfg))
    return rows, rows


def cmd_sweep_eps(cfg: dict, threads: int) -> tuple[list[dict], list[dict]]:
    rows = sweep_eps(_center(cfg), float(cfg.get("snr_db", 0.0)),
                     cfg.get("grid", default_eps_grid()), threads, _solver(cfg))
    return rows, rows


def cmd_gg_bounds(cfg: dict, threads: int) -> tuple[list[dict], list[dict]]:
    rows = sweep_gg(float(cfg.get("snr_db", 5.0)), float(cfg.get("power", 1.0)),
                    cfg.get("grid", default_p_grid()), threads)
    return rows, rows


def cmd_validate(cfg: dict, threads: int) -> tuple[dict, list[dict]]:
    center = _center(cfg)
    sigma_n = covariance_from_config(
        cfg.get("sigma_n", {"white": {"dim": center.dim, "variance": 1.0}}))
    ball = KlBall(center, _epsilon(cfg, 2.0))
    mc = McConfig(int(cfg.get("samples", 100_000)), int(cfg.get("seed", 0)))
    report = mc_verify_bounds(ball, sigma_n, mc, int(cfg.get("trials", 50)),
                              int(cfg.get("sample_seed", mc.seed)), _solver(cfg))
    return report.to_json(), [dict(t.__dict__) for t in report.trials]


COMMANDS = {
    "bounds": (cmd_bounds, "json"),
    "sweep-snr": (cmd_sweep_snr, "csv"),
    "sweep-eps": (cmd_sweep_eps, "csv"),
    "gg-bounds": (cmd_gg_bounds, "csv"),
    "validate": (cmd_validate, "json"),
}


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if not rows:
        return ""
    writer = csv.writer(buf, lineterminator="\n")
    header = list(rows[0])
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(row[k]) for k in header])
    return buf.getvalue()


def _write(text: str, out: str) -> None:
    if out == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="klmmse",
        description="MMSE bounds and minimax estimators for priors in a KL ball around a Gaussian.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "bounds": "lower/upper MMSE bounds for one configuration",
        "sweep-snr": "nominal vs minimax estimator MSE over an SNR grid (dB)",
        "sweep-eps": "nominal vs minimax estimator MSE over a KL-radius grid",
        "gg-bounds": "CRB and KL bounds for generalized Gaussian inputs over the shape p",
        "validate": "Monte Carlo check that sampled in-ball priors respect the bounds",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", help="JSON configuration file")
        p.add_argument("--out", default="-", help="output path, '-' for stdout (default)")
        p.add_argument("--format", choices=("csv", "json"), help="output format")
        p.add_argument("--threads", type=int, default=1, help="worker threads for grid points")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get(LOG_ENV, "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    fn, default_format = COMMANDS[args.command]
    fmt = args.format or default_format
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    started = time.perf_counter()
    try:
        cfg = load_config(args.config)
        doc, rows = fn(cfg, args.threads)
    except NonConvergent as exc:
        print(f"error: solver did not converge: {exc}; state={exc.state}", file=sys.stderr)
        return EXIT_NONCONVERGENT
    except (ValueError, KeyError, TypeError) as exc:
        print(f"error: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    log.info("%s finished in %.3f s", args.command, time.perf_counter() - started)
    text = rows_to_csv(rows) if fmt == "csv" else json.dumps(doc, indent=2) + "\n"
    _write(text, args.out)
    if args.command == "validate" and doc["violations"] > 0:
        print(f"error: {doc['violations']} bound violation(s)", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
