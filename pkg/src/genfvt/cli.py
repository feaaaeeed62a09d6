"""``genfvt`` command line.

Every subcommand takes a JSON config file; flags only choose paths.

Exit codes: 0 success, 1 I/O failure, 2 config/data error, 3 no limit found,
4 time/Laplace disagreement.
"""

from __future__ import annotations

import hashlib
import json
import math
import sys
import time
from dataclasses import replace
from pathlib import Path

import click
import numpy as np

from . import __version__
from .averaging import iter_levels, shift_signal
from .config import RunConfig, load_config
from .convergence import (
    InconclusiveError,
    LimitEstimate,
    Verdict,
    detect_limit,
    level_log_degree,
    minimal_order,
    minimal_order_for_spec,
    residual_oscillation,
    tail_window,
)
from .errors import ConfigError, DataError, GenFVTError
from .laplace import default_grid, verify_central_equality, z_side_limit
from .lti import (
    ResonantSystem,
    normalized_error,
    roundtrip_order_check,
    simulate,
)
from .signals import (
    UniformGrid,
    UniformSignal,
    read_csv,
    sample_spec,
    write_csv,
)

SCHEMA = 1
EXIT_OK = 0
EXIT_IO = 1
EXIT_CONFIG = 2
EXIT_NOT_FOUND = 3
EXIT_DISAGREE = 4
PLOT_ROWS = 100_000


class Exit(Exception):
    def __init__(self, code: int):
        self.code = code


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False)


def build_report(command: str, cfg: RunConfig, result: dict, files, timings) -> dict:
    """Report with a digest over everything except the timings."""
    body = {
        "schema": SCHEMA,
        "tool": "genfvt",
        "version": __version__,
        "command": command,
        "config": cfg.to_dict(),
        "result": result,
        "files": sorted(str(f) for f in files),
    }
    digest = hashlib.sha256(_canonical(body).encode()).hexdigest()
    return {**body, "digest": digest, "timings": timings}


def write_report(report: dict, cfg: RunConfig, name: str) -> Path:
    out = cfg.output_dir / f"{name}.{cfg.format}"
    if cfg.format == "json":
        out.write_text(_canonical(report) + "\n")
    else:
        rows = _flatten(report["result"])
        lines = ["key,value"] + [f"{k},{v}" for k, v in rows]
        out.write_text("\n".join(lines) + "\n")
    return out


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _flatten(v, f"{prefix}{k}.")
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}{i}.")
    else:
        yield prefix.rstrip("."), "" if obj is None else obj


def _input_signal(cfg: RunConfig) -> UniformSignal:
    if cfg.input is not None:
        return read_csv(cfg.input)
    grid = cfg.make_grid(default_grid(cfg.spec))
    return sample_spec(cfg.spec, grid)


def _prepare(config_path, out_dir) -> RunConfig:
    cfg = load_config(config_path)
    if out_dir is not None:
        cfg = replace(cfg, output_dir=Path(out_dir))
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    return cfg


def _level_stats(series: UniformSignal, cfg: RunConfig, q: int) -> dict:
    window = tail_window(series, cfg.policy.tail_fraction)
    stats = {
        "q": q,
        "tail_mean": float(window.mean()),
        "tail_oscillation": float(np.ptp(window)),
        "residual_oscillation": residual_oscillation(window),
        "last_value": float(series.samples[-1]),
    }
    try:
        est = detect_limit(series, cfg.policy, level_log_degree(q))
        stats["verdict"] = est.verdict.value
        stats["value"] = est.value if est.converged else None
    except InconclusiveError as exc:
        stats["verdict"] = Verdict.INCONCLUSIVE.value
        stats["reason"] = str(exc)
    return stats


def _run(fn):
    """Map library errors onto the exit-code contract."""
    try:
        code = fn()
    except Exit as exc:
        code = exc.code
    except (ConfigError, DataError, GenFVTError) as exc:
        click.echo(f"error: {exc}", err=True)
        code = EXIT_CONFIG
    except OSError as exc:
        click.echo(f"I/O error: {exc}", err=True)
        code = EXIT_IO
    sys.exit(code)


config_arg = click.argument("config", type=click.Path(exists=True, dir_okay=False))
out_opt = click.option("--out-dir", type=click.Path(file_okay=False), default=None,
                       help="Output directory (overrides the config and $GENFVT_OUTPUT_DIR).")


@click.group()
@click.version_option(__version__)
def main():
    """Iterated running averages and generalized final-value checks."""


@main.command()
@config_arg
@out_opt
@click.option("--output", "-o", type=click.Path(dir_okay=False), default=None,
              help="CSV file to write (default: <out-dir>/signal.csv).")
def gen(config, out_dir, output):
    """Sample a signal spec and write it as a t,value CSV."""

    def go():
        cfg = _prepare(config, out_dir)
        if cfg.spec is None:
            raise ConfigError("gen needs a 'spec'")
        signal = sample_spec(cfg.spec, cfg.make_grid(default_grid(cfg.spec)))
        path = Path(output) if output else cfg.output_dir / "signal.csv"
        write_csv(signal, path)
        click.echo(str(path))
        return EXIT_OK

    _run(go)


@main.command()
@config_arg
@out_opt
def avg(config, out_dir):
    """Write psi_1..psi_Q as CSV files plus a report of tail statistics."""

    def go():
        cfg = _prepare(config, out_dir)
        t0 = time.perf_counter()
        signal = _input_signal(cfg)
        shift = cfg.extra.get("shift")
        if shift:
            signal = shift_signal(signal, float(shift))
        files, levels = [], [_level_stats(signal, cfg, 0)]
        for q, level in enumerate(iter_levels(signal, cfg.q_max), start=1):
            path = cfg.output_dir / f"psi_{q}.csv"
            write_csv(level, path)
            files.append(path.name)
            levels.append(_level_stats(level, cfg, q))
        report = build_report("avg", cfg, {"levels": levels}, files,
                              {"total_s": time.perf_counter() - t0})
        click.echo(str(write_report(report, cfg, "avg_report")))
        return EXIT_OK

    _run(go)


@main.command()
@config_arg
@out_opt
def detect(config, out_dir):
    """Find the minimal averaging order m with a limit (exit 3 if none)."""

    def go():
        cfg = _prepare(config, out_dir)
        t0 = time.perf_counter()
        if cfg.spec is not None:
            grid = cfg.make_grid(default_grid(cfg.spec))
            order = minimal_order_for_spec(cfg.spec, grid, cfg.q_max, cfg.policy)
        else:
            order = minimal_order(read_csv(cfg.input), cfg.q_max, cfg.policy)
        report = build_report("detect", cfg, {"order": order.to_dict()}, [],
                              {"total_s": time.perf_counter() - t0})
        path = write_report(report, cfg, "detect_report")
        if order.found:
            click.echo(f"m = {order.m}, limit = {order.limit:.6g}")
        else:
            click.echo("no averaging order up to q_max has a limit")
        click.echo(str(path))
        return EXIT_OK if order.found else EXIT_NOT_FOUND

    _run(go)


@main.command()
@config_arg
@out_opt
def verify(config, out_dir):
    """Compare the time-side limit with lim s F(s) and s Psi_m(s) (exit 4 on disagreement)."""

    def go():
        cfg = _prepare(config, out_dir)
        if cfg.spec is None:
            raise ConfigError("verify needs a 'spec' with a closed-form transform")
        t0 = time.perf_counter()
        grid = cfg.make_grid(default_grid(cfg.spec))
        rep = verify_central_equality(cfg.spec, cfg.q_max, cfg.policy, cfg.ladder, grid)
        result = {"central_equality": rep.to_dict(), "order": rep.order.to_dict()}
        report = build_report("verify", cfg, result, [],
                              {"total_s": time.perf_counter() - t0})
        path = write_report(report, cfg, "verify_report")
        click.echo(
            f"m = {rep.m}, time limit = {_fmt(rep.time_limit)}, "
            f"laplace limit = {_fmt(rep.laplace_limit)}, agree = {rep.agree}"
        )
        if rep.annotation:
            click.echo(rep.annotation)
        click.echo(str(path))
        return EXIT_OK if rep.agree else EXIT_DISAGREE

    _run(go)


def _fmt(x):
    return "none" if x is None or not math.isfinite(x) else f"{x:.6g}"


def _write_error_series(sim: UniformSignal, err: np.ndarray, path: Path):
    stride = max(1, len(err) // PLOT_ROWS)
    t = sim.times()[::stride]
    with path.open("w") as fh:
        fh.write("t,normalized_error\n")
        for a, b in zip(t, err[::stride]):
            fh.write(f"{a!r},{float(b)!r}\n")


@main.command()
@config_arg
@out_opt
def lti(config, out_dir):
    """Simulate a resonant ODE and run order detection on the result."""

    def go():
        cfg = _prepare(config, out_dir)
        t0 = time.perf_counter()
        files = []
        if "lti" in cfg.extra:
            opts = dict(cfg.extra["lti"])
            p = int(opts.get("p", 1))
            omega = float(opts.get("omega", 1.0))
            res = roundtrip_order_check(
                p, omega, float(opts.get("horizon", 2000.0)), float(opts.get("dt", 1e-3)),
                cfg.q_max, cfg.policy.for_spec(_osc(p, omega)),
            )
            err = normalized_error(res.simulated, p, omega)
            path = cfg.output_dir / "lti_error.csv"
            _write_error_series(res.simulated, err, path)
            files.append(path.name)
            result = {"order": res.order.to_dict(),
                      "max_normalized_error": res.max_normalized_error}
            found = res.order.found
        elif "system" in cfg.extra:
            sysd = cfg.extra["system"]
            system = ResonantSystem.from_dict(sysd)
            grid = cfg.make_grid()
            sim = simulate(system, sysd["ic"], grid)
            path = cfg.output_dir / "lti_signal.csv"
            write_csv(sim, path)
            files.append(path.name)
            order = minimal_order(sim, cfg.q_max, cfg.policy)
            result = {"order": order.to_dict()}
            found = order.found
        else:
            raise ConfigError("lti needs an 'lti' or 'system' section")
        report = build_report("lti", cfg, result, files,
                              {"total_s": time.perf_counter() - t0})
        click.echo(str(write_report(report, cfg, "lti_report")))
        return EXIT_OK if found else EXIT_NOT_FOUND

    _run(go)


def _osc(p, omega):
    from .signals import MonomialOsc

    return MonomialOsc(p, omega)


@main.command()
@config_arg
@out_opt
def zfvt(config, out_dir):
    """lim_{z->1} (z-1) F(z) for a rational F given by polynomial coefficients."""

    def go():
        cfg = _prepare(config, out_dir)
        z = cfg.extra.get("z")
        if not z:
            raise ConfigError("zfvt needs a 'z' section with numerator and denominator")
        est: LimitEstimate = z_side_limit(z["numerator"], z["denominator"], cfg.ladder)
        report = build_report("zfvt", cfg, {"limit": est.to_dict()}, [], {})
        path = write_report(report, cfg, "zfvt_report")
        click.echo(f"{est.verdict.value}: {_fmt(est.value)}")
        click.echo(str(path))
        return EXIT_OK if est.converged else EXIT_NOT_FOUND

    _run(go)


if __name__ == "__main__":
    main()
