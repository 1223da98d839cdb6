"""Command-line front end.

Tabular results go out as CSV (header row, %.17g numbers, LF endings),
scalar results as one JSON object that echoes the run configuration.
The worker count is deliberately left out of the echoed configuration:
it never changes results, so it must not change output bytes either.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from typing import Any

from . import _mc
from .core import DomainError, SystemParams, WeierstrassFunction, eval_W
from .critical import solve_lambda_b
from .dimension import (box_dimension, local_dimension_ratio, measure_scaling_exponent,
                        telescope_check, v_n_measure)
from .fibers import ThetaEvaluator
from .measures import (approx_constant, bernoulli_density, capacity_H, concentration_scan,
                       theta0_density, truncation_schedule)

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2

# subcommands whose natural output is a table
TABULAR = {"boxdim", "localdim", "telescope", "scaling", "theta-stats", "bernoulli", "concentration"}


@dataclass
class RunConfig:
    subcommand: str
    seed: int
    format: str
    output: str | None
    options: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_namespace(cls, ns: argparse.Namespace) -> "RunConfig":
        skip = {"subcommand", "seed", "format", "output", "threads", "handler"}
        options = {k: v for k, v in sorted(vars(ns).items()) if k not in skip}
        fmt = ns.format or ("csv" if ns.subcommand in TABULAR else "json")
        return cls(ns.subcommand, ns.seed, fmt, ns.output, options)

    def to_json(self) -> dict:
        return asdict(self)


def _num(v) -> str:
    if isinstance(v, (bool,)):
        return str(int(v))
    if isinstance(v, int):
        return str(v)
    return "%.17g" % v


def _csv(header: list[str], rows) -> str:
    out = io.StringIO()
    out.write(",".join(header) + "\n")
    for row in rows:
        out.write(",".join(_num(v) for v in row) + "\n")
    return out.getvalue()


def _json(cfg: RunConfig, payload: dict) -> str:
    def clean(v):
        if isinstance(v, float) and not math.isfinite(v):
            return repr(v)
        if isinstance(v, dict):
            return {k: clean(x) for k, x in v.items()}
        if isinstance(v, (list, tuple)):
            return [clean(x) for x in v]
        return v

    return json.dumps(clean({**payload, "config": cfg.to_json()}), sort_keys=True) + "\n"


def _wf(ns) -> WeierstrassFunction:
    return WeierstrassFunction.create(ns.b, ns.lam, ns.ridge, ns.tail_tol)


class _Result:
    """Table and/or scalar payload produced by a subcommand."""

    def __init__(self, header=None, rows=(), payload=None, note=None):
        self.header, self.rows, self.payload, self.note = header, list(rows), payload or {}, note


# ---------------------------------------------------------------- handlers

def _cmd_eval(ns, workers):
    wf = _wf(ns)
    values = [eval_W(wf, x) for x in ns.x]
    payload = {"x": ns.x[0], "W": values[0]} if len(values) == 1 else {"x": ns.x, "W": values}
    return _Result(["x", "W"], zip(ns.x, values), payload)


def _cmd_lambdab(ns, workers):
    res = solve_lambda_b(ns.b, ns.tol)
    return _Result(["b", "lambda_b", "residual"], [(res.b, res.lambda_b, res.residual)],
                   {"b": res.b, "lambda_b": res.lambda_b, "residual": res.residual,
                    "iterations": res.iterations})


def _cmd_boxdim(ns, workers):
    wf = _wf(ns)
    fit = box_dimension(wf, ns.nmin, ns.nmax, ns.samples_per_column, ns.seed,
                        not ns.no_holder_correction, workers)
    rows = [(N, x, count) for (N, count), x in zip(fit.labels, fit.x)]
    payload = {"slope": fit.slope, "intercept": fit.intercept, "max_residual": fit.max_residual,
               "D": wf.dim_D, "N": [r[0] for r in rows], "box_count": [r[2] for r in rows]}
    note = f"slope {fit.slope:.6f} (D = {wf.dim_D:.6f}), max residual {fit.max_residual:.3g}"
    return _Result(["N", "log_scale", "box_count"], rows, payload, note)


def _cmd_localdim(ns, workers):
    wf = _wf(ns)
    rows = []
    for N in ns.N:
        mu = v_n_measure(wf, ns.xi, ns.x, N, ns.K, ns.mc_samples, ns.seed, workers)
        rows.append((N, mu.value, local_dimension_ratio(mu, wf.b, N)))
    payload = {"N": [r[0] for r in rows], "mu_VN": [r[1] for r in rows],
               "ratio": [r[2] for r in rows], "D": wf.dim_D}
    return _Result(["N", "mu_VN", "ratio"], rows, payload)


def _cmd_telescope(ns, workers):
    wf = _wf(ns)
    rows = []
    for N in ns.N:
        t = telescope_check(wf, ns.xi, ns.x, N, ns.K, ns.mc_samples, ns.seed, workers)
        rows.append((N, t.lhs.value, t.rhs.value, t.z_score))
    payload = {k: [r[i] for r in rows] for i, k in enumerate(["N", "lhs", "rhs", "z_score"])}
    return _Result(["N", "lhs", "rhs", "z_score"], rows, payload)


def _cmd_scaling(ns, workers):
    wf = _wf(ns)
    res = measure_scaling_exponent(wf, ns.points, ns.N, ns.K, ns.mc_samples, ns.seed, workers)
    rows = [(i, N, est.value, est.stderr) for i, N, est in res.table]
    slopes = [f.slope if f is not None else float("nan") for f in res.fits]
    payload = {"slopes": slopes, "median_slope": res.median_slope, "dropped": list(res.dropped)}
    note = f"median exponent {res.median_slope:.6f} over {len(res.slopes)} fitted points"
    return _Result(["point", "N", "measure", "stderr"], rows, payload, note)


def _density_result(dens, extra):
    payload = {"l2_norm_sq": dens.l2_norm_sq, "mass": dens.mass, "bin_width": dens.bin_width,
               "total_samples": dens.total_samples, **extra}
    note = f"L2 norm squared {dens.l2_norm_sq:.6f}, in-range mass {dens.mass:.6f}"
    return _Result(["bin_left", "bin_right", "density"], dens.rows(), payload, note)


def _cmd_theta_stats(ns, workers):
    wf = _wf(ns)
    dens = theta0_density(wf, ns.x, ns.samples, ns.bins, ns.seed, workers)
    extra = {}
    if ns.capacity_grid > 0:
        extra["capacity_H"] = capacity_H(wf, ns.capacity_grid, ns.samples, ns.bins, ns.seed, workers)
    return _density_result(dens, extra)


def _cmd_bernoulli(ns, workers):
    return _density_result(bernoulli_density(ns.gamma, ns.samples, ns.bins, ns.seed, workers), {})


def _cmd_schedule(ns, workers):
    params = SystemParams(ns.b, ns.lam)
    s = truncation_schedule(params, ns.ell, ns.r, ns.z)
    wf = WeierstrassFunction(params)
    payload = {"gamma": s.gamma, "alpha": s.alpha, "ell": s.ell, "r": s.r, "z": s.z, "r_z": s.r_z,
               "n_levels": list(s.n_levels), "d": list(s.d), "N_cap": s.N_cap,
               "approx_constant": approx_constant(ThetaEvaluator(wf))}
    rows = [(k, n) for k, n in enumerate(s.n_levels)]
    return _Result(["k", "n_k"], rows, payload)


def _cmd_concentration(ns, workers):
    model = ns.gamma if ns.gamma is not None else _wf(ns)
    res = concentration_scan(model, ns.z, ns.r, ns.centers, ns.mc_samples, ns.seed, workers)
    rows = [(c.z, c.r, c.p_hat, c.stderr) for c in res.rows]

    def slopes(fits):
        return {repr(k): (f.slope if f is not None else None) for k, f in fits.items()}

    payload = {"z": [r[0] for r in rows], "r": [r[1] for r in rows], "p_hat": [r[2] for r in rows],
               "stderr": [r[3] for r in rows], "r_exponent": slopes(res.r_fits),
               "z_exponent": slopes(res.z_fits), "dropped": list(res.dropped)}
    note = "r-exponents " + ", ".join(f"z={k}: {v}" for k, v in payload["r_exponent"].items())
    return _Result(["z", "r", "p_hat", "stderr"], rows, payload, note)


# ------------------------------------------------------------------ parser

def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--threads", type=int, default=None,
                   help=f"worker threads (default: ${_mc.THREADS_ENV} or CPU count)")
    p.add_argument("--format", choices=("csv", "json"), default=None,
                   help="output format (default: csv for tables, json for scalars)")
    p.add_argument("--output", default=None, help="output file (default: stdout)")


def _add_model(p: argparse.ArgumentParser, lam_default=0.8, required_b=False):
    p.add_argument("--b", type=int, default=3, help="integer base b >= 2")
    p.add_argument("--lambda", dest="lam", type=float, default=lam_default, help="lambda in (1/b, 1)")
    p.add_argument("--ridge", choices=("cos", "pwl"), default="cos", help="ridge function g")
    p.add_argument("--tail-tol", type=float, default=1e-12, help="series tail tolerance")


def _add_point(p: argparse.ArgumentParser):
    p.add_argument("--xi", type=float, default=0.3, help="expanding coordinate xi in [0, 1)")
    p.add_argument("--x", type=float, default=0.41, help="contracting coordinate x in [0, 1)")
    p.add_argument("--K", type=float, default=None, help="strip constant (default K1 + 1)")
    p.add_argument("--mc-samples", type=int, default=100_000, help="Monte Carlo samples per estimate")


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(prog="weierstrass-dim", formatter_class=fmt,
                                     description="Numerics for Weierstrass graphs and their dimension.")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add(name, handler, help_):
        p = sub.add_parser(name, help=help_, description=help_, formatter_class=fmt)
        p.set_defaults(handler=handler)
        return p

    p = add("eval", _cmd_eval, "evaluate W at one or more points")
    _add_model(p, lam_default=0.6)
    p.add_argument("--x", type=float, nargs="+", default=[0.0], help="evaluation points")
    _add_common(p)

    p = add("lambdab", _cmd_lambdab, "critical parameter lambda_b")
    p.add_argument("--b", type=int, default=3, help="integer base b >= 2")
    p.add_argument("--tol", type=float, default=1e-14, help="bisection width")
    _add_common(p)

    p = add("boxdim", _cmd_boxdim, "box-counting dimension of the graph")
    _add_model(p)
    p.add_argument("--nmin", type=int, default=3, help="smallest scale exponent")
    p.add_argument("--nmax", type=int, default=9, help="largest scale exponent")
    p.add_argument("--samples-per-column", type=int, default=64, help="samples per b-adic column")
    p.add_argument("--no-holder-correction", action="store_true",
                   help="count sampled oscillation only")
    _add_common(p)

    p = add("localdim", _cmd_localdim, "mu(V_N) and log mu(V_N) / log b**-N")
    _add_model(p)
    _add_point(p)
    p.add_argument("--N", type=int, nargs="+", default=[2, 4, 6, 8], help="depths")
    _add_common(p)

    p = add("telescope", _cmd_telescope, "Monte Carlo check of the telescoping identity")
    _add_model(p)
    _add_point(p)
    p.add_argument("--N", type=int, nargs="+", default=[2, 4, 6], help="depths")
    _add_common(p)

    p = add("scaling", _cmd_scaling, "per-point measure-scaling exponents")
    _add_model(p)
    p.add_argument("--points", type=int, default=20, help="number of random base points")
    p.add_argument("--N", type=int, nargs="+", default=[2, 4, 6, 8], help="depths")
    p.add_argument("--K", type=float, default=None, help="strip constant (default K1 + 1)")
    p.add_argument("--mc-samples", type=int, default=100_000, help="Monte Carlo samples per estimate")
    _add_common(p)

    p = add("theta-stats", _cmd_theta_stats, "histogram of Theta_0 at fixed x (law nu_x)")
    _add_model(p)
    p.add_argument("--x", type=float, default=0.0, help="fixed contracting coordinate")
    p.add_argument("--samples", type=int, default=100_000, help="Monte Carlo samples")
    p.add_argument("--bins", type=int, default=512, help="histogram bins")
    p.add_argument("--capacity-grid", type=int, default=0,
                   help="if > 0, also estimate H on an x-grid of this size")
    _add_common(p)

    p = add("bernoulli", _cmd_bernoulli, "histogram of the Bernoulli convolution")
    p.add_argument("--gamma", type=float, default=0.5, help="contraction in (0, 1)")
    p.add_argument("--samples", type=int, default=1_000_000, help="Monte Carlo samples")
    p.add_argument("--bins", type=int, default=512, help="histogram bins")
    _add_common(p)

    p = add("schedule", _cmd_schedule, "multi-scale truncation schedule")
    p.add_argument("--b", type=int, default=3, help="integer base b >= 2")
    p.add_argument("--lambda", dest="lam", type=float, default=0.8, help="lambda in (1/b, 1)")
    p.add_argument("--ell", type=int, default=3, help="number of levels")
    p.add_argument("--r", type=float, default=1e-4, help="radius r in (0, 1)")
    p.add_argument("--z", type=float, default=0.1, help="increment z, 2r < |z| <= 1")
    _add_common(p)

    p = add("concentration", _cmd_concentration, "concentration of Theta_z in short intervals")
    _add_model(p)
    p.add_argument("--gamma", type=float, default=None,
                   help="scan the Bernoulli convolution with this gamma instead of a model")
    p.add_argument("--z", type=float, nargs="+", default=[0.2], help="increments z")
    p.add_argument("--r", type=float, nargs="+", default=[1e-2, 3e-3, 1e-3], help="radii r")
    p.add_argument("--centers", type=float, nargs="+", default=[0.0], help="interval centres")
    p.add_argument("--mc-samples", type=int, default=100_000, help="Monte Carlo samples")
    _add_common(p)
    return parser


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    cfg = RunConfig.from_namespace(ns)
    workers = ns.threads if ns.threads is not None else _mc.default_workers()
    if workers < 1:
        print("error: --threads must be >= 1", file=stderr)
        return EXIT_USAGE
    try:
        result = ns.handler(ns, workers)
    except DomainError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_DOMAIN
    text = _csv(result.header, result.rows) if cfg.format == "csv" else _json(cfg, result.payload)
    if ns.output:
        with open(ns.output, "w", newline="\n") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    if result.note and cfg.format == "csv":
        print(result.note, file=stderr)
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
