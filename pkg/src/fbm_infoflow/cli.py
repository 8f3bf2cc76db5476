"""Batch front door: load a config, run verification suites, write reports.

Config files are JSON; the schema is documented in README.md.  Exit codes:
0 all checks passed, 1 at least one check failed, 2 config error,
3 internal numerical error.
"""

import csv
import datetime
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import click
import numpy as np

from . import channels as ch
from . import fbm
from . import identities as idn
from . import infofunc as nf
from . import montecarlo as mc
from . import sigma as sg
from .errors import ConfigError, FbmInfoflowError

SUITES = (
    "debruijn-mult", "debruijn-additive", "kl-flow",
    "fokker-planck", "stein", "entropy-power", "fbm-stats",
)

DEFAULT_TOLERANCES = {
    "debruijn-mult": 1e-4,
    "debruijn-additive": 1e-6,
    "kl-flow": 1e-5,
    "fokker-planck": 1e-3,
    "stein": 1e-10,
    "entropy-power": 1e-4,
    "fbm-stats": 5.0,
}

CSV_COLUMNS = ("identity", "t", "hurst", "lhs", "rhs", "abs_discrepancy",
               "tolerance", "passed", "method_notes")
MC_COLUMNS = ("mc_value", "mc_std_error", "mc_ok")


def _build_sigma(cfg):
    cfg = cfg or {"kind": "constant", "c": 1.0}
    kind = cfg.get("kind", "constant")
    domain = tuple(cfg.get("domain", (-1e9, 1e9)))
    if kind == "constant":
        return sg.constant(cfg.get("c", 1.0), domain=domain)
    if kind == "identity":
        return sg.identity_channel(domain=domain)
    if kind == "sqrt1p":
        return sg.sqrt_one_plus_square(domain=domain)
    raise ConfigError(f"unknown sigma kind {kind!r}")


def _build_initial(cfg):
    cfg = cfg or {"kind": "gaussian", "mean": 0.0, "variance": 1.0}
    kind = cfg.get("kind", "gaussian")
    if kind == "gaussian":
        return ch.gaussian_law(cfg.get("mean", 0.0), cfg.get("variance", 1.0))
    if kind == "grid":
        if "grid" in cfg and "values" in cfg:
            return ch.grid_law(cfg["grid"], cfg["values"])
        lo, hi = cfg.get("domain", (-1.0, 1.0))
        n = int(cfg.get("n", 2001))
        grid = np.linspace(lo, hi, n)
        shape = cfg.get("shape", "uniform")
        if shape != "uniform":
            raise ConfigError(f"unknown grid density shape {shape!r}")
        return ch.grid_law(grid, np.full(n, 1.0 / (hi - lo)))
    raise ConfigError(f"unknown initial law kind {kind!r}")


def _validate_config(cfg):
    suites = cfg.get("suites")
    if not suites:
        raise ConfigError("config must name at least one suite")
    for s in suites:
        if s not in SUITES:
            raise ConfigError(f"unknown suite {s!r} (choose from {', '.join(SUITES)})")
    t_grid = [float(t) for t in cfg.get("t_grid", [0.5, 1.0, 2.0])]
    h_grid = [float(h) for h in cfg.get("hurst_grid", [0.3, 0.5, 0.75])]
    if not t_grid or not h_grid:
        raise ConfigError("t_grid and hurst_grid must be non-empty")
    if any(t <= 0 for t in t_grid):
        raise ConfigError("all times must be strictly positive")
    if any(not 0.0 < h < 1.0 for h in h_grid):
        raise ConfigError("all Hurst values must lie in (0, 1)")
    return suites, t_grid, h_grid


class _SuiteRunner:
    def __init__(self, cfg):
        self.cfg = cfg
        self.suites, self.t_grid, self.h_grid = _validate_config(cfg)
        chan_cfg = cfg.get("channel", {})
        self.sigma = _build_sigma(chan_cfg.get("sigma"))
        self.x0 = float(chan_cfg.get("x0", 0.0))
        self.initial = _build_initial(chan_cfg.get("initial"))
        self.y0 = float(cfg.get("kl", {}).get("y0", 1.0))
        self.min_t = float(cfg.get("min_t", 0.05))
        self.fd_step = cfg.get("fd_step")
        self.tolerances = {**DEFAULT_TOLERANCES, **cfg.get("tolerances", {})}
        self.oracle = cfg.get("oracle")
        self.excluded = []
        self._mult_cache = {}
        self._add_cache = {}
        self._stein_cache = None
        self._fbm_cache = {}
        self._profile_cache = {}
        self.entropy_power_rows = []

    def _mult_channel(self, h, x0=None):
        x0 = self.x0 if x0 is None else x0
        key = (h, x0)
        if key not in self._mult_cache:
            self._mult_cache[key] = ch.multiplicative(self.sigma, x0, h)
        return self._mult_cache[key]

    def _add_channel(self, h):
        if h not in self._add_cache:
            self._add_cache[h] = ch.additive(self.initial, h)
        return self._add_cache[h]

    def _step(self, t):
        if self.fd_step is not None:
            return float(self.fd_step)
        return None

    def _with_mc(self, report, channel, t, kind):
        if not self.oracle:
            return report
        n = int(self.oracle.get("samples", 100000))
        seed = int(self.oracle.get("seed", 0))
        field = ch.density_at(channel, t)
        hv = channel.hurst.value
        pref = hv * t ** (2.0 * hv - 1.0)
        sig = self.sigma
        if kind == "debruijn-mult":
            def g(x):
                s = np.asarray(sig.fn(x))
                curv = np.asarray(sig.d2(x)) * s + np.asarray(sig.d1(x)) ** 2
                return s ** 2 * np.asarray(field.score_fn(x)) ** 2 - curv
            est = mc.mc_expectation(channel, t, g, n, seed)
            value, se = pref * est.mean, pref * est.std_error
        elif kind == "debruijn-additive":
            est = mc.mc_expectation(
                channel, t, lambda x: np.asarray(field.score_fn(x)) ** 2, n, seed)
            value, se = pref * est.mean, pref * est.std_error
        elif kind == "kl-flow":
            other = ch.density_at(self._mult_channel(hv, x0=self.y0), t)

            def g(x):
                ds = np.asarray(field.score_fn(x)) - np.asarray(other.score_fn(x))
                return np.asarray(sig.fn(x)) ** 2 * ds ** 2
            est = mc.mc_expectation(channel, t, g, n, seed)
            value, se = -pref * est.mean, pref * est.std_error
        else:
            return report
        report.extras["mc_value"] = value
        report.extras["mc_std_error"] = se
        report.extras["mc_ok"] = abs(value - report.rhs) <= 4.0 * se + 1e-12
        return report

    def run_combo(self, suite, t, h):
        tol = float(self.tolerances[suite])
        if suite == "debruijn-mult":
            r = idn.debruijn_check_mult(self._mult_channel(h), t,
                                        fd_step=self._step(t), tol=tol)
            return self._with_mc(r, self._mult_channel(h), t, suite)
        if suite == "debruijn-additive":
            r = idn.debruijn_check_additive(self._add_channel(h), t,
                                            fd_step=self._step(t), tol=tol)
            return self._with_mc(r, self._add_channel(h), t, suite)
        if suite == "kl-flow":
            r = idn.kl_flow_check(self._mult_channel(h),
                                  self._mult_channel(h, x0=self.y0),
                                  t, fd_step=self._step(t), tol=tol)
            return self._with_mc(r, self._mult_channel(h), t, suite)
        if suite == "fokker-planck":
            x_grid = np.linspace(-4.0, 4.0, 81)
            resid = idn.fokker_planck_residual(self._mult_channel(h), t, x_grid,
                                               fd_step_t=self._step(t))
            worst = float(np.max(np.abs(resid)))
            return idn._report("fokker-planck", t, h, worst, 0.0, tol,
                               notes=f"max |residual| over x in [-4,4], {len(x_grid)} pts")
        if suite == "stein":
            worst = self._stein_worst(tol)
            return idn._report("stein", t, h, worst, 0.0, tol,
                               notes="max residual over r in {y, y^2, y^3, sin} "
                                     "and configured (mu, v) cases")
        if suite == "entropy-power":
            return self._entropy_power_row(t, h, tol)
        if suite == "fbm-stats":
            return self._fbm_stats_row(t, h, tol)
        raise ConfigError(f"unknown suite {suite!r}")

    def _stein_worst(self, tol):
        if self._stein_cache is None:
            cases = self.cfg.get("stein", {}).get("cases", [[0.0, 1.0], [2.0, 0.5]])
            rs = [
                (lambda y: y, lambda y: np.ones_like(y)),
                (lambda y: y ** 2, lambda y: 2 * y),
                (lambda y: y ** 3, lambda y: 3 * y ** 2),
                (np.sin, np.cos),
            ]
            worst = 0.0
            for mu, v in cases:
                for r, rp in rs:
                    rep = idn.stein_check(float(mu), float(v), r, rp, tol=tol)
                    worst = max(worst, rep.abs_discrepancy)
            self._stein_cache = worst
        return self._stein_cache

    def _entropy_power_row(self, t, h, tol):
        if h not in self._profile_cache:
            self._profile_cache[h] = idn.entropy_power_profile(
                self._add_channel(h), self.t_grid, fd_step=1e-3)
        prof = self._profile_cache[h]
        i = self.t_grid.index(t)
        lhs = prof.d2n_fd[i]
        rhs = prof.d2n_formula[i]
        scale = max(1.0, abs(rhs))
        rep = idn.IdentityReport(
            identity_name="entropy-power", t=t, hurst=h,
            lhs=float(lhs), rhs=float(rhs),
            abs_discrepancy=abs(lhs - rhs), tolerance=tol * scale,
            passed=abs(lhs - rhs) <= tol * scale,
            method_notes=f"g={prof.g_values[i]:.9g} -> {prof.classifications[i]}; "
                         f"N={prof.n_values[i]:.9g}",
        )
        self.entropy_power_rows.append(
            {"t": t, "hurst": h, "entropy_power": float(prof.n_values[i]),
             "g": float(prof.g_values[i]),
             "classification": prof.classifications[i]})
        return rep

    def _fbm_stats_row(self, t, h, tol):
        if h not in self._fbm_cache:
            fcfg = self.cfg.get("fbm_stats", {})
            n = int(fcfg.get("n", 32))
            dt = float(fcfg.get("dt", 1.0 / 32))
            n_paths = int(fcfg.get("n_paths", 4000))
            seed = int(fcfg.get("seed", 1234))
            grid = dt * np.arange(1, n + 1)
            exact = fbm.covariance(grid[:, None], grid[None, :], h)
            stats = {}
            for i, method in enumerate(("cholesky", "circulant")):
                vals, _ = fbm.sample_paths(grid, h, method=method,
                                           seed=seed + i, n_paths=n_paths)
                emp = vals.T @ vals / n_paths
                prod_var = (vals[:, :, None] * vals[:, None, :]).var(axis=0, ddof=1)
                se = np.sqrt(prod_var / n_paths)
                stats[method] = (emp, se)
                del vals
            z_worst = max(
                float(np.max(np.abs(stats[m][0] - exact) / stats[m][1]))
                for m in stats)
            cross = float(np.max(
                np.abs(stats["cholesky"][0] - stats["circulant"][0])
                / np.sqrt(stats["cholesky"][1] ** 2 + stats["circulant"][1] ** 2)))
            self._fbm_cache[h] = (z_worst, cross, n, n_paths)
        z_worst, cross, n, n_paths = self._fbm_cache[h]
        return idn._report(
            "fbm-stats", t, h, max(z_worst, cross), 0.0, tol,
            notes=f"max |z| vs exact cov = {z_worst:.3g}; cross-method max |z| = "
                  f"{cross:.3g}; {n} grid pts, {n_paths} paths per method")


def run_suite(cfg):
    """Execute all (suite, t, H) combinations.

    Returns (exit_code, rows, runner).  Numerical failures raise; callers map
    them to exit code 3.
    """
    runner = _SuiteRunner(cfg)
    combos = [(s, t, h) for s in runner.suites
              for h in runner.h_grid for t in runner.t_grid]
    tasks = []
    for s, t, h in combos:
        if t < runner.min_t:
            runner.excluded.append((s, t, h))
            continue
        tasks.append((s, t, h))

    n_threads = int(os.environ.get("FBM_INFOFLOW_THREADS", "1"))
    if n_threads > 1:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            rows = list(pool.map(lambda job: runner.run_combo(*job), tasks))
    else:
        rows = [runner.run_combo(*job) for job in tasks]
    exit_code = 0 if all(r.passed for r in rows) else 1
    return exit_code, rows, runner


def _format_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def render_csv(rows, with_oracle=False, timestamp=None):
    """Report CSV: one comment header line with the timestamp, then the body.

    The body is a pure function of the config and seeds, so reruns are
    byte-identical below the first line.
    """
    buf = io.StringIO()
    ts = timestamp or datetime.datetime.now(datetime.timezone.utc).isoformat()
    buf.write(f"# fbm-infoflow report generated {ts}\n")
    writer = csv.writer(buf, lineterminator="\n")
    cols = CSV_COLUMNS + (MC_COLUMNS if with_oracle else ())
    writer.writerow(cols)
    for r in rows:
        record = r.row()
        vals = [_format_value(record[c]) for c in CSV_COLUMNS]
        if with_oracle:
            if "mc_value" in r.extras:
                vals += [_format_value(r.extras["mc_value"]),
                         _format_value(r.extras["mc_std_error"]),
                         _format_value(r.extras["mc_ok"])]
            else:
                vals += ["", "", ""]
        writer.writerow(vals)
    return buf.getvalue()


def render_json(rows):
    return json.dumps({
        "all_passed": all(r.passed for r in rows),
        "rows": [r.row() for r in rows],
    }, indent=2, sort_keys=True) + "\n"


def write_reports(rows, runner, output):
    with_oracle = bool(runner.oracle)
    out_dir = os.path.dirname(output)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
    with open(output + ".csv", "w") as fh:
        fh.write(render_csv(rows, with_oracle=with_oracle))
    with open(output + ".json", "w") as fh:
        fh.write(render_json(rows))
    if runner.entropy_power_rows:
        # Sort so the worker pool's completion order cannot leak into the file.
        runner.entropy_power_rows.sort(key=lambda rec: (rec["hurst"], rec["t"]))
        with open(output + "_entropy_power.csv", "w") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(("t", "hurst", "entropy_power", "g", "classification"))
            for rec in runner.entropy_power_rows:
                writer.writerow([_format_value(rec[k]) for k in
                                 ("t", "hurst", "entropy_power", "g", "classification")])


def _execute(cfg):
    try:
        exit_code, rows, runner = run_suite(cfg)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(2)
    except FbmInfoflowError as exc:
        click.echo(f"numerical error: {exc}", err=True)
        sys.exit(3)
    output = cfg.get("output", "report")
    write_reports(rows, runner, output)
    n_fail = sum(not r.passed for r in rows)
    click.echo(f"{len(rows)} checks, {n_fail} failed "
               f"({len(runner.excluded)} excluded below min_t); reports at {output}.*")
    sys.exit(exit_code)


@click.group()
def main():
    """Verify entropy-flow identities for fBm-driven channels."""


@main.command()
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=False), help="JSON suite config")
def run(config_path):
    """Run every suite in a config file."""
    try:
        with open(config_path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(2)
    _execute(cfg)


@main.command()
@click.argument("suite")
@click.option("--hurst", "-h", "hursts", multiple=True, type=float)
@click.option("--t", "times", multiple=True, type=float)
@click.option("--tol", type=float, default=None)
@click.option("--sigma", "sigma_kind", default="constant",
              type=click.Choice(["constant", "identity", "sqrt1p"]))
@click.option("--c", "sigma_c", type=float, default=1.0)
@click.option("--x0", type=float, default=0.0)
@click.option("--y0", type=float, default=1.0)
@click.option("--mean", type=float, default=0.0, help="additive initial mean")
@click.option("--variance", type=float, default=1.0, help="additive initial variance")
@click.option("--fd-step", type=float, default=None)
@click.option("--oracle", type=click.Choice(["mc"]), default=None)
@click.option("--samples", type=int, default=100000)
@click.option("--seed", type=int, default=0)
@click.option("--out", default="report")
def verify(suite, hursts, times, tol, sigma_kind, sigma_c, x0, y0,
           mean, variance, fd_step, oracle, samples, seed, out):
    """Run a single verification suite from command-line flags."""
    cfg = {
        "suites": [suite],
        "channel": {
            "variant": "multiplicative",
            "sigma": {"kind": sigma_kind, "c": sigma_c},
            "x0": x0,
            "initial": {"kind": "gaussian", "mean": mean, "variance": variance},
        },
        "t_grid": list(times) or [0.5, 1.0, 2.0],
        "hurst_grid": list(hursts) or [0.3, 0.5, 0.75],
        "kl": {"y0": y0},
        "output": out,
    }
    if tol is not None:
        cfg["tolerances"] = {suite: tol}
    if fd_step is not None:
        cfg["fd_step"] = fd_step
    if oracle:
        cfg["oracle"] = {"kind": oracle, "samples": samples, "seed": seed}
    _execute(cfg)


@main.group("fbm")
def fbm_group():
    """Fractional Brownian motion utilities."""


@fbm_group.command("sample")
@click.option("--h", "hurst", required=True, type=float)
@click.option("--n", required=True, type=int)
@click.option("--dt", required=True, type=float)
@click.option("--method", default="circulant",
              type=click.Choice(["circulant", "cholesky"]))
@click.option("--seed", default=0, type=int)
@click.option("--out", "out_path", required=True, type=click.Path())
def fbm_sample(hurst, n, dt, method, seed, out_path):
    """Sample one fBm path on a uniform grid and write it as CSV."""
    try:
        path = fbm.sample_path(dt * np.arange(1, n + 1), hurst,
                               method=method, seed=seed)
    except FbmInfoflowError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    with open(out_path, "w") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("time", "value"))
        for t, v in zip(path.times, path.values):
            writer.writerow([f"{t:.12g}", f"{v:.17g}"])
    if path.used_fallback:
        click.echo("warning: circulant embedding not nonnegative definite; "
                   "fell back to cholesky", err=True)
    click.echo(f"wrote {n} samples to {out_path}")


if __name__ == "__main__":
    main()
