"""Command line runner: ``specop <experiment> --config FILE`` and ``specop report DIR``.

Config files are flat ``key = value`` text; ``#`` starts a comment and list
values are comma separated.  Every experiment writes into its output
directory

* ``spectrum.csv`` (spectral experiments) or ``measurements.csv``,
* ``plot.csv`` with data for external plotting,
* ``summary.json`` (``schema: 1``) echoing the config, fits, predicted rates
  and verdicts,
* ``runtimes.json`` with wall-clock timings, kept apart so the other files
  are bit-identical across reruns.

Exit codes: 0 all verdicts pass, 1 a verdict failed, 2 nothing ran,
3 invalid configuration.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import spectral
from .besov import SpaceParams, besov_norm, seq_norm
from .grid import make_grid, lp_partition, self_dual_grid
from .operator import (HeatParams, assemble_fourier_matrix, heat_semigroup, operator_norm_probe,
                       wavelet_operator_matrix)
from .probes import DEFAULT_SEED, SUITE_VERSION, probe_suite
from .symbol import builtin_symbol, verify_class
from .wavelet import analyze, daubechies_system, max_level

SCHEMA = 1
EXPERIMENTS = ("heat-spectrum", "fourier-spectrum", "besov-equiv", "pseudo-bound",
               "smoothing", "symbol-check", "wavelet-transport")

EXIT_PASS, EXIT_FAIL, EXIT_EMPTY, EXIT_CONFIG = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# config

_FLOAT_KEYS = {"R", "s", "p", "q", "rho", "alpha", "sigma", "order", "spread_max", "ratio_bound",
               "variation_max", "delta"}
_INT_KEYS = {"n", "N", "u", "Jmax", "window_lo", "window_hi", "probes", "seed", "max_alpha",
             "max_gamma"}
_LIST_KEYS = {"t": float, "N_list": int}
_STR_KEYS = {"experiment", "symbol", "source", "model", "grid"}


def parse_config(text: str) -> dict:
    cfg: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in cfg:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            if key in _LIST_KEYS:
                cfg[key] = [_LIST_KEYS[key](v) for v in value.split(",") if v.strip()]
            elif key in _FLOAT_KEYS:
                cfg[key] = float(value)
            elif key in _INT_KEYS:
                cfg[key] = int(value)
            elif key in _STR_KEYS:
                cfg[key] = value
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {value!r}") from None
    return cfg


def load_config(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text)


def _grid(cfg, N=None):
    n = cfg.get("n", 1)
    N = cfg.get("N", 256) if N is None else N
    try:
        if cfg.get("grid") == "self-dual" or "R" not in cfg:
            return self_dual_grid(n, N)
        return make_grid(n, N, cfg["R"])
    except ValueError as exc:
        raise ConfigError(f"grid: {exc}") from None


def _space(cfg) -> SpaceParams:
    p = cfg.get("p", 2.0)
    try:
        return SpaceParams("B", cfg.get("s", 1.0), p, cfg.get("q", p))
    except ValueError as exc:
        raise ConfigError(f"space: {exc}") from None


def _symbol(cfg, default="one"):
    kind = cfg.get("symbol", default)
    params = {k: cfg[k] for k in ("rho", "alpha", "order") if k in cfg}
    if kind in ("heat", "frac_heat"):
        params["t"] = cfg.get("t", [0.1])[0]
    try:
        return builtin_symbol(kind, **params)
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"symbol: {exc}") from None


def _rate(source, n, p, **params):
    try:
        return spectral.predicted_rate(source, n, p, **params)
    except spectral.HypothesisError as exc:
        raise ConfigError(str(exc)) from None


def _default_source(kind: str, p: float) -> str:
    return f"{kind}_small_p" if p <= 2 else f"{kind}_large_p"


# ---------------------------------------------------------------------------
# output


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv(header, rows) -> str:
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else str(f)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


class Result:
    def __init__(self, experiment: str):
        self.experiment = experiment
        self.table_name = "measurements.csv"
        self.header: list = []
        self.rows: list = []
        self.plot_header: list = []
        self.plot_rows: list = []
        self.summary: dict = {}
        self.verdicts: dict = {}

    @property
    def passed(self) -> bool:
        return bool(self.verdicts) and all(self.verdicts.values())


# ---------------------------------------------------------------------------
# experiments


def _spectrum_rows(res: Result, mod, sv, shape, weyl) -> None:
    res.table_name = "spectrum.csv"
    res.header = ["k", "abs_lambda", "singular_value", "predicted_shape", "pass"]
    res.rows = [(k + 1, mod[k], sv[k], shape[k], bool(weyl.ok[k])) for k in range(mod.size)]
    res.plot_header = ["log_k", "log_abs_lambda", "log_singular_value", "log_predicted_shape"]
    with np.errstate(divide="ignore"):
        res.plot_rows = [(math.log(k + 1), np.log(mod[k]), np.log(sv[k]), np.log(shape[k]))
                         for k in range(mod.size)]


def _fit_for(mod, cfg, bound, reference):
    """Fit in the regime the bound predicts; log-critical fits hold gamma at its predicted value."""
    lo, hi = spectral.default_window(mod.size)
    window = (cfg.get("window_lo", lo), cfg.get("window_hi", hi))
    default = spectral.LOG_CORRECTED if bound.regime == spectral.LOG_CRITICAL else spectral.PURE_POWER
    model = cfg.get("model", default)
    gamma = bound.gamma if model == spectral.LOG_CORRECTED else None
    return spectral.fit_decay(mod, window, model, gamma=gamma, reference=reference)


def run_heat_spectrum(cfg, seed):
    ts = cfg.get("t", [0.1])
    if any(not 0 < t <= 1 for t in ts):
        raise ConfigError("heat-spectrum: every t must satisfy 0 < t <= 1")
    grid = _grid(cfg)
    n, p, s = grid.n, cfg.get("p", 2.0), cfg.get("s", 1.0)
    source = cfg.get("source", _default_source("heat_operator", p))
    if not source.startswith("heat_operator"):
        raise ConfigError(f"heat-spectrum needs a heat_operator source, got {source!r}")
    bound = _rate(source, n, p, s=s, t=ts[0])
    res = Result("heat-spectrum")
    spectra = []
    for t in ts:
        M = assemble_fourier_matrix(HeatParams(t, cfg.get("alpha", 1.0)).symbol(), grid)
        mod = np.abs(spectral.eigenvalues(M))
        sv = spectral.singular_values(M)
        spectra.append((t, M, mod, sv))
    t0, M, mod, sv = spectra[0]
    weyl = spectral.weyl_check(mod, sv, slack=spectral.solver_slack(M))
    # the fit follows the criterion: pure power over the window
    lo, hi = spectral.default_window(mod.size)
    fit = spectral.fit_decay(mod, (cfg.get("window_lo", lo), cfg.get("window_hi", hi)),
                             cfg.get("model", spectral.PURE_POWER), reference=sv[0])
    _spectrum_rows(res, mod, sv, bound.shape(np.arange(1, mod.size + 1)), weyl)
    res.verdicts["computed_beta>=predicted_beta"] = fit.beta >= bound.beta
    res.verdicts["weyl"] = weyl.holds
    res.verdicts["ordered"] = bool(np.all(np.diff(mod) <= 0) and np.all(np.diff(sv) <= 0))
    order = sorted(spectra, key=lambda item: item[0])
    mono = all(np.all(b[3] <= a[3] * (1 + 1e-10)) for a, b in zip(order, order[1:]))
    if len(order) > 1:
        res.verdicts["singular_values_nonincreasing_in_t"] = bool(mono)
    res.summary = {"fit": asdict(fit), "predicted": asdict(bound),
                   "computed_beta_by_t": {repr(t): spectral.fit_decay(m, fit.window, fit.model,
                                                                       reference=v[0]).beta
                                          for t, _, m, v in spectra}}
    return res


def run_fourier_spectrum(cfg, seed):
    grid = _grid(cfg)
    n, p = grid.n, cfg.get("p", 2.0)
    sigma = cfg.get("sigma", cfg.get("rho", 2.0))
    s = cfg.get("s", 0.5)
    source = cfg.get("source", _default_source("fourier_operator", p))
    if not source.startswith("fourier_operator"):
        raise ConfigError(f"fourier-spectrum needs a fourier_operator source, got {source!r}")
    bound = _rate(source, n, p, sigma=sigma, s=s)
    kind = cfg.get("symbol", "modulated")
    if kind not in ("modulated", "lift"):
        raise ConfigError(f"fourier-spectrum needs a modulated or lift symbol, got {kind!r}")
    sym = builtin_symbol(kind, rho=sigma)
    M = assemble_fourier_matrix(sym, grid)
    mod = np.abs(spectral.eigenvalues(M))
    sv = spectral.singular_values(M)
    weyl = spectral.weyl_check(mod, sv, slack=spectral.solver_slack(M))
    fit = _fit_for(mod, cfg, bound, sv[0])
    res = Result("fourier-spectrum")
    _spectrum_rows(res, mod, sv, bound.shape(np.arange(1, mod.size + 1)), weyl)
    res.verdicts["computed_beta>=predicted_beta"] = fit.beta >= bound.beta
    res.verdicts["weyl"] = weyl.holds
    res.verdicts["ordered"] = bool(np.all(np.diff(mod) <= 0) and np.all(np.diff(sv) <= 0))
    res.summary = {"fit": asdict(fit), "predicted": asdict(bound), "symbol": sym.name}
    return res


def run_besov_equiv(cfg, seed):
    grid = _grid(cfg)
    sp = _space(cfg)
    u = cfg.get("u", 6)
    Jmax = cfg.get("Jmax", 4)
    try:
        sys_ = daubechies_system(u)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if not 0 <= Jmax <= max_level(grid):
        raise ConfigError(f"besov-equiv: Jmax={Jmax} outside 0..{max_level(grid)} for this grid")
    part = lp_partition(grid)
    res = Result("besov-equiv")
    res.header = ["probe", "computed_seq_norm", "computed_besov_norm", "computed_ratio"]
    ratios = []
    for pr in probe_suite(grid.n, cfg.get("probes", 20), seed):
        f = pr.sample(grid)
        a = seq_norm(analyze(f, sys_, Jmax), sp, "b")
        b = besov_norm(f, sp, part)
        ratios.append(a / b)
        res.rows.append((pr.name, a, b, a / b))
    r = np.array(ratios)
    bound = cfg.get("ratio_bound", 16.0)
    spread_max = cfg.get("spread_max", 8.0)
    res.plot_header = ["index", "computed_ratio"]
    res.plot_rows = list(enumerate(ratios))
    res.verdicts["ratio_within_bound"] = bool(r.min() >= 1 / bound and r.max() <= bound)
    res.verdicts["ratio_spread"] = bool(r.max() / r.min() < spread_max)
    res.summary = {"computed_min_ratio": r.min(), "computed_max_ratio": r.max(),
                   "computed_spread": r.max() / r.min()}
    return res


def run_pseudo_bound(cfg, seed):
    sp = _space(cfg)
    sym = _symbol(cfg, "modulated")
    Ns = cfg.get("N_list", [64, 128, 256])
    grids = [_grid(cfg, N) for N in Ns]
    est = operator_norm_probe(sym, sp, grids, probes=cfg.get("probes", 20), seed=seed)
    vals = np.array([e.estimate for e in est])
    res = Result("pseudo-bound")
    res.header = ["N", "computed_estimate", "computed_probe_max", "best_probe", "computed_power_iteration"]
    res.rows = [(e.grid.N, e.estimate, e.probe_best, e.best_probe,
                 "" if e.power_iteration is None else e.power_iteration) for e in est]
    res.plot_header = ["N", "computed_estimate"]
    res.plot_rows = [(e.grid.N, e.estimate) for e in est]
    variation = vals.max() / vals.min()
    res.verdicts["estimate_variation"] = bool(variation < cfg.get("variation_max", 2.0))
    res.summary = {"computed_variation": variation, "symbol": sym.name}
    return res


def run_smoothing(cfg, seed):
    grid = _grid(cfg)
    s = cfg.get("s", 1.0)
    p = cfg.get("p", 2.0)
    d = cfg.get("delta", 1.0)
    ts = cfg.get("t", [2.0**-k for k in range(1, 9)])
    lo = SpaceParams("B", s, p, cfg.get("q", p))
    hi = SpaceParams("B", s + d, p, cfg.get("q", p))
    part = lp_partition(grid)
    fs = [(pr.name, pr.sample(grid)) for pr in probe_suite(grid.n, cfg.get("probes", 10), seed)]
    base = {name: besov_norm(f, lo, part) for name, f in fs}
    res = Result("smoothing")
    res.header = ["t", "probe", "computed_ratio"]
    Q = []
    pooled = []
    for t in ts:
        rs = []
        for name, f in fs:
            r = t ** (d / 2) * besov_norm(heat_semigroup(f, HeatParams(t)), hi, part) / base[name]
            rs.append(r)
            res.rows.append((t, name, r))
        Q.append(max(rs))
        pooled += rs
    Q = np.array(Q)
    res.plot_header = ["t", "computed_suite_max"]
    res.plot_rows = list(zip(ts, Q))
    spread = Q.max() / Q.min()
    res.verdicts["suite_max_spread"] = bool(spread < cfg.get("spread_max", 10.0))
    res.summary = {"computed_spread_over_t": spread,
                   "computed_pooled_spread": max(pooled) / min(pooled) if min(pooled) > 0 else "inf"}
    return res


def run_symbol_check(cfg, seed):
    sym = _symbol(cfg)
    grid = _grid(cfg)
    rep = verify_class(sym, cfg.get("max_alpha", 2), cfg.get("max_gamma", 2), grid)
    res = Result("symbol-check")
    res.header = ["alpha", "gamma", "computed_c_quarter", "computed_c_half", "computed_c_full", "pass"]
    for (a, g), c in rep.constants.items():
        res.rows.append(("/".join(map(str, a)), "/".join(map(str, g)), c[0], c[1], c[2],
                         rep.verdicts[(a, g)]))
    res.plot_header = ["radius_quarter", "radius_half", "radius_full"]
    res.plot_rows = [rep.radii]
    res.verdicts["class_bounds"] = rep.passed
    res.summary = {"symbol": sym.name, "declared_order": sym.order, "failures": rep.failures()}
    return res


def run_wavelet_transport(cfg, seed):
    sym = _symbol(cfg, "lift")
    grid = _grid(cfg)
    try:
        sys_ = daubechies_system(cfg.get("u", 4))
        W = wavelet_operator_matrix(sym, sys_, cfg.get("Jmax", 2), grid)
    except (ValueError, MemoryError) as exc:
        raise ConfigError(f"wavelet-transport: {exc}") from None
    diag = W.diagnostics
    res = Result("wavelet-transport")
    res.header = ["bin_lo", "bin_hi", "computed_max_abs_entry"]
    e = diag["distance_edges"]
    res.rows = [(e[i], e[i + 1], v) for i, v in enumerate(diag["max_by_distance"])]
    res.plot_header = ["level_gap", "computed_max_abs_entry"]
    res.plot_rows = list(enumerate(diag["max_by_level_gap"]))
    md = np.array(diag["max_by_distance"])
    res.verdicts["decay_in_distance"] = bool(md[-1] <= md[0])
    res.verdicts["row_sums_bounded"] = bool(np.isfinite(diag["max_row_sum"]))
    res.summary = {"symbol": sym.name, "size": len(W.keys), "computed_max_row_sum": diag["max_row_sum"]}
    return res


RUNNERS = {
    "heat-spectrum": run_heat_spectrum,
    "fourier-spectrum": run_fourier_spectrum,
    "besov-equiv": run_besov_equiv,
    "pseudo-bound": run_pseudo_bound,
    "smoothing": run_smoothing,
    "symbol-check": run_symbol_check,
    "wavelet-transport": run_wavelet_transport,
}


def run_experiment(experiment: str, cfg: dict, out: Path, seed: int) -> Result:
    if experiment not in RUNNERS:
        raise ConfigError(f"unknown experiment {experiment!r}")
    if cfg.get("experiment", experiment) != experiment:
        raise ConfigError(f"config is for {cfg['experiment']!r}, not {experiment!r}")
    start = time.perf_counter()
    res = RUNNERS[experiment](cfg, seed)
    elapsed = time.perf_counter() - start
    out = Path(out)
    _atomic_write(out / res.table_name, _csv(res.header, res.rows))
    _atomic_write(out / "plot.csv", _csv(res.plot_header, res.plot_rows))
    summary = {
        "schema": SCHEMA,
        "experiment": experiment,
        "config": cfg,
        "seed": seed,
        "probe_suite_version": SUITE_VERSION,
        "verdicts": res.verdicts,
        "passed": res.passed,
        **res.summary,
    }
    _atomic_write(out / "summary.json", json.dumps(_jsonable(summary), indent=2, sort_keys=True) + "\n")
    _atomic_write(out / "runtimes.json", json.dumps({"seconds": elapsed}) + "\n")
    return res


# ---------------------------------------------------------------------------
# report


def emit_report(directory) -> tuple[str, int]:
    """Fixed-format table of verdicts found under ``directory`` and the exit code."""
    directory = Path(directory)
    summaries = sorted(directory.glob("summary.json")) + sorted(directory.glob("*/summary.json"))
    rows = []
    for path in summaries:
        try:
            data = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read {path}: {exc}") from None
        for name, ok in sorted(data.get("verdicts", {}).items()):
            rows.append((data.get("experiment", path.parent.name), name, bool(ok)))
    if not rows:
        return f"no results under {directory}\n", EXIT_EMPTY
    w1 = max(len(r[0]) for r in rows + [("experiment", "", True)])
    w2 = max(len(r[1]) for r in rows + [("", "verdict", True)])
    lines = [f"{'experiment':<{w1}}  {'verdict':<{w2}}  result", "-" * (w1 + w2 + 10)]
    for exp, name, ok in rows:
        lines.append(f"{exp:<{w1}}  {name:<{w2}}  {'PASS' if ok else 'FAIL'}")
    failed = [r for r in rows if not r[2]]
    lines.append("")
    if failed:
        lines.append("failed: " + ", ".join(f"{e}/{n}" for e, n, _ in failed))
    else:
        lines.append(f"all {len(rows)} verdicts pass")
    return "\n".join(lines) + "\n", EXIT_FAIL if failed else EXIT_PASS


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="specop", description=__doc__.split("\n")[0])
    ap.add_argument("command", choices=EXPERIMENTS + ("report",))
    ap.add_argument("directory", nargs="?", help="results directory (report only)")
    ap.add_argument("--config", help="flat key = value config file")
    ap.add_argument("--out", help="output directory (default ./specop-out/<experiment>)")
    ap.add_argument("--seed", type=_u64, help="probe-suite seed (overrides the config)")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "report":
        if not args.directory:
            print("specop report: a results directory is required", file=sys.stderr)
            return EXIT_CONFIG
        try:
            text, code = emit_report(args.directory)
        except ConfigError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        sys.stdout.write(text)
        return code
    if not args.config:
        print(f"specop {args.command}: --config is required", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config)
        seed = args.seed if args.seed is not None else cfg.get("seed", DEFAULT_SEED)
        out = Path(args.out) if args.out else Path("specop-out") / args.command
        res = run_experiment(args.command, cfg, out, seed)
    except ConfigError as exc:
        print(f"config invalid: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error on {exc.filename}: {exc.strerror}", file=sys.stderr)
        return EXIT_FAIL
    text, code = emit_report(out)
    sys.stdout.write(text)
    return code
