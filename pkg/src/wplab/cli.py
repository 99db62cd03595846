"""Command-line runner for the verification suites.

Each suite evaluates one inequality or identity over a grid of cases and
writes ``<suite>.csv`` (one row per case) and ``<suite>.json`` (summary) to the
output directory, plus gnuplot scripts with their backing CSVs.

Exit codes: 0 pass, 2 inequality violated, 3 convergence failure in some case,
64 configuration error, 73 output directory not writable.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from .fuchsian import SQUARE_POINT, FNPoint, group_from_fn, length_jet, primitive_class
from .series import ConvergenceError

EXIT_PASS, EXIT_VIOLATION, EXIT_CONVERGENCE, EXIT_CONFIG, EXIT_CANTCREAT = 0, 2, 3, 64, 73
SUITES = ("l1", "gradient", "hessian-modes", "convexity", "comparisons", "stratum", "injectivity")

CLAIMS = {
    "l1": "L1 norm of P_sigma equals 4/3 of the geodesic length",
    "gradient": "<grad l, grad l> >= (2/pi) l, with ratio to l + l^2 e^(l/2) bounded",
    "hessian-modes": "every Laurent pair contributes positively and 1 <= Hess/ddbar <= 3",
    "convexity": "l, l^(1/2) and (l1 + l2)^(1/2) are strictly convex along WP geodesics",
    "comparisons": "gradient-Hessian comparisons and the complex Hessian bound for 1/(sum l)",
    "stratum": "distance to the stratum is at most (2 pi l)^(1/2)",
    "injectivity": "distance to the stratum is comparable to the square root of the systole",
}

DEFAULT_GRIDS = {
    "l1": [SQUARE_POINT, FNPoint(1.0, 0.3), FNPoint(0.5, 0.1), FNPoint(2.5, -0.8), FNPoint(4.0, 1.0)],
    "hessian-modes": [0.1, 0.5, 1.0, 2.0, 5.0],
    "stratum": [1e-3, 3e-3, 1e-2, 3e-2, 1e-1],
    "injectivity": [FNPoint(1e-3, 0.0), FNPoint(1e-2, 0.0), FNPoint(0.1, 0.02), FNPoint(0.5, 0.1),
                    FNPoint(1.5, 0.3), FNPoint(3.0, 0.5)],
}

SLOPES = [(1, 0), (0, 1), (1, 1)]


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    suite: str
    grid: list | None = None          # FNPoints or l values; None selects the suite default
    curves: list = field(default_factory=lambda: list(SLOPES))
    truncation: int = 8
    quad_tol: float = 1e-3
    modes: int = 32
    seed: int = 0
    samples: int = 20
    length: float = 1.0

    def validate(self):
        if self.suite not in SUITES:
            raise ConfigError(f"unknown suite {self.suite!r}; choose from {', '.join(SUITES)}")
        if self.quad_tol <= 0:
            raise ConfigError("quad-tol must be positive")
        if self.truncation < 1 or self.modes < 0 or self.samples < 1:
            raise ConfigError("truncation and samples must be >= 1, modes >= 0")
        if self.length < 0:
            raise ConfigError("geodesic length must be non-negative")
        if self.grid is not None and not self.grid:
            raise ConfigError("grid is empty")
        for c in self.curves:
            try:
                primitive_class(*c)
            except ValueError as exc:
                raise ConfigError(f"bad curve {c}: {exc}") from None
        return self


@dataclass
class SuiteResult:
    suite: str
    passed: bool
    columns: list
    rows: list
    params: dict
    worst_margin: float
    convergence_failures: int = 0
    wall_time: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def exit_code(self) -> int:
        if self.passed:
            return EXIT_PASS
        violated = math.isfinite(self.worst_margin) and self.worst_margin <= 0
        if self.convergence_failures and not violated:
            return EXIT_CONVERGENCE
        return EXIT_VIOLATION

    def summary(self) -> dict:
        # wall time is left out so that reruns are byte-identical
        return {
            "suite": self.suite,
            "pass": bool(self.passed),
            "cases": len(self.rows),
            "worst_margin": _num(self.worst_margin),
            "params": self.params,
            "claim": CLAIMS[self.suite],
            "convergence_failures": self.convergence_failures,
            **{k: _num(v) if isinstance(v, float) else v for k, v in self.extra.items()},
        }


# -- parsing ----------------------------------------------------------------------

def _num(x):
    """JSON-safe float with 17 significant digits (non-finite values become strings)."""
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    x = float(x)
    return float(f"{x:.17g}") if math.isfinite(x) else str(x)


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


def parse_grid(text: str) -> list:
    """``"0.1,0.5"`` gives l values; ``"1.3:0.4,2:0"`` gives FN points ``(l, tau)``."""
    out = []
    for item in text.replace(";", ",").split(","):
        item = item.strip()
        if not item:
            continue
        try:
            if ":" in item:
                l, t = item.split(":")
                out.append(FNPoint(float(l), float(t)))
            else:
                out.append(float(item))
        except ValueError as exc:
            raise ConfigError(f"bad grid entry {item!r}: {exc}") from None
    if not out:
        raise ConfigError("grid is empty")
    return out


def parse_slopes(text: str) -> list:
    out = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            p, q = item.split("/")
            out.append((int(p), int(q)))
        except ValueError:
            raise ConfigError(f"bad slope {item!r}; use p/q") from None
    if not out:
        raise ConfigError("no curves given")
    return out


_KEYS = {
    "suite": str, "grid": parse_grid, "curves": parse_slopes, "truncation": int,
    "quad_tol": float, "modes": int, "seed": int, "samples": int, "length": float,
}


def read_config(path: str) -> dict:
    """Flat ``key = value`` file with optional ``[section]`` headers (sections are merged in order)."""
    cp = configparser.ConfigParser(interpolation=None)
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not text.lstrip().startswith("["):
        text = "[experiment]\n" + text
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    out = {}
    for section in cp.sections():
        for key, value in cp.items(section):
            key = key.replace("-", "_")
            if key not in _KEYS:
                raise ConfigError(f"unknown config key {key!r}")
            out[key] = value
    return out


def build_config(suite: str, file_values: dict, flag_values: dict) -> ExperimentConfig:
    merged = dict(file_values)
    merged.update({k: v for k, v in flag_values.items() if v is not None})
    merged["suite"] = suite
    kw = {}
    for key, raw in merged.items():
        conv = _KEYS[key]
        try:
            kw[key] = conv(raw) if isinstance(raw, str) else raw
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {exc}") from None
    return ExperimentConfig(**kw).validate()


# -- suites -----------------------------------------------------------------------

def _points(cfg: ExperimentConfig, default):
    grid = cfg.grid if cfg.grid is not None else default
    return [g if isinstance(g, FNPoint) else FNPoint(float(g), 0.0) for g in grid]


def _ells(cfg: ExperimentConfig, default):
    grid = cfg.grid if cfg.grid is not None else default
    return [g.l_alpha if isinstance(g, FNPoint) else float(g) for g in grid]


def _random_points(rng, n, lo=0.3, hi=3.0):
    out = []
    for _ in range(n):
        l = float(rng.uniform(lo, hi))
        out.append(FNPoint(l, float(rng.uniform(-0.5, 0.5)) * l))
    return out


def _slope_str(s):
    return f"{s[0]}/{s[1]}"


def suite_l1(cfg: ExperimentConfig):
    from .series import build_coset_sum, l1_norm_p_sigma

    cols = ["l_alpha", "tau", "slope", "ell", "l1", "ratio", "rel_error", "margin"]
    rows = []
    for p in _points(cfg, DEFAULT_GRIDS["l1"]):
        G = group_from_fn(p)
        for s in cfg.curves:
            cs = build_coset_sum(G, s, cfg.truncation)
            val = l1_norm_p_sigma(cs)
            rel = abs(val / (4.0 / 3.0 * cs.ell) - 1.0)
            rows.append([p.l_alpha, p.tau, _slope_str(s), cs.ell, val, val / cs.ell, rel, cfg.quad_tol - rel])
    return cols, rows, {}


def suite_gradient(cfg: ExperimentConfig, rng):
    from .teich import grad_norm_sq

    pts = _points(cfg, None) if cfg.grid is not None else _random_points(rng, cfg.samples)
    cols = ["l_alpha", "tau", "slope", "ell", "grad_norm_sq", "lower_bound", "margin", "growth_ratio"]
    rows = []
    for p in pts:
        for s in cfg.curves:
            ell = length_jet(p, primitive_class(*s))[0]
            gn = grad_norm_sq(s, p, max_len=cfg.truncation)
            lower = 2.0 / math.pi * ell
            rows.append([p.l_alpha, p.tau, _slope_str(s), ell, gn, lower, gn - lower,
                         gn / (ell + ell * ell * math.exp(ell / 2))])
    ratios = [r[-1] for r in rows]
    return cols, rows, {"growth_constant": max(ratios)}


def suite_hessian_modes(cfg: ExperimentConfig, rng):
    from .strip import pair_contribution

    # coefficients are drawn Q-normalised so every mode is representable at small ell
    cols = ["ell", "n", "c_n_re", "c_n_im", "c_mn_re", "c_mn_im", "hessian", "complex_hessian",
            "ratio", "margin"]
    rows = []
    N = cfg.modes
    for ell in _ells(cfg, DEFAULT_GRIDS["hessian-modes"]):
        c = rng.normal(size=2 * N + 1) + 1j * rng.normal(size=2 * N + 1)
        for n in range(N + 1):
            cp, cm = c[N + n], c[N - n]
            mc = pair_contribution(ell, n, cp, cm)
            margin = min(mc.hessian, mc.ratio - 1.0, 3.0 - mc.ratio)
            rows.append([ell, n, cp.real, cp.imag, cm.real, cm.imag, mc.hessian,
                         mc.complex_hessian, mc.ratio, margin])
    return cols, rows, {}


def suite_convexity(cfg: ExperimentConfig, rng):
    from .teich import convexity_probe, geodesic_shoot, length_functional, unit_vector

    cols = ["case", "l_alpha", "tau", "functional", "curves", "min_second_difference", "noise_floor",
            "margin", "degenerate"]
    rows = []
    pts = _points(cfg, None) if cfg.grid is not None else _random_points(rng, cfg.samples, 0.5, 2.5)
    step = 0.1 if cfg.length == 0 else cfg.length / 10
    for k, p in enumerate(pts):
        theta = float(rng.uniform(0, 2 * math.pi))
        b1 = cfg.curves[k % len(cfg.curves)]
        b2 = cfg.curves[(k + 1) % len(cfg.curves)]
        v = unit_vector(p, [math.cos(theta), math.sin(theta)], max_len=cfg.truncation)
        path = geodesic_shoot(p, v, cfg.length, step=step, max_len=cfg.truncation)
        for kind, curves, label in (("length", b1, _slope_str(b1)), ("sqrt", b1, _slope_str(b1)),
                                    ("sqrt_sum", [b1, b2], _slope_str(b1) + "+" + _slope_str(b2))):
            rep = convexity_probe(path, length_functional(kind, curves))
            margin = math.nan if rep.degenerate else rep.min_value - rep.noise_floor
            rows.append([k, p.l_alpha, p.tau, kind, label, rep.min_value, rep.noise_floor,
                         margin, rep.degenerate])
    return cols, rows, {}


def suite_comparisons(cfg: ExperimentConfig, rng):
    from .teich import complex_hessian, hessian_covariant, holomorphic_differential, length_differential, unit_vector

    cols = ["case", "l_alpha", "tau", "inequality", "curves", "lhs", "rhs", "margin"]
    rows = []
    pts = _points(cfg, None) if cfg.grid is not None else _random_points(rng, cfg.samples)
    kw = {"max_len": cfg.truncation}
    pairs = [(cfg.curves[i % len(cfg.curves)], cfg.curves[(i + 1) % len(cfg.curves)])
             for i in range(len(cfg.curves))]
    for k, p in enumerate(pts):
        theta = float(rng.uniform(0, 2 * math.pi))
        v = unit_vector(p, [math.cos(theta), math.sin(theta)], **kw)
        lam, mu = pairs[k % len(pairs)]
        ell = {c: length_jet(p, primitive_class(*c))[0] for c in (lam, mu)}
        label = _slope_str(lam) + "," + _slope_str(mu)
        # real comparison: |dl(v) dm(v)| < l Hess m + m Hess l
        dl = {c: float(length_differential(c, p) @ v) for c in (lam, mu)}
        H = {c: hessian_covariant(c, p, v, **kw) for c in (lam, mu)}
        lhs, rhs = abs(dl[lam] * dl[mu]), ell[lam] * H[mu] + ell[mu] * H[lam]
        rows.append([k, p.l_alpha, p.tau, "real", label, lhs, rhs, rhs - lhs])
        # complex analogue: 4 |dl ∧ dbar m| < l ddbar m + m ddbar l
        d = {c: holomorphic_differential(c, p, v, **kw) for c in (lam, mu)}
        C = {c: complex_hessian(c, p, v, **kw) for c in (lam, mu)}
        lhs, rhs = 4 * abs(d[lam] * np.conj(d[mu])), ell[lam] * C[mu] + ell[mu] * C[lam]
        rows.append([k, p.l_alpha, p.tau, "complex", label, lhs, rhs, rhs - lhs])
        # -ddbar(1/L) < 2 ddbar L / L^2 for L = sum of lengths
        L = ell[lam] + (ell[mu] if mu != lam else 0.0)
        dL = d[lam] + (d[mu] if mu != lam else 0.0)
        CL = C[lam] + (C[mu] if mu != lam else 0.0)
        lhs = CL / L ** 2 - 2 * abs(dL) ** 2 / L ** 3
        rhs = 2 * CL / L ** 2
        rows.append([k, p.l_alpha, p.tau, "reciprocal", label, lhs, rhs, rhs - lhs])
    return cols, rows, {}


def suite_stratum(cfg: ExperimentConfig):
    from .teich import distance_to_stratum

    cols = ["ell", "tau", "d", "bound", "margin", "residual", "c_quadratic", "c_three_halves"]
    rows = []
    for p in _points(cfg, DEFAULT_GRIDS["stratum"]):
        r = distance_to_stratum(p, max_len=min(cfg.truncation, 6))
        resid = r.distance - r.bound
        rows.append([p.l_alpha, p.tau, r.distance, r.bound, r.bound * (1 + 1e-2) - r.distance, resid,
                     abs(resid) / p.l_alpha ** 2, abs(resid) / p.l_alpha ** 3.5])
    extra = {}
    if len(rows) >= 2:
        # stability of |d - (2 pi l)^(1/2)| / l^2 across the two smallest l (reported, not asserted)
        small = sorted(rows, key=lambda r: r[0])[:2]
        spread = abs(small[1][6] / small[0][6] - 1.0) if small[0][6] > 0 else math.inf
        extra = {"c_quadratic_spread": spread, "c_quadratic_stable": bool(spread <= 0.2)}
    return cols, rows, extra


def suite_injectivity(cfg: ExperimentConfig):
    from .teich import distance_to_stratum, systole

    cols = ["l_alpha", "tau", "systole", "systole_slope", "d", "ratio", "margin"]
    rows = []
    for p in _points(cfg, DEFAULT_GRIDS["injectivity"]):
        sys_len, slope = systole(p)
        d = distance_to_stratum(p, max_len=min(cfg.truncation, 6)).distance
        ratio = d / math.sqrt(sys_len)
        rows.append([p.l_alpha, p.tau, sys_len, _slope_str(slope), d, ratio, ratio])
    ratios = [r[5] for r in rows]
    return cols, rows, {"min_ratio": min(ratios), "max_ratio": max(ratios)}


def run_suite(cfg: ExperimentConfig) -> SuiteResult:
    """Run one suite; per-case convergence failures are annotated and counted."""
    cfg.validate()
    rng = np.random.default_rng(cfg.seed)
    t0 = time.perf_counter()
    failures = 0
    try:
        if cfg.suite == "l1":
            cols, rows, extra = suite_l1(cfg)
        elif cfg.suite == "gradient":
            cols, rows, extra = suite_gradient(cfg, rng)
        elif cfg.suite == "hessian-modes":
            cols, rows, extra = suite_hessian_modes(cfg, rng)
        elif cfg.suite == "convexity":
            cols, rows, extra = suite_convexity(cfg, rng)
        elif cfg.suite == "comparisons":
            cols, rows, extra = suite_comparisons(cfg, rng)
        elif cfg.suite == "stratum":
            cols, rows, extra = suite_stratum(cfg)
        else:
            cols, rows, extra = suite_injectivity(cfg)
    except (ConvergenceError, RuntimeError) as exc:
        cols, rows, extra = ["error"], [[str(exc)]], {}
        failures = 1
    margins = [r[cols.index("margin")] for r in rows] if "margin" in cols else []
    # a NaN margin is a failure unless the row is flagged degenerate
    degenerate = [bool(r[cols.index("degenerate")]) for r in rows] if "degenerate" in cols else [False] * len(rows)
    checked = [m for m, d in zip(margins, degenerate) if not d]
    finite = [m for m in checked if isinstance(m, float) and math.isfinite(m)]
    worst = min(finite) if finite else math.nan
    passed = failures == 0 and len(finite) == len(checked) and all(m > 0 for m in finite)
    cols = cols + ["status"]
    rows = [r + [_status(r, cols)] for r in rows] if failures == 0 else [r + ["convergence failure"] for r in rows]
    params = {"truncation": cfg.truncation, "quad_tol": cfg.quad_tol, "modes": cfg.modes,
              "seed": cfg.seed, "samples": cfg.samples, "length": cfg.length,
              "curves": [_slope_str(c) for c in cfg.curves],
              "grid": None if cfg.grid is None else [fmt_grid(g) for g in cfg.grid]}
    return SuiteResult(cfg.suite, passed, cols, rows, params, worst, failures,
                       time.perf_counter() - t0, extra)


def fmt_grid(g) -> str:
    return f"{fmt(g.l_alpha)}:{fmt(g.tau)}" if isinstance(g, FNPoint) else fmt(g)


def _status(row, cols) -> str:
    if "margin" not in cols:
        return "ok"
    m = row[cols.index("margin")]
    if isinstance(m, float) and not math.isfinite(m):
        flagged = "degenerate" in cols and bool(row[cols.index("degenerate")])
        return "degenerate" if flagged else "non-finite"
    if m > 0:
        return "ok"
    ineq = row[cols.index("inequality")] if "inequality" in cols else "bound"
    return f"violated {ineq} by {fmt(-m)}"


# -- output -----------------------------------------------------------------------

def _csv_text(cols, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([fmt(x) for x in r])
    return buf.getvalue()


def write_outputs(result: SuiteResult, outdir: str) -> list[str]:
    """Write ``<suite>.csv`` and ``<suite>.json``; returns the file names."""
    os.makedirs(outdir, exist_ok=True)
    base = result.suite.replace("-", "_")
    files = {f"{base}.csv": _csv_text(result.columns, result.rows),
             f"{base}.json": json.dumps(result.summary(), indent=2, sort_keys=True) + "\n"}
    for name, text in files.items():
        with open(os.path.join(outdir, name), "w") as fh:
            fh.write(text)
    return sorted(files)


_PLOTS: dict[str, tuple[str, list, str]] = {
    # suite: (csv name, backing columns, gnuplot body)
    "stratum": ("distance_vs_sqrt.csv", ["ell", "d", "bound"],
                "set logscale xy\nset xlabel 'l'\nset ylabel 'distance'\n"
                "plot 'distance_vs_sqrt.csv' using 1:2 with linespoints title 'd', \\\n"
                "     '' using 1:3 with lines title '(2 pi l)^(1/2)'\n"),
    "hessian-modes": ("ratio_vs_ell.csv", ["ell", "n", "ratio"],
                      "set xlabel 'n'\nset ylabel 'Hess / ddbar'\nset yrange [0:4]\n"
                      "plot 'ratio_vs_ell.csv' using 2:3:1 with points palette title 'ratio'\n"),
    "convexity": ("convexity_profile.csv", ["case", "functional", "min_second_difference"],
                  "set xlabel 'case'\nset ylabel 'min second difference'\nset logscale y\n"
                  "plot 'convexity_profile.csv' using 1:3 with points title 'min d2'\n"),
    "injectivity": ("ratio_vs_systole.csv", ["systole", "ratio"],
                    "set logscale x\nset xlabel 'systole'\nset ylabel 'd / sys^(1/2)'\n"
                    "plot 'ratio_vs_systole.csv' using 1:2 with linespoints title 'ratio'\n"),
    "gradient": ("gradient_ratio.csv", ["ell", "grad_norm_sq", "lower_bound"],
                 "set logscale xy\nset xlabel 'l'\n"
                 "plot 'gradient_ratio.csv' using 1:2 title '<grad l, grad l>', '' using 1:3 with lines title '2l/pi'\n"),
}


def emit_plots(result: SuiteResult | None, outdir: str) -> list[str]:
    """Gnuplot scripts and their backing CSVs; returns the file manifest."""
    if result is None or not result.rows or result.suite not in _PLOTS:
        return []
    name, keep, body = _PLOTS[result.suite]
    if any(c not in result.columns for c in keep):
        return []
    idx = [result.columns.index(c) for c in keep]
    os.makedirs(outdir, exist_ok=True)
    rows = sorted(([r[i] for i in idx] for r in result.rows), key=lambda r: [str(fmt(x)) for x in r])
    with open(os.path.join(outdir, name), "w") as fh:
        fh.write(_csv_text(keep, rows))
    script = name.replace(".csv", ".gp")
    with open(os.path.join(outdir, script), "w") as fh:
        fh.write("set datafile separator ','\nset key autotitle columnhead\n" + body)
    return sorted([name, script])


# -- entry point --------------------------------------------------------------------

def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wplab", description="Run a verification suite.")
    sub = ap.add_subparsers(dest="suite", required=True)
    for name in SUITES:
        sp = sub.add_parser(name, help=CLAIMS[name])
        sp.add_argument("--config", help="key=value file with optional [section] headers")
        sp.add_argument("--out", default="wplab-out", help="output directory")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--truncation", type=int, help="maximal word length in series")
        sp.add_argument("--modes", type=int, help="Fourier truncation N")
        sp.add_argument("--quad-tol", dest="quad_tol", type=float, help="quadrature tolerance")
        sp.add_argument("--grid", help="comma list of l values or l:tau points")
        sp.add_argument("--curves", help="comma list of slopes p/q")
        sp.add_argument("--samples", type=int, help="number of random cases")
        sp.add_argument("--length", type=float, help="geodesic length for the convexity suite")
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = make_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PASS if exc.code == 0 else EXIT_CONFIG
    try:
        file_values = read_config(args.config) if args.config else {}
        flags = {k: getattr(args, k) for k in _KEYS if k != "suite" and hasattr(args, k)}
        cfg = build_config(args.suite, file_values, flags)
    except ConfigError as exc:
        print(f"wplab: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        os.makedirs(args.out, exist_ok=True)
        if not os.access(args.out, os.W_OK):
            raise PermissionError(args.out)
    except OSError as exc:
        print(f"wplab: cannot write to {args.out}: {exc}", file=sys.stderr)
        return EXIT_CANTCREAT
    result = run_suite(cfg)
    try:
        files = write_outputs(result, args.out) + emit_plots(result, args.out)
    except OSError as exc:
        print(f"wplab: cannot write to {args.out}: {exc}", file=sys.stderr)
        return EXIT_CANTCREAT
    print(f"{cfg.suite}: {'pass' if result.passed else 'FAIL'} ({len(result.rows)} cases, "
          f"worst margin {fmt(result.worst_margin)}, {result.wall_time:.1f} s); wrote {', '.join(files)}",
          file=sys.stderr)
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
