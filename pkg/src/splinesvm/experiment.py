"""Consistency sweep over grid resolution d and sample size n.

Every (level, n, gamma, replicate) cell trains on a fresh sample of n
functions and is scored on a test set shared by all cells of the same
replicate. Training functions depend on (replicate, n) only, so the
resolutions are compared on the same underlying curves.
"""

from __future__ import annotations

import itertools
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .datagen import GeneratorSpec, bayes_error, draw_functions, dyadic_grid, MAX_DYADIC_LEVEL
from .errors import ConfigError, ConvergenceFailure, InvalidParameter
from .functional import FunctionalSvmConfig, fit, predict_many
from .kernels import KernelSpec

RESULTS_HEADER = (
    "d,n,gamma,replicate,train_error,test_error,bayes_error,C_used,converged,wall_time_ms"
)
MAX_FAILED_FRACTION = 0.2

_GENERATOR_KEYS = {"order", "anchor_count", "class_separation", "noise_scale", "flip_prob", "seed"}
_TOP_KEYS = {
    "generator",
    "grid_levels",
    "sample_sizes",
    "gamma",
    "beta",
    "replicates",
    "test_size",
    "jitter",
    "seed",
    "output_dir",
    "c_override",
    "kkt_tolerance",
}


@dataclass(frozen=True)
class ExperimentConfig:
    generator: GeneratorSpec
    grid_levels: tuple[int, ...]
    sample_sizes: tuple[int, ...]
    gammas: tuple[float, ...] = (1.0,)
    beta: float | dict | None = None
    replicates: int = 1
    test_size: int = 2000
    jitter: float = 0.0
    seed: int = 0
    output_dir: str = "results"
    c_override: float | None = None
    kkt_tolerance: float = 1e-6

    def beta_for(self, d: int):
        if isinstance(self.beta, dict):
            return self.beta.get(d)
        return self.beta

    def svm_config(self, level: int, gamma: float) -> FunctionalSvmConfig:
        grid = dyadic_grid(level)
        return FunctionalSvmConfig(
            spec=self.generator.spec,
            grid=grid,
            gamma=gamma,
            jitter=self.jitter,
            beta=self.beta_for(len(grid)),
            c_override=self.c_override,
            kkt_tolerance=self.kkt_tolerance,
        )


def _line_of(text: str, key: str):
    needle = f'"{key}"'
    for lineno, line in enumerate(text.splitlines(), start=1):
        if needle in line:
            return lineno
    return None


def parse_config(text: str, path="<config>", seed_override: int | None = None) -> ExperimentConfig:
    """Validate a JSON experiment config; errors point at the offending line."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg}", path, exc.lineno) from None
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object", path, 1)

    def fail(key, message, anchor=None):
        raise ConfigError(f"{key}: {message}", path, _line_of(text, anchor or key.split(".")[-1]))

    for key in doc:
        if key not in _TOP_KEYS:
            fail(key, "unknown field")
    gen = doc.get("generator", {})
    if not isinstance(gen, dict):
        fail("generator", "must be an object")
    for key in gen:
        if key not in _GENERATOR_KEYS:
            fail(f"generator.{key}", "unknown field")

    def number(container, key, qualified, default, *, integer=False, check=None, bound=""):
        value = container.get(key, default)
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
        if integer:
            ok = ok and float(value).is_integer()
        if ok and not math.isfinite(value):
            ok = False
        if not ok or (check is not None and not check(value)):
            fail(qualified, f"{value!r} is invalid; must be {bound}")
        return int(value) if integer else float(value)

    seed = number(doc, "seed", "seed", 0, integer=True, check=lambda v: 0 <= v < 2 ** 64, bound="an integer in [0, 2^64)")
    if seed_override is not None:
        seed = int(seed_override)
    order = number(gen, "order", "generator.order", 1, integer=True, check=lambda v: v in (1, 2), bound="1 or 2")
    anchors = number(gen, "anchor_count", "generator.anchor_count", 7, integer=True, check=lambda v: v >= 1, bound="a positive integer")
    delta = number(gen, "class_separation", "generator.class_separation", 1.0, check=lambda v: v > 0, bound="> 0")
    sigma = number(gen, "noise_scale", "generator.noise_scale", 0.0, check=lambda v: v >= 0, bound=">= 0")
    rho = number(gen, "flip_prob", "generator.flip_prob", 0.0, check=lambda v: 0 <= v < 0.5, bound="in [0, 0.5)")
    gen_seed = number(gen, "seed", "generator.seed", seed, integer=True, check=lambda v: 0 <= v < 2 ** 64, bound="an integer in [0, 2^64)")
    if seed_override is not None:
        gen_seed = seed
    generator = GeneratorSpec(KernelSpec(order), anchors, delta, sigma, rho, gen_seed)

    def int_list(key, check, bound):
        value = doc.get(key)
        if not isinstance(value, list) or not value:
            fail(key, "must be a nonempty list")
        for v in value:
            if isinstance(v, bool) or not isinstance(v, int) or not check(v):
                fail(key, f"entry {v!r} is invalid; must be {bound}")
        return tuple(value)

    levels = int_list("grid_levels", lambda v: 1 <= v <= MAX_DYADIC_LEVEL, f"an integer in [1, {MAX_DYADIC_LEVEL}]")
    sizes = int_list("sample_sizes", lambda v: v >= 2, "an integer >= 2")

    gamma = doc.get("gamma", 1.0)
    gammas = gamma if isinstance(gamma, list) else [gamma]
    if not gammas:
        fail("gamma", "must be a positive number or a nonempty list")
    for g in gammas:
        if isinstance(g, bool) or not isinstance(g, (int, float)) or not (math.isfinite(g) and g > 0):
            fail("gamma", f"{g!r} is invalid; must be > 0")

    beta = doc.get("beta")
    if beta is not None:
        per_d = {}
        if isinstance(beta, dict):
            for key, value in beta.items():
                try:
                    per_d[int(key)] = value
                except ValueError:
                    fail("beta", f"keys must be grid sizes d, got {key!r}")
        else:
            per_d = {2 ** j: beta for j in levels}
        for d, value in per_d.items():
            if isinstance(value, bool) or not isinstance(value, (int, float)) or not (0 < value < 1.0 / d):
                fail("beta", f"{value!r} is invalid for d={d}; must lie in (0, 1/d) = (0, {1.0 / d:g})")
        beta = {int(k): float(v) for k, v in beta.items()} if isinstance(beta, dict) else float(beta)

    replicates = number(doc, "replicates", "replicates", 1, integer=True, check=lambda v: v >= 1, bound=">= 1")
    test_size = number(doc, "test_size", "test_size", 2000, integer=True, check=lambda v: v >= 1, bound=">= 1")
    jitter = number(doc, "jitter", "jitter", 0.0, check=lambda v: v >= 0, bound=">= 0")
    c_override = doc.get("c_override")
    if c_override is not None:
        c_override = number(doc, "c_override", "c_override", None, check=lambda v: v > 0, bound="> 0")
    kkt = number(doc, "kkt_tolerance", "kkt_tolerance", 1e-6, check=lambda v: v > 0, bound="> 0")
    output_dir = doc.get("output_dir", "results")
    if not isinstance(output_dir, str) or not output_dir:
        fail("output_dir", "must be a nonempty string")

    return ExperimentConfig(
        generator=generator,
        grid_levels=levels,
        sample_sizes=sizes,
        gammas=tuple(float(g) for g in gammas),
        beta=beta,
        replicates=replicates,
        test_size=test_size,
        jitter=jitter,
        seed=seed,
        output_dir=output_dir,
        c_override=c_override,
        kkt_tolerance=kkt,
    )


def load_config(path, seed_override: int | None = None) -> ExperimentConfig:
    return parse_config(Path(path).read_text(), str(path), seed_override)


_STREAM_TEST, _STREAM_TRAIN = 1, 2


def stream_seed(base: int, *key: int) -> int:
    """Independent 64-bit seed for a labelled sub-stream of ``base``."""
    state = np.random.SeedSequence([int(base), *map(int, key)]).generate_state(1, dtype=np.uint64)
    return int(state[0])


@dataclass(frozen=True)
class CellResult:
    d: int
    n: int
    gamma: float
    replicate: int
    train_error: float | None
    test_error: float | None
    bayes_error: float
    c_used: float
    converged: bool
    wall_time_ms: float | None = field(default=None, compare=False)

    def csv_row(self, timing: bool) -> str:
        def f(x):
            return "" if x is None else repr(float(x))

        return ",".join(
            [
                str(self.d),
                str(self.n),
                repr(float(self.gamma)),
                str(self.replicate),
                f(self.train_error),
                f(self.test_error),
                repr(float(self.bayes_error)),
                repr(float(self.c_used)),
                "true" if self.converged else "false",
                f"{self.wall_time_ms:.3f}" if timing and self.wall_time_ms is not None else "",
            ]
        )


def run_cell(config: ExperimentConfig, level: int, n: int, gamma: float, replicate: int) -> CellResult:
    start = time.perf_counter()
    gs = config.generator
    svm_config = config.svm_config(level, gamma)
    grid = svm_config.grid
    train = draw_functions(replace(gs, seed=stream_seed(gs.seed, _STREAM_TRAIN, replicate, n)), n)
    test = draw_functions(replace(gs, seed=stream_seed(gs.seed, _STREAM_TEST, replicate)), config.test_size)
    x_train = train.values_on(grid)
    c_used = svm_config.c_for(n)
    bayes = bayes_error(gs)
    try:
        model = fit(x_train, train.labels, svm_config)
    except ConvergenceFailure:
        elapsed = (time.perf_counter() - start) * 1e3
        return CellResult(len(grid), n, gamma, replicate, None, None, bayes, c_used, False, elapsed)
    train_pred, _ = predict_many(model, x_train)
    test_pred, _ = predict_many(model, test.values_on(grid))
    elapsed = (time.perf_counter() - start) * 1e3
    return CellResult(
        len(grid),
        n,
        gamma,
        replicate,
        float(np.mean(train_pred != train.labels)),
        float(np.mean(test_pred != test.labels)),
        bayes,
        c_used,
        True,
        elapsed,
    )


def _run_cell_args(args):
    return run_cell(*args)


def run_consistency(config: ExperimentConfig, jobs: int = 1) -> list[CellResult]:
    """Evaluate every cell; rows come back sorted by (d, n, gamma, replicate)."""
    if jobs < 1:
        raise InvalidParameter(f"jobs must be positive, got {jobs}")
    cells = [
        (config, level, n, gamma, r)
        for level, n, gamma, r in itertools.product(
            config.grid_levels, config.sample_sizes, config.gammas, range(config.replicates)
        )
    ]
    if jobs == 1:
        results = [_run_cell_args(c) for c in cells]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_cell_args, cells))
    return sorted(results, key=lambda r: (r.d, r.n, r.gamma, r.replicate))


def format_results(results: list[CellResult], timing: bool = False) -> str:
    return "\n".join([RESULTS_HEADER, *(r.csv_row(timing) for r in results)]) + "\n"


def summarize(results: list[CellResult]) -> list[dict]:
    """Mean and standard deviation of test error per (d, n, gamma), converged cells only."""
    groups: dict[tuple, list[CellResult]] = {}
    for r in results:
        groups.setdefault((r.d, r.n, r.gamma), []).append(r)
    out = []
    for (d, n, gamma), rows in sorted(groups.items()):
        errs = np.array([r.test_error for r in rows if r.converged], dtype=float)
        out.append(
            {
                "d": d,
                "n": n,
                "gamma": gamma,
                "mean_test_error": float(errs.mean()) if errs.size else float("nan"),
                "std_test_error": float(errs.std(ddof=1)) if errs.size > 1 else 0.0,
                "converged": int(errs.size),
                "cells": len(rows),
                "bayes_error": rows[0].bayes_error,
            }
        )
    return out


def format_summary(summary: list[dict]) -> str:
    lines = [f"{'d':>5} {'n':>6} {'gamma':>8} {'test error':>20} {'bayes':>7} {'ok':>7}"]
    for s in summary:
        lines.append(
            f"{s['d']:>5} {s['n']:>6} {s['gamma']:>8g} "
            f"{s['mean_test_error']:>10.4f} ± {s['std_test_error']:<7.4f} "
            f"{s['bayes_error']:>7.4f} {s['converged']:>3}/{s['cells']:<3}"
        )
    return "\n".join(lines)


def failed_fraction(results: list[CellResult]) -> float:
    if not results:
        return 0.0
    return sum(not r.converged for r in results) / len(results)


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")


def _nice_step(span: float) -> float:
    raw = span / 5.0
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if mult * mag >= raw:
            return mult * mag
    return 10.0 * mag


def render_svg(summary: list[dict], width: int = 640, height: int = 420) -> str:
    """Mean test error against n (log axis), one polyline per (d, gamma), Bayes error dashed."""
    left, right, top, bottom = 70, 150, 30, 55
    plot_w, plot_h = width - left - right, height - top - bottom
    ns = sorted({s["n"] for s in summary})
    lo_dec = math.floor(math.log10(ns[0]))
    hi_dec = math.ceil(math.log10(ns[-1]))
    if hi_dec == lo_dec:
        hi_dec += 1
    means = [s["mean_test_error"] for s in summary if math.isfinite(s["mean_test_error"])]
    bayes = summary[0]["bayes_error"]
    y_top = max(means + [bayes, 1e-3]) * 1.15
    step = _nice_step(y_top)
    y_top = step * math.ceil(y_top / step)

    def px(n):
        return left + plot_w * (math.log10(n) - lo_dec) / (hi_dec - lo_dec)

    def py(e):
        return top + plot_h * (1.0 - e / y_top)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{left}" y1="{top + plot_h}" x2="{left + plot_w}" y2="{top + plot_h}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + plot_h}" stroke="black"/>',
    ]
    for dec in range(lo_dec, hi_dec + 1):
        x = px(10.0 ** dec)
        out.append(f'<line x1="{x:.2f}" y1="{top + plot_h}" x2="{x:.2f}" y2="{top + plot_h + 5}" stroke="black"/>')
        out.append(f'<text x="{x:.2f}" y="{top + plot_h + 18}" text-anchor="middle">10<tspan dy="-5" font-size="9">{dec}</tspan></text>')
    ticks = int(round(y_top / step))
    for k in range(ticks + 1):
        e = k * step
        y = py(e)
        out.append(f'<line x1="{left - 5}" y1="{y:.2f}" x2="{left}" y2="{y:.2f}" stroke="black"/>')
        out.append(f'<text x="{left - 8}" y="{y + 4:.2f}" text-anchor="end">{e:g}</text>')
    out.append(f'<text x="{left + plot_w / 2:.2f}" y="{height - 12}" text-anchor="middle">training sample size n</text>')
    out.append(
        f'<text x="18" y="{top + plot_h / 2:.2f}" text-anchor="middle" '
        f'transform="rotate(-90 18 {top + plot_h / 2:.2f})">mean test error</text>'
    )
    yb = py(bayes)
    out.append(
        f'<line x1="{left}" y1="{yb:.2f}" x2="{left + plot_w}" y2="{yb:.2f}" '
        f'stroke="gray" stroke-dasharray="6,4"/>'
    )

    series: dict[tuple, list[dict]] = {}
    for s in summary:
        series.setdefault((s["d"], s["gamma"]), []).append(s)
    multi_gamma = len({g for _, g in series}) > 1
    legend_x = left + plot_w + 15
    for idx, ((d, gamma), rows) in enumerate(sorted(series.items())):
        colour = _PALETTE[idx % len(_PALETTE)]
        pts = [(px(r["n"]), py(r["mean_test_error"])) for r in sorted(rows, key=lambda r: r["n"]) if math.isfinite(r["mean_test_error"])]
        if pts:
            coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in pts)
            out.append(f'<polyline points="{coords}" fill="none" stroke="{colour}" stroke-width="2"/>')
            for x, y in pts:
                out.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3" fill="{colour}"/>')
        label = f"d={d}" + (f", gamma={gamma:g}" if multi_gamma else "")
        ly = top + 10 + 18 * idx
        out.append(f'<line x1="{legend_x}" y1="{ly}" x2="{legend_x + 20}" y2="{ly}" stroke="{colour}" stroke-width="2"/>')
        out.append(f'<text x="{legend_x + 26}" y="{ly + 4}">{label}</text>')
    ly = top + 10 + 18 * len(series)
    out.append(f'<line x1="{legend_x}" y1="{ly}" x2="{legend_x + 20}" y2="{ly}" stroke="gray" stroke-dasharray="6,4"/>')
    out.append(f'<text x="{legend_x + 26}" y="{ly + 4}">Bayes error</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
