"""Command-line entry point: ``splinesvm {generate,fit,predict,consistency}``.

Exit codes: 0 success, 2 config/validation, 3 I/O, 4 numerical (Gram or
grid), 5 optimization.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import io
from .datagen import draw_functions, dyadic_grid
from .errors import (
    ConvergenceFailure,
    DegenerateLabels,
    DimensionError,
    GridMismatch,
    IllConditionedGram,
    InvalidKernelMatrix,
    InvalidParameter,
)
from .experiment import (
    MAX_FAILED_FRACTION,
    ExperimentConfig,
    failed_fraction,
    format_results,
    format_summary,
    load_config,
    render_svg,
    run_consistency,
    summarize,
)
from .functional import fit, predict_many

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_NUMERIC, EXIT_OPTIM = 0, 2, 3, 4, 5


def _fit_config(config: ExperimentConfig):
    return config.svm_config(config.grid_levels[0], config.gammas[0])


def cmd_generate(args) -> int:
    config = load_config(args.config, args.seed)
    grid = dyadic_grid(config.grid_levels[0])
    batch = draw_functions(config.generator, config.sample_sizes[0])
    io.write_data(args.out, grid, batch.values_on(grid), batch.labels)
    return EXIT_OK


def cmd_fit(args) -> int:
    config = load_config(args.config, args.seed)
    grid, values, labels = io.read_data(args.data)
    svm_config = _fit_config(config)
    if grid != svm_config.grid:
        raise GridMismatch(
            f"data grid ({len(grid)} points) differs from the configured grid "
            f"({len(svm_config.grid)} points, level {config.grid_levels[0]})"
        )
    model = fit(values, labels, svm_config)
    pred, _ = predict_many(model, values)
    io.save_model(args.model, model)
    report = {
        "train_error": float(np.mean(pred != labels)),
        "C_used": model.c_used,
        "n_support": model.core.n_support,
        "bias": model.core.bias,
    }
    print(json.dumps(report))
    return EXIT_OK


def cmd_predict(args) -> int:
    model = io.load_model(args.model)
    grid, values, labels = io.read_data(args.data)
    if grid != model.config.grid:
        raise GridMismatch("data grid differs from the model grid")
    pred, scores = predict_many(model, values)
    body = "predicted_label,score\n" + "".join(
        f"{'+1' if p > 0 else '-1'},{float(s)!r}\n" for p, s in zip(pred, scores)
    )
    error_rate = float(np.mean(pred != labels))
    summary = json.dumps({"n": int(labels.size), "error_rate": error_rate})
    if args.out:
        Path(args.out).write_text(body)
        print(summary)
    else:
        sys.stdout.write(body)
        print(summary, file=sys.stderr)
    return EXIT_OK


def cmd_consistency(args) -> int:
    config = load_config(args.config, args.seed)
    out_dir = Path(args.out or config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    results = run_consistency(config, jobs=args.jobs)
    summary = summarize(results)
    (out_dir / "results.csv").write_text(format_results(results, timing=args.timing))
    (out_dir / "plot.svg").write_text(render_svg(summary))
    print(format_summary(summary))
    print(f"{len(results)} cells in {time.perf_counter() - start:.1f} s -> {out_dir}")
    failed = failed_fraction(results)
    if failed > MAX_FAILED_FRACTION:
        print(f"error: {failed:.0%} of cells failed to converge", file=sys.stderr)
        return EXIT_OPTIM
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="splinesvm",
        description="Functional SVM on L-spline derivatives of discretized curves.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic data CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("fit", help="train a model and save it as JSON")
    p.add_argument("--data", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="score a data CSV with a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("consistency", help="run the (n, d) consistency sweep")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="output directory (overrides output_dir)")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--seed", type=int)
    p.add_argument("--timing", action="store_true", help="fill the wall_time_ms column")
    p.set_defaults(func=cmd_consistency)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except IllConditionedGram as exc:
        hint = f" (suggested jitter: {exc.suggested_jitter:g})" if exc.suggested_jitter else ""
        print(f"error: {exc}{hint}", file=sys.stderr)
        return EXIT_NUMERIC
    except (GridMismatch, DimensionError, InvalidKernelMatrix) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConvergenceFailure, DegenerateLabels) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OPTIM
    except InvalidParameter as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
