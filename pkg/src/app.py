# src/app.py
"""pvff command line: python -m src.app <command> [options]"""
from __future__ import annotations

import argparse
import io
import sys
from dataclasses import replace
from typing import Any, Dict, Optional, Sequence, Tuple

import pandas as pd

from src.config import N_JOBS, PipelineSettings, load_config_file, route_overrides
from src.errors import DataError, PvffError
from src.evaluation.metrics import render_csv, render_text
from src.forest.ensemble import ForestParams
from src.models.store import load_model, save_model
from src.schema import BAND_COLUMNS, PREDICTION_COLUMNS
from src.synth.generator import PRESETS, SynthConfig, emit_csv, generate, with_preset
from src.utils.log import configure_logging
from src import workflows

PIPELINE_FLAGS = {
    "wavelet": "wavelet", "levels": "levels", "boundary": "boundary", "window_len": "window_len",
    "max_gap": "max_gap", "daylight_threshold": "daylight_threshold", "variance_target": "variance_target",
}
FOREST_FLAGS = {
    "trees": "n_trees", "max_depth": "max_depth", "min_samples_leaf": "min_samples_leaf",
    "mtry": "mtry", "bootstrap_size": "bootstrap_size",
}


# ---------------------------
# Settings assembly
# ---------------------------

def _flag_values(args: argparse.Namespace, mapping: Dict[str, str]) -> Dict[str, Any]:
    return {field: getattr(args, flag) for flag, field in mapping.items()
            if getattr(args, flag, None) is not None}


def resolve_settings(args: argparse.Namespace) -> Tuple[PipelineSettings, ForestParams, Dict[str, Any]]:
    """Env defaults, then the --config file, then explicit flags."""
    pipe_file, forest_file, synth_file = route_overrides(load_config_file(args.config),
                                                         PipelineSettings, ForestParams, SynthConfig)
    pipe = {**pipe_file, **_flag_values(args, PIPELINE_FLAGS)}
    forest = {**forest_file, **_flag_values(args, FOREST_FLAGS)}
    synth = dict(synth_file)
    if getattr(args, "no_replacement", False):
        forest["bootstrap"] = False
    if args.seed is not None:
        forest["seed"] = synth["seed"] = args.seed
    if "stats" in pipe:
        pipe["stats"] = tuple(pipe["stats"])
    return PipelineSettings(**pipe), ForestParams(**forest), synth


def _pipeline_overrides_given(args: argparse.Namespace) -> bool:
    if _flag_values(args, PIPELINE_FLAGS):
        return True
    pipe_file, _, _ = route_overrides(load_config_file(args.config), PipelineSettings, ForestParams, SynthConfig)
    return bool(pipe_file)


def _write(text: str, path: Optional[str]) -> None:
    if not path or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _frame_text(df: pd.DataFrame, float_format: Optional[str] = None) -> str:
    buf = io.StringIO()
    df.to_csv(buf, index=False, float_format=float_format, lineterminator="\n")
    return buf.getvalue()


# ---------------------------
# Commands
# ---------------------------

def cmd_synth(args: argparse.Namespace) -> int:
    _, _, synth = resolve_settings(args)
    synth["days_per_class"] = args.days
    if args.panels is not None:
        synth["panels_per_class"] = args.panels
    # preset first so explicit config values win
    config = replace(with_preset(SynthConfig(), args.overlap), **synth)
    emit_csv(generate(config), args.out)
    return 0


def cmd_decompose(args: argparse.Namespace) -> int:
    settings, _, _ = resolve_settings(args)
    windows = workflows.load_windows(args.input, settings)
    if args.sample:
        windows = [w for w in windows if w.sample_id == args.sample]
    if not windows:
        raise DataError(f"no usable day window{' ' + args.sample if args.sample else ''} in {args.input}")
    decomp = workflows.decompose_window(windows[0], settings)
    records = [(band, i, float(v)) for band, coeffs in decomp.bands() for i, v in enumerate(coeffs)]
    _write(_frame_text(pd.DataFrame.from_records(records, columns=BAND_COLUMNS), "%.17g"), args.out)
    return 0


def cmd_features(args: argparse.Namespace) -> int:
    settings, _, _ = resolve_settings(args)
    matrix = workflows.featurize(workflows.load_windows(args.input, settings), settings, args.n_jobs)
    buf = io.StringIO()
    matrix.to_csv(buf)
    _write(buf.getvalue(), args.out)
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    settings, params, _ = resolve_settings(args)
    timings: Dict[str, float] = {}
    matrix = workflows.featurize(workflows.load_windows(args.input, settings, timings),
                                 settings, args.n_jobs, timings)
    result = workflows.train(matrix, settings, params, holdout=args.holdout, baseline=args.baseline,
                             n_jobs=args.n_jobs, timings=timings)
    save_model(result.document, args.model_out)
    if result.report is not None:
        reports = {"forest": result.report}
        if result.baseline is not None:
            reports["single_tree"] = result.baseline
        if args.format == "csv":
            _write(render_csv(reports), None)
        else:
            text = render_text(result.report)
            if result.baseline is not None:
                text += "\n" + render_text(result.baseline, title="Single decision tree")
            text += "\ntimings: " + ", ".join(f"{k} {v:.2f}s" for k, v in timings.items()) + "\n"
            _write(text, None)
    return 0


def cmd_predict(args: argparse.Namespace) -> int:
    doc = load_model(args.model)
    data_settings = resolve_settings(args)[0] if _pipeline_overrides_given(args) else None
    matrix = workflows.prepare_for_model(args.input, doc, data_settings, args.n_jobs)
    predicted, votes = workflows.predict_rows(doc, matrix)
    out = pd.DataFrame({
        "sample_id": list(matrix.sample_ids),
        "predicted_class": predicted,
        "votes_0": votes[:, 0],
        "votes_1": votes[:, 1],
    }, columns=PREDICTION_COLUMNS)
    _write(_frame_text(out), args.out)
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    doc = load_model(args.model)
    data_settings = resolve_settings(args)[0] if _pipeline_overrides_given(args) else None
    matrix = workflows.prepare_for_model(args.input, doc, data_settings, args.n_jobs)
    report = workflows.evaluate_model(doc, matrix)
    if args.format == "csv":
        _write(render_csv({"forest": report}), args.out)
    else:
        _write(render_text(report), args.out)
    return 0


# ---------------------------
# Parser
# ---------------------------

def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, help="master seed for every random stream")
    p.add_argument("--config", help="JSON file of setting overrides")
    p.add_argument("--format", choices=("text", "csv"), default="text", help="report format")
    p.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING, ...")
    p.add_argument("--n-jobs", type=int, default=N_JOBS, help="parallel workers")
    return p


def _pipeline() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--wavelet", choices=("haar", "db2", "db4"))
    p.add_argument("--levels", type=int)
    p.add_argument("--boundary", choices=("symmetric", "periodic"))
    p.add_argument("--window-len", type=int)
    p.add_argument("--max-gap", type=int)
    p.add_argument("--daylight-threshold", type=float, help="trim night samples below this current (A)")
    p.add_argument("--variance-target", type=float, help="PCA retained-variance fraction")
    return p


def _forest() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--trees", type=int)
    p.add_argument("--max-depth", type=int)
    p.add_argument("--min-samples-leaf", type=int)
    p.add_argument("--mtry", type=int)
    p.add_argument("--bootstrap-size", type=int)
    p.add_argument("--no-replacement", action="store_true", help="draw each tree's rows without replacement")
    return p


def _fraction(raw: str) -> float:
    value = float(raw)
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"must be in (0, 1), got {raw}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common, pipeline, forest = _common(), _pipeline(), _forest()
    parser = argparse.ArgumentParser(prog="pvff", description="PV snail-trail fault classification toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", parents=[common], help="generate labeled synthetic telemetry")
    p.add_argument("--days", type=int, required=True, help="days per class")
    p.add_argument("--out", required=True)
    p.add_argument("--overlap", choices=sorted(PRESETS), default="paper")
    p.add_argument("--panels", type=int, help="panels per class")
    p.set_defaults(handler=cmd_synth)

    p = sub.add_parser("decompose", parents=[common, pipeline], help="wavelet bands of one day window")
    p.add_argument("--input", required=True)
    p.add_argument("--sample", help="panel_id@YYYY-MM-DD; default is the first window")
    p.add_argument("--out", default="-")
    p.set_defaults(handler=cmd_decompose)

    p = sub.add_parser("features", parents=[common, pipeline], help="feature matrix as CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--out", default="-")
    p.set_defaults(handler=cmd_features)

    p = sub.add_parser("train", parents=[common, pipeline, forest], help="fit PCA + random forest")
    p.add_argument("--input", required=True)
    p.add_argument("--model-out", required=True)
    p.add_argument("--holdout", type=_fraction, help="stratified test fraction to report on")
    p.add_argument("--baseline", action="store_true", help="also report a single decision tree")
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser("predict", parents=[common, pipeline], help="classify day windows")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--out", default="-")
    p.set_defaults(handler=cmd_predict)

    p = sub.add_parser("evaluate", parents=[common, pipeline], help="score a model on labeled data")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--out", default="-")
    p.set_defaults(handler=cmd_evaluate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        configure_logging(args.log_level)
        return args.handler(args)
    except PvffError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return exc.exit_code
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
