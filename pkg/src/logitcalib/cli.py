"""Command-line interface.

Subcommands: fit, calibrate, predict, evaluate, synth. Exit codes: 0 on
success, 1 on usage errors, 2 on data or validation errors. Verbosity
comes from the LOGITCALIB_LOG environment variable (error, info, or
debug; default error). All outputs are deterministic: rerunning a
command on the same inputs writes byte-identical files.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from .calibration import (
    load_temperature,
    fit_temperature,
    reliability_arrays,
    save_temperature,
    write_reliability_csv,
)
from .dataset import SPLITS, SplitDataset, load_dataset, save_dataset
from .density import ClassConditionalModel, fit_class_conditional, load_model, save_model
from .errors import LogitCalibError, DataError
from .inference import (
    map_batch,
    ml_batch,
    predict_batch,
    softmax_batch,
    softmax_tempered_batch,
)
from .metrics import _report_from_arrays, confusion, format_pct, report_to_dict
from .synth import default_spec, generate, load_spec, save_spec, with_seed
from . import jsonio, svg

_log = logging.getLogger("logitcalib")

# CLI layer keys to the layer names recorded in outputs
LAYER_KEYS = {"softmax": "softmax", "ts": "softmax_T", "ml": "ml", "map": "map"}


class _UsageError(Exception):
    """Bad flags or flag combinations; exits with code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # noqa: A003 - argparse API
        self.print_usage(sys.stderr)
        raise _UsageError(message)


def _configure_logging() -> None:
    name = os.environ.get("LOGITCALIB_LOG", "error").strip().lower() or "error"
    levels = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    if name not in levels:
        print(
            f"warning: unknown LOGITCALIB_LOG value {name!r}; using 'error'",
            file=sys.stderr,
        )
        name = "error"
    if not _log.handlers:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
        _log.addHandler(handler)
    _log.setLevel(levels[name])


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="logitcalib", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_fit = sub.add_parser("fit", help="fit the class-conditional model on the train split")
    p_fit.add_argument("--data", required=True, help="dataset path (.jsonl or .csv)")
    p_fit.add_argument("--out", required=True, help="output directory")
    p_fit.add_argument("--bins", type=int, default=25, help="histogram bins (default 25)")
    p_fit.add_argument(
        "--alpha", type=float, default=0.01, help="additive smoothing (default 0.01)"
    )
    p_fit.set_defaults(func=cmd_fit)

    p_cal = sub.add_parser(
        "calibrate", help="fit a softmax temperature on the validation split"
    )
    p_cal.add_argument("--data", required=True)
    p_cal.add_argument("--out", required=True)
    p_cal.set_defaults(func=cmd_calibrate)

    p_pred = sub.add_parser("predict", help="write per-record posteriors as JSONL")
    p_pred.add_argument("--data", required=True)
    p_pred.add_argument("--out", required=True)
    p_pred.add_argument(
        "--layer", required=True, choices=sorted(LAYER_KEYS), help="prediction layer"
    )
    p_pred.add_argument("--split", default="test", choices=SPLITS)
    p_pred.add_argument("--model", help="model.json from 'fit' (required for ml/map)")
    p_pred.add_argument(
        "--temp-file", help="temperature.json from 'calibrate' (required for ts)"
    )
    p_pred.add_argument(
        "--likelihood",
        default="product",
        choices=("product", "own-dimension"),
        help="use the full product of per-dimension likelihoods or only the "
        "class's own dimension",
    )
    p_pred.set_defaults(func=cmd_predict)

    p_eval = sub.add_parser(
        "evaluate", help="score one or more layers on a labeled split"
    )
    p_eval.add_argument("--data", required=True)
    p_eval.add_argument("--out", required=True)
    p_eval.add_argument(
        "--layer",
        default="softmax",
        help="comma-separated layers from {softmax,ts,ml,map}",
    )
    p_eval.add_argument("--split", default="test", choices=("train", "validation", "test"))
    p_eval.add_argument("--model")
    p_eval.add_argument("--temp-file")
    p_eval.add_argument(
        "--likelihood", default="product", choices=("product", "own-dimension")
    )
    p_eval.add_argument(
        "--reliability-bins", type=int, default=10, help="confidence bins (default 10)"
    )
    p_eval.add_argument(
        "--score-bins", type=int, default=20, help="score-histogram bins (default 20)"
    )
    p_eval.set_defaults(func=cmd_evaluate)

    p_synth = sub.add_parser("synth", help="generate a synthetic dataset")
    p_synth.add_argument("--out", required=True)
    p_synth.add_argument("--spec", help="synth spec JSON (default: built-in 3-class spec)")
    p_synth.add_argument("--seed", type=int, help="override the spec seed")
    p_synth.set_defaults(func=cmd_synth)

    return parser


def _ensure_out(args) -> str:
    os.makedirs(args.out, exist_ok=True)
    return args.out


def _check_model_matches(model: ClassConditionalModel, data: SplitDataset) -> None:
    if model.registry.names != data.registry.names:
        raise DataError(
            f"model classes {list(model.registry.names)!r} do not match "
            f"dataset classes {list(data.registry.names)!r}"
        )


def _layer_probs(
    key: str,
    z: np.ndarray,
    model: ClassConditionalModel | None,
    temperature: float | None,
    mode: str,
) -> np.ndarray:
    if key == "softmax":
        return softmax_batch(z)[0]
    if key == "ts":
        return softmax_tempered_batch(z, temperature)[0]
    if key == "ml":
        return ml_batch(model, z, mode)[0]
    return map_batch(model, z, mode)[0]


def _load_layer_inputs(args, keys, data):
    """Load the model and temperature required by the requested layers."""
    model = None
    temperature = None
    if any(k in ("ml", "map") for k in keys):
        if not args.model:
            raise _UsageError("--model is required for the ml and map layers")
        model = load_model(args.model)
        _check_model_matches(model, data)
    if "ts" in keys:
        if not args.temp_file:
            raise _UsageError("--temp-file is required for the ts layer")
        temperature = load_temperature(args.temp_file).T
    return model, temperature


def cmd_fit(args) -> int:
    data = load_dataset(args.data)
    _log.info("loaded %d records from %s", len(data.records), args.data)
    model = fit_class_conditional(data, bins=args.bins, alpha=args.alpha)
    out = _ensure_out(args)
    path = os.path.join(out, "model.json")
    save_model(model, path)
    for name, count in zip(data.registry.names, data.class_counts("train")):
        print(f"{name}: {count} training records")
    print(f"model written to {path}")
    return 0


def cmd_calibrate(args) -> int:
    data = load_dataset(args.data)
    val = data.split("validation")
    if not val:
        raise DataError("the validation split is empty; cannot fit a temperature")
    param = fit_temperature(val)
    out = _ensure_out(args)
    path = os.path.join(out, "temperature.json")
    save_temperature(param, path)
    print(f"T = {param.T:.4f} (validation NLL {param.nll:.6f}), written to {path}")
    return 0


def cmd_predict(args) -> int:
    data = load_dataset(args.data)
    keys = [args.layer]
    model, temperature = _load_layer_inputs(args, keys, data)
    z = data.logit_matrix(args.split)
    probs = _layer_probs(args.layer, z, model, temperature, args.likelihood)
    idx, conf = predict_batch(probs)
    layer_name = LAYER_KEYS[args.layer]
    out = _ensure_out(args)
    path = os.path.join(out, f"predictions_{args.layer}_{args.split}.jsonl")
    names = data.registry.names
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for i in range(probs.shape[0]):
            row = ", ".join(jsonio.format_float9(p) for p in probs[i])
            fh.write(
                '{"probs": [%s], "argmax": "%s", "confidence": %s, "layer": "%s"}\n'
                % (row, names[int(idx[i])], jsonio.format_float9(conf[i]), layer_name)
            )
    print(f"wrote {probs.shape[0]} predictions to {path}")
    return 0


def _write_score_hist(conf: np.ndarray, bins: int, path_csv, path_svg, title: str) -> None:
    counts, edges = np.histogram(conf, bins=bins, range=(0.0, 1.0))
    lines = ["bin_lo,bin_hi,count"]
    for b in range(bins):
        lines.append(
            ",".join(
                (
                    jsonio.format_float(edges[b]),
                    jsonio.format_float(edges[b + 1]),
                    str(int(counts[b])),
                )
            )
        )
    with open(path_csv, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")
    with open(path_svg, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(svg.score_histogram_svg(counts, edges, title))


def cmd_evaluate(args) -> int:
    keys = [s.strip() for s in args.layer.split(",") if s.strip()]
    if not keys:
        raise _UsageError("--layer needs at least one layer")
    for key in keys:
        if key not in LAYER_KEYS:
            raise _UsageError(
                f"unknown layer {key!r}; expected a comma-separated subset of "
                f"{sorted(LAYER_KEYS)}"
            )
    if len(set(keys)) != len(keys):
        raise _UsageError("duplicate layers in --layer")
    if args.reliability_bins < 1 or args.score_bins < 1:
        raise _UsageError("bin counts must be positive")
    data = load_dataset(args.data)
    model, temperature = _load_layer_inputs(args, keys, data)
    z = data.logit_matrix(args.split)
    if z.shape[0] == 0:
        raise DataError(f"split {args.split!r} is empty; nothing to evaluate")
    labels = data.labels(args.split)
    z_unseen = data.logit_matrix("unseen")
    out = _ensure_out(args)
    table: dict[str, dict[str, str]] = {}
    for key in keys:
        layer_name = LAYER_KEYS[key]
        probs = _layer_probs(key, z, model, temperature, args.likelihood)
        idx, conf = predict_batch(probs)
        unseen_conf = None
        if z_unseen.shape[0]:
            u_probs = _layer_probs(key, z_unseen, model, temperature, args.likelihood)
            unseen_conf = predict_batch(u_probs)[1]
        m = confusion(idx, labels, k=data.k)
        report = _report_from_arrays(
            layer_name, m, idx, labels, conf, unseen_confidences=unseen_conf
        )
        jsonio.dump(
            report_to_dict(report, data.registry.names),
            os.path.join(out, f"report_{key}.json"),
        )
        diagram = reliability_arrays(conf, (idx == labels).astype(np.float64),
                                     bins=args.reliability_bins)
        write_reliability_csv(diagram, os.path.join(out, f"reliability_{key}.csv"))
        jsonio.dump(
            {
                "bins": args.reliability_bins,
                "count": int(diagram.total),
                "ece": diagram.ece,
                "layer": layer_name,
                "split": args.split,
                "temperature": temperature if key == "ts" else None,
            },
            os.path.join(out, f"reliability_{key}.meta.json"),
        )
        with open(
            os.path.join(out, f"reliability_{key}.svg"), "w", encoding="utf-8", newline="\n"
        ) as fh:
            fh.write(svg.reliability_svg(diagram, f"reliability: {layer_name} on {args.split}"))
        _write_score_hist(
            conf,
            args.score_bins,
            os.path.join(out, f"scorehist_{key}.csv"),
            os.path.join(out, f"scorehist_{key}.svg"),
            f"confidence scores: {layer_name} on {args.split}",
        )
        if unseen_conf is not None:
            _write_score_hist(
                unseen_conf,
                args.score_bins,
                os.path.join(out, f"scorehist_unseen_{key}.csv"),
                os.path.join(out, f"scorehist_unseen_{key}.svg"),
                f"confidence scores: {layer_name} on unseen",
            )
        table[key] = {
            "f_score_avg_pct": format_pct(report.f_score_avg),
            "fpr_avg_pct": format_pct(report.fpr_avg),
            "unseen_mean_score": (
                "" if report.unseen_mean_score is None
                else format(report.unseen_mean_score, ".3f")
            ),
            "unseen_var_score": (
                "" if report.unseen_var_score is None
                else format(report.unseen_var_score, ".3f")
            ),
            "ece": format(diagram.ece, ".4f"),
        }
        print(
            f"{key}: f_score_avg {table[key]['f_score_avg_pct']}%, "
            f"fpr_avg {table[key]['fpr_avg_pct']}%, ece {table[key]['ece']}"
            + (
                f", unseen mean {table[key]['unseen_mean_score']}"
                if table[key]["unseen_mean_score"]
                else ""
            )
        )
    rows = ["metric," + ",".join(keys)]
    for metric in ("f_score_avg_pct", "fpr_avg_pct", "ece", "unseen_mean_score",
                   "unseen_var_score"):
        rows.append(metric + "," + ",".join(table[k][metric] for k in keys))
    with open(os.path.join(out, "table.csv"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(rows))
        fh.write("\n")
    return 0


def cmd_synth(args) -> int:
    spec = load_spec(args.spec) if args.spec else default_spec()
    if args.seed is not None:
        spec = with_seed(spec, args.seed)
    data = generate(spec)
    out = _ensure_out(args)
    path = os.path.join(out, "dataset.jsonl")
    save_dataset(data, path)
    save_spec(spec, os.path.join(out, "spec_used.json"))
    counts = data.counts()
    print(
        "generated "
        + ", ".join(f"{counts[s]} {s}" for s in ("train", "validation", "test", "unseen"))
        + f" records at {path}"
    )
    return 0


def main(argv=None) -> int:
    _configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except LogitCalibError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    raise SystemExit(main(sys.argv[1:]))
