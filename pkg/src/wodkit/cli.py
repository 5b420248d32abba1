"""wodkit command line.

Exit codes: 0 ok, 1 config error, 2 data error, 3 numeric failure.
"""
import argparse
import csv
import io
import sys
import time

import numpy as np

from . import data as dm
from . import evaluation, pipeline, streaming, synth
from .config import load_config, parse_override
from .errors import ConfigError, DataError, NumericError, WodError
from .jsonio import canonical_dumps, write_atomic


class _Timer:
    def __init__(self, enabled):
        self.enabled = enabled
        self.stages = {}

    def __call__(self, name):
        timer = self

        class _Stage:
            def __enter__(self):
                self.t0 = time.perf_counter()

            def __exit__(self, *exc):
                timer.stages[name] = time.perf_counter() - self.t0

        return _Stage()


def _config(args):
    cfg = load_config(args.config)
    overrides = dict(parse_override(s) for s in args.set or [])
    return cfg.replace(overrides) if overrides else cfg


def _load(args, path=None):
    return dm.load_csv(
        path or args.input,
        has_header=not args.no_header,
        label_column=args.label_column,
        id_column=args.id_column,
        weight_column=getattr(args, "weights_column", None),
    )


def _check_weight_column(args, cfg):
    if getattr(args, "weights_column", None) and cfg["weighting.scheme"] != "uniform":
        raise ConfigError("--weights-column and weighting.scheme "
                          f"{cfg['weighting.scheme']!r} are mutually exclusive; set weighting.scheme=uniform")
    return bool(getattr(args, "weights_column", None))


def _dataset_summary(ds):
    out = {"n": ds.n, "d": ds.d, "features": list(ds.feature_names)}
    if ds.labels is not None:
        out["labels"] = {"outliers": int(ds.labels.sum()), "inliers": int((~ds.labels).sum())}
    return out


def _scores_csv(batch):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["row_id", "score", "flag"])
    scores = batch.full_scores()
    flags = batch.full_flags()
    for i, rid in enumerate(batch.dataset.row_ids):
        if np.isnan(scores[i]):
            w.writerow([rid, "", ""])
        else:
            w.writerow([rid, repr(float(scores[i])), int(flags[i])])
    return buf.getvalue()


def _report(cfg, fitted, batch, top, timer):
    res = batch.result
    ids = [batch.dataset.row_ids[i] for i in batch.kept]
    order = np.argsort(-res.scores, kind="stable")[:top]
    rep = {
        "config": cfg.to_dict(),
        "dataset": {**_dataset_summary(batch.dataset), "n_scored": int(batch.kept.size)},
        "detection": {
            "threshold": res.threshold,
            "policy": res.meta.get("policy"),
            "method": res.meta.get("method"),
            "n_flagged": res.n_flagged,
            "top": [{"row_id": ids[i], "score": float(res.scores[i]), "flag": bool(res.flags[i])} for i in order],
        },
        "model": {
            "k": fitted.model.k,
            "iterations": fitted.model.iterations,
            "converged": fitted.model.converged,
            "n_train": fitted.n_train,
        },
    }
    labels = batch.labels()
    if labels is not None:
        rep["metrics"] = evaluation.confusion(res.flags, labels, res.scores).to_dict()
    if timer.enabled:
        rep["timing_seconds"] = timer.stages
    return rep


def _emit_batch(args, cfg, fitted, batch, timer):
    outputs = []
    if args.output:
        outputs.append((args.output, _scores_csv(batch)))
    if args.report:
        outputs.append((args.report, canonical_dumps(_report(cfg, fitted, batch, args.top, timer)) + "\n"))
    if not outputs:
        sys.stdout.write(_scores_csv(batch))
    for path, text in outputs:
        write_atomic(path, text)


def cmd_detect(args):
    cfg = _config(args)
    use_col = _check_weight_column(args, cfg)
    timer = _Timer(args.timing)
    with timer("load"):
        ds = _load(args)
    with timer("fit"):
        fitted = pipeline.fit(ds, cfg, use_col, args.force)
    with timer("score"):
        batch = pipeline.score(fitted, ds)
    _emit_batch(args, cfg, fitted, batch, timer)


def cmd_fit(args):
    cfg = _config(args)
    use_col = _check_weight_column(args, cfg)
    fitted = pipeline.fit(_load(args), cfg, use_col, args.force)
    write_atomic(args.model, fitted.dumps() + "\n")


def cmd_score(args):
    try:
        with open(args.model, encoding="utf-8") as fh:
            fitted = pipeline.FittedPipeline.loads(fh.read())
    except OSError as exc:
        raise DataError(f"cannot read model {args.model}: {exc}") from None
    weight_col = args.weights_column if fitted.weight_source == "column" else None
    if fitted.weight_source == "column" and not weight_col:
        raise ConfigError("model was fitted with a weights column; pass --weights-column")
    ds = dm.load_csv(args.input, has_header=not args.no_header, label_column=args.label_column,
                     id_column=args.id_column, weight_column=weight_col)
    timer = _Timer(args.timing)
    with timer("score"):
        batch = pipeline.score(fitted, ds)
    _emit_batch(args, fitted.config, fitted, batch, timer)


def cmd_eval(args):
    cfg = _config(args)
    use_col = _check_weight_column(args, cfg)
    ds = _load(args)
    cv = evaluation.cross_validate(ds, cfg, args.folds, None, use_col, args.force)
    rep = {"config": cfg.to_dict(), "dataset": _dataset_summary(ds), **cv}
    text = canonical_dumps(rep) + "\n"
    if args.report:
        write_atomic(args.report, text)
    else:
        sys.stdout.write(text)


def cmd_tune(args):
    cfg = _config(args)
    use_col = _check_weight_column(args, cfg)
    ds = _load(args)
    grid = evaluation.GridSpec.from_config(cfg)
    best_cfg, table, best = evaluation.grid_search(ds, cfg, grid, use_col, args.force)
    rep = {
        "config": cfg.to_dict(),
        "dataset": _dataset_summary(ds),
        "grid": {"params": grid.params, "metric": grid.metric, "folds": grid.folds,
                 "random_samples": grid.random_samples},
        "table": table,
        "best": {"index": best["index"], "params": best["params"], "mean": best["mean"], "std": best["std"]},
        "best_config": best_cfg.to_dict(),
    }
    outputs = []
    text = canonical_dumps(rep) + "\n"
    if args.report:
        outputs.append((args.report, text))
    else:
        sys.stdout.write(text)
    if args.table:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        names = list(grid.params)
        w.writerow(["index", *names, grid.metric + "_mean", grid.metric + "_std"])
        for row in table:
            cells = [canonical_dumps(row["params"][k]) for k in names]
            fmt = [("" if row[c] is None else repr(row[c])) for c in ("mean", "std")]
            w.writerow([row["index"], *cells, *fmt])
        outputs.append((args.table, buf.getvalue()))
    for path, body in outputs:
        write_atomic(path, body)


def cmd_stream(args):
    overrides = {}
    if args.capacity is not None:
        overrides["stream.capacity"] = args.capacity
    if args.mode is not None:
        overrides["stream.mode"] = args.mode
    if args.stride is not None:
        overrides["stream.stride"] = args.stride
    cfg = _config(args)
    cfg = cfg.replace(overrides) if overrides else cfg
    scfg = streaming.StreamConfig.from_pipeline(cfg)
    src = sys.stdin if args.input in (None, "-") else open(args.input, newline="", encoding="utf-8")
    out = sys.stdout
    try:
        reader = csv.reader(src)
        header = None
        if not args.no_header:
            header = next(reader, None)
            if header is None:
                return
        det = None
        line = 1 if args.no_header else 2
        for row in reader:
            if not row:
                line += 1
                continue
            one = dm.parse_rows([row], header, args.label_column, args.id_column, first_line=line)
            if det is None:
                det = streaming.StreamDetector(scfg, one.feature_names)
            rid = one.row_ids[0] if args.id_column else str(line - (1 if args.no_header else 2))
            verdict = det.push(one.features[0], rid)
            if verdict is not None:
                out.write(canonical_dumps(verdict.to_dict()) + "\n")
                out.flush()
            line += 1
        if det is not None:
            verdict = det.flush()
            if verdict is not None:
                out.write(canonical_dumps(verdict.to_dict()) + "\n")
            elif det.unprocessed:
                print(f"wodkit: {det.unprocessed} trailing rows too few for a partial window", file=sys.stderr)
    finally:
        if src is not sys.stdin:
            src.close()


def cmd_synth(args):
    ds = synth.make_benchmark(args.seed, args.inliers, args.outliers)
    buf = io.StringIO()
    dm.write_csv(ds, buf)
    if args.output:
        write_atomic(args.output, buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())


def cmd_transform(args):
    cfg = _config(args)
    ds = dm.preprocess(_load(args), cfg["preprocess.impute"], cfg["preprocess.dedupe"])
    ds = dm.apply_normalizer(ds, dm.fit_normalizer(ds, cfg["preprocess.normalize"]))
    buf = io.StringIO()
    dm.write_csv(ds, buf)
    if args.output:
        write_atomic(args.output, buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())


def _io_args(p, weights=True):
    p.add_argument("-i", "--input", required=True, help="input CSV")
    p.add_argument("--no-header", action="store_true", help="input has no header row")
    p.add_argument("--label-column", help="column holding 0/1 outlier labels")
    p.add_argument("--id-column", help="column holding row identifiers (default: row number)")
    if weights:
        p.add_argument("--weights-column", help="column of user-supplied instance weights")


def _cfg_args(p):
    p.add_argument("-c", "--config", help="JSON config file (default: $WODKIT_CONFIG)")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key")
    p.add_argument("--force", action="store_true", help="allow chisq thresholds on weighted scores")


def _out_args(p):
    p.add_argument("-o", "--output", help="per-row CSV: row_id,score,flag")
    p.add_argument("-r", "--report", help="JSON report")
    p.add_argument("--top", type=int, default=10, help="top-scored rows listed in the report")
    p.add_argument("--timing", action="store_true", help="add per-stage wall time to the report")


def build_parser():
    parser = argparse.ArgumentParser(prog="wodkit", description="Weighted outlier detection.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="fit and score one file")
    _io_args(p)
    _cfg_args(p)
    _out_args(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("fit", help="fit and save a model")
    _io_args(p)
    _cfg_args(p)
    p.add_argument("-m", "--model", required=True, help="model JSON to write")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("score", help="score a file with a saved model")
    _io_args(p)
    p.add_argument("-m", "--model", required=True, help="model JSON from `fit`")
    _out_args(p)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("eval", help="k-fold cross-validation on labelled data")
    _io_args(p)
    _cfg_args(p)
    p.add_argument("-k", "--folds", type=int, help="fold count (default: eval.folds)")
    p.add_argument("-r", "--report", help="JSON report")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("tune", help="grid search over tune.grid")
    _io_args(p)
    _cfg_args(p)
    p.add_argument("-r", "--report", help="JSON report")
    p.add_argument("--table", help="CSV result table")
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("stream", help="windowed detection over CSV rows on stdin")
    p.add_argument("-i", "--input", default="-", help="input CSV (default: stdin)")
    p.add_argument("--no-header", action="store_true")
    p.add_argument("--label-column", help="column to ignore as labels")
    p.add_argument("--id-column")
    _cfg_args(p)
    p.add_argument("--capacity", type=int)
    p.add_argument("--mode", choices=("tumbling", "sliding"))
    p.add_argument("--stride", type=int)
    p.set_defaults(func=cmd_stream)

    p = sub.add_parser("synth", help="write the labelled two-blob benchmark")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--inliers", type=int, default=950)
    p.add_argument("--outliers", type=int, default=50)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("transform", help="impute, dedupe and normalize a CSV")
    _io_args(p, weights=False)
    _cfg_args(p)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_transform)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except WodError as exc:
        print(f"wodkit: error [{exc.stage}]: {exc}", file=sys.stderr)
        return exc.exit_code
    except np.linalg.LinAlgError as exc:
        print(f"wodkit: error [numeric]: {exc}", file=sys.stderr)
        return NumericError.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
