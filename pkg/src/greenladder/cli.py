"""Command-line pipeline: dataset generation, training, selection, evaluation,
anchor analysis, and plot-data reports. Thin shell over the library."""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analysis, metrics, selector
from .core import (
    DEFAULT_HEIGHTS,
    DEFAULT_QPS,
    AnchorMeasurement,
    ConfigSpace,
    Dataset,
    GreenLadderError,
    InvariantViolation,
    IoFailure,
    Representation,
    anchor_of,
    load_dataset,
    save_dataset,
    split_by_video,
)
from .harness import (
    ExternalCommandProvider,
    PowerModel,
    SyntheticProvider,
    SyntheticWorldParams,
    run_anchor,
    synth_generate,
)
from .metrics import ConstantTruth, EmptyInput, RegressionReport
from .models import (
    FAMILIES,
    TARGETS,
    DegenerateDesignMatrix,
    EmptyGrid,
    ModelFileError,
    NonFiniteInput,
    TooFewSamples,
    features_for_target,
    fit,
    load_model,
    predict,
    save_model,
    search_families,
)

SEED_ENV_VAR = "GREENLADDER_SEED"

EXIT_USAGE = 2
EXIT_IO = 3
EXIT_TRAIN = 4
EXIT_MODEL = 5

DEFAULT_RHOS = (0.0, 0.05, 0.1, 0.3, 0.5, 0.7, 1.0)


@dataclass
class RunConfig:
    """File-backed run settings; CLI flags override these."""

    resolutions: tuple[int, ...] = DEFAULT_HEIGHTS
    qps: tuple[int, ...] = DEFAULT_QPS
    seed: int | None = None
    train_fraction: float = 0.7
    quality_metric: str = "vmaf"
    rho_list: tuple[float, ...] = DEFAULT_RHOS
    paths: dict = field(default_factory=dict)

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise IoFailure(f"cannot read config '{path}': {exc}") from exc
        except json.JSONDecodeError as exc:
            raise InvariantViolation("config", f"invalid JSON in '{path}': {exc}") from exc
        cfg = cls()
        if "resolutions" in doc:
            cfg.resolutions = tuple(int(h) for h in doc["resolutions"])
        if "qps" in doc:
            cfg.qps = tuple(int(q) for q in doc["qps"])
        if "seed" in doc:
            cfg.seed = int(doc["seed"])
        if "train_fraction" in doc:
            cfg.train_fraction = float(doc["train_fraction"])
        if "quality_metric" in doc:
            cfg.quality_metric = str(doc["quality_metric"])
        if "rho_list" in doc:
            cfg.rho_list = tuple(float(r) for r in doc["rho_list"])
        if "paths" in doc:
            cfg.paths = dict(doc["paths"])
        return cfg


def _load_config(args) -> RunConfig:
    if getattr(args, "config", None):
        return RunConfig.from_file(args.config)
    return RunConfig()


def _resolve_seed(args, cfg: RunConfig) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    if cfg.seed is not None:
        return cfg.seed
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None:
        return int(env)
    return 0


def _resolve_space(args, cfg: RunConfig) -> ConfigSpace:
    heights = _parse_int_list(args.resolutions) if getattr(args, "resolutions", None) else cfg.resolutions
    qps = _parse_int_list(args.qps) if getattr(args, "qps", None) else cfg.qps
    return ConfigSpace.of(heights, qps)


def _parse_int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _parse_float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _fmt(x: float) -> str:
    return repr(float(x))


def _write_csv(path, header: list[str], rows: list[list]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(x if isinstance(x, str) else _fmt(x) for x in row))
    try:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot write '{path}': {exc}") from exc


def selection_result_json(result: selector.SelectionResult) -> str:
    """Canonical JSON used by both the CLI and library consumers."""
    return json.dumps(result.to_dict(), indent=2, sort_keys=True)


# ---------------------------------------------------------------------------
# dataset
# ---------------------------------------------------------------------------

def cmd_dataset_synth(args) -> int:
    cfg = _load_config(args)
    space = _resolve_space(args, cfg)
    params = SyntheticWorldParams(
        n_videos=args.videos,
        base_enc_time=args.base_enc_time,
        pixel_exponent=args.pixel_exponent,
        qp_decay=args.qp_decay,
        power_enc=args.power_enc,
        power_dec=args.power_dec,
        quality_ceiling=args.quality_ceiling,
        noise_sd=args.noise_sd,
        seed=_resolve_seed(args, cfg),
    )
    ds = synth_generate(params, space)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    save_dataset(ds, args.out)
    _print_dataset_summary(ds)
    return 0


def cmd_dataset_measure(args) -> int:
    cfg = _load_config(args)
    space = _resolve_space(args, cfg)
    power_model = PowerModel(avg_power=args.power_w) if args.power_w else None
    paths = {Path(p).stem: p for p in args.video}
    provider = ExternalCommandProvider(
        args.template,
        paths,
        decode_template=args.decode_template,
        power_model=power_model,
        timeout=args.timeout,
    )
    records = []
    for video_id in sorted(paths):
        for rep in space.grid():
            records.append(provider.measure(video_id, rep))
    ds = Dataset(records=tuple(records))
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    save_dataset(ds, args.out)
    _print_dataset_summary(ds)
    return 0


def _print_dataset_summary(ds: Dataset) -> None:
    print(f"rows: {len(ds)}")
    print("height  rows  mean_enc_time_s  mean_enc_energy_wh")
    heights = sorted({r.rep.height for r in ds.records})
    for h in heights:
        rows = [r for r in ds.records if r.rep.height == h]
        mean_t = np.mean([r.enc_time for r in rows])
        mean_e = np.mean([r.enc_energy for r in rows])
        print(f"{h:6d}  {len(rows):4d}  {mean_t:15.3f}  {mean_e:18.5f}")


# ---------------------------------------------------------------------------
# train
# ---------------------------------------------------------------------------

def cmd_train(args) -> int:
    cfg = _load_config(args)
    seed = _resolve_seed(args, cfg)
    data_path = args.data or cfg.paths.get("data")
    if not data_path:
        print("error: no dataset path given (--data or config paths.data)", file=sys.stderr)
        return EXIT_USAGE
    ds = load_dataset(data_path)
    space = ConfigSpace.from_dataset(ds)
    train_fraction = args.train_fraction if args.train_fraction is not None else cfg.train_fraction
    ds_train, ds_test = split_by_video(ds, train_fraction, seed)

    families = [args.family] if args.family else list(FAMILIES)
    targets = [args.target] if args.target else list(TARGETS)
    outdir = Path(args.outdir or cfg.paths.get("models_dir", "models"))
    outdir.mkdir(parents=True, exist_ok=True)

    report_rows = []
    table: dict[str, dict[str, RegressionReport]] = {f: {} for f in families}
    manifest: dict[str, dict] = {}
    for target in targets:
        X_train, y_train = features_for_target(ds_train, space, target)
        X_test, y_test = features_for_target(ds_test, space, target)
        results = search_families(
            X_train, y_train, families=families, k=args.folds, seed=seed, n_jobs=args.jobs
        )
        best_family = None
        for family in families:
            cv = results[family]
            model = fit(cv.best_spec, X_train, y_train, target=target)
            rep = RegressionReport.from_predictions(y_test, predict(model, X_test))
            table[family][target] = rep
            report_rows.append([family, target, rep.r2, rep.rmse, rep.mae, rep.sdae])
            if best_family is None or cv.mean_score > results[best_family].mean_score:
                best_family = family
        winner = results[best_family]
        final = fit(winner.best_spec, X_train, y_train, target=target)
        model_path = outdir / f"{target}.json"
        save_model(final, model_path)
        manifest[target] = {
            "family": best_family,
            "hyperparameters": dict(winner.best_spec.hyperparameters),
            "cv_r2": winner.mean_score,
            "file": model_path.name,
        }
    report_path = args.report or (outdir / "report.csv")
    _write_csv(report_path, ["family", "target", "r2", "rmse", "mae", "sdae"], report_rows)
    (outdir / "manifest.json").write_text(
        json.dumps({"seed": seed, "train_fraction": train_fraction, "targets": manifest},
                   indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    print(metrics.format_regression_table(table, tuple(targets)))
    for target, info in manifest.items():
        print(f"best[{target}]: {info['family']} (cv_r2={info['cv_r2']:.4f})")
    return 0


# ---------------------------------------------------------------------------
# select
# ---------------------------------------------------------------------------

def _load_models(models_dir) -> dict:
    models = {}
    model_dir = Path(models_dir)
    if not model_dir.is_dir():
        raise ModelFileError(models_dir, "not a directory")
    for path in sorted(model_dir.glob("*.json")):
        if path.name == "manifest.json":
            continue
        model = load_model(path)
        models[model.target] = model
    if not models:
        raise ModelFileError(models_dir, "contains no model files")
    return models


def _anchor_from_args(args, cfg: RunConfig, space: ConfigSpace, quality_metric: str) -> AnchorMeasurement:
    if args.anchor_enc_time is not None:
        quality_flag = args.anchor_vmaf if quality_metric == "vmaf" else args.anchor_psnr
        if args.anchor_dec_time is None or quality_flag is None:
            raise InvariantViolation(
                "anchor",
                f"--anchor-enc-time needs --anchor-dec-time and --anchor-{quality_metric}",
            )
        return AnchorMeasurement(
            video_id=args.video_id or "cli",
            enc_time=args.anchor_enc_time,
            dec_time=args.anchor_dec_time,
            psnr=args.anchor_psnr if args.anchor_psnr is not None else 30.0,
            vmaf=args.anchor_vmaf if args.anchor_vmaf is not None else 50.0,
        )
    if args.data:
        if not args.video_id:
            raise InvariantViolation("video_id", "--video-id required with --data")
        return anchor_of(load_dataset(args.data), args.video_id, space)
    if args.synth_videos:
        if not args.video_id:
            raise InvariantViolation("video_id", "--video-id required with --synth-videos")
        params = SyntheticWorldParams(n_videos=args.synth_videos, seed=_resolve_seed(args, cfg))
        return run_anchor(SyntheticProvider(params, space), args.video_id, space)
    raise InvariantViolation(
        "anchor", "give --anchor-enc-time, or --data with --video-id, or --synth-videos"
    )


def cmd_select(args) -> int:
    cfg = _load_config(args)
    space = _resolve_space(args, cfg)
    models = _load_models(args.models or cfg.paths.get("models_dir", "models"))
    quality_metric = args.quality_metric or cfg.quality_metric
    anchor = _anchor_from_args(args, cfg, space, quality_metric)
    grid = selector.build_grid(models, anchor, space, quality_metric)
    result = selector.select(grid, args.rho)
    print(selection_result_json(result))
    return 0


# ---------------------------------------------------------------------------
# evaluate / analyze / report
# ---------------------------------------------------------------------------

def cmd_evaluate(args) -> int:
    cfg = _load_config(args)
    seed = _resolve_seed(args, cfg)
    ds = load_dataset(args.data or cfg.paths.get("data"))
    space = ConfigSpace.from_dataset(ds)
    models = _load_models(args.models or cfg.paths.get("models_dir", "models"))
    quality_metric = args.quality_metric or cfg.quality_metric
    rhos = _parse_float_list(args.rhos) if args.rhos else list(cfg.rho_list)
    if args.split == "test":
        train_fraction = args.train_fraction if args.train_fraction is not None else cfg.train_fraction
        _, ds = split_by_video(ds, train_fraction, seed)
    reports = selector.evaluate_policy(ds, models, space, rhos, quality_metric)
    out = args.out or cfg.paths.get("out_dir", ".")
    out_path = Path(out) / "policy.csv" if Path(out).suffix == "" else Path(out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text(metrics.policy_csv(reports), encoding="utf-8")
    print(metrics.format_policy_table(reports))
    return 0


def _parse_candidates(text: str) -> list[tuple[int, int]]:
    pairs = []
    for part in text.split(","):
        h, qp = part.split(":")
        pairs.append((int(h), int(qp)))
    return pairs


def cmd_analyze(args) -> int:
    cfg = _load_config(args)
    seed = _resolve_seed(args, cfg)
    ds = load_dataset(args.data or cfg.paths.get("data"))
    space = ConfigSpace.from_dataset(ds)
    outdir = Path(args.outdir or cfg.paths.get("out_dir", "."))

    cm = analysis.pairwise_correlation(ds, space)
    labels = [f"{c.height}p{c.qp}" for c in cm.configs]
    matrix_rows = []
    for i, c in enumerate(cm.configs):
        matrix_rows.append([str(c.height), str(c.qp), *cm.values[i].tolist()])
    _write_csv(outdir / "corr_matrix.csv", ["height", "qp", *labels], matrix_rows)

    ranking = analysis.anchor_ranking(cm, ds)
    _write_csv(
        outdir / "anchor_ranking.csv",
        ["height", "qp", "mean_corr", "mean_time_s"],
        [[str(rep.height), str(rep.qp), mc, mt] for rep, mc, mt in ranking],
    )

    if args.candidates:
        candidates = [
            Representation(res, qp)
            for h, qp in _parse_candidates(args.candidates)
            for res in [next(r for r in space.resolutions if r.height == h)]
        ]
    else:
        candidates = analysis.default_anchor_candidates(space)
    train_fraction = args.train_fraction if args.train_fraction is not None else cfg.train_fraction
    sweep = analysis.anchor_sweep(ds, candidates, family=args.family, seed=seed,
                                  train_fraction=train_fraction)
    _write_csv(
        outdir / "anchor_sweep.csv",
        ["anchor", "mean_time_s", "r2"],
        [[f"{row.anchor.height}p{row.anchor.qp}", row.mean_anchor_time, row.r2] for row in sweep],
    )
    print(f"wrote {outdir / 'corr_matrix.csv'}")
    print(f"wrote {outdir / 'anchor_ranking.csv'}")
    print(f"wrote {outdir / 'anchor_sweep.csv'}")
    return 0


REPORT_METRICS = (
    ("enc_time_s", "enc_time"),
    ("enc_energy_wh", "enc_energy"),
    ("dec_time_s", "dec_time"),
    ("dec_energy_wh", "dec_energy"),
    ("bitrate_kbps", "bitrate"),
    ("psnr_db", "psnr"),
    ("vmaf", "vmaf"),
)


def cmd_report(args) -> int:
    cfg = _load_config(args)
    ds = load_dataset(args.data or cfg.paths.get("data"))
    outdir = Path(args.outdir or cfg.paths.get("out_dir", "."))

    def aggregate(group_name: str, key) -> None:
        values = sorted({key(r) for r in ds.records})
        rows = []
        for v in values:
            group = [r for r in ds.records if key(r) == v]
            for label, attr in REPORT_METRICS:
                data = np.asarray([getattr(r, attr) for r in group])
                rows.append([
                    str(v), label,
                    float(np.mean(data)), float(np.median(data)),
                    float(np.percentile(data, 25)), float(np.percentile(data, 75)),
                ])
        _write_csv(outdir / f"by_{group_name}.csv",
                   [group_name, "metric", "mean", "median", "q25", "q75"], rows)

    aggregate("resolution", lambda r: r.rep.height)
    aggregate("qp", lambda r: r.rep.qp)
    print(f"wrote {outdir / 'by_resolution.csv'}")
    print(f"wrote {outdir / 'by_qp.csv'}")
    return 0


# ---------------------------------------------------------------------------
# wiring
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="greenladder",
        description="Anchor-based energy/quality prediction and green configuration selection.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file; flags override its values")
        p.add_argument("--seed", type=int, default=None,
                       help=f"RNG seed (fallback: config, then ${SEED_ENV_VAR}, then 0)")
        p.add_argument("--resolutions", help="comma-separated heights, e.g. 360,540,720")
        p.add_argument("--qps", help="comma-separated QPs, e.g. 17,22,27")

    dataset = sub.add_parser("dataset", help="generate or measure a dataset")
    dsub = dataset.add_subparsers(dest="dataset_command", required=True)

    synth = dsub.add_parser("synth", help="generate the synthetic world")
    common(synth)
    synth.add_argument("--videos", type=int, required=True)
    synth.add_argument("--out", required=True)
    synth.add_argument("--noise-sd", type=float, default=0.05)
    synth.add_argument("--base-enc-time", type=float, default=7.6)
    synth.add_argument("--pixel-exponent", type=float, default=0.75)
    synth.add_argument("--qp-decay", type=float, default=0.09)
    synth.add_argument("--power-enc", type=float, default=90.0)
    synth.add_argument("--power-dec", type=float, default=35.0)
    synth.add_argument("--quality-ceiling", type=float, default=90.0)
    synth.set_defaults(func=cmd_dataset_synth)

    measure = dsub.add_parser("measure", help="measure videos via external commands")
    common(measure)
    measure.add_argument("--template", required=True,
                         help="encode command with {input},{width},{height},{qp},{output}")
    measure.add_argument("--decode-template")
    measure.add_argument("--video", action="append", required=True, help="source video path")
    measure.add_argument("--out", required=True)
    measure.add_argument("--power-w", type=float, help="average watts for the time-energy proxy")
    measure.add_argument("--timeout", type=float)
    measure.set_defaults(func=cmd_dataset_measure)

    train = sub.add_parser("train", help="grid-search, fit, and report models")
    common(train)
    train.add_argument("--data")
    train.add_argument("--outdir")
    train.add_argument("--report", help="metrics CSV path (default: <outdir>/report.csv)")
    train.add_argument("--train-fraction", type=float, default=None)
    train.add_argument("--family", choices=FAMILIES)
    train.add_argument("--target", choices=TARGETS)
    train.add_argument("--folds", type=int, default=5)
    train.add_argument("--jobs", type=int, default=1)
    train.set_defaults(func=cmd_train)

    select_p = sub.add_parser("select", help="pick the green configuration")
    common(select_p)
    select_p.add_argument("--models")
    select_p.add_argument("--rho", type=float, required=True)
    select_p.add_argument("--quality-metric", choices=("vmaf", "psnr"))
    select_p.add_argument("--data", help="dataset CSV to read the anchor row from")
    select_p.add_argument("--video-id")
    select_p.add_argument("--synth-videos", type=int,
                          help="measure the anchor from a synthetic provider")
    select_p.add_argument("--anchor-enc-time", type=float)
    select_p.add_argument("--anchor-dec-time", type=float)
    select_p.add_argument("--anchor-psnr", type=float)
    select_p.add_argument("--anchor-vmaf", type=float)
    select_p.set_defaults(func=cmd_select)

    evaluate = sub.add_parser("evaluate", help="score the policy across rho values")
    common(evaluate)
    evaluate.add_argument("--data")
    evaluate.add_argument("--models")
    evaluate.add_argument("--rhos", help="comma-separated rho values")
    evaluate.add_argument("--quality-metric", choices=("vmaf", "psnr"))
    evaluate.add_argument("--train-fraction", type=float, default=None)
    evaluate.add_argument("--split", choices=("test", "all"), default="test")
    evaluate.add_argument("--out", help="output CSV path or directory")
    evaluate.set_defaults(func=cmd_evaluate)

    analyze = sub.add_parser("analyze", help="correlation matrix and anchor sweep")
    common(analyze)
    analyze.add_argument("--data")
    analyze.add_argument("--outdir")
    analyze.add_argument("--family", choices=FAMILIES, default="gbm_leafwise")
    analyze.add_argument("--train-fraction", type=float, default=None)
    analyze.add_argument("--candidates", help="anchor candidates as h:qp pairs, e.g. 360:47,2160:17")
    analyze.set_defaults(func=cmd_analyze)

    report = sub.add_parser("report", help="per-resolution / per-QP aggregates")
    common(report)
    report.add_argument("--data")
    report.add_argument("--outdir")
    report.set_defaults(func=cmd_report)

    return parser


def _exit_code_for(exc: Exception) -> int:
    if isinstance(exc, (ModelFileError, selector.MissingModel)):
        return EXIT_MODEL
    if isinstance(
        exc,
        (EmptyGrid, TooFewSamples, NonFiniteInput, DegenerateDesignMatrix,
         ConstantTruth, EmptyInput),
    ):
        return EXIT_TRAIN
    if isinstance(exc, (IoFailure, OSError)):
        return EXIT_IO
    if isinstance(exc, (GreenLadderError, ValueError)):
        return EXIT_USAGE
    raise exc


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - mapped to exit codes below
        code = _exit_code_for(exc)
        print(f"error: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
