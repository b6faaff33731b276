"""Command-line front end.

Usage:
    datarep compare --training a.csv --unseen b.csv --out report.json
    datarep compare --training scans_t/ --unseen scans_u/ --modality images
    datarep sweep --shifts 0,1,2 --reps 20 --out sweep_out/
    datarep turning-point --gain 1.6 --budgets 100,400,4000 --out tp_out/
    datarep generate gaussian --shift 2 --n-per-domain 1000 --out data/
    datarep generate phantom --gain 1.3 --out data/

Exit codes for ``compare`` encode the verdict so CI pipelines can gate on
representativeness without parsing JSON: 0 representative, 10 caution,
20 not representative, 30 separable, 1 error.  All other commands exit 0
on success and 1 on error.
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .core import BetaParams, DomainTag, DrcConfig, Verdict
from .estimator import RepresentativenessAnalyzer
from .exceptions import DatarepError, InvalidConfig, ModalityMismatch
from .harness import (
    Condition,
    TRAIN_PLUS_UNSEEN,
    UNSEEN_ONLY,
    run_similarity_sweep,
    run_turning_point,
)
from .ingest import PatchSpec, images_to_dataset, load_csv, load_image_dir
from .synthgen import (
    AcquisitionTransform,
    GaussianPairSpec,
    PhantomPairSpec,
    write_gaussian_pair,
    write_phantom_pair,
)

EXIT_CODES = {
    Verdict.REPRESENTATIVE: 0,
    Verdict.CAUTION: 10,
    Verdict.NOT_REPRESENTATIVE: 20,
    Verdict.SEPARABLE: 30,
}

SWEEP_BM1_DEFAULT = "25,25;50,50;100,100;200,200;300,300;400,400"


def _parse_pair(text: str) -> tuple[float, float]:
    parts = [p.strip() for p in str(text).split(",")]
    if len(parts) != 2:
        raise InvalidConfig(f"expected 'a,b', got {text!r}")
    return float(parts[0]), float(parts[1])


def _parse_floats(text: str) -> list[float]:
    return [float(p) for p in str(text).split(",") if p.strip()]


def _parse_ints(text: str) -> list[int]:
    return [int(p) for p in str(text).split(",") if p.strip()]


def _parse_pair_list(text: str) -> list[tuple[float, float]]:
    return [_parse_pair(chunk) for chunk in str(text).split(";") if chunk.strip()]


def _timestamp() -> str:
    return datetime.now(timezone.utc).isoformat()


def _merge_config(args: argparse.Namespace, defaults: dict) -> dict:
    """Effective options: defaults, overridden by --config file entries,
    overridden by explicitly passed flags."""
    effective = dict(defaults)
    config_path = getattr(args, "config", None)
    if config_path:
        with open(config_path, encoding="utf-8") as fh:
            file_cfg = json.load(fh)
        for key, value in file_cfg.items():
            norm = key.replace("-", "_")
            if norm not in defaults:
                raise InvalidConfig(f"unknown config key {key!r}")
            effective[norm] = value
    for key in defaults:
        value = getattr(args, key, None)
        if value is not None:
            effective[key] = value
    return effective


def _drc_config(opts: dict) -> DrcConfig:
    return DrcConfig(
        bm1=BetaParams(*_parse_pair(opts["bm1"])),
        bm2=BetaParams(*_parse_pair(opts["bm2"])),
        caution_band=float(opts["caution_band"]),
        properness_threshold=float(opts["properness_threshold"]),
    )


def _lambda_grid(opts: dict):
    return _parse_floats(opts["lambda_grid"]) if opts["lambda_grid"] else None


def _write_json(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# compare
# ---------------------------------------------------------------------------

COMPARE_DEFAULTS = {
    "training": None,
    "unseen": None,
    "modality": None,
    "patch_size": 15,
    "patches_per_image": 300,
    "folds": 5,
    "lambda_grid": None,
    "bm1": "25,25",
    "bm2": "1,1",
    "caution_band": 0.1,
    "properness_threshold": 1.0,
    "seed": 0,
    "out": "report.json",
}


def _infer_modality(training: Path, unseen: Path, declared: str | None) -> str:
    kinds = []
    for p in (training, unseen):
        if p.is_dir():
            kinds.append("images")
        elif p.is_file():
            kinds.append("csv")
        else:
            raise FileNotFoundError(f"input not found: {p}")
    if kinds[0] != kinds[1]:
        raise ModalityMismatch(
            f"inputs are of different modalities: {training} is {kinds[0]}, "
            f"{unseen} is {kinds[1]}"
        )
    if declared and declared != kinds[0]:
        raise ModalityMismatch(
            f"declared modality {declared!r} but inputs look like {kinds[0]!r}"
        )
    return kinds[0]


def _load_pair(opts: dict):
    training_path = Path(opts["training"])
    unseen_path = Path(opts["unseen"])
    modality = _infer_modality(training_path, unseen_path, opts["modality"])
    if modality == "csv":
        return (
            load_csv(training_path, DomainTag.TRAINING),
            load_csv(unseen_path, DomainTag.UNSEEN),
        )
    spec = PatchSpec(
        size=int(opts["patch_size"]),
        max_patches=int(opts["patches_per_image"]),
        seed=int(opts["seed"]),
    )
    return (
        images_to_dataset(load_image_dir(training_path), spec, DomainTag.TRAINING),
        images_to_dataset(load_image_dir(unseen_path), spec, DomainTag.UNSEEN),
    )


def cmd_compare(args: argparse.Namespace) -> int:
    opts = _merge_config(args, COMPARE_DEFAULTS)
    if not opts["training"] or not opts["unseen"]:
        raise InvalidConfig("--training and --unseen are required")
    config = _drc_config(opts)
    training, unseen = _load_pair(opts)

    analyzer = RepresentativenessAnalyzer(
        n_folds=int(opts["folds"]),
        lambda_grid=_lambda_grid(opts),
        bm1=config.bm1.as_tuple(),
        bm2=config.bm2.as_tuple(),
        caution_band=config.caution_band,
        properness_threshold=config.properness_threshold,
        random_state=int(opts["seed"]),
    )
    analyzer.fit_pair(training, unseen)
    report = analyzer.report_

    payload = {
        "tool_version": __version__,
        "timestamp": _timestamp(),
        "seed": int(opts["seed"]),
        "config_echo": {k: opts[k] for k in sorted(opts)},
        "cv_error": report.cv_error,
        "proxy_a": report.proxy_a,
        "chosen_lambda": report.chosen_lambda,
        "fitted_beta": (
            {"alpha": report.fitted.alpha, "beta": report.fitted.beta}
            if report.fitted
            else None
        ),
        "drc": {
            "status": report.drc.status.value,
            "value": report.drc.value,
        },
        "verdict": report.verdict.value,
        "warnings": list(report.warnings),
    }
    _write_json(Path(opts["out"]), payload)
    drc_text = f"{report.drc.value:.4g}" if report.drc.is_defined else report.drc.status.value
    print(
        f"verdict: {report.verdict.value} "
        f"(cv_error={report.cv_error:.4f}, proxy_a={report.proxy_a:.4f}, drc={drc_text})"
    )
    return EXIT_CODES[report.verdict]


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

SWEEP_DEFAULTS = {
    "shifts": "0,1,2",
    "dim": 2,
    "n_per_domain": 1000,
    "reps": 20,
    "bm1_list": SWEEP_BM1_DEFAULT,
    "bm2": "1,1",
    "caution_band": 0.1,
    "properness_threshold": 1.0,
    "folds": 5,
    "lambda_grid": None,
    "seed": 0,
    "out": "sweep_out",
    "dump_probabilities": False,
}


def cmd_sweep(args: argparse.Namespace) -> int:
    opts = _merge_config(args, SWEEP_DEFAULTS)
    reps = int(opts["reps"])
    shifts = _parse_floats(str(opts["shifts"]))
    if not shifts:
        raise InvalidConfig("--shifts must name at least one shift")
    bm1_list = [BetaParams(a, b) for a, b in _parse_pair_list(opts["bm1_list"])]
    config = DrcConfig(
        bm1=bm1_list[0],
        bm2=BetaParams(*_parse_pair(opts["bm2"])),
        caution_band=float(opts["caution_band"]),
        properness_threshold=float(opts["properness_threshold"]),
    )
    conditions = [
        Condition(
            name=f"shift_{s:g}",
            generator=GaussianPairSpec(
                dim=int(opts["dim"]), shift=s, n_per_domain=int(opts["n_per_domain"])
            ),
            label=i,
        )
        for i, s in enumerate(shifts)
    ]
    result = run_similarity_sweep(
        conditions,
        reps=reps,
        bm1_list=bm1_list,
        config=config,
        seed=int(opts["seed"]),
        folds=int(opts["folds"]),
        lambda_grid=_lambda_grid(opts),
    )

    outdir = Path(opts["out"])
    outdir.mkdir(parents=True, exist_ok=True)
    payload = {
        "tool_version": __version__,
        "timestamp": _timestamp(),
        "seed": result.seed,
        "config_echo": {k: opts[k] for k in sorted(opts)},
        "bm1_list": list(result.bm1_keys),
        "conditions": [
            {
                "name": s.name,
                "label": s.label,
                "n_reps": s.n_reps,
                "cv_error": {"mean": s.cv_error_mean, "sem": s.cv_error_sem},
                "proxy_a": {"mean": s.proxy_a_mean, "sem": s.proxy_a_sem},
                "drc": s.drc,
                "probability_histogram": list(s.probability_histogram),
            }
            for s in result.summaries
        ],
    }
    _write_json(outdir / "sweep.json", payload)

    lines = ["condition,label,rep,seed,cv_error,proxy_a,chosen_lambda,alpha,beta,bm1,drc_status,drc_value"]
    for r in result.records:
        alpha = f"{r.fitted.alpha!r}" if r.fitted else ""
        beta = f"{r.fitted.beta!r}" if r.fitted else ""
        for key in result.bm1_keys:
            out = r.drc[key]
            value = repr(out.value) if out.is_defined else ""
            lines.append(
                f"{r.condition},{r.label},{r.rep},{r.seed},{r.cv_error!r},"
                f"{r.proxy_a!r},{r.chosen_lambda!r},{alpha},{beta},"
                f"\"{key}\",{out.status.value},{value}"
            )
    (outdir / "rows.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    if opts["dump_probabilities"]:
        plines = ["condition,probability"]
        for summary, pooled in zip(result.summaries, result.pooled_probabilities):
            plines.extend(f"{summary.name},{v!r}" for v in pooled)
        (outdir / "probabilities.csv").write_text("\n".join(plines) + "\n", encoding="utf-8")

    print(f"sweep complete: {len(conditions)} conditions x {reps} reps -> {outdir}")
    return 0


# ---------------------------------------------------------------------------
# turning-point
# ---------------------------------------------------------------------------

TURNING_POINT_DEFAULTS = {
    "image_size": 64,
    "images_per_domain": 5,
    "tissue_means": "0.3,0.5,0.7",
    "gain": 1.0,
    "gamma": 1.0,
    "noise": 0.05,
    "base_noise": 0.05,
    "patch_size": 15,
    "train_patches_per_image": 400,
    "eval_patches_per_image": 400,
    "budgets": "100,400,4000",
    "reps": 10,
    "seed": 0,
    "out": "turning_point_out",
}


def cmd_turning_point(args: argparse.Namespace) -> int:
    opts = _merge_config(args, TURNING_POINT_DEFAULTS)
    means = _parse_floats(str(opts["tissue_means"]))
    if len(means) != 3:
        raise InvalidConfig("--tissue-means needs exactly three values")
    spec = PhantomPairSpec(
        image_size=int(opts["image_size"]),
        n_images_per_domain=int(opts["images_per_domain"]),
        tissue_means=tuple(means),
        transform=AcquisitionTransform(
            gain=float(opts["gain"]),
            gamma=float(opts["gamma"]),
            noise_sigma=float(opts["noise"]),
        ),
        base_noise_sigma=float(opts["base_noise"]),
    )
    result = run_turning_point(
        Condition("phantom", spec),
        unseen_budget_grid=_parse_ints(str(opts["budgets"])),
        reps=int(opts["reps"]),
        seed=int(opts["seed"]),
        patch_size=int(opts["patch_size"]),
        train_patches_per_image=int(opts["train_patches_per_image"]),
        eval_patches_per_image=int(opts["eval_patches_per_image"]),
    )

    outdir = Path(opts["out"])
    outdir.mkdir(parents=True, exist_ok=True)
    payload = {
        "tool_version": __version__,
        "timestamp": _timestamp(),
        "seed": int(opts["seed"]),
        "config_echo": {k: opts[k] for k in sorted(opts)},
        "budgets": list(result.budgets),
        "arms": {
            arm: [
                {"budget": b, **result.summary[arm][b]} for b in result.budgets
            ]
            for arm in (TRAIN_PLUS_UNSEEN, UNSEEN_ONLY)
        },
    }
    _write_json(outdir / "turning_point.json", payload)
    lines = ["rep,budget,arm,error"]
    lines.extend(f"{rep},{b},{arm},{err!r}" for rep, b, arm, err in result.rows)
    (outdir / "rows.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"turning-point comparison complete -> {outdir}")
    return 0


# ---------------------------------------------------------------------------
# generate
# ---------------------------------------------------------------------------

GENERATE_GAUSSIAN_DEFAULTS = {
    "dim": 2,
    "shift": 0.0,
    "n_per_domain": 1000,
    "seed": 0,
    "out": "generated",
}

GENERATE_PHANTOM_DEFAULTS = {
    "image_size": 64,
    "images_per_domain": 5,
    "tissue_means": "0.3,0.5,0.7",
    "gain": 1.0,
    "gamma": 1.0,
    "noise": 0.05,
    "base_noise": 0.05,
    "seed": 0,
    "out": "generated",
}


def cmd_generate(args: argparse.Namespace) -> int:
    if args.flavor == "gaussian":
        opts = _merge_config(args, GENERATE_GAUSSIAN_DEFAULTS)
        spec = GaussianPairSpec(
            dim=int(opts["dim"]),
            shift=float(opts["shift"]),
            n_per_domain=int(opts["n_per_domain"]),
            seed=int(opts["seed"]),
        )
        tp, up = write_gaussian_pair(spec, opts["out"])
    else:
        opts = _merge_config(args, GENERATE_PHANTOM_DEFAULTS)
        means = _parse_floats(str(opts["tissue_means"]))
        if len(means) != 3:
            raise InvalidConfig("--tissue-means needs exactly three values")
        spec = PhantomPairSpec(
            image_size=int(opts["image_size"]),
            n_images_per_domain=int(opts["images_per_domain"]),
            tissue_means=tuple(means),
            transform=AcquisitionTransform(
                gain=float(opts["gain"]),
                gamma=float(opts["gamma"]),
                noise_sigma=float(opts["noise"]),
            ),
            base_noise_sigma=float(opts["base_noise"]),
            seed=int(opts["seed"]),
        )
        tp, up = write_phantom_pair(spec, opts["out"])
    print(f"wrote training data to {tp} and unseen data to {up}")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


FLAG_HELP = {
    "training": "path to the training-domain input (CSV file or image directory)",
    "unseen": "path to the unseen-domain input (same modality as --training)",
    "modality": "input kind; inferred from the paths when omitted",
    "patch_size": "odd patch edge length for image inputs (default 15)",
    "patches_per_image": "random patches drawn per image (default 300)",
    "folds": "cross-validation fold count (default 5)",
    "lambda_grid": "comma-separated L2 strengths (default: 9 log-spaced in [1e-4, 1e4])",
    "bm1": "benchmark prior 1 shapes 'a,b' (similar-datasets reference, default 25,25)",
    "bm2": "benchmark prior 2 shapes 'a,b' (dissimilar-datasets reference, default 1,1)",
    "bm1_list": "semicolon-separated list of benchmark prior 1 shapes",
    "caution_band": "half-width of the inconclusive DRC interval around 1 (default 0.1)",
    "properness_threshold": "fitted shape at or below this is improper (default 1.0)",
    "seed": "integer seed; fixed seed and inputs reproduce every byte",
    "out": "output file (compare) or directory (other commands)",
    "reps": "repetitions per condition",
    "shifts": "comma-separated Gaussian mean shifts, one condition each",
    "dim": "feature dimension of the Gaussian pairs",
    "n_per_domain": "samples per domain",
    "shift": "mean separation of the two Gaussian clouds",
    "image_size": "phantom edge length in pixels",
    "images_per_domain": "phantom images per domain",
    "tissue_means": "three class intensities in [0,1], e.g. 0.3,0.5,0.7",
    "gain": "multiplicative intensity distortion of the unseen domain",
    "gamma": "contrast exponent of the unseen domain",
    "noise": "additive Gaussian noise sigma of the unseen domain",
    "base_noise": "noise sigma of the training domain",
    "train_patches_per_image": "training-pool patches per image",
    "eval_patches_per_image": "evaluation patches per image",
    "budgets": "comma-separated unseen patch budgets per image",
    "dump_probabilities": "also write the pooled probabilities per condition",
}


INT_FLAGS = {
    "patch_size", "patches_per_image", "folds", "seed", "reps", "dim",
    "n_per_domain", "image_size", "images_per_domain",
    "train_patches_per_image", "eval_patches_per_image",
}
FLOAT_FLAGS = {
    "caution_band", "properness_threshold", "gain", "gamma", "noise",
    "base_noise", "shift",
}


def _add_common(parser: argparse.ArgumentParser, keys: dict) -> None:
    """Register flags with default=None; real defaults live in the
    per-command dicts so --config entries slot in between."""
    for key in keys:
        help_text = FLAG_HELP.get(key)
        if key == "modality":
            parser.add_argument("--modality", choices=["csv", "images"], help=help_text)
        elif key == "dump_probabilities":
            parser.add_argument(
                "--dump-probabilities", action="store_const", const=True,
                default=None, help=help_text,
            )
        else:
            kind = int if key in INT_FLAGS else float if key in FLOAT_FLAGS else str
            parser.add_argument(f"--{key.replace('_', '-')}", type=kind, help=help_text)
    parser.add_argument("--config", help="JSON file with the same keys as the flags")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="datarep",
        description=(
            "Quantify how representative a training dataset is of a new "
            "unseen dataset via domain classification"
        ),
    )
    parser.add_argument("--version", action="version", version=f"datarep {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compare", help="compare two datasets and report a verdict")
    _add_common(p, COMPARE_DEFAULTS)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sweep", help="repeat comparisons across a shift spectrum")
    _add_common(p, SWEEP_DEFAULTS)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser(
        "turning-point", help="two-arm downstream comparison across unseen budgets"
    )
    _add_common(p, TURNING_POINT_DEFAULTS)
    p.set_defaults(func=cmd_turning_point)

    p = sub.add_parser("generate", help="write synthetic dataset pairs to disk")
    gen_sub = p.add_subparsers(dest="flavor", required=True)
    pg = gen_sub.add_parser("gaussian")
    _add_common(pg, GENERATE_GAUSSIAN_DEFAULTS)
    pg.set_defaults(func=cmd_generate)
    pp = gen_sub.add_parser("phantom")
    _add_common(pp, GENERATE_PHANTOM_DEFAULTS)
    pp.set_defaults(func=cmd_generate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DatarepError, OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
