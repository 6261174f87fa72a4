"""Command-line entry point: ``python -m app.cli <subcommand> ...``.

Exit codes: 0 success, 1 invalid input, 2 numerical failure.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from app.config import load_gen_spec, load_run_config, settings
from app.external import corpus_io, netpbm
from app.models.domain import MembershipMap
from app.services import features, roc, segmentation
from app.services.fcm import fcm
from app.services.generative import sample_corpus
from app.services.sampler import run_inference
from app.utils import seeding
from app.utils.errors import InputError, NumericalFailure

logger = logging.getLogger("app.cli")

EXTRACTORS = ("intensity_entropy", "gradient_color", "filter_bank")


def _shape(value: str):
    try:
        height, width = (int(v) for v in value.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected HEIGHTxWIDTH, got {value}")
    return height, width


def _run_overrides(args: argparse.Namespace, *names: str) -> dict:
    overrides = {}
    for name in names:
        key = "lambda" if name == "lambda_" else name
        overrides[key] = getattr(args, name, None)
    return overrides


def cmd_generate(args: argparse.Namespace) -> None:
    spec = load_gen_spec(args.config, {"seed": args.seed, "D": args.D, "N": args.N})
    corpus, truth = sample_corpus(spec)
    out = Path(args.out_dir)
    corpus_io.write_corpus(out / "corpus.csv", corpus)
    corpus_io.write_truth(out / "truth.csv", truth)
    corpus_io.write_state(out / "truth_state.txt", truth)


def cmd_features(args: argparse.Namespace) -> None:
    config = load_run_config(args.config, _run_overrides(args, "window", "stride", "sigma", "entropy_window"))
    if args.extractor == "gradient_color":
        fimg = features.extract_gradient_color(netpbm.read_ppm(args.image), sigma=config.sigma)
    elif args.extractor == "intensity_entropy":
        fimg = features.extract_intensity_entropy(netpbm.read_pgm(args.image), window=config.entropy_window,
                                                  intensity_scale=config.intensity_scale)
    else:
        fimg = features.extract_filter_bank(netpbm.read_pgm(args.image))

    if args.labels:
        corpus, layout = features.group_by_labels(fimg, netpbm.read_label_map(args.labels))
    else:
        corpus, layout = features.tile_documents(fimg, config.window, config.stride)

    out = Path(args.out_dir)
    corpus_io.write_corpus(out / "corpus.csv", corpus)
    corpus_io.write_layout(out / "layout.csv", layout)


def cmd_fit(args: argparse.Namespace) -> None:
    config = load_run_config(args.config, _run_overrides(args, "K", "T", "seed", "alpha", "lambda_", "f", "thin",
                                                         "fix_pi", "fix_s"))
    corpus = corpus_io.read_corpus(args.corpus)
    sampler_config = config.sampler_config(n_workers=args.workers, debug_checks=args.debug_checks or None)
    trace = run_inference(corpus, sampler_config)

    out = Path(args.out_dir)
    corpus_io.write_trace(out / "trace.csv", trace)
    corpus_io.write_state(out / "map_state.txt", trace.best_state, trace.sigma_bound)
    corpus_io.write_memberships(out / "memberships.csv", [ds.Z for ds in trace.best_state.docs])


def cmd_fcm(args: argparse.Namespace) -> None:
    config = load_run_config(args.config, _run_overrides(args, "K", "seed", "m", "tol", "max_iter"))
    corpus = corpus_io.read_corpus(args.corpus)
    X = np.vstack([doc.words for doc in corpus])
    result = fcm(X, config.K, config.m, config.tol, config.max_iter, seeding.substream(config.seed, seeding.FCM))
    logger.info(f"FCM stopped after {result.n_iter} iterations, objective {result.objective_series[-1]:.6g}")
    corpus_io.write_memberships(Path(args.out_dir) / "memberships.csv",
                                corpus_io.split_rows(result.memberships, [doc.N for doc in corpus]))


def cmd_segment(args: argparse.Namespace) -> None:
    config = load_run_config(args.config, _run_overrides(args, "lo", "hi"))
    memberships = corpus_io.read_memberships(args.memberships)
    layout = corpus_io.read_layout(args.layout, args.shape)
    mmap = segmentation.assemble_maps(memberships, layout, layout.height, layout.width)

    out = Path(args.out_dir)
    for k in range(mmap.K):
        corpus_io.write_matrix(out / f"map_{k}.csv", mmap.values[k])
        netpbm.write_pgm(out / f"map_{k}.pgm", netpbm.membership_to_gray(mmap.values[k]))

    corpus_io.write_matrix(out / "coverage.csv", mmap.coverage.astype(np.int64))

    labels = segmentation.crisp_map(mmap)
    corpus_io.write_matrix(out / "crisp.csv", labels)
    netpbm.write_pgm(out / "crisp.pgm", np.where(labels < 0, 255, labels).astype(np.uint8))

    mask = segmentation.transition_map(mmap, config.lo, config.hi)
    corpus_io.write_matrix(out / "transition.csv", mask.astype(np.int64))
    netpbm.write_pgm(out / "transition.pgm", mask.astype(np.uint8) * 255)
    logger.info(f"{int(mask.sum())} transition pixels out of {int(mmap.coverage.sum())} covered")


def _read_truth_mask(path: str) -> np.ndarray:
    return netpbm.read_label_map(path) != 0


def _read_coverage(args: argparse.Namespace, shape) -> np.ndarray:
    """Covered-pixel mask for ``--maps``: --coverage, else coverage.csv beside the first map."""
    path = Path(args.coverage) if args.coverage else Path(args.maps[0]).with_name("coverage.csv")
    if not path.exists():
        if args.coverage:
            raise InputError(f"coverage file {path} not found")
        logger.warning(f"No {path.name} beside the maps, treating every pixel as covered")
        return np.ones(shape, dtype=bool)
    coverage = corpus_io.read_matrix(path) != 0
    if coverage.shape != tuple(shape):
        raise InputError("coverage mask does not match the membership maps")
    return coverage


def cmd_eval_roc(args: argparse.Namespace) -> None:
    if args.crisp and args.topic is None and not args.maps:
        raise InputError("--crisp needs --topic or --maps to know the positive topic")
    truth = _read_truth_mask(args.truth)
    topic = args.topic
    if args.scores:
        scores = corpus_io.read_matrix(args.scores)
        curve = roc.roc_curve(scores, truth)
    else:
        maps = np.stack([corpus_io.read_matrix(p) for p in args.maps])
        mmap = MembershipMap(maps, _read_coverage(args, maps.shape[1:]))
        topic = roc.pick_topic_for_class(mmap, truth, args.topic)
        curve = roc.roc_curve(mmap.values[topic], truth, mmap.coverage)
        print(f"topic={topic}")

    corpus_io.write_roc(args.out, curve.fpr, curve.tpr, curve.thresholds)
    print(f"AUC={curve.auc!r}")

    if args.crisp:
        labels = corpus_io.read_matrix(args.crisp).astype(np.int64)
        fpr, tpr = roc.crisp_operating_point(labels, topic, truth)
        print(f"crisp FPR={fpr!r} TPR={tpr!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pmlda", description="Partial-membership LDA toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="simulate a corpus from the generative model")
    p.add_argument("--config", required=True, help="flat key=value simulation settings")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--D", type=int)
    p.add_argument("--N", type=int)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("features", help="extract visual words from an image")
    p.add_argument("--image", required=True)
    p.add_argument("--extractor", choices=EXTRACTORS, default="intensity_entropy")
    p.add_argument("--labels", help="superpixel label map (PGM or CSV); tiles with a sliding window otherwise")
    p.add_argument("--config")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--window", type=int)
    p.add_argument("--stride", type=int)
    p.add_argument("--sigma", type=float)
    p.add_argument("--entropy-window", dest="entropy_window", type=int)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("fit", help="MAP inference on a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--config")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--K", type=int)
    p.add_argument("--T", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--alpha")
    p.add_argument("--lambda", dest="lambda_", type=float)
    p.add_argument("--f", type=float)
    p.add_argument("--thin", type=int)
    p.add_argument("--fix-pi", dest="fix_pi")
    p.add_argument("--fix-s", dest="fix_s", type=float)
    p.add_argument("--workers", type=int)
    p.add_argument("--debug-checks", action="store_true")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("segment", help="membership, crisp and transition maps")
    p.add_argument("--memberships", required=True)
    p.add_argument("--layout", required=True)
    p.add_argument("--shape", type=_shape, help="HEIGHTxWIDTH; defaults to the layout's bounding box")
    p.add_argument("--config")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--lo", type=float)
    p.add_argument("--hi", type=float)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("fcm", help="fuzzy c-means baseline memberships")
    p.add_argument("--corpus", required=True)
    p.add_argument("--config")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--K", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--m", type=float)
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iter", dest="max_iter", type=int)
    p.set_defaults(func=cmd_fcm)

    p = sub.add_parser("eval-roc", help="pixel-level ROC of a score map against a truth mask")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--scores", help="score map CSV")
    source.add_argument("--maps", nargs="+", help="per-topic membership map CSVs; the best topic is picked")
    p.add_argument("--truth", required=True, help="truth mask (PGM or CSV, nonzero = positive)")
    p.add_argument("--coverage", help="covered-pixel CSV for --maps (default: coverage.csv beside the maps)")
    p.add_argument("--topic", type=int, help="positive topic, overrides the automatic pick")
    p.add_argument("--crisp", help="crisp label CSV for the single operating point")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval_roc)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=settings.log_level.upper(),
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except NumericalFailure as e:
        logger.error(f"❌ Numerical failure: {e}")
        return 2
    except (ValueError, OSError) as e:
        logger.error(f"❌ Invalid input: {e}")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
