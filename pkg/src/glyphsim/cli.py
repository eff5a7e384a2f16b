"""Command-line entry point.

Subcommands: render, eval-pairs, cluster-eval, predict, ncd. Every
command takes --config (JSON), with --seed and --out overrides, and
writes reports whose bytes are a pure function of the config fingerprint.

Exit codes: 0 success, 2 config error, 3 data error, 4 degenerate result.
"""

from __future__ import annotations

import argparse
import json
import sys
import unicodedata
from pathlib import Path

import numpy as np

from . import __version__
from .clustering import ClusterParams, cluster
from .codepoints import parse_hex, to_hex
from .config import SEED_OFFSET_AUGMENT, SEED_OFFSET_SHEETS, RunConfig
from .confusables import (
    GroundTruth,
    augment_universe,
    build_ground_truth,
    cardinality_histogram,
    checksum_text,
    parse_confusables,
)
from .embedding import (
    EmbeddingStore,
    bitmap_embed,
    cosine_similarity,
    load_embeddings,
    similarity_row_blocks,
)
from .errors import ConfigError, DataError, DegenerateError
from .metrics import evaluate_clusters, naive_baseline
from .ncd import BACKEND_TAG as NCD_TAG
from .ncd import ncd
from .paireval import evaluate_pairs, fit_threshold_classifier, sample_pairs, score_pairs
from .predict import find_novel, membership_count  # noqa: F401  (sweep uses API)
from .predict import render_set_sheet, threshold_row_blocks
from .render import FontCollection, load_fonts, render


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


def _write_report(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(_jsonable(payload), sort_keys=True, indent=2) + "\n"
    path.write_text(text, encoding="utf-8")


def _load_inputs(config: RunConfig) -> tuple[FontCollection, GroundTruth, str]:
    fc = load_fonts(config.font_paths)
    text = Path(config.confusables_path).read_text(encoding="utf-8")
    checksum = checksum_text(text)
    gt = build_ground_truth(parse_confusables(text), fc, source_checksum=checksum)
    return fc, gt, checksum


def _report_header(config: RunConfig, command: str, checksum: str, fc: FontCollection) -> dict:
    return {
        "tool_version": __version__,
        "command": command,
        "fingerprint": config.fingerprint(command),
        "config": config.semantic_dict(),
        "database_checksum": checksum,
        "font_ids": fc.font_ids,
    }


def _bitmap_store(fc: FontCollection, codepoints, tag: str = "bitmap") -> EmbeddingStore:
    vectors = [bitmap_embed(render(c, fc)) for c in codepoints]
    return EmbeddingStore(vectors, backend_tag=tag)


def _script_bucket(codepoint: int) -> str:
    try:
        name = unicodedata.name(chr(codepoint))
    except ValueError:
        return "UNNAMED"
    if name.startswith("CJK"):
        return "CJK"
    return name.split()[0]


def cmd_render(config: RunConfig) -> int:
    fc = load_fonts(config.font_paths)
    out = Path(config.output_dir)
    supported = sorted(fc.supported_codepoints())
    per_script: dict[str, int] = {}
    for c in supported:
        bucket = _script_bucket(c)
        per_script[bucket] = per_script.get(bucket, 0) + 1
    header = {
        "tool_version": __version__,
        "command": "render",
        "fingerprint": config.fingerprint("render"),
        "config": config.semantic_dict(),
        "font_ids": fc.font_ids,
    }
    census = {
        **header,
        "renderable_count": len(supported),
        "per_script": dict(sorted(per_script.items())),
        "per_font": {
            face.font_id: len(face.supported_codepoints()) for face in fc.faces
        },
    }
    _write_report(out / "render_census.json", census)
    if config.render_codepoints:
        raster_dir = out / "rasters"
        raster_dir.mkdir(parents=True, exist_ok=True)
        for hex_code in config.render_codepoints:
            codepoint = parse_hex(hex_code)
            font_ids = fc.fonts_for(codepoint)
            if not font_ids:
                raise DataError(f"codepoint U+{hex_code} is not renderable")
            # one file per qualifying font: multi-font renders are the
            # training-data surface consumed by the embedding trainer
            for font_id in font_ids:
                render(codepoint, fc, font_id=font_id).save_png(raster_dir)
    print(f"renderable codepoints: {len(supported)}")
    return 0


def _make_scorer(config: RunConfig, fc: FontCollection, gt: GroundTruth):
    """Similarity scorer (higher = more similar) plus its backend tag."""
    if config.backend == "ncd":
        cache: dict[int, object] = {}

        def render_cached(c: int):
            if c not in cache:
                cache[c] = render(c, fc)
            return cache[c]

        def ncd_scorer(a: int, b: int) -> float:
            return -ncd(render_cached(a), render_cached(b))

        return ncd_scorer, NCD_TAG
    if config.backend == "file":
        store = load_embeddings(config.embeddings_path)
        missing = [c for c in sorted(gt.universe) if c not in store]
        if missing:
            raise DataError(
                f"embeddings file lacks {len(missing)} universe codepoints, "
                f"first U+{to_hex(missing[0])}"
            )
    else:
        store = _bitmap_store(fc, sorted(gt.universe))

    def cosine_scorer(a: int, b: int) -> float:
        return cosine_similarity(store.get(a), store.get(b))

    return cosine_scorer, store.backend_tag


def cmd_eval_pairs(config: RunConfig) -> int:
    fc, gt, checksum = _load_inputs(config)
    out = Path(config.output_dir)
    scorer, tag = _make_scorer(config, fc, gt)
    pairs = score_pairs(sample_pairs(gt, config.n_pairs, config.seed), scorer)
    classifier = fit_threshold_classifier(pairs)
    report = evaluate_pairs(pairs, classifier, backend_tag=tag, seed=config.seed)
    payload = {
        **_report_header(config, "eval-pairs", checksum, fc),
        "result": report.to_json_dict(),
    }
    _write_report(out / f"pair_eval_{config.backend}.json", payload)
    csv_path = out / f"pr_curve_{config.backend}.csv"
    with open(csv_path, "w", encoding="utf-8") as fh:
        fh.write("threshold,precision,recall\n")
        scores = np.array([p.score for p in pairs])
        labels = np.array([p.positive for p in pairs])
        from .paireval import precision_recall_sweep

        points, _ = precision_recall_sweep(scores, labels)
        for threshold, recall, precision in points:
            fh.write(f"{threshold!r},{precision!r},{recall!r}\n")
    print(
        f"pairs={report.n} accuracy={report.accuracy:.3f} "
        f"AP={report.average_precision:.3f} backend={tag}"
    )
    return 0


def _dataset_universes(config: RunConfig, gt: GroundTruth, fc: FontCollection):
    """U-prime plus the configured negative augmentations."""
    yield "U'", gt
    for i, count in enumerate(config.augment_counts):
        tag = "U" + "'" * (i + 2)
        augmented = augment_universe(
            gt, count, fc, seed=config.seed + SEED_OFFSET_AUGMENT + i
        )
        yield tag, augmented


def cmd_cluster_eval(config: RunConfig) -> int:
    fc, gt, checksum = _load_inputs(config)
    if gt.n == 0:
        raise DegenerateError("ground truth has no non-trivial classes")
    out = Path(config.output_dir)
    params = ClusterParams(
        assign_threshold=config.assign_threshold,
        merge_mean_threshold=config.merge_mean_threshold,
        merge_var_threshold=config.merge_var_threshold,
    )
    if config.backend == "file":
        store = load_embeddings(config.embeddings_path)
    else:
        store = None  # bitmap store is built per dataset universe

    rows = []
    per_class_dir = out / "cluster_eval_per_class"
    for tag, dataset in _dataset_universes(config, gt, fc):
        codepoints = sorted(dataset.universe)  # input order pinned: ascending
        if store is not None:
            missing = [c for c in codepoints if c not in store]
            if missing:
                raise DataError(
                    f"embeddings file lacks {len(missing)} codepoints for {tag}"
                )
            dataset_store = store
        else:
            dataset_store = _bitmap_store(fc, codepoints)
        predicted = cluster(codepoints, dataset_store, params)
        report = evaluate_clusters(
            gt, predicted, dataset_tag=tag, backend_tag=dataset_store.backend_tag
        )
        baseline = evaluate_clusters(
            gt, naive_baseline(dataset.universe), dataset_tag=tag, backend_tag="baseline"
        )
        rows.append(report.to_json_dict() | {"k": predicted.k})
        rows.append(baseline.to_json_dict() | {"k": len(dataset.universe)})
        safe_tag = "U" + str(len(tag) - 1)
        per_class_dir.mkdir(parents=True, exist_ok=True)
        report.write_per_class_csv(per_class_dir / f"{safe_tag}_{config.backend}.csv")
        _write_report(
            out / f"clusters_{safe_tag}_{config.backend}.json",
            predicted.to_json_dict(),
        )
    payload = {
        **_report_header(config, "cluster-eval", checksum, fc),
        "input_order": "ascending-codepoint",
        "cardinality_histogram": cardinality_histogram(gt),
        "ground_truth": {"classes": gt.n, "universe": len(gt.universe)},
        "rows": rows,
    }
    _write_report(out / "ground_truth.json", gt.to_json_dict())
    _write_report(out / "cluster_eval.json", payload)
    for row in rows:
        print(
            f"{row['dataset']:5s} {row['backend']:16s} "
            f"mBIOU={row['mbiou']:.4f} mBP(prec)={row['mbp_precision']:.4f}"
        )
    return 0


def cmd_predict(config: RunConfig, sweep: int = 0) -> int:
    fc, gt, checksum = _load_inputs(config)
    out = Path(config.output_dir)
    if config.backend == "file":
        store = load_embeddings(config.embeddings_path)
        codepoints = store.codepoints()
    else:
        if config.predict_scope == "all":
            codepoints = sorted(fc.supported_codepoints())
        else:
            codepoints = sorted(gt.universe)
        store = _bitmap_store(fc, codepoints)

    if sweep > 0:
        from .embedding import similarity_matrix

        matrix = similarity_matrix(store, codepoints)
        alphas = np.linspace(0.0, 0.999, sweep)
        points = []
        for alpha in alphas:
            sets = threshold_row_blocks(
                similarity_row_blocks(store, codepoints, config.block_size),
                codepoints,
                float(alpha),
            )
            points.append(
                {
                    "alpha": float(alpha),
                    "memberships": membership_count(matrix, float(alpha)),
                    "sets": len(sets),
                }
            )
        payload = {
            **_report_header(config, "predict-sweep", checksum, fc),
            "sweep": points,
        }
        _write_report(out / "predict_sweep.json", payload)
        print(f"sweep of {sweep} thresholds written")
        return 0

    blocks = similarity_row_blocks(store, codepoints, config.block_size)
    sets = threshold_row_blocks(blocks, codepoints, config.alpha)
    report = find_novel(sets, gt, config.alpha)
    payload = {
        **_report_header(config, "predict", checksum, fc),
        "result": report.to_json_dict(),
    }
    _write_report(out / "prediction.json", payload)

    if report.predicted_sets and config.sheet_count > 0:
        rng = np.random.default_rng(config.seed + SEED_OFFSET_SHEETS)
        count = min(config.sheet_count, len(report.predicted_sets))
        chosen = sorted(
            rng.choice(len(report.predicted_sets), size=count, replace=False).tolist()
        )
        for output_index, set_index in enumerate(chosen):
            sheet = render_set_sheet(report.predicted_sets[set_index], fc)
            sheet.save(out / f"set_{output_index}.png")
    print(
        f"alpha={config.alpha} sets={len(report.predicted_sets)} "
        f"novel={len(report.novel_homoglyphs)}"
    )
    return 0


def cmd_ncd(config: RunConfig, hex_a: str, hex_b: str) -> int:
    fc = load_fonts(config.font_paths)
    a, b = parse_hex(hex_a), parse_hex(hex_b)
    value = ncd(render(a, fc), render(b, fc))
    print(json.dumps({"a": to_hex(a), "b": to_hex(b), "ncd": value, "backend": NCD_TAG}))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="glyphsim",
        description="Homoglyph rendering, clustering, and evaluation toolkit",
    )
    parser.add_argument("--config", required=True, help="path to run config JSON")
    parser.add_argument("--seed", type=int, default=None, help="override config seed")
    parser.add_argument("--out", default=None, help="override config output_dir")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("render", help="renderability census and raster dumps")
    sub.add_parser("eval-pairs", help="pairwise identification protocol")
    sub.add_parser("cluster-eval", help="clustering metrics on U', U'', U'''")
    predict_parser = sub.add_parser("predict", help="predict homoglyph sets")
    predict_parser.add_argument(
        "--sweep", type=int, default=0, metavar="K",
        help="emit set counts for K thresholds instead of predicting",
    )
    ncd_parser = sub.add_parser("ncd", help="NCD between two rendered codepoints")
    ncd_parser.add_argument("--pair", nargs=2, required=True, metavar=("HEXA", "HEXB"))
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = RunConfig.load(args.config)
        if args.seed is not None:
            config.seed = args.seed
        if args.out is not None:
            config.output_dir = args.out
        config.validate()
        if args.command == "render":
            return cmd_render(config)
        if args.command == "eval-pairs":
            return cmd_eval_pairs(config)
        if args.command == "cluster-eval":
            return cmd_cluster_eval(config)
        if args.command == "predict":
            return cmd_predict(config, sweep=args.sweep)
        if args.command == "ncd":
            return cmd_ncd(config, args.pair[0], args.pair[1])
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except DegenerateError as exc:
        print(f"degenerate result: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
