"""Command-line interface.

Subcommands:
  alphabet   export the guess alphabet as CSV
  attack     crack-rate tables for JSONL corpora (CSV + text + figure)
  cluster    saliency-map feature clustering with representative election
  stats      mwu | fisher | ttest | sus | suite on JSONL corpora
  heatmap    click-point heatmap as PGM (+ figure)
  serve      run the study HTTP service
  export     export a study event log as a JSONL corpus
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import clustering, corpus, reports, saliency, stats
from .attacks import DEFAULT_LOD_BASE, AttackSpec, Family, LodMetric, crack_table
from .core import ToleranceConfig, build_alphabet
from .stats import Alternative
from .study.service import StudyConfig, StudyService


def _parse_merge(values):
    merges = {}
    for item in values or []:
        label, _, members = item.partition("=")
        if not members:
            raise SystemExit(f"--merge expects LABEL=G1,G2 got {item!r}")
        merges[label] = [m.strip() for m in members.split(",") if m.strip()]
    return merges


def _attack_specs(args) -> list[AttackSpec]:
    families = [Family(f) for f in args.family]
    specs = []
    for family in families:
        for tau in args.tau:
            specs.append(
                AttackSpec(
                    family,
                    tau,
                    lod_base=args.lod_base,
                    lod_metric=LodMetric(args.lod_metric),
                )
            )
    return specs


def cmd_alphabet(args) -> int:
    a = build_alphabet(args.image_width, args.image_height, ToleranceConfig(args.tolerance))
    out = Path(args.out)
    with open(out, "w", encoding="utf-8") as fh:
        a.to_csv(fh)
    print(f"{len(a)} centres ({a.nx}x{a.ny}) -> {out}")
    return 0


def cmd_attack(args) -> int:
    records = corpus.read_corpus(args.corpus)
    pairs = corpus.attack_corpus(records)
    if not pairs:
        raise SystemExit("corpus contains no passwords")
    alphabet = build_alphabet(args.image_width, args.image_height, ToleranceConfig(args.tolerance))
    specs = _attack_specs(args)
    table = crack_table(pairs, specs, alphabet, merges=_parse_merge(args.merge))
    text = reports.render_crack_text(table, specs)
    print(text, end="")
    prefix = Path(args.out_prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    reports.write_crack_csv(prefix.with_suffix(".csv"), table, specs)
    prefix.with_suffix(".txt").write_text(text, encoding="utf-8")
    reports.write_crack_figure(prefix.with_suffix(".png"), table, specs)
    print(f"wrote {prefix.with_suffix('.csv')}, .txt, .png")
    return 0


def cmd_cluster(args) -> int:
    maps = saliency.load_map_directory(args.maps)
    if len(maps) < 2:
        raise SystemExit(f"need at least 2 maps in {args.maps}")
    features = {image_id: saliency.extract_features(m) for image_id, m in maps.items()}
    matrix, _ = clustering.standardize([features[i] for i in features])
    vectors = {image_id: matrix[idx] for idx, image_id in enumerate(features)}

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    features_csv = out.with_name(out.stem + "_features.csv")
    reports.write_csv(
        features_csv,
        ["image_id", *saliency.FeatureVector.FIELDS],
        [[i, *features[i].as_array().tolist()] for i in features],
    )

    max_k = min(8, len(maps) - 1)
    curve = clustering.inertia_curve(vectors, range(1, max_k + 1), seed=args.seed)
    if args.k == "auto":
        knee = clustering.kneedle_select_k(curve)
        k = knee.k
        knee_info = {"k": knee.k, "max_difference": knee.max_difference, "confident": knee.confident}
    else:
        k = int(args.k)
        knee_info = None
    result = clustering.kmeans(vectors, k, args.seed)
    election = clustering.select_representatives(vectors, k, runs=args.runs, seed0=args.seed)

    payload = {
        "k": k,
        "knee": knee_info,
        "inertia_curve": {str(kk): v for kk, v in curve.items()},
        "inertia": result.inertia,
        "assignments": result.assignments,
        "centroids": [list(c) for c in result.centroids],
        "representatives": {str(c): i for c, i in election.representatives.items()},
        "representative_frequencies": {str(c): f for c, f in election.frequencies.items()},
        "runs": election.runs,
        "standardization": "per-feature z-score (population)",
    }
    reports.dump_json(out, payload)
    reports.write_elbow_figure(out.with_suffix(".png"), curve, k)
    print(f"k={k}; representatives: {election.representatives} -> {out}")
    return 0


def _group_xs(records, group, point_index):
    pws = corpus.passwords_by_group(records).get(group)
    if not pws:
        raise SystemExit(f"group {group!r} not in corpus or has no passwords")
    return pws, [pw.points[point_index - 1].x for pw in pws]


def cmd_stats(args) -> int:
    if args.stat == "sus":
        values = []
        for line in Path(args.corpus).read_text().splitlines():
            if not line.strip():
                continue
            record = json.loads(line)
            if args.field in record and record[args.field] is not None:
                values.append(float(record[args.field]))
        if not values:
            raise SystemExit(f"no {args.field!r} values in corpus")
        arr = np.asarray(values)
        payload = {"n": len(values), "mean": arr.mean(), "sd": arr.std(ddof=1) if len(values) > 1 else 0.0}
        print(json.dumps(payload, indent=2))
        return 0

    records = corpus.read_corpus(args.corpus)
    if args.stat == "suite":
        by_group = corpus.passwords_by_group(records)
        for name in (args.treatment, args.control):
            if name not in by_group:
                raise SystemExit(f"group {name!r} not in corpus")
        report = stats.presentation_hypothesis_suite(
            by_group[args.control],
            by_group[args.treatment],
            args.image_width,
            alternative=Alternative(args.alternative),
            treatment_label=args.treatment,
            control_label=args.control,
        )
        text = reports.render_suite_text(report)
        print(text, end="")
        if args.out:
            out = Path(args.out)
            out.parent.mkdir(parents=True, exist_ok=True)
            reports.dump_json(out, reports.suite_to_json(report))
            out.with_suffix(".txt").write_text(text, encoding="utf-8")
            print(f"wrote {out} and {out.with_suffix('.txt')}")
        return 0

    if args.stat in ("mwu", "fisher"):
        if not args.treatment or not args.control:
            raise SystemExit("--treatment and --control are required")
        pws_t, xs_t = _group_xs(records, args.treatment, args.point)
        pws_c, xs_c = _group_xs(records, args.control, args.point)
        if args.stat == "mwu":
            result = stats.mann_whitney_u(xs_t, xs_c, Alternative(args.alternative))
        else:
            table = stats.make_bin_table(
                [pw.points[args.point - 1] for pw in pws_t],
                [pw.points[args.point - 1] for pw in pws_c],
                args.image_width,
            )
            result = stats.fisher_exact_2x2(table, Alternative(args.alternative))
    elif args.stat == "ttest":
        def numeric(group):
            values = [
                float(r.extras[args.field])
                for r in records
                if r.group == group and r.extras.get(args.field) is not None
            ]
            if len(values) < 2:
                raise SystemExit(f"group {group!r} has fewer than 2 {args.field!r} values")
            return values

        result = stats.student_t_independent(numeric(args.treatment), numeric(args.control))
    else:  # pragma: no cover
        raise SystemExit(f"unknown stat {args.stat}")

    effect_names = {"mwu-exact": "rank-biserial r", "mwu-normal": "rank-biserial r",
                    "fisher-exact": "odds ratio", "t-pooled": "Cohen's d"}
    print(reports.aligned_table(
        ["method", "statistic", "p", effect_names[result.method], "n1", "n2"],
        [[result.method, f"{result.statistic:.4f}", f"{result.p_value:.4f}",
          f"{result.effect_size:.4f}", result.n1, result.n2]],
    ), end="")
    print(json.dumps(result.__dict__, indent=2, default=str))
    return 0


def cmd_heatmap(args) -> int:
    records = corpus.read_corpus(args.corpus)
    pws = corpus.passwords_by_group(records).get(args.group)
    if not pws:
        raise SystemExit(f"group {args.group!r} not in corpus")
    points = [p for pw in pws for p in pw.points]
    grid = stats.heatmap(points, args.width, args.height, sigma=args.sigma)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    saliency.write_pgm(grid, out)
    reports.write_heatmap_figure(
        out.with_suffix(".png"), grid, title=f"{args.group} ({len(pws)} passwords)"
    )
    print(f"wrote {out} and {out.with_suffix('.png')}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .study.api import create_app

    config = StudyConfig.from_json(json.loads(Path(args.config).read_text()))
    service = StudyService(config, log_path=args.log)
    app = create_app(service, image_dir=args.images)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def cmd_export(args) -> int:
    config = StudyConfig.from_json(json.loads(Path(args.config).read_text()))
    service = StudyService(config, log_path=args.log)
    try:
        count = service.export_corpus_jsonl(args.out, filter=args.filter)
    finally:
        service.close()
    print(f"{count} records -> {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="passbench", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("alphabet", help="export the guess alphabet as CSV")
    p.add_argument("--image-width", type=int, default=640)
    p.add_argument("--image-height", type=int, default=480)
    p.add_argument("--tolerance", type=int, default=10)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_alphabet)

    p = sub.add_parser("attack", help="crack-rate tables for a JSONL corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--image-width", type=int, default=640)
    p.add_argument("--image-height", type=int, default=480)
    p.add_argument("--tolerance", type=int, default=10)
    p.add_argument("--family", nargs="+", default=["LOD", "LINE", "DIAG"],
                   choices=[f.value for f in Family])
    p.add_argument("--tau", type=int, nargs="+", default=[0, 21, 42])
    p.add_argument("--lod-base", type=int, default=DEFAULT_LOD_BASE)
    p.add_argument("--lod-metric", default="chebyshev",
                   choices=[m.value for m in LodMetric])
    p.add_argument("--merge", action="append", metavar="LABEL=G1,G2",
                   help="pool groups into an extra row (repeatable)")
    p.add_argument("--out-prefix", default="crack_report")
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("cluster", help="cluster saliency maps and elect representatives")
    p.add_argument("--maps", required=True, help="directory of PGM/PNG saliency maps")
    p.add_argument("--k", default="auto", help="'auto' (knee detection) or an integer")
    p.add_argument("--runs", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="report JSON path")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("stats", help="hypothesis tests on JSONL corpora")
    p.add_argument("stat", choices=["mwu", "fisher", "ttest", "sus", "suite"])
    p.add_argument("--corpus", required=True)
    p.add_argument("--treatment", help="treatment group label")
    p.add_argument("--control", help="control group label")
    p.add_argument("--point", type=int, default=1, choices=[1, 2, 3, 4, 5])
    p.add_argument("--image-width", type=int, default=640)
    p.add_argument("--alternative", default="two-sided",
                   choices=[a.value for a in Alternative])
    p.add_argument("--field", default="sus", help="numeric record field for ttest/sus")
    p.add_argument("--out", help="JSON report path (suite only)")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("heatmap", help="click-point heatmap for one group")
    p.add_argument("--corpus", required=True)
    p.add_argument("--group", required=True)
    p.add_argument("--width", type=int, default=640)
    p.add_argument("--height", type=int, default=480)
    p.add_argument("--sigma", type=float, default=10.0)
    p.add_argument("--out", required=True, help="output PGM path")
    p.set_defaults(func=cmd_heatmap)

    p = sub.add_parser("serve", help="run the study HTTP service")
    p.add_argument("--config", required=True, help="study config JSON")
    p.add_argument("--log", required=True, help="append-only event log (JSONL)")
    p.add_argument("--images", help="static image directory")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("export", help="export an event log as a JSONL corpus")
    p.add_argument("--config", required=True)
    p.add_argument("--log", required=True)
    p.add_argument("--filter", default="qualified", choices=["qualified", "all"])
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
