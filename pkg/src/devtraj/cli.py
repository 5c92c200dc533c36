"""Command-line entry point.

    devtraj analyze --input panel.csv --out results/ [--seed N] [--perplexity P]
                    [--k K] [--k-max 6] [--cluster-space embedding|raw]
    devtraj simulate [--config sim.json] --out sim/ [--seed N]
    devtraj transitions --input results/ --out tables/
    devtraj version

Exit codes: 0 success, 1 invalid input or configuration, 2 I/O failure.
"""

from __future__ import annotations

import argparse
import datetime as dt
import hashlib
import json
import logging
import os
import sys
from collections.abc import Sequence

from . import __version__
from .dataset import format_records, parse_csv
from .errors import ToolkitError
from .export import (
    PROFILE_HEADER,
    assignments_csv,
    atomic_write,
    csv_text,
    embedding_csv,
    embedding_sidecar,
    inertia_csv,
    mobility_csv,
    model_json,
    profile_rows,
    profiles_csv,
    read_assignments_csv,
    sha256_file,
    stability_csv,
    to_json,
    transitions_json,
)
from .longitudinal import consecutive_transitions
from .pipeline import CLUSTER_SPACES, AnalysisOptions, analyze_panel, summarize_transitions
from .seeding import derive_seed
from .simulate import SimConfig, simulate_panel
from .svg import render_scatter_svg

log = logging.getLogger("devtraj")

MANIFEST = "manifest.json"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="devtraj", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("analyze", help="embed, cluster and track a score panel")
    a.add_argument("--input", required=True, help="panel CSV (child_id,course,q1..q6)")
    a.add_argument("--out", required=True, help="output directory")
    a.add_argument("--seed", type=_seed, default=0)
    a.add_argument("--perplexity", type=float, default=None)
    a.add_argument("--k", type=int, default=None, help="fixed cluster count (skips elbow selection)")
    a.add_argument("--k-max", type=int, default=6, help="largest k on the elbow curve")
    a.add_argument("--cluster-space", choices=CLUSTER_SPACES, default="embedding")
    a.add_argument("--record-time", action="store_true", help="add wall-clock times to the manifest")

    s = sub.add_parser("simulate", help="generate a synthetic panel with ground truth")
    s.add_argument("--config", default=None, help="JSON simulation config (defaults if omitted)")
    s.add_argument("--out", required=True)
    s.add_argument("--seed", type=_seed, default=None, help="override the config seed")
    s.add_argument("--record-time", action="store_true")

    t = sub.add_parser("transitions", help="recompute mobility/stability tables from stored assignments")
    t.add_argument("--input", required=True, help="output directory of a previous analyze run")
    t.add_argument("--out", required=True)
    t.add_argument("--record-time", action="store_true")

    sub.add_parser("version", help="print the toolkit version")
    return parser


def _now() -> str:
    return dt.datetime.now(dt.timezone.utc).replace(microsecond=0).isoformat()


def _mtime(path: str) -> str:
    ts = os.stat(path).st_mtime
    return dt.datetime.fromtimestamp(int(ts), dt.timezone.utc).isoformat()


class _Writer:
    """Collects written files so the manifest can list them."""

    def __init__(self, root: str):
        self.root = root
        self.files: list[str] = []
        os.makedirs(root, exist_ok=True)

    def write(self, rel: str, text: str) -> None:
        path = os.path.join(self.root, rel)
        os.makedirs(os.path.dirname(path), exist_ok=True)
        atomic_write(path, text)
        self.files.append(rel)

    def manifest(self, body: dict) -> None:
        body = dict(body)
        body["files"] = {rel: sha256_file(os.path.join(self.root, rel)) for rel in sorted(self.files)}
        atomic_write(os.path.join(self.root, MANIFEST), to_json(body))


def _run_id(*parts) -> str:
    return hashlib.sha256(json.dumps(parts, sort_keys=True, default=str).encode()).hexdigest()[:16]


def cmd_analyze(args) -> int:
    started = _now() if args.record_time else None
    digest = sha256_file(args.input)
    records = parse_csv(args.input)
    options = AnalysisOptions(
        seed=args.seed, perplexity=args.perplexity, k=args.k, k_max=args.k_max, cluster_space=args.cluster_space
    )
    panel = analyze_panel(records, options)

    params = {
        "seed": args.seed,
        "perplexity": args.perplexity,
        "k": args.k,
        "k_max": args.k_max,
        "cluster_space": args.cluster_space,
    }
    run_id = _run_id(__version__, digest, params)
    out = _Writer(args.out)
    all_profiles = []
    for course, res in panel.courses.items():
        d = f"course_{course:02d}"
        out.write(f"{d}/embedding.csv", embedding_csv(res.embedding))
        out.write(f"{d}/embedding.json", embedding_sidecar(res.embedding, course=course, run_id=run_id))
        out.write(f"{d}/inertia.csv", inertia_csv(res.curve))
        out.write(
            f"{d}/model.json",
            model_json(
                res.model,
                res.ranks,
                course=course,
                run_id=run_id,
                cluster_space=args.cluster_space,
                selected_by="override" if args.k is not None else "elbow",
            ),
        )
        out.write(f"{d}/assignments.csv", assignments_csv(res.cohort.child_ids, res.model.assignments))
        out.write(f"{d}/profiles.csv", profiles_csv(res.profiles, course))
        names = {p.tier.rank: p.tier.name for p in res.profiles}
        out.write(
            f"{d}/scatter.svg",
            render_scatter_svg(res.embedding.coords, res.point_tiers, names, title=f"Course {course}"),
        )
        all_profiles.extend(profile_rows(res.profiles, course))
    out.write("profiles.csv", csv_text(PROFILE_HEADER, all_profiles))
    out.write("mobility.csv", mobility_csv(panel.mobility))
    out.write("stability.csv", stability_csv(panel.stability))
    out.write("transitions.json", transitions_json(panel.transitions))

    timestamps = {"input_modified": _mtime(args.input)}
    if started:
        timestamps.update(run_started=started, run_finished=_now())
    out.manifest(
        {
            "toolkit": "devtraj",
            "version": __version__,
            "command": "analyze",
            "run_id": run_id,
            "input": {"path": os.path.basename(args.input), "sha256": digest, "records": len(records)},
            "params": {
                **params,
                "tsne": options.tsne.to_dict() | {"perplexity": args.perplexity, "seed": None},
                "kmeans": options.kmeans.to_dict() | {"seed": None, "k": None},
            },
            "seeds": {
                str(c): {"tsne": derive_seed(args.seed, "tsne", c), "kmeans": derive_seed(args.seed, "kmeans", c)}
                for c in panel.courses
            },
            "perplexity_used": {str(c): r.embedding.params.perplexity for c, r in panel.courses.items()},
            "selected_k": {str(c): r.k for c, r in panel.courses.items()},
            "skipped_transitions": [f"{a}-{b}" for a, b in panel.skipped_transitions],
            "timestamps": timestamps,
        }
    )
    print(f"analyzed {len(records)} records in {len(panel.courses)} courses -> {args.out}")
    return 0


def cmd_simulate(args) -> int:
    started = _now() if args.record_time else None
    if args.config is not None:
        with open(args.config, encoding="utf-8") as fh:
            try:
                raw = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ToolkitError(f"config is not valid JSON: {exc}") from exc
    else:
        raw = {}
    if args.seed is not None:
        raw = {**raw, "seed": args.seed}
    config = SimConfig.from_dict(raw)
    records, truth = simulate_panel(config)

    out = _Writer(args.out)
    out.write("panel.csv", format_records(records))
    out.write("ground_truth.csv", truth.to_csv())
    out.write("config.json", to_json(config.to_dict()))
    timestamps = {}
    if started:
        timestamps.update(run_started=started, run_finished=_now())
    out.manifest(
        {
            "toolkit": "devtraj",
            "version": __version__,
            "command": "simulate",
            "run_id": _run_id(__version__, config.to_dict()),
            "config_source": os.path.basename(args.config) if args.config else None,
            "seeds": {"simulation": config.seed},
            "records": len(records),
            "timestamps": timestamps,
        }
    )
    print(f"simulated {len(records)} records for {config.n_children} children -> {args.out}")
    return 0


def _load_course_dirs(root: str):
    tiers, ks = {}, {}
    for name in sorted(os.listdir(root)):
        if not name.startswith("course_"):
            continue
        course = int(name.split("_", 1)[1])
        with open(os.path.join(root, name, "model.json"), encoding="utf-8") as fh:
            model = json.load(fh)
        with open(os.path.join(root, name, "assignments.csv"), encoding="utf-8") as fh:
            assignments = read_assignments_csv(fh.read())
        ranks = model.get("tier_ranks")
        if ranks is None or len(ranks) != model["k"]:
            raise ToolkitError(f"{name}/model.json lacks tier_ranks for k={model['k']}")
        ks[course] = int(model["k"])
        tiers[course] = {cid: int(ranks[c]) for cid, c in assignments.items()}
    if not tiers:
        raise ToolkitError(f"no course_XX directories under {root}")
    return tiers, ks


def cmd_transitions(args) -> int:
    started = _now() if args.record_time else None
    tiers, ks = _load_course_dirs(args.input)
    matrices = consecutive_transitions(tiers, ks)
    mobility, stability, skipped = summarize_transitions(matrices)
    out = _Writer(args.out)
    out.write("mobility.csv", mobility_csv(mobility))
    out.write("stability.csv", stability_csv(stability))
    out.write("transitions.json", transitions_json(matrices))
    source = os.path.join(args.input, MANIFEST)
    timestamps = {}
    if started:
        timestamps.update(run_started=started, run_finished=_now())
    out.manifest(
        {
            "toolkit": "devtraj",
            "version": __version__,
            "command": "transitions",
            "source_manifest_sha256": sha256_file(source) if os.path.exists(source) else None,
            "selected_k": {str(c): k for c, k in ks.items()},
            "skipped_transitions": [f"{a}-{b}" for a, b in skipped],
            "timestamps": timestamps,
        }
    )
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s"
    )
    if args.command == "version":
        print(f"devtraj {__version__}")
        return 0
    handler = {"analyze": cmd_analyze, "simulate": cmd_simulate, "transitions": cmd_transitions}[args.command]
    try:
        return handler(args)
    except ValueError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
