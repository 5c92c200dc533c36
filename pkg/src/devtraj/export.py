"""Serialization of pipeline artifacts.

CSV is UTF-8 with LF endings; JSON is pretty-printed with sorted keys so
identical inputs give identical bytes. Files are written to a temporary
sibling and renamed into place.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import tempfile
from collections.abc import Iterable, Sequence

import numpy as np

from .kmeans import ClusterModel
from .longitudinal import MobilitySummary, StabilityTable, TransitionMatrix
from .profiles import ClusterProfile
from .tsne import Embedding2D


def atomic_write(path: str | os.PathLike, text: str) -> None:
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def sha256_file(path: str | os.PathLike) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def to_json(obj) -> str:
    return json.dumps(_plain(obj), indent=2, sort_keys=True) + "\n"


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def embedding_csv(emb: Embedding2D) -> str:
    return csv_text(("child_id", "x", "y"), ((c, repr(float(x)), repr(float(y))) for c, (x, y) in zip(emb.child_ids, emb.coords)))


def embedding_sidecar(emb: Embedding2D, **extra) -> str:
    return to_json({"params": emb.params.to_dict(), "final_kl": emb.final_kl, "n": len(emb.child_ids), **extra})


def model_json(model: ClusterModel, tier_ranks: Sequence[int] | None = None, **extra) -> str:
    body = {
        "k": model.k,
        "centroids": model.centroids,
        "inertia": model.inertia,
        "params": model.params.to_dict(),
        **extra,
    }
    if tier_ranks is not None:
        body["tier_ranks"] = list(tier_ranks)
    return to_json(body)


def assignments_csv(child_ids: Sequence[str], assignments: Sequence[int]) -> str:
    return csv_text(("child_id", "cluster"), zip(child_ids, (int(a) for a in assignments)))


def read_assignments_csv(text: str) -> dict[str, int]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != ["child_id", "cluster"]:
        raise ValueError("assignment CSV must start with 'child_id,cluster'")
    return {row[0].strip(): int(row[1]) for row in reader if row}


def inertia_csv(curve: Sequence[tuple[int, float]]) -> str:
    return csv_text(("k", "inertia"), ((k, repr(float(i))) for k, i in curve))


PROFILE_HEADER = ("cluster", "tier", "q1", "q2", "q3", "q4", "q5", "q6", "pct", "course")


def profile_rows(profiles: Sequence[ClusterProfile], course: int) -> list[list[str]]:
    rows = []
    for p in profiles:
        tier = p.tier.name if p.tier is not None else ""
        rows.append([str(p.cluster_index), tier, *(f"{q:.2f}" for q in p.mean_q), f"{p.share_pct:.2f}", f"{course:02d}"])
    return rows


def profiles_csv(profiles: Sequence[ClusterProfile], course: int) -> str:
    return csv_text(PROFILE_HEADER, profile_rows(profiles, course))


def mobility_csv(summaries: Sequence[MobilitySummary]) -> str:
    return csv_text(
        ("course_from", "course_to", "stable", "improving", "declining"),
        (
            (s.course_from, s.course_to, f"{s.stable_pct:.1f}", f"{s.improving_pct:.1f}", f"{s.declining_pct:.1f}")
            for s in summaries
        ),
    )


def stability_csv(tables: Sequence[StabilityTable]) -> str:
    """One row per (transition, tier); tiers absent from a source year stay empty."""
    width = max((len(t.per_tier) for t in tables), default=0)
    rows = []
    for t in tables:
        for tier in range(width):
            v = t.per_tier.get(tier)
            rows.append((t.course_from, t.course_to, tier, "" if v is None else f"{v:.1f}"))
    return csv_text(("course_from", "course_to", "tier", "stability"), rows)


def transitions_json(matrices: Sequence[TransitionMatrix]) -> str:
    return to_json(
        {
            "transitions": [
                {
                    "course_from": m.course_from,
                    "course_to": m.course_to,
                    "k_from": m.k_from,
                    "k_to": m.k_to,
                    "counts": m.counts,
                    "probabilities": m.probabilities,
                    "empty_rows": list(m.empty_rows),
                }
                for m in matrices
            ]
        }
    )
