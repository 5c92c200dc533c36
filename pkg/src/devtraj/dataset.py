"""Ingestion of longitudinal score records.

Input is a CSV with the exact header ``child_id,course,q1,q2,q3,q4,q5,q6``.
Each row is one child's six task scores (0-100) for one course. Rows are
grouped into per-course cohorts, and consecutive courses are aligned on the
children measured in both.
"""

from __future__ import annotations

import csv
import io
import math
import os
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from .errors import (
    CourseOutOfRange,
    DuplicateSession,
    MalformedRow,
    MissingHeader,
    ScoreOutOfRange,
)

HEADER = ("child_id", "course", "q1", "q2", "q3", "q4", "q5", "q6")
SCORE_COLUMNS = HEADER[2:]
N_TASKS = 6
MIN_COURSE = 2
MAX_COURSE = 8


@dataclass(frozen=True)
class SessionRecord:
    child_id: str
    course: int
    q_scores: tuple[float, ...]

    def __post_init__(self):
        if not self.child_id:
            raise ValueError("child_id must be non-empty")
        if not MIN_COURSE <= self.course <= MAX_COURSE:
            raise ValueError(f"course {self.course} outside {MIN_COURSE}..{MAX_COURSE}")
        scores = tuple(float(q) for q in self.q_scores)
        if len(scores) != N_TASKS:
            raise ValueError(f"expected {N_TASKS} scores, got {len(scores)}")
        if not all(0.0 <= q <= 100.0 for q in scores):
            raise ValueError(f"scores must lie in [0, 100]: {scores}")
        object.__setattr__(self, "q_scores", scores)


@dataclass(frozen=True)
class Cohort:
    """All children measured in one course, in first-appearance order."""

    course: int
    records: tuple[SessionRecord, ...]

    def __post_init__(self):
        seen = set()
        for rec in self.records:
            if rec.course != self.course:
                raise ValueError(f"record for {rec.child_id} has course {rec.course}, cohort is {self.course}")
            if rec.child_id in seen:
                raise DuplicateSession(rec.child_id, rec.course)
            seen.add(rec.child_id)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def child_ids(self) -> list[str]:
        return [r.child_id for r in self.records]

    def scores(self) -> np.ndarray:
        """The cohort's score matrix, shape (n, 6)."""
        if not self.records:
            return np.zeros((0, N_TASKS))
        return np.array([r.q_scores for r in self.records], dtype=float)


@dataclass(frozen=True)
class AlignedPair:
    course_from: int
    course_to: int
    children: tuple[tuple[str, SessionRecord, SessionRecord], ...]

    def __post_init__(self):
        if self.course_to != self.course_from + 1:
            raise ValueError("aligned pairs must span consecutive courses")

    @property
    def child_ids(self) -> list[str]:
        return [c[0] for c in self.children]


def _parse_score(text: str, line: int, column: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise MalformedRow(line, f"{column} is not a number: {text!r}") from None
    if not math.isfinite(value) or not 0.0 <= value <= 100.0:
        raise ScoreOutOfRange(line, column, value)
    return value


def parse_lines(lines: Iterable[str]) -> list[SessionRecord]:
    """Parse CSV text lines (header included) into validated records."""
    reader = csv.reader(lines)
    try:
        header = next(reader)
    except StopIteration:
        raise MissingHeader() from None
    if tuple(h.strip() for h in header) != HEADER:
        raise MissingHeader(",".join(header))

    records: list[SessionRecord] = []
    seen: set[tuple[str, int]] = set()
    for row in reader:
        line = reader.line_num
        if not row or all(not f.strip() for f in row):
            continue
        if len(row) != len(HEADER):
            raise MalformedRow(line, f"expected {len(HEADER)} fields, got {len(row)}")
        fields = [f.strip() for f in row]
        child_id = fields[0]
        if not child_id:
            raise MalformedRow(line, "empty child_id")
        try:
            course = int(fields[1])
        except ValueError:
            raise MalformedRow(line, f"course is not an integer: {fields[1]!r}") from None
        if not MIN_COURSE <= course <= MAX_COURSE:
            raise CourseOutOfRange(line, course)
        scores = tuple(_parse_score(text, line, col) for text, col in zip(fields[2:], SCORE_COLUMNS))
        key = (child_id, course)
        if key in seen:
            raise DuplicateSession(child_id, course, line)
        seen.add(key)
        records.append(SessionRecord(child_id, course, scores))
    return records


def parse_csv(path: str | os.PathLike) -> list[SessionRecord]:
    # utf-8-sig tolerates a BOM; newline="" lets csv handle LF and CRLF alike.
    with open(path, encoding="utf-8-sig", newline="") as fh:
        return parse_lines(fh)


def format_records(records: Iterable[SessionRecord]) -> str:
    """Serialize records to CSV text; floats use repr so parsing is lossless."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(HEADER)
    for rec in records:
        writer.writerow([rec.child_id, rec.course, *(repr(q) for q in rec.q_scores)])
    return buf.getvalue()


def write_csv(records: Iterable[SessionRecord], path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(format_records(records))


def build_cohorts(records: Sequence[SessionRecord]) -> dict[int, Cohort]:
    grouped: dict[int, list[SessionRecord]] = {}
    for rec in records:
        grouped.setdefault(rec.course, []).append(rec)
    return {course: Cohort(course, tuple(grouped[course])) for course in sorted(grouped)}


def align_consecutive(cohorts: Mapping[int, Cohort]) -> list[AlignedPair]:
    """Pair every course c with c + 1 when both cohorts exist.

    Children are matched on ``child_id`` and kept in the earlier cohort's
    order. Children missing either year are simply left out.
    """
    pairs = []
    for course in sorted(cohorts):
        nxt = cohorts.get(course + 1)
        if nxt is None:
            continue
        later = {r.child_id: r for r in nxt.records}
        children = tuple(
            (r.child_id, r, later[r.child_id]) for r in cohorts[course].records if r.child_id in later
        )
        pairs.append(AlignedPair(course, course + 1, children))
    return pairs
