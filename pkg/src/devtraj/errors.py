"""Exception types raised across the toolkit.

Everything a user can trigger with bad input derives from ``ToolkitError``
(itself a ``ValueError``) so the CLI can map it to exit code 1.
"""

from __future__ import annotations


class ToolkitError(ValueError):
    """Base class for validation and precondition failures."""


# -- dataset -----------------------------------------------------------------


class DatasetError(ToolkitError):
    pass


class MissingHeader(DatasetError):
    def __init__(self, found: str | None = None):
        self.found = found
        detail = "empty file" if found is None else f"got {found!r}"
        super().__init__(f"missing or wrong header ({detail})")


class MalformedRow(DatasetError):
    def __init__(self, line: int, reason: str):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: malformed row ({reason})")


class ScoreOutOfRange(DatasetError):
    def __init__(self, line: int, column: str, value: float):
        self.line = line
        self.column = column
        self.value = value
        super().__init__(f"line {line}: {column}={value!r} outside [0, 100]")


class CourseOutOfRange(DatasetError):
    def __init__(self, line: int, course: int):
        self.line = line
        self.course = course
        super().__init__(f"line {line}: course {course} outside 2..8")


class DuplicateSession(DatasetError):
    def __init__(self, child_id: str, course: int, line: int | None = None):
        self.child_id = child_id
        self.course = course
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}duplicate session for child {child_id!r} in course {course}")


# -- embedding ---------------------------------------------------------------


class DegenerateInput(ToolkitError):
    pass


class ShapeMismatch(ToolkitError):
    pass


class CalibrationFailed(ToolkitError):
    def __init__(self, row: int):
        self.row = row
        super().__init__(f"perplexity calibration failed for row {row}: all distances are zero")


class CohortTooSmall(ToolkitError):
    def __init__(self, n: int, minimum: int = 4, course: int | None = None):
        self.n = n
        self.minimum = minimum
        self.course = course
        which = f"course {course} " if course is not None else ""
        super().__init__(f"{which}cohort has {n} children, need at least {minimum}")


class PerplexityInfeasible(ToolkitError):
    def __init__(self, perplexity: float, n: int):
        self.perplexity = perplexity
        self.n = n
        super().__init__(f"perplexity {perplexity} must be < n - 1 = {n - 1}")


# -- clustering --------------------------------------------------------------


class TooFewDistinctPoints(ToolkitError):
    def __init__(self, k: int, distinct: int):
        self.k = k
        self.distinct = distinct
        super().__init__(f"k={k} but only {distinct} distinct points")


class CurveTooShort(ToolkitError):
    def __init__(self, length: int):
        self.length = length
        super().__init__(f"elbow selection needs >= 3 curve entries, got {length}")


# -- longitudinal ------------------------------------------------------------


class ChildMissingAssignment(ToolkitError):
    def __init__(self, child_id: str, course: int):
        self.child_id = child_id
        self.course = course
        super().__init__(f"child {child_id!r} has no tier assignment in course {course}")


class EmptyPair(ToolkitError):
    def __init__(self, course_from: int, course_to: int):
        self.course_from = course_from
        self.course_to = course_to
        super().__init__(f"no aligned children for transition {course_from} -> {course_to}")


# -- simulation --------------------------------------------------------------


class ConfigError(ToolkitError):
    pass


class LengthMismatch(ToolkitError):
    pass
