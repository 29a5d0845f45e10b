"""Exception types shared across the pipeline.

Every error raised on purpose derives from RelscopeError so the CLI can
map validation failures to exit code 1 while real I/O failures (OSError)
keep exit code 2.
"""


class RelscopeError(Exception):
    """Base class for all pipeline errors."""


class InputError(RelscopeError):
    """Malformed or out-of-contract input values."""


class IngestError(InputError):
    """A data file failed validation; carries file and line context."""

    def __init__(self, path, line_no, message):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = str(path)
        self.line_no = line_no


class UnknownRelationError(InputError):
    """A relation string matched neither a canonical name nor an alias."""

    def __init__(self, name, candidates=()):
        hint = f" (closest: {', '.join(candidates)})" if candidates else ""
        super().__init__(f"unknown relation name {name!r}{hint}")
        self.name = name
        self.candidates = tuple(candidates)


class ShapeError(RelscopeError):
    """Array shape does not match the expected shape."""

    def __init__(self, expected, actual, what="array"):
        super().__init__(f"{what}: expected shape {tuple(expected)}, got {tuple(actual)}")
        self.expected = tuple(expected)
        self.actual = tuple(actual)


class MissingFeatureError(RelscopeError):
    """A requested feature block is absent for a pair."""

    def __init__(self, pair_id, kind):
        super().__init__(f"missing feature block {kind!r} for pair {pair_id!r}")
        self.pair_id = pair_id
        self.kind = kind


class SplitError(RelscopeError):
    """Split generation preconditions violated."""


class TrainError(RelscopeError):
    """Classifier training cannot proceed or diverged."""


class EvalError(RelscopeError):
    """Evaluation inputs are inconsistent."""


class SpecError(RelscopeError):
    """A synthetic corpus specification is infeasible."""
