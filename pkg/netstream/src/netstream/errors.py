class NetstreamError(Exception):
    """Base class for network errors."""


class ShapeError(NetstreamError):
    def __init__(self, expected, actual, what="array"):
        super().__init__(f"{what}: expected shape {tuple(expected)}, got {tuple(actual)}")
        self.expected = tuple(expected)
        self.actual = tuple(actual)


class TrainError(NetstreamError):
    """Training diverged or cannot start."""
