"""Exception types shared across the pipeline.

Every error raised inside :func:`pnas3d.anomaly.synthesize` carries the name
of the pipeline stage it came from in ``stage`` (set by the pipeline, not by
the raising module).
"""

from __future__ import annotations


class PnasError(Exception):
    """Base class for all library errors."""

    stage: str | None = None

    def with_stage(self, stage: str) -> "PnasError":
        self.stage = stage
        self.args = (f"[{stage}] {self.args[0]}",) if self.args else (f"[{stage}]",)
        return self


class GeometryError(PnasError):
    """Input geometry cannot support the requested computation."""


class EmptyValidSet(GeometryError):
    """No point in the cloud passed the validity filter."""


class ShapeMismatch(GeometryError):
    """Replacement coordinates do not match the valid subset."""


class TooFewPoints(GeometryError):
    """Fewer points than the operation requires."""


class DegenerateGeometry(GeometryError):
    """Valid points are rank-deficient (collinear or coincident)."""


class DegenerateBounds(GeometryError):
    """Projected bounds have zero extent on an axis."""


class InvalidThreshold(GeometryError):
    """A threshold >= 1 reached local normalization."""


class ParseError(PnasError):
    """A cloud file could not be parsed; message carries line/byte offset."""


class UnsupportedPropertyWarning(UserWarning):
    """Non-vertex PLY content was skipped."""
