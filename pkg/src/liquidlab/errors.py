"""Exception types raised across the package."""


class LiquidLabError(Exception):
    """Base class for all package errors."""


class EmptyMesh(LiquidLabError):
    """Operation requires a mesh with vertices/faces."""


class VolumeUndefined(LiquidLabError):
    """Signed volume requested for a non-watertight mesh."""


class VoxelizationUndefined(LiquidLabError):
    """Inside/outside test requested for a non-watertight mesh."""


class BadContainerSpec(LiquidLabError):
    """Container dimensions or wall thickness are invalid."""


class Overfill(LiquidLabError):
    """Requested liquid volume exceeds the container cavity."""


class ParticleLimit(LiquidLabError):
    """Seeding would exceed the configured particle cap."""


class NonConverged(LiquidLabError):
    """Pressure solve did not reach tolerance within max iterations."""

    def __init__(self, residual, iterations):
        super().__init__(
            f"pressure solve stalled at residual {residual:.3e} "
            f"after {iterations} iterations"
        )
        self.residual = residual
        self.iterations = iterations


class NumericalBlowup(LiquidLabError):
    """NaN/Inf detected in the simulation state."""

    def __init__(self, frame=None, substep=None):
        where = f"frame {frame}, substep {substep}"
        super().__init__(f"non-finite values in simulation state ({where})")
        self.frame = frame
        self.substep = substep


class InsufficientParticles(LiquidLabError):
    """Too few particles for a statistical measurement."""


class EmptyField(LiquidLabError):
    """Scalar field construction got no particles."""


class FrameOutOfRange(LiquidLabError):
    """Frame index outside the schedule."""


class BadRig(LiquidLabError):
    """Camera rig does not contain exactly the six expected views."""


class ParseError(LiquidLabError):
    """Malformed OBJ/PGM/JSON input."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ShapeMismatch(LiquidLabError):
    """Two inputs that must have equal dimensions do not."""


class TooFewSequences(LiquidLabError):
    """Dataset split needs at least two sequences."""


class BadDims(LiquidLabError):
    """Axis extents must all be positive."""


class BadReference(LiquidLabError):
    """Reference values for a relative error contain zeros."""


class IdMismatch(LiquidLabError):
    """Ground-truth and prediction directories disagree on item ids."""

    def __init__(self, missing_pred=(), missing_gt=()):
        self.missing_pred = sorted(missing_pred)
        self.missing_gt = sorted(missing_gt)
        parts = []
        if self.missing_pred:
            parts.append(f"missing predictions: {', '.join(self.missing_pred)}")
        if self.missing_gt:
            parts.append(f"missing ground truth: {', '.join(self.missing_gt)}")
        super().__init__("; ".join(parts) or "id mismatch")
