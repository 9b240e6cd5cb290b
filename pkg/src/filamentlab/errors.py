"""Exception types shared across the package."""


class FilamentLabError(Exception):
    """Base class for all package errors."""


class NonSimpleConfiguration(FilamentLabError):
    """Two points of a configuration coincide (or sit below resolution)."""


class PointOutsideDomain(FilamentLabError):
    """An evaluation or source point lies outside the cross-section."""


class SingularPoint(FilamentLabError):
    """Evaluation requested exactly at a field singularity."""


class NonConvergence(FilamentLabError):
    """An iterative calibration failed to stabilize below tolerance."""


class InvalidParameters(FilamentLabError):
    """Reference-solution or scenario parameters are out of range."""


class CollisionImminent(FilamentLabError):
    """Filament separation fell below the collision threshold.

    Carries the time and separation at which the integrator gave up.
    """

    def __init__(self, t, rho, threshold):
        self.t = t
        self.rho = rho
        self.threshold = threshold
        super().__init__(
            f"filament separation {rho:.3e} below threshold {threshold:.3e} at t={t:.6g}"
        )


class FilamentTooCloseToBoundary(FilamentLabError):
    """Initial filament positions violate the core-to-boundary margin."""


class RadiusTooLarge(FilamentLabError):
    """Cutoff radius exceeds a quarter of the minimal separation."""


class SolverFailure(FilamentLabError):
    """A linear-program or linear-algebra solve did not certify optimality."""

    def __init__(self, message, gap=None):
        self.gap = gap
        super().__init__(message if gap is None else f"{message} (gap={gap:.3e})")


class FormatError(FilamentLabError):
    """A checkpoint file is malformed or inconsistent with its header."""


class VersionMismatch(FilamentLabError):
    """A checkpoint file uses an unsupported container version."""


class TimeGridMismatch(FilamentLabError):
    """Two trajectories do not share the same observation times."""
