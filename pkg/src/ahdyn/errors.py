"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid parameters, unknown config keys, or out-of-range values."""


class StabilityError(ValueError):
    """A numerical precondition is violated (rate*dt bounds, under-resolved kernels)."""


class FitError(ValueError):
    """A spectral or relaxation fit failed or the data do not match the model class."""


class TrajectoryError(RuntimeError):
    """A trajectory became non-finite during propagation; carries the trajectory index."""

    def __init__(self, message: str, traj_index: int = -1):
        super().__init__(message)
        self.traj_index = traj_index
