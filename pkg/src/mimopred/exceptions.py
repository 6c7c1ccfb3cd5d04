"""Exception and warning types raised across the package."""

import numpy as np


class ContractError(ValueError):
    """An input violates a documented precondition."""


class DimensionError(ValueError):
    """Array shapes or window sizes are inconsistent."""


class ConfigError(ValueError):
    """A configuration file or object is invalid."""


class SingularityError(np.linalg.LinAlgError):
    """A linear system has no unique solution."""


class RankError(np.linalg.LinAlgError):
    """A shift-invariance system is rank deficient, so sources are unresolvable."""


class UnderdeterminedError(ValueError):
    """More unknowns than observations in an amplitude fit."""


class PairingError(np.linalg.LinAlgError):
    """Joint diagonalization failed to produce a usable eigenvector basis."""


class NearDefectiveWarning(RuntimeWarning):
    """An eigenvector matrix is badly conditioned; eigenpairs are returned anyway."""


class StageError(RuntimeError):
    """Wraps a failure inside :func:`mimopred.predictor.fit` with the stage name."""

    def __init__(self, stage, cause):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause
