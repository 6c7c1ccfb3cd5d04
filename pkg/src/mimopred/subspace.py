"""Sample covariance, model-order selection and signal/noise subspace split."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ContractError
from .numkernel import hermitian_eig
from .stacking import StackedData

EIG_FLOOR = 1e-300


@dataclass(frozen=True)
class SubspaceSplit:
    signal_basis: np.ndarray
    noise_basis: np.ndarray | None
    signal_eigvals: np.ndarray
    noise_eigvals: np.ndarray
    noise_var_hat: float

    @property
    def z_hat(self) -> int:
        return self.signal_basis.shape[1]


def covariance(stacked: StackedData) -> np.ndarray:
    x = stacked.matrix
    return (x @ x.conj().T) / stacked.snapshot_scale


def spectrum(stacked: StackedData):
    """Non-zero eigenpairs of the covariance without forming it.

    Returns ``(eigvals_desc, vectors, trace)``. The covariance has rank at most
    ``min(rows, cols)``; the remaining eigenvalues are exactly zero, so a thin
    SVD of the data matrix gives the whole non-trivial spectrum.
    """
    x = stacked.matrix
    u, sv, _ = np.linalg.svd(x, full_matrices=False)
    scale = stacked.snapshot_scale
    return sv**2 / scale, u, float(np.sum(np.abs(x) ** 2) / scale)


def mdl_criterion(eigvals_desc, n_snapshots: int, max_order: int) -> np.ndarray:
    """MMSE-MDL cost for ``z = 1 .. max_order``.

    ``eigvals_desc[z]`` (zero-based) is the largest eigenvalue left outside a
    ``z``-dimensional signal subspace.
    """
    lam = np.maximum(np.asarray(eigvals_desc, dtype=float), EIG_FLOOR)
    z = np.arange(1, max_order + 1)
    return n_snapshots * np.log(lam[z]) + 0.5 * (z**2 + z) * np.log(n_snapshots)


def estimate_order(eigvals_desc, n_snapshots: int, max_order: int | None = None) -> int:
    eigvals_desc = np.asarray(eigvals_desc, dtype=float)
    if eigvals_desc.size == 0:
        raise ContractError("empty eigenvalue list")
    if eigvals_desc.size < 2:
        return 1
    if max_order is None:
        max_order = eigvals_desc.size - 1
    if not 1 <= max_order <= eigvals_desc.size - 1:
        raise ContractError(f"max_order must be in [1, {eigvals_desc.size - 1}], got {max_order}")
    if np.any(np.diff(eigvals_desc) > 1e-12 * max(abs(eigvals_desc[0]), 1e-300)):
        raise ContractError("eigenvalues must be sorted in descending order")
    cost = mdl_criterion(eigvals_desc, n_snapshots, max_order)
    return int(np.argmin(cost)) + 1


def default_max_order(n_eigs: int, z_hint: int | None = None) -> int:
    cap = n_eigs - 1
    if z_hint is not None:
        cap = min(cap, 2 * z_hint)
    return max(cap, 1)


def split(c: np.ndarray, z_hat: int) -> SubspaceSplit:
    dim = c.shape[0]
    if not 1 <= z_hat < dim:
        raise ContractError(f"z_hat must be in [1, {dim - 1}], got {z_hat}")
    w, v = hermitian_eig(c)
    noise = w[z_hat:]
    return SubspaceSplit(v[:, :z_hat], v[:, z_hat:], w[:z_hat], noise, float(np.mean(noise)))


def split_stacked(stacked: StackedData, z_hat: int, spec=None) -> SubspaceSplit:
    """Signal subspace straight from the data matrix.

    ``noise_basis`` is not formed (it can be thousands of columns wide);
    ``noise_eigvals`` lists the non-zero remainder and ``noise_var_hat`` is the
    mean over every noise eigenvalue, structural zeros included.
    """
    w, u, trace = spec if spec is not None else spectrum(stacked)
    dim = stacked.matrix.shape[0]
    if not 1 <= z_hat < dim or z_hat > len(w):
        raise ContractError(f"z_hat={z_hat} out of range for a rank-{len(w)} covariance")
    noise_var = (trace - float(np.sum(w[:z_hat]))) / (dim - z_hat)
    return SubspaceSplit(u[:, :z_hat], None, w[:z_hat], w[z_hat:], max(noise_var, 0.0))
