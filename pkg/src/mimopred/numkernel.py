"""Dense complex linear-algebra kernels.

Matrices are plain 2-D numpy arrays. ``vec`` stacks columns throughout the
package, so ``vec(a @ b.T) == kron(b, a)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .exceptions import ContractError, DimensionError, NearDefectiveWarning, SingularityError

HERMITIAN_RTOL = 1e-10
DEFECTIVE_CEILING = 1e10


@dataclass(frozen=True)
class EigenDecomposition:
    values: np.ndarray
    vectors: np.ndarray
    is_hermitian_input: bool
    condition: float = 1.0

    def __iter__(self):
        # allows ``values, vectors = hermitian_eig(C)``
        yield self.values
        yield self.vectors


def _as_matrix(a, name="matrix"):
    a = np.asarray(a)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise DimensionError(f"{name} must be a non-empty 2-D array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ContractError(f"{name} has non-finite entries")
    return a


def vec(a):
    """Column-stacking vectorization."""
    return np.asarray(a).reshape(-1, order="F")


def unvec(v, rows, cols):
    return np.asarray(v).reshape(rows, cols, order="F")


def kron(a, b):
    """Kronecker product; ``result[i*p + k, j*q + l] == a[i, j] * b[k, l]``."""
    a = _as_matrix(a, "A")
    b = _as_matrix(b, "B")
    return np.kron(a, b)


def khatri_rao(*mats):
    """Column-wise Kronecker product of matrices with equal column counts."""
    if not mats:
        raise DimensionError("khatri_rao needs at least one matrix")
    mats = [_as_matrix(m) for m in mats]
    cols = mats[0].shape[1]
    if any(m.shape[1] != cols for m in mats):
        raise DimensionError(
            "khatri_rao column counts differ: " + ", ".join(str(m.shape[1]) for m in mats)
        )
    out = mats[0]
    for m in mats[1:]:
        out = (out[:, None, :] * m[None, :, :]).reshape(-1, cols)
    return out


def _check_square(a, name):
    if a.shape[0] != a.shape[1]:
        raise ContractError(f"{name} must be square, got {a.shape}")


def hermitian_eig(c) -> EigenDecomposition:
    """Eigen-decomposition of a Hermitian matrix, eigenvalues sorted descending."""
    c = _as_matrix(c, "C")
    _check_square(c, "C")
    scale = max(np.abs(c).max(), np.finfo(float).tiny)
    if np.abs(c - c.conj().T).max() > HERMITIAN_RTOL * scale:
        raise ContractError("C is not Hermitian")
    c = 0.5 * (c + c.conj().T)
    w, v = np.linalg.eigh(c)
    order = np.argsort(w)[::-1]
    return EigenDecomposition(w[order], v[:, order], True, 1.0)


def general_eig(m, ceiling: float = DEFECTIVE_CEILING) -> EigenDecomposition:
    """Eigen-decomposition of a general square matrix.

    Emits :class:`NearDefectiveWarning` when the eigenvector matrix has a
    condition number above ``ceiling``; the decomposition is still returned.
    """
    m = _as_matrix(m, "M")
    _check_square(m, "M")
    w, v = np.linalg.eig(m)
    cond = float(np.linalg.cond(v))
    if not np.isfinite(cond) or cond > ceiling:
        warnings.warn(
            f"eigenvector matrix condition {cond:.3g} exceeds {ceiling:.1g}",
            NearDefectiveWarning,
            stacklevel=2,
        )
    return EigenDecomposition(w, v, False, cond)


def ls_solve_regularized(w, y, sigma_reg: float = 0.0):
    """Minimizer of ``||W x - y||^2 + sigma_reg ||x||^2``.

    Solved as an augmented least-squares problem with an orthogonal
    factorization rather than through the normal equations. ``y`` may be a
    vector or a matrix of right-hand sides.
    """
    w = _as_matrix(w, "W")
    y = np.asarray(y)
    if y.shape[0] != w.shape[0]:
        raise DimensionError(f"W has {w.shape[0]} rows but y has length {y.shape[0]}")
    if sigma_reg < 0:
        raise ContractError("sigma_reg must be non-negative")
    n = w.shape[1]
    if sigma_reg > 0:
        a = np.vstack([w, np.sqrt(sigma_reg) * np.eye(n)])
        rhs = np.concatenate([y, np.zeros((n,) + y.shape[1:], dtype=y.dtype)])
    else:
        a, rhs = w, y
    x, _, rank, _ = np.linalg.lstsq(a, rhs, rcond=None)
    if rank < n:
        raise SingularityError(f"regularized normal matrix is singular (rank {rank} < {n})")
    return x
