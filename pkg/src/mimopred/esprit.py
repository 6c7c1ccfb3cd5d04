"""Multidimensional ESPRIT with mean-matrix eigenvector pairing."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .exceptions import ContractError, NearDefectiveWarning, PairingError, RankError
from .numkernel import general_eig, kron
from .stacking import DimensionLayout
from .utils import wrap_angle

# arg sign per dimension; frequency steering runs as exp(-j k eta)
PHASE_SIGN = {"rx": 1.0, "tx": 1.0, "time": 1.0, "freq": -1.0}
FIELD = {"rx": "mu_r", "tx": "mu_t", "time": "gamma", "freq": "eta"}

PAIRING_CEILING = 1e8
PAIRING_RETRIES = 3
# eigenvalues of the summed matrix closer than this (relative) count as coalesced
COALESCE_RTOL = 1e-6


@dataclass(frozen=True)
class StructuralEstimate:
    gamma: np.ndarray
    eta: np.ndarray
    mu_r: np.ndarray | None = None
    mu_t: np.ndarray | None = None
    pairing_condition: float = 1.0

    @property
    def z_hat(self) -> int:
        return len(self.gamma)

    def as_dict(self) -> dict:
        out = {}
        for name in ("mu_r", "mu_t", "gamma", "eta"):
            v = getattr(self, name)
            if v is not None:
                out[name] = v
        return out


def _one_sided(length: int, upper: bool) -> np.ndarray:
    eye = np.eye(length - 1)
    pad = np.zeros((length - 1, 1))
    return np.hstack([eye, pad]) if upper else np.hstack([pad, eye])


def selection_pair(layout: DimensionLayout, dim_name: str):
    """0/1 selection matrices dropping the last (S1) or first (S2) index of ``dim_name``."""
    length = layout.length(dim_name)
    if length < 2:
        raise RankError(f"dimension {dim_name!r} has length {length}; no shift invariance")
    s1 = np.ones((1, 1))
    s2 = np.ones((1, 1))
    # fastest dimension is the last kron factor
    for name, n in reversed(layout.dims):
        if name == dim_name:
            s1 = kron(s1, _one_sided(n, True))
            s2 = kron(s2, _one_sided(n, False))
        else:
            s1 = kron(s1, np.eye(n))
            s2 = kron(s2, np.eye(n))
    return s1.real, s2.real


def selection_indices(layout: DimensionLayout, dim_name: str):
    """Row indices picked by :func:`selection_pair`, without building the matrices."""
    length = layout.length(dim_name)
    if length < 2:
        raise RankError(f"dimension {dim_name!r} has length {length}; no shift invariance")
    shape = tuple(n for _, n in reversed(layout.dims))  # C-order, slowest first
    axis = len(shape) - 1 - layout.names.index(dim_name)
    idx = np.arange(layout.size).reshape(shape)
    lo = [slice(None)] * len(shape)
    hi = [slice(None)] * len(shape)
    lo[axis] = slice(0, length - 1)
    hi[axis] = slice(1, length)
    return idx[tuple(lo)].ravel(), idx[tuple(hi)].ravel()


def _select(sel, e):
    sel = np.asarray(sel)
    if sel.ndim == 2:
        return sel @ e
    return e[sel]


def solve_invariance(e_s: np.ndarray, s1, s2) -> np.ndarray:
    """Least-squares ``Phi`` with ``(S1 E) Phi ~= S2 E``.

    ``s1``/``s2`` are selection matrices or the equivalent row-index arrays.
    """
    e_s = np.asarray(e_s)
    if e_s.ndim == 1:
        e_s = e_s[:, None]
    a = _select(s1, e_s)
    b = _select(s2, e_s)
    z = e_s.shape[1]
    if a.shape[0] < z:
        raise RankError(f"{a.shape[0]} invariance equations for {z} sources")
    phi, _, rank, _ = np.linalg.lstsq(a, b, rcond=None)
    if rank < z:
        raise RankError(f"selected subspace has rank {rank} < {z}")
    return phi


def _diagonalize(phis, weights):
    upsilon = sum(w * p for w, p in zip(weights, phis))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NearDefectiveWarning)
        eig = general_eig(upsilon)
    lam = eig.values
    if lam.size > 1:
        gaps = np.abs(lam[:, None] - lam[None, :])
        np.fill_diagonal(gaps, np.inf)
        coalesced = gaps.min() <= COALESCE_RTOL * max(np.abs(lam).max(), 1e-300)
    else:
        coalesced = False
    return eig.vectors, eig.condition, coalesced


def _usable(cond, coalesced):
    return np.isfinite(cond) and cond <= PAIRING_CEILING and not coalesced


def pair_and_extract(phis, dim_names, weights=None, seed: int = 0) -> StructuralEstimate:
    """Jointly diagonalize the per-dimension ``Phi`` matrices and read off parameters.

    The shared eigenvectors come from a weighted sum of the ``Phi`` (unit
    weights by default). If that basis is ill conditioned, random positive
    weights from a generator seeded with ``seed`` are tried before giving up.
    """
    phis = [np.atleast_2d(np.asarray(p)) for p in phis]
    if len(phis) != len(dim_names):
        raise ContractError("one Phi per dimension name required")
    z = phis[0].shape[0]
    if any(p.shape != (z, z) for p in phis):
        raise ContractError("all Phi matrices must be the same square size")
    w = np.ones(len(phis)) if weights is None else np.asarray(weights, dtype=float)
    sigma, cond, coalesced = _diagonalize(phis, w)
    rng = np.random.default_rng(seed)
    attempt = 0
    while not _usable(cond, coalesced):
        if attempt == PAIRING_RETRIES:
            raise PairingError(f"eigenvector basis condition {cond:.3g}"
                               f"{' with repeated eigenvalues' if coalesced else ''}"
                               f" after {attempt} retries")
        sigma, cond, coalesced = _diagonalize(phis, rng.uniform(0.5, 1.5, len(phis)))
        attempt += 1
    sigma_inv = np.linalg.inv(sigma)
    values = {}
    for name, phi in zip(dim_names, phis):
        xi = sigma_inv @ phi @ sigma
        values[FIELD[name]] = wrap_angle(PHASE_SIGN[name] * np.angle(np.diag(xi)))
    return StructuralEstimate(pairing_condition=float(cond), **values)


def estimate_structure(e_s: np.ndarray, layout: DimensionLayout, seed: int = 0) -> StructuralEstimate:
    """Solve the invariance equations in every dimension of ``layout`` and pair them."""
    names = [name for name, n in layout.dims]
    phis = []
    for name in names:
        i1, i2 = selection_indices(layout, name)
        phis.append(solve_invariance(e_s, i1, i2))
    return pair_and_extract(phis, names, seed=seed)
