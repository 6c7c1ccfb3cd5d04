"""Block-Hankel data matrices for the three channel models.

Row spaces are Kronecker products of per-dimension Vandermonde vectors.
Dimensions are listed fastest-varying first, which under column-stacking
``vec`` is the order (receive, transmit, time, frequency):

===========  =======================  ===================  =====================
model        rows                     columns              row dimensions
===========  =======================  ===================  =====================
``doddoa``   N M S U                  R T                  rx, tx, time, freq
``tssm``     N S U                    M R T                rx, time, freq
``mssm``     S U                      N M R T              time, freq
===========  =======================  ===================  =====================

with ``S = Q - R + 1`` and ``U = K - T + 1``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelConfig, ChannelTensor, PathSet, vandermonde
from .exceptions import ContractError, DimensionError
from .numkernel import kron


class Model(str, enum.Enum):
    DODDOA = "doddoa"
    TSSM = "tssm"
    MSSM = "mssm"

    @classmethod
    def parse(cls, value) -> "Model":
        if isinstance(value, cls):
            return value
        key = str(value).lower().replace("_", "").replace("-", "").replace("/", "")
        aliases = {"doddoa": cls.DODDOA, "dod": cls.DODDOA, "tssm": cls.TSSM, "tss": cls.TSSM,
                   "mssm": cls.MSSM, "mss": cls.MSSM}
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown model {value!r}") from None

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class DimensionLayout:
    """Kronecker factorization of a row space, fastest-varying dimension first."""

    dims: tuple  # ((name, length), ...)

    @property
    def names(self):
        return tuple(name for name, _ in self.dims)

    @property
    def size(self) -> int:
        return math.prod(length for _, length in self.dims)

    def length(self, name) -> int:
        for n, length in self.dims:
            if n == name:
                return length
        raise KeyError(name)


@dataclass(frozen=True)
class StackShape:
    r: int
    t: int
    s: int
    u: int

    @classmethod
    def from_windows(cls, n_time: int, n_freq: int, r: int, t: int) -> "StackShape":
        if not 1 <= r <= n_time:
            raise DimensionError(f"need 1 <= R <= Q, got R={r}, Q={n_time}")
        if not 1 <= t <= n_freq:
            raise DimensionError(f"need 1 <= T <= K, got T={t}, K={n_freq}")
        return cls(r=r, t=t, s=n_time - r + 1, u=n_freq - t + 1)


def default_windows(n_time: int, n_freq: int) -> tuple:
    return math.ceil(n_time / 2), math.ceil(n_freq / 2)


@dataclass(frozen=True)
class StackedData:
    model: Model
    matrix: np.ndarray
    shape: StackShape
    n_rx: int
    n_tx: int

    @property
    def layout(self) -> DimensionLayout:
        sh = self.shape
        if self.model is Model.DODDOA:
            dims = (("rx", self.n_rx), ("tx", self.n_tx), ("time", sh.s), ("freq", sh.u))
        elif self.model is Model.TSSM:
            dims = (("rx", self.n_rx), ("time", sh.s), ("freq", sh.u))
        else:
            dims = (("time", sh.s), ("freq", sh.u))
        return DimensionLayout(dims)

    @property
    def snapshot_scale(self) -> int:
        """Covariance normalization: RT, MRT or NMRT."""
        rt = self.shape.r * self.shape.t
        if self.model is Model.DODDOA:
            return rt
        if self.model is Model.TSSM:
            return self.n_tx * rt
        return self.n_rx * self.n_tx * rt


def resolvable_rows(model: Model, n_rx: int, n_tx: int, shape: StackShape) -> int:
    model = Model.parse(model)
    su = shape.s * shape.u
    if model is Model.DODDOA:
        return n_rx * n_tx * su
    if model is Model.TSSM:
        return n_rx * su
    return su


def _index_grid(model: Model, n_rx, n_tx, sh: StackShape):
    """Open-mesh indices into ``samples[q, k, n, m]`` in output element order."""
    U, S, T, R, N, M = sh.u, sh.s, sh.t, sh.r, n_rx, n_tx
    if model is Model.DODDOA:
        axes = (U, S, M, N, T, R)
        u, s, m, n, t, r = np.ix_(*(np.arange(a) for a in axes))
    elif model is Model.TSSM:
        axes = (U, S, N, T, R, M)
        u, s, n, t, r, m = np.ix_(*(np.arange(a) for a in axes))
    else:
        axes = (U, S, T, R, M, N)
        u, s, t, r, m, n = np.ix_(*(np.arange(a) for a in axes))
    return (s + r, u + t, n, m)


def build_stacked(tensor: ChannelTensor, model, r: int | None = None, t: int | None = None,
                  z_required: int = 1) -> StackedData:
    """Build the block-Hankel matrix of ``model`` from a channel tensor.

    Every output entry is a copy of one tensor entry. ``z_required`` is the
    number of paths the row space must be able to resolve (rows >= Z + 1);
    0 skips the check.
    """
    model = Model.parse(model)
    c = tensor.config
    dr, dt = default_windows(c.n_time, c.n_freq)
    sh = StackShape.from_windows(c.n_time, c.n_freq, r or dr, t or dt)
    rows = resolvable_rows(model, c.n_rx, c.n_tx, sh)
    if z_required and rows < z_required + 1:
        raise DimensionError(
            f"{model.value}: row dimension {rows} < Z+1 = {z_required + 1}; "
            "shrink R or T"
        )
    idx = _index_grid(model, c.n_rx, c.n_tx, sh)
    matrix = tensor.samples[idx].reshape(rows, -1)
    return StackedData(model, matrix, sh, c.n_rx, c.n_tx)


def model_steering(model, shape: StackShape, n_rx: int, n_tx: int,
                   mu_r=None, mu_t=None, gamma=None, eta=None) -> np.ndarray:
    """Steering matrix of the stacked row space, one column per path."""
    model = Model.parse(model)
    gamma = np.atleast_1d(gamma)
    eta = np.atleast_1d(eta)
    a_d = vandermonde(gamma, shape.s)
    a_f = vandermonde(-eta, shape.u)
    factors = [a_f, a_d]  # slowest first for kron
    if model is Model.DODDOA:
        factors += [vandermonde(mu_t, n_tx), vandermonde(mu_r, n_rx)]
    elif model is Model.TSSM:
        factors += [vandermonde(mu_r, n_rx)]
    cols = []
    for z in range(len(gamma)):
        col = np.ones((1, 1), dtype=complex)
        for f in factors:
            col = kron(col, f[:, z:z + 1])
        cols.append(col[:, 0])
    return np.stack(cols, axis=1)


def column_model_check(stacked: StackedData, paths: PathSet, config: ChannelConfig,
                       noise_var: float = 0.0) -> float:
    """Max relative residual of each column against its analytic path model.

    Only meaningful on clean data; pass the tensor's ``noise_var`` to have
    noisy input rejected.
    """
    if noise_var != 0:
        raise ContractError("column_model_check requires a clean tensor")
    p = paths.normalized(config)
    sh = stacked.shape
    a = model_steering(stacked.model, sh, stacked.n_rx, stacked.n_tx,
                       p.mu_r, p.mu_t, p.gamma, p.eta)
    r = np.arange(sh.r)
    t = np.arange(sh.t)
    # amplitude of path z in column (t, r): beta_z exp(j r gamma_z - j t eta_z)
    base = p.beta * np.exp(1j * (r[None, :, None] * p.gamma - t[:, None, None] * p.eta))  # T,R,Z
    if stacked.model is Model.DODDOA:
        alpha = base.reshape(-1, len(paths))
    elif stacked.model is Model.TSSM:
        a_t = vandermonde(p.mu_t, stacked.n_tx)  # M x Z
        alpha = (base[:, :, None, :] * a_t[None, None]).reshape(-1, len(paths))
    else:
        a_r = vandermonde(p.mu_r, stacked.n_rx)
        a_t = vandermonde(p.mu_t, stacked.n_tx)
        sig = a_t[:, None, :] * a_r[None, :, :]  # M, N, Z  (column index m*N + n)
        alpha = (base[:, :, None, None, :] * sig[None, None]).reshape(-1, len(paths))
    model_cols = a @ alpha.T
    x = stacked.matrix
    resid = np.linalg.norm(x - model_cols, axis=0) / np.linalg.norm(x, axis=0)
    return float(resid.max())
