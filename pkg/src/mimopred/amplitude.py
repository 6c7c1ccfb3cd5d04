"""Regularized least-squares recovery of path amplitudes and spatial signatures.

All three fits use the first subcarrier only. Observations of antenna pair
``(n, m)`` form a length-Q time series; series are stacked with ``n`` varying
fastest.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelTensor, vandermonde
from .esprit import StructuralEstimate
from .exceptions import UnderdeterminedError
from .numkernel import khatri_rao, ls_solve_regularized
from .stacking import Model

DEFAULT_SIGMA_REG = 1e-5


@dataclass(frozen=True)
class AmplitudeEstimate:
    model: Model
    betas: np.ndarray | None = None  # (Z,)
    tss: np.ndarray | None = None  # (Z, M)
    mss: np.ndarray | None = None  # (Z, N, M)


def time_basis(gamma, n_time: int) -> np.ndarray:
    """Q x Z matrix ``W[q, z] = exp(j q gamma_z)``."""
    return vandermonde(gamma, n_time)


def _first_subcarrier(tensor: ChannelTensor) -> np.ndarray:
    return tensor.samples[:, 0]  # Q x N x M


def estimate_beta_doddoa(tensor: ChannelTensor, est: StructuralEstimate,
                         sigma_reg: float = DEFAULT_SIGMA_REG) -> AmplitudeEstimate:
    c = tensor.config
    z = est.z_hat
    if z > c.n_time * c.n_rx * c.n_tx:
        raise UnderdeterminedError(f"{z} paths from {c.n_time * c.n_rx * c.n_tx} samples")
    w = time_basis(est.gamma, c.n_time)
    v_r = vandermonde(est.mu_r, c.n_rx)
    v_t = vandermonde(est.mu_t, c.n_tx)
    # rows ordered (m, n, q) with q fastest
    w_d = khatri_rao(v_t, v_r, w)
    h = _first_subcarrier(tensor).transpose(2, 1, 0).reshape(-1)
    return AmplitudeEstimate(Model.DODDOA, betas=ls_solve_regularized(w_d, h, sigma_reg))


def estimate_tss(tensor: ChannelTensor, est: StructuralEstimate,
                 sigma_reg: float = DEFAULT_SIGMA_REG) -> AmplitudeEstimate:
    c = tensor.config
    z = est.z_hat
    if z > c.n_time * c.n_rx:
        raise UnderdeterminedError(f"{z} paths from {c.n_time * c.n_rx} samples per antenna")
    w_m = khatri_rao(vandermonde(est.mu_r, c.n_rx), time_basis(est.gamma, c.n_time))
    # column m holds h_{nm}(q) ordered (n, q) with q fastest
    h = _first_subcarrier(tensor).transpose(1, 0, 2).reshape(-1, c.n_tx)
    s = ls_solve_regularized(w_m, h, sigma_reg)  # Z x M
    return AmplitudeEstimate(Model.TSSM, tss=s)


def estimate_mss(tensor: ChannelTensor, est: StructuralEstimate,
                 sigma_reg: float = DEFAULT_SIGMA_REG) -> AmplitudeEstimate:
    c = tensor.config
    z = est.z_hat
    if z > c.n_time:
        raise UnderdeterminedError(f"{z} paths from {c.n_time} samples per antenna pair")
    w = time_basis(est.gamma, c.n_time)
    h = _first_subcarrier(tensor).reshape(c.n_time, -1)  # columns (n, m), m fastest
    s = ls_solve_regularized(w, h, sigma_reg)
    return AmplitudeEstimate(Model.MSSM, mss=s.reshape(z, c.n_rx, c.n_tx))


def estimate_amplitudes(model, tensor, est, sigma_reg=DEFAULT_SIGMA_REG) -> AmplitudeEstimate:
    fn = {Model.DODDOA: estimate_beta_doddoa, Model.TSSM: estimate_tss,
          Model.MSSM: estimate_mss}[Model.parse(model)]
    return fn(tensor, est, sigma_reg)
