"""Cramér-Rao bounds for the DOD/DOA parameterization and the induced prediction bound.

The observation is every ``vec H(q, k)`` on the Q x K grid stacked with q
varying fastest within k, corrupted by CN(0, sigma^2) noise. With the
parameter vector

    (sigma^2, mu_r[1..Z], mu_t[1..Z], gamma[1..Z], eta[1..Z], Re beta[1..Z], Im beta[1..Z])

the Fisher matrix is block diagonal: ``KQNM / sigma^4`` for the noise
variance and ``J = (2 / sigma^2) Re[(G5^H G5) * ... * (G1^H G1)]`` for the
rest, where ``*`` is the Hadamard product. The Jacobian of the stacked
observation is the Khatri-Rao product of the G blocks, which is what turns
its Gram matrix into a Hadamard product of small Gram matrices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelConfig, NormalizedParams, response_from_params, vandermonde

PARAM_GROUPS = ("mu_r", "mu_t", "gamma", "eta", "beta_re", "beta_im")
NULL_RTOL = 1e-12


@dataclass(frozen=True)
class Factors:
    a_r: np.ndarray
    a_t: np.ndarray
    a_d: np.ndarray
    a_f: np.ndarray
    d_r: np.ndarray
    d_t: np.ndarray
    d_d: np.ndarray
    d_f: np.ndarray
    x_diag: np.ndarray


@dataclass(frozen=True)
class FimReport:
    fim: np.ndarray
    j_block: np.ndarray
    param_order: tuple
    crb_diag: np.ndarray
    crb: np.ndarray  # pseudo-inverse of j_block
    singular: bool
    noise_var: float

    def group(self, name) -> np.ndarray:
        """CRB diagonal entries of one parameter group, one per path."""
        z = self.j_block.shape[0] // len(PARAM_GROUPS)
        g = PARAM_GROUPS.index(name)
        return self.crb_diag[1 + g * z: 1 + (g + 1) * z]


@dataclass(frozen=True)
class PredictionBound:
    matrix: np.ndarray
    trace: float
    normalized_trace: float


def _params(paths, config) -> NormalizedParams:
    return paths if isinstance(paths, NormalizedParams) else paths.normalized(config)


def _ramp(length: int) -> np.ndarray:
    return np.arange(length)[:, None]


def build_factors(paths, config: ChannelConfig, n_time: int | None = None,
                  n_freq: int | None = None) -> Factors:
    """Steering matrices and their derivatives for the observation grid."""
    p = _params(paths, config)
    q_len = n_time or config.n_time
    k_len = n_freq or config.n_freq
    a_r = vandermonde(p.mu_r, config.n_rx)
    a_t = vandermonde(p.mu_t, config.n_tx)
    a_d = vandermonde(p.gamma, q_len)
    a_f = vandermonde(-p.eta, k_len)
    return Factors(
        a_r, a_t, a_d, a_f,
        d_r=1j * _ramp(config.n_rx) * a_r,
        d_t=1j * _ramp(config.n_tx) * a_t,
        d_d=1j * _ramp(q_len) * a_d,
        d_f=-1j * _ramp(k_len) * a_f,
        x_diag=p.beta,
    )


def g_blocks(f: Factors):
    """The five block-column matrices, each with 6Z columns.

    Stacked-h rows run over (k, q, m, n), so the Jacobian is
    ``G1 ⋄ G5 ⋄ G4 ⋄ G3 ⋄ G2`` in that factor order.
    """
    z = len(f.x_diag)
    b = f.x_diag
    g1 = np.concatenate([b, b, b, b, np.ones(z), 1j * np.ones(z)])[None, :]
    g2 = np.hstack([f.d_r, f.a_r, f.a_r, f.a_r, f.a_r, f.a_r])
    g3 = np.hstack([f.a_t, f.d_t, f.a_t, f.a_t, f.a_t, f.a_t])
    g4 = np.hstack([f.a_d, f.a_d, f.d_d, f.a_d, f.a_d, f.a_d])
    g5 = np.hstack([f.a_f, f.a_f, f.a_f, f.d_f, f.a_f, f.a_f])
    return g1, g2, g3, g4, g5


def information_shape(f: Factors) -> np.ndarray:
    """``Re[(G5^H G5) * (G4^H G4) * (G3^H G3) * (G2^H G2) * (G1^H G1)]``: J without 2/sigma^2."""
    prod = None
    for g in g_blocks(f):
        gram = g.conj().T @ g
        prod = gram if prod is None else prod * gram
    m = prod.real
    return 0.5 * (m + m.T)


def _pinv_with_nulls(m: np.ndarray):
    """Pseudo-inverse of a symmetric PSD matrix and a per-coordinate null flag."""
    w, v = np.linalg.eigh(m)
    wmax = max(float(np.max(np.abs(w))), np.finfo(float).tiny)
    keep = w > NULL_RTOL * wmax
    inv = (v[:, keep] / w[keep]) @ v[:, keep].T
    null_weight = np.sum(v[:, ~keep] ** 2, axis=1)
    return inv, null_weight > 1e-8, bool(np.any(~keep))


def build_fim(paths, config: ChannelConfig, noise_var: float) -> FimReport:
    if not noise_var > 0:
        raise ValueError("noise_var must be positive")
    f = build_factors(paths, config)
    z = len(f.x_diag)
    shape = information_shape(f)
    scale = 2.0 / noise_var
    j = scale * shape
    n_obs = config.n_time * config.n_freq * config.n_rx * config.n_tx
    fim = np.zeros((1 + 6 * z, 1 + 6 * z))
    fim[0, 0] = n_obs / noise_var**2
    fim[1:, 1:] = j
    # invert the sigma-free shape and rescale, so the bound is exactly linear in sigma^2
    shape_inv, nulls, singular = _pinv_with_nulls(shape)
    crb_block = shape_inv / scale
    diag = np.diag(crb_block).copy()
    diag[nulls] = np.inf
    crb_diag = np.concatenate([[noise_var**2 / n_obs], diag])
    order = ("sigma2",) + tuple(f"{g}[{i}]" for g in PARAM_GROUPS for i in range(z))
    return FimReport(fim, j, order, crb_diag, crb_block, singular, float(noise_var))


def snapshot_jacobian(paths, config: ChannelConfig, q: int, k: int) -> np.ndarray:
    """``NM x 6Z`` derivative of ``vec H(q, k)`` w.r.t. the non-noise parameters."""
    p = _params(paths, config)
    a_r = vandermonde(p.mu_r, config.n_rx)
    a_t = vandermonde(p.mu_t, config.n_tx)
    d_r = 1j * _ramp(config.n_rx) * a_r
    d_t = 1j * _ramp(config.n_tx) * a_t
    alpha = p.beta * np.exp(1j * (q * p.gamma - k * p.eta))
    unit = np.exp(1j * (q * p.gamma - k * p.eta))

    def kr(t_, r_):  # column z: vec(r_z t_z^T) = t_z kron r_z
        return (t_[:, None, :] * r_[None, :, :]).reshape(-1, t_.shape[1])

    base = kr(a_t, a_r)
    return np.hstack([
        kr(a_t, d_r) * alpha,
        kr(d_t, a_r) * alpha,
        base * (1j * q) * alpha,
        base * (-1j * k) * alpha,
        base * unit,
        base * (1j * unit),
    ])


def prediction_bound(fim_report: FimReport, paths, config: ChannelConfig, q: int, k: int,
                     mean_power: float | None = None) -> PredictionBound:
    """Delta-method lower bound on the error covariance of ``vec H(q, k)``.

    ``mean_power`` is the per-snapshot ``E||H||_F^2`` used to normalize the
    trace; by default it is the mean over the observed Q x K grid.
    """
    jac = snapshot_jacobian(paths, config, q, k)
    crb = fim_report.crb
    c_e = jac @ crb @ jac.conj().T
    c_e = 0.5 * (c_e + c_e.conj().T)
    trace = float(np.real(np.trace(c_e)))
    if mean_power is None:
        mean_power = grid_mean_power(paths, config)
    return PredictionBound(c_e, trace, trace / mean_power)


def grid_mean_power(paths, config: ChannelConfig) -> float:
    p = _params(paths, config)
    h = response_from_params(p, config.n_rx, config.n_tx,
                             np.arange(config.n_time)[:, None], np.arange(config.n_freq)[None, :])
    return float(np.mean(np.sum(np.abs(h) ** 2, axis=(-2, -1))))
