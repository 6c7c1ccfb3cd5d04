"""End-to-end fit and extrapolation for the three parametric channel models."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import amplitude, esprit, stacking, subspace
from .amplitude import DEFAULT_SIGMA_REG, AmplitudeEstimate
from .channel import ChannelConfig, ChannelTensor, vandermonde
from .esprit import StructuralEstimate
from .exceptions import StageError
from .stacking import Model


@dataclass(frozen=True)
class FitOptions:
    r: int | None = None
    t: int | None = None
    sigma_reg: float = DEFAULT_SIGMA_REG
    z_override: int | None = None
    z_hint: int | None = None
    pairing_seed: int = 0


@dataclass(frozen=True)
class Diagnostics:
    pairing_condition: float
    noise_var_hat: float
    order_overridden: bool
    eigvals: np.ndarray = field(repr=False, default=None)


@dataclass(frozen=True)
class ModelEstimate:
    model: Model
    z_hat: int
    structural: StructuralEstimate
    amplitudes: AmplitudeEstimate
    diagnostics: Diagnostics

    def spatial_signatures(self, n_rx: int, n_tx: int) -> np.ndarray:
        """Per-path ``N x M`` matrices multiplying ``exp(j q gamma - j k eta)``."""
        s, a = self.structural, self.amplitudes
        if self.model is Model.DODDOA:
            a_r = vandermonde(s.mu_r, n_rx)
            a_t = vandermonde(s.mu_t, n_tx)
            return np.einsum("z,nz,mz->znm", a.betas, a_r, a_t)
        if self.model is Model.TSSM:
            a_r = vandermonde(s.mu_r, n_rx)
            return np.einsum("nz,zm->znm", a_r, a.tss)
        return a.mss

    def to_dict(self) -> dict:
        def cplx(v):
            v = np.asarray(v)
            return {"re": v.real.tolist(), "im": v.imag.tolist()}

        out = {
            "model": self.model.value,
            "z_hat": self.z_hat,
            "structural": {k: np.asarray(v).tolist() for k, v in self.structural.as_dict().items()},
            "diagnostics": {
                "pairing_condition": self.diagnostics.pairing_condition,
                "noise_var_hat": self.diagnostics.noise_var_hat,
                "order_overridden": self.diagnostics.order_overridden,
            },
        }
        a = self.amplitudes
        for name in ("betas", "tss", "mss"):
            v = getattr(a, name)
            if v is not None:
                out["amplitudes"] = {name: cplx(v)}
        return out


@dataclass(frozen=True)
class PredictionRequest:
    """Time and subcarrier indices to evaluate; negative or out-of-grid values are allowed."""

    q_indices: tuple
    k_indices: tuple

    def __post_init__(self):
        q = tuple(int(v) for v in np.atleast_1d(self.q_indices))
        k = tuple(int(v) for v in np.atleast_1d(self.k_indices))
        if not q or not k:
            raise ValueError("empty prediction request")
        object.__setattr__(self, "q_indices", q)
        object.__setattr__(self, "k_indices", k)


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (ValueError, np.linalg.LinAlgError) as exc:
        raise StageError(name, exc) from exc


def fit(tensor: ChannelTensor, model, opts: FitOptions | None = None, **kw) -> ModelEstimate:
    """Estimate structural parameters and amplitudes of ``model`` from ``tensor``.

    Keyword arguments are forwarded to :class:`FitOptions` when ``opts`` is
    not given. Failures are re-raised as :class:`StageError` naming the stage.
    """
    model = Model.parse(model)
    opts = opts or FitOptions(**kw)
    z_req = opts.z_override or 1
    stacked = _stage("stacking", stacking.build_stacked, tensor, model, opts.r, opts.t,
                     z_required=z_req)
    spec = _stage("covariance", subspace.spectrum, stacked)
    eigvals = spec[0]
    if opts.z_override is not None:
        z_hat = opts.z_override
    else:
        max_order = subspace.default_max_order(len(eigvals), opts.z_hint)
        z_hat = _stage("order", subspace.estimate_order, eigvals, stacked.matrix.shape[1],
                       max_order)
    split = _stage("subspace", subspace.split_stacked, stacked, z_hat, spec)
    structural = _stage("esprit", esprit.estimate_structure, split.signal_basis,
                        stacked.layout, opts.pairing_seed)
    amps = _stage("amplitude", amplitude.estimate_amplitudes, model, tensor, structural,
                  opts.sigma_reg)
    diag = Diagnostics(structural.pairing_condition, split.noise_var_hat,
                       opts.z_override is not None, eigvals)
    return ModelEstimate(model, z_hat, structural, amps, diag)


def predict(est: ModelEstimate, q, k=None, config: ChannelConfig | None = None) -> np.ndarray:
    """Extrapolated channel at every ``(q, k)`` of the requested index lists.

    ``q`` may be a :class:`PredictionRequest`, in which case the second
    positional argument is the config. Returns an array of shape
    ``(len(q), len(k), N, M)``. Indices may fall outside the observed grid,
    negative ones included.
    """
    if isinstance(q, PredictionRequest):
        if config is None:
            config = k
        q, k = q.q_indices, q.k_indices
    if config is None:
        raise TypeError("predict() needs a ChannelConfig")
    q = np.atleast_1d(np.asarray(q, dtype=float))
    k = np.atleast_1d(np.asarray(k, dtype=float))
    if q.size == 0 or k.size == 0:
        raise ValueError("empty prediction request")
    sig = est.spatial_signatures(config.n_rx, config.n_tx)
    s = est.structural
    phase = np.exp(1j * (q[:, None, None] * s.gamma - k[None, :, None] * s.eta))
    return np.einsum("qkz,znm->qknm", phase, sig)
