"""Double-directional wideband MIMO channel synthesis.

The sampled response is

    H(q, k) = sum_z beta_z a_r(mu_r_z) a_t(mu_t_z)^T exp(j q gamma_z - j k eta_z)

with ULA steering vectors ``a(mu) = [1, e^{j mu}, ..., e^{j (L-1) mu}]``,
``mu = 2 pi d sin(angle)``, ``gamma = nu * dt`` and ``eta = 2 pi df tau``.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path as _FsPath

import numpy as np

from .exceptions import ConfigError, ContractError
from .utils import read_key_values

SPEED_OF_LIGHT = 2.998e8

# Urban macro delay profile used by both scenarios, in nanoseconds.
UMA_DELAYS_NS = (0.0, 60.0, 75.0, 145.0, 150.0, 155.0)

_TABLE_III = (
    # beta, aoa, aod, delay_ns, doppler_rad_s
    (-0.76 + 0.074j, 0.49, -2.90, 0.0, 185.10),
    (-0.76 + 0.30j, -1.89, 0.99, 60.0, -462.10),
    (-1.41 + 0.14j, -2.48, 2.99, 75.0, 497.31),
    (0.16 - 1.15j, -1.88, 1.46, 145.0, -331.90),
    (0.37 - 0.82j, -2.66, 2.05, 150.0, 208.61),
    (-0.33 + 1.04j, -0.02, -1.60, 155.0, -156.92),
)


@dataclass(frozen=True)
class ChannelConfig:
    n_rx: int = 2
    n_tx: int = 2
    n_time: int = 50
    n_freq: int = 64
    carrier_hz: float = 2.1e9
    bandwidth_hz: float = 20e6
    n_subcarriers_total: int = 1024
    velocity_mps: float = 50.0 / 3.6
    spatial_rate_per_lambda: float = 10.0
    d_rx_lambda: float = 0.5
    d_tx_lambda: float = 0.5

    def __post_init__(self):
        for name in ("n_rx", "n_tx", "n_time", "n_freq", "n_subcarriers_total"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.n_subcarriers_total < self.n_freq:
            raise ConfigError("n_subcarriers_total must be >= n_freq")
        for name in ("carrier_hz", "bandwidth_hz", "velocity_mps",
                     "spatial_rate_per_lambda", "d_rx_lambda", "d_tx_lambda"):
            if not float(getattr(self, name)) > 0:
                raise ConfigError(f"{name} must be > 0")

    def replace(self, **changes) -> "ChannelConfig":
        return dataclasses.replace(self, **changes)

    @classmethod
    def from_dict(cls, d: dict) -> "ChannelConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigError(f"unknown channel config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_file(cls, path) -> "ChannelConfig":
        d = read_key_values(path)
        names = {f.name for f in dataclasses.fields(cls)}
        return cls.from_dict({k: v for k, v in d.items() if k in names})


@dataclass(frozen=True)
class DerivedGrid:
    dt_s: float
    df_hz: float
    lambda_m: float


def derive_grid(config: ChannelConfig) -> DerivedGrid:
    lam = SPEED_OF_LIGHT / config.carrier_hz
    dt = lam / (config.spatial_rate_per_lambda * config.velocity_mps)
    return DerivedGrid(dt_s=dt, df_hz=config.bandwidth_hz / config.n_freq, lambda_m=lam)


def steering_vector(mu_rad: float, n_elem: int) -> np.ndarray:
    return np.exp(1j * mu_rad * np.arange(n_elem))


def vandermonde(phases, length: int) -> np.ndarray:
    """``length x Z`` matrix with entries ``exp(j * l * phases[z])``."""
    phases = np.atleast_1d(np.asarray(phases, dtype=float))
    return np.exp(1j * np.outer(np.arange(length), phases))


@dataclass(frozen=True)
class Path:
    beta: complex
    aoa_rad: float
    aod_rad: float
    delay_s: float
    doppler_rad_per_s: float

    def __post_init__(self):
        if self.delay_s < 0:
            raise ContractError("delay must be non-negative")
        for name in ("aoa_rad", "aod_rad"):
            v = getattr(self, name)
            if not -np.pi <= v < np.pi:
                raise ContractError(f"{name}={v} outside [-pi, pi)")


@dataclass(frozen=True)
class NormalizedParams:
    """Per-path parameters in the units the estimators work in."""

    beta: np.ndarray
    mu_r: np.ndarray
    mu_t: np.ndarray
    gamma: np.ndarray
    eta: np.ndarray

    @property
    def n_paths(self) -> int:
        return len(self.beta)


@dataclass(frozen=True)
class PathSet:
    paths: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "paths", tuple(self.paths))
        if len(self.paths) < 1:
            raise ContractError("a PathSet needs at least one path")
        keys = [dataclasses.astuple(p) for p in self.paths]
        if len(set(keys)) != len(keys):
            raise ContractError("two paths share the full parameter tuple")

    def __len__(self):
        return len(self.paths)

    def __iter__(self):
        return iter(self.paths)

    def __add__(self, other: "PathSet") -> "PathSet":
        return PathSet(self.paths + other.paths)

    @property
    def beta(self):
        return np.array([p.beta for p in self.paths], dtype=complex)

    def normalized(self, config: ChannelConfig) -> NormalizedParams:
        grid = derive_grid(config)
        aoa = np.array([p.aoa_rad for p in self.paths])
        aod = np.array([p.aod_rad for p in self.paths])
        tau = np.array([p.delay_s for p in self.paths])
        nu = np.array([p.doppler_rad_per_s for p in self.paths])
        return NormalizedParams(
            beta=self.beta,
            mu_r=2 * np.pi * config.d_rx_lambda * np.sin(aoa),
            mu_t=2 * np.pi * config.d_tx_lambda * np.sin(aod),
            gamma=nu * grid.dt_s,
            eta=2 * np.pi * grid.df_hz * tau,
        )

    @classmethod
    def from_file(cls, path) -> "PathSet":
        """One path per line: ``beta_re beta_im aoa aod delay_ns doppler_rad_s``."""
        rows = []
        for lineno, raw in enumerate(_FsPath(path).read_text().splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 6:
                raise ConfigError(f"{path}:{lineno}: expected 6 fields, got {len(parts)}")
            try:
                re_, im, aoa, aod, tau_ns, nu = (float(p) for p in parts)
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: {exc}") from exc
            rows.append(Path(complex(re_, im), aoa, aod, tau_ns * 1e-9, nu))
        return cls(tuple(rows))

    def to_text(self) -> str:
        lines = ["# beta_re beta_im aoa aod delay_ns doppler_rad_s"]
        for p in self.paths:
            lines.append(
                f"{p.beta.real!r} {p.beta.imag!r} {p.aoa_rad!r} {p.aod_rad!r} "
                f"{p.delay_s * 1e9!r} {p.doppler_rad_per_s!r}"
            )
        return "\n".join(lines) + "\n"


def scenario_one_paths() -> PathSet:
    return PathSet(tuple(Path(b, th, ph, tau * 1e-9, nu) for b, th, ph, tau, nu in _TABLE_III))


def max_doppler(config: ChannelConfig) -> float:
    """Largest physical Doppler shift in rad/s, ``2 pi v / lambda``."""
    return 2 * np.pi * config.velocity_mps / derive_grid(config).lambda_m


def scenario_two_paths(z: int, rng_seed, config: ChannelConfig | None = None,
                       delays_ns=None) -> PathSet:
    """Random paths: CN(0,1) gains, uniform angles, uniform Doppler, UMA delays."""
    config = config or ChannelConfig()
    delays = UMA_DELAYS_NS if delays_ns is None else tuple(delays_ns)
    if not 1 <= z <= len(delays):
        raise ConfigError(f"z={z} needs {z} delays but only {len(delays)} available")
    rng = np.random.default_rng(rng_seed)
    beta = (rng.standard_normal(z) + 1j * rng.standard_normal(z)) / np.sqrt(2)
    aoa = rng.uniform(-np.pi, np.pi, z)
    aod = rng.uniform(-np.pi, np.pi, z)
    nu_max = max_doppler(config)
    nu = rng.uniform(-nu_max, nu_max, z)
    return PathSet(tuple(
        Path(complex(beta[i]), float(aoa[i]), float(aod[i]), delays[i] * 1e-9, float(nu[i]))
        for i in range(z)
    ))


def response_from_params(params: NormalizedParams, n_rx: int, n_tx: int, q, k) -> np.ndarray:
    """Channel matrices at time indices ``q`` and frequency indices ``k``.

    ``q`` and ``k`` are broadcast against each other; the result has shape
    ``broadcast(q, k).shape + (n_rx, n_tx)``.
    """
    q, k = np.broadcast_arrays(np.asarray(q, dtype=float), np.asarray(k, dtype=float))
    a_r = vandermonde(params.mu_r, n_rx)  # N x Z
    a_t = vandermonde(params.mu_t, n_tx)  # M x Z
    phase = np.exp(1j * (q[..., None] * params.gamma - k[..., None] * params.eta))
    weights = phase * params.beta  # (..., Z)
    return np.einsum("...z,nz,mz->...nm", weights, a_r, a_t)


def channel_response(paths: PathSet, config: ChannelConfig, q: int, k: int) -> np.ndarray:
    return response_from_params(paths.normalized(config), config.n_rx, config.n_tx, q, k)


@dataclass(frozen=True)
class ChannelTensor:
    """``samples[q, k]`` is the ``n_rx x n_tx`` matrix H(q, k)."""

    config: ChannelConfig
    samples: np.ndarray
    noise_var: float = 0.0

    def __post_init__(self):
        c = self.config
        expected = (c.n_time, c.n_freq, c.n_rx, c.n_tx)
        if self.samples.shape != expected:
            raise ContractError(f"samples shape {self.samples.shape} != {expected}")
        self.samples.setflags(write=False)

    def mean_power(self) -> float:
        """Mean of ``|H(q,k)[n,m]|^2`` over every entry."""
        return float(np.mean(np.abs(self.samples) ** 2))


def sample_grid(paths: PathSet, config: ChannelConfig) -> ChannelTensor:
    q = np.arange(config.n_time)[:, None]
    k = np.arange(config.n_freq)[None, :]
    return ChannelTensor(config, channel_response(paths, config, q, k), 0.0)


def add_noise(tensor: ChannelTensor, snr_db: float, rng_seed) -> ChannelTensor:
    """Add circular complex Gaussian noise at ``snr_db`` relative to the mean entry power.

    ``snr_db = inf`` returns the tensor unchanged.
    """
    if tensor.noise_var != 0:
        raise ContractError("tensor already carries noise")
    if snr_db == np.inf:
        return tensor
    if not np.isfinite(snr_db):
        raise ContractError(f"snr_db must be finite or +inf, got {snr_db}")
    sigma2 = tensor.mean_power() / 10 ** (snr_db / 10)
    rng = np.random.default_rng(rng_seed)
    shape = tensor.samples.shape
    noise = np.sqrt(sigma2 / 2) * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    return ChannelTensor(tensor.config, tensor.samples + noise, float(sigma2))
