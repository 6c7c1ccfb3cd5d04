import numpy as np
import pytest

from mimopred.channel import (
    ChannelConfig,
    NormalizedParams,
    Path,
    PathSet,
    derive_grid,
    response_from_params,
    scenario_two_paths,
    vandermonde,
)
from mimopred.crb import (
    PARAM_GROUPS,
    build_factors,
    build_fim,
    g_blocks,
    grid_mean_power,
    prediction_bound,
    snapshot_jacobian,
)
from mimopred.numkernel import khatri_rao

from oracles import fd_jacobian_stacked


def random_params(rng, z):
    return NormalizedParams(
        beta=(rng.standard_normal(z) + 1j * rng.standard_normal(z)) / np.sqrt(2),
        mu_r=rng.uniform(-np.pi, np.pi, z),
        mu_t=rng.uniform(-np.pi, np.pi, z),
        gamma=rng.uniform(-0.5, 0.5, z),
        eta=rng.uniform(-1.0, 1.0, z),
    )


def small(n=2, m=2, q=8, k=8):
    return ChannelConfig(n_rx=n, n_tx=m, n_time=q, n_freq=k)


class TestFactors:
    def test_zero_parameters(self):
        p = NormalizedParams(np.ones(1, complex), np.zeros(1), np.zeros(1), np.zeros(1),
                             np.zeros(1))
        f = build_factors(p, small(3, 2, 4, 5))
        for a in (f.a_r, f.a_t, f.a_d, f.a_f):
            np.testing.assert_array_equal(a, 1)
        np.testing.assert_array_equal(f.d_r[:, 0], 1j * np.arange(3))
        np.testing.assert_array_equal(f.d_d[:, 0], 1j * np.arange(4))
        np.testing.assert_array_equal(f.d_f[:, 0], -1j * np.arange(5))

    def test_finite_difference(self, rng):
        p = random_params(rng, 3)
        c = small(3, 4, 6, 5)
        f = build_factors(p, c)
        h = 1e-6
        cases = [(f.d_r, p.mu_r, c.n_rx, 1), (f.d_t, p.mu_t, c.n_tx, 1),
                 (f.d_d, p.gamma, c.n_time, 1), (f.d_f, p.eta, c.n_freq, -1)]
        for d, phases, length, sign in cases:
            fd = (vandermonde(sign * (phases + h), length)
                  - vandermonde(sign * (phases - h), length)) / (2 * h)
            np.testing.assert_allclose(d, fd, atol=1e-6)

    def test_table_three_doppler(self, table3):
        c = ChannelConfig()
        f = build_factors(table3, c)
        gamma2 = -462.10 * derive_grid(c).dt_s
        np.testing.assert_allclose(f.a_d[1:, 1] / f.a_d[:-1, 1], np.exp(1j * gamma2))


class TestFim:
    def test_structure(self, table3):
        rep = build_fim(table3, ChannelConfig(n_time=10, n_freq=8), 0.1)
        fim = rep.fim
        assert fim.shape == (37, 37)
        assert np.all(fim[0, 1:] == 0) and np.all(fim[1:, 0] == 0)
        assert np.abs(fim - fim.T).max() <= 1e-10 * np.abs(fim).max()
        assert np.linalg.eigvalsh(fim).min() >= -1e-8 * np.linalg.norm(fim)
        assert rep.param_order[0] == "sigma2" and rep.param_order[1] == "mu_r[0]"
        assert rep.param_order[-1] == "beta_im[5]"
        assert fim[0, 0] == pytest.approx(10 * 8 * 4 / 0.01)
        assert rep.crb_diag[0] == pytest.approx(0.01 / (10 * 8 * 4))
        assert not rep.singular

    def test_single_element_arrays(self):
        p = PathSet((Path(1 + 0.5j, 0.3, 0.2, 60e-9, 100.0),))
        rep = build_fim(p, small(1, 1, 6, 6), 0.5)
        j = rep.j_block
        assert np.all(j[0] == 0) and np.all(j[:, 1] == 0)
        assert np.isinf(rep.group("mu_r")[0]) and np.isinf(rep.group("mu_t")[0])
        assert np.all(np.isfinite(rep.crb_diag[3:]))
        assert rep.singular

    def test_finite_difference_oracle(self, rng):
        p = random_params(rng, 2)
        c = small()
        sigma2 = 0.3
        jac = fd_jacobian_stacked(p, 2, 2, 8, 8)
        oracle = (2 / sigma2) * np.real(jac.conj().T @ jac)
        j = build_fim(p, c, sigma2).j_block
        big = np.abs(oracle) > 1e-8 * np.linalg.norm(oracle)
        np.testing.assert_allclose(j[big], oracle[big], rtol=1e-4)

    def test_khatri_rao_jacobian(self, rng):
        p = random_params(rng, 2)
        c = small(2, 3, 5, 4)
        g1, g2, g3, g4, g5 = g_blocks(build_factors(p, c))
        jac = khatri_rao(g5, g4, g3, g2)  # rows (k, q, m, n), n fastest
        jac = jac * g1
        fd = fd_jacobian_stacked(p, 2, 3, 5, 4)
        np.testing.assert_allclose(jac, fd, atol=1e-6)

    def test_noise_scaling(self, table3):
        c = ChannelConfig(n_time=10, n_freq=8)
        a = build_fim(table3, c, 0.02)
        b = build_fim(table3, c, 0.2)
        np.testing.assert_allclose(b.j_block, a.j_block / 10, rtol=1e-14)
        np.testing.assert_allclose(b.crb_diag[1:], 10 * a.crb_diag[1:], rtol=1e-10)

    def test_more_samples_help(self, table3):
        a = build_fim(table3, ChannelConfig(n_time=10, n_freq=8), 0.1).crb_diag
        b = build_fim(table3, ChannelConfig(n_time=20, n_freq=8), 0.1).crb_diag
        fin = np.isfinite(a)
        assert np.all(b[fin] < a[fin])

    def test_groups(self, table3):
        rep = build_fim(table3, ChannelConfig(n_time=10, n_freq=8), 0.1)
        for i, g in enumerate(PARAM_GROUPS):
            np.testing.assert_array_equal(rep.group(g), rep.crb_diag[1 + 6 * i:7 + 6 * i])

    def test_bad_noise(self, table3):
        with pytest.raises(ValueError):
            build_fim(table3, ChannelConfig(), 0.0)


class TestPredictionBound:
    def test_snapshot_jacobian(self, rng):
        p = random_params(rng, 3)
        c = small(2, 3, 4, 4)
        q, k = 11, 2
        jac = snapshot_jacobian(p, c, q, k)
        h = 1e-6

        def vec_h(pp):
            return response_from_params(pp, 2, 3, q, k).reshape(-1, order="F")

        col = 0
        for name, imag in (("mu_r", 0), ("mu_t", 0), ("gamma", 0), ("eta", 0), ("beta", 0),
                           ("beta", 1)):
            for z in range(3):
                step = h * (1j if imag else 1)
                plus = {f: np.array(getattr(p, f), dtype=complex if f == "beta" else float)
                        for f in ("beta", "mu_r", "mu_t", "gamma", "eta")}
                minus = {f: v.copy() for f, v in plus.items()}
                plus[name][z] += step
                minus[name][z] -= step
                fd = (vec_h(NormalizedParams(**plus)) - vec_h(NormalizedParams(**minus))) / (2 * h)
                np.testing.assert_allclose(jac[:, col], fd, atol=1e-6)
                col += 1

    def test_psd_and_growth(self, table3):
        c = ChannelConfig(n_time=20, n_freq=16)
        rep = build_fim(table3, c, 1e-3)
        inside = prediction_bound(rep, table3, c, 10, 5)
        ahead = prediction_bound(rep, table3, c, 19 + 10, 5)
        m = ahead.matrix
        np.testing.assert_allclose(m, m.conj().T, atol=1e-15)
        assert np.linalg.eigvalsh(m).min() >= -1e-12 * np.abs(m).max()
        assert inside.trace <= ahead.trace
        traces = [prediction_bound(rep, table3, c, q, 5).trace for q in (19, 24, 29, 39)]
        assert np.all(np.diff(traces) > 0)

    def test_linear_in_noise(self, table3):
        c = ChannelConfig(n_time=10, n_freq=8)
        a = prediction_bound(build_fim(table3, c, 1e-12), table3, c, 15, 3)
        b = prediction_bound(build_fim(table3, c, 1e-6), table3, c, 15, 3)
        assert a.trace == pytest.approx(b.trace * 1e-6, rel=1e-10)
        assert a.trace < 1e-8

    def test_delta_method_oracle(self):
        p = NormalizedParams(np.array([0.8 - 0.4j]), np.zeros(1), np.zeros(1),
                             np.array([0.13]), np.array([0.4]))
        c = small(1, 1, 8, 6)
        sigma2 = 0.05
        # restrict to (gamma, eta, Re beta, Im beta)
        keep = [2, 3, 4, 5]
        jac = fd_jacobian_stacked(p, 1, 1, 8, 6)[:, keep]
        j_inv = np.linalg.inv((2 / sigma2) * np.real(jac.conj().T @ jac))
        q, k = 12, 2
        h = 1e-6

        def h_at(gamma, eta, beta):
            return beta * np.exp(1j * (q * gamma - k * eta))

        g, e, b = 0.13, 0.4, 0.8 - 0.4j
        row = np.array([
            (h_at(g + h, e, b) - h_at(g - h, e, b)) / (2 * h),
            (h_at(g, e + h, b) - h_at(g, e - h, b)) / (2 * h),
            (h_at(g, e, b + h) - h_at(g, e, b - h)) / (2 * h),
            (h_at(g, e, b + 1j * h) - h_at(g, e, b - 1j * h)) / (2 * h),
        ])[None, :]
        oracle = np.real(row @ j_inv @ row.conj().T)[0, 0]
        bound = prediction_bound(build_fim(p, c, sigma2), p, c, q, k)
        assert bound.trace == pytest.approx(oracle, rel=1e-4)

    def test_normalization(self, table3):
        c = ChannelConfig(n_time=10, n_freq=8)
        rep = build_fim(table3, c, 0.01)
        b = prediction_bound(rep, table3, c, 12, 0)
        assert b.normalized_trace == pytest.approx(b.trace / grid_mean_power(table3, c))
        b2 = prediction_bound(rep, table3, c, 12, 0, mean_power=2.0)
        assert b2.normalized_trace == pytest.approx(b.trace / 2.0)


def test_scenario_two_fim_finite():
    c = ChannelConfig(n_time=16, n_freq=16)
    rep = build_fim(scenario_two_paths(4, 3, c), c, 0.01)
    assert np.all(np.isfinite(rep.crb_diag))
