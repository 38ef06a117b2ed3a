"""SINR, rate, and power bookkeeping."""

import numpy as np
import pytest

from sdris.channel import ChannelSet
from sdris.metrics import all_sinr, build_report, sinr_k, sum_rate, total_power
from sdris.wmmse import compute_mse_all, optimal_receiver_gains


def make_channels(rng, users=2, elements=4, antennas=3, scale=1.0):
    H = scale * (rng.standard_normal((elements, antennas)) + 1j * rng.standard_normal((elements, antennas)))
    G = scale * (rng.standard_normal((users, elements)) + 1j * rng.standard_normal((users, elements)))
    F = G[:, :, None] * H[None, :, :]
    return ChannelSet(
        H=H, G=G, F=F, rho_h=1.0, rho_g=np.ones(users),
        ue_distances=np.ones(users), ue_azimuths=np.zeros(users),
        ue_elevations=np.zeros(users),
    )


def random_state(rng, chs, power=2.0):
    K = chs.G.shape[0]
    M = chs.H.shape[1]
    W = rng.standard_normal((M, K)) + 1j * rng.standard_normal((M, K))
    W *= np.sqrt(power / np.real(np.vdot(W, W)))
    theta = np.exp(1j * rng.uniform(0, 2 * np.pi, chs.H.shape[0]))
    return W, theta


def test_zero_precoder_gives_zero_sinr_and_rate():
    rng = np.random.default_rng(0)
    chs = make_channels(rng)
    W = np.zeros((3, 2), dtype=complex)
    theta = np.exp(1j * rng.uniform(0, 2 * np.pi, 4))
    assert sinr_k(0, W, theta, chs, 1.0) == 0.0
    assert sum_rate(W, theta, chs, 1.0) == 0.0


def test_single_user_formula():
    rng = np.random.default_rng(1)
    chs = make_channels(rng, users=1)
    W, theta = random_state(rng, chs)
    s = theta @ chs.F[0] @ W[:, 0]
    n0 = 0.37
    assert sinr_k(0, W, theta, chs, n0) == pytest.approx(abs(s) ** 2 / n0, rel=1e-12)


def test_inverse_mse_identity():
    rng = np.random.default_rng(2)
    for _ in range(50):
        chs = make_channels(rng, users=3)
        W, theta = random_state(rng, chs)
        n0 = 0.1
        beta = optimal_receiver_gains(W, theta, chs, n0)
        e = compute_mse_all(W, theta, beta, chs, n0)
        sinr = all_sinr(W, theta, chs, n0)
        assert np.allclose(1.0 / e, 1.0 + sinr, rtol=1e-9)


def test_scale_invariance():
    # doubling the noise and the channel power leaves each SINR unchanged
    rng = np.random.default_rng(3)
    chs = make_channels(rng)
    W, theta = random_state(rng, chs)
    chs2 = make_channels(np.random.default_rng(3))
    chs2.F *= np.sqrt(2.0)
    assert np.allclose(
        all_sinr(W, theta, chs, 1.0), all_sinr(W, theta, chs2, 2.0), rtol=1e-12
    )


def test_unit_modulus_column_rotation():
    rng = np.random.default_rng(4)
    chs = make_channels(rng)
    W, theta = random_state(rng, chs)
    W2 = W.copy()
    W2[:, 1] *= np.exp(1j * 0.83)
    assert sum_rate(W, theta, chs, 0.5) == pytest.approx(
        sum_rate(W2, theta, chs, 0.5), rel=1e-12
    )


def test_total_power():
    assert total_power(np.zeros((3, 2), dtype=complex)) == 0.0
    W = np.eye(3, dtype=complex)
    assert total_power(W) == pytest.approx(3.0)
    rng = np.random.default_rng(5)
    W = rng.standard_normal((4, 2)) + 1j * rng.standard_normal((4, 2))
    assert total_power(W) == pytest.approx(np.linalg.norm(W, "fro") ** 2, rel=1e-12)


def test_rate_is_log_of_one_plus_sinr():
    rng = np.random.default_rng(6)
    chs = make_channels(rng)
    W, theta = random_state(rng, chs)
    rep = build_report(W, theta, chs, 0.2, power_budget=10.0)
    assert np.allclose(rep.rates, np.log2(1.0 + rep.sinr), rtol=1e-12)
    assert rep.sum_rate == pytest.approx(np.sum(rep.rates), rel=1e-12)


def test_report_flags():
    rng = np.random.default_rng(7)
    chs = make_channels(rng)
    labels = np.array([-1.5, -0.5, 0.5, 1.5])
    W = np.full((3, 2), 0.5 + 0.5j)
    theta = np.exp(1j * rng.uniform(0, 2 * np.pi, 4))
    rep = build_report(W, theta, chs, 0.2, power_budget=10.0, quant_labels=labels)
    assert rep.entries_in_alphabet and rep.power_ok and rep.theta_in_codebook
    rep2 = build_report(W * 1.01, theta, chs, 0.2, power_budget=10.0, quant_labels=labels)
    assert not rep2.entries_in_alphabet
    rep3 = build_report(W, theta, chs, 0.2, power_budget=1.0, quant_labels=labels)
    assert not rep3.power_ok
    vals = np.array([1.0 + 0j, -1.0 + 0j])
    rep4 = build_report(W, theta, chs, 0.2, 10.0, labels, ris_values=vals)
    assert not rep4.theta_in_codebook
    rep5 = build_report(W, np.array([1.0 + 0j] * 4), chs, 0.2, 10.0, labels, vals)
    assert rep5.theta_in_codebook
