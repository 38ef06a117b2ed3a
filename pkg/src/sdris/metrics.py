"""Rate, SINR and power accounting shared by the engine and the harness."""

from dataclasses import dataclass

import numpy as np


@dataclass
class RateReport:
    """Per-UE SINRs/rates plus the feasibility flags of one state."""

    sinr: np.ndarray  # linear, per UE
    rates: np.ndarray  # bits/s/Hz, per UE
    sum_rate: float
    total_power: float
    power_ok: bool
    entries_in_alphabet: bool
    theta_in_codebook: bool


def cascade_gains(W, theta, chs):
    """S[k, i] = theta^T F_k w_i for all user pairs."""
    f = np.einsum("n,knm->km", theta, chs.F)  # f_k^T rows
    return f @ W


def sinr_k(k, W, theta, chs, noise_mw):
    """SINR of UE k: |theta^T F_k w_k|^2 over interference plus noise."""
    S = cascade_gains(W, theta, chs)
    sig = abs(S[k, k]) ** 2
    interf = float(np.sum(np.abs(S[k, :]) ** 2) - sig)
    return sig / (interf + noise_mw)


def all_sinr(W, theta, chs, noise_mw):
    S = cascade_gains(W, theta, chs)
    p = np.abs(S) ** 2
    sig = np.diagonal(p).copy()
    interf = p.sum(axis=1) - sig
    return sig / (interf + noise_mw)


def sum_rate(W, theta, chs, noise_mw):
    """Sum over UEs of log2(1 + SINR_k)."""
    return float(np.sum(np.log2(1.0 + all_sinr(W, theta, chs, noise_mw))))


def total_power(W):
    """Transmit power sum_k ||w_k||^2 (squared Frobenius norm)."""
    return float(np.real(np.vdot(W, W)))


def build_report(W, theta, chs, noise_mw, power_budget, quant_labels=None, ris_values=None):
    """Assemble the rate report and check feasibility of (W, theta).

    ``quant_labels``: real label array; checked exactly against the real and
    imaginary parts of W.  ``ris_values``: discrete codebook values checked
    exactly against theta.  Pass None to skip a membership check.
    """
    sinr = all_sinr(W, theta, chs, noise_mw)
    rates = np.log2(1.0 + sinr)
    pw = total_power(W)
    labels_ok = True
    if quant_labels is not None:
        labels_ok = bool(
            np.all(np.isin(np.real(W), quant_labels))
            and np.all(np.isin(np.imag(W), quant_labels))
        )
    theta_ok = bool(np.allclose(np.abs(theta), 1.0, atol=1e-12))
    if ris_values is not None:
        theta_ok = bool(np.all(np.isin(theta, ris_values)))
    return RateReport(
        sinr=sinr,
        rates=rates,
        sum_rate=float(np.sum(rates)),
        total_power=pw,
        power_ok=pw <= power_budget * (1.0 + 1e-6),
        entries_in_alphabet=labels_ok,
        theta_in_codebook=theta_ok,
    )
