"""Scene geometry and random channel generation.

BS-to-RIS and RIS-to-UE links are Rician: a deterministic line-of-sight
steering component mixed with Rayleigh scattering, scaled by log-distance
path loss.  The BS is a uniform linear array, the RIS a uniform planar
array whose elements are indexed horizontal-fastest.  All randomness comes
from an explicit generator so draws are reproducible.
"""

import math
from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0


def dbm_to_mw(dbm):
    return 10.0 ** (dbm / 10.0)


def db_to_linear(db):
    return 10.0 ** (db / 10.0)


@dataclass(frozen=True)
class SceneConfig:
    """Geometry, fading and noise parameters of one deployment.

    Angles are radians, distances meters, powers dBm.  ``noise_dbm_hz`` and
    ``bandwidth_hz`` together fix the noise power; spacings are fractions
    of the carrier wavelength.
    """

    bs_antennas: int = 8
    ris_horizontal: int = 8
    ris_vertical: int = 8
    users: int = 5
    carrier_hz: float = 3e9
    bs_spacing: float = 0.5
    ris_spacing_h: float = 0.5
    ris_spacing_v: float = 0.5
    rician_h: float = 5.0
    rician_g: float = 5.0
    bs_ris_distance: float = 20.0
    bs_aod: float = math.pi / 6
    ris_azimuth_aoa: float = -math.pi / 3
    ris_elevation_aoa: float = math.pi / 6
    ue_distance_range: tuple = (20.0, 40.0)
    ue_azimuth_range: tuple = (-math.pi / 3, math.pi / 3)
    ue_elevation_range: tuple = (-math.pi / 6, math.pi / 6)
    noise_dbm_hz: float = -174.0
    bandwidth_hz: float = 1e6
    nlos_correlation: str = "iid"  # "iid" or "sinc"

    def __post_init__(self):
        if min(self.bs_antennas, self.ris_horizontal, self.ris_vertical, self.users) < 1:
            raise ValueError("antenna, element and user counts must be positive")
        if self.bs_ris_distance <= 0:
            raise ValueError("BS-RIS distance must be positive")
        if self.rician_h < 0 or self.rician_g < 0:
            raise ValueError("Rician factors must be nonnegative")
        lo, hi = self.ue_distance_range
        if not (0 < lo <= hi):
            raise ValueError(f"bad UE distance range {self.ue_distance_range}")
        if self.nlos_correlation not in ("iid", "sinc"):
            raise ValueError(f"unknown nlos_correlation {self.nlos_correlation!r}")

    @property
    def ris_elements(self):
        return self.ris_horizontal * self.ris_vertical

    @property
    def wavelength(self):
        return SPEED_OF_LIGHT / self.carrier_hz

    @property
    def noise_mw(self):
        return dbm_to_mw(self.noise_dbm_hz + 10.0 * math.log10(self.bandwidth_hz))


@dataclass
class ChannelSet:
    """One realization: H (N x M), per-UE rows of G (K x N) and the
    cascades F_k = diag(g_k) H stacked as (K, N, M)."""

    H: np.ndarray
    G: np.ndarray
    F: np.ndarray
    rho_h: float
    rho_g: np.ndarray
    ue_distances: np.ndarray
    ue_azimuths: np.ndarray
    ue_elevations: np.ndarray


def ula_response(m, angle, spacing=0.5):
    """Uniform linear array response, entries exp(j*(m-1)*psi) with
    psi = 2*pi*spacing*sin(angle); spacing in wavelengths."""
    psi = 2.0 * math.pi * spacing * math.sin(angle)
    return np.exp(1j * psi * np.arange(m))


def upa_response(n_h, n_v, azimuth, elevation, spacing_h=0.5, spacing_v=0.5):
    """Uniform planar array response on an (n_h x n_v) grid.

    Entry for grid position (h, v) is exp(j*(h*psi_h + v*psi_v)) with
    psi_h = 2*pi*spacing_h*sin(azimuth)*cos(elevation) and
    psi_v = 2*pi*spacing_v*sin(elevation).  Ordering is horizontal index
    fastest: element n = v*n_h + h.
    """
    psi_h = 2.0 * math.pi * spacing_h * math.sin(azimuth) * math.cos(elevation)
    psi_v = 2.0 * math.pi * spacing_v * math.sin(elevation)
    h = np.arange(n_h)
    v = np.arange(n_v)
    phase = psi_h * h[None, :] + psi_v * v[:, None]  # (v, h), h fastest on ravel
    return np.exp(1j * phase).ravel()


def pathloss_db(distance_m):
    """Log-distance path loss -37.5 - 22*log10(d / 1 m) in dB."""
    if distance_m <= 0:
        raise ValueError(f"distance must be positive, got {distance_m}")
    return -37.5 - 22.0 * math.log10(distance_m)


def _ris_positions(cfg):
    """Element coordinates in meters, horizontal-fastest order."""
    lam = cfg.wavelength
    h = np.arange(cfg.ris_horizontal) * cfg.ris_spacing_h * lam
    v = np.arange(cfg.ris_vertical) * cfg.ris_spacing_v * lam
    hh = np.tile(h, cfg.ris_vertical)
    vv = np.repeat(v, cfg.ris_horizontal)
    return np.stack([hh, vv], axis=1)


def _ris_correlation_sqrt(cfg):
    """Matrix square root of the isotropic-scattering correlation
    sinc(2*||u_n - u_m|| / lambda) between RIS element positions."""
    pos = _ris_positions(cfg)
    dist = np.linalg.norm(pos[:, None, :] - pos[None, :, :], axis=2)
    corr = np.sinc(2.0 * dist / cfg.wavelength)
    w, V = np.linalg.eigh(corr)
    w = np.clip(w, 0.0, None)
    return (V * np.sqrt(w)) @ V.conj().T


def _cn01(rng, shape):
    """i.i.d. CN(0, 1) draws."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)


def _rician_mix(kappa, los, nlos):
    return math.sqrt(kappa / (kappa + 1.0)) * los + math.sqrt(1.0 / (kappa + 1.0)) * nlos


def draw_channels(cfg, rng):
    """Draw one Rician channel realization for the scene.

    H = sqrt(rho_H) * (sqrt(k/(k+1)) a_RIS a_BS^T + sqrt(1/(k+1)) H_nlos)
    and per UE g_k analogously with the RIS departure response toward the
    UE.  UE geometry (distance, azimuth, elevation AoD) is drawn uniformly
    from the configured ranges.  Deterministic given (cfg, rng state).
    """
    M, N, K = cfg.bs_antennas, cfg.ris_elements, cfg.users
    a_bs = ula_response(M, cfg.bs_aod, cfg.bs_spacing)
    a_ris_in = upa_response(
        cfg.ris_horizontal,
        cfg.ris_vertical,
        cfg.ris_azimuth_aoa,
        cfg.ris_elevation_aoa,
        cfg.ris_spacing_h,
        cfg.ris_spacing_v,
    )

    corr_sqrt = _ris_correlation_sqrt(cfg) if cfg.nlos_correlation == "sinc" else None

    # H is N x M (BS -> RIS): RIS arrival response times BS departure response
    h_los = np.outer(a_ris_in, a_bs)
    h_nlos = _cn01(rng, (N, M))
    if corr_sqrt is not None:
        h_nlos = corr_sqrt @ h_nlos
    rho_h = db_to_linear(pathloss_db(cfg.bs_ris_distance))
    H = math.sqrt(rho_h) * _rician_mix(cfg.rician_h, h_los, h_nlos)

    d_lo, d_hi = cfg.ue_distance_range
    az_lo, az_hi = cfg.ue_azimuth_range
    el_lo, el_hi = cfg.ue_elevation_range
    dists = rng.uniform(d_lo, d_hi, K)
    azs = rng.uniform(az_lo, az_hi, K)
    els = rng.uniform(el_lo, el_hi, K)

    G = np.empty((K, N), dtype=np.complex128)
    rho_g = np.empty(K)
    for k in range(K):
        g_los = upa_response(
            cfg.ris_horizontal,
            cfg.ris_vertical,
            azs[k],
            els[k],
            cfg.ris_spacing_h,
            cfg.ris_spacing_v,
        )
        g_nlos = _cn01(rng, N)
        if corr_sqrt is not None:
            g_nlos = corr_sqrt @ g_nlos
        rho_g[k] = db_to_linear(pathloss_db(dists[k]))
        G[k] = math.sqrt(rho_g[k]) * _rician_mix(cfg.rician_g, g_los, g_nlos)

    F = G[:, :, None] * H[None, :, :]  # F_k = diag(g_k) @ H, shape (K, N, M)
    return ChannelSet(
        H=H,
        G=G,
        F=F,
        rho_h=rho_h,
        rho_g=rho_g,
        ue_distances=dists,
        ue_azimuths=azs,
        ue_elevations=els,
    )


def trial_rng(base_seed, *stream):
    """Deterministic per-trial generator.

    Seeding rule (fixed, documented): numpy ``SeedSequence`` over the tuple
    ``(base_seed, *stream)`` feeding a PCG64 generator, so distinct trials,
    methods and power points get independent streams on every platform.
    """
    return np.random.default_rng(np.random.SeedSequence([int(base_seed), *map(int, stream)]))
