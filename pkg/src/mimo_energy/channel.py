"""Pathloss model, small-scale fading, channel assembly, and CSI corruption.

All dB/dBm-to-linear conversions live here so mixed-unit parameter tables are
converted in exactly one place.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "PathlossModel",
    "CsiQuality",
    "ChannelMatrix",
    "db_to_linear",
    "dbm_to_watts",
    "pathloss",
    "inverse_pathloss",
    "mean_inverse_pathloss",
    "draw_fading",
    "assemble_channels",
    "corrupt_csi",
]


def db_to_linear(value_db: float) -> float:
    return 10.0 ** (value_db / 10.0)


def dbm_to_watts(value_dbm: float) -> float:
    return 10.0 ** ((value_dbm - 30.0) / 10.0)


@dataclass(frozen=True)
class PathlossModel:
    """Distance-driven attenuation 2*l_xbar / (1 + (d/xbar)^beta).

    The attenuation is bounded in (0, 2*l_xbar]; at distance ``xbar_m`` it
    equals ``l_xbar``.
    """

    beta: float = 4.0
    xbar_m: float = 25.0
    l_xbar: float = db_to_linear(-93.0)

    def __post_init__(self):
        if self.beta < 2:
            raise ValueError("pathloss exponent must be >= 2")
        if self.xbar_m <= 0 or self.l_xbar <= 0:
            raise ValueError("xbar_m and l_xbar must be positive")


@dataclass(frozen=True)
class CsiQuality:
    """Per-user channel-estimate error magnitudes tau in [0, 1)."""

    tau: np.ndarray

    def __post_init__(self):
        t = np.atleast_1d(np.asarray(self.tau, dtype=float))
        if np.any(t < 0) or np.any(t >= 1):
            raise ValueError("tau must lie in [0, 1); tau = 1 leaves the "
                             "estimate uncorrelated with the channel")
        object.__setattr__(self, "tau", t)

    @classmethod
    def uniform(cls, tau: float, k: int) -> "CsiQuality":
        return cls(tau=np.full(k, float(tau)))


@dataclass(frozen=True)
class ChannelMatrix:
    """N x K complex gains; column k is sqrt(l(x_k)) times a fading vector."""

    entries: np.ndarray
    positions: np.ndarray
    model: PathlossModel

    @property
    def n_antennas(self) -> int:
        return self.entries.shape[0]

    @property
    def k_users(self) -> int:
        return self.entries.shape[1]

    def attenuations(self) -> np.ndarray:
        return pathloss(self.positions, self.model)


def pathloss(x, model: PathlossModel):
    """Attenuation at position(s) ``x`` (last axis holds the 2-D coordinates)."""
    pos = np.asarray(x, dtype=float)
    d2 = np.sum(pos * pos, axis=-1)
    return 2.0 * model.l_xbar / (1.0 + d2 ** (model.beta / 2.0) / model.xbar_m ** model.beta)


def inverse_pathloss(x, model: PathlossModel):
    """1 / pathloss, computed without the intermediate division."""
    pos = np.asarray(x, dtype=float)
    d2 = np.sum(pos * pos, axis=-1)
    return (1.0 + d2 ** (model.beta / 2.0) / model.xbar_m ** model.beta) / (2.0 * model.l_xbar)


def mean_inverse_pathloss(model: PathlossModel, radius_m: float) -> float:
    """Disc average of 1/l over a cell of the given radius (closed form)."""
    ratio = radius_m ** model.beta / model.xbar_m ** model.beta
    return ratio / (2.0 * model.l_xbar) * (2.0 / (2.0 + model.beta) + 1.0 / ratio)


def draw_fading(n: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """i.i.d. circularly-symmetric complex Gaussian N x K matrix, unit variance."""
    if n < 1 or k < 1:
        raise ValueError("matrix dimensions must be positive")
    re = rng.standard_normal((n, k))
    im = rng.standard_normal((n, k))
    return (re + 1j * im) / np.sqrt(2.0)


def assemble_channels(positions: np.ndarray, fading: np.ndarray,
                      model: PathlossModel) -> ChannelMatrix:
    """Scale fading column k by sqrt(l(x_k))."""
    pos = np.asarray(positions, dtype=float)
    if fading.ndim != 2 or pos.shape != (fading.shape[1], 2):
        raise ValueError(
            f"positions {pos.shape} inconsistent with fading {fading.shape}")
    gains = np.sqrt(pathloss(pos, model))
    return ChannelMatrix(entries=fading * gains, positions=pos, model=model)


def corrupt_csi(true_channels: ChannelMatrix, quality: CsiQuality,
                rng: np.random.Generator) -> ChannelMatrix:
    """Gauss-Markov estimate: sqrt(1-tau^2) * w_k + tau * (fresh noise).

    Preserves the per-entry channel variance for any tau; tau = 0 returns the
    true channels bit-exactly.
    """
    tau = quality.tau
    if tau.size != true_channels.k_users:
        raise ValueError("one tau per user required")
    if np.all(tau == 0.0):
        return true_channels
    gains = np.sqrt(pathloss(true_channels.positions, true_channels.model))
    fading = true_channels.entries / gains
    noise = draw_fading(true_channels.n_antennas, true_channels.k_users, rng)
    estimate = np.sqrt(1.0 - tau**2) * fading + tau * noise
    return ChannelMatrix(entries=estimate * gains,
                         positions=true_channels.positions,
                         model=true_channels.model)
