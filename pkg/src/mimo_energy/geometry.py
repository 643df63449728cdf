"""Circular-cell geometry, reflected random walks, and the disc diffusion kernel.

The walk takes fixed-length steps in fresh uniform directions; a step that
would leave the cell is folded back specularly at the boundary circle (the
path keeps its length, like a billiard flight). This boundary rule preserves
the uniform distribution on the disc exactly.

The transition kernel of the Brownian limit is an eigenfunction series over
radial Bessel modes with reflecting (zero normal derivative) boundary
conditions; it serves as the analytic oracle for the walk statistics.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import backend
from .channel import PathlossModel, inverse_pathloss
from .specfun import bessel_j, jm_prime_zeros

__all__ = [
    "CellGeometry",
    "WalkParams",
    "Trajectory",
    "KernelTruncationWarning",
    "sample_initial_positions",
    "step_walk",
    "advance_walk",
    "random_walk_trajectory",
    "transition_probability",
    "empirical_pathloss_covariance",
    "integrated_pathloss_covariance",
    "write_trajectories_csv",
]


class KernelTruncationWarning(UserWarning):
    """Raised when the truncated kernel series may be visibly inaccurate."""


@dataclass(frozen=True)
class CellGeometry:
    radius_m: float

    def __post_init__(self):
        if self.radius_m <= 0:
            raise ValueError("cell radius must be positive")

    @property
    def area_m2(self) -> float:
        return math.pi * self.radius_m**2


@dataclass(frozen=True)
class WalkParams:
    """Fixed step length (m), step interval (s), and the derived diffusion
    coefficient step^2 / (4 * interval) in m^2/s."""

    step_m: float
    interval_s: float

    def __post_init__(self):
        if self.step_m < 0 or self.interval_s <= 0:
            raise ValueError("step must be >= 0 and interval positive")

    @property
    def diffusion_m2_per_s(self) -> float:
        return self.step_m**2 / (4.0 * self.interval_s)

    @property
    def speed_m_per_s(self) -> float:
        return self.step_m / self.interval_s


@dataclass(frozen=True)
class Trajectory:
    """Slot-indexed positions of one user, the initial point included."""

    positions: np.ndarray
    slot_duration_s: float
    user_index: int = 0

    def __post_init__(self):
        p = np.asarray(self.positions, dtype=float)
        if p.ndim != 2 or p.shape[1] != 2:
            raise ValueError("positions must have shape (slots + 1, 2)")
        object.__setattr__(self, "positions", p)


def sample_initial_positions(k: int, geometry: CellGeometry,
                             rng: np.random.Generator) -> np.ndarray:
    """k points uniform on the disc (radius via the square-root transform)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    r = geometry.radius_m * np.sqrt(rng.random(k))
    theta = 2.0 * np.pi * rng.random(k)
    return np.stack([r * np.cos(theta), r * np.sin(theta)], axis=1)


def advance_walk(positions: np.ndarray, angles: np.ndarray,
                 params: WalkParams, geometry: CellGeometry) -> None:
    """Advance many walkers one slot, in place. ``angles`` in radians."""
    steps = np.stack([params.step_m * np.cos(angles),
                      params.step_m * np.sin(angles)], axis=1)
    backend.advance_billiard(positions, steps, geometry.radius_m)


def step_walk(position, params: WalkParams, geometry: CellGeometry,
              rng: np.random.Generator) -> np.ndarray:
    """One walk step from a single position."""
    pos = np.array(position, dtype=float).reshape(1, 2)
    if np.hypot(pos[0, 0], pos[0, 1]) > geometry.radius_m * (1 + 1e-12):
        raise ValueError("position lies outside the cell")
    angle = np.array([2.0 * np.pi * rng.random()])
    advance_walk(pos, angle, params, geometry)
    return pos[0]


def random_walk_trajectory(initial, params: WalkParams, geometry: CellGeometry,
                           horizon_s: float, rng: np.random.Generator,
                           user_index: int = 0) -> Trajectory:
    """Trajectory with floor(horizon / interval) steps after the initial point."""
    slots = int(horizon_s / params.interval_s)
    out = np.empty((slots + 1, 2))
    out[0] = np.asarray(initial, dtype=float)
    pos = out[0:1].copy()
    for n in range(1, slots + 1):
        angle = 2.0 * np.pi * rng.random(1)
        advance_walk(pos, angle, params, geometry)
        out[n] = pos[0]
    return Trajectory(positions=out, slot_duration_s=params.interval_s,
                      user_index=user_index)


# ---------------------------------------------------------------------------
# Diffusion kernel on the disc with reflecting boundary
# ---------------------------------------------------------------------------

@lru_cache(maxsize=16)
def _kernel_modes(m_max: int, n_max: int):
    """Radial eigendata per azimuthal order m: zeros of J_m' and the
    dimensionless normalization (1 - m^2/kappa^2) * J_m(kappa)^2."""
    modes = []
    for m in range(m_max + 1):
        kappa = jm_prime_zeros(m, n_max)
        jm_at = bessel_j(m, kappa)
        norm = (1.0 - m * m / kappa**2) * jm_at**2
        modes.append((kappa, norm))
    return modes


def transition_probability(x, x_prime, t: float, params: WalkParams,
                           geometry: CellGeometry, terms: int = 20,
                           diffusion_factor: float = 1.0):
    """Probability density of moving from ``x`` to ``x_prime`` in time ``t``.

    Truncated eigenfunction series with ``terms`` radial modes per azimuthal
    order (orders 0..terms). ``x_prime`` may carry leading batch dimensions.
    ``diffusion_factor`` rescales the default diffusion coefficient
    step^2/(4 interval); it is a calibration hook and 1.0 is the value
    validated against walk simulations.
    """
    if terms < 1:
        raise ValueError("terms must be >= 1")
    if t <= 0:
        raise ValueError("t must be positive")
    radius = geometry.radius_m
    d_eff = diffusion_factor * params.diffusion_m2_per_s
    decay = d_eff * t / radius**2

    a = np.asarray(x, dtype=float)
    b = np.asarray(x_prime, dtype=float)
    if np.hypot(a[0], a[1]) > radius * (1 + 1e-12):
        raise ValueError("x outside the disc")
    r1, p1 = math.hypot(a[0], a[1]), math.atan2(a[1], a[0])
    r2 = np.hypot(b[..., 0], b[..., 1])
    if np.any(r2 > radius * (1 + 1e-12)):
        raise ValueError("x_prime outside the disc")
    p2 = np.arctan2(b[..., 1], b[..., 0])

    area = math.pi * radius**2
    total = np.full(np.shape(r2), 1.0 / area)
    for m, (kappa, norm) in enumerate(_kernel_modes(terms, terms)):
        weights = (bessel_j(m, kappa * r1 / radius) / (area * norm)
                   * np.exp(-kappa**2 * decay))
        radial = bessel_j(m, np.multiply.outer(r2, kappa) / radius)
        s = radial @ weights
        total = total + (s if m == 0 else 2.0 * s * np.cos(m * (p1 - p2)))

    # size of the leading omitted terms, |J_m| <= 1 on both arguments
    tail = 0.0
    for m, kap1 in ((0, _kernel_modes(terms, terms + 1)[0][0][-1]),
                    (terms + 1, jm_prime_zeros(terms + 1, 1)[0])):
        jm_at = bessel_j(m, kap1)
        nrm = (1.0 - m * m / kap1**2) * jm_at**2
        bound = math.exp(-kap1**2 * decay) / (area * abs(nrm))
        tail = max(tail, (1.0 if m == 0 else 2.0) * bound)
    scale = float(np.max(np.abs(total)))
    if tail > 1e-8 * scale:
        warnings.warn(
            f"kernel truncation tail ~{tail:.2e} exceeds 1e-8 of the running "
            f"sum ({scale:.2e}); increase `terms` or the time horizon",
            KernelTruncationWarning, stacklevel=2)
    return total if total.ndim else float(total)


# ---------------------------------------------------------------------------
# Monte-Carlo covariance oracles
# ---------------------------------------------------------------------------

def _walk_inverse_pathloss_samples(params, geometry, model, slot_indices,
                                   trials, rng, twin: bool):
    """Inverse pathloss recorded at the requested slots for ``trials``
    independent walkers (optionally with a coupled twin sharing the start)."""
    slots = max(slot_indices) if slot_indices else 0
    pos = sample_initial_positions(trials, geometry, rng)
    pos_twin = pos.copy() if twin else None
    want = set(slot_indices)
    rec = {}
    rec_twin = {}
    if 0 in want:
        rec[0] = inverse_pathloss(pos, model)
        if twin:
            rec_twin[0] = rec[0]
    for n in range(1, slots + 1):
        advance_walk(pos, 2.0 * np.pi * rng.random(trials), params, geometry)
        if twin:
            advance_walk(pos_twin, 2.0 * np.pi * rng.random(trials), params,
                         geometry)
        if n in want:
            rec[n] = inverse_pathloss(pos, model)
            if twin:
                rec_twin[n] = inverse_pathloss(pos_twin, model)
    return rec, rec_twin


def empirical_pathloss_covariance(params: WalkParams, geometry: CellGeometry,
                                  model: PathlossModel, t_pairs, trials: int,
                                  seed: int, kind: str = "plain") -> np.ndarray:
    """Sample covariance of 1/l(x(tau)), 1/l(x(s)) over walk trajectories.

    ``t_pairs`` is a sequence of (tau, s) times in seconds (snapped to slot
    multiples). ``kind="plain"`` estimates the ordinary covariance along one
    trajectory. ``kind="conditional"`` removes the part explained by the
    shared starting point, using coupled trajectory pairs with a common
    origin; this is the quantity the analytic series targets.
    """
    if trials < 1000:
        raise ValueError("at least 1000 trials required for stable estimates")
    if kind not in ("plain", "conditional"):
        raise ValueError("kind must be 'plain' or 'conditional'")
    rng = np.random.default_rng(seed)
    xi = params.interval_s
    pairs = [(int(round(a / xi)), int(round(b / xi))) for a, b in t_pairs]
    idx = sorted({n for p in pairs for n in p})
    rec, rec_twin = _walk_inverse_pathloss_samples(
        params, geometry, model, idx, trials, rng, twin=(kind == "conditional"))
    out = np.empty(len(pairs))
    for i, (na, nb) in enumerate(pairs):
        fa, fb = rec[na], rec[nb]
        plain = np.mean(fa * fb) - np.mean(fa) * np.mean(fb)
        if kind == "plain":
            out[i] = plain
        else:
            ga, gb = rec[na], rec_twin[nb]
            cross = np.mean(ga * gb) - np.mean(ga) * np.mean(gb)
            out[i] = plain - cross
    return out


def integrated_pathloss_covariance(params: WalkParams, geometry: CellGeometry,
                                   model: PathlossModel, horizon_s: float,
                                   trials: int, seed: int) -> dict:
    """Monte-Carlo double time-integral of the covariance over [0, T]^2.

    Returns both readings of the integral:

    - ``conditional``: start-point contribution removed via coupled twin
      trajectories; this matches the analytic series value.
    - ``plain``: variance of the trapezoid time integral along one walk,
      which additionally contains the variance of the start-conditioned mean.
    """
    if trials < 1000:
        raise ValueError("at least 1000 trials required for stable estimates")
    rng = np.random.default_rng(seed)
    xi = params.interval_s
    slots = int(round(horizon_s / xi))
    pos = sample_initial_positions(trials, geometry, rng)
    twin = pos.copy()
    f_main = 0.5 * inverse_pathloss(pos, model)
    f_twin = f_main.copy()
    for n in range(1, slots + 1):
        w = 1.0 if n < slots else 0.5
        advance_walk(pos, 2.0 * np.pi * rng.random(trials), params, geometry)
        advance_walk(twin, 2.0 * np.pi * rng.random(trials), params, geometry)
        f_main += w * inverse_pathloss(pos, model)
        f_twin += w * inverse_pathloss(twin, model)
    f_main *= xi
    f_twin *= xi
    var_total = float(np.var(f_main, ddof=1))
    cross = float(np.cov(f_main, f_twin)[0, 1])
    return {
        "conditional": var_total - cross,
        "plain": var_total,
        "start_point_part": cross,
        "trials": trials,
        "slots": slots,
    }


def write_trajectories_csv(path, trajectories, header_comment: str = ""):
    """Debug export: one row per (trial, user, slot) with x/y in meters."""
    with open(path, "w", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        writer = csv.writer(fh)
        writer.writerow(["trial", "user", "slot", "x_m", "y_m"])
        for trial, group in enumerate(trajectories):
            for traj in group:
                for slot, (x, y) in enumerate(traj.positions):
                    writer.writerow([trial, traj.user_index, slot,
                                     repr(float(x)), repr(float(y))])
