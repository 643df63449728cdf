"""Exact finite-size precoder construction and evaluation.

Conventions: a precoder is V = C_hat * diag(sqrt(p)) where C_hat has
unit-norm columns, so p_k is the power radiated for user k and
trace(V V^H) = sum(p). Direction-generating operations return raw
(unnormalized) matrices; allocation and solution builders normalize.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelMatrix

__all__ = [
    "SinrTargets",
    "PrecoderSolution",
    "PrecoderInfeasibleError",
    "ConvergenceError",
    "compute_sinr",
    "solve_olp",
    "heuristic_directions",
    "zf_directions",
    "exact_power_allocation",
    "build_solution",
]


class PrecoderInfeasibleError(RuntimeError):
    """The requested SINR targets cannot be met by the scheme."""


class ConvergenceError(RuntimeError):
    """An iterative solver failed to reach its tolerance."""


@dataclass(frozen=True)
class SinrTargets:
    """Per-user linear SINR targets gamma_k = 2^rate_k - 1."""

    gamma: np.ndarray
    rates: np.ndarray

    def __post_init__(self):
        g = np.atleast_1d(np.asarray(self.gamma, dtype=float))
        r = np.atleast_1d(np.asarray(self.rates, dtype=float))
        if g.shape != r.shape or np.any(g <= 0):
            raise ValueError("targets must be positive and match rates")
        if not np.allclose(g, 2.0**r - 1.0, rtol=1e-12):
            raise ValueError("gamma_k must equal 2^rate_k - 1")
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "rates", r)

    @classmethod
    def from_rates(cls, rates) -> "SinrTargets":
        r = np.atleast_1d(np.asarray(rates, dtype=float))
        return cls(gamma=2.0**r - 1.0, rates=r)

    @classmethod
    def uniform(cls, rate: float, k: int) -> "SinrTargets":
        return cls.from_rates(np.full(k, float(rate)))

    @property
    def k_users(self) -> int:
        return self.gamma.size


@dataclass(frozen=True)
class PrecoderSolution:
    """Unit-norm directions, radiated per-user powers, and achieved SINRs."""

    directions: np.ndarray
    user_powers: np.ndarray
    achieved_sinr: np.ndarray
    total_power_w: float
    multipliers: np.ndarray | None = None
    iterations: int = 0

    @property
    def precoder(self) -> np.ndarray:
        return self.directions * np.sqrt(self.user_powers)


def _entries(channels) -> np.ndarray:
    return channels.entries if isinstance(channels, ChannelMatrix) else np.asarray(channels)


def compute_sinr(channels, precoder: np.ndarray, noise_w: float) -> np.ndarray:
    """Per-user SINR for an arbitrary precoding matrix."""
    h = _entries(channels)
    if h.shape != precoder.shape:
        raise ValueError("channel and precoder dimensions differ")
    cross = np.abs(h.conj().T @ precoder) ** 2  # [k, i] = |h_k^H v_i|^2
    signal = np.diagonal(cross).copy()
    interference = cross.sum(axis=1) - signal
    return signal / (interference + noise_w)


def _gram_inverse_apply(h: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """(sum_i lam_i h_i h_i^H + N I)^{-1} H."""
    n = h.shape[0]
    a = (h * lam) @ h.conj().T
    a[np.diag_indices(n)] += n
    return np.linalg.solve(a, h)


def solve_olp(channels, targets: SinrTargets, noise_w: float,
              tol: float = 1e-10, max_iter: int = 500,
              return_history: bool = False):
    """Minimum-power precoder meeting every SINR target with equality.

    The user priorities solve a fixed-point equation by Picard iteration
    (damping drops to 0.5 if the update ever stops contracting); powers then
    come from the exact per-user allocation. With ``return_history`` the
    per-iteration maximum relative priority change is returned alongside.
    """
    h = _entries(channels)
    n, k = h.shape
    gamma = targets.gamma
    if gamma.size != k:
        raise ValueError("one target per user required")

    lam = gamma.copy()
    damping = 1.0
    prev_rel = np.inf
    history = []
    for it in range(1, max_iter + 1):
        x = _gram_inverse_apply(h, lam)
        quad = np.real(np.einsum("nk,nk->k", h.conj(), x))
        if np.any(quad <= 0):
            raise PrecoderInfeasibleError("OLP: non-positive quadratic form")
        proposal = gamma / (1.0 + gamma) / quad
        new = lam + damping * (proposal - lam)
        rel = float(np.max(np.abs(new - lam) / np.abs(new)))
        history.append(rel)
        lam = new
        if rel < tol:
            break
        if it > 5 and rel > prev_rel and damping == 1.0:
            damping = 0.5
        prev_rel = rel
    else:
        raise ConvergenceError(
            f"OLP priority fixed point did not reach {tol:g} within "
            f"{max_iter} iterations (last change {rel:.3e})")

    directions_raw = _gram_inverse_apply(h, lam)
    powers = exact_power_allocation(channels, directions_raw, targets, noise_w,
                                    scheme_name="OLP")
    solution = build_solution(directions_raw, powers, channels=channels,
                              noise_w=noise_w)
    solution = PrecoderSolution(directions=solution.directions,
                                user_powers=solution.user_powers,
                                achieved_sinr=solution.achieved_sinr,
                                total_power_w=solution.total_power_w,
                                multipliers=lam, iterations=it)
    if return_history:
        return solution, np.array(history)
    return solution


def heuristic_directions(channels, alpha, rho: float) -> np.ndarray:
    """(sum_i alpha_i h_i h_i^H + N rho I)^{-1} H (raw directions)."""
    h = _entries(channels)
    n, k = h.shape
    alpha = np.broadcast_to(np.asarray(alpha, dtype=float), (k,))
    if rho <= 0:
        raise ValueError("rho must be positive; use zf_directions for the "
                         "zero-regularization limit")
    a = (h * alpha) @ h.conj().T
    a[np.diag_indices(n)] += n * rho
    return np.linalg.solve(a, h)


def zf_directions(channels) -> np.ndarray:
    """H (H^H H)^{-1}; requires full column rank."""
    h = _entries(channels)
    gram = h.conj().T @ h
    try:
        inv = np.linalg.inv(gram)
    except np.linalg.LinAlgError as exc:
        raise PrecoderInfeasibleError(f"ZF: rank-deficient channel ({exc})")
    return h @ inv


def exact_power_allocation(channels, directions: np.ndarray,
                           targets: SinrTargets, noise_w: float,
                           scheme_name: str = "precoder") -> np.ndarray:
    """Radiated powers making every achieved SINR equal its target.

    Directions are column-normalized first, so the returned powers are the
    literal per-user radiated watts.
    """
    h = _entries(channels)
    gamma = targets.gamma
    norms = np.linalg.norm(directions, axis=0)
    if np.any(norms == 0):
        raise PrecoderInfeasibleError(f"{scheme_name}: zero direction column")
    unit = directions / norms
    cross = np.abs(h.conj().T @ unit) ** 2  # [k, i]
    system = -cross.copy()
    system[np.diag_indices(gamma.size)] = np.diagonal(cross) / gamma
    try:
        powers = noise_w * np.linalg.solve(system, np.ones(gamma.size))
    except np.linalg.LinAlgError as exc:
        raise PrecoderInfeasibleError(f"{scheme_name}: singular allocation "
                                      f"system ({exc})")
    if np.any(powers < 0):
        worst = int(np.argmin(powers))
        raise PrecoderInfeasibleError(
            f"{scheme_name}: negative power for user {worst} "
            f"({powers[worst]:.3e} W); targets infeasible at this instance")
    return powers


def build_solution(directions: np.ndarray, user_powers: np.ndarray,
                   channels=None, noise_w: float | None = None) -> PrecoderSolution:
    """Assemble a solution from directions (normalized here) and powers."""
    norms = np.linalg.norm(directions, axis=0)
    unit = np.divide(directions, norms, out=np.zeros_like(directions),
                     where=norms != 0)
    powers = np.asarray(user_powers, dtype=float)
    total = float(powers.sum())
    if channels is not None and noise_w is not None:
        sinr = compute_sinr(channels, unit * np.sqrt(powers), noise_w)
    else:
        sinr = np.full(powers.size, np.nan)
    return PrecoderSolution(directions=unit, user_powers=powers,
                            achieved_sinr=sinr, total_power_w=total)
