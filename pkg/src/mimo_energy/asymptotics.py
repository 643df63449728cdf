"""Large-system deterministic equivalents for all precoding schemes.

In the limit of many antennas and users at fixed ratio c = K/N, the transmit
power of each scheme hardens to c * noise * load / efficiency, where ``load``
averages target-SINR-weighted inverse attenuations over the current user
positions and ``efficiency`` is the scheme-dependent factor computed here.
All fixed points use Picard iteration with deterministic iteration order.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .channel import PathlossModel, pathloss

__all__ = [
    "SchemeKind",
    "InfeasibleTargetsError",
    "AsymptoticSummary",
    "ClassicalRzfEquivalents",
    "power_efficiency",
    "pathloss_load",
    "asymptotic_total_power",
    "asymptotic_multipliers",
    "asymptotic_user_powers",
    "regularizer_fixed_point",
    "optimal_regularization",
    "classical_rzf_equivalents",
    "imperfect_csi_efficiency",
    "summarize",
]


class InfeasibleTargetsError(RuntimeError):
    """Targets too aggressive for the scheme in the large-system limit."""


class SchemeKind(str, Enum):
    OLP = "olp"
    MRT = "mrt"
    ZF = "zf"
    RZF_STATISTICAL = "rzf"
    RZF_CLASSICAL = "rzf-classical"

    @classmethod
    def parse(cls, token: str) -> "SchemeKind":
        try:
            return cls(token.strip().lower())
        except ValueError:
            valid = ", ".join(s.value for s in cls)
            raise ValueError(f"unknown scheme {token!r}; expected one of {valid}")


def power_efficiency(scheme: SchemeKind, c: float, gamma) -> float:
    """Scheme efficiency factor; asymptotic power is c*noise*load/efficiency.

    Raises InfeasibleTargetsError when the factor is non-positive (for MRT
    this is the uniform-rate cap rate < log2(1 + 1/c)).
    """
    g = np.atleast_1d(np.asarray(gamma, dtype=float))
    if np.any(g <= 0):
        raise ValueError("targets must be positive")
    scheme = SchemeKind(scheme)
    if scheme is SchemeKind.OLP:
        eff = 1.0 - c * np.mean(g / (1.0 + g))
    elif scheme is SchemeKind.MRT:
        eff = 1.0 - c * np.mean(g)
    elif scheme is SchemeKind.ZF:
        eff = 1.0 - c
    else:  # both regularized variants share the factor
        gbar = float(np.mean(g))
        eff = 1.0 - c * gbar / (1.0 + gbar)
    if eff <= 0:
        raise InfeasibleTargetsError(
            f"{scheme.value}: efficiency factor {eff:.4g} <= 0; targets "
            "unreachable in the large-system limit")
    return float(eff)


def pathloss_load(positions, gamma, model: PathlossModel) -> float:
    """Average over users of target SINR divided by channel attenuation."""
    att = pathloss(np.asarray(positions, dtype=float), model)
    return load_from_attenuations(att, gamma)


def load_from_attenuations(attenuations, gamma) -> float:
    g = np.atleast_1d(np.asarray(gamma, dtype=float))
    att = np.atleast_1d(np.asarray(attenuations, dtype=float))
    return float(np.mean(g / att))


def asymptotic_total_power(scheme: SchemeKind, c: float, gamma, positions,
                           model: PathlossModel, noise_w: float) -> float:
    """Deterministic equivalent of the transmit power at these positions."""
    scheme = SchemeKind(scheme)
    if scheme is SchemeKind.RZF_CLASSICAL:
        att = pathloss(np.asarray(positions, dtype=float), model)
        return classical_rzf_equivalents(att, gamma, c, noise_w).total_power_w
    eff = power_efficiency(scheme, c, gamma)
    return c * noise_w * pathloss_load(positions, gamma, model) / eff


def asymptotic_multipliers(gamma, attenuations, efficiency: float) -> np.ndarray:
    """Limits of the per-user priorities: target / (attenuation * efficiency)."""
    if efficiency <= 0:
        raise ValueError("efficiency must be positive")
    g = np.atleast_1d(np.asarray(gamma, dtype=float))
    att = np.atleast_1d(np.asarray(attenuations, dtype=float))
    if np.any(att <= 0):
        raise ValueError("attenuations must be positive")
    return g / (att * efficiency)


def asymptotic_user_powers(scheme: SchemeKind, c: float, gamma, positions,
                           model: PathlossModel, noise_w: float) -> np.ndarray:
    """Per-user radiated-power equivalents for the scheme."""
    scheme = SchemeKind(scheme)
    g = np.atleast_1d(np.asarray(gamma, dtype=float))
    att = pathloss(np.asarray(positions, dtype=float), model)
    if scheme is SchemeKind.ZF:
        return g * noise_w * np.ones_like(att)

    if scheme is SchemeKind.RZF_CLASSICAL:
        eq = classical_rzf_equivalents(att, g, c, noise_w)
        mu, pbar = eq.mu_star, eq.total_power_w
        scale = 1.0 + att * mu
    elif scheme is SchemeKind.OLP:
        eff = power_efficiency(scheme, c, g)
        pbar = c * noise_w * load_from_attenuations(att, g) / eff
        mu = eff
        scale = 1.0 + g
    elif scheme is SchemeKind.MRT:
        eff = power_efficiency(scheme, c, g)
        pbar = c * noise_w * load_from_attenuations(att, g) / eff
        mu = 1.0
        scale = np.ones_like(att)
    else:  # RZF_STATISTICAL: alpha_k = 1/l_k makes alpha*l*mu = mean target
        eff = power_efficiency(scheme, c, g)
        pbar = c * noise_w * load_from_attenuations(att, g) / eff
        mu = float(np.mean(g))
        scale = np.full_like(att, 1.0 + mu)
    return g / (att * mu**2) * (pbar + noise_w / att * scale**2)


def regularizer_fixed_point(alpha, attenuations, rho: float, c: float,
                            tol: float = 1e-12, max_iter: int = 10_000) -> float:
    """Unique positive solution of mu = 1/(c*mean(a*l/(1+a*l*mu)) + rho)."""
    if rho <= 0:
        raise ValueError("rho must be positive")
    al = (np.atleast_1d(np.asarray(alpha, dtype=float))
          * np.atleast_1d(np.asarray(attenuations, dtype=float)))
    mu = 1.0 / rho
    damping = 1.0
    prev_rel = np.inf
    for it in range(max_iter):
        target = 1.0 / (c * np.mean(al / (1.0 + al * mu)) + rho)
        new = mu + damping * (target - mu)
        rel = abs(new - mu) / abs(new)
        mu = new
        if rel < tol:
            break
        if it > 5 and rel > prev_rel and damping == 1.0:
            damping = 0.5
        prev_rel = rel
    else:
        raise RuntimeError("regularizer fixed point did not converge")
    return float(mu)


def optimal_regularization(gamma, c: float) -> float:
    """Power-minimizing regularization for the attenuation-aware variant."""
    gbar = float(np.mean(np.asarray(gamma, dtype=float)))
    if gbar <= 0:
        raise ValueError("mean target must be positive")
    return 1.0 / gbar - c / (1.0 + gbar)


@dataclass(frozen=True)
class ClassicalRzfEquivalents:
    mu_star: float
    rho_star: float
    total_power_w: float


def classical_rzf_equivalents(attenuations, gamma, c: float, noise_w: float,
                              tol: float = 1e-12,
                              max_iter: int = 10_000) -> ClassicalRzfEquivalents:
    """Equivalents for the plain regularized scheme (unit channel weights).

    The auxiliary scale solves a ratio fixed point (damped Picard); the
    optimal regularization and the power equivalent follow from it.
    """
    att = np.atleast_1d(np.asarray(attenuations, dtype=float))
    g = np.atleast_1d(np.asarray(gamma, dtype=float))
    if att.shape != g.shape:
        raise ValueError("attenuations and targets must align")

    def ratio(mu):
        denom3 = (1.0 + att * mu) ** 3
        return float(np.sum(att * g / denom3) / np.sum(att**2 / denom3))

    mu = float(np.mean(g) / np.mean(att))  # scale-aware start
    damping = 0.5
    for it in range(max_iter):
        new = mu + damping * (ratio(mu) - mu)
        rel = abs(new - mu) / abs(new)
        mu = new
        if rel < tol:
            break
    else:
        raise RuntimeError("classical RZF fixed point did not converge")

    denom = 1.0 + att * mu
    rho = 1.0 / mu - c * float(np.mean(att / denom))
    b_term = float(np.mean(g / denom**2))
    f_term = c * float(np.mean(att**2 / denom**2))
    eff = 1.0 - mu**2 * f_term - c * b_term
    if eff <= 0:
        raise InfeasibleTargetsError(
            f"classical regularized scheme: efficiency {eff:.4g} <= 0")
    load = float(np.mean(g / att))
    return ClassicalRzfEquivalents(mu_star=float(mu), rho_star=float(rho),
                                   total_power_w=c * noise_w * load / eff)


def imperfect_csi_efficiency(scheme: SchemeKind, c: float, gamma, tau):
    """Efficiency and inflated targets under imperfect channel estimates.

    Returns (efficiency, effective_targets) with effective target
    gamma/(1 - tau^2). The estimation penalty term is averaged over users
    (this keeps the tau -> 0 limit continuous with the perfect-CSI factor).
    Only the zero-forcing and attenuation-aware regularized schemes are
    supported.
    """
    scheme = SchemeKind(scheme)
    g = np.atleast_1d(np.asarray(gamma, dtype=float))
    t = np.broadcast_to(np.atleast_1d(np.asarray(tau, dtype=float)), g.shape)
    if np.any((t < 0) | (t >= 1)):
        raise ValueError("tau must lie in [0, 1)")
    g_eff = g / (1.0 - t**2)
    if scheme is SchemeKind.ZF:
        base = 1.0 - c
    elif scheme is SchemeKind.RZF_STATISTICAL:
        gbar = float(np.mean(g))
        base = 1.0 - c * gbar / (1.0 + gbar)
    else:
        raise ValueError("imperfect-CSI efficiency is available for the "
                         "zero-forcing and regularized schemes only")
    eff = base - c * float(np.mean(g_eff * t**2))
    if eff <= 0:
        raise InfeasibleTargetsError(
            f"{scheme.value} with imperfect CSI: efficiency {eff:.4g} <= 0; "
            "estimates too poor for the requested targets")
    return float(eff), g_eff


@dataclass(frozen=True)
class AsymptoticSummary:
    """Deterministic equivalents for one scheme at given user positions."""

    scheme: SchemeKind
    eta: float
    a_of_t: float
    pbar_w: float
    user_pbar_w: np.ndarray
    user_lambda: np.ndarray | None = None
    mu: float | None = None
    rho: float | None = None

    def to_json_dict(self) -> dict:
        per_user = []
        for i in range(self.user_pbar_w.size):
            entry = {"pbar_w": float(self.user_pbar_w[i])}
            if self.user_lambda is not None:
                entry["lambda"] = float(self.user_lambda[i])
            per_user.append(entry)
        return {
            "scheme": self.scheme.value,
            "eta": self.eta,
            "rho": self.rho,
            "mu": self.mu,
            "pbar_w": self.pbar_w,
            "per_user": per_user,
        }


def summarize(scheme: SchemeKind, c: float, gamma, positions,
              model: PathlossModel, noise_w: float) -> AsymptoticSummary:
    """All deterministic equivalents for a scheme at the given positions."""
    scheme = SchemeKind(scheme)
    g = np.atleast_1d(np.asarray(gamma, dtype=float))
    att = pathloss(np.asarray(positions, dtype=float), model)
    eff = power_efficiency(scheme, c, g)
    load = load_from_attenuations(att, g)
    user_p = asymptotic_user_powers(scheme, c, g, positions, model, noise_w)

    mu = rho = None
    user_lambda = None
    if scheme is SchemeKind.OLP:
        pbar = c * noise_w * load / eff
        user_lambda = asymptotic_multipliers(g, att, eff)
    elif scheme is SchemeKind.MRT:
        pbar = c * noise_w * load / eff
        mu = 1.0
    elif scheme is SchemeKind.ZF:
        pbar = c * noise_w * load / eff
    elif scheme is SchemeKind.RZF_STATISTICAL:
        pbar = c * noise_w * load / eff
        mu = float(np.mean(g))
        rho = optimal_regularization(g, c)
    else:
        eq = classical_rzf_equivalents(att, g, c, noise_w)
        pbar = eq.total_power_w
        mu, rho = eq.mu_star, eq.rho_star
    return AsymptoticSummary(scheme=scheme, eta=eff, a_of_t=load, pbar_w=pbar,
                             user_pbar_w=user_p, user_lambda=user_lambda,
                             mu=mu, rho=rho)
