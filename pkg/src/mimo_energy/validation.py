"""Acceptance suite: every shipped claim about the artifact, checked.

Each criterion function runs a self-contained experiment with fixed seeds and
returns a CriterionResult; ``run_all`` executes them in order. The CLI
``validate`` subcommand and the acceptance tests both call into this module
so there is exactly one implementation of the gate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .asymptotics import (SchemeKind, asymptotic_multipliers, power_efficiency)
from .channel import PathlossModel, assemble_channels, db_to_linear, draw_fading
from .config import ExperimentConfig
from .energy import (beta4_covariance_series_value, covariance_series,
                     energy_law, mode_coefficient_closed_form,
                     outage_probability, pathloss_mode_coefficients)
from .geometry import (CellGeometry, integrated_pathloss_covariance,
                       sample_initial_positions)
from .planner import (PlanningInputs, battery_level, golden_section_radius,
                      optimal_cell_radius)
from .precoding import SinrTargets, solve_olp, zf_directions
from .simkit import (fading_variance_probe, ks_critical_value,
                     mobility_variance_probe, run_ensemble, theory_law,
                     trial_seed)
from .specfun import j1_zeros

__all__ = ["CriterionResult", "run_all", "CRITERIA"]


@dataclass
class CriterionResult:
    index: int
    name: str
    passed: bool
    checks: list = field(default_factory=list)  # (label, ok, detail) triples

    def add(self, label: str, ok: bool, detail: str) -> None:
        self.checks.append((label, bool(ok), detail))
        self.passed = self.passed and bool(ok)

    def summary_lines(self) -> list[str]:
        head = f"[{'PASS' if self.passed else 'FAIL'}] criterion {self.index}: {self.name}"
        body = [f"    {'ok  ' if ok else 'FAIL'} {label}: {detail}"
                for label, ok, detail in self.checks]
        return [head, *body]


def _table_setup(**overrides) -> ExperimentConfig:
    base = dict(k_users=16, n_antennas=32, rate_bps_hz=1.5, scheme="olp",
                mode="fast", horizon_h=3.0, trials=1000, seed=2101)
    base.update(overrides)
    return ExperimentConfig(**base)


def criterion_1_table_ratios() -> CriterionResult:
    """Ensemble mean/variance ratios against theory for three setups.

    Note on the T=3h mean windows: the reflected fixed-step walk preserves
    the uniform disc law exactly (it is a billiard flight with a fresh
    direction each slot, and billiard flow preserves phase-space volume), so
    the hardened-power ensemble mean equals the theoretical mean up to
    Monte-Carlo error (~0.2% at 1000 trials). Windows centered 2-3% above
    1.0 are therefore out of reach for this simulation mode; they are kept
    as stated and report honestly.
    """
    res = CriterionResult(1, "energy ratio table (FAST, 1000 trials)", True)
    cells = [
        ("K=16, T=3h", dict(k_users=16, n_antennas=32, horizon_h=3.0,
                            seed=2101), 1.030, 0.02, 1.19, 0.15),
        ("K=32, T=24h", dict(k_users=32, n_antennas=64, horizon_h=24.0,
                             seed=2102), 1.000, 0.01, 1.02, 0.12),
        ("K=64, T=3h", dict(k_users=64, n_antennas=128, horizon_h=3.0,
                            seed=2103), 1.019, 0.015, 1.07, 0.12),
    ]
    for label, cfg, m0, mtol, v0, vtol in cells:
        stats = run_ensemble(_table_setup(**cfg))
        ok_m = abs(stats.ratio_mean - m0) <= mtol
        ok_v = abs(stats.ratio_var - v0) <= vtol
        res.add(f"{label} ratio_mean", ok_m,
                f"{stats.ratio_mean:.4f} vs {m0} +/- {mtol}")
        res.add(f"{label} ratio_var", ok_v,
                f"{stats.ratio_var:.4f} vs {v0} +/- {vtol}")
    return res


def criterion_2_mrt_olp_ratio() -> CriterionResult:
    """Mean-energy ratio of MRT to OLP against the efficiency-factor ratio."""
    res = CriterionResult(2, "MRT/OLP mean-energy ratio", True)
    gamma = np.full(32, 2.0**1.5 - 1.0)
    analytic = (power_efficiency(SchemeKind.OLP, 0.5, gamma)
                / power_efficiency(SchemeKind.MRT, 0.5, gamma))
    res.add("theory ratio near 7.89", abs(analytic / 7.89 - 1.0) < 0.005,
            f"{analytic:.4f}")
    cfg = _table_setup(k_users=32, n_antennas=64, trials=400, seed=2201)
    e_olp = run_ensemble(cfg).mean_j
    e_mrt = run_ensemble(replace(cfg, scheme="mrt", seed=2202)).mean_j
    sim = e_mrt / e_olp
    res.add("simulated ratio within 3% of analytic",
            abs(sim / analytic - 1.0) < 0.03, f"{sim:.4f}")
    # reported, not gated: agreement with the published 7.92
    res.add("(reported) vs 7.92 within 1%", True,
            f"deviation {abs(analytic / 7.92 - 1.0) * 100:.2f}%")
    return res


def _random_instance(rng, n, k, model, radius_m):
    pos = sample_initial_positions(k, CellGeometry(radius_m=radius_m), rng)
    fading = draw_fading(n, k, rng)
    return assemble_channels(pos, fading, model)


def criterion_3_multiplier_convergence() -> CriterionResult:
    """Finite-size priorities approach their deterministic equivalents.

    The median relative deviation is an intrinsic random-matrix fluctuation
    of the quadratic forms, ~0.78/sqrt(N) at c=0.5 (about 6.8% at N=128),
    so the 5% bound would need N around 240. The decrease across N and the
    exact SINR attainment are the solver-health checks; the 5% line reports
    honestly.
    """
    res = CriterionResult(3, "priority convergence (EXACT OLP)", True)
    model = PathlossModel()
    rng = np.random.default_rng(trial_seed(2301, 0))
    c = 0.5
    rate = 1.5
    noise = ExperimentConfig().noise_w
    medians = {}
    worst_sinr = 0.0
    for n in (32, 64, 128):
        k = n // 2
        targets = SinrTargets.uniform(rate, k)
        eff = power_efficiency(SchemeKind.OLP, c, targets.gamma)
        devs = []
        for _ in range(50):
            channels = _random_instance(rng, n, k, model, 500.0)
            sol = solve_olp(channels, targets, noise)
            lam_bar = asymptotic_multipliers(targets.gamma,
                                             channels.attenuations(), eff)
            devs.append(np.median(np.abs(sol.multipliers - lam_bar) / lam_bar))
            worst_sinr = max(worst_sinr, float(np.max(
                np.abs(sol.achieved_sinr - targets.gamma) / targets.gamma)))
        medians[n] = float(np.mean(devs))
    res.add("median deviation decreases with N",
            medians[32] > medians[64] > medians[128],
            f"{medians[32]:.4f} > {medians[64]:.4f} > {medians[128]:.4f}")
    res.add("below 5% at N=128", medians[128] < 0.05, f"{medians[128]:.4f}")
    res.add("achieved SINR equals targets to 1e-6", worst_sinr < 1e-6,
            f"worst {worst_sinr:.2e}")
    return res


def criterion_4_zf_user_powers() -> CriterionResult:
    """ZF radiated powers, rescaled by N*l*(1-c), approach target*noise.

    The rescale is exactly unbiased, and the remaining deviation is the
    inverse-Wishart fluctuation of the direction norms with expected mean
    absolute value sqrt(2/pi)/sqrt(N-K-1), i.e. 10.05% at N=128 -- a hair
    above the stated 10% bound, so this line sits at the tolerance edge.
    (In the alternative power convention the equality is exact at any N,
    which would make the convergence statement vacuous.)
    """
    res = CriterionResult(4, "ZF per-user power convergence", True)
    model = PathlossModel()
    rng = np.random.default_rng(trial_seed(2401, 0))
    c = 0.5
    noise = ExperimentConfig().noise_w
    gamma_s = 2.0**1.5 - 1.0
    means = {}
    for n in (32, 64, 128):
        k = n // 2
        devs = []
        for _ in range(50):
            channels = _random_instance(rng, n, k, model, 500.0)
            directions = zf_directions(channels)
            norms2 = np.sum(np.abs(directions) ** 2, axis=0).real
            radiated = gamma_s * noise * norms2  # exact allocation for ZF
            limit = gamma_s * noise / (n * channels.attenuations() * (1.0 - c))
            devs.append(np.mean(np.abs(radiated / limit - 1.0)))
        means[n] = float(np.mean(devs))
    res.add("mean deviation decreases with N",
            means[32] > means[64] > means[128],
            f"{means[32]:.4f} > {means[64]:.4f} > {means[128]:.4f}")
    res.add("below 10% at N=128", means[128] < 0.10, f"{means[128]:.4f}")
    return res


def criterion_5_theta_series() -> CriterionResult:
    """Series truncation stability and closed-form agreement."""
    res = CriterionResult(5, "covariance series identities", True)
    model = PathlossModel()
    radius, d = 500.0, 50.0**2 / (4 * 30.0)
    worst_trunc = 0.0
    for hours in (3.0, 6.0, 12.0, 24.0):
        t50 = covariance_series(model, radius, d, hours * 3600.0, terms=50)
        t200 = covariance_series(model, radius, d, hours * 3600.0, terms=200)
        worst_trunc = max(worst_trunc, abs(t50.value / t200.value - 1.0))
    res.add("50-term vs 200-term truncation < 1e-6", worst_trunc < 1e-6,
            f"worst {worst_trunc:.2e}")
    quad = covariance_series(model, radius, d, 3 * 3600.0, terms=200,
                             method="quadrature")
    closed = beta4_covariance_series_value(model, radius, d, 3 * 3600.0,
                                           terms=200)
    dev4 = abs(quad.value / closed - 1.0)
    res.add("exponent-4 closed form vs quadrature < 1e-8", dev4 < 1e-8,
            f"{dev4:.2e}")
    model6 = PathlossModel(beta=6.0, xbar_m=25.0, l_xbar=db_to_linear(-93.0))
    zeros = j1_zeros(12)
    phi_q = pathloss_mode_coefficients(model6, radius, zeros,
                                       method="quadrature")
    phi_c = mode_coefficient_closed_form(model6, radius, zeros.values)
    dev6 = float(np.max(np.abs(phi_q / phi_c - 1.0)))
    res.add("exponent-6 closed form vs quadrature < 1e-8", dev6 < 1e-8,
            f"{dev6:.2e}")
    return res


def criterion_6_covariance_cross_oracle() -> CriterionResult:
    """Walk-simulated integrated covariance against the analytic series."""
    res = CriterionResult(6, "mobility covariance cross-oracle", True)
    cfg = ExperimentConfig()
    model, geometry, walk = cfg.model(), cfg.geometry(), cfg.walk()
    d = walk.diffusion_m2_per_s
    for ratio, trials, seed in ((0.1, 40_000, 2601), (0.5, 30_000, 2602),
                                (2.0, 20_000, 2603)):
        horizon = ratio * cfg.radius_m**2 / d
        series = covariance_series(model, cfg.radius_m, d, horizon, terms=120)
        target = series.value * horizon * cfg.radius_m**2 / d
        mc = integrated_pathloss_covariance(walk, geometry, model, horizon,
                                            trials, seed)
        dev = abs(mc["conditional"] / target - 1.0)
        res.add(f"DT/R^2={ratio}", dev < 0.05,
                f"MC/theory = {mc['conditional'] / target:.4f}")
    return res


def criterion_7_gaussianity() -> CriterionResult:
    """Energy samples match the Gaussian law (KS at 1%, CCDF sup)."""
    res = CriterionResult(7, "normal limit of the energy", True)
    cfg = _table_setup(k_users=64, n_antennas=128, horizon_h=12.0, seed=2701)
    stats = run_ensemble(cfg)
    crit = ks_critical_value(stats.trials, 0.01)
    res.add("KS test at the 1% level", stats.ks_stat < crit,
            f"stat {stats.ks_stat:.4f} vs critical {crit:.4f}")
    res.add("CCDF sup distance < 0.05", stats.ks_stat < 0.05,
            f"{stats.ks_stat:.4f}")
    return res


def criterion_8_variance_scaling() -> CriterionResult:
    """Mobility variance ~ 1/K; fading-induced power variance ~ 1/K^2."""
    res = CriterionResult(8, "variance scaling exponents", True)
    cfg = _table_setup(k_users=16, n_antennas=32, trials=1500, seed=2801)
    mob = mobility_variance_probe(cfg, k_values=(8, 16, 32, 64))
    res.add("mobility slope -1 +/- 0.3", abs(mob["slope"] + 1.0) <= 0.3,
            f"{mob['slope']:.3f}")
    cfg2 = _table_setup(k_users=16, n_antennas=32, mode="exact", seed=2802)
    fad = fading_variance_probe(cfg2, k_values=(8, 16, 32, 64), draws=250,
                                position_sets=5)
    res.add("fading slope -2 +/- 0.3", abs(fad["slope"] + 2.0) <= 0.3,
            f"{fad['slope']:.3f}")
    return res


def criterion_9_planner() -> CriterionResult:
    """Battery/outage inversion and the optimal-radius closed form."""
    res = CriterionResult(9, "planning formulas", True)
    cfg = _table_setup(k_users=64, n_antennas=128, horizon_h=12.0)
    gamma = cfg.targets().gamma
    eff = power_efficiency(SchemeKind.OLP, cfg.c_ratio, gamma)
    law, _ = energy_law(cfg.c_ratio, gamma, cfg.noise_w, eff, cfg.model(),
                        cfg.radius_m, cfg.walk().diffusion_m2_per_s,
                        cfg.horizon_s, cfg.k_users)
    worst = 0.0
    for chi in (0.5, 0.01, 1e-3):
        inputs = PlanningInputs(chi=chi, theta_overhead_w=18.0,
                                model=cfg.model(), c=cfg.c_ratio, gamma=gamma,
                                noise_w=cfg.noise_w, efficiency=eff,
                                horizon_s=cfg.horizon_s, law=law)
        level = battery_level(inputs)
        worst = max(worst, abs(outage_probability(level, law) - chi))
    res.add("battery/outage round trip exact to 1e-10", worst < 1e-10,
            f"worst {worst:.2e}")
    inputs = PlanningInputs(chi=0.01, theta_overhead_w=18.0, model=cfg.model(),
                            c=cfg.c_ratio, gamma=gamma, noise_w=cfg.noise_w,
                            efficiency=eff, horizon_s=cfg.horizon_s)
    closed = optimal_cell_radius(inputs)
    numeric = golden_section_radius(inputs)
    dev = abs(numeric / closed.radius_m - 1.0)
    res.add("closed-form radius vs golden section within 0.1%",
            closed.closed_form and dev < 1e-3,
            f"{closed.radius_m:.2f} m vs {numeric:.2f} m ({dev:.2e})")
    return res


def criterion_10_imperfect_csi() -> CriterionResult:
    """Degraded-estimate runs match theory with substituted targets."""
    res = CriterionResult(10, "imperfect-CSI agreement", True)
    run = 0
    for scheme in ("zf", "rzf"):
        for tau2 in (0.05, 0.15):
            cfg = _table_setup(k_users=32, n_antennas=64, horizon_h=12.0,
                               scheme=scheme, tau=math.sqrt(tau2),
                               seed=2911 + run)
            run += 1
            stats = run_ensemble(cfg)
            ok_m = abs(stats.ratio_mean - 1.0) <= 0.015
            ok_v = abs(stats.ratio_var - 1.0) <= 0.12
            res.add(f"{scheme} tau^2={tau2} ratio_mean", ok_m,
                    f"{stats.ratio_mean:.4f}")
            res.add(f"{scheme} tau^2={tau2} ratio_var", ok_v,
                    f"{stats.ratio_var:.4f}")
            perfect_law, _ = theory_law(replace(cfg, tau=0.0))
            res.add(f"{scheme} tau^2={tau2} mean energy exceeds perfect-CSI",
                    stats.law.mean_j > perfect_law.mean_j,
                    f"{stats.law.mean_j:.1f} J > {perfect_law.mean_j:.1f} J")
    return res


CRITERIA = [
    criterion_1_table_ratios,
    criterion_2_mrt_olp_ratio,
    criterion_3_multiplier_convergence,
    criterion_4_zf_user_powers,
    criterion_5_theta_series,
    criterion_6_covariance_cross_oracle,
    criterion_7_gaussianity,
    criterion_8_variance_scaling,
    criterion_9_planner,
    criterion_10_imperfect_csi,
]


def run_all(indices=None) -> list[CriterionResult]:
    chosen = indices or range(1, len(CRITERIA) + 1)
    return [CRITERIA[i - 1]() for i in chosen]
