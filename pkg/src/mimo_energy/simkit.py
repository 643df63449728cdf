"""Monte-Carlo engine: trajectories, per-slot precoder solves or hardened
powers, per-trial energy accumulation, and comparison against theory.

Modes
-----
EXACT : every slot advances the walkers, redraws fading, solves the
        configured precoder with exact power allocation, and accumulates
        trace power. Faithful but expensive.
FAST  : every slot accumulates the hardened (large-system) power, which
        depends on positions only. This is the default for distribution
        studies since mobility dominates the energy fluctuations.

Per-trial randomness comes from counter-based children of the master seed,
so ensembles are reproducible and trials are independent work units; the
vectorized FAST path reproduces ``run_trial`` bit for bit.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, replace

import numpy as np

from . import backend
from .asymptotics import (SchemeKind, classical_rzf_equivalents,
                          imperfect_csi_efficiency, optimal_regularization,
                          power_efficiency)
from .channel import (CsiQuality, assemble_channels, corrupt_csi, draw_fading,
                      pathloss)
from .config import ExperimentConfig
from .energy import CovarianceSeries, EnergyLaw, energy_law
from .geometry import advance_walk, sample_initial_positions
from .precoding import (PrecoderSolution, SinrTargets, compute_sinr,
                        exact_power_allocation, build_solution,
                        heuristic_directions, solve_olp, zf_directions)
from .specfun import gaussian_tail

__all__ = [
    "TrialResult",
    "EnsembleStats",
    "trial_seed",
    "run_trial",
    "run_ensemble",
    "solve_scheme",
    "theory_law",
    "empirical_ccdf",
    "compare_outage",
    "ks_statistic",
    "ks_critical_value",
    "fading_variance_probe",
    "mobility_variance_probe",
    "write_trials_csv",
    "write_ccdf_csv",
    "write_summary_json",
]

_UNIFIED = (SchemeKind.OLP, SchemeKind.MRT, SchemeKind.ZF,
            SchemeKind.RZF_STATISTICAL)
_BATCH_TRIALS = 256
_SLOT_CHUNK = 128


@dataclass(frozen=True)
class TrialResult:
    trial_index: int
    energy_j: float
    slot_powers_w: np.ndarray | None = None
    slot_sinr_min: np.ndarray | None = None  # exact mode only
    slot_sinr_max: np.ndarray | None = None


@dataclass(frozen=True)
class EnsembleStats:
    samples_j: np.ndarray  # sorted ascending
    mean_j: float
    variance_j2: float
    law: EnergyLaw | None
    series: CovarianceSeries | None
    ratio_mean: float | None
    ratio_var: float | None
    ks_stat: float | None

    @property
    def trials(self) -> int:
        return self.samples_j.size


def trial_seed(master_seed: int, trial_index: int) -> np.random.SeedSequence:
    """Counter-based per-trial seed derived from the master seed."""
    return np.random.SeedSequence(master_seed, spawn_key=(trial_index,))


def _effective_targets(config: ExperimentConfig):
    """(efficiency, per-user weights) driving the hardened power; CSI error
    inflates the targets and shrinks the efficiency."""
    kind = config.scheme_kind()
    gamma = config.targets().gamma
    if config.tau > 0 and kind in (SchemeKind.ZF, SchemeKind.RZF_STATISTICAL):
        return imperfect_csi_efficiency(kind, config.c_ratio, gamma, config.tau)
    return power_efficiency(kind, config.c_ratio, gamma), gamma


def theory_law(config: ExperimentConfig):
    """Gaussian energy law for the configured run, or None when the scheme
    has no unified hardened-power form (classical regularized variant)."""
    kind = config.scheme_kind()
    if kind is SchemeKind.RZF_CLASSICAL:
        return None, None
    eff, gamma_eff = _effective_targets(config)
    law, series = energy_law(config.c_ratio, gamma_eff, config.noise_w, eff,
                             config.model(), config.radius_m,
                             config.walk().diffusion_m2_per_s,
                             config.horizon_s, config.k_users,
                             terms=config.theta_terms)
    return law, series


# ---------------------------------------------------------------------------
# per-slot precoder dispatch (EXACT mode)
# ---------------------------------------------------------------------------

def solve_scheme(channels, targets: SinrTargets, noise_w: float,
                 scheme: SchemeKind, c: float) -> PrecoderSolution:
    """Solve the configured precoder with exact power allocation."""
    scheme = SchemeKind(scheme)
    if scheme is SchemeKind.OLP:
        return solve_olp(channels, targets, noise_w)
    if scheme is SchemeKind.MRT:
        directions = channels.entries / channels.n_antennas
    elif scheme is SchemeKind.ZF:
        directions = zf_directions(channels)
    elif scheme is SchemeKind.RZF_STATISTICAL:
        att = channels.attenuations()
        rho = optimal_regularization(targets.gamma, c)
        directions = heuristic_directions(channels, 1.0 / att, rho)
    else:
        att = channels.attenuations()
        eq = classical_rzf_equivalents(att, targets.gamma, c, noise_w)
        if eq.rho_star <= 0:
            raise RuntimeError("classical regularization came out non-positive")
        directions = heuristic_directions(channels, 1.0, eq.rho_star)
    powers = exact_power_allocation(channels, directions, targets, noise_w,
                                    scheme_name=scheme.value)
    return build_solution(directions, powers, channels=channels,
                          noise_w=noise_w)


def _hardened_power(kind: SchemeKind, positions, config, eff, gamma_eff):
    """Per-slot hardened transmit power at the given positions."""
    att = pathloss(positions, config.model())
    if kind is SchemeKind.RZF_CLASSICAL:
        eq = classical_rzf_equivalents(att, gamma_eff, config.c_ratio,
                                       config.noise_w)
        return eq.total_power_w
    load = float(np.mean(gamma_eff / att))
    return config.c_ratio * config.noise_w * load / eff


# ---------------------------------------------------------------------------
# trials
# ---------------------------------------------------------------------------

def run_trial(config: ExperimentConfig, seed,
              keep_slot_powers: bool = False) -> TrialResult:
    """One trial. ``seed`` is a trial index (int) or a SeedSequence."""
    if isinstance(seed, (int, np.integer)):
        index, seq = int(seed), trial_seed(config.seed, int(seed))
    else:
        index, seq = -1, seed
    rng = np.random.default_rng(seq)
    if config.mode == "fast":
        energy, slot_powers = _fast_trial(config, rng, keep_slot_powers)
        sinr_lo = sinr_hi = None
    else:
        energy, slot_powers, sinr_lo, sinr_hi = _exact_trial(
            config, rng, keep_slot_powers)
    return TrialResult(trial_index=index, energy_j=energy,
                       slot_powers_w=slot_powers, slot_sinr_min=sinr_lo,
                       slot_sinr_max=sinr_hi)


def _fast_trial(config, rng, keep_slot_powers):
    kind = config.scheme_kind()
    geometry, walk, model = config.geometry(), config.walk(), config.model()
    eff, gamma_eff = (None, config.targets().gamma) \
        if kind is SchemeKind.RZF_CLASSICAL else _effective_targets(config)
    pos = sample_initial_positions(config.k_users, geometry, rng)
    slots = config.slots
    xi = config.slot_duration_s
    powers = np.empty(slots) if keep_slot_powers else None

    if kind is SchemeKind.RZF_CLASSICAL:
        energy = 0.0
        for n in range(slots):
            advance_walk(pos, 2.0 * np.pi * rng.random(config.k_users),
                         walk, geometry)
            p = _hardened_power(kind, pos, config, eff, gamma_eff)
            energy += p * xi
            if keep_slot_powers:
                powers[n] = p
        return energy, powers

    acc = np.zeros(1)
    weights = np.asarray(gamma_eff, dtype=float)
    done = 0
    scale = config.c_ratio * config.noise_w / (eff * config.k_users)
    while done < slots:
        chunk = min(_SLOT_CHUNK, slots - done)
        angles = 2.0 * np.pi * rng.random((chunk, config.k_users))
        for j in range(chunk):
            before = acc[0]
            advance_walk(pos, angles[j], walk, geometry)
            backend.weighted_inv_pathloss_sums(
                pos, weights, config.k_users, model.beta, model.xbar_m,
                model.l_xbar, acc)
            if keep_slot_powers:
                powers[done + j] = (acc[0] - before) * scale
        done += chunk
    return float(acc[0]) * scale * xi, powers


def _exact_trial(config, rng, keep_slot_powers):
    kind = config.scheme_kind()
    geometry, walk, model = config.geometry(), config.walk(), config.model()
    targets = config.targets()
    quality = (CsiQuality.uniform(config.tau, config.k_users)
               if config.tau > 0 else None)
    pos = sample_initial_positions(config.k_users, geometry, rng)
    slots = config.slots
    xi = config.slot_duration_s
    powers = np.empty(slots) if keep_slot_powers else None
    sinr_lo = np.empty(slots) if keep_slot_powers else None
    sinr_hi = np.empty(slots) if keep_slot_powers else None
    energy = 0.0
    for n in range(slots):
        advance_walk(pos, 2.0 * np.pi * rng.random(config.k_users),
                     walk, geometry)
        fading = draw_fading(config.n_antennas, config.k_users, rng)
        channels = assemble_channels(pos, fading, model)
        known = (corrupt_csi(channels, quality, rng)
                 if quality is not None else channels)
        solution = solve_scheme(known, targets, config.noise_w, kind,
                                config.c_ratio)
        achieved = (solution.achieved_sinr if quality is None else
                    compute_sinr(channels, solution.precoder, config.noise_w))
        if quality is None:
            worst = float(np.max(np.abs(achieved - targets.gamma)
                                 / targets.gamma))
            if worst > 1e-6:
                raise RuntimeError(
                    f"achieved SINR off target by {worst:.2e} at slot {n}")
        energy += solution.total_power_w * xi
        if keep_slot_powers:
            powers[n] = solution.total_power_w
            sinr_lo[n] = float(np.min(achieved))
            sinr_hi[n] = float(np.max(achieved))
    return energy, powers, sinr_lo, sinr_hi


def _fast_ensemble_energies(config: ExperimentConfig) -> np.ndarray:
    """Vectorized FAST ensemble; bit-identical to mapping run_trial."""
    kind = config.scheme_kind()
    geometry, walk, model = config.geometry(), config.walk(), config.model()
    eff, gamma_eff = _effective_targets(config)
    k = config.k_users
    slots = config.slots
    weights_one = np.asarray(gamma_eff, dtype=float)
    energies = np.empty(config.trials)
    # two-factor scaling in the same order as the single-trial path keeps
    # the vectorized ensemble bit-identical to run_trial
    scale = config.c_ratio * config.noise_w / (eff * k)

    for start in range(0, config.trials, _BATCH_TRIALS):
        idx = range(start, min(start + _BATCH_TRIALS, config.trials))
        gens = [np.random.default_rng(trial_seed(config.seed, i)) for i in idx]
        b = len(gens)
        pos = np.concatenate(
            [sample_initial_positions(k, geometry, g) for g in gens], axis=0)
        weights = np.tile(weights_one, b)
        acc = np.zeros(b)
        done = 0
        angles = np.empty((_SLOT_CHUNK, b * k))
        while done < slots:
            chunk = min(_SLOT_CHUNK, slots - done)
            for j, g in enumerate(gens):
                angles[:chunk, j * k:(j + 1) * k] = g.random((chunk, k))
            for row in angles[:chunk]:
                advance_walk(pos, 2.0 * np.pi * row, walk, geometry)
                backend.weighted_inv_pathloss_sums(
                    pos, weights, k, model.beta, model.xbar_m, model.l_xbar,
                    acc)
            done += chunk
        energies[list(idx)] = acc * scale * config.slot_duration_s
    return energies


def run_ensemble(config: ExperimentConfig) -> EnsembleStats:
    """All trials plus empirical statistics and theory ratios."""
    if config.trials < 2:
        raise ValueError("an ensemble needs at least 2 trials")
    kind = config.scheme_kind()
    if config.mode == "fast" and kind in _UNIFIED:
        energies = _fast_ensemble_energies(config)
    else:
        energies = np.array([run_trial(config, i).energy_j
                             for i in range(config.trials)])
    law, series = theory_law(config)
    mean = float(np.mean(energies))
    var = float(np.var(energies, ddof=1))
    ratio_mean = ratio_var = ks = None
    if law is not None:
        ratio_mean = mean / law.mean_j
        ratio_var = config.k_users * var / law.variance_scale_j2
        ks = ks_statistic(energies, law.mean_j, law.std_j)
    return EnsembleStats(samples_j=np.sort(energies), mean_j=mean,
                         variance_j2=var, law=law, series=series,
                         ratio_mean=ratio_mean, ratio_var=ratio_var,
                         ks_stat=ks)


# ---------------------------------------------------------------------------
# empirical distribution vs theory
# ---------------------------------------------------------------------------

def ks_statistic(samples: np.ndarray, mean: float, std: float) -> float:
    """Kolmogorov-Smirnov sup distance against a Gaussian(mean, std^2)."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    cdf = np.array([1.0 - gaussian_tail((v - mean) / std) for v in x])
    upper = np.max(np.arange(1, n + 1) / n - cdf)
    lower = np.max(cdf - np.arange(0, n) / n)
    return float(max(upper, lower))


def ks_critical_value(n: int, alpha: float = 0.01) -> float:
    """Asymptotic KS critical value at significance ``alpha``."""
    return math.sqrt(-0.5 * math.log(alpha / 2.0)) / math.sqrt(n)


def empirical_ccdf(stats: EnsembleStats, horizon_s: float,
                   grid_w: np.ndarray | None = None):
    """Rows (alpha_w, empirical, theoretical) for the CCDF of energy/time."""
    rates = stats.samples_j / horizon_s
    if grid_w is None:
        lo, hi = rates[0], rates[-1]
        pad = 0.05 * (hi - lo)
        grid_w = np.linspace(lo - pad, hi + pad, 101)
    n = rates.size
    emp = np.array([float(np.sum(rates > a)) / n for a in grid_w])
    if stats.law is not None:
        mean_w = stats.law.mean_j / horizon_s
        std_w = stats.law.std_j / horizon_s
        theo = np.array([gaussian_tail((a - mean_w) / std_w) for a in grid_w])
    else:
        theo = np.full(grid_w.size, np.nan)
    return np.column_stack([grid_w, emp, theo])


def compare_outage(stats: EnsembleStats, law: EnergyLaw | None = None) -> dict:
    """Side-by-side empirical/theoretical exceedance table and sup distance."""
    law = law or stats.law
    if law is None:
        raise ValueError("no theory law available for this configuration")
    sup = ks_statistic(stats.samples_j, law.mean_j, law.std_j)
    rows = []
    for q in (0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99):
        budget = float(np.quantile(stats.samples_j, q))
        emp = float(np.mean(stats.samples_j > budget))
        theo = gaussian_tail((budget - law.mean_j) / law.std_j)
        rows.append({"budget_j": budget, "empirical": emp, "theoretical": theo})
    return {"sup_distance": sup, "rows": rows,
            "ks_critical_1pct": ks_critical_value(stats.trials, 0.01)}


# ---------------------------------------------------------------------------
# variance-scaling probes
# ---------------------------------------------------------------------------

def _fit_loglog_slope(k_values, variances) -> float:
    coeffs = np.polyfit(np.log(np.asarray(k_values, dtype=float)),
                        np.log(np.asarray(variances, dtype=float)), 1)
    return float(coeffs[0])


def fading_variance_probe(config: ExperimentConfig,
                          k_values=(8, 16, 32, 64), draws: int = 250,
                          position_sets: int = 5) -> dict:
    """Variance of the instantaneous power across fading draws at frozen
    positions, per user count, with the fitted log-log slope.

    The position prefactor of the variance is heavy-tailed (it is dominated
    by the users closest to the cell edge), so each replicate draws one
    master position set and every user count reuses its first k points; the
    pairing keeps the prefactor common across k and the fit stable.
    """
    kind = config.scheme_kind()
    c = config.c_ratio
    model = config.model()
    geometry = config.geometry()
    rng = np.random.default_rng(trial_seed(config.seed, 10_000))
    k_max = max(k_values)
    var_sets = np.zeros((len(k_values), position_sets))
    for r in range(position_sets):
        master = sample_initial_positions(k_max, geometry, rng)
        for ik, k in enumerate(k_values):
            n = int(round(k / c))
            pos = master[:k]
            targets = SinrTargets.from_rates(np.full(k, config.rate_bps_hz))
            powers = np.empty(draws)
            for d in range(draws):
                channels = assemble_channels(pos, draw_fading(n, k, rng), model)
                sol = solve_scheme(channels, targets, config.noise_w, kind, c)
                powers[d] = sol.total_power_w
            var_sets[ik, r] = np.var(powers, ddof=1)
    variances = var_sets.mean(axis=1)
    slope = _fit_loglog_slope(k_values, variances)
    return {"k_values": list(k_values),
            "variances_w2": [float(v) for v in variances], "slope": slope}


def mobility_variance_probe(config: ExperimentConfig,
                            k_values=(8, 16, 32, 64),
                            trials: int | None = None) -> dict:
    """FAST-mode energy variance per user count with the fitted slope."""
    c = config.c_ratio
    variances = []
    for i, k in enumerate(k_values):
        sub = replace(config, k_users=k, n_antennas=int(round(k / c)),
                      mode="fast", trials=trials or config.trials,
                      seed=config.seed + i)
        stats = run_ensemble(sub)
        variances.append(stats.variance_j2)
    slope = _fit_loglog_slope(k_values, variances)
    return {"k_values": list(k_values), "variances_j2": variances,
            "slope": slope}


# ---------------------------------------------------------------------------
# output files
# ---------------------------------------------------------------------------

def write_slot_dump_csv(path, config: ExperimentConfig, result: TrialResult,
                        digest: str) -> None:
    """Per-slot debug dump: slot, scheme, total power, min/max achieved SINR
    (the SINR columns are empty for FAST-mode trials)."""
    with open(path, "w", newline="") as fh:
        fh.write(f"# config_digest={digest}\n")
        writer = csv.writer(fh)
        writer.writerow(["slot", "scheme", "total_power_w", "min_sinr",
                         "max_sinr"])
        for n, p in enumerate(result.slot_powers_w):
            lo = (repr(float(result.slot_sinr_min[n]))
                  if result.slot_sinr_min is not None else "")
            hi = (repr(float(result.slot_sinr_max[n]))
                  if result.slot_sinr_max is not None else "")
            writer.writerow([n, config.scheme, repr(float(p)), lo, hi])


def write_trials_csv(path, stats: EnsembleStats, digest: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# config_digest={digest}\n")
        writer = csv.writer(fh)
        writer.writerow(["trial", "energy_j"])
        for i, e in enumerate(stats.samples_j):
            writer.writerow([i, repr(float(e))])


def write_ccdf_csv(path, rows: np.ndarray, digest: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# config_digest={digest}\n")
        writer = csv.writer(fh)
        writer.writerow(["alpha_w", "empirical_ccdf", "theoretical_ccdf"])
        for alpha, emp, theo in rows:
            writer.writerow([repr(float(alpha)), repr(float(emp)),
                             repr(float(theo))])


def summary_dict(config: ExperimentConfig, stats: EnsembleStats) -> dict:
    out = {
        "config_digest": config.digest(),
        "backend": backend.BACKEND_NAME,
        "mode": config.mode,
        "scheme": config.scheme,
        "trials": stats.trials,
        "diffusion_factor": 1.0,  # walk-calibrated scale on step^2/(4 interval)
        "mean_j": stats.mean_j,
        "variance_j2": stats.variance_j2,
        "ratio_mean": stats.ratio_mean,
        "ratio_var": stats.ratio_var,
        "ks_stat": stats.ks_stat,
    }
    if stats.law is not None:
        out["epsilon_j"] = stats.law.mean_j
        out["epsilon_wh"] = stats.law.mean_wh
        out["sigma_j2"] = stats.law.variance_scale_j2
        out["theta"] = stats.series.value if stats.series else None
        out["theta_terms_used"] = (stats.series.terms_used
                                   if stats.series else None)
    return out


def write_summary_json(path, summary: dict) -> None:
    with open(path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
