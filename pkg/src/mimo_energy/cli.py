"""Command-line front end.

Exit codes: 0 success, 1 validation failure, 2 configuration error.
"""

from __future__ import annotations

import csv
import dataclasses
import datetime
import json
import sys
import time
from pathlib import Path

import click
import numpy as np

from . import __version__, backend
from .asymptotics import (InfeasibleTargetsError, SchemeKind,
                          power_efficiency)
from .config import ConfigError, ExperimentConfig
from .energy import energy_law
from .geometry import random_walk_trajectory, sample_initial_positions
from .planner import PlanningInputs, battery_level, optimal_cell_radius
from .precoding import ConvergenceError, PrecoderInfeasibleError
from .simkit import (empirical_ccdf, run_ensemble, summary_dict,
                     write_ccdf_csv, write_summary_json, write_trials_csv)
from .validation import run_all

_THEORY_SCHEMES = (SchemeKind.OLP, SchemeKind.MRT, SchemeKind.ZF,
                   SchemeKind.RZF_STATISTICAL)


def _load_config(config_path, **overrides) -> ExperimentConfig:
    cfg = (ExperimentConfig.load(config_path) if config_path
           else ExperimentConfig())
    fields = {k: v for k, v in overrides.items() if v is not None}
    if fields:
        cfg = dataclasses.replace(cfg, **fields)
    return cfg


def _write_manifest(out_dir: Path, subcommand: str, cfg: ExperimentConfig,
                    outputs: list[str]) -> None:
    manifest = {
        "config_digest": cfg.digest(),
        "tool_version": __version__,
        "backend": backend.BACKEND_NAME,
        "subcommand": subcommand,
        "timestamp_utc": datetime.datetime.now(datetime.timezone.utc)
        .isoformat(),
        "outputs": outputs,
    }
    with open(out_dir / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _common_options(fn):
    fn = click.option("--config", "config_path", type=click.Path(exists=True),
                      default=None, help="JSON configuration file")(fn)
    fn = click.option("--out-dir", type=click.Path(), default="out",
                      help="output directory")(fn)
    fn = click.option("--seed", type=int, default=None)(fn)
    fn = click.option("--trials", type=int, default=None)(fn)
    fn = click.option("--mode", type=click.Choice(["exact", "fast"]),
                      default=None)(fn)
    fn = click.option("--scheme",
                      type=click.Choice([s.value for s in SchemeKind]),
                      default=None)(fn)
    fn = click.option("--terms", "theta_terms", type=int, default=None,
                      help="covariance-series length")(fn)
    fn = click.option("--tau", type=float, default=None,
                      help="uniform CSI error magnitude")(fn)
    return fn


@click.group()
@click.version_option(__version__)
def main():
    """Energy statistics of a multi-user MIMO downlink with mobile users."""


@main.command()
@_common_options
def theory(config_path, out_dir, **overrides):
    """Per-scheme theoretical energy law (efficiency, mean, variance)."""
    cfg = _load_config(config_path, **overrides)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    gamma = cfg.targets().gamma
    rows = []
    for scheme in _THEORY_SCHEMES:
        eff = power_efficiency(scheme, cfg.c_ratio, gamma)  # may raise
        law, series = energy_law(cfg.c_ratio, gamma, cfg.noise_w, eff,
                                 cfg.model(), cfg.radius_m,
                                 cfg.walk().diffusion_m2_per_s, cfg.horizon_s,
                                 cfg.k_users, terms=cfg.theta_terms)
        rows.append({
            "scheme": scheme.value,
            "eta": eff,
            "epsilon_j": law.mean_j,
            "epsilon_wh": law.mean_wh,
            "sigma_j2": law.variance_scale_j2,
            "theta": series.value,
            "theta_terms_used": series.terms_used,
        })
    report = {"config_digest": cfg.digest(), "schemes": rows}
    with open(out / "theory.json", "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(out / "theory.csv", "w", newline="") as fh:
        fh.write(f"# config_digest={cfg.digest()}\n")
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)
    _write_manifest(out, "theory", cfg, ["theory.json", "theory.csv"])
    for row in rows:
        click.echo(f"{row['scheme']:>14s}: eta={row['eta']:.4f} "
                   f"epsilon={row['epsilon_wh']:.2f} Wh")


@main.command()
@_common_options
@click.option("--dump-trajectories", is_flag=True,
              help="write a debug CSV with one example trajectory set")
@click.option("--dump-slots", is_flag=True,
              help="write a per-slot power/SINR CSV for the first trial")
def simulate(config_path, out_dir, dump_trajectories, dump_slots, **overrides):
    """Monte-Carlo ensemble: per-trial energies, summary, CCDF."""
    cfg = _load_config(config_path, **overrides)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    stats = run_ensemble(cfg)
    elapsed = time.perf_counter() - t0
    write_trials_csv(out / "trials.csv", stats, cfg.digest())
    summary = summary_dict(cfg, stats)
    summary["runtime_s"] = round(elapsed, 3)
    write_summary_json(out / "summary.json", summary)
    outputs = ["trials.csv", "summary.json"]
    if stats.law is not None:
        write_ccdf_csv(out / "ccdf.csv", empirical_ccdf(stats, cfg.horizon_s),
                       cfg.digest())
        outputs.append("ccdf.csv")
    if dump_trajectories:
        from .geometry import write_trajectories_csv
        rng = np.random.default_rng(cfg.seed)
        start = sample_initial_positions(cfg.k_users, cfg.geometry(), rng)
        trajs = [[random_walk_trajectory(start[u], cfg.walk(), cfg.geometry(),
                                         cfg.horizon_s, rng, user_index=u)
                  for u in range(cfg.k_users)]]
        write_trajectories_csv(out / "trajectories.csv", trajs,
                               header_comment=f"config_digest={cfg.digest()}")
        outputs.append("trajectories.csv")
    if dump_slots:
        from .simkit import run_trial, write_slot_dump_csv
        first = run_trial(cfg, 0, keep_slot_powers=True)
        write_slot_dump_csv(out / "slots.csv", cfg, first, cfg.digest())
        outputs.append("slots.csv")
    _write_manifest(out, "simulate", cfg, outputs)
    click.echo(f"trials={stats.trials} mean={stats.mean_j / 3600.0:.2f} Wh"
               + (f" ratio_mean={stats.ratio_mean:.4f}"
                  f" ratio_var={stats.ratio_var:.4f}"
                  if stats.ratio_mean is not None else "")
               + f" [{elapsed:.1f}s, {backend.BACKEND_NAME} backend]")


@main.command()
@_common_options
@click.option("--chi", type=float, default=0.01, help="outage target")
@click.option("--overhead-w", type=float, default=18.0,
              help="fixed base-station power (W)")
def plan(config_path, out_dir, chi, overhead_w, **overrides):
    """Battery level over a rate grid and optimal radius over a user grid."""
    cfg = _load_config(config_path, **overrides)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    schemes = (SchemeKind.OLP, SchemeKind.ZF, SchemeKind.MRT)

    battery_rows = []
    for k in (16, 64, 112):
        for rate in np.arange(0.5, 3.51, 0.25):
            for scheme in schemes:
                gamma = np.full(k, 2.0**rate - 1.0)
                c = k / cfg.n_antennas
                try:
                    eff = power_efficiency(scheme, c, gamma)
                except InfeasibleTargetsError:
                    continue
                law, _ = energy_law(c, gamma, cfg.noise_w, eff, cfg.model(),
                                    cfg.radius_m,
                                    cfg.walk().diffusion_m2_per_s,
                                    cfg.horizon_s, k, terms=cfg.theta_terms)
                inputs = PlanningInputs(
                    chi=chi, theta_overhead_w=overhead_w, model=cfg.model(),
                    c=c, gamma=gamma, noise_w=cfg.noise_w, efficiency=eff,
                    horizon_s=cfg.horizon_s, law=law)
                battery_rows.append({
                    "k_users": k, "rate_bps_hz": float(rate),
                    "scheme": scheme.value,
                    "battery_wh": battery_level(inputs) / 3600.0,
                })

    radius_rows = []
    for k in range(8, 121, 8):
        rates = np.linspace(1.0, 4.0, k)
        gamma = 2.0**rates - 1.0
        c = k / cfg.n_antennas
        for scheme in (SchemeKind.OLP, SchemeKind.RZF_STATISTICAL,
                       SchemeKind.ZF):
            try:
                eff = power_efficiency(scheme, c, gamma)
            except InfeasibleTargetsError:
                continue
            inputs = PlanningInputs(
                chi=chi, theta_overhead_w=overhead_w, model=cfg.model(), c=c,
                gamma=gamma, noise_w=cfg.noise_w, efficiency=eff,
                horizon_s=cfg.horizon_s)
            sol = optimal_cell_radius(inputs)
            radius_rows.append({
                "k_users": k, "scheme": scheme.value,
                "radius_m": sol.radius_m,
                "closed_form": sol.closed_form,
            })

    for name, rows in (("battery_vs_rate.csv", battery_rows),
                       ("radius_vs_k.csv", radius_rows)):
        with open(out / name, "w", newline="") as fh:
            fh.write(f"# config_digest={cfg.digest()}\n")
            writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
            writer.writeheader()
            writer.writerows(rows)
    _write_manifest(out, "plan", cfg,
                    ["battery_vs_rate.csv", "radius_vs_k.csv"])
    click.echo(f"wrote {len(battery_rows)} battery rows, "
               f"{len(radius_rows)} radius rows to {out}")


@main.command()
@click.option("--criteria", default=None,
              help="comma-separated criterion numbers (default: all)")
def validate(criteria):
    """Run the acceptance suite and print one line per criterion."""
    indices = ([int(t) for t in criteria.split(",")] if criteria else None)
    results = run_all(indices)
    all_ok = True
    for result in results:
        for line in result.summary_lines():
            click.echo(line)
        all_ok = all_ok and result.passed
    click.echo("=" * 60)
    click.echo("ALL CRITERIA PASS" if all_ok else "SOME CRITERIA FAILED")
    if not all_ok:
        sys.exit(1)


@main.command()
@click.option("--walkers", type=int, default=20_000)
@click.option("--slots", type=int, default=200)
def benchmark(walkers, slots):
    """Compare the compiled walk kernel against the NumPy fallback."""
    from .backend import available_backends, get_backend

    cfg = ExperimentConfig()
    rng = np.random.default_rng(0)
    u = rng.random(walkers)
    th = 2.0 * np.pi * rng.random(walkers)
    base = np.stack([cfg.radius_m * np.sqrt(u) * np.cos(th),
                     cfg.radius_m * np.sqrt(u) * np.sin(th)], axis=1)
    angles = 2.0 * np.pi * rng.random((slots, walkers))
    weights = np.ones(walkers)
    results = {}
    for name in available_backends():
        impl = get_backend(name)
        pos = base.copy()
        acc = np.zeros(walkers)
        t0 = time.perf_counter()
        for row in angles:
            steps = np.stack([cfg.step_m * np.cos(row),
                              cfg.step_m * np.sin(row)], axis=1)
            impl.advance_billiard(pos, steps, cfg.radius_m)
            impl.weighted_inv_pathloss_sums(pos, weights, 1, 4.0, cfg.xbar_m,
                                            10.0**(cfg.l_xbar_db / 10.0), acc)
        dt = time.perf_counter() - t0
        rate = walkers * slots / dt
        results[name] = dt
        click.echo(f"{name:>7s}: {dt:7.3f} s  ({rate / 1e6:.1f} M steps/s)")
    if len(results) == 2:
        click.echo(f"speedup: {results['numpy'] / results['cython']:.2f}x")


def run():
    try:
        main(standalone_mode=False)
    except ConfigError as exc:
        click.echo(f"configuration error: {exc}", err=True)
        sys.exit(2)
    except (InfeasibleTargetsError, PrecoderInfeasibleError,
            ConvergenceError) as exc:
        click.echo(f"infeasible setup: {exc}", err=True)
        sys.exit(2)
    except click.ClickException as exc:
        exc.show()
        sys.exit(exc.exit_code)
    except click.exceptions.Abort:
        sys.exit(1)


if __name__ == "__main__":
    run()
