"""Planning applications: battery dimensioning and cell-radius optimization."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import PathlossModel
from .energy import EnergyLaw, mean_energy
from .specfun import gaussian_tail_inv

__all__ = [
    "PlanningInputs",
    "RadiusSolution",
    "battery_level",
    "energy_per_area",
    "optimal_cell_radius",
    "golden_section_radius",
]


@dataclass(frozen=True)
class PlanningInputs:
    """Scheme context plus the planning knobs.

    ``law`` is required for battery dimensioning; radius optimization uses
    only the mean-energy context (c, targets, noise, efficiency, horizon).
    """

    chi: float
    theta_overhead_w: float
    model: PathlossModel
    c: float
    gamma: np.ndarray
    noise_w: float
    efficiency: float
    horizon_s: float
    law: EnergyLaw | None = None

    def __post_init__(self):
        if not 0.0 < self.chi < 1.0:
            raise ValueError("outage target must lie in (0, 1)")
        if self.theta_overhead_w < 0:
            raise ValueError("overhead power must be non-negative")


@dataclass(frozen=True)
class RadiusSolution:
    radius_m: float
    closed_form: bool


def battery_level(inputs: PlanningInputs) -> float:
    """Smallest battery energy (J) keeping the outage within the target."""
    law = inputs.law
    if law is None:
        raise ValueError("battery dimensioning requires an energy law")
    level = law.std_j * gaussian_tail_inv(inputs.chi) + law.mean_j
    return float(level)


def energy_per_area(radius_m: float, inputs: PlanningInputs) -> float:
    """Mean consumed energy plus fixed overhead per unit cell area (J/m^2)."""
    if radius_m <= 0:
        raise ValueError("radius must be positive")
    mean = mean_energy(None, inputs.c, inputs.gamma, inputs.noise_w,
                       inputs.efficiency, inputs.model, radius_m,
                       inputs.horizon_s)
    return (mean + inputs.theta_overhead_w * inputs.horizon_s) / radius_m**2


def optimal_cell_radius(inputs: PlanningInputs) -> RadiusSolution:
    """Radius minimizing the energy per unit area.

    Closed form for pathloss exponents > 2; otherwise falls back to the
    numeric minimizer and flags it.
    """
    model = inputs.model
    if model.beta <= 2.0:
        radius = golden_section_radius(inputs)
        return RadiusSolution(radius_m=radius, closed_form=False)
    gbar = float(np.mean(np.asarray(inputs.gamma, dtype=float)))
    inner = 1.0 + (2.0 * model.l_xbar * inputs.efficiency
                   * inputs.theta_overhead_w
                   / (inputs.c * gbar * inputs.noise_w))
    radius = model.xbar_m * (inner * (model.beta + 2.0)
                             / (model.beta - 2.0)) ** (1.0 / model.beta)
    return RadiusSolution(radius_m=float(radius), closed_form=True)


def golden_section_radius(inputs: PlanningInputs, lo: float | None = None,
                          hi: float | None = None,
                          rel_tol: float = 1e-8) -> float:
    """Golden-section argmin of the energy per unit area over [lo, hi]."""
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a = inputs.model.xbar_m if lo is None else lo
    b = 100.0 * inputs.model.xbar_m if hi is None else hi
    c_pt = b - invphi * (b - a)
    d_pt = a + invphi * (b - a)
    fc = energy_per_area(c_pt, inputs)
    fd = energy_per_area(d_pt, inputs)
    while (b - a) > rel_tol * (abs(a) + abs(b)) / 2.0:
        if fc < fd:
            b, d_pt, fd = d_pt, c_pt, fc
            c_pt = b - invphi * (b - a)
            fc = energy_per_area(c_pt, inputs)
        else:
            a, c_pt, fc = c_pt, d_pt, fd
            d_pt = a + invphi * (b - a)
            fd = energy_per_area(d_pt, inputs)
    return 0.5 * (a + b)
