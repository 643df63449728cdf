import numpy as np
import pytest

from mimo_energy.channel import PathlossModel, db_to_linear
from mimo_energy.energy import EnergyLaw, outage_probability
from mimo_energy.planner import (PlanningInputs, RadiusSolution, battery_level,
                                 energy_per_area, golden_section_radius,
                                 optimal_cell_radius)
from mimo_energy.specfun import gaussian_tail_inv

MODEL = PathlossModel(beta=4.0, xbar_m=25.0, l_xbar=db_to_linear(-93.0))
NOISE = 10 ** ((-97.8 - 30.0) / 10.0)
GAMMA = np.full(64, 2.0**1.5 - 1.0)
EFF = 1.0 - 0.5 * (2.0**1.5 - 1.0) / 2.0**1.5


def make_inputs(chi=0.01, overhead=18.0, law=None, model=MODEL,
                horizon_s=12 * 3600.0):
    return PlanningInputs(chi=chi, theta_overhead_w=overhead, model=model,
                          c=0.5, gamma=GAMMA, noise_w=NOISE, efficiency=EFF,
                          horizon_s=horizon_s, law=law)


LAW = EnergyLaw(mean_j=5.0e5, variance_scale_j2=4.0e11, k_users=64)


def test_battery_level_median_case():
    level = battery_level(make_inputs(chi=0.5, law=LAW))
    assert level == pytest.approx(LAW.mean_j, rel=1e-12)


def test_battery_level_one_percent():
    level = battery_level(make_inputs(chi=0.01, law=LAW))
    expected = LAW.mean_j + 2.3263478740 * LAW.std_j
    assert level == pytest.approx(expected, rel=1e-9)


def test_battery_outage_round_trip():
    for chi in (0.3, 0.01, 1e-4):
        level = battery_level(make_inputs(chi=chi, law=LAW))
        assert abs(outage_probability(level, LAW) - chi) < 1e-10


def test_battery_level_monotonicity():
    base = battery_level(make_inputs(chi=0.01, law=LAW))
    bigger_var = EnergyLaw(mean_j=LAW.mean_j, variance_scale_j2=8.0e11,
                           k_users=64)
    more_users = EnergyLaw(mean_j=LAW.mean_j, variance_scale_j2=4.0e11,
                           k_users=128)
    assert battery_level(make_inputs(chi=0.01, law=bigger_var)) > base
    assert battery_level(make_inputs(chi=0.01, law=more_users)) < base
    assert battery_level(make_inputs(chi=0.1, law=LAW)) < base


def test_radius_closed_form_zero_overhead():
    sol = optimal_cell_radius(make_inputs(overhead=0.0))
    expected = MODEL.xbar_m * ((4.0 + 2.0) / (4.0 - 2.0)) ** 0.25
    assert sol.closed_form
    assert sol.radius_m == pytest.approx(expected, rel=1e-12)


def test_radius_closed_form_matches_golden_section():
    inputs = make_inputs(overhead=18.0)
    sol = optimal_cell_radius(inputs)
    numeric = golden_section_radius(inputs)
    assert abs(numeric / sol.radius_m - 1.0) < 1e-3


def test_energy_per_area_unimodal():
    inputs = make_inputs(overhead=18.0)
    r_star = optimal_cell_radius(inputs).radius_m
    grid = np.linspace(0.3 * r_star, 3.0 * r_star, 60)
    vals = [energy_per_area(r, inputs) for r in grid]
    below = grid < r_star
    assert np.all(np.diff(np.array(vals)[below]) < 0)
    above = grid > r_star
    assert np.all(np.diff(np.array(vals)[above]) > 0)


def test_radius_grows_with_overhead_and_efficiency():
    r0 = optimal_cell_radius(make_inputs(overhead=5.0)).radius_m
    r1 = optimal_cell_radius(make_inputs(overhead=50.0)).radius_m
    assert r1 > r0
    better = PlanningInputs(chi=0.01, theta_overhead_w=18.0, model=MODEL,
                            c=0.5, gamma=GAMMA, noise_w=NOISE,
                            efficiency=EFF * 1.3, horizon_s=12 * 3600.0)
    assert optimal_cell_radius(better).radius_m > \
        optimal_cell_radius(make_inputs(overhead=18.0)).radius_m


def test_low_exponent_falls_back_to_numeric():
    model2 = PathlossModel(beta=2.0, xbar_m=25.0, l_xbar=db_to_linear(-93.0))
    inputs = make_inputs(model=model2)
    sol = optimal_cell_radius(inputs)
    assert isinstance(sol, RadiusSolution) and not sol.closed_form
    # at exponent 2 the per-area energy keeps falling with radius, so the
    # numeric search ends at the upper bracket
    assert sol.radius_m == pytest.approx(100.0 * model2.xbar_m, rel=1e-6)
    assert energy_per_area(sol.radius_m, inputs) < \
        energy_per_area(sol.radius_m * 0.5, inputs)


def test_inputs_validation():
    with pytest.raises(ValueError):
        make_inputs(chi=0.0)
    with pytest.raises(ValueError):
        make_inputs(overhead=-1.0)
    with pytest.raises(ValueError):
        battery_level(make_inputs(law=None))
    with pytest.raises(ValueError):
        energy_per_area(-5.0, make_inputs())


def test_gaussian_tail_inv_used_consistently():
    # battery formula is mean + std * Qinv(chi) by construction
    level = battery_level(make_inputs(chi=0.2, law=LAW))
    assert level == pytest.approx(
        LAW.mean_j + LAW.std_j * gaussian_tail_inv(0.2), rel=1e-14)
