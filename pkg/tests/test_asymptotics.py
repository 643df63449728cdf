import numpy as np
import pytest

from mimo_energy.asymptotics import (InfeasibleTargetsError, SchemeKind,
                                     asymptotic_multipliers,
                                     asymptotic_total_power,
                                     asymptotic_user_powers,
                                     classical_rzf_equivalents,
                                     imperfect_csi_efficiency,
                                     optimal_regularization, pathloss_load,
                                     power_efficiency, regularizer_fixed_point,
                                     summarize)
from mimo_energy.channel import PathlossModel, db_to_linear, pathloss
from mimo_energy.geometry import CellGeometry, sample_initial_positions

MODEL = PathlossModel(beta=4.0, xbar_m=25.0, l_xbar=db_to_linear(-93.0))
NOISE = 10 ** ((-97.8 - 30.0) / 10.0)
GAMMA_15 = 2.0**1.5 - 1.0


def test_power_efficiency_values():
    g = np.full(8, GAMMA_15)
    assert power_efficiency(SchemeKind.ZF, 0.5, g) == pytest.approx(0.5)
    # independent arithmetic: 1 - 0.5 * gamma/(1+gamma)
    olp = 1.0 - 0.5 * GAMMA_15 / (1.0 + GAMMA_15)
    assert power_efficiency(SchemeKind.OLP, 0.5, g) == pytest.approx(olp,
                                                                     rel=1e-12)
    assert olp == pytest.approx(0.6768, abs=1e-4)
    mrt = 1.0 - 0.5 * GAMMA_15
    assert power_efficiency(SchemeKind.MRT, 0.5, g) == pytest.approx(mrt,
                                                                     rel=1e-12)
    ratio = olp / mrt
    assert ratio == pytest.approx(7.889, abs=2e-3)
    # published rounding sits within 1%
    assert abs(ratio / 7.92 - 1.0) < 0.01


def test_power_efficiency_infeasible_names_scheme():
    g = np.full(8, 2.0**2.0 - 1.0)  # rate 2 >= log2(1 + 1/c) at c = 0.5
    with pytest.raises(InfeasibleTargetsError, match="mrt"):
        power_efficiency(SchemeKind.MRT, 0.5, g)


def test_uniform_targets_collapse_olp_rzf():
    g = np.full(16, 0.77)
    assert power_efficiency(SchemeKind.OLP, 0.5, g) == pytest.approx(
        power_efficiency(SchemeKind.RZF_STATISTICAL, 0.5, g), rel=1e-15)


def test_efficiency_ordering_implies_power_ordering():
    rng = np.random.default_rng(0)
    g = 2.0 ** rng.uniform(0.5, 1.5, 16) - 1.0
    effs = {s: power_efficiency(s, 0.5, g)
            for s in (SchemeKind.OLP, SchemeKind.MRT, SchemeKind.ZF,
                      SchemeKind.RZF_STATISTICAL)}
    assert effs[SchemeKind.OLP] >= effs[SchemeKind.RZF_STATISTICAL] >= \
        effs[SchemeKind.ZF]
    assert effs[SchemeKind.OLP] >= effs[SchemeKind.MRT]


def test_pathloss_load_examples():
    g = np.full(4, GAMMA_15)
    at_origin = pathloss_load(np.zeros((4, 2)), g, MODEL)
    assert at_origin == pytest.approx(GAMMA_15 / (2 * MODEL.l_xbar), rel=1e-12)
    one = pathloss_load(np.array([[25.0, 0.0]]), np.array([GAMMA_15]), MODEL)
    assert one == pytest.approx(GAMMA_15 / MODEL.l_xbar, rel=1e-12)


def test_pathloss_load_concentrates():
    from mimo_energy.channel import mean_inverse_pathloss
    rng = np.random.default_rng(1)
    pos = sample_initial_positions(200_000, CellGeometry(500.0), rng)
    g = np.full(200_000, GAMMA_15)
    load = pathloss_load(pos, g, MODEL)
    assert load == pytest.approx(GAMMA_15 * mean_inverse_pathloss(MODEL, 500.0),
                                 rel=0.02)


def test_asymptotic_power_ratios():
    rng = np.random.default_rng(2)
    pos = sample_initial_positions(16, CellGeometry(500.0), rng)
    g = np.full(16, GAMMA_15)
    p_olp = asymptotic_total_power(SchemeKind.OLP, 0.5, g, pos, MODEL, NOISE)
    p_zf = asymptotic_total_power(SchemeKind.ZF, 0.5, g, pos, MODEL, NOISE)
    assert p_zf / p_olp == pytest.approx(
        power_efficiency(SchemeKind.OLP, 0.5, g) / 0.5, rel=1e-12)
    p_rzf = asymptotic_total_power(SchemeKind.RZF_STATISTICAL, 0.5, g, pos,
                                   MODEL, NOISE)
    assert p_rzf == pytest.approx(p_olp, rel=1e-14)  # uniform targets


def test_asymptotic_multipliers_scaling():
    g = np.array([1.0, 1.0])
    att = np.array([1e-9, 1e-11])
    lam = asymptotic_multipliers(g, att, 0.5)
    assert lam[1] > lam[0]  # weaker channel gets higher priority
    assert lam[0] == pytest.approx(1.0 / (1e-9 * 0.5), rel=1e-14)


def test_user_powers_zf_position_independent():
    rng = np.random.default_rng(3)
    pos = sample_initial_positions(8, CellGeometry(500.0), rng)
    g = np.full(8, GAMMA_15)
    p = asymptotic_user_powers(SchemeKind.ZF, 0.5, g, pos, MODEL, NOISE)
    assert np.allclose(p, GAMMA_15 * NOISE, rtol=1e-14)


def test_user_powers_olp_formula():
    # one user at the origin, uniform targets; direct arithmetic
    pos = np.zeros((4, 2))
    g = np.full(4, GAMMA_15)
    eff = power_efficiency(SchemeKind.OLP, 0.5, g)
    att = 2 * MODEL.l_xbar
    pbar = 0.5 * NOISE * (GAMMA_15 / att) / eff
    expected = g[0] / (att * eff**2) * (pbar + NOISE / att * (1 + g[0]) ** 2)
    p = asymptotic_user_powers(SchemeKind.OLP, 0.5, g, pos, MODEL, NOISE)
    assert np.allclose(p, expected, rtol=1e-12)


def test_regularizer_fixed_point_limits():
    assert regularizer_fixed_point(0.0, np.ones(4), 2.0, 0.5) == \
        pytest.approx(0.5, rel=1e-12)
    # alpha*l = 1 gives a scalar quadratic: mu = 1/(c mu/(1+mu) ... )
    c, rho = 0.5, 0.8
    mu = regularizer_fixed_point(1.0, np.ones(6), rho, c)
    # quadratic oracle: rho mu^2 + (c + rho - 1) mu - 1 = 0
    a, b, cc = rho, c + rho - 1.0, -1.0
    root = (-b + np.sqrt(b * b - 4 * a * cc)) / (2 * a)
    assert mu == pytest.approx(root, rel=1e-11)
    # residual of the defining equation
    res = mu - 1.0 / (c * np.mean(1.0 / (1.0 + mu)) + rho)
    assert abs(res) < 1e-11


def test_regularizer_at_optimal_rho_equals_mean_target():
    g = 2.0 ** np.random.default_rng(4).uniform(0.5, 2.0, 12) - 1.0
    rho = optimal_regularization(g, 0.5)
    att = np.random.default_rng(5).uniform(1e-12, 1e-9, 12)
    mu = regularizer_fixed_point(1.0 / att, att, rho, 0.5)
    assert mu == pytest.approx(np.mean(g), rel=1e-10)


def test_optimal_regularization_value():
    assert optimal_regularization(np.ones(5), 0.5) == pytest.approx(0.75)


def test_optimal_regularization_is_power_minimum():
    """Finite-difference scan of the power equivalent in rho."""
    g = np.full(8, GAMMA_15)
    c = 0.5
    gbar = float(np.mean(g))
    rho_star = optimal_regularization(g, c)

    def power_at(rho):
        mu = regularizer_fixed_point(np.ones(8), np.ones(8), rho, c)
        return ((1 + mu) ** 2 / (mu * (c + rho * (1 + mu) ** 2) - c * gbar))

    p0 = power_at(rho_star)
    for d in (-0.05, 0.05):
        assert power_at(rho_star * (1 + d)) > p0
    # derivative changes sign across rho*
    h = 1e-4
    left = (power_at(rho_star - h) - power_at(rho_star - 2 * h)) / h
    right = (power_at(rho_star + 2 * h) - power_at(rho_star + h)) / h
    assert left < 0 < right


def test_classical_rzf_matches_olp_when_ratio_constant():
    # targets proportional to attenuations make the plain variant optimal
    rng = np.random.default_rng(6)
    pos = sample_initial_positions(12, CellGeometry(500.0), rng)
    att = pathloss(pos, MODEL)
    g = att / np.mean(att) * 0.9
    eq = classical_rzf_equivalents(att, g, 0.5, NOISE)
    olp = 0.5 * NOISE * np.mean(g / att) / power_efficiency(
        SchemeKind.OLP, 0.5, g)
    assert eq.total_power_w == pytest.approx(olp, rel=1e-9)


def test_classical_rzf_uniform_cell_matches_statistical():
    att = np.full(10, 3e-10)
    g = np.full(10, GAMMA_15)
    eq = classical_rzf_equivalents(att, g, 0.5, NOISE)
    stat = 0.5 * NOISE * np.mean(g / att) / power_efficiency(
        SchemeKind.RZF_STATISTICAL, 0.5, g)
    assert eq.total_power_w == pytest.approx(stat, rel=1e-10)
    assert eq.mu_star == pytest.approx(GAMMA_15 / 3e-10, rel=1e-10)


def test_classical_rzf_fixed_point_residual():
    rng = np.random.default_rng(7)
    pos = sample_initial_positions(16, CellGeometry(500.0), rng)
    att = pathloss(pos, MODEL)
    g = 2.0 ** rng.uniform(0.5, 2.0, 16) - 1.0
    eq = classical_rzf_equivalents(att, g, 0.5, NOISE)
    mu = eq.mu_star
    denom3 = (1.0 + att * mu) ** 3
    residual = mu - np.sum(att * g / denom3) / np.sum(att**2 / denom3)
    assert abs(residual) < 1e-10 * mu


def test_imperfect_csi_efficiency():
    g = np.full(8, GAMMA_15)
    eff0, g0 = imperfect_csi_efficiency(SchemeKind.ZF, 0.5, g, 0.0)
    assert eff0 == pytest.approx(0.5, rel=1e-14)
    assert np.allclose(g0, g)
    tau = np.sqrt(0.05)
    eff, geff = imperfect_csi_efficiency(SchemeKind.ZF, 0.5, g, tau)
    expected_g = GAMMA_15 / (1 - 0.05)
    assert np.allclose(geff, expected_g, rtol=1e-14)
    assert eff == pytest.approx(0.5 - 0.5 * expected_g * 0.05, rel=1e-12)
    # monotone decreasing in every tau
    worse, _ = imperfect_csi_efficiency(SchemeKind.ZF, 0.5, g, np.sqrt(0.15))
    assert worse < eff
    with pytest.raises(ValueError):
        imperfect_csi_efficiency(SchemeKind.OLP, 0.5, g, 0.1)
    with pytest.raises(InfeasibleTargetsError):
        imperfect_csi_efficiency(SchemeKind.ZF, 0.5, g, 0.85)


def test_summarize_round_trip_json():
    rng = np.random.default_rng(8)
    pos = sample_initial_positions(6, CellGeometry(500.0), rng)
    g = np.full(6, GAMMA_15)
    for scheme in SchemeKind:
        s = summarize(scheme, 0.5, g, pos, MODEL, NOISE)
        d = s.to_json_dict()
        assert d["scheme"] == scheme.value
        assert d["eta"] > 0 and d["pbar_w"] > 0
        assert len(d["per_user"]) == 6
        if scheme is SchemeKind.OLP:
            assert "lambda" in d["per_user"][0]
        if scheme is SchemeKind.RZF_STATISTICAL:
            assert d["rho"] == pytest.approx(optimal_regularization(g, 0.5))
            assert d["mu"] == pytest.approx(np.mean(g))


def test_scheme_parse():
    assert SchemeKind.parse(" ZF ") is SchemeKind.ZF
    with pytest.raises(ValueError):
        SchemeKind.parse("zfx")
