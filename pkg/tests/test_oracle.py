import math

import numpy as np
import pytest

from galspin import closed_forms, oracle
from galspin.form_factors import FormFactor
from galspin.oracle import GridSpec, grid_bound_state, ls_phase_shift, momentum_grid, refinement_study
from galspin.two_body import ModelParams

from conftest import at_strength, sharp_at_kappa


def test_grid_integrates_known_moments(family):
    ff = FormFactor(family, 1.0)
    q, w, _ = momentum_grid(ff, GridSpec(200))
    # int_0^inf q^2 |f|^2 dq in closed form
    expected = {"sharp": 1 / 3, "gauss": math.sqrt(math.pi / 2) / 8, "rational": math.pi / 4}[family]
    assert np.sum(w * q**2 * ff.sq(q)) == pytest.approx(expected, rel=1e-10)
    assert np.all(np.diff(q) > 0) and np.all(w > 0)


@pytest.mark.parametrize(
    "spec",
    [GridSpec(8), GridSpec(100, 2.0), GridSpec(100, scheme="simpson")],
)
def test_grid_spec_validation(spec):
    ff = FormFactor("sharp") if spec.q_max == 2.0 or spec.n_points == 8 else FormFactor("gauss")
    with pytest.raises(ValueError):
        spec.resolve(ff)
    with pytest.raises(ValueError):
        GridSpec(100, 3.0).resolve(FormFactor("gauss"))


@pytest.mark.parametrize("k", [0.1, 0.3, 0.6])
def test_ls_oracle_matches_analytic(family, k):
    rep = ls_phase_shift(at_strength(family, 1.5), k, GridSpec(200))
    assert rep.passed
    assert rep.details["S_unitarity"] <= 1e-12


def test_ls_oracle_matches_exact_sharp_formula_without_bound_state():
    params = ModelParams(1.0, 1.0, 1, FormFactor("sharp")).with_lambda_eff(-80.0)
    rep = ls_phase_shift(params, 0.45)
    assert rep.abs_diff <= 1e-12


def test_ls_rejects_node_collision():
    q, _, _ = momentum_grid(FormFactor("sharp"), GridSpec(64))
    with pytest.raises(ValueError):
        ls_phase_shift(sharp_at_kappa(0.5), float(q[10]), GridSpec(64))


def test_grid_bound_state_against_eigenvalue_condition(family):
    rep = grid_bound_state(at_strength(family, 1.5), GridSpec(400))
    assert rep.passed
    assert rep.details["n_negative"] == 1
    assert rep.details["relative_diff"] <= 1e-3


def test_grid_sees_no_bound_state_below_threshold(family):
    rep = grid_bound_state(at_strength(family, 0.8), GridSpec(200))
    assert rep.details["n_negative"] == 0 and rep.passed


def test_grid_eigenvalue_matches_sharp_closed_form():
    rep = grid_bound_state(sharp_at_kappa(0.5), GridSpec(100))
    assert rep.oracle_value == pytest.approx(-0.25, rel=1e-10)


def test_uniform_refinement_is_second_order():
    study = refinement_study(at_strength("gauss", 1.5), 0.3001, ns=(100, 200, 400), scheme="uniform")
    assert all(o >= 1.9 for o in study["observed_order"])


def test_gauss_legendre_refinement_is_at_least_second_order():
    study = refinement_study(at_strength("rational", 1.5), 0.3, ns=(16, 32, 64))
    assert len(study["observed_order"]) >= 1 and all(o >= 2 for o in study["observed_order"])


def test_exchange_selection_rule():
    rep = oracle.exchange_selection_rule(sharp_at_kappa(0.5), spins=(1, 2))
    assert rep.abs_diff == 0.0
    spins = {s["two_s"]: s for s in rep.details["spins"]}
    assert set(spins) == {1, 2}
    for s in spins.values():
        assert s["even_element"] == 0.0 and s["even_amplitude_max"] == 0.0
        assert s["odd_element"] > 0
        assert s["sign_product"] == 1
        assert s["odd_relative_diff"] <= 1e-12
        # under ordinary statistics the same odd state would decouple instead
        assert s["odd_element_usual_statistics"] <= 1e-14
    # identical reduced element for both spins at fixed lambda_eff
    assert spins[1]["odd_element"] == pytest.approx(spins[2]["odd_element"], rel=1e-12)


def test_exchange_spin_guard():
    with pytest.raises(ValueError):
        oracle.exchange_selection_rule(sharp_at_kappa(0.5), spins=(5,))


def test_run_all_passes_and_serialises():
    reports = oracle.run_all()
    assert len(reports) == 13
    assert all(r.passed for r in reports)
    d = reports[0].to_dict()
    assert set(d) >= {"quantity", "oracle_value", "analytic_value", "abs_diff", "tolerance", "passed"}


def test_critical_coupling_consistency():
    params = ModelParams(1.0, 1.0, 1, FormFactor("sharp")).with_lambda_eff(closed_forms.critical_coupling(1.0, 1.0) * 1.5)
    assert grid_bound_state(params, GridSpec(200)).passed
