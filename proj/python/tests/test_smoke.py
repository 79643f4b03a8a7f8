# SPDX-License-Identifier: Apache-2.0
import math

import pytest

import usvp


def test_special_functions():
    assert usvp.q_function(0.0) == pytest.approx(0.5)
    assert usvp.regularized_lower_gamma(1.0, 2.0) == pytest.approx(1.0 - math.exp(-2.0))


def test_energy_cdf_gamma_closed_form():
    m = usvp.EnergyCdf(usvp.Scheme.DdUsGaussian, 1, 0.0)
    assert m.cdf(math.log(2.0)) == pytest.approx(0.5, abs=1e-10)
    assert m.quantile(0.5) == pytest.approx(math.log(2.0), rel=1e-12)


def test_rs_solution_example():
    sol = usvp.solve_rs(usvp.SystemParams(alpha=4.0, kappa=0.125, T=64))
    assert sol.q0 == pytest.approx(0.672701771907, rel=1e-10)
    assert sol.penalty_per_user == pytest.approx(sol.q0 / 0.5)


def test_t_inf_closed_form():
    sol = usvp.solve_rs_T_inf(usvp.Scheme.DdUsQpsk, 4.0, 0.125)
    assert sol.penalty_per_user == pytest.approx(2.0, abs=1e-9)


def test_1rsb_missing_root_raises():
    with pytest.raises(usvp._core.NoRoot):
        usvp.solve_1rsb(usvp.SystemParams(alpha=2.0, kappa=0.05, T=64))


def test_invalid_params_raise_value_error():
    with pytest.raises(ValueError):
        usvp.solve_rs(usvp.SystemParams(alpha=4.0, kappa=0.5))


def test_selection_probability():
    sel = usvp.SelectionModel(usvp.Scheme.DdUsQpsk, 8, 0.5, 0.25)
    assert usvp.marginal_selection_probability(sel) == pytest.approx(0.25, abs=1e-9)


def test_qpsk_mi_limits():
    assert usvp.qpsk_mi(1e6) == pytest.approx(2.0, abs=1e-3)
    assert usvp.qpsk_mi(1e-6) < 1e-3


def test_simulation():
    rep = usvp.empirical_penalty(64, 32, 32, 1, usvp.Scheme.DdUsGaussian, 10, 1, usvp.Strategy.ZfbfFull)
    assert rep.trials == 10
    assert rep.mean == pytest.approx(2.0, rel=0.2)


def test_penalty_sweep_csv():
    csv = usvp.run_sweep("penalty-sweep", alphakappa_grid="0.5,1.0")
    lines = csv.splitlines()
    assert lines[0].startswith("scheme,assumption,alpha,kappa")
    assert len(lines) == 3
    assert "skipped" in lines[2]


def test_validation_math_suite():
    rows = usvp.run_validation("math")
    assert rows and all(r["status"] == "pass" for r in rows)
