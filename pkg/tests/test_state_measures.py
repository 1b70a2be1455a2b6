import math

import numpy as np
import pytest

from kappacost import matcore, state_measures, states


def test_max_entangled_cost_is_log_m():
    for m in (2, 3):
        dm = states.DensityMatrix(matcore.max_entangled(m), m, m)
        res = state_measures.exact_cost(dm)
        assert abs(res.value_bits - math.log2(m)) <= 1e-6
        assert res.gap <= 1e-6


def test_isotropic_closed_form_and_ppt_zero():
    d = 3
    for t in (0.2, 1 / d, 0.6, 0.9):
        dm = states.make_isotropic(t, d)
        res = state_measures.exact_cost(dm)
        expected = math.log2(d * t) if t > 1 / d else 0.0
        assert abs(res.value_bits - expected) <= 1e-5


def test_werner_closed_form():
    d = 2
    for p in (0.3, 0.5, 0.75, 1.0):
        dm = states.make_werner(p, d)
        expected = math.log2((2 / d) * (2 * p - 1) + 1) if p > 0.5 else 0.0
        assert abs(state_measures.e_kappa_primal(dm).value_bits - expected) <= 1e-5


def test_max_correlated_equals_log_abs_sum():
    rng = np.random.default_rng(11)
    c = states.random_density(1, 3, rng=rng).mat
    dm = states.make_max_correlated(c)
    expected = math.log2(np.abs(c).sum())
    assert abs(state_measures.exact_cost(dm).value_bits - expected) <= 1e-5


def test_primal_dual_agree_on_randoms():
    rng = np.random.default_rng(12)
    for _ in range(4):
        dm = states.random_density(2, 2, rng=rng)
        p = state_measures.e_kappa_primal(dm).value_bits
        d = state_measures.e_kappa_dual(dm).value_bits
        assert abs(p - d) <= 1e-6


def test_primal_witness_is_feasible():
    dm = states.make_isotropic(0.8, 2)
    res = state_measures.e_kappa_primal(dm)
    s = res.witness_primal
    s_pt = matcore.partial_transpose(s, 2, 2)
    rho_pt = dm.partial_transpose()
    assert matcore.psd_check(s, tol=1e-7)
    assert matcore.lambda_min(s_pt - rho_pt) >= -1e-7
    assert matcore.lambda_min(s_pt + rho_pt) >= -1e-7
    assert abs(math.log2(np.trace(s).real) - res.value_bits) <= 1e-6


def test_dual_witness_is_feasible_and_tight():
    dm = states.rho_v()
    res = state_measures.e_kappa_dual(dm)
    v, w = res.witness_dual
    assert matcore.lambda_min(np.eye(9) - v - w) >= -1e-7
    assert matcore.lambda_min(matcore.partial_transpose(v, 3, 3)) >= -1e-7
    assert matcore.lambda_min(matcore.partial_transpose(w, 3, 3)) >= -1e-7
    val = np.trace(dm.mat @ (v - w)).real
    assert abs(math.log2(val) - res.value_bits) <= 1e-6


def test_log_negativity_and_ordering():
    dm = states.rho_v()
    en = state_measures.log_negativity(dm)
    ek = state_measures.e_kappa_primal(dm).value_bits
    z_bits = state_measures.z_upper(dm)
    assert abs(en - math.log2(1 + 1 / math.sqrt(2))) <= 1e-9
    assert abs(ek - 1.0) <= 1e-5
    assert en < ek < z_bits + 1e-9
    assert abs(z_bits - math.log2(1 + 13 / (4 * math.sqrt(2)))) <= 1e-9


def test_binegativity_collapse_on_two_qubit_states():
    rng = np.random.default_rng(13)
    for _ in range(3):
        dm = states.random_density(2, 2, rng=rng)
        assert state_measures.binegativity_holds(dm)
        en = state_measures.log_negativity(dm)
        ek = state_measures.e_kappa_primal(dm).value_bits
        assert abs(en - ek) <= 1e-5


def test_one_shot_cost_max_entangled():
    dm = states.DensityMatrix(matcore.max_entangled(2), 2, 2)
    res = state_measures.one_shot_ppt_cost(dm)
    assert res.m_integer == 2
    assert abs(res.cost_bits - 1.0) <= 1e-4
    lo, hi = res.sandwich
    assert lo - 1e-9 <= res.cost_bits <= hi + 1e-9


def test_one_shot_sandwich_random():
    rng = np.random.default_rng(14)
    dm = states.random_density(2, 2, rng=rng)
    res = state_measures.one_shot_ppt_cost(dm)
    lo, hi = res.sandwich
    assert lo - 1e-6 <= res.cost_bits <= hi + 1e-6
    assert res.m_integer >= 1
    # the witness G certifies feasibility at the reported integer rate
    state_measures.check_dilution_feasible(dm, res.m_integer, res.g_witness)


def test_one_shot_ppt_state_costs_nothing():
    dm = states.make_isotropic(0.25, 2)
    res = state_measures.one_shot_ppt_cost(dm)
    assert res.m_integer == 1
    assert res.cost_bits <= 1e-6


def test_dilution_channel_report():
    dm = states.DensityMatrix(matcore.max_entangled(2), 2, 2)
    res = state_measures.one_shot_ppt_cost(dm)
    _, report = state_measures.build_dilution_channel(dm, res.m_integer, res.g_witness)
    assert report["tp"] and report["cp"] and report["cppt"] and report["reproduces"]
    assert report["reproduction_error"] <= 1e-9


def test_dilution_channel_random_state():
    rng = np.random.default_rng(15)
    dm = states.random_density(2, 2, rng=rng)
    res = state_measures.one_shot_ppt_cost(dm)
    ch, report = state_measures.build_dilution_channel(dm, res.m_integer, res.g_witness)
    assert all(report[k] for k in ("tp", "cp", "cppt", "reproduces"))
    assert ch.d_out == 4


def test_closed_form_state_lookup():
    assert abs(state_measures.closed_form_state(states.make_isotropic(0.9, 3)) - math.log2(2.7)) <= 1e-12
    assert state_measures.closed_form_state(states.make_isotropic(0.2, 3)) == 0.0
    assert abs(state_measures.closed_form_state(states.rho_v()) - 1.0) <= 1e-12
    rng = np.random.default_rng(16)
    assert state_measures.closed_form_state(states.random_density(2, 2, rng=rng)) is None


def test_nonconvexity_values():
    rho1, rho2, mix = states.nonconvex_mixture()
    e1 = state_measures.e_kappa_primal(rho1).value_bits
    e2 = state_measures.e_kappa_primal(rho2).value_bits
    em = state_measures.e_kappa_primal(mix).value_bits
    assert abs(e1 - 1.0) <= 1e-5
    assert abs(e2) <= 1e-6
    assert abs(em - math.log2(1.5)) <= 1e-5
    assert em > 0.5 * (e1 + e2) + 0.08  # strictly above the convex bound
