import math

import numpy as np
import pytest

from kappacost import matcore, states


def test_isotropic_extremes():
    dm = states.make_isotropic(1.0, 3)
    assert np.allclose(dm.mat, matcore.max_entangled(3))
    dm = states.make_isotropic(0.25, 2)
    assert np.allclose(dm.mat, np.eye(4) / 4.0)


def test_isotropic_ppt_boundary():
    for d in (2, 3):
        dm = states.make_isotropic(1.0 / d, d)
        assert abs(matcore.lambda_min(dm.partial_transpose())) <= 1e-9


def test_isotropic_parameter_range():
    with pytest.raises(ValueError):
        states.make_isotropic(1.5, 2)


def test_werner_boundary_and_support():
    dm = states.make_werner(0.5, 2)
    assert abs(matcore.lambda_min(dm.partial_transpose())) <= 1e-9
    dm = states.make_werner(0.0, 3)
    pa = matcore.proj_antisym(3)
    assert np.abs(pa @ dm.mat @ pa).max() <= 1e-12
    singlet = states.make_werner(1.0, 2)
    en = math.log2(matcore.trace_norm(singlet.partial_transpose()))
    assert math.isclose(en, 1.0, abs_tol=1e-10)


def test_max_correlated_structures():
    plus = np.full((2, 2), 0.5)
    dm = states.make_max_correlated(plus)
    assert np.allclose(dm.mat, matcore.max_entangled(2))
    dm = states.make_max_correlated(np.eye(2) / 2)
    assert matcore.psd_check(dm.partial_transpose())


def test_max_correlated_rejects_invalid_c():
    with pytest.raises(states.StateValidationError):
        states.make_max_correlated(np.eye(2))  # trace 2


def test_max_correlated_absolute_pt_fixed_point():
    rng = np.random.default_rng(5)
    g = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    c = g @ g.conj().T
    c /= np.trace(c).real
    dm = states.make_max_correlated(c)
    rtb = dm.partial_transpose()
    assert np.allclose(
        matcore.partial_transpose(matcore.abs_op(rtb), 3, 3), matcore.abs_op(rtb)
    )


def test_omega_hat_matches_max_correlated():
    alpha = 0.6
    dm = states.omega_hat(alpha)
    c = np.array([[0.5, alpha / 2], [alpha / 2, 0.5]])
    assert np.allclose(dm.mat, states.make_max_correlated(c).mat)


def test_rho_v_support():
    dm = states.rho_v()
    assert np.linalg.matrix_rank(dm.mat) == 2
    ps = matcore.proj_sym(3)
    assert np.abs(ps @ dm.mat @ ps).max() <= 1e-12
    assert math.isclose(np.trace(dm.mat).real, 1.0)


def test_nonconvex_mixture_structure():
    r1, r2, mix = states.nonconvex_mixture()
    assert np.allclose(mix.mat, 0.5 * (r1.mat + r2.mat))
    assert np.allclose(r1.mat, matcore.max_entangled(2))


def test_monogamy_marginals():
    cuts = states.monogamy_marginals()
    en_ab = math.log2(matcore.trace_norm(cuts["AB"].partial_transpose()))
    en_ac = math.log2(matcore.trace_norm(cuts["AC"].partial_transpose()))
    assert math.isclose(en_ab, math.log2(1.5), abs_tol=1e-10)
    assert math.isclose(en_ac, math.log2(1.5), abs_tol=1e-10)
    assert cuts["A|BC"].dims == (2, 4)


def test_random_density_deterministic_and_valid():
    a = states.random_density(2, 2, rng=42)
    b = states.random_density(2, 2, rng=42)
    assert np.allclose(a.mat, b.mat)
    assert math.isclose(np.trace(a.mat).real, 1.0, abs_tol=1e-12)
    assert matcore.psd_check(a.mat)


def test_state_validation_rejects_bad_inputs():
    with pytest.raises(states.StateValidationError):
        states.DensityMatrix(np.eye(4), 2, 2)  # trace 4
    with pytest.raises(states.StateValidationError):
        states.DensityMatrix(np.diag([1.5, -0.5, 0, 0]).astype(complex), 2, 2)
    with pytest.raises(matcore.DimensionMismatchError):
        states.DensityMatrix(np.eye(4) / 4, 2, 3)


def test_json_roundtrip_and_families():
    dm = states.rho_v()
    back = states.state_from_json(states.state_to_json(dm))
    assert np.allclose(back.mat, dm.mat)
    iso = states.state_from_json({"kind": "isotropic", "params": {"t": 0.5, "d": 2}})
    assert np.allclose(iso.mat, states.make_isotropic(0.5, 2).mat)
    w = states.state_from_json({"kind": "werner", "params": {"p": 0.7, "d": 3}})
    assert np.allclose(w.mat, states.make_werner(0.7, 3).mat)
    with pytest.raises(states.StateValidationError):
        states.state_from_json({"kind": "nope"})
    with pytest.raises(states.StateValidationError):
        states.state_from_json({"kind": "isotropic", "params": {"t": 0.5}})


def test_bell_mix():
    dm = states.make_bell_mix([1.0, 0.0, 0.0, 0.0])
    assert np.allclose(dm.mat, matcore.max_entangled(2))
    with pytest.raises(states.StateValidationError):
        states.make_bell_mix([0.5, 0.5, 0.5, -0.5])
