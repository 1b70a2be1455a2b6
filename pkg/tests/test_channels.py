import math

import numpy as np
import pytest

from kappacost import channels, matcore, states


def test_identity_choi_is_gamma():
    ch = channels.identity_channel(2)
    assert np.allclose(ch.choi, matcore.gamma_operator(2))


def test_choi_from_kraus_identity_and_constant():
    ch = channels.choi_from_kraus([np.eye(2, dtype=complex)], 2, 2)
    assert np.allclose(ch.choi, matcore.gamma_operator(2))
    ad1 = channels.amplitude_damping_channel(1.0)
    e00 = np.zeros((2, 2))
    e00[0, 0] = 1.0
    assert np.allclose(ad1.choi, np.kron(np.eye(2), e00))


def test_choi_from_kraus_rejects_non_tp():
    with pytest.raises(channels.ChannelValidationError):
        channels.choi_from_kraus([0.5 * np.eye(2, dtype=complex)], 2, 2)


def test_amplitude_damping_two_routes_agree():
    direct = channels.amplitude_damping_channel(0.5)
    via_kraus = channels.choi_from_kraus(channels.amplitude_damping_kraus(0.5), 2, 2)
    assert np.allclose(direct.choi, via_kraus.choi)


def test_dephasing_choi_is_bell_mixture():
    q = 0.3
    ch = channels.dephasing_channel(q)
    s = 1 / math.sqrt(2)
    psi1 = np.array([s, 0, 0, s])
    psi2 = np.array([s, 0, 0, -s])
    expected = 2 * ((1 - q) * np.outer(psi1, psi1) + q * np.outer(psi2, psi2))
    assert np.allclose(ch.choi, expected)


def test_depolarizing_choi_is_isotropic():
    p, d = 0.3, 2
    ch = channels.depolarizing_channel(p, d)
    iso = states.make_isotropic(1 - p, d)
    assert np.allclose(ch.choi / d, iso.mat)


def test_erasure_structure():
    ch = channels.erasure_channel(0.4, 2)
    assert ch.d_out == 3
    # output on erased branch is |e><e| with e the last basis vector
    rho = states.random_density(1, 2, rng=0)
    out = channels.apply(ch, rho)
    assert math.isclose(out.mat[2, 2].real, 0.4, abs_tol=1e-12)


def test_apply_identity_and_dimension_error():
    ch = channels.identity_channel(2)
    dm = states.random_density(2, 2, rng=1)
    assert np.allclose(channels.apply(ch, dm).mat, dm.mat)
    with pytest.raises(matcore.DimensionMismatchError):
        channels.apply(channels.identity_channel(3), dm)


def test_apply_reproduces_choi():
    ch = channels.random_channel(2, 3, rng=2)
    gamma = matcore.gamma_operator(2)
    assert np.abs(channels.apply_matrix(ch, gamma, d_spectator=2) - ch.choi).max() <= 1e-12


def test_compose_identity_and_dephasing_law():
    n = channels.random_channel(2, 2, rng=3)
    comp = channels.compose(channels.identity_channel(2), n)
    assert np.allclose(comp.choi, n.choi)
    q1, q2 = 0.2, 0.35
    law = channels.compose(channels.dephasing_channel(q2), channels.dephasing_channel(q1))
    expected = channels.dephasing_channel(q1 + q2 - 2 * q1 * q2)
    assert np.abs(law.choi - expected.choi).max() <= 1e-12


def test_compose_equals_sequential_apply():
    rng = np.random.default_rng(4)
    n = channels.random_channel(2, 3, rng=rng)
    m = channels.random_channel(3, 2, rng=rng)
    dm = states.random_density(2, 2, rng=rng)
    a = channels.apply(channels.compose(m, n), dm).mat
    b = channels.apply(m, channels.apply(n, dm)).mat
    assert np.abs(a - b).max() <= 1e-10


def test_tensor_identity_and_grouping():
    t = channels.tensor(channels.identity_channel(2), channels.identity_channel(2))
    assert np.allclose(t.choi, channels.identity_channel(4).choi)
    rng = np.random.default_rng(5)
    n = channels.random_channel(2, 2, rng=rng)
    m = channels.random_channel(2, 2, rng=rng)
    joint = channels.tensor(n, m)
    a = states.random_density(1, 2, rng=rng).mat
    b = states.random_density(1, 2, rng=rng).mat
    out = channels.apply_matrix(joint, np.kron(a, b))
    expected = np.kron(channels.apply_matrix(n, a), channels.apply_matrix(m, b))
    assert np.abs(out - expected).max() <= 1e-12


def test_channel_checks_binding():
    assert channels.channel_checks(channels.dephasing_channel(0.5))["ppt_binding"]
    assert not channels.channel_checks(channels.dephasing_channel(0.2))["ppt_binding"]
    assert channels.channel_checks(channels.erasure_channel(1.0, 2))["ppt_binding"]
    dephase_fully = channels.choi_from_kraus(
        [np.diag([1.0, 0.0]).astype(complex), np.diag([0.0, 1.0]).astype(complex)], 2, 2
    )
    assert channels.channel_checks(dephase_fully)["ppt_binding"]


def test_is_cppt_bipartite():
    tw = channels.isotropic_twirl_channel(2)
    assert channels.is_cppt_bipartite(tw.choi, [2, 2, 2, 2], [1, 3])
    swap = channels.unitary_channel(matcore.swap_operator(2))
    assert not channels.is_cppt_bipartite(swap.choi, [2, 2, 2, 2], [1, 3])
    local = channels.local_tensor_channel(
        channels.random_channel(2, 2, rng=6), channels.random_channel(2, 2, rng=7)
    )
    assert channels.is_cppt_bipartite(local.choi, [2, 2, 2, 2], [1, 3])


def test_twirl_fixes_maximally_entangled():
    tw = channels.isotropic_twirl_channel(3)
    phi = matcore.max_entangled(3)
    assert np.abs(channels.apply_matrix(tw, phi) - phi).max() <= 1e-12


def test_covariance_of_depolarizing():
    # N(U rho U^dag) = U N(rho) U^dag for the depolarizing channel
    rng = np.random.default_rng(8)
    ch = channels.depolarizing_channel(0.3, 2)
    g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    u, _ = np.linalg.qr(g)
    rho = states.random_density(1, 2, rng=rng).mat
    lhs = channels.apply_matrix(ch, u @ rho @ u.conj().T)
    rhs = u @ channels.apply_matrix(ch, rho) @ u.conj().T
    assert np.abs(lhs - rhs).max() <= 1e-12


def test_gaussian_params_validation_and_rejection():
    with pytest.raises(ValueError):
        channels.GaussianChannelParams("thermal", eta=1.5, n_b=0.1)
    with pytest.raises(ValueError):
        channels.GaussianChannelParams("amplifier", g=0.5, n_b=0.1)
    p = channels.GaussianChannelParams("thermal", eta=0.5, n_b=0.25)
    with pytest.raises(channels.ChannelValidationError):
        channels.compose(channels.identity_channel(2), p)


def test_channel_json_roundtrip():
    ch = channels.random_channel(2, 3, rng=9)
    back = channels.channel_from_json(channels.channel_to_json(ch))
    assert np.abs(back.choi - ch.choi).max() <= 1e-12
    deph = channels.channel_from_json({"kind": "dephasing", "params": {"q": 0.25}})
    assert np.allclose(deph.choi, channels.dephasing_channel(0.25).choi)
    g = channels.channel_from_json(
        {"kind": "gaussian", "params": {"name": "pure_loss", "eta": 0.5}}
    )
    assert isinstance(g, channels.GaussianChannelParams)


def test_quantum_channel_validation():
    with pytest.raises(channels.ChannelValidationError):
        channels.QuantumChannel(np.eye(4), 2, 2)  # not TP
    with pytest.raises(channels.ChannelValidationError):
        channels.QuantumChannel(-matcore.gamma_operator(2), 2, 2)  # not CP
