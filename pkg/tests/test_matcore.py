import math

import numpy as np
import pytest

from kappacost import matcore


def test_require_hermitian_accepts_and_symmetrizes():
    m = np.array([[1.0, 1 + 1j], [1 - 1j, 2.0]])
    out = matcore.require_hermitian(m)
    assert np.allclose(out, out.conj().T)


def test_require_hermitian_rejects():
    with pytest.raises(matcore.NotHermitianError):
        matcore.require_hermitian(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_partial_transpose_involution_and_trace():
    rng = np.random.default_rng(0)
    g = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    m = g @ g.conj().T
    pt = matcore.partial_transpose(m, 2, 3)
    assert np.allclose(matcore.partial_transpose(pt, 2, 3), m)
    assert np.isclose(np.trace(pt), np.trace(m))


def test_partial_transpose_subsystem_a_is_full_transpose_composed():
    rng = np.random.default_rng(1)
    g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    m = g + g.conj().T
    both = matcore.partial_transpose(
        matcore.partial_transpose(m, 2, 2, "A"), 2, 2, "B"
    )
    assert np.allclose(both, m.T)


def test_partial_trace_matches_kron():
    rng = np.random.default_rng(2)
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    b = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    m = np.kron(a, b)
    assert np.allclose(matcore.partial_trace(m, 2, 3, "B"), a * np.trace(b))
    assert np.allclose(matcore.partial_trace(m, 2, 3, "A"), b * np.trace(a))


def test_permute_subsystems_swap():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(2, 2))
    b = rng.normal(size=(3, 3))
    m = np.kron(a, b)
    swapped = matcore.permute_subsystems(m, [2, 3], [1, 0])
    assert np.allclose(swapped, np.kron(b, a))


def test_permute_subsystems_three_factors():
    rng = np.random.default_rng(4)
    mats = [rng.normal(size=(d, d)) for d in (2, 3, 2)]
    m = np.kron(np.kron(mats[0], mats[1]), mats[2])
    out = matcore.permute_subsystems(m, [2, 3, 2], [2, 0, 1])
    assert np.allclose(out, np.kron(np.kron(mats[2], mats[0]), mats[1]))


def test_trace_norm_and_op_norm():
    m = np.diag([3.0, -4.0]).astype(complex)
    assert math.isclose(matcore.trace_norm(m), 7.0)
    assert math.isclose(matcore.op_norm(m), 4.0)


def test_abs_op():
    m = np.diag([2.0, -5.0]).astype(complex)
    assert np.allclose(matcore.abs_op(m), np.diag([2.0, 5.0]))


def test_psd_check():
    assert matcore.psd_check(np.eye(3))
    assert not matcore.psd_check(np.diag([1.0, -1e-3]))
    assert matcore.psd_check(np.diag([1.0, -1e-12]))


def test_max_entangled_and_gamma():
    phi = matcore.max_entangled(3)
    assert math.isclose(np.trace(phi).real, 1.0)
    assert np.allclose(phi * 3, matcore.gamma_operator(3))
    w = np.linalg.eigvalsh(phi)
    assert math.isclose(w[-1], 1.0, abs_tol=1e-12)


def test_swap_and_projectors():
    f = matcore.swap_operator(3)
    assert np.allclose(f @ f, np.eye(9))
    ps, pa = matcore.proj_sym(3), matcore.proj_antisym(3)
    assert np.allclose(ps + pa, np.eye(9))
    assert np.allclose(ps @ pa, np.zeros((9, 9)))
    assert math.isclose(np.trace(pa).real, 3.0)  # d(d-1)/2


def test_partial_transpose_of_swap_is_gamma():
    f = matcore.swap_operator(2)
    assert np.allclose(matcore.partial_transpose(f, 2, 2), matcore.gamma_operator(2))


def test_dimension_mismatch_raised():
    with pytest.raises(matcore.DimensionMismatchError):
        matcore.partial_trace(np.eye(5), 2, 3)
