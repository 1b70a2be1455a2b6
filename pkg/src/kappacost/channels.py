"""Quantum channels as Choi matrices: constructors, algebra, validity checks.

A channel N from A (dimension d_in) to B (dimension d_out) is stored through
its unnormalized Choi matrix J = sum_ij |i><j|_R (x) N(|i><j|) on R (x) B,
so trace preservation reads Tr_B J = I_{d_in}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import matcore, states

CP_TOL = 1e-9
TP_TOL = 1e-9


class ChannelValidationError(ValueError):
    """Choi matrix fails the CP or TP contract."""


@dataclass
class QuantumChannel:
    choi: np.ndarray
    d_in: int
    d_out: int
    family: str = "explicit"
    params: dict = None

    def __post_init__(self):
        self.choi = np.asarray(self.choi, dtype=complex)
        n = self.d_in * self.d_out
        if self.choi.shape != (n, n):
            raise matcore.DimensionMismatchError(
                f"Choi shape {self.choi.shape} does not match {self.d_in}->{self.d_out}"
            )
        self.choi = matcore.require_hermitian(self.choi)
        if not matcore.psd_check(self.choi, tol=CP_TOL):
            raise ChannelValidationError("Choi matrix is not PSD (map is not CP)")
        marginal = matcore.partial_trace(self.choi, self.d_in, self.d_out, "B")
        if not np.allclose(marginal, np.eye(self.d_in), atol=TP_TOL):
            raise ChannelValidationError("Tr_B of the Choi is not the identity (map is not TP)")
        if self.params is None:
            self.params = {}

    def _replace_params(self, params: dict) -> "QuantumChannel":
        self.params = dict(params)
        return self

    def choi_state(self) -> states.DensityMatrix:
        """Normalized Choi J / d_in as a bipartite state on R (x) B."""
        return states.DensityMatrix(self.choi / self.d_in, self.d_in, self.d_out)

    def choi_pt(self) -> np.ndarray:
        return matcore.partial_transpose(self.choi, self.d_in, self.d_out)


@dataclass
class GaussianChannelParams:
    """Parameter record for bosonic Gaussian channels; no finite Choi exists.

    kind is one of Thermal(eta, n_b), Amplifier(g, n_b), AdditiveNoise(xi),
    PureLoss(eta), PureAmplifier(g).
    """

    kind: str
    eta: float | None = None
    g: float | None = None
    n_b: float | None = None
    xi: float | None = None

    def __post_init__(self):
        k = self.kind.lower()
        if k in ("thermal", "pure_loss", "pureloss"):
            if self.eta is None or not 0.0 < self.eta < 1.0:
                raise ValueError("transmissivity eta must lie in (0, 1)")
        if k in ("amplifier", "pure_amplifier", "pureamplifier"):
            if self.g is None or not self.g > 1.0:
                raise ValueError("gain g must exceed 1")
        if k in ("thermal", "amplifier"):
            if self.n_b is None or self.n_b < 0.0:
                raise ValueError("thermal photon number n_b must be nonnegative")
        if k in ("additive_noise", "additivenoise"):
            if self.xi is None or self.xi <= 0.0:
                raise ValueError("noise variance xi must be positive")


def _reject_gaussian(obj):
    if isinstance(obj, GaussianChannelParams):
        raise ChannelValidationError(
            "Gaussian channels have no finite Choi matrix; "
            "use channel_measures.gaussian_cost for their closed forms"
        )


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------

def choi_from_kraus(kraus, d_in: int, d_out: int, family: str = "explicit") -> QuantumChannel:
    """Channel from a trace-preserving Kraus set."""
    ks = [np.asarray(k, dtype=complex) for k in kraus]
    for k in ks:
        if k.shape != (d_out, d_in):
            raise matcore.DimensionMismatchError(
                f"Kraus shape {k.shape}, expected ({d_out}, {d_in})"
            )
    total = sum(k.conj().T @ k for k in ks)
    if not np.allclose(total, np.eye(d_in), atol=TP_TOL):
        raise ChannelValidationError("Kraus operators do not resolve the identity")
    choi = np.zeros((d_in * d_out, d_in * d_out), dtype=complex)
    for k in ks:
        # vec of |i> -> K|i> stacking: J += sum_ij |i><j| (x) K|i><j|K^dag
        v = k.T.reshape(-1)  # component (i, b) = K[b, i]
        choi += np.outer(v, v.conj())
    return QuantumChannel(choi, d_in, d_out, family=family)


def apply_kraus(kraus, rho: np.ndarray) -> np.ndarray:
    return sum(k @ rho @ k.conj().T for k in kraus)


def identity_channel(d: int) -> QuantumChannel:
    return QuantumChannel(matcore.gamma_operator(d), d, d, family="identity", params={"d": d})


def unitary_channel(u: np.ndarray) -> QuantumChannel:
    u = np.asarray(u, dtype=complex)
    d = u.shape[0]
    return choi_from_kraus([u], d, d, family="unitary")


def erasure_channel(p: float, d: int) -> QuantumChannel:
    """Erasure channel to dimension d + 1 with |e> the last basis vector."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("erasure probability p must lie in [0, 1]")
    d_out = d + 1
    choi = np.zeros((d * d_out, d * d_out), dtype=complex)
    for i in range(d):
        for j in range(d):
            choi[i * d_out + i, j * d_out + j] += 1.0 - p
        choi[i * d_out + d, i * d_out + d] += p
    return QuantumChannel(choi, d, d_out, family="erasure", params={"p": p, "d": d})


def depolarizing_channel(p: float, d: int) -> QuantumChannel:
    """Depolarizing channel; J / d is the isotropic state with fidelity 1 - p."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("depolarizing probability p must lie in [0, 1]")
    phi = matcore.max_entangled(d)
    choi = d * ((1.0 - p) * phi + p / (d * d - 1) * (np.eye(d * d) - phi))
    return QuantumChannel(choi, d, d, family="depolarizing", params={"p": p, "d": d})


def dephasing_channel(q: float) -> QuantumChannel:
    """Qubit dephasing rho -> (1 - q) rho + q Z rho Z."""
    if not 0.0 <= q <= 1.0:
        raise ValueError("dephasing parameter q must lie in [0, 1]")
    z = np.diag([1.0, -1.0]).astype(complex)
    return choi_from_kraus(
        [math.sqrt(1.0 - q) * np.eye(2, dtype=complex), math.sqrt(q) * z],
        2,
        2,
        family="dephasing",
    )._replace_params({"q": q})


def amplitude_damping_kraus(r: float):
    if not 0.0 <= r <= 1.0:
        raise ValueError("damping parameter r must lie in [0, 1]")
    e0 = np.array([[1.0, 0.0], [0.0, math.sqrt(1.0 - r)]], dtype=complex)
    e1 = np.array([[0.0, math.sqrt(r)], [0.0, 0.0]], dtype=complex)
    return [e0, e1]


def amplitude_damping_channel(r: float) -> QuantumChannel:
    return choi_from_kraus(amplitude_damping_kraus(r), 2, 2, family="amplitude_damping")._replace_params({"r": r})


def measure_prepare_channel(povm, outputs, d_in: int, d_out: int) -> QuantumChannel:
    """Channel X -> sum_k Tr[M_k X] sigma_k from a POVM and output states."""
    ms = [np.asarray(m, dtype=complex) for m in povm]
    sigmas = [np.asarray(s, dtype=complex) for s in outputs]
    if len(ms) != len(sigmas):
        raise ValueError("POVM and output lists must have equal length")
    if not np.allclose(sum(ms), np.eye(d_in), atol=TP_TOL):
        raise ChannelValidationError("POVM elements do not resolve the identity")
    choi = sum(np.kron(m.T, s) for m, s in zip(ms, sigmas))
    return QuantumChannel(choi, d_in, d_out, family="measure_prepare")


def isotropic_twirl_channel(m: int) -> QuantumChannel:
    """Measure-prepare twirl projecting onto {Phi_m, orthogonal complement}."""
    if m < 2:
        raise ValueError("twirl dimension must be at least 2")
    phi = matcore.max_entangled(m)
    rest = np.eye(m * m) - phi
    ch = measure_prepare_channel(
        [phi, rest], [phi, rest / (m * m - 1)], m * m, m * m
    )
    ch.family = "isotropic_twirl"
    ch.params = {"m": m}
    return ch


def make_channel(kind: str, **params) -> QuantumChannel:
    kind = kind.lower()
    if kind == "identity":
        return identity_channel(int(params.get("d", 2)))
    if kind == "erasure":
        return erasure_channel(float(params["p"]), int(params.get("d", 2)))
    if kind == "depolarizing":
        return depolarizing_channel(float(params["p"]), int(params.get("d", 2)))
    if kind == "dephasing":
        return dephasing_channel(float(params["q"]))
    if kind == "amplitude_damping":
        return amplitude_damping_channel(float(params["r"]))
    if kind == "isotropic_twirl":
        return isotropic_twirl_channel(int(params["m"]))
    raise ValueError(f"unknown channel kind {kind!r}")


def random_channel(d_in: int, d_out: int, rng=None, n_kraus: int | None = None) -> QuantumChannel:
    """Random channel from a Haar-ish isometry (Gaussian matrix, QR)."""
    rng = np.random.default_rng(rng)
    k = n_kraus or d_out
    g = rng.normal(size=(d_out * k, d_in)) + 1j * rng.normal(size=(d_out * k, d_in))
    q, _ = np.linalg.qr(g)
    v = q[:, :d_in]  # isometry C^{d_in} -> C^{d_out * k}
    kraus = [v[i * d_out : (i + 1) * d_out, :] for i in range(k)]
    ch = choi_from_kraus(kraus, d_in, d_out)
    ch.family = "random"
    return ch


# ---------------------------------------------------------------------------
# Channel algebra
# ---------------------------------------------------------------------------

def _contract(m: np.ndarray, choi: np.ndarray, dc: int, da: int, db: int) -> np.ndarray:
    t = m.reshape(dc, da, dc, da)
    j = choi.reshape(da, db, da, db)
    out = np.einsum("iajb,axby->ixjy", t, j)
    return out.reshape(dc * db, dc * db)


def apply_matrix(n: QuantumChannel, m: np.ndarray, d_spectator: int = 1) -> np.ndarray:
    """Apply n to the second factor of an operator on C (x) A, no state checks.

    Implements the post-selected contraction
    out[(c,b),(c',b')] = sum_{a,a'} m[(c,a),(c',a')] J[(a,b),(a',b')].
    """
    _reject_gaussian(n)
    dc = d_spectator
    if m.shape != (dc * n.d_in, dc * n.d_in):
        raise matcore.DimensionMismatchError(
            f"operator shape {m.shape} does not match spectator {dc} x input {n.d_in}"
        )
    return _contract(np.asarray(m, complex), n.choi, dc, n.d_in, n.d_out)


def apply(n: QuantumChannel, rho: states.DensityMatrix) -> states.DensityMatrix:
    """Apply n to the B factor of a bipartite state on C (x) A."""
    _reject_gaussian(n)
    if rho.d_b != n.d_in:
        raise matcore.DimensionMismatchError(
            f"state second factor {rho.d_b} does not match channel input {n.d_in}"
        )
    out = _contract(rho.mat, n.choi, rho.d_a, n.d_in, n.d_out)
    return states.DensityMatrix(out, rho.d_a, n.d_out)


def compose(second: QuantumChannel, first: QuantumChannel) -> QuantumChannel:
    """Channel second after first (input of second = output of first)."""
    _reject_gaussian(second)
    _reject_gaussian(first)
    if first.d_out != second.d_in:
        raise matcore.DimensionMismatchError(
            f"cannot chain {first.d_in}->{first.d_out} into {second.d_in}->{second.d_out}"
        )
    choi = _contract(first.choi, second.choi, first.d_in, second.d_in, second.d_out)
    return QuantumChannel(choi, first.d_in, second.d_out)


def tensor(n: QuantumChannel, m: QuantumChannel) -> QuantumChannel:
    """Parallel composition with factors grouped as (R1 R2) (x) (B1 B2)."""
    _reject_gaussian(n)
    _reject_gaussian(m)
    big = np.kron(n.choi, m.choi)  # factors R1 B1 R2 B2
    big = matcore.permute_subsystems(
        big, [n.d_in, n.d_out, m.d_in, m.d_out], [0, 2, 1, 3]
    )
    return QuantumChannel(big, n.d_in * m.d_in, n.d_out * m.d_out)


def local_tensor_channel(n_a: QuantumChannel, m_b: QuantumChannel) -> QuantumChannel:
    """Product channel N_A (x) M_B, a completely-PPT-preserving map by construction."""
    ch = tensor(n_a, m_b)
    ch.family = "local_product"
    return ch


# ---------------------------------------------------------------------------
# Validity checks
# ---------------------------------------------------------------------------

def channel_checks(n: QuantumChannel) -> dict:
    """CP, TP, and PPT-entanglement-binding flags from eigenvalue tests."""
    cp = matcore.psd_check(n.choi, tol=CP_TOL)
    marginal = matcore.partial_trace(n.choi, n.d_in, n.d_out, "B")
    tp = bool(np.allclose(marginal, np.eye(n.d_in), atol=TP_TOL))
    binding = matcore.psd_check(n.choi_pt(), tol=CP_TOL)
    return {"cp": cp, "tp": tp, "ppt_binding": binding}


def is_cppt_bipartite(op_choi: np.ndarray, dims, bob_systems) -> bool:
    """Whether a bipartite operation preserves PPT completely.

    op_choi is the Choi matrix of a CP map on the listed tensor factors;
    bob_systems are the indices (input and output) held by Bob. The test is
    positivity of the partial transpose over all of Bob's factors.
    """
    if int(np.prod(dims)) != op_choi.shape[0]:
        raise matcore.DimensionMismatchError("factor dimensions do not match the Choi size")
    pt = matcore.partial_transpose_subsystems(op_choi, list(dims), list(bob_systems))
    return matcore.psd_check(pt, tol=CP_TOL)


# ---------------------------------------------------------------------------
# JSON schema
# ---------------------------------------------------------------------------

def channel_to_json(n: QuantumChannel) -> dict:
    return {
        "kind": "explicit",
        "dims": [n.d_in, n.d_out],
        "choi": states.matrix_to_json(n.choi),
    }


def channel_from_json(obj: dict):
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ChannelValidationError("channel JSON must be an object with a 'kind' field")
    kind = str(obj["kind"]).lower()
    params = obj.get("params", {})
    try:
        if kind == "explicit":
            d_in, d_out = (int(x) for x in obj["dims"])
            return QuantumChannel(states.matrix_from_json(obj["choi"]), d_in, d_out)
        if kind == "gaussian":
            return GaussianChannelParams(
                kind=str(params["name"]),
                eta=params.get("eta"),
                g=params.get("g"),
                n_b=params.get("n_b"),
                xi=params.get("xi"),
            )
        return make_channel(kind, **params)
    except KeyError as exc:
        raise ChannelValidationError(f"missing channel parameter {exc}") from exc
