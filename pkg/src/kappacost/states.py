"""Bipartite density matrices: families, fixtures, random sampling, JSON I/O.

Product basis convention is |i>_A |j>_B with the B index fastest, so a
bipartite matrix indexes as M[(i, j), (i', j')] with flat index i * d_b + j.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import matcore

TRACE_TOL = 1e-9
PSD_TOL = 1e-9


class StateValidationError(ValueError):
    """Matrix fails the density-matrix contract (trace one, PSD, Hermitian)."""


@dataclass
class DensityMatrix:
    mat: np.ndarray
    d_a: int
    d_b: int
    family: str = "explicit"
    params: dict = None

    def __post_init__(self):
        self.mat = np.asarray(self.mat, dtype=complex)
        n = self.d_a * self.d_b
        if self.mat.shape != (n, n):
            raise matcore.DimensionMismatchError(
                f"matrix shape {self.mat.shape} does not match {self.d_a}x{self.d_b} bipartition"
            )
        self.mat = matcore.require_hermitian(self.mat)
        if abs(np.trace(self.mat).real - 1.0) > TRACE_TOL:
            raise StateValidationError(f"trace is {np.trace(self.mat).real}, expected 1")
        if not matcore.psd_check(self.mat, tol=PSD_TOL):
            raise StateValidationError("matrix is not positive semidefinite")
        if self.params is None:
            self.params = {}

    @property
    def dims(self) -> tuple[int, int]:
        return (self.d_a, self.d_b)

    def partial_transpose(self) -> np.ndarray:
        return matcore.partial_transpose(self.mat, self.d_a, self.d_b)


# ---------------------------------------------------------------------------
# Standard families
# ---------------------------------------------------------------------------

def make_isotropic(t: float, d: int) -> DensityMatrix:
    """Isotropic state t * Phi_d + (1 - t) * (I - Phi_d) / (d^2 - 1)."""
    if not 0.0 <= t <= 1.0:
        raise ValueError("isotropic fidelity t must lie in [0, 1]")
    if d < 2:
        raise ValueError("local dimension must be at least 2")
    phi = matcore.max_entangled(d)
    rest = (np.eye(d * d) - phi) / (d * d - 1)
    return DensityMatrix(t * phi + (1.0 - t) * rest, d, d, family="isotropic", params={"t": t, "d": d})


def make_werner(p: float, d: int) -> DensityMatrix:
    """Werner state (1-p) * normalized symmetric + p * normalized antisymmetric."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("werner weight p must lie in [0, 1]")
    if d < 2:
        raise ValueError("local dimension must be at least 2")
    ps = matcore.proj_sym(d) * (2.0 / (d * (d + 1)))
    pa = matcore.proj_antisym(d) * (2.0 / (d * (d - 1)))
    return DensityMatrix((1.0 - p) * ps + p * pa, d, d, family="werner", params={"p": p, "d": d})


def make_max_correlated(c: np.ndarray) -> DensityMatrix:
    """State sum_ij c_ij |ii><jj| from a d x d density matrix of coefficients."""
    c = np.asarray(c, dtype=complex)
    d = c.shape[0]
    if c.ndim != 2 or c.shape != (d, d):
        raise matcore.DimensionMismatchError("coefficient matrix must be square")
    c = matcore.require_hermitian(c)
    if abs(np.trace(c).real - 1.0) > TRACE_TOL or not matcore.psd_check(c, tol=PSD_TOL):
        raise StateValidationError("coefficient matrix must be a density matrix")
    mat = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            mat[i * d + i, j * d + j] = c[i, j]
    return DensityMatrix(mat, d, d, family="max_correlated", params={"c": c})


def make_bell_mix(weights) -> DensityMatrix:
    """Mixture of the four two-qubit Bell states with the given weights."""
    w = np.asarray(weights, dtype=float)
    if w.shape != (4,) or np.any(w < -1e-12) or abs(w.sum() - 1.0) > TRACE_TOL:
        raise StateValidationError("weights must be 4 nonnegative numbers summing to 1")
    s = 1.0 / math.sqrt(2.0)
    bells = [
        np.array([s, 0, 0, s]),
        np.array([s, 0, 0, -s]),
        np.array([0, s, s, 0]),
        np.array([0, s, -s, 0]),
    ]
    mat = sum(wk * np.outer(b, b) for wk, b in zip(w, bells))
    return DensityMatrix(mat.astype(complex), 2, 2, family="bell_mix")


def omega_hat(alpha: float) -> DensityMatrix:
    """Two-qubit maximally correlated state with off-diagonal weight alpha / 2."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    c = np.array([[0.5, alpha / 2.0], [alpha / 2.0, 0.5]])
    dm = make_max_correlated(c)
    dm.family = "omega_hat"
    dm.params = {"alpha": alpha, "c": c.astype(complex)}
    return dm


def rho_v() -> DensityMatrix:
    """Rank-two 3 x 3 state on the antisymmetric subspace.

    rho_v = (|v1><v1| + |v2><v2|) / 2 with v1 = (|01> - |10>) / sqrt(2) and
    v2 = (|02> - |20>) / sqrt(2). Its log-negativity, kappa-entanglement and
    trace-norm upper bound are three strictly different values, which makes
    it the canonical separation fixture.
    """
    d = 3
    v1 = np.zeros(d * d, dtype=complex)
    v1[0 * d + 1] = 1.0 / math.sqrt(2.0)
    v1[1 * d + 0] = -1.0 / math.sqrt(2.0)
    v2 = np.zeros(d * d, dtype=complex)
    v2[0 * d + 2] = 1.0 / math.sqrt(2.0)
    v2[2 * d + 0] = -1.0 / math.sqrt(2.0)
    mat = 0.5 * (np.outer(v1, v1.conj()) + np.outer(v2, v2.conj()))
    return DensityMatrix(mat, d, d, family="rho_v")


def nonconvex_mixture() -> tuple[DensityMatrix, DensityMatrix, DensityMatrix]:
    """Two-qubit pair whose equal mixture has cost above the average cost.

    Returns (rho1, rho2, rho) with rho1 = Phi_2, rho2 = (|00><00| + |11><11|)/2
    and rho their average. rho1 costs 1 bit, rho2 costs 0, the mixture costs
    log2(3/2) > 1/2, so the cost measure is not convex.
    """
    rho1 = DensityMatrix(matcore.max_entangled(2), 2, 2, family="phi")
    m2 = np.zeros((4, 4), dtype=complex)
    m2[0, 0] = m2[3, 3] = 0.5
    rho2 = DensityMatrix(m2, 2, 2, family="classical_corr")
    mix = DensityMatrix(0.5 * (rho1.mat + rho2.mat), 2, 2, family="nonconvex_mixture")
    return rho1, rho2, mix


def monogamy_state() -> np.ndarray:
    """Three-qubit pure state (|000> + |011> + sqrt(2)|110>) / 2 as an 8 x 8 matrix."""
    v = np.zeros(8, dtype=complex)
    v[0b000] = 0.5
    v[0b011] = 0.5
    v[0b110] = 0.5 * math.sqrt(2.0)
    return np.outer(v, v.conj())


def monogamy_marginals() -> dict[str, DensityMatrix]:
    """Bipartite cuts of the monogamy counterexample state.

    Returns the A|BC cut (2 x 4) plus the two-qubit marginals psi_AB and
    psi_AC obtained by tracing out the remaining qubit.
    """
    full = monogamy_state()
    cut_a_bc = DensityMatrix(full, 2, 4, family="monogamy_cut")
    ab = matcore.partial_trace_subsystems(full, [2, 2, 2], [2])
    ac = matcore.partial_trace_subsystems(full, [2, 2, 2], [1])
    return {
        "A|BC": cut_a_bc,
        "AB": DensityMatrix(ab, 2, 2, family="monogamy_marginal"),
        "AC": DensityMatrix(ac, 2, 2, family="monogamy_marginal"),
    }


def make_special(name: str, **params):
    name = name.lower()
    if name in ("omega_hat", "omegahat"):
        return omega_hat(float(params.get("alpha", 0.5)))
    if name in ("rho_v", "antisym_rho_v", "antisymrhov"):
        return rho_v()
    if name in ("nonconvex_mixture", "nonconvexmixture"):
        return nonconvex_mixture()[2]
    if name in ("monogamy_triple", "monogamytriple"):
        return monogamy_marginals()
    raise ValueError(f"unknown special state {name!r}")


def random_density(d_a: int, d_b: int, rng=None) -> DensityMatrix:
    """Full-rank random density matrix from a complex Ginibre factor."""
    rng = np.random.default_rng(rng)
    n = d_a * d_b
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    m = g @ g.conj().T
    return DensityMatrix(m / np.trace(m).real, d_a, d_b, family="random")


def random_pure(d_a: int, d_b: int, rng=None) -> DensityMatrix:
    rng = np.random.default_rng(rng)
    n = d_a * d_b
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    v /= np.linalg.norm(v)
    return DensityMatrix(np.outer(v, v.conj()), d_a, d_b, family="random_pure")


# ---------------------------------------------------------------------------
# JSON schema
# ---------------------------------------------------------------------------

def complex_to_json(z: complex):
    return [float(z.real), float(z.imag)]


def matrix_to_json(m: np.ndarray):
    return [[complex_to_json(complex(x)) for x in row] for row in np.asarray(m, complex)]


def matrix_from_json(rows) -> np.ndarray:
    return np.array([[complex(x[0], x[1]) for x in row] for row in rows], dtype=complex)


def state_to_json(dm: DensityMatrix) -> dict:
    return {
        "kind": "explicit",
        "dims": [dm.d_a, dm.d_b],
        "matrix": matrix_to_json(dm.mat),
    }


def state_from_json(obj: dict) -> DensityMatrix:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise StateValidationError("state JSON must be an object with a 'kind' field")
    kind = str(obj["kind"]).lower()
    params = obj.get("params", {})
    try:
        if kind == "isotropic":
            return make_isotropic(float(params["t"]), int(params["d"]))
        if kind == "werner":
            return make_werner(float(params["p"]), int(params["d"]))
        if kind == "max_correlated":
            return make_max_correlated(matrix_from_json(params["c"]))
        if kind == "bell_mix":
            return make_bell_mix(params["weights"])
        if kind == "special":
            name = params.get("name", "")
            extra = {k: v for k, v in params.items() if k != "name"}
            out = make_special(name, **extra)
            if not isinstance(out, DensityMatrix):
                raise StateValidationError(f"special state {name!r} is not a single state")
            return out
        if kind == "explicit":
            d_a, d_b = (int(x) for x in obj["dims"])
            return DensityMatrix(matrix_from_json(obj["matrix"]), d_a, d_b)
    except KeyError as exc:
        raise StateValidationError(f"missing state parameter {exc}") from exc
    raise StateValidationError(f"unknown state kind {kind!r}")
