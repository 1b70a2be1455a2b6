"""Dense complex Hermitian linear algebra for small bipartite systems.

All operators are plain numpy arrays (complex, row-major). Bipartite
operators live on A (x) B with the B index fastest, i.e. the product basis
is |0,0>, |0,1>, ..., |0,dB-1>, |1,0>, ...
"""

from __future__ import annotations

import numpy as np

HERM_TOL = 1e-10

kron = np.kron


class DimensionMismatchError(ValueError):
    """Operator dimension does not match the declared subsystem dimensions."""


class NotHermitianError(ValueError):
    """Input matrix is not Hermitian within tolerance."""


def is_hermitian(m: np.ndarray, tol: float = HERM_TOL) -> bool:
    scale = max(1.0, np.abs(m).max()) if m.size else 1.0
    return bool(np.abs(m - m.conj().T).max() <= tol * scale)


def require_hermitian(m: np.ndarray, tol: float = HERM_TOL) -> np.ndarray:
    """Validate Hermiticity and return the symmetrized matrix (M + M†)/2."""
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatchError(f"expected square matrix, got {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NotHermitianError("matrix contains NaN/Inf entries")
    if not is_hermitian(m, tol):
        raise NotHermitianError(
            f"matrix is not Hermitian: max |M - M^dag| = {np.abs(m - m.conj().T).max():.3e}"
        )
    return 0.5 * (m + m.conj().T)


def _check_dims(m: np.ndarray, dims: tuple[int, ...]) -> None:
    n = int(np.prod(dims))
    if m.shape != (n, n):
        raise DimensionMismatchError(f"operator is {m.shape}, subsystem dims {dims} need {n}x{n}")


def permute_subsystems(m: np.ndarray, dims: tuple[int, ...], perm: tuple[int, ...]) -> np.ndarray:
    """Reorder the tensor factors of an operator on (x)_k C^{dims[k]}.

    perm[i] gives the old position of the factor that ends up at position i.
    This is the single place where multi-factor index shuffling happens.
    """
    _check_dims(m, dims)
    k = len(dims)
    if sorted(perm) != list(range(k)):
        raise DimensionMismatchError(f"invalid permutation {perm} for {k} factors")
    t = m.reshape(dims + dims)
    axes = tuple(perm) + tuple(p + k for p in perm)
    n = int(np.prod(dims))
    return np.ascontiguousarray(t.transpose(axes).reshape(n, n))


def partial_transpose_subsystems(m, dims, transposed):
    """Transpose the listed tensor factors (by index) of a multi-factor operator."""
    _check_dims(m, dims)
    k = len(dims)
    t = m.reshape(dims + dims)
    axes = list(range(2 * k))
    for i in transposed:
        axes[i], axes[k + i] = axes[k + i], axes[i]
    n = int(np.prod(dims))
    return np.ascontiguousarray(t.transpose(axes).reshape(n, n))


def partial_trace_subsystems(m, dims, traced):
    """Trace out the listed tensor factors (by index)."""
    _check_dims(m, dims)
    k = len(dims)
    t = m.reshape(dims + dims)
    for i in sorted(traced, reverse=True):
        t = np.trace(t, axis1=i, axis2=len(t.shape) // 2 + i)
    kept = int(np.prod([d for i, d in enumerate(dims) if i not in traced])) or 1
    return np.ascontiguousarray(t.reshape(kept, kept))


def partial_transpose(m: np.ndarray, d_a: int, d_b: int, subsystem: str = "B") -> np.ndarray:
    """Partial transpose of a bipartite operator on the A or B factor."""
    idx = {"A": [0], "B": [1]}[subsystem]
    return partial_transpose_subsystems(m, (d_a, d_b), idx)


def partial_trace(m: np.ndarray, d_a: int, d_b: int, traced: str = "B") -> np.ndarray:
    """Trace out subsystem A or B of a bipartite operator."""
    idx = {"A": [0], "B": [1]}[traced]
    return partial_trace_subsystems(m, (d_a, d_b), idx)


def hermitian_eig(m: np.ndarray, tol: float = HERM_TOL):
    """Eigendecomposition of a Hermitian matrix; eigenvalues ascending."""
    h = require_hermitian(m, tol)
    w, v = np.linalg.eigh(h)
    return w, v


def trace_norm(m: np.ndarray) -> float:
    w, _ = hermitian_eig(m)
    return float(np.sum(np.abs(w)))


def op_norm(m: np.ndarray) -> float:
    w, _ = hermitian_eig(m)
    return float(np.max(np.abs(w))) if w.size else 0.0


def abs_op(m: np.ndarray) -> np.ndarray:
    """|M| = sum_i |lambda_i| v_i v_i^dag for Hermitian M."""
    w, v = hermitian_eig(m)
    return (v * np.abs(w)) @ v.conj().T


def norms(m: np.ndarray):
    """(trace norm, operator norm, |M|) in one eigendecomposition."""
    w, v = hermitian_eig(m)
    return float(np.sum(np.abs(w))), float(np.max(np.abs(w))), (v * np.abs(w)) @ v.conj().T


def psd_check(m: np.ndarray, tol: float = 1e-9) -> bool:
    """True iff lambda_min(M) >= -tol * max(1, ||M||_inf)."""
    w, _ = hermitian_eig(m)
    scale = max(1.0, float(np.max(np.abs(w)))) if w.size else 1.0
    return bool(w.min() >= -tol * scale) if w.size else True


def lambda_min(m: np.ndarray) -> float:
    w, _ = hermitian_eig(m)
    return float(w[0])


def gamma_operator(d: int) -> np.ndarray:
    """Unnormalized maximally entangled operator Gamma = sum_ij |ii><jj|."""
    v = np.zeros(d * d, dtype=complex)
    v[:: d + 1] = 1.0
    return np.outer(v, v)


def max_entangled(d: int) -> np.ndarray:
    """Maximally entangled state Phi^d = Gamma / d."""
    return gamma_operator(d) / d


def swap_operator(d: int) -> np.ndarray:
    f = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            f[i * d + j, j * d + i] = 1.0
    return f


def proj_sym(d: int) -> np.ndarray:
    return 0.5 * (np.eye(d * d, dtype=complex) + swap_operator(d))


def proj_antisym(d: int) -> np.ndarray:
    return 0.5 * (np.eye(d * d, dtype=complex) - swap_operator(d))


def standard_operators(d: int) -> dict:
    """Phi^d, Gamma, swap, and the symmetric/antisymmetric projectors."""
    if d < 1:
        raise ValueError("dimension must be >= 1")
    return {
        "phi": max_entangled(d),
        "gamma": gamma_operator(d),
        "swap": swap_operator(d),
        "proj_sym": proj_sym(d),
        "proj_antisym": proj_antisym(d),
    }
