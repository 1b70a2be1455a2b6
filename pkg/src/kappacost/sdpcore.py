"""Semidefinite programming layer.

Real side: `SdpProblem` is a conic program over a product of PSD blocks
(svec coordinates, off-diagonals scaled by sqrt(2)) plus free scalar
variables, with linear equality constraints. `solve` hands the problem to
cvxopt's conelp interior-point solver.

Complex side: `HermitianProgram` assembles programs over complex Hermitian
matrix variables (with partial-transpose / partial-trace / lifting maps in
the constraints) and compiles them down to a real `SdpProblem` through the
standard [[Re, -Im], [Im, Re]] embedding. Objective values are reported in
the complex domain, so no factor-2 bookkeeping leaks out of this module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from cvxopt import matrix as cvxmat
from cvxopt import solvers as cvxsolvers

from . import matcore

SQRT2 = math.sqrt(2.0)


# ---------------------------------------------------------------------------
# Real conic problem and cvxopt backend
# ---------------------------------------------------------------------------

@dataclass
class SolverConfig:
    gap_tol: float = 1e-8
    feas_tol: float = 1e-8
    max_iters: int = 200
    step_fraction: float = 0.98  # kept for interface stability; backend-managed

    def __post_init__(self):
        if self.gap_tol <= 0 or self.feas_tol <= 0:
            raise ValueError("tolerances must be positive")
        if not 0 < self.step_fraction < 1:
            raise ValueError("step_fraction must lie in (0, 1)")


@dataclass
class SdpProblem:
    block_dims: list[int]
    num_free: int
    objective: np.ndarray
    constraints: list[tuple[np.ndarray, float]]
    sense: str = "min"  # "min" | "max"
    # (d, R, const): R x + const constrained PSD, R of shape (d*d, num_vars)
    psd_ineqs: list[tuple[int, np.ndarray, np.ndarray]] = field(default_factory=list)

    def num_vars(self) -> int:
        return sum(d * (d + 1) // 2 for d in self.block_dims) + self.num_free

    def validate(self):
        n = self.num_vars()
        if not self.block_dims and self.num_free == 0:
            raise ValueError("problem has no variables")
        if len(self.objective) != n:
            raise ValueError("objective length does not match variable count")
        for row, _ in self.constraints:
            if len(row) != n:
                raise ValueError("constraint row length does not match variable count")
        for d, r, const in self.psd_ineqs:
            if r.shape != (d * d, n) or const.shape != (d * d,):
                raise ValueError("inequality block shape does not match variable count")


@dataclass
class SdpSolution:
    status: str  # Optimal | PrimalInfeasible | DualInfeasible | MaxIterations | NumericalFailure
    primal_obj: float
    dual_obj: float
    gap: float
    x_blocks: list[np.ndarray]
    free_values: np.ndarray
    y: np.ndarray
    iterations: int


class BracketError(RuntimeError):
    """Bisection bracket is infeasible at its upper cap."""


def svec(m: np.ndarray) -> np.ndarray:
    """Pack a real symmetric matrix into its inner-product-preserving vector."""
    n = m.shape[0]
    out = np.empty(n * (n + 1) // 2)
    k = 0
    for i in range(n):
        out[k] = m[i, i]
        out[k + 1 : k + n - i] = m[i, i + 1 :] * SQRT2
        k += n - i
    return out


def unsvec(v: np.ndarray, n: int) -> np.ndarray:
    m = np.zeros((n, n))
    k = 0
    for i in range(n):
        m[i, i] = v[k]
        m[i, i + 1 :] = v[k + 1 : k + n - i] / SQRT2
        k += n - i
    return m + np.triu(m, 1).T


@lru_cache(maxsize=None)
def _svec_to_full(n: int) -> np.ndarray:
    """Sparse-ish map from svec coordinates to full n*n storage."""
    g = np.zeros((n * n, n * (n + 1) // 2))
    k = 0
    for i in range(n):
        g[i * n + i, k] = 1.0
        k += 1
        for j in range(i + 1, n):
            g[i * n + j, k] = 1.0 / SQRT2
            g[j * n + i, k] = 1.0 / SQRT2
            k += 1
    return g


def solve(problem: SdpProblem, cfg: SolverConfig | None = None) -> SdpSolution:
    """Solve an SdpProblem with cvxopt's conelp; equality-only interface."""
    cfg = cfg or SolverConfig()
    problem.validate()
    nvar = problem.num_vars()
    nblk = sum(d * (d + 1) // 2 for d in problem.block_dims)

    sign = 1.0 if problem.sense == "min" else -1.0
    c = sign * np.asarray(problem.objective, dtype=float)

    # cone: every block variable must equal a PSD slack; each recorded
    # inequality R x + const >= 0 gets its own cone block; free vars stay
    # unconstrained
    total_full = sum(d * d for d in problem.block_dims) + sum(
        d * d for d, _, _ in problem.psd_ineqs
    )
    G = np.zeros((total_full, nvar))
    h = np.zeros(total_full)
    row = 0
    col = 0
    for d in problem.block_dims:
        L = d * (d + 1) // 2
        G[row : row + d * d, col : col + L] = -_svec_to_full(d)
        row += d * d
        col += L
    for d, r, const in problem.psd_ineqs:
        G[row : row + d * d] = -r
        h[row : row + d * d] = const
        row += d * d

    if problem.constraints:
        A = np.vstack([r for r, _ in problem.constraints])
        b = np.array([v for _, v in problem.constraints], dtype=float)
    else:
        A = np.zeros((0, nvar))
        b = np.zeros(0)

    dims = {
        "l": 0,
        "q": [],
        "s": list(problem.block_dims) + [d for d, _, _ in problem.psd_ineqs],
    }
    opts = {
        "show_progress": False,
        "abstol": cfg.gap_tol,
        "reltol": cfg.gap_tol,
        "feastol": cfg.feas_tol,
        "maxiters": cfg.max_iters,
    }
    try:
        sol = cvxsolvers.conelp(
            cvxmat(c), cvxmat(G), cvxmat(h), dims, cvxmat(A), cvxmat(b), options=opts
        )
    except (ValueError, ZeroDivisionError, ArithmeticError) as exc:
        return SdpSolution(
            status="NumericalFailure",
            primal_obj=math.nan,
            dual_obj=math.nan,
            gap=math.inf,
            x_blocks=[],
            free_values=np.zeros(problem.num_free),
            y=np.zeros(0),
            iterations=0,
        )

    status_map = {
        "optimal": "Optimal",
        "primal infeasible": "PrimalInfeasible",
        "dual infeasible": "DualInfeasible",
    }
    iters = int(sol.get("iterations", 0))
    status = status_map.get(sol["status"])
    if status is None:
        status = "MaxIterations" if iters >= cfg.max_iters else "NumericalFailure"

    x = np.array(sol["x"]).ravel() if sol["x"] is not None else np.zeros(nvar)
    blocks = []
    k = 0
    for d in problem.block_dims:
        L = d * (d + 1) // 2
        blocks.append(unsvec(x[k : k + L], d))
        k += L
    free_values = x[nblk:]
    y = np.array(sol["y"]).ravel() if sol["y"] is not None else np.zeros(0)

    p = sign * float(sol["primal objective"]) if sol["primal objective"] is not None else math.nan
    dv = sign * float(sol["dual objective"]) if sol["dual objective"] is not None else math.nan
    gap = abs(p - dv) / (1.0 + abs(p)) if math.isfinite(p) and math.isfinite(dv) else math.inf
    return SdpSolution(status, p, dv, gap, blocks, free_values, y, iters)


# ---------------------------------------------------------------------------
# Complex <-> real embedding
# ---------------------------------------------------------------------------

def embed_hermitian(h: np.ndarray) -> np.ndarray:
    """Real symmetric embedding [[Re h, -Im h], [Im h, Re h]] of a Hermitian h."""
    h = matcore.require_hermitian(h)
    re, im = h.real, h.imag
    return np.block([[re, -im], [im, re]])


def _embed_rows(t: np.ndarray, d: int) -> np.ndarray:
    """Row-wise [[Re, -Im], [Im, Re]] embedding of a map onto d x d images.

    t maps real coordinates to vec'd complex d x d matrices; the result maps
    the same coordinates to vec'd real 2d x 2d embedded matrices.
    """
    n = t.shape[1]
    re = t.real.reshape(d, d, n)
    im = t.imag.reshape(d, d, n)
    out = np.zeros((2 * d, 2 * d, n))
    out[:d, :d] = re
    out[d:, d:] = re
    out[:d, d:] = -im
    out[d:, :d] = im
    return out.reshape(4 * d * d, n)


def deembed_hermitian(m: np.ndarray) -> np.ndarray:
    """Recover a Hermitian matrix from a (possibly unstructured) symmetric 2n block."""
    n = m.shape[0] // 2
    x = 0.5 * (m[:n, :n] + m[n:, n:])
    y = 0.5 * (m[n:, :n] - m[:n, n:])
    h = x + 1j * y
    return 0.5 * (h + h.conj().T)


def bisect_threshold(feasible, lo: float, hi: float, tol: float = 1e-6) -> float:
    """Smallest t (within tol) where a monotone false->true predicate turns true."""
    if feasible(lo):
        return lo
    if not feasible(hi):
        raise BracketError(f"predicate infeasible at bracket cap {hi}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    return hi


# ---------------------------------------------------------------------------
# Hermitian matrix programs
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _herm_basis_flat(n: int) -> np.ndarray:
    """Rows are conj(vec(B_k)) for an orthonormal Hermitian basis of C^{n x n}."""
    rows = np.zeros((n * n, n * n), dtype=complex)
    k = 0
    for i in range(n):
        for j in range(n):
            b = np.zeros((n, n), dtype=complex)
            if i == j:
                b[i, i] = 1.0
            elif i < j:
                b[i, j] = b[j, i] = 1.0 / SQRT2
            else:
                b[j, i] = 1j / SQRT2
                b[i, j] = -1j / SQRT2
            rows[k] = b.reshape(-1).conj()
            k += 1
    return rows


@lru_cache(maxsize=None)
def _sym_basis_flat(n: int) -> np.ndarray:
    """Rows are vec(B_k) for an orthonormal symmetric basis of R^{n x n}."""
    rows = np.zeros((n * (n + 1) // 2, n * n))
    k = 0
    for i in range(n):
        for j in range(i, n):
            b = np.zeros((n, n))
            if i == j:
                b[i, i] = 1.0
            else:
                b[i, j] = b[j, i] = 1.0 / SQRT2
            rows[k] = b.reshape(-1)
            k += 1
    return rows


@lru_cache(maxsize=None)
def _deembed_matrix(n: int) -> np.ndarray:
    """Maps svec of the 2n real block to vec of the de-embedded Hermitian matrix."""
    L = n * (2 * n + 1)
    out = np.zeros((n * n, L), dtype=complex)
    k = 0
    N = 2 * n
    for i in range(N):
        for j in range(i, N):
            m = np.zeros((N, N))
            if i == j:
                m[i, i] = 1.0
            else:
                m[i, j] = m[j, i] = 1.0 / SQRT2
            out[:, k] = deembed_hermitian(m).reshape(-1)
            k += 1
    return out


def linop_matrix(fn, n_in: int, n_out: int) -> np.ndarray:
    """Materialize a linear map on operators as a (n_out^2, n_in^2) matrix on vec."""
    t = np.zeros((n_out * n_out, n_in * n_in), dtype=complex)
    for i in range(n_in):
        for j in range(n_in):
            e = np.zeros((n_in, n_in), dtype=complex)
            e[i, j] = 1.0
            t[:, i * n_in + j] = fn(e).reshape(-1)
    return t


@lru_cache(maxsize=None)
def op_identity(n: int) -> np.ndarray:
    return np.eye(n * n, dtype=complex)


@lru_cache(maxsize=None)
def op_partial_transpose(d_a: int, d_b: int, subsystem: str = "B") -> np.ndarray:
    n = d_a * d_b
    return linop_matrix(lambda e: matcore.partial_transpose(e, d_a, d_b, subsystem), n, n)


@lru_cache(maxsize=None)
def op_partial_trace(d_a: int, d_b: int, traced: str = "B") -> np.ndarray:
    n = d_a * d_b
    n_out = d_a if traced == "B" else d_b
    return linop_matrix(lambda e: matcore.partial_trace(e, d_a, d_b, traced), n, n_out)


@lru_cache(maxsize=None)
def op_tensor_identity_right(d_a: int, d_b: int) -> np.ndarray:
    """H_A -> H_A (x) I_B."""
    return linop_matrix(lambda e: np.kron(e, np.eye(d_b)), d_a, d_a * d_b)


@lru_cache(maxsize=None)
def op_lift_block(n_small: int, n_big: int, offset: int) -> np.ndarray:
    """H -> zero-padded n_big matrix with H placed at diagonal offset."""

    def lift(e):
        z = np.zeros((n_big, n_big), dtype=complex)
        z[offset : offset + n_small, offset : offset + n_small] = e
        return z

    return linop_matrix(lift, n_small, n_big)


class HermitianProgram:
    """Linear SDP over PSD-constrained complex Hermitian variables.

    Matrix (in)equalities are expressed as equalities against slack PSD
    variables by the caller-facing helpers; everything compiles to one
    real SdpProblem.
    """

    def __init__(self, sense: str = "min"):
        self.sense = sense
        self.var_dims: list[int] = []
        self.num_free = 0
        self._matrix_eqs = []  # (dim, terms, free_terms, const)
        self._psd_ineqs = []  # (dim, terms, free_terms, const): expr + const >= 0
        self._scalar_eqs = []  # (terms, free_terms, rhs)
        self._obj_terms = []  # (var, coeff matrix C): contributes Re Tr(C^dag H)
        self._obj_free = {}  # free index -> real coefficient
        self._real_mode = False  # set by compile()

    # -- variables ---------------------------------------------------------
    def psd_var(self, dim: int) -> int:
        self.var_dims.append(dim)
        return len(self.var_dims) - 1

    def free_var(self) -> int:
        self.num_free += 1
        return self.num_free - 1

    # -- constraints -------------------------------------------------------
    def add_matrix_eq(self, dim, terms, const, free_terms=()):
        """sum_k T_k(H_{v_k}) + sum_f t_f C_f = const, all Hermitian of size dim."""
        self._matrix_eqs.append((dim, list(terms), list(free_terms), np.asarray(const, complex)))

    def add_psd_expr(self, dim, terms, const=None, free_terms=()):
        """Constrain sum_k T_k(H_{v_k}) + sum_f t_f C_f + const >= 0."""
        rhs = np.zeros((dim, dim), complex) if const is None else np.asarray(const, complex)
        self._psd_ineqs.append((dim, list(terms), list(free_terms), rhs))

    def add_scalar_eq(self, terms, rhs, free_terms=()):
        """sum_k Re Tr(C_k^dag H_{v_k}) + sum_f c_f t_f = rhs."""
        self._scalar_eqs.append((list(terms), list(free_terms), float(rhs)))

    # -- objective ---------------------------------------------------------
    def set_objective(self, terms=(), free_terms=()):
        self._obj_terms = list(terms)
        self._obj_free = dict(free_terms)

    # -- compile & solve ----------------------------------------------------
    def _svec_len(self, v: int) -> int:
        n = self.var_dims[v] if self._real_mode else 2 * self.var_dims[v]
        return n * (n + 1) // 2

    def _all_real(self) -> bool:
        def real(a) -> bool:
            arr = np.asarray(a)
            return not np.iscomplexobj(arr) or not arr.imag.any()

        for _, terms, free_terms, const in self._matrix_eqs + self._psd_ineqs:
            if not real(const):
                return False
            if any(not real(t) for _, t in terms) or any(not real(c) for _, c in free_terms):
                return False
        for terms, _, _ in self._scalar_eqs:
            if any(not real(c) for _, c in terms):
                return False
        return all(real(c) for _, c in self._obj_terms)

    def compile(self) -> SdpProblem:
        # purely real data admits real symmetric optima, so the complex
        # embedding (which doubles every block) can be skipped
        self._real_mode = self._all_real()
        offsets = []
        off = 0
        for v in range(len(self.var_dims)):
            offsets.append(off)
            off += self._svec_len(v)
        nblk = off
        nvar = nblk + self.num_free

        def var_map(v: int) -> np.ndarray:
            if self._real_mode:
                return _svec_to_full(self.var_dims[v])
            return _deembed_matrix(self.var_dims[v])

        rows = []
        rhs = []
        for dim, terms, free_terms, const in self._matrix_eqs:
            B = _sym_basis_flat(dim) if self._real_mode else _herm_basis_flat(dim)
            block_rows = np.zeros((B.shape[0], nvar))
            for v, trans in terms:
                coeff = np.real(B @ np.asarray(trans, complex) @ var_map(v))
                block_rows[:, offsets[v] : offsets[v] + self._svec_len(v)] += coeff
            for f, cmat in free_terms:
                block_rows[:, nblk + f] += np.real(B @ np.asarray(cmat, complex).reshape(-1))
            rows.append(block_rows)
            rhs.append(np.real(B @ const.reshape(-1)))
        for terms, free_terms, value in self._scalar_eqs:
            r = np.zeros(nvar)
            for v, cmat in terms:
                r[offsets[v] : offsets[v] + self._svec_len(v)] += np.real(
                    np.asarray(cmat, complex).reshape(-1).conj() @ var_map(v)
                )
            for f, c in free_terms:
                r[nblk + f] += c
            rows.append(r.reshape(1, -1))
            rhs.append(np.array([value]))

        obj = np.zeros(nvar)
        for v, cmat in self._obj_terms:
            obj[offsets[v] : offsets[v] + self._svec_len(v)] += np.real(
                np.asarray(cmat, complex).reshape(-1).conj() @ var_map(v)
            )
        for f, c in self._obj_free.items():
            obj[nblk + f] += c

        psd_ineqs = []
        for dim, terms, free_terms, const in self._psd_ineqs:
            t = np.zeros((dim * dim, nvar), dtype=complex)
            for v, trans in terms:
                t[:, offsets[v] : offsets[v] + self._svec_len(v)] += (
                    np.asarray(trans, complex) @ var_map(v)
                )
            for f, cmat in free_terms:
                t[:, nblk + f] += np.asarray(cmat, complex).reshape(-1)
            if self._real_mode:
                psd_ineqs.append((dim, t.real, const.reshape(-1).real))
            else:
                psd_ineqs.append(
                    (2 * dim, _embed_rows(t, dim), embed_hermitian(const).reshape(-1))
                )

        allrows = np.vstack(rows) if rows else np.zeros((0, nvar))
        allrhs = np.concatenate(rhs) if rhs else np.zeros(0)
        constraints = [(allrows[i], float(allrhs[i])) for i in range(allrows.shape[0])]
        return SdpProblem(
            block_dims=[(1 if self._real_mode else 2) * d for d in self.var_dims],
            num_free=self.num_free,
            objective=obj,
            constraints=constraints,
            sense=self.sense,
            psd_ineqs=psd_ineqs,
        )

    def solve(self, cfg: SolverConfig | None = None) -> "HermitianSolution":
        sol = solve(self.compile(), cfg)
        if self._real_mode:
            values = [b.astype(complex) for b in sol.x_blocks]
        else:
            values = [deembed_hermitian(b) for b in sol.x_blocks]
        return HermitianSolution(
            status=sol.status,
            objective=sol.primal_obj,
            dual_objective=sol.dual_obj,
            gap=sol.gap,
            var_values=values,
            free_values=sol.free_values,
            iterations=sol.iterations,
        )


@dataclass
class HermitianSolution:
    status: str
    objective: float
    dual_objective: float
    gap: float
    var_values: list[np.ndarray]
    free_values: np.ndarray
    iterations: int

    def require_optimal(self, what: str = "SDP"):
        if self.status != "Optimal":
            raise SolverFailure(f"{what} solve failed with status {self.status}")
        return self


class SolverFailure(RuntimeError):
    """Interior-point solve did not reach an optimal certificate."""
