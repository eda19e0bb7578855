"""Vectorized Liouvillian superoperators: construction, steady states,
time propagation and spectral diagnostics.

Vectorization is column-major throughout: vec(A rho B) = (B^T kron A) vec(rho).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .fme import FmeModel
from .qops import DensityMatrix, HilbertSpec

DENSE_STORAGE_MAX_DIM = 64  # largest Hilbert dimension stored as a dense superoperator
EIG_PATH_MAX_DIM = 32  # largest Hilbert dimension solved by full eigendecomposition
NULL_SPACE_RTOL = 1e-9  # degeneracy threshold relative to the spectral scale
RESIDUAL_RTOL = 1e-9


class SolverError(RuntimeError):
    """Raised when a steady-state solve cannot be completed to tolerance."""


def vectorize(matrix: np.ndarray) -> np.ndarray:
    return np.asarray(matrix).reshape(-1, order="F")


def unvectorize(v: np.ndarray, dim: int) -> np.ndarray:
    return np.asarray(v).reshape((dim, dim), order="F")


@dataclass(frozen=True)
class Liouvillian:
    """The generator of the master equation acting on vectorized states.

    ``matrix`` is a dense ndarray for Hilbert dimension <= 64 and a CSR
    sparse matrix above.
    """

    matrix: object
    space: HilbertSpec

    def __post_init__(self):
        d = self.space.total_dim
        if self.matrix.shape != (d * d, d * d):
            raise ValueError("Liouvillian must act on vectorized d x d states")
        # trace preservation: the trace functional annihilates the generator
        ident = vectorize(np.eye(d, dtype=complex))
        leak = np.linalg.norm(self.matrix.conj().T @ ident)
        scale = max(1.0, self.norm_max()) * np.sqrt(d)
        if leak > 1e-9 * scale:
            raise ValueError(f"generator is not trace preserving (leak {leak:.3e})")

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.matrix)

    def norm_max(self) -> float:
        if sp.issparse(self.matrix):
            return float(np.abs(self.matrix.data).max()) if self.matrix.nnz else 0.0
        return float(np.max(np.abs(self.matrix)))

    def apply(self, rho_matrix: np.ndarray) -> np.ndarray:
        d = self.space.total_dim
        return unvectorize(self.matrix @ vectorize(rho_matrix), d)

    def dense(self) -> np.ndarray:
        return self.matrix.toarray() if self.is_sparse else self.matrix


def master_equation_rhs(model: FmeModel, rho_matrix: np.ndarray) -> np.ndarray:
    """Direct evaluation of -i[H, rho] + sum_k D[J_k] rho, independent of the
    vectorized superoperator path."""
    h = model.hamiltonian.matrix
    out = -1j * (h @ rho_matrix - rho_matrix @ h)
    for jump in model.jumps:
        j = jump.matrix
        jd = j.conj().T
        jdj = jd @ j
        out = out + j @ rho_matrix @ jd - 0.5 * (jdj @ rho_matrix + rho_matrix @ jdj)
    return out


def build_liouvillian(model: FmeModel, storage: str = "auto") -> Liouvillian:
    """Assemble the superoperator for the model's master equation.

    ``storage`` is "auto" (dense up to Hilbert dimension 64), "dense" or
    "sparse".
    """
    d = model.space.total_dim
    eye = sp.identity(d, dtype=complex, format="csr")
    h = sp.csr_matrix(model.hamiltonian.matrix)
    total = -1j * (sp.kron(eye, h) - sp.kron(h.T, eye))
    for jump in model.jumps:
        j = sp.csr_matrix(jump.matrix)
        jdj = (j.conj().T @ j).tocsr()
        total = total + sp.kron(j.conj(), j) - 0.5 * (
            sp.kron(eye, jdj) + sp.kron(jdj.T, eye)
        )
    total = total.tocsr()
    if storage not in ("auto", "dense", "sparse"):
        raise ValueError(f"unknown storage mode {storage!r}")
    if storage == "dense" or (storage == "auto" and d <= DENSE_STORAGE_MAX_DIM):
        return Liouvillian(total.toarray(), model.space)
    return Liouvillian(total, model.space)


@dataclass(frozen=True)
class SteadyStateResult:
    rho: DensityMatrix
    unique: bool
    residual: float


def _residual(lv: Liouvillian, rho_matrix: np.ndarray) -> float:
    return float(np.linalg.norm(lv.matrix @ vectorize(rho_matrix)))


def _state_from_vector(lv: Liouvillian, x: np.ndarray) -> DensityMatrix:
    d = lv.space.total_dim
    m = unvectorize(x, d)
    m = 0.5 * (m + m.conj().T)
    tr = m.trace().real
    if abs(tr) < 1e-14:
        raise SolverError("candidate stationary vector has vanishing trace")
    return DensityMatrix(m / tr, lv.space)


def _solve_eig(lv: Liouvillian, threshold: float):
    evals, evecs = np.linalg.eig(lv.matrix)
    null_idx = np.flatnonzero(np.abs(evals) <= threshold)
    if len(null_idx) == 0:
        raise SolverError("no stationary mode found below the degeneracy threshold")
    unique = len(null_idx) == 1
    if unique:
        return _state_from_vector(lv, evecs[:, null_idx[0]]), True
    # degenerate: return the infinite-time limit of the maximally mixed state,
    # i.e. the spectral projection of vec(I/d) onto the stationary subspace
    d = lv.space.total_dim
    evals_lr, left, right = scipy.linalg.eig(lv.dense(), left=True, right=True)
    null_lr = np.flatnonzero(np.abs(evals_lr) <= threshold)
    v = right[:, null_lr]
    w = left[:, null_lr]
    overlap = w.conj().T @ v
    coeff = np.linalg.solve(overlap, w.conj().T @ vectorize(np.eye(d) / d))
    return _state_from_vector(lv, v @ coeff), False


def _replace_row(l_csr: sp.csr_matrix, row: int, new_row: np.ndarray) -> sp.csc_matrix:
    coo = l_csr.tocoo()
    mask = coo.row != row
    cols = np.flatnonzero(np.abs(new_row) > 0)
    data = np.concatenate([coo.data[mask], new_row[cols]])
    rows = np.concatenate([coo.row[mask], np.full(len(cols), row)])
    col_idx = np.concatenate([coo.col[mask], cols])
    return sp.csc_matrix((data, (rows, col_idx)), shape=l_csr.shape)


def _solve_row_replaced(lv: Liouvillian, l_csr: sp.csr_matrix, tol: float):
    """Solve the consistent trace-constrained system [L; trace] x = [0; 1] by
    replacing one row of L with the trace row, with residual verification and
    row retries."""
    d = lv.space.total_dim
    n = d * d
    trace_row = np.zeros(n, dtype=complex)
    trace_row[np.arange(d) * d + np.arange(d)] = 1.0
    weight = max(1.0, lv.norm_max())
    best = None
    for row in (0, n - 1, (d + 1) * (d // 2)):
        m = _replace_row(l_csr, row, weight * trace_row)
        rhs = np.zeros(n, dtype=complex)
        rhs[row] = weight
        try:
            x = spla.splu(m).solve(rhs)
        except RuntimeError:
            continue
        if not np.all(np.isfinite(x)):
            continue
        state = _state_from_vector(lv, x)
        res = _residual(lv, state.matrix)
        if best is None or res < best[1]:
            best = (state, res)
        if res <= tol:
            break
    return best


def _solve_direct(lv: Liouvillian, threshold: float):
    """Sparse-direct steady state: one LU factorization of the shifted
    generator drives both an inverse iteration toward the stationary mode and
    the two-eigenvalue uniqueness check."""
    d = lv.space.total_dim
    n = d * d
    l_csr = sp.csr_matrix(lv.matrix) if not lv.is_sparse else lv.matrix.tocsr()
    scale = max(1.0, lv.norm_max())
    tol = RESIDUAL_RTOL * scale
    sigma = 1e-7 * scale

    state = None
    try:
        if lv.is_sparse:
            lu = spla.splu(
                (l_csr - sigma * sp.identity(n, dtype=complex, format="csr")).tocsc()
            )
            solve_shifted = lu.solve
        else:
            lu_piv = scipy.linalg.lu_factor(lv.matrix - sigma * np.eye(n))
            solve_shifted = lambda b: scipy.linalg.lu_solve(lu_piv, b)
    except (RuntimeError, scipy.linalg.LinAlgError) as exc:
        raise SolverError(f"LU factorization of the shifted generator failed: {exc}") from exc

    # inverse iteration from the maximally mixed state; its stationary
    # component has unit trace, so the iteration converges to a proper state
    x = vectorize(np.eye(d, dtype=complex) / d)
    for _ in range(100):
        x = solve_shifted(x)
        x = x / np.linalg.norm(x)
        candidate = _state_from_vector(lv, x)
        res = _residual(lv, candidate.matrix)
        if res <= tol:
            state = candidate
            break
    if state is None:
        best = _solve_row_replaced(lv, l_csr, tol)
        if best is None or best[1] > tol:
            raise SolverError(
                "direct steady-state solve did not reach tolerance"
                + ("" if best is None else f" (best residual {best[1]:.3e})")
            )
        state = best[0]

    # uniqueness: the two eigenvalues of L closest to zero, reusing the LU
    op_inv = spla.LinearOperator((n, n), matvec=solve_shifted, dtype=complex)
    try:
        evals = spla.eigs(
            l_csr,
            k=2,
            sigma=sigma,
            OPinv=op_inv,
            which="LM",
            return_eigenvectors=False,
            ncv=24,
        )
    except (spla.ArpackNoConvergence, RuntimeError) as exc:
        raise SolverError(f"uniqueness eigensolve failed: {exc}") from exc
    unique = int(np.sum(np.abs(evals) <= threshold)) == 1
    return state, unique


def steady_state(lv: Liouvillian, method: str = "auto") -> SteadyStateResult:
    """Stationary state of the master equation.

    Returns the state, a uniqueness flag (one-dimensional null space under
    the degeneracy threshold) and the residual norm ||L vec(rho)||.  The
    state is Hermitized and trace-normalized before return.
    """
    d = lv.space.total_dim
    scale = lv.norm_max()
    threshold = NULL_SPACE_RTOL * max(1.0, scale)
    if method == "auto":
        method = "eig" if d <= EIG_PATH_MAX_DIM else "direct"
    if method == "eig":
        if lv.is_sparse:
            lv = Liouvillian(lv.dense(), lv.space)
        if scale == 0.0:
            return SteadyStateResult(
                DensityMatrix(np.eye(d) / d, lv.space), False, 0.0
            )
        state, unique = _solve_eig(lv, threshold)
    elif method == "direct":
        if scale == 0.0:
            return SteadyStateResult(
                DensityMatrix(np.eye(d) / d, lv.space), False, 0.0
            )
        state, unique = _solve_direct(lv, threshold)
    else:
        raise ValueError(f"unknown method {method!r}")
    res = _residual(lv, state.matrix)
    tol = RESIDUAL_RTOL * max(1.0, scale)
    if res > tol:
        raise SolverError(f"steady-state residual {res:.3e} above tolerance {tol:.3e}")
    return SteadyStateResult(state, unique, res)


def evolve(rho0: DensityMatrix, lv: Liouvillian, t: float, dt: float) -> DensityMatrix:
    """Propagate the state by time ``t`` with classical fixed-step fourth-order
    integration of the vectorized master equation."""
    if t < 0:
        raise ValueError("t must be non-negative")
    if dt <= 0:
        raise ValueError("dt must be positive")
    if rho0.space != lv.space:
        raise ValueError("state and Liouvillian spaces differ")
    if t == 0:
        return rho0
    d = lv.space.total_dim
    l_mat = lv.matrix
    x = vectorize(rho0.matrix).astype(complex)
    n_full, remainder = divmod(t, dt)
    steps = [dt] * int(n_full)
    if remainder > 1e-12 * dt:
        steps.append(remainder)
    for h in steps:
        k1 = l_mat @ x
        k2 = l_mat @ (x + 0.5 * h * k1)
        k3 = l_mat @ (x + 0.5 * h * k2)
        k4 = l_mat @ (x + h * k3)
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    m = unvectorize(x, d)
    m = 0.5 * (m + m.conj().T)
    m = m / m.trace().real
    min_eig = float(np.linalg.eigvalsh(m).min())
    if min_eig < -1e-8:
        warnings.warn(
            f"evolved state has negative eigenvalue {min_eig:.3e};"
            " integration step too large",
            RuntimeWarning,
        )
    return DensityMatrix(m, lv.space)


def spectral_gap(lv: Liouvillian) -> float:
    """Relaxation-rate diagnostic: minus the largest real part over the
    non-stationary spectrum.  Requires a dense eigendecomposition and is
    limited to superoperator dimension 4096."""
    d = lv.space.total_dim
    if d * d > 4096:
        raise ValueError(
            f"spectral_gap supports superoperator dimension <= 4096, got {d * d}"
        )
    scale = lv.norm_max()
    if scale == 0.0:
        return 0.0
    threshold = NULL_SPACE_RTOL * max(1.0, scale)
    evals = np.linalg.eigvals(lv.dense())
    moving = evals[np.abs(evals) > threshold]
    if len(moving) == 0:
        return 0.0
    return max(0.0, float(-moving.real.max()))
