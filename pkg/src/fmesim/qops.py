"""Operator algebra on tensor-product Hilbert spaces of qubits and small bosonic modes.

Conventions used throughout the package:

* Site 0 is the leftmost tensor factor.
* The qubit basis is ordered (ground, excited): basis index 0 is the state
  annihilated by ``sigma_minus``, and ``sigma_z = diag(-1, +1)`` so that
  index 0 is the spin-down eigenstate.  With this ordering
  ``sigma_minus = |0><1|`` and the usual algebra
  ``[sigma_x, sigma_y] = 2i sigma_z`` holds.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from math import prod

import numpy as np
import scipy.linalg

HERMITICITY_ATOL = 1e-10
TRACE_ATOL = 1e-10
POSITIVITY_ATOL = 1e-10

sigma_x = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
sigma_y = np.array([[0.0, 1.0j], [-1.0j, 0.0]], dtype=complex)
sigma_z = np.array([[-1.0, 0.0], [0.0, 1.0]], dtype=complex)
sigma_minus = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
sigma_plus = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)
identity2 = np.eye(2, dtype=complex)


def _frozen_complex(matrix) -> np.ndarray:
    out = np.array(matrix, dtype=complex)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class HilbertSpec:
    """Tensor-product space described by the local dimension of each site."""

    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) == 0:
            raise ValueError("a Hilbert space needs at least one site")
        if any(d < 2 for d in dims):
            raise ValueError(f"every local dimension must be >= 2, got {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def n_sites(self) -> int:
        return len(self.dims)

    @property
    def total_dim(self) -> int:
        return prod(self.dims)

    def validate_site(self, site: int) -> int:
        if not 0 <= site < self.n_sites:
            raise ValueError(f"site {site} out of range for {self.n_sites} sites")
        return site


def qubits(n: int) -> HilbertSpec:
    """Space of ``n`` qubits."""
    return HilbertSpec((2,) * n)


@dataclass(frozen=True)
class Operator:
    """A linear operator on the full space.  Hermiticity is not enforced."""

    matrix: np.ndarray
    space: HilbertSpec

    def __post_init__(self):
        m = _frozen_complex(self.matrix)
        d = self.space.total_dim
        if m.shape != (d, d):
            raise ValueError(f"matrix shape {m.shape} does not match total dimension {d}")
        object.__setattr__(self, "matrix", m)

    def dagger(self) -> "Operator":
        return Operator(self.matrix.conj().T, self.space)

    def is_hermitian(self, atol: float = HERMITICITY_ATOL) -> bool:
        return bool(np.max(np.abs(self.matrix - self.matrix.conj().T)) <= atol)

    def norm_max(self) -> float:
        return float(np.max(np.abs(self.matrix)))

    def __add__(self, other: "Operator") -> "Operator":
        self._check_space(other)
        return Operator(self.matrix + other.matrix, self.space)

    def __sub__(self, other: "Operator") -> "Operator":
        self._check_space(other)
        return Operator(self.matrix - other.matrix, self.space)

    def __neg__(self) -> "Operator":
        return Operator(-self.matrix, self.space)

    def __rmul__(self, scalar: complex) -> "Operator":
        return Operator(scalar * self.matrix, self.space)

    def __matmul__(self, other: "Operator") -> "Operator":
        self._check_space(other)
        return Operator(self.matrix @ other.matrix, self.space)

    def _check_space(self, other: "Operator"):
        if self.space != other.space:
            raise ValueError("operators live on different spaces")


def zero_operator(space: HilbertSpec) -> Operator:
    return Operator(np.zeros((space.total_dim, space.total_dim)), space)


def identity_operator(space: HilbertSpec) -> Operator:
    return Operator(np.eye(space.total_dim), space)


@dataclass(frozen=True)
class DensityMatrix:
    """A valid quantum state: Hermitian, unit trace, positive semidefinite."""

    matrix: np.ndarray
    space: HilbertSpec

    def __post_init__(self):
        m = _frozen_complex(self.matrix)
        d = self.space.total_dim
        if m.shape != (d, d):
            raise ValueError(f"matrix shape {m.shape} does not match total dimension {d}")
        herm_dev = np.max(np.abs(m - m.conj().T))
        if herm_dev > HERMITICITY_ATOL:
            raise ValueError(f"state not Hermitian (max deviation {herm_dev:.3e})")
        trace_dev = abs(m.trace() - 1.0)
        if trace_dev > TRACE_ATOL:
            raise ValueError(f"state trace differs from 1 by {trace_dev:.3e}")
        min_eig = float(np.linalg.eigvalsh(0.5 * (m + m.conj().T)).min())
        if min_eig < -POSITIVITY_ATOL:
            raise ValueError(f"state has negative eigenvalue {min_eig:.3e}")
        object.__setattr__(self, "matrix", m)

    def as_operator(self) -> Operator:
        return Operator(self.matrix, self.space)


def pure_state(amplitudes, space: HilbertSpec) -> DensityMatrix:
    """Density matrix of the normalized state vector ``amplitudes``."""
    psi = np.asarray(amplitudes, dtype=complex).reshape(-1)
    if psi.shape != (space.total_dim,):
        raise ValueError("state vector length does not match the space")
    psi = psi / np.linalg.norm(psi)
    return DensityMatrix(np.outer(psi, psi.conj()), space)


def basis_state(space: HilbertSpec, occupations) -> DensityMatrix:
    """Product basis state |occupations[0], occupations[1], ...>."""
    occ = tuple(occupations)
    if len(occ) != space.n_sites:
        raise ValueError("one occupation number per site required")
    index = 0
    for site, (k, d) in enumerate(zip(occ, space.dims)):
        if not 0 <= k < d:
            raise ValueError(f"occupation {k} out of range at site {site}")
        index = index * d + k
    psi = np.zeros(space.total_dim)
    psi[index] = 1.0
    return pure_state(psi, space)


def maximally_mixed(space: HilbertSpec) -> DensityMatrix:
    d = space.total_dim
    return DensityMatrix(np.eye(d) / d, space)


def embed_local(op, site: int, space: HilbertSpec) -> Operator:
    """Embed a local operator as I x ... x op x ... x I with op at ``site``."""
    space.validate_site(site)
    local = np.asarray(op, dtype=complex)
    d_site = space.dims[site]
    if local.shape != (d_site, d_site):
        raise ValueError(
            f"local operator shape {local.shape} does not match site dimension {d_site}"
        )
    factors = [
        local if s == site else np.eye(d, dtype=complex)
        for s, d in enumerate(space.dims)
    ]
    return Operator(reduce(np.kron, factors), space)


def partial_trace(rho: DensityMatrix, keep) -> DensityMatrix:
    """Reduced state on the sites in ``keep`` (ascending site order)."""
    keep_sorted = sorted(set(keep))
    if not keep_sorted:
        raise ValueError("keep set must not be empty")
    n = rho.space.n_sites
    for s in keep_sorted:
        rho.space.validate_site(s)
    tensor = rho.matrix.reshape(rho.space.dims * 2)
    row = list(range(n))
    col = [i if i not in keep_sorted else n + i for i in range(n)]
    out = [i for i in keep_sorted] + [n + i for i in keep_sorted]
    reduced = np.einsum(tensor, row + col, out)
    kept_dims = tuple(rho.space.dims[i] for i in keep_sorted)
    d_red = prod(kept_dims)
    return DensityMatrix(reduced.reshape(d_red, d_red), HilbertSpec(kept_dims))


def partial_transpose(rho: DensityMatrix, transposed_sites) -> Operator:
    """Transpose the row/column indices of the given sites; may be indefinite."""
    sites = sorted(set(transposed_sites))
    n = rho.space.n_sites
    for s in sites:
        rho.space.validate_site(s)
    if not sites:
        return rho.as_operator()
    tensor = rho.matrix.reshape(rho.space.dims * 2)
    perm = list(range(2 * n))
    for s in sites:
        perm[s], perm[n + s] = perm[n + s], perm[s]
    d = rho.space.total_dim
    return Operator(tensor.transpose(perm).reshape(d, d), rho.space)


def matrix_exp(op: Operator) -> Operator:
    """Matrix exponential (scaling-and-squaring with Pade approximant)."""
    return Operator(scipy.linalg.expm(op.matrix), op.space)


def operator_support(op: Operator, atol: float = 1e-12) -> frozenset[int]:
    """Sites on which the operator acts non-trivially.

    A site is outside the support when the operator factorizes as an identity
    on it: all cross blocks between its basis states vanish and all diagonal
    blocks coincide.
    """
    dims = op.space.dims
    n = len(dims)
    scale = max(1.0, op.norm_max())
    support = set()
    for site in range(n):
        pre = prod(dims[:site])
        d_s = dims[site]
        post = prod(dims[site + 1 :])
        blocks = op.matrix.reshape(pre, d_s, post, pre, d_s, post)
        blocks = np.moveaxis(blocks, (1, 4), (0, 1)).reshape(d_s, d_s, -1)
        off_diag = max(
            np.max(np.abs(blocks[i, j]))
            for i in range(d_s)
            for j in range(d_s)
            if i != j
        )
        diag_spread = max(
            np.max(np.abs(blocks[i, i] - blocks[0, 0])) for i in range(d_s)
        )
        if off_diag > atol * scale or diag_spread > atol * scale:
            support.add(site)
    return frozenset(support)
