"""State diagnostics: purity, two-qubit concurrence, logarithmic negativity
and spin-up density."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qops import DensityMatrix, embed_local, partial_transpose, sigma_y, sigma_z

TRACE_NORM_FLOOR = 1e-12  # singular values below this are treated as noise


@dataclass(frozen=True)
class Bipartition:
    """A split of the sites into a nonempty part and its complement."""

    part_x: frozenset[int]
    n_sites: int

    def __post_init__(self):
        part = frozenset(int(s) for s in self.part_x)
        if not part:
            raise ValueError("part_x must be nonempty")
        if not part < set(range(self.n_sites)):
            raise ValueError("part_x must be a proper subset of the sites")
        object.__setattr__(self, "part_x", part)

    @property
    def part_y(self) -> frozenset[int]:
        return frozenset(range(self.n_sites)) - self.part_x


def odd_even_bipartition(n_sites: int) -> Bipartition:
    """Alternating split: sites 0, 2, 4, ... against the rest."""
    return Bipartition(frozenset(range(0, n_sites, 2)), n_sites)


def purity(rho: DensityMatrix) -> float:
    """tr(rho^2), between 1/d (maximally mixed) and 1 (pure)."""
    return float(np.vdot(rho.matrix, rho.matrix).real)


def concurrence(rho: DensityMatrix) -> float:
    """Two-qubit entanglement monotone from the spin-flipped spectrum.

    The values lambda_j are the decreasingly sorted square roots of the
    eigenvalues of rho (sigma_y x sigma_y) rho* (sigma_y x sigma_y), with
    conjugation in the computational basis; the result is
    max(0, lambda_1 - lambda_2 - lambda_3 - lambda_4).
    """
    if rho.space.dims != (2, 2):
        raise ValueError("concurrence is defined for two-qubit states only")
    flip = np.kron(sigma_y, sigma_y)
    # the lambda_j are computed as the singular values of
    # sqrt(rho) (sigma_y x sigma_y) sqrt(rho)*, which share the squares with
    # the eigenvalues of rho flip rho* flip but stay real and sorted by
    # construction; eigenvalues of rho are clipped at 0 before the root
    evals, evecs = np.linalg.eigh(rho.matrix)
    sqrt_rho = (evecs * np.sqrt(np.clip(evals, 0.0, None))) @ evecs.conj().T
    lam = np.linalg.svd(sqrt_rho @ flip @ sqrt_rho.conj(), compute_uv=False)
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def log_negativity(rho: DensityMatrix, bp: Bipartition) -> float:
    """log2 of the trace norm of the partial transpose over ``bp.part_x``."""
    if bp.n_sites != rho.space.n_sites:
        raise ValueError("bipartition does not match the state's site count")
    pt = partial_transpose(rho, bp.part_x)
    sv = np.abs(np.linalg.eigvalsh(pt.matrix))
    trace_norm = float(sv[sv > TRACE_NORM_FLOOR].sum())
    return max(0.0, float(np.log2(trace_norm)))


def spin_up_density(rho: DensityMatrix) -> float:
    """Mean excitation density (1/N) sum_j (1 + <sigma_z_j>) / 2."""
    if any(d != 2 for d in rho.space.dims):
        raise ValueError("spin_up_density requires an all-qubit space")
    n = rho.space.n_sites
    total = 0.0
    for site in range(n):
        z = embed_local(sigma_z, site, rho.space)
        total += (1.0 + float(np.trace(z.matrix @ rho.matrix).real)) / 2.0
    return total / n


def trace_distance(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """(1/2) || rho - sigma ||_1."""
    if rho.space != sigma.space:
        raise ValueError("states live on different spaces")
    eigs = np.linalg.eigvalsh(rho.matrix - sigma.matrix)
    return float(0.5 * np.abs(eigs).sum())


def fidelity_to_pure(rho: DensityMatrix, psi: np.ndarray) -> float:
    """<psi| rho |psi> for a normalized target state vector."""
    v = np.asarray(psi, dtype=complex).reshape(-1)
    v = v / np.linalg.norm(v)
    return float(np.vdot(v, rho.matrix @ v).real)
