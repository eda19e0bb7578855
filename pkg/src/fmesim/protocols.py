"""Constructors for the two concrete feedback models: the pairwise qubit
entanglement protocol (single pair or ring) and the dissipative
transverse-field Ising emulation.

All rates are dimensionless; time is measured in units of the inverse
light-matter coupling.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

import numpy as np

from .fme import (
    FmeModel,
    FmeSetup,
    SiteOperator,
    build_model,
    combine_models,
    feedback_table_from_entries,
)
from .qops import (
    HilbertSpec,
    Operator,
    embed_local,
    qubits,
    sigma_minus,
    sigma_plus,
    sigma_x,
    sigma_y,
    sigma_z,
)

Z_MAX = 0.99  # cap guarding against diverging feedback gains as z -> 1


@dataclass(frozen=True)
class TwoQubitParams:
    """Target-state parameter of the pair protocol.

    ``z`` interpolates between incoherent pumping to the local ground state
    (z = 0) and a maximally entangled pair (z -> 1, unreachable: the feedback
    gains diverge).
    """

    z: float

    def __post_init__(self):
        if not 0.0 <= self.z <= Z_MAX:
            raise ValueError(f"z must lie in [0, {Z_MAX}], got {self.z}")

    @property
    def coupling_plus(self) -> float:
        return sqrt(self.z * (1.0 + self.z))

    @property
    def coupling_minus(self) -> float:
        return sqrt(1.0 - self.z)

    @property
    def gains(self) -> tuple[float, float]:
        """Feedback gain pair; zero without feedback (z = 0)."""
        if self.z == 0.0:
            return 0.0, 0.0
        s_p, s_m = self.coupling_plus, self.coupling_minus
        g_p = self.z * (s_m + s_p) / (sqrt(2.0) * s_p * s_m)
        g_m = self.z * (s_m - s_p) / (sqrt(2.0) * s_p * s_m)
        return g_p, g_m


def target_pair_state(z: float) -> np.ndarray:
    """The protocol's stationary state vector (|00> - z|11>) / sqrt(1 + z^2)."""
    psi = np.zeros(4, dtype=complex)
    psi[0] = 1.0
    psi[3] = -z
    return psi / np.linalg.norm(psi)


def pair_interferometer() -> np.ndarray:
    """Balanced beam splitter followed by a quarter-wave phase on one output."""
    return np.array([[1.0, 1.0], [1.0j, -1.0j]], dtype=complex) / sqrt(2.0)


def pair_setup(p: TwoQubitParams, site_a: int, site_b: int, space: HilbertSpec) -> FmeSetup:
    """The pair protocol's setup acting on two chosen qubits of ``space``."""
    s_p, s_m = p.coupling_plus, p.coupling_minus
    g_p, g_m = p.gains
    system_ops = (
        SiteOperator(site_a, s_p * sigma_plus + s_m * sigma_minus),
        SiteOperator(site_b, s_p * sigma_plus - s_m * sigma_minus),
    )
    feedback = feedback_table_from_entries(
        space,
        2,
        [
            (0, SiteOperator(site_a, g_p * sigma_y)),
            (0, SiteOperator(site_b, g_m * sigma_y)),
            (1, SiteOperator(site_a, g_m * sigma_x)),
            (1, SiteOperator(site_b, -g_p * sigma_x)),
        ],
    )
    return FmeSetup(space, system_ops, pair_interferometer(), feedback)


def two_qubit_model(p: TwoQubitParams) -> FmeModel:
    """Feedback master equation driving two qubits into the entangled
    stationary state ``target_pair_state(z)``."""
    return build_model(pair_setup(p, 0, 1, qubits(2)))


def ring_model(n: int, z: float, periodic: bool = True) -> FmeModel:
    """Chain of pair protocols coupling neighboring qubits.

    With ``periodic`` the last qubit couples back to the first, giving a
    translation-invariant ring with 2n jump operators; without it the open
    chain has 2(n-1).
    """
    if n < 3:
        raise ValueError("ring_model requires at least 3 qubits")
    p = TwoQubitParams(z)
    space = qubits(n)
    n_pairs = n if periodic else n - 1
    models = [
        build_model(pair_setup(p, j, (j + 1) % n, space)) for j in range(n_pairs)
    ]
    return combine_models(models)


@dataclass(frozen=True)
class IsingParams:
    """Ring Ising target: n sites, exchange strength ``delta``, transverse
    field ``b``, and the system/feedback rescaling ``r`` entering only the
    jump operators."""

    n: int
    delta: float
    b: float
    r: float = 1.0

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("ising model requires at least 3 sites")
        if self.delta == 0.0:
            raise ValueError("delta must be nonzero")
        if self.r <= 0.0:
            raise ValueError("r must be positive")


@dataclass(frozen=True)
class RingInterferometer:
    """Interferometer diagonal in the Fourier basis, chosen so that the
    engineered dissipation couples only five contiguous sites."""

    v: np.ndarray
    lambda_sq: np.ndarray
    dft: np.ndarray
    shift: np.ndarray


@dataclass(frozen=True)
class IsingDerived:
    """Derived matrices of the Ising construction: interferometer ``v``,
    real feedback gains, complex jump-coefficient matrix ``gamma`` and the
    squared interferometer eigenvalues."""

    v: np.ndarray
    gains: np.ndarray
    gamma: np.ndarray
    lambda_sq: np.ndarray


def dft_matrix(n: int) -> np.ndarray:
    j = np.arange(n)
    return np.exp(2j * np.pi * np.outer(j, j) / n) / sqrt(n)


def shift_matrix(n: int) -> np.ndarray:
    s = np.zeros((n, n))
    s[np.arange(n), (np.arange(n) + 1) % n] = 1.0
    return s


def ising_interferometer(n: int) -> RingInterferometer:
    """Symmetric unitary with squared Fourier eigenvalues
    (1 - 2i cos(2 pi k / n)) / (1 + 2i cos(2 pi k / n)).

    The square roots are taken on the principal branch and then paired,
    lambda_k = lambda_{n-k}, which makes the interferometer symmetric.
    """
    if n < 3:
        raise ValueError("need at least 3 sites")
    c = np.cos(2.0 * np.pi * np.arange(n) / n)
    lambda_sq = (1.0 - 2j * c) / (1.0 + 2j * c)
    if np.any(np.abs(lambda_sq + 1.0) < 1e-12):
        raise ValueError("interferometer eigenvalue hit -1; construction invalid")
    lam = np.sqrt(lambda_sq)
    for k in range(1, (n + 1) // 2):
        lam[n - k] = lam[k]
        lambda_sq[n - k] = lambda_sq[k]
    f = dft_matrix(n)
    v = f @ np.diag(lam) @ f.conj().T
    return RingInterferometer(v, lambda_sq, f, shift_matrix(n))


def ising_coupling_matrix(p: IsingParams) -> np.ndarray:
    """Encoded coupling matrix: nearest-neighbor exchange off the diagonal
    and minus the field strengths on it."""
    s = shift_matrix(p.n)
    return -p.b * np.eye(p.n) + 0.5 * p.delta * (s + s.T)


def _ising_setup(p: IsingParams, interferometer: np.ndarray, gains: np.ndarray) -> FmeSetup:
    space = qubits(p.n)
    system_ops = tuple(SiteOperator(k, p.r * sigma_minus) for k in range(p.n))
    entries = []
    for k in range(p.n):
        for l in range(p.n):
            g = gains[l, k] / p.r
            if g != 0.0:
                entries.append((k, SiteOperator(l, g * sigma_x)))
    table = feedback_table_from_entries(space, p.n, entries)
    return FmeSetup(space, system_ops, interferometer, table)


def ising_model(p: IsingParams) -> tuple[FmeModel, IsingDerived]:
    """Dissipative transverse-field Ising ring.

    Two light fields per site pass conjugate interferometers; the feedback
    gains are chosen so the cross terms cancel and the engineered Hamiltonian
    matches the Ising target up to an identity shift.  The jump operators are
    returned in their locally mixed form r sigma_-^k - (i/r) sum_j
    gamma[j,k] sigma_x^j (conjugate coefficients for the second field), each
    supported on five contiguous sites.
    """
    ring = ising_interferometer(p.n)
    v = ring.v
    re_v = v.real
    cond = np.linalg.cond(re_v)
    if cond > 1e8:
        raise ValueError(
            f"real part of the interferometer is ill-conditioned (cond {cond:.3e})"
        )
    coupling = ising_coupling_matrix(p)
    gains = coupling @ np.linalg.inv(re_v)
    gamma = 2.0 * coupling @ np.linalg.inv(np.eye(p.n) + v.T @ v)

    setup_a = _ising_setup(p, v, gains)
    setup_b = _ising_setup(p, v.conj(), gains)
    combined = combine_models([build_model(setup_a), build_model(setup_b)])

    space = qubits(p.n)
    jumps = []
    for coeff in (gamma, gamma.conj()):
        for k in range(p.n):
            j = p.r * embed_local(sigma_minus, k, space)
            for site in range(p.n):
                if coeff[site, k] != 0.0:
                    j = j + (-1j / p.r) * coeff[site, k] * embed_local(
                        sigma_x, site, space
                    )
            jumps.append(j)
    model = FmeModel(space, combined.hamiltonian, tuple(jumps))
    derived = IsingDerived(v, gains, gamma, ring.lambda_sq)
    return model, derived


def ising_target_hamiltonian(p: IsingParams) -> Operator:
    """The emulated Hamiltonian: exchange terms minus transverse fields
    (no identity shift)."""
    space = qubits(p.n)
    coupling = ising_coupling_matrix(p)
    h = np.zeros((space.total_dim, space.total_dim), dtype=complex)
    for k in range(p.n):
        for l in range(p.n):
            if k == l:
                continue
            xk = embed_local(sigma_x, k, space).matrix
            xl = embed_local(sigma_x, l, space).matrix
            h = h + coupling[k, l] * (xk @ xl)
    for k in range(p.n):
        h = h - p.b * embed_local(sigma_z, k, space).matrix
    return Operator(h, space)
