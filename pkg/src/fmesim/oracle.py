"""Independent validation of the feedback master equation by direct
simulation of one coarse-grained measure-and-feedback cycle on truncated
field modes.

Each cycle adjoins vacuum modes in the interferometer-output basis (vacuum is
invariant under the interferometer, so the mixing can be absorbed into the
couplings), applies the coarse-grained interaction unitary, measures the
field quadratures mode by mode on a discretized grid, applies the
simultaneous feedback unitary for the sampled outcomes, and discards the
field.  Averaging many trajectories reproduces the unconditional dynamics up
to the coarse-graining error and sampling noise.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import prod, sqrt

import numpy as np

from .fme import FmeSetup, build_model, channel_feedback_ops, transformed_system_ops
from .liouvillian import build_liouvillian, evolve
from .measures import trace_distance
from .qops import DensityMatrix, HilbertSpec, Operator, matrix_exp

GRID_MASS_MIN = 1.0 - 1e-4  # smallest acceptable captured probability mass
DEFAULT_CHUNK = 2048


class TruncationLeakError(RuntimeError):
    """Raised when the quadrature grid or Fock truncation loses probability."""


@dataclass(frozen=True)
class FieldConfig:
    """Discretization of the measured field modes."""

    n_modes: int
    fock_dim: int = 4
    x_max: float = 6.0
    n_points: int = 241

    def __post_init__(self):
        if self.n_modes < 1:
            raise ValueError("need at least one mode")
        if self.fock_dim < 3:
            raise ValueError("fock_dim must be at least 3 to hold two-photon terms")
        if self.n_points < 2 or self.x_max <= 0:
            raise ValueError("invalid quadrature grid")
        psi0 = hermite_amplitudes(1, self.x_grid)[:, 0]
        mass = float(np.sum(np.abs(psi0) ** 2) * self.dx)
        if abs(mass - 1.0) > 1e-6:
            raise ValueError(
                f"quadrature grid does not resolve the vacuum (mass {mass:.8f})"
            )

    @property
    def x_grid(self) -> np.ndarray:
        return np.linspace(-self.x_max, self.x_max, self.n_points)

    @property
    def dx(self) -> float:
        return 2.0 * self.x_max / (self.n_points - 1)


@dataclass(frozen=True)
class CoarseStepParams:
    """Coarse step size eps = sqrt(step duration) and sampling budget."""

    epsilon: float
    n_traj: int
    seed: int

    def __post_init__(self):
        if not 0.0 < self.epsilon <= 0.2:
            raise ValueError("epsilon must lie in (0, 0.2] for the expansion to hold")
        if self.n_traj < 1:
            raise ValueError("n_traj must be positive")


def hermite_amplitudes(fock_dim: int, x_grid) -> np.ndarray:
    """Position amplitudes <x|n> of the Fock states for X = (a + a^dag)/sqrt(2).

    Uses the stable normalized three-term recurrence
    psi_{n+1} = sqrt(2/(n+1)) x psi_n - sqrt(n/(n+1)) psi_{n-1}.
    """
    if fock_dim > 20:
        raise ValueError("fock_dim above 20 is not supported")
    x = np.asarray(x_grid, dtype=float)
    out = np.zeros((len(x), fock_dim))
    out[:, 0] = np.pi**-0.25 * np.exp(-0.5 * x**2)
    if fock_dim > 1:
        out[:, 1] = sqrt(2.0) * x * out[:, 0]
    for n in range(1, fock_dim - 1):
        out[:, n + 1] = sqrt(2.0 / (n + 1)) * x * out[:, n] - sqrt(
            n / (n + 1)
        ) * out[:, n - 1]
    return out


def _destroy(fock_dim: int) -> np.ndarray:
    a = np.zeros((fock_dim, fock_dim), dtype=complex)
    ns = np.arange(1, fock_dim)
    a[ns - 1, ns] = np.sqrt(ns)
    return a


class CoarseGrainedCycle:
    """Precomputed machinery for one measure-and-feedback cycle of a setup."""

    def __init__(self, setup: FmeSetup, fc: FieldConfig, epsilon: float):
        if fc.n_modes != setup.n_channels:
            raise ValueError("field configuration must provide one mode per channel")
        self.setup = setup
        self.fc = fc
        self.epsilon = epsilon
        self.space = setup.space
        d = self.space.total_dim
        m = fc.n_modes
        f = fc.fock_dim

        z_ops = [z.matrix for z in transformed_system_ops(setup)]
        self.feedback = [op.matrix for op in channel_feedback_ops(setup)]

        joint_dims = self.space.dims + (f,) * m
        joint_space = HilbertSpec(joint_dims)
        field_dim = f**m
        a = _destroy(f)
        h_joint = np.zeros((d * field_dim, d * field_dim), dtype=complex)
        for k in range(m):
            mode_op = np.kron(
                np.kron(np.eye(f**k), a), np.eye(f ** (m - 1 - k))
            )
            coupling = np.kron(z_ops[k], mode_op.conj().T) - np.kron(
                z_ops[k].conj().T, mode_op
            )
            h_joint += 1j * coupling
        interaction = matrix_exp(
            Operator(-1j * epsilon * h_joint, joint_space)
        ).matrix

        vac = np.zeros(field_dim)
        vac[0] = 1.0
        adjoin = np.kron(np.eye(d), vac.reshape(-1, 1))  # (d * field_dim, d)
        self.entangle = interaction @ adjoin  # maps rho to V (rho x vac) V^dag
        self.amplitudes = hermite_amplitudes(f, fc.x_grid)

    def _measure_mode(self, joint, dims, axis, u_draws):
        """Project one mode onto a sampled quadrature value.

        ``joint`` is a batch (C, D, D) over the factors ``dims``; the chosen
        factor is contracted against the sampled position amplitudes and the
        batch is renormalized.  Returns the reduced batch, sampled x values
        and the captured grid mass.
        """
        c = joint.shape[0]
        n = len(dims)
        nf = dims[axis]
        rest = prod(dims) // nf
        t = joint.reshape((c,) + dims + dims)
        order = (
            [0]
            + [1 + i for i in range(n) if i != axis]
            + [1 + axis]
            + [1 + n + i for i in range(n) if i != axis]
            + [1 + n + axis]
        )
        t = t.transpose(order).reshape(c, rest, nf, rest, nf)
        rdiag = np.einsum("crnrm->cnm", t)
        probs = np.einsum("xn,cnm,xm->cx", self.amplitudes, rdiag,
                          self.amplitudes.conj()).real * self.fc.dx
        probs = np.clip(probs, 0.0, None)
        mass = probs.sum(axis=1)
        if mass.min() < GRID_MASS_MIN:
            raise TruncationLeakError(
                f"captured grid mass {mass.min():.6f} below {GRID_MASS_MIN};"
                f" increase x_max or fock_dim (fock_dim={self.fc.fock_dim},"
                f" x_max={self.fc.x_max})"
            )
        cum = np.cumsum(probs, axis=1)
        idx = (cum < (u_draws * mass)[:, None]).sum(axis=1)
        amp = self.amplitudes[idx]
        projected = np.einsum("cn,crnsm,cm->crs", amp, t, amp.conj())
        traces = np.einsum("crr->c", projected).real
        projected /= traces[:, None, None]
        rest_dims = tuple(dims[i] for i in range(n) if i != axis)
        return projected, rest_dims, self.fc.x_grid[idx], mass

    def _feedback_unitaries(self, x_values):
        """exp(-i sqrt(2) eps sum_k x_k F_k) for a batch of outcome vectors."""
        gen = np.einsum("ck,kij->cij", x_values, np.array(self.feedback))
        w, v = np.linalg.eigh(gen)
        phases = np.exp(-1j * sqrt(2.0) * self.epsilon * w)
        return (v * phases[:, None, :]) @ v.conj().transpose(0, 2, 1)

    def step_batch(self, states, uniforms, measure_order=None):
        """Advance a batch of system states by one coarse cycle.

        ``uniforms`` has one row per trajectory and one column per mode.
        Returns the new batch and the sampled quadrature values.
        """
        m = self.fc.n_modes
        order = list(range(m)) if measure_order is None else list(measure_order)
        if sorted(order) != list(range(m)):
            raise ValueError("measure_order must be a permutation of the modes")
        joint = np.matmul(self.entangle, states)
        joint = np.matmul(joint, self.entangle.conj().T)
        dims = (self.space.total_dim,) + (self.fc.fock_dim,) * m
        labels = list(range(m + 1))  # factor 0 is the system, 1 + k is mode k
        c = states.shape[0]
        xs = np.zeros((c, m))
        for mode in order:
            axis = labels.index(mode + 1)
            joint, dims, x_vals, _ = self._measure_mode(
                joint, dims, axis, uniforms[:, mode]
            )
            xs[:, mode] = x_vals
            labels.pop(axis)
        u_fb = self._feedback_unitaries(xs)
        states = np.matmul(u_fb, np.matmul(joint, u_fb.conj().transpose(0, 2, 1)))
        return states, xs

    def step_exact(self, rho: np.ndarray) -> np.ndarray:
        """Deterministic grid-integrated average of one cycle (the infinite
        trajectory limit).  Single-mode setups only."""
        if self.fc.n_modes != 1:
            raise ValueError("exact averaging is implemented for one mode only")
        d = self.space.total_dim
        joint = self.entangle @ rho @ self.entangle.conj().T
        nf = self.fc.fock_dim
        t = joint.reshape(d, nf, d, nf)
        branches = np.einsum("xn,anbm,xm->xab", self.amplitudes, t,
                             self.amplitudes.conj()) * self.fc.dx
        mass = float(np.einsum("xaa->", branches).real)
        if mass < GRID_MASS_MIN:
            raise TruncationLeakError(
                f"captured grid mass {mass:.6f} below {GRID_MASS_MIN}"
            )
        u_fb = self._feedback_unitaries(self.fc.x_grid.reshape(-1, 1))
        averaged = np.einsum("xab,xbc,xdc->ad", u_fb, branches, u_fb.conj())
        return averaged / mass


@dataclass(frozen=True)
class CoarseStepResult:
    rho_avg: DensityMatrix
    samples: np.ndarray  # sampled quadrature values, (n_traj, n_modes)


def _uniform_draws(p: CoarseStepParams, steps: int, n_modes: int) -> np.ndarray:
    # counter-based generator: the full draw tensor is fixed by the seed,
    # independent of chunking
    rng = np.random.Generator(np.random.Philox(key=p.seed))
    return rng.random((p.n_traj, steps, n_modes))


def coarse_step(
    rho: DensityMatrix,
    setup: FmeSetup,
    fc: FieldConfig,
    p: CoarseStepParams,
    measure_order=None,
    average: str = "sample",
) -> CoarseStepResult:
    """One coarse measure-and-feedback cycle, averaged over trajectories.

    ``average="sample"`` draws ``n_traj`` Monte-Carlo trajectories;
    ``average="exact"`` integrates over the outcome grid instead (single-mode
    setups), which is the infinite-trajectory limit.
    """
    if rho.space != setup.space:
        raise ValueError("state and setup spaces differ")
    cycle = CoarseGrainedCycle(setup, fc, p.epsilon)
    d = setup.space.total_dim
    if average == "exact":
        avg = cycle.step_exact(rho.matrix)
        avg = 0.5 * (avg + avg.conj().T)
        return CoarseStepResult(
            DensityMatrix(avg / avg.trace().real, setup.space),
            np.zeros((0, fc.n_modes)),
        )
    if average != "sample":
        raise ValueError(f"unknown averaging mode {average!r}")
    uniforms = _uniform_draws(p, 1, fc.n_modes)
    total = np.zeros((d, d), dtype=complex)
    samples = np.zeros((p.n_traj, fc.n_modes))
    for start in range(0, p.n_traj, DEFAULT_CHUNK):
        stop = min(start + DEFAULT_CHUNK, p.n_traj)
        batch = np.broadcast_to(rho.matrix, (stop - start, d, d)).copy()
        batch, xs = cycle.step_batch(batch, uniforms[start:stop, 0, :], measure_order)
        total += batch.sum(axis=0)
        samples[start:stop] = xs
    avg = total / p.n_traj
    avg = 0.5 * (avg + avg.conj().T)
    avg /= avg.trace().real
    return CoarseStepResult(DensityMatrix(avg, setup.space), samples)


@dataclass(frozen=True)
class ValidationReport:
    """Per-step comparison of the trajectory ensemble against the master
    equation, with an empirical error budget
    c1 * eps^3 * step + c2 / sqrt(n_traj)."""

    epsilon: float
    n_traj: int
    steps: int
    trace_distances: tuple[float, ...]
    stat_error_estimate: float
    bound_c1: float
    bound_c2: float
    sample_mean: float
    sample_variance: float
    n_samples: int

    def bound(self, step: int) -> float:
        return self.bound_c1 * self.epsilon**3 * step + self.bound_c2 / sqrt(
            self.n_traj
        )


def validate_against_fme(
    setup: FmeSetup,
    fc: FieldConfig,
    p: CoarseStepParams,
    steps: int,
    rho0: DensityMatrix | None = None,
) -> ValidationReport:
    """Propagate trajectories for several coarse cycles and compare the
    running ensemble average against the master-equation propagation with
    matching step duration eps^2."""
    if steps < 1:
        raise ValueError("steps must be positive")
    cycle = CoarseGrainedCycle(setup, fc, p.epsilon)
    d = setup.space.total_dim
    if rho0 is None:
        rho0 = DensityMatrix(np.eye(d) / d, setup.space)
    if rho0.space != setup.space:
        raise ValueError("initial state space mismatch")

    uniforms = _uniform_draws(p, steps, fc.n_modes)
    sums = np.zeros((steps, d, d), dtype=complex)
    half_sums = np.zeros((2, steps, d, d), dtype=complex)
    sample_sum = 0.0
    sample_sq_sum = 0.0
    n_samples = 0
    for start in range(0, p.n_traj, DEFAULT_CHUNK):
        stop = min(start + DEFAULT_CHUNK, p.n_traj)
        batch = np.broadcast_to(rho0.matrix, (stop - start, d, d)).copy()
        parity = np.arange(start, stop) % 2
        for s in range(steps):
            batch, xs = cycle.step_batch(batch, uniforms[start:stop, s, :])
            sums[s] += batch.sum(axis=0)
            half_sums[0, s] += batch[parity == 0].sum(axis=0)
            half_sums[1, s] += batch[parity == 1].sum(axis=0)
            sample_sum += xs.sum()
            sample_sq_sum += (xs**2).sum()
            n_samples += xs.size

    model = build_model(setup)
    lv = build_liouvillian(model)
    dt = p.epsilon**2
    reference = rho0
    distances = []
    for s in range(steps):
        reference = evolve(reference, lv, dt, dt)
        mean = sums[s] / p.n_traj
        mean = 0.5 * (mean + mean.conj().T)
        mean /= mean.trace().real
        distances.append(trace_distance(DensityMatrix(mean, setup.space), reference))

    n_half = [p.n_traj - p.n_traj // 2, p.n_traj // 2]
    final_halves = []
    for h in range(2):
        m = half_sums[h, steps - 1] / max(n_half[h], 1)
        m = 0.5 * (m + m.conj().T)
        m /= m.trace().real
        final_halves.append(DensityMatrix(m, setup.space))
    stat_scale = 0.5 * trace_distance(final_halves[0], final_halves[1])
    c2 = stat_scale * sqrt(p.n_traj)
    c1 = max(0.0, (distances[-1] - stat_scale) / (p.epsilon**3 * steps))
    mean_x = sample_sum / n_samples
    var_x = sample_sq_sum / n_samples - mean_x**2
    return ValidationReport(
        epsilon=p.epsilon,
        n_traj=p.n_traj,
        steps=steps,
        trace_distances=tuple(distances),
        stat_error_estimate=stat_scale,
        bound_c1=c1,
        bound_c2=c2,
        sample_mean=mean_x,
        sample_variance=var_x,
        n_samples=n_samples,
    )
