"""Construction of the feedback master equation from a declarative setup.

A setup consists of measurement channels, each coupling one site to a light
field through a local system operator, a passive interferometer mixing the
fields, and a table of local Hermitian feedback operators driven by the
homodyne signal of each detector.  The resulting unconditional dynamics is a
Lindblad master equation whose Hamiltonian and jump operators are assembled
here.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .qops import (
    HERMITICITY_ATOL,
    HilbertSpec,
    Operator,
    embed_local,
    zero_operator,
)

UNITARITY_ATOL = 1e-10


@dataclass(frozen=True)
class SiteOperator:
    """A local operator tagged with the site it acts on."""

    site: int
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("local operator must be a square matrix")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def embedded(self, space: HilbertSpec) -> Operator:
        return embed_local(self.matrix, self.site, space)


@dataclass(frozen=True)
class FmeSetup:
    """Declarative input: channel couplings, interferometer and feedback table.

    ``system_ops[k]`` couples channel k's light field to one site.
    ``interferometer`` is the M x M unitary mixing the M channel fields.
    ``feedback_table[k][l]`` is the local Hermitian operator applied to site l
    in response to the detector-k signal (``None`` means no feedback).
    """

    space: HilbertSpec
    system_ops: tuple[SiteOperator, ...]
    interferometer: np.ndarray
    feedback_table: tuple[tuple[Optional[np.ndarray], ...], ...]

    def __post_init__(self):
        ops = tuple(self.system_ops)
        m_channels = len(ops)
        if m_channels == 0:
            raise ValueError("at least one measurement channel is required")
        for k, op in enumerate(ops):
            self.space.validate_site(op.site)
            d_site = self.space.dims[op.site]
            if op.matrix.shape != (d_site, d_site):
                raise ValueError(
                    f"channel {k} system operator does not match site {op.site} dimension"
                )
        u = np.array(self.interferometer, dtype=complex)
        if u.shape != (m_channels, m_channels):
            raise ValueError(
                f"interferometer must be {m_channels} x {m_channels}, got {u.shape}"
            )
        unit_dev = np.max(np.abs(u.conj().T @ u - np.eye(m_channels)))
        if unit_dev > UNITARITY_ATOL:
            raise ValueError(f"interferometer not unitary (deviation {unit_dev:.3e})")
        u.setflags(write=False)

        table = []
        for k, row in enumerate(self.feedback_table):
            if len(row) != self.space.n_sites:
                raise ValueError("feedback table rows must have one entry per site")
            norm_row = []
            for l, entry in enumerate(row):
                if entry is None:
                    norm_row.append(None)
                    continue
                f = np.array(entry, dtype=complex)
                d_site = self.space.dims[l]
                if f.shape != (d_site, d_site):
                    raise ValueError(
                        f"feedback operator ({k},{l}) does not match site {l} dimension"
                    )
                herm_dev = np.max(np.abs(f - f.conj().T))
                if herm_dev > HERMITICITY_ATOL:
                    raise ValueError(
                        f"feedback operator ({k},{l}) not Hermitian (deviation {herm_dev:.3e})"
                    )
                f.setflags(write=False)
                norm_row.append(f)
            table.append(tuple(norm_row))
        if len(table) != m_channels:
            raise ValueError("feedback table must have one row per channel")

        object.__setattr__(self, "system_ops", ops)
        object.__setattr__(self, "interferometer", u)
        object.__setattr__(self, "feedback_table", tuple(table))

    @property
    def n_channels(self) -> int:
        return len(self.system_ops)


def feedback_table_from_entries(
    space: HilbertSpec, n_channels: int, entries: Sequence[tuple[int, SiteOperator]]
) -> tuple[tuple[Optional[np.ndarray], ...], ...]:
    """Assemble the channel x site feedback table from (channel, SiteOperator)
    pairs; repeated (channel, site) entries are summed."""
    table: list[list[Optional[np.ndarray]]] = [
        [None] * space.n_sites for _ in range(n_channels)
    ]
    for channel, op in entries:
        if not 0 <= channel < n_channels:
            raise ValueError(f"channel {channel} out of range")
        space.validate_site(op.site)
        current = table[channel][op.site]
        table[channel][op.site] = (
            op.matrix if current is None else current + op.matrix
        )
    return tuple(tuple(row) for row in table)


@dataclass(frozen=True)
class FmeModel:
    """Derived Hamiltonian and jump operators of the unconditional dynamics."""

    space: HilbertSpec
    hamiltonian: Operator
    jumps: tuple[Operator, ...]

    def __post_init__(self):
        if self.hamiltonian.space != self.space:
            raise ValueError("Hamiltonian space mismatch")
        if not self.hamiltonian.is_hermitian():
            raise ValueError("Hamiltonian must be Hermitian")
        for j in self.jumps:
            if j.space != self.space:
                raise ValueError("jump operator space mismatch")
        object.__setattr__(self, "jumps", tuple(self.jumps))


def transformed_system_ops(setup: FmeSetup) -> list[Operator]:
    """Channel operators after the interferometer: row-k mix of the embedded
    channel couplings."""
    embedded = [op.embedded(setup.space) for op in setup.system_ops]
    out = []
    for k in range(setup.n_channels):
        z = zero_operator(setup.space)
        for j, s in enumerate(embedded):
            z = z + setup.interferometer[k, j] * s
        out.append(z)
    return out


def channel_feedback_ops(setup: FmeSetup) -> list[Operator]:
    """Total Hermitian feedback generator driven by each detector."""
    out = []
    for row in setup.feedback_table:
        f = zero_operator(setup.space)
        for site, entry in enumerate(row):
            if entry is not None:
                f = f + embed_local(entry, site, setup.space)
        out.append(f)
    return out


def build_model(setup: FmeSetup) -> FmeModel:
    """Assemble the master-equation ingredients.

    The Hamiltonian is (1/2) sum_k (F_k Z_k + (F_k Z_k)^dag) and the jump
    operators are J_k = Z_k - i F_k, one per measurement channel.
    """
    z_ops = transformed_system_ops(setup)
    f_ops = channel_feedback_ops(setup)
    h = zero_operator(setup.space)
    jumps = []
    for z, f in zip(z_ops, f_ops):
        fz = f @ z
        h = h + 0.5 * (fz + fz.dagger())
        jumps.append(z - 1j * f)
    return FmeModel(setup.space, h, tuple(jumps))


def combine_models(models: Sequence[FmeModel]) -> FmeModel:
    """Additive combination of independently driven light-field setups:
    Hamiltonians sum, jump lists concatenate."""
    models = list(models)
    if not models:
        raise ValueError("need at least one model")
    space = models[0].space
    h = zero_operator(space)
    jumps: list[Operator] = []
    for m in models:
        if m.space != space:
            raise ValueError("cannot combine models on different spaces")
        h = h + m.hamiltonian
        jumps.extend(m.jumps)
    return FmeModel(space, h, tuple(jumps))


def mix_jumps(jumps: Sequence[Operator], w: np.ndarray) -> list[Operator]:
    """Replace jump operators by unitary combinations sum_l w[k,l] J_l.

    The dissipator is invariant under this replacement, which is used to
    bring jump operators into a structurally simpler equivalent form.
    """
    jumps = list(jumps)
    w = np.asarray(w, dtype=complex)
    m = len(jumps)
    if w.shape != (m, m):
        raise ValueError("mixing matrix shape must match the number of jumps")
    if np.max(np.abs(w.conj().T @ w - np.eye(m))) > UNITARITY_ATOL:
        raise ValueError("mixing matrix must be unitary")
    return [
        sum((w[k, l] * jumps[l] for l in range(m)), zero_operator(jumps[0].space))
        for k in range(m)
    ]


@dataclass(frozen=True)
class LoccReport:
    """Result of the LOCC sufficiency test.

    ``is_locc_sufficient`` is True when every combination
    sum_k Im[U_kj] F_k^l vanishes, which guarantees the dynamics can be
    realized by local operations and classical communication.  False is not
    a proof of the converse.  ``norms`` holds the violation norm of every
    (input channel, feedback site) pair; ``violations`` the pairs above the
    tolerance.
    """

    is_locc_sufficient: bool
    violations: tuple[tuple[int, int, float], ...]
    norms: tuple[tuple[int, int, float], ...]

    def violating_pairs(self) -> list[tuple[int, int]]:
        return [(j, l) for j, l, _ in self.violations]


def locc_check(setup: FmeSetup, atol: float = 1e-10) -> LoccReport:
    """Evaluate the sufficiency condition for LOCC dynamics.

    For each input channel j and feedback site l the combination
    sum_k Im[U_kj] F_k^l must vanish (spectral norm <= atol).
    """
    u_imag = setup.interferometer.imag
    m = setup.n_channels
    norms = []
    for j in range(m):
        for l in range(setup.space.n_sites):
            d_site = setup.space.dims[l]
            acc = np.zeros((d_site, d_site), dtype=complex)
            for k in range(m):
                entry = setup.feedback_table[k][l]
                if entry is not None:
                    acc = acc + u_imag[k, j] * entry
            norms.append((j, l, float(np.linalg.norm(acc, 2))))
    violations = tuple(t for t in norms if t[2] > atol)
    return LoccReport(not violations, violations, tuple(norms))
