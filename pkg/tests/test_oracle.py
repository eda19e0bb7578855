import numpy as np
import pytest

from fmesim.fme import (
    FmeSetup,
    SiteOperator,
    build_model,
    feedback_table_from_entries,
)
from fmesim.liouvillian import build_liouvillian, evolve
from fmesim.measures import trace_distance
from fmesim.oracle import (
    CoarseGrainedCycle,
    CoarseStepParams,
    FieldConfig,
    TruncationLeakError,
    coarse_step,
    hermite_amplitudes,
    validate_against_fme,
)
from fmesim.protocols import TwoQubitParams, pair_setup
from fmesim.qops import (
    basis_state,
    maximally_mixed,
    pure_state,
    qubits,
    sigma_minus,
    sigma_x,
)


def decay_feedback_setup(feedback_gain=0.3):
    """Single qubit, decay coupling behind a quarter-wave phase, transverse
    feedback."""
    space = qubits(1)
    table = feedback_table_from_entries(
        space, 1, [(0, SiteOperator(0, feedback_gain * sigma_x))]
    )
    return FmeSetup(space, (SiteOperator(0, sigma_minus),), np.array([[1j]]), table)


def no_feedback_setup(local_op, scale=1.0):
    space = qubits(1)
    return FmeSetup(
        space,
        (SiteOperator(0, scale * local_op),),
        np.array([[1.0]]),
        feedback_table_from_entries(space, 1, []),
    )


def test_hermite_vacuum_peak():
    amp = hermite_amplitudes(3, np.array([0.0]))
    assert amp[0, 0] == pytest.approx(np.pi**-0.25, abs=1e-14)
    assert amp[0, 1] == 0.0


def test_hermite_grid_normalization():
    fc = FieldConfig(1, fock_dim=6)
    amp = hermite_amplitudes(6, fc.x_grid)
    overlaps = amp.T @ amp * fc.dx
    assert np.max(np.abs(overlaps - np.eye(6))) <= 1e-6


def test_hermite_rejects_large_truncation():
    with pytest.raises(ValueError):
        hermite_amplitudes(21, np.array([0.0]))


def test_field_config_validation():
    with pytest.raises(ValueError):
        FieldConfig(1, fock_dim=2)
    with pytest.raises(ValueError, match="vacuum"):
        FieldConfig(1, x_max=2.0, n_points=81)  # grid too narrow for the vacuum


def test_coarse_step_params_validation():
    with pytest.raises(ValueError):
        CoarseStepParams(0.0, 10, 0)
    with pytest.raises(ValueError):
        CoarseStepParams(0.3, 10, 0)


def test_zero_coupling_is_identity():
    space = qubits(1)
    setup = no_feedback_setup(np.zeros((2, 2)))
    rho = basis_state(space, (1,))
    res = coarse_step(rho, setup, FieldConfig(1), CoarseStepParams(0.05, 50, 7))
    assert np.max(np.abs(res.rho_avg.matrix - rho.matrix)) <= 1e-14


def test_decay_population_drop_matches_generator():
    # excited population falls by eps^2 over one cycle, matching one
    # first-order master-equation increment
    setup = no_feedback_setup(sigma_minus)
    rho = basis_state(qubits(1), (1,))
    eps = 0.05
    res = coarse_step(
        rho, setup, FieldConfig(1), CoarseStepParams(eps, 1, 0), average="exact"
    )
    drop = 1.0 - res.rho_avg.matrix[1, 1].real
    assert drop == pytest.approx(eps**2, rel=0.1)


def test_sampled_step_matches_fme_increment():
    setup = decay_feedback_setup()
    rho = basis_state(qubits(1), (1,))
    eps = 0.05
    res = coarse_step(rho, setup, FieldConfig(1), CoarseStepParams(eps, 20_000, 11))
    lv = build_liouvillian(build_model(setup))
    ref = evolve(rho, lv, eps**2, eps**2)
    assert trace_distance(res.rho_avg, ref) <= 2e-3


def test_exact_step_residual_scales_away():
    # the deterministic one-cycle deviation from the master-equation
    # propagation shrinks at least as fast as the stated third-order claim
    # allows (factor-2 slack); odd-moment cancellations make the observed
    # reduction a factor ~16, i.e. a quartering once normalized by the step
    # duration eps^2
    setup = decay_feedback_setup()
    rho = basis_state(qubits(1), (1,))
    lv = build_liouvillian(build_model(setup))
    fc = FieldConfig(1)

    def residual(eps):
        res = coarse_step(rho, setup, fc, CoarseStepParams(eps, 1, 0), average="exact")
        ref = evolve(rho, lv, eps**2, eps**2)
        return trace_distance(res.rho_avg, ref)

    r_full, r_half = residual(0.05), residual(0.025)
    ratio = r_full / r_half
    assert 4.0 <= ratio <= 17.0
    normalized_ratio = (r_full / 0.05**2) / (r_half / 0.025**2)
    assert 2.0 <= normalized_ratio <= 8.0


def test_vacuum_statistics_without_coupling():
    setup = no_feedback_setup(np.zeros((2, 2)))
    rho = maximally_mixed(qubits(1))
    n = 40_000
    res = coarse_step(rho, setup, FieldConfig(1), CoarseStepParams(0.05, n, 3))
    xs = res.samples
    assert abs(xs.mean()) <= 3.0 * np.sqrt(0.5 / n)
    assert abs(xs.var() - 0.5) <= 4.0 * 0.5 * np.sqrt(2.0 / n)


def test_trajectory_states_stay_valid():
    setup = pair_setup(TwoQubitParams(0.3), 0, 1, qubits(2))
    cycle = CoarseGrainedCycle(setup, FieldConfig(2), 0.05)
    rng = np.random.default_rng(5)
    batch = np.broadcast_to(maximally_mixed(qubits(2)).matrix, (300, 4, 4)).copy()
    out, xs = cycle.step_batch(batch, rng.random((300, 2)))
    traces = np.einsum("cii->c", out).real
    assert np.max(np.abs(traces - 1.0)) <= 1e-10
    herm = 0.5 * (out + out.conj().transpose(0, 2, 1))
    assert np.linalg.eigvalsh(herm).min() >= -1e-9
    assert xs.shape == (300, 2)


def test_measurement_order_does_not_shift_average():
    setup = pair_setup(TwoQubitParams(0.3), 0, 1, qubits(2))
    fc = FieldConfig(2)
    rho0 = pure_state(np.array([0.6, 0.3 + 0.2j, -0.4j, 0.5]), qubits(2))
    p = CoarseStepParams(0.05, 20_000, 99)
    res_fwd = coarse_step(rho0, setup, fc, p, measure_order=(0, 1))
    res_rev = coarse_step(rho0, setup, fc, p, measure_order=(1, 0))
    assert trace_distance(res_fwd.rho_avg, res_rev.rho_avg) <= 1e-4


def test_fock_truncation_converged():
    # a non-nilpotent coupling populates higher Fock states; doubling the
    # truncation must not move the averaged state
    setup = no_feedback_setup(sigma_x)
    rho = pure_state(np.array([0.8, 0.6]), qubits(1))
    p = CoarseStepParams(0.05, 1, 0)
    res4 = coarse_step(rho, setup, FieldConfig(1, fock_dim=4), p, average="exact")
    res8 = coarse_step(rho, setup, FieldConfig(1, fock_dim=8), p, average="exact")
    assert trace_distance(res4.rho_avg, res8.rho_avg) <= 1e-6


def test_truncation_leak_rejected_with_diagnostics():
    setup = no_feedback_setup(sigma_x, scale=8.0)
    rho = basis_state(qubits(1), (0,))
    fc = FieldConfig(1, fock_dim=8, x_max=4.0, n_points=161)
    with pytest.raises(TruncationLeakError, match="grid mass"):
        coarse_step(rho, setup, fc, CoarseStepParams(0.2, 10, 0))


def test_reproducible_given_seed():
    setup = decay_feedback_setup()
    rho = basis_state(qubits(1), (1,))
    p = CoarseStepParams(0.05, 5_000, 321)
    a = coarse_step(rho, setup, FieldConfig(1), p)
    b = coarse_step(rho, setup, FieldConfig(1), p)
    assert np.array_equal(a.samples, b.samples)
    assert np.array_equal(a.rho_avg.matrix, b.rho_avg.matrix)


def test_validation_report_multi_step():
    setup = decay_feedback_setup()
    rho = basis_state(qubits(1), (1,))
    rep = validate_against_fme(
        setup, FieldConfig(1), CoarseStepParams(0.05, 10_000, 1234), 5, rho0=rho
    )
    assert len(rep.trace_distances) == 5
    assert all(d <= 5e-3 for d in rep.trace_distances)
    assert rep.stat_error_estimate > 0.0
    assert rep.bound(5) >= rep.bound_c2 / np.sqrt(rep.n_traj)
    assert rep.n_samples == 10_000 * 5
    assert abs(rep.sample_mean) <= 4.0 * np.sqrt(0.5 / rep.n_samples)


def test_validation_zero_coupling_exact():
    setup = no_feedback_setup(np.zeros((2, 2)))
    rep = validate_against_fme(
        setup, FieldConfig(1), CoarseStepParams(0.05, 500, 0), 3
    )
    assert all(d <= 1e-12 for d in rep.trace_distances)


def test_validation_decay_ten_steps_full_budget():
    # statistical + truncation budget for the plain decay channel
    setup = no_feedback_setup(sigma_minus)
    rho = basis_state(qubits(1), (1,))
    rep = validate_against_fme(
        setup, FieldConfig(1), CoarseStepParams(0.05, 100_000, 2024), 10, rho0=rho
    )
    assert rep.trace_distances[-1] <= 5e-3
