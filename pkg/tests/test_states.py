import warnings

import numpy as np
import pytest

from mac_sim import gaussian
from mac_sim.errors import BadParameter, FieldOutOfRange, OddL
from mac_sim.oracle import dense
from mac_sim.states import (
    IsingParams,
    NonHermitianParams,
    bogoliubov_energy,
    build_ising_ground_state,
    build_nh_stationary_state,
    critical_gamma,
    ising_energy,
    momenta,
    nh_stationary_eigenvalue,
)


def test_parameter_validation():
    with pytest.raises(OddL):
        IsingParams(7, 1.0)
    with pytest.raises(BadParameter):
        IsingParams(0, 1.0)
    with pytest.raises(BadParameter):
        IsingParams(8, 1.0, J=0.0)
    with pytest.raises(BadParameter):
        NonHermitianParams(IsingParams(8, 1.0), -1.0)


def test_momenta_antiperiodic():
    k = momenta(6)
    assert np.allclose(np.exp(1j * k * 6), -1)
    assert np.unique(np.round(np.exp(1j * k), 12)).size == 6


@pytest.mark.parametrize("h", [0.3, 1.0, 1.5])
def test_ground_state_is_pure_and_real(h):
    cov = build_ising_ground_state(IsingParams(16, h))
    assert cov.purity_error() < 1e-12
    assert np.array_equal(cov.gamma, -cov.gamma.T)


def test_large_field_limit_is_all_up():
    cov = build_ising_ground_state(IsingParams(12, 1e6))
    assert np.max(np.abs(cov.gamma - gaussian.all_up(12).gamma)) < 1e-6


def test_energy_matches_dense_at_critical_point():
    params = IsingParams(12, 1.0)
    _, e_dense = dense.dense_ground_state(params)
    cov = build_ising_ground_state(params)
    assert bogoliubov_energy(params) == pytest.approx(e_dense, abs=1e-10)
    assert ising_energy(cov, params) == pytest.approx(e_dense, abs=1e-10)


def test_ordered_phase_overlap_with_dense():
    params = IsingParams(12, 0.5)
    cov = build_ising_ground_state(params)
    psi_ref, _ = dense.dense_ground_state(params)
    psi = dense.gaussian_to_dense(cov.gamma)
    assert abs(np.vdot(psi, psi_ref)) ** 2 >= 1 - 1e-10
    # <sx_j> vanishes in the parity-symmetric state
    for j in (0, 5, 11):
        assert abs(np.vdot(psi_ref, dense.apply_pauli(psi_ref, j, "x"))) < 1e-12


def test_nh_reduces_to_ground_state_at_zero_gamma():
    ising = IsingParams(16, 0.7)
    a = build_nh_stationary_state(NonHermitianParams(ising, 0.0))
    b = build_ising_ground_state(ising)
    assert np.max(np.abs(a.gamma - b.gamma)) < 1e-10


@pytest.mark.parametrize("h,gamma", [(0.5, 5.0), (0.5, 2.0)])
def test_nh_state_matches_power_iteration(h, gamma):
    params = NonHermitianParams(IsingParams(8, h), gamma)
    cov = build_nh_stationary_state(params)
    psi, eig = dense.dense_nh_stationary_state(params, check=True)
    assert np.max(np.abs(cov.gamma - dense.covariance(psi))) < 1e-6
    assert nh_stationary_eigenvalue(params) == pytest.approx(eig, abs=1e-8)


def test_nh_strong_monitoring_magnetization_negative():
    cov = build_nh_stationary_state(NonHermitianParams(IsingParams(8, 0.5), 5.0))
    assert np.all(gaussian.magnetizations(cov) < 0)


def test_nh_entropy_log_versus_area_law():
    half = {}
    for gamma in (2.0, 5.0):
        half[gamma] = [gaussian.entanglement_entropy(
            build_nh_stationary_state(NonHermitianParams(IsingParams(L, 0.5), gamma)), 0, L // 2)
            for L in (64, 128, 256)]
    log_growth = np.diff(half[2.0])
    assert np.all(log_growth > 0.05)
    assert np.all(np.abs(np.diff(half[5.0])) < 1e-3)


def test_critical_gamma():
    assert critical_gamma(0.0) == 4.0
    assert critical_gamma(1.0) == 0.0
    assert critical_gamma(0.5) == pytest.approx(2 * np.sqrt(3))
    with pytest.warns(FieldOutOfRange):
        assert critical_gamma(1.5) == 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        critical_gamma(-0.5)
