import time

import numpy as np
import pytest

from mac_sim.errors import BadXi0, DensityOutOfRange, VertexOutOfRange
from mac_sim.toy import (
    BondNetwork,
    bond_profile,
    exact_toy_profile,
    init_network,
    measure_vertex,
    measure_vertices,
    pair_counts,
    ring_distance,
    run_toy_ensemble,
    run_toy_grid,
)
from mac_sim.witnesses import fit_decay_length


def test_init_degrees():
    assert np.all(init_network(8, 1).E.sum(axis=1) == 2)
    assert np.all(init_network(256, 2).E.sum(axis=1) == 4)


def test_init_widest_range():
    L = 10
    E = init_network(L, L // 2 - 1).E
    d = ring_distance(L)
    assert np.array_equal(E == 0, (d == 0) | (d == L // 2))
    with pytest.raises(BadXi0):
        init_network(10, 5)
    with pytest.raises(BadXi0):
        init_network(10, 0)


def test_network_validation():
    with pytest.raises(ValueError):
        BondNetwork(np.array([[0, 1], [0, 0]]), 1)
    with pytest.raises(ValueError):
        BondNetwork(np.eye(3), 1)


def test_isolated_vertex_is_noop():
    net = measure_vertex(init_network(8, 1), 3)
    again = measure_vertex(net, 3)
    assert np.array_equal(net.E, again.E)


def test_single_measurement_rule():
    net = measure_vertex(init_network(8, 1), 4)
    assert net.E[3, 5] == 1 and net.E[5, 3] == 1
    assert not net.E[4].any() and not net.E[:, 4].any()
    assert net.E[0, 1] == 1 and net.E[0, 2] == 0
    with pytest.raises(VertexOutOfRange):
        measure_vertex(net, 8)


@pytest.mark.parametrize("seed", range(20))
def test_measurements_commute_bitwise(seed):
    rng = np.random.default_rng(seed)
    L = 40
    E = np.triu((rng.random((L, L)) < 0.1).astype(np.uint8), 1)
    net = BondNetwork(E + E.T, 2)
    n, m = rng.choice(L, size=2, replace=False)
    assert np.array_equal(measure_vertices(net, [n, m]).E, measure_vertices(net, [m, n]).E)
    subset = rng.choice(L, size=15, replace=False)
    assert np.array_equal(measure_vertices(net, subset).E, measure_vertices(net, rng.permutation(subset)).E)


def test_pair_counts():
    assert pair_counts(8).tolist() == [0, 8, 8, 8, 4]
    assert pair_counts(7).tolist() == [0, 7, 7, 7]
    L = 12
    d = ring_distance(L)
    iu = np.triu_indices(L, 1)
    assert np.array_equal(np.bincount(d[iu], minlength=L // 2 + 1), pair_counts(L))


def test_zero_density_is_step(rng):
    prof = run_toy_ensemble(32, 3, 0.0, 5, rng)
    assert prof.mean.tolist() == [1.0] * 3 + [0.0] * 13
    assert np.all(prof.stderr == 0)


def test_excluding_measured_vertices():
    net = init_network(8, 1)
    meas = measure_vertices(net, [2])
    incl = bond_profile(meas)
    excl = bond_profile(meas, [2])
    assert incl[0] == pytest.approx(6 / 8)
    assert excl[0] == pytest.approx(1.0)
    # new bond (1, 3) among the 6 distance-2 pairs avoiding vertex 2
    assert excl[1] == pytest.approx(1 / 6)


@pytest.mark.parametrize("p,xi0", [(1.0, 1), (0.4, 1), (0.5, 2)])
def test_sampler_matches_exact_enumeration(p, xi0):
    L = 8
    exact = exact_toy_profile(L, xi0, p)
    prof = run_toy_ensemble(L, xi0, p, 20_000, np.random.default_rng(4))
    tol = 3 * np.maximum(prof.stderr, 1e-12)
    assert np.all(np.abs(prof.mean - exact) <= tol + 1e-15)


def test_grid_is_deterministic():
    a = run_toy_grid(32, 2, (0.2, 0.6), 50, np.random.default_rng(1))
    b = run_toy_grid(32, 2, (0.2, 0.6), 50, np.random.default_rng(1))
    assert all(np.array_equal(x.mean, y.mean) for x, y in zip(a, b))
    with pytest.raises(DensityOutOfRange):
        run_toy_grid(32, 2, (1.5,), 2, np.random.default_rng(1))


def test_fig_parameters_decay_length_increases():
    t0 = time.perf_counter()
    profiles = run_toy_grid(256, 2, (0.1, 0.3, 0.5), 1000, np.random.default_rng(2026))
    elapsed = time.perf_counter() - t0
    xi = [fit_decay_length(p.rows()).estimate for p in profiles]
    assert xi[0] < xi[1] < xi[2]
    assert elapsed < 60
