import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mac_sim import gaussian
from mac_sim.ensemble import (
    Accumulator,
    EnsembleStats,
    MeasurementString,
    Protocol,
    RunDescription,
    WitnessSpec,
    evaluate_witnesses,
    run_ensemble,
    sample_mask,
    sample_rng,
    sample_string,
)
from mac_sim.errors import BadParameter, ConfigInvalid, DensityOutOfRange
from mac_sim.oracle.check import born_enumeration_check
from mac_sim.states import IsingParams, build_ising_ground_state

floats = st.floats(-1e3, 1e3, allow_nan=False)


@settings(max_examples=80, deadline=None)
@given(xs=st.lists(floats, min_size=0, max_size=40), cut=st.integers(0, 40))
def test_accumulator_merge_matches_numpy(xs, cut):
    cut = min(cut, len(xs))
    a, b = Accumulator(), Accumulator()
    for x in xs[:cut]:
        a.add(x)
    for x in xs[cut:]:
        b.add(x)
    m = a.merge(b)
    assert m.n == len(xs)
    if xs:
        assert m.mean == pytest.approx(np.mean(xs), abs=1e-9)
    if len(xs) > 1:
        assert m.variance == pytest.approx(np.var(xs, ddof=1), rel=1e-8, abs=1e-8)
        assert m.stderr == pytest.approx(np.std(xs, ddof=1) / np.sqrt(len(xs)), rel=1e-8, abs=1e-8)


def test_accumulator_edge_cases():
    acc = Accumulator()
    assert acc.stderr == 0.0 and acc.variance == 0.0
    acc.add(2.0)
    assert acc.mean == 2.0 and acc.stderr == 0.0
    assert "n=1" in repr(acc)


def test_stats_merge():
    a, b = EnsembleStats(), EnsembleStats(n_rejected=1, rejections=[{"site": 3}])
    a.add(("ee", 4), 1.0)
    b.add(("ee", 4), 3.0)
    b.add(("qfi", 0), 5.0)
    m = a.merge(b)
    assert m.cells[("ee", 4)].mean == 2.0
    assert m.cells[("qfi", 0)].n == 1
    assert m.n_rejected == 1


def test_protocol_parse():
    assert Protocol.parse("Forced_Down") is Protocol.DOWN
    assert Protocol.parse("born-rule") is Protocol.BORN
    assert Protocol.parse(" up ") is Protocol.UP
    with pytest.raises(ValueError):
        Protocol.parse("sideways")


def test_measurement_string():
    m = MeasurementString([0, 1, 0, -1])
    assert m.sites.tolist() == [1, 3]
    assert not m.compatible_with(Protocol.UP)
    assert MeasurementString([1, 0]).compatible_with(Protocol.UP)
    assert m.compatible_with(Protocol.BORN)
    with pytest.raises(BadParameter):
        MeasurementString([2, 0])


def test_sample_mask_limits(rng):
    assert sample_mask(0.0, 20, rng).size == 0
    assert sample_mask(1.0, 20, rng).tolist() == list(range(20))
    with pytest.raises(DensityOutOfRange):
        sample_mask(1.2, 20, rng)


def test_sample_mask_binomial(rng):
    sizes = np.array([sample_mask(0.5, 1000, rng).size for _ in range(10_000)])
    assert abs(sizes.mean() - 500) < 3 * np.sqrt(250)
    assert sizes.std() == pytest.approx(np.sqrt(250), rel=0.05)


def test_born_on_all_up_gives_up(rng):
    m, post = sample_string(Protocol.BORN, gaussian.all_up(6), np.array([0, 3, 5]), rng)
    assert m.m.tolist() == [1, 0, 0, 1, 0, 1]
    assert np.array_equal(post.gamma, gaussian.all_up(6).gamma)


def test_forced_down_full_density_gives_all_down(rng):
    cov = build_ising_ground_state(IsingParams(16, 1.5))
    mask = sample_mask(1.0, 16, rng)
    m, post = sample_string(Protocol.DOWN, cov, mask, rng)
    assert np.all(m.m == -1)
    assert np.max(np.abs(post.gamma - gaussian.product_state(-np.ones(16)).gamma)) < 1e-10
    assert gaussian.entanglement_entropy(post, 0, 8) == pytest.approx(0.0, abs=1e-10)


def test_born_frequencies_match_exact_probabilities():
    z, exact, counts = born_enumeration_check(3, draws=100_000, seed=0)
    assert sum(exact.values()) == pytest.approx(1.0, abs=1e-12)
    assert sum(counts.values()) == 100_000
    assert z < 3.0


def test_sample_streams_are_independent_of_order():
    a = sample_rng(9, 1, 4).random(3)
    _ = sample_rng(9, 0, 0).random(100)
    assert np.array_equal(a, sample_rng(9, 1, 4).random(3))
    assert not np.array_equal(a, sample_rng(9, 4, 1).random(3))


def _description(**kw):
    base = dict(L=16, h=1.5, protocol=Protocol.DOWN, p_grid=(0.0, 0.4),
                witnesses=(WitnessSpec("ee", (4, 8)), WitnessSpec("negativity", (1, 2)), WitnessSpec("qfi")),
                samples=6, seed=21)
    base.update(kw)
    return RunDescription(**base)


def test_description_validation():
    with pytest.raises(ConfigInvalid):
        _description(samples=0)
    with pytest.raises(ConfigInvalid):
        _description(p_grid=(1.5,))
    with pytest.raises(ConfigInvalid):
        _description(witnesses=(WitnessSpec("ee", (17,)),))
    with pytest.raises(ConfigInvalid):
        _description(L=256, witnesses=(WitnessSpec("qfi"),))
    assert _description(L=256, witnesses=(WitnessSpec("qfi"),), allow_large_qfi=True).L == 256
    with pytest.raises(ConfigInvalid):
        _description(L=15)
    with pytest.raises(ConfigInvalid):
        WitnessSpec("purity")


def test_zero_density_equals_direct_evaluation():
    desc = _description()
    stats, _ = run_ensemble(desc)
    direct = evaluate_witnesses(desc.initial_state(), desc)
    for key, value in direct.items():
        cell = stats[0].cells[key]
        assert cell.n == desc.samples
        assert cell.mean == pytest.approx(value, abs=1e-12)
        assert cell.stderr == pytest.approx(0.0, abs=1e-9)


def test_results_independent_of_worker_count():
    desc = _description(p_grid=(0.3,), samples=8)
    one, _ = run_ensemble(desc, workers=1)
    two, _ = run_ensemble(desc, workers=2)
    for key, cell in one[0].cells.items():
        assert cell.mean == two[0].cells[key].mean
        assert cell.m2 == two[0].cells[key].m2


def test_impossible_forced_outcomes_are_rejected():
    desc = _description(protocol=Protocol.UP, p_grid=(0.5,), witnesses=(WitnessSpec("ee", (4,)),), samples=5)
    all_down = gaussian.product_state(-np.ones(16))
    stats, meta = run_ensemble(desc, state0=all_down)
    assert stats[0].n_rejected == 5
    assert ("ee", 4) not in stats[0].cells
    assert all(r["reason"] == "NullProjection" for r in meta["rejections"])
