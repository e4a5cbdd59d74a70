import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mac_sim import _pykernels, kernels
from mac_sim.gaussian import pfaffian
from mac_sim.errors import NotAntisymmetric, OddDimension

from conftest import random_antisymmetric

compiled = pytest.mark.skipif(kernels.compiled_backend is None, reason="compiled extension not built")


def test_pfaffian_2x2():
    assert pfaffian(np.array([[0.0, 2.5], [-2.5, 0.0]])) == pytest.approx(2.5)


def test_pfaffian_4x4_closed_form():
    a, b, c, d, e, f = 1.3, -0.7, 2.1, 0.4, -1.9, 0.8
    m = np.array([[0, a, b, c], [-a, 0, d, e], [-b, -d, 0, f], [-c, -e, -f, 0]], dtype=float)
    assert pfaffian(m) == pytest.approx(a * f - b * e + c * d, abs=1e-14)


def test_pfaffian_empty_and_errors():
    assert pfaffian(np.zeros((0, 0))) == 1.0
    with pytest.raises(OddDimension):
        pfaffian(np.zeros((3, 3)))
    with pytest.raises(NotAntisymmetric):
        pfaffian(np.ones((2, 2)))


@settings(max_examples=60, deadline=None)
@given(half=st.integers(1, 6), seed=st.integers(0, 2 ** 32 - 1))
def test_pfaffian_squared_is_determinant(half, seed):
    a = random_antisymmetric(np.random.default_rng(seed), 2 * half)
    pf = pfaffian(a)
    det = np.linalg.det(a)
    assert pf ** 2 == pytest.approx(det, rel=1e-8, abs=1e-8)


def test_pfaffian_8x8_against_determinant(rng):
    a = random_antisymmetric(rng, 8)
    assert abs(pfaffian(a) ** 2 - np.linalg.det(a)) < 1e-8


def test_pfaffian_sign_under_swap(rng):
    # swapping two rows and columns flips the sign
    a = random_antisymmetric(rng, 6)
    perm = np.arange(6)
    perm[[0, 1]] = perm[[1, 0]]
    assert pfaffian(a[np.ix_(perm, perm)]) == pytest.approx(-pfaffian(a), rel=1e-12)


def test_python_pfaffian_stack(rng):
    mats = np.stack([random_antisymmetric(rng, 6) for _ in range(5)])
    out = _pykernels.pfaffian_stack(mats)
    assert np.allclose(out, [_pykernels.pfaffian(m) for m in mats])


def _anneal_inputs(rng, L=6, moves=30, n_temps=20):
    x = rng.normal(size=(3 * L, 3 * L))
    K = np.ascontiguousarray(x @ x.T)
    n = rng.normal(size=(L, 3))
    n /= np.linalg.norm(n, axis=1, keepdims=True)
    temps = 0.5 * 0.8 ** np.arange(n_temps)
    total = n_temps * moves
    return (K, n.reshape(-1).copy(), temps, moves, rng.integers(0, L, total).astype(np.int64),
            rng.normal(0, 0.3, total), rng.normal(size=(total, 3)), rng.random(total))


@compiled
@pytest.mark.parametrize("seed", range(4))
def test_backends_agree_pfaffian(seed):
    rng = np.random.default_rng(seed)
    for n in (2, 4, 10, 30):
        a = random_antisymmetric(rng, n)
        assert kernels.compiled_backend.pfaffian(a) == pytest.approx(_pykernels.pfaffian(a), rel=1e-10)
    mats = np.stack([random_antisymmetric(rng, 8) for _ in range(4)])
    assert np.allclose(kernels.compiled_backend.pfaffian_stack(mats), _pykernels.pfaffian_stack(mats), rtol=1e-10)


@compiled
@pytest.mark.parametrize("xz", [False, True])
def test_backends_agree_annealing(xz):
    args = _anneal_inputs(np.random.default_rng(5))
    if xz:
        n = args[1].reshape(-1, 3)
        n[:, 1] = 0.0
        n /= np.linalg.norm(n, axis=1, keepdims=True)
        args = (args[0], n.reshape(-1).copy()) + args[2:]
    f_c, n_c = kernels.compiled_backend.anneal_qfi(*args[:1], args[1].copy(), *args[2:], xz)
    f_p, n_p = _pykernels.anneal_qfi(*args[:1], args[1].copy(), *args[2:], xz)
    assert f_c == pytest.approx(f_p, rel=1e-9)
    assert np.allclose(np.asarray(n_c), np.asarray(n_p), atol=1e-9)


@compiled
def test_backends_agree_network_kernels(rng):
    L = 24
    E = (rng.random((L, L)) < 0.2).astype(np.uint8)
    E = np.triu(E, 1)
    E = np.ascontiguousarray(E + E.T)
    Ec, Ep = E.copy(), E.copy()
    for v in rng.permutation(L)[:8]:
        kernels.compiled_backend.measure_vertex_inplace(Ec, int(v))
        _pykernels.measure_vertex_inplace(Ep, int(v))
    assert np.array_equal(Ec, Ep)
    assert np.array_equal(kernels.compiled_backend.distance_profile(Ec), _pykernels.distance_profile(Ep))


def test_backend_name():
    assert kernels.BACKEND in ("cython", "python")


def test_fallback_selected_by_environment():
    import os
    import subprocess
    import sys

    env = dict(os.environ, MAC_SIM_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from mac_sim import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@compiled
def test_benchmark_script_runs(capsys):
    import importlib.util
    from pathlib import Path

    path = Path(__file__).resolve().parents[1] / "benchmarks" / "bench_kernels.py"
    spec = importlib.util.spec_from_file_location("bench_kernels", path)
    bench = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(bench)
    assert bench.main(["--repeat", "1"]) == 0
    assert "speed-up" in capsys.readouterr().out
