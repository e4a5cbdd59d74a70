"""Cross-validation of the Gaussian code paths against the dense oracle."""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .. import gaussian
from ..ensemble import Protocol, sample_string
from ..states import (
    IsingParams,
    NonHermitianParams,
    bogoliubov_energy,
    build_ising_ground_state,
    build_nh_stationary_state,
)
from ..witnesses import DirectionField, qfi
from . import dense, perturbative

TOL = 1e-8
TOL_NH = 1e-6


@dataclass(frozen=True)
class CheckResult:
    name: str
    error: float
    tolerance: float

    @property
    def passed(self):
        return bool(self.error <= self.tolerance)


def majorana_matrices(L):
    """Dense ``gamma_p`` matrices (columns are images of basis vectors)."""
    dim = 2 ** L
    eye = np.eye(dim, dtype=complex)
    return [np.stack([dense.apply_majorana(eye[:, k], p) for k in range(dim)], axis=1) for p in range(2 * L)]


def random_gaussian_pair(L, rng):
    """Ground state of a random quadratic Majorana Hamiltonian, as ``(covariance, dense state)``.

    The covariance is ``-A |A|^{-1}`` (polar factor); the dense state is the
    lowest eigenvector of ``(i/4) sum A_pq gamma_p gamma_q`` assembled from
    dense Majorana matrices.
    """
    A = rng.normal(size=(2 * L, 2 * L))
    A = A - A.T
    u, _ = scipy.linalg.polar(A)
    cov = gaussian.MajoranaCovariance(-u)
    gam = majorana_matrices(L)
    H = sum(0.25j * A[p, q] * gam[p] @ gam[q] for p in range(2 * L) for q in range(2 * L) if p != q)
    w, v = np.linalg.eigh(0.5 * (H + H.conj().T))
    return cov, v[:, 0]


def compare_state(cov, psi, tol, label, rng, n_directions=2):
    """Every Gaussian-side quantity of ``cov`` against the dense state ``psi``."""
    L = cov.L
    out = []
    out.append(CheckResult(f"{label}/covariance", float(np.max(np.abs(cov.gamma - dense.covariance(psi)))), tol))
    mz = np.array([dense.magnetization_z(psi, j) for j in range(L)])
    out.append(CheckResult(f"{label}/sz", float(np.max(np.abs(gaussian.magnetizations(cov) - mz))), tol))
    ee_err = 0.0
    for start in range(L):
        for length in range(1, L):
            ee_err = max(ee_err, abs(gaussian.entanglement_entropy(cov, start, length)
                                     - dense.entanglement_entropy(psi, start, length)))
    out.append(CheckResult(f"{label}/entropy", ee_err, tol))
    corr = gaussian.spin_correlators(cov)
    C, M = dense.correlators(psi)
    out.append(CheckResult(f"{label}/correlators",
                           float(max(np.max(np.abs(corr.C - C)), np.max(np.abs(corr.M - M)))), tol))
    q_err = 0.0
    for _ in range(n_directions):
        n = DirectionField.random(L, rng)
        q_err = max(q_err, abs(qfi(corr, n) - dense.collective_variance(psi, n.n)))
    out.append(CheckResult(f"{label}/qfi", q_err, tol))
    neg_err = 0.0
    rdm_err = 0.0
    for i in range(L):
        for j in range(L):
            if i != j:
                neg_err = max(neg_err, abs(gaussian.fermionic_negativity(cov, i, j)
                                           - dense.fermionic_negativity(psi, i, j)))
                rdm_err = max(rdm_err, float(np.max(np.abs(gaussian.two_mode_reduced_density(cov, i, j)
                                                           - dense.fermion_pair_density(psi, i, j)))))
    out.append(CheckResult(f"{label}/negativity", neg_err, tol))
    out.append(CheckResult(f"{label}/pair_density", rdm_err, tol))
    idx = np.sort(rng.choice(2 * L, size=4, replace=False))
    mono = abs(gaussian.majorana_monomial_expectation(cov, idx) - dense.majorana_monomial(psi, idx))
    out.append(CheckResult(f"{label}/monomial", float(mono), tol))
    return out


def compare_projections(cov, psi, rng, tol, label, n_proj=None):
    """Random projection sequence applied on both sides; checks probabilities and post-states."""
    L = cov.L
    n_proj = n_proj if n_proj is not None else int(rng.integers(1, L))
    sites = rng.choice(L, size=n_proj, replace=False)
    out = []
    prob_err = 0.0
    g_state, d_state = cov, psi
    for j in sites:
        p_up = gaussian.outcome_probability(g_state, int(j), 1)
        s = 1 if rng.random() < p_up else -1
        g_state, pg = gaussian.project_site(g_state, int(j), s)
        d_state, pd = dense.project(d_state, int(j), s)
        prob_err = max(prob_err, abs(pg - pd))
    out.append(CheckResult(f"{label}/projection_probability", prob_err, tol))
    out += compare_state(g_state, d_state, tol, f"{label}/projected", rng, n_directions=1)
    return out


def random_cases(n_cases, seed=0, sizes=(4, 6, 8, 10), fields=(0.3, 0.5, 1.0, 1.5, 3.0)):
    """``n_cases`` randomized Ising ground-state cases with random projection sequences."""
    rng = np.random.default_rng(seed)
    results = []
    for c in range(n_cases):
        L = int(sizes[c % len(sizes)])
        h = float(fields[(c // len(sizes)) % len(fields)])
        params = IsingParams(L, h)
        cov = build_ising_ground_state(params)
        psi, energy = dense.dense_ground_state(params)
        label = f"case{c}/L{L}/h{h}"
        results.append(CheckResult(f"{label}/energy", abs(energy - bogoliubov_energy(params)), TOL * abs(energy)))
        results += compare_state(cov, psi, TOL, label, rng, n_directions=1)
        results += compare_projections(cov, psi, rng, TOL, label)
    return results


def nh_cases(L=8, points=((0.5, 2.0), (0.5, 5.0))):
    results = []
    rng = np.random.default_rng(1)
    for h, gamma in points:
        params = NonHermitianParams(IsingParams(L, h), gamma)
        cov = build_nh_stationary_state(params)
        psi, _ = dense.dense_nh_stationary_state(params)
        results += compare_state(cov, psi, TOL_NH, f"nh/L{L}/h{h}/g{gamma}", rng, n_directions=1)
    return results


def born_enumeration_check(L=3, draws=100_000, seed=0):
    """Empirical Born-rule string frequencies versus exact dense probabilities.

    Returns ``(max |z|, exact, counts)`` where ``z`` is the per-outcome
    deviation in multinomial standard deviations.
    """
    rng = np.random.default_rng(seed)
    cov, psi = random_gaussian_pair(L, rng)
    exact = dense.born_distribution(psi, list(range(L)))
    counts = {k: 0 for k in exact}
    mask = np.arange(L)
    for _ in range(draws):
        m, _ = sample_string(Protocol.BORN, cov, mask, rng)
        counts[tuple(int(x) for x in m.m)] += 1
    z = 0.0
    for k, p in exact.items():
        sd = np.sqrt(draws * p * (1 - p))
        if sd > 0:
            z = max(z, abs(counts[k] - draws * p) / sd)
        elif counts[k]:
            z = np.inf
    return z, exact, counts


def run_oracle_checks(L=8, seed=0):
    """The full cross-validation suite at chain length ``L`` (used by the CLI)."""
    rng = np.random.default_rng(seed)
    results = []
    for h in (0.3, 0.5, 1.0, 1.5, 3.0):
        params = IsingParams(L, h)
        cov = build_ising_ground_state(params)
        psi, energy = dense.dense_ground_state(params)
        label = f"gs/L{L}/h{h}"
        results.append(CheckResult(f"{label}/energy", abs(energy - bogoliubov_energy(params)), TOL * abs(energy)))
        results += compare_state(cov, psi, TOL, label, rng)
        results += compare_projections(cov, psi, rng, TOL, label)
    if L <= dense.MAX_L_NH:
        results += nh_cases(L)
    cov, psi = random_gaussian_pair(min(L, 5), rng)
    results += compare_state(cov, psi, TOL, "random_quadratic", rng)
    z, exact, _ = born_enumeration_check(3, draws=20_000, seed=seed)
    results.append(CheckResult("born/L3/sum", abs(sum(exact.values()) - 1.0), 1e-12))
    results.append(CheckResult("born/L3/max_z", z, 4.0))
    ex = dense.three_qubit_example()
    results.append(CheckResult("three_qubit/after_up", abs(ex["S_C_after_up"] - np.log(2)), 1e-12))
    results.append(CheckResult("three_qubit/after_down", abs(ex["S_C_after_down"]), 1e-12))
    if L >= 6:
        gs, _ = dense.dense_ground_state(IsingParams(L, 3.0))
        ov = abs(np.vdot(perturbative.perturbative_state(L, 3.0, 2), gs)) ** 2
        results.append(CheckResult("perturbative/large_h_overlap", 1 - ov, 1e-3))
    return results
