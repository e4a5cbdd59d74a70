"""Initial Gaussian states: Ising ground state and non-Hermitian stationary state.

Both are built in the even fermion-parity sector, where the spin ring maps to
fermions with anti-periodic boundary conditions and momenta
``k = (2n + 1) pi / L``.  For each momentum the Majorana Hamiltonian reduces
to a 2x2 symbol

    A(k) = [[0, 2 hc - 2 J e^{-ik}], [-2 hc + 2 J e^{ik}, 0]]

with the (possibly complex) field ``hc = h + i gamma / 4``.  Writing
``H = (i/4) gamma^T A gamma``, an eigenvector ``w`` of ``A`` with eigenvalue
``mu`` gives a mode operator that shifts the many-body eigenvalue by ``i mu``.
The selected eigenstate is annihilated by the modes with ``Re mu > 0``
(those that would raise the imaginary part); at ``gamma = 0`` all roots are
imaginary and the tie is broken towards lower energy (``Im mu > 0``).
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import BadParameter, DegenerateMode, FieldOutOfRange, OddL
from .gaussian import MajoranaCovariance

DEGENERACY_TOL = 1e-12


@dataclass(frozen=True)
class IsingParams:
    """Periodic transverse-field Ising ring ``-J sum sx sx - h sum sz``."""

    L: int
    h: float
    J: float = 1.0

    def __post_init__(self):
        if int(self.L) != self.L or self.L <= 0:
            raise BadParameter(f"L must be a positive integer, got {self.L}")
        if self.L % 2:
            raise OddL(f"L must be even, got {self.L}")
        if not self.J > 0:
            raise BadParameter(f"J must be positive, got {self.J}")


@dataclass(frozen=True)
class NonHermitianParams:
    """Ising ring plus the no-click term ``-i (gamma/4) sum sz``."""

    ising: IsingParams
    gamma: float

    def __post_init__(self):
        if not self.gamma >= 0:
            raise BadParameter(f"gamma must be non-negative, got {self.gamma}")


def momenta(L):
    """Anti-periodic momenta ``(2n+1) pi / L`` for ``n = 0 .. L-1``."""
    return (2 * np.arange(L) + 1) * np.pi / L


def majorana_symbol(L, h, J=1.0, gamma=0.0):
    """Stack of 2x2 symbols ``A(k)`` over :func:`momenta`; complex when ``gamma > 0``."""
    k = momenta(L)
    hc = h + 0.25j * gamma
    sym = np.zeros((L, 2, 2), dtype=complex)
    sym[:, 0, 1] = 2 * hc - 2 * J * np.exp(-1j * k)
    sym[:, 1, 0] = -2 * hc + 2 * J * np.exp(1j * k)
    return sym


def _select_modes(sym, hermitian):
    """Per-momentum projector onto the selected annihilator eigenvector.

    Returns ``(P, mu)`` with ``P`` of shape ``(L, 2, 2)`` and the selected
    eigenvalues ``mu``.
    """
    mu, vec = np.linalg.eig(sym)
    re = mu.real
    if hermitian:
        key = mu.imag
    else:
        tied = np.abs(re[:, 0] - re[:, 1]) <= 2 * DEGENERACY_TOL
        if np.any(tied):
            warnings.warn(
                f"{int(tied.sum())} momentum mode(s) with equal imaginary eigenvalue parts;"
                " choosing the lower real energy",
                DegenerateMode,
                stacklevel=3,
            )
        key = np.where(tied[:, None], mu.imag, re)
    pick = np.argmax(key, axis=1)
    rows = np.arange(sym.shape[0])
    w = vec[rows, :, pick]
    w = w / np.linalg.norm(w, axis=1, keepdims=True)
    proj = w[:, :, None] * w.conj()[:, None, :]
    return proj, mu[rows, pick]


def _real_space(block_k, L):
    """Inverse transform of a translation-invariant (anti-periodic) 2x2 symbol."""
    k = momenta(L)
    r = np.arange(-(L - 1), L)
    phase = np.exp(-1j * np.outer(r, k)) / L
    g_r = np.einsum("rk,kab->rab", phase, block_k)
    sites = np.arange(L)
    diff = sites[None, :] - sites[:, None] + (L - 1)
    full = g_r[diff]  # (L, L, 2, 2) indexed [j, l, alpha, beta]
    return full.transpose(0, 2, 1, 3).reshape(2 * L, 2 * L)


def _covariance_from_symbol(sym, hermitian):
    L = sym.shape[0]
    proj, mu = _select_modes(sym, hermitian)
    # Q = <gamma gamma^T> = 2 (1 - P); Gamma = i (Q - 1) = i (1 - 2P)
    g_k = 1j * (np.eye(2)[None] - 2 * proj)
    g = _real_space(g_k, L)
    imag = float(np.max(np.abs(g.imag)))
    if imag > 1e-8:
        raise RuntimeError(f"covariance has imaginary part {imag:.3e}")
    g = g.real
    return MajoranaCovariance(0.5 * (g - g.T)), mu


def build_ising_ground_state(params):
    """Even-parity ground state of the Ising ring as a Majorana covariance."""
    sym = majorana_symbol(params.L, params.h, params.J)
    state, _ = _covariance_from_symbol(sym, hermitian=True)
    return state


def build_nh_stationary_state(params):
    """Normalized eigenstate of the no-click Hamiltonian with largest imaginary eigenvalue.

    Reduces to :func:`build_ising_ground_state` at ``gamma = 0``.
    """
    ising = params.ising
    if params.gamma == 0:
        return build_ising_ground_state(ising)
    sym = majorana_symbol(ising.L, ising.h, ising.J, params.gamma)
    state, _ = _covariance_from_symbol(sym, hermitian=False)
    return state


def nh_stationary_eigenvalue(params):
    """Complex many-body eigenvalue ``(i/2) sum mu`` of the selected stationary state."""
    ising = params.ising
    sym = majorana_symbol(ising.L, ising.h, ising.J, params.gamma)
    _, mu = _select_modes(sym, hermitian=params.gamma == 0)
    return complex(0.5j * mu.sum())


def bogoliubov_energy(params):
    """Ground-state energy ``-sum_{k>0} Lambda_k`` with ``Lambda_k = 2 sqrt(J^2 + h^2 - 2 h J cos k)``."""
    k = momenta(params.L)[: params.L // 2]
    lam = 2 * np.sqrt(params.J ** 2 + params.h ** 2 - 2 * params.h * params.J * np.cos(k))
    return float(-lam.sum())


def ising_energy(state, params):
    """Energy of a covariance with respect to the Ising ring (even parity assumed)."""
    g = state.gamma
    L = params.L
    j = np.arange(L)
    nxt = (j + 1) % L
    # <sx_j sx_{j+1}> = -Gamma[b_j, a_{j+1}] in the bulk, sign flipped across the boundary
    sign = np.where(nxt == 0, -1.0, 1.0)
    bond = sign * g[2 * j + 1, 2 * nxt]
    mz = -g[2 * j, 2 * j + 1]
    return float(params.J * bond.sum() - params.h * mz.sum())


def critical_gamma(h):
    """Threshold ``4 sqrt(1 - h^2)`` of the logarithmic stationary phase."""
    if abs(h) > 1:
        warnings.warn(f"|h| = {abs(h)} > 1 has no logarithmic phase", FieldOutOfRange, stacklevel=2)
        return 0.0
    return 4.0 * math.sqrt(1.0 - h * h)
