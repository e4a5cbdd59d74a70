"""Fermionic Gaussian states in the Majorana covariance representation.

Conventions (0-based sites ``j = 0 .. L-1``):

* Majoranas ``a_j = gamma[2j] = c_j + c_j^dag`` and
  ``b_j = gamma[2j+1] = -i (c_j - c_j^dag)``.
* Jordan-Wigner: ``c_j = (prod_{k<j} sz_k) s+_j``, so spin up is the empty
  mode, ``sz_j = -i a_j b_j``, ``sx_j = P_j a_j`` and ``sy_j = P_j b_j``
  with ``P_j = prod_{k<j} sz_k``.
* Covariance ``Gamma[p, q] = (i/2) <[gamma_p, gamma_q]>``, hence
  ``<gamma_p gamma_q> = delta_pq - i Gamma[p, q]`` and ``<sz_j> = -Gamma[2j, 2j+1]``.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import entr

from . import kernels
from .errors import (
    DuplicateIndex,
    EmptyInterval,
    NotAntisymmetric,
    NullProjection,
    OddDimension,
    PurityDrift,
    SameSite,
    SiteOutOfRange,
    Unphysical,
)

ANTISYM_TOL = 1e-10
PHYSICAL_TOL = 1e-8
PURITY_TOL = 1e-6
CLAMP_TOL = 1e-10
NULL_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class MajoranaCovariance:
    """Immutable Majorana covariance matrix of an ``L``-mode Gaussian state."""

    gamma: np.ndarray
    pure: bool = True

    def __post_init__(self):
        g = np.array(self.gamma, dtype=np.float64, copy=True)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise ValueError(f"covariance must be square, got shape {g.shape}")
        if g.shape[0] % 2 or g.shape[0] == 0:
            raise OddDimension(f"covariance dimension {g.shape[0]} is not a positive even number")
        g.setflags(write=False)
        object.__setattr__(self, "gamma", g)

    @property
    def L(self):
        return self.gamma.shape[0] // 2

    def purity_error(self):
        g = self.gamma
        return float(np.max(np.abs(g @ g + np.eye(g.shape[0]))))


def product_state(spins):
    """Covariance of the sz product state with the given +-1 spins."""
    spins = np.asarray(spins, dtype=np.float64)
    L = spins.size
    g = np.zeros((2 * L, 2 * L))
    idx = np.arange(L)
    g[2 * idx, 2 * idx + 1] = -spins
    g[2 * idx + 1, 2 * idx] = spins
    return MajoranaCovariance(g)


def all_up(L):
    return product_state(np.ones(L))


def bell_pair_state():
    """Two-mode pure Gaussian state with maximally entangled modes (b_0 ~ a_1, a_0 ~ b_1)."""
    g = np.zeros((4, 4))
    g[1, 2], g[2, 1] = 1.0, -1.0
    g[0, 3], g[3, 0] = -1.0, 1.0
    return MajoranaCovariance(g)


def _check_site(state, j):
    if not 0 <= j < state.L:
        raise SiteOutOfRange(f"site {j} outside 0..{state.L - 1}")


def _check_antisymmetric(a):
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    if a.size and np.max(np.abs(a + a.T)) > ANTISYM_TOL * scale:
        raise NotAntisymmetric("matrix is not antisymmetric")


def pfaffian(a):
    """Pfaffian of a real antisymmetric matrix (Parlett-Reid, partial pivoting)."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("pfaffian needs a square matrix")
    if a.shape[0] % 2:
        raise OddDimension(f"odd dimension {a.shape[0]}")
    _check_antisymmetric(a)
    if a.shape[0] == 0:
        return 1.0
    return float(kernels.pfaffian(np.ascontiguousarray(a)))


def transverse_magnetization(state, j):
    _check_site(state, j)
    return float(-state.gamma[2 * j, 2 * j + 1])


def magnetizations(state):
    """All <sz_j> as an array."""
    idx = np.arange(state.L)
    return -state.gamma[2 * idx, 2 * idx + 1]


def outcome_probability(state, j, s):
    if s not in (1, -1):
        raise ValueError(f"outcome must be +1 or -1, got {s}")
    mz = transverse_magnetization(state, j)
    return 0.5 * (1.0 + s * mz)


def _condition_pair(g, a, b, x):
    """In-place update of ``g`` after projecting i gamma_a gamma_b onto ``x``."""
    denom = 1.0 + x * g[a, b]
    ca = g[:, a].copy()
    cb = g[:, b].copy()
    g += (x / denom) * (np.outer(cb, ca) - np.outer(ca, cb))
    g[[a, b], :] = 0.0
    g[:, [a, b]] = 0.0
    g[a, b] = x
    g[b, a] = -x


def project_site(state, j, s, tol=NULL_TOL):
    """Project site ``j`` onto sz = ``s``; returns ``(post_state, probability)``.

    Raises NullProjection when the outcome probability does not exceed ``tol``.
    """
    prob = outcome_probability(state, j, s)
    if prob <= tol:
        raise NullProjection(j, prob)
    g = np.array(state.gamma)
    # sz = -i a b, so the eigenvalue of i a b is -s
    _condition_pair(g, 2 * j, 2 * j + 1, -float(s))
    g = 0.5 * (g - g.T)
    return MajoranaCovariance(g, pure=state.pure), prob


def project_sites(state, sites, outcomes, tol=NULL_TOL):
    """Project several distinct sites at once.

    Conditional probabilities are accumulated on the measured block only (in
    the given order); the full covariance is then updated by a single Schur
    complement.  Returns ``(post_state, conditional_probabilities)``.
    """
    sites = np.asarray(sites, dtype=np.intp)
    outcomes = np.asarray(outcomes, dtype=np.float64)
    if sites.size == 0:
        return state, np.empty(0)
    if np.unique(sites).size != sites.size:
        raise DuplicateIndex("sites must be distinct")
    for j in sites:
        _check_site(state, int(j))
    m_idx = np.empty(2 * sites.size, dtype=np.intp)
    m_idx[0::2] = 2 * sites
    m_idx[1::2] = 2 * sites + 1
    block = state.gamma[np.ix_(m_idx, m_idx)].copy()
    probs = np.empty(sites.size)
    for t, s in enumerate(outcomes):
        probs[t] = 0.5 * (1.0 - s * block[2 * t, 2 * t + 1])
        if probs[t] <= tol:
            raise NullProjection(int(sites[t]), probs[t])
        _condition_pair(block, 2 * t, 2 * t + 1, -s)
    return _apply_block_condition(state, m_idx, -outcomes), probs


def born_outcomes(state, sites, uniforms):
    """Draw sequential Born-rule outcomes on ``sites`` (in the given order).

    Outcome ``t`` is +1 when ``uniforms[t]`` falls below its conditional
    probability given the earlier outcomes.  Only the measured block is
    conditioned.  Returns ``(outcomes, conditional_probabilities)``.
    """
    sites = np.asarray(sites, dtype=np.intp)
    m_idx = np.empty(2 * sites.size, dtype=np.intp)
    m_idx[0::2] = 2 * sites
    m_idx[1::2] = 2 * sites + 1
    block = state.gamma[np.ix_(m_idx, m_idx)].copy()
    outcomes = np.empty(sites.size)
    probs = np.empty(sites.size)
    for t in range(sites.size):
        p_up = min(max(0.5 * (1.0 - block[2 * t, 2 * t + 1]), 0.0), 1.0)
        s = 1.0 if uniforms[t] < p_up else -1.0
        outcomes[t] = s
        probs[t] = p_up if s > 0 else 1.0 - p_up
        _condition_pair(block, 2 * t, 2 * t + 1, -s)
    return outcomes, probs


def _apply_block_condition(state, m_idx, x):
    """Condition on the measured pairs ``m_idx`` having i a b = ``x`` (pure target)."""
    g = state.gamma
    n = g.shape[0]
    rest = np.setdiff1d(np.arange(n), m_idx, assume_unique=True)
    target = np.zeros((m_idx.size, m_idx.size))
    t = np.arange(x.size)
    target[2 * t, 2 * t + 1] = x
    target[2 * t + 1, 2 * t] = -x
    g_rm = g[np.ix_(rest, m_idx)]
    k = g[np.ix_(m_idx, m_idx)] + target
    new = np.zeros_like(g)
    # Gamma_RR - Gamma_RM (Gamma_MM + target)^-1 Gamma_MR, with Gamma_MR = -Gamma_RM^T
    new[np.ix_(rest, rest)] = g[np.ix_(rest, rest)] + g_rm @ np.linalg.solve(k, g_rm.T)
    new[np.ix_(m_idx, m_idx)] = target
    new = 0.5 * (new - new.T)
    return MajoranaCovariance(new, pure=state.pure)


def interval_indices(L, start, length):
    """Majorana indices of the ring interval [start, start + length)."""
    if length <= 0:
        raise EmptyInterval("interval length must be positive")
    if length > L:
        raise ValueError(f"interval length {length} exceeds L={L}")
    sites = (start + np.arange(length)) % L
    idx = np.empty(2 * length, dtype=np.intp)
    idx[0::2] = 2 * sites
    idx[1::2] = 2 * sites + 1
    return idx


def _binary_entropy_sum(nu):
    if np.any(nu > 1.0 + CLAMP_TOL):
        raise Unphysical(f"symplectic eigenvalue {nu.max():.12f} exceeds 1")
    nu = np.clip(nu, 0.0, 1.0)
    p = 0.5 * (1.0 + nu)
    return float(np.sum(entr(p) + entr(1.0 - p)))


def entanglement_entropy(state, start, length):
    """Von Neumann entropy (nats) of the ring interval [start, start + length)."""
    idx = interval_indices(state.L, start, length)
    sub = state.gamma[np.ix_(idx, idx)]
    w = np.linalg.eigvalsh(1j * sub)
    return _binary_entropy_sum(w[length:])


def mean_entanglement_entropy(state, length, positions=None):
    """Entropy of length-``length`` intervals averaged over evenly spaced starts."""
    L = state.L
    if positions is None or positions >= L:
        starts = np.arange(L)
    else:
        starts = (np.arange(positions) * L) // positions
    return float(np.mean([entanglement_entropy(state, int(a), length) for a in starts]))


def majorana_monomial_expectation(state, indices):
    """<gamma_{i1} ... gamma_{i2k}> by Wick's theorem, for distinct indices in the given order."""
    indices = [int(i) for i in indices]
    if len(set(indices)) != len(indices):
        raise DuplicateIndex(f"repeated Majorana index in {indices}")
    n = 2 * state.L
    if any(not 0 <= i < n for i in indices):
        raise SiteOutOfRange(f"Majorana index outside 0..{n - 1}")
    if len(indices) % 2:
        return 0j
    if not indices:
        return 1 + 0j
    k = len(indices) // 2
    sub = state.gamma[np.ix_(indices, indices)]
    return complex((-1j) ** k * kernels.pfaffian(np.ascontiguousarray(sub)))


def pauli_to_majorana(ops):
    """Reduce a product of single-site Paulis to ``coef * gamma_{i1} ... gamma_{in}``.

    ``ops`` is a sequence of ``(site, axis)`` with axis in ``"xyz"``, applied
    left to right as written.  The returned indices are sorted and distinct.
    """
    coef = 1 + 0j
    seq = []
    for site, axis in ops:
        if axis == "z":
            coef *= -1j
            seq += [2 * site, 2 * site + 1]
        elif axis in "xy":
            for k in range(site):
                coef *= -1j
                seq += [2 * k, 2 * k + 1]
            seq.append(2 * site if axis == "x" else 2 * site + 1)
        else:
            raise ValueError(f"unknown Pauli axis {axis!r}")
    # bubble sort with anticommutation signs, cancelling squares
    out = []
    for g in seq:
        out.append(g)
        pos = len(out) - 1
        while pos > 0 and out[pos - 1] >= out[pos]:
            if out[pos - 1] == out[pos]:
                del out[pos - 1:pos + 1]
                break
            out[pos - 1], out[pos] = out[pos], out[pos - 1]
            coef = -coef
            pos -= 1
    return coef, out


def pauli_expectation(state, ops):
    """Expectation of a Pauli product through its Majorana string."""
    coef, idx = pauli_to_majorana(ops)
    return coef * majorana_monomial_expectation(state, idx)


@dataclass(frozen=True, eq=False)
class CorrelatorTensor:
    """Connected correlators ``C[alpha, beta, i, j]`` (axes ordered x, y, z) and means ``M[alpha, i]``.

    Same-site entries use the symmetrised product, so ``C`` is real and
    ``C[a, b, i, j] == C[b, a, j, i]``.  When ``d_max`` is set, pairs with
    ``|i - j| > d_max`` are left at zero.
    """

    C: np.ndarray
    M: np.ndarray
    d_max: int | None = None

    @property
    def L(self):
        return self.M.shape[1]

    def matrix(self):
        """The 3L x 3L quadratic form with row index ``3*i + alpha``."""
        L = self.L
        return np.ascontiguousarray(self.C.transpose(2, 0, 3, 1).reshape(3 * L, 3 * L))


def _is_real_state(g, tol=1e-13):
    return (np.max(np.abs(g[0::2, 0::2])) <= tol) and (np.max(np.abs(g[1::2, 1::2])) <= tol)


def _string_layout(kind, d):
    """Types (0 = a, 1 = b) and site offsets of the Majorana string for ``sigma_i sigma_{i+d}``.

    Returns ``(prefactor, offsets, types)`` so that
    ``<s^alpha_i s^beta_{i+d}> = prefactor * Pf(Gamma[idx])``.
    """
    interior_off = np.repeat(np.arange(1, d), 2)
    interior_typ = np.tile([0, 1], d - 1)
    first = {"xx": 1, "xy": 1, "yx": 0, "yy": 0}[kind]
    last = {"xx": 0, "xy": 1, "yx": 0, "yy": 1}[kind]
    offsets = np.concatenate([[0], interior_off, [d]])
    types = np.concatenate([[first], interior_typ, [last]])
    sign = (-1) ** d
    if kind in ("yx", "yy"):
        sign = -sign
    return sign, offsets, types


def _bipartite_sign(types):
    # parity of moving every b ahead of every a, times the block Pfaffian sign
    n_a_seen = 0
    inv = 0
    for t in types:
        if t == 1:
            inv += n_a_seen
        else:
            n_a_seen += 1
    d = len(types) // 2
    return (-1) ** (inv + d * (d - 1) // 2)


def _string_correlators(g, kind, d, real):
    """<s^alpha_i s^beta_{i+d}> for every i with i + d < L."""
    L = g.shape[0] // 2
    sign, offsets, types = _string_layout(kind, d)
    starts = np.arange(L - d)
    sites = starts[:, None] + offsets[None, :]
    majo = 2 * sites + types[None, :]
    if real:
        if (types == 1).sum() != (types == 0).sum():
            return np.zeros(starts.size)
        rows = majo[:, types == 1]
        cols = majo[:, types == 0]
        blocks = g[rows[:, :, None], cols[:, None, :]]
        return sign * _bipartite_sign(types) * np.linalg.det(blocks)
    blocks = g[majo[:, :, None], majo[:, None, :]]
    return sign * kernels.pfaffian_stack(np.ascontiguousarray(blocks))


def spin_correlators(state, d_max=None):
    """Connected spin-spin correlators for all site pairs (see CorrelatorTensor)."""
    g = state.gamma
    L = state.L
    real = _is_real_state(g)
    mz = magnetizations(state)
    C = np.zeros((3, 3, L, L))
    M = np.zeros((3, L))
    M[2] = mz
    ax = {"x": 0, "y": 1}
    top = L - 1 if d_max is None else min(d_max, L - 1)
    for d in range(1, top + 1):
        i = np.arange(L - d)
        j = i + d
        for kind in ("xx", "xy", "yx", "yy"):
            vals = _string_correlators(g, kind, d, real)
            a, b = ax[kind[0]], ax[kind[1]]
            C[a, b, i, j] = vals
            C[b, a, j, i] = vals
    # zz is quadratic: Pf of the 4x4 block minus the product of means
    a_idx = 2 * np.arange(L)
    b_idx = a_idx + 1
    czz = -g[np.ix_(a_idx, a_idx)] * g[np.ix_(b_idx, b_idx)] + g[np.ix_(a_idx, b_idx)] * g[np.ix_(b_idx, a_idx)]
    if d_max is not None:
        far = np.abs(np.subtract.outer(np.arange(L), np.arange(L))) > d_max
        czz[far] = 0.0
    np.fill_diagonal(czz, 1.0 - mz ** 2)
    C[2, 2] = czz
    diag = np.arange(L)
    C[0, 0, diag, diag] = 1.0
    C[1, 1, diag, diag] = 1.0
    return CorrelatorTensor(C=C, M=M, d_max=d_max)


def _two_mode_operators():
    c = np.array([[0.0, 1.0], [0.0, 0.0]])
    z = np.diag([1.0, -1.0])
    eye = np.eye(2)
    c1 = np.kron(c, eye)
    c2 = np.kron(z, c)
    majo = []
    for cm in (c1, c2):
        majo.append(cm + cm.T)
        majo.append(-1j * (cm - cm.T))
    return majo


_MAJO4 = _two_mode_operators()
_PAIRS = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
_PAIR_OPS = np.array([_MAJO4[p] @ _MAJO4[q] for p, q in _PAIRS])
_QUAD_OP = _MAJO4[0] @ _MAJO4[1] @ _MAJO4[2] @ _MAJO4[3]
# twisted transpose on the first mode: each of its Majoranas picks up a factor i
_PAIR_TWIST = np.array([1j ** ((p < 2) + (q < 2)) for p, q in _PAIRS])
_QUAD_TWIST = 1j ** 2


def _pair_indices(i, j):
    return [2 * i, 2 * i + 1, 2 * j, 2 * j + 1]


def two_mode_reduced_density(state, i, j):
    """Reduced density matrix of fermionic modes ``i`` and ``j``.

    Basis ``|n_i n_j> = (c_i^dag)^{n_i} (c_j^dag)^{n_j} |0>`` ordered 00, 01, 10, 11.
    """
    if i == j:
        raise SameSite("two distinct modes required")
    _check_site(state, i)
    _check_site(state, j)
    idx = _pair_indices(i, j)
    rho = np.eye(4, dtype=complex) / 4.0
    for (p, q), op in zip(_PAIRS, _PAIR_OPS):
        ev = majorana_monomial_expectation(state, [idx[p], idx[q]])
        # (gamma_p gamma_q)^dag = -gamma_p gamma_q
        rho += -ev * op / 4.0
    ev4 = majorana_monomial_expectation(state, idx)
    rho += ev4 * _QUAD_OP / 4.0
    return rho


def _negativity_from_blocks(blocks):
    """Fermionic negativity for a stack of 4x4 covariance blocks (modes i, j)."""
    n = blocks.shape[0]
    pair_ev = np.stack([-1j * blocks[:, p, q] for p, q in _PAIRS], axis=1)
    quad_ev = -(blocks[:, 0, 1] * blocks[:, 2, 3] - blocks[:, 0, 2] * blocks[:, 1, 3]
                + blocks[:, 0, 3] * blocks[:, 1, 2])
    coef = -pair_ev * _PAIR_TWIST[None, :] / 4.0
    rho_t = np.broadcast_to(np.eye(4, dtype=complex) / 4.0, (n, 4, 4)).copy()
    rho_t += np.einsum("np,pab->nab", coef, _PAIR_OPS)
    rho_t += (quad_ev * _QUAD_TWIST / 4.0)[:, None, None] * _QUAD_OP[None]
    sv = np.linalg.svd(rho_t, compute_uv=False)
    return np.log(sv.sum(axis=1))


def fermionic_negativity(state, i, j):
    """ln Tr|rho^{T~}| of modes (i, j), twisted transpose taken on mode ``i``."""
    if i == j:
        raise SameSite("two distinct modes required")
    _check_site(state, i)
    _check_site(state, j)
    idx = _pair_indices(i, j)
    block = state.gamma[np.ix_(idx, idx)][None]
    return float(_negativity_from_blocks(block)[0])


def pair_negativities(state, d):
    """Negativity of every ring pair (i, i + d mod L); returns an array of length L."""
    L = state.L
    if not 0 < d < L:
        raise ValueError(f"distance {d} must lie in 1..L-1")
    i = np.arange(L)
    j = (i + d) % L
    idx = np.stack([2 * i, 2 * i + 1, 2 * j, 2 * j + 1], axis=1)
    blocks = state.gamma[idx[:, :, None], idx[:, None, :]]
    return _negativity_from_blocks(blocks)


def stabilize(state, check_purity=True):
    """Re-antisymmetrise, check physicality and (for pure states) purity.

    Raises Unphysical or PurityDrift.
    """
    g = 0.5 * (state.gamma - state.gamma.T)
    if check_purity and state.pure:
        drift = float(np.max(np.abs(g @ g + np.eye(g.shape[0]))))
        if drift > PURITY_TOL:
            raise PurityDrift(drift)
    else:
        smax = float(np.linalg.norm(g, 2))
        if smax > 1.0 + PHYSICAL_TOL:
            raise Unphysical(f"largest singular value {smax:.12f} exceeds 1")
    return MajoranaCovariance(g, pure=state.pure)
