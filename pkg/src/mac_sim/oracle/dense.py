"""Dense state-vector reference for small chains.

Site ``j`` is tensor factor ``j`` (bit ``L-1-j`` of the basis index) and the
local basis is ``(up, down)`` so that ``sz = diag(1, -1)``.  Fermions follow
``c_j = (prod_{k<j} sz_k) |up><down|_j``; everything here is computed by
direct operator application on amplitudes, never through covariance
matrices.
"""

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from ..errors import NonConvergence, NullProjection, SameSite, TooLarge

MAX_L = 12
MAX_L_NH = 10

PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}
SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)


def _check_size(L, cap=MAX_L):
    if L > cap:
        raise TooLarge(f"dense oracle limited to L <= {cap}, got {L}")


def n_sites(psi):
    L = int(round(np.log2(psi.size)))
    if 2 ** L != psi.size:
        raise ValueError("state length is not a power of two")
    return L


def apply_local(psi, j, op):
    """Apply a 2x2 operator to site ``j``."""
    L = n_sites(psi)
    t = psi.reshape((2,) * L)
    t = np.tensordot(op, t, axes=([1], [j]))
    return np.moveaxis(t, 0, j).reshape(-1)


def apply_pauli(psi, j, axis):
    return apply_local(psi, j, PAULI[axis])


def _z_string(psi, j):
    for k in range(j):
        psi = apply_pauli(psi, k, "z")
    return psi


def apply_majorana(psi, p):
    """Apply ``gamma_p`` (``a_j = P_j sx_j`` for even p, ``b_j = P_j sy_j`` for odd p)."""
    j, kind = divmod(p, 2)
    return _z_string(apply_pauli(psi, j, "x" if kind == 0 else "y"), j)


def apply_annihilator(psi, j):
    return _z_string(apply_local(psi, j, SIGMA_PLUS), j)


def apply_creator(psi, j):
    return _z_string(apply_local(psi, j, SIGMA_PLUS.T), j)


def expectation(psi, phi):
    """``<psi|phi>`` for an already-applied operator image ``phi``."""
    return complex(np.vdot(psi, phi))


def basis_state(spins):
    """Product state from +-1 spins (``+1`` = up)."""
    L = len(spins)
    idx = 0
    for s in spins:
        idx = 2 * idx + (0 if s > 0 else 1)
    psi = np.zeros(2 ** L, dtype=complex)
    psi[idx] = 1.0
    return psi


def _down_counts(L):
    idx = np.arange(2 ** L)
    return np.array([bin(i).count("1") for i in idx])


def even_sector(L):
    """Basis indices with an even number of down spins."""
    return np.flatnonzero(_down_counts(L) % 2 == 0)


def ising_hamiltonian(L, h, J=1.0, gamma=0.0):
    """Sparse ``-J sum sx sx - (h + i gamma/4) sum sz`` on the periodic ring."""
    dim = 2 ** L
    idx = np.arange(dim)
    field = h + 0.25j * gamma
    diag = np.zeros(dim, dtype=complex)
    rows, cols, vals = [], [], []
    for j in range(L):
        bit = L - 1 - j
        sz = 1 - 2 * ((idx >> bit) & 1)
        diag -= field * sz
        nbit = L - 1 - ((j + 1) % L)
        rows.append(idx ^ ((1 << bit) | (1 << nbit)))
        cols.append(idx)
        vals.append(np.full(dim, -J, dtype=complex))
    rows.append(idx)
    cols.append(idx)
    vals.append(diag)
    H = scipy.sparse.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
    )
    if gamma == 0:
        H = H.real
    return H


def _embed(vec, sector, L):
    psi = np.zeros(2 ** L, dtype=complex)
    psi[sector] = vec
    return psi / np.linalg.norm(psi)


def dense_ground_state(params):
    """Lowest even-parity eigenvector of the Ising ring and its energy."""
    L = params.L
    _check_size(L)
    sector = even_sector(L)
    H = ising_hamiltonian(L, params.h, params.J)[sector][:, sector]
    if sector.size <= 256:
        w, v = np.linalg.eigh(H.toarray())
        energy, vec = w[0], v[:, 0]
    else:
        w, v = scipy.sparse.linalg.eigsh(H, k=1, which="SA", tol=1e-14)
        energy, vec = w[0], v[:, 0]
    psi = _embed(vec, sector, L)
    # fix the global phase so the largest amplitude is real positive
    k = np.argmax(np.abs(psi))
    psi *= np.abs(psi[k]) / psi[k]
    return psi, float(energy)


def dense_nh_stationary_state(params, check=True):
    """Even-parity eigenvector of the no-click Hamiltonian with largest imaginary eigenvalue.

    With ``check`` set, the result is cross-validated against a propagated
    power iteration (raises NonConvergence on disagreement).
    """
    ising = params.ising
    L = ising.L
    _check_size(L, MAX_L_NH)
    if params.gamma == 0:
        psi, energy = dense_ground_state(ising)
        return psi, complex(energy)
    sector = even_sector(L)
    H = ising_hamiltonian(L, ising.h, ising.J, params.gamma)[sector][:, sector].toarray()
    w, v = np.linalg.eig(H)
    top = np.max(w.imag)
    cand = np.flatnonzero(w.imag >= top - 1e-9)
    pick = cand[np.argmin(w[cand].real)]
    psi = _embed(v[:, pick], sector, L)
    if check:
        other = _power_iteration(H, sector, L)
        if 1 - abs(np.vdot(psi, other)) > 1e-8:
            raise NonConvergence("power iteration disagrees with the eigen-solver")
    return psi, complex(w[pick])


def _power_iteration(H, sector, L, dt=0.5, max_squarings=80, tol=1e-13):
    """Apply ``exp(-i H dt)`` ``2^n`` times (by repeated squaring) with renormalisation."""
    U = scipy.linalg.expm(-1j * dt * H)
    rng = np.random.default_rng(12345)
    start = rng.normal(size=H.shape[0]) + 1j * rng.normal(size=H.shape[0])
    prev = start / np.linalg.norm(start)
    for _ in range(max_squarings):
        U = U @ U
        U /= np.max(np.abs(U))
        cur = U @ start
        cur /= np.linalg.norm(cur)
        if 1 - abs(np.vdot(prev, cur)) < tol:
            return _embed(cur, sector, L)
        prev = cur
    raise NonConvergence("propagated state did not converge")


def gaussian_to_dense(gamma):
    """Dense vector of the pure Gaussian state with covariance ``gamma``.

    It is the unique ground state of ``(i/4) sum A_pq gamma_p gamma_q`` with
    ``A = -gamma``, found by a sparse eigensolver acting through
    :func:`apply_majorana`; the global phase is arbitrary.
    """
    A = -np.asarray(gamma, dtype=float)
    n = A.shape[0]
    L = n // 2
    _check_size(L)
    dim = 2 ** L

    def matvec(v):
        v = np.asarray(v, dtype=complex).reshape(-1)
        out = np.zeros(dim, dtype=complex)
        for q in range(n):
            gq = apply_majorana(v, q)
            for p in range(q):
                if A[p, q] != 0.0:
                    # A_pq g_p g_q + A_qp g_q g_p = 2 A_pq g_p g_q for p != q
                    out += 0.5j * A[p, q] * apply_majorana(gq, p)
        return out

    op = scipy.sparse.linalg.LinearOperator((dim, dim), matvec=matvec, dtype=complex)
    if dim <= 64:
        H = np.column_stack([matvec(e) for e in np.eye(dim)])
        w, v = np.linalg.eigh(0.5 * (H + H.conj().T))
        return v[:, 0]
    w, v = scipy.sparse.linalg.eigsh(op, k=1, which="SA", tol=1e-13)
    return v[:, 0] / np.linalg.norm(v[:, 0])


def project(psi, j, s):
    """Project site ``j`` onto ``sz = s``; returns ``(state, probability)``."""
    proj = np.diag([1.0, 0.0] if s > 0 else [0.0, 1.0]).astype(complex)
    out = apply_local(psi, j, proj)
    prob = float(np.vdot(out, out).real)
    if prob <= 1e-14:
        raise NullProjection(j, prob)
    return out / np.sqrt(prob), prob


def project_string(psi, string):
    """Apply a measurement string (entries -1, 0, +1); returns ``(state, joint probability)``."""
    total = 1.0
    for j, m in enumerate(string):
        if m:
            psi, p = project(psi, j, m)
            total *= p
    return psi, total


def magnetization_z(psi, j):
    return expectation(psi, apply_pauli(psi, j, "z")).real


def covariance(psi):
    """Majorana covariance ``Gamma_pq = i <gamma_p gamma_q>`` (p != q) by operator application."""
    L = n_sites(psi)
    images = np.array([apply_majorana(psi, p) for p in range(2 * L)])
    m = images.conj() @ images.T
    g = 1j * (m - np.eye(2 * L))
    if np.max(np.abs(g.imag)) > 1e-9:
        raise ValueError("dense covariance is not real")
    g = g.real
    return 0.5 * (g - g.T)


def majorana_monomial(psi, indices):
    """``<gamma_{i1} ... gamma_{in}>`` by applying the operators right to left."""
    phi = psi
    for p in reversed(list(indices)):
        phi = apply_majorana(phi, p)
    return expectation(psi, phi)


def entanglement_entropy(psi, start, length):
    """Von Neumann entropy (nats) of the ring interval [start, start + length)."""
    L = n_sites(psi)
    sites = [(start + k) % L for k in range(length)]
    rest = [k for k in range(L) if k not in sites]
    t = psi.reshape((2,) * L).transpose(sites + rest).reshape(2 ** length, -1)
    sv = np.linalg.svd(t, compute_uv=False)
    p = sv ** 2
    p = p[p > 1e-300]
    return float(-np.sum(p * np.log(p)))


def _site_images(psi):
    L = n_sites(psi)
    return np.array([[apply_pauli(psi, j, a) for j in range(L)] for a in "xyz"])


def correlators(psi):
    """``(C, M)``: connected correlators ``C[a, b, i, j]`` and means ``M[a, i]``.

    Same-site entries use the symmetrised product.
    """
    L = n_sites(psi)
    img = _site_images(psi).reshape(3 * L, -1)
    raw = img.conj() @ img.T  # <s_p s_q> since every Pauli is Hermitian
    M = np.array([[np.vdot(psi, img[a * L + j]).real for j in range(L)] for a in range(3)])
    raw = raw.reshape(3, L, 3, L).transpose(0, 2, 1, 3)
    sym = raw.copy()
    diag = np.arange(L)
    for a in range(3):
        for b in range(3):
            sym[a, b, diag, diag] = 0.5 * (raw[a, b, diag, diag] + raw[b, a, diag, diag])
    C = sym.real - M[:, None, :, None] * M[None, :, None, :]
    return C, M


def collective_variance(psi, directions):
    """``4 Var(sum_j n_j . sigma_j / 2)`` computed from the operator image."""
    L = n_sites(psi)
    phi = np.zeros_like(psi)
    for j in range(L):
        for a, axis in enumerate("xyz"):
            if directions[j, a]:
                phi = phi + directions[j, a] * apply_pauli(psi, j, axis)
    phi = 0.5 * phi
    mean = np.vdot(psi, phi).real
    return float(4 * (np.vdot(phi, phi).real - mean ** 2))


def fermion_pair_density(psi, i, j):
    """Reduced density matrix of modes ``i, j`` in the basis ``(c_i^dag)^{n_i} (c_j^dag)^{n_j} |0>``.

    Entries are expectation values of the two-mode transition operators
    ``|b><a|``, built from creation and annihilation operators.
    """
    if i == j:
        raise SameSite("two distinct modes required")
    occ = [(0, 0), (0, 1), (1, 0), (1, 1)]

    def vacuum_projected(phi):
        # (1 - n_j)(1 - n_i) with n = c^dag c
        for m in (i, j):
            phi = phi - apply_creator(apply_annihilator(phi, m), m)
        return phi

    rho = np.zeros((4, 4), dtype=complex)
    for ia, (ai, aj) in enumerate(occ):
        # c_j^{a_j} c_i^{a_i} acting first on psi: apply c_i then c_j
        phi = psi
        if ai:
            phi = apply_annihilator(phi, i)
        if aj:
            phi = apply_annihilator(phi, j)
        phi = vacuum_projected(phi)
        for ib, (bi, bj) in enumerate(occ):
            chi = phi
            if bj:
                chi = apply_creator(chi, j)
            if bi:
                chi = apply_creator(chi, i)
            rho[ia, ib] = np.vdot(psi, chi)
    return rho


def twisted_partial_transpose(rho):
    """Fermionic partial transpose on the first mode in the occupation basis.

    ``|n1 n2><m1 m2| -> (-1)^phi |m1 n2><n1 m2|`` with
    ``phi = [(n1 + m1) mod 2] / 2 + (n1 + m1)(n2 + m2)``.
    """
    out = np.zeros((4, 4), dtype=complex)
    for a in range(4):
        n1, n2 = divmod(a, 2)
        for b in range(4):
            m1, m2 = divmod(b, 2)
            t1 = n1 + m1
            phase = (1j if t1 % 2 else 1.0) * (-1) ** (t1 * (n2 + m2))
            out[2 * m1 + n2, 2 * n1 + m2] += phase * rho[a, b]
    return out


def fermionic_negativity(psi, i, j):
    rho = fermion_pair_density(psi, i, j)
    sv = np.linalg.svd(twisted_partial_transpose(rho), compute_uv=False)
    return float(np.log(sv.sum()))


def spin_pair_density(psi, i, j):
    """Two-spin reduced density matrix of sites ``i, j`` (site ``i`` first)."""
    if i == j:
        raise SameSite("two distinct sites required")
    L = n_sites(psi)
    rest = [k for k in range(L) if k not in (i, j)]
    t = psi.reshape((2,) * L).transpose([i, j] + rest).reshape(4, -1)
    return t @ t.conj().T


def spin_negativity(psi, i, j):
    """Logarithmic negativity of two spins under the ordinary partial transpose on spin ``i``."""
    rho = spin_pair_density(psi, i, j).reshape(2, 2, 2, 2)
    pt = rho.transpose(2, 1, 0, 3).reshape(4, 4)
    return float(np.log(np.abs(np.linalg.eigvalsh(pt)).sum()))


def born_distribution(psi, sites):
    """Exact joint outcome probabilities on ``sites``; maps outcome tuples to probabilities."""
    L = n_sites(psi)
    out = {}
    for code in range(2 ** len(sites)):
        outcome = tuple(1 if (code >> k) & 1 == 0 else -1 for k in range(len(sites)))
        string = [0] * L
        for s, m in zip(sites, outcome):
            string[s] = m
        phi = psi
        for s, m in zip(sites, outcome):
            proj = np.diag([1.0, 0.0] if m > 0 else [0.0, 1.0]).astype(complex)
            phi = apply_local(phi, s, proj)
        out[outcome] = float(np.vdot(phi, phi).real)
    return out


def parity(psi):
    L = n_sites(psi)
    sign = 1 - 2 * (_down_counts(L) % 2)
    return float(np.vdot(psi, sign * psi).real)


def three_qubit_example():
    """Entropy of qubit C before and after measuring A in ``(2|-++> + |+-+> + |++->)/sqrt 6``.

    Returns a dict with the pre-measurement entropy, its spectrum and the
    post-measurement entropies for both outcomes.
    """
    psi = (2 * basis_state([-1, 1, 1]) + basis_state([1, -1, 1]) + basis_state([1, 1, -1])) / np.sqrt(6)
    t = psi.reshape(4, 2)
    rho_c = t.T @ t.conj()
    spectrum = np.sort(np.linalg.eigvalsh(rho_c))[::-1]
    after = {}
    for s in (1, -1):
        post, _ = project(psi, 0, s)
        after[s] = entanglement_entropy(post, 2, 1)
    return {
        "S_C": entanglement_entropy(psi, 2, 1),
        "spectrum": spectrum,
        "S_C_after_up": after[1],
        "S_C_after_down": after[-1],
    }
