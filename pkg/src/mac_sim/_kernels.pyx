# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops. Semantics mirror ``_pykernels`` exactly."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, exp, cos, sin, sqrt

cnp.import_array()


cdef double _pfaffian_inplace(double[:, ::1] a) noexcept nogil:
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t k, i, j, kp
    cdef double pf = 1.0
    cdef double big, tmp, piv, ti, ci
    if n % 2 == 1:
        return 0.0
    for k in range(0, n - 1, 2):
        kp = k + 1
        big = fabs(a[k + 1, k])
        for i in range(k + 2, n):
            if fabs(a[i, k]) > big:
                big = fabs(a[i, k])
                kp = i
        if kp != k + 1:
            for j in range(k, n):
                tmp = a[k + 1, j]
                a[k + 1, j] = a[kp, j]
                a[kp, j] = tmp
            for j in range(k, n):
                tmp = a[j, k + 1]
                a[j, k + 1] = a[j, kp]
                a[j, kp] = tmp
            pf = -pf
        if a[k + 1, k] == 0.0:
            return 0.0
        piv = a[k, k + 1]
        pf *= piv
        if k + 2 < n:
            for i in range(k + 2, n):
                ti = a[k, i] / piv
                ci = a[i, k + 1]
                for j in range(i + 1, n):
                    a[i, j] += ti * a[j, k + 1] - ci * a[k, j] / piv
            for i in range(k + 2, n):
                for j in range(i + 1, n):
                    a[j, i] = -a[i, j]
    return pf


def pfaffian(matrix):
    cdef double[:, ::1] a = np.array(matrix, dtype=np.float64, order="C", copy=True)
    return _pfaffian_inplace(a)


def pfaffian_stack(matrices):
    """Pfaffians of a (batch, n, n) stack of antisymmetric matrices."""
    cdef double[:, :, ::1] a = np.array(matrices, dtype=np.float64, order="C", copy=True)
    cdef Py_ssize_t b, nb = a.shape[0]
    out = np.empty(nb)
    cdef double[::1] res = out
    for b in range(nb):
        res[b] = _pfaffian_inplace(a[b])
    return out


def anneal_qfi(const double[:, ::1] K, double[::1] n, const double[::1] temps,
               Py_ssize_t moves, const cnp.int64_t[::1] sites,
               const double[::1] thetas, const double[:, ::1] axes,
               const double[::1] uniforms, bint xz):
    """Metropolis maximisation of n.K.n over unit 3-vectors per site.

    ``n`` (length 3L) is updated in place to the final configuration.
    Returns ``(best_value, best_n)``.
    """
    cdef Py_ssize_t dim = K.shape[0]
    cdef Py_ssize_t L = dim // 3
    cdef Py_ssize_t t, m, idx, j, r, c, a
    cdef double T, F, dF, norm, th, ct, st, proj
    cdef double nold[3]
    cdef double nnew[3]
    cdef double tan[3]
    cdef double dlt[3]
    v_arr = np.empty(dim)
    best_arr = np.array(n, copy=True)
    cdef double[::1] v = v_arr
    cdef double[::1] best = best_arr
    cdef double best_F

    F = 0.0
    for r in range(dim):
        proj = 0.0
        for c in range(dim):
            proj += K[r, c] * n[c]
        v[r] = proj
        F += n[r] * proj
    best_F = F

    with nogil:
        for t in range(temps.shape[0]):
            T = temps[t]
            # refresh the cached field to stop round-off from accumulating
            F = 0.0
            for r in range(dim):
                proj = 0.0
                for c in range(dim):
                    proj += K[r, c] * n[c]
                v[r] = proj
                F += n[r] * proj
            for m in range(moves):
                idx = t * moves + m
                j = sites[idx]
                for a in range(3):
                    nold[a] = n[3 * j + a]
                th = thetas[idx]
                ct = cos(th)
                st = sin(th)
                if xz:
                    tan[0] = -nold[2]
                    tan[1] = 0.0
                    tan[2] = nold[0]
                else:
                    proj = axes[idx, 0] * nold[0] + axes[idx, 1] * nold[1] + axes[idx, 2] * nold[2]
                    for a in range(3):
                        tan[a] = axes[idx, a] - proj * nold[a]
                    norm = sqrt(tan[0] * tan[0] + tan[1] * tan[1] + tan[2] * tan[2])
                    if norm < 1e-12:
                        continue
                    for a in range(3):
                        tan[a] /= norm
                for a in range(3):
                    nnew[a] = ct * nold[a] + st * tan[a]
                norm = sqrt(nnew[0] * nnew[0] + nnew[1] * nnew[1] + nnew[2] * nnew[2])
                for a in range(3):
                    nnew[a] /= norm
                    dlt[a] = nnew[a] - nold[a]
                dF = 0.0
                for a in range(3):
                    dF += 2.0 * dlt[a] * v[3 * j + a]
                    for c in range(3):
                        dF += dlt[a] * K[3 * j + a, 3 * j + c] * dlt[c]
                if dF >= 0.0 or uniforms[idx] < exp(dF / T):
                    for a in range(3):
                        n[3 * j + a] = nnew[a]
                    for r in range(dim):
                        v[r] += K[r, 3 * j] * dlt[0] + K[r, 3 * j + 1] * dlt[1] + K[r, 3 * j + 2] * dlt[2]
                    F += dF
                    if F > best_F + 1e-12:
                        best_F = F
                        for r in range(dim):
                            best[r] = n[r]
    return best_F, best_arr


def measure_vertex_inplace(cnp.uint8_t[:, ::1] E, Py_ssize_t vertex):
    """Cut ``vertex`` out of the network and fully connect its former neighbours."""
    cdef Py_ssize_t L = E.shape[0]
    cdef Py_ssize_t i, j, cnt = 0
    nb_arr = np.empty(L, dtype=np.intp)
    cdef Py_ssize_t[::1] nb = nb_arr
    for i in range(L):
        if E[vertex, i]:
            nb[cnt] = i
            cnt += 1
    for i in range(cnt):
        for j in range(cnt):
            if i != j:
                E[nb[i], nb[j]] = 1
    for i in range(L):
        E[vertex, i] = 0
        E[i, vertex] = 0


def distance_profile(const cnp.uint8_t[:, ::1] E):
    """Bond count per ring distance over unordered pairs; index d = 0..L//2."""
    cdef Py_ssize_t L = E.shape[0]
    cdef Py_ssize_t i, j, d
    out = np.zeros(L // 2 + 1, dtype=np.int64)
    cdef cnp.int64_t[::1] cnt = out
    for i in range(L):
        for j in range(i + 1, L):
            if E[i, j]:
                d = j - i
                if L - d < d:
                    d = L - d
                cnt[d] += 1
    return out
