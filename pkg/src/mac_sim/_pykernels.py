"""Pure-Python/numpy versions of the compiled kernels in ``_kernels.pyx``."""

import math

import numpy as np


def pfaffian(matrix):
    a = np.array(matrix, dtype=np.float64, copy=True)
    n = a.shape[0]
    if n % 2 == 1:
        return 0.0
    pf = 1.0
    for k in range(0, n - 1, 2):
        kp = k + 1 + int(np.argmax(np.abs(a[k + 1:, k])))
        if kp != k + 1:
            a[[k + 1, kp], k:] = a[[kp, k + 1], k:]
            a[k:, [k + 1, kp]] = a[k:, [kp, k + 1]]
            pf = -pf
        if a[k + 1, k] == 0.0:
            return 0.0
        piv = a[k, k + 1]
        pf *= piv
        if k + 2 < n:
            tau = a[k, k + 2:] / piv
            col = a[k + 2:, k + 1]
            a[k + 2:, k + 2:] += np.outer(tau, col) - np.outer(col, tau)
    return float(pf)


def pfaffian_stack(matrices):
    matrices = np.asarray(matrices, dtype=np.float64)
    return np.array([pfaffian(m) for m in matrices])


def anneal_qfi(K, n, temps, moves, sites, thetas, axes, uniforms, xz):
    dim = K.shape[0]
    v = K @ n
    F = float(n @ v)
    best_F = F
    best = n.copy()
    for t, T in enumerate(temps):
        v = K @ n
        F = float(n @ v)
        for m in range(moves):
            idx = t * moves + m
            j = int(sites[idx])
            sl = slice(3 * j, 3 * j + 3)
            nold = n[sl].copy()
            th = thetas[idx]
            if xz:
                tan = np.array([-nold[2], 0.0, nold[0]])
            else:
                u = axes[idx]
                tan = u - (u[0] * nold[0] + u[1] * nold[1] + u[2] * nold[2]) * nold
                norm = math.sqrt(tan[0] ** 2 + tan[1] ** 2 + tan[2] ** 2)
                if norm < 1e-12:
                    continue
                tan = tan / norm
            nnew = math.cos(th) * nold + math.sin(th) * tan
            nnew /= math.sqrt(nnew[0] ** 2 + nnew[1] ** 2 + nnew[2] ** 2)
            dlt = nnew - nold
            dF = 2.0 * float(dlt @ v[sl]) + float(dlt @ K[sl, sl] @ dlt)
            if dF >= 0.0 or uniforms[idx] < math.exp(dF / T):
                n[sl] = nnew
                v += K[:, sl] @ dlt
                F += dF
                if F > best_F + 1e-12:
                    best_F = F
                    best = n.copy()
    return best_F, best


def measure_vertex_inplace(E, vertex):
    nb = np.flatnonzero(E[vertex])
    if nb.size:
        E[np.ix_(nb, nb)] = 1
        E[nb, nb] = 0
    E[vertex, :] = 0
    E[:, vertex] = 0


def distance_profile(E):
    L = E.shape[0]
    i, j = np.nonzero(np.triu(E, 1))
    d = j - i
    d = np.minimum(d, L - d)
    return np.bincount(d, minlength=L // 2 + 1).astype(np.int64)
