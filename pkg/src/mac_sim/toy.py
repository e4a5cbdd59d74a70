"""Binary entanglement-network toy model on a ring.

Vertices are spins, bonds mark entangled pairs.  Measuring a vertex removes
all of its bonds and fully connects its former neighbours (monogamy-driven
recoupling).  Eliminating a set of vertices connects two survivors exactly
when a path joins them through eliminated vertices only, so the final
network does not depend on the measurement order.
"""

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from . import kernels
from .ensemble import Accumulator
from .errors import BadXi0, DensityOutOfRange, VertexOutOfRange


@dataclass(frozen=True, eq=False)
class BondNetwork:
    """Symmetric 0/1 adjacency ``E`` (uint8, zero diagonal) and the initial range ``xi0``."""

    E: np.ndarray
    xi0: int

    def __post_init__(self):
        E = np.array(self.E, dtype=np.uint8, copy=True)
        if E.ndim != 2 or E.shape[0] != E.shape[1]:
            raise ValueError("adjacency must be square")
        if np.any(E != E.T) or np.any(np.diag(E)):
            raise ValueError("adjacency must be symmetric with zero diagonal")
        E.setflags(write=False)
        object.__setattr__(self, "E", E)

    @property
    def L(self):
        return self.E.shape[0]


def ring_distance(L):
    i = np.arange(L)
    d = np.abs(i[:, None] - i[None, :])
    return np.minimum(d, L - d)


def init_network(L, xi0):
    """Bonds between all pairs at ring distance ``<= xi0``."""
    if not 1 <= xi0 < L / 2:
        raise BadXi0(f"need 1 <= xi0 < L/2, got xi0={xi0} with L={L}")
    d = ring_distance(L)
    return BondNetwork(((d > 0) & (d <= xi0)).astype(np.uint8), xi0)


def measure_vertex(network, n):
    """Network after measuring vertex ``n``."""
    if not 0 <= n < network.L:
        raise VertexOutOfRange(f"vertex {n} outside 0..{network.L - 1}")
    E = np.array(network.E, dtype=np.uint8, order="C")
    kernels.measure_vertex_inplace(E, int(n))
    return BondNetwork(E, network.xi0)


def measure_vertices(network, vertices):
    E = np.array(network.E, dtype=np.uint8, order="C")
    for n in vertices:
        if not 0 <= n < network.L:
            raise VertexOutOfRange(f"vertex {n} outside 0..{network.L - 1}")
        kernels.measure_vertex_inplace(E, int(n))
    return BondNetwork(E, network.xi0)


def pair_counts(L):
    """Number of unordered ring pairs at each distance ``0 .. L//2``."""
    counts = np.full(L // 2 + 1, L, dtype=np.int64)
    counts[0] = 0
    if L % 2 == 0:
        counts[L // 2] = L // 2
    return counts


def bond_profile(network, measured=None):
    """Mean bond occupation per ring distance ``d = 1 .. L//2``.

    With ``measured`` given, pairs touching a measured vertex are excluded
    from both numerator and denominator.
    """
    L = network.L
    if measured is None or len(measured) == 0:
        return kernels.distance_profile(network.E)[1:] / pair_counts(L)[1:]
    keep = np.ones(L, dtype=bool)
    keep[np.asarray(measured)] = False
    E = np.ascontiguousarray(network.E * np.outer(keep, keep).astype(np.uint8))
    bonds = kernels.distance_profile(E)[1:]
    d = ring_distance(L)
    iu = np.triu_indices(L, 1)
    ok = keep[iu[0]] & keep[iu[1]]
    pairs = np.bincount(d[iu][ok], minlength=L // 2 + 1)[1:]
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(pairs > 0, bonds / np.maximum(pairs, 1), np.nan)


@dataclass(frozen=True)
class ToyProfile:
    """Sample-averaged bond occupation ``mean[d-1]`` with its standard error."""

    p: float
    distances: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    samples: int

    def rows(self):
        return [(int(d), float(m), float(s)) for d, m, s in zip(self.distances, self.mean, self.stderr)]


def run_toy_grid(L, xi0, p_grid, samples, rng, include_measured=True):
    """Profiles for several densities sharing one uniform draw per vertex and sample.

    The measured set at density ``p`` is ``{n : u_n < p}``, so it grows
    monotonically with ``p`` inside each sample.
    """
    for p in p_grid:
        if not 0 <= p <= 1:
            raise DensityOutOfRange(f"density {p} outside [0, 1]")
    base = init_network(L, xi0)
    n_d = L // 2
    accs = [[Accumulator() for _ in range(n_d)] for _ in p_grid]
    for _ in range(samples):
        u = rng.random(L)
        for a, p in enumerate(p_grid):
            measured = np.flatnonzero(u < p)
            net = measure_vertices(base, measured)
            prof = bond_profile(net, None if include_measured else measured)
            for k in range(n_d):
                if not np.isnan(prof[k]):
                    accs[a][k].add(float(prof[k]))
    out = []
    dist = np.arange(1, n_d + 1)
    for p, acc in zip(p_grid, accs):
        out.append(ToyProfile(
            p=float(p),
            distances=dist,
            mean=np.array([c.mean if c.n else np.nan for c in acc]),
            stderr=np.array([c.stderr for c in acc]),
            samples=samples,
        ))
    return out


def run_toy_ensemble(L, xi0, p, samples, rng, include_measured=True):
    """Bond occupation vs ring distance averaged over ``samples`` random measured sets."""
    return run_toy_grid(L, xi0, [p], samples, rng, include_measured)[0]


def exact_toy_profile(L, xi0, p):
    """Exact ensemble average by enumerating every measured subset (small ``L`` only)."""
    if L > 16:
        raise ValueError("exact enumeration is limited to L <= 16")
    base = init_network(L, xi0)
    total = np.zeros(L // 2)
    for k in range(L + 1):
        weight = p ** k * (1 - p) ** (L - k)
        if weight == 0:
            continue
        for subset in combinations(range(L), k):
            total += weight * bond_profile(measure_vertices(base, subset))
    return total
