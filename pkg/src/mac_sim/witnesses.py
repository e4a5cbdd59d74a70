"""Entanglement witnesses built on spin correlators and entropies.

* quantum Fisher information of collective spin operators and its
  maximisation over local directions by simulated annealing;
* least-squares fits for the effective central charge and for exponential
  decay lengths.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from . import kernels
from .errors import BadParameter, DimensionMismatch, InsufficientPoints

UNIT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class DirectionField:
    """One unit 3-vector per site, stored as an ``(L, 3)`` array (columns x, y, z)."""

    n: np.ndarray

    def __post_init__(self):
        n = np.array(self.n, dtype=np.float64, copy=True)
        if n.ndim != 2 or n.shape[1] != 3:
            raise DimensionMismatch(f"directions must have shape (L, 3), got {n.shape}")
        norms = np.linalg.norm(n, axis=1)
        if np.any(np.abs(norms - 1) > UNIT_TOL):
            raise BadParameter("direction vectors must be unit length")
        n.setflags(write=False)
        object.__setattr__(self, "n", n)

    @property
    def L(self):
        return self.n.shape[0]

    @classmethod
    def uniform(cls, L, axis):
        n = np.zeros((L, 3))
        n[:, "xyz".index(axis)] = 1.0
        return cls(n)

    @classmethod
    def random(cls, L, rng, xz_plane=False):
        if xz_plane:
            phi = rng.uniform(0, 2 * np.pi, size=L)
            n = np.stack([np.cos(phi), np.zeros(L), np.sin(phi)], axis=1)
        else:
            n = rng.normal(size=(L, 3))
            n /= np.linalg.norm(n, axis=1, keepdims=True)
        return cls(n)


@dataclass(frozen=True)
class AnnealingConfig:
    """Geometric cooling schedule for :func:`maximize_qfi`.

    ``moves_per_temperature`` defaults to ``5 L``.  Proposals rotate one
    direction by a Gaussian angle of width ``step`` (radians).
    """

    T0: float = 1.0
    cooling: float = 0.95
    T_min: float = 1e-4
    moves_per_temperature: int | None = None
    step: float = 0.3
    restarts: int = 3
    xz_plane: bool = False

    def __post_init__(self):
        if not 0 < self.cooling < 1:
            raise BadParameter("cooling factor must lie in (0, 1)")
        if not 0 < self.T_min <= self.T0:
            raise BadParameter("need 0 < T_min <= T0")
        if self.restarts < 1:
            raise BadParameter("at least one restart is required")
        if self.step <= 0:
            raise BadParameter("step must be positive")

    def temperatures(self):
        count = int(np.floor(np.log(self.T_min / self.T0) / np.log(self.cooling))) + 1
        return self.T0 * self.cooling ** np.arange(count)


@dataclass(frozen=True)
class FitResult:
    estimate: float
    stderr: float
    residual: float
    window: tuple
    intercept: float = 0.0
    flags: tuple = field(default_factory=tuple)

    @property
    def power_law_suspect(self):
        return "PowerLawSuspect" in self.flags


def qfi(correlators, directions):
    """``F_Q = sum_{ij, ab} n_i^a n_j^b C^{ab}_{ij}``."""
    n = directions.n if isinstance(directions, DirectionField) else np.asarray(directions)
    if n.shape != (correlators.L, 3):
        raise DimensionMismatch(f"directions shape {n.shape} does not match L={correlators.L}")
    return float(np.einsum("ia,abij,jb->", n, correlators.C, n))


def _anneal_once(K, start, config, rng):
    L = start.shape[0]
    temps = config.temperatures()
    moves = config.moves_per_temperature or 5 * L
    total = temps.size * moves
    sites = rng.integers(0, L, size=total).astype(np.int64)
    thetas = rng.normal(0.0, config.step, size=total)
    axes = rng.normal(size=(total, 3))
    uniforms = rng.random(total)
    n = np.array(start, dtype=np.float64).reshape(-1)
    best_F, best = kernels.anneal_qfi(K, n, temps, moves, sites, thetas, axes, uniforms, config.xz_plane)
    return float(best_F), np.asarray(best).reshape(L, 3)


def maximize_qfi(correlators, config=None, rng=None):
    """Best QFI density ``F_Q / L`` found by simulated annealing, and its directions.

    The uniform x, y and z fields are always evaluated; restart 0 starts from
    the best of them and later restarts from random fields.  Each restart
    draws from its own child stream of ``rng``, so adding restarts never
    changes earlier ones.
    """
    config = config or AnnealingConfig()
    rng = rng if rng is not None else np.random.default_rng(0)
    L = correlators.L
    K = correlators.matrix()
    axes = ("x", "z") if config.xz_plane else ("x", "y", "z")
    seeds = [DirectionField.uniform(L, a) for a in axes]
    seed_vals = [qfi(correlators, s) for s in seeds]
    k0 = int(np.argmax(seed_vals))
    best_F, best_n = seed_vals[k0], seeds[k0].n
    children = rng.spawn(config.restarts)
    for r, child in enumerate(children):
        start = seeds[k0].n if r == 0 else DirectionField.random(L, child, config.xz_plane).n
        F, n = _anneal_once(K, start, config, child)
        if F > best_F:
            best_F, best_n = F, n
    n = best_n / np.linalg.norm(best_n, axis=1, keepdims=True)
    return best_F / L, DirectionField(n)


def chord_length(ell, L):
    return (L / np.pi) * np.sin(np.pi * np.asarray(ell, dtype=float) / L)


def fit_effective_central_charge(entropies, L, ell_min=8):
    """Fit ``S = (c/3) ln[(L/pi) sin(pi l / L)] + const`` over ``ell_min <= l <= L/2``."""
    data = np.asarray(entropies, dtype=float)
    if data.ndim != 2 or data.shape[1] != 2:
        raise InsufficientPoints("expected a list of (l, S) pairs")
    mask = (data[:, 0] >= ell_min) & (data[:, 0] <= L / 2)
    use = data[mask]
    if use.shape[0] < 4:
        raise InsufficientPoints(f"need at least 4 points with {ell_min} <= l <= L/2, got {use.shape[0]}")
    x = np.log(chord_length(use[:, 0], L))
    fit = stats.linregress(x, use[:, 1])
    resid = use[:, 1] - (fit.intercept + fit.slope * x)
    return FitResult(
        estimate=3 * fit.slope,
        stderr=3 * fit.stderr,
        residual=float(np.sqrt(np.mean(resid ** 2))),
        window=(float(use[:, 0].min()), float(use[:, 0].max())),
        intercept=float(fit.intercept),
    )


def usable_window(values, d_min=3):
    """Longest run of consecutive distances from the first usable one.

    A point is usable when ``mean > max(10 stderr, 1e-12)`` and ``d >= d_min``.
    """
    data = np.asarray(values, dtype=float)
    data = data[np.argsort(data[:, 0])]
    ok = (data[:, 1] > np.maximum(10 * data[:, 2], 1e-12)) & (data[:, 0] >= d_min)
    if not ok.any():
        return data[:0]
    first = int(np.argmax(ok))
    last = first
    while last + 1 < ok.size and ok[last + 1]:
        last += 1
    return data[first:last + 1]


def fit_decay_length(values, d_min=3):
    """Exponential decay length from ``(d, mean, stderr)`` rows.

    Regresses ``ln(mean)`` on ``d`` over :func:`usable_window`; ``xi = -1/slope``.
    The ``PowerLawSuspect`` flag is set when a ``ln-ln`` fit has at most half
    the residual.
    """
    use = usable_window(values, d_min)
    if use.shape[0] < 4:
        raise InsufficientPoints(f"need at least 4 usable points, got {use.shape[0]}")
    d, y = use[:, 0], np.log(use[:, 1])
    fit = stats.linregress(d, y)
    resid = np.sqrt(np.mean((y - fit.intercept - fit.slope * d) ** 2))
    flags = ()
    if d.min() > 0:
        plaw = stats.linregress(np.log(d), y)
        presid = np.sqrt(np.mean((y - plaw.intercept - plaw.slope * np.log(d)) ** 2))
        if 2 * presid <= resid:
            flags = ("PowerLawSuspect",)
    if fit.slope < 0:
        xi = -1.0 / fit.slope
        xi_err = fit.stderr / fit.slope ** 2
    else:
        xi, xi_err = np.inf, np.inf
        flags = flags + ("NonDecaying",)
    return FitResult(
        estimate=float(xi),
        stderr=float(xi_err),
        residual=float(resid),
        window=(float(d.min()), float(d.max())),
        intercept=float(fit.intercept),
        flags=flags,
    )
