"""Monte Carlo sampling of measurement-altered ensembles.

Each sample draws a Bernoulli(p) mask of measured sites, assigns outcomes
according to the protocol, projects the initial covariance and evaluates the
requested witnesses.  Sample ``k`` at grid point ``p_idx`` uses its own PCG64
stream derived from ``SeedSequence(seed, spawn_key=(p_idx, k))``, and
statistics are reduced in sample order, so results do not depend on how
samples are scheduled across workers.
"""

import enum
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from threadpoolctl import threadpool_limits

from . import gaussian
from .errors import BadParameter, ConfigInvalid, DensityOutOfRange, NullProjection, PurityDrift
from .states import IsingParams, NonHermitianParams, build_ising_ground_state, build_nh_stationary_state
from .witnesses import AnnealingConfig, maximize_qfi

log = logging.getLogger(__name__)

RNG_ALGORITHM = "numpy.PCG64/SeedSequence(seed, spawn_key=(p_index, sample))"
ANNEAL_KEY = 0xA11EA1
QFI_MAX_L = 128
FULL_PURITY_MAX_DIM = 512


class Protocol(enum.Enum):
    UP = "up"
    DOWN = "down"
    BORN = "born"

    @classmethod
    def parse(cls, text):
        key = str(text).strip().lower().replace("_", "-")
        aliases = {
            "up": cls.UP, "forced-up": cls.UP, "forcedup": cls.UP,
            "down": cls.DOWN, "forced-down": cls.DOWN, "forceddown": cls.DOWN,
            "born": cls.BORN, "born-rule": cls.BORN, "bornrule": cls.BORN,
        }
        if key not in aliases:
            raise ValueError(f"unknown protocol {text!r}")
        return aliases[key]


@dataclass(frozen=True, eq=False)
class MeasurementString:
    """Per-site record ``m_j`` in {-1, 0, +1} (0 = not measured)."""

    m: np.ndarray

    def __post_init__(self):
        m = np.array(self.m, dtype=np.int8, copy=True)
        if m.ndim != 1 or not np.isin(m, (-1, 0, 1)).all():
            raise BadParameter("measurement string entries must be -1, 0 or +1")
        m.setflags(write=False)
        object.__setattr__(self, "m", m)

    @property
    def L(self):
        return self.m.size

    @property
    def sites(self):
        return np.flatnonzero(self.m)

    def compatible_with(self, protocol):
        if protocol is Protocol.UP:
            return not np.any(self.m == -1)
        if protocol is Protocol.DOWN:
            return not np.any(self.m == 1)
        return True


class Accumulator:
    """Streaming count, mean and sum of squared deviations (Welford); mergeable (Chan et al.)."""

    __slots__ = ("n", "mean", "m2")

    def __init__(self, n=0, mean=0.0, m2=0.0):
        self.n = n
        self.mean = mean
        self.m2 = m2

    def add(self, x):
        self.n += 1
        delta = x - self.mean
        self.mean += delta / self.n
        self.m2 += delta * (x - self.mean)

    def merge(self, other):
        if other.n == 0:
            return Accumulator(self.n, self.mean, self.m2)
        if self.n == 0:
            return Accumulator(other.n, other.mean, other.m2)
        n = self.n + other.n
        delta = other.mean - self.mean
        mean = self.mean + delta * other.n / n
        m2 = self.m2 + other.m2 + delta * delta * self.n * other.n / n
        return Accumulator(n, mean, m2)

    @property
    def variance(self):
        return self.m2 / (self.n - 1) if self.n > 1 else 0.0

    @property
    def stderr(self):
        return math.sqrt(self.m2 / (self.n * (self.n - 1))) if self.n > 1 else 0.0

    def __repr__(self):
        return f"Accumulator(n={self.n}, mean={self.mean!r}, stderr={self.stderr!r})"


@dataclass
class EnsembleStats:
    """Accumulators keyed by ``(witness, param)`` plus rejected-sample bookkeeping."""

    cells: dict = field(default_factory=dict)
    n_rejected: int = 0
    rejections: list = field(default_factory=list)

    def add(self, key, value):
        self.cells.setdefault(key, Accumulator()).add(value)

    def merge(self, other):
        out = EnsembleStats(n_rejected=self.n_rejected + other.n_rejected,
                            rejections=self.rejections + other.rejections)
        for key in sorted(set(self.cells) | set(other.cells)):
            out.cells[key] = self.cells.get(key, Accumulator()).merge(other.cells.get(key, Accumulator()))
        return out


@dataclass(frozen=True)
class WitnessSpec:
    """One witness family: ``kind`` in {"ee", "negativity", "qfi"} and its parameter list.

    ``params`` are interval lengths for ``ee`` and pair distances for
    ``negativity``; ``qfi`` takes no parameters.
    """

    kind: str
    params: tuple = ()

    def __post_init__(self):
        if self.kind not in ("ee", "negativity", "qfi"):
            raise ConfigInvalid("witness", f"unknown witness {self.kind!r}")


@dataclass(frozen=True)
class RunDescription:
    """Everything needed to reproduce an ensemble run."""

    L: int
    h: float
    protocol: Protocol
    p_grid: tuple
    witnesses: tuple
    samples: int
    seed: int
    J: float = 1.0
    gamma: float | None = None
    ee_positions: int = 8
    annealing: AnnealingConfig = AnnealingConfig()
    allow_large_qfi: bool = False

    def __post_init__(self):
        if self.samples < 1:
            raise ConfigInvalid("samples", "must be at least 1")
        for p in self.p_grid:
            if not 0 <= p <= 1:
                raise ConfigInvalid("p", f"density {p} outside [0, 1]")
        for w in self.witnesses:
            if w.kind == "ee" and any(not 0 < ell <= self.L for ell in w.params):
                raise ConfigInvalid("witness.ee", f"interval lengths must lie in 1..{self.L}")
            if w.kind == "negativity" and any(not 0 < d < self.L for d in w.params):
                raise ConfigInvalid("witness.negativity", f"distances must lie in 1..{self.L - 1}")
            if w.kind == "qfi" and self.L > QFI_MAX_L and not self.allow_large_qfi:
                raise ConfigInvalid("witness.qfi", f"QFI limited to L <= {QFI_MAX_L} (set allow_large_qfi)")
        try:
            IsingParams(self.L, self.h, self.J)
            if self.gamma is not None:
                NonHermitianParams(IsingParams(self.L, self.h, self.J), self.gamma)
        except ValueError as exc:
            raise ConfigInvalid("model", str(exc)) from exc

    def initial_state(self):
        ising = IsingParams(self.L, self.h, self.J)
        if self.gamma is None:
            return build_ising_ground_state(ising)
        return build_nh_stationary_state(NonHermitianParams(ising, self.gamma))


def sample_rng(seed, p_index, sample):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(p_index, sample))))


def anneal_rng(seed):
    """Annealing stream shared by all samples of a run (independent of the sample streams)."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, ANNEAL_KEY])))


def sample_mask(p, L, rng):
    """Sites measured with independent probability ``p`` (one uniform per site, ascending)."""
    if not 0 <= p <= 1:
        raise DensityOutOfRange(f"density {p} outside [0, 1]")
    return np.flatnonzero(rng.random(L) < p)


def sample_string(protocol, state, mask, rng):
    """Assign outcomes on ``mask`` and project; returns ``(MeasurementString, state)``.

    Forced protocols raise NullProjection if the forced outcome is impossible.
    Born-rule outcomes are drawn site by site (ascending) from the
    conditional probabilities on the partially projected state.
    """
    mask = np.asarray(mask, dtype=np.intp)
    m = np.zeros(state.L, dtype=np.int8)
    if mask.size == 0:
        return MeasurementString(m), state
    if protocol is Protocol.BORN:
        outcomes, _ = gaussian.born_outcomes(state, mask, rng.random(mask.size))
    else:
        outcomes = np.full(mask.size, 1.0 if protocol is Protocol.UP else -1.0)
    post, _ = gaussian.project_sites(state, mask, outcomes)
    m[mask] = outcomes.astype(np.int8)
    return MeasurementString(m), post


def check_purity(state):
    """Re-antisymmetrise and check purity (probe vectors for very large chains)."""
    dim = state.gamma.shape[0]
    if dim <= FULL_PURITY_MAX_DIM:
        return gaussian.stabilize(state)
    g = 0.5 * (state.gamma - state.gamma.T)
    probe = np.random.default_rng(dim).normal(size=(dim, 4))
    drift = float(np.max(np.abs(g @ (g @ probe) + probe)) / np.max(np.abs(probe)))
    if drift > gaussian.PURITY_TOL:
        raise PurityDrift(drift)
    return gaussian.MajoranaCovariance(g, pure=state.pure)


def evaluate_witnesses(state, description, anneal_seed_rng=None):
    """Witness values of one state as ``{(kind, param): value}``."""
    out = {}
    for w in description.witnesses:
        if w.kind == "ee":
            for ell in w.params:
                out[("ee", ell)] = gaussian.mean_entanglement_entropy(state, int(ell), description.ee_positions)
        elif w.kind == "negativity":
            for d in w.params:
                out[("negativity", d)] = float(np.mean(gaussian.pair_negativities(state, int(d))))
        elif w.kind == "qfi":
            corr = gaussian.spin_correlators(state)
            rng = anneal_seed_rng if anneal_seed_rng is not None else anneal_rng(description.seed)
            fq, _ = maximize_qfi(corr, description.annealing, rng)
            out[("qfi", 0)] = fq
    return out


def run_sample(description, state0, p_index, sample):
    """One Monte Carlo sample; returns ``("ok", values)`` or ``("rejected", reason)``."""
    p = description.p_grid[p_index]
    rng = sample_rng(description.seed, p_index, sample)
    mask = sample_mask(p, state0.L, rng)
    try:
        _, state = sample_string(description.protocol, state0, mask, rng)
        state = check_purity(state)
    except NullProjection as exc:
        return "rejected", {"p_index": p_index, "sample": sample, "site": exc.site, "reason": "NullProjection"}
    except PurityDrift as exc:
        return "rejected", {"p_index": p_index, "sample": sample, "site": None, "reason": f"PurityDrift {exc.drift:.2e}"}
    return "ok", evaluate_witnesses(state, description)


_WORKER = {}


def _init_worker(description, gamma):
    _WORKER["description"] = description
    _WORKER["state"] = gaussian.MajoranaCovariance(gamma)
    threadpool_limits(1)


def _run_chunk(tasks):
    description, state = _WORKER["description"], _WORKER["state"]
    return [run_sample(description, state, p_idx, k) for p_idx, k in tasks]


def _chunks(tasks, size):
    return [tasks[i:i + size] for i in range(0, len(tasks), size)]


def run_ensemble(description, workers=1, state0=None):
    """Run every ``(p, sample)`` task; returns ``(stats_per_p, metadata)``.

    ``stats_per_p`` is a list of :class:`EnsembleStats`, one per grid point.
    """
    state0 = state0 if state0 is not None else description.initial_state()
    tasks = [(i, k) for i in range(len(description.p_grid)) for k in range(description.samples)]
    if workers <= 1:
        with threadpool_limits(1):
            results = [run_sample(description, state0, i, k) for i, k in tasks]
    else:
        chunk = max(1, len(tasks) // (4 * workers))
        with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker,
                                 initargs=(description, np.asarray(state0.gamma))) as pool:
            results = [r for part in pool.map(_run_chunk, _chunks(tasks, chunk)) for r in part]
    stats = [EnsembleStats() for _ in description.p_grid]
    for (i, _), (status, payload) in zip(tasks, results):
        if status == "ok":
            for key, value in payload.items():
                stats[i].add(key, value)
        else:
            stats[i].n_rejected += 1
            stats[i].rejections.append(payload)
            log.warning("rejected sample %s", payload)
    metadata = {"rng": RNG_ALGORITHM, "seed": description.seed, "tasks": len(tasks),
                "rejections": [r for s in stats for r in s.rejections]}
    return stats, metadata
