"""``mac-sim`` batch front-end.

    mac-sim <ensemble|toy-model|ground-state|oracle-check> --config FILE [--set key=value ...] [--workers N]

Exit codes: 0 success, 1 configuration error, 2 runtime error, 3 oracle-check failure.
"""

import argparse
import csv
import io
import json
import logging
import os
import sys
import time

import numpy as np

from . import __version__, gaussian, kernels
from .config import parse_config
from .ensemble import RNG_ALGORITHM, anneal_rng, run_ensemble
from .errors import ConfigInvalid, InsufficientPoints, MacSimError
from .states import IsingParams, NonHermitianParams, build_ising_ground_state, build_nh_stationary_state, ising_energy
from .toy import run_toy_grid
from .witnesses import fit_decay_length, fit_effective_central_charge, maximize_qfi

log = logging.getLogger("mac_sim")

RESULT_HEADER = ["kind", "protocol", "h", "gamma", "p", "L", "witness", "param",
                 "mean", "stderr", "n_samples", "n_rejected"]
FIT_HEADER = ["quantity", "p", "estimate", "residual", "window_lo", "window_hi"]

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_ORACLE = 0, 1, 2, 3


def _num(x):
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _csv_text(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _result_row(cfg, protocol, p, witness, param, mean, stderr, n, rejected, h=None, gamma=None):
    return [cfg.kind, protocol, _num(h), _num(gamma), _num(p), _num(cfg.L), witness, _num(param),
            _num(mean), _num(stderr), _num(n), _num(rejected)]


def _decay_fits(quantity, p, rows, d_min):
    try:
        fit = fit_decay_length(rows, d_min)
    except InsufficientPoints as exc:
        log.warning("no %s fit at p=%s: %s", quantity, p, exc)
        return []
    return [[quantity, _num(p), _num(fit.estimate), _num(fit.residual), _num(fit.window[0]), _num(fit.window[1])]]


def _cc_fit(p, rows, L, ell_min):
    try:
        fit = fit_effective_central_charge(rows, L, ell_min)
    except InsufficientPoints as exc:
        log.warning("no central-charge fit at p=%s: %s", p, exc)
        return []
    return [["c_eff", _num(p), _num(fit.estimate), _num(fit.residual), _num(fit.window[0]), _num(fit.window[1])]]


def execute_ensemble(cfg, workers):
    desc = cfg.description()
    stats, meta = run_ensemble(desc, workers=workers)
    rows, fits = [], []
    for i, p in enumerate(desc.p_grid):
        st = stats[i]
        for w in desc.witnesses:
            params = w.params if w.params else (0,)
            for param in params:
                acc = st.cells.get((w.kind, param))
                n = acc.n if acc else 0
                mean = acc.mean if acc and n else float("nan")
                se = acc.stderr if acc else float("nan")
                rows.append(_result_row(cfg, desc.protocol.value, p, w.kind, param, mean, se, n,
                                        st.n_rejected, cfg.h, cfg.gamma))
        if cfg.fit_decay_length and cfg.negativity_distances:
            data = [(d, st.cells[("negativity", d)].mean, st.cells[("negativity", d)].stderr)
                    for d in cfg.negativity_distances if ("negativity", d) in st.cells]
            fits += _decay_fits("xi_negativity", p, data, cfg.fit_d_min)
        if cfg.fit_central_charge and cfg.ee_lengths:
            data = [(ell, st.cells[("ee", ell)].mean) for ell in cfg.ee_lengths if ("ee", ell) in st.cells]
            fits += _cc_fit(p, data, cfg.L, cfg.fit_ell_min)
    return rows, fits, {"rejections": meta["rejections"]}


def execute_toy(cfg, workers):
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(cfg.seed)))
    profiles = run_toy_grid(cfg.L, cfg.xi0, cfg.p_grid, cfg.samples, rng, cfg.include_measured)
    rows, fits = [], []
    for prof in profiles:
        for d, m, s in prof.rows():
            rows.append(_result_row(cfg, "none", prof.p, "bond_occupation", d, m, s, prof.samples, 0))
        fits += _decay_fits("xi_toy", prof.p, prof.rows(), cfg.fit_d_min)
    return rows, fits, {"xi0": cfg.xi0}


def execute_ground_state(cfg, workers):
    ising = IsingParams(cfg.L, cfg.h, cfg.J)
    if cfg.gamma is None:
        state = build_ising_ground_state(ising)
    else:
        state = build_nh_stationary_state(NonHermitianParams(ising, cfg.gamma))
    row = lambda w, param, val: _result_row(cfg, "none", 0.0, w, param, val, 0.0, 1, 0, cfg.h, cfg.gamma)  # noqa: E731
    rows = []
    if cfg.gamma is None:
        rows.append(row("energy", 0, ising_energy(state, ising)))
    rows.append(row("sz", 0, float(np.mean(gaussian.magnetizations(state)))))
    lengths = cfg.ee_lengths or tuple(range(1, cfg.L // 2 + 1))
    ee = [(ell, gaussian.entanglement_entropy(state, 0, ell)) for ell in lengths]
    rows += [row("ee", ell, s) for ell, s in ee]
    for d in cfg.negativity_distances:
        rows.append(row("negativity", d, float(np.mean(gaussian.pair_negativities(state, d)))))
    if cfg.qfi:
        fq, _ = maximize_qfi(gaussian.spin_correlators(state), cfg.annealing, anneal_rng(cfg.seed))
        rows.append(row("qfi", 0, fq))
    fits = _cc_fit(0.0, ee, cfg.L, cfg.fit_ell_min) if cfg.fit_central_charge else []
    return rows, fits, {}


def execute_oracle(cfg, workers):
    from .oracle.check import run_oracle_checks

    results = run_oracle_checks(cfg.L, cfg.seed)
    rows = [[r.name, _num(r.error), _num(r.tolerance), "pass" if r.passed else "FAIL"] for r in results]
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}  error={r.error:.3e}  tol={r.tolerance:.1e}")
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} oracle checks passed")
    return rows, [], {"failed": failed, "checks": len(results)}


EXECUTORS = {
    "ensemble": execute_ensemble,
    "toy-model": execute_toy,
    "ground-state": execute_ground_state,
    "oracle-check": execute_oracle,
}


def _write_outputs(files):
    """Write ``{path: text}`` atomically; on failure remove everything written."""
    written = []
    try:
        for path, text in files.items():
            directory = os.path.dirname(path)
            if directory:
                os.makedirs(directory, exist_ok=True)
            tmp = path + ".tmp"
            with open(tmp, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            os.replace(tmp, path)
            written.append(path)
    except BaseException:
        for path in written + [p + ".tmp" for p in files]:
            if os.path.exists(path):
                os.remove(path)
        raise


def execute(cfg, workers=1):
    """Run a validated configuration and write its files; returns the exit status."""
    start = time.time()
    rows, fits, extra = EXECUTORS[cfg.kind](cfg, workers)
    prefix = cfg.output
    files = {}
    if cfg.kind == "oracle-check":
        files[prefix + "_oracle.csv"] = _csv_text(["check", "error", "tolerance", "status"], rows)
    else:
        files[prefix + ".csv"] = _csv_text(RESULT_HEADER, rows)
        if fits:
            files[prefix + "_fits.csv"] = _csv_text(FIT_HEADER, fits)
    meta = {
        "config": cfg.echo(),
        "seed": cfg.seed,
        "rng": RNG_ALGORITHM,
        "version": __version__,
        "kernel_backend": kernels.BACKEND,
        "workers": workers,
        "wall_time_s": time.time() - start,
        **extra,
    }
    files[prefix + ".json"] = json.dumps(meta, indent=2, sort_keys=True, default=str) + "\n"
    _write_outputs(files)
    if cfg.kind == "oracle-check" and extra["failed"]:
        return EXIT_ORACLE
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="mac-sim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in EXECUTORS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="configuration file")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a configuration value (repeatable)")
        sp.add_argument("--workers", type=int, default=1, help="worker processes for sampling")
    return parser


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
        cfg = parse_config(text, kind=args.command, overrides=args.set)
        if args.workers < 1:
            raise ConfigInvalid("workers", "must be at least 1")
    except (ConfigInvalid, OSError, UnicodeDecodeError) as exc:
        print(f"mac-sim: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return execute(cfg, args.workers)
    except (MacSimError, ArithmeticError, ValueError, RuntimeError, OSError) as exc:
        print(f"mac-sim: runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
