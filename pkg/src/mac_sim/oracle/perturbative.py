"""Low-order perturbative ground states of the Ising ring, dense and symbolic.

Large field: expansion around ``|vac> = |up ... up>`` in powers of ``1/h``,
with defect states ``|j1, ..., jk> = prod sx_{jm} |vac>``.  Small field:
expansion around the x-basis GHZ state to first order in ``h``.
"""

from itertools import combinations

import numpy as np
import sympy

from ..errors import BadOrder, BadParameter, TooLarge
from .dense import MAX_L, apply_pauli, basis_state


def _ring_pairs(L):
    return [(i, (i + 1) % L) for i in range(L)]


def large_h_terms(L, order):
    """Defect sets and their coefficients as ``(defects, power of 1/h, prefactor)``."""
    if order not in (0, 1, 2):
        raise BadOrder(f"large-h expansion is available to order 2, got {order}")
    terms = [(frozenset(), 0, sympy.Integer(1))]
    if order >= 1:
        terms += [(frozenset(pr), 1, sympy.Rational(1, 4)) for pr in _ring_pairs(L)]
    if order >= 2:
        pairs = _ring_pairs(L)
        for p, q in combinations(pairs, 2):
            if not set(p) & set(q):
                terms.append((frozenset(p + q), 2, sympy.Rational(1, 16)))
        terms += [(frozenset((i, (i + 2) % L)), 2, sympy.Rational(1, 8)) for i in range(L)]
    return terms


def symbolic_expansion(L, order=2):
    """Large-h expansion as ``{defects: coefficient}`` with ``x = 1/h`` as a sympy symbol."""
    x = sympy.Symbol("x", positive=True)
    out = {}
    for defects, power, pref in large_h_terms(L, order):
        out[defects] = out.get(defects, 0) + pref * x ** power
    return out, x


def project_symbolic(expansion, n, s):
    """Keep the components compatible with ``sz_n = s`` (a defect is a down spin)."""
    keep = (lambda d: n in d) if s < 0 else (lambda d: n not in d)
    return {d: c for d, c in expansion.items() if keep(d)}


def order_counts(expansion, x, levels=2):
    """Number of components at the lowest ``levels`` powers of ``x`` present."""
    degrees = {}
    for c in expansion.values():
        deg = sympy.Poly(c, x).monoms()[-1][0]  # lowest power in the coefficient
        degrees[deg] = degrees.get(deg, 0) + 1
    lowest = sorted(degrees)[:levels]
    return [(p, degrees[p]) for p in lowest]


def _defect_state(L, defects):
    psi = basis_state([1] * L)
    for j in defects:
        psi = apply_pauli(psi, j, "x")
    return psi


def perturbative_state(L, h, order, phase="large-h"):
    """Normalized dense perturbative state (``phase`` is ``"large-h"`` or ``"small-h"``)."""
    if L > MAX_L:
        raise TooLarge(f"dense oracle limited to L <= {MAX_L}, got {L}")
    if phase == "large-h":
        psi = np.zeros(2 ** L, dtype=complex)
        for defects, power, pref in large_h_terms(L, order):
            psi += float(pref) * h ** (-power) * _defect_state(L, defects)
    elif phase == "small-h":
        if order not in (0, 1):
            raise BadOrder(f"small-h expansion is available to order 1, got {order}")
        psi = _ghz(L)
        if order == 1:
            for i in range(L):
                psi = psi + (h / 4) * apply_pauli(_ghz(L), i, "z")
    else:
        raise BadParameter(f"unknown phase {phase!r}")
    return psi / np.linalg.norm(psi)


def _ghz(L):
    """``(|+...+> + |-...->) / sqrt 2`` in the sx eigenbasis."""
    plus = np.array([1, 1]) / np.sqrt(2)
    minus = np.array([1, -1]) / np.sqrt(2)
    up = np.ones(1)
    dn = np.ones(1)
    for _ in range(L):
        up = np.kron(up, plus)
        dn = np.kron(dn, minus)
    return ((up + dn) / np.sqrt(2)).astype(complex)


def leading_components(psi, L, tol=1e-12):
    """Defect sets carrying the largest amplitude of a dense state."""
    amp = np.abs(psi)
    top = amp.max()
    out = []
    for idx in np.flatnonzero(amp >= top * (1 - 1e-9) - tol):
        out.append(frozenset(j for j in range(L) if (idx >> (L - 1 - j)) & 1))
    return out
