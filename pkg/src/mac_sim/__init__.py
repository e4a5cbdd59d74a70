"""Measurement-altered Ising chains with fermionic Gaussian states.

Gaussian-state primitives live in :mod:`mac_sim.gaussian`, initial states in
:mod:`mac_sim.states`, witnesses and fits in :mod:`mac_sim.witnesses`,
ensemble sampling in :mod:`mac_sim.ensemble`, the bond-network toy model in
:mod:`mac_sim.toy` and the dense reference in :mod:`mac_sim.oracle`.
"""

__version__ = "0.1.0"

from .gaussian import (  # noqa: E402
    CorrelatorTensor,
    MajoranaCovariance,
    entanglement_entropy,
    fermionic_negativity,
    majorana_monomial_expectation,
    outcome_probability,
    pfaffian,
    project_site,
    spin_correlators,
    stabilize,
    transverse_magnetization,
    two_mode_reduced_density,
)
from .states import (  # noqa: E402
    IsingParams,
    NonHermitianParams,
    build_ising_ground_state,
    build_nh_stationary_state,
    critical_gamma,
)
