"""Embedded eigenvalues of the 1D Schrodinger operator by binary Darboux transformation.

Thin wrapper over the C++ core. Potentials are the example seed with coupling
``rho``; inserted states are ``(omega, alpha)`` pairs.
"""

from ._core import (
    InputError,
    NumericalError,
    __version__,
    bound_state,
    dyson_q,
    insert,
    positon,
    q_plus1,
    q_plus_evolved,
    q_seed,
    q_sym,
    reflection_closed,
    round_trip,
    run,
    scatter,
    soliton,
    transmission_closed,
    verify_example,
)

__all__ = [
    "InputError",
    "NumericalError",
    "__version__",
    "bound_state",
    "dyson_q",
    "insert",
    "positon",
    "q_plus1",
    "q_plus_evolved",
    "q_seed",
    "q_sym",
    "reflection_closed",
    "round_trip",
    "run",
    "scatter",
    "soliton",
    "transmission_closed",
    "verify_example",
]
