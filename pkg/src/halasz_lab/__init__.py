"""Numerical laboratory for logarithmic means of completely multiplicative functions.

The central quantity is the discrepancy

    Delta(x) = L_f(x) - M_g(w0 x)/(w0 x),    L_f(x) = sum_{n<=x} f(n)/n,  g = 1*f,

with the shift w0 = e^{1-gamma}.  Submodules: ``primes`` (sieve), ``multfun``
(function families), ``sums``, ``functionals``, ``zeta``, ``random_model``,
``search``, ``verifier`` and ``cli``.
"""

from .constants import EULER_GAMMA, LOG_EXPONENT, STIELTJES_GAMMA1, W0
from .errors import LabError
from .multfun import FunctionSpec, ValueTable, build_spec, materialize, spec
from .primes import PrimeTable, sieve
from .sums import delta, log_sum, mg_floor

__version__ = "0.1.0"

__all__ = ["EULER_GAMMA", "LOG_EXPONENT", "STIELTJES_GAMMA1", "W0", "LabError", "FunctionSpec", "ValueTable",
           "build_spec", "materialize", "spec", "PrimeTable", "sieve", "delta", "log_sum", "mg_floor"]
