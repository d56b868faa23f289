"""Zames-Falb multiplier certification for Lur'e feedback loops.

Submodules:

* :mod:`zfcert.lti` - rational transfer functions, Hurwitz tests, frequency grids
* :mod:`zfcert.multiplier` - kernel bases, multiplier candidates, Pi matrices
* :mod:`zfcert.search` - LP synthesis, verification, gain bounds
* :mod:`zfcert.classes` - uncertainty representatives and membership tests
* :mod:`zfcert.counterexample` - plants with a stability/multiplier gap
* :mod:`zfcert.cli` - command-line entry point
"""

from .errors import *  # noqa: F401,F403
from .lti import (
    FrequencyGrid,
    Polynomial,
    RationalTF,
    evaluate,
    hinf_norm_estimate,
    in_rh_inf,
    interval_clearance,
    is_hurwitz,
    load_plant,
    nyquist_samples,
    routh_hurwitz,
)
from .multiplier import (
    KernelBasis,
    MultiplierCandidate,
    PiMatrix,
    SlopeBand,
    build_pi_monotone,
    build_pi_slope,
    condition_margin,
    l1_budget,
    z_transform_value,
)
from .search import (
    Certificate,
    SearchProblem,
    constraint_table,
    gain_bound,
    infeasibility_report,
    synthesize,
    verify,
)
from .classes import (
    LtiUncertainty,
    SignalTrace,
    StaticNonlinearity,
    apply,
    falsify_nonmonotone,
    falsify_noneven_odd,
    homotopy_sweep,
    iqc_inner_product,
    lti_membership_test,
    membership_test_static,
)
from .counterexample import oshea_monotone_plant, oshea_slope_plant, run_counterexample

__version__ = "0.1.0"
