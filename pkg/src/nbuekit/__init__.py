"""Ageing-class analysis of lifetime distributions through the mean residual life.

Converts between mean residual life and survival representations, computes
moments, checks the NBUE and NWBUE moment and tail bounds, and classifies
distributions as NBUE, NWUE, NWBUE or IDMRL with located change points.
"""

__version__ = "0.1.0"

from .ageing import (
    AgeingClass,
    ClassVerdict,
    MRLShape,
    MRLShapeVerdict,
    MRLValidityReport,
    classify_crossing,
    classify_mrl_shape,
    resolve_idmrl,
    validate_mrl,
)
from .bounds import (
    BoundId,
    BoundReport,
    check_phi_inequality,
    deficiency,
    nbue_bounds,
    nbue_moment_bound,
    nwbue_bounds,
    tail_bound_check,
)
from .convergence import (
    exponential_mean_sequence,
    run_convergence,
    weibull_shape_sequence,
)
from .distributions import (
    EquilibriumDensity,
    LifeDistribution,
    MRLSpec,
    Segment,
    catalog,
    from_mrl,
    mean_of,
    moment,
    mrl_catalog,
    mrl_of,
)
from .numerics import find_root, gamma_fn, integrate, integrate_semi_infinite, scan_sign_pattern
