"""Numerical lab for C-maximal regularity on truncated weighted sequence spaces."""

from .integration import (GridFunction, OperatorPath, Partition, convolve, riemann_integral,
                          rs_integral)
from .lcs_core import SeminormFamily, as_vector, family_sup, seminorm_eval, unit
from .operators import BoundedOp, DiagonalGenerator, DomainCertificate, in_domain
from .regularity import (MildSolution, RegularityVerdict, a_convolution, admissibility_check,
                         maxreg_check, phi_r, probe_battery, strict_residual, travis_extract,
                         travis_function)
from .semigroups import Semigroup, equicontinuity_constants
from .semivariation import SVEstimate, sv_estimate, sv_partition

__version__ = "0.1.0"

__all__ = [
    "BoundedOp", "DiagonalGenerator", "DomainCertificate", "GridFunction", "MildSolution",
    "OperatorPath", "Partition", "RegularityVerdict", "SVEstimate", "Semigroup", "SeminormFamily",
    "a_convolution", "admissibility_check", "as_vector", "convolve", "equicontinuity_constants",
    "family_sup", "in_domain", "maxreg_check", "phi_r", "probe_battery", "riemann_integral",
    "rs_integral", "seminorm_eval", "strict_residual", "sv_estimate", "sv_partition",
    "travis_extract", "travis_function", "unit",
]
