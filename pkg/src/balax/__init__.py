"""Numerical tools for zero distributions of entire functions of exponential type.

Interval functions and block densities of sequences, Blaschke/Lindelof
type conditions, two-sided balayage onto the imaginary axis and genus-1
canonical products.
"""

__version__ = "0.1.0"

from .grids import ConditionVerdict, IntervalGrid, Verdict, stabilization
from .measures import AtomicCharge, Divisor, InputError, LineCharge, parse_atoms, read_atoms
from .logmetrics import (
    block_density,
    block_density_report,
    char_log_left,
    char_log_right,
    ibp_residual,
    interval_log,
    interval_log_bar,
    J_interval,
    J_tail,
    weighted_count,
)
from .conditions import (
    PiecewiseLinear,
    blaschke,
    fit_lipschitz_k,
    kahane_outer_density,
    lindelof_genus1,
    mr_compare,
    separated_from_axis,
    weak_blaschke_genus1,
)
from .balayage import (
    BalayageResult,
    balayage_genus0,
    balayage_genus1,
    function_balayage,
    lindelof_preservation_check,
    lipschitz_tail_check,
    mass_growth_check,
    omega,
    omega_genus1,
)
from .entire import (
    CanonicalProduct,
    ProgressionTail,
    check_a1_bound,
    check_a3,
    check_b3_c3,
    circle_mean,
    disk_mean,
    growth_report,
    sup_on_circle,
)
