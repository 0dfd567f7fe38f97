"""Explicit higher-order quasi-Monte Carlo digital nets over prime fields.

Construct digit-interlaced binomial-formula digital nets, audit their dual
metrics, and evaluate worst-case quadrature errors in Sobolev spaces of
dominating mixed smoothness, both exactly and through dual-net Walsh sums.
"""

from .errors import GuardError, InputError
from .ff import FieldMatrix, PrimeBase, binom_mod_p, kernel_basis, rank
from .digits import (
    HAMMING,
    DigitVector,
    MultiIndex,
    dick,
    digit_add,
    digit_sub,
    deinterlace,
    hamming_weight,
    interlace,
    interlace_multiindex,
    mu_alpha,
)
from .nets import (
    ConstructionParams,
    DigitalNet,
    NetPoint,
    chen_skriganov,
    construct_optimal_net,
    interlace_net,
)
from .dual import (
    DualNet,
    counting_bound_holds,
    dual_enumerate,
    dual_space,
    metric_lower_bounds,
    metrics_report,
    min_metric,
    predicted_t_interlaced,
    propagate_t,
    verify_order_t,
)
from .walsh import (
    WalshCoefficient,
    bernoulli,
    empirical_decay_constant,
    kernel_walsh_coeff_1d,
    kernel_walsh_coeff_sd,
    wal,
    wal_multi,
    walsh_coeff_bernoulli,
    walsh_coeff_bernoulli_periodic,
)
from .wce import (
    BoundBreakdown,
    WceReport,
    b_alpha_b,
    discretization_bound,
    kernel_1d,
    kernel_sd,
    main_part_bound,
    s1_bounds,
    s2_partial,
    tail_bound_holds,
    wce_dual_truncated,
    wce_exact,
)
from .cli import SweepConfig, SweepRow, run_sweep

__version__ = "0.1.0"
