"""Proximate orders, growth classes of entire functions and infinite-order
differential operators acting on them.

The package is organised as

* :mod:`proxdiff.proxorder` -- proximate orders, normalization, phi, G_q;
* :mod:`proxdiff.series` -- truncated entire series, weighted norms, type
  estimation and membership tests;
* :mod:`proxdiff.diffop` -- operator symbols, conversion to and from
  homomorphisms, application and growth classification;
* :mod:`proxdiff.oracle` -- exact reference computations;
* :mod:`proxdiff.cli` -- the ``proxdiff`` command.
"""

from ._numbers import (
    ConstructionError,
    DomainError,
    GaussianRational,
    PreconditionError,
    ProxDiffError,
    SolverRangeError,
    get_precision,
    mp,
    set_precision,
)
from .diffop import (
    HomImageTable,
    OperatorSymbol,
    apply_operator,
    classify_symbol,
    example_ratio,
    hom_to_symbol,
    rescale_dst_order,
    schrodinger_symbol,
    symbol_to_hom,
)
from .proxorder import (
    GrowthScale,
    LemmaReport,
    NormalizedOrder,
    ProximateOrder,
    eval_order,
    growth_scale,
    ln_phi,
    ln_weight,
    normalize,
    phi,
    verify_phi_derivative,
    verify_subadditivity,
    verify_y_bound,
)
from .series import (
    EntireSeries,
    MembershipVerdict,
    TypeEstimate,
    classify_coeff_bound,
    classify_minimal_type,
    classify_normal_type,
    derivative_norm_check,
    estimate_type,
    exp_series,
    hom_norm_profile,
    monomial_norm_check,
    multi_choose,
    partial_sum_residual,
    weighted_norm,
)

__version__ = "0.1.0"
