"""Copula-based extreme value inference for CoVaR and systemic risk.

The package computes exact copula-adjusted probability levels, identifies
tail regimes, fits parametric tail models to rank data by minimum-distance
estimation, filters AR-GARCH marginals with skew-t innovations, and turns
the pieces into CoVaR / delta-CoVaR reports and Monte Carlo studies.
"""

__version__ = "0.1.0"

from .copulas import (  # noqa: F401
    CopulaSpec,
    UniformPairSample,
    clayton,
    comonotone,
    conditional_cdf_given_le,
    copula_cdf,
    countermonotone,
    frank,
    gaussian,
    gumbel,
    independence,
    ips,
    reflect,
    sample,
    student_t,
    v_exact,
)
from .empirical import (  # noqa: F401
    PseudoSample,
    TailCoefficients,
    A_hat,
    b_hat,
    empirical_copula,
    pseudo_observations,
    reflect2_sample,
    tail_coefficients,
)
from .errors import (  # noqa: F401
    BracketError,
    ComputationError,
    CovartailError,
    DataError,
    NumericError,
    OptimizationError,
    OutOfRangeError,
    WrongRegimeError,
)
from .margins import (  # noqa: F401
    ArGarchParams,
    MarginalFit,
    filter_returns,
    fit_ar_garch,
    simulate_ar_garch,
    skewt_cdf,
    skewt_logpdf,
    skewt_quantile,
    var_forecast,
)
from .mde import (  # noqa: F401
    MDEFit,
    adjustment_factor,
    classify_regime,
    criterion_attraction,
    criterion_balance,
    criterion_mixed,
    criterion_repulsion,
    fit,
    v_hat,
    v_hat_flagged,
)
from .numerics import (  # noqa: F401
    BoxConstraint,
    MinimizeResult,
    find_root_monotone,
    integrate_unit_interval,
    minimize_derivative_free,
    reg_incomplete_beta,
    reg_incomplete_gamma,
    reg_incomplete_gamma_inv,
    student_t_cdf,
    student_t_quantile,
)
from .pipeline import (  # noqa: F401
    CoVaRReport,
    SimStudyResult,
    covar_t,
    delta_covar,
    rolling_analysis,
    simulate_study,
)
from .tailmodels import (  # noqa: F401
    LimitInputs,
    RegimeInfo,
    TailModel,
    H_eval,
    H_inverse,
    b_inf,
    boundary_atoms,
    boundary_cdf_eval,
    boundary_cdf_inverse,
    delta_covar_limit,
    catalog_v_qp,
    catalog_vp,
    tdf_eval,
    theoretical_regime,
    true_tail_model,
    vp_rate,
)
