# SPDX-License-Identifier: Apache-2.0
"""Energy penalties, selection statistics and sum-rate bounds for user selection with vector precoding."""

from ._core import (  # noqa: F401
    Assumption,
    EnergyCdf,
    OneRsbSolution,
    RsSolution,
    Scheme,
    SelectionModel,
    SimReport,
    Strategy,
    SystemParams,
    conditional_output_pdf_gaussian,
    cvp_rus_optimized,
    cvp_rus_rate,
    empirical_penalty,
    marginal_selection_probability,
    modified_power_pdf_given_selected,
    optimize_kappa,
    q_function,
    qpsk_mi,
    regularized_lower_gamma,
    run_sweep,
    run_validation,
    solve_1rsb,
    solve_rs,
    solve_rs_T_inf,
    sum_rate_bound_dd_us,
    zfbf_asymptotic_penalty,
)

__all__ = [name for name in dir() if not name.startswith("_")]
