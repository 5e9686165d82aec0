//! Root-function chains, completeness residuals, incompleteness witnesses and the `2 x 2`
//! completeness criteria.

mod assess;
mod chains;
mod criteria;
mod gridfn;
mod residuals;
mod witness;

pub use assess::{
    assess, find_witness, kernel_lambdas, AdjointSummary, Assessment, CompletenessOptions, CompletenessReport,
    WitnessRecord,
};
pub use chains::{
    adjoint_chains, adjoint_problem, bc_residual, build_chains, build_chains_with, chains_at, fundamental_taylor_on_grid,
    kernel_functions, minimality_metric, ode_residual, root_functions, summarize, taylor_adjugate, AdjointRun,
    ChainOptions, ChainSummary, ClusterGram, MinimalityReport, RootChain,
};
pub use criteria::{
    criteria_2x2, volterra_rows, CriteriaReport, CriterionEval, Prediction, Status, DEGENERATE, ENDPOINT, MIRROR,
    NONREAL, REGULAR, TMINUS, VOLTERRA,
};
pub use gridfn::{inner, norm, GridFunction, Piece, PiecewiseFunction, Profile};
pub use residuals::{completeness_residuals, completeness_residuals_with, default_probes, default_schedule, Probe, ProbeResiduals, ResidualTable};
pub use witness::{
    mirror_alphas, mirror_clearance, orthogonality_defects, row_solutions, witness_dirac_degenerate, witness_t_minus,
    Witness, WitnessKind,
};
