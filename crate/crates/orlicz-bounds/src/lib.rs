//! Distribution bounds for the supremum of averaged deviations of
//! Orlicz-space stochastic processes, with a Monte Carlo lab that checks the
//! bounds against simulated tails.
//!
//! Layered as:
//!
//! * [`nfunc`] — Orlicz N-function algebra (evaluation, generalized inverse,
//!   convex conjugate, growth metadata);
//! * [`norms`] — Luxembourg and Orlicz norms for samples and tabulated
//!   functions, the indicator-norm formula, and the Chebyshev-type tail;
//! * [`bound_engine`] — chaining-scale and ball-measure primitives, the
//!   entropy and deviation integrals, and the mixed / moment-space bounds;
//! * [`ou_model`] — closed forms for the exponential-covariance process on
//!   an interval, and its optimized tail bound;
//! * [`mc_lab`] — exact path sampling, empirical sup tails, and domination
//!   reports.

pub mod bound_engine;
pub mod error;
pub mod mc_lab;
pub mod measure;
pub mod nfunc;
pub mod norms;
pub mod ou_model;
pub mod quad;
pub mod rng;
pub mod search;

pub use bound_engine::{
    c_p, d_pq_at, d_pq_quad, delta_q_quad, eta_tail_class_e, gamma_q_mc, lq_bound, nu_t,
    theorem1_bound, z_of_x, zeta1, BoundQuery, DeviationModel, LqBound, McEstimate, MixedBound,
    SearchSpec, SigmaModulus, ZetaSpec,
};
pub use error::{Error, Result};
pub use mc_lab::{
    averaged_deviation_stat, domination_report, empirical_sup_tail, per_path_sup_deviation,
    sample_ou_batch, sample_ou_batch_on_grid, BoundValue, Domination, EmpiricalTail, PathBatch,
    TailReport,
};
pub use measure::{MeasureGrid, Support};
pub use nfunc::{make_catalog_function, Catalog, ClassEBounds, Delta2Growth, NFunction};
pub use norms::{
    chebyshev_tail, holder_residual, indicator_orlicz_norm, luxembourg_norm_function,
    luxembourg_norm_samples, orlicz_norm_function, NormEstimate, SampleSet, TailBound,
};
pub use ou_model::{OUModel, OptimizedTheorem4, Theorem4Bound, Theorem4Coefficient};
