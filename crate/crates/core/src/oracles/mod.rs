//! Ground truth for the bounds: exact counting, Monte Carlo estimation of
//! `e^H Pr[AX = b]`, and direct evaluation of point concentrations.

mod conc;
mod count;
mod mc;

pub use conc::{conc_quadrature, conc_sum_geometrics};
pub use count::{
    count_exact, count_exact_binomial, count_exact_with, count_transportation, ln_biguint, DpBudget, ExactCount,
};
pub use mc::{estimate_count_mc, McEstimate, TRIALS_PER_STREAM};
