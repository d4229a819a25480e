//! Upper bounds on the number of integer points in `P = {x ≥ 0, Ax = b}`
//! from the maximum-entropy product-geometric distribution `X` on `Z^n_{≥0}`
//! with `E[AX] = b`:
//!
//! ```text
//! |P ∩ Z^n| = e^{H(X)} Pr[AX = b] ≤ e^{H(X)} conc(AX)
//! ```
//!
//! Every bounding method supplies an upper bound on `conc(AX)`:
//!
//! | module | method |
//! |---|---|
//! | [`basis_bounds`] | best linearly independent column subset; entropy-balanced basis cover |
//! | [`gaussian_bounds`] | Gaussian-type bound `C p^{-m/2} + (C')^p` over a partition into `p` bases |
//! | [`poset_bounds`] | chain-product widths for columns cycling through a basis |
//!
//! [`oracles`] holds the ground-truth engines (exact counting, Monte Carlo,
//! Fourier quadrature) used to cross-check the bounds.

pub mod basis_bounds;
pub mod error;
pub mod gaussian_bounds;
pub mod linalg;
pub mod lognum;
pub mod matroid;
pub mod maxent;
pub mod model;
pub mod oracles;
pub mod poset_bounds;
pub mod report;

pub use error::{Error, Result};
pub use lognum::LogNumber;
pub use maxent::{solve_maxent, MaxEntSolution, SolveOptions};
pub use model::{gen_simplex, gen_transportation, load_spec, validate, PolytopeSpec};
pub use report::{BoundParams, BoundReport, Method};
