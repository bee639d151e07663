//! Regression depth for linear fits.
//!
//! * [`types`]: observations, parameter vectors, directions, equivariance transforms.
//! * [`depth`]: empirical depth of a candidate fit under several formulations.
//! * [`fit`]: the maximum-depth (deepest) fit.
//! * [`population`]: generative models, population depth in closed form and by
//!   quadrature, and the ingredients of the limiting distribution.
//! * [`asymptotics`]: Monte Carlo experiments on consistency, rates and the limit law.

pub mod asymptotics;
pub mod dataset;
pub mod depth;
pub mod directions;
pub mod error;
pub mod fit;
pub mod linalg;
pub mod nelder_mead;
pub mod population;
pub mod quadrature;
pub mod seeding;
pub mod stats;
mod sweep;
pub mod types;

pub use depth::{
    decompose_directions_p2, rd_bruteforce_oracle, rd_count_bh99, rd_normalized, rd_sign_bh992,
    DirectionBudget,
};
pub use error::{DepthError, Result};
pub use fit::{fit_exact_p2, fit_search, FitMethod, FitResult};
pub use population::{
    compute_limit_ingredients, rd_disk_closed, rd_normal_closed, rd_population_numeric, sample,
    LimitIngredients, PopulationModel, QuadConfig,
};
pub use types::{
    extend_w, residual, transform_affine, transform_regression, transform_scale, DepthValue,
    Observation, ObservationSet, ParamVector, ResidualSign, UnitDirection,
};
