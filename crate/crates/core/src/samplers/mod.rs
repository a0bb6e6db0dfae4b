//! Elementary update kernels.

mod gaussian;
mod hmc;
mod truncnorm;
mod twod;

pub use gaussian::{
    antithetic_step, block_move_with, conditional_from_precision, conditional_normal_params, ensure_stochastic, exact_gauss_hmc,
    gaussian_block_move, over_relax_step, over_relax_with, ProposalMode,
};
pub use hmc::{leapfrog, nuts_sample, HmcConfig, Nuts, TransitionInfo};
pub use truncnorm::{sample_truncated_normal, standard_truncated};
pub use twod::GaussianGibbs;
