//! Finite-horizon causal measure algebra.

mod alphabet;
mod conditioned;
mod info;
mod joint;
mod kernel;
mod pmf;

pub use alphabet::{decode_path, encode_path, AlphabetSpec, DEFAULT_CELL_CAP};
pub use conditioned::{
    condition_backward, condition_forward, mix_conditioned, refactor_to_backward_kernel,
    refactor_to_forward_kernel, ConditionedFamily, Given,
};
pub use info::{binary_entropy, entropy, kl_divergence, InfoValue};
pub use joint::{
    build_joint, extract_backward_family, extract_forward_family, independent_product, marginal_x,
    marginal_y, product_pi_backward, product_pi_forward, JointMeasure,
};
pub use kernel::{bsc_row, BackwardKernel, ForwardKernel};
pub use pmf::{Pmf, PMF_TOLERANCE};

pub(crate) use joint::{causal_product, ensure_same_spec, prefix_marginals};
