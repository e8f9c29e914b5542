//! Positive-definite kernels, their Loewner order, feature-space
//! realizations and the self-similar kernels built on the middle-third
//! Cantor system.
//!
//! Kernels are linear in the first argument and conjugate-linear in the
//! second: `K(z, w) = Σ a_k z^k w̄^k`.

pub mod algebra;
pub mod domain;
pub mod dual_space;
pub mod error;
pub mod features;
pub mod fractal;
pub mod gram;
pub mod kernel;
pub mod ktransform;
pub mod linalg;
pub mod order_operator;
pub mod ordering;
pub mod sampling;
pub mod series;

pub use algebra::{combine, kernel_from_frame, power, sum_rkhs_norm, CombineOp, Frame, FrameFamily};
pub use domain::{Domain, Point, PointSet, Scalar};
pub use dual_space::{apply_distribution, delta_expand, dirac_norm, dual_pairing, DistributionElement};
pub use error::{KernelError, Result};
pub use features::{
    direct_sum_feature, dual_pair, gaussian_feature, onb_feature, tensor_feature, verify_feature,
    EmpiricalGram, FeatureMap, SpaceTag,
};
pub use fractal::{
    cantor_member, ifs_eval, ifs_invariance_check, ifs_kernel, support_intervals, IfsFunction, IfsKernel,
};
pub use gram::{gram, psd_check, psd_check_matrix, GramMatrix, PsdCertificate, PsdVerdict, DEFAULT_PSD_TOLERANCE};
pub use kernel::{eval, Builtin, KernelExpr};
pub use ktransform::{energy, k_inverse, tk_apply, DiscreteMeasure, KTransform};
pub use order_operator::{isometry_check, multiplier_test, order_operator_diagonal, order_operator_sampled};
pub use ordering::{feature_dominance, loewner_leq, monotone_limit, verify_chain, Dominance, OrderVerdict};
pub use series::{Coefficients, SeriesKernel, VariableKind};
