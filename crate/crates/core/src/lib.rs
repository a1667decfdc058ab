//! Volume sampling of matrix rows and deterministic row-subset selection.
//!
//! A `k`-subset `S` of the rows of `A` is volume-sampled when it is drawn with
//! probability proportional to `det(A_S A_Sᵀ)`. This crate provides
//!
//! * exact volume sampling ([`volume_sample`]) with two interchangeable ways of
//!   computing the per-round marginals,
//! * a deterministic selector ([`derandomized_select`]) whose rows satisfy
//!   `‖A − π_S(A)‖_F² ≤ (k+1)‖A − A_k‖_F²`,
//! * approximate sampling after a Gaussian sketch ([`approx_volume_sample`]),
//! * a brute-force [`oracle`] used to check all of the above.

pub mod bench;
pub mod charpoly;
pub mod derand;
pub mod eigen;
pub mod error;
pub mod matrix;
pub mod oracle;
pub mod random;
pub mod sampler;
pub mod sketch;
pub mod svd;

pub use charpoly::{charpoly_direct, charpoly_from_eigenvalues, subset_det_sum, CharPolyCoeffs};
pub use derand::{conditional_scores, derandomized_select, ConditionalScore, Derandomized};
pub use error::{Error, Result};
pub use matrix::{
    frobenius_norm, gram, gram_after_projection, project_onto_subset, project_out_row, GramMatrix,
    RealMatrix, ZeroThreshold,
};
pub use sampler::{
    marginals_gram, marginals_svd, volume_sample, MarginalVector, SelectionResult, Subroutine,
    VolumeSampler,
};
pub use sketch::{approx_volume_sample, gaussian_sketch, ProjectionConfig};
pub use svd::{best_rank_k, spectral_norm, thin_svd, SvdFactors};
