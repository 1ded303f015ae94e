//! Deterministic numerical kernels shared by the rest of the crate.

mod linalg;
mod matrix;
mod rng;
mod stats;

pub use linalg::{solve_linear, symmetric_eig, SymmetricEigen};
pub use matrix::Matrix;
pub use rng::{mix64, SeededRng};
pub use stats::{covariance_matrix, mean, pairwise_sq_dists, quantile, quantile_sorted, sq_dist};

/// Free-function form of [`SeededRng::derive_substream`].
pub fn derive_substream(rng: &SeededRng, stream_id: u64) -> SeededRng {
    rng.derive_substream(stream_id)
}
