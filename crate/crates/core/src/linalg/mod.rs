//! Complex vectors, small dense matrices, unitary transforms and the
//! numerical kernels built on them.

mod ball;
mod lsq;
mod svd;
mod transforms;
mod vector;

pub use ball::{covering_radius, min_enclosing_ball, Ball};
pub use lsq::{least_squares_residual, orthonormal_basis, solve_real};
pub use svd::{pinv_apply_svd, svd_small, Svd, MAX_DIM as SVD_MAX_DIM};
pub use transforms::{
    dft_forward, dft_inverse, fwht_sequency_forward, fwht_sequency_inverse, haar_forward,
    haar_inverse, sequency_to_natural, transform_matrix,
};
pub use vector::{CMatrix, CVector, C64};
