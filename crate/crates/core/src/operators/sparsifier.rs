use crate::error::{size_err, Result};
use crate::linalg::{haar_forward, haar_inverse, CMatrix, CVector};

/// Unitary sparsifying transform `H`.
#[derive(Clone, Debug)]
pub enum Sparsifier {
    Identity,
    Haar,
    Dense(CMatrix),
}

impl Sparsifier {
    /// `H x`
    pub fn forward(&self, x: &CVector) -> Result<CVector> {
        match self {
            Sparsifier::Identity => Ok(x.clone()),
            Sparsifier::Haar => haar_forward(x),
            Sparsifier::Dense(h) => {
                if h.cols != x.len() {
                    return size_err("sparsifier dimension mismatch");
                }
                Ok(h.matvec(x))
            }
        }
    }

    /// `H^* c`
    pub fn inverse(&self, c: &CVector) -> Result<CVector> {
        match self {
            Sparsifier::Identity => Ok(c.clone()),
            Sparsifier::Haar => haar_inverse(c),
            Sparsifier::Dense(h) => {
                if h.rows != c.len() {
                    return size_err("sparsifier dimension mismatch");
                }
                Ok(h.matvec_adjoint(c))
            }
        }
    }
}
