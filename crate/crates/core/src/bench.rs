//! Wall-clock comparison of the reduced AᵀA route against decomposing the
//! full N²×N² covariance A·Aᵀ.

use std::time::{Duration, Instant};

use crate::exec::Execution;
use crate::linalg::{jacobi_eigh, mat_mul_with, LinalgError, Matrix};
use crate::trainer::{lift_eigenvectors_with, small_covariance_with, TrainError};

/// Above this many pixels the direct route needs an explicit override: the
/// N²×N² matrix alone is 8·N⁴ bytes and Jacobi sweeps cost O(N⁶).
pub const DIRECT_GUARD_PIXELS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrickTimings {
    pub covariance: Duration,
    pub eigen: Duration,
    pub lift: Duration,
    /// Eigenimages produced.
    pub components: usize,
}

impl TrickTimings {
    pub fn total(&self) -> Duration {
        self.covariance + self.eigen + self.lift
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectTimings {
    pub covariance: Duration,
    pub eigen: Duration,
}

impl DirectTimings {
    pub fn total(&self) -> Duration {
        self.covariance + self.eigen
    }
}

/// AᵀA, its Jacobi decomposition and the lift back to N² dimensions.
pub fn time_trick_path(a: &Matrix, exec: Execution) -> Result<TrickTimings, TrainError> {
    let start = Instant::now();
    let c = small_covariance_with(a, exec);
    let covariance = start.elapsed();

    let start = Instant::now();
    let decomp = jacobi_eigh(&c)?;
    let eigen = start.elapsed();

    let start = Instant::now();
    let (values, _) = lift_eigenvectors_with(a, &decomp, 1e-12, exec)?;
    let lift = start.elapsed();

    Ok(TrickTimings { covariance, eigen, lift, components: values.len() })
}

/// A·Aᵀ and its Jacobi decomposition, with no size guard.
pub fn time_direct_path(a: &Matrix, exec: Execution) -> Result<DirectTimings, LinalgError> {
    let start = Instant::now();
    let c = mat_mul_with(a, &a.transpose(), exec)?;
    let covariance = start.elapsed();

    let start = Instant::now();
    jacobi_eigh(&c)?;
    let eigen = start.elapsed();

    Ok(DirectTimings { covariance, eigen })
}
