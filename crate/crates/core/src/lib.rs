//! Eigenspace ("eigengesture") recognition of grayscale gesture frames.
//!
//! Training stacks mean-centered n×n frames as the columns of an N²×M matrix
//! A, decomposes the small M×M matrix AᵀA with cyclic Jacobi rotations and
//! lifts the leading eigenvectors back to image space. Recognition projects a
//! frame onto those eigenimages and accepts the nearest training image when
//! it lies within a distance threshold.
//!
//! Data-parallel loops (matrix products, covariance accumulation, projection,
//! batch evaluation, dataset loading) use rayon when the `parallel` feature is
//! enabled (the default) and give bit-identical results either way; see
//! [`exec`].

pub mod bench;
pub mod exec;
pub mod format;
pub mod imageio;
pub mod linalg;
pub mod metrics;
pub mod modelstore;
pub mod recognizer;
pub mod trainer;

pub use exec::Execution;
pub use imageio::{DatasetManifest, GrayImage, LabeledSample};
pub use linalg::{EigenDecomposition, EigenPair, Matrix, Vector};
pub use metrics::{compute_metrics, MetricsReport};
pub use recognizer::{evaluate, recognize, ConfusionTally, Decision};
pub use trainer::{train, EigenspaceModel, KPolicy, TrainConfig, TrainError};
