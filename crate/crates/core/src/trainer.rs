//! Eigenspace training with the reduced (snapshot) covariance.
//!
//! With M mean-centered images stacked as the columns of the N²×M matrix A,
//! the nonzero eigenpairs of the N²×N² matrix A·Aᵀ are recovered from the
//! M×M matrix AᵀA: if AᵀA·v = λv then (A·Aᵀ)(A·v) = λ(A·v). Only the small
//! matrix is ever decomposed.

use thiserror::Error;

use crate::exec::{map_range, Execution};
use crate::imageio::DatasetManifest;
use crate::linalg::{
    column_mean, euclidean_distance, jacobi_eigh, mat_mul_with, unit_normalize, EigenDecomposition, LinalgError,
    Matrix, Vector,
};

/// Rows per block when accumulating AᵀA. Fixed so the summation order does
/// not depend on the thread count.
const COVARIANCE_BLOCK_ROWS: usize = 256;

const UNIT_NORM_TOL: f64 = 1e-9;
const ORTHOGONALITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrainError {
    #[error("need at least 2 training samples, got {found}")]
    TooFewSamples { found: usize },
    #[error("degenerate training set: covariance has no usable eigenvalues")]
    DegenerateTrainingSet,
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type Result<T, E = TrainError> = std::result::Result<T, E>;

/// How many eigenimages to keep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KPolicy {
    /// Keep this many (capped at the number available).
    ExplicitK(usize),
    /// Keep the fewest leading components whose eigenvalues reach this
    /// fraction of the total.
    EnergyFraction(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub k_policy: KPolicy,
    /// θ = factor × largest pairwise distance between training weights.
    pub threshold_factor: f64,
    /// Eigenvalues at or below `epsilon × λ_max` are treated as zero.
    pub eigen_drop_epsilon: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            k_policy: KPolicy::EnergyFraction(0.95),
            threshold_factor: 0.5,
            eigen_drop_epsilon: 1e-12,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        match self.k_policy {
            KPolicy::ExplicitK(0) => return Err(TrainError::InvalidConfig("k must be at least 1".into())),
            KPolicy::EnergyFraction(f) if !(f > 0.0 && f <= 1.0) => {
                return Err(TrainError::InvalidConfig(format!("energy fraction {f} not in (0, 1]")))
            }
            _ => {}
        }
        if !(self.threshold_factor.is_finite() && self.threshold_factor > 0.0) {
            return Err(TrainError::InvalidConfig(format!(
                "threshold factor {} must be finite and positive",
                self.threshold_factor
            )));
        }
        if !(self.eigen_drop_epsilon.is_finite() && self.eigen_drop_epsilon >= 0.0) {
            return Err(TrainError::InvalidConfig(format!(
                "eigenvalue cutoff {} must be finite and non-negative",
                self.eigen_drop_epsilon
            )));
        }
        Ok(())
    }
}

/// A trained eigenspace: mean image, K unit eigenimages, the weight vector of
/// every training image and the acceptance threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenspaceModel {
    mean: Vector,
    eigenvalues: Vec<f64>,
    eigenimages: Matrix,
    labels: Vec<String>,
    training_weights: Matrix,
    threshold: f64,
    config: Option<TrainConfig>,
}

impl EigenspaceModel {
    /// Assembles a model, checking every structural and numeric invariant.
    pub fn from_parts(
        mean: Vector,
        eigenvalues: Vec<f64>,
        eigenimages: Matrix,
        labels: Vec<String>,
        training_weights: Matrix,
        threshold: f64,
    ) -> Result<Self> {
        let bad = |msg: String| Err(TrainError::InvalidModel(msg));
        let (n2, k, m) = (mean.len(), eigenvalues.len(), labels.len());
        if eigenimages.rows() != n2 || eigenimages.cols() != k {
            return bad(format!(
                "eigenimages are {}x{}, expected {n2}x{k}",
                eigenimages.rows(),
                eigenimages.cols()
            ));
        }
        if training_weights.rows() != k || training_weights.cols() != m {
            return bad(format!(
                "training weights are {}x{}, expected {k}x{m}",
                training_weights.rows(),
                training_weights.cols()
            ));
        }
        if k == 0 || k + 1 > m {
            return bad(format!("k={k} violates 1 <= k <= m-1 with m={m}"));
        }
        if labels.iter().any(String::is_empty) {
            return bad("empty label".into());
        }
        if eigenvalues.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return bad("eigenvalues must be finite and positive".into());
        }
        if eigenvalues.windows(2).any(|w| w[1] > w[0]) {
            return bad("eigenvalues must be non-increasing".into());
        }
        if !(threshold.is_finite() && threshold >= 0.0) {
            return bad(format!("threshold {threshold} must be finite and non-negative"));
        }
        let columns = eigenimages.columns();
        for (i, u) in columns.iter().enumerate() {
            if (u.norm() - 1.0).abs() > UNIT_NORM_TOL {
                return bad(format!("eigenimage {i} has norm {}", u.norm()));
            }
            for (j, w) in columns.iter().enumerate().skip(i + 1) {
                let d = u.dot(w)?;
                if d.abs() > ORTHOGONALITY_TOL {
                    return bad(format!("eigenimages {i} and {j} have dot product {d:e}"));
                }
            }
        }
        Ok(EigenspaceModel { mean, eigenvalues, eigenimages, labels, training_weights, threshold, config: None })
    }

    /// N², the length of an image vector.
    pub fn n2(&self) -> usize {
        self.mean.len()
    }

    pub fn k(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Number of training images.
    pub fn m(&self) -> usize {
        self.labels.len()
    }

    pub fn mean(&self) -> &Vector {
        &self.mean
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// N²×K, one unit eigenimage per column.
    pub fn eigenimages(&self) -> &Matrix {
        &self.eigenimages
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// K×M, one weight vector per training image.
    pub fn training_weights(&self) -> &Matrix {
        &self.training_weights
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// The configuration this model was trained with. Not persisted, so
    /// `None` for loaded models.
    pub fn config(&self) -> Option<&TrainConfig> {
        self.config.as_ref()
    }

    /// Side length when N² is a perfect square.
    pub fn side(&self) -> Option<usize> {
        let n2 = self.n2();
        let s = (n2 as f64).sqrt().round() as usize;
        (s * s == n2).then_some(s)
    }

    pub fn project(&self, image: &Vector) -> Result<Vector> {
        project_weights(&self.eigenimages, &self.mean, image)
    }

    /// mean + Σ wᵢUᵢ.
    pub fn reconstruct(&self, weights: &Vector) -> Result<Vector> {
        Ok(self.mean.add(&self.eigenimages.mul_vector(weights)?)?)
    }

    /// Same model with a different threshold.
    pub fn with_threshold(mut self, threshold: f64) -> Result<Self> {
        if !(threshold.is_finite() && threshold >= 0.0) {
            return Err(TrainError::InvalidModel(format!("threshold {threshold} must be finite and non-negative")));
        }
        self.threshold = threshold;
        Ok(self)
    }
}

/// Mean image Φ and the mean-centered data matrix A (N²×M, column i = Iᵢ − Φ).
pub fn normalize_training(manifest: &DatasetManifest) -> Result<(Vector, Matrix)> {
    let m = manifest.len();
    if m < 2 {
        return Err(TrainError::TooFewSamples { found: m });
    }
    let images: Vec<Vector> = manifest.samples().iter().map(|s| s.vector.clone()).collect();
    let stacked = Matrix::from_columns(&images)?;
    let mean = column_mean(&stacked);
    let n2 = stacked.rows();
    let mut centered = Vec::with_capacity(n2 * m);
    for p in 0..n2 {
        centered.extend(stacked.row(p).iter().map(|x| x - mean[p]));
    }
    Ok((mean, Matrix::new(n2, m, centered)?))
}

pub fn small_covariance(a: &Matrix) -> Matrix {
    small_covariance_with(a, Execution::default())
}

/// C = AᵀA (M×M), without a 1/M factor.
///
/// Accumulated as a sum of row outer products over fixed-size row blocks;
/// block partial sums are added in block order on both execution paths.
pub fn small_covariance_with(a: &Matrix, exec: Execution) -> Matrix {
    let (rows, m) = (a.rows(), a.cols());
    let blocks = rows.div_ceil(COVARIANCE_BLOCK_ROWS);
    let partials = map_range(exec, blocks, |b| {
        let mut acc = vec![0.0; m * m];
        let end = ((b + 1) * COVARIANCE_BLOCK_ROWS).min(rows);
        for p in b * COVARIANCE_BLOCK_ROWS..end {
            let row = a.row(p);
            for i in 0..m {
                let ri = row[i];
                for j in i..m {
                    acc[i * m + j] += ri * row[j];
                }
            }
        }
        acc
    });
    let mut c = vec![0.0; m * m];
    for part in &partials {
        for (x, y) in c.iter_mut().zip(part) {
            *x += y;
        }
    }
    for i in 0..m {
        for j in 0..i {
            c[i * m + j] = c[j * m + i];
        }
    }
    Matrix::new(m, m, c).expect("finite products of finite data")
}

/// Maps the eigenvectors of AᵀA back to image space.
///
/// Pairs with λ ≤ `drop_epsilon`·λ_max are discarded; each survivor becomes
/// Uᵢ = A·Vᵢ scaled to unit norm with the sign convention applied. Returns
/// the surviving eigenvalues and the N²×K′ eigenimage matrix.
pub fn lift_eigenvectors(a: &Matrix, decomp: &EigenDecomposition, drop_epsilon: f64) -> Result<(Vec<f64>, Matrix)> {
    lift_eigenvectors_with(a, decomp, drop_epsilon, Execution::default())
}

pub fn lift_eigenvectors_with(
    a: &Matrix,
    decomp: &EigenDecomposition,
    drop_epsilon: f64,
    exec: Execution,
) -> Result<(Vec<f64>, Matrix)> {
    if decomp.source_dim != a.cols() {
        return Err(LinalgError::DimensionMismatch(format!(
            "decomposition of a {0}x{0} matrix for data with {1} columns",
            decomp.source_dim,
            a.cols()
        ))
        .into());
    }
    let lambda_max = decomp.pairs.first().map_or(0.0, |p| p.value);
    if lambda_max <= 0.0 {
        return Err(TrainError::DegenerateTrainingSet);
    }
    let cutoff = drop_epsilon * lambda_max;
    let kept: Vec<_> = decomp.pairs.iter().filter(|p| p.value > cutoff).collect();
    let small: Vec<Vector> = kept.iter().map(|p| p.vector.clone()).collect();
    let lifted = mat_mul_with(a, &Matrix::from_columns(&small)?, exec)?;
    let columns = lifted
        .columns()
        .iter()
        .map(unit_normalize)
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| TrainError::DegenerateTrainingSet)?;
    Ok((kept.iter().map(|p| p.value).collect(), Matrix::from_columns(&columns)?))
}

/// Number of leading eigenimages to keep; always within `1..=available`.
///
/// # Panics
/// If `eigenvalues` is empty.
pub fn select_top_k(eigenvalues: &[f64], policy: KPolicy) -> usize {
    let available = eigenvalues.len();
    assert!(available >= 1, "no eigenvalues to select from");
    match policy {
        KPolicy::ExplicitK(k) => k.clamp(1, available),
        KPolicy::EnergyFraction(f) => {
            let total: f64 = eigenvalues.iter().sum();
            let mut running = 0.0;
            for (i, l) in eigenvalues.iter().enumerate() {
                running += l;
                if running / total >= f {
                    return i + 1;
                }
            }
            available
        }
    }
}

/// Ω = Uᵀ·(image − mean).
pub fn project_weights(eigenimages: &Matrix, mean: &Vector, image: &Vector) -> Result<Vector> {
    if image.len() != mean.len() || eigenimages.rows() != mean.len() {
        return Err(LinalgError::DimensionMismatch(format!(
            "image of length {} against a {}-pixel eigenspace",
            image.len(),
            eigenimages.rows()
        ))
        .into());
    }
    let k = eigenimages.cols();
    let mut weights = vec![0.0; k];
    for (p, (x, mu)) in image.as_slice().iter().zip(mean.as_slice()).enumerate() {
        let centered = x - mu;
        for (w, u) in weights.iter_mut().zip(eigenimages.row(p)) {
            *w += u * centered;
        }
    }
    Ok(Vector::new(weights)?)
}

/// θ = `factor` × the largest Euclidean distance between any two columns.
pub fn compute_threshold(training_weights: &Matrix, factor: f64) -> Result<f64> {
    let m = training_weights.cols();
    if m < 2 {
        return Err(TrainError::TooFewSamples { found: m });
    }
    let columns = training_weights.columns();
    let mut widest = 0.0f64;
    for i in 0..m {
        for j in i + 1..m {
            widest = widest.max(euclidean_distance(&columns[i], &columns[j])?);
        }
    }
    Ok(factor * widest)
}

/// A trained model together with the full retained spectrum it was cut from.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub model: EigenspaceModel,
    /// Every eigenvalue that survived the zero cutoff, descending.
    pub spectrum: Vec<f64>,
}

impl TrainOutcome {
    /// Share of the spectrum's total captured by the selected K components.
    pub fn energy_fraction(&self) -> f64 {
        let kept: f64 = self.model.eigenvalues().iter().sum();
        kept / self.spectrum.iter().sum::<f64>()
    }
}

pub fn train(manifest: &DatasetManifest, config: &TrainConfig) -> Result<EigenspaceModel> {
    train_with(manifest, config, Execution::default()).map(|o| o.model)
}

/// Runs the full pipeline: center, AᵀA, Jacobi, cutoff and K selection,
/// lifting, projection of every training image and the threshold.
/// Identical inputs produce a bit-identical model under either strategy.
pub fn train_with(manifest: &DatasetManifest, config: &TrainConfig, exec: Execution) -> Result<TrainOutcome> {
    config.validate()?;
    let (mean, a) = normalize_training(manifest)?;
    let c = small_covariance_with(&a, exec);
    let decomp = jacobi_eigh(&c)?;
    let (spectrum, lifted) = lift_eigenvectors_with(&a, &decomp, config.eigen_drop_epsilon, exec)?;
    let k = select_top_k(&spectrum, config.k_policy);
    let eigenimages = lifted.leading_columns(k);

    let samples = manifest.samples();
    let weights = map_range(exec, samples.len(), |j| project_weights(&eigenimages, &mean, &samples[j].vector))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let training_weights = Matrix::from_columns(&weights)?;
    let threshold = compute_threshold(&training_weights, config.threshold_factor)?;

    let labels = samples.iter().map(|s| s.label.clone()).collect();
    let mut model = EigenspaceModel::from_parts(
        mean,
        spectrum[..k].to_vec(),
        eigenimages,
        labels,
        training_weights,
        threshold,
    )?;
    model.config = Some(*config);
    Ok(TrainOutcome { model, spectrum })
}
