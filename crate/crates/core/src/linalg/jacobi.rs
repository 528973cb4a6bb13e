use super::{apply_sign_convention, LinalgError, Matrix, Result, Vector};

/// Sweep budget for [`jacobi_eigh`].
pub const MAX_SWEEPS: usize = 100;

/// Stop once the off-diagonal Frobenius norm falls to this fraction of the
/// input's Frobenius norm.
const RELATIVE_OFF_DIAGONAL_TOL: f64 = 1e-10;

/// Allowed asymmetry, relative to the largest element magnitude.
const SYMMETRY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    /// Unit 2-norm, first significant element positive.
    pub vector: Vector,
}

/// Eigenpairs of a symmetric matrix, sorted by eigenvalue descending.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub pairs: Vec<EigenPair>,
    pub source_dim: usize,
}

impl EigenDecomposition {
    pub fn values(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.value).collect()
    }

    /// Eigenvectors as columns, in eigenvalue order.
    pub fn vectors(&self) -> Matrix {
        let cols: Vec<Vector> = self.pairs.iter().map(|p| p.vector.clone()).collect();
        Matrix::from_columns(&cols).expect("decomposition is never empty")
    }
}

fn off_diagonal_norm(a: &[f64], n: usize) -> f64 {
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += a[i * n + j] * a[i * n + j];
            }
        }
    }
    sum.sqrt()
}

/// Eigendecomposition of a real symmetric matrix by cyclic Jacobi rotations.
///
/// Each sweep visits the strict upper triangle in row-major order and zeroes
/// every pivot with a plane rotation, accumulating the rotations into the
/// eigenvector matrix. Iteration stops once the off-diagonal Frobenius norm
/// is at most `1e-10` times the input's Frobenius norm, or fails with
/// [`LinalgError::NoConvergence`] after [`MAX_SWEEPS`] sweeps.
///
/// Results are a pure function of the input bits.
pub fn jacobi_eigh(c: &Matrix) -> Result<EigenDecomposition> {
    let n = c.rows();
    if n != c.cols() {
        return Err(LinalgError::NotSquare { rows: n, cols: c.cols() });
    }

    let scale = c.as_slice().iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut a = c.as_slice().to_vec();
    for i in 0..n {
        for j in i + 1..n {
            let (x, y) = (a[i * n + j], a[j * n + i]);
            let gap = (x - y).abs();
            if gap > SYMMETRY_TOL * scale {
                return Err(LinalgError::NotSymmetric { row: i, col: j, gap });
            }
            let avg = 0.5 * (x + y);
            a[i * n + j] = avg;
            a[j * n + i] = avg;
        }
    }

    let target = RELATIVE_OFF_DIAGONAL_TOL * c.frobenius_norm();
    let mut v = Matrix::identity(n).as_slice().to_vec();

    let mut converged = false;
    for _ in 0..=MAX_SWEEPS {
        if off_diagonal_norm(&a, n) <= target {
            converged = true;
            break;
        }
        sweep(&mut a, &mut v, n);
    }
    if !converged {
        return Err(LinalgError::NoConvergence { sweeps: MAX_SWEEPS });
    }

    let mut pairs: Vec<EigenPair> = (0..n)
        .map(|k| {
            let mut col: Vec<f64> = (0..n).map(|i| v[i * n + k]).collect();
            let norm = super::dot(&col, &col).sqrt();
            col.iter_mut().for_each(|x| *x /= norm);
            apply_sign_convention(&mut col);
            EigenPair { value: a[k * n + k], vector: Vector(col) }
        })
        .collect();
    // Stable sort: equal eigenvalues keep diagonal order.
    pairs.sort_by(|x, y| y.value.total_cmp(&x.value));

    Ok(EigenDecomposition { pairs, source_dim: n })
}

fn sweep(a: &mut [f64], v: &mut [f64], n: usize) {
    for p in 0..n {
        for q in p + 1..n {
            let apq = a[p * n + q];
            if apq == 0.0 {
                continue;
            }
            let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
            let t = if theta.abs() > 1e150 {
                0.5 / theta
            } else {
                theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
            };
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;

            a[p * n + p] -= t * apq;
            a[q * n + q] += t * apq;
            a[p * n + q] = 0.0;
            a[q * n + p] = 0.0;
            for r in 0..n {
                if r == p || r == q {
                    continue;
                }
                let arp = a[r * n + p];
                let arq = a[r * n + q];
                let new_rp = c * arp - s * arq;
                let new_rq = s * arp + c * arq;
                a[r * n + p] = new_rp;
                a[p * n + r] = new_rp;
                a[r * n + q] = new_rq;
                a[q * n + r] = new_rq;
            }
            for r in 0..n {
                let vrp = v[r * n + p];
                let vrq = v[r * n + q];
                v[r * n + p] = c * vrp - s * vrq;
                v[r * n + q] = s * vrp + c * vrq;
            }
        }
    }
}
