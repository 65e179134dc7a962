//! Tridiagonal matrices and the dominant eigenpair of a tridiagonal matrix
//! with positive off-diagonal products.
//!
//! A non-symmetric tridiagonal `A` whose paired off-diagonals have positive
//! products is similar to the symmetric `J = D⁻¹ A D` with off-diagonals
//! `√(A[i][i+1] · A[i+1][i])`. The spectrum is therefore real and simple, the
//! largest eigenvalue is found by Sturm-sequence bisection and its eigenvector
//! by inverse iteration on `J`, then mapped back through `D`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// General tridiagonal matrix in band storage.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    /// `A[i][i]`, length `n`.
    pub diag: Vec<f64>,
    /// `A[i][i+1]`, length `n - 1`.
    pub upper: Vec<f64>,
    /// `A[i+1][i]`, length `n - 1`.
    pub lower: Vec<f64>,
}

impl Tridiagonal {
    pub fn new(diag: Vec<f64>, upper: Vec<f64>, lower: Vec<f64>) -> Result<Self> {
        let n = diag.len();
        if n == 0 {
            return Err(Error::Structural("empty matrix".into()));
        }
        if upper.len() != n - 1 || lower.len() != n - 1 {
            return Err(Error::Structural(format!(
                "band lengths {}/{} do not match dimension {n}",
                upper.len(),
                lower.len()
            )));
        }
        Ok(Self { diag, upper, lower })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Extracts the band of a dense matrix, rejecting any non-zero entry off it.
    pub fn from_dense(m: &DMatrix<f64>) -> Result<Self> {
        let n = m.nrows();
        if n != m.ncols() || n == 0 {
            return Err(Error::Structural(format!(
                "matrix is {}x{}, expected square",
                m.nrows(),
                m.ncols()
            )));
        }
        for i in 0..n {
            for j in 0..n {
                if i.abs_diff(j) > 1 && m[(i, j)] != 0.0 {
                    return Err(Error::Structural(format!(
                        "non-zero entry outside the band at ({i}, {j})"
                    )));
                }
            }
        }
        let diag = (0..n).map(|i| m[(i, i)]).collect();
        let upper = (1..n).map(|i| m[(i - 1, i)]).collect();
        let lower = (1..n).map(|i| m[(i, i - 1)]).collect();
        Self::new(diag, upper, lower)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
        }
        for i in 0..n - 1 {
            m[(i, i + 1)] = self.upper[i];
            m[(i + 1, i)] = self.lower[i];
        }
        m
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i + 1 < n {
                    s += self.upper[i] * x[i + 1];
                }
                if i > 0 {
                    s += self.lower[i - 1] * x[i - 1];
                }
                s
            })
            .collect()
    }

    /// Infinity norm (max absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i].abs();
                if i + 1 < n {
                    s += self.upper[i].abs();
                }
                if i > 0 {
                    s += self.lower[i - 1].abs();
                }
                s
            })
            .fold(0.0, f64::max)
    }

    /// Diagonal similarity `J = D⁻¹ A D` onto a symmetric matrix. Requires
    /// strictly positive off-diagonals.
    pub fn symmetrize(&self) -> Result<Symmetrized> {
        for (i, (&u, &l)) in self.upper.iter().zip(&self.lower).enumerate() {
            if !(u > 0.0 && l > 0.0) {
                return Err(Error::Structural(format!(
                    "off-diagonal pair ({u}, {l}) at row {i} is not strictly positive"
                )));
            }
        }
        let off = self
            .upper
            .iter()
            .zip(&self.lower)
            .map(|(u, l)| (u * l).sqrt())
            .collect();
        // d[i+1] / d[i] = sqrt(lower[i] / upper[i])
        let mut log_d = Vec::with_capacity(self.dim());
        log_d.push(0.0);
        for (u, l) in self.upper.iter().zip(&self.lower) {
            let prev = *log_d.last().unwrap();
            log_d.push(prev + 0.5 * (l.ln() - u.ln()));
        }
        Ok(Symmetrized {
            matrix: SymTridiagonal {
                diag: self.diag.clone(),
                off,
            },
            scaling: log_d.into_iter().map(f64::exp).collect(),
        })
    }
}

/// Output of [`Tridiagonal::symmetrize`]: `A = D J D⁻¹` with `D = diag(scaling)`.
#[derive(Debug, Clone)]
pub struct Symmetrized {
    pub matrix: SymTridiagonal,
    pub scaling: Vec<f64>,
}

impl Symmetrized {
    /// `max(d) / min(d)`, the condition number of the similarity.
    pub fn scaling_condition(&self) -> f64 {
        let max = self.scaling.iter().cloned().fold(f64::MIN, f64::max);
        let min = self.scaling.iter().cloned().fold(f64::MAX, f64::min);
        max / min
    }
}

/// Symmetric tridiagonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
        }
        for (i, &b) in self.off.iter().enumerate() {
            m[(i, i + 1)] = b;
            m[(i + 1, i)] = b;
        }
        m
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            if i > 0 {
                r += self.off[i - 1].abs();
            }
            if i + 1 < n {
                r += self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `x` (Sturm count of the LDLᵀ
    /// factorisation of `J - xI`).
    pub fn count_below(&self, x: f64) -> usize {
        let tiny = f64::MIN_POSITIVE.sqrt();
        let mut count = 0;
        let mut d = self.diag[0] - x;
        if d == 0.0 {
            d = -tiny;
        }
        if d < 0.0 {
            count += 1;
        }
        for i in 1..self.dim() {
            let b = self.off[i - 1];
            d = self.diag[i] - x - b * b / d;
            if d == 0.0 {
                d = -tiny;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Largest eigenvalue by bisection to full working precision.
    pub fn largest_eigenvalue(&self) -> f64 {
        let n = self.dim();
        if n == 1 {
            return self.diag[0];
        }
        let (lo0, hi0) = self.gershgorin();
        let pad = f64::EPSILON * (lo0.abs().max(hi0.abs()) + 1.0);
        let (mut lo, mut hi) = (lo0 - pad, hi0 + pad);
        for _ in 0..256 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) == n {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Eigenvector for a (converged) eigenvalue by inverse iteration, scaled
    /// to unit max-norm.
    pub fn eigenvector(&self, lambda: f64) -> Vec<f64> {
        let n = self.dim();
        if n == 1 {
            return vec![1.0];
        }
        let scale = self
            .gershgorin()
            .1
            .abs()
            .max(self.gershgorin().0.abs())
            .max(f64::MIN_POSITIVE);
        let mut x = vec![1.0; n];
        for _ in 0..3 {
            let mut dl = self.off.clone();
            let mut du = self.off.clone();
            let mut d: Vec<f64> = self.diag.iter().map(|a| a - lambda).collect();
            solve_tridiagonal(&mut dl, &mut d, &mut du, &mut x, f64::EPSILON * scale);
            normalize_max_abs(&mut x);
        }
        x
    }
}

/// In-place solve of a tridiagonal system with partial pivoting (the LAPACK
/// `gtsv` elimination). On return `rhs` holds the solution; the band vectors
/// are overwritten. Zero pivots are replaced by `pivot_floor`.
pub fn solve_tridiagonal(
    dl: &mut [f64],
    d: &mut [f64],
    du: &mut [f64],
    rhs: &mut [f64],
    pivot_floor: f64,
) {
    let n = d.len();
    let floor = |x: f64| {
        if x.abs() < pivot_floor {
            pivot_floor.copysign(if x == 0.0 { 1.0 } else { x })
        } else {
            x
        }
    };
    for i in 0..n.saturating_sub(1) {
        if d[i].abs() >= dl[i].abs() {
            d[i] = floor(d[i]);
            let fact = dl[i] / d[i];
            d[i + 1] -= fact * du[i];
            rhs[i + 1] -= fact * rhs[i];
            if i + 2 < n {
                dl[i] = 0.0;
            }
        } else {
            let fact = d[i] / dl[i];
            d[i] = dl[i];
            let temp = d[i + 1];
            d[i + 1] = du[i] - fact * temp;
            if i + 2 < n {
                dl[i] = du[i + 1];
                du[i + 1] = -fact * dl[i];
            }
            du[i] = temp;
            let b = rhs[i];
            rhs[i] = rhs[i + 1];
            rhs[i + 1] = b - fact * rhs[i + 1];
        }
    }
    d[n - 1] = floor(d[n - 1]);
    rhs[n - 1] /= d[n - 1];
    if n > 1 {
        rhs[n - 2] = (rhs[n - 2] - du[n - 2] * rhs[n - 1]) / d[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        rhs[i] = (rhs[i] - du[i] * rhs[i + 1] - dl[i] * rhs[i + 2]) / d[i];
    }
}

fn normalize_max_abs(x: &mut [f64]) {
    let (mut idx, mut m) = (0, 0.0);
    for (i, v) in x.iter().enumerate() {
        if v.abs() > m {
            m = v.abs();
            idx = i;
        }
    }
    let s = x[idx];
    if s != 0.0 {
        x.iter_mut().for_each(|v| *v /= s);
    }
}

/// Largest eigenvalue and its strictly positive eigenvector (max entry 1).
#[derive(Debug, Clone, PartialEq)]
pub struct DominantEigenpair {
    pub value: f64,
    pub vector: Vec<f64>,
}

/// Dominant eigenpair of a tridiagonal matrix with positive off-diagonals.
pub fn dominant_eigenpair(a: &Tridiagonal) -> Result<DominantEigenpair> {
    if a.dim() == 1 {
        return Ok(DominantEigenpair {
            value: a.diag[0],
            vector: vec![1.0],
        });
    }
    let sym = a.symmetrize()?;
    let value = sym.matrix.largest_eigenvalue();
    let y = sym.matrix.eigenvector(value);
    let mut x: Vec<f64> = y.iter().zip(&sym.scaling).map(|(y, d)| y * d).collect();
    let max = x.iter().cloned().fold(f64::MIN, f64::max);
    let min = x.iter().cloned().fold(f64::MAX, f64::min);
    if max.abs() < min.abs() {
        // eigenvector came back with negative orientation
        x.iter_mut().for_each(|v| *v = -*v);
    }
    let max = x.iter().cloned().fold(f64::MIN, f64::max);
    x.iter_mut().for_each(|v| *v /= max);
    if let Some((index, &value)) = x.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::NonPositivePerron { index, value });
    }
    let residual = a
        .mul_vec(&x)
        .iter()
        .zip(&x)
        .map(|(ax, xi)| (ax - value * xi).abs())
        .fold(0.0, f64::max);
    let bound = 1e-10 * a.norm_inf().max(f64::MIN_POSITIVE);
    if !(residual <= bound) {
        return Err(Error::Eigen(format!(
            "eigenpair residual {residual:e} exceeds {bound:e}"
        )));
    }
    Ok(DominantEigenpair { value, vector: x })
}
