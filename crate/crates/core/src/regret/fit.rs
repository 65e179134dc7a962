//! Least-squares fits of a regret curve on `ln²T`, `lnT` and `T` bases.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Points earlier than this are transient and left out of the fits.
pub const FIT_CUTOFF: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegretModel {
    /// `a ln²T + b lnT + c`
    Ln2,
    /// `a lnT + c`
    Ln,
    /// `a T + c`
    Linear,
}

impl RegretModel {
    pub const ALL: [RegretModel; 3] = [RegretModel::Ln2, RegretModel::Ln, RegretModel::Linear];

    pub fn tag(self) -> &'static str {
        match self {
            RegretModel::Ln2 => "ln2",
            RegretModel::Ln => "ln",
            RegretModel::Linear => "linear",
        }
    }

    fn basis(self, t: f64) -> Vec<f64> {
        let l = t.ln();
        match self {
            RegretModel::Ln2 => vec![l * l, l, 1.0],
            RegretModel::Ln => vec![l, 1.0],
            RegretModel::Linear => vec![t, 1.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelFit {
    pub model: RegretModel,
    /// Highest-order term first, constant last.
    pub coefficients: Vec<f64>,
    pub rss: f64,
}

impl ModelFit {
    pub fn predict(&self, t: f64) -> f64 {
        self.model
            .basis(t)
            .iter()
            .zip(&self.coefficients)
            .map(|(b, c)| b * c)
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub fits: Vec<ModelFit>,
    pub preferred: RegretModel,
    /// Total sum of squares about the mean, for scale.
    pub tss: f64,
    pub points: usize,
}

impl FitResult {
    pub fn get(&self, model: RegretModel) -> &ModelFit {
        self.fits
            .iter()
            .find(|f| f.model == model)
            .expect("every model is fitted")
    }

    /// The `ln²T` coefficient.
    pub fn c1(&self) -> f64 {
        self.get(RegretModel::Ln2).coefficients[0]
    }
}

fn ols(model: RegretModel, times: &[f64], values: &[f64]) -> Result<ModelFit> {
    let k = model.basis(1.0).len();
    let x = DMatrix::from_fn(times.len(), k, |i, j| model.basis(times[i])[j]);
    let y = DVector::from_column_slice(values);
    let svd = x.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if !(svd.singular_values.min() > smax * 1e-12) {
        return Err(Error::DegenerateDesign(model.tag()));
    }
    let beta = svd
        .solve(&y, 0.0)
        .map_err(|_| Error::DegenerateDesign(model.tag()))?;
    let rss = (x * &beta - y).norm_squared();
    Ok(ModelFit {
        model,
        coefficients: beta.iter().cloned().collect(),
        rss,
    })
}

/// Fits all three models to `(time, value)` with `time ≥ 10`. The preferred
/// model has the smallest residual; residuals within `1e-10·TSS` of each other
/// count as equal and the model with fewer terms wins.
pub fn fit_regret_curves(times: &[f64], values: &[f64]) -> Result<FitResult> {
    if times.len() != values.len() {
        return Err(Error::Structural(format!(
            "{} times for {} values",
            times.len(),
            values.len()
        )));
    }
    let (t, v): (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= FIT_CUTOFF)
        .map(|(t, v)| (*t, *v))
        .unzip();
    if t.len() < 10 {
        return Err(Error::EmptyInput(
            "regret fit needs at least 10 points with T >= 10",
        ));
    }
    let fits = RegretModel::ALL
        .iter()
        .map(|&m| ols(m, &t, &v))
        .collect::<Result<Vec<_>>>()?;
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let tss: f64 = v.iter().map(|y| (y - mean) * (y - mean)).sum();
    let tie = 1e-10 * tss.max(f64::MIN_POSITIVE);
    let mut best = &fits[0];
    for f in &fits[1..] {
        let fewer = f.coefficients.len() < best.coefficients.len();
        if f.rss < best.rss - tie || (fewer && f.rss <= best.rss + tie) {
            best = f;
        }
    }
    Ok(FitResult {
        preferred: best.model,
        fits,
        tss,
        points: t.len(),
    })
}
