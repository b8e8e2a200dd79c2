//! Squared singular values of products of rectangular complex Ginibre
//! matrices, `Y = X_r ... X_1` with `X_j` of shape `(n + nu_j) x (n + nu_{j-1})`
//! and `nu_0 = 0`. Scaled by `n^{-r}`, their empirical law approaches the
//! Fuss-Catalan distribution of order `r`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::empirical::EmpiricalMeasure;
use crate::error::{Error, Result};
use crate::poly::ModelParams;
use crate::rng::Stream;

const SVD_MAX_ITER: usize = 10_000;

/// One draw of `n` scaled squared singular values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSample {
    pub params: ModelParams,
    pub values: Vec<f64>,
    pub seed: u64,
    pub stream: u64,
}

fn ginibre(rows: usize, cols: usize, rng: &mut Stream, scale: Complex64) -> DMatrix<Complex64> {
    // column-major fill, so the draw order is fixed
    DMatrix::from_fn(rows, cols, |_, _| rng.complex_gaussian() * scale)
}

/// Spectrum from stream `(seed, stream)`, with every matrix entry multiplied
/// by `entry_scale`.
pub fn sample_spectrum_scaled(
    params: &ModelParams,
    seed: u64,
    stream: u64,
    entry_scale: Complex64,
) -> Result<SpectrumSample> {
    let n = params.n() as usize;
    if n == 0 {
        return Err(Error::Domain("need n >= 1".into()));
    }
    let mut rng = Stream::new(seed, stream);
    let mut cols = n;
    let mut y: Option<DMatrix<Complex64>> = None;
    for &nu in params.nu() {
        let rows = n + nu as usize;
        let x = ginibre(rows, cols, &mut rng, entry_scale);
        y = Some(match y {
            None => x,
            Some(prev) => x * prev,
        });
        cols = rows;
    }
    let y = y.expect("r >= 1");
    let svd = y
        .try_svd(false, false, f64::EPSILON, SVD_MAX_ITER)
        .ok_or(Error::DecompositionFailure { seed })?;
    let scale = (n as f64).powi(params.r() as i32);
    let mut values: Vec<f64> = svd.singular_values.iter().map(|s| s * s / scale).collect();
    values.sort_by(f64::total_cmp);
    Ok(SpectrumSample {
        params: params.clone(),
        values,
        seed,
        stream,
    })
}

/// Spectrum with unit-variance entries from stream `(seed, 0)`.
pub fn sample_spectrum(params: &ModelParams, seed: u64) -> Result<SpectrumSample> {
    sample_spectrum_scaled(params, seed, 0, Complex64::new(1.0, 0.0))
}

/// `trials` independent spectra, trial `t` drawn from stream `(seed, t)`.
pub fn sample_trials(
    params: &ModelParams,
    trials: usize,
    seed: u64,
) -> Result<Vec<SpectrumSample>> {
    if trials == 0 {
        return Err(Error::Domain("need at least one trial".into()));
    }
    (0..trials)
        .into_par_iter()
        .map(|t| sample_spectrum_scaled(params, seed, t as u64, Complex64::new(1.0, 0.0)))
        .collect()
}

/// All values of `trials` spectra pooled into one measure.
pub fn aggregate_measure(
    params: &ModelParams,
    trials: usize,
    seed: u64,
) -> Result<EmpiricalMeasure> {
    let spectra = sample_trials(params, trials, seed)?;
    Ok(EmpiricalMeasure::new(
        spectra.into_iter().flat_map(|s| s.values).collect(),
    ))
}

/// `(1/N) sum x^k` over the pooled values.
pub fn mean_moment(m: &EmpiricalMeasure, k: u32) -> f64 {
    m.moment(k)
}

/// Mean over trials of the per-trial `k`-th moment and its standard error.
/// Values within one spectrum are correlated, so the error is taken across
/// trials.
pub fn moment_with_error(spectra: &[SpectrumSample], k: u32) -> (f64, f64) {
    let per: Vec<f64> = spectra
        .iter()
        .map(|s| s.values.iter().map(|v| v.powi(k as i32)).sum::<f64>() / s.values.len() as f64)
        .collect();
    let t = per.len() as f64;
    let mean = per.iter().sum::<f64>() / t;
    if per.len() < 2 {
        return (mean, f64::INFINITY);
    }
    let var = per.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (t - 1.0);
    (mean, (var / t).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(r: u32, nu: &[u32], n: u32) -> ModelParams {
        ModelParams::new(r, nu.to_vec(), n).unwrap()
    }

    #[test]
    fn one_by_one_is_exponential() {
        let params = p(1, &[0], 1);
        let trials = 100_000;
        let mean = (0..trials)
            .map(|s| sample_spectrum(&params, s).unwrap().values[0])
            .sum::<f64>()
            / trials as f64;
        assert!((mean - 1.0).abs() < 0.02);
    }

    #[test]
    fn shape_and_determinism() {
        let params = p(2, &[1, 3], 10);
        let a = sample_spectrum(&params, 5).unwrap();
        assert_eq!(a.values.len(), 10);
        assert!(a.values.iter().all(|&v| v >= 0.0));
        assert_eq!(a, sample_spectrum(&params, 5).unwrap());
        assert_ne!(a.values, sample_spectrum(&params, 6).unwrap().values);
    }

    #[test]
    fn scale_covariance() {
        let params = p(2, &[0, 1], 12);
        let a = sample_spectrum_scaled(&params, 9, 0, Complex64::new(1.0, 0.0)).unwrap();
        let b = sample_spectrum_scaled(&params, 9, 0, Complex64::new(2.0, 0.0)).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((y - 16.0 * x).abs() <= 1e-10 * y.max(1e-300));
        }
    }

    #[test]
    fn pooled_count() {
        let m = aggregate_measure(&p(1, &[0], 20), 7, 1).unwrap();
        assert_eq!(m.len(), 140);
        assert_eq!(mean_moment(&m, 0), 1.0);
        assert!(aggregate_measure(&p(1, &[0], 20), 0, 1).is_err());
    }
}
