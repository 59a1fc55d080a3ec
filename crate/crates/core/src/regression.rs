//! Polynomial least squares through the normal equations.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};

/// Result of a least-squares polynomial fit.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyFit {
    /// Coefficient for each requested power, in the order the powers were given.
    pub coeffs: Vec<f64>,
    pub mse: f64,
    pub r2: f64,
}

/// Fits `y ≈ Σ c_k x^{p_k}` for the given powers.
///
/// Inputs are rescaled by `max |x|` before forming the normal equations so the
/// Gram matrix stays well conditioned; coefficients are mapped back afterwards.
pub fn fit_powers(xs: &[f64], ys: &[f64], powers: &[i32]) -> Result<PolyFit> {
    assert_eq!(xs.len(), ys.len());
    let k = powers.len();
    if xs.len() < k {
        return Err(Error::InsufficientData(alloc::format!(
            "{} rows for {k} coefficients",
            xs.len()
        )));
    }
    let scale = xs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let scale = if scale > 0.0 { scale } else { 1.0 };

    let mut gram = Matrix::zeros(k, k);
    let mut rhs = alloc::vec![0.0; k];
    let mut basis = alloc::vec![0.0; k];
    for (&x, &y) in xs.iter().zip(ys) {
        let u = x / scale;
        for (b, &p) in basis.iter_mut().zip(powers) {
            *b = libm::pow(u, f64::from(p));
        }
        for r in 0..k {
            rhs[r] += basis[r] * y;
            for c in 0..k {
                gram[(r, c)] += basis[r] * basis[c];
            }
        }
    }
    let scaled = linalg::solve(&gram, &rhs, 1e-12)
        .ok_or_else(|| Error::InsufficientData("design matrix is rank deficient".into()))?;
    let coeffs: Vec<f64> = scaled
        .iter()
        .zip(powers)
        .map(|(c, &p)| c / libm::pow(scale, f64::from(p)))
        .collect();

    let eval = |x: f64| -> f64 {
        coeffs
            .iter()
            .zip(powers)
            .map(|(c, &p)| c * libm::pow(x, f64::from(p)))
            .sum()
    };
    let residuals: Vec<f64> = xs.iter().zip(ys).map(|(&x, &y)| y - eval(x)).collect();
    let (mse, r2) = goodness(ys, &residuals);
    Ok(PolyFit { coeffs, mse, r2 })
}

/// Mean squared error and coefficient of determination.
pub fn goodness(ys: &[f64], residuals: &[f64]) -> (f64, f64) {
    let n = ys.len() as f64;
    let ss_res: f64 = residuals.iter().map(|r| r * r).sum();
    let mean = ys.iter().sum::<f64>() / n;
    let ss_tot: f64 = ys.iter().map(|y| (y - mean) * (y - mean)).sum();
    let r2 = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else if ss_res <= f64::EPSILON {
        1.0
    } else {
        0.0
    };
    (ss_res / n, r2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn recovers_quadratic_with_intercept() {
        let xs: Vec<f64> = (0..20).map(|i| i as f64 * 0.7).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 1.5 - 0.3 * x + 0.05 * x * x).collect();
        let fit = fit_powers(&xs, &ys, &[0, 1, 2]).unwrap();
        for (got, want) in fit.coeffs.iter().zip([1.5, -0.3, 0.05]) {
            assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        }
        assert!(fit.mse < 1e-20);
        assert!(fit.r2 > 1.0 - 1e-12);
    }

    #[test]
    fn rank_deficient() {
        let err = fit_powers(&[2.0, 2.0, 2.0], &[1.0, 1.1, 0.9], &[1, 2]).unwrap_err();
        assert!(matches!(err, Error::InsufficientData(_)));
    }

    #[test]
    fn zero_targets_fit_perfectly() {
        let fit = fit_powers(&[1.0, 2.0, 3.0], &[0.0; 3], &[1, 2]).unwrap();
        assert_eq!(fit.coeffs, vec![0.0, 0.0]);
        assert_eq!(fit.r2, 1.0);
    }
}
