//! Least squares used by the extraction routines.

use crate::error::{Error, Result};

/// A fitted value with its one-sigma standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

impl Estimate {
    pub fn new(value: f64, std_error: f64) -> Self {
        Estimate { value, std_error }
    }

    /// |value − truth| in units of the standard error.
    pub fn z_score(&self, truth: f64) -> f64 {
        (self.value - truth).abs() / self.std_error
    }

    pub fn scale(self, factor: f64) -> Self {
        Estimate { value: self.value * factor, std_error: self.std_error * factor.abs() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: Estimate,
    pub intercept: Estimate,
    /// Root-mean-square residual.
    pub rms_residual: f64,
    pub points: usize,
}

/// Ordinary least squares y = a + b·x.
pub fn fit_line(x: &[f64], y: &[f64]) -> Result<LineFit> {
    let n = x.len().min(y.len());
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    let nf = n as f64;
    let mx = x[..n].iter().sum::<f64>() / nf;
    let my = y[..n].iter().sum::<f64>() / nf;
    let sxx: f64 = x[..n].iter().map(|v| (v - mx) * (v - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::FitFailure("all abscissae identical".into()));
    }
    let sxy: f64 = x[..n].iter().zip(&y[..n]).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x[..n]
        .iter()
        .zip(&y[..n])
        .map(|(a, b)| {
            let r = b - intercept - slope * a;
            r * r
        })
        .sum();
    let s2 = if n > 2 { rss / (nf - 2.0) } else { 0.0 };
    let se_slope = (s2 / sxx).sqrt();
    let se_intercept = (s2 * (1.0 / nf + mx * mx / sxx)).sqrt();
    Ok(LineFit {
        slope: Estimate::new(slope, se_slope),
        intercept: Estimate::new(intercept, se_intercept),
        rms_residual: (rss / nf).sqrt(),
        points: n,
    })
}

/// Least-squares slope of y = b·x through the origin.
pub fn fit_proportional(x: &[f64], y: &[f64]) -> Result<Estimate> {
    let n = x.len().min(y.len());
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    let sxx: f64 = x[..n].iter().map(|v| v * v).sum();
    if sxx == 0.0 {
        return Err(Error::FitFailure("all abscissae zero".into()));
    }
    let sxy: f64 = x[..n].iter().zip(&y[..n]).map(|(a, b)| a * b).sum();
    let slope = sxy / sxx;
    let rss: f64 = x[..n].iter().zip(&y[..n]).map(|(a, b)| (b - slope * a).powi(2)).sum();
    let se = (rss / (n as f64 - 1.0) / sxx).sqrt();
    Ok(Estimate::new(slope, se))
}

/// Mean and standard error of the mean.
pub fn mean_estimate(values: &[f64]) -> Result<Estimate> {
    let n = values.len();
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    Ok(Estimate::new(mean, (var / nf).sqrt()))
}

/// Outcome of [`levenberg_marquardt`].
#[derive(Debug, Clone)]
pub struct NonlinearFit {
    pub params: Vec<f64>,
    /// One-sigma errors from s²(JᵀJ)⁻¹ with s² = RSS/(n − p).
    pub std_errors: Vec<f64>,
    pub rss: f64,
    pub iterations: usize,
}

/// Damped Gauss-Newton minimisation of Σ rᵢ(p)².
///
/// `model` maps parameters to `(residuals, jacobian)` where the jacobian has
/// one row per residual and one column per parameter.
pub fn levenberg_marquardt<F>(model: F, initial: &[f64], max_iterations: usize) -> Result<NonlinearFit>
where
    F: Fn(&[f64]) -> (Vec<f64>, Vec<Vec<f64>>),
{
    use nalgebra::{DMatrix, DVector};

    let np = initial.len();
    let assemble = |p: &[f64]| {
        let (r, j) = model(p);
        let n = r.len();
        let jac = DMatrix::from_fn(n, np, |i, k| j[i][k]);
        (DVector::from_vec(r), jac)
    };
    let mut p = initial.to_vec();
    let (mut r, mut jac) = assemble(&p);
    let n = r.len();
    if n <= np {
        return Err(Error::InsufficientData { needed: np + 1, got: n });
    }
    let mut rss = r.norm_squared();
    let mut lambda = 1e-3;
    let mut iterations = 0;
    while iterations < max_iterations {
        iterations += 1;
        let jtj = jac.transpose() * &jac;
        let g = jac.transpose() * &r;
        let mut improved = false;
        for _ in 0..40 {
            let mut a = jtj.clone();
            for k in 0..np {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-300);
            }
            let Some(step) = a.lu().solve(&(-&g)) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(x, d)| x + d).collect();
            let (r_t, j_t) = assemble(&trial);
            let rss_t = r_t.norm_squared();
            if rss_t.is_finite() && rss_t <= rss {
                let rel_drop = (rss - rss_t) / rss.max(1e-300);
                let small_step = step.iter().zip(&p).all(|(d, x)| d.abs() <= 1e-12 * x.abs().max(1e-300));
                p = trial;
                r = r_t;
                jac = j_t;
                rss = rss_t;
                lambda = (lambda / 10.0).max(1e-12);
                improved = !(rel_drop < 1e-15 || small_step);
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    let jtj = jac.transpose() * &jac;
    let cov = jtj
        .try_inverse()
        .ok_or_else(|| Error::FitFailure("singular normal matrix at the solution".into()))?;
    let s2 = rss / (n - np) as f64;
    let std_errors = (0..np).map(|k| (s2 * cov[(k, k)]).abs().sqrt()).collect();
    Ok(NonlinearFit { params: p, std_errors, rss, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 3.0 - 2.0 * v).collect();
        let f = fit_line(&x, &y).unwrap();
        assert!((f.slope.value + 2.0).abs() < 1e-14);
        assert!((f.intercept.value - 3.0).abs() < 1e-14);
        assert!(f.slope.std_error < 1e-14);
    }

    #[test]
    fn too_few_points() {
        assert!(matches!(fit_line(&[1.0], &[1.0]), Err(Error::InsufficientData { .. })));
        assert!(fit_proportional(&[1.0], &[1.0]).is_err());
        assert!(fit_line(&[1.0, 1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn standard_error_of_known_scatter() {
        // y = x + e with e = ±1 alternating; s² = rss/(n-2)
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let y: Vec<f64> = x.iter().enumerate().map(|(i, v)| v + if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let f = fit_line(&x, &y).unwrap();
        let mx = 4.5;
        let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
        let rss: f64 = x
            .iter()
            .zip(&y)
            .map(|(a, b)| (b - f.intercept.value - f.slope.value * a).powi(2))
            .sum();
        assert!((f.slope.std_error - (rss / 8.0 / sxx).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn lm_recovers_exponential() {
        let t: Vec<f64> = (0..30).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = t.iter().map(|x| 2.5 * (-x / 0.7).exp()).collect();
        let fit = levenberg_marquardt(
            |p| {
                let mut r = Vec::new();
                let mut j = Vec::new();
                for (x, yv) in t.iter().zip(&y) {
                    let e = (-x / p[1]).exp();
                    r.push(p[0] * e - yv);
                    j.push(vec![e, p[0] * e * x / (p[1] * p[1])]);
                }
                (r, j)
            },
            &[1.0, 2.0],
            200,
        )
        .unwrap();
        assert!((fit.params[0] - 2.5).abs() < 1e-9);
        assert!((fit.params[1] - 0.7).abs() < 1e-9);
    }
}
