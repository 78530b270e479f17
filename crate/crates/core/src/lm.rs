//! Levenberg-Marquardt for small dense least-squares problems.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

pub const MAX_ITERATIONS: usize = 200;
pub const GRADIENT_RATIO: f64 = 1e-10;
pub const MAX_CONDITION: f64 = 1e12;

const LAMBDA_START: f64 = 1e-3;
const LAMBDA_CEILING: f64 = 1e16;

#[derive(Debug, Clone)]
pub struct LmOutcome {
    pub params: Vec<f64>,
    pub residuals: Vec<f64>,
    pub covariance: DMatrix<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Condition number of the column-scaled normal matrix at the solution.
    pub condition: f64,
    /// Final gradient norm over the initial one.
    pub gradient_ratio: f64,
}

/// Minimizes `|r(p)|^2`. `model` fills the residual vector and the Jacobian
/// `dr/dp` (rows: residuals, columns: parameters).
pub fn minimize<F>(p0: &[f64], m: usize, model: F) -> LmOutcome
where
    F: Fn(&[f64], &mut [f64], &mut DMatrix<f64>),
{
    let n = p0.len();
    let mut p = p0.to_vec();
    let mut r = vec![0.0; m];
    let mut jac = DMatrix::zeros(m, n);
    model(&p, &mut r, &mut jac);
    let mut cost = sq_norm(&r);

    let grad = |jac: &DMatrix<f64>, r: &[f64]| jac.transpose() * DVector::from_column_slice(r);
    let mut g = grad(&jac, &r);
    let g0 = g.norm();
    let mut lambda = LAMBDA_START;
    let mut iterations = 0;
    let mut converged = g0 == 0.0;

    let mut trial_r = vec![0.0; m];
    let mut trial_jac = DMatrix::zeros(m, n);
    while !converged && iterations < MAX_ITERATIONS {
        iterations += 1;
        let a = jac.transpose() * &jac;
        let mut damped = a.clone();
        for i in 0..n {
            let d = if a[(i, i)] > 0.0 { a[(i, i)] } else { 1.0 };
            damped[(i, i)] += lambda * d;
        }
        let step = match damped.cholesky() {
            Some(ch) => ch.solve(&(-&g)),
            None => {
                lambda *= 10.0;
                if lambda > LAMBDA_CEILING {
                    break;
                }
                continue;
            }
        };
        let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(x, s)| x + s).collect();
        model(&trial, &mut trial_r, &mut trial_jac);
        let trial_cost = sq_norm(&trial_r);
        if trial_cost.is_finite() && trial_cost <= cost {
            let moved = trial.iter().zip(&p).any(|(a, b)| a != b);
            p = trial;
            std::mem::swap(&mut r, &mut trial_r);
            std::mem::swap(&mut jac, &mut trial_jac);
            cost = trial_cost;
            g = grad(&jac, &r);
            lambda = (lambda / 10.0).max(1e-12);
            converged = g.norm() < GRADIENT_RATIO * g0;
            if !moved {
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > LAMBDA_CEILING {
                break;
            }
        }
    }

    let a = jac.transpose() * &jac;
    let condition = scaled_condition(&a);
    let dof = m.saturating_sub(n).max(1) as f64;
    let s2 = cost / dof;
    let covariance = a
        .clone()
        .try_inverse()
        .map(|inv| inv * s2)
        .unwrap_or_else(|| DMatrix::from_element(n, n, f64::NAN));
    LmOutcome {
        params: p,
        residual_norm: cost.sqrt(),
        residuals: r,
        covariance,
        iterations,
        converged,
        condition,
        gradient_ratio: if g0 > 0.0 { g.norm() / g0 } else { 0.0 },
    }
}

fn sq_norm(r: &[f64]) -> f64 {
    r.iter().map(|x| x * x).sum()
}

/// Condition number of `D^-1/2 A D^-1/2`, `D = diag(A)`.
pub fn scaled_condition(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let d: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    if d.iter().any(|&x| !(x > 0.0)) {
        return f64::INFINITY;
    }
    let scaled = DMatrix::from_fn(n, n, |i, j| a[(i, j)] / (d[i] * d[j]).sqrt());
    let eig = SymmetricEigen::new(scaled).eigenvalues;
    let max = eig.iter().cloned().fold(f64::MIN, f64::max);
    let min = eig.iter().cloned().fold(f64::MAX, f64::min);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fits_an_exponential() {
        let xs: Vec<f64> = (0..20).map(|i| i as f64 * 0.1).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.5 * (-1.3 * x).exp()).collect();
        let out = minimize(&[1.0, -0.5], xs.len(), |p, r, j| {
            for (i, (&x, &y)) in xs.iter().zip(&ys).enumerate() {
                let e = (p[1] * x).exp();
                r[i] = p[0] * e - y;
                j[(i, 0)] = e;
                j[(i, 1)] = p[0] * x * e;
            }
        });
        assert!(out.converged, "{out:?}");
        assert!((out.params[0] - 2.5).abs() < 1e-10);
        assert!((out.params[1] + 1.3).abs() < 1e-10);
    }

    #[test]
    fn collinear_columns_are_flagged() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0 + 1e-14]);
        assert!(scaled_condition(&a) > MAX_CONDITION);
    }
}
