//! Gauss-Legendre quadrature on (0, 1) with a rational transform for
//! integrals over (0, infinity).
//!
//! The semi-infinite integrals in the verification suite all decay
//! algebraically, so the substitution u = t/(1-t) turns them into smooth
//! integrands on the unit interval where Gauss-Legendre converges fast.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;

/// Default node count for verification integrals.
pub const DEFAULT_NODES: usize = 200;

const NEWTON_TOL: f64 = 5e-16;
const NEWTON_MAX_ITER: usize = 120;

/// Legendre P_n and its derivative at x via the three-term recurrence.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 2..=n {
        let next = ((2 * k - 1) as f64 * x * p - (k - 1) as f64 * p_prev) / k as f64;
        p_prev = p;
        p = next;
    }
    let dp = n as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

/// Gauss-Legendre rule mapped to (0, 1): weights sum to one and nodes are
/// strictly increasing inside the open interval.
#[derive(Clone, Debug)]
pub struct QuadRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadRule {
    pub fn gauss_legendre(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(
                "quadrature rule needs at least two nodes".into(),
            ));
        }
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        // roots come out in decreasing x order from this initial guess
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut converged = false;
            for _ in 0..NEWTON_MAX_ITER {
                let (p, dp) = legendre_pair(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() <= NEWTON_TOL {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::NumericalFailure(format!(
                    "Legendre root {i} of {n} did not converge"
                )));
            }
            let (_, dp) = legendre_pair(n, x);
            // x decreasing in i, so fill from the back for increasing nodes
            nodes[n - 1 - i] = 0.5 * (x + 1.0);
            weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
        }
        Ok(Self { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Integral of a matrix-valued integrand over (0, 1).
    pub fn integrate_unit<F>(&self, dim: usize, mut f: F) -> Result<ComplexMatrix>
    where
        F: FnMut(f64) -> Result<ComplexMatrix>,
    {
        let mut acc = ComplexMatrix::zeros(dim);
        for (&t, &w) in self.nodes.iter().zip(&self.weights) {
            acc = &acc + &f(t)?.scale_re(w);
        }
        Ok(acc)
    }

    /// Integral over (0, infinity) via u = t/(1-t), du = dt/(1-t)^2.
    pub fn integrate_semi_infinite<F>(&self, dim: usize, mut f: F) -> Result<ComplexMatrix>
    where
        F: FnMut(f64) -> Result<ComplexMatrix>,
    {
        self.integrate_unit(dim, |t| {
            let u = t / (1.0 - t);
            let jacobian = 1.0 / ((1.0 - t) * (1.0 - t));
            Ok(f(u)?.scale_re(jacobian))
        })
    }

    /// Scalar convenience wrapper over [`QuadRule::integrate_unit`].
    pub fn integrate_unit_scalar<F>(&self, mut f: F) -> Result<Complex64>
    where
        F: FnMut(f64) -> Complex64,
    {
        let m = self.integrate_unit(1, |t| Ok(ComplexMatrix::scalar(1, f(t))))?;
        Ok(m.get(0, 0))
    }

    /// Scalar convenience wrapper over [`QuadRule::integrate_semi_infinite`].
    pub fn integrate_semi_infinite_scalar<F>(&self, mut f: F) -> Result<Complex64>
    where
        F: FnMut(f64) -> Complex64,
    {
        let m = self.integrate_semi_infinite(1, |u| Ok(ComplexMatrix::scalar(1, f(u))))?;
        Ok(m.get(0, 0))
    }
}

/// Rule pair at q and 2q nodes; the difference between the two results
/// serves as the error estimate.
#[derive(Clone, Debug)]
pub struct QuadPair {
    coarse: QuadRule,
    fine: QuadRule,
}

impl QuadPair {
    pub fn new(nodes: usize) -> Result<Self> {
        Ok(Self {
            coarse: QuadRule::gauss_legendre(nodes)?,
            fine: QuadRule::gauss_legendre(2 * nodes)?,
        })
    }

    pub fn coarse(&self) -> &QuadRule {
        &self.coarse
    }

    pub fn fine(&self) -> &QuadRule {
        &self.fine
    }

    /// Fine-rule integral over (0, infinity) plus the coarse-vs-fine
    /// discrepancy as the error estimate.
    pub fn integrate_semi_infinite<F>(&self, dim: usize, f: F) -> Result<(ComplexMatrix, f64)>
    where
        F: Fn(f64) -> Result<ComplexMatrix>,
    {
        let coarse = self.coarse.integrate_semi_infinite(dim, &f)?;
        let fine = self.fine.integrate_semi_infinite(dim, &f)?;
        let err = (&fine - &coarse).norm_frobenius();
        Ok((fine, err))
    }

    /// Same scheme on (0, 1).
    pub fn integrate_unit<F>(&self, dim: usize, f: F) -> Result<(ComplexMatrix, f64)>
    where
        F: Fn(f64) -> Result<ComplexMatrix>,
    {
        let coarse = self.coarse.integrate_unit(dim, &f)?;
        let fine = self.fine.integrate_unit(dim, &f)?;
        let err = (&fine - &coarse).norm_frobenius();
        Ok((fine, err))
    }
}
