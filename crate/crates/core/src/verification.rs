//! Jacobians of the one-step map at a steady state and the stability
//! verdicts derived from them.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexValue, DenseMatrix};
use crate::pds::{LinearPds, StateVector};
use crate::schemes::Sspmprk2Params;

/// Default central-difference step for a state `y`.
pub fn default_fd_step(y: &[f64]) -> f64 {
    1e-6 * y.iter().fold(1.0_f64, |m, v| m.max(v.abs()))
}

/// Central-difference Jacobian of `step` at `y_star`.
pub fn fd_jacobian<F>(step: F, y_star: &StateVector, h: f64) -> Result<DenseMatrix>
where
    F: Fn(&StateVector) -> Result<Vec<f64>>,
{
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Parameter(format!("step h must be positive (h = {h})")));
    }
    let n = y_star.len();
    let mut jac = DenseMatrix::zeros(n, n);
    for i in 0..n {
        let shifted = |sign: f64| -> Result<StateVector> {
            let mut y = y_star.to_vec();
            y[i] += sign * h;
            if y[i] <= 0.0 {
                return Err(Error::StepSize { index: i, value: y[i] });
            }
            StateVector::new(y)
        };
        let plus = step(&shifted(1.0)?)?;
        let minus = step(&shifted(-1.0)?)?;
        if plus.len() != n || minus.len() != n {
            return Err(Error::Dimension("step map changed the state length".into()));
        }
        let col: Vec<f64> = plus.iter().zip(&minus).map(|(p, m)| (p - m) / (2.0 * h)).collect();
        jac.set_column(i, &col);
    }
    Ok(jac)
}

/// Closed-form Jacobian of SSPMPRK2 at a positive steady state of `y' = Ay`.
pub fn analytic_jacobian_sspmprk2(
    system: &LinearPds,
    dt: f64,
    p: &Sspmprk2Params,
) -> Result<DenseMatrix> {
    let n = system.dim();
    let eye = DenseMatrix::identity(n);
    let dt_a = system.matrix().scale(dt);
    let one_minus = 1.0 - p.alpha * p.beta;
    let c1 = (p.s - 1.0) * one_minus + p.beta20;
    let c2 = -p.s * one_minus + p.beta21;

    let inner = eye.add_scaled(&dt_a, -p.beta);
    let inner_inv = inner.solve_matrix(&eye)?;
    let tail = eye.scale(p.alpha).add_scaled(&dt_a, c2).matmul(&inner_inv);
    let body = eye.scale(1.0 - p.alpha).add_scaled(&dt_a, c1).add_scaled(&tail, 1.0);
    eye.add_scaled(&dt_a, -one_minus).solve_matrix(&body)
}

#[derive(Debug, Clone)]
pub struct JacobianReport {
    pub matrix: DenseMatrix,
    pub eigenvalues: Vec<ComplexValue>,
    pub spectral_radius: f64,
    /// `‖(J − I)v‖₂ / ‖v‖₂` for each kernel vector `v`.
    pub kernel_residuals: Vec<f64>,
}

impl JacobianReport {
    pub fn new(matrix: DenseMatrix, kernel_basis: &[Vec<f64>]) -> Result<Self> {
        let eigenvalues = linalg::eigenvalues(&matrix)?;
        let spectral_radius = eigenvalues.iter().map(|l| l.norm()).fold(0.0, f64::max);
        let kernel_residuals = kernel_basis
            .iter()
            .map(|v| kernel_residual(&matrix, v))
            .collect::<Result<_>>()?;
        Ok(Self {
            matrix,
            eigenvalues,
            spectral_radius,
            kernel_residuals,
        })
    }
}

fn kernel_residual(j: &DenseMatrix, v: &[f64]) -> Result<f64> {
    if v.len() != j.n_cols() {
        return Err(Error::Dimension(format!(
            "kernel vector of length {} for a {}x{} Jacobian",
            v.len(),
            j.n_rows(),
            j.n_cols()
        )));
    }
    let jv = j.mul_vec(v);
    let norm = linalg::norm2(v);
    if norm == 0.0 {
        return Err(Error::Parameter("zero kernel vector".into()));
    }
    Ok(linalg::dist2(&jv, v) / norm)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// All eigenvalues strictly inside the unit disk; no kernel.
    HyperbolicContractive,
    /// Eigenvalue 1 exactly on the kernel, everything else inside the disk.
    StableNonHyperbolic,
    Unstable,
    /// A non-kernel eigenvalue lies within `tol` of the unit circle.
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Verdict::HyperbolicContractive => "hyperbolic-contractive",
            Verdict::StableNonHyperbolic => "stable-non-hyperbolic",
            Verdict::Unstable => "unstable",
            Verdict::Inconclusive => "inconclusive",
        };
        f.write_str(s)
    }
}

pub const DEFAULT_VERDICT_TOL: f64 = 1e-6;

/// Eigenvalues left after removing up to `k` eigenvalues within `tol` of 1.
pub fn deflated_eigenvalues(eigs: &[ComplexValue], k: usize, tol: f64) -> Vec<ComplexValue> {
    let one = ComplexValue::new(1.0, 0.0);
    let mut near: Vec<usize> = (0..eigs.len())
        .filter(|&i| (eigs[i] - one).norm() <= tol)
        .collect();
    near.sort_by(|&a, &b| (eigs[a] - one).norm().total_cmp(&(eigs[b] - one).norm()));
    near.truncate(k);
    (0..eigs.len())
        .filter(|i| !near.contains(i))
        .map(|i| eigs[i])
        .collect()
}

pub fn stability_verdict(j: &DenseMatrix, kernel_basis: &[Vec<f64>], tol: f64) -> Result<Verdict> {
    for (idx, v) in kernel_basis.iter().enumerate() {
        let r = kernel_residual(j, v)?;
        if r > tol {
            return Err(Error::ContractViolation(format!(
                "kernel vector {idx} is not fixed by the Jacobian (residual {r:e})"
            )));
        }
    }
    let remaining = deflated_eigenvalues(&linalg::eigenvalues(j)?, kernel_basis.len(), tol);
    let radius = remaining.iter().map(|l| l.norm()).fold(0.0, f64::max);
    Ok(if radius > 1.0 + tol {
        Verdict::Unstable
    } else if radius >= 1.0 - tol {
        Verdict::Inconclusive
    } else if kernel_basis.is_empty() {
        Verdict::HyperbolicContractive
    } else {
        Verdict::StableNonHyperbolic
    })
}
