//! SSPMPRK2(α, β) and SSPMPRK3(η₂) one-step maps.
//!
//! Every stage is a modified Patankar stage: production terms are weighted by
//! `x_j / w_j` and destruction terms by `x_i / w_i`, where `x` is the unknown
//! stage value and `w` a positive weight built from earlier stages. The stage
//! therefore reduces to one linear solve whose matrix has unit column sums and
//! is an M-matrix, which gives positivity and conservation for any `Δt > 0`.

mod params;

pub use params::{sspmprk3_constants, Sspmprk2Params, Sspmprk3Params, ETA2_MAX};
pub(crate) use params::check_eta2;

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{self, DenseMatrix};
use crate::pds::{ProductionDestruction, StateVector};

/// Intermediate values of the third-order step.
#[derive(Debug, Clone, PartialEq)]
pub struct ThirdOrderStages {
    pub rho: Vec<f64>,
    pub y2: Vec<f64>,
    /// Not sign-constrained; only used inside `sigma`.
    pub a: Vec<f64>,
    pub sigma: Vec<f64>,
}

/// Output of one step together with its stage vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub y_next: StateVector,
    pub y1: Vec<f64>,
    pub third_order: Option<ThirdOrderStages>,
}

/// Rates at one stage state scaled by a coefficient (which includes `Δt`).
struct Rates {
    coeff: f64,
    production: DenseMatrix,
    destruction: DenseMatrix,
}

impl Rates {
    fn at<P: ProductionDestruction + ?Sized>(pds: &P, y: &[f64], coeff: f64) -> Self {
        Self {
            coeff,
            production: pds.production_matrix(y),
            destruction: pds.destruction_matrix(y),
        }
    }

    fn rescaled(&self, coeff: f64) -> Self {
        Self {
            coeff,
            production: self.production.clone(),
            destruction: self.destruction.clone(),
        }
    }
}

/// Solves `x_i = rhs_i + Σ_k c_k Σ_j (p^k_ij x_j / w_j − d^k_ij x_i / w_i)`.
fn patankar_stage(rhs: &[f64], rates: &[&Rates], weights: &[f64]) -> Result<Vec<f64>> {
    let n = rhs.len();
    let mut m = DenseMatrix::identity(n);
    for r in rates {
        if r.coeff == 0.0 {
            continue;
        }
        for i in 0..n {
            let dsum: f64 = r.destruction.row(i).iter().sum();
            m[(i, i)] += r.coeff * dsum / weights[i];
            for j in 0..n {
                if i != j {
                    m[(i, j)] -= r.coeff * r.production[(i, j)] / weights[j];
                }
            }
        }
    }
    linalg::lu_solve(&m, rhs)
}

/// `(base)^{1−s} (other)^s` evaluated through logarithms.
fn blended_weight(base: &[f64], other: &[f64], s: f64) -> Vec<f64> {
    base.iter()
        .zip(other)
        .map(|(b, o)| ((1.0 - s) * b.ln() + s * o.ln()).exp())
        .collect()
}

fn check_inputs<P: ProductionDestruction + ?Sized>(pds: &P, y: &[f64], dt: f64) -> Result<()> {
    if y.len() != pds.dim() {
        return Err(Error::Dimension(format!(
            "state has length {}, system dimension is {}",
            y.len(),
            pds.dim()
        )));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::Parameter(format!("time step must be positive ({dt})")));
    }
    if let Some((index, &value)) = y.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::Domain { index, value });
    }
    Ok(())
}

fn positive(values: Vec<f64>) -> Result<Vec<f64>> {
    if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::Domain { index, value });
    }
    Ok(values)
}

pub fn sspmprk2_step<P: ProductionDestruction + ?Sized>(
    pds: &P,
    y: &StateVector,
    dt: f64,
    p: &Sspmprk2Params,
) -> Result<StepRecord> {
    let yn = y.as_slice();
    check_inputs(pds, yn, dt)?;

    let at_n = Rates::at(pds, yn, p.beta * dt);
    let y1 = positive(patankar_stage(yn, &[&at_n], yn)?)?;

    let rhs: Vec<f64> = yn
        .iter()
        .zip(&y1)
        .map(|(a, b)| (1.0 - p.alpha) * a + p.alpha * b)
        .collect();
    let weights = blended_weight(yn, &y1, p.s);
    let at_n = at_n.rescaled(p.beta20 * dt);
    let at_1 = Rates::at(pds, &y1, p.beta21 * dt);
    let y_next = patankar_stage(&rhs, &[&at_n, &at_1], &weights)?;

    Ok(StepRecord {
        y_next: StateVector::new(y_next)?,
        y1,
        third_order: None,
    })
}

pub fn sspmprk3_step<P: ProductionDestruction + ?Sized>(
    pds: &P,
    y: &StateVector,
    dt: f64,
    p: &Sspmprk3Params,
) -> Result<StepRecord> {
    let yn = y.as_slice();
    check_inputs(pds, yn, dt)?;

    let at_n = Rates::at(pds, yn, p.beta10 * dt);
    let rhs1: Vec<f64> = yn.iter().map(|v| p.alpha10 * v).collect();
    let y1 = positive(patankar_stage(&rhs1, &[&at_n], yn)?)?;

    let rho: Vec<f64> = yn
        .iter()
        .zip(&y1)
        .map(|(a, b)| p.n1 * b + p.n2 * b * b / a)
        .collect();

    let rhs2: Vec<f64> = yn
        .iter()
        .zip(&y1)
        .map(|(a, b)| p.alpha20 * a + p.alpha21 * b)
        .collect();
    let at_1 = Rates::at(pds, &y1, p.beta21 * dt);
    let y2 = positive(patankar_stage(
        &rhs2,
        &[&at_n.rescaled(p.beta20 * dt), &at_1],
        &rho,
    )?)?;

    // the a-stage is implicit in a itself with weights (yⁿ)^{1−s}(y⁽¹⁾)^s
    let rhs_a: Vec<f64> = yn
        .iter()
        .zip(&y1)
        .map(|(a, b)| p.eta1 * a + p.eta2 * b)
        .collect();
    let a_weights = blended_weight(yn, &y1, p.s);
    let a = patankar_stage(
        &rhs_a,
        &[&at_n.rescaled(p.eta3 * dt), &at_1.rescaled(p.eta4 * dt)],
        &a_weights,
    )?;

    let sigma: Vec<f64> = (0..yn.len())
        .map(|i| a[i] + p.zeta * yn[i] * y2[i] / rho[i])
        .collect();
    if let Some((index, &value)) = sigma.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::Guard { index, value });
    }

    let rhs3: Vec<f64> = (0..yn.len())
        .map(|i| p.alpha30 * yn[i] + p.alpha31 * y1[i] + p.alpha32 * y2[i])
        .collect();
    let at_2 = Rates::at(pds, &y2, p.beta32 * dt);
    let y_next = patankar_stage(
        &rhs3,
        &[
            &at_n.rescaled(p.beta30 * dt),
            &at_1.rescaled(p.beta31 * dt),
            &at_2,
        ],
        &sigma,
    )?;

    Ok(StepRecord {
        y_next: StateVector::new(y_next)?,
        y1,
        third_order: Some(ThirdOrderStages { rho, y2, a, sigma }),
    })
}

/// A configured integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scheme {
    Sspmprk2(Sspmprk2Params),
    Sspmprk3(Sspmprk3Params),
}

impl Scheme {
    pub fn step<P: ProductionDestruction + ?Sized>(
        &self,
        pds: &P,
        y: &StateVector,
        dt: f64,
    ) -> Result<StepRecord> {
        match self {
            Scheme::Sspmprk2(p) => sspmprk2_step(pds, y, dt, p),
            Scheme::Sspmprk3(p) => sspmprk3_step(pds, y, dt, p),
        }
    }

    /// Formal convergence order.
    pub fn order(&self) -> u32 {
        match self {
            Scheme::Sspmprk2(_) => 2,
            Scheme::Sspmprk3(_) => 3,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheme::Sspmprk2(p) => write!(f, "SSPMPRK2({}, {})", p.alpha, p.beta),
            Scheme::Sspmprk3(p) => write!(f, "SSPMPRK3({:.6})", p.eta2),
        }
    }
}

impl From<Sspmprk2Params> for Scheme {
    fn from(p: Sspmprk2Params) -> Self {
        Scheme::Sspmprk2(p)
    }
}

impl From<Sspmprk3Params> for Scheme {
    fn from(p: Sspmprk3Params) -> Self {
        Scheme::Sspmprk3(p)
    }
}

/// Applies the scheme `n_steps` times; the result has `n_steps + 1` states.
pub fn integrate<P: ProductionDestruction + ?Sized>(
    pds: &P,
    scheme: &Scheme,
    y0: &StateVector,
    dt: f64,
    n_steps: usize,
) -> Result<Vec<StateVector>> {
    let mut trajectory = Vec::with_capacity(n_steps + 1);
    trajectory.push(y0.clone());
    for _ in 0..n_steps {
        let next = scheme.step(pds, trajectory.last().expect("nonempty"), dt)?.y_next;
        trajectory.push(next);
    }
    Ok(trajectory)
}

/// Outcome of [`steps_to_tolerance`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepsToTolerance {
    Reached(usize),
    CapExceeded,
}

impl StepsToTolerance {
    pub fn count(self) -> Option<usize> {
        match self {
            StepsToTolerance::Reached(n) => Some(n),
            StepsToTolerance::CapExceeded => None,
        }
    }
}

/// Default distance to the steady state that counts as converged.
pub const DEFAULT_EPS: f64 = 2e-2;

/// Smallest `n ≤ cap` with `‖yⁿ − y*‖₂ < eps`.
pub fn steps_to_tolerance<P: ProductionDestruction + ?Sized>(
    pds: &P,
    scheme: &Scheme,
    y0: &StateVector,
    dt: f64,
    y_star: &[f64],
    eps: f64,
    cap: usize,
) -> Result<StepsToTolerance> {
    let mut y = y0.clone();
    for n in 0..=cap {
        if linalg::dist2(&y, y_star) < eps {
            return Ok(StepsToTolerance::Reached(n));
        }
        if n < cap {
            y = scheme.step(pds, &y, dt)?.y_next;
        }
    }
    Ok(StepsToTolerance::CapExceeded)
}
