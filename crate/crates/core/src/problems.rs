//! Built-in linear test problems with closed-form solutions.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{ComplexValue, DenseMatrix};
use crate::pds::{LinearPds, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProblemId {
    /// Three species, real spectrum {0, −300, −500}.
    Real3,
    /// Three species, spectrum {0, 100(−6 ± i)}.
    Complex3,
    /// Four species, two-dimensional kernel, spectrum {0, 0, −300, −700}.
    DoubleKernel4,
}

impl ProblemId {
    pub const ALL: [ProblemId; 3] = [ProblemId::Real3, ProblemId::Complex3, ProblemId::DoubleKernel4];

    pub fn name(self) -> &'static str {
        match self {
            ProblemId::Real3 => "real3",
            ProblemId::Complex3 => "complex3",
            ProblemId::DoubleKernel4 => "double-kernel4",
        }
    }
}

impl fmt::Display for ProblemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ProblemId::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::UnknownProblem(s.to_string()))
    }
}

/// Linear PDS with start value, steady state and calibration data.
#[derive(Debug, Clone)]
pub struct TestProblem {
    /// `None` for user-supplied systems, which have no closed-form solution.
    pub id: Option<ProblemId>,
    pub system: LinearPds,
    pub y0: StateVector,
    pub y_star: Vec<f64>,
    /// Conserved linear functionals `n` with `nᵀy(t)` constant.
    pub invariants: Vec<Vec<f64>>,
    /// Eigenvalue of `A` used to calibrate `Δt` against a target `z`.
    pub dominant_eigenvalue: Option<ComplexValue>,
    /// Direction `v` of the perturbed start `y* + εv`.
    pub perturbation: Vec<f64>,
}

impl TestProblem {
    pub fn builtin(id: ProblemId) -> Self {
        let (rows, y0, y_star, invariants, lambda, v): (Vec<Vec<f64>>, _, _, _, _, _) = match id {
            ProblemId::Real3 => (
                vec![vec![-2.0, 1.0, 1.0], vec![1.0, -4.0, 1.0], vec![1.0, 3.0, -2.0]],
                vec![1.0, 9.0, 5.0],
                vec![5.0, 3.0, 7.0],
                vec![vec![1.0; 3]],
                ComplexValue::new(-500.0, 0.0),
                vec![1.0, -2.0, 1.0],
            ),
            ProblemId::Complex3 => (
                vec![vec![-4.0, 3.0, 1.0], vec![2.0, -4.0, 3.0], vec![2.0, 1.0, -4.0]],
                vec![9.0, 20.0, 8.0],
                vec![13.0, 14.0, 10.0],
                vec![vec![1.0; 3]],
                ComplexValue::new(-600.0, 100.0),
                vec![1.0, -2.0, 1.0],
            ),
            ProblemId::DoubleKernel4 => (
                vec![
                    vec![-2.0, 0.0, 0.0, 1.0],
                    vec![0.0, -4.0, 3.0, 0.0],
                    vec![0.0, 4.0, -3.0, 0.0],
                    vec![2.0, 0.0, 0.0, -1.0],
                ],
                vec![4.0, 1.0, 9.0, 1.0],
                [35.0, 90.0, 120.0, 70.0].map(|v| v / 21.0).to_vec(),
                vec![vec![1.0; 4], vec![1.0, 2.0, 2.0, 1.0]],
                ComplexValue::new(-700.0, 0.0),
                vec![1.0, -1.0, 1.0, -1.0],
            ),
        };
        let a = DenseMatrix::from_rows(&rows).expect("static matrix").scale(100.0);
        Self {
            id: Some(id),
            system: LinearPds::new(a).expect("static matrix is a conservative Metzler matrix"),
            y0: StateVector::new(y0).expect("static start value is positive"),
            y_star,
            invariants,
            dominant_eigenvalue: Some(lambda),
            perturbation: v,
        }
    }

    /// A user-supplied system; the steady state is computed and the
    /// invariants are a basis of `ker Aᵀ`.
    pub fn custom(system: LinearPds, y0: StateVector) -> Result<Self> {
        if y0.len() != system.dim() {
            return Err(Error::Dimension(format!(
                "y0 has length {} but the matrix is {}x{}",
                y0.len(),
                system.dim(),
                system.dim()
            )));
        }
        let y_star = crate::pds::steady_state(&system, &y0)?;
        let n = system.dim();
        let perturbation = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        Ok(Self {
            id: None,
            invariants: system.invariant_basis().to_vec(),
            system,
            y0,
            y_star,
            dominant_eigenvalue: None,
            perturbation,
        })
    }

    pub fn name(&self) -> String {
        self.id.map_or_else(|| "custom".to_string(), |id| id.to_string())
    }

    pub fn dim(&self) -> usize {
        self.system.dim()
    }

    pub fn invariant_values(&self, y: &[f64]) -> Vec<f64> {
        self.invariants.iter().map(|n| crate::linalg::dot(n, y)).collect()
    }

    /// `y* + magnitude·v`.
    pub fn perturbed_start(&self, magnitude: f64) -> Result<StateVector> {
        StateVector::new(
            self.y_star
                .iter()
                .zip(&self.perturbation)
                .map(|(y, v)| y + magnitude * v)
                .collect(),
        )
    }
}

/// Calibration targets in the complex plane.
pub mod targets {
    use crate::linalg::ComplexValue;

    /// Just outside the SSPMPRK2(0.2, 3) region along `−6 + i`.
    pub fn z1() -> ComplexValue {
        ComplexValue::new(-12.0, 2.0)
    }

    /// Just inside along `−6 + i`.
    pub fn z2() -> ComplexValue {
        ComplexValue::new(-6.0, 1.0) * (11.0 / 6.0)
    }

    /// Just outside on the negative real axis.
    pub fn z3() -> ComplexValue {
        ComplexValue::new(-12.5, 0.0)
    }

    /// Just inside on the negative real axis.
    pub fn z4() -> ComplexValue {
        ComplexValue::new(-11.5, 0.0)
    }
}

impl TestProblem {
    /// Targets `(inside, outside)` of the SSPMPRK2(0.2, 3) region on the ray
    /// through this problem's dominant eigenvalue.
    pub fn calibration_targets(&self) -> Option<(ComplexValue, ComplexValue)> {
        match self.id? {
            ProblemId::Complex3 => Some((targets::z2(), targets::z1())),
            ProblemId::Real3 | ProblemId::DoubleKernel4 => Some((targets::z4(), targets::z3())),
        }
    }
}

/// Closed-form solution at time `t ≥ 0`.
pub fn exact_solution(problem: &TestProblem, t: f64) -> Result<Vec<f64>> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Parameter(format!("time must be finite and >= 0 (t = {t})")));
    }
    let id = problem
        .id
        .ok_or_else(|| Error::UnknownProblem(problem.name()))?;
    Ok(match id {
        ProblemId::Real3 => {
            let e3 = 4.0 * (-300.0 * t).exp();
            let e5 = -6.0 * (-500.0 * t).exp();
            vec![5.0 - e3, 3.0 - e5, 7.0 + e3 + e5]
        }
        ProblemId::Complex3 => {
            let decay = (-600.0 * t).exp();
            let (sin, cos) = (100.0 * t).sin_cos();
            let u = [-1.0, 0.0, 1.0];
            let w = [1.0, -1.0, 0.0];
            let base = [13.0, 14.0, 10.0];
            (0..3)
                .map(|i| {
                    base[i] - 2.0 * decay * (cos * u[i] - sin * w[i])
                        - 6.0 * decay * (cos * w[i] + sin * u[i])
                })
                .collect()
        }
        ProblemId::DoubleKernel4 => {
            let (c1, c2, c3, c4) = (30.0 / 7.0, 5.0 / 3.0, -23.0 / 7.0, 7.0 / 3.0);
            let e7 = c3 * (-700.0 * t).exp();
            let e3 = c4 * (-300.0 * t).exp();
            vec![c2 + e3, c1 + e7, c1 * 4.0 / 3.0 - e7, 2.0 * c2 - e3]
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dist2, eigenvalues};

    #[test]
    fn names_round_trip() {
        for id in ProblemId::ALL {
            assert_eq!(id.name().parse::<ProblemId>().unwrap(), id);
        }
        assert!(matches!("real4".parse::<ProblemId>(), Err(Error::UnknownProblem(_))));
    }

    #[test]
    fn exact_matches_start_and_steady_state() {
        for id in ProblemId::ALL {
            let p = TestProblem::builtin(id);
            let e0 = exact_solution(&p, 0.0).unwrap();
            assert!(dist2(&e0, &p.y0) < 1e-13, "{id}");
            let late = exact_solution(&p, 1.0).unwrap();
            assert!(dist2(&late, &p.y_star) < 1e-12, "{id}");
            let ay = p.system.matrix().mul_vec(&p.y_star);
            assert!(ay.iter().all(|v| v.abs() < 1e-11), "{id}: A y* = {ay:?}");
        }
    }

    #[test]
    fn close_to_steady_state_by_t_002() {
        for id in ProblemId::ALL {
            let p = TestProblem::builtin(id);
            assert!(dist2(&exact_solution(&p, 0.02).unwrap(), &p.y_star) < 2e-2);
        }
    }

    #[test]
    fn exact_solution_solves_the_ode() {
        let h = 1e-7;
        for id in ProblemId::ALL {
            let p = TestProblem::builtin(id);
            for t in [1e-3, 4e-3, 1e-2] {
                let plus = exact_solution(&p, t + h).unwrap();
                let minus = exact_solution(&p, t - h).unwrap();
                let rhs = p.system.matrix().mul_vec(&exact_solution(&p, t).unwrap());
                for i in 0..p.dim() {
                    let d = (plus[i] - minus[i]) / (2.0 * h);
                    assert!((d - rhs[i]).abs() < 1e-4 * (1.0 + rhs[i].abs()), "{id} t={t}");
                }
            }
        }
    }

    #[test]
    fn dominant_eigenvalue_is_in_spectrum() {
        for id in ProblemId::ALL {
            let p = TestProblem::builtin(id);
            let lambda = p.dominant_eigenvalue.unwrap();
            let spectrum = eigenvalues(p.system.matrix()).unwrap();
            assert!(spectrum.iter().any(|l| (l - lambda).norm() < 1e-8), "{id}");
            let rho = spectrum.iter().map(|l| l.norm()).fold(0.0, f64::max);
            assert!((rho - lambda.norm()).abs() < 1e-8, "{id}");
        }
    }

    #[test]
    fn double_kernel_invariants() {
        let p = TestProblem::builtin(ProblemId::DoubleKernel4);
        assert_eq!(p.invariant_values(&p.y0), vec![15.0, 25.0]);
        for (got, want) in p.invariant_values(&p.y_star).into_iter().zip([15.0, 25.0]) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn custom_problem_gets_steady_state() {
        let p = TestProblem::builtin(ProblemId::Real3);
        let c = TestProblem::custom(p.system.clone(), p.y0.clone()).unwrap();
        assert!(dist2(&c.y_star, &p.y_star) < 1e-10);
        assert!(matches!(exact_solution(&c, 0.0), Err(Error::UnknownProblem(_))));
        assert!(c.calibration_targets().is_none());
    }
}
