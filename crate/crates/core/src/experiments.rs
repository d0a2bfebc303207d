//! Experiment drivers: time-step calibration, trajectory runs, step-count
//! tables, convergence-order studies and stability-region export.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use log::{debug, info};

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexValue};
use crate::pds::{pds_from_matrix, StateVector};
use crate::problems::{exact_solution, ProblemId, TestProblem};
use crate::schemes::{steps_to_tolerance, Scheme, StepsToTolerance};
use crate::stability::{region_scan, StabilityFunction, StabilityScan};

/// Step cap for runs that stop on a tolerance or on divergence.
pub const STEP_CAP: usize = 1_000_000;

/// Growth factor of `‖yⁿ − y*‖₂` over `‖y⁰ − y*‖₂` that counts as divergence.
pub const DIVERGENCE_FACTOR: f64 = 10.0;

/// Relative invariant drift tolerated when writing a trajectory row.
pub const WRITE_DRIFT_TOL: f64 = 1e-9;

/// Real `c > 0` with `c·λ = z`.
pub fn dt_for_target(lambda: ComplexValue, z: ComplexValue) -> Result<f64> {
    if lambda.norm() == 0.0 || z.norm() == 0.0 || !lambda.is_finite() || !z.is_finite() {
        return Err(Error::Calibration(format!(
            "need nonzero finite lambda and z (lambda = {lambda}, z = {z})"
        )));
    }
    let c = z.norm() / lambda.norm();
    if (lambda * c - z).norm() > 1e-10 * z.norm() {
        return Err(Error::Calibration(format!(
            "z = {z} is not a positive multiple of lambda = {lambda}"
        )));
    }
    Ok(c)
}

/// How the time step is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepChoice {
    Dt(f64),
    /// `Δt·λ_dominant = z`.
    TargetZ(ComplexValue),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopRule {
    Steps(usize),
    /// Stop once `‖yⁿ − y*‖₂ < eps`.
    Tolerance(f64),
    /// Run until the divergence flag is raised or the step cap is hit.
    Divergence,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scheme: Scheme,
    pub step: StepChoice,
    pub stop: StopRule,
    /// Start from `y* + magnitude·v` instead of `y⁰`.
    pub perturbation: Option<f64>,
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub dt: f64,
    pub steps: usize,
    /// Steps needed to reach the tolerance, for [`StopRule::Tolerance`].
    pub n_t: Option<usize>,
    pub diverged: bool,
    /// Step at which the divergence flag was first raised.
    pub diverged_at: Option<usize>,
    pub final_state: Vec<f64>,
    pub max_invariant_drift: f64,
    pub min_component: f64,
}

impl fmt::Display for ExperimentReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "dt                  {:.17e}", self.dt)?;
        writeln!(f, "steps               {}", self.steps)?;
        match self.n_t {
            Some(n) => writeln!(f, "N_T                 {n}")?,
            None => writeln!(f, "N_T                 -")?,
        }
        match self.diverged_at {
            Some(n) => writeln!(f, "diverged            yes (step {n})")?,
            None => writeln!(f, "diverged            no")?,
        }
        writeln!(f, "final state         {:?}", self.final_state)?;
        writeln!(f, "max invariant drift {:.3e}", self.max_invariant_drift)?;
        write!(f, "min component       {:.6e}", self.min_component)
    }
}

fn resolve_dt(problem: &TestProblem, step: StepChoice) -> Result<f64> {
    let dt = match step {
        StepChoice::Dt(dt) => dt,
        StepChoice::TargetZ(z) => {
            let lambda = problem.dominant_eigenvalue.ok_or_else(|| {
                Error::Calibration(format!("problem {} has no calibration eigenvalue", problem.name()))
            })?;
            dt_for_target(lambda, z)?
        }
    };
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Parameter(format!("dt must be positive (dt = {dt})")));
    }
    Ok(dt)
}

/// Streams trajectory rows and re-checks each one before writing.
struct TrajectoryWriter {
    out: BufWriter<File>,
    reference: Vec<f64>,
}

impl TrajectoryWriter {
    fn create(path: &Path, dim: usize, reference: Vec<f64>) -> Result<Self> {
        let mut out = BufWriter::new(File::create(path)?);
        let mut header = vec!["step".to_string(), "t".to_string()];
        header.extend((1..=dim).map(|i| format!("y{i}")));
        header.extend((1..=reference.len()).map(|k| format!("inv{k}")));
        writeln!(out, "{}", header.join(","))?;
        Ok(Self { out, reference })
    }

    fn row(&mut self, step: usize, t: f64, y: &[f64], inv: &[f64]) -> Result<()> {
        if let Some((i, v)) = y.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
            return Err(Error::ContractViolation(format!(
                "row {step}: component {i} = {v:e} is not positive"
            )));
        }
        for (k, (now, start)) in inv.iter().zip(&self.reference).enumerate() {
            let drift = (now - start).abs() / start.abs().max(f64::MIN_POSITIVE);
            if drift > WRITE_DRIFT_TOL {
                return Err(Error::ContractViolation(format!(
                    "row {step}: invariant {k} drifted by {drift:e}"
                )));
            }
        }
        let mut line = format!("{step},{t:.16e}");
        for v in y.iter().chain(inv) {
            line.push_str(&format!(",{v:.16e}"));
        }
        writeln!(self.out, "{line}")?;
        Ok(())
    }

    fn finish(mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

pub fn run_experiment(problem: &TestProblem, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let dt = resolve_dt(problem, cfg.step)?;
    let y0 = match cfg.perturbation {
        Some(m) if m < 0.0 || !m.is_finite() => {
            return Err(Error::Parameter(format!(
                "perturbation magnitude must be >= 0 (got {m})"
            )))
        }
        Some(m) => problem.perturbed_start(m)?,
        None => problem.y0.clone(),
    };
    let pds = pds_from_matrix(&problem.system);
    let inv0 = problem.invariant_values(&y0);
    let mut writer = cfg
        .output
        .as_deref()
        .map(|p| TrajectoryWriter::create(p, problem.dim(), inv0.clone()))
        .transpose()?;
    info!(
        "running {} on {} with dt = {dt:e}, start {:?}",
        cfg.scheme,
        problem.name(),
        y0.as_slice()
    );

    let deviation0 = linalg::dist2(&y0, &problem.y_star);
    let threshold = DIVERGENCE_FACTOR * deviation0;
    let cap = match cfg.stop {
        StopRule::Steps(n) => n,
        StopRule::Tolerance(_) | StopRule::Divergence => STEP_CAP,
    };
    if let StopRule::Tolerance(eps) = cfg.stop {
        if !(eps > 0.0) {
            return Err(Error::Parameter(format!("tolerance must be positive (got {eps})")));
        }
    }

    let mut y = y0;
    let mut max_drift: f64 = 0.0;
    let mut min_component = y.iter().copied().fold(f64::INFINITY, f64::min);
    let mut n_t = None;
    let mut diverged_at = None;
    let mut n = 0;
    loop {
        let inv = problem.invariant_values(&y);
        for (now, start) in inv.iter().zip(&inv0) {
            max_drift = max_drift.max((now - start).abs() / start.abs().max(f64::MIN_POSITIVE));
        }
        if let Some(w) = writer.as_mut() {
            w.row(n, n as f64 * dt, &y, &inv)?;
        }
        let dev = linalg::dist2(&y, &problem.y_star);
        if diverged_at.is_none() && deviation0 > 0.0 && dev > threshold {
            debug!("divergence flag at step {n} (deviation {dev:e})");
            diverged_at = Some(n);
        }
        let done = match cfg.stop {
            StopRule::Steps(_) => false,
            StopRule::Tolerance(eps) => {
                if dev < eps {
                    n_t = Some(n);
                    true
                } else {
                    diverged_at.is_some()
                }
            }
            StopRule::Divergence => diverged_at.is_some(),
        };
        if done || n >= cap {
            break;
        }
        y = cfg.scheme.step(&pds, &y, dt)?.y_next;
        min_component = y.iter().copied().fold(min_component, f64::min);
        n += 1;
    }
    if let Some(w) = writer {
        w.finish()?;
    }
    Ok(ExperimentReport {
        dt,
        steps: n,
        n_t,
        diverged: diverged_at.is_some(),
        diverged_at,
        final_state: y.into_inner(),
        max_invariant_drift: max_drift,
        min_component,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NTableRow {
    pub scheme: Scheme,
    pub problem: ProblemId,
    pub dt: f64,
    pub n_t: StepsToTolerance,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct NTable {
    pub rows: Vec<NTableRow>,
}

impl NTable {
    pub fn get(&self, scheme: &Scheme, problem: ProblemId) -> Option<StepsToTolerance> {
        self.rows
            .iter()
            .find(|r| &r.scheme == scheme && r.problem == problem)
            .map(|r| r.n_t)
    }
}

impl fmt::Display for NTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<28} {:<16} {:>12} {:>10}", "scheme", "problem", "dt", "N_T")?;
        for r in &self.rows {
            let n = match r.n_t {
                StepsToTolerance::Reached(n) => n.to_string(),
                StepsToTolerance::CapExceeded => "cap".into(),
            };
            writeln!(
                f,
                "{:<28} {:<16} {:>12.6e} {:>10}",
                r.scheme.to_string(),
                r.problem.to_string(),
                r.dt,
                n
            )?;
        }
        Ok(())
    }
}

/// `N_T` for every scheme/problem pair at a fixed `Δt`.
pub fn ntable(schemes: &[Scheme], problems: &[ProblemId], dt: f64, eps: f64) -> Result<NTable> {
    let mut table = NTable::default();
    for scheme in schemes {
        for &id in problems {
            let p = TestProblem::builtin(id);
            let pds = pds_from_matrix(&p.system);
            let n_t = steps_to_tolerance(&pds, scheme, &p.y0, dt, &p.y_star, eps, STEP_CAP)?;
            table.rows.push(NTableRow {
                scheme: *scheme,
                problem: id,
                dt,
                n_t,
            });
        }
    }
    Ok(table)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderStudy {
    pub dts: Vec<f64>,
    /// `‖y_N − y(t_final)‖₂` per step size.
    pub errors: Vec<f64>,
    /// `log₂(e(Δtₖ)/e(Δtₖ₊₁))` per refinement; `dts.len() − 1` entries.
    pub orders: Vec<f64>,
}

impl fmt::Display for OrderStudy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:>14} {:>14} {:>8}", "dt", "error", "order")?;
        for (k, (dt, err)) in self.dts.iter().zip(&self.errors).enumerate() {
            let order = k
                .checked_sub(1)
                .and_then(|i| self.orders.get(i))
                .map_or_else(|| "-".to_string(), |o| format!("{o:.3}"));
            writeln!(f, "{dt:>14.6e} {err:>14.6e} {order:>8}")?;
        }
        Ok(())
    }
}

/// Errors against the closed-form solution at `t_final` and observed orders
/// between successive step sizes.
pub fn order_study(
    problem: &TestProblem,
    scheme: &Scheme,
    dts: &[f64],
    t_final: f64,
) -> Result<OrderStudy> {
    let exact = exact_solution(problem, t_final)?;
    let pds = pds_from_matrix(&problem.system);
    let mut errors = Vec::with_capacity(dts.len());
    for &dt in dts {
        if !(dt > 0.0) {
            return Err(Error::Parameter(format!("dt must be positive (dt = {dt})")));
        }
        let ratio = t_final / dt;
        let steps = ratio.round();
        if (ratio - steps).abs() > 1e-9 * ratio.max(1.0) || steps < 1.0 {
            return Err(Error::Parameter(format!(
                "t_final / dt = {ratio} is not a positive integer"
            )));
        }
        let mut y: StateVector = problem.y0.clone();
        for _ in 0..steps as usize {
            y = scheme.step(&pds, &y, dt)?.y_next;
        }
        errors.push(linalg::dist2(&y, &exact));
    }
    let orders = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    Ok(OrderStudy {
        dts: dts.to_vec(),
        errors,
        orders,
    })
}

/// `dt0, dt0/2, …` with `count` entries.
pub fn halvings(dt0: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| dt0 / f64::from(1u32 << k)).collect()
}

/// Writes the scan as CSV at `path` and a matplotlib script next to it.
/// Returns the scan and the script path.
pub fn region_export(
    which: &StabilityFunction,
    re_range: (f64, f64),
    im_range: (f64, f64),
    resolution: usize,
    path: &Path,
) -> Result<(StabilityScan, PathBuf)> {
    let scan = region_scan(which, re_range, im_range, resolution, resolution)?;
    scan.write_csv(BufWriter::new(File::create(path)?))?;
    let script_path = path.with_extension("py");
    let csv_name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    std::fs::write(&script_path, plot_script(&csv_name, which, resolution))?;
    Ok((scan, script_path))
}

fn plot_script(csv_name: &str, which: &StabilityFunction, n: usize) -> String {
    let title = match which {
        StabilityFunction::Sspmprk2 { alpha, beta } => format!("SSPMPRK2({alpha}, {beta})"),
        StabilityFunction::Sspmprk3(p) => format!("SSPMPRK3({:.6}), s = {:.6}", p.eta2, p.s),
    };
    format!(
        r#"import os
import numpy as np
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
data = np.loadtxt(os.path.join(here, "{csv_name}"), delimiter=",", skiprows=1)
n = {n}
re = data[:, 0].reshape(n, n)
im = data[:, 1].reshape(n, n)
inside = data[:, 3].reshape(n, n)

fig, ax = plt.subplots(figsize=(6, 5))
ax.pcolormesh(re, im, inside, cmap="Greys", vmin=0, vmax=1.5, shading="auto")
ax.axhline(0, color="k", lw=0.5)
ax.axvline(0, color="k", lw=0.5)
ax.set_xlabel("Re z")
ax.set_ylabel("Im z")
ax.set_title("{title}: |R(z)| <= 1")
fig.tight_layout()
fig.savefig(os.path.join(here, "{stem}.png"), dpi=150)
"#,
        stem = csv_name.trim_end_matches(".csv"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::targets;
    use crate::schemes::Sspmprk2Params;

    #[test]
    fn calibration_examples() {
        let dt = dt_for_target(ComplexValue::new(-500.0, 0.0), targets::z3()).unwrap();
        assert!((dt - 0.025).abs() < 1e-15);
        let dt = dt_for_target(ComplexValue::new(-600.0, 100.0), targets::z2()).unwrap();
        assert!((dt - 11.0 / 600.0).abs() < 1e-15);
        let dt = dt_for_target(ComplexValue::new(-700.0, 0.0), targets::z4()).unwrap();
        assert!((dt - 0.016428571428571428).abs() < 1e-15);
        assert!(matches!(
            dt_for_target(ComplexValue::new(-500.0, 0.0), targets::z1()),
            Err(Error::Calibration(_))
        ));
        // opposite direction is not a positive multiple
        assert!(dt_for_target(ComplexValue::new(500.0, 0.0), targets::z3()).is_err());
    }

    #[test]
    fn single_dt_gives_no_orders() {
        let p = TestProblem::builtin(ProblemId::Real3);
        let s: Scheme = Sspmprk2Params::new(0.5, 1.0).unwrap().into();
        let study = order_study(&p, &s, &[1e-3], 1e-2).unwrap();
        assert_eq!(study.errors.len(), 1);
        assert!(study.orders.is_empty());
        assert!(order_study(&p, &s, &[3e-3], 1e-2).is_err());
    }

    #[test]
    fn halving_list() {
        assert_eq!(halvings(0.4, 3), vec![0.4, 0.2, 0.1]);
    }

    #[test]
    fn trajectory_csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("traj.csv");
        let p = TestProblem::builtin(ProblemId::DoubleKernel4);
        let cfg = ExperimentConfig {
            scheme: Sspmprk2Params::new(0.5, 1.0).unwrap().into(),
            step: StepChoice::Dt(1e-3),
            stop: StopRule::Steps(4),
            perturbation: None,
            output: Some(path.clone()),
        };
        let report = run_experiment(&p, &cfg).unwrap();
        assert_eq!(report.steps, 4);
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "step,t,y1,y2,y3,y4,inv1,inv2");
        assert_eq!(lines.len(), 6);
        let first: Vec<f64> = lines[1].split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(first, vec![0.0, 0.0, 4.0, 1.0, 9.0, 1.0, 15.0, 25.0]);
    }

    #[test]
    fn negative_perturbation_rejected() {
        let p = TestProblem::builtin(ProblemId::Real3);
        let cfg = ExperimentConfig {
            scheme: Sspmprk2Params::new(0.5, 1.0).unwrap().into(),
            step: StepChoice::Dt(1e-3),
            stop: StopRule::Steps(1),
            perturbation: Some(-1e-5),
            output: None,
        };
        assert!(matches!(run_experiment(&p, &cfg), Err(Error::Parameter(_))));
    }
}
