use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use sspmprk::experiments::{
    self, halvings, ntable, order_study, region_export, run_experiment, ExperimentConfig,
    StepChoice, StopRule,
};
use sspmprk::linalg::{self, ComplexValue};
use sspmprk::pds::{parse_matrix, parse_vector, pds_from_matrix};
use sspmprk::problems::targets;
use sspmprk::schemes::DEFAULT_EPS;
use sspmprk::stability::{
    self, classify_sspmprk2, derive_s, r2_limit, third_order_s, StabilityFunction,
};
use sspmprk::verification::{
    analytic_jacobian_sspmprk2, default_fd_step, fd_jacobian, stability_verdict, JacobianReport,
    DEFAULT_VERDICT_TOL,
};
use sspmprk::{
    Error, LinearPds, ProblemId, Result, Scheme, Sspmprk2Params, Sspmprk3Params, StateVector,
    TestProblem,
};

#[derive(Parser)]
#[command(name = "sspmprk", version, about = "SSPMPRK integrators for production-destruction systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a test problem and report N_T, drift and divergence.
    Integrate(IntegrateArgs),
    /// Steps to reach the steady state for several schemes and problems.
    Ntable(NtableArgs),
    /// Scan a stability region to CSV plus a plot script.
    Region(RegionArgs),
    /// Classify SSPMPRK2(alpha, beta) by the shape of its stability region.
    Classify(ClassifyArgs),
    /// Compare finite-difference Jacobian eigenvalues with R(dt*lambda).
    JacobianCheck(JacobianArgs),
    /// Observed convergence order under step halving.
    Order(OrderArgs),
    /// Run the inside/outside calibrated pair from a perturbed steady state.
    DemoDivergence(DivergenceArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeKind {
    Sspmprk2,
    Sspmprk3,
}

#[derive(Args, Clone)]
struct SchemeArgs {
    #[arg(long, value_enum, default_value = "sspmprk3")]
    scheme: SchemeKind,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, default_value_t = 1.0 / 3.0)]
    eta2: f64,
    /// Weight exponent of SSPMPRK3; defaults to the value giving third order.
    #[arg(long, allow_hyphen_values = true)]
    s: Option<f64>,
}

impl SchemeArgs {
    fn build(&self) -> Result<Scheme> {
        Ok(match self.scheme {
            SchemeKind::Sspmprk2 => Sspmprk2Params::new(self.alpha, self.beta)?.into(),
            SchemeKind::Sspmprk3 => Sspmprk3Params::new(self.eta2, self.resolve_s()?)?.into(),
        })
    }

    fn resolve_s(&self) -> Result<f64> {
        let ordered = third_order_s(self.eta2)?;
        match derive_s(self.eta2) {
            Ok(d) => info!("eta2 = {}: third-order s = {ordered}, coefficient-fit s = {d}", self.eta2),
            Err(e) => info!("eta2 = {}: third-order s = {ordered}, coefficient fit failed: {e}", self.eta2),
        }
        let s = self.s.unwrap_or(ordered);
        info!("using s = {s}");
        Ok(s)
    }

    fn stability_function(&self) -> Result<StabilityFunction> {
        Ok(match self.scheme {
            SchemeKind::Sspmprk2 => StabilityFunction::Sspmprk2 {
                alpha: self.alpha,
                beta: self.beta,
            },
            SchemeKind::Sspmprk3 => {
                StabilityFunction::Sspmprk3(Sspmprk3Params::new(self.eta2, self.resolve_s()?)?)
            }
        })
    }
}

#[derive(Args)]
struct ProblemArgs {
    #[arg(long, default_value = "real3")]
    problem: String,
    /// Custom system matrix, rows separated by ';' (overrides --problem).
    #[arg(long, allow_hyphen_values = true, requires = "y0")]
    matrix: Option<String>,
    /// Start value for --matrix.
    #[arg(long)]
    y0: Option<String>,
}

impl ProblemArgs {
    fn load(&self) -> Result<TestProblem> {
        match &self.matrix {
            Some(m) => {
                let system = LinearPds::new(parse_matrix(m)?)?;
                let y0 = StateVector::new(parse_vector(self.y0.as_deref().unwrap_or(""))?)?;
                TestProblem::custom(system, y0)
            }
            None => Ok(TestProblem::builtin(self.problem.parse()?)),
        }
    }
}

#[derive(Args)]
struct IntegrateArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    scheme: SchemeArgs,
    #[arg(long, conflicts_with = "target_z")]
    dt: Option<f64>,
    /// Target dt*lambda: z1..z4 or "re,im".
    #[arg(long, allow_hyphen_values = true)]
    target_z: Option<String>,
    #[arg(long, conflicts_with = "tol")]
    steps: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    /// Start from y* + PERTURB*v.
    #[arg(long)]
    perturb: Option<f64>,
    /// Trajectory CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct NtableArgs {
    /// Restrict to one problem (default: all built-in problems).
    #[arg(long)]
    problem: Option<String>,
    /// Tabulate a single scheme instead of the default set.
    #[arg(long, value_enum)]
    scheme: Option<SchemeKind>,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, default_value_t = 1.0 / 3.0)]
    eta2: f64,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long, default_value_t = 5.0)]
    dt: f64,
    #[arg(long, default_value_t = DEFAULT_EPS)]
    tol: f64,
}

#[derive(Args)]
struct RegionArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    /// Real range "min,max".
    #[arg(long, allow_hyphen_values = true, default_value = "-15,0.5")]
    re_range: String,
    /// Imaginary range "min,max".
    #[arg(long, allow_hyphen_values = true, default_value = "-8,8")]
    im_range: String,
    #[arg(long, default_value_t = stability::DEFAULT_RESOLUTION)]
    resolution: usize,
    #[arg(long, default_value = "region.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    beta: f64,
}

#[derive(Args)]
struct JacobianArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    scheme: SchemeArgs,
    #[arg(long, default_value_t = 1e-2)]
    dt: f64,
    #[arg(long, default_value_t = DEFAULT_VERDICT_TOL)]
    tol: f64,
}

#[derive(Args)]
struct OrderArgs {
    #[arg(long, default_value = "real3")]
    problem: String,
    #[command(flatten)]
    scheme: SchemeArgs,
    /// Largest step size.
    #[arg(long, default_value_t = 2e-4)]
    dt: f64,
    /// Number of step sizes (each half the previous).
    #[arg(long, default_value_t = 4)]
    steps: usize,
    #[arg(long, default_value_t = 1e-2)]
    t_final: f64,
}

#[derive(Args)]
struct DivergenceArgs {
    #[arg(long, default_value = "real3")]
    problem: String,
    #[arg(long, default_value_t = 0.2)]
    alpha: f64,
    #[arg(long, default_value_t = 3.0)]
    beta: f64,
    #[arg(long, default_value_t = 1e-5)]
    perturb: f64,
    /// Trajectory CSV prefix; writes PREFIX-inside.csv and PREFIX-outside.csv.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_pair(text: &str) -> Result<(f64, f64)> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] => {
            let num = |v: &str| {
                v.parse::<f64>()
                    .map_err(|_| Error::Parameter(format!("`{v}` is not a number")))
            };
            Ok((num(a)?, num(b)?))
        }
        _ => Err(Error::Parameter(format!("expected two comma-separated numbers, got `{text}`"))),
    }
}

fn parse_target(text: &str) -> Result<ComplexValue> {
    Ok(match text {
        "z1" => targets::z1(),
        "z2" => targets::z2(),
        "z3" => targets::z3(),
        "z4" => targets::z4(),
        other => {
            let (re, im) = parse_pair(other)?;
            ComplexValue::new(re, im)
        }
    })
}

fn integrate(args: IntegrateArgs) -> Result<()> {
    let problem = args.problem.load()?;
    let step = match (args.dt, args.target_z.as_deref()) {
        (Some(dt), None) => StepChoice::Dt(dt),
        (None, Some(z)) => StepChoice::TargetZ(parse_target(z)?),
        _ => return Err(Error::Parameter("give exactly one of --dt or --target-z".into())),
    };
    let stop = match (args.steps, args.tol) {
        (Some(n), _) => StopRule::Steps(n),
        (None, Some(eps)) => StopRule::Tolerance(eps),
        (None, None) if args.perturb.is_some() => StopRule::Divergence,
        (None, None) => StopRule::Tolerance(DEFAULT_EPS),
    };
    let cfg = ExperimentConfig {
        scheme: args.scheme.build()?,
        step,
        stop,
        perturbation: args.perturb,
        output: args.out,
    };
    println!("{} on {}", cfg.scheme, problem.name());
    println!("{}", run_experiment(&problem, &cfg)?);
    Ok(())
}

fn run_ntable(args: NtableArgs) -> Result<()> {
    let problems = match &args.problem {
        Some(p) => vec![p.parse::<ProblemId>()?],
        None => ProblemId::ALL.to_vec(),
    };
    let scheme_args = |kind| SchemeArgs {
        scheme: kind,
        alpha: args.alpha,
        beta: args.beta,
        eta2: args.eta2,
        s: args.s,
    };
    let schemes = match args.scheme {
        Some(kind) => vec![scheme_args(kind).build()?],
        None => vec![
            scheme_args(SchemeKind::Sspmprk3).build()?,
            Sspmprk2Params::new(0.1, 1.0)?.into(),
            Sspmprk2Params::new(0.5, 1.0)?.into(),
        ],
    };
    print!("{}", ntable(&schemes, &problems, args.dt, args.tol)?);
    Ok(())
}

fn region(args: RegionArgs) -> Result<()> {
    let which = args.scheme.stability_function()?;
    let (scan, script) = region_export(
        &which,
        parse_pair(&args.re_range)?,
        parse_pair(&args.im_range)?,
        args.resolution,
        &args.out,
    )?;
    println!(
        "wrote {} ({} of {} points inside) and {}",
        args.out.display(),
        scan.count_inside(),
        scan.nx * scan.ny,
        script.display()
    );
    Ok(())
}

fn classify(args: ClassifyArgs) -> Result<()> {
    let class = classify_sspmprk2(args.alpha, args.beta)?;
    println!("SSPMPRK2({}, {}): {class}", args.alpha, args.beta);
    match r2_limit(args.alpha, args.beta) {
        Ok(l) => println!("lim R(z) as z -> -inf = {l}"),
        Err(e) => println!("{e}"),
    }
    Ok(())
}

fn jacobian_check(args: JacobianArgs) -> Result<()> {
    let problem = args.problem.load()?;
    let scheme = args.scheme.build()?;
    let pds = pds_from_matrix(&problem.system);
    let y_star = StateVector::new(problem.y_star.clone())?;
    let fd = fd_jacobian(
        |y| Ok(scheme.step(&pds, y, args.dt)?.y_next.into_inner()),
        &y_star,
        default_fd_step(&y_star),
    )?;
    let kernel = problem.system.kernel_basis();
    let report = JacobianReport::new(fd.clone(), &kernel)?;
    let which = match scheme {
        Scheme::Sspmprk2(p) => StabilityFunction::Sspmprk2 {
            alpha: p.alpha,
            beta: p.beta,
        },
        Scheme::Sspmprk3(p) => StabilityFunction::Sspmprk3(p),
    };
    let mut predicted = linalg::eigenvalues(problem.system.matrix())?
        .into_iter()
        .map(|l| which.eval(l * args.dt))
        .collect::<Result<Vec<_>>>()?;
    let mut observed = report.eigenvalues.clone();
    let key = |a: &ComplexValue, b: &ComplexValue| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im));
    predicted.sort_by(key);
    observed.sort_by(key);
    println!("{scheme} on {}, dt = {}", problem.name(), args.dt);
    println!("{:>40} {:>40}", "eig(J_fd)", "R(dt*lambda)");
    for (o, p) in observed.iter().zip(&predicted) {
        println!("{:>40} {:>40}", format!("{o:.12}"), format!("{p:.12}"));
    }
    println!("spectral radius  {:.12}", report.spectral_radius);
    println!("kernel residuals {:?}", report.kernel_residuals);
    if let Scheme::Sspmprk2(p) = scheme {
        let analytic = analytic_jacobian_sspmprk2(&problem.system, args.dt, &p)?;
        println!("|J_analytic - J_fd|_inf = {:.3e}", analytic.max_abs_diff(&fd));
    }
    println!("verdict          {}", stability_verdict(&fd, &kernel, args.tol)?);
    Ok(())
}

fn order(args: OrderArgs) -> Result<()> {
    let problem = TestProblem::builtin(args.problem.parse()?);
    let scheme = args.scheme.build()?;
    let study = order_study(&problem, &scheme, &halvings(args.dt, args.steps), args.t_final)?;
    println!("{scheme} on {}, t = {}", problem.name(), args.t_final);
    print!("{study}");
    Ok(())
}

fn demo_divergence(args: DivergenceArgs) -> Result<()> {
    let problem = TestProblem::builtin(args.problem.parse()?);
    let scheme: Scheme = Sspmprk2Params::new(args.alpha, args.beta)?.into();
    let (inside, outside) = problem
        .calibration_targets()
        .ok_or_else(|| Error::Calibration("problem has no calibration targets".into()))?;
    for (label, z) in [("inside", inside), ("outside", outside)] {
        let output = args.out.as_ref().map(|p| {
            let mut name = p.file_name().unwrap_or_default().to_os_string();
            name.push(format!("-{label}.csv"));
            p.with_file_name(name)
        });
        let cfg = ExperimentConfig {
            scheme,
            step: StepChoice::TargetZ(z),
            stop: StopRule::Divergence,
            perturbation: Some(args.perturb),
            output,
        };
        let report = run_experiment(&problem, &cfg)?;
        println!("{scheme} on {}, dt*lambda = {z} ({label})", problem.name());
        println!("{report}\n");
    }
    println!("divergence cap: {} steps", experiments::STEP_CAP);
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Integrate(a) => integrate(a),
        Command::Ntable(a) => run_ntable(a),
        Command::Region(a) => region(a),
        Command::Classify(a) => classify(a),
        Command::JacobianCheck(a) => jacobian_check(a),
        Command::Order(a) => order(a),
        Command::DemoDivergence(a) => demo_divergence(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 1 })
        }
    }
}
