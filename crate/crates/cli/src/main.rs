//! `groundstate`: solvers, spectra, experiments and the acceptance suite
//! from the command line. Reports are JSON; tables are CSV.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use groundstate::cc::{classify, MeasureSequence, DEFAULT_RADII};
use groundstate::experiments::{
    annulus_demo, exterior_demo, ground_state, hyperbolic_positive_energy, ibeta_power_law, scaling_scan,
    weinstein_hyperbolic, zero_multiplier_identity, PositiveEnergy, ZeroMultiplier,
};
use groundstate::fields::{fmt_f64, random_signed_field};
use groundstate::solvers::{maximize_w, minimize_e, minimize_f, shoot, shoot_amplitude, unit_residual};
use groundstate::spectral::{assemble_la, lowest_eigs, second_variation_check, Constraint, SecondVariation};
use groundstate::verify::{run_criterion, verify_all, VerifyOptions, VerifyReport, CRITERIA};
use groundstate::{Error, ModelSpace, ProblemParams, RadialField, Result, SolveReport, SolverConfig, SpaceKind};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use config::{merge_problem, solver_config, FileConfig, ProblemFile, SolverFlags};
use output::{config_hash, emit, resolve, RESULTS_DIR_VAR};

#[derive(Parser, Debug)]
#[command(name = "groundstate", version, about = "Radial NLS ground states on model spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Seed for random directions and fields [default: 0]
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Interior grid nodes [default: 4000]
    #[arg(long = "grid-m", global = true)]
    grid_m: Option<usize>,
    /// Truncation radius [default: chosen from the decay rate]
    #[arg(long, global = true)]
    rmax: Option<f64>,
    /// Relative Euler-Lagrange residual for convergence [default: 1e-6]
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Worker threads for parameter scans [default: all cores]
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Report path (`.json`) or results directory [default: stdout]
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Config file, TOML or JSON (by extension)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
struct ProblemArgs {
    /// euclidean, hyperbolic, exterior or annulus [default: euclidean]
    #[arg(long)]
    space: Option<String>,
    /// Dimension [default: 3]
    #[arg(long)]
    n: Option<usize>,
    /// Power of the nonlinearity [default: 3]
    #[arg(long)]
    p: Option<f64>,
    /// Frequency λ [default: 1]
    #[arg(long)]
    lambda: Option<f64>,
    /// Constraint level: J_p for solve-f, mass for solve-e [default: 1]
    #[arg(long)]
    beta: Option<f64>,
    /// Inner radius (exterior, annulus)
    #[arg(long)]
    inner: Option<f64>,
    /// Outer radius (annulus)
    #[arg(long)]
    outer: Option<f64>,
}

impl ProblemArgs {
    fn as_file(&self) -> ProblemFile {
        ProblemFile {
            space: self.space.clone(),
            n: self.n,
            p: self.p,
            lambda: self.lambda,
            beta: self.beta,
            inner: self.inner,
            outer: self.outer,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Minimize ‖∇u‖² + λ‖u‖² at fixed ∫|u|^{p+1} = β
    SolveF(ProblemArgs),
    /// Minimize ½‖∇u‖² - ∫|u|^{p+1}/(p+1) at fixed mass β
    SolveE(ProblemArgs),
    /// Shooting solution of -Δu + λu = u^p on ℝⁿ
    Shoot(ProblemArgs),
    /// Maximize the Weinstein functional (exploratory on hyperbolic space)
    Weinstein(ProblemArgs),
    /// Lowest eigenvalues of L_a = -Δ + λ - a u^{p-1} around the ground state
    Spectrum {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Coefficient a [default: p]
        #[arg(long)]
        a: Option<f64>,
        /// Angular sector
        #[arg(long, default_value_t = 0)]
        ell: usize,
        /// Number of eigenvalues
        #[arg(long, default_value_t = 4)]
        k: usize,
    },
    /// Second variation along random tangent directions and the phase direction
    SecondVariation {
        #[command(flatten)]
        problem: ProblemArgs,
        /// mass or jp
        #[arg(long, default_value = "mass")]
        constraint: String,
        /// Number of random directions
        #[arg(long, default_value_t = 20)]
        directions: usize,
    },
    /// Concentration-compactness trichotomy of a measure sequence in CSV
    CcClassify {
        /// CSV with columns k, coordinates..., mass
        #[arg(long)]
        input: PathBuf,
        /// Comma-separated radii
        #[arg(long, value_delimiter = ',')]
        radii: Option<Vec<f64>>,
    },
    /// Energy and mass of u_λ across λ on ℝⁿ
    ScalingScan {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        p: Option<f64>,
        /// Comma-separated λ values
        #[arg(long, value_delimiter = ',')]
        lambdas: Option<Vec<f64>>,
    },
    /// I_β across β and its subadditivity
    IbetaScan {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Comma-separated β values
        #[arg(long, value_delimiter = ',')]
        betas: Option<Vec<f64>>,
    },
    /// Exterior of a ball: radial minimum against the escaping sequence
    ExteriorDemo {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        /// Radius of the removed ball
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Planar annulus: radial minimum against an off-centre trial
    AnnulusDemo {
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        inner: Option<f64>,
        #[arg(long)]
        outer: Option<f64>,
    },
    /// Energy of the ground state on hyperbolic space with λ ≤ 0
    HyperbolicEnergy(ProblemArgs),
    /// The acceptance suite
    VerifyAll {
        /// Reduced grids
        #[arg(long)]
        quick: bool,
        /// Comma-separated criterion numbers [default: all]
        #[arg(long, value_delimiter = ',')]
        only: Option<Vec<usize>>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::SolveF(_) => "solve-f",
            Command::SolveE(_) => "solve-e",
            Command::Shoot(_) => "shoot",
            Command::Weinstein(_) => "weinstein",
            Command::Spectrum { .. } => "spectrum",
            Command::SecondVariation { .. } => "second-variation",
            Command::CcClassify { .. } => "cc-classify",
            Command::ScalingScan { .. } => "scaling-scan",
            Command::IbetaScan { .. } => "ibeta-scan",
            Command::ExteriorDemo { .. } => "exterior-demo",
            Command::AnnulusDemo { .. } => "annulus-demo",
            Command::HyperbolicEnergy(_) => "hyperbolic-energy",
            Command::VerifyAll { .. } => "verify-all",
        }
    }
}

/// Resolved problem: the space and parameters after merging.
#[derive(Debug, Clone, Serialize)]
struct Problem {
    space: ModelSpace,
    params: ProblemParams,
}

fn build_problem(p: &ProblemFile, defaults: (usize, f64, f64)) -> Result<Problem> {
    let kind: SpaceKind = p.space.as_deref().unwrap_or("euclidean").parse()?;
    let n = p.n.unwrap_or(defaults.0);
    let space = ModelSpace::new(kind, n, p.inner, p.outer)?;
    let params = ProblemParams::new(n, p.p.unwrap_or(defaults.1), p.lambda.unwrap_or(defaults.2), p.beta.unwrap_or(1.0));
    Ok(Problem { space, params })
}

/// What a command produced: the report, its CSV tables, and whether the
/// underlying solve converged (exit 3 otherwise).
struct Outcome {
    report: serde_json::Value,
    tables: Vec<(&'static str, String)>,
    status: Status,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Status {
    Ok,
    NotConverged,
    Failed,
}

fn outcome<R: Serialize>(report: &R, tables: Vec<(&'static str, String)>, status: Status) -> Result<Outcome> {
    Ok(Outcome {
        report: serde_json::to_value(report)?,
        tables,
        status,
    })
}

fn solve_status(rep: &SolveReport) -> Status {
    if rep.converged {
        Status::Ok
    } else {
        Status::NotConverged
    }
}

fn profile_table(u: &RadialField) -> (&'static str, String) {
    ("profile", u.to_csv_string())
}

fn columns(header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        s.push_str(&r.into_iter().map(fmt_f64).collect::<Vec<_>>().join(","));
        s.push('\n');
    }
    s
}

#[derive(Serialize)]
struct ShootReport {
    space: ModelSpace,
    params: ProblemParams,
    /// `u(0)`
    amplitude: f64,
    /// Residual of the discrete equation at the sampled profile.
    residual: f64,
    profile: RadialField,
}

#[derive(Serialize)]
struct SecondVariationReport {
    space: ModelSpace,
    params: ProblemParams,
    constraint: String,
    seed: u64,
    directions: Vec<SecondVariation>,
    max_rel_err: f64,
    phase: SecondVariation,
}

#[derive(Serialize)]
struct HyperbolicEnergyReport {
    #[serde(flatten)]
    energy: PositiveEnergy,
    /// At `λ = 0` only.
    #[serde(skip_serializing_if = "Option::is_none")]
    zero_multiplier: Option<ZeroMultiplier>,
}

fn run(command: &Command, file: &FileConfig, cfg: &SolverConfig) -> Result<(serde_json::Value, Outcome)> {
    let problem = |args: &ProblemArgs, defaults| build_problem(&merge_problem(&args.as_file(), &file.problem), defaults);
    let standard = (3, 3.0, 1.0);
    match command {
        Command::SolveF(a) => {
            let pr = problem(a, standard)?;
            let rep = minimize_f(&pr.space, &pr.params, cfg)?;
            let table = profile_table(&rep.minimizer);
            Ok((serde_json::to_value((&pr, cfg))?, outcome(&rep, vec![table], solve_status(&rep))?))
        }
        Command::SolveE(a) => {
            let pr = problem(a, standard)?;
            let rep = minimize_e(&pr.space, &pr.params, cfg)?;
            let table = profile_table(&rep.minimizer);
            Ok((serde_json::to_value((&pr, cfg))?, outcome(&rep, vec![table], solve_status(&rep))?))
        }
        Command::Shoot(a) => {
            let pr = problem(a, standard)?;
            let u = shoot(&pr.space, &pr.params, cfg)?;
            let rep = ShootReport {
                space: pr.space,
                params: pr.params,
                amplitude: shoot_amplitude(pr.params.n, pr.params.lambda, pr.params.p)?,
                residual: unit_residual(&u, &pr.params),
                profile: u,
            };
            let table = profile_table(&rep.profile);
            Ok((serde_json::to_value((&pr, cfg))?, outcome(&rep, vec![table], Status::Ok)?))
        }
        Command::Weinstein(a) => {
            let pr = problem(a, (2, 3.0, 1.0))?;
            let key = serde_json::to_value((&pr, cfg))?;
            if pr.space.kind == SpaceKind::Hyperbolic {
                let rep = weinstein_hyperbolic(pr.space.n, pr.params.p, cfg)?;
                let table = ("mass-trace", rep.to_csv()?);
                Ok((key, outcome(&rep, vec![table], Status::Ok)?))
            } else {
                let rep = maximize_w(&pr.space, &pr.params, cfg)?;
                let table = profile_table(&rep.minimizer);
                Ok((key, outcome(&rep, vec![table], solve_status(&rep))?))
            }
        }
        Command::Spectrum { problem: a, a: coef, ell, k } => {
            let pr = problem(a, standard)?;
            let g = ground_state(&pr.space, &pr.params, cfg)?;
            let coef = coef.unwrap_or(pr.params.p);
            let rep = lowest_eigs(&assemble_la(&g.u, &g.params, coef, *ell)?, *k)?;
            let eig = columns(&["index", "eigenvalue"], rep.eigenvalues.iter().enumerate().map(|(i, e)| vec![i as f64, *e]));
            let mut header = vec!["r".to_string()];
            header.extend((0..rep.eigenfields.len()).map(|i| format!("psi_{i}")));
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            let fields = columns(
                &header,
                (0..g.u.grid.m).map(|i| {
                    let mut row = vec![g.u.grid.nodes[i]];
                    row.extend(rep.eigenfields.iter().map(|f| f.values[i]));
                    row
                }),
            );
            let key = serde_json::to_value((&pr, cfg, coef, ell, k))?;
            Ok((key, outcome(&rep, vec![("eigenvalues", eig), ("eigenfields", fields)], Status::Ok)?))
        }
        Command::SecondVariation {
            problem: a,
            constraint,
            directions,
        } => {
            let pr = problem(a, standard)?;
            let c: Constraint = constraint.parse()?;
            let g = ground_state(&pr.space, &pr.params, cfg)?;
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let mut checks = Vec::with_capacity(*directions);
            for _ in 0..*directions {
                let psi0 = random_signed_field(&g.u.grid, &mut rng);
                let psi1 = random_signed_field(&g.u.grid, &mut rng);
                checks.push(second_variation_check(&g.u, &g.params, &psi0, &psi1, c)?);
            }
            let phase = second_variation_check(&g.u, &g.params, &RadialField::zeros(&g.u.grid), &g.u, c)?;
            let rep = SecondVariationReport {
                space: pr.space,
                params: g.params,
                constraint: format!("{c:?}").to_lowercase(),
                seed: cfg.seed,
                max_rel_err: checks.iter().map(|s| s.rel_err).fold(0.0, f64::max),
                directions: checks,
                phase,
            };
            let table = columns(
                &["direction", "analytic", "numeric", "rel_err"],
                rep.directions.iter().enumerate().map(|(i, s)| vec![i as f64, s.analytic, s.numeric, s.rel_err]),
            );
            let key = serde_json::to_value((&pr, cfg, constraint, directions))?;
            Ok((key, outcome(&rep, vec![("directions", table)], Status::Ok)?))
        }
        Command::CcClassify { input, radii } => {
            let seq = MeasureSequence::from_csv_path(input)?;
            let radii = radii.clone().unwrap_or_else(|| DEFAULT_RADII.to_vec());
            let th = file.cc.unwrap_or_default();
            let rep = classify(&seq, &radii, &th)?;
            let mut header = vec!["k".to_string()];
            header.extend(radii.iter().map(|r| format!("R={}", fmt_f64(*r))));
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            let table = columns(
                &header,
                rep.q_table.iter().enumerate().map(|(k, row)| {
                    let mut r = vec![k as f64];
                    r.extend(row);
                    r
                }),
            );
            // The input is identified by its bytes, not its path.
            let digest = config_hash("input", &std::fs::read(input)?)?;
            let key = serde_json::to_value((digest, &radii, th))?;
            Ok((key, outcome(&rep, vec![("q-table", table)], Status::Ok)?))
        }
        Command::ScalingScan { n, p, lambdas } => {
            let mut c = file.scaling.clone().unwrap_or_default();
            if let Some(n) = n {
                c.n = *n;
            }
            if let Some(p) = p {
                c.p = *p;
            }
            if let Some(l) = lambdas {
                c.lambdas = l.clone();
            }
            let rep = scaling_scan(&c, cfg)?;
            let status = if rep.failures == 0 { Status::Ok } else { Status::NotConverged };
            let table = ("rows", rep.to_csv()?);
            Ok((serde_json::to_value((&c, cfg))?, outcome(&rep, vec![table], status)?))
        }
        Command::IbetaScan { problem: a, betas } => {
            let mut c = file.ibeta.clone().unwrap_or_default();
            let pf = merge_problem(&a.as_file(), &file.problem);
            if pf.space.is_some() || pf.n.is_some() {
                let kind: SpaceKind = pf.space.as_deref().unwrap_or("euclidean").parse()?;
                c.space = ModelSpace::new(kind, pf.n.unwrap_or(c.space.n), pf.inner, pf.outer)?;
            }
            if let Some(p) = pf.p {
                c.p = p;
            }
            if let Some(l) = pf.lambda {
                c.lambda = l;
            }
            if let Some(b) = betas {
                c.betas = b.clone();
            }
            let rep = ibeta_power_law(&c, cfg)?;
            let status = if rep.converged.iter().all(|c| *c) { Status::Ok } else { Status::NotConverged };
            let table = ("values", rep.to_csv()?);
            Ok((serde_json::to_value((&c, cfg))?, outcome(&rep, vec![table], status)?))
        }
        Command::ExteriorDemo {
            n,
            p,
            lambda,
            beta,
            radius,
            trials,
        } => {
            let mut c = file.exterior.clone().unwrap_or_default();
            c.n = n.unwrap_or(c.n);
            c.p = p.unwrap_or(c.p);
            c.lambda = lambda.unwrap_or(c.lambda);
            c.beta = beta.unwrap_or(c.beta);
            c.radius = radius.unwrap_or(c.radius);
            c.trials = trials.unwrap_or(c.trials);
            let rep = exterior_demo(&c, cfg)?;
            let table = ("trials", rep.to_csv()?);
            Ok((serde_json::to_value((&c, cfg))?, outcome(&rep, vec![table], Status::Ok)?))
        }
        Command::AnnulusDemo {
            p,
            lambda,
            beta,
            inner,
            outer,
        } => {
            let mut c = file.annulus.clone().unwrap_or_default();
            c.p = p.unwrap_or(c.p);
            c.lambda = lambda.unwrap_or(c.lambda);
            c.beta = beta.unwrap_or(c.beta);
            c.inner = inner.unwrap_or(c.inner);
            c.outer = outer.unwrap_or(c.outer);
            let rep = annulus_demo(&c, cfg)?;
            Ok((serde_json::to_value((&c, cfg))?, outcome(&rep, Vec::new(), Status::Ok)?))
        }
        Command::HyperbolicEnergy(a) => {
            let mut pf = merge_problem(&a.as_file(), &file.problem);
            pf.space.get_or_insert_with(|| "hyperbolic".into());
            let pr = build_problem(&pf, (3, 2.0, 0.0))?;
            let energy = hyperbolic_positive_energy(&pr.space, &pr.params, cfg)?;
            let zero_multiplier = if pr.params.lambda == 0.0 {
                Some(zero_multiplier_identity(&energy.ground_state.u, pr.params.p)?)
            } else {
                None
            };
            let table = profile_table(&energy.ground_state.u);
            let rep = HyperbolicEnergyReport { energy, zero_multiplier };
            Ok((serde_json::to_value((&pr, cfg))?, outcome(&rep, vec![table], Status::Ok)?))
        }
        Command::VerifyAll { quick, only } => {
            let opts = VerifyOptions {
                quick: *quick,
                seed: cfg.seed,
            };
            let rep = match only {
                None => verify_all(&opts),
                Some(ids) => {
                    let criteria = ids.iter().map(|&i| run_criterion(i, &opts)).collect::<Result<Vec<_>>>()?;
                    let passed = criteria.iter().filter(|c| c.passed).count();
                    VerifyReport {
                        options: opts,
                        all_passed: passed == criteria.len(),
                        passed,
                        criteria,
                    }
                }
            };
            for c in &rep.criteria {
                eprintln!("{}", c.line());
            }
            eprintln!("{}/{} passed", rep.passed, rep.criteria.len());
            let table = columns(
                &["criterion", "passed"],
                rep.criteria.iter().map(|c| vec![c.id as f64, if c.passed { 1.0 } else { 0.0 }]),
            );
            let status = if rep.all_passed { Status::Ok } else { Status::Failed };
            Ok((serde_json::to_value((opts, only, CRITERIA))?, outcome(&rep, vec![("criteria", table)], status)?))
        }
    }
}

fn execute(cli: &Cli) -> Result<Status> {
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(Error::Parameter("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| Error::Parameter(e.to_string()))?;
    }
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let flags = SolverFlags {
        seed: cli.seed,
        m: cli.grid_m,
        r_max: cli.rmax,
        tol: cli.tol,
    };
    let cfg = solver_config(&file, &flags);
    let name = cli.command.name();
    let (key, out) = run(&cli.command, &file, &cfg)?;
    let hash = config_hash(name, &key)?;
    let env_dir = std::env::var_os(RESULTS_DIR_VAR).map(PathBuf::from);
    let target = resolve(cli.out.as_deref(), env_dir.as_deref(), name, &hash);
    let tables: Vec<(&str, String)> = out.tables.iter().map(|(n, t)| (*n, t.clone())).collect();
    let emitted = emit(&target, &out.report, &tables)?;
    for f in emitted.files {
        eprintln!("wrote {}", f.display());
    }
    Ok(out.status)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::NotConverged) => {
            eprintln!("error: the solve did not converge");
            ExitCode::from(3)
        }
        Ok(Status::Failed) => ExitCode::from(4),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
