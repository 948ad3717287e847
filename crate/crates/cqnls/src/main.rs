//! Command-line front end: build ground states and branches, run
//! evolutions and experiment suites, and emit plot-ready data files.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use cqnls::error::Error;
use cqnls::evolution::{evolve, EvolutionConfig};
use cqnls::experiments::{
    self, build_initial, run_scenario, PerturbationSpec, ScenarioParams, VerdictKind,
};
use cqnls::groundstate::{
    self, continue_branch, find_critical_omega, newton_solve, pohozaev_residuals, trace_alpha,
    uniform_alpha_schedule, BranchLibrary,
};
use cqnls::library::{
    fmt_f64, load_branch_library, read_profile, write_branch_library, write_field, write_profile,
    write_scenario, write_trajectory_csv,
};
use cqnls::spectral::{build_shared_grid, Dimension};

const ENV_LIBRARY: &str = "CQNLS_LIBRARY";

#[derive(Parser)]
#[command(
    name = "cqnls",
    version,
    about = "Radial spectral solver for the cubic-quintic NLS in 2D and 3D"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one ground state and store it as a library record.
    Groundstate(GroundstateArgs),
    /// Sweep a branch of ground states and write its diagnostics CSV.
    Branch(BranchArgs),
    /// Evolve a (perturbed) stored profile and write the trajectory CSV.
    Evolve(EvolveArgs),
    /// Run a named or ad-hoc perturbation experiment with classification.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct GroundstateArgs {
    /// Spatial dimension (2 or 3).
    #[arg(long)]
    d: u32,
    /// Soliton frequency in (0, 3/16).
    #[arg(long)]
    omega: f64,
    /// Polynomial degree of the collocation grid.
    #[arg(long = "N", default_value_t = 400)]
    degree: usize,
    /// Truncation radius in s = r^2 units.
    #[arg(long, default_value_t = 1e3)]
    s0: f64,
    /// Entries in the uniform alpha homotopy schedule.
    #[arg(long, default_value_t = 11)]
    alpha_steps: usize,
    /// Residual max-norm target.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    /// Output record path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BranchArgs {
    #[arg(long)]
    d: u32,
    #[arg(long)]
    omega_min: f64,
    #[arg(long)]
    omega_max: f64,
    /// Number of branch points (uniformly spaced in omega).
    #[arg(long)]
    points: usize,
    #[arg(long = "N", default_value_t = 300)]
    degree: usize,
    #[arg(long, default_value_t = 1e3)]
    s0: f64,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    /// Directory receiving the CSV and the per-point profile records.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct EvolveArgs {
    /// Stored profile record to start from.
    #[arg(long)]
    init: PathBuf,
    /// Perturbation spec: `mult:LAMBDA` | `gauss:SIGN:LAMBDA[:R0[:WIDTH]]`.
    #[arg(long)]
    perturb: PerturbationSpec,
    /// Final time.
    #[arg(long)]
    tf: f64,
    /// Number of time steps.
    #[arg(long)]
    nt: usize,
    /// Re-solve the profile on a grid with this truncation radius.
    #[arg(long)]
    s0_override: Option<f64>,
    /// Re-solve the profile on a grid with this degree.
    #[arg(long = "N-override")]
    degree_override: Option<usize>,
    /// Steps between diagnostic records.
    #[arg(long)]
    record_stride: Option<usize>,
    /// Comma-separated times at which to store field snapshots.
    #[arg(long, value_delimiter = ',')]
    snapshot_times: Vec<f64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Named scenario from the built-in registry.
    #[arg(long, conflicts_with_all = ["d", "omega", "perturb", "tf", "nt"])]
    scenario: Option<String>,
    #[arg(long)]
    d: Option<u32>,
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    perturb: Option<PerturbationSpec>,
    #[arg(long)]
    tf: Option<f64>,
    #[arg(long)]
    nt: Option<usize>,
    #[arg(long = "N", default_value_t = 300)]
    degree: usize,
    #[arg(long, default_value_t = 1e3)]
    s0: f64,
    /// Expected verdict(s): one value applied to all runs, or one per run,
    /// comma-separated. A mismatch exits with status 5.
    #[arg(long, value_delimiter = ',')]
    expect: Vec<VerdictKind>,
    /// Directory with stored profiles backing the classification branch;
    /// built on the fly (and cached there) when absent.
    #[arg(long)]
    library: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::OmegaOutOfRange(_) | Error::AlphaOutOfRange(_) => 2,
        Error::NoConvergence { .. }
        | Error::TrivialCollapse { .. }
        | Error::AdaptiveFail { .. }
        | Error::SingularJacobian { .. } => 3,
        Error::AccuracyLost { .. } => 4,
        _ => 1,
    }
}

fn default_dir(cli_dir: Option<PathBuf>) -> PathBuf {
    cli_dir
        .or_else(|| std::env::var_os(ENV_LIBRARY).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("library"))
}

/// Resolve a record path, falling back to the library directory.
fn resolve_record(path: &Path) -> PathBuf {
    if path.exists() {
        return path.to_path_buf();
    }
    if let Some(dir) = std::env::var_os(ENV_LIBRARY) {
        let candidate = PathBuf::from(dir).join(path);
        if candidate.exists() {
            return candidate;
        }
    }
    path.to_path_buf()
}

fn cmd_groundstate(args: GroundstateArgs) -> Result<(), Error> {
    let d = Dimension::new(args.d)?;
    groundstate::check_omega(args.omega)?;
    let grid = build_shared_grid(d, args.degree, args.s0)?;
    let schedule = uniform_alpha_schedule(args.alpha_steps.max(2));
    let profile = trace_alpha(
        &grid,
        args.omega,
        &schedule,
        args.tol,
        groundstate::DEFAULT_MAX_ITER,
    )?;
    let diag = profile.diagnostics()?;
    let (r1, r2) = pohozaev_residuals(&profile)?;
    write_profile(&args.out, &profile)?;
    println!(
        "d = {}, omega = {}, N = {}, s0 = {}",
        args.d, args.omega, args.degree, args.s0
    );
    println!("mass     = {}", fmt_f64(diag.mass));
    println!("energy   = {}", fmt_f64(diag.energy));
    println!("linf     = {}", fmt_f64(diag.linf));
    println!("pohozaev = {:.3e} {:.3e}", r1, r2);
    println!(
        "residual = {:.3e} ({} Newton iterations)",
        profile.residual_norm, profile.newton_iters
    );
    println!("wrote {}", args.out.display());
    Ok(())
}

fn cmd_branch(args: BranchArgs) -> Result<(), Error> {
    let d = Dimension::new(args.d)?;
    groundstate::check_omega(args.omega_min)?;
    groundstate::check_omega(args.omega_max)?;
    if args.omega_min >= args.omega_max || args.points < 2 {
        return Err(Error::MalformedRecord(
            "need omega-min < omega-max and at least 2 points".into(),
        ));
    }
    let grid = build_shared_grid(d, args.degree, args.s0)?;
    let omegas: Vec<f64> = (0..args.points)
        .map(|i| {
            args.omega_min + (args.omega_max - args.omega_min) * i as f64 / (args.points - 1) as f64
        })
        .collect();
    let seed_omega = if (args.omega_min..=args.omega_max).contains(&0.1) {
        0.1
    } else {
        0.5 * (args.omega_min + args.omega_max)
    };
    let seed = trace_alpha(
        &grid,
        seed_omega,
        &uniform_alpha_schedule(11),
        args.tol,
        groundstate::DEFAULT_MAX_ITER,
    )?;
    let lib = continue_branch(
        &grid,
        &omegas,
        &seed,
        args.tol,
        groundstate::DEFAULT_MAX_ITER,
    )?;

    let out_dir = default_dir(args.out_dir);
    let csv = write_branch_library(&out_dir, &lib)?;
    println!(
        "wrote {} ({} points)",
        csv.display(),
        lib.branch.points.len()
    );
    match find_critical_omega(&lib.branch) {
        Ok(omega_crit) => println!("omega_crit = {omega_crit:.5}"),
        Err(Error::NoInteriorExtremum) => println!("monotone"),
        Err(e) => return Err(e),
    }
    if !lib.gaps.is_empty() {
        eprintln!("unreachable omegas: {:?}", lib.gaps);
        return Err(Error::BranchGap(lib.gaps));
    }
    Ok(())
}

fn cmd_evolve(args: EvolveArgs) -> Result<(), Error> {
    let record = read_profile(&resolve_record(&args.init))?;
    let mut profile = record.profile;

    let need_regrid = args.s0_override.is_some_and(|s| s != profile.grid.s0)
        || args
            .degree_override
            .is_some_and(|n| n != profile.grid.degree);
    if need_regrid {
        let s0 = args.s0_override.unwrap_or(profile.grid.s0);
        let degree = args.degree_override.unwrap_or(profile.grid.degree);
        let grid = build_shared_grid(profile.d, degree, s0)?;
        let seed: Vec<f64> = grid
            .s_nodes
            .iter()
            .map(|&s| {
                if s > profile.grid.s0 {
                    Ok(0.0)
                } else {
                    profile.grid.interpolate(profile.values.as_slice(), s)
                }
            })
            .collect::<Result<_, Error>>()?;
        profile = newton_solve(
            &grid,
            &seed,
            profile.omega,
            profile.alpha,
            groundstate::DEFAULT_TOL,
            groundstate::DEFAULT_MAX_ITER,
        )?;
    }

    let u0 = build_initial(&profile, &args.perturb)?;
    let mut config = EvolutionConfig::new(args.tf, args.nt);
    if let Some(stride) = args.record_stride {
        config.record_stride = stride.max(1);
    }
    config.snapshot_times = args.snapshot_times.clone();
    let traj = evolve(&u0, &config)?;

    let out_dir = default_dir(args.out_dir);
    std::fs::create_dir_all(&out_dir)?;
    let stem = args
        .init
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".into());
    let csv = out_dir.join(format!("{stem}_trajectory.csv"));
    write_trajectory_csv(&csv, &traj)?;
    write_field(
        &out_dir.join(format!("{stem}_final.txt")),
        &traj.final_field,
    )?;
    for (i, snap) in traj.snapshots.iter().enumerate() {
        write_field(&out_dir.join(format!("{stem}_snapshot{i}.txt")), snap)?;
    }

    let deviation = traj
        .final_field
        .values
        .iter()
        .zip(profile.values.iter())
        .map(|(u, q)| (u.norm() - q).abs())
        .fold(0.0, f64::max);
    println!("wrote {}", csv.display());
    println!("final |u| deviation from profile = {:.3e}", deviation);
    println!("max delta_E = {:.3e}", traj.max_delta_e());
    if traj.delta_e_warning {
        eprintln!("warning: delta_E exceeded {:.1e}", config.delta_e_warn);
    }
    Ok(())
}

/// Load the classification branch from `dir` if possible, otherwise sweep
/// a fresh one and cache it there.
fn classification_library(dir: &Path, d: Dimension) -> Result<BranchLibrary, Error> {
    if dir.is_dir() {
        if let Ok(lib) = load_branch_library(dir, d) {
            if lib.branch.points.len() >= 5 {
                return Ok(lib);
            }
        }
    }
    eprintln!(
        "building classification branch for d = {} (cached in {})",
        d.value(),
        dir.display()
    );
    let grid = build_shared_grid(d, 300, 1e3)?;
    let seed = trace_alpha(
        &grid,
        0.1,
        &uniform_alpha_schedule(11),
        groundstate::DEFAULT_TOL,
        groundstate::DEFAULT_MAX_ITER,
    )?;
    let mut omegas: Vec<f64> = (0..40)
        .map(|i| 0.005 + (0.16 - 0.005) * i as f64 / 39.0)
        .collect();
    for w in [0.007, 0.01, 0.044, 0.047, 0.048] {
        omegas.push(w);
    }
    omegas.sort_by(f64::total_cmp);
    omegas.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let lib = continue_branch(
        &grid,
        &omegas,
        &seed,
        groundstate::DEFAULT_TOL,
        groundstate::DEFAULT_MAX_ITER,
    )?;
    write_branch_library(dir, &lib)?;
    Ok(lib)
}

fn cmd_experiment(args: ExperimentArgs) -> Result<u8, Error> {
    let runs: Vec<ScenarioParams> = if let Some(name) = &args.scenario {
        experiments::find_scenario(name)
            .ok_or_else(|| Error::MalformedRecord(format!("unknown scenario `{name}`")))?
            .runs
    } else {
        let missing =
            || Error::MalformedRecord("ad-hoc runs need --d --omega --perturb --tf --nt".into());
        vec![ScenarioParams {
            label: "adhoc".into(),
            d: args.d.ok_or_else(missing)?,
            omega: args.omega.ok_or_else(missing)?,
            perturbation: args.perturb.clone().ok_or_else(missing)?,
            t_final: args.tf.ok_or_else(missing)?,
            n_steps: args.nt.ok_or_else(missing)?,
            grid_degree: args.degree,
            s0: args.s0,
            record_stride: (args.nt.ok_or_else(missing)? / 2000).max(1),
            expected: None,
        }]
    };

    if !args.expect.is_empty() && args.expect.len() != 1 && args.expect.len() != runs.len() {
        return Err(Error::MalformedRecord(format!(
            "--expect takes 1 or {} comma-separated verdicts",
            runs.len()
        )));
    }

    let out_dir = default_dir(args.out_dir);
    let lib_dir = args
        .library
        .clone()
        .or_else(|| std::env::var_os(ENV_LIBRARY).map(PathBuf::from))
        .unwrap_or_else(|| out_dir.join("branch"));

    let mut mismatch = false;
    let mut libraries: Vec<(u32, Arc<BranchLibrary>)> = Vec::new();
    for (i, params) in runs.iter().enumerate() {
        let d = Dimension::new(params.d)?;
        let library = match libraries.iter().find(|(dd, _)| *dd == params.d) {
            Some((_, l)) => Arc::clone(l),
            None => {
                let l = Arc::new(classification_library(&lib_dir, d)?);
                libraries.push((params.d, Arc::clone(&l)));
                l
            }
        };
        let run = run_scenario(params, &library)?;
        let report_path = write_scenario(&out_dir, &run)?;
        let verdict = run.report.verdict.kind();
        println!(
            "{}: verdict = {}, report = {}",
            params.label,
            verdict,
            report_path.display()
        );
        if let cqnls::experiments::Verdict::Settled {
            omega_hat,
            match_residual,
            mass_radiated,
        } = &run.report.verdict
        {
            println!(
                "  omega_hat = {omega_hat:.4}, match residual = {match_residual:.3e}, mass radiated = {mass_radiated:.3}"
            );
        }
        let expected = if args.expect.is_empty() {
            None
        } else if args.expect.len() == 1 {
            Some(args.expect[0])
        } else {
            Some(args.expect[i])
        };
        if let Some(exp) = expected {
            if exp != verdict {
                eprintln!("{}: expected {exp}, got {verdict}", params.label);
                mismatch = true;
            }
        }
    }
    Ok(if mismatch { 5 } else { 0 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Groundstate(args) => cmd_groundstate(args).map(|()| 0),
        Command::Branch(args) => cmd_branch(args).map(|()| 0),
        Command::Evolve(args) => cmd_evolve(args).map(|()| 0),
        Command::Experiment(args) => cmd_experiment(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
