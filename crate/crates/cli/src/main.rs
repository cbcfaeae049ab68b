use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use tensor_rek::harness::{self, ExperimentKind, ExperimentSpec};
use tensor_rek::solvers::{self, Algorithm};
use tensor_rek::{spectral, Error, Objective};

#[derive(Parser, Debug)]
#[command(
    name = "tensor-rek",
    version,
    about = "Randomized Kaczmarz solvers for tensor recovery"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Inconsistent least squares: A, X Gaussian, B = A*X + noise.
    Lsq(ExperimentArgs),
    /// Sparse recovery with rank-deficient A and noise orthogonal to its range.
    Sparse(ExperimentArgs),
    /// Print the slice constants and convergence rates of a tensor file.
    Rates(RatesArgs),
    /// Apply the pseudoinverse of A to B.
    Pinv(PinvArgs),
    /// Compare fast routines against dense references on random tensors.
    Selftest(SelftestArgs),
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    #[arg(long)]
    n1: Option<usize>,
    #[arg(long)]
    n2: Option<usize>,
    #[arg(long)]
    n3: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Relative-change stop tolerance; 0 runs the whole budget.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    step_factor: Option<f64>,
    /// Elastic-net weight (sparse only).
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    noise_scale: Option<f64>,
    /// Comma-separated list of trk, rrk, trek, rrek, rrek_sparse.
    #[arg(long, value_delimiter = ',')]
    algos: Option<Vec<String>>,
    #[arg(long)]
    log_every: Option<usize>,
    /// CSV destination; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write A, B, the reference and the final iterates of every trial here.
    #[arg(long, env = "TENSOR_REK_DUMP_DIR")]
    dump_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RatesArgs {
    /// Tensor file holding A.
    #[arg(long)]
    a: PathBuf,
    /// Defaults to 1.5/lambda_r.
    #[arg(long)]
    alpha_r: Option<f64>,
    /// Defaults to 1.5/lambda_c.
    #[arg(long)]
    alpha_c: Option<f64>,
    /// Use the elastic-net objective with this weight instead of Frobenius.
    #[arg(long)]
    lambda: Option<f64>,
    /// Error-bound constant; defaults to 2 sigma_min^2 for Frobenius.
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
}

#[derive(Args, Debug)]
struct PinvArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SelftestArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    instances: usize,
    #[arg(long, default_value_t = 8)]
    max_extent: usize,
}

/// Failures mapped to exit codes: 1 for invalid input, 2 for I/O and corrupt
/// files.
enum Failure {
    Invalid(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) | Error::Format(_) => Failure::Io(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

fn io_context(path: &Path) -> impl FnOnce(Error) -> Failure + '_ {
    move |e| match Failure::from(e) {
        Failure::Io(m) => Failure::Io(format!("{}: {m}", path.display())),
        other => other,
    }
}

fn build_spec(kind: ExperimentKind, args: &ExperimentArgs) -> Result<ExperimentSpec, Failure> {
    let mut spec = match kind {
        ExperimentKind::LeastSquares => ExperimentSpec::least_squares(),
        ExperimentKind::SparseRecovery => ExperimentSpec::sparse_recovery(),
    };
    macro_rules! set {
        ($($field:ident),*) => {
            $(if let Some(v) = args.$field { spec.$field = v; })*
        };
    }
    set!(
        n1,
        n2,
        n3,
        k,
        trials,
        max_iters,
        tol,
        step_factor,
        lambda,
        noise_scale,
        log_every
    );
    spec.seed = args.seed;
    if let Some(names) = &args.algos {
        spec.algorithms = names
            .iter()
            .map(|n| n.parse::<Algorithm>())
            .collect::<Result<_, _>>()?;
    }
    spec.validate()?;
    Ok(spec)
}

fn run_experiment_cmd(kind: ExperimentKind, args: &ExperimentArgs) -> Result<(), Failure> {
    let spec = build_spec(kind, args)?;
    info!(
        "{kind}: {}x{}x{}, K = {}, {} trials",
        spec.n1, spec.n2, spec.n3, spec.k, spec.trials
    );
    let outcome = harness::run_experiment(&spec, args.dump_dir.as_deref())?;
    match &args.out {
        Some(p) => outcome.csv.write(p).map_err(io_context(p))?,
        None => print!("{}", outcome.csv.render()),
    }
    for &alg in &spec.algorithms {
        let mean = outcome.mean_final_relerr(alg).unwrap_or(f64::NAN);
        let support: Vec<bool> = outcome
            .outcomes_for(alg)
            .filter_map(|o| o.support_match)
            .collect();
        if support.is_empty() {
            eprintln!("{alg}: mean final relative error {mean:.6e}");
        } else {
            let hits = support.iter().filter(|&&s| s).count();
            eprintln!(
                "{alg}: mean final relative error {mean:.6e}, support recovered in {hits}/{} trials",
                support.len()
            );
        }
    }
    Ok(())
}

fn rates_cmd(args: &RatesArgs) -> Result<(), Failure> {
    let a = harness::read_tensor(&args.a).map_err(io_context(&args.a))?;
    let obj = match args.lambda {
        Some(l) => Objective::elastic_net(l)?,
        None => Objective::Frobenius,
    };
    let (dr, dc) = solvers::default_stepsizes(&a, &obj)?;
    let alpha_r = args.alpha_r.unwrap_or(dr);
    let alpha_c = args.alpha_c.unwrap_or(dc);
    let r = solvers::theoretical_rates(&a, &obj, alpha_r, alpha_c, args.nu, args.delta)?;
    let opt = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.17e}"));
    println!("objective      = {obj}");
    println!("dims           = {}", a.dims());
    println!("spectral_norm  = {:.17e}", spectral::spectral_norm(&a)?);
    println!("lambda_r       = {:.17e}", r.lambda_r);
    println!("lambda_c       = {:.17e}", r.lambda_c);
    println!("sigma_min      = {:.17e}", r.sigma_min);
    println!("frobenius_sq   = {:.17e}", r.frobenius_sq);
    println!("alpha_r        = {:.17e}", r.alpha_r);
    println!("alpha_c        = {:.17e}", r.alpha_c);
    println!("gamma          = {:.17e}", r.gamma);
    println!("nu             = {}", opt(r.nu));
    println!("rho_c          = {:.17e}", r.rho_c);
    println!("rho_r          = {}", opt(r.rho_r));
    println!("delta          = {}", opt(r.delta));
    println!("combined_rate  = {}", opt(r.combined_rate));
    Ok(())
}

fn pinv_cmd(args: &PinvArgs) -> Result<(), Failure> {
    let a = harness::read_tensor(&args.a).map_err(io_context(&args.a))?;
    let b = harness::read_tensor(&args.b).map_err(io_context(&args.b))?;
    let x = spectral::pinv_apply(&a, &b, Default::default())?;
    harness::write_tensor(&args.out, &x).map_err(io_context(&args.out))?;
    Ok(())
}

fn selftest_cmd(args: &SelftestArgs) -> Result<(), Failure> {
    if args.instances == 0 || args.max_extent == 0 {
        return Err(Failure::Invalid(
            "instances and max-extent must be positive".into(),
        ));
    }
    let rep = harness::run_selftest(args.seed, args.instances, args.max_extent)?;
    for c in &rep.checks {
        println!(
            "{:<20} {} instances  max error {:.3e}  tolerance {:.0e}  {}",
            c.name,
            c.instances,
            c.max_error,
            c.tolerance,
            if c.pass() { "PASS" } else { "FAIL" }
        );
    }
    if rep.all_pass() {
        Ok(())
    } else {
        Err(Failure::Invalid("selftest failed".into()))
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Lsq(a) => run_experiment_cmd(ExperimentKind::LeastSquares, a),
        Command::Sparse(a) => run_experiment_cmd(ExperimentKind::SparseRecovery, a),
        Command::Rates(a) => rates_cmd(a),
        Command::Pinv(a) => pinv_cmd(a),
        Command::Selftest(a) => selftest_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Io(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
