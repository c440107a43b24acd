use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use decaycert::envelope::{self, CondMode, EnvelopeCurve, Mode};
use decaycert::error::Error;
use decaycert::generate;
use decaycert::io::{load_system, write_system};
use decaycert::oracle::{verify_certificate, TOL_VIOLATION};
use decaycert::spectral_shift::{
    compute_gamma, maximize_re_pplus, DEFAULT_SEED, DEFAULT_TOL_BISECT,
};
use decaycert::system::SecondOrderSystem;
use decaycert::transform::{build_transform, certificate_at};
use decaycert::wave::{self, DampingSpec};

#[derive(Parser)]
#[command(
    name = "decaycert",
    version,
    about = "Certified decay bounds for damped second-order systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print γ₀, the spectral-shift abscissa γ and how it was found.
    Gamma(SystemArgs),
    /// Print decay certificates (β, C_β) for one shift or the shift grid.
    Bound(BoundArgs),
    /// Write the envelope CSV `t,bound,best_mu[,oracle_norm]`.
    Envelope(EnvelopeArgs),
    /// Compare γ with the comparison abscissa γ_b and the spectrum.
    Compare(CompareArgs),
    /// Check one certificate against the matrix exponential.
    Verify(VerifyArgs),
    /// Envelope and true norm of a single oscillator ẍ + d ẋ + k² x = 0.
    #[command(name = "demo-2x2")]
    Demo2x2(Demo2x2Args),
    /// Eigenvalue bound for the discretized damped wave equation.
    #[command(name = "demo-wave")]
    DemoWave(DemoWaveArgs),
    /// Write a seeded example system as manifest plus MatrixMarket files.
    Generate(GenerateArgs),
}

#[derive(Args)]
struct SystemArgs {
    /// System manifest (`dim`, `M`, `C`, `K` entries).
    #[arg(long)]
    system: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum CondArg {
    Exact,
    Lemma,
}

impl From<CondArg> for CondMode {
    fn from(c: CondArg) -> Self {
        match c {
            CondArg::Exact => CondMode::Exact,
            CondArg::Lemma => CondMode::Lemma,
        }
    }
}

#[derive(Args)]
struct BoundArgs {
    #[command(flatten)]
    sys: SystemArgs,
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<f64>,
    #[arg(long, default_value_t = 16)]
    n_mu: usize,
    #[arg(long, value_enum, default_value = "exact")]
    cond_mode: CondArg,
}

#[derive(Args)]
struct TimeArgs {
    /// Final time of the grid; defaults depend on the command.
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long, default_value_t = 200)]
    t_points: usize,
}

#[derive(Args)]
struct EnvelopeArgs {
    #[command(flatten)]
    sys: SystemArgs,
    #[arg(long, default_value_t = 16)]
    n_mu: usize,
    #[command(flatten)]
    time: TimeArgs,
    /// Add the `‖e^{At}‖` column.
    #[arg(long)]
    oracle: bool,
    #[arg(long, value_enum, default_value = "exact")]
    cond_mode: CondArg,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    sys: SystemArgs,
    /// Seed for the numerical-range ascent.
    #[arg(long, env = "DECAY_CERT_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    sys: SystemArgs,
    /// Shift to verify; defaults to γ/2.
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<f64>,
    #[command(flatten)]
    time: TimeArgs,
    #[arg(long, value_enum, default_value = "exact")]
    cond_mode: CondArg,
}

#[derive(Args)]
struct Demo2x2Args {
    #[arg(long)]
    k: f64,
    #[arg(long)]
    d: f64,
    #[arg(long, default_value_t = 16)]
    n_mu: usize,
    #[command(flatten)]
    time: TimeArgs,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct DemoWaveArgs {
    /// Interior grid points.
    #[arg(long, default_value_t = 199)]
    n: usize,
    #[arg(long, default_value_t = std::f64::consts::PI)]
    length: f64,
    /// `const:<v>`, `piecewise:<v1>,<v2>` or `file:<path>`.
    #[arg(long, default_value = "const:1")]
    damping: String,
    #[arg(long, allow_hyphen_values = true, default_value_t = -0.2)]
    mu: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Random,
    Underdamped,
    Partial,
    Modal,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum, default_value = "random")]
    kind: Kind,
    #[arg(long, default_value_t = 4)]
    dim: usize,
    #[arg(long, env = "DECAY_CERT_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Output directory.
    #[arg(long)]
    output: PathBuf,
    #[arg(long, default_value = "system")]
    stem: String,
}

/// Failures with their exit status.
enum Failure {
    Lib(Error),
    Usage(String),
    Violation(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gamma(a) => cmd_gamma(&a),
        Command::Bound(a) => cmd_bound(&a),
        Command::Envelope(a) => cmd_envelope(&a),
        Command::Compare(a) => cmd_compare(&a),
        Command::Verify(a) => cmd_verify(&a),
        Command::Demo2x2(a) => cmd_demo_2x2(&a),
        Command::DemoWave(a) => cmd_demo_wave(&a),
        Command::Generate(a) => cmd_generate(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Violation(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(4)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NoDecayBound { .. } => 3,
        Error::NonConvergence | Error::Overflow | Error::Singular | Error::NotPsd { .. } => 1,
        _ => 2,
    }
}

fn load(args: &SystemArgs) -> Result<SecondOrderSystem, Failure> {
    Ok(load_system(&args.system)?)
}

fn time_grid(time: &TimeArgs, default_max: f64) -> Result<Vec<f64>, Failure> {
    let t_max = time.t_max.unwrap_or(default_max);
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Failure::Usage(format!(
            "--t-max must be positive, got {t_max}"
        )));
    }
    if time.t_points < 2 {
        return Err(Failure::Usage("--t-points must be at least 2".into()));
    }
    let last = (time.t_points - 1) as f64;
    Ok((0..time.t_points)
        .map(|i| t_max * i as f64 / last)
        .collect())
}

fn check_n_mu(n_mu: usize) -> CmdResult {
    if n_mu == 0 {
        return Err(Failure::Usage("--n-mu must be at least 1".into()));
    }
    Ok(())
}

fn emit(text: &str, output: Option<&Path>) -> CmdResult {
    match output {
        Some(path) => fs::write(path, text).map_err(|e| {
            Failure::Lib(Error::Io {
                path: path.to_path_buf(),
                message: e.to_string(),
            })
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn envelope_csv(curve: &EnvelopeCurve) -> String {
    let mut out = String::from("t,bound,best_mu");
    if curve.oracle_norm.is_some() {
        out.push_str(",oracle_norm");
    }
    out.push('\n');
    for i in 0..curve.t_grid.len() {
        write!(
            out,
            "{:.16e},{:.16e},{:.16e}",
            curve.t_grid[i], curve.bound[i], curve.best_mu[i]
        )
        .unwrap();
        if let Some(o) = &curve.oracle_norm {
            write!(out, ",{:.16e}", o[i]).unwrap();
        }
        out.push('\n');
    }
    out
}

fn cmd_gamma(args: &SystemArgs) -> CmdResult {
    let sys = load(args)?;
    let g = compute_gamma(&sys, DEFAULT_TOL_BISECT)?;
    println!("gamma0 = {:.16e}", g.gamma0);
    println!("gamma = {:.16e}", g.gamma);
    println!("path = {:?}", g.path);
    println!("bisection_iterations = {}", g.bisection_iterations);
    println!("bracket_width = {:.3e}", g.bracket_width);
    Ok(())
}

fn cmd_bound(args: &BoundArgs) -> CmdResult {
    check_n_mu(args.n_mu)?;
    let sys = load(&args.sys)?;
    let mode = args.cond_mode.into();
    let mus = match args.mu {
        Some(mu) => vec![mu],
        None => {
            let g = compute_gamma(&sys, DEFAULT_TOL_BISECT)?;
            envelope::mu_grid(g.gamma, args.n_mu, DEFAULT_TOL_BISECT)
        }
    };
    println!("beta,c_beta");
    for mu in mus {
        let cert = certificate_at(&sys, mu, mode)?;
        println!("{:.16e},{:.16e}", cert.beta, cert.c_beta);
    }
    Ok(())
}

fn cmd_envelope(args: &EnvelopeArgs) -> CmdResult {
    check_n_mu(args.n_mu)?;
    let sys = load(&args.sys)?;
    let t = time_grid(&args.time, 10.0)?;
    let g = compute_gamma(&sys, DEFAULT_TOL_BISECT)?;
    let mus = envelope::mu_grid(g.gamma, args.n_mu, DEFAULT_TOL_BISECT);
    let curve = envelope::envelope_from_shifts(&sys, &mus, args.cond_mode.into(), &t, args.oracle)?;
    emit(&envelope_csv(&curve), args.output.as_deref())
}

fn cmd_compare(args: &CompareArgs) -> CmdResult {
    let sys = load(&args.sys)?;
    let r = envelope::classify(&sys)?;
    let ascent = maximize_re_pplus(&sys, 8, args.seed);
    println!("gamma0 = {:.16e}", r.gamma0);
    println!("gamma = {:.16e}", r.gamma);
    println!("gamma_b = {:.16e}", r.gamma_b);
    println!("spectral_abscissa = {:.16e}", r.spectral_abscissa);
    println!("numerical_range_estimate = {:.16e}", ascent);
    println!("path = {:?}", r.path);
    println!("partially_overdamped = {}", r.partially_overdamped);
    println!("batkai_tighter = {}", r.batkai_tighter);
    Ok(())
}

fn cmd_verify(args: &VerifyArgs) -> CmdResult {
    let sys = load(&args.sys)?;
    let g = compute_gamma(&sys, DEFAULT_TOL_BISECT)?;
    let mu = args.mu.unwrap_or(g.gamma / 2.0);
    let t = time_grid(&args.time, 50.0 / g.gamma.abs())?;
    let cert = certificate_at(&sys, mu, args.cond_mode.into())?;
    let report = verify_certificate(&sys, &cert, &t)?;
    println!("beta = {:.16e}", cert.beta);
    println!("c_beta = {:.16e}", cert.c_beta);
    println!("max_violation = {:.16e}", report.max_violation);
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Violation(format!(
            "max_violation {:.3e} exceeds {TOL_VIOLATION:e} at mu = {mu}",
            report.max_violation
        )))
    }
}

fn cmd_demo_2x2(args: &Demo2x2Args) -> CmdResult {
    check_n_mu(args.n_mu)?;
    if !(args.k > 0.0 && args.d > 0.0) {
        return Err(Failure::Usage("--k and --d must be positive".into()));
    }
    let t = time_grid(&args.time, 10.0)?;
    let curve = envelope::modal_envelope(
        &[Mode {
            k: args.k,
            d: args.d,
        }],
        args.n_mu,
        &t,
    )?;
    emit(&envelope_csv(&curve), args.output.as_deref())
}

fn cmd_demo_wave(args: &DemoWaveArgs) -> CmdResult {
    let spec = DampingSpec::parse(&args.damping)?;
    let disc = wave::discretize(args.n, args.length, &spec)?;
    let b = wave::wave_bound(&disc, args.mu)?;
    let tr = build_transform(&disc.system()?, args.mu)?;
    println!("lambda1 = {:.16e}", b.lambda1);
    println!("lambda2 = {:.16e}", b.lambda2);
    println!("lambda3 = {:.16e}", b.lambda3);
    println!("c_mu_bound = {:.16e}", b.c_mu_bound);
    println!("c_mu_bound_certified = {:.16e}", b.c_mu_bound_certified);
    println!("cond_exact = {:.16e}", tr.cond_exact);
    Ok(())
}

fn cmd_generate(args: &GenerateArgs) -> CmdResult {
    if args.dim == 0 {
        return Err(Failure::Usage("--dim must be at least 1".into()));
    }
    let sys = match args.kind {
        Kind::Random => generate::random_system(args.dim, args.seed),
        Kind::Underdamped => generate::underdamped_system(args.dim, args.seed),
        Kind::Partial => generate::partially_overdamped_system(args.dim, args.seed),
        Kind::Modal => generate::modally_damped_system(args.dim, args.seed).0,
    };
    let manifest = write_system(&sys, &args.output, &args.stem)?;
    println!("{}", manifest.display());
    Ok(())
}
