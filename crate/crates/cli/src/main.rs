//! `qe-audit` command-line front end.
//!
//! Exit codes: 0 pass, 1 certificate or sweep failure, 2 invalid input.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use qe_audit::harness::{
    equality_certificate, run_sweep, slater_row, Check, Report, SlaterRow, SweepConfig,
    EQUALITY_PETZ_LIMIT,
};
use qe_audit::matrix_file::MatrixFile;
use qe_audit::states::{equality_family, marginal, slater_pair, KrausChannel};
use qe_audit::tensor::{Block, BlockSpec};
use qe_audit::theorems::{
    data_processing_certificate, divergence_bounds_certificate, gt3_certificate,
    monotonicity_certificate, multipartite_certificate, petz_residual, proofstep_certificate,
    subadditivity_certificate, DEFAULT_TOLERANCE,
};
use qe_audit::{Certificate, DensityMatrix, TensorShape};

const MAX_SLATER_N: usize = 11;

#[derive(Parser)]
#[command(name = "qe-audit", version, about = "Numerical certificates for quantum entropy inequalities")]
struct Cli {
    /// Slack tolerance for certificate verdicts.
    #[arg(long, global = true, env = "QE_AUDIT_TOL", default_value_t = DEFAULT_TOLERANCE)]
    tol: f64,

    /// Print JSON instead of a table.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one certificate on matrix files.
    Verify {
        /// One file (subadditivity, multipartite) or two (every other check).
        #[arg(required = true, num_args = 1..=2)]
        files: Vec<PathBuf>,
        #[arg(long)]
        check: CheckArg,
    },
    /// Write the Slater pair for N particles and print its closed-form table.
    Slater {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a seeded randomized sweep.
    Sweep {
        #[arg(long, value_delimiter = ',')]
        checks: Option<Vec<CheckArg>>,
        /// Shapes such as `2x2,2x3,2x2x2`.
        #[arg(long, value_delimiter = ',')]
        dims: Option<Vec<TensorShape>>,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-6)]
        eps_mix: f64,
        /// Where to write the JSON report.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Write a generated equality-family pair `rho12.json`, `sigma12.json`.
    EqualityFamily {
        #[arg(long, value_delimiter = ',', required = true)]
        q: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        r: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        left_dims: Vec<usize>,
        #[arg(long)]
        right_dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Petz recovery residual `Tr[(T(σ₁) − σ₁₂)²]` for a pair of files.
    PetzCheck {
        rho12: PathBuf,
        sigma12: PathBuf,
        #[arg(long, default_value_t = EQUALITY_PETZ_LIMIT)]
        limit: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum CheckArg {
    Subadditivity,
    Multipartite,
    DivergenceBounds,
    Monotonicity,
    Gt3,
    Proofstep,
    DataProcessing,
    Equality,
}

impl From<CheckArg> for Check {
    fn from(c: CheckArg) -> Self {
        match c {
            CheckArg::Subadditivity => Check::Subadditivity,
            CheckArg::Multipartite => Check::Multipartite,
            CheckArg::DivergenceBounds => Check::DivergenceBounds,
            CheckArg::Monotonicity => Check::Monotonicity,
            CheckArg::Gt3 => Check::Gt3,
            CheckArg::Proofstep => Check::Proofstep,
            CheckArg::DataProcessing => Check::DataProcessing,
            CheckArg::Equality => Check::Equality,
        }
    }
}

/// Invalid input; reported with exit code 2.
struct InputError(String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

type CmdResult = Result<bool, InputError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Verify { ref files, check } => verify(files, check.into(), &cli),
        Command::Slater { n, ref out } => slater(n, out, &cli),
        Command::Sweep {
            ref checks,
            ref dims,
            trials,
            seed,
            eps_mix,
            ref report,
        } => {
            let defaults = SweepConfig::default();
            let config = SweepConfig {
                checks: checks
                    .as_ref()
                    .map_or(defaults.checks, |c| c.iter().map(|&c| c.into()).collect()),
                dims: dims.clone().unwrap_or(defaults.dims),
                trials,
                seed,
                eps_mix,
                tolerance: cli.tol,
            };
            sweep(&config, report.as_deref(), &cli)
        }
        Command::EqualityFamily {
            ref q,
            ref r,
            ref left_dims,
            right_dim,
            seed,
            ref out,
        } => generate_equality(q, r, left_dims, right_dim, seed, out, &cli),
        Command::PetzCheck {
            ref rho12,
            ref sigma12,
            limit,
        } => petz_check(rho12, sigma12, limit, &cli),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(InputError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn load_state(path: &Path) -> Result<(DensityMatrix, TensorShape), InputError> {
    let file = MatrixFile::read(path)?;
    let rho = file
        .density()
        .map_err(|e| InputError(format!("{}: {e}", path.display())))?;
    Ok((rho, file.shape))
}

fn bipartite_cut(shape: &TensorShape) -> Result<TensorShape, InputError> {
    if shape.len() < 2 {
        return Err(InputError(format!("{shape} has fewer than two subsystems")));
    }
    Ok(shape.first_cut()?)
}

fn second(files: &[PathBuf], check: Check) -> Result<&Path, InputError> {
    files
        .get(1)
        .map(PathBuf::as_path)
        .ok_or_else(|| InputError(format!("check {check} needs two matrix files")))
}

fn same_shape(a: &TensorShape, b: &TensorShape) -> Result<(), InputError> {
    if a != b {
        return Err(InputError(format!("shape mismatch: {a} vs {b}")));
    }
    Ok(())
}

fn verify(files: &[PathBuf], check: Check, cli: &Cli) -> CmdResult {
    let tol = cli.tol;
    let cert = match check {
        Check::Proofstep => {
            let h = MatrixFile::read(&files[0])?.hermitian()?;
            let a = MatrixFile::read(second(files, check)?)?.hermitian()?;
            proofstep_certificate(&h, &a, tol)?
        }
        Check::Subadditivity | Check::Multipartite => {
            let (rho, shape) = load_state(&files[0])?;
            if check == Check::Subadditivity {
                subadditivity_certificate(&rho, &bipartite_cut(&shape)?, tol)?
            } else {
                multipartite_certificate(&rho, &shape, tol)?
            }
        }
        _ => {
            let (rho, shape) = load_state(&files[0])?;
            let (sigma, sigma_shape) = load_state(second(files, check)?)?;
            same_shape(&shape, &sigma_shape)?;
            pair_certificate(check, &rho, &sigma, &shape, tol)?
        }
    };
    print_certificate(&cert, cli.json);
    Ok(cert.passed())
}

fn pair_certificate(
    check: Check,
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    shape: &TensorShape,
    tol: f64,
) -> Result<Certificate, InputError> {
    let cert = match check {
        Check::DivergenceBounds => divergence_bounds_certificate(rho, sigma, tol)?,
        Check::Monotonicity => monotonicity_certificate(rho, sigma, &bipartite_cut(shape)?, tol)?,
        Check::Equality => equality_certificate(rho, sigma, &bipartite_cut(shape)?, tol)?,
        Check::Gt3 => {
            let cut = bipartite_cut(shape)?;
            let rho1 = marginal(rho, &cut, &[0])?;
            let sigma1 = marginal(sigma, &cut, &[0])?;
            gt3_certificate(&rho1, &sigma1, sigma, &cut, tol)?
        }
        Check::DataProcessing => {
            let channel = KrausChannel::partial_trace(&bipartite_cut(shape)?, &[0])?;
            data_processing_certificate(rho, sigma, &channel, tol)?
        }
        Check::Subadditivity | Check::Multipartite | Check::Proofstep => {
            unreachable!("single-input checks are handled by verify")
        }
    };
    Ok(cert)
}

fn print_certificate(cert: &Certificate, as_json: bool) {
    if as_json {
        println!("{}", serde_json::to_string_pretty(cert).expect("certificate serializes"));
        return;
    }
    println!("certificate {}  lhs = {}  verdict = {:?}", cert.name, cert.lhs, cert.verdict);
    println!("{:<22} {:>22} {:>22} {:>12}", "bound", "lower", "upper", "slack");
    for b in &cert.bounds {
        println!("{:<22} {:>22.15} {:>22.15} {:>12.3e}", b.label, b.lower, b.upper, b.slack);
    }
    for r in &cert.residuals {
        let limit = r.limit.map_or("diagnostic".to_string(), |l| format!("limit {l:.0e}"));
        println!("residual {:<13} {:>22.3e}  {limit}", r.label, r.value);
    }
    for note in &cert.notes {
        println!("note: {note}");
    }
}

fn slater(n: usize, out: &Path, cli: &Cli) -> CmdResult {
    if !(2..=MAX_SLATER_N).contains(&n) {
        return Err(InputError(format!(
            "N must lie in 2..={MAX_SLATER_N} (dimension N² is capped at 128), got {n}"
        )));
    }
    let pair = slater_pair(n)?;
    let row = slater_row(n)?;
    fs::create_dir_all(out)?;
    let rho_path = out.join("rho.json");
    let sigma_path = out.join("sigma.json");
    MatrixFile::from_density(&pair.rho, &pair.shape)?.write(&rho_path)?;
    MatrixFile::from_density(&pair.sigma, &pair.shape)?.write(&sigma_path)?;
    if cli.json {
        let doc = json!({ "row": row, "rho": rho_path, "sigma": sigma_path });
        println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
    } else {
        print_slater(&row);
        println!("wrote {} and {}", rho_path.display(), sigma_path.display());
    }
    Ok(true)
}

fn print_slater(row: &SlaterRow) {
    println!("N = {}", row.n);
    println!("  D(rho||sigma)        {:.15}  (closed form error {:.1e})", row.divergence, row.divergence_error);
    println!("  Tr|rho - sigma|      {:.15}  (closed form error {:.1e})", row.trace_norm, row.trace_norm_error);
    println!("  Tr sqrt(rho)sqrt(sigma) {:.15}", row.overlap);
    println!("  renyi bound          {:.15}  (slack {:.1e})", row.renyi, row.renyi_slack);
    println!("  pinsker bound        {:.15}", row.pinsker);
    println!("  hs bound             {:.15}", row.hs);
}

fn write_atomic(path: &Path, contents: &str) -> Result<(), InputError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.persist(path).map_err(|e| InputError(e.to_string()))?;
    Ok(())
}

fn sweep(config: &SweepConfig, report_path: Option<&Path>, cli: &Cli) -> CmdResult {
    let report = run_sweep(config)?;
    let text = report.to_json();
    if let Some(path) = report_path {
        write_atomic(path, &text)?;
    }
    if cli.json {
        println!("{text}");
    } else {
        print_sweep(&report);
    }
    Ok(report.passed())
}

fn print_sweep(report: &Report) {
    println!(
        "{:<18} {:<8} {:>6} {:>6} {:>6} {:>12} {:>11} {:>20}",
        "check", "shape", "count", "fail", "error", "min slack", "max resid", "worst seed"
    );
    for row in &report.checks {
        let seed = row.worst_seed.map_or("-".into(), |s| s.to_string());
        println!(
            "{:<18} {:<8} {:>6} {:>6} {:>6} {:>12.3e} {:>11.2e} {:>20}",
            row.check.name(),
            row.shape.to_string(),
            row.count,
            row.failures,
            row.errors,
            row.min_slack,
            row.max_residual,
            seed
        );
    }
    for row in report.checks.iter().filter(|r| r.failures > 0) {
        println!("FAIL {} on {}: trial seeds {:?}", row.check, row.shape, row.failing_seeds);
    }
    for row in report.checks.iter().filter(|r| r.errors > 0) {
        println!("errors in {} on {}: {}", row.check, row.shape, row.error_samples.join("; "));
    }
    println!(
        "{} trials, {} failures, {} errors in {:.2}s",
        report.total_count,
        report.total_failures,
        report.total_errors,
        report.wall_time.as_secs_f64()
    );
}

fn generate_equality(
    q: &[f64],
    r: &[f64],
    left_dims: &[usize],
    right_dim: usize,
    seed: u64,
    out: &Path,
    cli: &Cli,
) -> CmdResult {
    if q.len() != r.len() || q.len() != left_dims.len() {
        return Err(InputError(format!(
            "--q, --r and --left-dims need equal lengths, got {}, {}, {}",
            q.len(),
            r.len(),
            left_dims.len()
        )));
    }
    let blocks = (0..q.len())
        .map(|j| Block {
            weight_q: q[j],
            weight_r: r[j],
            left_dim: left_dims[j],
            right_dim,
        })
        .collect();
    let family = equality_family(&BlockSpec::new(blocks)?, seed)?;
    fs::create_dir_all(out)?;
    let rho_path = out.join("rho12.json");
    let sigma_path = out.join("sigma12.json");
    MatrixFile::from_density(&family.rho12, &family.shape)?.write(&rho_path)?;
    MatrixFile::from_density(&family.sigma12, &family.shape)?.write(&sigma_path)?;
    if cli.json {
        let doc = json!({
            "shape": family.shape,
            "log_residual": family.log_residual,
            "rho12": rho_path,
            "sigma12": sigma_path,
        });
        println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
    } else {
        println!("shape {}  log-ratio residual {:.3e}", family.shape, family.log_residual);
        println!("wrote {} and {}", rho_path.display(), sigma_path.display());
    }
    Ok(true)
}

fn petz_check(rho_path: &Path, sigma_path: &Path, limit: f64, cli: &Cli) -> CmdResult {
    let (rho, shape) = load_state(rho_path)?;
    let (sigma, sigma_shape) = load_state(sigma_path)?;
    same_shape(&shape, &sigma_shape)?;
    let residual = petz_residual(&rho, &sigma, &bipartite_cut(&shape)?)?;
    let pass = residual <= limit;
    if cli.json {
        let doc = json!({
            "residual": residual,
            "limit": limit,
            "verdict": if pass { "pass" } else { "fail" },
        });
        println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
    } else {
        println!(
            "petz residual {residual:.3e} (limit {limit:.0e}): {}",
            if pass { "pass" } else { "fail" }
        );
    }
    Ok(pass)
}
