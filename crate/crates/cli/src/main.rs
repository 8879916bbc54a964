//! `spop`: solve sparse polynomial optimization problems from the command line.
//!
//! Exit codes: 0 tight and certified, 1 bound only (or a rejected
//! certificate), 2 infeasibility certified, 3 error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use spop::certify::InfeasibilityOutcome;
use spop::frontend::{
    psd_cap_from_env, run_compare, run_solve, CertificateFile, Generator, GeneratorKind, ProblemFile, Report,
    SolveConfig,
};
use spop::relax::min_order;
use spop::sparsity::check_rip;
use spop::{Model, SparsePop};

#[derive(Parser)]
#[command(
    name = "spop",
    version,
    about = "Sparse Moment-SOS relaxations for polynomial optimization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    SparsePutinar,
    SparseSchmudgen,
    DensePutinar,
    DenseSchmudgen,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::SparsePutinar => Model::SparsePutinar,
            ModelArg::SparseSchmudgen => Model::SparseSchmudgen,
            ModelArg::DensePutinar => Model::DensePutinar,
            ModelArg::DenseSchmudgen => Model::DenseSchmudgen,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Qcqp,
    Quartic,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem file (`.spop.json`).
    Solve {
        file: PathBuf,
        /// Relaxation order; defaults to the minimal one.
        #[arg(long)]
        order: Option<u32>,
        #[arg(long, value_enum, default_value = "sparse-putinar")]
        model: ModelArg,
        /// Interior-point tolerance.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Run flat truncation, atom extraction and stitching.
        #[arg(long)]
        extract: bool,
        /// Build and verify a certificate.
        #[arg(long)]
        certify: bool,
        /// Emit an ε-certificate with this slack.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Allow an order below the minimal one by dropping high-degree constraints.
        #[arg(long)]
        force: bool,
        /// Write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the full certificate here.
        #[arg(long)]
        cert_out: Option<PathBuf>,
    },
    /// Check the running intersection property of a problem's blocks.
    Rip { file: PathBuf },
    /// Solve a generated instance, optionally against the dense model.
    Bench {
        family: Family,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        w: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        order: Option<u32>,
        #[arg(long)]
        compare_dense: bool,
        /// Write the instance as a problem file.
        #[arg(long)]
        emit: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-verify a certificate against a problem file.
    Verify {
        certificate: PathBuf,
        file: PathBuf,
        #[arg(long, default_value_t = spop::certify::DEFAULT_CERT_TOL)]
        tol: f64,
    },
}

fn load(path: &Path) -> Result<SparsePop> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file = ProblemFile::parse(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(file
        .to_pop()
        .with_context(|| format!("validating {}", path.display()))?)
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn fmt_point(p: &[f64]) -> String {
    let v: Vec<String> = p.iter().map(|x| format!("{x:.6}")).collect();
    format!("({})", v.join(", "))
}

fn print_report(r: &Report) {
    match r.bound {
        Some(b) => println!("bound: {b:.8}  status: {:?}  iterations: {}", r.status, r.iterations),
        None => println!("bound: none  status: {:?}", r.status),
    }
    println!(
        "sdp: {} variables, {} psd blocks, largest side {}",
        r.size.variables, r.size.psd_blocks, r.size.max_side
    );
    println!("rip: {}", r.rip.holds);
    if let Some(f) = &r.flat {
        for b in &f.blocks {
            match (b.flat_at, b.rank) {
                (Some(t), Some(rank)) => println!("block {}: flat at t = {t}, rank {rank}", b.block + 1),
                _ => println!("block {}: not flat", b.block + 1),
            }
        }
    }
    if let Some(s) = &r.stitch {
        println!("stitch: {}", serde_json::to_string(&s.status).unwrap_or_default());
    }
    for c in &r.candidates {
        println!(
            "candidate {} [{:?}]: {}",
            fmt_point(&c.point),
            c.route,
            serde_json::to_string(&c.verdict).unwrap_or_default()
        );
    }
    if let Some(c) = &r.certificate {
        let label = if c.epsilon.is_some() {
            "epsilon-certificate"
        } else {
            "certificate"
        };
        println!(
            "{label}: {} (identity residual {:.2e}, tolerance {:.0e})",
            if c.passed { "verified" } else { "rejected" },
            c.identity_residual,
            c.tolerance
        );
    }
    if let Some(inf) = &r.infeasibility {
        let what = match inf {
            InfeasibilityOutcome::Found { certificate } => {
                format!("certified (identity residual {:.2e})", certificate.identity_residual)
            }
            InfeasibilityOutcome::NotFound => "no certificate at this order".into(),
            InfeasibilityOutcome::Indeterminate { status } => format!("indeterminate ({status:?})"),
        };
        println!("infeasibility: {what}");
    }
    for w in &r.warnings {
        eprintln!("warning: {w}");
    }
    println!(
        "outcome: {}",
        serde_json::to_string(&r.outcome).unwrap_or_default().trim_matches('"')
    );
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Solve {
            file,
            order,
            model,
            tol,
            extract,
            certify,
            epsilon,
            force,
            out,
            cert_out,
        } => {
            let pop = load(&file)?;
            let k = order.unwrap_or_else(|| min_order(&pop).k0);
            let mut cfg = SolveConfig::new(model.into(), k);
            cfg.tol = tol;
            cfg.extract = extract;
            cfg.certify = certify;
            cfg.epsilon = epsilon;
            cfg.force = force;
            cfg.dense_cap = psd_cap_from_env();
            let report = run_solve(&pop, &cfg, None)?;
            print_report(&report);
            if let Some(path) = out {
                write(&path, &report.to_json())?;
            }
            if let Some(path) = cert_out {
                match report.certificate_file() {
                    Some(c) => write(&path, &c.to_json())?,
                    None => eprintln!("warning: no certificate to write"),
                }
            }
            Ok(report.outcome.exit_code() as u8)
        }
        Command::Rip { file } => {
            let pop = load(&file)?;
            let rip = check_rip(pop.pattern());
            println!("{}", serde_json::to_string_pretty(&rip)?);
            println!("rip: {}", rip.holds);
            Ok(0)
        }
        Command::Bench {
            family,
            n,
            w,
            seed,
            order,
            compare_dense,
            emit,
            out,
        } => {
            let kind = match family {
                Family::Qcqp => GeneratorKind::Qcqp,
                Family::Quartic => GeneratorKind::Quartic,
            };
            let g = Generator { kind, n, w, seed };
            let pop = g.build()?;
            if let Some(path) = emit {
                write(&path, &ProblemFile::from_pop(&pop).to_json())?;
            }
            let k = order.unwrap_or_else(|| min_order(&pop).k0);
            // both families are convex, so sparse and dense bounds should agree
            let row = run_compare(&pop, k, psd_cap_from_env(), compare_dense, true, Some(g))?;
            let json = serde_json::to_string_pretty(&row)?;
            println!("{json}");
            if let Some(path) = out {
                write(&path, &json)?;
            }
            Ok(0)
        }
        Command::Verify { certificate, file, tol } => {
            let pop = load(&file)?;
            let text =
                fs::read_to_string(&certificate).with_context(|| format!("reading {}", certificate.display()))?;
            let cert = CertificateFile::parse(&text)?;
            let rep = cert.verify(&pop, tol);
            println!("{}", serde_json::to_string_pretty(&rep)?);
            println!("verified: {}", rep.passed);
            Ok(if rep.passed { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    env_logger::init();
    // clap exits with 2 on usage errors, which would read as an infeasibility certificate
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
