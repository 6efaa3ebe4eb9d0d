//! Batch verification driver: evaluates the hypergeometric integral,
//! runs the residual/identity suites against a JSON configuration, and
//! prints the EPD Laplace-sequence table.
//!
//! Exit codes: 0 all checks pass, 1 residual failure, 2 configuration
//! error, 3 numerical failure.

mod checks;
mod config;
mod report;

use checks::{run_all, CheckContext};
use clap::{Args, Parser, Subcommand};
use config::RunConfig;
use gelfand_toda::fields::{CRat, FieldScalar, RationalS};
use gelfand_toda::hgf::eval_phi;
use gelfand_toda::laplace::{epd_seed_operator, normal_sequence};
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_OK: u8 = 0;
const EXIT_RESIDUAL: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(
    name = "gtoda",
    about = "Verification driver for Laplace sequences, EPD seeds, and Gelfand hypergeometric tau functions of the 2D Toda-Hirota equation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonOpts {
    /// Path to the JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Override the output path prefix from the config.
    #[arg(long)]
    out: Option<String>,
    /// Comma-separated subset of checks to run (overrides the config).
    #[arg(long)]
    checks: Option<String>,
    /// Override the RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override every pass tolerance.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the hypergeometric integral for the configured cycle pair
    /// and print its value and error estimate.
    Eval {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Run the selected verification suites and write the CSV report and
    /// JSON summary.
    Verify {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Print the EPD normal-form Laplace sequence table for given
    /// parameters.
    DemoLaplace {
        /// Parameter alpha, as a fraction "p/q" or a decimal.
        #[arg(long)]
        alpha: String,
        /// Parameter beta, as a fraction "p/q" or a decimal.
        #[arg(long)]
        beta: String,
        #[arg(long, default_value_t = -3, allow_negative_numbers = true)]
        n_min: i64,
        #[arg(long, default_value_t = 3, allow_negative_numbers = true)]
        n_max: i64,
    },
}

fn load_config(common: &CommonOpts) -> Result<RunConfig, String> {
    let mut cfg = RunConfig::load(&common.config).map_err(|e| e.to_string())?;
    if let Some(out) = &common.out {
        cfg.out = out.clone();
    }
    if let Some(checks) = &common.checks {
        cfg.checks = checks.split(',').map(|s| s.trim().to_string()).collect();
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn cmd_eval(common: &CommonOpts) -> ExitCode {
    let cfg = match load_config(common) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("config error: {msg}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let alpha = cfg.alpha_weights().expect("validated");
    let x = cfg.point_config().expect("validated");
    match eval_phi(&x, &alpha, cfg.pair0(), &cfg.quad.settings(), cfg.quad.rho) {
        Ok(v) => {
            println!(
                "phi = {:.16e} + {:.16e}i",
                v.value.re, v.value.im
            );
            println!("quadrature_error <= {:.16e}", v.error);
            if v.degenerate {
                println!("warning: cycle pairing is numerically degenerate");
            }
            ExitCode::from(EXIT_OK)
        }
        Err(e) => {
            eprintln!("evaluation failed: {e}");
            ExitCode::from(EXIT_NUMERICAL)
        }
    }
}

fn cmd_verify(common: &CommonOpts) -> ExitCode {
    let cfg = match load_config(common) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("config error: {msg}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let ctx = CheckContext {
        settings: cfg.quad.settings(),
        rho: cfg.quad.rho,
        tol_override: common.tol,
        cfg,
    };
    let (rows, error) = run_all(&ctx);
    let csv_path = PathBuf::from(format!("{}.csv", ctx.cfg.out));
    let summary_path = PathBuf::from(format!("{}_summary.json", ctx.cfg.out));
    let error_text = error.as_ref().map(|e| e.to_string());
    if let Err(e) = report::write_csv(&csv_path, &rows) {
        eprintln!("cannot write report: {e}");
        return ExitCode::from(EXIT_NUMERICAL);
    }
    if let Err(e) = report::write_summary(&summary_path, &rows, error_text.as_deref()) {
        eprintln!("cannot write summary: {e}");
        return ExitCode::from(EXIT_NUMERICAL);
    }
    let passed = rows.iter().filter(|r| r.pass).count();
    println!(
        "{} rows, {} passed, {} failed -> {}",
        rows.len(),
        passed,
        rows.len() - passed,
        csv_path.display()
    );
    if let Some(msg) = &error_text {
        eprintln!("numerical failure: {msg}");
        return ExitCode::from(EXIT_NUMERICAL);
    }
    if passed == rows.len() {
        ExitCode::from(EXIT_OK)
    } else {
        ExitCode::from(EXIT_RESIDUAL)
    }
}

fn parse_rational(text: &str) -> Result<CRat, String> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let p: i64 = num.trim().parse().map_err(|_| "bad numerator".to_string())?;
        let q: i64 = den.trim().parse().map_err(|_| "bad denominator".to_string())?;
        if q == 0 {
            return Err("zero denominator".into());
        }
        Ok(CRat::from_ratio(p, q))
    } else {
        let v: f64 = text.parse().map_err(|_| "bad number".to_string())?;
        CRat::from_f64(v, 0.0).ok_or_else(|| "non-finite".to_string())
    }
}

fn format_rational_s(f: &RationalS<CRat>) -> String {
    let poly = |p: &gelfand_toda::fields::PolyS<CRat>| -> String {
        if p.is_zero() {
            return "0".to_string();
        }
        let mut parts = Vec::new();
        for (k, c) in p.coeffs().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let coeff = format!("{c}");
            match k {
                0 => parts.push(coeff),
                1 => parts.push(format!("({coeff})*s")),
                _ => parts.push(format!("({coeff})*s^{k}")),
            }
        }
        parts.join(" + ")
    };
    if f.is_zero() {
        "0".to_string()
    } else if f.den().degree() == Some(0) {
        poly(f.num())
    } else {
        format!("({}) / ({})", poly(f.num()), poly(f.den()))
    }
}

fn cmd_demo_laplace(alpha: &str, beta: &str, n_min: i64, n_max: i64) -> ExitCode {
    let (alpha, beta) = match (parse_rational(alpha), parse_rational(beta)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => {
            eprintln!("parameter error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if n_min > 0 || n_max < 0 || n_min > n_max {
        eprintln!("n range must contain 0");
        return ExitCode::from(EXIT_CONFIG);
    }
    let seed = epd_seed_operator(&alpha, &beta);
    let normal = match seed.to_normal_form() {
        Ok((m, _)) => m,
        Err(e) => {
            eprintln!("normalization failed: {e}");
            return ExitCode::from(EXIT_NUMERICAL);
        }
    };
    let seq = match normal_sequence(&normal, n_min, n_max) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("sequence construction failed: {e}");
            return ExitCode::from(EXIT_NUMERICAL);
        }
    };
    println!("EPD normal-form Laplace sequence, alpha = {alpha}, beta = {beta}");
    println!("{:>4}  {:<28} {:<32} {:<32}", "n", "a_n", "c_n", "h_n");
    for n in n_min..=n_max {
        let op = seq.get(n).unwrap();
        let inv = op.invariants().expect("field arithmetic");
        println!(
            "{:>4}  {:<28} {:<32} {:<32}",
            n,
            format_rational_s(&op.a),
            format_rational_s(&op.c),
            format_rational_s(&inv.h)
        );
    }
    ExitCode::from(EXIT_OK)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Eval { common } => cmd_eval(common),
        Command::Verify { common } => cmd_verify(common),
        Command::DemoLaplace {
            alpha,
            beta,
            n_min,
            n_max,
        } => cmd_demo_laplace(alpha, beta, *n_min, *n_max),
    }
}
