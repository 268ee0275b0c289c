use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use torusflow::analysis::{fit_csv, linear_table, write_linear_csv};
use torusflow::check::check_suite;
use torusflow::checkpoint::write_atomic;
use torusflow::presets::{preset, PRESET_NAMES};
use torusflow::sweep::sweep;
use torusflow::{run_scenario, HarnessError, Result, RunConfig};

#[derive(Parser)]
#[command(
    name = "torusflow",
    version,
    about = "Decay experiments for periodic compressible and incompressible flows"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in scenario name.
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one scenario and write series.csv, final.ckpt and manifest.json.
    Run {
        #[command(flatten)]
        source: Source,
        /// Output directory; defaults to `out` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a compressible template at several viscosities in parallel.
    Sweep {
        #[command(flatten)]
        source: Source,
        /// Comma-separated list of ν values.
        #[arg(long, value_delimiter = ',', required = true)]
        nu: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Tabulate the linearized eigenvalues.
    Linear {
        #[arg(long)]
        nu: f64,
        #[arg(long)]
        kmax: i64,
        #[arg(long)]
        pprime: f64,
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate the inequality catalog and identity residuals on random corpora.
    Check {
        #[arg(long)]
        corpus_size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Optional JSON report path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Log-linear decay fit of one column of a saved series.
    Fit {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        column: String,
        /// `a,b`; defaults to the last two thirds of the samples.
        #[arg(long, value_parser = parse_window)]
        window: Option<(f64, f64)>,
    },
    /// Print a preset as TOML, or list the presets.
    Preset { name: Option<String> },
}

fn parse_window(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected a,b")?;
    let a: f64 = a.trim().parse().map_err(|e| format!("{a}: {e}"))?;
    let b: f64 = b.trim().parse().map_err(|e| format!("{b}: {e}"))?;
    if a < b {
        Ok((a, b))
    } else {
        Err(format!("empty window [{a}, {b}]"))
    }
}

fn load(source: &Source) -> Result<RunConfig> {
    match (&source.config, &source.preset) {
        (Some(path), _) => RunConfig::load(path),
        (None, Some(name)) => preset(name).ok_or_else(|| {
            HarnessError::Config(format!(
                "unknown preset {name}; available: {}",
                PRESET_NAMES.join(", ")
            ))
        }),
        (None, None) => Err(HarnessError::Config("give --config or --preset".into())),
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn failed_checks(checks: &std::collections::BTreeMap<String, bool>) -> String {
    checks
        .iter()
        .filter(|(_, ok)| !**ok)
        .map(|(k, _)| k.as_str())
        .collect::<Vec<_>>()
        .join(", ")
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { source, out } => {
            let cfg = load(&source)?;
            let out = out.or_else(|| cfg.out.clone());
            let result = run_scenario(&cfg, out.as_deref())?;
            let m = &result.manifest;
            println!(
                "steps {} samples {} wall {:.2}s",
                m.steps, m.samples, m.wall_clock_seconds
            );
            for (name, ok) in &m.checks {
                println!("{:<24} {}", name, if *ok { "pass" } else { "FAIL" });
            }
            if let Some(dir) = &out {
                println!("output in {}", dir.display());
            }
            if !m.passed {
                return Err(HarnessError::Assertion(format!(
                    "run checks failed: {}",
                    failed_checks(&m.checks)
                )));
            }
        }
        Command::Sweep { source, nu, out } => {
            let cfg = load(&source)?;
            let report = sweep(&cfg, &nu, Some(&out))?;
            println!(
                "{:>8} {:>12} {:>12} {:>12} {:>12}",
                "nu", "shape", "rate(P~)", "rate(dPu)", "rate(G~)"
            );
            for r in &report.rows {
                println!(
                    "{:>8} {:>12.5} {:>12.5} {:>12.5} {:>12}",
                    r.nu,
                    r.alpha0_shape.unwrap_or(f64::NAN),
                    r.rate_ptilde,
                    r.rate_grad_pu,
                    r.rate_gtilde.map_or("-".into(), |g| format!("{g:.5}")),
                );
            }
            println!("slope rate(P~) vs nu: {:.4}", report.slope_ptilde);
            println!("spread of rate(dPu): {:.4}", report.spread_grad_pu);
            if !report.passed {
                return Err(HarnessError::Assertion(
                    "sweep scaling checks failed".into(),
                ));
            }
        }
        Command::Linear {
            nu,
            kmax,
            pprime,
            mu,
            out,
        } => {
            let (modes, summary) = linear_table(nu, mu, pprime, kmax)?;
            write_linear_csv(&out, &modes)?;
            print_json(&summary)?;
        }
        Command::Check {
            corpus_size,
            seed,
            out,
        } => {
            let report = check_suite(corpus_size, seed)?;
            if let Some(path) = out {
                write_atomic(&path, &serde_json::to_vec_pretty(&report)?)?;
            }
            for rep in &report.inequalities {
                println!(
                    "{:<28} trials {:>6} violations {:>4} worst ratio {:.6}",
                    rep.id.name(),
                    rep.trials,
                    rep.violations,
                    rep.worst_ratio
                );
            }
            for f in &report.hard_failures {
                println!("FAIL {f}");
            }
            if !report.passed() {
                return Err(HarnessError::Assertion(format!(
                    "{} hard violations",
                    report.hard_failures.len()
                )));
            }
        }
        Command::Fit {
            csv,
            column,
            window,
        } => {
            let fit = fit_csv(Path::new(&csv), &column, window)?;
            print_json(&fit)?;
        }
        Command::Preset { name: None } => {
            for n in PRESET_NAMES {
                println!("{n}");
            }
        }
        Command::Preset { name: Some(name) } => {
            let cfg = preset(&name)
                .ok_or_else(|| HarnessError::Config(format!("unknown preset {name}")))?;
            print!("{}", cfg.to_toml_string());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
