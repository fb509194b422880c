use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use precond_bench::config::{parse_counts, parse_param_pairs, parse_preconditioners};
use precond_bench::gmres_table::ordering_drift;
use precond_bench::output::{gmres_markdown, spectral_markdown, write_gmres_csv, write_spectral_csv};
use precond_bench::{
    run_gmres_table, run_property_suite, run_spectral_table, BenchConfig, BenchError, OutputFormat, Result,
};
use aor_precond::mtx::write_matrix_market;
use aor_precond::{Example, NamedPreconditioner};

const EXIT_DRIFT: u8 = 1;
const EXIT_VIOLATION: u8 = 2;
const EXIT_CONFIG: u8 = 3;

#[derive(Parser)]
#[command(name = "bench", version, about = "Preconditioned AOR tables and comparison checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spectral radii of preconditioned AOR iteration matrices.
    Spectral {
        #[command(flatten)]
        common: Common,
        /// Comma-separated gamma:omega pairs.
        #[arg(long, default_value = "0.7:0.8,0.8:1,0.9:0.9")]
        params: String,
        /// Bracket width for the spectral radius.
        #[arg(long, default_value_t = aor_precond::aor::DEFAULT_SPECTRAL_TOL)]
        spectral_tol: f64,
    },
    /// Restarted GMRES counts on the model problems.
    Gmres {
        #[command(flatten)]
        common: Common,
        /// Restart length m.
        #[arg(long, default_value_t = 10)]
        restart: usize,
        /// Relative residual tolerance.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Randomized checks of the comparison results.
    Verify {
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Directory for Matrix Market dumps of violating matrices.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// Model problem: 1 or 2.
    #[arg(long, default_value = "1")]
    example: String,
    /// Comma-separated grid sizes.
    #[arg(long = "N", default_value = "5,10")]
    n_values: String,
    /// Comma-separated preconditioners (P0..P4).
    #[arg(long, default_value = "P0,P1,P2,P3,P4")]
    precond: String,
    /// Seed for the random preconditioner P3.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// csv or markdown.
    #[arg(long, default_value = "csv")]
    format: String,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn apply(&self, mut cfg: BenchConfig) -> Result<BenchConfig> {
        cfg.preconditioners = parse_preconditioners(&self.precond)?;
        cfg.seed = self.seed;
        cfg.output_format = self.format.parse()?;
        cfg.output_path = self.out.clone();
        Ok(cfg)
    }

    fn example(&self) -> Result<Example> {
        self.example.parse().map_err(|e: aor_precond::Error| BenchError::Config(e.to_string()))
    }
}

fn sink(cfg: &BenchConfig) -> Result<Box<dyn Write>> {
    Ok(match &cfg.output_path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Spectral { common, params, spectral_tol } => {
            let mut cfg = common.apply(BenchConfig::spectral(
                common.example()?,
                parse_counts(&common.n_values)?,
                parse_param_pairs(&params)?,
            ))?;
            cfg.spectral_tol = spectral_tol;
            let rows = run_spectral_table(&cfg)?;
            let mut out = sink(&cfg)?;
            match cfg.output_format {
                OutputFormat::Csv => write_spectral_csv(&rows, &mut out)?,
                OutputFormat::Markdown => out.write_all(spectral_markdown(&rows).as_bytes())?,
            }
            out.flush()?;
            let mut code = 0;
            for r in rows.iter().filter(|r| !r.converged) {
                eprintln!("warning: N={} {} bracket [{}, {}] not converged", r.n, r.preconditioner, r.lower, r.upper);
                code = EXIT_DRIFT;
            }
            for r in rows.iter().filter(|r| r.preconditioner != NamedPreconditioner::P0) {
                let base = rows.iter().find(|b| {
                    b.preconditioner == NamedPreconditioner::P0 && (b.n, b.gamma, b.omega) == (r.n, r.gamma, r.omega)
                });
                if let Some(b) = base {
                    if r.rho > b.rho + 1e-8 {
                        eprintln!("warning: N={} {} ρ={} exceeds P0 ρ={}", r.n, r.preconditioner, r.rho, b.rho);
                        code = EXIT_DRIFT;
                    }
                }
            }
            Ok(code)
        }
        Command::Gmres { common, restart, tol } => {
            let mut cfg =
                common.apply(BenchConfig::gmres(common.example()?, parse_counts(&common.n_values)?))?;
            cfg.restart_m = restart;
            cfg.tol = tol;
            let rows = run_gmres_table(&cfg)?;
            let mut out = sink(&cfg)?;
            match cfg.output_format {
                OutputFormat::Csv => write_gmres_csv(&rows, &mut out)?,
                OutputFormat::Markdown => out.write_all(gmres_markdown(&rows).as_bytes())?,
            }
            out.flush()?;
            let mut code = 0;
            for r in rows.iter().filter(|r| !r.converged) {
                eprintln!("warning: N={} {} did not converge (residual {:e})", r.n, r.preconditioner, r.final_relative_residual);
                code = EXIT_DRIFT;
            }
            for msg in ordering_drift(&rows) {
                eprintln!("warning: {msg}");
                code = EXIT_DRIFT;
            }
            Ok(code)
        }
        Command::Verify { trials, seed, dump } => {
            let report = run_property_suite(seed, trials)?;
            let mut out = io::stdout().lock();
            writeln!(out, "seed {seed}, {trials} trials")?;
            for s in report.summaries() {
                writeln!(
                    out,
                    "{:<26} {} trials, {}/{} checks passed, worst margin {:+.3e}",
                    s.name, s.trials, s.passes, s.checks, s.worst_margin
                )?;
                for v in &s.violations {
                    writeln!(out, "  violation: trial {} seed {}: {}", v.trial, v.seed, v.detail)?;
                }
            }
            writeln!(out, "unit-alpha condition satisfied in {:.1}% of trials", 100.0 * report.condition_fraction)?;
            if let Some(dir) = dump {
                fs::create_dir_all(&dir)?;
                for s in report.summaries() {
                    for v in &s.violations {
                        let name = format!("{}-trial{}.mtx", s.name.replace(' ', "_"), v.trial);
                        write_matrix_market(&v.matrix, BufWriter::new(File::create(dir.join(name))?))?;
                    }
                }
            }
            Ok(if report.passed() { 0 } else { EXIT_VIOLATION })
        }
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
fn main_with<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { 0 };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                BenchError::Config(_)
                | BenchError::Core(aor_precond::Error::Parameter(_) | aor_precond::Error::Dimension(_)) => EXIT_CONFIG,
                // numerical or I/O failures are treated as hard failures
                _ => EXIT_VIOLATION,
            }
        }
    }
}

fn main() -> ExitCode {
    ExitCode::from(main_with(std::env::args_os()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use precond_bench::output::{read_gmres_csv, read_spectral_csv};

    fn bench(args: &[&str]) -> u8 {
        main_with(std::iter::once("bench").chain(args.iter().copied()))
    }

    #[test]
    fn spectral_csv_file() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("t1.csv");
        let code = bench(&[
            "spectral", "--example", "1", "--N", "5", "--params", "0.7:0.8", "--precond", "P0,P4",
            "--out", out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        let rows = read_spectral_csv(File::open(&out).unwrap()).unwrap();
        assert_eq!(rows.len(), 2);
        assert!((rows[0].rho - 0.8317).abs() < 5e-5 && (rows[1].rho - 0.6323).abs() < 5e-5, "{rows:?}");
    }

    #[test]
    fn gmres_markdown_file() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("t4.md");
        let code = bench(&["gmres", "--example", "2", "--N", "6", "--format", "md", "--out", out.to_str().unwrap()]);
        assert_eq!(code, 0);
        let text = fs::read_to_string(&out).unwrap();
        assert!(text.starts_with("| N | P0 | P1 | P2 | P3 | P4 |"), "{text}");
        assert_eq!(text.lines().count(), 3);
    }

    #[test]
    fn gmres_csv_reports_cycles() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("t2.csv");
        let code = bench(&["gmres", "--N", "8", "--precond", "P4", "--restart", "5", "--out", out.to_str().unwrap()]);
        assert_eq!(code, 0);
        let rows = read_gmres_csv(File::open(&out).unwrap()).unwrap();
        assert_eq!(rows[0].cycles, rows[0].iterations.div_ceil(5));
        assert!(rows[0].converged && rows[0].solution_error < 1e-6);
    }

    #[test]
    fn non_convergence_is_soft_drift() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("slow.csv");
        let code = bench(&[
            "spectral", "--N", "5", "--params", "0.7:0.8", "--spectral-tol", "1e-300", "--precond", "P0",
            "--out", out.to_str().unwrap(),
        ]);
        assert_eq!(code, EXIT_DRIFT);
    }

    #[test]
    fn verify_passes() {
        assert_eq!(bench(&["verify", "--trials", "4", "--seed", "3"]), 0);
    }

    #[test]
    fn configuration_errors() {
        assert_eq!(bench(&["spectral", "--example", "3"]), EXIT_CONFIG);
        assert_eq!(bench(&["spectral", "--params", "0.9:0.8"]), EXIT_CONFIG);
        assert_eq!(bench(&["gmres", "--N", "1"]), EXIT_CONFIG);
        assert_eq!(bench(&["gmres", "--precond", "P7"]), EXIT_CONFIG);
        assert_eq!(bench(&["gmres", "--restart", "0"]), EXIT_CONFIG);
        assert_eq!(bench(&["gmres", "--format", "xml"]), EXIT_CONFIG);
        assert_eq!(bench(&["verify", "--trials", "0"]), EXIT_CONFIG);
        assert_eq!(bench(&["frobnicate"]), EXIT_CONFIG);
        assert_eq!(bench(&["--help"]), 0);
    }
}
