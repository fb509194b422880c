//! Benchmark configuration and the list syntaxes accepted on the command line.

use std::path::PathBuf;

use aor_precond::{AorParams, Example, NamedPreconditioner};

use crate::error::{BenchError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableKind {
    Spectral,
    Gmres,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Markdown,
}

impl std::str::FromStr for OutputFormat {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "markdown" | "md" => Ok(OutputFormat::Markdown),
            other => Err(BenchError::Config(format!("unknown output format {other:?}"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub example: Example,
    pub table: TableKind,
    pub n_values: Vec<usize>,
    pub param_pairs: Vec<AorParams>,
    pub preconditioners: Vec<NamedPreconditioner>,
    pub seed: u64,
    pub restart_m: usize,
    pub tol: f64,
    /// Collatz–Wielandt bracket width for spectral rows.
    pub spectral_tol: f64,
    pub output_format: OutputFormat,
    /// `None` writes to standard output.
    pub output_path: Option<PathBuf>,
}

impl BenchConfig {
    pub fn spectral(example: Example, n_values: Vec<usize>, param_pairs: Vec<AorParams>) -> Self {
        BenchConfig {
            example,
            table: TableKind::Spectral,
            n_values,
            param_pairs,
            preconditioners: NamedPreconditioner::ALL.to_vec(),
            seed: 42,
            restart_m: 10,
            tol: 1e-10,
            spectral_tol: aor_precond::aor::DEFAULT_SPECTRAL_TOL,
            output_format: OutputFormat::Csv,
            output_path: None,
        }
    }

    pub fn gmres(example: Example, n_values: Vec<usize>) -> Self {
        BenchConfig { table: TableKind::Gmres, ..BenchConfig::spectral(example, n_values, Vec::new()) }
    }

    pub fn with_preconditioners(mut self, p: Vec<NamedPreconditioner>) -> Self {
        self.preconditioners = p;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_values.is_empty() {
            return Err(BenchError::Config("no grid sizes given".into()));
        }
        if let Some(n) = self.n_values.iter().find(|&&n| n < 2) {
            return Err(BenchError::Config(format!("grid size must be >= 2, got {n}")));
        }
        if self.preconditioners.is_empty() {
            return Err(BenchError::Config("no preconditioners given".into()));
        }
        if self.table == TableKind::Spectral && self.param_pairs.is_empty() {
            return Err(BenchError::Config("spectral tables need at least one (gamma, omega) pair".into()));
        }
        if !(self.tol > 0.0) || !(self.spectral_tol > 0.0) {
            return Err(BenchError::Config("tolerances must be positive".into()));
        }
        if self.restart_m == 0 {
            return Err(BenchError::Config("restart length must be >= 1".into()));
        }
        Ok(())
    }
}

fn items(s: &str) -> impl Iterator<Item = &str> {
    s.split(',').map(str::trim).filter(|t| !t.is_empty())
}

/// `"5,10"` → `[5, 10]`.
pub fn parse_counts(s: &str) -> Result<Vec<usize>> {
    let v = items(s)
        .map(|t| t.parse::<usize>().map_err(|e| BenchError::Config(format!("bad count {t:?}: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    if v.is_empty() {
        return Err(BenchError::Config("empty list".into()));
    }
    Ok(v)
}

/// `"0.7:0.8,0.8:1"` → `[(0.7, 0.8), (0.8, 1.0)]` as validated AOR pairs.
pub fn parse_param_pairs(s: &str) -> Result<Vec<AorParams>> {
    let v = items(s)
        .map(|t| {
            let (g, w) = t
                .split_once(':')
                .ok_or_else(|| BenchError::Config(format!("expected gamma:omega, got {t:?}")))?;
            let num = |x: &str| {
                x.trim().parse::<f64>().map_err(|e| BenchError::Config(format!("bad number {x:?}: {e}")))
            };
            Ok(AorParams::new(num(g)?, num(w)?)?)
        })
        .collect::<Result<Vec<_>>>()?;
    if v.is_empty() {
        return Err(BenchError::Config("empty list".into()));
    }
    Ok(v)
}

/// `"P0,P4"` → `[P0, P4]`.
pub fn parse_preconditioners(s: &str) -> Result<Vec<NamedPreconditioner>> {
    let v = items(s).map(|t| Ok(t.parse::<NamedPreconditioner>()?)).collect::<Result<Vec<_>>>()?;
    if v.is_empty() {
        return Err(BenchError::Config("empty list".into()));
    }
    Ok(v)
}
