//! CSV and markdown rendering of benchmark rows.
//!
//! CSV floats are written with Rust's shortest round-trip formatting so that
//! reading a file back reproduces the rows bit for bit.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};
use crate::gmres_table::GmresRow;
use crate::spectral::SpectralRow;

#[derive(Serialize, Deserialize)]
struct SpectralRecord {
    n: usize,
    gamma: f64,
    omega: f64,
    preconditioner: String,
    seed: Option<u64>,
    rho: f64,
    lower: f64,
    upper: f64,
    converged: bool,
}

#[derive(Serialize, Deserialize)]
struct GmresRecord {
    n: usize,
    preconditioner: String,
    seed: Option<u64>,
    iterations: usize,
    cycles: usize,
    final_relative_residual: f64,
    solution_error: f64,
    converged: bool,
    wall_time: f64,
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

fn parse_precond(s: &str) -> Result<aor_precond::NamedPreconditioner> {
    s.parse().map_err(|e: aor_precond::Error| BenchError::Config(e.to_string()))
}

pub fn write_spectral_csv<W: Write>(rows: &[SpectralRow], w: W) -> Result<()> {
    let mut out = writer(w);
    for r in rows {
        out.serialize(SpectralRecord {
            n: r.n,
            gamma: r.gamma,
            omega: r.omega,
            preconditioner: r.preconditioner.to_string(),
            seed: r.seed,
            rho: r.rho,
            lower: r.lower,
            upper: r.upper,
            converged: r.converged,
        })?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_spectral_csv<R: Read>(r: R) -> Result<Vec<SpectralRow>> {
    csv::Reader::from_reader(r)
        .deserialize::<SpectralRecord>()
        .map(|rec| {
            let rec = rec?;
            Ok(SpectralRow {
                n: rec.n,
                gamma: rec.gamma,
                omega: rec.omega,
                preconditioner: parse_precond(&rec.preconditioner)?,
                seed: rec.seed,
                rho: rec.rho,
                lower: rec.lower,
                upper: rec.upper,
                converged: rec.converged,
            })
        })
        .collect()
}

pub fn write_gmres_csv<W: Write>(rows: &[GmresRow], w: W) -> Result<()> {
    let mut out = writer(w);
    for r in rows {
        out.serialize(GmresRecord {
            n: r.n,
            preconditioner: r.preconditioner.to_string(),
            seed: r.seed,
            iterations: r.iterations,
            cycles: r.cycles,
            final_relative_residual: r.final_relative_residual,
            solution_error: r.solution_error,
            converged: r.converged,
            wall_time: r.wall_time,
        })?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_gmres_csv<R: Read>(r: R) -> Result<Vec<GmresRow>> {
    csv::Reader::from_reader(r)
        .deserialize::<GmresRecord>()
        .map(|rec| {
            let rec = rec?;
            Ok(GmresRow {
                n: rec.n,
                preconditioner: parse_precond(&rec.preconditioner)?,
                seed: rec.seed,
                iterations: rec.iterations,
                cycles: rec.cycles,
                final_relative_residual: rec.final_relative_residual,
                solution_error: rec.solution_error,
                converged: rec.converged,
                wall_time: rec.wall_time,
            })
        })
        .collect()
}

/// Markdown table with one row per `(N, γ, ω)` and one column per preconditioner.
pub fn spectral_markdown(rows: &[SpectralRow]) -> String {
    let mut precs: Vec<_> = rows.iter().map(|r| r.preconditioner).collect();
    precs.sort();
    precs.dedup();
    let mut s = String::from("| N | γ | ω |");
    for p in &precs {
        s.push_str(&format!(" ρ({p}) |"));
    }
    s.push_str("\n|---|---|---|");
    s.push_str(&"---|".repeat(precs.len()));
    s.push('\n');
    let mut keys: Vec<(usize, f64, f64)> = rows.iter().map(|r| (r.n, r.gamma, r.omega)).collect();
    keys.dedup();
    for (n, g, w) in keys {
        s.push_str(&format!("| {n} | {g} | {w} |"));
        for p in &precs {
            match rows.iter().find(|r| (r.n, r.gamma, r.omega, r.preconditioner) == (n, g, w, *p)) {
                Some(r) if r.converged => s.push_str(&format!(" {:.4} |", r.rho)),
                Some(r) => s.push_str(&format!(" {:.4}? |", r.rho)),
                None => s.push_str(" - |"),
            }
        }
        s.push('\n');
    }
    s
}

/// Markdown table of restart cycles, with total inner iterations in parentheses.
pub fn gmres_markdown(rows: &[GmresRow]) -> String {
    let mut precs: Vec<_> = rows.iter().map(|r| r.preconditioner).collect();
    precs.sort();
    precs.dedup();
    let mut s = String::from("| N |");
    for p in &precs {
        s.push_str(&format!(" {p} |"));
    }
    s.push_str("\n|---|");
    s.push_str(&"---|".repeat(precs.len()));
    s.push('\n');
    let mut ns: Vec<usize> = rows.iter().map(|r| r.n).collect();
    ns.dedup();
    for n in ns {
        s.push_str(&format!("| {n} |"));
        for p in &precs {
            match rows.iter().find(|r| r.n == n && r.preconditioner == *p) {
                Some(r) => {
                    let mark = if r.converged { "" } else { "*" };
                    s.push_str(&format!(" {}{mark} ({}) |", r.cycles, r.iterations));
                }
                None => s.push_str(" - |"),
            }
        }
        s.push('\n');
    }
    s
}
