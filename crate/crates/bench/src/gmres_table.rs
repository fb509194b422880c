//! GMRES(m) iteration counts for preconditioned model problems.

use std::time::Instant;

use rayon::prelude::*;

use aor_precond::problems::stencil_operator;
use aor_precond::{gmres_restarted, LinearOperator, NamedPreconditioner, SolveReport};

use crate::config::{BenchConfig, TableKind};
use crate::error::{BenchError, Result};

/// Inner-iteration cap per solve, as a multiple of the system size.
pub const ITERATION_CAP_PER_UNKNOWN: usize = 50;

#[derive(Clone, Debug, PartialEq)]
pub struct GmresRow {
    pub n: usize,
    pub preconditioner: NamedPreconditioner,
    pub seed: Option<u64>,
    /// Total inner (Arnoldi) steps.
    pub iterations: usize,
    /// Restart cycles started; this is the outer iteration count of GMRES(m).
    pub cycles: usize,
    pub final_relative_residual: f64,
    /// `‖x - e‖₂ / ‖e‖₂` against the known solution.
    pub solution_error: f64,
    pub converged: bool,
    /// Local wall-clock seconds, informational only.
    pub wall_time: f64,
}

/// Solves `P A x = P b`, `b = A e`, from a zero initial guess on the
/// matrix-free stencil.
pub fn solve_model_problem(
    config: &BenchConfig,
    n: usize,
    which: NamedPreconditioner,
) -> Result<(SolveReport, f64)> {
    let a = stencil_operator(config.example, n)?;
    let p = a.preconditioner(which, config.seed)?;
    let dim = a.dim();
    let b = a.apply_vec(&vec![1.0; dim]);
    let start = Instant::now();
    let report = gmres_restarted(&a, &p, &b, config.restart_m, config.tol, ITERATION_CAP_PER_UNKNOWN * dim)?;
    Ok((report, start.elapsed().as_secs_f64()))
}

pub fn run_gmres_table(config: &BenchConfig) -> Result<Vec<GmresRow>> {
    config.validate()?;
    if config.table != TableKind::Gmres {
        return Err(BenchError::Config("not a GMRES configuration".into()));
    }
    let jobs: Vec<_> = config
        .n_values
        .iter()
        .flat_map(|&n| config.preconditioners.iter().map(move |&w| (n, w)))
        .collect();
    let mut rows = jobs
        .into_par_iter()
        .map(|(n, which)| {
            let (report, wall_time) = solve_model_problem(config, n, which)?;
            let err = report.solution.iter().map(|x| (x - 1.0) * (x - 1.0)).sum::<f64>().sqrt()
                / (report.solution.len() as f64).sqrt();
            Ok(GmresRow {
                n,
                preconditioner: which,
                seed: which.is_random().then_some(config.seed),
                iterations: report.iterations,
                cycles: report.cycles(),
                final_relative_residual: report.final_relative_residual,
                solution_error: err,
                converged: report.converged,
                wall_time,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.n.cmp(&b.n).then(a.preconditioner.cmp(&b.preconditioner)));
    Ok(rows)
}

/// Rows where an explicit preconditioner needed more cycles than `P0` at the
/// same grid size. Used as a report-only check.
pub fn ordering_drift(rows: &[GmresRow]) -> Vec<String> {
    let mut out = Vec::new();
    for r in rows.iter().filter(|r| r.preconditioner == NamedPreconditioner::P0) {
        for o in rows.iter().filter(|o| o.n == r.n && o.preconditioner != NamedPreconditioner::P0) {
            if o.cycles > r.cycles {
                out.push(format!(
                    "N={}: {} needed {} cycles, more than P0 with {}",
                    r.n, o.preconditioner, o.cycles, r.cycles
                ));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use aor_precond::Example;

    #[test]
    fn small_table_converges_to_ones() {
        let cfg = BenchConfig::gmres(Example::Two, vec![6, 5]);
        let rows = run_gmres_table(&cfg).unwrap();
        assert_eq!(rows.len(), 10);
        assert_eq!(rows[0].n, 5);
        for r in &rows {
            assert!(r.converged, "{r:?}");
            assert!(r.final_relative_residual < 1e-10);
            assert!(r.solution_error < 1e-6);
            assert_eq!(r.cycles, r.iterations.div_ceil(10));
        }
        assert!(ordering_drift(&rows).is_empty());
    }
}
