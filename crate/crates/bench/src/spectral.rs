//! Spectral radii of AOR iteration matrices for preconditioned model problems.

use rayon::prelude::*;

use aor_precond::aor::DEFAULT_SPECTRAL_MAX_ITER;
use aor_precond::precond::named_mask;
use aor_precond::problems::example_matrix;
use aor_precond::{
    decompose_preconditioned, iteration_matrix, spectral_radius, AorParams, DenseMatrix, NamedPreconditioner,
    SpectralEstimate,
};

use crate::config::{BenchConfig, TableKind};
use crate::error::{BenchError, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralRow {
    pub n: usize,
    pub gamma: f64,
    pub omega: f64,
    pub preconditioner: NamedPreconditioner,
    /// Seed used for the random member, `None` for deterministic ones.
    pub seed: Option<u64>,
    pub rho: f64,
    pub lower: f64,
    pub upper: f64,
    pub converged: bool,
}

/// `ρ` of the AOR iteration matrix of `P A` for one named member.
pub fn preconditioned_spectral_radius(
    a: &DenseMatrix,
    which: NamedPreconditioner,
    seed: u64,
    params: AorParams,
    tol: f64,
) -> Result<SpectralEstimate> {
    let mask = named_mask(a, which, seed)?;
    let split = decompose_preconditioned(a, &mask)?.splitting;
    let t = iteration_matrix(&split, params)?;
    Ok(spectral_radius(&t, tol, DEFAULT_SPECTRAL_MAX_ITER)?)
}

/// One row per `(N, (γ, ω), P)` combination, sorted by `N`, then `γ`, `ω`,
/// then preconditioner index. Rows whose bracket did not converge carry
/// `converged = false`.
pub fn run_spectral_table(config: &BenchConfig) -> Result<Vec<SpectralRow>> {
    config.validate()?;
    if config.table != TableKind::Spectral {
        return Err(BenchError::Config("not a spectral configuration".into()));
    }
    let matrices = config
        .n_values
        .iter()
        .map(|&n| Ok((n, example_matrix(config.example, n)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut jobs = Vec::new();
    for (n, a) in &matrices {
        for p in &config.param_pairs {
            for &w in &config.preconditioners {
                jobs.push((*n, a, *p, w));
            }
        }
    }
    let mut rows = jobs
        .into_par_iter()
        .map(|(n, a, params, which)| {
            let est = preconditioned_spectral_radius(a, which, config.seed, params, config.spectral_tol)?;
            Ok(SpectralRow {
                n,
                gamma: params.gamma(),
                omega: params.omega(),
                preconditioner: which,
                seed: which.is_random().then_some(config.seed),
                rho: est.rho,
                lower: est.lower,
                upper: est.upper,
                converged: est.converged,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| {
        a.n.cmp(&b.n)
            .then(a.gamma.total_cmp(&b.gamma))
            .then(a.omega.total_cmp(&b.omega))
            .then(a.preconditioner.cmp(&b.preconditioner))
    });
    Ok(rows)
}
