//! Randomized checks of the comparison results over seeded matrix
//! populations:
//!
//! * M-matrix equivalence: `A` is an M-matrix iff `P̃A` is, for `α ∈ [0,1]`.
//! * Preconditioning never hurts: `ρ(𝓛̃) <= ρ(𝓛) < 1` for M-matrices.
//! * `α ≡ 1` is best: `ρ(𝓛̂) <= ρ(𝓛̃)` whenever the sufficient condition on
//!   `α` holds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use aor_precond::aor::DEFAULT_SPECTRAL_MAX_ITER;
use aor_precond::precond::unit_alpha_margin;
use aor_precond::problems::{random_m_matrix, random_unit_z_matrix};
use aor_precond::{
    build_preconditioner, decompose_preconditioned, is_m_matrix, iteration_matrix, preconditioned_matrix,
    spectral_radius, split, unit_alpha_condition, AlphaMask, AorParams, DenseMatrix, SplittingTriple,
};

use crate::error::{BenchError, Result};

/// Slack on every spectral-radius comparison.
pub const RHO_SLACK: f64 = 1e-8;
/// Bracket width used for the suite's spectral radii.
pub const SUITE_SPECTRAL_TOL: f64 = 1e-10;
pub const MAX_DIM: usize = 30;

/// `(γ, ω)` pairs exercised by the ordering checks.
pub const PARAM_PAIRS: [(f64, f64); 4] = [(0.7, 0.8), (0.8, 1.0), (0.5, 0.5), (0.0, 1.0)];

#[derive(Clone, Debug)]
pub struct Violation {
    pub trial: usize,
    pub seed: u64,
    pub detail: String,
    pub matrix: DenseMatrix,
}

#[derive(Clone, Debug)]
pub struct PropertySummary {
    pub name: &'static str,
    pub trials: usize,
    /// Individual comparisons made (several per trial for the ordering checks).
    pub checks: usize,
    pub passes: usize,
    /// Largest signed margin seen; nonpositive means every check held with room.
    pub worst_margin: f64,
    pub violations: Vec<Violation>,
}

impl PropertySummary {
    fn new(name: &'static str) -> Self {
        PropertySummary { name, trials: 0, checks: 0, passes: 0, worst_margin: f64::NEG_INFINITY, violations: Vec::new() }
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    fn absorb(&mut self, o: TrialOutcome) {
        self.trials += usize::from(o.checks > 0);
        self.checks += o.checks;
        self.passes += o.passes;
        self.worst_margin = self.worst_margin.max(o.worst_margin);
        self.violations.extend(o.violations);
    }
}

#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub seed: u64,
    pub m_matrix_equivalence: PropertySummary,
    pub preconditioned_ordering: PropertySummary,
    pub unit_alpha_optimality: PropertySummary,
    /// Fraction of random masks for which the `α ≡ 1` comparison condition held.
    pub condition_fraction: f64,
}

impl SuiteReport {
    pub fn summaries(&self) -> [&PropertySummary; 3] {
        [&self.m_matrix_equivalence, &self.preconditioned_ordering, &self.unit_alpha_optimality]
    }

    pub fn passed(&self) -> bool {
        self.summaries().iter().all(|s| s.passed())
    }
}

/// Test hooks for exercising the suite's failure path.
#[derive(Clone, Copy, Debug, Default)]
pub struct SuiteOptions {
    /// Flip the `ρ(𝓛̃) <= ρ(𝓛)` inequality so that every trial reports a violation.
    pub invert_ordering: bool,
}

#[derive(Default)]
struct TrialOutcome {
    checks: usize,
    passes: usize,
    worst_margin: f64,
    violations: Vec<Violation>,
}

impl TrialOutcome {
    fn new() -> Self {
        TrialOutcome { worst_margin: f64::NEG_INFINITY, ..Default::default() }
    }

    fn record(&mut self, margin: f64, ok: bool, violation: impl FnOnce() -> Violation) {
        self.checks += 1;
        self.worst_margin = self.worst_margin.max(margin);
        if ok {
            self.passes += 1;
        } else {
            self.violations.push(violation());
        }
    }
}

fn rho(split: &SplittingTriple, params: AorParams) -> Result<f64> {
    let t = iteration_matrix(split, params)?;
    let est = spectral_radius(&t, SUITE_SPECTRAL_TOL, DEFAULT_SPECTRAL_MAX_ITER)?;
    if !est.converged {
        return Err(BenchError::Core(aor_precond::Error::Consistency(format!(
            "spectral bracket [{}, {}] did not converge",
            est.lower, est.upper
        ))));
    }
    Ok(est.rho)
}

/// Random mask: even trials draw every `α_ij` uniformly, odd trials fix the
/// strictly lower part at 1, which always satisfies the comparison condition.
fn trial_mask(n: usize, trial: usize, rng: &mut ChaCha8Rng) -> Result<AlphaMask> {
    let lower_ones = trial % 2 == 1;
    Ok(AlphaMask::from_fn(n, |i, j| if lower_ones && i > j { 1.0 } else { rng.gen::<f64>() })?)
}

fn equivalence_trial(trial: usize, seed: u64) -> Result<TrialOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=MAX_DIM.min(12));
    let density = rng.gen_range(0.2..=1.0);
    // half M-matrices, half strictly outside the M-matrix cone
    let scale = if trial % 2 == 0 { rng.gen_range(0.3..0.98) } else { rng.gen_range(1.02..2.0) };
    let a = random_unit_z_matrix(n, density, scale, rng.gen(), |b| {
        Ok(spectral_radius(b, 1e-12, DEFAULT_SPECTRAL_MAX_ITER)?.rho)
    })?;
    let mask = AlphaMask::from_fn(n, |_, _| rng.gen::<f64>())?;
    let a_tilde = preconditioned_matrix(&a, &build_preconditioner(&a, &mask)?)?;
    let lhs = is_m_matrix(&a)?.is_m_matrix;
    let rhs = is_m_matrix(&a_tilde)?.is_m_matrix;
    let mut out = TrialOutcome::new();
    // unit diagonal: M iff ρ(I - A) < 1; this differs from `scale < 1` only for nilpotent draws
    let offdiag = DenseMatrix::identity(n).sub(&a)?;
    let expected = spectral_radius(&offdiag, 1e-12, DEFAULT_SPECTRAL_MAX_ITER)?.rho < 1.0;
    out.record(if lhs == rhs { 0.0 } else { 1.0 }, lhs == rhs && lhs == expected, || Violation {
        trial,
        seed,
        detail: format!("A is M: {lhs}, P̃A is M: {rhs}, scale {scale}"),
        matrix: a.clone(),
    });
    Ok(out)
}

fn ordering_trials(trial: usize, seed: u64, opts: SuiteOptions) -> Result<(TrialOutcome, TrialOutcome, bool)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=MAX_DIM);
    let density = rng.gen_range(0.1..=1.0);
    let a = random_m_matrix(n, density, rng.gen())?;
    let mask = trial_mask(n, trial, &mut rng)?;
    let condition = unit_alpha_condition(&a, &mask);

    let base = split(&a)?;
    let tilde = decompose_preconditioned(&a, &mask)?.splitting;
    let hat = decompose_preconditioned(&a, &AlphaMask::uniform(n, 1.0)?)?.splitting;

    let mut ordering = TrialOutcome::new();
    let mut optimal = TrialOutcome::new();
    for (g, w) in PARAM_PAIRS {
        let params = AorParams::new(g, w)?;
        let r = rho(&base, params)?;
        let rt = rho(&tilde, params)?;
        let margin = if opts.invert_ordering { r - rt } else { rt - r };
        ordering.record(margin, margin <= RHO_SLACK && r < 1.0, || Violation {
            trial,
            seed,
            detail: format!("(γ,ω)=({g},{w}): ρ(𝓛)={r:.12}, ρ(𝓛̃)={rt:.12}"),
            matrix: a.clone(),
        });
        if condition {
            let rh = rho(&hat, params)?;
            optimal.record(rh - rt, rh - rt <= RHO_SLACK, || Violation {
                trial,
                seed,
                detail: format!(
                    "(γ,ω)=({g},{w}): ρ(𝓛̂)={rh:.12} > ρ(𝓛̃)={rt:.12}, condition worst {:e}",
                    unit_alpha_margin(&a, &mask).unwrap_or(f64::NAN)
                ),
                matrix: a.clone(),
            });
        }
    }
    Ok((ordering, optimal, condition))
}

pub fn run_property_suite(seed: u64, trials: usize) -> Result<SuiteReport> {
    run_property_suite_with(seed, trials, SuiteOptions::default())
}

pub fn run_property_suite_with(seed: u64, trials: usize, opts: SuiteOptions) -> Result<SuiteReport> {
    if trials == 0 {
        return Err(BenchError::Config("trials must be >= 1".into()));
    }
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let seeds: Vec<(u64, u64)> = (0..trials).map(|_| (master.gen(), master.gen())).collect();

    let outcomes = seeds
        .par_iter()
        .enumerate()
        .map(|(trial, &(s_eq, s_ord))| {
            let eq = equivalence_trial(trial, s_eq)?;
            let (ord, opt, cond) = ordering_trials(trial, s_ord, opts)?;
            Ok((eq, ord, opt, cond))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut eq_sum = PropertySummary::new("M-matrix equivalence");
    let mut ord_sum = PropertySummary::new("preconditioned ordering");
    let mut opt_sum = PropertySummary::new("unit-alpha optimality");
    let mut satisfied = 0;
    for (eq, ord, opt, cond) in outcomes {
        eq_sum.absorb(eq);
        ord_sum.absorb(ord);
        opt_sum.absorb(opt);
        satisfied += usize::from(cond);
    }
    Ok(SuiteReport {
        seed,
        m_matrix_equivalence: eq_sum,
        preconditioned_ordering: ord_sum,
        unit_alpha_optimality: opt_sum,
        condition_fraction: satisfied as f64 / trials as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_trials_rejected() {
        assert!(matches!(run_property_suite(1, 0), Err(BenchError::Config(_))));
    }

    #[test]
    fn small_run_passes() {
        let r = run_property_suite(7, 6).unwrap();
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.m_matrix_equivalence.trials, 6);
        assert_eq!(r.preconditioned_ordering.checks, 6 * PARAM_PAIRS.len());
        assert!(r.condition_fraction >= 0.5);
    }

    #[test]
    fn injected_violation_is_reported() {
        let r = run_property_suite_with(7, 4, SuiteOptions { invert_ordering: true }).unwrap();
        assert!(!r.preconditioned_ordering.passed());
        assert!(!r.passed());
        assert!(r.m_matrix_equivalence.passed());
    }
}
