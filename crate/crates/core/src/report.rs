use crate::matrix::Vector;

/// Outcome of an iterative solve.
#[derive(Clone, Debug)]
pub struct SolveReport {
    /// Iterations performed. For GMRES this counts inner (Arnoldi) steps.
    pub iterations: usize,
    /// Number of restarts performed (GMRES only; zero for stationary solves).
    pub restarts: usize,
    pub final_relative_residual: f64,
    pub converged: bool,
    /// True relative residual `‖b - A x_k‖₂ / ‖b‖₂` after every iteration.
    pub residual_history: Vec<f64>,
    pub solution: Vector,
}

impl SolveReport {
    /// Number of GMRES(m) cycles started (the outer iteration count).
    pub fn cycles(&self) -> usize {
        if self.restarts == 0 && self.iterations == 0 {
            0
        } else {
            self.restarts + 1
        }
    }
}
