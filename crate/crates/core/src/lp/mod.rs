//! Linear programs in general form and the bundled dense simplex solver.
//!
//! Every optimization in this crate (the baseline SVM fit and every relevance
//! bound) is lowered to an [`LpProblem`] and handed to an [`LpSolver`]. The
//! default solver is [`DenseSimplex`]; callers only depend on the trait.

mod simplex;

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use simplex::DenseSimplex;

/// Default primal/dual feasibility tolerance.
pub const DEFAULT_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("malformed problem: {0}")]
    MalformedProblem(String),
    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),
    #[error("simplex did not converge after {iterations} iterations")]
    NumericalFailure { iterations: usize },
}

/// Row sense of a linear constraint `a·x (sense) rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConstraintSense {
    LessEq,
    Equal,
    GreaterEq,
}

/// `minimize c·x` subject to row constraints and per-variable bounds.
///
/// Instances are immutable once built, so one problem can be shared across
/// threads and solved concurrently.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    objective: Vec<f64>,
    matrix: Array2<f64>,
    rhs: Vec<f64>,
    senses: Vec<ConstraintSense>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl LpProblem {
    pub fn new(
        objective: Vec<f64>,
        matrix: Array2<f64>,
        rhs: Vec<f64>,
        senses: Vec<ConstraintSense>,
        lower: Vec<f64>,
        upper: Vec<f64>,
    ) -> Result<Self, LpError> {
        let (rows, cols) = matrix.dim();
        if rhs.len() != rows || senses.len() != rows {
            return Err(LpError::MalformedProblem(format!(
                "{rows} constraint rows but {} rhs values and {} senses",
                rhs.len(),
                senses.len()
            )));
        }
        if objective.len() != cols || lower.len() != cols || upper.len() != cols {
            return Err(LpError::MalformedProblem(format!(
                "{cols} columns but objective/lower/upper lengths {}/{}/{}",
                objective.len(),
                lower.len(),
                upper.len()
            )));
        }
        if objective.iter().chain(rhs.iter()).any(|v| !v.is_finite())
            || matrix.iter().any(|v| !v.is_finite())
        {
            return Err(LpError::MalformedProblem(
                "objective, matrix and rhs entries must be finite".into(),
            ));
        }
        for (j, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY
            {
                return Err(LpError::MalformedProblem(format!(
                    "variable {j} has invalid bounds [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self {
            objective,
            matrix,
            rhs,
            senses,
            lower,
            upper,
        })
    }

    /// Starts a problem over `num_vars` variables, all `>= 0` with zero cost.
    pub fn builder(num_vars: usize) -> LpBuilder {
        LpBuilder {
            objective: vec![0.0; num_vars],
            lower: vec![0.0; num_vars],
            upper: vec![f64::INFINITY; num_vars],
            rows: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.rhs.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.matrix
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn senses(&self) -> &[ConstraintSense] {
        &self.senses
    }

    pub fn lower_bounds(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper_bounds(&self) -> &[f64] {
        &self.upper
    }

    /// Same constraints, different cost vector.
    pub fn with_objective(&self, objective: Vec<f64>) -> Result<Self, LpError> {
        if objective.len() != self.num_vars() {
            return Err(LpError::MalformedProblem(format!(
                "objective has {} entries, problem has {} variables",
                objective.len(),
                self.num_vars()
            )));
        }
        if objective.iter().any(|v| !v.is_finite()) {
            return Err(LpError::MalformedProblem("objective entries must be finite".into()));
        }
        Ok(Self {
            objective,
            ..self.clone()
        })
    }

    /// Largest violation of any row or bound by `x`; `0.0` when feasible.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (row, (&rhs, sense)) in self
            .matrix
            .rows()
            .into_iter()
            .zip(self.rhs.iter().zip(&self.senses))
        {
            let lhs: f64 = row.iter().zip(x).map(|(a, v)| a * v).sum();
            let v = match sense {
                ConstraintSense::LessEq => lhs - rhs,
                ConstraintSense::GreaterEq => rhs - lhs,
                ConstraintSense::Equal => (lhs - rhs).abs(),
            };
            worst = worst.max(v);
        }
        for ((&v, &lo), &hi) in x.iter().zip(&self.lower).zip(&self.upper) {
            worst = worst.max(lo - v).max(v - hi);
        }
        worst
    }
}

/// Sparse row: `(variable, coefficient)` terms, sense and right-hand side.
type SparseRow = (Vec<(usize, f64)>, ConstraintSense, f64);

/// Incremental construction of an [`LpProblem`] from sparse rows.
#[derive(Debug, Clone)]
pub struct LpBuilder {
    objective: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    rows: Vec<SparseRow>,
}

impl LpBuilder {
    pub fn cost(&mut self, var: usize, c: f64) -> &mut Self {
        self.objective[var] = c;
        self
    }

    pub fn bounds(&mut self, var: usize, lower: f64, upper: f64) -> &mut Self {
        self.lower[var] = lower;
        self.upper[var] = upper;
        self
    }

    pub fn free(&mut self, var: usize) -> &mut Self {
        self.bounds(var, f64::NEG_INFINITY, f64::INFINITY)
    }

    /// Adds `Σ coeff·x[var] (sense) rhs`; repeated indices are summed.
    pub fn row(&mut self, terms: Vec<(usize, f64)>, sense: ConstraintSense, rhs: f64) -> &mut Self {
        self.rows.push((terms, sense, rhs));
        self
    }

    pub fn build(&self) -> Result<LpProblem, LpError> {
        let cols = self.objective.len();
        let mut matrix = Array2::zeros((self.rows.len(), cols));
        let mut rhs = Vec::with_capacity(self.rows.len());
        let mut senses = Vec::with_capacity(self.rows.len());
        for (r, (terms, sense, b)) in self.rows.iter().enumerate() {
            for &(j, a) in terms {
                if j >= cols {
                    return Err(LpError::MalformedProblem(format!(
                        "row {r} references variable {j} of {cols}"
                    )));
                }
                matrix[[r, j]] += a;
            }
            rhs.push(*b);
            senses.push(*sense);
        }
        LpProblem::new(
            self.objective.clone(),
            matrix,
            rhs,
            senses,
            self.lower.clone(),
            self.upper.clone(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Set iff `status == Optimal`.
    pub objective_value: Option<f64>,
    /// Set iff `status == Optimal`.
    pub variable_values: Option<Vec<f64>>,
    /// Row multipliers of the optimal basis (`>= 0` for `>=` rows, `<= 0` for
    /// `<=` rows). Set iff `status == Optimal`.
    pub dual_values: Option<Vec<f64>>,
    pub iterations: usize,
}

impl LpSolution {
    pub(crate) fn without_point(status: LpStatus, iterations: usize) -> Self {
        Self {
            status,
            objective_value: None,
            variable_values: None,
            dual_values: None,
            iterations,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    /// Objective value and primal point of an optimal solution.
    pub fn optimum(&self) -> Option<(f64, &[f64])> {
        match (&self.objective_value, &self.variable_values) {
            (Some(v), Some(x)) => Some((*v, x.as_slice())),
            _ => None,
        }
    }
}

/// Anything that can solve an [`LpProblem`].
pub trait LpSolver: Send + Sync {
    fn solve(&self, problem: &LpProblem) -> Result<LpSolution, LpError>;
}

/// Solves `problem` with the bundled [`DenseSimplex`] at the given tolerance.
pub fn solve(problem: &LpProblem, tolerance: f64) -> Result<LpSolution, LpError> {
    DenseSimplex::with_tolerance(tolerance)?.solve(problem)
}
