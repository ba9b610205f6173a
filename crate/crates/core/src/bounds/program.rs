use crate::baseline::BaselineModel;
use crate::data::Dataset;
use crate::error::AnalysisError;
use crate::lp::{self, ConstraintSense, LpProblem, LpStatus};

/// Column layout shared by every bound program: positive weight parts,
/// negative weight parts, bias, slacks.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Layout {
    pub d: usize,
    pub n: usize,
}

impl Layout {
    pub fn pos(&self, j: usize) -> usize {
        j
    }
    pub fn neg(&self, j: usize) -> usize {
        self.d + j
    }
    pub fn bias(&self) -> usize {
        2 * self.d
    }
    pub fn slack(&self, i: usize) -> usize {
        2 * self.d + 1 + i
    }
    pub fn num_vars(&self) -> usize {
        2 * self.d + 1 + self.n
    }
}

/// Sign-fixed range on one weight: `lo <= sign * w_l <= hi`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SignedRange {
    pub feature: usize,
    pub sign: f64,
    pub lo: f64,
    pub hi: f64,
}

/// Feasible set of models at least as good as the baseline: margin rows,
/// slack total at most `rho`, L1 norm at most `(1 + delta) mu`, plus any
/// sign-fixed ranges. The objective is left at zero.
pub(crate) fn model_class(
    dataset: &Dataset,
    baseline: &BaselineModel,
    delta: f64,
    ranges: &[SignedRange],
) -> Result<LpProblem, AnalysisError> {
    let (n, d) = dataset.samples().dim();
    let lay = Layout { d, n };
    let mut b = LpProblem::builder(lay.num_vars());
    b.free(lay.bias());
    for (i, (row, &y)) in dataset.samples().rows().into_iter().zip(dataset.labels()).enumerate() {
        let mut terms = Vec::with_capacity(2 * d + 2);
        for (j, &x) in row.iter().enumerate() {
            if x != 0.0 {
                terms.push((lay.pos(j), y * x));
                terms.push((lay.neg(j), -y * x));
            }
        }
        terms.push((lay.bias(), -y));
        terms.push((lay.slack(i), 1.0));
        b.row(terms, ConstraintSense::GreaterEq, 1.0);
    }
    b.row(
        (0..n).map(|i| (lay.slack(i), 1.0)).collect(),
        ConstraintSense::LessEq,
        baseline.rho,
    );
    b.row(
        (0..d).flat_map(|j| [(lay.pos(j), 1.0), (lay.neg(j), 1.0)]).collect(),
        ConstraintSense::LessEq,
        (1.0 + delta) * baseline.mu,
    );
    for r in ranges {
        let terms = vec![(lay.pos(r.feature), r.sign), (lay.neg(r.feature), -r.sign)];
        if r.lo == r.hi {
            b.row(terms, ConstraintSense::Equal, r.lo);
        } else {
            b.row(terms.clone(), ConstraintSense::GreaterEq, r.lo);
            b.row(terms, ConstraintSense::LessEq, r.hi);
        }
    }
    Ok(b.build()?)
}

/// What one bound program optimizes for feature `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Goal {
    MinAbs,
    MaxPositive,
    MaxNegative,
}

pub(crate) fn objective(lay: Layout, j: usize, goal: Goal) -> Vec<f64> {
    let mut c = vec![0.0; lay.num_vars()];
    match goal {
        Goal::MinAbs => {
            c[lay.pos(j)] = 1.0;
            c[lay.neg(j)] = 1.0;
        }
        Goal::MaxPositive => {
            c[lay.pos(j)] = -1.0;
            c[lay.neg(j)] = 1.0;
        }
        Goal::MaxNegative => {
            c[lay.pos(j)] = 1.0;
            c[lay.neg(j)] = -1.0;
        }
    }
    c
}

/// Optimal model point of one program, or `None` when infeasible.
pub(crate) struct Solved {
    pub value: f64,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub slacks: Vec<f64>,
}

pub(crate) fn solve_goal(
    base: &LpProblem,
    lay: Layout,
    j: usize,
    goal: Goal,
) -> Result<Option<Solved>, AnalysisError> {
    let problem = base.with_objective(objective(lay, j, goal))?;
    let sol = lp::solve(&problem, lp::DEFAULT_TOLERANCE)?;
    match sol.status {
        LpStatus::Infeasible => Ok(None),
        // The L1 budget bounds every weight, so this signals a solver fault.
        LpStatus::Unbounded => Err(AnalysisError::Optimization(lp::LpError::NumericalFailure {
            iterations: sol.iterations,
        })),
        LpStatus::Optimal => {
            let (obj, x) = sol.optimum().expect("optimal solution carries a point");
            let weights: Vec<f64> = (0..lay.d).map(|k| x[lay.pos(k)] - x[lay.neg(k)]).collect();
            let value = match goal {
                Goal::MinAbs => obj,
                Goal::MaxPositive | Goal::MaxNegative => -obj,
            };
            Ok(Some(Solved {
                value: value.max(0.0),
                weights,
                bias: x[lay.bias()],
                slacks: (0..lay.n).map(|i| x[lay.slack(i)]).collect(),
            }))
        }
    }
}
