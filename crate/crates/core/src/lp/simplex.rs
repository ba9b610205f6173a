//! Dense two-phase primal simplex.
//!
//! The problem is rewritten as `min c·x, A x + s = b, x >= 0`, with one
//! logical column `s` per row (slack, surplus, or a fixed-at-zero artificial
//! for equality rows). A triangular crash picks sparse structural columns for
//! rows whose logical starts infeasible; any infeasibility left is absorbed by
//! a single shift artificial that phase one drives to zero.
//!
//! Pricing is Dantzig's rule with lowest-index tie-breaking. After a run of
//! degenerate pivots it falls back to Bland's rule until progress resumes.
//! The final basis is always refactored from the original data and checked
//! before a point is reported.

use super::{ConstraintSense, LpError, LpProblem, LpSolution, LpSolver, LpStatus, DEFAULT_TOLERANCE};

/// Entries below this magnitude never become pivots.
const PIVOT_TOL: f64 = 1e-9;
/// Fill-in below this magnitude is flushed to zero during pivoting.
const DROP_TOL: f64 = 1e-13;
/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
const DEGENERATE_LIMIT: usize = 50;
const MAX_ROUNDS: usize = 4;

#[derive(Debug, Clone)]
pub struct DenseSimplex {
    tolerance: f64,
    max_iterations: Option<usize>,
}

impl Default for DenseSimplex {
    fn default() -> Self {
        Self {
            tolerance: DEFAULT_TOLERANCE,
            max_iterations: None,
        }
    }
}

impl DenseSimplex {
    pub fn with_tolerance(tolerance: f64) -> Result<Self, LpError> {
        if !(tolerance > 0.0 && tolerance.is_finite()) {
            return Err(LpError::InvalidTolerance(tolerance));
        }
        Ok(Self {
            tolerance,
            max_iterations: None,
        })
    }

    /// Overrides the default cap of `50 * (rows + columns)` pivots.
    pub fn max_iterations(mut self, cap: usize) -> Self {
        self.max_iterations = Some(cap);
        self
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }
}

impl LpSolver for DenseSimplex {
    fn solve(&self, problem: &LpProblem) -> Result<LpSolution, LpError> {
        let sf = StandardForm::new(problem);
        let mut tab = Tableau::new(&sf);
        let cap = self
            .max_iterations
            .unwrap_or(50 * (tab.m + tab.ncols));
        let mut engine = Engine {
            sf: &sf,
            tab: &mut tab,
            ftol: self.tolerance * sf.rhs_scale,
            otol: self.tolerance * sf.cost_scale,
            cap,
            iterations: 0,
        };
        let status = engine.run()?;
        let iterations = engine.iterations;
        if status != LpStatus::Optimal {
            return Ok(LpSolution::without_point(status, iterations));
        }
        let x = sf.recover(&tab);
        let objective_value = problem.objective().iter().zip(&x).map(|(c, v)| c * v).sum();
        let dual_values = sf.duals(&tab);
        Ok(LpSolution {
            status,
            objective_value: Some(objective_value),
            variable_values: Some(x),
            dual_values: Some(dual_values),
            iterations,
        })
    }
}

/// How an original variable is expressed through nonnegative columns.
#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// `x = offset + x'`
    Shifted { col: usize, offset: f64 },
    /// `x = offset - x'`
    Reflected { col: usize, offset: f64 },
    /// `x = x⁺ - x⁻`
    Split { pos: usize, neg: usize },
}

struct StandardForm {
    m: usize,
    /// Structural column count.
    ns: usize,
    /// Row-major `m × ns`, already multiplied by `logical_sign`.
    a: Vec<f64>,
    /// Right-hand side, already multiplied by `logical_sign`.
    b: Vec<f64>,
    logical_sign: Vec<f64>,
    equality: Vec<bool>,
    cost: Vec<f64>,
    col_nnz: Vec<usize>,
    maps: Vec<VarMap>,
    /// Number of rows that come from the original problem (the rest are
    /// finite upper bounds).
    original_rows: usize,
    rhs_scale: f64,
    cost_scale: f64,
}

impl StandardForm {
    fn new(p: &LpProblem) -> Self {
        let nv = p.num_vars();
        let mut maps = Vec::with_capacity(nv);
        // (original variable, sign) per structural column
        let mut cols: Vec<(usize, f64)> = Vec::with_capacity(nv);
        let mut offsets = vec![0.0; nv];
        let mut upper_rows: Vec<(usize, f64)> = Vec::new();
        for v in 0..nv {
            let (lo, hi) = (p.lower_bounds()[v], p.upper_bounds()[v]);
            if lo.is_finite() {
                let col = cols.len();
                cols.push((v, 1.0));
                offsets[v] = lo;
                maps.push(VarMap::Shifted { col, offset: lo });
                if hi.is_finite() {
                    upper_rows.push((col, hi - lo));
                }
            } else if hi.is_finite() {
                let col = cols.len();
                cols.push((v, -1.0));
                offsets[v] = hi;
                maps.push(VarMap::Reflected { col, offset: hi });
            } else {
                let pos = cols.len();
                cols.push((v, 1.0));
                cols.push((v, -1.0));
                maps.push(VarMap::Split { pos, neg: pos + 1 });
            }
        }
        let ns = cols.len();
        let original_rows = p.num_constraints();
        let m = original_rows + upper_rows.len();
        let mut a = vec![0.0; m * ns];
        let mut b = vec![0.0; m];
        let mut logical_sign = vec![1.0; m];
        let mut equality = vec![false; m];
        let matrix = p.matrix();
        for r in 0..original_rows {
            let sign = match p.senses()[r] {
                ConstraintSense::LessEq => 1.0,
                ConstraintSense::GreaterEq => -1.0,
                ConstraintSense::Equal => {
                    equality[r] = true;
                    1.0
                }
            };
            logical_sign[r] = sign;
            let mut rhs = p.rhs()[r];
            for v in 0..nv {
                rhs -= matrix[[r, v]] * offsets[v];
            }
            b[r] = sign * rhs;
            let row = &mut a[r * ns..(r + 1) * ns];
            for (j, &(v, s)) in cols.iter().enumerate() {
                row[j] = sign * s * matrix[[r, v]];
            }
        }
        for (k, &(col, width)) in upper_rows.iter().enumerate() {
            let r = original_rows + k;
            a[r * ns + col] = 1.0;
            b[r] = width;
        }
        let cost: Vec<f64> = cols.iter().map(|&(v, s)| s * p.objective()[v]).collect();
        let mut col_nnz = vec![0usize; ns];
        for r in 0..m {
            for (j, &v) in a[r * ns..(r + 1) * ns].iter().enumerate() {
                if v != 0.0 {
                    col_nnz[j] += 1;
                }
            }
        }
        let rhs_scale = b.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
        let cost_scale = cost.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
        Self {
            m,
            ns,
            a,
            b,
            logical_sign,
            equality,
            cost,
            col_nnz,
            maps,
            original_rows,
            rhs_scale,
            cost_scale,
        }
    }

    fn recover(&self, tab: &Tableau) -> Vec<f64> {
        let mut xs = vec![0.0; self.ns];
        for (r, &col) in tab.basis.iter().enumerate() {
            if col < self.ns {
                xs[col] = tab.beta[r].max(0.0);
            }
        }
        self.maps
            .iter()
            .map(|m| match *m {
                VarMap::Shifted { col, offset } => offset + xs[col],
                VarMap::Reflected { col, offset } => offset - xs[col],
                VarMap::Split { pos, neg } => xs[pos] - xs[neg],
            })
            .collect()
    }

    fn duals(&self, tab: &Tableau) -> Vec<f64> {
        (0..self.original_rows)
            .map(|r| {
                let y = -tab.d[self.ns + r] * self.logical_sign[r];
                if y == 0.0 {
                    0.0
                } else {
                    y
                }
            })
            .collect()
    }
}

struct Tableau {
    m: usize,
    ns: usize,
    ncols: usize,
    /// Row-major `m × ncols`: structural, logical, then the shift column.
    t: Vec<f64>,
    beta: Vec<f64>,
    /// Reduced costs for the active phase.
    d: Vec<f64>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    artificial: Vec<bool>,
    scratch: Vec<usize>,
}

impl Tableau {
    fn new(sf: &StandardForm) -> Self {
        let m = sf.m;
        let ncols = sf.ns + m + 1;
        let mut artificial = vec![false; ncols];
        for r in 0..m {
            artificial[sf.ns + r] = sf.equality[r];
        }
        artificial[ncols - 1] = true;
        let mut tab = Self {
            m,
            ns: sf.ns,
            ncols,
            t: vec![0.0; m * ncols],
            beta: vec![0.0; m],
            d: vec![0.0; ncols],
            basis: vec![0; m],
            is_basic: vec![false; ncols],
            artificial,
            scratch: Vec::with_capacity(ncols),
        };
        tab.reset(sf);
        tab
    }

    fn shift_col(&self) -> usize {
        self.ncols - 1
    }

    /// Back to the all-logical basis built from the original data.
    fn reset(&mut self, sf: &StandardForm) {
        let (ns, nc) = (self.ns, self.ncols);
        self.t.iter_mut().for_each(|v| *v = 0.0);
        self.is_basic.iter_mut().for_each(|v| *v = false);
        for r in 0..self.m {
            let row = &mut self.t[r * nc..(r + 1) * nc];
            row[..ns].copy_from_slice(&sf.a[r * ns..(r + 1) * ns]);
            row[ns + r] = 1.0;
            self.beta[r] = sf.b[r];
            self.basis[r] = ns + r;
            self.is_basic[ns + r] = true;
        }
    }

    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.t[r * self.ncols + c]
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let nc = self.ncols;
        let (head, rest) = self.t.split_at_mut(r * nc);
        let (prow, tail) = rest.split_at_mut(nc);
        let inv = 1.0 / prow[q];
        let nz = &mut self.scratch;
        nz.clear();
        for (k, v) in prow.iter_mut().enumerate() {
            if *v != 0.0 {
                *v *= inv;
                nz.push(k);
            }
        }
        prow[q] = 1.0;
        self.beta[r] *= inv;
        let beta_r = self.beta[r];
        let dense = nz.len() * 4 > nc;
        let update = |row: &mut [f64], beta: &mut f64| {
            let f = row[q];
            if f == 0.0 {
                return;
            }
            if dense {
                for (x, p) in row.iter_mut().zip(prow.iter()) {
                    *x -= f * p;
                }
            } else {
                for &k in nz.iter() {
                    let v = row[k] - f * prow[k];
                    row[k] = if v.abs() < DROP_TOL { 0.0 } else { v };
                }
            }
            row[q] = 0.0;
            *beta -= f * beta_r;
        };
        for (i, row) in head.chunks_exact_mut(nc).enumerate() {
            update(row, &mut self.beta[i]);
        }
        for (i, row) in tail.chunks_exact_mut(nc).enumerate() {
            update(row, &mut self.beta[r + 1 + i]);
        }
        let f = self.d[q];
        if f != 0.0 {
            for &k in nz.iter() {
                self.d[k] -= f * prow[k];
            }
            self.d[q] = 0.0;
        }
        let leaving = self.basis[r];
        self.is_basic[leaving] = false;
        self.is_basic[q] = true;
        self.basis[r] = q;
    }

    /// Reduced costs `c - c_B B⁻¹ A` for a full cost vector.
    fn price(&mut self, cost: &[f64]) {
        self.d.copy_from_slice(cost);
        let nc = self.ncols;
        for r in 0..self.m {
            let cb = cost[self.basis[r]];
            if cb != 0.0 {
                let row = &self.t[r * nc..(r + 1) * nc];
                for (d, a) in self.d.iter_mut().zip(row) {
                    *d -= cb * a;
                }
            }
        }
        for r in 0..self.m {
            self.d[self.basis[r]] = 0.0;
        }
    }

    fn objective(&self, cost: &[f64]) -> f64 {
        self.basis
            .iter()
            .zip(&self.beta)
            .map(|(&c, &b)| cost[c] * b)
            .sum()
    }

    fn eligible(&self, j: usize) -> bool {
        !self.is_basic[j] && !self.artificial[j]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    One,
    Two,
}

enum Step {
    Optimal,
    Unbounded,
}

struct Engine<'a> {
    sf: &'a StandardForm,
    tab: &'a mut Tableau,
    ftol: f64,
    otol: f64,
    cap: usize,
    iterations: usize,
}

impl Engine<'_> {
    fn run(&mut self) -> Result<LpStatus, LpError> {
        self.crash();
        for _ in 0..MAX_ROUNDS {
            if self.needs_phase_one() {
                let cost = self.start_phase_one();
                self.iterate(Phase::One)?;
                if self.tab.objective(&cost) > self.ftol {
                    return Ok(LpStatus::Infeasible);
                }
                self.drive_out_artificials();
                self.refactor();
                if self.needs_phase_one() {
                    continue;
                }
            }
            let cost = self.phase_two_cost();
            self.tab.price(&cost);
            if let Step::Unbounded = self.iterate(Phase::Two)? {
                return Ok(LpStatus::Unbounded);
            }
            self.refactor();
            self.tab.price(&cost);
            if !self.needs_phase_one() && self.dual_feasible() {
                return Ok(LpStatus::Optimal);
            }
        }
        Err(LpError::NumericalFailure {
            iterations: self.iterations,
        })
    }

    fn phase_two_cost(&self) -> Vec<f64> {
        let mut cost = vec![0.0; self.tab.ncols];
        cost[..self.sf.ns].copy_from_slice(&self.sf.cost);
        cost
    }

    fn needs_phase_one(&self) -> bool {
        self.tab.basis.iter().zip(&self.tab.beta).any(|(&c, &b)| {
            b < -self.ftol || (self.tab.artificial[c] && b > self.ftol)
        })
    }

    fn dual_feasible(&self) -> bool {
        (0..self.tab.ncols).all(|j| !self.tab.eligible(j) || self.tab.d[j] >= -self.otol)
    }

    /// Triangular crash: give each infeasible (or equality) row the sparsest
    /// structural column that leaves already crashed rows untouched.
    fn crash(&mut self) {
        let (m, ns) = (self.tab.m, self.tab.ns);
        let mut crashed = vec![false; m];
        let mut used = vec![false; ns];
        let mut candidates: Vec<usize> = Vec::new();
        for r in 0..m {
            let beta = self.tab.beta[r];
            if !(beta < 0.0 || self.sf.equality[r]) {
                continue;
            }
            let row_max = (0..ns).fold(0.0f64, |acc, j| acc.max(self.tab.at(r, j).abs()));
            if row_max < PIVOT_TOL {
                continue;
            }
            candidates.clear();
            for j in 0..ns {
                let a = self.tab.at(r, j);
                if used[j] || a.abs() < 1e-2 * row_max {
                    continue;
                }
                if beta != 0.0 && (beta > 0.0) != (a > 0.0) {
                    continue;
                }
                candidates.push(j);
            }
            candidates.sort_by_key(|&j| (self.sf.col_nnz[j], j));
            let pick = candidates.iter().copied().find(|&j| {
                (0..m).all(|k| !crashed[k] || self.tab.at(k, j) == 0.0)
            });
            if let Some(j) = pick {
                self.tab.pivot(r, j);
                crashed[r] = true;
                used[j] = true;
            }
        }
    }

    /// Installs the shift artificial so every basic value is nonnegative and
    /// returns the phase-one cost vector.
    fn start_phase_one(&mut self) -> Vec<f64> {
        let tab = &mut *self.tab;
        let shift = tab.shift_col();
        let nc = tab.ncols;
        let mut worst: Option<usize> = None;
        for r in 0..tab.m {
            tab.t[r * nc + shift] = 0.0;
            if tab.beta[r] < -self.ftol {
                tab.t[r * nc + shift] = -1.0;
                if worst.is_none_or(|w| tab.beta[r] < tab.beta[w]) {
                    worst = Some(r);
                }
            } else if tab.beta[r] < 0.0 {
                tab.beta[r] = 0.0;
            }
        }
        if let Some(r) = worst {
            tab.pivot(r, shift);
            self.iterations += 1;
            for b in tab.beta.iter_mut() {
                if *b < 0.0 {
                    *b = 0.0;
                }
            }
        }
        let mut cost = vec![0.0; nc];
        for (j, c) in cost.iter_mut().enumerate() {
            if tab.artificial[j] {
                *c = 1.0;
            }
        }
        tab.price(&cost);
        cost
    }

    /// Pivots basic artificials (all at zero after a successful phase one)
    /// out of the basis where the row allows it.
    fn drive_out_artificials(&mut self) {
        for r in 0..self.tab.m {
            if !self.tab.artificial[self.tab.basis[r]] {
                continue;
            }
            let mut best: Option<(usize, f64)> = None;
            for j in 0..self.tab.ncols {
                if self.tab.artificial[j] || self.tab.is_basic[j] {
                    continue;
                }
                let a = self.tab.at(r, j).abs();
                if a > 1e-7 && best.is_none_or(|(_, b)| a > b) {
                    best = Some((j, a));
                }
            }
            if let Some((j, _)) = best {
                self.tab.beta[r] = 0.0;
                self.tab.pivot(r, j);
                self.iterations += 1;
            }
        }
    }

    /// Rebuilds the tableau for the current basis from the original data.
    /// Columns that turn out dependent are replaced by row logicals.
    fn refactor(&mut self) {
        let wanted: Vec<usize> = self
            .tab
            .basis
            .iter()
            .copied()
            .filter(|&c| c < self.tab.ns)
            .collect();
        let mut keep_logical = vec![false; self.tab.m];
        for &c in &self.tab.basis {
            if c >= self.tab.ns && c < self.tab.ns + self.tab.m {
                keep_logical[c - self.tab.ns] = true;
            }
        }
        self.tab.reset(self.sf);
        let mut order = wanted;
        order.sort_by_key(|&j| (self.sf.col_nnz[j], j));
        for j in order {
            let mut best: Option<(usize, f64)> = None;
            for r in 0..self.tab.m {
                let owner = self.tab.basis[r];
                if owner < self.tab.ns || keep_logical[owner - self.tab.ns] {
                    continue;
                }
                let a = self.tab.at(r, j).abs();
                if a > PIVOT_TOL && best.is_none_or(|(_, b)| a > b) {
                    best = Some((r, a));
                }
            }
            if let Some((r, _)) = best {
                self.tab.pivot(r, j);
            }
        }
    }

    fn iterate(&mut self, phase: Phase) -> Result<Step, LpError> {
        let mut degenerate_run = 0usize;
        loop {
            if phase == Phase::One && self.phase_one_done() {
                return Ok(Step::Optimal);
            }
            let bland = degenerate_run >= DEGENERATE_LIMIT;
            let Some(q) = self.entering(bland) else {
                return Ok(Step::Optimal);
            };
            let Some(r) = (if bland {
                self.leaving_bland(q)
            } else {
                self.leaving_harris(q)
            }) else {
                return Ok(Step::Unbounded);
            };
            if self.iterations >= self.cap {
                return Err(LpError::NumericalFailure {
                    iterations: self.iterations,
                });
            }
            let step = self.tab.beta[r].max(0.0) / self.tab.at(r, q);
            self.tab.pivot(r, q);
            self.iterations += 1;
            for b in self.tab.beta.iter_mut() {
                if *b < 0.0 && *b > -self.ftol {
                    *b = 0.0;
                }
            }
            if step <= 1e-12 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
        }
    }

    fn phase_one_done(&self) -> bool {
        self.tab
            .basis
            .iter()
            .zip(&self.tab.beta)
            .all(|(&c, &b)| !self.tab.artificial[c] || b <= 0.0)
    }

    fn entering(&self, bland: bool) -> Option<usize> {
        let tab = &*self.tab;
        let mut best: Option<(usize, f64)> = None;
        for j in 0..tab.ncols {
            let dj = tab.d[j];
            if dj >= -self.otol || !tab.eligible(j) {
                continue;
            }
            if bland {
                return Some(j);
            }
            if best.is_none_or(|(_, b)| dj < b) {
                best = Some((j, dj));
            }
        }
        best.map(|(j, _)| j)
    }

    /// Two-pass ratio test: bound the step with a feasibility tolerance, then
    /// take the largest pivot inside that bound.
    fn leaving_harris(&self, q: usize) -> Option<usize> {
        let tab = &*self.tab;
        let mut theta = f64::INFINITY;
        for r in 0..tab.m {
            let a = tab.at(r, q);
            if a > PIVOT_TOL {
                theta = theta.min((tab.beta[r].max(0.0) + self.ftol) / a);
            }
        }
        if !theta.is_finite() {
            return None;
        }
        let mut best: Option<(usize, f64)> = None;
        for r in 0..tab.m {
            let a = tab.at(r, q);
            if a > PIVOT_TOL && tab.beta[r].max(0.0) / a <= theta && best.is_none_or(|(_, b)| a > b) {
                best = Some((r, a));
            }
        }
        best.map(|(r, _)| r)
    }

    /// Textbook minimum ratio, ties broken by the smallest basic index.
    fn leaving_bland(&self, q: usize) -> Option<usize> {
        let tab = &*self.tab;
        let mut best: Option<(usize, f64)> = None;
        for r in 0..tab.m {
            let a = tab.at(r, q);
            if a <= PIVOT_TOL {
                continue;
            }
            let ratio = tab.beta[r].max(0.0) / a;
            best = match best {
                None => Some((r, ratio)),
                Some((br, bratio)) => {
                    let tie = (ratio - bratio).abs() <= 1e-12 * (1.0 + bratio.abs());
                    if (tie && tab.basis[r] < tab.basis[br]) || (!tie && ratio < bratio) {
                        Some((r, ratio))
                    } else {
                        Some((br, bratio))
                    }
                }
            };
        }
        best.map(|(r, _)| r)
    }
}
