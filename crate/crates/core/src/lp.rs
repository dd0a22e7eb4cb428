//! Two-phase primal simplex over exact rationals or doubles.
//!
//! Problems are stated over [`Rational`] data and solved in any [`Scalar`]
//! type. The solver converts to standard form (`Ax = b`, `x >= 0`, `b >= 0`),
//! runs a dense tableau simplex using Dantzig pricing that falls back to
//! Bland's rule permanently after a streak of degenerate pivots, and reads
//! the dual values off the reduced costs of the initial basis columns.
//!
//! Dual convention: with `d = c - A^T y`, a minimization optimum has `y_i >= 0`
//! on `>=` rows, `y_i <= 0` on `<=` rows, `d_j >= 0` where `x_j` sits at its
//! lower bound and `d_j <= 0` at its upper bound. All signs flip for
//! maximization. The objective equals `b^T y` plus the bound terms.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::exactnum::{Rational, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Constraint {
    /// Sparse `(variable, coefficient)` pairs.
    pub coeffs: Vec<(usize, Rational)>,
    pub relation: Relation,
    pub rhs: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarBounds {
    pub lower: Option<Rational>,
    pub upper: Option<Rational>,
}

impl VarBounds {
    pub fn non_negative() -> Self {
        VarBounds {
            lower: Some(Rational::zero()),
            upper: None,
        }
    }

    pub fn free() -> Self {
        VarBounds {
            lower: None,
            upper: None,
        }
    }

    pub fn boxed(lower: Rational, upper: Rational) -> Self {
        VarBounds {
            lower: Some(lower),
            upper: Some(upper),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<VarBounds>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution<T> {
    pub status: LpStatus,
    /// Primal values (empty unless optimal).
    pub primal: Vec<T>,
    /// One dual value per constraint (empty unless optimal).
    pub dual: Vec<T>,
    pub objective: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveMode {
    Exact,
    Float,
}

impl LinearProgram {
    pub fn new(sense: Sense) -> Self {
        LinearProgram {
            sense,
            objective: Vec::new(),
            constraints: Vec::new(),
            bounds: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    /// Adds a variable and returns its index.
    pub fn add_var(&mut self, cost: Rational, bounds: VarBounds) -> usize {
        self.objective.push(cost);
        self.bounds.push(bounds);
        self.objective.len() - 1
    }

    pub fn add_constraint(&mut self, coeffs: Vec<(usize, Rational)>, relation: Relation, rhs: Rational) {
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    /// Plain-text dump for debugging.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let sense = match self.sense {
            Sense::Minimize => "min",
            Sense::Maximize => "max",
        };
        let obj: Vec<String> = self
            .objective
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(j, c)| format!("{c} x{j}"))
            .collect();
        s.push_str(&format!("{sense} {}\n", obj.join(" + ")));
        for c in &self.constraints {
            let lhs: Vec<String> = c.coeffs.iter().map(|(j, a)| format!("{a} x{j}")).collect();
            let rel = match c.relation {
                Relation::Le => "<=",
                Relation::Eq => "=",
                Relation::Ge => ">=",
            };
            s.push_str(&format!("  {} {rel} {}\n", lhs.join(" + "), c.rhs));
        }
        for (j, b) in self.bounds.iter().enumerate() {
            let lo = b.lower.as_ref().map_or("-inf".to_string(), ToString::to_string);
            let hi = b.upper.as_ref().map_or("+inf".to_string(), ToString::to_string);
            s.push_str(&format!("  {lo} <= x{j} <= {hi}\n"));
        }
        s
    }

    fn check(&self) -> Result<()> {
        let n = self.num_vars();
        if self.bounds.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} bounds for {n} variables",
                self.bounds.len()
            )));
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if let Some(&(j, _)) = c.coeffs.iter().find(|(j, _)| *j >= n) {
                return Err(Error::DimensionMismatch(format!(
                    "constraint {i} references variable {j} of {n}"
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for LinearProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// How an original variable is expressed through standard-form columns.
#[derive(Debug, Clone)]
enum VarMap {
    /// `x = offset + s`
    Shift { col: usize, offset: Rational },
    /// `x = offset - s`
    Flip { col: usize, offset: Rational },
    /// `x = s+ - s-`
    Split { pos: usize, neg: usize },
}

/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
const DEGENERATE_STREAK: usize = 50;

/// Smallest float pivot accepted when a larger one is available.
const FLOAT_PIVOT_TOL: f64 = 1e-7;
/// Primal infeasibility tolerated by the float ratio test.
const FLOAT_HARRIS_TOL: f64 = 1e-9;

struct Tableau<T> {
    rows: usize,
    width: usize,
    /// Row-major, `width + 1` entries per row (rhs last).
    a: Vec<T>,
    obj: Vec<T>,
    obj_val: T,
    basis: Vec<usize>,
    bland: bool,
    streak: usize,
    pivots: usize,
}

impl<T: Scalar> Tableau<T> {
    fn stride(&self) -> usize {
        self.width + 1
    }

    fn at(&self, r: usize, c: usize) -> &T {
        &self.a[r * self.stride() + c]
    }

    fn rhs(&self, r: usize) -> &T {
        self.at(r, self.width)
    }

    fn pivot(&mut self, pr: usize, pc: usize) -> Result<()> {
        let stride = self.stride();
        let p = self.at(pr, pc).clone();
        if p.is_zero() {
            return Err(Error::NumericalBreakdown(format!("zero pivot at ({pr}, {pc})")));
        }
        let base = pr * stride;
        let one = T::one();
        if p != one {
            for c in 0..stride {
                let v = &self.a[base + c];
                if !v.is_zero() {
                    self.a[base + c] = v.div(&p);
                }
            }
        }
        // Pivot element is exactly one after scaling.
        self.a[base + pc] = T::one();
        let nz: Vec<(usize, T)> = (0..stride)
            .filter(|&c| !self.a[base + c].is_zero())
            .map(|c| (c, self.a[base + c].clone()))
            .collect();
        for r in 0..self.rows {
            if r == pr {
                continue;
            }
            let f = self.a[r * stride + pc].clone();
            if f.is_zero() {
                continue;
            }
            let rb = r * stride;
            for (c, v) in &nz {
                let cur = &self.a[rb + c];
                self.a[rb + c] = cur.sub(&f.mul(v));
            }
            self.a[rb + pc] = T::zero();
        }
        let f = self.obj[pc].clone();
        if !f.is_zero() {
            for (c, v) in &nz {
                if *c == self.width {
                    // obj_val tracks -z in the usual layout; keep it as z.
                    self.obj_val = self.obj_val.add(&f.mul(v));
                } else {
                    self.obj[*c] = self.obj[*c].sub(&f.mul(v));
                }
            }
            self.obj[pc] = T::zero();
        }
        self.basis[pr] = pc;
        self.pivots += 1;
        Ok(())
    }

    fn ratio_test_exact(&self, pc: usize) -> Option<(usize, T)> {
        let mut leave: Option<(usize, T)> = None;
        for r in 0..self.rows {
            let a = self.at(r, pc);
            if !a.is_positive() {
                continue;
            }
            let ratio = self.rhs(r).div(a);
            leave = match leave {
                None => Some((r, ratio)),
                Some((br, bratio)) => {
                    let better = if ratio.eq_tol(&bratio, 0.0) || (ratio.sub(&bratio)).is_zero() {
                        self.basis[r] < self.basis[br]
                    } else {
                        ratio.le_tol(&bratio, 0.0)
                    };
                    if better {
                        Some((r, ratio))
                    } else {
                        Some((br, bratio))
                    }
                }
            };
        }
        leave
    }

    /// Two-pass (Harris) ratio test: relax the bounds by a small tolerance,
    /// then among rows within the relaxed minimum take the largest pivot.
    fn ratio_test_float(&self, pc: usize) -> Option<(usize, T)> {
        let col: Vec<(usize, f64, f64)> = (0..self.rows)
            .filter_map(|r| {
                let a = self.at(r, pc).to_f64();
                (a > FLOAT_PIVOT_TOL).then(|| (r, a, self.rhs(r).to_f64().max(0.0)))
            })
            .collect();
        if col.is_empty() {
            // Fall back to tiny pivots rather than declare unboundedness.
            return self.ratio_test_exact(pc);
        }
        let bound = col
            .iter()
            .map(|&(_, a, b)| (b + FLOAT_HARRIS_TOL) / a)
            .fold(f64::INFINITY, f64::min);
        let mut best: Option<(usize, f64)> = None;
        for &(r, a, b) in &col {
            if b / a > bound {
                continue;
            }
            let better = match best {
                None => true,
                Some((br, ba)) => a > ba || (a == ba && self.basis[r] < self.basis[br]),
            };
            if better {
                best = Some((r, a));
            }
        }
        best.map(|(r, _)| (r, self.rhs(r).div(self.at(r, pc))))
    }

    /// Runs simplex iterations with columns `< allowed` eligible to enter.
    /// Returns `false` on unboundedness.
    fn optimize(&mut self, allowed: usize, max_pivots: usize) -> Result<bool> {
        loop {
            if self.pivots > max_pivots {
                return Err(Error::NumericalBreakdown(format!(
                    "pivot limit {max_pivots} exceeded"
                )));
            }
            let entering = if self.bland {
                (0..allowed).find(|&c| self.obj[c].is_negative())
            } else {
                let mut best: Option<usize> = None;
                for c in 0..allowed {
                    if self.obj[c].is_negative()
                        && best.map_or(true, |b| self.obj[c].le_tol(&self.obj[b], 0.0) && self.obj[c] != self.obj[b])
                    {
                        best = Some(c);
                    }
                }
                best
            };
            let Some(pc) = entering else {
                return Ok(true);
            };
            let leave = if T::VERIFY_TOL == 0.0 {
                self.ratio_test_exact(pc)
            } else {
                self.ratio_test_float(pc)
            };
            let Some((pr, ratio)) = leave else {
                return Ok(false);
            };
            if ratio.is_zero() {
                self.streak += 1;
                if self.streak >= DEGENERATE_STREAK {
                    self.bland = true;
                }
            } else {
                self.streak = 0;
            }
            self.pivot(pr, pc)?;
        }
    }
}

fn neg_rel(r: Relation) -> Relation {
    match r {
        Relation::Le => Relation::Ge,
        Relation::Ge => Relation::Le,
        Relation::Eq => Relation::Eq,
    }
}

/// Drops duplicate rows and all-zero rows. Returns the kept row indices, or
/// `None` if an all-zero row is violated.
fn presolve(lp: &LinearProgram) -> Option<Vec<usize>> {
    let mut seen: HashMap<(Vec<(usize, Rational)>, Relation, Rational), ()> = HashMap::new();
    let mut keep = Vec::new();
    for (i, c) in lp.constraints.iter().enumerate() {
        let mut coeffs: Vec<(usize, Rational)> =
            c.coeffs.iter().filter(|(_, a)| !a.is_zero()).cloned().collect();
        coeffs.sort_by_key(|(j, _)| *j);
        // Merge repeated variables.
        let mut merged: Vec<(usize, Rational)> = Vec::with_capacity(coeffs.len());
        for (j, a) in coeffs {
            match merged.last_mut() {
                Some((k, b)) if *k == j => *b += a,
                _ => merged.push((j, a)),
            }
        }
        merged.retain(|(_, a)| !a.is_zero());
        if merged.is_empty() {
            let ok = match c.relation {
                Relation::Le => !c.rhs.is_negative(),
                Relation::Ge => !c.rhs.is_positive(),
                Relation::Eq => c.rhs.is_zero(),
            };
            if !ok {
                return None;
            }
            continue;
        }
        if seen.insert((merged, c.relation, c.rhs.clone()), ()).is_none() {
            keep.push(i);
        }
    }
    Some(keep)
}

/// Solves `lp` in the arithmetic of `T`.
pub fn solve<T: Scalar>(lp: &LinearProgram) -> Result<LpSolution<T>> {
    lp.check()?;
    let n = lp.num_vars();
    let infeasible = || LpSolution {
        status: LpStatus::Infeasible,
        primal: Vec::new(),
        dual: Vec::new(),
        objective: T::zero(),
    };
    let Some(kept) = presolve(lp) else {
        return Ok(infeasible());
    };

    // Column layout for structural variables.
    let mut maps = Vec::with_capacity(n);
    let mut ncols = 0usize;
    let mut bound_rows: Vec<(usize, Rational)> = Vec::new();
    for b in &lp.bounds {
        match (&b.lower, &b.upper) {
            (Some(l), u) => {
                if let Some(u) = u {
                    if u < l {
                        return Ok(infeasible());
                    }
                    bound_rows.push((ncols, u - l));
                }
                maps.push(VarMap::Shift {
                    col: ncols,
                    offset: l.clone(),
                });
                ncols += 1;
            }
            (None, Some(u)) => {
                maps.push(VarMap::Flip {
                    col: ncols,
                    offset: u.clone(),
                });
                ncols += 1;
            }
            (None, None) => {
                maps.push(VarMap::Split {
                    pos: ncols,
                    neg: ncols + 1,
                });
                ncols += 2;
            }
        }
    }

    // Standard-form rows over structural columns: (coeffs, relation, rhs, origin).
    // origin = Some(i) for constraint i, None for a bound row.
    struct Row {
        coeffs: Vec<(usize, Rational)>,
        rel: Relation,
        rhs: Rational,
        origin: Option<usize>,
    }
    let mut rows: Vec<Row> = Vec::new();
    for &i in &kept {
        let c = &lp.constraints[i];
        let mut rhs = c.rhs.clone();
        let mut coeffs = Vec::with_capacity(c.coeffs.len());
        for (j, a) in &c.coeffs {
            if a.is_zero() {
                continue;
            }
            match &maps[*j] {
                VarMap::Shift { col, offset } => {
                    rhs -= a * offset;
                    coeffs.push((*col, a.clone()));
                }
                VarMap::Flip { col, offset } => {
                    rhs -= a * offset;
                    coeffs.push((*col, -a));
                }
                VarMap::Split { pos, neg } => {
                    coeffs.push((*pos, a.clone()));
                    coeffs.push((*neg, -a));
                }
            }
        }
        rows.push(Row {
            coeffs,
            rel: c.relation,
            rhs,
            origin: Some(i),
        });
    }
    for (col, width) in bound_rows {
        rows.push(Row {
            coeffs: vec![(col, Rational::one())],
            rel: Relation::Le,
            rhs: width,
            origin: None,
        });
    }

    let nrows = rows.len();
    let nslack = rows.iter().filter(|r| r.rel != Relation::Eq).count();
    // Normalize signs and choose the initial basic column of every row.
    let mut sign = vec![false; nrows]; // true if the row was negated
    let mut slack_col = vec![None; nrows];
    let mut next_slack = ncols;
    for (r, row) in rows.iter_mut().enumerate() {
        if row.rel != Relation::Eq {
            slack_col[r] = Some(next_slack);
            next_slack += 1;
        }
        if row.rhs.is_negative() {
            sign[r] = true;
            row.rhs = -&row.rhs;
            for (_, a) in row.coeffs.iter_mut() {
                *a = -&*a;
            }
            row.rel = neg_rel(row.rel);
        }
    }
    let n_struct = ncols + nslack;
    let mut art_col = vec![None; nrows];
    let mut next_art = n_struct;
    for (r, row) in rows.iter().enumerate() {
        // A slack with coefficient +1 after normalization starts basic.
        let slack_ok = row.rel == Relation::Le;
        if !slack_ok {
            art_col[r] = Some(next_art);
            next_art += 1;
        }
    }
    let width = next_art;
    let stride = width + 1;
    let mut a = vec![T::zero(); nrows * stride];
    let mut basis = vec![0usize; nrows];
    for (r, row) in rows.iter().enumerate() {
        for (c, v) in &row.coeffs {
            let cell = &mut a[r * stride + c];
            *cell = cell.add(&T::from_rational(v));
        }
        if let Some(s) = slack_col[r] {
            // Slack sign in the normalized row: +1 for <=, -1 for >=.
            a[r * stride + s] = if row.rel == Relation::Le { T::one() } else { T::one().neg() };
        }
        if let Some(ac) = art_col[r] {
            a[r * stride + ac] = T::one();
            basis[r] = ac;
        } else {
            basis[r] = slack_col[r].expect("<= row has a slack");
        }
        a[r * stride + width] = T::from_rational(&row.rhs);
    }
    let init_col: Vec<usize> = basis.clone();

    let mut t = Tableau {
        rows: nrows,
        width,
        a,
        obj: vec![T::zero(); width],
        obj_val: T::zero(),
        basis,
        bland: false,
        streak: 0,
        pivots: 0,
    };
    let max_pivots = 50 * (nrows + width) + 1000;

    // Phase 1: minimize the sum of artificials.
    if art_col.iter().any(Option::is_some) {
        for r in 0..nrows {
            if art_col[r].is_some() {
                for c in 0..n_struct {
                    let v = t.at(r, c).clone();
                    if !v.is_zero() {
                        t.obj[c] = t.obj[c].sub(&v);
                    }
                }
                t.obj_val = t.obj_val.add(t.rhs(r));
            }
        }
        t.optimize(n_struct, max_pivots)?;
        // obj_val holds the current phase-1 objective value.
        if t.obj_val.is_positive() {
            return Ok(infeasible());
        }
        // Drive remaining artificials out where possible.
        for r in 0..nrows {
            if t.basis[r] >= n_struct {
                if let Some(c) = (0..n_struct).find(|&c| !t.at(r, c).is_zero()) {
                    t.pivot(r, c)?;
                }
            }
        }
    }

    // Phase 2.
    let minimize = lp.sense == Sense::Minimize;
    let mut cost = vec![T::zero(); width];
    for (j, m) in maps.iter().enumerate() {
        let c = T::from_rational(&lp.objective[j]);
        let c = if minimize { c } else { c.neg() };
        match m {
            VarMap::Shift { col, .. } => cost[*col] = c,
            VarMap::Flip { col, .. } => cost[*col] = c.neg(),
            VarMap::Split { pos, neg } => {
                cost[*neg] = c.neg();
                cost[*pos] = c;
            }
        }
    }
    t.obj = cost.clone();
    t.obj_val = T::zero();
    for r in 0..nrows {
        let cb = cost[t.basis[r]].clone();
        if cb.is_zero() {
            continue;
        }
        for c in 0..width {
            let v = t.at(r, c).clone();
            if !v.is_zero() {
                t.obj[c] = t.obj[c].sub(&cb.mul(&v));
            }
        }
        t.obj_val = t.obj_val.add(&cb.mul(t.rhs(r)));
    }
    t.streak = 0;
    if !t.optimize(n_struct, max_pivots)? {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            primal: Vec::new(),
            dual: Vec::new(),
            objective: T::zero(),
        });
    }

    // Primal values.
    let mut std_x = vec![T::zero(); width];
    for r in 0..nrows {
        std_x[t.basis[r]] = t.rhs(r).clone();
    }
    let primal: Vec<T> = maps
        .iter()
        .map(|m| match m {
            VarMap::Shift { col, offset } => T::from_rational(offset).add(&std_x[*col]),
            VarMap::Flip { col, offset } => T::from_rational(offset).sub(&std_x[*col]),
            VarMap::Split { pos, neg } => std_x[*pos].sub(&std_x[*neg]),
        })
        .collect();

    // Duals: y_r = c_init - d_init with zero cost on slack/artificial columns.
    let mut dual = vec![T::zero(); lp.constraints.len()];
    for (r, row) in rows.iter().enumerate() {
        let Some(i) = row.origin else { continue };
        let col = init_col[r];
        // The initial column has coefficient +1 in the normalized row.
        let mut y = t.obj[col].neg();
        if sign[r] {
            y = y.neg();
        }
        if !minimize {
            y = y.neg();
        }
        dual[i] = y;
    }

    let objective = T::sum(
        primal
            .iter()
            .zip(&lp.objective)
            .map(|(x, c)| x.mul(&T::from_rational(c)))
            .collect::<Vec<_>>()
            .iter(),
    );
    Ok(LpSolution {
        status: LpStatus::Optimal,
        primal,
        dual,
        objective,
    })
}

/// Dispatches on `mode`, returning the solution in `f64` for reporting.
pub fn solve_lp(lp: &LinearProgram, mode: SolveMode) -> Result<LpSolution<f64>> {
    match mode {
        SolveMode::Float => solve::<f64>(lp),
        SolveMode::Exact => {
            let s = solve::<Rational>(lp)?;
            Ok(LpSolution {
                status: s.status,
                primal: s.primal.iter().map(Rational::to_f64).collect(),
                dual: s.dual.iter().map(Rational::to_f64).collect(),
                objective: s.objective.to_f64(),
            })
        }
    }
}

/// Independent certificate check of an optimal solution: primal
/// feasibility, dual sign conditions, complementary slackness and equality
/// of primal and dual objectives. Exact for rationals, `1e-7` for floats.
pub fn verify_solution<T: Scalar>(lp: &LinearProgram, sol: &LpSolution<T>) -> bool {
    if sol.status != LpStatus::Optimal
        || sol.primal.len() != lp.num_vars()
        || sol.dual.len() != lp.constraints.len()
    {
        return false;
    }
    let tol = T::VERIFY_TOL;
    let x = &sol.primal;
    let flip = lp.sense == Sense::Maximize;
    let conv = |r: &Rational| T::from_rational(r);

    // Primal feasibility.
    for (j, b) in lp.bounds.iter().enumerate() {
        if let Some(l) = &b.lower {
            if !conv(l).le_tol(&x[j], tol) {
                return false;
            }
        }
        if let Some(u) = &b.upper {
            if !x[j].le_tol(&conv(u), tol) {
                return false;
            }
        }
    }
    let mut activity = Vec::with_capacity(lp.constraints.len());
    for c in &lp.constraints {
        let ax = T::sum(
            c.coeffs
                .iter()
                .map(|(j, a)| conv(a).mul(&x[*j]))
                .collect::<Vec<_>>()
                .iter(),
        );
        let rhs = conv(&c.rhs);
        let ok = match c.relation {
            Relation::Le => ax.le_tol(&rhs, tol),
            Relation::Ge => rhs.le_tol(&ax, tol),
            Relation::Eq => ax.eq_tol(&rhs, tol),
        };
        if !ok {
            return false;
        }
        activity.push(ax);
    }

    // Work in minimization terms: y' = -y, c' = -c when maximizing.
    let y: Vec<T> = sol.dual.iter().map(|v| if flip { v.neg() } else { v.clone() }).collect();
    let zero = T::zero();
    for ((c, yi), ax) in lp.constraints.iter().zip(&y).zip(&activity) {
        let sign_ok = match c.relation {
            Relation::Le => yi.le_tol(&zero, tol),
            Relation::Ge => zero.le_tol(yi, tol),
            Relation::Eq => true,
        };
        if !sign_ok {
            return false;
        }
        if !yi.eq_tol(&zero, tol) && !ax.eq_tol(&conv(&c.rhs), tol) {
            return false;
        }
    }
    let mut reduced: Vec<T> = lp
        .objective
        .iter()
        .map(|c| if flip { conv(c).neg() } else { conv(c) })
        .collect();
    for (c, yi) in lp.constraints.iter().zip(&y) {
        if yi.is_zero() && tol == 0.0 {
            continue;
        }
        for (j, a) in &c.coeffs {
            reduced[*j] = reduced[*j].sub(&conv(a).mul(yi));
        }
    }
    // Dual objective b^T y + bound terms.
    let mut dual_obj = T::sum(
        lp.constraints
            .iter()
            .zip(&y)
            .map(|(c, yi)| conv(&c.rhs).mul(yi))
            .collect::<Vec<_>>()
            .iter(),
    );
    for (j, d) in reduced.iter().enumerate() {
        let b = &lp.bounds[j];
        if d.eq_tol(&zero, tol) {
            continue;
        }
        if zero.le_tol(d, 0.0) {
            // d > 0: x_j must sit at a finite lower bound.
            let Some(l) = &b.lower else { return false };
            if !x[j].eq_tol(&conv(l), tol) {
                return false;
            }
            dual_obj = dual_obj.add(&conv(l).mul(d));
        } else {
            let Some(u) = &b.upper else { return false };
            if !x[j].eq_tol(&conv(u), tol) {
                return false;
            }
            dual_obj = dual_obj.add(&conv(u).mul(d));
        }
    }
    let primal_obj = T::sum(
        lp.objective
            .iter()
            .zip(x)
            .map(|(c, xj)| {
                let c = conv(c);
                let c = if flip { c.neg() } else { c };
                c.mul(xj)
            })
            .collect::<Vec<_>>()
            .iter(),
    );
    let reported = if flip { sol.objective.neg() } else { sol.objective.clone() };
    primal_obj.eq_tol(&dual_obj, tol) && primal_obj.eq_tol(&reported, tol)
}

/// Convenience: solve and require optimality.
pub fn solve_optimal<T: Scalar>(lp: &LinearProgram) -> Result<LpSolution<T>> {
    let sol = solve::<T>(lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::LpFailure(sol.status));
    }
    Ok(sol)
}

/// Brute-force reference solver for tiny LPs: every variable without a
/// finite bound is boxed to `[-big, big]`, all vertices of the boxed
/// polyhedron are enumerated, and the problem counts as unbounded when the
/// boxed optimum moves as the box grows from `big` to `2 big`.
pub fn solve_by_vertex_enumeration(lp: &LinearProgram, big: &Rational) -> (LpStatus, Option<Rational>) {
    let small = boxed_vertex_optimum(lp, big);
    let large = boxed_vertex_optimum(lp, &(big * &Rational::from_integer(2)));
    match (small, large) {
        (None, _) | (_, None) => (LpStatus::Infeasible, None),
        (Some(a), Some(b)) if a == b => (LpStatus::Optimal, Some(a)),
        _ => (LpStatus::Unbounded, None),
    }
}

fn boxed_vertex_optimum(lp: &LinearProgram, big: &Rational) -> Option<Rational> {
    use crate::exactnum::RationalMatrix;
    let n = lp.num_vars();
    // Hyperplanes a^T x = r with the inequality they come from.
    let mut planes: Vec<(Vec<Rational>, Rational)> = Vec::new();
    let mut rows: Vec<(Vec<Rational>, Relation, Rational)> = Vec::new();
    for c in &lp.constraints {
        let mut a = vec![Rational::zero(); n];
        for (j, v) in &c.coeffs {
            a[*j] += v;
        }
        rows.push((a, c.relation, c.rhs.clone()));
    }
    for (j, b) in lp.bounds.iter().enumerate() {
        let mut e = vec![Rational::zero(); n];
        e[j] = Rational::one();
        let lo = b.lower.clone().unwrap_or_else(|| -big);
        let hi = b.upper.clone().unwrap_or_else(|| big.clone());
        rows.push((e.clone(), Relation::Ge, lo));
        rows.push((e, Relation::Le, hi));
    }
    for (a, _, r) in &rows {
        planes.push((a.clone(), r.clone()));
    }
    let feasible = |x: &[Rational]| {
        rows.iter().all(|(a, rel, r)| {
            let v: Rational = a.iter().zip(x).map(|(p, q)| p * q).sum();
            match rel {
                Relation::Le => v <= *r,
                Relation::Ge => v >= *r,
                Relation::Eq => v == *r,
            }
        })
    };
    let flip = lp.sense == Sense::Maximize;
    let mut best: Option<Rational> = None;
    let mut pick = Vec::with_capacity(n);
    fn choose(k: usize, start: usize, total: usize, pick: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if pick.len() == k {
            f(pick);
            return;
        }
        for i in start..total {
            pick.push(i);
            choose(k, i + 1, total, pick, f);
            pick.pop();
        }
    }
    choose(n, 0, planes.len(), &mut pick, &mut |idx| {
        let a = RationalMatrix::from_fn(n, n, |r, c| planes[idx[r]].0[c].clone());
        if a.rank() < n {
            return;
        }
        let rhs: Vec<Rational> = idx.iter().map(|&i| planes[i].1.clone()).collect();
        let Some(x) = a.solve(&rhs) else { return };
        if !feasible(&x) {
            return;
        }
        let v: Rational = lp.objective.iter().zip(&x).map(|(c, xi)| c * xi).sum();
        let better = match &best {
            None => true,
            Some(b) => (flip && v > *b) || (!flip && v < *b),
        };
        if better {
            best = Some(v);
        }
    });
    best
}

/// Random LP with `1..=max_vars` variables and `0..=max_rows` constraints,
/// small integer data and a mix of variable bound types.
pub fn random_small_lp<R: rand::Rng + ?Sized>(rng: &mut R, max_vars: usize, max_rows: usize) -> LinearProgram {
    let sense = if rng.gen_bool(0.5) { Sense::Minimize } else { Sense::Maximize };
    let mut lp = LinearProgram::new(sense);
    let n = rng.gen_range(1..=max_vars);
    for _ in 0..n {
        let bounds = match rng.gen_range(0..4) {
            0 => VarBounds::non_negative(),
            1 => VarBounds::free(),
            2 => {
                let lo = rng.gen_range(-4..=2);
                VarBounds::boxed(Rational::from_integer(lo), Rational::from_integer(lo + rng.gen_range(0..=5)))
            }
            _ => VarBounds {
                lower: None,
                upper: Some(Rational::from_integer(rng.gen_range(-3..=3))),
            },
        };
        lp.add_var(Rational::from_integer(rng.gen_range(-5..=5)), bounds);
    }
    for _ in 0..rng.gen_range(0..=max_rows) {
        let mut coeffs = Vec::new();
        for j in 0..n {
            if rng.gen_bool(0.7) {
                coeffs.push((j, Rational::from_integer(rng.gen_range(-5..=5))));
            }
        }
        let relation = match rng.gen_range(0..5) {
            0 => Relation::Eq,
            1 | 2 => Relation::Le,
            _ => Relation::Ge,
        };
        lp.add_constraint(coeffs, relation, Rational::from_integer(rng.gen_range(-10..=10)));
    }
    lp
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Rational {
        Rational::from_integer(n)
    }

    fn lp_min_neg_x(upper: Option<i64>) -> LinearProgram {
        let mut lp = LinearProgram::new(Sense::Minimize);
        lp.add_var(q(-1), VarBounds::non_negative());
        if let Some(u) = upper {
            lp.add_constraint(vec![(0, q(1))], Relation::Le, q(u));
        }
        lp
    }

    #[test]
    fn bounded_optimum() {
        let lp = lp_min_neg_x(Some(1));
        let s = solve::<Rational>(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(s.primal, vec![q(1)]);
        assert_eq!(s.objective, q(-1));
        assert!(verify_solution(&lp, &s));
        let f = solve::<f64>(&lp).unwrap();
        assert!((f.objective + 1.0).abs() < 1e-12);
        assert!(verify_solution(&lp, &f));
    }

    #[test]
    fn infeasible() {
        let mut lp = LinearProgram::new(Sense::Minimize);
        lp.add_var(q(0), VarBounds::non_negative());
        lp.add_constraint(vec![(0, q(1))], Relation::Le, q(-1));
        assert_eq!(solve::<Rational>(&lp).unwrap().status, LpStatus::Infeasible);
        assert_eq!(solve::<f64>(&lp).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded() {
        let lp = lp_min_neg_x(None);
        assert_eq!(solve::<Rational>(&lp).unwrap().status, LpStatus::Unbounded);
        assert!(matches!(solve_optimal::<Rational>(&lp), Err(Error::LpFailure(LpStatus::Unbounded))));
    }

    #[test]
    fn perturbed_primal_fails_verification() {
        let lp = lp_min_neg_x(Some(1));
        let mut s = solve::<Rational>(&lp).unwrap();
        s.primal[0] = Rational::new(1, 2);
        assert!(!verify_solution(&lp, &s));
        let mut f = solve::<f64>(&lp).unwrap();
        f.primal[0] = 0.9;
        assert!(!verify_solution(&lp, &f));
    }

    #[test]
    fn maximize_with_free_and_equality() {
        // max x + 2y  s.t. x + y = 4, y <= 3, x free, y >= 0  -> x=1, y=3, 7
        let mut lp = LinearProgram::new(Sense::Maximize);
        lp.add_var(q(1), VarBounds::free());
        lp.add_var(q(2), VarBounds::non_negative());
        lp.add_constraint(vec![(0, q(1)), (1, q(1))], Relation::Eq, q(4));
        lp.add_constraint(vec![(1, q(1))], Relation::Le, q(3));
        let s = solve::<Rational>(&lp).unwrap();
        assert_eq!(s.objective, q(7));
        assert_eq!(s.primal, vec![q(1), q(3)]);
        assert!(verify_solution(&lp, &s));
    }

    #[test]
    fn redundant_and_duplicate_rows() {
        // Two identical equalities plus their sum.
        let mut lp = LinearProgram::new(Sense::Minimize);
        lp.add_var(q(1), VarBounds::non_negative());
        lp.add_var(q(2), VarBounds::non_negative());
        lp.add_constraint(vec![(0, q(1)), (1, q(1))], Relation::Eq, q(2));
        lp.add_constraint(vec![(0, q(1)), (1, q(1))], Relation::Eq, q(2));
        lp.add_constraint(vec![(0, q(2)), (1, q(2))], Relation::Eq, q(4));
        lp.add_constraint(vec![(0, q(0))], Relation::Le, q(1));
        let s = solve::<Rational>(&lp).unwrap();
        assert_eq!(s.objective, q(2));
        assert!(verify_solution(&lp, &s));
    }

    #[test]
    fn upper_and_flipped_bounds() {
        // min x - y, -1 <= x <= 2, y <= 5 (no lower) with x + y >= 1
        let mut lp = LinearProgram::new(Sense::Minimize);
        lp.add_var(q(1), VarBounds::boxed(q(-1), q(2)));
        lp.add_var(q(-1), VarBounds { lower: None, upper: Some(q(5)) });
        lp.add_constraint(vec![(0, q(1)), (1, q(1))], Relation::Ge, q(1));
        let s = solve::<Rational>(&lp).unwrap();
        assert_eq!(s.objective, q(-6));
        assert!(verify_solution(&lp, &s));
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's classic cycling LP (with Dantzig + lexicographic ties it cycles).
        let mut lp = LinearProgram::new(Sense::Minimize);
        let c = [Rational::new(-3, 4), q(150), Rational::new(-1, 50), q(6)];
        for ci in c {
            lp.add_var(ci, VarBounds::non_negative());
        }
        lp.add_constraint(
            vec![(0, Rational::new(1, 4)), (1, q(-60)), (2, Rational::new(-1, 25)), (3, q(9))],
            Relation::Le,
            q(0),
        );
        lp.add_constraint(
            vec![(0, Rational::new(1, 2)), (1, q(-90)), (2, Rational::new(-1, 50)), (3, q(3))],
            Relation::Le,
            q(0),
        );
        lp.add_constraint(vec![(2, q(1))], Relation::Le, q(1));
        let s = solve::<Rational>(&lp).unwrap();
        assert_eq!(s.objective, Rational::new(-1, 20));
        assert!(verify_solution(&lp, &s));
    }
}
