//! Linearization-based lower bounds for binary quadratic programs.
//!
//! Every bound is the optimum of one or more linear programs solved in the
//! arithmetic of a [`Scalar`] type, so the same code yields exact rational
//! bounds or floating-point ones. Reports carry a certificate that
//! [`verify_certificate`] re-checks independently of the solver.
//!
//! On a common instance the bounds satisfy
//! `GL <= GGL <= LBB' = RLT1 <= LBB* <= OPT`; [`verify_chain`] checks it.

mod gl;
mod lbb;

use std::collections::BTreeSet;
use std::fmt;

pub use gl::{ggl_bound, gl_bound, GGL_DEFAULT_MAX_ITER, GGL_FLOAT_TOL};
pub use lbb::{
    lbb_augmented, lbb_generic, lbb_prime, lbb_star, linearizable_family_by_enumeration, reduce_family, rlt1,
    RltForm,
};

use crate::error::{Error, Result};
use crate::exactnum::{Rational, RationalMatrix, Scalar};
use crate::lp::{self, LinearProgram, LpSolution};
use crate::model::{BqpInstance, LinearizableFamily};

/// Row-major dense matrix over a scalar type.
pub type DenseMatrix<T> = Vec<Vec<T>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundMethod {
    Gl,
    Ggl,
    LbbPrime,
    Rlt1,
    LbbGeneric,
    LbbStar,
}

impl BoundMethod {
    pub fn name(self) -> &'static str {
        match self {
            BoundMethod::Gl => "GL",
            BoundMethod::Ggl => "GGL",
            BoundMethod::LbbPrime => "LBB'",
            BoundMethod::Rlt1 => "RLT1",
            BoundMethod::LbbGeneric => "LBBGeneric",
            BoundMethod::LbbStar => "LBB*",
        }
    }
}

impl fmt::Display for BoundMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Skew-symmetric reformulation applied between GGL iterations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SkewStrategy {
    /// Move every strictly lower entry onto its transpose position.
    UpperTriangular,
    /// Replace the matrix by its symmetric part.
    Symmetrize,
    None,
}

impl SkewStrategy {
    pub fn name(self) -> &'static str {
        match self {
            SkewStrategy::UpperTriangular => "upper",
            SkewStrategy::Symmetrize => "sym",
            SkewStrategy::None => "none",
        }
    }

    /// The skew-symmetric `S` for the working matrix `q`.
    pub fn skew<T: Scalar>(self, q: &DenseMatrix<T>) -> DenseMatrix<T> {
        let m = q.len();
        let mut s = vec![vec![T::zero(); m]; m];
        match self {
            SkewStrategy::None => {}
            SkewStrategy::UpperTriangular => {
                for i in 0..m {
                    for j in i + 1..m {
                        s[i][j] = q[j][i].clone();
                        s[j][i] = q[j][i].neg();
                    }
                }
            }
            SkewStrategy::Symmetrize => {
                let half = T::from_rational(&Rational::new(1, 2));
                for i in 0..m {
                    for j in 0..m {
                        if i != j {
                            s[i][j] = q[j][i].sub(&q[i][j]).mul(&half);
                        }
                    }
                }
            }
        }
        s
    }
}

/// Dual values of one Gilmore-Lawler round: `Ybar` (rows x m), `zbar` and
/// the resulting linear costs `cbar = Ybar^T b + zbar`.
#[derive(Debug, Clone, PartialEq)]
pub struct GlIterate<T> {
    pub y_bar: DenseMatrix<T>,
    pub z_bar: Vec<T>,
    pub c_bar: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Certificate<T> {
    /// Accumulated `c`, per-round duals and the final LP pair: `x` attains
    /// `min (c + l)^T x` over `{Bx = b, x >= 0}` and `y` is its dual.
    GilmoreLawler {
        c: Vec<T>,
        iterates: Vec<GlIterate<T>>,
        x: Vec<T>,
        y: Vec<T>,
    },
    /// A feasible point of the linearization LP. `family` holds the
    /// symmetrized members the `alpha` weights refer to; `forbidden` the
    /// pairs whose elementwise rows were dropped.
    Lbb {
        y: Vec<T>,
        big_y: DenseMatrix<T>,
        z: Vec<T>,
        alpha: Vec<T>,
        family: LinearizableFamily,
        forbidden: Vec<(usize, usize)>,
    },
    /// Primal point of the RLT relaxation.
    Rlt {
        x: Vec<T>,
        big_x: DenseMatrix<T>,
        forbidden: Vec<(usize, usize)>,
    },
    /// `(alpha, y)` for the generic relaxation over `family`.
    Generic {
        y: Vec<T>,
        alpha: Vec<T>,
        family: LinearizableFamily,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport<T> {
    pub method: BoundMethod,
    /// Method plus variant, e.g. `GGL(sym)` or `LBB'+sparsity`.
    pub label: String,
    pub value: T,
    /// Set when the polytope `{Bx = b, x >= 0}` is not known to be integral,
    /// so GL-type values bound the LP relaxation only.
    pub lp_relaxation_only: bool,
    pub sparsity: bool,
    pub certificate: Certificate<T>,
    /// Partial bounds after each GGL round.
    pub trace: Vec<T>,
    pub lp_solves: usize,
}

pub(crate) fn conv<T: Scalar>(r: &Rational) -> T {
    T::from_rational(r)
}

/// Solves and checks the certificate of an LP that must be optimal.
pub(crate) fn solve_checked<T: Scalar>(lp: &LinearProgram) -> Result<LpSolution<T>> {
    let sol = lp::solve_optimal::<T>(lp)?;
    if !lp::verify_solution(lp, &sol) {
        return Err(Error::NumericalBreakdown(format!(
            "{} LP solution failed its optimality check",
            T::MODE
        )));
    }
    Ok(sol)
}

/// Valid forbidden pairs of `inst` if requested.
pub fn sparsity_set(inst: &BqpInstance, enabled: bool) -> BTreeSet<(usize, usize)> {
    if enabled {
        inst.forbidden_pairs()
    } else {
        BTreeSet::new()
    }
}

fn tol_for<T: Scalar>() -> f64 {
    if T::VERIFY_TOL == 0.0 {
        0.0
    } else {
        T::VERIFY_TOL
    }
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc.add(&x.mul(y)))
}

/// `B^T y` with rational `B`.
fn bt_times<T: Scalar>(b: &RationalMatrix, y: &[T]) -> Vec<T> {
    (0..b.cols())
        .map(|j| {
            (0..b.rows()).fold(T::zero(), |acc, r| {
                let a = &b[(r, j)];
                if a.is_zero() {
                    acc
                } else {
                    acc.add(&conv::<T>(a).mul(&y[r]))
                }
            })
        })
        .collect()
}

/// `(B^T Y)_{ij} = sum_r B_ri Y_rj`.
fn bt_y<T: Scalar>(b: &RationalMatrix, y: &DenseMatrix<T>) -> DenseMatrix<T> {
    let m = b.cols();
    (0..m)
        .map(|i| {
            (0..m)
                .map(|j| {
                    (0..b.rows()).fold(T::zero(), |acc, r| {
                        let a = &b[(r, i)];
                        if a.is_zero() {
                            acc
                        } else {
                            acc.add(&conv::<T>(a).mul(&y[r][j]))
                        }
                    })
                })
                .collect()
        })
        .collect()
}

/// Re-checks a report's certificate against the instance: feasibility of
/// the stored point and agreement of its objective with the reported value.
/// Exact for rationals, `1e-7` relative for floats.
pub fn verify_certificate<T: Scalar>(inst: &BqpInstance, report: &BoundReport<T>) -> bool {
    let tol = tol_for::<T>();
    let m = inst.m();
    let b_mat = &inst.constraints;
    let b: Vec<T> = inst.rhs.iter().map(conv).collect();
    let ell: Vec<T> = inst.linear.iter().map(conv).collect();
    let zero = T::zero();
    match &report.certificate {
        Certificate::GilmoreLawler { c, iterates, x, y } => {
            let mut acc = vec![T::zero(); m];
            for it in iterates {
                for k in 0..m {
                    let col: Vec<T> = it.y_bar.iter().map(|row| row[k].clone()).collect();
                    let ck = dot(&col, &b).add(&it.z_bar[k]);
                    if !ck.eq_tol(&it.c_bar[k], tol) {
                        return false;
                    }
                    acc[k] = acc[k].add(&it.c_bar[k]);
                }
            }
            if acc.iter().zip(c).any(|(a, ci)| !a.eq_tol(ci, tol)) {
                return false;
            }
            let cost: Vec<T> = c.iter().zip(&ell).map(|(a, l)| a.add(l)).collect();
            let bx: Vec<T> = (0..inst.rows())
                .map(|r| (0..m).fold(T::zero(), |s, j| s.add(&conv::<T>(&b_mat[(r, j)]).mul(&x[j]))))
                .collect();
            let primal_ok = x.iter().all(|v| zero.le_tol(v, tol)) && bx.iter().zip(&b).all(|(p, q)| p.eq_tol(q, tol));
            let bty = bt_times(b_mat, y);
            let dual_ok = bty.iter().zip(&cost).all(|(p, q)| p.le_tol(q, tol));
            primal_ok
                && dual_ok
                && dot(&cost, x).eq_tol(&report.value, tol)
                && dot(&b, y).eq_tol(&report.value, tol)
        }
        Certificate::Lbb {
            y,
            big_y,
            z,
            alpha,
            family,
            forbidden,
        } => {
            let sq = inst.cost.symmetric_part();
            let bty = bt_y(b_mat, big_y);
            for i in 0..m {
                for j in i..m {
                    if forbidden.contains(&(i, j)) {
                        continue;
                    }
                    let mut lhs = bty[i][j].add(&bty[j][i]);
                    if i == j {
                        lhs = lhs.add(&z[i]);
                    }
                    for (k, (qk, _)) in family.members.iter().enumerate() {
                        let q = &qk[(i, j)];
                        if !q.is_zero() {
                            lhs = lhs.add(&alpha[k].mul(&conv(q)));
                        }
                    }
                    if !lhs.le_tol(&conv(&sq[(i, j)]), tol) {
                        return false;
                    }
                }
            }
            let btyv = bt_times(b_mat, y);
            for j in 0..m {
                let col: Vec<T> = big_y.iter().map(|row| row[j].clone()).collect();
                let mut rhs = dot(&col, &b).mul(&T::from_i64(2)).add(&z[j]).add(&ell[j]);
                for (k, (_, ck)) in family.members.iter().enumerate() {
                    rhs = rhs.add(&alpha[k].mul(&conv(&ck[j])));
                }
                if !btyv[j].le_tol(&rhs, tol) {
                    return false;
                }
            }
            dot(&b, y).eq_tol(&report.value, tol)
        }
        Certificate::Rlt { x, big_x, forbidden } => {
            let sq = inst.cost.symmetric_part();
            for i in 0..m {
                if !big_x[i][i].eq_tol(&x[i], tol) {
                    return false;
                }
                for j in 0..m {
                    if !zero.le_tol(&big_x[i][j], tol) {
                        return false;
                    }
                    let (a, c) = (i.min(j), i.max(j));
                    if a != c && forbidden.contains(&(a, c)) && !big_x[i][j].eq_tol(&zero, tol) {
                        return false;
                    }
                }
            }
            for r in 0..inst.rows() {
                let bx = (0..m).fold(T::zero(), |s, j| s.add(&conv::<T>(&b_mat[(r, j)]).mul(&x[j])));
                if !bx.eq_tol(&b[r], tol) {
                    return false;
                }
                // (BX + BX^T)_rj = 2 b_r x_j covers both formulations.
                for j in 0..m {
                    let mut lhs = T::zero();
                    for k in 0..m {
                        let a = &b_mat[(r, k)];
                        if !a.is_zero() {
                            lhs = lhs.add(&conv::<T>(a).mul(&big_x[k][j].add(&big_x[j][k])));
                        }
                    }
                    if !lhs.eq_tol(&T::from_i64(2).mul(&b[r]).mul(&x[j]), tol) {
                        return false;
                    }
                }
            }
            let mut obj = dot(&ell, x);
            for i in 0..m {
                for j in 0..m {
                    let q = &sq[(i, j)];
                    if !q.is_zero() {
                        obj = obj.add(&conv::<T>(q).mul(&big_x[i][j]));
                    }
                }
            }
            obj.eq_tol(&report.value, tol)
        }
        Certificate::Generic { y, alpha, family } => {
            for i in 0..m {
                for j in 0..m {
                    let mut lhs = T::zero();
                    for (k, (qk, _)) in family.members.iter().enumerate() {
                        lhs = lhs.add(&alpha[k].mul(&conv(&qk[(i, j)])));
                    }
                    if !lhs.le_tol(&conv(&inst.cost[(i, j)]), tol) {
                        return false;
                    }
                }
            }
            let btyv = bt_times(b_mat, y);
            for j in 0..m {
                let mut rhs = ell[j].clone();
                for (k, (_, ck)) in family.members.iter().enumerate() {
                    rhs = rhs.add(&alpha[k].mul(&conv(&ck[j])));
                }
                if !btyv[j].le_tol(&rhs, tol) {
                    return false;
                }
            }
            dot(&b, y).eq_tol(&report.value, tol)
        }
    }
}

/// Values in chain order with the verdict of each comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainCheck<T> {
    pub values: Vec<(String, T)>,
    pub comparisons: Vec<String>,
    /// Whether LBB' and RLT1 agree (exactly in rational mode).
    pub lbb_rlt_equal: Option<bool>,
}

/// Checks `GL <= GGL <= LBB' = RLT1 <= LBB* <= opt` for whatever subset of
/// methods is present (reports of the same sparsity setting are compared).
/// Exact in rational mode, `1e-6` relative in float mode.
pub fn verify_chain<T: Scalar>(reports: &[BoundReport<T>], opt: Option<&T>) -> Result<ChainCheck<T>> {
    let tol = if T::VERIFY_TOL == 0.0 { 0.0 } else { 1e-6 };
    let mut comparisons = Vec::new();
    let le = |a: &BoundReport<T>, b: &BoundReport<T>, comparisons: &mut Vec<String>| -> Result<()> {
        if a.value.le_tol(&b.value, tol) {
            comparisons.push(format!("{} <= {}", a.label, b.label));
            Ok(())
        } else {
            Err(Error::ChainViolation(format!(
                "{} = {} exceeds {} = {}",
                a.label,
                a.value.to_report_string(),
                b.label,
                b.value.to_report_string()
            )))
        }
    };
    let by = |m: BoundMethod, sparse: bool| -> Vec<&BoundReport<T>> {
        reports.iter().filter(|r| r.method == m && r.sparsity == sparse).collect()
    };
    let mut lbb_rlt_equal = None;
    for sparse in [false, true] {
        let gl = by(BoundMethod::Gl, sparse);
        let ggl = by(BoundMethod::Ggl, sparse);
        let lbbp = by(BoundMethod::LbbPrime, sparse);
        let rlt = by(BoundMethod::Rlt1, sparse);
        let star = by(BoundMethod::LbbStar, sparse);
        for a in &gl {
            for b in &ggl {
                le(a, b, &mut comparisons)?;
            }
        }
        let lower: Vec<&&BoundReport<T>> = if ggl.is_empty() { gl.iter().collect() } else { ggl.iter().collect() };
        for a in &lower {
            for b in lbbp.iter().chain(rlt.iter()) {
                le(a, b, &mut comparisons)?;
            }
        }
        for a in &lbbp {
            for b in &rlt {
                let equal = a.value.eq_tol(&b.value, tol);
                if !equal {
                    return Err(Error::ChainViolation(format!(
                        "{} = {} differs from {} = {}",
                        a.label,
                        a.value.to_report_string(),
                        b.label,
                        b.value.to_report_string()
                    )));
                }
                comparisons.push(format!("{} = {}", a.label, b.label));
                lbb_rlt_equal = Some(lbb_rlt_equal.unwrap_or(true) && equal);
            }
        }
        for a in lbbp.iter().chain(rlt.iter()) {
            for b in &star {
                le(a, b, &mut comparisons)?;
            }
        }
    }
    // Sparsity only adds strength.
    for m in [BoundMethod::LbbPrime, BoundMethod::Rlt1] {
        for a in by(m, false) {
            for b in by(m, true) {
                le(a, b, &mut comparisons)?;
            }
        }
    }
    if let Some(opt) = opt {
        for r in reports {
            if !r.value.le_tol(opt, tol) {
                return Err(Error::ChainViolation(format!(
                    "{} = {} exceeds OPT = {}",
                    r.label,
                    r.value.to_report_string(),
                    opt.to_report_string()
                )));
            }
        }
        comparisons.push("all <= OPT".into());
    }
    Ok(ChainCheck {
        values: reports.iter().map(|r| (r.label.clone(), r.value.clone())).collect(),
        comparisons,
        lbb_rlt_equal,
    })
}
