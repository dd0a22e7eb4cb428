//! Gilmore-Lawler bound and its iterated generalization.

use super::{conv, solve_checked, BoundMethod, BoundReport, Certificate, DenseMatrix, GlIterate, SkewStrategy};
use crate::error::{Error, Result};
use crate::exactnum::{Rational, Scalar};
use crate::lp::{LinearProgram, Relation, Sense, VarBounds};
use crate::model::BqpInstance;

pub const GGL_DEFAULT_MAX_ITER: usize = 50;
/// Stopping threshold on `max |cbar|` in float mode.
pub const GGL_FLOAT_TOL: f64 = 1e-9;

fn to_rational<T: Scalar>(v: &T) -> Result<Rational> {
    v.to_rational()
        .ok_or_else(|| Error::NumericalBreakdown(format!("non-finite value {v}")))
}

fn polytope_lp(inst: &BqpInstance, cost: &[Rational]) -> LinearProgram {
    let mut lp = LinearProgram::new(Sense::Minimize);
    for c in cost {
        lp.add_var(c.clone(), VarBounds::non_negative());
    }
    for r in 0..inst.rows() {
        let coeffs = (0..inst.m())
            .filter(|&j| !inst.constraints[(r, j)].is_zero())
            .map(|j| (j, inst.constraints[(r, j)].clone()))
            .collect();
        lp.add_constraint(coeffs, Relation::Eq, inst.rhs[r].clone());
    }
    lp
}

/// One Gilmore-Lawler round on the working matrix `q`: for every column
/// `k` solve `min q_k^T x` over `{Bx = b, x_k = 1, x >= 0}` and read off
/// the duals.
fn gl_round<T: Scalar>(inst: &BqpInstance, q: &DenseMatrix<T>) -> Result<GlIterate<T>> {
    let m = inst.m();
    let rows = inst.rows();
    let mut y_bar = vec![vec![T::zero(); m]; rows];
    let mut z_bar = vec![T::zero(); m];
    let mut c_bar = vec![T::zero(); m];
    for k in 0..m {
        let col: Vec<Rational> = (0..m).map(|j| to_rational(&q[j][k])).collect::<Result<_>>()?;
        let mut lp = polytope_lp(inst, &col);
        lp.add_constraint(vec![(k, Rational::one())], Relation::Eq, Rational::one());
        let sol = solve_checked::<T>(&lp).map_err(|e| match e {
            Error::LpFailure(s) => Error::AssumptionViolated(format!("column LP {k} is {s:?}")),
            other => other,
        })?;
        for (r, row) in y_bar.iter_mut().enumerate() {
            row[k] = sol.dual[r].clone();
        }
        z_bar[k] = sol.dual[rows].clone();
        c_bar[k] = sol.objective;
    }
    Ok(GlIterate { y_bar, z_bar, c_bar })
}

struct Outcome<T> {
    c: Vec<T>,
    iterates: Vec<GlIterate<T>>,
    trace: Vec<T>,
    x: Vec<T>,
    y: Vec<T>,
    lp_solves: usize,
}

fn run<T: Scalar>(inst: &BqpInstance, strategy: SkewStrategy, max_iter: usize) -> Result<Outcome<T>> {
    inst.validate()?;
    let m = inst.m();
    let rows = inst.rows();
    let mut q: DenseMatrix<T> = (0..m).map(|i| (0..m).map(|j| conv(&inst.cost[(i, j)])).collect()).collect();
    let mut c = vec![T::zero(); m];
    let mut iterates = Vec::new();
    let mut trace = Vec::new();
    let mut lp_solves = 0;
    let mut last = None;
    for _ in 0..max_iter.max(1) {
        let it = gl_round(inst, &q)?;
        lp_solves += m;
        // Q <- Q - (B^T Ybar + Diag(zbar)).
        for i in 0..m {
            for j in 0..m {
                let mut sub = (0..rows).fold(T::zero(), |acc, r| {
                    let a = &inst.constraints[(r, i)];
                    if a.is_zero() {
                        acc
                    } else {
                        acc.add(&conv::<T>(a).mul(&it.y_bar[r][j]))
                    }
                });
                if i == j {
                    sub = sub.add(&it.z_bar[j]);
                }
                q[i][j] = q[i][j].sub(&sub);
            }
        }
        for (ck, cb) in c.iter_mut().zip(&it.c_bar) {
            *ck = ck.add(cb);
        }
        let done = it.c_bar.iter().all(Scalar::is_zero);
        iterates.push(it);

        let cost: Vec<Rational> = c
            .iter()
            .zip(&inst.linear)
            .map(|(a, l)| to_rational(a).map(|a| a + l))
            .collect::<Result<_>>()?;
        let sol = solve_checked::<T>(&polytope_lp(inst, &cost))?;
        lp_solves += 1;
        trace.push(sol.objective.clone());
        last = Some(sol);

        if done {
            break;
        }
        let s = strategy.skew(&q);
        for i in 0..m {
            for j in 0..m {
                q[i][j] = q[i][j].add(&s[i][j]);
            }
        }
    }
    let sol = last.expect("at least one round");
    Ok(Outcome {
        c,
        iterates,
        trace,
        x: sol.primal,
        y: sol.dual,
        lp_solves,
    })
}

/// Gilmore-Lawler bound: a single round.
pub fn gl_bound<T: Scalar>(inst: &BqpInstance) -> Result<BoundReport<T>> {
    let out = run::<T>(inst, SkewStrategy::None, 1)?;
    Ok(report(inst, BoundMethod::Gl, "GL".into(), out))
}

/// Generalized Gilmore-Lawler bound: repeated rounds on the residual
/// matrix, reformulated by `strategy` in between, until no round adds
/// anything or `max_iter` rounds are done.
pub fn ggl_bound<T: Scalar>(inst: &BqpInstance, strategy: SkewStrategy, max_iter: usize) -> Result<BoundReport<T>> {
    let out = run::<T>(inst, strategy, max_iter)?;
    Ok(report(inst, BoundMethod::Ggl, format!("GGL({})", strategy.name()), out))
}

fn report<T: Scalar>(inst: &BqpInstance, method: BoundMethod, label: String, out: Outcome<T>) -> BoundReport<T> {
    let value = out.trace.last().cloned().unwrap_or_else(T::zero);
    BoundReport {
        method,
        label,
        value,
        lp_relaxation_only: !inst.integral_polytope,
        sparsity: false,
        certificate: Certificate::GilmoreLawler {
            c: out.c,
            iterates: out.iterates,
            x: out.x,
            y: out.y,
        },
        trace: out.trace,
        lp_solves: out.lp_solves,
    }
}
