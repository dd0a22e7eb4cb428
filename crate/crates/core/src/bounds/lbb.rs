//! Linearization LPs: the symmetrized bound, its RLT dual, the generic
//! spanning-set bound and the strengthened bound over a linearizable family.

use std::collections::{BTreeMap, BTreeSet};

use super::{solve_checked, sparsity_set, BoundMethod, BoundReport, Certificate};
use crate::error::{Error, Result};
use crate::exactnum::{Rational, RationalMatrix, Scalar};
use crate::lp::{LinearProgram, Relation, Sense, VarBounds};
use crate::model::{BqpInstance, LinearizableFamily, Structure};
use crate::qspplin;

/// Variable layout of the RLT relaxation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RltForm {
    /// One variable per unordered pair, constraints `BX = b x^T`.
    Symmetric,
    /// A full `m x m` matrix `X`, constraints `BX + BX^T = 2 b x^T`.
    Full,
}

fn upper_coords(m: usize, forbidden: &BTreeSet<(usize, usize)>) -> Vec<(usize, usize)> {
    (0..m)
        .flat_map(|i| (i..m).map(move |j| (i, j)))
        .filter(|p| !forbidden.contains(p))
        .collect()
}

fn sparse_row(map: BTreeMap<usize, Rational>) -> Vec<(usize, Rational)> {
    map.into_iter().filter(|(_, v)| !v.is_zero()).collect()
}

fn label(base: &str, sparsity: bool) -> String {
    if sparsity {
        format!("{base}+sparsity")
    } else {
        base.to_string()
    }
}

fn symmetrize(q: &RationalMatrix) -> RationalMatrix {
    q.symmetric_part()
}

/// `max b^T y` over `y, Y, z, alpha` (all free) subject to
/// `B^T y - 2 Y^T b - z - C alpha <= l` and, on every non-forbidden pair
/// `i <= j`, `(B^T Y + Y^T B)_ij + [i = j] z_i + sum_k alpha_k Q_k,ij <= sym(Q)_ij`.
/// `family` members must be symmetric.
fn linearization_lp<T: Scalar>(
    inst: &BqpInstance,
    family: &LinearizableFamily,
    forbidden: &BTreeSet<(usize, usize)>,
) -> Result<(T, Vec<T>, Vec<Vec<T>>, Vec<T>, Vec<T>, usize)> {
    inst.validate()?;
    let m = inst.m();
    let rows = inst.rows();
    let b_mat = &inst.constraints;
    let sq = symmetrize(&inst.cost);
    let mut lp = LinearProgram::new(Sense::Maximize);
    for r in 0..rows {
        lp.add_var(inst.rhs[r].clone(), VarBounds::free());
    }
    let yv = |r: usize, j: usize| rows + r * m + j;
    for _ in 0..rows * m {
        lp.add_var(Rational::zero(), VarBounds::free());
    }
    let zv = |j: usize| rows + rows * m + j;
    for _ in 0..m {
        lp.add_var(Rational::zero(), VarBounds::free());
    }
    let av = |k: usize| rows + rows * m + m + k;
    for _ in 0..family.len() {
        lp.add_var(Rational::zero(), VarBounds::free());
    }
    let two = Rational::from_integer(2);
    for j in 0..m {
        let mut row = BTreeMap::new();
        for r in 0..rows {
            if !b_mat[(r, j)].is_zero() {
                row.insert(r, b_mat[(r, j)].clone());
            }
            if !inst.rhs[r].is_zero() {
                row.insert(yv(r, j), -(&two * &inst.rhs[r]));
            }
        }
        row.insert(zv(j), -Rational::one());
        for (k, (_, c)) in family.members.iter().enumerate() {
            if !c[j].is_zero() {
                row.insert(av(k), -c[j].clone());
            }
        }
        lp.add_constraint(sparse_row(row), Relation::Le, inst.linear[j].clone());
    }
    for (i, j) in upper_coords(m, forbidden) {
        let mut row: BTreeMap<usize, Rational> = BTreeMap::new();
        for r in 0..rows {
            if !b_mat[(r, i)].is_zero() {
                *row.entry(yv(r, j)).or_default() += &b_mat[(r, i)];
            }
            if !b_mat[(r, j)].is_zero() {
                *row.entry(yv(r, i)).or_default() += &b_mat[(r, j)];
            }
        }
        if i == j {
            row.insert(zv(i), Rational::one());
        }
        for (k, (q, _)) in family.members.iter().enumerate() {
            if !q[(i, j)].is_zero() {
                row.insert(av(k), q[(i, j)].clone());
            }
        }
        lp.add_constraint(sparse_row(row), Relation::Le, sq[(i, j)].clone());
    }
    let sol = solve_checked::<T>(&lp)?;
    let x = sol.primal;
    let y = x[..rows].to_vec();
    let big_y = (0..rows).map(|r| (0..m).map(|j| x[yv(r, j)].clone()).collect()).collect();
    let z = (0..m).map(|j| x[zv(j)].clone()).collect();
    let alpha = (0..family.len()).map(|k| x[av(k)].clone()).collect();
    Ok((sol.objective, y, big_y, z, alpha, 1))
}

fn lbb_report<T: Scalar>(
    inst: &BqpInstance,
    family: LinearizableFamily,
    sparsity: bool,
    method: BoundMethod,
    base: &str,
) -> Result<BoundReport<T>> {
    let forbidden = sparsity_set(inst, sparsity);
    let (value, y, big_y, z, alpha, lp_solves) = linearization_lp::<T>(inst, &family, &forbidden)?;
    Ok(BoundReport {
        method,
        label: label(base, sparsity),
        value,
        lp_relaxation_only: false,
        sparsity,
        certificate: Certificate::Lbb {
            y,
            big_y,
            z,
            alpha,
            family,
            forbidden: forbidden.into_iter().collect(),
        },
        trace: Vec::new(),
        lp_solves,
    })
}

/// Symmetrized linearization bound. With `sparsity` the elementwise rows of
/// pairs that never occur together in a feasible point are dropped.
pub fn lbb_prime<T: Scalar>(inst: &BqpInstance, sparsity: bool) -> Result<BoundReport<T>> {
    lbb_report(inst, LinearizableFamily::new(), sparsity, BoundMethod::LbbPrime, "LBB'")
}

/// The symmetrized bound strengthened by every linearizable direction of
/// the instance: the spanning set for QSPP, an enumerated basis otherwise
/// (`cap` bounds the enumeration).
pub fn lbb_star<T: Scalar>(inst: &BqpInstance, sparsity: bool, cap: usize) -> Result<BoundReport<T>> {
    let family = match &inst.structure {
        Structure::Qspp(g) => qspplin::spanning_set(g)?.to_family(),
        _ => linearizable_family_by_enumeration(inst, cap)?,
    };
    let forbidden = sparsity_set(inst, sparsity);
    let reduced = reduce_family(inst, &family, &forbidden);
    lbb_report(inst, reduced, sparsity, BoundMethod::LbbStar, "LBB*")
}

/// Same LP as [`lbb_star`] over a caller-supplied linearizable family.
pub fn lbb_augmented<T: Scalar>(
    inst: &BqpInstance,
    family: &LinearizableFamily,
    sparsity: bool,
) -> Result<BoundReport<T>> {
    let forbidden = sparsity_set(inst, sparsity);
    let reduced = reduce_family(inst, family, &forbidden);
    lbb_report(inst, reduced, sparsity, BoundMethod::LbbStar, "LBBGeneric-augmented")
}

/// `max b^T y` over free `y, alpha` with `B^T y - C alpha <= l` and
/// `sum_k alpha_k Q_k <= Q` entrywise.
pub fn lbb_generic<T: Scalar>(inst: &BqpInstance, family: &LinearizableFamily) -> Result<BoundReport<T>> {
    inst.validate()?;
    let m = inst.m();
    let rows = inst.rows();
    let mut lp = LinearProgram::new(Sense::Maximize);
    for r in 0..rows {
        lp.add_var(inst.rhs[r].clone(), VarBounds::free());
    }
    for _ in 0..family.len() {
        lp.add_var(Rational::zero(), VarBounds::free());
    }
    for j in 0..m {
        let mut row = BTreeMap::new();
        for r in 0..rows {
            row.insert(r, inst.constraints[(r, j)].clone());
        }
        for (k, (_, c)) in family.members.iter().enumerate() {
            row.insert(rows + k, -c[j].clone());
        }
        lp.add_constraint(sparse_row(row), Relation::Le, inst.linear[j].clone());
    }
    for i in 0..m {
        for j in 0..m {
            let row = family
                .members
                .iter()
                .enumerate()
                .filter(|(_, (q, _))| !q[(i, j)].is_zero())
                .map(|(k, (q, _))| (rows + k, q[(i, j)].clone()))
                .collect();
            lp.add_constraint(row, Relation::Le, inst.cost[(i, j)].clone());
        }
    }
    let sol = solve_checked::<T>(&lp)?;
    let y = sol.primal[..rows].to_vec();
    let alpha = sol.primal[rows..].to_vec();
    Ok(BoundReport {
        method: BoundMethod::LbbGeneric,
        label: "LBBGeneric".into(),
        value: sol.objective,
        lp_relaxation_only: false,
        sparsity: false,
        certificate: Certificate::Generic {
            y,
            alpha,
            family: family.clone(),
        },
        trace: Vec::new(),
        lp_solves: 1,
    })
}

/// First-level RLT relaxation:
/// `min <sym(Q), X> + l^T x` over `X >= 0` with `x = diag(X)`, `Bx = b` and
/// the products of every row of `Bx = b` with every `x_j`. With `sparsity`
/// the entries of forbidden pairs are fixed at zero.
pub fn rlt1<T: Scalar>(inst: &BqpInstance, sparsity: bool, form: RltForm) -> Result<BoundReport<T>> {
    inst.validate()?;
    let m = inst.m();
    let rows = inst.rows();
    let b_mat = &inst.constraints;
    let forbidden = sparsity_set(inst, sparsity);
    let sq = symmetrize(&inst.cost);
    let allowed = |i: usize, j: usize| !forbidden.contains(&(i.min(j), i.max(j)));
    let mut lp = LinearProgram::new(Sense::Minimize);
    let mut index: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    match form {
        RltForm::Symmetric => {
            for (i, j) in upper_coords(m, &forbidden) {
                let cost = if i == j {
                    &sq[(i, i)] + &inst.linear[i]
                } else {
                    &sq[(i, j)] * &Rational::from_integer(2)
                };
                index.insert((i, j), lp.add_var(cost, VarBounds::non_negative()));
            }
        }
        RltForm::Full => {
            for i in 0..m {
                for j in 0..m {
                    if allowed(i, j) {
                        let cost = if i == j {
                            &sq[(i, i)] + &inst.linear[i]
                        } else {
                            sq[(i, j)].clone()
                        };
                        index.insert((i, j), lp.add_var(cost, VarBounds::non_negative()));
                    }
                }
            }
        }
    }
    let var = |i: usize, j: usize| -> Option<usize> {
        match form {
            RltForm::Symmetric => index.get(&(i.min(j), i.max(j))).copied(),
            RltForm::Full => index.get(&(i, j)).copied(),
        }
    };
    for r in 0..rows {
        let coeffs = (0..m)
            .filter(|&j| !b_mat[(r, j)].is_zero())
            .map(|j| (var(j, j).expect("diagonal present"), b_mat[(r, j)].clone()))
            .collect();
        lp.add_constraint(coeffs, Relation::Eq, inst.rhs[r].clone());
    }
    for r in 0..rows {
        for j in 0..m {
            let mut row: BTreeMap<usize, Rational> = BTreeMap::new();
            for k in 0..m {
                let a = &b_mat[(r, k)];
                if a.is_zero() {
                    continue;
                }
                if let Some(v) = var(k, j) {
                    *row.entry(v).or_default() += a;
                }
                if form == RltForm::Full {
                    if let Some(v) = var(j, k) {
                        *row.entry(v).or_default() += a;
                    }
                }
            }
            let scale = if form == RltForm::Full { 2 } else { 1 };
            let d = var(j, j).expect("diagonal present");
            *row.entry(d).or_default() -= &inst.rhs[r] * &Rational::from_integer(scale);
            lp.add_constraint(sparse_row(row), Relation::Eq, Rational::zero());
        }
    }
    let sol = solve_checked::<T>(&lp)?;
    let mut big_x = vec![vec![T::zero(); m]; m];
    for (&(i, j), &v) in &index {
        big_x[i][j] = sol.primal[v].clone();
        if form == RltForm::Symmetric {
            big_x[j][i] = sol.primal[v].clone();
        }
    }
    let x = (0..m).map(|i| big_x[i][i].clone()).collect();
    let base = match form {
        RltForm::Symmetric => "RLT1",
        RltForm::Full => "RLT1(full)",
    };
    Ok(BoundReport {
        method: BoundMethod::Rlt1,
        label: label(base, sparsity),
        value: sol.objective,
        lp_relaxation_only: false,
        sparsity,
        certificate: Certificate::Rlt {
            x,
            big_x,
            forbidden: forbidden.into_iter().collect(),
        },
        trace: Vec::new(),
        lp_solves: 1,
    })
}

/// Row-echelon accumulator for incremental rank tests.
struct Echelon {
    rows: Vec<(usize, Vec<Rational>)>,
}

impl Echelon {
    fn new() -> Self {
        Echelon { rows: Vec::new() }
    }

    /// Adds `v` if it is independent of the rows so far.
    fn insert(&mut self, mut v: Vec<Rational>) -> bool {
        for (p, row) in &self.rows {
            if !v[*p].is_zero() {
                let f = v[*p].clone();
                for (a, b) in v.iter_mut().zip(row) {
                    if !b.is_zero() {
                        *a -= &f * b;
                    }
                }
            }
        }
        match v.iter().position(|a| !a.is_zero()) {
            Some(p) => {
                let inv = v[p].recip();
                for a in v.iter_mut() {
                    *a *= &inv;
                }
                self.rows.push((p, v));
                true
            }
            None => false,
        }
    }
}

/// Drops the members of `family` that add nothing to the symmetrized
/// bound. A member is kept only if `(sym(Q_k), c_k)`, restricted to the
/// non-forbidden pairs, is independent of the earlier kept members and of
/// the directions the LP already has for free: `(B^T Y + Y^T B + Diag(z),
/// 2 Y^T b + z + B^T w)` with `b^T w = 0`. Kept members are symmetrized.
pub fn reduce_family(
    inst: &BqpInstance,
    family: &LinearizableFamily,
    forbidden: &BTreeSet<(usize, usize)>,
) -> LinearizableFamily {
    let m = inst.m();
    let rows = inst.rows();
    let b_mat = &inst.constraints;
    let coords = upper_coords(m, forbidden);
    let pos: BTreeMap<(usize, usize), usize> = coords.iter().enumerate().map(|(k, &p)| (p, k)).collect();
    let dim = coords.len() + m;
    let lin = |j: usize| coords.len() + j;
    let mut ech = Echelon::new();
    for r in 0..rows {
        for j in 0..m {
            let mut v = vec![Rational::zero(); dim];
            // B^T E_rj + E_jr B has row j equal to B_r and column j equal to B_r^T.
            for a in 0..m {
                let br = &b_mat[(r, a)];
                if br.is_zero() {
                    continue;
                }
                if let Some(&k) = pos.get(&(a.min(j), a.max(j))) {
                    v[k] += br;
                    if a == j {
                        v[k] += br;
                    }
                }
            }
            v[lin(j)] = &Rational::from_integer(2) * &inst.rhs[r];
            ech.insert(v);
        }
    }
    for j in 0..m {
        let mut v = vec![Rational::zero(); dim];
        if let Some(&k) = pos.get(&(j, j)) {
            v[k] = Rational::one();
        }
        v[lin(j)] = Rational::one();
        ech.insert(v);
    }
    let pivot = inst.rhs.iter().position(|x| !x.is_zero());
    for r in 0..rows {
        if Some(r) == pivot {
            continue;
        }
        let mut w = vec![Rational::zero(); rows];
        w[r] = Rational::one();
        if let Some(p) = pivot {
            w[p] = -(&inst.rhs[r] / &inst.rhs[p]);
        }
        let mut v = vec![Rational::zero(); dim];
        for j in 0..m {
            v[lin(j)] = (0..rows).map(|s| &b_mat[(s, j)] * &w[s]).sum();
        }
        ech.insert(v);
    }
    let mut out = LinearizableFamily::new();
    for (q, c) in &family.members {
        let sq = symmetrize(q);
        let mut v = vec![Rational::zero(); dim];
        for (k, &(i, j)) in coords.iter().enumerate() {
            v[k] = sq[(i, j)].clone();
        }
        for j in 0..m {
            v[lin(j)] = c[j].clone();
        }
        if ech.insert(v) {
            out.push(sq, c.clone());
        }
    }
    out
}

/// Basis of the linearizable pairs `(Q, c)` with `Q` symmetric and zero on
/// the diagonal, from one equation `x^T Q x = c^T x` per feasible point.
pub fn linearizable_family_by_enumeration(inst: &BqpInstance, cap: usize) -> Result<LinearizableFamily> {
    let m = inst.m();
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect();
    let pos: BTreeMap<(usize, usize), usize> = pairs.iter().enumerate().map(|(k, &p)| (p, k)).collect();
    let n_unknowns = pairs.len() + m;
    let mut eqs: Vec<Vec<Rational>> = Vec::new();
    inst.for_each_feasible(cap, |s| {
        let mut row = vec![Rational::zero(); n_unknowns];
        for (a, &i) in s.iter().enumerate() {
            for &j in &s[a + 1..] {
                row[pos[&(i.min(j), i.max(j))]] = Rational::from_integer(2);
            }
            row[pairs.len() + i] = -Rational::one();
        }
        eqs.push(row);
    })?;
    if eqs.is_empty() {
        return Err(Error::Validation("empty feasible set".into()));
    }
    let mat = RationalMatrix::from_rows(eqs);
    let mut family = LinearizableFamily::new();
    for v in mat.null_space_basis() {
        let mut q = RationalMatrix::zeros(m, m);
        for (k, &(i, j)) in pairs.iter().enumerate() {
            q[(i, j)] = v[k].clone();
            q[(j, i)] = v[k].clone();
        }
        family.push(q, v[pairs.len()..].to_vec());
    }
    Ok(family)
}
