//! Linearization of QSPP cost matrices on directed acyclic graphs.
//!
//! For every vertex `v` the corridor `G_v` (arcs on some s-v path) carries a
//! pseudo-linearization `p_v`: the unique reduced-form vector that matches
//! the quadratic cost of every critical path of `G_v`. A cost matrix is
//! linearizable exactly when, for every arc `e = (u, v)`, pushing `p_v`
//! through `T_e` and reducing on `G_u` gives back `p_u`. Since every step is
//! linear in `Q`, the same residuals define a matrix whose null space spans
//! the linearizable matrices.
//!
//! All arithmetic is exact.

use crate::error::{Error, Result};
use crate::exactnum::{solve_lower_triangular, Rational, RationalMatrix, RationalVector};
use crate::graph::{ArcBasis, Dag};
use crate::model::{LinearizableFamily, QsppInstance};

/// A cost vector that is zero on every non-basic arc.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedCostVector {
    pub entries: RationalVector,
    pub non_basic: Vec<usize>,
}

/// Evidence that a cost matrix is not linearizable: for the arc
/// `arc = (u, v)`, `left = (R_u ∘ T_arc)(p_v)` differs from `right = p_u`.
/// Both vectors are indexed by `arcs`, the labels of the corridor of `u`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub arc: usize,
    pub arcs: Vec<usize>,
    pub left: RationalVector,
    pub right: RationalVector,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LinearizationOutcome {
    Linearizable(ReducedCostVector),
    NotLinearizable(Witness),
}

impl LinearizationOutcome {
    pub fn is_linearizable(&self) -> bool {
        matches!(self, LinearizationOutcome::Linearizable(_))
    }

    pub fn vector(&self) -> Option<&RationalVector> {
        match self {
            LinearizationOutcome::Linearizable(c) => Some(&c.entries),
            LinearizationOutcome::NotLinearizable(_) => None,
        }
    }
}

fn reduce_with(g: &Dag, basis: &ArcBasis, c: &mut [Rational]) {
    for &v in g.topological_order().iter().rev() {
        let Some(f) = basis.nonbasic_of[v] else { continue };
        let cf = c[f].clone();
        if cf.is_zero() {
            continue;
        }
        for &e in g.out_arcs(v) {
            c[e] -= &cf;
        }
        for &e in g.in_arcs(v) {
            c[e] += &cf;
        }
    }
}

/// Reduced form of `c`: at each transshipment vertex, in reverse
/// topological order, the cost of its non-basic arc is moved from the
/// outgoing arcs onto the incoming ones.
pub fn reduce_cost_vector(g: &Dag, c: &[Rational]) -> Result<ReducedCostVector> {
    if c.len() != g.m() {
        return Err(Error::DimensionMismatch(format!("{} costs for {} arcs", c.len(), g.m())));
    }
    let basis = g.arc_basis();
    let mut entries = c.to_vec();
    reduce_with(g, &basis, &mut entries);
    Ok(ReducedCostVector {
        entries,
        non_basic: g.non_basic_arcs(),
    })
}

/// Per-corridor data that does not depend on the cost matrix.
struct Corridor {
    g: Dag,
    basis: ArcBasis,
    /// Basic arcs in the order that makes the critical-path matrix unit lower triangular.
    order: Vec<usize>,
    /// Critical paths, one per entry of `order` (local labels).
    paths: Vec<Vec<usize>>,
    mbar: RationalMatrix,
}

impl Corridor {
    fn new(g: Dag) -> Result<Self> {
        let basis = g.arc_basis();
        let order = g.ordered_basic_arcs();
        let critical = g.critical_paths()?;
        let k = order.len();
        let mut mbar = RationalMatrix::zeros(k, k);
        let mut col_of = vec![usize::MAX; g.m()];
        for (c, &e) in order.iter().enumerate() {
            col_of[e] = c;
        }
        for (r, (_, p)) in critical.iter().enumerate() {
            for &a in &p.arcs {
                if basis.is_basic[a] {
                    mbar[(r, col_of[a])] = Rational::one();
                }
            }
        }
        let paths = critical.into_iter().map(|(_, p)| p.arcs).collect();
        Ok(Corridor {
            g,
            basis,
            order,
            paths,
            mbar,
        })
    }

    /// Pseudo-linearization for a cost given on root labels.
    fn pseudo(&self, q: &RationalMatrix) -> Result<RationalVector> {
        let map = self.g.arc_map();
        let rhs: Vec<Rational> = self
            .paths
            .iter()
            .map(|p| {
                let mut acc = Rational::zero();
                for &a in p {
                    for &b in p {
                        let v = &q[(map[a], map[b])];
                        if !v.is_zero() {
                            acc += v;
                        }
                    }
                }
                acc
            })
            .collect();
        let x = solve_lower_triangular(&self.mbar, &rhs)?;
        let mut p = vec![Rational::zero(); self.g.m()];
        for (&e, v) in self.order.iter().zip(x) {
            p[e] = v;
        }
        Ok(p)
    }
}

/// How an arc `e = (u, v)` links the corridors of `v` and `u`.
struct ArcLink {
    u: usize,
    v: usize,
    /// Local label of `e` in `G_v`.
    e_in_v: usize,
    /// For each local arc of `G_u`: its local label in `G_v`.
    u_to_v: Vec<usize>,
}

/// Corridors of every vertex of a corridor DAG plus the arc links between
/// them. Independent of the cost matrix, so it is reused across matrices.
pub struct LinearizationPlan {
    root: Dag,
    corridors: Vec<Corridor>,
    links: Vec<ArcLink>,
}

impl LinearizationPlan {
    pub fn new(g: &Dag) -> Result<Self> {
        if !g.is_corridor() {
            return Err(Error::AssumptionViolated(
                "some vertex lies on no s-t path".into(),
            ));
        }
        // Fresh labels so that corridor arc maps index the caller's matrices.
        let root = Dag::new(g.n(), g.arcs().to_vec(), g.source(), g.target())?;
        let corridors = (0..root.n())
            .map(|v| Corridor::new(root.prune_to_corridor(v)?))
            .collect::<Result<Vec<_>>>()?;
        let mut links = Vec::with_capacity(root.m());
        for e in 0..root.m() {
            let (u, v) = root.arc(e);
            let gv = &corridors[v].g;
            let gu = &corridors[u].g;
            let e_in_v = gv
                .local_arc(e)
                .ok_or_else(|| Error::AssumptionViolated(format!("arc {e} missing from corridor of its head")))?;
            let u_to_v = gu
                .arc_map()
                .iter()
                .map(|&a| {
                    gv.local_arc(a).ok_or_else(|| {
                        Error::AssumptionViolated(format!("corridor of {u} not contained in corridor of {v}"))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            links.push(ArcLink { u, v, e_in_v, u_to_v });
        }
        Ok(LinearizationPlan {
            root,
            corridors,
            links,
        })
    }

    pub fn graph(&self) -> &Dag {
        &self.root
    }

    fn pseudo_all(&self, q: &RationalMatrix) -> Result<Vec<RationalVector>> {
        self.corridors.iter().map(|c| c.pseudo(q)).collect()
    }

    /// `(R_u ∘ T_e)(p_v)` for the arc `e`.
    fn pushed(&self, q: &RationalMatrix, p: &[RationalVector], e: usize) -> RationalVector {
        let link = &self.links[e];
        let cu = &self.corridors[link.u];
        let pv = &p[link.v];
        let gu = &cu.g;
        let ce = &pv[link.e_in_v];
        let mut out: RationalVector = gu
            .arc_map()
            .iter()
            .zip(&link.u_to_v)
            .enumerate()
            .map(|(local, (&f, &in_v))| {
                let mut val = &pv[in_v] - &(&q[(e, f)] + &q[(f, e)]);
                if gu.tail(local) == gu.source() {
                    val += ce;
                }
                val
            })
            .collect();
        reduce_with(gu, &cu.basis, &mut out);
        out
    }

    /// Runs the arc checks for a zero-diagonal `q` on root labels.
    fn decide(&self, q: &RationalMatrix) -> Result<LinearizationOutcome> {
        let p = self.pseudo_all(q)?;
        for e in 0..self.root.m() {
            let left = self.pushed(q, &p, e);
            let u = self.links[e].u;
            if left != p[u] {
                return Ok(LinearizationOutcome::NotLinearizable(Witness {
                    arc: e,
                    arcs: self.corridors[u].g.arc_map().to_vec(),
                    left,
                    right: p[u].clone(),
                }));
            }
        }
        let t = self.root.target();
        Ok(LinearizationOutcome::Linearizable(ReducedCostVector {
            entries: p[t].clone(),
            non_basic: self.root.non_basic_arcs(),
        }))
    }

    /// Linearization decision for any square `q` (diagonal allowed).
    pub fn linearize(&self, q: &RationalMatrix) -> Result<LinearizationOutcome> {
        let m = self.root.m();
        if q.rows() != m || q.cols() != m {
            return Err(Error::DimensionMismatch(format!("cost is {}x{} for {m} arcs", q.rows(), q.cols())));
        }
        let diag = q.diagonal();
        if diag.iter().all(Rational::is_zero) {
            return self.decide(q);
        }
        let mut q0 = q.clone();
        for i in 0..m {
            q0[(i, i)] = Rational::zero();
        }
        Ok(match self.decide(&q0)? {
            LinearizationOutcome::Linearizable(p) => {
                let sum: Vec<Rational> = p.entries.iter().zip(&diag).map(|(a, d)| a + d).collect();
                let mut entries = sum;
                reduce_with(&self.root, &self.corridors[self.root.target()].basis, &mut entries);
                LinearizationOutcome::Linearizable(ReducedCostVector {
                    entries,
                    non_basic: p.non_basic,
                })
            }
            w => w,
        })
    }

    /// Stacked residuals `(R_u ∘ T_e)(p_v) - p_u` over all arcs.
    fn residual(&self, q: &RationalMatrix) -> Result<RationalVector> {
        let p = self.pseudo_all(q)?;
        let mut out = Vec::new();
        for e in 0..self.root.m() {
            let left = self.pushed(q, &p, e);
            let u = self.links[e].u;
            out.extend(left.iter().zip(&p[u]).map(|(a, b)| a - b));
        }
        Ok(out)
    }
}

/// Pseudo-linearization of `q` (indexed by the labels of `g`).
pub fn pseudo_linearization(g: &Dag, q: &RationalMatrix) -> Result<ReducedCostVector> {
    if q.rows() != g.m() || q.cols() != g.m() {
        return Err(Error::DimensionMismatch(format!("cost is {}x{} for {} arcs", q.rows(), q.cols(), g.m())));
    }
    // A fresh copy so that arc labels index `q` directly.
    let local = Corridor::new(Dag::new(g.n(), g.arcs().to_vec(), g.source(), g.target())?)?;
    Ok(ReducedCostVector {
        entries: local.pseudo(q)?,
        non_basic: g.non_basic_arcs(),
    })
}

/// `T_e(c)` for the arc `e = (u, head)` entering the target of `g`: the
/// corridor `G_u` and the vector on its arcs,
/// `c_f - q_ef - q_fe`, plus `c_e` when `f` leaves the source.
pub fn transform_te(g: &Dag, q: &RationalMatrix, c: &[Rational], e: usize) -> Result<(Dag, RationalVector)> {
    if e >= g.m() || g.head(e) != g.target() {
        return Err(Error::InvalidArgument(format!("arc {e} does not enter the target")));
    }
    if c.len() != g.m() || q.rows() != g.m() || q.cols() != g.m() {
        return Err(Error::DimensionMismatch("cost data does not match the graph".into()));
    }
    let local_root = Dag::new(g.n(), g.arcs().to_vec(), g.source(), g.target())?;
    let gu = local_root.prune_to_corridor(g.tail(e))?;
    let out = gu
        .arc_map()
        .iter()
        .enumerate()
        .map(|(local, &f)| {
            let mut val = &c[f] - &(&q[(e, f)] + &q[(f, e)]);
            if gu.tail(local) == gu.source() {
                val += &c[e];
            }
            val
        })
        .collect();
    Ok((gu, out))
}

/// Algorithm 2: decides linearizability of the instance's cost matrix and
/// returns the reduced linearization vector or a witness arc.
pub fn linearize_qspp(inst: &QsppInstance) -> Result<LinearizationOutcome> {
    LinearizationPlan::new(&inst.graph)?.linearize(&inst.cost)
}

/// Basis of the zero-diagonal linearizable matrices with their reduced
/// linearization vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanningSet {
    pub m: usize,
    pub basis: Vec<(RationalMatrix, RationalVector)>,
}

/// Off-diagonal coordinates in row-major order.
fn off_diagonal(m: usize) -> Vec<(usize, usize)> {
    (0..m)
        .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect()
}

impl SpanningSet {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn to_family(&self) -> LinearizableFamily {
        LinearizableFamily {
            members: self.basis.clone(),
        }
    }

    /// Whether the off-diagonal part of `q` lies in the span (the diagonal
    /// is always linearizable on its own).
    pub fn contains(&self, q: &RationalMatrix) -> bool {
        let coords = off_diagonal(self.m);
        let vec_of = |a: &RationalMatrix| -> Vec<Rational> { coords.iter().map(|&(i, j)| a[(i, j)].clone()).collect() };
        let rows: Vec<Vec<Rational>> = self.basis.iter().map(|(b, _)| vec_of(b)).collect();
        let target = vec_of(q);
        if rows.is_empty() {
            return target.iter().all(Rational::is_zero);
        }
        // Solve sum alpha_i vec(Q_i) = vec(q).
        let a = RationalMatrix::from_fn(coords.len(), rows.len(), |r, k| rows[k][r].clone());
        a.solve(&target).is_some()
    }
}

/// Spanning set of the linearizable matrices on `g`: the null space of the
/// residual map over zero-diagonal coordinates.
pub fn spanning_set(g: &Dag) -> Result<SpanningSet> {
    let plan = LinearizationPlan::new(g)?;
    let m = plan.root.m();
    let coords = off_diagonal(m);
    let mut columns = Vec::with_capacity(coords.len());
    let mut unit = RationalMatrix::zeros(m, m);
    for &(i, j) in &coords {
        unit[(i, j)] = Rational::one();
        columns.push(plan.residual(&unit)?);
        unit[(i, j)] = Rational::zero();
    }
    let rows = columns.first().map_or(0, Vec::len);
    let l = RationalMatrix::from_fn(rows, coords.len(), |r, c| columns[c][r].clone());
    let mut basis = Vec::new();
    for v in l.null_space_basis() {
        let mut q = RationalMatrix::zeros(m, m);
        for (&(i, j), x) in coords.iter().zip(v) {
            q[(i, j)] = x;
        }
        let c = match plan.decide(&q)? {
            LinearizationOutcome::Linearizable(c) => c.entries,
            LinearizationOutcome::NotLinearizable(w) => {
                return Err(Error::AssumptionViolated(format!(
                    "null-space member rejected at arc {}",
                    w.arc
                )))
            }
        };
        basis.push((q, c));
    }
    Ok(SpanningSet { m, basis })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;
    use crate::model::{is_linearization, qspp_to_bqp, spanning_dimension_by_enumeration};

    fn q(n: i64) -> Rational {
        Rational::from_integer(n)
    }

    fn sym_pair(m: usize, e: usize, f: usize, v: i64) -> RationalMatrix {
        let mut a = RationalMatrix::zeros(m, m);
        a[(e, f)] = q(v);
        a[(f, e)] = q(v);
        a
    }

    #[test]
    fn reduce_diamond_by_hand() {
        let g = diamond();
        let c = vec![q(1), q(2), q(3), q(4)];
        let r = reduce_cost_vector(&g, &c).unwrap();
        assert_eq!(r.entries, vec![q(4), q(6), q(0), q(0)]);
        assert_eq!(r.non_basic, vec![2, 3]);
        let again = reduce_cost_vector(&g, &r.entries).unwrap();
        assert_eq!(again.entries, r.entries);
    }

    #[test]
    fn pseudo_linearization_diamond() {
        let g = diamond();
        assert_eq!(pseudo_linearization(&g, &RationalMatrix::zeros(4, 4)).unwrap().entries, vec![q(0); 4]);
        let p = pseudo_linearization(&g, &sym_pair(4, 0, 2, 1)).unwrap();
        assert_eq!(p.entries, vec![q(2), q(0), q(0), q(0)]);
    }

    #[test]
    fn te_on_diamond() {
        let g = diamond();
        let mut cost = RationalMatrix::zeros(4, 4);
        cost[(2, 0)] = q(5);
        cost[(0, 2)] = q(5);
        let c = vec![q(1), q(2), q(3), q(4)];
        let (gu, out) = transform_te(&g, &cost, &c, 2).unwrap();
        assert_eq!(gu.arc_map(), &[0]);
        assert_eq!(out, vec![q(1 - 10 + 3)]);
        let (_, zero) = transform_te(&g, &RationalMatrix::zeros(4, 4), &vec![q(0); 4], 3).unwrap();
        assert_eq!(zero, vec![q(0)]);
        assert!(transform_te(&g, &cost, &c, 0).is_err());
    }

    #[test]
    fn diamond_always_linearizable() {
        let g = diamond();
        let mut cost = sym_pair(4, 0, 2, 3);
        cost[(1, 3)] = q(4);
        cost[(3, 1)] = q(-1);
        cost[(0, 0)] = q(7);
        cost[(3, 3)] = q(2);
        let inst = QsppInstance::new(g, cost.clone()).unwrap();
        let out = linearize_qspp(&inst).unwrap();
        // (2 q13 + q11 + q33, q24 + q42 + q22 + q44, 0, 0)
        assert_eq!(out.vector().unwrap(), &vec![q(6 + 7), q(3 + 2), q(0), q(0)]);
        assert!(is_linearization(&qspp_to_bqp(&inst), &cost, out.vector().unwrap(), 10).unwrap());
    }

    #[test]
    fn double_diamond_witness() {
        let inst = QsppInstance::new(double_diamond(), sym_pair(8, 0, 6, 1)).unwrap();
        match linearize_qspp(&inst).unwrap() {
            LinearizationOutcome::NotLinearizable(w) => assert_ne!(w.left, w.right),
            other => panic!("expected a witness, got {other:?}"),
        }
    }

    #[test]
    fn spanning_dimensions() {
        assert_eq!(spanning_set(&diamond()).unwrap().dimension(), 12);
        assert_eq!(spanning_set(&single_path(4)).unwrap().dimension(), 6);
        let dd = double_diamond();
        assert_eq!(
            spanning_set(&dd).unwrap().dimension(),
            spanning_dimension_by_enumeration(&dd, 100).unwrap()
        );
    }

    #[test]
    fn non_corridor_rejected() {
        let g = Dag::new(4, vec![(0, 1), (1, 3), (2, 3)], 0, 3).unwrap();
        let inst = QsppInstance::new(g, RationalMatrix::zeros(3, 3)).unwrap();
        assert!(matches!(linearize_qspp(&inst), Err(Error::AssumptionViolated(_))));
    }
}
