//! Problem instances, encodings and brute-force oracles.
//!
//! A [`BqpInstance`] is `min { x^T Q x + l^T x : Bx = b, x in {0,1}^m }`.
//! QSPP and QAP instances encode into it; the encoding remembers where it
//! came from so the feasible set can be enumerated efficiently (paths or
//! permutations instead of all binary vectors).

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::exactnum::{Rational, RationalMatrix, RationalVector};
use crate::graph::{self, Dag};

/// Origin of a BQP, used to enumerate its feasible set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Structure {
    /// Flow encoding of s-t paths in this DAG.
    Qspp(Dag),
    /// Assignment constraints on an `n x n` permutation matrix.
    Qap { n: usize },
    /// Anything else; feasible points are found among all binary vectors.
    General,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BqpInstance {
    /// Constraint matrix `B`.
    pub constraints: RationalMatrix,
    /// Right-hand side `b`.
    pub rhs: RationalVector,
    /// Quadratic cost `Q`.
    pub cost: RationalMatrix,
    /// Linear term `l`.
    pub linear: RationalVector,
    /// Set when `{x >= 0 : Bx = b}` is known to have only binary vertices.
    pub integral_polytope: bool,
    pub structure: Structure,
}

impl BqpInstance {
    pub fn new(
        constraints: RationalMatrix,
        rhs: RationalVector,
        cost: RationalMatrix,
        linear: Option<RationalVector>,
    ) -> Result<Self> {
        let m = constraints.cols();
        let linear = linear.unwrap_or_else(|| vec![Rational::zero(); m]);
        let inst = BqpInstance {
            constraints,
            rhs,
            cost,
            linear,
            integral_polytope: false,
            structure: Structure::General,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.constraints.cols();
        if self.rhs.len() != self.constraints.rows() {
            return Err(Error::DimensionMismatch(format!(
                "B has {} rows but b has {} entries",
                self.constraints.rows(),
                self.rhs.len()
            )));
        }
        if self.cost.rows() != m || self.cost.cols() != m {
            return Err(Error::DimensionMismatch(format!(
                "Q is {}x{} for {m} variables",
                self.cost.rows(),
                self.cost.cols()
            )));
        }
        if self.linear.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "linear term has {} entries for {m} variables",
                self.linear.len()
            )));
        }
        Ok(())
    }

    /// Number of variables.
    pub fn m(&self) -> usize {
        self.constraints.cols()
    }

    /// Number of equality constraints.
    pub fn rows(&self) -> usize {
        self.constraints.rows()
    }

    /// Objective at the 0/1 point with the given support.
    pub fn objective(&self, support: &[usize]) -> Rational {
        let mut v = self.cost.quadratic_form_support(support);
        for &i in support {
            v += &self.linear[i];
        }
        v
    }

    /// Replaces the cost data, keeping constraints and structure.
    pub fn with_cost(&self, cost: RationalMatrix, linear: RationalVector) -> Self {
        BqpInstance {
            cost,
            linear,
            ..self.clone()
        }
    }

    /// Calls `f` with the support of every feasible point. Returns the count.
    pub fn for_each_feasible(&self, cap: usize, mut f: impl FnMut(&[usize])) -> Result<usize> {
        match &self.structure {
            Structure::Qspp(g) => g.for_each_st_path(cap, |p| {
                let mut s = p.to_vec();
                s.sort_unstable();
                f(&s)
            }),
            Structure::Qap { n } => {
                let n = *n;
                let total = (1..=n).try_fold(1usize, |acc, k| acc.checked_mul(k));
                if total.map_or(true, |t| t > cap) {
                    return Err(Error::EnumerationTooLarge(cap));
                }
                let mut perm: Vec<usize> = (0..n).collect();
                let mut count = 0;
                permutations(&mut perm, 0, &mut |p| {
                    let s: Vec<usize> = p.iter().enumerate().map(|(i, &k)| i * n + k).collect();
                    count += 1;
                    f(&s);
                });
                Ok(count)
            }
            Structure::General => {
                let m = self.m();
                if m >= usize::BITS as usize - 1 || (1usize << m) > cap {
                    return Err(Error::EnumerationTooLarge(cap));
                }
                let mut count = 0;
                let mut support = Vec::with_capacity(m);
                for mask in 0usize..(1usize << m) {
                    support.clear();
                    support.extend((0..m).filter(|&j| mask >> j & 1 == 1));
                    if self.is_feasible(&support) {
                        count += 1;
                        f(&support);
                    }
                }
                Ok(count)
            }
        }
    }

    /// Checks `Bx = b` for the 0/1 point with the given support.
    pub fn is_feasible(&self, support: &[usize]) -> bool {
        (0..self.rows()).all(|r| {
            let s: Rational = support.iter().map(|&j| &self.constraints[(r, j)]).sum();
            s == self.rhs[r]
        })
    }

    /// All feasible supports.
    pub fn feasible_points(&self, cap: usize) -> Result<Vec<Vec<usize>>> {
        let mut pts = Vec::new();
        self.for_each_feasible(cap, |s| pts.push(s.to_vec()))?;
        Ok(pts)
    }

    /// Pairs `(i, j)`, `i < j`, with `x_i x_j = 0` on every feasible point,
    /// as far as the structure reveals them (empty for general instances).
    pub fn forbidden_pairs(&self) -> BTreeSet<(usize, usize)> {
        match &self.structure {
            Structure::Qspp(g) => g.forbidden_pairs(),
            Structure::Qap { n } => {
                let n = *n;
                let mut set = BTreeSet::new();
                for a in 0..n * n {
                    for b in a + 1..n * n {
                        if a / n == b / n || a % n == b % n {
                            set.insert((a, b));
                        }
                    }
                }
                set
            }
            Structure::General => BTreeSet::new(),
        }
    }
}

fn permutations(p: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == p.len() {
        f(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permutations(p, k + 1, f);
        p.swap(k, i);
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QsppInstance {
    pub graph: Dag,
    /// `m x m` arc-pair costs.
    pub cost: RationalMatrix,
}

impl QsppInstance {
    pub fn new(graph: Dag, cost: RationalMatrix) -> Result<Self> {
        let m = graph.m();
        if cost.rows() != m || cost.cols() != m {
            return Err(Error::DimensionMismatch(format!(
                "cost matrix is {}x{} for {m} arcs",
                cost.rows(),
                cost.cols()
            )));
        }
        Ok(QsppInstance { graph, cost })
    }

    pub fn m(&self) -> usize {
        self.graph.m()
    }

    /// Quadratic cost of a path given by its arcs.
    pub fn path_cost(&self, arcs: &[usize]) -> Rational {
        self.cost.quadratic_form_support(arcs)
    }

    /// The instance restricted to the corridor of `v`, with the matching
    /// principal submatrix of the cost.
    pub fn restrict(&self, v: usize) -> Result<QsppInstance> {
        let g = self.graph.prune_to_corridor(v)?;
        let map = g.arc_map().to_vec();
        let cost = RationalMatrix::from_fn(map.len(), map.len(), |i, j| self.cost[(map[i], map[j])].clone());
        Ok(QsppInstance { graph: g, cost })
    }

    /// Minimum path cost and a minimizing path (lexicographically first).
    pub fn brute_force_opt(&self, cap: usize) -> Result<(Rational, Vec<usize>)> {
        let mut best: Option<(Rational, Vec<usize>)> = None;
        self.graph.for_each_st_path(cap, |p| {
            let v = self.path_cost(p);
            if best.as_ref().map_or(true, |(b, _)| v < *b) {
                best = Some((v, p.to_vec()));
            }
        })?;
        best.ok_or_else(|| Error::Validation("no s-t path".into()))
    }
}

/// Matrices `Q_i` with linearization vectors `c_i`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LinearizableFamily {
    pub members: Vec<(RationalMatrix, RationalVector)>,
}

impl LinearizableFamily {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, q: RationalMatrix, c: RationalVector) {
        self.members.push((q, c));
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// `A(alpha) = sum alpha_i Q_i`.
    pub fn apply(&self, alpha: &[Rational], m: usize) -> RationalMatrix {
        let mut out = RationalMatrix::zeros(m, m);
        for ((q, _), a) in self.members.iter().zip(alpha) {
            if !a.is_zero() {
                out = out.add(&q.scale(a));
            }
        }
        out
    }

    /// `C alpha = sum alpha_i c_i`.
    pub fn combine_vectors(&self, alpha: &[Rational], m: usize) -> RationalVector {
        let mut out = vec![Rational::zero(); m];
        for ((_, c), a) in self.members.iter().zip(alpha) {
            for (o, ci) in out.iter_mut().zip(c) {
                *o += a * ci;
            }
        }
        out
    }

    /// The `m x k` matrix `C = [c_1 .. c_k]`.
    pub fn c_matrix(&self, m: usize) -> RationalMatrix {
        RationalMatrix::from_fn(m, self.len(), |i, k| self.members[k].1[i].clone())
    }

    /// Checks every member on the enumerable feasible set of `inst`.
    pub fn verify(&self, inst: &BqpInstance, cap: usize) -> Result<bool> {
        for (q, c) in &self.members {
            if !is_linearization(inst, q, c, cap)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Flow encoding: one row per vertex, `+1` on outgoing and `-1` on incoming
/// arcs, `b = e_s - e_t`.
pub fn qspp_to_bqp(q: &QsppInstance) -> BqpInstance {
    let g = &q.graph;
    let b_mat = RationalMatrix::from_fn(g.n(), g.m(), |v, a| {
        let (t, h) = g.arc(a);
        if t == v {
            Rational::one()
        } else if h == v {
            -Rational::one()
        } else {
            Rational::zero()
        }
    });
    let mut rhs = vec![Rational::zero(); g.n()];
    rhs[g.source()] = Rational::one();
    rhs[g.target()] = -Rational::one();
    BqpInstance {
        constraints: b_mat,
        rhs,
        cost: q.cost.clone(),
        linear: vec![Rational::zero(); g.m()],
        integral_polytope: true,
        structure: Structure::Qspp(g.clone()),
    }
}

/// Kronecker product `A ⊗ D`.
pub fn kronecker(a: &RationalMatrix, d: &RationalMatrix) -> RationalMatrix {
    let (ar, ac, dr, dc) = (a.rows(), a.cols(), d.rows(), d.cols());
    RationalMatrix::from_fn(ar * dr, ac * dc, |i, j| &a[(i / dr, j / dc)] * &d[(i % dr, j % dc)])
}

/// Koopmans-Beckmann QAP as a BQP over `x_{i n + k} = X_{ik}` with
/// `Q = A ⊗ D`. Row-sum constraints for every row of `X`, column sums for
/// all but the last column (that one is implied).
pub fn qap_to_bqp(a: &RationalMatrix, d: &RationalMatrix) -> Result<BqpInstance> {
    let n = a.rows();
    if !a.is_square() || !d.is_square() || d.rows() != n || n == 0 {
        return Err(Error::DimensionMismatch(format!(
            "QAP needs two square matrices of equal size, got {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            d.rows(),
            d.cols()
        )));
    }
    let rows = 2 * n - 1;
    let b_mat = RationalMatrix::from_fn(rows, n * n, |r, v| {
        let (i, k) = (v / n, v % n);
        let hit = if r < n { i == r } else { k == r - n };
        if hit {
            Rational::one()
        } else {
            Rational::zero()
        }
    });
    Ok(BqpInstance {
        constraints: b_mat,
        rhs: vec![Rational::one(); rows],
        cost: kronecker(a, d),
        linear: vec![Rational::zero(); n * n],
        integral_polytope: true,
        structure: Structure::Qap { n },
    })
}

/// `Q = B^T Y + Diag(z)` with `c = Y^T b + z`, or the symmetrized
/// `Q = B^T Y + Y^T B + Diag(z)` with `c = 2 Y^T b + z`.
pub fn make_linearizable(
    inst: &BqpInstance,
    y: &RationalMatrix,
    z: &[Rational],
    symmetrize: bool,
) -> Result<(RationalMatrix, RationalVector)> {
    let m = inst.m();
    if y.rows() != inst.rows() || y.cols() != m || z.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "Y must be {}x{m} and z of length {m}",
            inst.rows()
        )));
    }
    let bty = inst.constraints.transpose().mul(y);
    let mut q = if symmetrize { bty.add(&bty.transpose()) } else { bty };
    for (i, zi) in z.iter().enumerate() {
        q[(i, i)] += zi;
    }
    let ytb = y.transpose().mul_vec(&inst.rhs);
    let factor = if symmetrize { Rational::from_integer(2) } else { Rational::one() };
    let c = ytb.iter().zip(z).map(|(a, zi)| &(a * &factor) + zi).collect();
    Ok((q, c))
}

/// `M_ij = a_i + a_j` off the diagonal, `M_ii = z_i`.
pub fn weak_sum_matrix(a: &[Rational], z: &[Rational]) -> RationalMatrix {
    let m = a.len();
    RationalMatrix::from_fn(m, m, |i, j| if i == j { z[i].clone() } else { &a[i] + &a[j] })
}

/// Linearization of [`weak_sum_matrix`] when every feasible point has exactly
/// `card` ones: `c_i = 2 a_i (card - 1) + z_i`.
pub fn weak_sum_linearization(a: &[Rational], z: &[Rational], card: usize) -> RationalVector {
    let k = Rational::from_integer(2 * (card as i64 - 1));
    a.iter().zip(z).map(|(ai, zi)| &(ai * &k) + zi).collect()
}

/// The common cardinality of all feasible points, if there is one.
pub fn constant_cardinality(inst: &BqpInstance, cap: usize) -> Result<Option<usize>> {
    let mut card: Option<Option<usize>> = None;
    inst.for_each_feasible(cap, |s| {
        card = match card {
            None => Some(Some(s.len())),
            Some(Some(c)) if c == s.len() => Some(Some(c)),
            _ => Some(None),
        };
    })?;
    Ok(card.flatten())
}

/// Exact optimum of `x^T Q x + l^T x` over the feasible set, with a
/// minimizing support.
pub fn brute_force_opt(inst: &BqpInstance, cap: usize) -> Result<(Rational, Vec<usize>)> {
    let mut best: Option<(Rational, Vec<usize>)> = None;
    inst.for_each_feasible(cap, |s| {
        let v = inst.objective(s);
        if best.as_ref().map_or(true, |(b, _)| v < *b) {
            best = Some((v, s.to_vec()));
        }
    })?;
    best.ok_or_else(|| Error::Validation("empty feasible set".into()))
}

/// Complete DAG on `n` vertices with `q_ef = |i-j|^2` whenever the arcs
/// `e = (i,j)` and `f = (k,l)` have the same length `|i-j| = |k-l|`
/// (including `e = f`), zero otherwise.
pub fn generate_tournament(n: usize) -> Result<QsppInstance> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("tournament needs n >= 2, got {n}")));
    }
    let g = graph::fixtures::tournament(n);
    let len: Vec<i64> = g.arcs().iter().map(|&(i, j)| (j - i) as i64).collect();
    let m = g.m();
    let cost = RationalMatrix::from_fn(m, m, |e, f| {
        if len[e] == len[f] {
            Rational::from_integer(len[e] * len[e])
        } else {
            Rational::zero()
        }
    });
    QsppInstance::new(g, cost)
}

/// True iff `x^T Q x = c^T x` on every feasible point.
pub fn is_linearization(inst: &BqpInstance, q: &RationalMatrix, c: &[Rational], cap: usize) -> Result<bool> {
    let mut ok = true;
    inst.for_each_feasible(cap, |s| {
        if ok {
            let lhs = q.quadratic_form_support(s);
            let rhs: Rational = s.iter().map(|&i| &c[i]).sum();
            ok = lhs == rhs;
        }
    })?;
    Ok(ok)
}

/// `Q' = Q + S + Diag(d)`, `l' = l - d`; the objective of every binary point
/// is unchanged.
pub fn reformulate(inst: &BqpInstance, s: &RationalMatrix, d: &[Rational]) -> Result<BqpInstance> {
    let m = inst.m();
    if s.rows() != m || s.cols() != m || d.len() != m {
        return Err(Error::DimensionMismatch(format!("S must be {m}x{m} and d of length {m}")));
    }
    if !s.is_skew_symmetric() {
        return Err(Error::NotSkewSymmetric);
    }
    let mut cost = inst.cost.add(s);
    for (i, di) in d.iter().enumerate() {
        cost[(i, i)] += di;
    }
    let linear = inst.linear.iter().zip(d).map(|(l, di)| l - di).collect();
    Ok(inst.with_cost(cost, linear))
}

/// Solves the all-paths system `sum_{e in P} c_e = x_P^T Q x_P` for a
/// linearization vector; `None` when it is inconsistent.
pub fn linearization_by_enumeration(q: &QsppInstance, cap: usize) -> Result<Option<RationalVector>> {
    let paths = q.graph.enumerate_st_paths(cap)?;
    let m = q.m();
    let mat = RationalMatrix::from_fn(paths.len(), m, |r, a| {
        if paths[r].contains(a) {
            Rational::one()
        } else {
            Rational::zero()
        }
    });
    let rhs: Vec<Rational> = paths.iter().map(|p| q.path_cost(&p.arcs)).collect();
    Ok(mat.solve(&rhs))
}

/// Dimension of the space of zero-diagonal linearizable matrices computed
/// from the path incidence matrix `M`: a cost matrix is linearizable iff its
/// path-cost vector is orthogonal to the left null space of `M`.
pub fn spanning_dimension_by_enumeration(g: &Dag, cap: usize) -> Result<usize> {
    let paths = g.enumerate_st_paths(cap)?;
    let m = g.m();
    let mt = RationalMatrix::from_fn(m, paths.len(), |a, r| {
        if paths[r].contains(a) {
            Rational::one()
        } else {
            Rational::zero()
        }
    });
    let left_null = mt.null_space_basis();
    let coords: Vec<(usize, usize)> = (0..m).flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j))).collect();
    // Row w, column (i,j): sum of w_P over paths containing both arcs.
    let obstruction = RationalMatrix::from_fn(left_null.len(), coords.len(), |w, k| {
        let (i, j) = coords[k];
        paths
            .iter()
            .enumerate()
            .filter(|(_, p)| p.contains(i) && p.contains(j))
            .map(|(r, _)| &left_null[w][r])
            .sum()
    });
    Ok(coords.len() - obstruction.rank())
}

/// Random instance generators.
pub mod random {
    use super::*;

    /// Random DAG on `n` vertices, source 0 and target `n-1`, with about `m`
    /// arcs (at least what is needed to put every vertex on an s-t path, at
    /// most the complete DAG). Vertices are numbered in a topological order
    /// and no arc is repeated.
    pub fn corridor_dag<R: Rng + ?Sized>(rng: &mut R, n: usize, m: usize) -> Dag {
        assert!(n >= 2);
        let mut set: BTreeSet<(usize, usize)> = BTreeSet::new();
        for v in 1..n {
            let u = rng.gen_range(0..v);
            set.insert((u, v));
        }
        for u in 1..n - 1 {
            if !set.iter().any(|&(a, _)| a == u) {
                let v = rng.gen_range(u + 1..n);
                set.insert((u, v));
            }
        }
        let max = n * (n - 1) / 2;
        let target = m.min(max);
        while set.len() < target {
            let u = rng.gen_range(0..n - 1);
            let v = rng.gen_range(u + 1..n);
            set.insert((u, v));
        }
        let mut arcs: Vec<(usize, usize)> = set.into_iter().collect();
        arcs.shuffle(rng);
        Dag::new(n, arcs, 0, n - 1).expect("generated graph is a DAG")
    }

    pub fn int_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, lo: i64, hi: i64) -> RationalMatrix {
        RationalMatrix::from_fn(rows, cols, |_, _| Rational::from_integer(rng.gen_range(lo..=hi)))
    }

    pub fn int_vector<R: Rng + ?Sized>(rng: &mut R, len: usize, lo: i64, hi: i64) -> RationalVector {
        (0..len).map(|_| Rational::from_integer(rng.gen_range(lo..=hi))).collect()
    }

    /// Random skew-symmetric matrix with integer entries in `[-r, r]`.
    pub fn skew_matrix<R: Rng + ?Sized>(rng: &mut R, m: usize, r: i64) -> RationalMatrix {
        let mut s = RationalMatrix::zeros(m, m);
        for i in 0..m {
            for j in i + 1..m {
                let v = Rational::from_integer(rng.gen_range(-r..=r));
                s[(j, i)] = -&v;
                s[(i, j)] = v;
            }
        }
        s
    }

    /// QSPP on a random corridor DAG with integer costs in `[lo, hi]`;
    /// `density` is the probability that an entry is nonzero.
    pub fn qspp<R: Rng + ?Sized>(rng: &mut R, n: usize, m: usize, lo: i64, hi: i64, density: f64) -> QsppInstance {
        let g = corridor_dag(rng, n, m);
        let k = g.m();
        let cost = RationalMatrix::from_fn(k, k, |_, _| {
            if rng.gen_bool(density) {
                Rational::from_integer(rng.gen_range(lo..=hi))
            } else {
                Rational::zero()
            }
        });
        QsppInstance::new(g, cost).expect("dimensions agree")
    }

    /// QAP with integer flow and distance matrices in `[0, hi]`.
    pub fn qap<R: Rng + ?Sized>(rng: &mut R, n: usize, hi: i64) -> BqpInstance {
        let a = int_matrix(rng, n, n, 0, hi);
        let d = int_matrix(rng, n, n, 0, hi);
        qap_to_bqp(&a, &d).expect("square matrices")
    }
}
