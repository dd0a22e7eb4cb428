//! Directed acyclic graphs for the quadratic shortest path problem.
//!
//! Vertices and arcs are 0-based internally. Arc labels are the positions in
//! the arc list given at construction and are never reordered; a graph
//! obtained by [`Dag::prune_to_corridor`] keeps its arcs in increasing parent
//! label order and records the map back to the parent labels.

use std::collections::{BTreeSet, BinaryHeap};
use std::cmp::Reverse;

use crate::error::{Error, Result};
use crate::exactnum::Rational;

/// Default cap on the number of enumerated s-t paths.
pub const DEFAULT_PATH_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dag {
    n: usize,
    arcs: Vec<(usize, usize)>,
    source: usize,
    target: usize,
    out: Vec<Vec<usize>>,
    inc: Vec<Vec<usize>>,
    order: Vec<usize>,
    position: Vec<usize>,
    /// Local arc label -> parent arc label.
    arc_map: Vec<usize>,
    /// Local vertex -> parent vertex.
    vertex_map: Vec<usize>,
}

/// An s-t path as its ordered arc labels.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StPath {
    pub arcs: Vec<usize>,
    m: usize,
}

impl StPath {
    pub fn new(arcs: Vec<usize>, m: usize) -> Self {
        StPath { arcs, m }
    }

    pub fn contains(&self, arc: usize) -> bool {
        self.arcs.contains(&arc)
    }

    pub fn incidence(&self) -> Vec<bool> {
        let mut v = vec![false; self.m];
        for &a in &self.arcs {
            v[a] = true;
        }
        v
    }

    pub fn incidence_rational(&self) -> Vec<Rational> {
        self.incidence()
            .into_iter()
            .map(|b| if b { Rational::one() } else { Rational::zero() })
            .collect()
    }
}

/// Kahn's algorithm, always releasing the smallest available vertex first so
/// the order is deterministic.
pub fn topological_sort(n: usize, arcs: &[(usize, usize)]) -> Result<Vec<usize>> {
    let mut indeg = vec![0usize; n];
    let mut out = vec![Vec::new(); n];
    for &(u, v) in arcs {
        out[u].push(v);
        indeg[v] += 1;
    }
    let mut heap: BinaryHeap<Reverse<usize>> =
        (0..n).filter(|&v| indeg[v] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(u)) = heap.pop() {
        order.push(u);
        for &v in &out[u] {
            indeg[v] -= 1;
            if indeg[v] == 0 {
                heap.push(Reverse(v));
            }
        }
    }
    if order.len() < n {
        let stuck = (0..n).find(|&v| indeg[v] > 0).unwrap_or(0);
        return Err(Error::CycleDetected(stuck));
    }
    Ok(order)
}

impl Dag {
    /// Builds a graph, rejecting out-of-range endpoints, self-loops and cycles.
    pub fn new(n: usize, arcs: Vec<(usize, usize)>, source: usize, target: usize) -> Result<Self> {
        if source >= n || target >= n {
            return Err(Error::Validation(format!(
                "source/target ({source}, {target}) out of range for {n} vertices"
            )));
        }
        if source == target {
            return Err(Error::Validation("source equals target".into()));
        }
        for (i, &(u, v)) in arcs.iter().enumerate() {
            if u >= n || v >= n {
                return Err(Error::Validation(format!("arc {i} = ({u}, {v}) out of range")));
            }
            if u == v {
                return Err(Error::CycleDetected(u));
            }
        }
        let m = arcs.len();
        Self::build(n, arcs, source, target, (0..m).collect(), (0..n).collect())
    }

    fn build(
        n: usize,
        arcs: Vec<(usize, usize)>,
        source: usize,
        target: usize,
        arc_map: Vec<usize>,
        vertex_map: Vec<usize>,
    ) -> Result<Self> {
        let order = topological_sort(n, &arcs)?;
        let mut position = vec![0; n];
        for (i, &v) in order.iter().enumerate() {
            position[v] = i;
        }
        let mut out = vec![Vec::new(); n];
        let mut inc = vec![Vec::new(); n];
        for (a, &(u, v)) in arcs.iter().enumerate() {
            out[u].push(a);
            inc[v].push(a);
        }
        Ok(Dag {
            n,
            arcs,
            source,
            target,
            out,
            inc,
            order,
            position,
            arc_map,
            vertex_map,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.arcs.len()
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn arcs(&self) -> &[(usize, usize)] {
        &self.arcs
    }

    pub fn arc(&self, a: usize) -> (usize, usize) {
        self.arcs[a]
    }

    pub fn tail(&self, a: usize) -> usize {
        self.arcs[a].0
    }

    pub fn head(&self, a: usize) -> usize {
        self.arcs[a].1
    }

    /// Outgoing arc labels of `v`, ascending.
    pub fn out_arcs(&self, v: usize) -> &[usize] {
        &self.out[v]
    }

    /// Incoming arc labels of `v`, ascending.
    pub fn in_arcs(&self, v: usize) -> &[usize] {
        &self.inc[v]
    }

    pub fn topological_order(&self) -> &[usize] {
        &self.order
    }

    pub fn topological_position(&self, v: usize) -> usize {
        self.position[v]
    }

    pub fn arc_map(&self) -> &[usize] {
        &self.arc_map
    }

    pub fn vertex_map(&self) -> &[usize] {
        &self.vertex_map
    }

    /// Local label of a parent arc, if the arc survived pruning.
    pub fn local_arc(&self, parent_arc: usize) -> Option<usize> {
        self.arc_map.binary_search(&parent_arc).ok()
    }

    /// Local index of a parent vertex.
    pub fn local_vertex(&self, parent_vertex: usize) -> Option<usize> {
        self.vertex_map.iter().position(|&v| v == parent_vertex)
    }

    pub fn is_transshipment(&self, v: usize) -> bool {
        v != self.source && v != self.target
    }

    /// Vertices reachable from `v` (including `v`).
    pub fn reachable_from(&self, v: usize) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        seen[v] = true;
        for &u in &self.order[self.position[v]..] {
            if seen[u] {
                for &a in &self.out[u] {
                    seen[self.head(a)] = true;
                }
            }
        }
        seen
    }

    /// Vertices from which `v` is reachable (including `v`).
    pub fn reaching(&self, v: usize) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        seen[v] = true;
        for &u in self.order[..=self.position[v]].iter().rev() {
            if seen[u] {
                for &a in &self.inc[u] {
                    seen[self.tail(a)] = true;
                }
            }
        }
        seen
    }

    /// True when every vertex lies on some s-t path.
    pub fn is_corridor(&self) -> bool {
        let fwd = self.reachable_from(self.source);
        let bwd = self.reaching(self.target);
        (0..self.n).all(|v| fwd[v] && bwd[v])
    }

    /// Induced subgraph of vertices and arcs lying on some s-`v` path, with
    /// `v` as its target. Arcs keep their relative label order.
    pub fn prune_to_corridor(&self, v: usize) -> Result<Dag> {
        let fwd = self.reachable_from(self.source);
        if v >= self.n || !fwd[v] {
            return Err(Error::Unreachable(v));
        }
        let bwd = self.reaching(v);
        let keep: Vec<bool> = (0..self.n).map(|u| fwd[u] && bwd[u]).collect();
        let mut local = vec![usize::MAX; self.n];
        let mut vertex_map = Vec::new();
        for u in 0..self.n {
            if keep[u] {
                local[u] = vertex_map.len();
                vertex_map.push(self.vertex_map[u]);
            }
        }
        let mut arcs = Vec::new();
        let mut arc_map = Vec::new();
        for (a, &(x, y)) in self.arcs.iter().enumerate() {
            if keep[x] && keep[y] {
                arcs.push((local[x], local[y]));
                arc_map.push(self.arc_map[a]);
            }
        }
        Dag::build(
            vertex_map.len(),
            arcs,
            local[self.source],
            local[v],
            arc_map,
            vertex_map,
        )
    }

    /// The corridor for the graph's own target.
    pub fn corridor(&self) -> Result<Dag> {
        self.prune_to_corridor(self.target)
    }

    /// All s-t paths in lexicographic order of their arc label sequences.
    pub fn enumerate_st_paths(&self, cap: usize) -> Result<Vec<StPath>> {
        let mut paths = Vec::new();
        self.for_each_st_path(cap, |p| paths.push(StPath::new(p.to_vec(), self.m())))?;
        Ok(paths)
    }

    /// Visits s-t paths without materializing them all; fails once more than
    /// `cap` paths have been seen.
    pub fn for_each_st_path(&self, cap: usize, mut f: impl FnMut(&[usize])) -> Result<usize> {
        let useful = self.reaching(self.target);
        let mut count = 0usize;
        let mut stack: Vec<usize> = Vec::new();
        if !useful[self.source] {
            return Ok(0);
        }
        // Explicit DFS: frames hold (vertex, next out-arc index).
        let mut frames: Vec<(usize, usize)> = vec![(self.source, 0)];
        while let Some(frame) = frames.last_mut() {
            let (u, i) = *frame;
            if u == self.target {
                count += 1;
                if count > cap {
                    return Err(Error::PathExplosion(cap));
                }
                f(&stack);
                frames.pop();
                stack.pop();
                continue;
            }
            if i == self.out[u].len() {
                frames.pop();
                stack.pop();
                continue;
            }
            frame.1 += 1;
            let a = self.out[u][i];
            let w = self.head(a);
            if useful[w] {
                stack.push(a);
                frames.push((w, 0));
            }
        }
        Ok(count)
    }

    /// Lexicographically smallest s-`u` path (arc labels), found by DFS that
    /// tries smaller labels first. `None` if `u` is unreachable.
    pub fn smallest_path_to(&self, u: usize) -> Option<Vec<usize>> {
        let useful = self.reaching(u);
        if !useful[self.source] {
            return None;
        }
        // Every vertex on the DFS frontier can reach `u`, so greedy descent
        // never backtracks.
        let mut path = Vec::new();
        let mut v = self.source;
        while v != u {
            let a = *self.out[v].iter().find(|&&a| useful[self.head(a)])?;
            path.push(a);
            v = self.head(a);
        }
        Some(path)
    }

    /// Smallest-label outgoing arc of each transshipment vertex.
    pub fn arc_basis(&self) -> ArcBasis {
        let mut nonbasic_of = vec![None; self.n];
        let mut is_basic = vec![true; self.m()];
        for v in 0..self.n {
            if self.is_transshipment(v) {
                if let Some(&a) = self.out[v].first() {
                    nonbasic_of[v] = Some(a);
                    is_basic[a] = false;
                }
            }
        }
        ArcBasis {
            nonbasic_of,
            is_basic,
        }
    }

    /// Sorted labels of the non-basic arcs.
    pub fn non_basic_arcs(&self) -> Vec<usize> {
        let basis = self.arc_basis();
        let mut v: Vec<usize> = basis.nonbasic_of.iter().flatten().copied().collect();
        v.sort_unstable();
        v
    }

    /// Basic arcs ordered by the topological position of their tail, then by
    /// label. In this order the critical-path matrix is unit lower triangular.
    pub fn ordered_basic_arcs(&self) -> Vec<usize> {
        let basis = self.arc_basis();
        let mut basic: Vec<usize> = (0..self.m()).filter(|&a| basis.is_basic[a]).collect();
        basic.sort_by_key(|&a| (self.position[self.tail(a)], a));
        basic
    }

    /// Critical path of the basic arc `e = (u, v)`: the smallest s-u path,
    /// then `e`, then the unique all-non-basic v-t path.
    pub fn critical_path(&self, e: usize) -> Result<StPath> {
        let basis = self.arc_basis();
        self.critical_path_with(&basis, e, None)
    }

    pub(crate) fn critical_path_with(
        &self,
        basis: &ArcBasis,
        e: usize,
        prefix: Option<&[usize]>,
    ) -> Result<StPath> {
        if !basis.is_basic[e] {
            return Err(Error::InvalidArgument(format!("arc {e} is non-basic")));
        }
        let (u, mut v) = self.arc(e);
        let mut arcs = match prefix {
            Some(p) => p.to_vec(),
            None => self
                .smallest_path_to(u)
                .ok_or_else(|| Error::AssumptionViolated(format!("vertex {u} unreachable from source")))?,
        };
        arcs.push(e);
        while v != self.target {
            let f = basis.nonbasic_of[v].ok_or_else(|| {
                Error::AssumptionViolated(format!("vertex {v} has no outgoing arc"))
            })?;
            arcs.push(f);
            v = self.head(f);
        }
        Ok(StPath::new(arcs, self.m()))
    }

    /// Critical paths of all basic arcs, in [`Dag::ordered_basic_arcs`] order.
    pub fn critical_paths(&self) -> Result<Vec<(usize, StPath)>> {
        let basis = self.arc_basis();
        let mut prefixes: Vec<Option<Vec<usize>>> = vec![None; self.n];
        self.ordered_basic_arcs()
            .into_iter()
            .map(|e| {
                let u = self.tail(e);
                if prefixes[u].is_none() {
                    prefixes[u] = Some(self.smallest_path_to(u).ok_or_else(|| {
                        Error::AssumptionViolated(format!("vertex {u} unreachable from source"))
                    })?);
                }
                let p = self.critical_path_with(&basis, e, prefixes[u].as_deref())?;
                Ok((e, p))
            })
            .collect()
    }

    /// Transitive closure, reflexive.
    pub fn reachability(&self) -> Vec<Vec<bool>> {
        let mut reach = vec![vec![false; self.n]; self.n];
        for &u in self.order.iter().rev() {
            reach[u][u] = true;
            for &a in &self.out[u] {
                let w = self.head(a);
                let (ru, rw) = if u < w {
                    let (lo, hi) = reach.split_at_mut(w);
                    (&mut lo[u], &hi[0])
                } else {
                    let (lo, hi) = reach.split_at_mut(u);
                    (&mut hi[0], &lo[w])
                };
                for (x, &y) in ru.iter_mut().zip(rw.iter()) {
                    *x |= y;
                }
            }
        }
        reach
    }

    /// Pairs `(e, f)`, `e < f`, that can never lie on a common s-t path:
    /// shared tail, shared head, or neither arc can precede the other.
    pub fn forbidden_pairs(&self) -> BTreeSet<(usize, usize)> {
        let reach = self.reachability();
        let mut pairs = BTreeSet::new();
        for e in 0..self.m() {
            let (te, he) = self.arc(e);
            for f in e + 1..self.m() {
                let (tf, hf) = self.arc(f);
                if te == tf || he == hf || (!reach[he][tf] && !reach[hf][te]) {
                    pairs.insert((e, f));
                }
            }
        }
        pairs
    }
}

/// Non-basic arc choice for a graph.
#[derive(Debug, Clone)]
pub struct ArcBasis {
    /// For each vertex, its non-basic outgoing arc (transshipment vertices only).
    pub nonbasic_of: Vec<Option<usize>>,
    pub is_basic: Vec<bool>,
}

impl ArcBasis {
    pub fn basic_count(&self) -> usize {
        self.is_basic.iter().filter(|&&b| b).count()
    }
}

/// Handy fixtures, 0-based. Used by tests and examples.
pub mod fixtures {
    use super::Dag;

    /// Vertices 0..4, arcs a1=(0,1), a2=(0,2), a3=(1,3), a4=(2,3).
    pub fn diamond() -> Dag {
        Dag::new(4, vec![(0, 1), (0, 2), (1, 3), (2, 3)], 0, 3).unwrap()
    }

    /// Two diamonds in series on vertices 0..7 (8 arcs).
    pub fn double_diamond() -> Dag {
        Dag::new(
            7,
            vec![
                (0, 1),
                (0, 2),
                (1, 3),
                (2, 3),
                (3, 4),
                (3, 5),
                (4, 6),
                (5, 6),
            ],
            0,
            6,
        )
        .unwrap()
    }

    /// Complete DAG on `n` vertices with arcs (i, j), i < j, in lexicographic order.
    pub fn tournament(n: usize) -> Dag {
        let mut arcs = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                arcs.push((i, j));
            }
        }
        Dag::new(n, arcs, 0, n - 1).unwrap()
    }

    /// s -> v1 -> ... -> t.
    pub fn single_path(n: usize) -> Dag {
        Dag::new(n, (0..n - 1).map(|i| (i, i + 1)).collect(), 0, n - 1).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn topological_sort_cases() {
        assert_eq!(topological_sort(2, &[(0, 1)]).unwrap(), vec![0, 1]);
        let order = topological_sort(4, &[(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap();
        assert!(order == vec![0, 1, 2, 3] || order == vec![0, 2, 1, 3]);
        assert!(matches!(topological_sort(2, &[(0, 1), (1, 0)]), Err(Error::CycleDetected(_))));
        assert!(matches!(Dag::new(2, vec![(0, 1), (1, 0)], 0, 1), Err(Error::CycleDetected(_))));
    }

    #[test]
    fn topological_order_respects_arcs() {
        let g = tournament(7);
        for &(u, v) in g.arcs() {
            assert!(g.topological_position(u) < g.topological_position(v));
        }
    }

    #[test]
    fn prune_diamond() {
        let g = diamond();
        let full = g.prune_to_corridor(3).unwrap();
        assert_eq!(full.arcs(), g.arcs());
        let g2 = g.prune_to_corridor(1).unwrap();
        assert_eq!(g2.m(), 1);
        assert_eq!(g2.arc_map(), &[0]);
        assert_eq!(g2.n(), 2);
        assert_eq!(g2.vertex_map(), &[0, 1]);
    }

    #[test]
    fn prune_double_diamond_to_middle() {
        let g = double_diamond();
        let first = g.prune_to_corridor(3).unwrap();
        // BFS oracle: arcs with tail reachable from s and head reaching 3.
        let fwd = g.reachable_from(0);
        let bwd = g.reaching(3);
        let expected: Vec<usize> = (0..g.m())
            .filter(|&a| fwd[g.tail(a)] && bwd[g.head(a)] && bwd[g.tail(a)])
            .collect();
        assert_eq!(first.arc_map(), expected.as_slice());
        assert_eq!(first.arc_map(), &[0, 1, 2, 3]);
        assert!(first.is_corridor());
    }

    #[test]
    fn prune_unreachable() {
        let g = Dag::new(3, vec![(0, 2)], 0, 2).unwrap();
        assert!(matches!(g.prune_to_corridor(1), Err(Error::Unreachable(1))));
        assert!(!g.is_corridor());
    }

    #[test]
    fn enumerate_paths() {
        let paths = diamond().enumerate_st_paths(10).unwrap();
        assert_eq!(paths.iter().map(|p| p.arcs.clone()).collect::<Vec<_>>(), vec![vec![0, 2], vec![1, 3]]);
        assert_eq!(single_path(2).enumerate_st_paths(10).unwrap().len(), 1);
        assert_eq!(tournament(13).enumerate_st_paths(DEFAULT_PATH_CAP).unwrap().len(), 1 << 11);
        assert!(matches!(tournament(8).enumerate_st_paths(10), Err(Error::PathExplosion(10))));
        let t = tournament(6).enumerate_st_paths(100).unwrap();
        assert!(t.windows(2).all(|w| w[0].arcs < w[1].arcs));
    }

    #[test]
    fn paths_are_valid() {
        let g = tournament(6);
        for p in g.enumerate_st_paths(100).unwrap() {
            assert_eq!(g.tail(p.arcs[0]), g.source());
            assert_eq!(g.head(*p.arcs.last().unwrap()), g.target());
            for w in p.arcs.windows(2) {
                assert_eq!(g.head(w[0]), g.tail(w[1]));
            }
        }
    }

    #[test]
    fn non_basic_arcs_cases() {
        assert_eq!(diamond().non_basic_arcs(), vec![2, 3]);
        assert_eq!(single_path(3).non_basic_arcs(), vec![1]);
        // Vertex 1 has outgoing arcs labeled 3 and 2 in file order: 2 wins.
        let g = Dag::new(4, vec![(0, 1), (0, 2), (1, 3), (1, 2), (2, 3)], 0, 3).unwrap();
        assert_eq!(g.arc_basis().nonbasic_of[1], Some(2));
    }

    #[test]
    fn basic_count_identity() {
        for g in [diamond(), double_diamond(), tournament(6), single_path(5)] {
            assert_eq!(g.non_basic_arcs().len(), g.n() - 2);
            assert_eq!(g.arc_basis().basic_count() + g.n(), g.m() + 2);
        }
    }

    #[test]
    fn critical_path_cases() {
        let g = diamond();
        assert_eq!(g.critical_path(0).unwrap().arcs, vec![0, 2]);
        assert_eq!(g.critical_path(1).unwrap().arcs, vec![1, 3]);
        assert!(g.critical_path(2).is_err());
        let dd = double_diamond();
        // Arc (4,6) is the only arc leaving vertex 4, hence non-basic; the
        // basic arc (3,5) of the second diamond takes the smallest s-3 prefix.
        assert!(dd.critical_path(6).is_err());
        assert_eq!(dd.smallest_path_to(3).unwrap(), vec![0, 2]);
        assert_eq!(dd.critical_path(5).unwrap().arcs, vec![0, 2, 5, 7]);
    }

    #[test]
    fn critical_paths_are_lower_triangular() {
        for g in [diamond(), double_diamond(), tournament(7)] {
            let basis = g.arc_basis();
            let order = g.ordered_basic_arcs();
            let cps = g.critical_paths().unwrap();
            for (row, (e, p)) in cps.iter().enumerate() {
                assert_eq!(order[row], *e);
                assert!(p.contains(*e));
                let after = p.arcs.iter().position(|&a| a == *e).unwrap();
                assert!(p.arcs[after + 1..].iter().all(|&a| !basis.is_basic[a]));
                for (col, &f) in order.iter().enumerate() {
                    if col > row {
                        assert!(!p.contains(f));
                    }
                }
            }
        }
    }

    #[test]
    fn forbidden_pairs_cases() {
        let expected: BTreeSet<(usize, usize)> = [(0, 1), (2, 3), (0, 3), (1, 2)].into_iter().collect();
        assert_eq!(diamond().forbidden_pairs(), expected);
        assert!(single_path(5).forbidden_pairs().is_empty());
    }

    #[test]
    fn forbidden_pairs_sound() {
        for g in [tournament(5), double_diamond(), tournament(7)] {
            let pairs = g.forbidden_pairs();
            for p in g.enumerate_st_paths(1000).unwrap() {
                for &(e, f) in &pairs {
                    assert!(!(p.contains(e) && p.contains(f)));
                }
            }
        }
    }
}
