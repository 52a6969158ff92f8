//! Closed space curves covering a watertight triangle mesh.
//!
//! A perfect matching of the (3-regular) dual graph pairs up adjacent
//! triangles. Dropping the matched dual edges leaves a 2-regular graph,
//! i.e. disjoint cycles of faces. A spanning tree over those cycles, whose
//! edges are matched face pairs, tells us where to splice the cycles into
//! one loop: each splice walks across the shared edge of the pair twice.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use crate::mesh::TriangleMesh;
use crate::tour::Curve;
use crate::{Error, Result};

const NONE: usize = usize::MAX;

/// One dual edge: two faces sharing the mesh edge `(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DualEdge {
    pub faces: (usize, usize),
    pub mesh_edge: (usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualGraph {
    pub n_nodes: usize,
    pub edges: Vec<DualEdge>,
    /// Per node: `(neighbour, edge index)`.
    pub adjacency: Vec<Vec<(usize, usize)>>,
}

impl DualGraph {
    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    /// Builds a graph directly from a face-pair edge list (used for
    /// abstract test graphs without a mesh behind them).
    pub fn from_edges(n_nodes: usize, pairs: &[(usize, usize)]) -> Self {
        let mut adjacency = vec![Vec::new(); n_nodes];
        let mut edges = Vec::with_capacity(pairs.len());
        for (id, &(a, b)) in pairs.iter().enumerate() {
            adjacency[a].push((b, id));
            adjacency[b].push((a, id));
            edges.push(DualEdge { faces: (a, b), mesh_edge: (NONE, NONE) });
        }
        Self { n_nodes, edges, adjacency }
    }
}

/// A perfect matching as indices into [`DualGraph::edges`], plus the mate
/// of every node.
#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    pub edges: Vec<usize>,
    pub mate: Vec<usize>,
}

/// One vertex of the output loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Visit {
    /// Centroid of a face.
    Face(usize),
    /// Midpoint of the mesh edge shared by a matched pair, crossed while
    /// bridging two face cycles.
    Bridge { from: usize, to: usize, mesh_edge: (usize, usize) },
}

#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianLoop {
    pub visits: Vec<Visit>,
    pub n_cycles: usize,
    pub curve: Curve,
}

/// Node per face, edge per shared mesh edge. Fails unless every mesh edge
/// borders exactly two faces.
pub fn dual_graph(mesh: &TriangleMesh) -> Result<DualGraph> {
    let mut by_edge: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (f, tri) in mesh.faces.iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            by_edge.entry((a.min(b), a.max(b))).or_default().push(f);
        }
    }
    let n = mesh.faces.len();
    let mut adjacency = vec![Vec::new(); n];
    let mut edges = Vec::new();
    for (key, faces) in by_edge {
        if faces.len() != 2 {
            return Err(Error::NotWatertight(key.0, key.1, faces.len()));
        }
        let id = edges.len();
        let (f, g) = (faces[0].min(faces[1]), faces[0].max(faces[1]));
        if f == g {
            return Err(Error::InvalidMesh(alloc::format!("face {f} uses edge {key:?} twice")));
        }
        edges.push(DualEdge { faces: (f, g), mesh_edge: key });
        adjacency[f].push((g, id));
        adjacency[g].push((f, id));
    }
    for a in &mut adjacency {
        a.sort_unstable();
    }
    Ok(DualGraph { n_nodes: n, edges, adjacency })
}

/// Edmonds' blossom algorithm for maximum cardinality matching in a
/// general graph, `O(V³)`, seeded with a greedy matching.
pub fn maximum_matching(graph: &DualGraph) -> Vec<usize> {
    let n = graph.n_nodes;
    let mut mate = vec![NONE; n];
    for v in 0..n {
        if mate[v] == NONE {
            if let Some(&(u, _)) = graph.adjacency[v].iter().find(|(u, _)| mate[*u] == NONE && *u != v) {
                mate[v] = u;
                mate[u] = v;
            }
        }
    }
    let mut search = BlossomSearch::new(n);
    for root in 0..n {
        if mate[root] == NONE {
            if let Some(end) = search.find_augmenting_path(graph, &mate, root) {
                let mut v = end;
                while v != NONE {
                    let pv = search.parent[v];
                    let next = mate[pv];
                    mate[v] = pv;
                    mate[pv] = v;
                    v = next;
                }
            }
        }
    }
    mate
}

struct BlossomSearch {
    parent: Vec<usize>,
    base: Vec<usize>,
    used: Vec<bool>,
    blossom: Vec<bool>,
    queue: VecDeque<usize>,
}

impl BlossomSearch {
    fn new(n: usize) -> Self {
        Self {
            parent: vec![NONE; n],
            base: (0..n).collect(),
            used: vec![false; n],
            blossom: vec![false; n],
            queue: VecDeque::new(),
        }
    }

    fn lca(&self, mate: &[usize], mut a: usize, mut b: usize) -> usize {
        let mut seen = vec![false; mate.len()];
        loop {
            a = self.base[a];
            seen[a] = true;
            if mate[a] == NONE {
                break;
            }
            a = self.parent[mate[a]];
        }
        loop {
            b = self.base[b];
            if seen[b] {
                return b;
            }
            b = self.parent[mate[b]];
        }
    }

    fn mark_path(&mut self, mate: &[usize], mut v: usize, b: usize, mut child: usize) {
        while self.base[v] != b {
            self.blossom[self.base[v]] = true;
            self.blossom[self.base[mate[v]]] = true;
            self.parent[v] = child;
            child = mate[v];
            v = self.parent[mate[v]];
        }
    }

    /// BFS over alternating trees rooted at `root`, contracting odd cycles.
    /// Returns the free endpoint of an augmenting path; `parent` then
    /// encodes the path back to the root.
    fn find_augmenting_path(&mut self, graph: &DualGraph, mate: &[usize], root: usize) -> Option<usize> {
        let n = graph.n_nodes;
        self.used.iter_mut().for_each(|u| *u = false);
        self.parent.iter_mut().for_each(|p| *p = NONE);
        for i in 0..n {
            self.base[i] = i;
        }
        self.queue.clear();
        self.used[root] = true;
        self.queue.push_back(root);
        while let Some(v) = self.queue.pop_front() {
            for &(to, _) in &graph.adjacency[v] {
                if self.base[v] == self.base[to] || mate[v] == to {
                    continue;
                }
                if to == root || (mate[to] != NONE && self.parent[mate[to]] != NONE) {
                    let cur = self.lca(mate, v, to);
                    self.blossom.iter_mut().for_each(|b| *b = false);
                    self.mark_path(mate, v, cur, to);
                    self.mark_path(mate, to, cur, v);
                    for i in 0..n {
                        if self.blossom[self.base[i]] {
                            self.base[i] = cur;
                            if !self.used[i] {
                                self.used[i] = true;
                                self.queue.push_back(i);
                            }
                        }
                    }
                } else if self.parent[to] == NONE {
                    self.parent[to] = v;
                    if mate[to] == NONE {
                        return Some(to);
                    }
                    let next = mate[to];
                    self.used[next] = true;
                    self.queue.push_back(next);
                }
            }
        }
        None
    }
}

/// A perfect matching of the dual graph via [`maximum_matching`].
pub fn perfect_matching(graph: &DualGraph) -> Result<Matching> {
    let mate = maximum_matching(graph);
    if mate.contains(&NONE) {
        return Err(Error::NoPerfectMatching);
    }
    let mut edges = Vec::with_capacity(graph.n_nodes / 2);
    for v in 0..graph.n_nodes {
        if v < mate[v] {
            let &(_, id) = graph.adjacency[v].iter().find(|(u, _)| *u == mate[v]).expect("mate is a neighbour");
            edges.push(id);
        }
    }
    Ok(Matching { edges, mate })
}

/// Disjoint face cycles left after removing the matched edges, each as an
/// ordered face list. Cycles are numbered by their lowest face.
pub fn residual_cycles(graph: &DualGraph, matching: &Matching) -> Result<Vec<Vec<usize>>> {
    let n = graph.n_nodes;
    let mut is_matched = vec![false; graph.edges.len()];
    for &e in &matching.edges {
        is_matched[e] = true;
    }
    let residual: Vec<Vec<(usize, usize)>> = graph
        .adjacency
        .iter()
        .map(|adj| adj.iter().copied().filter(|&(_, e)| !is_matched[e]).collect())
        .collect();
    if let Some(v) = residual.iter().position(|r| r.len() != 2) {
        return Err(Error::InvalidMesh(alloc::format!(
            "face {v} keeps {} dual edges after matching, expected 2",
            residual[v].len()
        )));
    }
    let mut seen = vec![false; n];
    let mut cycles = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut cycle = vec![start];
        seen[start] = true;
        let (mut prev_edge, mut cur) = (residual[start][0].1, residual[start][0].0);
        while cur != start {
            seen[cur] = true;
            cycle.push(cur);
            let &(next, e) = residual[cur].iter().find(|&&(_, e)| e != prev_edge).expect("degree two");
            prev_edge = e;
            cur = next;
        }
        cycles.push(cycle);
    }
    Ok(cycles)
}

/// Splices the residual face cycles into one closed loop.
pub fn hamiltonian_loop(mesh: &TriangleMesh, graph: &DualGraph, matching: &Matching) -> Result<HamiltonianLoop> {
    let n = graph.n_nodes;
    let cycles = residual_cycles(graph, matching)?;
    let mut cycle_of = vec![0usize; n];
    for (c, faces) in cycles.iter().enumerate() {
        for &f in faces {
            cycle_of[f] = c;
        }
    }

    // Matched pairs joining distinct cycles, listed per cycle by face index.
    let mut bridges: Vec<Vec<(usize, usize, usize)>> = vec![Vec::new(); cycles.len()];
    for &e in &matching.edges {
        let (f, g) = graph.edges[e].faces;
        if cycle_of[f] != cycle_of[g] {
            bridges[cycle_of[f]].push((f, g, e));
            bridges[cycle_of[g]].push((g, f, e));
        }
    }
    for b in &mut bridges {
        b.sort_unstable();
    }

    // BFS spanning tree from the largest cycle (lowest index on ties).
    let root = (0..cycles.len()).max_by(|&a, &b| cycles[a].len().cmp(&cycles[b].len()).then(b.cmp(&a))).unwrap_or(0);
    let mut in_tree = vec![false; cycles.len()];
    in_tree[root] = true;
    let mut tree_edges = Vec::new();
    let mut queue = VecDeque::from([root]);
    while let Some(c) = queue.pop_front() {
        for &(f, g, e) in &bridges[c] {
            let other = cycle_of[g];
            if !in_tree[other] {
                in_tree[other] = true;
                tree_edges.push((f, g, e));
                queue.push_back(other);
            }
        }
    }
    if tree_edges.len() + 1 != cycles.len() {
        return Err(Error::DisconnectedMesh(cycles.len()));
    }

    // Singly linked loop; node f < n is the first visit of face f.
    let mut visits: Vec<Visit> = (0..n).map(Visit::Face).collect();
    let mut next = vec![NONE; n];
    for cycle in &cycles {
        for (i, &f) in cycle.iter().enumerate() {
            next[f] = cycle[(i + 1) % cycle.len()];
        }
    }
    let push = |v: Visit, visits: &mut Vec<Visit>, next: &mut Vec<usize>| {
        visits.push(v);
        next.push(NONE);
        visits.len() - 1
    };
    for &(f, g, e) in &tree_edges {
        let mesh_edge = graph.edges[e].mesh_edge;
        // f -> m1 -> g' -> (old g.next) ... g -> m2 -> f' -> (old f.next)
        let m1 = push(Visit::Bridge { from: f, to: g, mesh_edge }, &mut visits, &mut next);
        let g2 = push(Visit::Face(g), &mut visits, &mut next);
        let m2 = push(Visit::Bridge { from: g, to: f, mesh_edge }, &mut visits, &mut next);
        let f2 = push(Visit::Face(f), &mut visits, &mut next);
        next[g2] = next[g];
        next[g] = m2;
        next[m2] = f2;
        next[f2] = next[f];
        next[f] = m1;
        next[m1] = g2;
    }

    let start = cycles[root][0];
    let mut order = Vec::with_capacity(visits.len());
    let mut cur = start;
    loop {
        order.push(visits[cur]);
        cur = next[cur];
        if cur == start || order.len() > visits.len() {
            break;
        }
    }
    debug_assert_eq!(order.len(), visits.len());

    let points = order
        .iter()
        .map(|v| match *v {
            Visit::Face(f) => mesh.centroid(f).to_vec(),
            Visit::Bridge { mesh_edge: (a, b), .. } => mesh.edge_midpoint(a, b).to_vec(),
        })
        .collect();
    Ok(HamiltonianLoop { visits: order, n_cycles: cycles.len(), curve: Curve::new(points)? })
}

/// Matching-based loop over a watertight mesh, as a closed 3-d curve.
pub fn hamiltonian_cycle(mesh: &TriangleMesh, matching: &Matching) -> Result<Curve> {
    let graph = dual_graph(mesh)?;
    Ok(hamiltonian_loop(mesh, &graph, matching)?.curve)
}

/// Dual graph, matching and loop in one call.
pub fn mesh_loop(mesh: &TriangleMesh) -> Result<HamiltonianLoop> {
    let graph = dual_graph(mesh)?;
    let matching = perfect_matching(&graph)?;
    hamiltonian_loop(mesh, &graph, &matching)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_matching(graph: &DualGraph, edges: &[usize]) -> bool {
        let mut used = vec![false; graph.n_nodes];
        for &e in edges {
            let (a, b) = graph.edges[e].faces;
            if used[a] || used[b] {
                return false;
            }
            used[a] = true;
            used[b] = true;
        }
        true
    }

    // Exhaustive search for the largest matching on small graphs.
    fn brute_max_matching(graph: &DualGraph) -> usize {
        fn go(graph: &DualGraph, e: usize, used: &mut [bool]) -> usize {
            if e == graph.edges.len() {
                return 0;
            }
            let skip = go(graph, e + 1, used);
            let (a, b) = graph.edges[e].faces;
            if used[a] || used[b] {
                return skip;
            }
            used[a] = true;
            used[b] = true;
            let take = 1 + go(graph, e + 1, used);
            used[a] = false;
            used[b] = false;
            skip.max(take)
        }
        go(graph, 0, &mut vec![false; graph.n_nodes])
    }

    fn face_adjacent(mesh: &TriangleMesh, f: usize, g: usize) -> bool {
        let shared = mesh.faces[f].iter().filter(|v| mesh.faces[g].contains(v)).count();
        shared == 2
    }

    fn faces_of(v: Visit) -> (usize, usize) {
        match v {
            Visit::Face(f) => (f, f),
            Visit::Bridge { from, to, .. } => (from, to),
        }
    }

    fn check_loop(mesh: &TriangleMesh, lp: &HamiltonianLoop) {
        let nf = mesh.faces.len();
        let mut count = vec![0usize; nf];
        for v in &lp.visits {
            if let Visit::Face(f) = v {
                count[*f] += 1;
            }
        }
        assert!(count.iter().all(|&c| (1..=2).contains(&c)));
        assert!(lp.visits.len() <= 2 * nf, "{} visits for {nf} faces", lp.visits.len());
        let m = lp.visits.len();
        for i in 0..m {
            let (a, b) = (lp.visits[i], lp.visits[(i + 1) % m]);
            let ok = match (a, b) {
                (Visit::Face(f), Visit::Face(g)) => face_adjacent(mesh, f, g),
                _ => {
                    let (fa, ga) = faces_of(a);
                    let (fb, gb) = faces_of(b);
                    [fa, ga].iter().any(|x| *x == fb || *x == gb)
                }
            };
            assert!(ok, "{a:?} -> {b:?}");
        }
        assert!(crate::tour::curve_length(&lp.curve) > 0.0);
    }

    #[test]
    fn tetrahedron_dual_is_k4() {
        let g = dual_graph(&TriangleMesh::tetrahedron()).unwrap();
        assert_eq!(g.edges.len(), 6);
        assert!((0..4).all(|v| g.degree(v) == 3));
    }

    #[test]
    fn icosahedron_dual_is_cubic() {
        let g = dual_graph(&TriangleMesh::icosahedron()).unwrap();
        assert_eq!(g.edges.len(), 30);
        assert!((0..20).all(|v| g.degree(v) == 3));
    }

    #[test]
    fn boundary_is_rejected() {
        let mut m = TriangleMesh::tetrahedron();
        m.faces.pop();
        assert!(matches!(dual_graph(&m), Err(Error::NotWatertight(..))));
    }

    #[test]
    fn k4_and_hexagon_matchings() {
        let g = dual_graph(&TriangleMesh::tetrahedron()).unwrap();
        let m = perfect_matching(&g).unwrap();
        assert_eq!(m.edges.len(), 2);
        assert!(is_matching(&g, &m.edges));

        let hex = DualGraph::from_edges(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0)]);
        let m = perfect_matching(&hex).unwrap();
        assert_eq!(m.edges.len(), 3);
        assert!(is_matching(&hex, &m.edges));
    }

    #[test]
    fn icosahedron_matching_agrees_with_brute_force() {
        let g = dual_graph(&TriangleMesh::icosahedron()).unwrap();
        let m = perfect_matching(&g).unwrap();
        assert_eq!(m.edges.len(), 10);
        assert!(is_matching(&g, &m.edges));
        assert_eq!(brute_max_matching(&g), 10);
    }

    #[test]
    fn blossom_needed_for_odd_cycles() {
        // Two triangles joined by a path: greedy can get stuck without
        // blossom contraction depending on order.
        let g = DualGraph::from_edges(
            8,
            &[(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 5), (5, 6), (6, 4), (6, 7), (0, 7)],
        );
        let mate = maximum_matching(&g);
        assert!(mate.iter().all(|&m| m != NONE));
        assert_eq!(brute_max_matching(&g), 4);
    }

    #[test]
    fn star_has_no_perfect_matching() {
        let g = DualGraph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]);
        assert_eq!(perfect_matching(&g), Err(Error::NoPerfectMatching));
    }

    #[test]
    fn tetrahedron_loop_needs_no_bridges() {
        let mesh = TriangleMesh::tetrahedron();
        let lp = mesh_loop(&mesh).unwrap();
        assert_eq!(lp.n_cycles, 1);
        assert_eq!(lp.visits.len(), 4);
        check_loop(&mesh, &lp);
    }

    #[test]
    fn loops_cover_closed_meshes() {
        for mesh in [
            TriangleMesh::octahedron(),
            TriangleMesh::cube(),
            TriangleMesh::icosahedron(),
            TriangleMesh::icosahedron().subdivide_sphere(),
            TriangleMesh::icosahedron().subdivide_sphere().subdivide_sphere(),
            TriangleMesh::torus(10, 6, 2.0, 0.6),
        ] {
            let graph = dual_graph(&mesh).unwrap();
            let matching = perfect_matching(&graph).unwrap();
            let cycles = residual_cycles(&graph, &matching).unwrap();
            assert_eq!(cycles.iter().map(|c| c.len()).sum::<usize>(), mesh.faces.len());
            let lp = hamiltonian_loop(&mesh, &graph, &matching).unwrap();
            check_loop(&mesh, &lp);
        }
    }

    #[test]
    fn disjoint_tetrahedra_are_disconnected() {
        let t = TriangleMesh::tetrahedron();
        let two = t.union(&t.translated([5.0, 0.0, 0.0]));
        assert!(matches!(mesh_loop(&two), Err(Error::DisconnectedMesh(2))));
    }
}
