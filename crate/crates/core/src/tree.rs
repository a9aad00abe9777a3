//! Minimum spanning trees over 4-connected feature grids.
//!
//! Edge weights are cosine distances between neighbouring channel vectors.
//! Borůvka's algorithm extracts the tree; ties are broken by construction
//! order so the result is unique and reproducible. The tree is then rooted
//! and ordered breadth-first for the propagation passes.

use crate::error::{Error, Result};
use crate::feature::FeatureMap;
use crate::real::Real;

/// `1 - <a, b> / (|a| |b|)`. Returns 1 when either vector has zero norm.
pub fn cosine_distance<T: Real>(a: &[T], b: &[T]) -> Result<T> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::Dimension(format!(
            "cosine distance needs equal non-empty lengths, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let (mut dot, mut na, mut nb) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == T::zero() || nb == T::zero() {
        return Ok(T::one());
    }
    let cos = dot / (na.sqrt() * nb.sqrt());
    // rounding can push |cos| a hair past 1
    Ok(T::one() - cos.max(-T::one()).min(T::one()))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightedEdge<T = f64> {
    pub u: usize,
    pub v: usize,
    pub weight: T,
    pub id: usize,
}

impl<T: Real> WeightedEdge<T> {
    /// Strict total order used for cheapest-edge selection.
    #[inline]
    fn lighter_than(&self, other: &Self) -> bool {
        self.weight < other.weight || (self.weight == other.weight && self.id < other.id)
    }
}

/// One edge per horizontally or vertically adjacent pair of cells. Ids
/// follow a row-major sweep, emitting a cell's right edge before its down
/// edge.
pub fn build_grid_graph<T: Real>(map: &FeatureMap<T>) -> Vec<WeightedEdge<T>> {
    let (h, w) = (map.height(), map.width());
    let mut edges = Vec::with_capacity(h * w.saturating_sub(1) + w * h.saturating_sub(1));
    for r in 0..h {
        for c in 0..w {
            let u = r * w + c;
            if c + 1 < w {
                push_edge(&mut edges, map, u, u + 1);
            }
            if r + 1 < h {
                push_edge(&mut edges, map, u, u + w);
            }
        }
    }
    edges
}

fn push_edge<T: Real>(edges: &mut Vec<WeightedEdge<T>>, map: &FeatureMap<T>, u: usize, v: usize) {
    let weight = cosine_distance(map.node(u), map.node(v)).expect("nodes share channel count");
    edges.push(WeightedEdge { u, v, weight, id: edges.len() });
}

/// Disjoint-set forest with path compression and union by size.
#[derive(Debug, Clone)]
pub struct DisjointSet {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSet {
    pub fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), size: vec![1; n] }
    }

    pub fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    /// Returns false if `a` and `b` were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}

/// Borůvka's algorithm. Every round, each component picks its lightest
/// outgoing edge (ties to the smaller id) and all picks are merged. Returns
/// the `node_count - 1` tree edges in ascending id order.
pub fn boruvka_mst<T: Real>(edges: &[WeightedEdge<T>], node_count: usize) -> Result<Vec<WeightedEdge<T>>> {
    if node_count == 0 {
        return Err(Error::Dimension("node count must be positive".into()));
    }
    for e in edges {
        for x in [e.u, e.v] {
            if x >= node_count {
                return Err(Error::Index { index: x, len: node_count });
            }
        }
        if !e.weight.is_finite() {
            return Err(Error::Data(format!("edge {} has non-finite weight", e.id)));
        }
    }

    let mut sets = DisjointSet::new(node_count);
    // edge copies whose endpoints are relabelled to their components each
    // round, paired with the position of the original edge
    let mut live: Vec<(WeightedEdge<T>, usize)> =
        edges.iter().enumerate().filter(|(_, e)| e.u != e.v).map(|(k, e)| (*e, k)).collect();
    let mut cheapest: Vec<Option<usize>> = vec![None; node_count];
    let mut tree = Vec::with_capacity(node_count - 1);
    let mut components = node_count;

    while components > 1 {
        live.retain_mut(|(e, _)| {
            e.u = sets.find(e.u);
            e.v = sets.find(e.v);
            e.u != e.v
        });
        if live.is_empty() {
            return Err(Error::Connectivity { components });
        }
        for (k, (e, _)) in live.iter().enumerate() {
            for comp in [e.u, e.v] {
                match cheapest[comp] {
                    Some(best) if !e.lighter_than(&live[best].0) => {}
                    _ => cheapest[comp] = Some(k),
                }
            }
        }
        // Under a strict total order the picks form a forest, so every
        // successful union adds a distinct tree edge; shared picks are skipped.
        let mut picks: Vec<usize> = Vec::new();
        for (e, _) in &live {
            for comp in [e.u, e.v] {
                if let Some(k) = cheapest[comp].take() {
                    picks.push(k);
                }
            }
        }
        picks.sort_unstable();
        picks.dedup();
        for k in picks {
            let (e, original) = live[k];
            if sets.union(e.u, e.v) {
                tree.push(edges[original]);
                components -= 1;
            }
        }
    }
    tree.sort_by_key(|e| e.id);
    Ok(tree)
}

/// A spanning tree oriented away from its root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpanningTree {
    root: usize,
    parent: Vec<Option<usize>>,
    bfs_order: Vec<usize>,
    /// Children of `i` are `bfs_order[child_start[i]..][..child_count[i]]`.
    child_start: Vec<usize>,
    child_count: Vec<usize>,
}

impl SpanningTree {
    pub fn root(&self) -> usize {
        self.root
    }

    pub fn node_count(&self) -> usize {
        self.parent.len()
    }

    pub fn parent(&self, i: usize) -> Option<usize> {
        self.parent[i]
    }

    pub fn parents(&self) -> &[Option<usize>] {
        &self.parent
    }

    /// Children in ascending index order. Breadth-first search enqueues a
    /// node's children consecutively, so they are a slice of the order.
    pub fn children(&self, i: usize) -> &[usize] {
        let start = self.child_start[i];
        &self.bfs_order[start..start + self.child_count[i]]
    }

    /// Breadth-first order from the root; every node follows its parent.
    pub fn bfs_order(&self) -> &[usize] {
        &self.bfs_order
    }

    /// Undirected edges as `(min, max)` pairs in ascending order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> =
            self.parent.iter().enumerate().filter_map(|(i, p)| p.map(|p| (i.min(p), i.max(p)))).collect();
        out.sort_unstable();
        out
    }

    /// Largest number of tree neighbours (children plus parent) of any node.
    pub fn max_degree(&self) -> usize {
        (0..self.node_count()).map(|i| self.child_count[i] + usize::from(self.parent[i].is_some())).max().unwrap_or(0)
    }
}

/// Orients an undirected spanning tree away from `root`. Neighbours are
/// visited in ascending index order, which fixes both the child lists and
/// the breadth-first order.
pub fn root_and_order(
    node_count: usize,
    edges: impl IntoIterator<Item = (usize, usize)>,
    root: usize,
) -> Result<SpanningTree> {
    if node_count == 0 {
        return Err(Error::Dimension("node count must be positive".into()));
    }
    if root >= node_count {
        return Err(Error::Index { index: root, len: node_count });
    }
    let mut pairs = Vec::with_capacity(node_count - 1);
    let mut degree = vec![0usize; node_count + 1];
    for (u, v) in edges {
        for x in [u, v] {
            if x >= node_count {
                return Err(Error::Index { index: x, len: node_count });
            }
        }
        if u == v {
            return Err(Error::Data(format!("self-loop at node {u}")));
        }
        degree[u + 1] += 1;
        degree[v + 1] += 1;
        pairs.push((u, v));
    }
    if pairs.len() != node_count - 1 {
        return Err(Error::Data(format!(
            "a spanning tree over {node_count} nodes has {} edges, got {}",
            node_count - 1,
            pairs.len()
        )));
    }
    // compressed adjacency: neighbours of i are adjacency[offset[i]..offset[i + 1]]
    let mut offset = degree;
    for i in 0..node_count {
        offset[i + 1] += offset[i];
    }
    let mut fill = offset.clone();
    let mut adjacency = vec![0usize; 2 * pairs.len()];
    for (u, v) in pairs {
        adjacency[fill[u]] = v;
        fill[u] += 1;
        adjacency[fill[v]] = u;
        fill[v] += 1;
    }
    for i in 0..node_count {
        adjacency[offset[i]..offset[i + 1]].sort_unstable();
    }

    let mut parent = vec![None; node_count];
    let mut visited = vec![false; node_count];
    let mut child_start = vec![0usize; node_count];
    let mut child_count = vec![0usize; node_count];
    let mut bfs_order = Vec::with_capacity(node_count);
    bfs_order.push(root);
    visited[root] = true;
    let mut head = 0;
    while head < bfs_order.len() {
        let i = bfs_order[head];
        head += 1;
        child_start[i] = bfs_order.len();
        for &j in &adjacency[offset[i]..offset[i + 1]] {
            if !visited[j] {
                visited[j] = true;
                parent[j] = Some(i);
                bfs_order.push(j);
            }
        }
        child_count[i] = bfs_order.len() - child_start[i];
    }
    if bfs_order.len() != node_count {
        return Err(Error::Connectivity { components: node_count - bfs_order.len() + 1 });
    }
    Ok(SpanningTree { root, parent, bfs_order, child_start, child_count })
}

/// Grid graph, Borůvka, then rooting: the full tree construction for a map.
pub fn minimum_spanning_tree<T: Real>(map: &FeatureMap<T>, root: usize) -> Result<SpanningTree> {
    let edges = build_grid_graph(map);
    let mst = boruvka_mst(&edges, map.node_count())?;
    root_and_order(map.node_count(), mst.iter().map(|e| (e.u, e.v)), root)
}
