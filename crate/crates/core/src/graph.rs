//! Finite simple graphs and their rooted variants.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite simple undirected graph on vertices `0..vertex_count`.
///
/// Loops and multiple edges are rejected at construction. Connectivity is not
/// required here; operations on rooted classes check it on demand.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FiniteGraph {
    adjacency: Vec<Vec<usize>>,
    edge_count: usize,
}

impl FiniteGraph {
    pub fn new(vertex_count: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); vertex_count];
        let mut seen = BTreeSet::new();
        for &(a, b) in edges {
            for v in [a, b] {
                if v >= vertex_count {
                    return Err(Error::VertexOutOfRange { index: v, vertex_count });
                }
            }
            if a == b {
                return Err(Error::Loop(a));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(Error::DuplicateEdge(a, b));
            }
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for nbrs in &mut adjacency {
            nbrs.sort_unstable();
        }
        Ok(FiniteGraph { adjacency, edge_count: seen.len() })
    }

    /// Path `0 - 1 - ... - (n-1)`, the segment graph `I_n`.
    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        FiniteGraph::new(n, &edges).expect("path edges are valid")
    }

    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "cycle needs at least 3 vertices");
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        FiniteGraph::new(n, &edges).expect("cycle edges are valid")
    }

    /// Star `K_{1,leaves}` with centre `0`.
    pub fn star(leaves: usize) -> Self {
        let edges: Vec<_> = (1..=leaves).map(|i| (0, i)).collect();
        FiniteGraph::new(leaves + 1, &edges).expect("star edges are valid")
    }

    pub fn complete(n: usize) -> Self {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                edges.push((i, j));
            }
        }
        FiniteGraph::new(n, &edges).expect("complete edges are valid")
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }

    /// Edges as `(a, b)` with `a < b`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count);
        for (a, nbrs) in self.adjacency.iter().enumerate() {
            for &b in nbrs {
                if a < b {
                    out.push((a, b));
                }
            }
        }
        out
    }

    pub fn check_vertex(&self, v: usize) -> Result<()> {
        if v >= self.vertex_count() {
            return Err(Error::VertexOutOfRange { index: v, vertex_count: self.vertex_count() });
        }
        Ok(())
    }

    /// Breadth-first distances from `source`; `None` for unreachable vertices.
    pub fn distances_from(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.vertex_count()];
        let mut queue = VecDeque::new();
        dist[source] = Some(0);
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap();
            for &w in &self.adjacency[u] {
                if dist[w].is_none() {
                    dist[w] = Some(du + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Graph distance, `None` when `x` and `y` lie in different components.
    pub fn distance(&self, x: usize, y: usize) -> Result<Option<usize>> {
        self.check_vertex(x)?;
        self.check_vertex(y)?;
        Ok(self.distances_from(x)[y])
    }

    pub fn is_connected(&self) -> bool {
        if self.vertex_count() == 0 {
            return false;
        }
        self.distances_from(0).iter().all(Option::is_some)
    }

    pub(crate) fn require_connected(&self) -> Result<()> {
        if self.is_connected() {
            Ok(())
        } else {
            Err(Error::Disconnected)
        }
    }

    /// Largest distance from `x` to a vertex of its component.
    pub fn eccentricity(&self, x: usize) -> usize {
        self.distances_from(x).into_iter().flatten().max().unwrap_or(0)
    }

    /// Induced subgraph on `vertices`; vertex `vertices[i]` becomes `i`.
    pub fn induced_subgraph(&self, vertices: &[usize]) -> FiniteGraph {
        let mut index = vec![usize::MAX; self.vertex_count()];
        for (i, &v) in vertices.iter().enumerate() {
            index[v] = i;
        }
        let mut adjacency = vec![Vec::new(); vertices.len()];
        let mut edge_count = 0;
        for (i, &v) in vertices.iter().enumerate() {
            for &w in &self.adjacency[v] {
                let j = index[w];
                if j != usize::MAX {
                    adjacency[i].push(j);
                    if i < j {
                        edge_count += 1;
                    }
                }
            }
            adjacency[i].sort_unstable();
        }
        FiniteGraph { adjacency, edge_count }
    }

    /// The graph with vertex `v` renamed to `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> FiniteGraph {
        assert_eq!(perm.len(), self.vertex_count());
        let mut adjacency = vec![Vec::new(); self.vertex_count()];
        for (v, nbrs) in self.adjacency.iter().enumerate() {
            adjacency[perm[v]] = nbrs.iter().map(|&w| perm[w]).collect();
            adjacency[perm[v]].sort_unstable();
        }
        FiniteGraph { adjacency, edge_count: self.edge_count }
    }

    /// Metric ball of radius `r` around `x`, rooted at the copy of `x`.
    ///
    /// Ball vertices are numbered in breadth-first order from `x` (ties by
    /// index), so the root is always vertex `0`.
    pub fn ball(&self, x: usize, r: usize) -> Result<RootedGraph> {
        self.check_vertex(x)?;
        let (vertices, _) = self.ball_vertices(x, r);
        Ok(RootedGraph { graph: self.induced_subgraph(&vertices), root: 0 })
    }

    /// Vertices within distance `r` of `x` in breadth-first order, and the
    /// map from original index to position (when inside the ball).
    pub(crate) fn ball_vertices(&self, x: usize, r: usize) -> (Vec<usize>, Vec<Option<usize>>) {
        let mut position = vec![None; self.vertex_count()];
        let mut order = vec![x];
        let mut depth = vec![0usize];
        position[x] = Some(0);
        let mut head = 0;
        while head < order.len() {
            let u = order[head];
            let du = depth[head];
            head += 1;
            if du == r {
                continue;
            }
            for &w in &self.adjacency[u] {
                if position[w].is_none() {
                    position[w] = Some(order.len());
                    order.push(w);
                    depth.push(du + 1);
                }
            }
        }
        (order, position)
    }

    pub fn to_file(&self) -> GraphFile {
        GraphFile {
            n: self.vertex_count(),
            edges: self.edges().into_iter().map(|(a, b)| [a, b]).collect(),
            root: None,
            root2: None,
        }
    }
}

impl Serialize for FiniteGraph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_file().serialize(s)
    }
}

/// A graph with a distinguished vertex.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RootedGraph {
    pub graph: FiniteGraph,
    pub root: usize,
}

impl RootedGraph {
    pub fn new(graph: FiniteGraph, root: usize) -> Result<Self> {
        graph.check_vertex(root)?;
        Ok(RootedGraph { graph, root })
    }
}

/// A graph with an ordered pair of distinguished vertices, which may
/// coincide.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DoublyRootedGraph {
    pub graph: FiniteGraph,
    pub primary_root: usize,
    pub secondary_root: usize,
}

impl DoublyRootedGraph {
    pub fn new(graph: FiniteGraph, primary_root: usize, secondary_root: usize) -> Result<Self> {
        graph.check_vertex(primary_root)?;
        graph.check_vertex(secondary_root)?;
        Ok(DoublyRootedGraph { graph, primary_root, secondary_root })
    }
}

/// On-disk graph format: `{"n": 3, "edges": [[0,1],[1,2]], "root": 0}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root2: Option<usize>,
}

impl GraphFile {
    pub fn to_graph(&self) -> Result<FiniteGraph> {
        let edges: Vec<_> = self.edges.iter().map(|e| (e[0], e[1])).collect();
        let g = FiniteGraph::new(self.n, &edges)?;
        for r in [self.root, self.root2].into_iter().flatten() {
            g.check_vertex(r)?;
        }
        Ok(g)
    }
}

/// Parses the JSON graph format.
pub fn parse_graph(text: &str) -> Result<FiniteGraph> {
    parse_graph_file(text)?.to_graph()
}

pub fn parse_graph_file(text: &str) -> Result<GraphFile> {
    let file: GraphFile = serde_json::from_str(text)?;
    file.to_graph()?;
    Ok(file)
}
