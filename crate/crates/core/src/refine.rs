//! Individualization/refinement search shared by canonical forms and
//! automorphism groups.
//!
//! A node of the search tree is an ordered partition of the vertex set that
//! has been refined to an equitable partition. Children individualize one
//! vertex of the first smallest non-singleton cell. Leaves are discrete
//! partitions, i.e. labelings. Only one child per orbit of the node's
//! automorphism group is expanded; the remaining cell members are either
//! mapped onto an expanded child by an explicit automorphism, or become new
//! expanded children.

use num_bigint::BigUint;
use num_traits::One;

use crate::graph::FiniteGraph;

pub(crate) type Cells = Vec<Vec<usize>>;

/// Outcome of a search rooted at an ordered partition.
#[derive(Clone, Debug)]
pub(crate) struct SearchResult {
    /// Upper-triangle adjacency bits of the least leaf, MSB first.
    pub code: Vec<u8>,
    /// `labeling[v]` is the canonical position of vertex `v`.
    pub labeling: Vec<usize>,
    /// Generators of the automorphisms preserving the initial partition.
    pub generators: Vec<Vec<usize>>,
    pub order: BigUint,
    /// Vertices individualized (after the initial refinement) to reach the
    /// least leaf.
    path: Vec<usize>,
}

/// Equitable refinement of an ordered partition.
///
/// Cells are split in place, fragments ordered by their neighbour count into
/// the current splitter cell, so the result commutes with relabeling.
pub(crate) fn refine(g: &FiniteGraph, mut cells: Cells) -> Cells {
    let n = g.vertex_count();
    let mut count = vec![0usize; n];
    loop {
        let mut changed = false;
        let mut s = 0;
        while s < cells.len() {
            for &u in &cells[s] {
                for &w in g.neighbors(u) {
                    count[w] += 1;
                }
            }
            let splits = cells.iter().any(|c| c.len() > 1 && c.iter().any(|&v| count[v] != count[c[0]]));
            if splits {
                changed = true;
                let mut next = Vec::with_capacity(cells.len() + 1);
                for cell in &cells {
                    if cell.len() == 1 {
                        next.push(cell.clone());
                        continue;
                    }
                    let mut keyed: Vec<(usize, usize)> = cell.iter().map(|&v| (count[v], v)).collect();
                    keyed.sort_unstable();
                    let mut start = 0;
                    for i in 1..=keyed.len() {
                        if i == keyed.len() || keyed[i].0 != keyed[start].0 {
                            next.push(keyed[start..i].iter().map(|&(_, v)| v).collect());
                            start = i;
                        }
                    }
                }
                for &u in &cells[s] {
                    for &w in g.neighbors(u) {
                        count[w] = 0;
                    }
                }
                cells = next;
            } else {
                for &u in &cells[s] {
                    for &w in g.neighbors(u) {
                        count[w] = 0;
                    }
                }
            }
            s += 1;
        }
        if !changed {
            return cells;
        }
    }
}

fn target_cell(cells: &Cells) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, c) in cells.iter().enumerate() {
        if c.len() > 1 && best.is_none_or(|b| c.len() < cells[b].len()) {
            best = Some(i);
        }
    }
    best
}

fn individualize(cells: &Cells, t: usize, x: usize) -> Cells {
    let mut out = Vec::with_capacity(cells.len() + 1);
    for (i, c) in cells.iter().enumerate() {
        if i == t {
            out.push(vec![x]);
            out.push(c.iter().copied().filter(|&v| v != x).collect());
        } else {
            out.push(c.clone());
        }
    }
    out
}

/// Cell sizes plus the neighbour counts of each cell's first vertex into
/// every cell. Equal for partitions related by an automorphism.
fn shape(g: &FiniteGraph, cells: &Cells) -> Vec<usize> {
    let mut cell_of = vec![0usize; g.vertex_count()];
    for (i, c) in cells.iter().enumerate() {
        for &v in c {
            cell_of[v] = i;
        }
    }
    let mut out = Vec::new();
    for c in cells {
        out.push(usize::MAX);
        out.push(c.len());
        let mut counts: Vec<usize> = g.neighbors(c[0]).iter().map(|&w| cell_of[w]).collect();
        counts.sort_unstable();
        out.extend(counts);
    }
    out
}

fn leaf_code(g: &FiniteGraph, cells: &Cells) -> (Vec<u8>, Vec<usize>) {
    let n = g.vertex_count();
    let order: Vec<usize> = cells.iter().map(|c| c[0]).collect();
    let mut labeling = vec![0usize; n];
    for (i, &v) in order.iter().enumerate() {
        labeling[v] = i;
    }
    let bits = n * n.saturating_sub(1) / 2;
    let mut code = vec![0u8; bits.div_ceil(8)];
    let mut k = 0;
    for i in 0..n {
        for j in i + 1..n {
            if g.has_edge(order[i], order[j]) {
                code[k / 8] |= 0x80 >> (k % 8);
            }
            k += 1;
        }
    }
    (code, labeling)
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }

    fn absorb(&mut self, perm: &[usize]) {
        for (v, &w) in perm.iter().enumerate() {
            self.union(v, w);
        }
    }
}

struct Searcher<'a> {
    g: &'a FiniteGraph,
    edges: Vec<(usize, usize)>,
}

/// An expanded child: its vertex and the partitions along its least-leaf
/// path, used as the reference when looking for automorphisms onto other
/// cell members.
struct Representative {
    vertex: usize,
    trail: Vec<(Cells, Option<usize>)>,
}

impl<'a> Searcher<'a> {
    fn node(&self, cells: Cells) -> SearchResult {
        let cells = refine(self.g, cells);
        let Some(t) = target_cell(&cells) else {
            let (code, labeling) = leaf_code(self.g, &cells);
            return SearchResult { code, labeling, generators: Vec::new(), order: BigUint::one(), path: Vec::new() };
        };
        let cell = cells[t].clone();
        let mut uf = UnionFind::new(self.g.vertex_count());
        let mut generators: Vec<Vec<usize>> = Vec::new();
        let mut reps: Vec<Representative> = Vec::new();
        let mut best: Option<SearchResult> = None;
        let mut first_child_order: Option<BigUint> = None;

        for &w in &cell {
            if reps.iter().any(|r| uf.find(r.vertex) == uf.find(w)) {
                continue;
            }
            let mut mapped = false;
            for rep in &reps {
                if let Some(perm) = self.map_onto(&cells, t, rep, w) {
                    uf.absorb(&perm);
                    generators.push(perm);
                    mapped = true;
                    break;
                }
            }
            if mapped {
                continue;
            }
            let child_cells = individualize(&cells, t, w);
            let mut child = self.node(child_cells.clone());
            for p in &child.generators {
                uf.absorb(p);
            }
            generators.append(&mut child.generators);
            if first_child_order.is_none() {
                first_child_order = Some(child.order.clone());
            }
            child.path.insert(0, w);
            reps.push(Representative { vertex: w, trail: self.trail(&child_cells, &child.path[1..]) });
            if best.as_ref().is_none_or(|b| child.code < b.code) {
                best = Some(child);
            }
        }

        let root = uf.find(reps[0].vertex);
        let orbit = cell.iter().filter(|&&v| uf.find(v) == root).count();
        let mut result = best.expect("target cell is non-empty");
        result.order = first_child_order.expect("first member is always expanded") * BigUint::from(orbit);
        result.generators = generators;
        result
    }

    /// Refined partitions along an individualization path starting from an
    /// already individualized (unrefined) partition, each paired with the
    /// cell index used for the next step.
    fn trail(&self, start: &Cells, path: &[usize]) -> Vec<(Cells, Option<usize>)> {
        let mut out = Vec::with_capacity(path.len() + 1);
        let mut current = refine(self.g, start.clone());
        for &x in path {
            let t = current.iter().position(|c| c.contains(&x)).expect("path vertex present");
            let next = refine(self.g, individualize(&current, t, x));
            out.push((current, Some(t)));
            current = next;
        }
        out.push((current, None));
        out
    }

    /// Looks for an automorphism of the node partition `cells` sending the
    /// representative's vertex to `w`.
    fn map_onto(&self, cells: &Cells, t: usize, rep: &Representative, w: usize) -> Option<Vec<usize>> {
        let start = refine(self.g, individualize(cells, t, w));
        let perm = self.follow(&rep.trail, 0, start)?;
        if perm[rep.vertex] != w {
            return None;
        }
        let mut cell_of = vec![0usize; self.g.vertex_count()];
        for (i, c) in cells.iter().enumerate() {
            for &v in c {
                cell_of[v] = i;
            }
        }
        if perm.iter().enumerate().all(|(v, &pv)| cell_of[v] == cell_of[pv]) {
            Some(perm)
        } else {
            None
        }
    }

    fn follow(&self, trail: &[(Cells, Option<usize>)], level: usize, current: Cells) -> Option<Vec<usize>> {
        let (reference, next_cell) = &trail[level];
        if reference.len() != current.len()
            || reference.iter().zip(&current).any(|(a, b)| a.len() != b.len())
            || shape(self.g, reference) != shape(self.g, &current)
        {
            return None;
        }
        match next_cell {
            None => {
                let mut perm = vec![0usize; self.g.vertex_count()];
                for (a, b) in reference.iter().zip(&current) {
                    perm[a[0]] = b[0];
                }
                self.is_automorphism(&perm).then_some(perm)
            }
            Some(t) => {
                for &x in &current[*t] {
                    let next = refine(self.g, individualize(&current, *t, x));
                    if let Some(perm) = self.follow(trail, level + 1, next) {
                        return Some(perm);
                    }
                }
                None
            }
        }
    }

    fn is_automorphism(&self, perm: &[usize]) -> bool {
        self.edges.iter().all(|&(a, b)| self.g.has_edge(perm[a], perm[b]))
    }
}

/// Runs the search from the ordered partition `initial` (cells must cover
/// every vertex exactly once; empty cells are dropped).
pub(crate) fn search(g: &FiniteGraph, initial: Cells) -> SearchResult {
    let initial: Cells = initial.into_iter().filter(|c| !c.is_empty()).collect();
    let searcher = Searcher { g, edges: g.edges() };
    searcher.node(initial)
}

/// Ordered partition with the given vertices as leading singletons
/// (duplicates collapsed) followed by one cell of all other vertices.
pub(crate) fn pinned_partition(n: usize, pinned: &[usize]) -> Cells {
    let mut cells: Cells = Vec::new();
    let mut used = vec![false; n];
    for &p in pinned {
        if !used[p] {
            used[p] = true;
            cells.push(vec![p]);
        }
    }
    cells.push((0..n).filter(|&v| !used[v]).collect());
    cells
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn refinement_splits_path_by_degree() {
        let g = FiniteGraph::path(3);
        let cells = refine(&g, vec![vec![0, 1, 2]]);
        assert_eq!(cells, vec![vec![0, 2], vec![1]]);
    }

    #[test]
    fn refinement_is_equitable() {
        let g = FiniteGraph::new(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (1, 5)]).unwrap();
        let cells = refine(&g, vec![(0..6).collect()]);
        for a in &cells {
            for b in &cells {
                let counts: Vec<usize> =
                    a.iter().map(|&v| g.neighbors(v).iter().filter(|w| b.contains(w)).count()).collect();
                assert!(counts.windows(2).all(|w| w[0] == w[1]));
            }
        }
    }

    #[test]
    fn group_orders() {
        assert_eq!(search(&FiniteGraph::path(3), pinned_partition(3, &[])).order, BigUint::from(2u32));
        assert_eq!(search(&FiniteGraph::star(3), pinned_partition(4, &[])).order, BigUint::from(6u32));
        assert_eq!(search(&FiniteGraph::cycle(5), pinned_partition(5, &[])).order, BigUint::from(10u32));
        assert_eq!(search(&FiniteGraph::complete(5), pinned_partition(5, &[])).order, BigUint::from(120u32));
        assert_eq!(search(&FiniteGraph::star(3), pinned_partition(4, &[1])).order, BigUint::from(2u32));
    }

    #[test]
    fn petersen_group_order() {
        let edges = [
            (0, 1),
            (1, 2),
            (2, 3),
            (3, 4),
            (4, 0),
            (5, 7),
            (7, 9),
            (9, 6),
            (6, 8),
            (8, 5),
            (0, 5),
            (1, 6),
            (2, 7),
            (3, 8),
            (4, 9),
        ];
        let g = FiniteGraph::new(10, &edges).unwrap();
        let r = search(&g, pinned_partition(10, &[]));
        assert_eq!(r.order, BigUint::from(120u32));
    }
}
