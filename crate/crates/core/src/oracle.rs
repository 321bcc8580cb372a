//! Brute-force reference computations for small graphs.
//!
//! Nothing here uses partition refinement or canonical codes: automorphisms
//! come from enumerating all `n!` permutations, and the connected-graph
//! enumerator deduplicates with a brute-force minimum over degree-sorted
//! labelings. These serve as independent oracles in tests and in
//! `selfcheck`.

use std::collections::BTreeSet;

use crate::graph::FiniteGraph;

/// Calls `visit` on every permutation of `0..n` (lexicographic order).
pub fn for_each_permutation(n: usize, mut visit: impl FnMut(&[usize])) {
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        visit(&perm);
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| perm[i - 1] < perm[i]) else {
            return;
        };
        let j = (i..n).rev().find(|&j| perm[j] > perm[i - 1]).unwrap();
        perm.swap(i - 1, j);
        perm[i..].reverse();
    }
}

fn is_automorphism(g: &FiniteGraph, perm: &[usize]) -> bool {
    g.edges().iter().all(|&(a, b)| g.has_edge(perm[a], perm[b]))
}

/// Every automorphism of `g`, found by testing all `n!` permutations.
pub fn all_automorphisms(g: &FiniteGraph) -> Vec<Vec<usize>> {
    assert!(g.vertex_count() <= 9, "brute force is for tiny graphs");
    let edges = g.edges();
    let mut out = Vec::new();
    for_each_permutation(g.vertex_count(), |p| {
        if edges.iter().all(|&(a, b)| g.has_edge(p[a], p[b])) {
            out.push(p.to_vec());
        }
    });
    out
}

pub fn group_order(g: &FiniteGraph) -> usize {
    all_automorphisms(g).len()
}

/// Orbits as sorted vertex sets, listed by smallest member.
pub fn orbits(g: &FiniteGraph) -> Vec<Vec<usize>> {
    let autos = all_automorphisms(g);
    let mut seen = vec![false; g.vertex_count()];
    let mut out = Vec::new();
    for v in 0..g.vertex_count() {
        if seen[v] {
            continue;
        }
        let orbit: BTreeSet<usize> = autos.iter().map(|p| p[v]).collect();
        for &w in &orbit {
            seen[w] = true;
        }
        out.push(orbit.into_iter().collect());
    }
    out
}

/// `|G_x y|` by enumeration.
pub fn stabilizer_orbit_size(g: &FiniteGraph, x: usize, y: usize) -> usize {
    all_automorphisms(g).iter().filter(|p| p[x] == x).map(|p| p[y]).collect::<BTreeSet<_>>().len()
}

/// `|G_x|` by enumeration.
pub fn stabilizer_order(g: &FiniteGraph, x: usize) -> usize {
    all_automorphisms(g).iter().filter(|p| p[x] == x).count()
}

/// Orbits of the diagonal action on ordered pairs, by enumeration.
pub fn pair_orbits(g: &FiniteGraph) -> Vec<BTreeSet<(usize, usize)>> {
    let autos = all_automorphisms(g);
    let n = g.vertex_count();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for x in 0..n {
        for y in 0..n {
            if seen.contains(&(x, y)) {
                continue;
            }
            let orbit: BTreeSet<_> = autos.iter().map(|p| (p[x], p[y])).collect();
            seen.extend(orbit.iter().copied());
            out.push(orbit);
        }
    }
    out
}

/// Whether some vertex bijection maps `a` onto `b` sending the listed roots
/// to the listed roots, by trying all permutations.
pub fn isomorphic_with_roots(a: &FiniteGraph, roots_a: &[usize], b: &FiniteGraph, roots_b: &[usize]) -> bool {
    if a.vertex_count() != b.vertex_count() || a.edge_count() != b.edge_count() || roots_a.len() != roots_b.len() {
        return false;
    }
    let mut found = false;
    for_each_permutation(a.vertex_count(), |p| {
        if !found
            && roots_a.iter().zip(roots_b).all(|(&ra, &rb)| p[ra] == rb)
            && a.edges().iter().all(|&(x, y)| b.has_edge(p[x], p[y]))
        {
            found = true;
        }
    });
    found
}

/// Minimum adjacency key over all labelings that list vertices by
/// non-decreasing degree; returns the key and one minimizing order.
fn brute_canonical(adj: &[Vec<bool>]) -> (u64, Vec<usize>) {
    let n = adj.len();
    let degree: Vec<usize> = (0..n).map(|v| adj[v].iter().filter(|&&e| e).count()).collect();
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&v| (degree[v], v));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &v in &by_degree {
        match groups.last_mut() {
            Some(g) if degree[g[0]] == degree[v] => g.push(v),
            _ => groups.push(vec![v]),
        }
    }
    let key_of = |order: &[usize]| {
        let mut key = 0u64;
        for i in 0..n {
            for j in i + 1..n {
                key = (key << 1) | adj[order[i]][order[j]] as u64;
            }
        }
        key
    };
    let mut best = (u64::MAX, Vec::new());
    let mut order = Vec::with_capacity(n);
    fn rec(
        groups: &[Vec<usize>],
        order: &mut Vec<usize>,
        key_of: &dyn Fn(&[usize]) -> u64,
        best: &mut (u64, Vec<usize>),
    ) {
        let Some((first, rest)) = groups.split_first() else {
            let key = key_of(order);
            if key < best.0 {
                *best = (key, order.clone());
            }
            return;
        };
        for_each_permutation(first.len(), |p| {
            let base = order.len();
            order.extend(p.iter().map(|&i| first[i]));
            rec(rest, order, key_of, best);
            order.truncate(base);
        });
    }
    rec(&groups, &mut order, &key_of, &mut best);
    best
}

/// All connected graphs on `n` vertices up to isomorphism, in a canonical
/// labeling, sorted by the brute-force key.
///
/// Built by adding a vertex with a non-empty neighbourhood to each connected
/// graph on `n - 1` vertices: every connected graph has a non-cut vertex, so
/// nothing is missed.
pub fn connected_graphs(n: usize) -> Vec<FiniteGraph> {
    assert!((1..=8).contains(&n), "enumeration supports 1..=8 vertices");
    let mut layer: Vec<Vec<Vec<bool>>> = vec![vec![vec![false]]];
    for m in 2..=n {
        let mut found: BTreeSet<u64> = BTreeSet::new();
        let mut next = Vec::new();
        for adj in &layer {
            for mask in 1u32..(1 << (m - 1)) {
                let mut grown = vec![vec![false; m]; m];
                for i in 0..m - 1 {
                    for j in 0..m - 1 {
                        grown[i][j] = adj[i][j];
                    }
                    if mask & (1 << i) != 0 {
                        grown[i][m - 1] = true;
                        grown[m - 1][i] = true;
                    }
                }
                let (key, order) = brute_canonical(&grown);
                if found.insert(key) {
                    let canon: Vec<Vec<bool>> =
                        (0..m).map(|i| (0..m).map(|j| grown[order[i]][order[j]]).collect()).collect();
                    next.push((key, canon));
                }
            }
        }
        next.sort_by_key(|(k, _)| *k);
        layer = next.into_iter().map(|(_, a)| a).collect();
    }
    layer.iter().map(|adj| from_matrix(adj)).collect()
}

/// Connected graphs on `1..=max_n` vertices.
pub fn connected_graphs_up_to(max_n: usize) -> Vec<FiniteGraph> {
    (1..=max_n).flat_map(connected_graphs).collect()
}

fn from_matrix(adj: &[Vec<bool>]) -> FiniteGraph {
    let edges: Vec<(usize, usize)> = adj
        .iter()
        .enumerate()
        .flat_map(|(i, row)| row.iter().enumerate().skip(i + 1).filter(|(_, &e)| e).map(move |(j, _)| (i, j)))
        .collect();
    FiniteGraph::new(adj.len(), &edges).expect("matrix is simple")
}

/// Whether `perm` is an automorphism of `g`.
pub fn check_automorphism(g: &FiniteGraph, perm: &[usize]) -> bool {
    perm.len() == g.vertex_count() && is_automorphism(g, perm)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_count() {
        let mut count = 0;
        for_each_permutation(5, |_| count += 1);
        assert_eq!(count, 120);
    }

    #[test]
    fn connected_graph_counts() {
        // OEIS A001349
        let counts: Vec<usize> = (1..=6).map(|n| connected_graphs(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 6, 21, 112]);
        assert!(connected_graphs(5).iter().all(FiniteGraph::is_connected));
    }

    #[test]
    fn brute_orders() {
        assert_eq!(group_order(&FiniteGraph::star(3)), 6);
        assert_eq!(group_order(&FiniteGraph::cycle(4)), 8);
        assert_eq!(stabilizer_orbit_size(&FiniteGraph::star(3), 0, 1), 3);
        assert_eq!(pair_orbits(&FiniteGraph::path(3)).len(), 5);
        assert_eq!(pair_orbits(&FiniteGraph::cycle(4)).len(), 3);
    }
}
