//! Automorphism groups, vertex orbits and stabilizers.

use std::sync::OnceLock;

use num_bigint::BigUint;
use serde::Serialize;

use crate::error::Result;
use crate::graph::FiniteGraph;
use crate::refine::{pinned_partition, search};

/// A permutation group on `0..degree`, given by generators, with its exact
/// order and orbit partition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PermutationGroup {
    pub degree: usize,
    pub generators: Vec<Vec<usize>>,
    #[serde(serialize_with = "serialize_biguint")]
    pub order: BigUint,
    /// Orbits, each sorted, listed by smallest member.
    pub orbits: Vec<Vec<usize>>,
}

fn serialize_biguint<S: serde::Serializer>(n: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(n)
}

impl PermutationGroup {
    fn from_generators(degree: usize, generators: Vec<Vec<usize>>, order: BigUint) -> Self {
        let orbits = orbits_of(degree, &generators);
        PermutationGroup { degree, generators, order, orbits }
    }

    pub fn orbit_of(&self, v: usize) -> &[usize] {
        self.orbits.iter().find(|o| o.contains(&v)).expect("every point lies in an orbit")
    }

    /// `orbit_index()[v]` is the position of `v`'s orbit in `orbits`.
    pub fn orbit_index(&self) -> Vec<usize> {
        let mut index = vec![0; self.degree];
        for (i, orbit) in self.orbits.iter().enumerate() {
            for &v in orbit {
                index[v] = i;
            }
        }
        index
    }

    pub fn is_trivial(&self) -> bool {
        self.order == BigUint::from(1u32)
    }
}

/// Orbits of the group generated by `generators` on `0..degree`.
pub fn orbits_of(degree: usize, generators: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut orbit_id = vec![usize::MAX; degree];
    let mut orbits = Vec::new();
    for start in 0..degree {
        if orbit_id[start] != usize::MAX {
            continue;
        }
        let id = orbits.len();
        let mut orbit = vec![start];
        orbit_id[start] = id;
        let mut head = 0;
        while head < orbit.len() {
            let v = orbit[head];
            head += 1;
            for g in generators {
                let w = g[v];
                if orbit_id[w] == usize::MAX {
                    orbit_id[w] = id;
                    orbit.push(w);
                }
            }
        }
        orbit.sort_unstable();
        orbits.push(orbit);
    }
    orbits
}

/// The full automorphism group of `g`.
pub fn automorphism_group(g: &FiniteGraph) -> Result<PermutationGroup> {
    pointwise_stabilizer(g, &[])
}

/// Automorphisms of `g` fixing every vertex in `fixed`.
///
/// Runs the search with the fixed vertices as singleton colours, so the
/// group is never enumerated.
pub fn pointwise_stabilizer(g: &FiniteGraph, fixed: &[usize]) -> Result<PermutationGroup> {
    for &v in fixed {
        g.check_vertex(v)?;
    }
    crate::check_guard(g.vertex_count())?;
    let n = g.vertex_count();
    let result = search(g, pinned_partition(n, fixed));
    Ok(PermutationGroup::from_generators(n, result.generators, result.order))
}

pub fn vertex_orbits(g: &FiniteGraph) -> Result<Vec<Vec<usize>>> {
    Ok(automorphism_group(g)?.orbits)
}

/// `|G_x y|`, the size of the orbit of `y` under the stabilizer of `x`.
pub fn stabilizer_orbit_size(g: &FiniteGraph, x: usize, y: usize) -> Result<usize> {
    g.check_vertex(y)?;
    Ok(pointwise_stabilizer(g, &[x])?.orbit_of(y).len())
}

/// `|G_x|`.
pub fn stabilizer_order(g: &FiniteGraph, x: usize) -> Result<BigUint> {
    Ok(pointwise_stabilizer(g, &[x])?.order)
}

pub fn is_rigid(g: &FiniteGraph) -> Result<bool> {
    Ok(automorphism_group(g)?.is_trivial())
}

pub fn is_vertex_transitive(g: &FiniteGraph) -> Result<bool> {
    Ok(vertex_orbits(g)?.len() == 1)
}

/// Automorphism group of a graph together with lazily computed vertex
/// stabilizers. Used wherever many stabilizer queries hit the same graph.
#[derive(Debug)]
pub struct Symmetry {
    graph: FiniteGraph,
    group: PermutationGroup,
    orbit_index: Vec<usize>,
    stabilizers: Vec<OnceLock<PermutationGroup>>,
}

impl Symmetry {
    pub fn new(graph: &FiniteGraph) -> Result<Self> {
        let group = automorphism_group(graph)?;
        let orbit_index = group.orbit_index();
        let stabilizers = (0..graph.vertex_count()).map(|_| OnceLock::new()).collect();
        Ok(Symmetry { graph: graph.clone(), group, orbit_index, stabilizers })
    }

    pub fn graph(&self) -> &FiniteGraph {
        &self.graph
    }

    pub fn group(&self) -> &PermutationGroup {
        &self.group
    }

    /// Index of the orbit of `v` in `group().orbits`.
    pub fn orbit_of(&self, v: usize) -> usize {
        self.orbit_index[v]
    }

    pub fn stabilizer(&self, x: usize) -> &PermutationGroup {
        self.stabilizers[x].get_or_init(|| {
            let result = search(&self.graph, pinned_partition(self.graph.vertex_count(), &[x]));
            PermutationGroup::from_generators(self.graph.vertex_count(), result.generators, result.order)
        })
    }

    pub fn stabilizer_order(&self, x: usize) -> &BigUint {
        &self.stabilizer(x).order
    }

    pub fn stabilizer_orbit_size(&self, x: usize, y: usize) -> usize {
        self.stabilizer(x).orbit_of(y).len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(n: u32) -> BigUint {
        BigUint::from(n)
    }

    #[test]
    fn segment_i3() {
        let g = FiniteGraph::path(3);
        let group = automorphism_group(&g).unwrap();
        assert_eq!(group.order, big(2));
        assert_eq!(group.orbits, vec![vec![0, 2], vec![1]]);
        assert_eq!(stabilizer_order(&g, 1).unwrap(), big(2));
        assert_eq!(stabilizer_order(&g, 0).unwrap(), big(1));
        assert_eq!(stabilizer_orbit_size(&g, 1, 0).unwrap(), 2);
        assert_eq!(stabilizer_orbit_size(&g, 0, 2).unwrap(), 1);
        assert!(!is_rigid(&g).unwrap());
        assert!(!is_vertex_transitive(&g).unwrap());
    }

    #[test]
    fn segment_i2_is_z2() {
        let g = FiniteGraph::path(2);
        let group = automorphism_group(&g).unwrap();
        assert_eq!(group.order, big(2));
        assert_eq!(group.generators, vec![vec![1, 0]]);
        assert!(!is_rigid(&g).unwrap());
    }

    #[test]
    fn star_and_cycle() {
        let star = FiniteGraph::star(3);
        assert_eq!(automorphism_group(&star).unwrap().order, big(6));
        assert_eq!(stabilizer_order(&star, 0).unwrap(), big(6));
        assert_eq!(stabilizer_orbit_size(&star, 0, 2).unwrap(), 3);
        let c4 = FiniteGraph::cycle(4);
        assert_eq!(vertex_orbits(&c4).unwrap(), vec![vec![0, 1, 2, 3]]);
        assert!(is_vertex_transitive(&c4).unwrap());
    }

    #[test]
    fn single_vertex() {
        let g = FiniteGraph::path(1);
        assert_eq!(vertex_orbits(&g).unwrap(), vec![vec![0]]);
        assert!(is_rigid(&g).unwrap());
        assert!(is_vertex_transitive(&g).unwrap());
        assert_eq!(stabilizer_orbit_size(&g, 0, 0).unwrap(), 1);
    }

    #[test]
    fn corner_removed_ladder_is_not_rigid() {
        // I_3 x I_2 minus a corner is a 4-cycle with a pendant vertex, which
        // has a reflection fixing the pendant. Brute force agrees.
        let g = FiniteGraph::new(5, &[(0, 1), (2, 3), (3, 4), (0, 3), (1, 4)]).unwrap();
        assert!(!is_rigid(&g).unwrap());
        assert_eq!(crate::oracle::group_order(&g), 2);
    }

    #[test]
    fn generators_are_automorphisms() {
        let g = FiniteGraph::new(7, &[(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (3, 5), (3, 6)]).unwrap();
        let group = automorphism_group(&g).unwrap();
        assert_eq!(group.order, big(12));
        for p in &group.generators {
            for (a, b) in g.edges() {
                assert!(g.has_edge(p[a], p[b]));
            }
        }
    }

    #[test]
    fn symmetry_cache_agrees() {
        let g = FiniteGraph::star(4);
        let sym = Symmetry::new(&g).unwrap();
        assert_eq!(sym.stabilizer_order(0), &big(24));
        assert_eq!(sym.stabilizer_order(1), &big(6));
        assert_eq!(sym.stabilizer_orbit_size(1, 2), 3);
        assert_eq!(sym.orbit_of(3), sym.orbit_of(4));
    }

    #[test]
    fn out_of_range() {
        let g = FiniteGraph::path(3);
        assert!(stabilizer_orbit_size(&g, 0, 3).is_err());
        assert!(stabilizer_order(&g, 5).is_err());
    }
}
