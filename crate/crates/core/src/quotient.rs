//! Orbital quotient `Γ/G`, pair quotient `(Γ×Γ)/G`, fiber measures and the
//! maps between them.
//!
//! Classes are keyed by canonical codes (rooted codes for vertex orbits,
//! doubly rooted codes for pair orbits) and sorted by code bytes, so two
//! isomorphic input graphs produce identical quotient tables.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::automorphisms::Symmetry;
use crate::canon::{canonical_code, CanonicalCode};
use crate::error::{Error, Result};
use crate::graph::FiniteGraph;
use crate::rational::Rational;

/// One vertex orbit, i.e. one point of the leaf `Γ_•`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrbitClass {
    pub code: CanonicalCode,
    pub representative: usize,
    pub vertices: Vec<usize>,
}

impl OrbitClass {
    pub fn size(&self) -> usize {
        self.vertices.len()
    }
}

/// The orbital quotient with its graph structure: two classes are adjacent
/// when some representatives are at distance one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuotientGraph {
    pub classes: Vec<OrbitClass>,
    pub adjacency: BTreeSet<(usize, usize)>,
    #[serde(skip)]
    class_of: Vec<usize>,
}

impl QuotientGraph {
    pub fn class_of(&self, v: usize) -> usize {
        self.class_of[v]
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn are_adjacent(&self, a: usize, b: usize) -> bool {
        self.adjacency.contains(&(a, b))
    }
}

/// One orbit of the diagonal action on ordered pairs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PairClass {
    pub code: CanonicalCode,
    /// `(x, y)` with `x` the representative of its orbit class.
    pub representative: (usize, usize),
    /// Number of ordered pairs in the orbit.
    pub size: usize,
    /// Orbit class of the primary root.
    pub primary: usize,
    /// Orbit class of the secondary root.
    pub secondary: usize,
    /// `|G_x y|` for the representative: the mass this class receives from
    /// the fiber measure over `primary`.
    pub fiber_weight: usize,
    /// Index of the class of `(y, x)`.
    pub involution: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PairQuotient {
    pub classes: Vec<PairClass>,
    #[serde(skip)]
    class_of_pair: Vec<usize>,
    #[serde(skip)]
    n: usize,
}

impl PairQuotient {
    pub fn class_of(&self, x: usize, y: usize) -> usize {
        self.class_of_pair[x * self.n + y]
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// Pair classes in the fiber over the orbit class `xi`.
    pub fn fiber(&self, xi: usize) -> impl Iterator<Item = (usize, &PairClass)> {
        self.classes.iter().enumerate().filter(move |(_, c)| c.primary == xi)
    }
}

/// Fiber measure over one orbit class: pair class index → weight.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FiberMeasure {
    pub base: usize,
    pub weights: BTreeMap<usize, usize>,
}

impl FiberMeasure {
    pub fn total(&self) -> usize {
        self.weights.values().sum()
    }
}

/// Everything the measure layer needs about one connected graph: its
/// symmetry data and both quotients.
#[derive(Debug)]
pub struct GraphAnalysis {
    pub symmetry: Symmetry,
    pub quotient: QuotientGraph,
    pub pairs: PairQuotient,
}

impl GraphAnalysis {
    pub fn new(g: &FiniteGraph) -> Result<Self> {
        g.require_connected()?;
        let symmetry = Symmetry::new(g)?;
        let quotient = build_orbital_quotient(&symmetry)?;
        let pairs = build_pair_quotient(&symmetry, &quotient)?;
        Ok(GraphAnalysis { symmetry, quotient, pairs })
    }

    pub fn graph(&self) -> &FiniteGraph {
        self.symmetry.graph()
    }
}

fn build_orbital_quotient(sym: &Symmetry) -> Result<QuotientGraph> {
    let g = sym.graph();
    let mut classes = Vec::new();
    for orbit in &sym.group().orbits {
        let representative = orbit[0];
        classes.push(OrbitClass {
            code: canonical_code(g, &[representative])?,
            representative,
            vertices: orbit.clone(),
        });
    }
    classes.sort_by(|a, b| a.code.cmp(&b.code));
    let mut class_of = vec![0; g.vertex_count()];
    for (i, c) in classes.iter().enumerate() {
        for &v in &c.vertices {
            class_of[v] = i;
        }
    }
    let mut adjacency = BTreeSet::new();
    for (a, b) in g.edges() {
        adjacency.insert((class_of[a], class_of[b]));
        adjacency.insert((class_of[b], class_of[a]));
    }
    Ok(QuotientGraph { classes, adjacency, class_of })
}

fn build_pair_quotient(sym: &Symmetry, quotient: &QuotientGraph) -> Result<PairQuotient> {
    let g = sym.graph();
    let n = g.vertex_count();
    // orbits of the diagonal action, by breadth-first search over generators
    let mut orbit_id = vec![usize::MAX; n * n];
    let mut orbits: Vec<Vec<(usize, usize)>> = Vec::new();
    for start in 0..n * n {
        if orbit_id[start] != usize::MAX {
            continue;
        }
        let id = orbits.len();
        orbit_id[start] = id;
        let mut members = vec![(start / n, start % n)];
        let mut head = 0;
        while head < members.len() {
            let (x, y) = members[head];
            head += 1;
            for p in &sym.group().generators {
                let image = p[x] * n + p[y];
                if orbit_id[image] == usize::MAX {
                    orbit_id[image] = id;
                    members.push((p[x], p[y]));
                }
            }
        }
        orbits.push(members);
    }

    let mut classes = Vec::with_capacity(orbits.len());
    let mut old_ids = Vec::with_capacity(orbits.len());
    for (id, members) in orbits.iter().enumerate() {
        let primary = quotient.class_of(members[0].0);
        let x = quotient.classes[primary].representative;
        let y = (0..n).find(|&y| orbit_id[x * n + y] == id).expect("each pair orbit meets every fiber");
        let fiber_weight = (0..n).filter(|&y| orbit_id[x * n + y] == id).count();
        classes.push(PairClass {
            code: canonical_code(g, &[x, y])?,
            representative: (x, y),
            size: members.len(),
            primary,
            secondary: quotient.class_of(y),
            fiber_weight,
            involution: usize::MAX,
        });
        old_ids.push(id);
    }
    let mut order: Vec<usize> = (0..classes.len()).collect();
    order.sort_by(|&a, &b| classes[a].code.cmp(&classes[b].code));
    let mut new_id = vec![0; classes.len()];
    for (new, &old) in order.iter().enumerate() {
        new_id[old_ids[old]] = new;
    }
    let mut sorted: Vec<PairClass> = order.iter().map(|&i| classes[i].clone()).collect();
    let class_of_pair: Vec<usize> = orbit_id.iter().map(|&id| new_id[id]).collect();
    for class in &mut sorted {
        let (x, y) = class.representative;
        class.involution = class_of_pair[y * n + x];
    }
    Ok(PairQuotient { classes: sorted, class_of_pair, n })
}

/// The orbital quotient `Γ_•` of a connected graph.
pub fn orbital_quotient(g: &FiniteGraph) -> Result<QuotientGraph> {
    g.require_connected()?;
    build_orbital_quotient(&Symmetry::new(g)?)
}

/// The pair quotient `Γ_••` of a connected graph.
pub fn pair_quotient(g: &FiniteGraph) -> Result<PairQuotient> {
    Ok(GraphAnalysis::new(g)?.pairs)
}

/// Fiber measure over orbit class `xi`, read off the pair quotient.
pub fn fiber_measure(g: &FiniteGraph, xi: usize) -> Result<FiberMeasure> {
    let analysis = GraphAnalysis::new(g)?;
    fiber_measure_of(&analysis, xi)
}

pub fn fiber_measure_of(analysis: &GraphAnalysis, xi: usize) -> Result<FiberMeasure> {
    if xi >= analysis.quotient.len() {
        return Err(Error::UnknownClass(xi));
    }
    let weights = analysis.pairs.fiber(xi).map(|(i, c)| (i, c.fiber_weight)).collect();
    Ok(FiberMeasure { base: xi, weights })
}

/// Fiber measure recomputed from a specific vertex `x`: the pushforward of
/// the counting measure under `y ↦ class of (x, y)`.
pub fn fiber_measure_at_vertex(analysis: &GraphAnalysis, x: usize) -> FiberMeasure {
    let mut weights = BTreeMap::new();
    for y in 0..analysis.graph().vertex_count() {
        *weights.entry(analysis.pairs.class_of(x, y)).or_insert(0) += 1;
    }
    FiberMeasure { base: analysis.quotient.class_of(x), weights }
}

/// Fiber measure from `x` through stabilizer orbit sizes `|G_x y|` rather
/// than pair orbits.
pub fn fiber_measure_via_stabilizer(analysis: &GraphAnalysis, x: usize) -> FiberMeasure {
    let stab = analysis.symmetry.stabilizer(x);
    let mut weights = BTreeMap::new();
    for orbit in &stab.orbits {
        let y = orbit[0];
        let class = analysis.pairs.class_of(x, y);
        let previous = weights.insert(class, orbit.len());
        debug_assert!(previous.is_none(), "a G_x-orbit determines its pair class");
    }
    FiberMeasure { base: analysis.quotient.class_of(x), weights }
}

/// The collapsing map: pair class ↦ (class of x, class of y).
pub fn sigma_map(g: &FiniteGraph) -> Result<Vec<(usize, usize)>> {
    Ok(sigma_of(&pair_quotient(g)?))
}

pub fn sigma_of(pairs: &PairQuotient) -> Vec<(usize, usize)> {
    pairs.classes.iter().map(|c| (c.primary, c.secondary)).collect()
}

/// Whether the collapsing map is a bijection onto `Γ_• × Γ_•`.
pub fn sigma_is_bijective(analysis: &GraphAnalysis) -> bool {
    let images: BTreeSet<_> = sigma_of(&analysis.pairs).into_iter().collect();
    let k = analysis.quotient.len();
    images.len() == analysis.pairs.len() && images.len() == k * k
}

/// Checks, for every pair class `θ` over `(ξ, η)`, that the modular function
/// equals the fiber weight of `θ` over `ξ` divided by the fiber weight of the
/// swapped class over `η`. The modular function is taken in its Haar-ratio
/// form `|G_x| / |G_y|`, which shares no computation with the fiber weights.
pub fn modular_ratio_check(g: &FiniteGraph) -> Result<bool> {
    Ok(modular_ratio_holds(&GraphAnalysis::new(g)?))
}

pub fn modular_ratio_holds(analysis: &GraphAnalysis) -> bool {
    analysis.pairs.classes.iter().all(|c| {
        let (x, y) = c.representative;
        let modular = crate::cocycles::haar_ratio(&analysis.symmetry, x, y);
        let swapped = &analysis.pairs.classes[c.involution];
        modular == Rational::from(c.fiber_weight) / Rational::from(swapped.fiber_weight)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_quotient() {
        let g = FiniteGraph::path(3);
        let q = orbital_quotient(&g).unwrap();
        assert_eq!(q.len(), 2);
        let end = q.class_of(0);
        let mid = q.class_of(1);
        assert_eq!(q.class_of(2), end);
        assert_eq!(q.classes[end].vertices, vec![0, 2]);
        assert!(q.are_adjacent(end, mid) && q.are_adjacent(mid, end));
        assert!(!q.are_adjacent(end, end));
        assert!(!q.are_adjacent(mid, mid));
    }

    #[test]
    fn cycle_and_point_quotients() {
        let q = orbital_quotient(&FiniteGraph::cycle(4)).unwrap();
        assert_eq!(q.len(), 1);
        assert!(q.are_adjacent(0, 0));
        let q = orbital_quotient(&FiniteGraph::path(1)).unwrap();
        assert_eq!(q.len(), 1);
        assert!(q.adjacency.is_empty());
    }

    #[test]
    fn pair_class_counts() {
        assert_eq!(pair_quotient(&FiniteGraph::path(3)).unwrap().len(), 5);
        assert_eq!(pair_quotient(&FiniteGraph::path(1)).unwrap().len(), 1);
        assert_eq!(pair_quotient(&FiniteGraph::cycle(4)).unwrap().len(), 3);
    }

    #[test]
    fn segment_fiber_over_middle() {
        let g = FiniteGraph::path(3);
        let a = GraphAnalysis::new(&g).unwrap();
        let mid = a.quotient.class_of(1);
        let f = fiber_measure_of(&a, mid).unwrap();
        assert_eq!(f.weights[&a.pairs.class_of(1, 0)], 2);
        assert_eq!(f.weights[&a.pairs.class_of(1, 1)], 1);
        assert_eq!(f.total(), 3);
        assert!(matches!(fiber_measure_of(&a, 7), Err(Error::UnknownClass(7))));
    }

    #[test]
    fn star_fiber_over_centre() {
        let g = FiniteGraph::star(3);
        let a = GraphAnalysis::new(&g).unwrap();
        let f = fiber_measure_of(&a, a.quotient.class_of(0)).unwrap();
        assert_eq!(f.weights[&a.pairs.class_of(0, 1)], 3);
        assert_eq!(f.weights[&a.pairs.class_of(0, 0)], 1);
        assert_eq!(f.total(), 4);
    }

    #[test]
    fn single_vertex_fiber() {
        let a = GraphAnalysis::new(&FiniteGraph::path(1)).unwrap();
        let f = fiber_measure_of(&a, 0).unwrap();
        assert_eq!(f.weights, BTreeMap::from([(0, 1)]));
    }

    #[test]
    fn sigma_on_segment_is_not_injective() {
        let g = FiniteGraph::path(3);
        let a = GraphAnalysis::new(&g).unwrap();
        let sigma = sigma_of(&a.pairs);
        let end = a.quotient.class_of(0);
        assert_eq!(sigma[a.pairs.class_of(0, 2)], (end, end));
        assert_eq!(sigma[a.pairs.class_of(0, 0)], (end, end));
        assert_ne!(a.pairs.class_of(0, 2), a.pairs.class_of(0, 0));
        assert!(!sigma_is_bijective(&a));
        assert!(sigma_is_bijective(&GraphAnalysis::new(&FiniteGraph::path(1)).unwrap()));
    }

    #[test]
    fn sigma_bijective_on_rigid_graph() {
        // spider with legs of length 1, 2 and 3: the smallest asymmetric tree
        let g = FiniteGraph::new(7, &[(0, 1), (0, 2), (2, 3), (0, 4), (4, 5), (5, 6)]).unwrap();
        assert!(crate::automorphisms::is_rigid(&g).unwrap());
        assert!(sigma_is_bijective(&GraphAnalysis::new(&g).unwrap()));
    }

    #[test]
    fn involution_is_root_swap() {
        let a = GraphAnalysis::new(&FiniteGraph::star(3)).unwrap();
        for (i, c) in a.pairs.classes.iter().enumerate() {
            assert_eq!(a.pairs.classes[c.involution].involution, i);
            let (x, y) = c.representative;
            assert_eq!(c.involution, a.pairs.class_of(y, x));
        }
    }

    #[test]
    fn ratio_identity_examples() {
        assert!(modular_ratio_check(&FiniteGraph::path(3)).unwrap());
        assert!(modular_ratio_check(&FiniteGraph::cycle(4)).unwrap());
        assert!(modular_ratio_check(&FiniteGraph::path(1)).unwrap());
    }

    #[test]
    fn disconnected_rejected() {
        let g = FiniteGraph::new(3, &[(0, 1)]).unwrap();
        assert!(matches!(orbital_quotient(&g), Err(Error::Disconnected)));
    }
}
