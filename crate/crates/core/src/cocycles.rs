//! The modular cocycle `Δ(x, y) = |G_x y| / |G_y x|` and its descendants:
//! the modular function on pair classes and the quotient cocycle on orbit
//! classes.
//!
//! Two independent formulas are provided: the stabilizer-orbit ratio and the
//! Haar ratio `|G_x| / |G_y|` (counting measure on the finite group). They
//! agree on every finite graph and are cross-checked in tests.

use serde::Serialize;

use crate::automorphisms::Symmetry;
use crate::canon::CanonicalCode;
use crate::error::Result;
use crate::graph::FiniteGraph;
use crate::quotient::GraphAnalysis;
use crate::rational::Rational;

/// `|G_x y| / |G_y x|`.
pub fn modular_cocycle(g: &FiniteGraph, x: usize, y: usize) -> Result<Rational> {
    g.check_vertex(x)?;
    g.check_vertex(y)?;
    Ok(orbit_ratio(&Symmetry::new(g)?, x, y))
}

/// `|G_x| / |G_y|`.
pub fn modular_cocycle_haar(g: &FiniteGraph, x: usize, y: usize) -> Result<Rational> {
    g.check_vertex(x)?;
    g.check_vertex(y)?;
    Ok(haar_ratio(&Symmetry::new(g)?, x, y))
}

pub fn orbit_ratio(sym: &Symmetry, x: usize, y: usize) -> Rational {
    Rational::new(sym.stabilizer_orbit_size(x, y), sym.stabilizer_orbit_size(y, x))
}

pub fn haar_ratio(sym: &Symmetry, x: usize, y: usize) -> Rational {
    Rational::from_biguint(sym.stabilizer_order(x)) / Rational::from_biguint(sym.stabilizer_order(y))
}

/// Full vertex-indexed table `table[x][y] = Δ(x, y)`.
pub fn cocycle_table(sym: &Symmetry) -> Vec<Vec<Rational>> {
    let n = sym.graph().vertex_count();
    (0..n).map(|x| (0..n).map(|y| orbit_ratio(sym, x, y)).collect()).collect()
}

/// Value of the modular function on one pair class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PairValue {
    pub code: CanonicalCode,
    pub representative: (usize, usize),
    pub value: Rational,
}

/// The modular cocycle descended to pair classes, one entry per class of
/// `Γ_••`, in the pair quotient's order.
pub fn modular_function_on_pairs(g: &FiniteGraph) -> Result<Vec<PairValue>> {
    Ok(modular_function_of(&GraphAnalysis::new(g)?))
}

pub fn modular_function_of(analysis: &GraphAnalysis) -> Vec<PairValue> {
    analysis
        .pairs
        .classes
        .iter()
        .map(|c| {
            let (x, y) = c.representative;
            PairValue {
                code: c.code.clone(),
                representative: c.representative,
                value: orbit_ratio(&analysis.symmetry, x, y),
            }
        })
        .collect()
}

/// A graph is unimodular when its modular cocycle is identically one.
pub fn is_unimodular_graph(g: &FiniteGraph) -> Result<bool> {
    Ok(is_unimodular_sym(&Symmetry::new(g)?))
}

pub fn is_unimodular_sym(sym: &Symmetry) -> bool {
    let n = sym.graph().vertex_count();
    (0..n).all(|x| (x + 1..n).all(|y| sym.stabilizer_orbit_size(x, y) == sym.stabilizer_orbit_size(y, x)))
}

/// Cocycle on orbit classes, indexed like the orbital quotient.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuotientCocycle {
    pub classes: Vec<CanonicalCode>,
    pub values: Vec<Vec<Rational>>,
}

impl QuotientCocycle {
    /// `Σ_η D(ξ, η)`.
    pub fn row_sum(&self, xi: usize) -> Rational {
        self.values[xi].iter().sum()
    }
}

/// The quotient modular cocycle. Finite automorphism groups are unimodular,
/// so it is always defined here.
pub fn quotient_modular_cocycle(g: &FiniteGraph) -> Result<QuotientCocycle> {
    Ok(quotient_cocycle_of(&GraphAnalysis::new(g)?))
}

pub fn quotient_cocycle_of(analysis: &GraphAnalysis) -> QuotientCocycle {
    let reps: Vec<usize> = analysis.quotient.classes.iter().map(|c| c.representative).collect();
    QuotientCocycle {
        classes: analysis.quotient.classes.iter().map(|c| c.code.clone()).collect(),
        values: reps.iter().map(|&x| reps.iter().map(|&y| orbit_ratio(&analysis.symmetry, x, y)).collect()).collect(),
    }
}

/// The quotient modular cocycle computed from orbit representatives only,
/// without canonical codes. Classes follow the automorphism group's orbit
/// order. Used for graphs too large for pair-class bookkeeping.
pub fn quotient_cocycle_by_orbits(sym: &Symmetry) -> Vec<Vec<Rational>> {
    let reps: Vec<usize> = sym.group().orbits.iter().map(|o| o[0]).collect();
    reps.iter().map(|&x| reps.iter().map(|&y| haar_ratio(sym, x, y)).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(p: i64, q: i64) -> Rational {
        Rational::new(p, q)
    }

    #[test]
    fn segment_values() {
        let g = FiniteGraph::path(3);
        // textbook labels 1,2,3 are indices 0,1,2
        assert_eq!(modular_cocycle(&g, 1, 0).unwrap(), r(2, 1));
        assert_eq!(modular_cocycle(&g, 1, 2).unwrap(), r(2, 1));
        assert_eq!(modular_cocycle(&g, 0, 1).unwrap(), r(1, 2));
        assert_eq!(modular_cocycle(&g, 2, 1).unwrap(), r(1, 2));
        assert_eq!(modular_cocycle(&g, 0, 2).unwrap(), r(1, 1));
        assert_eq!(modular_cocycle(&g, 2, 0).unwrap(), r(1, 1));
        assert_eq!(modular_cocycle_haar(&g, 1, 0).unwrap(), r(2, 1));
        assert!(!is_unimodular_graph(&g).unwrap());
    }

    #[test]
    fn diagonal_is_one() {
        let g = FiniteGraph::star(4);
        for x in 0..5 {
            assert!(modular_cocycle(&g, x, x).unwrap().is_one());
            assert!(modular_cocycle_haar(&g, x, x).unwrap().is_one());
        }
    }

    #[test]
    fn star_centre_leaf() {
        let g = FiniteGraph::star(3);
        assert_eq!(modular_cocycle(&g, 0, 1).unwrap(), r(3, 1));
        let q = quotient_modular_cocycle(&g).unwrap();
        let a = GraphAnalysis::new(&g).unwrap();
        let (c, l) = (a.quotient.class_of(0), a.quotient.class_of(1));
        assert_eq!(q.values[c][l], r(3, 1));
        assert_eq!(q.values[l][c], r(1, 3));
    }

    #[test]
    fn unimodular_examples() {
        assert!(is_unimodular_graph(&FiniteGraph::path(2)).unwrap());
        assert!(is_unimodular_graph(&FiniteGraph::path(4)).unwrap());
        for x in 0..4 {
            for y in 0..4 {
                assert!(modular_cocycle_haar(&FiniteGraph::path(4), x, y).unwrap().is_one());
            }
        }
    }

    #[test]
    fn segment_modular_function() {
        let g = FiniteGraph::path(3);
        let a = GraphAnalysis::new(&g).unwrap();
        let values = modular_function_of(&a);
        assert_eq!(values.len(), 5);
        assert_eq!(values[a.pairs.class_of(0, 1)].value, r(1, 2));
        assert_eq!(values[a.pairs.class_of(1, 0)].value, r(2, 1));
        let ones = values.iter().filter(|v| v.value.is_one()).count();
        assert_eq!(ones, 3);
    }

    #[test]
    fn transitive_and_trivial_functions() {
        assert!(modular_function_on_pairs(&FiniteGraph::cycle(4)).unwrap().iter().all(|v| v.value.is_one()));
        let single = modular_function_on_pairs(&FiniteGraph::path(1)).unwrap();
        assert_eq!(single.len(), 1);
        assert!(single[0].value.is_one());
    }

    #[test]
    fn segment_quotient_cocycle() {
        let g = FiniteGraph::path(3);
        let a = GraphAnalysis::new(&g).unwrap();
        let q = quotient_cocycle_of(&a);
        let (end, mid) = (a.quotient.class_of(0), a.quotient.class_of(1));
        assert_eq!(q.values[end][mid], r(1, 2));
        assert_eq!(q.values[mid][end], r(2, 1));
        let c4 = quotient_modular_cocycle(&FiniteGraph::cycle(4)).unwrap();
        assert_eq!(c4.values, vec![vec![Rational::one()]]);
    }
}
