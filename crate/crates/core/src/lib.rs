//! Exact symmetry computations on finite graphs and the measures they induce
//! on the space of rooted graphs.
//!
//! The crate is organised bottom-up:
//!
//! * [`graph`] and [`canon`]: finite simple graphs, rooted variants, metric
//!   balls and canonical codes (isomorphism classes of rooted and doubly
//!   rooted graphs).
//! * [`automorphisms`]: automorphism groups, orbits and stabilizers via
//!   individualization/refinement search.
//! * [`cocycles`]: the modular cocycle `Δ(x,y) = |G_x y| / |G_y x|`, its
//!   Haar-ratio form and its descent to pair classes and orbit classes.
//! * [`quotient`]: orbital quotient, pair quotient, fiber measures and the
//!   collapsing map from pair classes to pairs of orbit classes.
//! * [`measures`]: finitely supported measures on rooted-graph classes,
//!   their counting measures, invariance/unimodularity verdicts,
//!   Radon–Nikodym cocycles, mass transport and ergodic decomposition.
//! * [`symbolic`]: closed forms for the homogeneous tree, the grandfather
//!   graph and the canopy tree.
//! * [`limits`]: ball statistics and convergence tables for finite graph
//!   families.
//!
//! All values that enter a verdict are exact rationals ([`Rational`]).
//!
//! Vertex indices are 0-based everywhere. The segment graph `I_n` is the path
//! `0 - 1 - ... - (n-1)`, so the textbook labels `1, 2, 3` of `I_3` are the
//! indices `0, 1, 2` here.

pub mod automorphisms;
pub mod canon;
pub mod cocycles;
pub mod error;
pub mod graph;
pub mod limits;
pub mod measures;
pub mod oracle;
pub mod quotient;
pub mod random;
pub mod rational;
mod refine;
pub mod selfcheck;
pub mod symbolic;

use std::sync::atomic::{AtomicUsize, Ordering};

pub use crate::automorphisms::PermutationGroup;
pub use crate::canon::{CanonicalCode, CodeKind};
pub use crate::error::{Error, Result};
pub use crate::graph::{DoublyRootedGraph, FiniteGraph, RootedGraph};
pub use crate::measures::RootedMeasure;
pub use crate::rational::Rational;

/// Default bound on the number of vertices accepted by symmetry searches.
pub const DEFAULT_MAX_VERTICES: usize = 64;

static MAX_VERTICES: AtomicUsize = AtomicUsize::new(DEFAULT_MAX_VERTICES);

/// Current size guard used by canonical-form and automorphism searches.
pub fn max_vertices() -> usize {
    MAX_VERTICES.load(Ordering::Relaxed)
}

/// Sets the process-wide size guard.
pub fn set_max_vertices(max: usize) {
    MAX_VERTICES.store(max, Ordering::Relaxed);
}

/// Fails with [`Error::SizeGuard`] when `vertex_count` exceeds the guard.
pub fn check_guard(vertex_count: usize) -> Result<()> {
    let max = max_vertices();
    if vertex_count > max {
        return Err(Error::SizeGuard { vertex_count, max });
    }
    Ok(())
}
