//! Seeded generators of random small graphs and finitely supported
//! measures, used by property tests and `selfcheck`.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::graph::FiniteGraph;
use crate::measures::{invariant_measure, unimodular_measure, RootedMeasure};
use crate::oracle::connected_graphs_up_to;
use crate::quotient::GraphAnalysis;
use crate::rational::Rational;

pub const DEFAULT_SEED: u64 = 0x5eed_0001;

pub struct MeasureGenerator {
    rng: ChaCha8Rng,
    graphs: Vec<FiniteGraph>,
}

impl MeasureGenerator {
    /// Draws from connected graphs on at most `max_vertices` vertices.
    pub fn new(seed: u64, max_vertices: usize) -> Self {
        MeasureGenerator { rng: ChaCha8Rng::seed_from_u64(seed), graphs: connected_graphs_up_to(max_vertices) }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// A uniformly chosen isomorphism class, randomly relabeled.
    pub fn graph(&mut self) -> FiniteGraph {
        let g = self.graphs.choose(&mut self.rng).expect("at least one graph").clone();
        self.relabel(&g)
    }

    pub fn relabel(&mut self, g: &FiniteGraph) -> FiniteGraph {
        let mut perm: Vec<usize> = (0..g.vertex_count()).collect();
        perm.shuffle(&mut self.rng);
        g.relabel(&perm)
    }

    /// `p/q` with `1 ≤ p, q ≤ 12`.
    pub fn weight(&mut self) -> Rational {
        Rational::new(self.rng.gen_range(1..=12), self.rng.gen_range(1..=12))
    }

    /// A mixture over one to three random graphs. Each graph contributes,
    /// at random: a scaled unimodular measure, a scaled invariant measure,
    /// random weights on every orbit class, or random weights on a random
    /// nonempty set of orbit classes.
    pub fn measure(&mut self) -> Result<RootedMeasure> {
        let parts = self.rng.gen_range(1..=3);
        let mut mu = RootedMeasure::new();
        for _ in 0..parts {
            let g = self.graph();
            let part = match self.rng.gen_range(0..4) {
                0 => unimodular_measure(&g)?.scaled(&self.weight())?,
                1 => invariant_measure(&g)?.scaled(&self.weight())?,
                style => {
                    let reps: Vec<usize> =
                        GraphAnalysis::new(&g)?.quotient.classes.iter().map(|c| c.representative).collect();
                    let mut chosen: Vec<usize> = if style == 2 {
                        reps.clone()
                    } else {
                        reps.iter().copied().filter(|_| self.rng.gen_bool(0.5)).collect()
                    };
                    if chosen.is_empty() {
                        chosen.push(*reps.choose(&mut self.rng).expect("graphs are nonempty"));
                    }
                    let mut part = RootedMeasure::new();
                    for x in chosen {
                        let w = self.weight();
                        part.add(&g, x, w)?;
                    }
                    part
                }
            };
            mu = mu.plus(&part);
        }
        Ok(mu)
    }

    /// A mixture of per-graph unimodular probability measures over one to
    /// four random graphs, with random masses.
    pub fn unimodular_mixture(&mut self) -> Result<RootedMeasure> {
        let parts = self.rng.gen_range(1..=4);
        let mut mu = RootedMeasure::new();
        for _ in 0..parts {
            let g = self.graph();
            let w = self.weight();
            mu = mu.plus(&unimodular_measure(&g)?.scaled(&w)?);
        }
        Ok(mu)
    }

    /// Random weights on randomly chosen rootings of rigid graphs, or now and
    /// then the uniform measure of one.
    pub fn rigid_measure(&mut self) -> Result<Option<RootedMeasure>> {
        let rigid: Vec<FiniteGraph> = self
            .graphs
            .iter()
            .filter(|g| g.vertex_count() > 1 && crate::automorphisms::is_rigid(g).unwrap_or(false))
            .cloned()
            .collect();
        if rigid.is_empty() {
            return Ok(None);
        }
        let mut mu = RootedMeasure::new();
        for _ in 0..self.rng.gen_range(1..=3) {
            let g = rigid.choose(&mut self.rng).expect("nonempty").clone();
            let g = self.relabel(&g);
            if self.rng.gen_bool(0.3) {
                let w = self.weight();
                mu = mu.plus(&unimodular_measure(&g)?.scaled(&w)?);
                continue;
            }
            for x in 0..g.vertex_count() {
                if self.rng.gen_bool(0.7) {
                    let w = self.weight();
                    mu.add(&g, x, w)?;
                }
            }
        }
        if mu.is_empty() {
            let g = self.relabel(&rigid[0]);
            mu.add(&g, 0, Rational::one())?;
        }
        Ok(Some(mu))
    }
}
