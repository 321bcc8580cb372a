//! Uniform-root measures of finite graphs, radius-`r` ball statistics and
//! convergence tables for graph families.
//!
//! Everything is exact. Large family members are never canonicalized as a
//! whole: only their balls are, so the size guard bounds the balls rather
//! than the graphs.

use std::collections::{BTreeMap, VecDeque};

use serde::Serialize;

use crate::canon::{canonical_code, CanonicalCode};
use crate::error::{Error, Result};
use crate::graph::FiniteGraph;
use crate::measures::RootedMeasure;
use crate::rational::Rational;

/// The measure giving each vertex mass `1 / |Γ|`, merged by rooted class.
pub fn uniform_root_measure(g: &FiniteGraph) -> Result<RootedMeasure> {
    g.require_connected()?;
    let w = Rational::new(1, g.vertex_count() as i64);
    RootedMeasure::from_atoms((0..g.vertex_count()).map(|x| (g, x, w.clone())))
}

/// Probability distribution of rooted `r`-ball codes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BallDistribution {
    pub radius: usize,
    #[serde(serialize_with = "serialize_probabilities")]
    pub probabilities: BTreeMap<CanonicalCode, Rational>,
}

fn serialize_probabilities<S: serde::Serializer>(
    map: &BTreeMap<CanonicalCode, Rational>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    struct Entry<'a> {
        code: &'a CanonicalCode,
        probability: &'a Rational,
    }
    s.collect_seq(map.iter().map(|(code, probability)| Entry { code, probability }))
}

impl BallDistribution {
    fn from_counts(radius: usize, counts: BTreeMap<CanonicalCode, Rational>) -> Result<Self> {
        let total: Rational = counts.values().sum();
        if total.is_zero() {
            return Err(Error::EmptyMeasure);
        }
        let probabilities = counts.into_iter().map(|(c, w)| (c, w / &total)).collect();
        Ok(BallDistribution { radius, probabilities })
    }

    pub fn get(&self, code: &CanonicalCode) -> Rational {
        self.probabilities.get(code).cloned().unwrap_or_else(Rational::zero)
    }
}

/// Rooted code of the `r`-ball around `x`.
pub fn ball_code(g: &FiniteGraph, x: usize, r: usize) -> Result<CanonicalCode> {
    let ball = g.ball(x, r)?;
    canonical_code(&ball.graph, &[ball.root])
}

/// Law of the `r`-ball around the root under `μ`, normalized.
pub fn ball_distribution(mu: &RootedMeasure, r: usize) -> Result<BallDistribution> {
    let mut counts = BTreeMap::new();
    for a in mu.atoms() {
        *counts.entry(ball_code(&a.graph, a.root, r)?).or_insert_with(Rational::zero) += &a.weight;
    }
    BallDistribution::from_counts(r, counts)
}

/// Law of the `r`-ball around a uniform vertex of `g`, read directly from
/// the balls. Agrees with `ball_distribution(uniform_root_measure(g), r)`.
pub fn graph_ball_distribution(g: &FiniteGraph, r: usize) -> Result<BallDistribution> {
    g.require_connected()?;
    let mut counts = BTreeMap::new();
    for x in 0..g.vertex_count() {
        *counts.entry(ball_code(g, x, r)?).or_insert_with(Rational::zero) += Rational::one();
    }
    BallDistribution::from_counts(r, counts)
}

/// Total variation distance `½ Σ |p - q|`.
pub fn tv_distance(p: &BallDistribution, q: &BallDistribution) -> Result<Rational> {
    if p.radius != q.radius {
        return Err(Error::RadiusMismatch(p.radius, q.radius));
    }
    let mut sum = Rational::zero();
    for (code, pw) in &p.probabilities {
        sum += (pw - q.get(code)).abs();
    }
    for (code, qw) in &q.probabilities {
        if !p.probabilities.contains_key(code) {
            sum += qw;
        }
    }
    Ok(sum / Rational::from(2usize))
}

/// Vertex `(row, col)` of `I_3 × I_n` minus the corner `(0, 0)`.
pub fn i3xn_index(n: usize, row: usize, col: usize) -> Option<usize> {
    if row >= 3 || col >= n || (row, col) == (0, 0) {
        return None;
    }
    Some(row * n + col - 1)
}

/// `I_3 × I_n` with the corner `(0, 0)` removed: `3n - 1` vertices, rows
/// `0..3`, columns `0..n`. No size guard applies, since only balls of it are
/// ever canonicalized.
pub fn i3xn_family(n: usize) -> Result<FiniteGraph> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("i3xn needs n >= 2, got {n}")));
    }
    let mut edges = Vec::with_capacity(6 * n);
    for row in 0..3 {
        for col in 0..n {
            let Some(v) = i3xn_index(n, row, col) else { continue };
            if let Some(w) = i3xn_index(n, row + 1, col) {
                edges.push((v, w));
            }
            if let Some(w) = i3xn_index(n, row, col + 1) {
                edges.push((v, w));
            }
        }
    }
    FiniteGraph::new(3 * n - 1, &edges)
}

/// Ball law of `I_3 × Z` at radius `r`: `2/3` on the ball of an outer row,
/// `1/3` on the ball of the middle row. Read off the middle column of the
/// window `I_3 × I_{2r+3}`, where no ball reaches the ends.
pub fn i3xz_target(r: usize) -> Result<BallDistribution> {
    let width = 2 * r + 3;
    let window = crate::graph::FiniteGraph::new(
        3 * width,
        &(0..3)
            .flat_map(|row| (0..width).map(move |col| (row, col)))
            .flat_map(|(row, col)| {
                let v = row * width + col;
                let mut e = Vec::new();
                if row + 1 < 3 {
                    e.push((v, v + width));
                }
                if col + 1 < width {
                    e.push((v, v + 1));
                }
                e
            })
            .collect::<Vec<_>>(),
    )?;
    let mid = r + 1;
    let mut counts = BTreeMap::new();
    for row in 0..3 {
        *counts.entry(ball_code(&window, row * width + mid, r)?).or_insert_with(Rational::zero) += Rational::one();
    }
    BallDistribution::from_counts(r, counts)
}

/// Number of vertices of `i3xn_family(n)` within distance `r` of a vertex
/// whose degree differs from its counterpart in `I_3 × Z` (3 on the outer
/// rows, 4 on the middle row).
pub fn i3xn_boundary_count(n: usize, r: usize) -> Result<usize> {
    let g = i3xn_family(n)?;
    let mut dist = vec![usize::MAX; g.vertex_count()];
    let mut queue = VecDeque::new();
    for row in 0..3 {
        for col in 0..n {
            let Some(v) = i3xn_index(n, row, col) else { continue };
            let expected = if row == 1 { 4 } else { 3 };
            if g.degree(v) != expected {
                dist[v] = 0;
                queue.push_back(v);
            }
        }
    }
    while let Some(v) = queue.pop_front() {
        for &w in g.neighbors(v) {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    Ok(dist.iter().filter(|&&d| d <= r).count())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConvergenceRow {
    pub index: usize,
    pub radius: usize,
    pub vertex_count: usize,
    pub tv: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    pub fn tv(&self, index: usize, radius: usize) -> Option<&Rational> {
        self.rows.iter().find(|row| row.index == index && row.radius == radius).map(|row| &row.tv)
    }
}

/// Exact tv distance between the ball law of each family member and the
/// target, for every `(index, radius)`.
pub fn convergence_report(
    generator: &dyn Fn(usize) -> Result<FiniteGraph>,
    indices: &[usize],
    targets: &BTreeMap<usize, BallDistribution>,
    radii: &[usize],
) -> Result<ConvergenceReport> {
    for r in radii {
        if !targets.contains_key(r) {
            return Err(Error::InvalidParameter(format!("no target at radius {r}")));
        }
    }
    let mut rows = Vec::new();
    for &index in indices {
        let g = generator(index)?;
        for &radius in radii {
            let p = graph_ball_distribution(&g, radius)?;
            rows.push(ConvergenceRow {
                index,
                radius,
                vertex_count: g.vertex_count(),
                tv: tv_distance(&p, &targets[&radius])?,
            });
        }
    }
    Ok(ConvergenceReport { rows })
}

/// [`convergence_report`] for `i3xn_family` against the `I_3 × Z` targets.
pub fn i3xn_convergence(ns: &[usize], radii: &[usize]) -> Result<ConvergenceReport> {
    let targets = radii.iter().map(|&r| Ok((r, i3xz_target(r)?))).collect::<Result<BTreeMap<_, _>>>()?;
    convergence_report(&i3xn_family, ns, &targets, radii)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(p: i64, q: i64) -> Rational {
        Rational::new(p, q)
    }

    #[test]
    fn uniform_roots() {
        let g = FiniteGraph::path(3);
        let mu = uniform_root_measure(&g).unwrap();
        assert_eq!(mu, crate::measures::unimodular_measure(&g).unwrap());
        assert_eq!(mu.weight_of(&canonical_code(&g, &[0]).unwrap()), r(2, 3));
        assert_eq!(uniform_root_measure(&FiniteGraph::cycle(6)).unwrap().len(), 1);
        let star = uniform_root_measure(&FiniteGraph::star(3)).unwrap();
        assert_eq!(star.weight_of(&canonical_code(&FiniteGraph::star(3), &[0]).unwrap()), r(1, 4));
    }

    #[test]
    fn segment_balls() {
        let g = FiniteGraph::path(3);
        let mu = uniform_root_measure(&g).unwrap();
        let d0 = ball_distribution(&mu, 0).unwrap();
        assert_eq!(d0.probabilities.values().cloned().collect::<Vec<_>>(), vec![Rational::one()]);
        let d1 = ball_distribution(&mu, 1).unwrap();
        let end = ball_code(&g, 0, 1).unwrap();
        assert_eq!(end, canonical_code(&FiniteGraph::path(2), &[0]).unwrap());
        assert_eq!(d1.get(&end), r(2, 3));
        assert_eq!(d1.get(&ball_code(&g, 1, 1).unwrap()), r(1, 3));
        assert_eq!(d1, graph_ball_distribution(&g, 1).unwrap());
    }

    #[test]
    fn tv_examples() {
        let g = FiniteGraph::path(3);
        let p = graph_ball_distribution(&g, 1).unwrap();
        assert!(tv_distance(&p, &p).unwrap().is_zero());
        let q = ball_distribution(&crate::measures::invariant_measure(&g).unwrap(), 1).unwrap();
        assert_eq!(tv_distance(&p, &q).unwrap(), r(1, 6));
        let other = graph_ball_distribution(&FiniteGraph::complete(4), 1).unwrap();
        assert!(tv_distance(&p, &other).unwrap().is_one());
        let p0 = graph_ball_distribution(&g, 0).unwrap();
        assert!(matches!(tv_distance(&p, &p0), Err(Error::RadiusMismatch(1, 0))));
    }

    #[test]
    fn i3xn_shapes() {
        let g = i3xn_family(2).unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (5, 5));
        assert!(g.is_connected());
        let g = i3xn_family(3).unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (8, 10));
        assert!(i3xn_family(1).is_err());
        for n in 4..7 {
            assert!(crate::automorphisms::is_rigid(&i3xn_family(n).unwrap()).unwrap(), "n = {n}");
        }
    }

    #[test]
    fn target_weights() {
        let t = i3xz_target(1).unwrap();
        let mut values: Vec<_> = t.probabilities.values().cloned().collect();
        values.sort();
        assert_eq!(values, vec![r(1, 3), r(2, 3)]);
        assert_eq!(i3xz_target(0).unwrap().probabilities.len(), 1);
    }

    #[test]
    fn small_convergence_table() {
        let report = i3xn_convergence(&[10, 20], &[0, 1]).unwrap();
        assert!(report.tv(10, 0).unwrap().is_zero());
        assert!(report.tv(20, 1).unwrap() < report.tv(10, 1).unwrap());
        let constant = |_: usize| Ok(FiniteGraph::path(3));
        let targets = BTreeMap::from([(1, graph_ball_distribution(&FiniteGraph::path(3), 1).unwrap())]);
        let report = convergence_report(&constant, &[1, 2, 3], &targets, &[1]).unwrap();
        assert!(report.rows.iter().all(|row| row.tv.is_zero()));
        assert!(convergence_report(&constant, &[1], &targets, &[2]).is_err());
    }
}
