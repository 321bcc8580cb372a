//! Closed forms for three infinite families built on the homogeneous tree
//! `T_d`: the tree itself, the grandfather graph and the canopy tree.
//!
//! Vertices of `T_d` are addressed relative to a base vertex `o` and a
//! boundary point `ω`. Write `r_k` for the vertex `k` steps from `o` along
//! the ray to `ω`. Every vertex has one neighbor toward `ω` (its parent) and
//! `d - 1` children, numbered `0..d-1`; child `0` of `r_k` is `r_{k-1}`. A
//! vertex is reached from some `r_k` by a path of child indices, and its
//! level (Busemann value relative to `o`) is `len(path) - k`.
//!
//! The canopy tree is the union of the horospheres at levels `n ≤ 0`, so its
//! orbit classes are the levels themselves. The canopy automorphism group is
//! unimodular, but no normalization of its Haar measure is fixed here: only
//! the quotient cocycle is used, and per-orbit Haar values stay defined up to
//! a global scalar.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::FiniteGraph;
use crate::measures::HopfVerdict;
use crate::rational::Rational;

/// Address of a vertex of `T_d`: start at `r_anchor`, then follow child
/// indices. Kept in normal form, so equal vertices have equal addresses.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TreeCoordinates {
    anchor: usize,
    path: Vec<usize>,
}

impl TreeCoordinates {
    pub fn new(anchor: usize, path: Vec<usize>) -> Self {
        let mut c = TreeCoordinates { anchor, path };
        c.normalize();
        c
    }

    /// The base vertex `o`.
    pub fn base() -> Self {
        TreeCoordinates { anchor: 0, path: Vec::new() }
    }

    /// `r_k`, the vertex `k` steps from `o` toward `ω`.
    pub fn ray(k: usize) -> Self {
        TreeCoordinates { anchor: k, path: Vec::new() }
    }

    fn normalize(&mut self) {
        let lead = self.path.iter().take(self.anchor).take_while(|&&i| i == 0).count();
        self.anchor -= lead;
        self.path.drain(..lead);
    }

    pub fn anchor(&self) -> usize {
        self.anchor
    }

    pub fn path(&self) -> &[usize] {
        &self.path
    }

    /// Busemann value relative to `o`.
    pub fn level(&self) -> i64 {
        self.path.len() as i64 - self.anchor as i64
    }

    pub fn parent(&self) -> Self {
        let mut p = self.clone();
        if p.path.pop().is_none() {
            p.anchor += 1;
        }
        p
    }

    pub fn child(&self, index: usize) -> Self {
        let mut path = self.path.clone();
        path.push(index);
        TreeCoordinates::new(self.anchor, path)
    }

    /// Checks that every child index is below `d - 1`.
    pub fn validate(&self, d: usize) -> Result<()> {
        check_degree(d)?;
        match self.path.iter().find(|&&i| i >= d - 1) {
            Some(i) => Err(Error::InvalidParameter(format!("child index {i} out of range for degree {d}"))),
            None => Ok(()),
        }
    }

    /// Path of child indices from `r_frame`, for `frame ≥ anchor`.
    fn path_from(&self, frame: usize) -> Vec<usize> {
        let mut full = vec![0; frame - self.anchor];
        full.extend_from_slice(&self.path);
        full
    }
}

fn check_degree(d: usize) -> Result<()> {
    if d < 3 {
        return Err(Error::InvalidParameter(format!("degree must be at least 3, got {d}")));
    }
    Ok(())
}

/// Steps `(a, b)`: from `x` up `a` edges toward `ω` to the meeting vertex,
/// then down `b` edges to `y`.
fn meet_steps(x: &TreeCoordinates, y: &TreeCoordinates) -> (usize, usize) {
    let frame = x.anchor.max(y.anchor);
    let (px, py) = (x.path_from(frame), y.path_from(frame));
    let common = px.iter().zip(&py).take_while(|(a, b)| a == b).count();
    (px.len() - common, py.len() - common)
}

/// Tree distance in `T_d`.
pub fn tree_distance(x: &TreeCoordinates, y: &TreeCoordinates) -> usize {
    let (a, b) = meet_steps(x, y);
    a + b
}

/// `β_ω(x, y) = level(y) - level(x)`.
pub fn busemann(x: &TreeCoordinates, y: &TreeCoordinates) -> i64 {
    y.level() - x.level()
}

/// `(d - 1)^e` for any integer `e`.
fn power(d: usize, e: i64) -> Rational {
    Rational::pow(&Rational::from(d - 1), e)
}

/// The modular cocycle of the grandfather graph, `(d - 1)^{β_ω(x, y)}`.
pub fn grandfather_cocycle(d: usize, x: &TreeCoordinates, y: &TreeCoordinates) -> Result<Rational> {
    x.validate(d)?;
    y.validate(d)?;
    Ok(power(d, busemann(x, y)))
}

/// Distance in the grandfather graph, whose edges are the tree edges and
/// the pairs at tree distance 2 on a geodesic toward `ω`.
///
/// Leaving the branch of the meeting vertex that contains `x` requires
/// reaching its level, and each edge changes the level by at most 2; the
/// same holds on `y`'s side, and jumping two levels at a time attains the
/// bound.
pub fn grandfather_distance(x: &TreeCoordinates, y: &TreeCoordinates) -> usize {
    let (a, b) = meet_steps(x, y);
    a.div_ceil(2) + b.div_ceil(2)
}

/// Pair class coordinates `(distance, horodistance)` in the grandfather
/// graph.
pub fn grandfather_pair_class(d: usize, x: &TreeCoordinates, y: &TreeCoordinates) -> Result<(usize, i64)> {
    x.validate(d)?;
    y.validate(d)?;
    Ok((grandfather_distance(x, y), busemann(x, y)))
}

/// Pair classes of `T_d` are indexed by distance alone.
pub fn homogeneous_pair_class(d: usize, x: &TreeCoordinates, y: &TreeCoordinates) -> Result<usize> {
    x.validate(d)?;
    y.validate(d)?;
    Ok(tree_distance(x, y))
}

fn check_level(n: i64) -> Result<()> {
    if n > 0 {
        return Err(Error::InvalidParameter(format!("canopy levels are non-positive, got {n}")));
    }
    Ok(())
}

/// Quotient cocycle of the canopy tree between levels `n` and `n2`:
/// `(d - 1)^{n2 - n}`.
pub fn canopy_quotient_cocycle(d: usize, n: i64, n2: i64) -> Result<Rational> {
    check_degree(d)?;
    check_level(n)?;
    check_level(n2)?;
    Ok(power(d, n2 - n))
}

/// `Σ_{n' ≤ 0} (d - 1)^{n' - n} = (d - 1)^{-n} (d - 1) / (d - 2)`.
pub fn canopy_summability(d: usize, n: i64) -> Result<Rational> {
    check_degree(d)?;
    check_level(n)?;
    Ok(power(d, -n) * Rational::new(d as i64 - 1, d as i64 - 2))
}

/// Partial sum `Σ_{n' = -terms+1}^{0} (d - 1)^{n' - n}`.
pub fn canopy_partial_sum(d: usize, n: i64, terms: usize) -> Result<Rational> {
    check_degree(d)?;
    check_level(n)?;
    Ok((0..terms as i64).map(|j| power(d, -j - n)).sum())
}

/// Unimodular probability measure of the canopy class on levels
/// `0, -1, ..., -depth`, with the remaining mass reported as `tail`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CanopyTable {
    pub d: usize,
    pub depth: usize,
    /// `(level, mass)`, from level 0 downward.
    pub levels: Vec<(i64, Rational)>,
    pub tail: Rational,
}

impl CanopyTable {
    pub fn total(&self) -> Rational {
        self.levels.iter().map(|(_, m)| m).sum::<Rational>() + &self.tail
    }
}

/// `μ(n) = (d - 1)^n (d - 2) / (d - 1)` for `n = 0..-depth`, tail
/// `(d - 1)^{-depth-1}`.
pub fn canopy_unimodular_measure(d: usize, depth: usize) -> Result<CanopyTable> {
    check_degree(d)?;
    let ratio = Rational::new(d as i64 - 2, d as i64 - 1);
    let levels = (0..=depth as i64).map(|k| (-k, power(d, -k) * &ratio)).collect();
    Ok(CanopyTable { d, depth, levels, tail: power(d, -(depth as i64) - 1) })
}

/// Rooted tree of depth `h` in which every non-leaf has `d - 1` children,
/// listed level by level from the root (vertex 0). A vertex at tree depth
/// `k` sits at canopy level `k - h`.
pub fn finite_canopy(d: usize, h: usize) -> Result<FiniteGraph> {
    check_degree(d)?;
    if h < 1 {
        return Err(Error::InvalidParameter("canopy depth must be at least 1".into()));
    }
    let count: usize = (0..=h as u32).map(|k| (d - 1).pow(k)).sum();
    crate::check_guard(count)?;
    let edges: Vec<(usize, usize)> = (1..count).map(|v| ((v - 1) / (d - 1), v)).collect();
    FiniteGraph::new(count, &edges)
}

/// Canopy level of each vertex of `finite_canopy(d, h)`.
pub fn finite_canopy_levels(d: usize, h: usize) -> Vec<i64> {
    let mut levels = Vec::new();
    for k in 0..=h {
        levels.extend(std::iter::repeat_n(k as i64 - h as i64, (d - 1).pow(k as u32)));
    }
    levels
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    HomogeneousTree,
    GrandfatherGraph,
    CanopyTree,
}

impl std::str::FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "homogeneous_tree" | "homogeneous" | "tree" => Ok(FamilyKind::HomogeneousTree),
            "grandfather_graph" | "grandfather" => Ok(FamilyKind::GrandfatherGraph),
            "canopy_tree" | "canopy" => Ok(FamilyKind::CanopyTree),
            other => Err(Error::InvalidParameter(format!("unknown family {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QuotientDescription {
    Singleton,
    /// Levels `n ≤ 0`.
    NonPositiveLevels,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SymbolicFamily {
    pub kind: FamilyKind,
    pub d: usize,
}

impl SymbolicFamily {
    pub fn new(kind: FamilyKind, d: usize) -> Result<Self> {
        check_degree(d)?;
        Ok(SymbolicFamily { kind, d })
    }

    pub fn group_unimodular(&self) -> bool {
        self.kind != FamilyKind::GrandfatherGraph
    }

    pub fn quotient(&self) -> QuotientDescription {
        match self.kind {
            FamilyKind::CanopyTree => QuotientDescription::NonPositiveLevels,
            _ => QuotientDescription::Singleton,
        }
    }

    /// The modular cocycle `Δ(x, y)` on the graph.
    pub fn cocycle_formula(&self) -> &'static str {
        match self.kind {
            FamilyKind::HomogeneousTree => "1",
            FamilyKind::GrandfatherGraph => "(d-1)^busemann(x,y)",
            FamilyKind::CanopyTree => "(d-1)^(level(y)-level(x))",
        }
    }
}

/// Unimodular probability measure on the class, when one exists.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SymbolicMeasure {
    PointMass,
    Geometric(CanopyTable),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FamilyReport {
    pub family: SymbolicFamily,
    pub quotient: QuotientDescription,
    pub cocycle_formula: &'static str,
    pub group_unimodular: bool,
    pub quotient_cocycle_exists: bool,
    /// `Σ_η Δ_•(ξ, η)` at the base class (level 0 for the canopy).
    pub summable: Option<bool>,
    pub quotient_cocycle_sum: Option<Rational>,
    pub hopf: HopfVerdict,
    pub unimodular_measure: Option<SymbolicMeasure>,
}

/// Aggregated report; `depth` sets the number of levels in the canopy
/// measure table.
pub fn family_report(f: &SymbolicFamily, depth: usize) -> Result<FamilyReport> {
    check_degree(f.d)?;
    let (sum, measure, hopf) = match f.kind {
        FamilyKind::HomogeneousTree => {
            (Some(Rational::one()), Some(SymbolicMeasure::PointMass), HopfVerdict::Dissipative)
        }
        FamilyKind::GrandfatherGraph => (None, None, HopfVerdict::NonUnimodularizable),
        FamilyKind::CanopyTree => (
            Some(canopy_summability(f.d, 0)?),
            Some(SymbolicMeasure::Geometric(canopy_unimodular_measure(f.d, depth)?)),
            HopfVerdict::Dissipative,
        ),
    };
    Ok(FamilyReport {
        family: *f,
        quotient: f.quotient(),
        cocycle_formula: f.cocycle_formula(),
        group_unimodular: f.group_unimodular(),
        quotient_cocycle_exists: f.group_unimodular(),
        summable: sum.as_ref().map(|_| true),
        quotient_cocycle_sum: sum,
        hopf,
        unimodular_measure: measure,
    })
}
