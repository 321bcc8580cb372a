//! Finitely supported measures on the space of rooted graph classes.
//!
//! A [`RootedMeasure`] is a finite list of atoms `(Γ, x, w)`. Atoms are
//! deduplicated by rooted canonical code: adding an atom isomorphic to one
//! already present merges the weights. Measures are not normalized unless
//! asked to, and every verdict here is invariant under scaling.
//!
//! Two counting measures are attached to `μ`:
//!
//! * `M_R` on pairs of rooted classes `(ξ, η)` in the same R-class, obtained
//!   by integrating the counting measure on the orbit classes `Γ_•` against
//!   `μ`: every atom `ξ` of weight `w` puts mass `w` on `(ξ, η)` for each
//!   orbit class `η` of its graph;
//! * `M_••` on doubly rooted classes, obtained by integrating the fiber
//!   measures: the atom puts `w · |G_x y|` on the class of `(Γ, x, y)`.
//!
//! `μ` is invariant (unimodular) when `M_R` (`M_••`) is symmetric under the
//! root swap. For atomic measures quasi-invariance is support saturation:
//! together with an atom, every rooting of its graph must carry positive
//! weight. That is the atomic case of the criterion that the saturation of a
//! null set is null.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::canon::{canonical_code, CanonicalCode, CodeKind};
use crate::cocycles::haar_ratio;
use crate::error::{Error, Result};
use crate::graph::{FiniteGraph, GraphFile};
use crate::quotient::GraphAnalysis;
use crate::rational::Rational;

/// One atom of a rooted measure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Atom {
    pub graph: FiniteGraph,
    pub root: usize,
    pub weight: Rational,
    pub code: CanonicalCode,
}

/// A finitely supported measure on rooted graph classes, atoms sorted by
/// rooted canonical code.
///
/// Equality compares classes and weights, not the concrete representatives.
#[derive(Clone, Debug, Default)]
pub struct RootedMeasure {
    atoms: Vec<Atom>,
}

impl PartialEq for RootedMeasure {
    fn eq(&self, other: &Self) -> bool {
        self.atoms.len() == other.atoms.len()
            && self.atoms.iter().zip(&other.atoms).all(|(a, b)| a.code == b.code && a.weight == b.weight)
    }
}

impl Eq for RootedMeasure {}

impl RootedMeasure {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn point_mass(graph: &FiniteGraph, root: usize) -> Result<Self> {
        let mut m = Self::new();
        m.add(graph, root, Rational::one())?;
        Ok(m)
    }

    pub fn from_atoms<'a>(atoms: impl IntoIterator<Item = (&'a FiniteGraph, usize, Rational)>) -> Result<Self> {
        let mut m = Self::new();
        for (g, root, w) in atoms {
            m.add(g, root, w)?;
        }
        Ok(m)
    }

    /// Adds `weight` at the class of `(graph, root)`, merging with an
    /// isomorphic atom if there is one.
    pub fn add(&mut self, graph: &FiniteGraph, root: usize, weight: Rational) -> Result<()> {
        if !weight.is_positive() {
            return Err(Error::InvalidParameter(format!("atom weight must be positive, got {weight}")));
        }
        graph.check_vertex(root)?;
        graph.require_connected()?;
        let code = canonical_code(graph, &[root])?;
        match self.atoms.binary_search_by(|a| a.code.cmp(&code)) {
            Ok(i) => self.atoms[i].weight += weight,
            Err(i) => self.atoms.insert(i, Atom { graph: graph.clone(), root, weight, code }),
        }
        Ok(())
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> Rational {
        self.atoms.iter().map(|a| &a.weight).sum()
    }

    /// Weight at a rooted code, zero off the support.
    pub fn weight_of(&self, code: &CanonicalCode) -> Rational {
        match self.atoms.binary_search_by(|a| a.code.cmp(code)) {
            Ok(i) => self.atoms[i].weight.clone(),
            Err(_) => Rational::zero(),
        }
    }

    pub fn scaled(&self, factor: &Rational) -> Result<Self> {
        if !factor.is_positive() {
            return Err(Error::InvalidParameter(format!("scale factor must be positive, got {factor}")));
        }
        let mut m = self.clone();
        for a in &mut m.atoms {
            a.weight = &a.weight * factor;
        }
        Ok(m)
    }

    /// The measure divided by its total mass.
    pub fn normalize(&self) -> Result<Self> {
        if self.is_empty() {
            return Err(Error::EmptyMeasure);
        }
        self.scaled(&self.total_mass().recip())
    }

    /// Sum of two measures.
    pub fn plus(&self, other: &Self) -> Self {
        let mut m = self.clone();
        for a in &other.atoms {
            match m.atoms.binary_search_by(|b| b.code.cmp(&a.code)) {
                Ok(i) => m.atoms[i].weight += &a.weight,
                Err(i) => m.atoms.insert(i, a.clone()),
            }
        }
        m
    }

    pub fn to_file(&self) -> MeasureFile {
        MeasureFile {
            atoms: self
                .atoms
                .iter()
                .map(|a| AtomFile {
                    graph: a.graph.to_file(),
                    root: a.root,
                    weight: a.weight.clone(),
                    code: Some(a.code.clone()),
                })
                .collect(),
        }
    }
}

impl Serialize for RootedMeasure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_file().serialize(s)
    }
}

/// On-disk measure format:
/// `{"atoms": [{"graph": {...}, "root": 0, "weight": "2/3"}]}`.
///
/// An optional `code` per atom is written on output; when present on input
/// it must match the atom.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureFile {
    pub atoms: Vec<AtomFile>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomFile {
    pub graph: GraphFile,
    pub root: usize,
    pub weight: Rational,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub code: Option<CanonicalCode>,
}

impl MeasureFile {
    pub fn to_measure(&self) -> Result<RootedMeasure> {
        if self.atoms.is_empty() {
            return Err(Error::EmptyMeasure);
        }
        let mut m = RootedMeasure::new();
        for atom in &self.atoms {
            let g = atom.graph.to_graph()?;
            m.add(&g, atom.root, atom.weight.clone())?;
            if let Some(code) = &atom.code {
                if *code != canonical_code(&g, &[atom.root])? {
                    return Err(Error::Parse(format!("atom code {code} does not match its graph")));
                }
            }
        }
        Ok(m)
    }
}

/// Parses the JSON measure format. An empty atom list is an error.
pub fn parse_measure(text: &str) -> Result<RootedMeasure> {
    serde_json::from_str::<MeasureFile>(text)?.to_measure()
}

/// `M_R`: a measure on pairs of rooted codes.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RelationMeasure {
    #[serde(serialize_with = "serialize_pair_map")]
    pub atoms: BTreeMap<(CanonicalCode, CanonicalCode), Rational>,
}

fn serialize_pair_map<S: serde::Serializer>(
    map: &BTreeMap<(CanonicalCode, CanonicalCode), Rational>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    struct Entry<'a> {
        from: &'a CanonicalCode,
        to: &'a CanonicalCode,
        value: &'a Rational,
    }
    s.collect_seq(map.iter().map(|((from, to), value)| Entry { from, to, value }))
}

impl RelationMeasure {
    pub fn total_mass(&self) -> Rational {
        self.atoms.values().sum()
    }

    pub fn get(&self, xi: &CanonicalCode, eta: &CanonicalCode) -> Rational {
        self.atoms.get(&(xi.clone(), eta.clone())).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn swapped(&self) -> Self {
        RelationMeasure { atoms: self.atoms.iter().map(|((a, b), w)| ((b.clone(), a.clone()), w.clone())).collect() }
    }

    pub fn is_swap_invariant(&self) -> bool {
        *self == self.swapped()
    }

    pub fn support(&self) -> BTreeSet<(CanonicalCode, CanonicalCode)> {
        self.atoms.keys().cloned().collect()
    }
}

/// One atom of `M_••`, with a concrete representative.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PairAtom {
    pub code: CanonicalCode,
    pub graph: FiniteGraph,
    pub roots: (usize, usize),
    pub weight: Rational,
}

/// A measure on doubly rooted classes, atoms sorted by code.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PairCountingMeasure {
    pub atoms: Vec<PairAtom>,
}

impl PairCountingMeasure {
    fn add(&mut self, code: CanonicalCode, graph: &FiniteGraph, roots: (usize, usize), weight: Rational) {
        match self.atoms.binary_search_by(|a| a.code.cmp(&code)) {
            Ok(i) => self.atoms[i].weight += weight,
            Err(i) => self.atoms.insert(i, PairAtom { code, graph: graph.clone(), roots, weight }),
        }
    }

    pub fn weight(&self, code: &CanonicalCode) -> Rational {
        match self.atoms.binary_search_by(|a| a.code.cmp(code)) {
            Ok(i) => self.atoms[i].weight.clone(),
            Err(_) => Rational::zero(),
        }
    }

    pub fn total_mass(&self) -> Rational {
        self.atoms.iter().map(|a| &a.weight).sum()
    }

    /// Image under the root swap. Swapped codes are recomputed from the
    /// representatives.
    pub fn involution(&self) -> Result<Self> {
        let mut out = PairCountingMeasure::default();
        for a in &self.atoms {
            let (x, y) = a.roots;
            out.add(canonical_code(&a.graph, &[y, x])?, &a.graph, (y, x), a.weight.clone());
        }
        Ok(out)
    }

    fn weights(&self) -> BTreeMap<&CanonicalCode, &Rational> {
        self.atoms.iter().map(|a| (&a.code, &a.weight)).collect()
    }

    pub fn is_involution_invariant(&self) -> Result<bool> {
        Ok(self.weights() == self.involution()?.weights())
    }

    /// Whether the measure and its swap image have the same support.
    pub fn is_involution_quasi_invariant(&self) -> Result<bool> {
        let mine: BTreeSet<_> = self.atoms.iter().map(|a| a.code.clone()).collect();
        let swapped: BTreeSet<_> = self.involution()?.atoms.into_iter().map(|a| a.code).collect();
        Ok(mine == swapped)
    }
}

/// One R-class met by the support: the canonical graph, its analysis and
/// the weight carried by each of its orbit classes.
#[derive(Debug)]
pub struct RClass {
    pub code: CanonicalCode,
    pub analysis: GraphAnalysis,
    /// Indexed like `analysis.quotient.classes`; zero off the support.
    pub weights: Vec<Rational>,
}

impl RClass {
    fn orbit_code(&self, xi: usize) -> &CanonicalCode {
        &self.analysis.quotient.classes[xi].code
    }

    fn orbit_rep(&self, xi: usize) -> usize {
        self.analysis.quotient.classes[xi].representative
    }

    fn supported(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.weights.len()).filter(|&xi| !self.weights[xi].is_zero())
    }

    fn missing(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.weights.len()).filter(|&xi| self.weights[xi].is_zero())
    }
}

/// The support of a measure organised by R-class. Build it once and query
/// all verdicts from it.
#[derive(Debug)]
pub struct MeasureAnalysis {
    measure: RootedMeasure,
    classes: Vec<RClass>,
}

impl MeasureAnalysis {
    pub fn new(measure: &RootedMeasure) -> Result<Self> {
        let mut grouped: BTreeMap<CanonicalCode, Vec<&Atom>> = BTreeMap::new();
        for atom in &measure.atoms {
            grouped.entry(canonical_code(&atom.graph, &[])?).or_default().push(atom);
        }
        let mut classes = Vec::with_capacity(grouped.len());
        for (code, atoms) in grouped {
            let (graph, _) = code.decode();
            let analysis = GraphAnalysis::new(&graph)?;
            let mut weights = vec![Rational::zero(); analysis.quotient.len()];
            for atom in atoms {
                let xi = analysis
                    .quotient
                    .classes
                    .iter()
                    .position(|c| c.code == atom.code)
                    .expect("a rooting of a graph is one of its orbit classes");
                weights[xi] += &atom.weight;
            }
            classes.push(RClass { code, analysis, weights });
        }
        Ok(MeasureAnalysis { measure: measure.clone(), classes })
    }

    pub fn measure(&self) -> &RootedMeasure {
        &self.measure
    }

    pub fn classes(&self) -> &[RClass] {
        &self.classes
    }

    /// `M_R`.
    pub fn relation_measure(&self) -> RelationMeasure {
        let mut atoms = BTreeMap::new();
        for class in &self.classes {
            for xi in class.supported() {
                for eta in 0..class.weights.len() {
                    let key = (class.orbit_code(xi).clone(), class.orbit_code(eta).clone());
                    *atoms.entry(key).or_insert_with(Rational::zero) += &class.weights[xi];
                }
            }
        }
        RelationMeasure { atoms }
    }

    /// `M_••`.
    pub fn pair_measure(&self) -> PairCountingMeasure {
        let mut out = PairCountingMeasure::default();
        for class in &self.classes {
            let graph = class.analysis.graph();
            for xi in class.supported() {
                for (_, theta) in class.analysis.pairs.fiber(xi) {
                    let w = &class.weights[xi] * Rational::from(theta.fiber_weight);
                    out.add(theta.code.clone(), graph, theta.representative, w);
                }
            }
        }
        out
    }

    pub fn is_invariant(&self) -> bool {
        self.relation_measure().is_swap_invariant()
    }

    pub fn is_unimodular(&self) -> bool {
        self.pair_measure().is_involution_invariant().expect("representatives are within the guard")
    }

    /// Rooted codes of orbit classes that lie in an R-class met by the
    /// support but carry no weight.
    pub fn missing_classes(&self) -> Vec<CanonicalCode> {
        let mut out: Vec<_> =
            self.classes.iter().flat_map(|c| c.missing().map(|xi| c.orbit_code(xi).clone())).collect();
        out.sort();
        out
    }

    pub fn is_quasi_invariant(&self) -> bool {
        self.classes.iter().all(|c| c.missing().next().is_none())
    }

    pub fn is_quasi_unimodular(&self) -> bool {
        self.pair_measure().is_involution_quasi_invariant().expect("representatives are within the guard")
    }

    fn require_quasi_invariant(&self) -> Result<()> {
        match self.missing_classes().first() {
            None => Ok(()),
            Some(code) => Err(Error::NotQuasiInvariant { missing: code.to_hex() }),
        }
    }

    /// `Δ_μ(ξ, η) = μ(η) / μ(ξ)` on every pair of supported classes in the
    /// same R-class.
    pub fn rn_cocycle(&self) -> Result<RNCocycleTable> {
        self.require_quasi_invariant()?;
        let mut entries = BTreeMap::new();
        for class in &self.classes {
            for xi in 0..class.weights.len() {
                for eta in 0..class.weights.len() {
                    let key = (class.orbit_code(xi).clone(), class.orbit_code(eta).clone());
                    entries.insert(key, &class.weights[eta] / &class.weights[xi]);
                }
            }
        }
        Ok(RNCocycleTable { entries })
    }

    /// Both sides of the identity
    /// `d(ι M_••)/d M_•• (θ) = Δ_μ(σθ) / Δ_••(θ)` for each atom `θ` of `M_••`.
    /// The left side reads the swapped weight off `M_••`; the right side
    /// uses `μ` directly and the Haar form `|G_x| / |G_y|` of `Δ_••`.
    pub fn thm_main_rows(&self) -> Result<Vec<ThmMainRow>> {
        self.require_quasi_invariant()?;
        let pairs = self.pair_measure();
        let swapped = pairs.involution()?;
        let mut rows = Vec::with_capacity(pairs.atoms.len());
        for class in &self.classes {
            let a = &class.analysis;
            for xi in class.supported() {
                for (_, theta) in a.pairs.fiber(xi) {
                    let (x, y) = theta.representative;
                    let lhs = swapped.weight(&theta.code) / pairs.weight(&theta.code);
                    let rn = &class.weights[a.quotient.class_of(y)] / &class.weights[a.quotient.class_of(x)];
                    let rhs = rn / haar_ratio(&a.symmetry, x, y);
                    rows.push(ThmMainRow { code: theta.code.clone(), lhs, rhs });
                }
            }
        }
        rows.sort_by(|a, b| a.code.cmp(&b.code));
        Ok(rows)
    }

    pub fn verify_thm_main(&self) -> Result<bool> {
        Ok(self.thm_main_rows()?.iter().all(|r| r.lhs == r.rhs))
    }

    /// The three conditions characterising unimodular measures, their
    /// conjunction, and whether it agrees with [`Self::is_unimodular`].
    pub fn verify_thm_m(&self) -> ThmMVerdict {
        // finite graphs have finite, hence unimodular, automorphism groups
        let unimodular_groups = true;
        let quasi_invariant = self.is_quasi_invariant();
        let rn_equals_quotient_cocycle = quasi_invariant
            && self.classes.iter().all(|class| {
                let n = class.weights.len();
                (0..n).all(|xi| {
                    (0..n).all(|eta| {
                        let rn = &class.weights[eta] / &class.weights[xi];
                        rn == haar_ratio(&class.analysis.symmetry, class.orbit_rep(xi), class.orbit_rep(eta))
                    })
                })
            });
        let conjunction = unimodular_groups && quasi_invariant && rn_equals_quotient_cocycle;
        let is_unimodular = self.is_unimodular();
        ThmMVerdict {
            unimodular_groups,
            quasi_invariant,
            rn_equals_quotient_cocycle,
            conjunction,
            is_unimodular,
            agrees: conjunction == is_unimodular,
        }
    }

    /// One entry per R-class. Every class is finite, so its quotient
    /// cocycle is summable and the class is dissipative.
    pub fn hopf_classification(&self) -> Vec<HopfComponent> {
        self.classes
            .iter()
            .map(|class| {
                let base = class.supported().next().expect("classes come from atoms");
                let x = class.orbit_rep(base);
                let sum: Rational = (0..class.weights.len())
                    .map(|eta| haar_ratio(&class.analysis.symmetry, x, class.orbit_rep(eta)))
                    .sum();
                HopfComponent {
                    class: class.code.clone(),
                    mass: class.weights.iter().sum(),
                    base: class.orbit_code(base).clone(),
                    quotient_cocycle_sum: Some(sum),
                    verdict: HopfVerdict::Dissipative,
                }
            })
            .collect()
    }
}

/// `Δ_μ` on pairs of rooted codes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RNCocycleTable {
    #[serde(serialize_with = "serialize_pair_map")]
    pub entries: BTreeMap<(CanonicalCode, CanonicalCode), Rational>,
}

impl RNCocycleTable {
    pub fn get(&self, xi: &CanonicalCode, eta: &CanonicalCode) -> Option<&Rational> {
        self.entries.get(&(xi.clone(), eta.clone()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ThmMainRow {
    pub code: CanonicalCode,
    /// Swapped weight over weight.
    pub lhs: Rational,
    /// `Δ_μ(σθ) / Δ_••(θ)`.
    pub rhs: Rational,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ThmMVerdict {
    pub unimodular_groups: bool,
    pub quasi_invariant: bool,
    pub rn_equals_quotient_cocycle: bool,
    pub conjunction: bool,
    pub is_unimodular: bool,
    pub agrees: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HopfVerdict {
    /// Summable quotient cocycle: the class carries a discrete unimodular
    /// measure.
    Dissipative,
    /// Non-summable quotient cocycle.
    Conservative,
    /// The automorphism group is not unimodular, so no quotient cocycle
    /// exists.
    NonUnimodularizable,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HopfComponent {
    pub class: CanonicalCode,
    pub mass: Rational,
    pub base: CanonicalCode,
    /// `Σ_η Δ_•(base, η)`.
    pub quotient_cocycle_sum: Option<Rational>,
    pub verdict: HopfVerdict,
}

pub fn counting_measure_r(mu: &RootedMeasure) -> Result<RelationMeasure> {
    Ok(MeasureAnalysis::new(mu)?.relation_measure())
}

pub fn counting_measure_pairs(mu: &RootedMeasure) -> Result<PairCountingMeasure> {
    Ok(MeasureAnalysis::new(mu)?.pair_measure())
}

pub fn is_invariant(mu: &RootedMeasure) -> Result<bool> {
    Ok(MeasureAnalysis::new(mu)?.is_invariant())
}

pub fn is_unimodular(mu: &RootedMeasure) -> Result<bool> {
    Ok(MeasureAnalysis::new(mu)?.is_unimodular())
}

pub fn is_quasi_invariant(mu: &RootedMeasure) -> Result<bool> {
    Ok(MeasureAnalysis::new(mu)?.is_quasi_invariant())
}

pub fn is_quasi_unimodular(mu: &RootedMeasure) -> Result<bool> {
    Ok(MeasureAnalysis::new(mu)?.is_quasi_unimodular())
}

pub fn rn_cocycle(mu: &RootedMeasure) -> Result<RNCocycleTable> {
    MeasureAnalysis::new(mu)?.rn_cocycle()
}

pub fn verify_thm_main(mu: &RootedMeasure) -> Result<bool> {
    MeasureAnalysis::new(mu)?.verify_thm_main()
}

pub fn verify_thm_m(mu: &RootedMeasure) -> Result<ThmMVerdict> {
    Ok(MeasureAnalysis::new(mu)?.verify_thm_m())
}

pub fn hopf_classification(mu: &RootedMeasure) -> Result<Vec<HopfComponent>> {
    Ok(MeasureAnalysis::new(mu)?.hopf_classification())
}

/// Equal weight on every orbit class of `g`.
pub fn invariant_measure(g: &FiniteGraph) -> Result<RootedMeasure> {
    let analysis = GraphAnalysis::new(g)?;
    let w = Rational::new(1, analysis.quotient.len() as i64);
    RootedMeasure::from_atoms(analysis.quotient.classes.iter().map(|c| (g, c.representative, w.clone())))
}

/// Weights proportional to `1 / |G_x|`, normalized.
pub fn unimodular_measure(g: &FiniteGraph) -> Result<RootedMeasure> {
    let analysis = GraphAnalysis::new(g)?;
    let sym = &analysis.symmetry;
    let raw: Vec<(usize, Rational)> = analysis
        .quotient
        .classes
        .iter()
        .map(|c| (c.representative, Rational::from_biguint(sym.stabilizer_order(c.representative)).recip()))
        .collect();
    let total: Rational = raw.iter().map(|(_, w)| w).sum();
    RootedMeasure::from_atoms(raw.into_iter().map(|(x, w)| (g, x, w / &total)))
}

/// One ergodic component: the normalized restriction of `μ` to an R-class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Component {
    pub class: CanonicalCode,
    pub mass: Rational,
    pub measure: RootedMeasure,
}

/// Groups atoms by R-class (unrooted code). Components come in class-code
/// order and `Σ mass · measure = μ`.
pub fn ergodic_decomposition(mu: &RootedMeasure) -> Result<Vec<Component>> {
    let mut grouped: BTreeMap<CanonicalCode, RootedMeasure> = BTreeMap::new();
    for a in &mu.atoms {
        grouped.entry(canonical_code(&a.graph, &[])?).or_default().add(&a.graph, a.root, a.weight.clone())?;
    }
    grouped
        .into_iter()
        .map(|(class, part)| {
            let mass = part.total_mass();
            Ok(Component { class, measure: part.normalize()?, mass })
        })
        .collect()
}

/// Recombines a decomposition.
pub fn recombine(components: &[Component]) -> Result<RootedMeasure> {
    let mut out = RootedMeasure::new();
    for c in components {
        out = out.plus(&c.measure.scaled(&c.mass)?);
    }
    Ok(out)
}

/// Serializable transport kernels. Each sends unit mass from `x` to the
/// vertices `y` it selects.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TransportKernel {
    /// Every neighbor of degree `k`.
    NeighborDeg { k: usize },
    /// Every vertex at distance exactly `k`.
    Distance { k: usize },
    /// `y` such that the `r`-ball around `x`, rooted at `(x, y)`, has the
    /// given doubly rooted code. Vertices outside the ball get nothing.
    BallMatch { r: usize, code: CanonicalCode },
}

impl TransportKernel {
    pub fn validate(&self) -> Result<()> {
        if let TransportKernel::BallMatch { r, code } = self {
            if code.kind() != CodeKind::DoublyRooted {
                return Err(Error::InvalidParameter("ball_match needs a doubly rooted code".into()));
            }
            let (g, roots) = code.decode();
            if !g.is_connected() || g.eccentricity(roots[0]) > *r {
                return Err(Error::InvalidParameter(format!("code is not a doubly rooted {r}-ball")));
            }
        }
        Ok(())
    }

    /// Largest distance at which the kernel sends mass.
    pub fn range(&self) -> usize {
        match self {
            TransportKernel::NeighborDeg { .. } => 1,
            TransportKernel::Distance { k } => *k,
            TransportKernel::BallMatch { r, .. } => *r,
        }
    }
}

pub fn parse_kernel(text: &str) -> Result<TransportKernel> {
    let kernel: TransportKernel = serde_json::from_str(text)?;
    kernel.validate()?;
    Ok(kernel)
}

/// Anything that assigns a mass to `(Γ, x, y)`. Closures
/// `Fn(&FiniteGraph, usize, usize) -> Rational` qualify. The mass transport
/// principle is only meaningful for kernels that depend on the isomorphism
/// class of `(Γ, x, y)`.
pub trait Kernel {
    fn mass(&self, g: &FiniteGraph, x: usize, y: usize) -> Result<Rational>;
}

impl<F: Fn(&FiniteGraph, usize, usize) -> Rational> Kernel for F {
    fn mass(&self, g: &FiniteGraph, x: usize, y: usize) -> Result<Rational> {
        Ok(self(g, x, y))
    }
}

fn ball_pair_code(g: &FiniteGraph, x: usize, y: usize, r: usize) -> Result<Option<CanonicalCode>> {
    let (order, position) = g.ball_vertices(x, r);
    match position[y] {
        None => Ok(None),
        Some(py) => Ok(Some(canonical_code(&g.induced_subgraph(&order), &[0, py])?)),
    }
}

impl Kernel for TransportKernel {
    fn mass(&self, g: &FiniteGraph, x: usize, y: usize) -> Result<Rational> {
        let hit = match self {
            TransportKernel::NeighborDeg { k } => g.has_edge(x, y) && g.degree(y) == *k,
            TransportKernel::Distance { k } => g.distance(x, y)? == Some(*k),
            TransportKernel::BallMatch { r, code } => ball_pair_code(g, x, y, *r)?.as_ref() == Some(code),
        };
        Ok(if hit { Rational::one() } else { Rational::zero() })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MassTransport {
    /// Mass sent out of the root.
    pub lhs: Rational,
    /// Mass received by the root.
    pub rhs: Rational,
    pub equal: bool,
}

impl MassTransport {
    fn new(lhs: Rational, rhs: Rational) -> Self {
        let equal = lhs == rhs;
        MassTransport { lhs, rhs, equal }
    }
}

/// `Σ w Σ_y f(Γ, x, y)` against `Σ w Σ_y f(Γ, y, x)`.
pub fn mass_transport_check(mu: &RootedMeasure, kernel: &dyn Kernel) -> Result<MassTransport> {
    let mut lhs = Rational::zero();
    let mut rhs = Rational::zero();
    for a in &mu.atoms {
        for y in 0..a.graph.vertex_count() {
            lhs += &a.weight * kernel.mass(&a.graph, a.root, y)?;
            rhs += &a.weight * kernel.mass(&a.graph, y, a.root)?;
        }
    }
    Ok(MassTransport::new(lhs, rhs))
}

/// The kernels that fire on pairs `(x, y)` of `g` with `dist(x, y) ≤ max_range`.
fn firing_kernels(g: &FiniteGraph, x: usize, y: usize, max_range: usize, out: &mut Vec<TransportKernel>) -> Result<()> {
    out.clear();
    let Some(d) = g.distance(x, y)? else { return Ok(()) };
    if d == 1 {
        out.push(TransportKernel::NeighborDeg { k: g.degree(y) });
    }
    if d <= max_range {
        out.push(TransportKernel::Distance { k: d });
        for r in d..=max_range {
            let code = ball_pair_code(g, x, y, r)?.expect("y lies in the ball");
            out.push(TransportKernel::BallMatch { r, code });
        }
    }
    Ok(())
}

/// The built-in kernel family on the support of `μ`, up to `max_range`:
/// `neighbor_deg(k)` for every degree that occurs, `distance(k)` for
/// `k ≤ max_range`, and `ball_match(r, c)` for every doubly rooted `r`-ball
/// `c` of a support graph.
pub fn builtin_kernels(mu: &RootedMeasure, max_range: usize) -> Result<Vec<TransportKernel>> {
    let mut kernels = BTreeSet::new();
    let max_degree = mu.atoms.iter().flat_map(|a| (0..a.graph.vertex_count()).map(|v| a.graph.degree(v))).max();
    for k in 0..=max_degree.unwrap_or(0) {
        kernels.insert(TransportKernel::NeighborDeg { k });
    }
    for k in 0..=max_range {
        kernels.insert(TransportKernel::Distance { k });
    }
    let mut firing = Vec::new();
    for a in &mu.atoms {
        let n = a.graph.vertex_count();
        for x in 0..n {
            for y in 0..n {
                firing_kernels(&a.graph, x, y, max_range, &mut firing)?;
                kernels.extend(firing.iter().filter(|k| matches!(k, TransportKernel::BallMatch { .. })).cloned());
            }
        }
    }
    Ok(kernels.into_iter().collect())
}

/// [`mass_transport_check`] for every built-in kernel up to `max_range`,
/// computed in one pass over the support.
pub fn mass_transport_battery(mu: &RootedMeasure, max_range: usize) -> Result<Vec<(TransportKernel, MassTransport)>> {
    let mut sent: BTreeMap<TransportKernel, Rational> = BTreeMap::new();
    let mut received: BTreeMap<TransportKernel, Rational> = BTreeMap::new();
    let mut firing = Vec::new();
    for a in &mu.atoms {
        for y in 0..a.graph.vertex_count() {
            firing_kernels(&a.graph, a.root, y, max_range, &mut firing)?;
            for k in firing.drain(..) {
                *sent.entry(k).or_insert_with(Rational::zero) += &a.weight;
            }
            firing_kernels(&a.graph, y, a.root, max_range, &mut firing)?;
            for k in firing.drain(..) {
                *received.entry(k).or_insert_with(Rational::zero) += &a.weight;
            }
        }
    }
    let take = |map: &BTreeMap<TransportKernel, Rational>, k: &TransportKernel| {
        map.get(k).cloned().unwrap_or_else(Rational::zero)
    };
    Ok(builtin_kernels(mu, max_range)?
        .into_iter()
        .map(|k| {
            let result = MassTransport::new(take(&sent, &k), take(&received, &k));
            (k, result)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(p: i64, q: i64) -> Rational {
        Rational::new(p, q)
    }

    fn i3_measure(end: Rational, mid: Rational) -> RootedMeasure {
        let g = FiniteGraph::path(3);
        RootedMeasure::from_atoms([(&g, 0, end), (&g, 1, mid)]).unwrap()
    }

    fn code(g: &FiniteGraph, roots: &[usize]) -> CanonicalCode {
        canonical_code(g, roots).unwrap()
    }

    #[test]
    fn atoms_merge_by_class() {
        let g = FiniteGraph::path(3);
        let m = RootedMeasure::from_atoms([(&g, 0, r(1, 3)), (&g, 2, r(1, 3)), (&g, 1, r(1, 3))]).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.weight_of(&code(&g, &[2])), r(2, 3));
        assert_eq!(m.total_mass(), Rational::one());
        assert!(RootedMeasure::point_mass(&g, 0).unwrap().add(&g, 1, Rational::zero()).is_err());
        let split = FiniteGraph::new(3, &[(0, 1)]).unwrap();
        assert!(matches!(RootedMeasure::point_mass(&split, 0), Err(Error::Disconnected)));
    }

    #[test]
    fn relation_measure_of_segment_midpoint() {
        let g = FiniteGraph::path(3);
        let m = counting_measure_r(&RootedMeasure::point_mass(&g, 1).unwrap()).unwrap();
        let (end, mid) = (code(&g, &[0]), code(&g, &[1]));
        assert_eq!(m.get(&mid, &end), Rational::one());
        assert_eq!(m.get(&mid, &mid), Rational::one());
        assert_eq!(m.atoms.len(), 2);
        let unimodular = counting_measure_r(&i3_measure(r(2, 3), r(1, 3))).unwrap();
        assert_eq!(unimodular.total_mass(), r(2, 1));
    }

    #[test]
    fn pair_measure_of_segment_midpoint() {
        let g = FiniteGraph::path(3);
        let m = counting_measure_pairs(&RootedMeasure::point_mass(&g, 1).unwrap()).unwrap();
        assert_eq!(m.weight(&code(&g, &[1, 0])), r(2, 1));
        assert_eq!(m.weight(&code(&g, &[1, 1])), Rational::one());
        assert_eq!(m.atoms.len(), 2);
    }

    #[test]
    fn pair_measure_of_square() {
        let g = FiniteGraph::cycle(4);
        let m = counting_measure_pairs(&RootedMeasure::point_mass(&g, 0).unwrap()).unwrap();
        assert_eq!(m.weight(&code(&g, &[0, 0])), r(1, 1));
        assert_eq!(m.weight(&code(&g, &[0, 1])), r(2, 1));
        assert_eq!(m.weight(&code(&g, &[0, 2])), r(1, 1));
    }

    #[test]
    fn segment_verdicts() {
        let nu = i3_measure(r(1, 2), r(1, 2));
        let mu = i3_measure(r(2, 3), r(1, 3));
        assert!(is_invariant(&nu).unwrap());
        assert!(!is_unimodular(&nu).unwrap());
        assert!(!is_invariant(&mu).unwrap());
        assert!(is_unimodular(&mu).unwrap());
        let c5 = RootedMeasure::point_mass(&FiniteGraph::cycle(5), 2).unwrap();
        assert!(is_invariant(&c5).unwrap() && is_unimodular(&c5).unwrap());
        assert!(is_unimodular(&RootedMeasure::point_mass(&FiniteGraph::path(2), 1).unwrap()).unwrap());
    }

    #[test]
    fn quasi_invariance() {
        let g = FiniteGraph::path(3);
        let end_only = RootedMeasure::point_mass(&g, 0).unwrap();
        let a = MeasureAnalysis::new(&end_only).unwrap();
        assert!(!a.is_quasi_invariant());
        assert!(!a.is_quasi_unimodular());
        assert_eq!(a.missing_classes(), vec![code(&g, &[1])]);
        assert!(matches!(a.rn_cocycle(), Err(Error::NotQuasiInvariant { .. })));
        let both = i3_measure(r(1, 5), r(7, 2));
        assert!(is_quasi_invariant(&both).unwrap() && is_quasi_unimodular(&both).unwrap());
        let centre = RootedMeasure::point_mass(&FiniteGraph::star(3), 0).unwrap();
        assert!(!is_quasi_invariant(&centre).unwrap());
        assert!(!is_quasi_unimodular(&centre).unwrap());
        assert!(is_quasi_invariant(&RootedMeasure::point_mass(&FiniteGraph::cycle(6), 0).unwrap()).unwrap());
    }

    #[test]
    fn rn_cocycle_on_segment() {
        let g = FiniteGraph::path(3);
        let (end, mid) = (code(&g, &[0]), code(&g, &[1]));
        let t = rn_cocycle(&i3_measure(r(2, 3), r(1, 3))).unwrap();
        assert_eq!(t.get(&end, &mid), Some(&r(1, 2)));
        assert_eq!(t.get(&mid, &end), Some(&r(2, 1)));
        assert_eq!(t.get(&end, &end), Some(&Rational::one()));
        let t = rn_cocycle(&i3_measure(r(1, 2), r(1, 2))).unwrap();
        assert!(t.entries.values().all(Rational::is_one));
    }

    #[test]
    fn thm_main_on_segment() {
        let g = FiniteGraph::path(3);
        let mu = MeasureAnalysis::new(&i3_measure(r(2, 3), r(1, 3))).unwrap();
        let rows = mu.thm_main_rows().unwrap();
        assert_eq!(rows.len(), 5);
        assert!(rows.iter().all(|row| row.lhs.is_one() && row.rhs.is_one()));
        let nu = MeasureAnalysis::new(&i3_measure(r(1, 2), r(1, 2))).unwrap();
        let rows = nu.thm_main_rows().unwrap();
        assert!(rows.iter().all(|row| row.lhs == row.rhs));
        let end_mid = rows.iter().find(|row| row.code == code(&g, &[0, 1])).unwrap();
        assert_eq!(end_mid.lhs, r(2, 1));
        assert!(nu.verify_thm_main().unwrap());
    }

    #[test]
    fn thm_m_verdicts() {
        let v = verify_thm_m(&i3_measure(r(2, 3), r(1, 3))).unwrap();
        assert!(v.quasi_invariant && v.rn_equals_quotient_cocycle && v.is_unimodular && v.agrees);
        let v = verify_thm_m(&i3_measure(r(1, 2), r(1, 2))).unwrap();
        assert!(v.quasi_invariant && !v.rn_equals_quotient_cocycle && !v.is_unimodular && v.agrees);
        let v = verify_thm_m(&RootedMeasure::point_mass(&FiniteGraph::path(1), 0).unwrap()).unwrap();
        assert!(v.conjunction && v.is_unimodular);
    }

    #[test]
    fn canonical_measures() {
        let g = FiniteGraph::path(3);
        assert_eq!(invariant_measure(&g).unwrap(), i3_measure(r(1, 2), r(1, 2)));
        assert_eq!(unimodular_measure(&g).unwrap(), i3_measure(r(2, 3), r(1, 3)));
        let star = FiniteGraph::star(3);
        let u = unimodular_measure(&star).unwrap();
        assert_eq!(u.weight_of(&code(&star, &[0])), r(1, 4));
        assert_eq!(u.weight_of(&code(&star, &[1])), r(3, 4));
        let i = invariant_measure(&star).unwrap();
        assert_eq!(i.weight_of(&code(&star, &[0])), r(1, 2));
        assert_eq!(invariant_measure(&FiniteGraph::cycle(5)).unwrap().len(), 1);
    }

    #[test]
    fn transport_on_segment() {
        let k = TransportKernel::NeighborDeg { k: 2 };
        let t = mass_transport_check(&i3_measure(r(2, 3), r(1, 3)), &k).unwrap();
        assert_eq!((t.lhs, t.rhs, t.equal), (r(2, 3), r(2, 3), true));
        let t = mass_transport_check(&i3_measure(r(1, 2), r(1, 2)), &k).unwrap();
        assert_eq!((t.lhs, t.rhs, t.equal), (r(1, 2), r(1, 1), false));
        let neighbours = |g: &FiniteGraph, x: usize, y: usize| Rational::from(g.has_edge(x, y) as usize);
        let t = mass_transport_check(&i3_measure(r(1, 2), r(1, 2)), &neighbours).unwrap();
        assert_eq!((t.lhs, t.rhs), (r(3, 2), r(3, 2)));
        let t = mass_transport_check(&i3_measure(r(1, 5), r(1, 2)), &TransportKernel::Distance { k: 0 }).unwrap();
        assert_eq!((t.lhs, t.rhs), (r(7, 10), r(7, 10)));
    }

    #[test]
    fn battery_matches_single_checks() {
        let mu = i3_measure(r(1, 2), r(1, 2)).plus(&unimodular_measure(&FiniteGraph::star(3)).unwrap());
        let battery = mass_transport_battery(&mu, 2).unwrap();
        assert!(battery.iter().any(|(_, t)| !t.equal));
        for (k, t) in &battery {
            assert_eq!(&mass_transport_check(&mu, k).unwrap(), t, "{k:?}");
        }
        let unimodular = unimodular_measure(&FiniteGraph::path(4)).unwrap();
        assert!(mass_transport_battery(&unimodular, 3).unwrap().iter().all(|(_, t)| t.equal));
    }

    #[test]
    fn kernel_json() {
        assert_eq!(parse_kernel(r#"{"kind":"neighbor_deg","k":2}"#).unwrap(), TransportKernel::NeighborDeg { k: 2 });
        assert_eq!(parse_kernel(r#"{"kind":"distance","k":0}"#).unwrap(), TransportKernel::Distance { k: 0 });
        assert!(parse_kernel(r#"{"kind":"distance"}"#).is_err());
        assert!(parse_kernel(r#"{"kind":"teleport","k":1}"#).is_err());
        let g = FiniteGraph::path(3);
        let c = code(&g, &[1, 0]);
        let text = format!(r#"{{"kind":"ball_match","r":1,"code":"{}"}}"#, c.to_hex());
        assert_eq!(parse_kernel(&text).unwrap(), TransportKernel::BallMatch { r: 1, code: c });
        let rooted = code(&g, &[1]);
        assert!(parse_kernel(&format!(r#"{{"kind":"ball_match","r":1,"code":"{}"}}"#, rooted.to_hex())).is_err());
    }

    #[test]
    fn decomposition_round_trip() {
        let mu = unimodular_measure(&FiniteGraph::path(3))
            .unwrap()
            .scaled(&r(1, 2))
            .unwrap()
            .plus(&unimodular_measure(&FiniteGraph::star(3)).unwrap().scaled(&r(1, 2)).unwrap());
        let parts = ergodic_decomposition(&mu).unwrap();
        assert_eq!(parts.len(), 2);
        for p in &parts {
            assert_eq!(p.mass, r(1, 2));
            assert!(is_unimodular(&p.measure).unwrap());
        }
        assert_eq!(recombine(&parts).unwrap(), mu);
    }

    #[test]
    fn hopf_on_finite_classes() {
        let h = hopf_classification(&i3_measure(r(2, 3), r(1, 3))).unwrap();
        assert_eq!(h.len(), 1);
        assert_eq!(h[0].verdict, HopfVerdict::Dissipative);
        // base is the end class: 1 + Δ(end, mid) = 1 + 1/2
        assert_eq!(h[0].quotient_cocycle_sum, Some(r(3, 2)));
    }

    #[test]
    fn measure_file_round_trip() {
        let mu = i3_measure(r(2, 3), r(1, 3));
        let text = serde_json::to_string(&mu).unwrap();
        assert_eq!(parse_measure(&text).unwrap(), mu);
        let plain = r#"{"atoms":[{"graph":{"n":3,"edges":[[0,1],[1,2]]},"root":1,"weight":"1/3"},
                                 {"graph":{"n":3,"edges":[[0,1],[1,2]]},"root":2,"weight":"2/3"}]}"#;
        assert_eq!(parse_measure(plain).unwrap(), mu);
        assert!(matches!(parse_measure(r#"{"atoms":[]}"#), Err(Error::EmptyMeasure)));
        assert!(parse_measure(r#"{"atoms":[{"graph":{"n":2,"edges":[[0,1]]},"root":0,"weight":"-1"}]}"#).is_err());
        assert!(parse_measure(r#"{"atoms":[{"graph":{"n":2,"edges":[[0,1]]},"root":0,"weight":"1","x":1}]}"#).is_err());
    }
}
