//! The invariant battery: exhaustive checks over all small connected graphs
//! against brute-force enumeration, plus seeded random measure checks.
//!
//! Violations carry the witness graph or measure. The report contains no
//! timings, so equal configurations give byte-identical JSON.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use serde::Serialize;

use crate::cocycles::{cocycle_table, haar_ratio};
use crate::error::Result;
use crate::graph::FiniteGraph;
use crate::limits::uniform_root_measure;
use crate::measures::{
    ergodic_decomposition, invariant_measure, mass_transport_battery, recombine, unimodular_measure, MeasureAnalysis,
    RootedMeasure,
};
use crate::oracle::{all_automorphisms, connected_graphs_up_to};
use crate::quotient::{
    fiber_measure_at_vertex, fiber_measure_of, fiber_measure_via_stabilizer, modular_ratio_holds, sigma_is_bijective,
    GraphAnalysis,
};
use crate::random::{MeasureGenerator, DEFAULT_SEED};
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SelfcheckConfig {
    /// Exhaustive suite over connected graphs with at most this many vertices.
    pub max_vertices: usize,
    pub seed: u64,
    pub random_measures: usize,
    pub mixtures: usize,
    pub rigid_measures: usize,
    /// Vertex bound for graphs in random measures.
    pub random_max_vertices: usize,
    /// Kernel range for the mass transport checks.
    pub transport_range: usize,
}

impl Default for SelfcheckConfig {
    fn default() -> Self {
        SelfcheckConfig {
            max_vertices: 7,
            seed: DEFAULT_SEED,
            random_measures: 200,
            mixtures: 50,
            rigid_measures: 50,
            random_max_vertices: 6,
            transport_range: 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub check: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graph: Option<FiniteGraph>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measure: Option<RootedMeasure>,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SelfcheckReport {
    pub graphs_checked: usize,
    pub measures_checked: usize,
    /// Number of passing instances per check.
    pub passed: BTreeMap<&'static str, usize>,
    /// How many random measures fell in each category, to show the suite
    /// is not vacuous.
    pub coverage: BTreeMap<&'static str, usize>,
    pub violations: Vec<Violation>,
}

impl SelfcheckReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    fn graph_check(&mut self, check: &'static str, g: &FiniteGraph, holds: bool, detail: impl FnOnce() -> String) {
        if holds {
            *self.passed.entry(check).or_default() += 1;
        } else {
            self.violations.push(Violation { check, graph: Some(g.clone()), measure: None, detail: detail() });
        }
    }

    fn measure_check(&mut self, check: &'static str, mu: &RootedMeasure, holds: bool, detail: impl FnOnce() -> String) {
        if holds {
            *self.passed.entry(check).or_default() += 1;
        } else {
            self.violations.push(Violation { check, graph: None, measure: Some(mu.clone()), detail: detail() });
        }
    }

    fn count(&mut self, category: &'static str) {
        *self.coverage.entry(category).or_default() += 1;
    }
}

/// Every per-graph invariant, against brute-force enumeration of `Aut(g)`.
pub fn check_graph(g: &FiniteGraph, report: &mut SelfcheckReport) -> Result<()> {
    let n = g.vertex_count();
    let a = GraphAnalysis::new(g)?;
    let sym = &a.symmetry;
    let autos = all_automorphisms(g);

    report.graph_check("aut_order_matches_enumeration", g, sym.group().order == BigUint::from(autos.len()), || {
        format!("search gives {}, enumeration gives {}", sym.group().order, autos.len())
    });

    let brute_orbits: BTreeSet<Vec<usize>> =
        (0..n).map(|v| autos.iter().map(|p| p[v]).collect::<BTreeSet<_>>().into_iter().collect()).collect();
    let orbits: BTreeSet<Vec<usize>> = sym.group().orbits.iter().cloned().collect();
    report.graph_check("orbits_match_enumeration", g, orbits == brute_orbits, || {
        format!("{orbits:?} vs {brute_orbits:?}")
    });

    let mut stabilizers_agree = true;
    for x in 0..n {
        let stab: Vec<&Vec<usize>> = autos.iter().filter(|p| p[x] == x).collect();
        stabilizers_agree &= sym.stabilizer_order(x) == &BigUint::from(stab.len());
        for y in 0..n {
            let orbit: BTreeSet<usize> = stab.iter().map(|p| p[y]).collect();
            stabilizers_agree &= sym.stabilizer_orbit_size(x, y) == orbit.len();
        }
    }
    report.graph_check("stabilizers_match_enumeration", g, stabilizers_agree, String::new);

    let orbit_stabilizer = (0..n).all(|x| {
        let orbit = sym.group().orbits[sym.orbit_of(x)].len();
        BigUint::from(orbit) * sym.stabilizer_order(x) == sym.group().order
    });
    report.graph_check("orbit_stabilizer", g, orbit_stabilizer, String::new);

    let table = cocycle_table(sym);
    let mut identity = None;
    'triples: for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                if &table[x][y] * &table[y][z] != table[x][z] {
                    identity = Some((x, y, z));
                    break 'triples;
                }
            }
        }
    }
    report.graph_check("cocycle_identity", g, identity.is_none(), || format!("fails at {identity:?}"));

    let haar = (0..n).all(|x| (0..n).all(|y| table[x][y] == haar_ratio(sym, x, y)));
    report.graph_check("cocycle_equals_haar_ratio", g, haar, String::new);

    let rigid = sym.group().is_trivial();
    let bijective = sigma_is_bijective(&a);
    report.graph_check("sigma_bijective_iff_rigid", g, bijective == rigid, || {
        format!("rigid {rigid}, bijective {bijective}")
    });

    let mut fibers = true;
    for xi in 0..a.quotient.len() {
        let f = fiber_measure_of(&a, xi)?;
        fibers &= f.total() == n;
        for &x in &a.quotient.classes[xi].vertices {
            fibers &= fiber_measure_at_vertex(&a, x) == f && fiber_measure_via_stabilizer(&a, x) == f;
        }
    }
    report.graph_check("fiber_total_is_vertex_count", g, fibers, String::new);

    report.graph_check("fiber_ratio_identity", g, modular_ratio_holds(&a), String::new);

    let uniform = uniform_root_measure(g)?;
    let unimodular = unimodular_measure(g)?;
    report.graph_check("uniform_root_equals_unimodular", g, uniform == unimodular, String::new);
    report.graph_check(
        "unimodular_measure_is_unimodular",
        g,
        MeasureAnalysis::new(&unimodular)?.is_unimodular(),
        String::new,
    );
    report.graph_check(
        "invariant_measure_is_invariant",
        g,
        MeasureAnalysis::new(&invariant_measure(g)?)?.is_invariant(),
        String::new,
    );
    report.graphs_checked += 1;
    Ok(())
}

fn max_eccentricity(mu: &RootedMeasure) -> usize {
    mu.atoms()
        .iter()
        .map(|a| (0..a.graph.vertex_count()).map(|v| a.graph.eccentricity(v)).max().unwrap_or(0))
        .max()
        .unwrap_or(0)
}

/// Checks on one random measure.
pub fn check_measure(mu: &RootedMeasure, scale: &Rational, range: usize, report: &mut SelfcheckReport) -> Result<()> {
    let a = MeasureAnalysis::new(mu)?;
    let unimodular = a.is_unimodular();
    let invariant = a.is_invariant();
    let quasi = a.is_quasi_invariant();
    report.count(if unimodular { "unimodular" } else { "not_unimodular" });
    report.count(if quasi { "quasi_invariant" } else { "not_quasi_invariant" });

    let verdict = a.verify_thm_m();
    report.measure_check("thm_m_equivalence", mu, verdict.agrees, || format!("{verdict:?}"));

    let quasi_unimodular = a.is_quasi_unimodular();
    report.measure_check("quasi_invariant_iff_quasi_unimodular", mu, quasi == quasi_unimodular, || {
        format!("quasi-invariant {quasi}, quasi-unimodular {quasi_unimodular}")
    });

    if quasi {
        let rows = a.thm_main_rows()?;
        let bad = rows.iter().find(|r| r.lhs != r.rhs).cloned();
        report.measure_check("thm_main_identity", mu, bad.is_none(), || format!("{bad:?}"));
    }

    let battery = mass_transport_battery(mu, range)?;
    if unimodular {
        let bad = battery.iter().find(|(_, t)| !t.equal).cloned();
        report.measure_check("mass_transport_holds_when_unimodular", mu, bad.is_none(), || format!("{bad:?}"));
    } else {
        // balls covering the whole graph separate every pair class
        let wide = mass_transport_battery(mu, range.max(max_eccentricity(mu)))?;
        let detected = wide.iter().any(|(_, t)| !t.equal);
        report.measure_check("mass_transport_detects_non_unimodular", mu, detected, String::new);
    }

    let scaled = MeasureAnalysis::new(&mu.scaled(scale)?)?;
    let same = scaled.is_unimodular() == unimodular
        && scaled.is_invariant() == invariant
        && scaled.is_quasi_invariant() == quasi
        && scaled.is_quasi_unimodular() == quasi_unimodular;
    report.measure_check("verdicts_scale_invariant", mu, same, || format!("scale {scale}"));
    report.measures_checked += 1;
    Ok(())
}

/// Decomposition round trip on a unimodular mixture.
pub fn check_decomposition(mu: &RootedMeasure, report: &mut SelfcheckReport) -> Result<()> {
    let parts = ergodic_decomposition(mu)?;
    let mut ok = recombine(&parts)? == *mu;
    for p in &parts {
        let a = MeasureAnalysis::new(&p.measure)?;
        ok &= a.classes().len() == 1 && a.is_unimodular() && p.measure.total_mass().is_one();
    }
    report.measure_check("ergodic_decomposition_round_trip", mu, ok, || format!("{} components", parts.len()));
    report.measures_checked += 1;
    Ok(())
}

/// On rigid graphs invariance and unimodularity coincide.
pub fn check_rigid(mu: &RootedMeasure, report: &mut SelfcheckReport) -> Result<()> {
    let a = MeasureAnalysis::new(mu)?;
    let (i, u) = (a.is_invariant(), a.is_unimodular());
    report.count(if u { "rigid_unimodular" } else { "rigid_not_unimodular" });
    report.measure_check("rigid_invariant_iff_unimodular", mu, i == u, || format!("invariant {i}, unimodular {u}"));
    report.measures_checked += 1;
    Ok(())
}

pub fn run(config: &SelfcheckConfig) -> Result<SelfcheckReport> {
    let mut report = SelfcheckReport::default();
    for g in connected_graphs_up_to(config.max_vertices) {
        check_graph(&g, &mut report)?;
    }
    let mut generator = MeasureGenerator::new(config.seed, config.random_max_vertices);
    for _ in 0..config.random_measures {
        let mu = generator.measure()?;
        let scale = generator.weight();
        check_measure(&mu, &scale, config.transport_range, &mut report)?;
    }
    for _ in 0..config.mixtures {
        let mu = generator.unimodular_mixture()?;
        check_decomposition(&mu, &mut report)?;
    }
    for _ in 0..config.rigid_measures {
        match generator.rigid_measure()? {
            Some(mu) => check_rigid(&mu, &mut report)?,
            None => break,
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_run_is_clean_and_repeatable() {
        let config = SelfcheckConfig {
            max_vertices: 5,
            random_measures: 20,
            mixtures: 5,
            rigid_measures: 5,
            random_max_vertices: 6,
            ..SelfcheckConfig::default()
        };
        let report = run(&config).unwrap();
        assert!(report.ok(), "{:?}", report.violations);
        assert_eq!(report.graphs_checked, 1 + 1 + 2 + 6 + 21);
        assert_eq!(serde_json::to_string(&report).unwrap(), serde_json::to_string(&run(&config).unwrap()).unwrap());
    }

    #[test]
    fn violations_name_the_witness() {
        let mut report = SelfcheckReport::default();
        let g = FiniteGraph::path(2);
        report.graph_check("demo", &g, false, || "detail".into());
        assert!(!report.ok());
        let json = serde_json::to_value(&report).unwrap();
        assert_eq!(json["violations"][0]["graph"]["n"], 2);
    }
}
