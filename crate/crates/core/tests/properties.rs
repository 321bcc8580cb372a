use std::sync::OnceLock;

use proptest::prelude::*;

use unimod::automorphisms::Symmetry;
use unimod::canon::canonical_code;
use unimod::cocycles::cocycle_table;
use unimod::limits::{ball_distribution, graph_ball_distribution, tv_distance, uniform_root_measure};
use unimod::measures::{mass_transport_battery, parse_measure, MeasureAnalysis};
use unimod::oracle::connected_graphs_up_to;
use unimod::random::MeasureGenerator;
use unimod::symbolic::{
    busemann, canopy_partial_sum, canopy_summability, canopy_unimodular_measure, grandfather_cocycle,
    grandfather_distance, tree_distance, TreeCoordinates,
};
use unimod::{FiniteGraph, Rational};

fn graphs() -> &'static [FiniteGraph] {
    static GRAPHS: OnceLock<Vec<FiniteGraph>> = OnceLock::new();
    GRAPHS.get_or_init(|| connected_graphs_up_to(6))
}

/// A random connected graph on at most 6 vertices, randomly relabeled.
fn graph() -> impl Strategy<Value = FiniteGraph> {
    (0..graphs().len()).prop_flat_map(|i| {
        let g = graphs()[i].clone();
        let n = g.vertex_count();
        Just((0..n).collect::<Vec<_>>()).prop_shuffle().prop_map(move |perm| g.relabel(&perm))
    })
}

fn coordinates(d: usize) -> impl Strategy<Value = TreeCoordinates> {
    (0usize..6, proptest::collection::vec(0..d - 1, 0..6)).prop_map(|(a, p)| TreeCoordinates::new(a, p))
}

fn power(d: usize, e: i64) -> Rational {
    Rational::pow(&Rational::from(d - 1), e)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn codes_ignore_labels((g, perm) in graph().prop_flat_map(|g| {
        let n = g.vertex_count();
        (Just(g), Just((0..n).collect::<Vec<_>>()).prop_shuffle())
    })) {
        let n = g.vertex_count();
        let h = g.relabel(&perm);
        prop_assert_eq!(canonical_code(&g, &[]).unwrap(), canonical_code(&h, &[]).unwrap());
        for x in 0..n {
            prop_assert_eq!(canonical_code(&g, &[x]).unwrap(), canonical_code(&h, &[perm[x]]).unwrap());
            let y = (x + 1) % n;
            prop_assert_eq!(canonical_code(&g, &[x, y]).unwrap(), canonical_code(&h, &[perm[x], perm[y]]).unwrap());
        }
    }

    #[test]
    fn cocycle_is_multiplicative(g in graph()) {
        let t = cocycle_table(&Symmetry::new(&g).unwrap());
        let n = g.vertex_count();
        for x in 0..n {
            prop_assert!(t[x][x].is_one());
            for y in 0..n {
                prop_assert!((&t[x][y] * &t[y][x]).is_one());
                for z in 0..n {
                    prop_assert_eq!(&t[x][y] * &t[y][z], t[x][z].clone());
                }
            }
        }
    }

    #[test]
    fn measure_verdicts(seed in any::<u64>()) {
        let mut generator = MeasureGenerator::new(seed, 6);
        let mu = generator.measure().unwrap();
        let a = MeasureAnalysis::new(&mu).unwrap();
        prop_assert!(a.verify_thm_m().agrees);
        prop_assert_eq!(a.is_quasi_invariant(), a.is_quasi_unimodular());
        if a.is_quasi_invariant() {
            prop_assert!(a.verify_thm_main().unwrap());
        }
        if a.is_unimodular() {
            prop_assert!(mass_transport_battery(&mu, 2).unwrap().iter().all(|(_, t)| t.equal));
        }
        let scale = generator.weight();
        let b = MeasureAnalysis::new(&mu.scaled(&scale).unwrap()).unwrap();
        prop_assert_eq!(
            (a.is_invariant(), a.is_unimodular(), a.is_quasi_invariant()),
            (b.is_invariant(), b.is_unimodular(), b.is_quasi_invariant())
        );
        let text = serde_json::to_string(&mu.to_file()).unwrap();
        prop_assert_eq!(parse_measure(&text).unwrap(), mu);
    }

    #[test]
    fn rigid_measures_are_invariant_iff_unimodular(seed in any::<u64>()) {
        let mu = MeasureGenerator::new(seed, 6).rigid_measure().unwrap().unwrap();
        let a = MeasureAnalysis::new(&mu).unwrap();
        prop_assert_eq!(a.is_invariant(), a.is_unimodular());
    }

    #[test]
    fn uniform_root_ball_laws(g in graph(), r in 0usize..4) {
        let direct = graph_ball_distribution(&g, r).unwrap();
        prop_assert_eq!(&ball_distribution(&uniform_root_measure(&g).unwrap(), r).unwrap(), &direct);
        prop_assert!(tv_distance(&direct, &direct).unwrap().is_zero());
    }

    #[test]
    fn tv_is_a_metric(a in graph(), b in graph(), c in graph(), r in 0usize..3) {
        let (p, q, s) = (
            graph_ball_distribution(&a, r).unwrap(),
            graph_ball_distribution(&b, r).unwrap(),
            graph_ball_distribution(&c, r).unwrap(),
        );
        let pq = tv_distance(&p, &q).unwrap();
        prop_assert_eq!(&pq, &tv_distance(&q, &p).unwrap());
        prop_assert!(pq >= Rational::zero() && pq <= Rational::one());
        prop_assert!(pq <= tv_distance(&p, &s).unwrap() + tv_distance(&s, &q).unwrap());
    }

    #[test]
    fn tree_metrics((d, x, y, z) in (3usize..6).prop_flat_map(|d| (Just(d), coordinates(d), coordinates(d), coordinates(d)))) {
        let g = |a: &TreeCoordinates, b: &TreeCoordinates| grandfather_cocycle(d, a, b).unwrap();
        prop_assert_eq!(g(&x, &y) * g(&y, &z), g(&x, &z));
        prop_assert_eq!(busemann(&x, &y) + busemann(&y, &z), busemann(&x, &z));
        let (t, gd) = (tree_distance(&x, &y), grandfather_distance(&x, &y));
        prop_assert_eq!(t, tree_distance(&y, &x));
        prop_assert_eq!(gd, grandfather_distance(&y, &x));
        prop_assert!(gd <= t && t <= 2 * gd);
        prop_assert!(busemann(&x, &y).unsigned_abs() as usize <= t);
        prop_assert!(gd <= grandfather_distance(&x, &z) + grandfather_distance(&z, &y));
        prop_assert!(t <= tree_distance(&x, &z) + tree_distance(&z, &y));
    }

    #[test]
    fn canopy_sums_converge(d in 3usize..7, n in -5i64..=0) {
        let total = canopy_summability(d, n).unwrap();
        let mut last = Rational::zero();
        for terms in 1..=40 {
            let s = canopy_partial_sum(d, n, terms).unwrap();
            prop_assert!(s > last && s < total);
            last = s;
        }
        // the remainder after 40 terms is (d-1)^{-n-40} (d-1)/(d-2)
        let remainder = &total - &last;
        prop_assert_eq!(&remainder, &(power(d, -n - 40) * Rational::new(d as i64 - 1, d as i64 - 2)));
        prop_assert!(remainder <= power(d, -n - 38));
    }

    #[test]
    fn canopy_measure_is_geometric(d in 3usize..7, depth in 0usize..12) {
        let table = canopy_unimodular_measure(d, depth).unwrap();
        prop_assert!(table.total().is_one());
        prop_assert_eq!(table.levels.len(), depth + 1);
        for w in table.levels.windows(2) {
            prop_assert_eq!(&w[1].1 / &w[0].1, Rational::new(1, d as i64 - 1));
        }
        let base = &table.levels[0].1;
        prop_assert_eq!(base.clone(), Rational::one() / canopy_summability(d, 0).unwrap());
    }
}
