use proptest::prelude::*;

use spheredepth::dbmca::{assign, fit, refine, silhouette, FitOptions};
use spheredepth::depth::{alpha_region, depth_matrix, deepest_point_index, sample_depths, DepthKind, Similarity};
use spheredepth::ingest::{parse_cluto, write_cluto_to, SparseMatrix};
use spheredepth::sphere::normalize;
use spheredepth::validation::{adjusted_rand_index, aci, ndc, rand_index, FuzzyPartition};
use spheredepth::vmf::sample_uniform;
use spheredepth::{Partition, UnitVector};

fn points(d: usize, n: std::ops::Range<usize>) -> impl Strategy<Value = Vec<UnitVector>> {
    prop::collection::vec(prop::collection::vec(-1.0f64..1.0, d), n).prop_filter_map("nonzero rows", |rows| {
        rows.iter().map(|r| normalize(r).ok()).collect::<Option<Vec<_>>>()
    })
}

fn kind() -> impl Strategy<Value = DepthKind> {
    prop::sample::select(DepthKind::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn depths_stay_in_range(pts in points(4, 1..40), kind in kind()) {
        for v in sample_depths(&pts, kind).unwrap() {
            prop_assert!((0.0..=kind.max_value()).contains(&v));
        }
    }

    #[test]
    fn deepest_point_minimises_mean_distance(pts in points(3, 2..30), kind in kind()) {
        let i = deepest_point_index(&pts, kind).unwrap();
        let dist = |a: &UnitVector, b: &UnitVector| {
            let c: f64 = a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| x * y).sum::<f64>().clamp(-1.0, 1.0);
            match kind {
                DepthKind::Arc => c.acos(),
                DepthKind::Cosine => 1.0 - c,
                DepthKind::Chord => (2.0 * (1.0 - c)).max(0.0).sqrt(),
            }
        };
        let mean = |x: &UnitVector| pts.iter().map(|w| dist(x, w)).sum::<f64>() / pts.len() as f64;
        let best = mean(&pts[i]);
        // acos near 1 is ill-conditioned, so the unsnapped oracle is only good to ~1e-8
        prop_assert!(pts.iter().all(|x| mean(x) >= best - 1e-7));
    }

    #[test]
    fn alpha_regions_are_nested(pts in points(3, 1..50), kind in kind(), a in 0.01f64..2.0, b in 0.01f64..2.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let outer = alpha_region(&pts, kind, lo).unwrap();
        let inner = alpha_region(&pts, kind, hi).unwrap();
        prop_assert!(inner.member_indices.iter().all(|i| outer.member_indices.contains(i)));
    }

    #[test]
    fn assign_then_refine_never_lowers_objective(pts in points(3, 6..40), k in 2usize..5, seed in any::<u64>()) {
        let m = depth_matrix(&pts, DepthKind::Cosine).unwrap();
        let k = k.min(pts.len());
        let model = fit(&m, k, seed, &FitOptions { restarts: 1, ..FitOptions::default() }).unwrap();
        prop_assert!(model.objective_trace.windows(2).all(|w| w[1] >= w[0]));
        prop_assert!(model.partition.cluster_sizes().iter().all(|&s| s > 0));
        // at convergence the medoids are a fixed point of refine ∘ assign
        if model.converged {
            let again = refine(&m, &assign(&m, &model.medoids).unwrap()).unwrap();
            prop_assert_eq!(again, model.medoids.clone());
        }
        let s = silhouette(&m, &model.partition).unwrap();
        prop_assert!(s.per_point.iter().all(|v| (-1.0..=1.0).contains(v)));
    }

    #[test]
    fn agreement_indices_are_bounded(raw_p in prop::collection::vec(0usize..4, 2..60), seed in any::<u64>()) {
        let n = raw_p.len();
        let raw_q: Vec<usize> = raw_p.iter().enumerate().map(|(i, &l)| if (i as u64 ^ seed).is_multiple_of(3) { (l + 1) % 4 } else { l }).collect();
        let (p, q) = (Partition::from_labels(&raw_p), Partition::from_labels(&raw_q));
        let ri = rand_index(&p, &q).unwrap();
        prop_assert!((0.0..=1.0).contains(&ri));
        if let Ok(ari) = adjusted_rand_index(&p, &q) {
            prop_assert!((-1.0..=1.0).contains(&ari));
        }
        let (g, h) = (FuzzyPartition::from_crisp(&p), FuzzyPartition::from_crisp(&q));
        prop_assert!((ndc(&g, &h).unwrap() - ri).abs() < 1e-12);
        prop_assert_eq!(n, g.len());
    }

    #[test]
    fn cluto_round_trip(rows in prop::collection::vec(prop::collection::btree_map(0usize..30, 0.001f64..100.0, 0..8), 1..20)) {
        let m = SparseMatrix { n_rows: rows.len(), n_cols: 30, rows: rows.into_iter().map(|r| r.into_iter().collect()).collect() };
        let mut buf = Vec::new();
        write_cluto_to(&m, &mut buf).unwrap();
        prop_assert_eq!(parse_cluto(buf.as_slice()).unwrap(), m);
    }
}

#[test]
fn aci_agrees_in_sign_with_ari_on_correlated_labelings() {
    use rand::Rng;
    let mut rng = spheredepth::seed::rng(17);
    for trial in 0..20 {
        let n = 120;
        let p: Vec<usize> = (0..n).map(|_| rng.random_range(0..3)).collect();
        // q copies p with a probability that varies by trial; high copy rates
        // give clearly positive agreement, low rates give near-chance agreement
        let copy = if trial % 2 == 0 { 0.9 } else { 0.0 };
        let q: Vec<usize> = p.iter().map(|&l| if rng.random::<f64>() < copy { l } else { rng.random_range(0..3) }).collect();
        let (pp, qq) = (Partition::from_labels(&p), Partition::from_labels(&q));
        let ari = adjusted_rand_index(&pp, &qq).unwrap();
        let a = aci(&FuzzyPartition::from_crisp(&pp), &FuzzyPartition::from_crisp(&qq), 300, trial).unwrap();
        if ari.abs() > 0.05 {
            assert_eq!(ari > 0.0, a > 0.0, "trial {trial}: ARI {ari}, ACI {a}");
        }
        if copy > 0.5 {
            assert!((a - ari).abs() < 0.05, "trial {trial}: ARI {ari}, ACI {a}");
        }
    }
}

#[test]
fn lazy_and_materialised_similarities_agree_on_large_inputs() {
    let pts = sample_uniform(5, 300, 2).unwrap();
    let m = depth_matrix(&pts, DepthKind::Chord).unwrap();
    let lazy = spheredepth::depth::LazySimilarity::new(&pts, DepthKind::Chord).unwrap();
    let a = fit(&m, 4, 9, &FitOptions::default()).unwrap();
    let b = fit(&lazy, 4, 9, &FitOptions::default()).unwrap();
    assert_eq!(a, b);
    assert_eq!(m.len(), lazy.len());
}
