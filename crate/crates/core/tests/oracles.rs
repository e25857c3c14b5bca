mod common;

use common::oracle;
use common::*;
use hades::analysis::correlation::correlate;
use hades::analysis::hdbscan::mutual_reachability_mst;
use hades::analysis::kmeans::{kmeans_points, nearest};
use hades::analysis::terms::{relevance_lists, saliency_scores};
use hades::analysis::tsne::{joint_probabilities, kl_and_gradient};
use hades::analysis::{
    agglomerative, classical_mds, hdbscan, hellinger, jensen_shannon, manova, relevance, saliency, tsne,
    CorrelationMethod, Linkage, TsneParams, NOISE,
};
use hades::rng::seeded;
use rand::seq::SliceRandom;
use rand::Rng;

// 40-digit evaluations of the closed forms at p = (1/2, 1/2), q = (1/4, 3/4).
const HELLINGER_HALF_QUARTER: f64 = 0.184_591_911_282_514_5;
const JSD_HALF_QUARTER: f64 = 0.033_822_075_568_605_23;

#[test]
fn divergence_scalars_match_exact_values() {
    let (p, q) = ([0.5, 0.5], [0.25, 0.75]);
    // Bhattacharyya form as an independent route to the same number
    let bc = (0.5f64 * 0.25).sqrt() + (0.5f64 * 0.75).sqrt();
    assert!(((1.0 - bc).sqrt() - HELLINGER_HALF_QUARTER).abs() < 1e-15);
    assert!((hellinger(&p, &q).unwrap() - HELLINGER_HALF_QUARTER).abs() < 1e-12);
    assert!((jensen_shannon(&p, &q).unwrap() - JSD_HALF_QUARTER).abs() < 1e-12);
    assert_eq!(format!("{:.6}", jensen_shannon(&p, &q).unwrap()), "0.033822");
    assert_eq!(format!("{:.6}", hellinger(&p, &q).unwrap()), "0.184592");
}

#[test]
fn agglomerative_matches_naive_recomputation() {
    let mut rng = seeded(11);
    for trial in 0..40 {
        let n = rng.random_range(3..=10);
        let d = euclidean_matrix(&random_points(&mut rng, n));
        let dm = as_distance_matrix(d.clone());
        for linkage in [Linkage::Single, Linkage::Average, Linkage::Complete] {
            for k in 1..=n {
                let got = agglomerative(&dm, linkage, k).unwrap().labels;
                let want = oracle::naive_agglomerative(&d, linkage, k);
                assert_eq!(got, want, "trial {trial}, n={n}, {linkage:?}, k={k}");
            }
        }
    }
}

#[test]
fn six_point_average_linkage_fixture() {
    let pts = [[0.0, 0.0], [0.3, 0.1], [5.0, 5.0], [5.2, 4.9], [10.0, 0.0], [9.7, 0.4]];
    let d = euclidean_matrix(&pts);
    let got = agglomerative(&as_distance_matrix(d.clone()), Linkage::Average, 3).unwrap();
    assert_eq!(got.labels, vec![0, 0, 1, 1, 2, 2]);
    assert_eq!(got.labels, oracle::naive_agglomerative(&d, Linkage::Average, 3));
}

#[test]
fn hdbscan_mst_is_minimum_spanning_tree() {
    let mut rng = seeded(5);
    for n in 2..=7 {
        for _ in 0..6 {
            let d = euclidean_matrix(&random_points(&mut rng, n));
            for min_samples in 1..n {
                let mst = mutual_reachability_mst(&d, min_samples);
                assert_eq!(mst.len(), n - 1);
                let got: f64 = mst.iter().map(|e| e.weight).sum();
                let want = oracle::exhaustive_mst_weight(&oracle::mutual_reachability(&d, min_samples));
                assert!((got - want).abs() < 1e-12, "n={n} ms={min_samples}: {got} vs {want}");
            }
        }
    }
}

#[test]
fn hdbscan_separates_blobs_from_stragglers() {
    let mut rng = seeded(9);
    let mut pts = Vec::new();
    for c in [[0.0, 0.0], [40.0, 0.0]] {
        for _ in 0..10 {
            pts.push([c[0] + rng.random_range(-0.5..0.5), c[1] + rng.random_range(-0.5..0.5)]);
        }
    }
    // every straggler is farther from everything than the blobs are from each other
    pts.extend([[20.0, 70.0], [-50.0, -60.0], [90.0, 70.0]]);
    let r = hdbscan(&as_distance_matrix(euclidean_matrix(&pts)), 5, 3).unwrap();
    assert_eq!(r.n_clusters, 2);
    assert_eq!(r.labels.iter().filter(|&&l| l == NOISE).count(), 3);
    assert!(r.labels[20..].iter().all(|&l| l == NOISE));
    assert!(r.labels[..10].iter().all(|&l| l == r.labels[0]));
    assert!(r.labels[10..20].iter().all(|&l| l == r.labels[10]));
    assert_ne!(r.labels[0], r.labels[10]);
}

#[test]
fn kmeans_labels_are_nearest_centroids() {
    let mut rng = seeded(3);
    let rows: Vec<Vec<f64>> = (0..12).map(|_| random_distribution(&mut rng, 4)).collect();
    let fit = kmeans_points(&rows, 3, 0, 10).unwrap();
    for (row, &label) in rows.iter().zip(&fit.labels) {
        let best = (0..3)
            .min_by(|&a, &b| {
                let da: f64 = row.iter().zip(&fit.centroids[a]).map(|(x, y)| (x - y).powi(2)).sum();
                let db: f64 = row.iter().zip(&fit.centroids[b]).map(|(x, y)| (x - y).powi(2)).sum();
                da.total_cmp(&db)
            })
            .unwrap();
        assert_eq!(label, best);
        assert_eq!(nearest(row, &fit.centroids).0, best);
    }
    assert!(fit.trace.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{:?}", fit.trace);
}

#[test]
fn manova_matches_matrix_algebra() {
    let mut rng = seeded(21);
    let (rows, labels) = two_group_simplex(&mut rng, 10, 0.4, 0.01);
    let got = manova(&rows, &labels).unwrap();
    let want = oracle::two_group_manova(&rows, &labels);
    assert!((got.wilks_lambda.unwrap() - want.lambda).abs() < 1e-8);
    assert!((got.f_stat.unwrap() - want.f).abs() < 1e-8 * want.f.max(1.0));
    assert_eq!((got.df1.unwrap(), got.df2.unwrap()), (want.df1, want.df2));
    assert!(got.p_value.unwrap() < 0.01);
}

#[test]
fn manova_permuted_labels_are_mostly_insignificant() {
    let mut rng = seeded(22);
    let (rows, labels) = two_group_simplex(&mut rng, 10, 0.0, 0.05);
    let mut shuffled = labels.clone();
    let mut above = 0;
    for _ in 0..100 {
        shuffled.shuffle(&mut rng);
        if manova(&rows, &shuffled).unwrap().p_value.unwrap() > 0.05 {
            above += 1;
        }
    }
    assert!(above >= 90, "{above}/100");
}

#[test]
fn tsne_gradient_matches_finite_differences() {
    let mut rng = seeded(4);
    let d = euclidean_matrix(&random_points(&mut rng, 6));
    let p = joint_probabilities(&d, 1.5);
    let y: Vec<[f64; 2]> = (0..6)
        .map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
        .collect();
    let (kl, grad) = kl_and_gradient(&p, &y);
    assert!((kl - oracle::tsne_kl(&p, &y)).abs() < 1e-12);
    let fd = oracle::finite_difference(|y| oracle::tsne_kl(&p, y), &y, 1e-5);
    let err = grad
        .iter()
        .zip(&fd)
        .flat_map(|(a, b)| [(a[0] - b[0]).abs(), (a[1] - b[1]).abs()])
        .fold(0.0, f64::max);
    assert!(err < 1e-4, "max error {err}");
}

#[test]
fn tsne_keeps_blobs_apart() {
    let mut rng = seeded(8);
    let mut pts = Vec::new();
    for c in [[0.0, 0.0], [30.0, 0.0]] {
        for _ in 0..5 {
            pts.push([c[0] + rng.random_range(-1.0..1.0), c[1] + rng.random_range(-1.0..1.0)]);
        }
    }
    let e = tsne(&as_distance_matrix(euclidean_matrix(&pts)), &TsneParams::new(10, 0)).unwrap();
    let centroid = |r: std::ops::Range<usize>| {
        let len = r.len() as f64;
        let s = e.coords[r].iter().fold([0.0, 0.0], |a, c| [a[0] + c[0], a[1] + c[1]]);
        [s[0] / len, s[1] / len]
    };
    let (a, b) = (centroid(0..5), centroid(5..10));
    let spread = |r: std::ops::Range<usize>, c: [f64; 2]| {
        let len = r.len() as f64;
        e.coords[r]
            .iter()
            .map(|p| ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)).sqrt())
            .sum::<f64>()
            / len
    };
    let intra = (spread(0..5, a) + spread(5..10, b)) / 2.0;
    let sep = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
    assert!(sep > 3.0 * intra, "separation {sep}, spread {intra}");
    assert_eq!(e.objective_trace.len(), 1000);
}

fn hand_set_model() -> hades::topics::TopicModel {
    toy_model(
        vec![vec![0.5, 0.3, 0.15, 0.05, 0.0], vec![0.1, 0.1, 0.2, 0.3, 0.3]],
        vec![vec![0.75, 0.25], vec![0.2, 0.8], vec![0.5, 0.5]],
        vec![40, 50, 10],
    )
}

#[test]
fn relevance_matches_direct_formula() {
    let model = hand_set_model();
    let p_topic = model.topic_prevalence();
    // token-weighted: (0.75·40 + 0.2·50 + 0.5·10)/100
    assert!((p_topic[0] - 0.45).abs() < 1e-15);
    for lambda in [0.0, 0.3, 0.6, 1.0] {
        let lists = relevance_lists(&model.phi, &p_topic, &model.vocab, lambda, 5);
        for (t, list) in lists.iter().enumerate() {
            for s in list {
                let want = oracle::relevance(&model.phi, &p_topic, lambda, t, s.id);
                assert!((s.score - want).abs() < 1e-10, "λ={lambda} t={t} w={}", s.id);
            }
            let expected_len = model.phi[t].iter().filter(|&&x| x > 0.0).count();
            assert_eq!(list.len(), expected_len);
        }
    }
    let sal = saliency_scores(&model.phi, &p_topic);
    for (w, &s) in sal.iter().enumerate() {
        assert!((s - oracle::saliency(&model.phi, &p_topic, w)).abs() < 1e-10);
    }
}

#[test]
fn relevance_extremes_force_orderings() {
    let model = hand_set_model();
    let p_topic = model.topic_prevalence();
    let by_phi = relevance(&model, 1.0, 5);
    for (t, list) in by_phi.topics.iter().enumerate() {
        let phis: Vec<f64> = list.iter().map(|s| s.phi).collect();
        assert!(phis.windows(2).all(|w| w[0] >= w[1]), "topic {t}: {phis:?}");
    }
    let by_lift = relevance(&model, 0.0, 5);
    for (t, list) in by_lift.topics.iter().enumerate() {
        let lifts: Vec<f64> = list
            .iter()
            .map(|s| {
                let pw: f64 = (0..2).map(|u| model.phi[u][s.id] * p_topic[u]).sum();
                s.phi / pw
            })
            .collect();
        assert!(lifts.windows(2).all(|w| w[0] >= w[1] - 1e-12), "topic {t}: {lifts:?}");
    }
}

#[test]
fn single_topic_saliency_is_zero() {
    let model = toy_model(vec![vec![0.4, 0.35, 0.25]], vec![vec![1.0], vec![1.0]], vec![5, 7]);
    assert!(saliency(&model).iter().all(|s| s.saliency == 0.0));
}

#[test]
fn correlation_matches_textbook_formulas() {
    let mut rng = seeded(17);
    let x: Vec<f64> = (0..10).map(|i| i as f64 + rng.random_range(-0.3..0.3)).collect();
    let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0 + rng.random_range(-1.5..1.5)).collect();
    let p = correlate(&x, &y, CorrelationMethod::Pearson);
    assert!((p.r.unwrap() - oracle::pearson(&x, &y)).abs() < 1e-12);
    let s = correlate(&x, &y, CorrelationMethod::Spearman);
    assert!((s.r.unwrap() - oracle::spearman_no_ties(&x, &y)).abs() < 1e-12);
    // t = r√(n−2)/√(1−r²) on 8 df, two-sided
    let r = p.r.unwrap();
    let t = r * 8f64.sqrt() / (1.0 - r * r).sqrt();
    use statrs::distribution::{ContinuousCDF, StudentsT};
    let want = 2.0 * StudentsT::new(0.0, 1.0, 8.0).unwrap().sf(t.abs());
    assert!((p.p_value.unwrap() - want).abs() < 1e-12);
}

#[test]
fn mds_collinear_points_stay_on_a_line() {
    let xs = [0.0, 1.0, 2.5, 6.0];
    let pts: Vec<[f64; 2]> = xs.iter().map(|&x| [x, 0.0]).collect();
    let e = classical_mds(&as_distance_matrix(euclidean_matrix(&pts)));
    assert!(e.coords.iter().all(|c| c[1].abs() < 1e-6));
    for i in 0..4 {
        for j in 0..4 {
            assert!(((e.coords[i][0] - e.coords[j][0]).abs() - (xs[i] - xs[j]).abs()).abs() < 1e-6);
        }
    }
}
