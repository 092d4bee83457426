mod common;

use disbench_core::compose::*;
use disbench_core::learners::TrainConfig;
use disbench_core::metrics::{importance_matrix, MetricsConfig};
use disbench_core::store::EmbeddingTable;
use disbench_core::synth::*;
use ndarray::{Array2, Axis};
use proptest::prelude::*;

fn ids(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i:04}")).collect()
}

fn unit(v: Vec<f64>) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

fn class_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("class{i}")).collect()
}

#[test]
fn zero_shot_identity_and_noisy_corners() {
    let eye = Array2::<f64>::eye(3);
    let classes = build_class_embeddings(class_labels(3), &[eye.clone()]).unwrap();
    let images = EmbeddingTable::from_f64(ids("i", 3), &eye).unwrap();
    assert_eq!(zero_shot_accuracy(&images, &[0, 1, 2], &classes).unwrap().top1, 1.0);

    let noise = common::gaussian(300, 3, 17);
    let labels: Vec<usize> = (0..300).map(|i| i % 3).collect();
    let x = Array2::from_shape_fn((300, 3), |(i, d)| eye[[labels[i], d]] + 0.01 * noise[[i, d]]);
    let images = EmbeddingTable::from_f64(ids("n", 300), &x).unwrap();
    assert_eq!(zero_shot_accuracy(&images, &labels, &classes).unwrap().top1, 1.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn zero_shot_ignores_row_scale_and_class_order(seed in 0u64..1000, scale in 0.1f64..50.0) {
        let classes = common::gaussian(4, 6, seed);
        let x = common::gaussian(40, 6, seed + 1);
        let labels: Vec<usize> = (0..40).map(|i| i % 4).collect();
        let matrix = build_class_embeddings(class_labels(4), &[classes.clone()]).unwrap();
        let base = zero_shot_accuracy(&EmbeddingTable::from_f64(ids("z", 40), &x).unwrap(), &labels, &matrix).unwrap();
        let mut scaled = x.clone();
        scaled.row_mut(3).mapv_inplace(|v| v * scale);
        let r = zero_shot_accuracy(&EmbeddingTable::from_f64(ids("z", 40), &scaled).unwrap(), &labels, &matrix).unwrap();
        prop_assert_eq!(&base.predictions, &r.predictions);

        let perm = [2usize, 0, 3, 1];
        let permuted = classes.select(Axis(0), &perm);
        let names: Vec<String> = perm.iter().map(|&p| format!("class{p}")).collect();
        let matrix = build_class_embeddings(names, &[permuted]).unwrap();
        let relabeled: Vec<usize> = labels.iter().map(|&l| perm.iter().position(|&p| p == l).unwrap()).collect();
        let r = zero_shot_accuracy(&EmbeddingTable::from_f64(ids("z", 40), &x).unwrap(), &relabeled, &matrix).unwrap();
        prop_assert_eq!(base.top1, r.top1);
    }

    #[test]
    fn recall_is_monotone_in_k(seed in 0u64..1000) {
        let gallery = common::gaussian(30, 5, seed);
        let queries = common::gaussian(12, 5, seed + 7);
        let gallery_labels: Vec<usize> = (0..30).map(|i| i % 6).collect();
        let query_targets: Vec<usize> = (0..12).map(|i| (i * 5) % 6).collect();
        let mut last = 0.0;
        for k in 1..=30 {
            let task = RetrievalTask {
                queries: queries.clone(),
                gallery: gallery.clone(),
                query_targets: query_targets.clone(),
                gallery_labels: gallery_labels.clone(),
                k,
            };
            let r = retrieval_recall_at_k(&task).unwrap();
            prop_assert!(r >= last);
            last = r;
        }
        prop_assert_eq!(last, 1.0);
    }

    #[test]
    fn switching_to_the_donor_always_succeeds(seed in 0u64..1000, d in 2usize..12) {
        let g = common::gaussian(3, d, seed);
        let source = unit(g.row(0).to_vec());
        let donor = unit(g.row(1).to_vec());
        let raw = g.row(2).to_vec();
        let along: f64 = raw.iter().zip(&donor).map(|(a, b)| a * b).sum();
        let caption_source = unit(raw.iter().zip(&donor).map(|(r, t)| r - along * t).collect());
        let mut ranked: Vec<usize> = (0..d).collect();
        ranked.rotate_left(seed as usize % d);
        let schedule: Vec<usize> = (1..=d).collect();
        let r = dimension_switch_min_k(&source, &donor, &ranked, &caption_source, &donor, &schedule).unwrap();
        prop_assert!(r.min_k.is_some());
        let k = r.min_k.unwrap();
        let step = r.steps.iter().find(|s| s.k == k).unwrap();
        prop_assert!(step.target_similarity > step.source_similarity);
    }

    #[test]
    fn seen_pairs_only_grow(extra in prop::collection::vec("[a-z ]{0,20}", 0..6)) {
        let pairs: Vec<(String, String)> = [("red", "chair"), ("blue", "car"), ("old", "red")]
            .iter()
            .map(|(a, o)| (a.to_string(), o.to_string()))
            .collect();
        let base = vec!["a red chair".to_string(), "blue sky".to_string()];
        let before = caption_cooccurrence_filter(&pairs, &base).unwrap();
        let more: Vec<String> = base.iter().cloned().chain(extra).collect();
        let after = caption_cooccurrence_filter(&pairs, &more).unwrap();
        for p in &before.seen {
            prop_assert!(after.seen.contains(p));
        }
    }
}

#[test]
fn composed_query_finds_new_attribute_cell() {
    let (a_levels, o_levels) = (5, 7);
    let mut spec = SyntheticSpec::attribute_object(a_levels, o_levels, a_levels * o_levels, 0.0, 0);
    spec.exhaustive = true;
    let gallery_bundle = gen_factorized(&spec).unwrap();
    let gallery = gallery_bundle.embeddings.to_array();
    let gallery_labels: Vec<usize> = (0..gallery.nrows())
        .map(|i| gallery_bundle.factors.value(i, 0) * o_levels + gallery_bundle.factors.value(i, 1))
        .collect();
    let dims = gallery.ncols();
    let mut queries = Vec::new();
    let mut targets = Vec::new();
    for row in 0..gallery.nrows() {
        let (a, o) = (gallery_bundle.factors.value(row, 0), gallery_bundle.factors.value(row, 1));
        let image = unit(gallery.row(row).to_vec());
        for new_a in (0..a_levels).filter(|&x| x != a) {
            let mut text = vec![0.0; dims];
            text[new_a] = 1.0;
            queries.push(compose_query(&image, &text, Sign::Plus).unwrap());
            targets.push(new_a * o_levels + o);
        }
    }
    let task = RetrievalTask {
        queries: Array2::from_shape_vec((queries.len(), dims), queries.concat()).unwrap(),
        gallery,
        query_targets: targets,
        gallery_labels,
        k: 1,
    };
    assert_eq!(retrieval_recall_at_k(&task).unwrap(), 1.0);
}

#[test]
fn factorized_top_dimensions_stay_in_their_block() {
    let spec = SyntheticSpec::attribute_object(8, 16, 2000, 0.01, 0);
    let imp = importance_matrix(&gen_factorized(&spec).unwrap(), &MetricsConfig::default().importance).unwrap();
    let attr = top_dimensions(ImportanceSource::Matrix(&imp), 0, 8).unwrap();
    assert!(attr.iter().all(|&d| d < 8), "{attr:?}");
    let obj = top_dimensions(ImportanceSource::Matrix(&imp), 1, 16).unwrap();
    assert!(obj.iter().all(|&d| (8..24).contains(&d)), "{obj:?}");
    let common = common_dimensions(&[attr, obj]).unwrap();
    assert_eq!(common.total, 0);
}

#[test]
fn full_replacement_switches_at_d() {
    let source = [1.0, 0.0, 0.0];
    let donor = [0.0, 0.0, 1.0];
    let r = dimension_switch_min_k(&source, &donor, &[0, 1, 2], &[1.0, 0.0, 0.0], &donor, &[3]).unwrap();
    assert_eq!(r.min_k, Some(3));
}

#[test]
fn knn_filter_matches_brute_force() {
    let refs = EmbeddingTable::from_f64(ids("r", 1000), &common::gaussian(1000, 16, 90)).unwrap();
    let cands = EmbeddingTable::from_f64(ids("c", 100), &common::gaussian(100, 16, 91)).unwrap();
    let oracle = common::brute_force_nearest(&cands, &refs);
    for threshold in [0.6, 0.7, DEFAULT_KNN_THRESHOLD] {
        let r = knn_novelty_filter(&cands, &refs, 5, threshold).unwrap();
        let want: Vec<bool> = oracle.iter().map(|&(_, s)| s < threshold).collect();
        assert_eq!(r.keep, want);
        for (n, &(idx, sim)) in r.neighbors.iter().zip(&oracle) {
            assert_eq!(n[0].id, refs.ids()[idx]);
            assert!((n[0].similarity - sim).abs() < 1e-12);
            assert!(n.windows(2).all(|w| w[0].similarity >= w[1].similarity));
        }
    }
    assert!(knn_novelty_filter(&cands, &refs, 5, 0.7).unwrap().kept() > 0);
}

#[test]
fn composed_parts_are_orthogonal_and_sum_exactly() {
    let c = gen_composed(&SyntheticSpec::attribute_object(8, 16, 128, 0.0, 0)).unwrap();
    for i in 0..c.combined.rows() {
        let (a, o, s) = (c.attribute_part.row(i), c.object_part.row(i), c.combined.row(i));
        let dot: f32 = a.iter().zip(o).map(|(x, y)| x * y).sum();
        assert_eq!(dot, 0.0);
        for d in 0..s.len() {
            assert_eq!(s[d], a[d] + o[d]);
        }
    }
    assert!(!c.split.test.is_empty());
    c.split.validate(&c.factors.column(0), &c.factors.column(1)).unwrap();
}

fn decomposition(layout: BlockLayout, tied: bool) -> DecompositionReport {
    let mut spec = SyntheticSpec::attribute_object(8, 16, 128, 0.0, 0);
    spec.layout = layout;
    let cfg = TrainConfig {
        max_epochs: 5000,
        ..TrainConfig::default()
    };
    decompose_linear(&gen_composed(&spec).unwrap(), 1e-6, tied, &cfg).unwrap()
}

#[test]
fn orthogonal_parts_decompose_exactly() {
    let ortho = decomposition(BlockLayout::Orthogonal, false);
    let overlap = decomposition(BlockLayout::Overlapping, false);
    for (o, v) in ortho.components.iter().zip(&overlap.components) {
        assert!(o.test_mse <= 1e-6, "{} {}", o.component, o.test_mse);
        assert!(v.test_mse >= 10.0 * o.test_mse);
        assert!(v.test_mse > 1e-3);
    }
    let tied = decomposition(BlockLayout::Orthogonal, true);
    let mean = |r: &DecompositionReport| r.components.iter().map(|c| c.test_mse).sum::<f64>() / 2.0;
    assert!(tied.components.iter().all(|c| c.test_mse <= 1e-6));
    assert!(mean(&tied) <= 2.0 * mean(&ortho));
}

#[test]
fn leaking_split_is_rejected() {
    let mut c = gen_composed(&SyntheticSpec::attribute_object(4, 4, 16, 0.0, 0)).unwrap();
    c.split.test.push(c.split.train[0]);
    let err = decompose_linear(&c, 1e-6, false, &TrainConfig::default()).unwrap_err();
    assert!(matches!(err, disbench_core::Error::SplitOverlap(_)), "{err}");
}
