use pgpu::datagen::{
    estimate_clean_gap, flip_labels, gen_overlap_square, gen_triangles, load_csv, overlap_positive_probability,
    save_csv, split_indices,
};
use pgpu::{FlipRateSpec, KernelSpec, SvmParams};
use proptest::prelude::*;

fn positives_flipped(spec: FlipRateSpec, gap: f64, n: usize, seed: u64) -> usize {
    let clean = gen_triangles(n, n, seed);
    let gaps = vec![gap; 2 * n];
    let pu = flip_labels(&clean, &gaps, &spec, seed + 1).unwrap();
    pu.s.iter().zip(pu.y.as_ref().unwrap()).filter(|(&s, &y)| y == 1 && s == -1).count()
}

#[test]
fn constant_rate_counts() {
    for seed in 0..5 {
        let k = positives_flipped(FlipRateSpec::Constant { alpha: 0.3 }, 0.8, 1000, seed);
        assert!((255..=345).contains(&k), "{k}");
    }
    assert_eq!(positives_flipped(FlipRateSpec::Constant { alpha: 0.0 }, 0.8, 500, 1), 0);
    assert_eq!(positives_flipped(FlipRateSpec::Constant { alpha: 1.0 }, 0.8, 500, 1), 500);
    // the rate is zero on the negative side of the gap
    assert_eq!(positives_flipped(FlipRateSpec::Constant { alpha: 1.0 }, -0.2, 500, 1), 0);
}

#[test]
fn flipping_keeps_features_and_latent_labels() {
    let clean = gen_overlap_square(500, 3);
    let gaps: Vec<f64> = clean.x.outer_iter().map(|r| 2.0 * overlap_positive_probability(r[0], r[1]) - 1.0).collect();
    let pu = flip_labels(&clean, &gaps, &FlipRateSpec::Linear { alpha: 0.8 }, 4).unwrap();
    assert_eq!(pu.x, clean.x);
    assert_eq!(pu.y, clean.y);
    assert_eq!(pu.gap_truth.as_deref(), Some(&gaps[..]));
    for (&s, &y) in pu.s.iter().zip(pu.y.as_ref().unwrap()) {
        assert!(y == 1 || s == -1);
        assert!(s <= y);
    }
}

#[test]
fn flip_rejects_gaps_out_of_range() {
    let clean = gen_triangles(5, 5, 0);
    assert!(flip_labels(&clean, &[1.5; 10], &FlipRateSpec::Constant { alpha: 0.1 }, 0).is_err());
    assert!(flip_labels(&clean, &[0.5; 9], &FlipRateSpec::Constant { alpha: 0.1 }, 0).is_err());
}

#[test]
fn triangles_clean_gap_separates_classes() {
    let clean = gen_triangles(1000, 1000, 8);
    let gap = estimate_clean_gap(&clean, &SvmParams::new(1.0, KernelSpec::default_for_dim(2))).unwrap();
    assert!(gap.iter().all(|g| (-1.0..=1.0).contains(g)));
    let y = clean.y.as_ref().unwrap();
    let pos: Vec<f64> = gap.iter().zip(y).filter(|(_, &l)| l == 1).map(|(&g, _)| g).collect();
    let share = pos.iter().filter(|&&g| g > 0.0).count() as f64 / pos.len() as f64;
    assert!(share >= 0.95, "{share}");
}

#[test]
fn generators_are_seeded() {
    assert_eq!(gen_triangles(50, 50, 9), gen_triangles(50, 50, 9));
    assert_ne!(gen_triangles(50, 50, 9).x, gen_triangles(50, 50, 10).x);
    assert_eq!(gen_overlap_square(80, 2), gen_overlap_square(80, 2));
}

#[test]
fn overlap_square_has_an_overlap_band() {
    let d = gen_overlap_square(2000, 5);
    assert!(d.x.iter().all(|v| (-1.0..=1.0).contains(v)));
    let band = d
        .x
        .outer_iter()
        .filter(|r| {
            let p = overlap_positive_probability(r[0], r[1]);
            p > 0.0 && p < 1.0
        })
        .count();
    assert!(band as f64 >= 0.025 * 2000.0, "{band}");
}

#[test]
fn csv_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.csv");
    let clean = gen_triangles(20, 30, 1);
    let gap = vec![0.5; 50];
    let pu = flip_labels(&clean, &gap, &FlipRateSpec::Constant { alpha: 0.5 }, 2).unwrap();
    save_csv(&pu, &path).unwrap();
    let back = load_csv(&path).unwrap();
    assert_eq!(back.x, pu.x);
    assert_eq!(back.s, pu.s);
    assert_eq!(back.y, pu.y);
    assert!(load_csv(dir.path().join("missing.csv")).is_err());
}

proptest! {
    #[test]
    fn split_is_a_partition(n in 4usize..300, frac in 0.05f64..0.95, seed in any::<u64>()) {
        let (tr, te) = split_indices(n, frac, seed).unwrap();
        prop_assert!(!tr.is_empty() && !te.is_empty());
        let mut all: Vec<usize> = tr.iter().chain(&te).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
    }
}
