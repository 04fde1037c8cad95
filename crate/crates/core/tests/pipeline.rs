use pgpu::datagen::{estimate_clean_gap, flip_labels, gen_triangles, split};
use pgpu::pipeline::{estimate_boundary_cv, estimate_observed_gaps, fit_with_boundary, CvSettings};
use pgpu::relabel::GapEstimate;
use pgpu::{fit_pgpu, run_pgpu, BoundaryMode, FlipRateSpec, KernelSpec, PgpuError, PgpuParams, PuDataset, PuSample, SvmParams};

fn params() -> PgpuParams {
    PgpuParams::new(SvmParams::new(1.0, KernelSpec::default_for_dim(2)))
}

fn pu_triangles(n: usize, spec: FlipRateSpec, seed: u64) -> PuDataset {
    let clean = gen_triangles(n, n, seed);
    let gap = estimate_clean_gap(&clean, &params().svm).unwrap();
    flip_labels(&clean, &gap, &spec, seed + 1).unwrap()
}

#[test]
fn fit_respects_relabel_rule_and_kmm_constraints() {
    let data = pu_triangles(150, FlipRateSpec::Constant { alpha: 0.3 }, 1);
    let sample = data.observed();
    let fit = fit_pgpu(&sample, &params()).unwrap();
    assert!(fit.boundary_l > -1.0 && fit.boundary_l < 0.0);
    assert_eq!(fit.beta.beta.len(), fit.relabel.n_selected());
    for &i in &fit.relabel.negative_idx {
        assert!(sample.s[i] == -1 && fit.gaps.gaps[i] <= fit.boundary_l);
    }
    let n = fit.beta.beta.len() as f64;
    let eps = (n.sqrt() - 1.0) / n.sqrt();
    assert!(fit.beta.beta.iter().all(|&b| (0.0..=1000.0).contains(&b)));
    assert!((fit.beta.mean() - 1.0).abs() <= eps + 1e-9);
}

#[test]
fn pgpu_learns_triangles() {
    let data = pu_triangles(200, FlipRateSpec::Linear { alpha: 0.6 }, 2);
    let (train, test) = split(&data, 0.75, 3).unwrap();
    let acc = run_pgpu(&train, &test, &params()).unwrap();
    assert!(acc > 0.9, "{acc}");
}

#[test]
fn cv_ties_go_to_the_most_negative_candidate() {
    let data = pu_triangles(100, FlipRateSpec::Constant { alpha: 0.2 }, 4);
    let mut p = params();
    // no gap falls between the two candidates, so both relabel the same points
    p.cv = CvSettings { grid: vec![-0.7, -0.700_000_1], folds: 3, seed: 5 };
    let l = estimate_boundary_cv(&data.observed(), &p).unwrap();
    assert_eq!(l, -0.700_000_1);
}

#[test]
fn cv_mode_picks_a_grid_value() {
    let data = pu_triangles(60, FlipRateSpec::Constant { alpha: 0.2 }, 6);
    let mut p = params();
    p.boundary = BoundaryMode::Cv;
    p.cv = CvSettings { grid: vec![-0.9, -0.8, -0.7, -0.6], folds: 3, seed: 0 };
    let fit = fit_pgpu(&data.observed(), &p).unwrap();
    assert!(p.cv.grid.contains(&fit.boundary_l));
}

#[test]
fn one_sided_relabelling_is_an_error() {
    let data = pu_triangles(40, FlipRateSpec::Constant { alpha: 0.1 }, 7);
    let sample = data.observed();
    // every unlabelled point discarded: no negatives
    let gaps = GapEstimate { gaps: vec![-0.5; sample.len()] };
    let err = fit_with_boundary(&sample, &gaps, -0.9, &params()).unwrap_err();
    assert!(matches!(err, PgpuError::OneClassRelabel));
}

#[test]
fn too_few_positives_is_an_error() {
    let clean = gen_triangles(20, 20, 8);
    let mut s = vec![-1i8; 40];
    s[0] = 1;
    let data = PuDataset::new(clean.x.clone(), s, clean.y.clone()).unwrap();
    let err = run_pgpu(&data, &data, &params()).unwrap_err();
    assert!(matches!(err, PgpuError::NotEnoughPositives { needed: 3, available: 1 }));
}

#[test]
fn observed_gaps_are_in_range() {
    let data = pu_triangles(80, FlipRateSpec::Inverse { alpha: 0.2, beta: 1.0 }, 9);
    let sample: PuSample = data.observed();
    let g = estimate_observed_gaps(&sample, &params().svm).unwrap();
    assert_eq!(g.len(), sample.len());
    assert!(g.gaps.iter().all(|v| (-1.0..=1.0).contains(v)));
}
