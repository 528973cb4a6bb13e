//! Exit criteria. Each test prints one `PASS`/`FAIL` line and asserts.
//!
//! Run with `cargo test -p eigengesture-cli --test acceptance -- --nocapture`
//! to see the report lines.

use std::f64::consts::SQRT_2;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use eigengesture::imageio::scan_dataset;
use eigengesture::linalg::{jacobi_eigh, mat_mul};
use eigengesture::modelstore::{decode_model, encode_model, ModelStoreError};
use eigengesture::trainer::{lift_eigenvectors, normalize_training, small_covariance};
use eigengesture::{
    compute_metrics, evaluate, recognize, train, ConfusionTally, DatasetManifest, Decision, EigenspaceModel, KPolicy,
    LabeledSample, Matrix, TrainConfig, Vector,
};
use eigengesture_cli::{execute, EXIT_OK, EXIT_USAGE};

const GESTURE_SIDE: usize = 32;

fn report(id: u32, name: &str, ok: bool, detail: String) {
    println!("criterion {id} [{name}]: {} ({detail})", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {id} [{name}] failed: {detail}");
}

fn gestures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/gestures")
}

fn run(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = execute(std::iter::once("eigengesture").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn field(out: &str, key: &str) -> String {
    out.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .unwrap_or_else(|| panic!("no {key} in output:\n{out}"))
        .to_owned()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_manifest(r: &mut ChaCha8Rng, n2: usize, m: usize) -> DatasetManifest {
    let samples = (0..m)
        .map(|i| {
            let px = (0..n2).map(|_| r.gen_range(0.0..1.0)).collect();
            LabeledSample::new(format!("g{}", i % 3), format!("{i:03}"), Vector::new(px).unwrap())
        })
        .collect();
    DatasetManifest::new(samples, None).unwrap()
}

fn gesture_model() -> (DatasetManifest, EigenspaceModel) {
    let corpus = scan_dataset(&gestures_dir(), GESTURE_SIDE).unwrap();
    let model = train(&corpus, &TrainConfig::default()).unwrap();
    (corpus, model)
}

#[test]
fn criterion_1_leave_in_accuracy() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("gestures.egs");
    let data = gestures_dir();
    let size = GESTURE_SIDE.to_string();
    let (code, _, err) = run(&[
        "train", "--data", data.to_str().unwrap(), "--out", model.to_str().unwrap(), "--size", &size,
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    let (code, out, _) = run(&["evaluate", "--model", model.to_str().unwrap(), "--data", data.to_str().unwrap()]);
    let elapsed = start.elapsed().as_secs_f64();

    let corpus = scan_dataset(&data, GESTURE_SIDE).unwrap();
    let labels = corpus.labels().len();
    let ok = code == EXIT_OK
        && corpus.len() == 10
        && labels >= 3
        && field(&out, "total") == "10"
        && field(&out, "accuracy") == "1"
        && field(&out, "fp") == "0"
        && field(&out, "fn") == "0"
        && elapsed < 5.0;
    report(
        1,
        "leave-in accuracy",
        ok,
        format!(
            "{} images, {labels} labels, accuracy={} fp={} fn={}, {elapsed:.3}s",
            corpus.len(),
            field(&out, "accuracy"),
            field(&out, "fp"),
            field(&out, "fn")
        ),
    );
}

#[test]
fn criterion_2_table_regression() {
    let r = compute_metrics(&ConfusionTally::new(10, 0, 0, 0));
    let ok = r.recall == Some(1.0) && r.precision == Some(1.0) && r.prevalence == Some(1.0) && r.accuracy == Some(1.0);
    report(2, "metrics TP=10", ok, format!("{r:?}"));
}

#[test]
fn criterion_3_covariance_trick_equivalence() {
    let start = Instant::now();
    let mut r = rng(3);
    let (mut worst_value, mut worst_residual) = (0.0f64, 0.0f64);
    let mut counts_match = true;
    for _ in 0..50 {
        let side = r.gen_range(1..=10usize);
        let m = r.gen_range(2..=8usize);
        let manifest = random_manifest(&mut r, side * side, m);
        let (_, a) = normalize_training(&manifest).unwrap();
        let small = jacobi_eigh(&small_covariance(&a)).unwrap();
        let (values, u) = lift_eigenvectors(&a, &small, 1e-12).unwrap();
        let big_c = mat_mul(&a, &a.transpose()).unwrap();
        let big = jacobi_eigh(&big_c).unwrap();
        let nonzero: Vec<f64> = big.values().into_iter().filter(|&l| l > 1e-9 * values[0]).collect();
        counts_match &= nonzero.len() == values.len();
        for (x, y) in values.iter().zip(&nonzero) {
            worst_value = worst_value.max((x - y).abs() / y.abs());
        }
        for (i, l) in values.iter().enumerate() {
            let ui = u.column(i);
            let cu = big_c.mul_vector(&ui).unwrap();
            let res = cu.as_slice().iter().zip(ui.as_slice()).map(|(p, q)| (p - l * q).powi(2)).sum::<f64>().sqrt();
            worst_residual = worst_residual.max(res / l.max(1.0));
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let ok = counts_match && worst_value <= 1e-8 && worst_residual <= 1e-8 && elapsed < 10.0;
    report(
        3,
        "covariance trick",
        ok,
        format!("max rel eigenvalue gap {worst_value:e}, max scaled residual {worst_residual:e}, {elapsed:.3}s"),
    );
}

#[test]
fn criterion_4_eigensolver_suite() {
    let mut r = rng(4);
    let (mut worst_res, mut worst_orth, mut worst_trace) = (0.0f64, 0.0f64, 0.0f64);
    for case in 0..200 {
        let n = 2 + case % 11;
        let mut elems = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let x = r.gen_range(-1.0..1.0);
                elems[i * n + j] = x;
                elems[j * n + i] = x;
            }
        }
        let c = Matrix::new(n, n, elems).unwrap();
        let d = jacobi_eigh(&c).unwrap();
        for p in &d.pairs {
            let cv = c.mul_vector(&p.vector).unwrap();
            let res = cv
                .as_slice()
                .iter()
                .zip(p.vector.as_slice())
                .map(|(a, b)| (a - p.value * b).powi(2))
                .sum::<f64>()
                .sqrt();
            worst_res = worst_res.max(res / p.value.abs().max(1.0));
        }
        let v = d.vectors();
        let gram = mat_mul(&v.transpose(), &v).unwrap();
        for i in 0..n {
            for j in 0..n {
                let e = if i == j { 1.0 } else { 0.0 };
                worst_orth = worst_orth.max((gram.get(i, j) - e).abs());
            }
        }
        let trace: f64 = (0..n).map(|i| c.get(i, i)).sum();
        let sum: f64 = d.values().iter().sum();
        worst_trace = worst_trace.max((trace - sum).abs() / trace.abs().max(1.0));
    }
    let two = jacobi_eigh(&Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap()).unwrap();
    let analytic = (two.pairs[0].value - 3.0).abs().max((two.pairs[1].value - 1.0).abs());
    let ok = worst_res <= 1e-9 && worst_orth <= 1e-9 && worst_trace <= 1e-9 && analytic <= 1e-12;
    report(
        4,
        "eigensolver",
        ok,
        format!("residual {worst_res:e}, orthonormality {worst_orth:e}, trace {worst_trace:e}, 2x2 error {analytic:e}"),
    );
}

#[test]
fn criterion_5_reconstruction() {
    let mut r = rng(5);
    let mut worst = 0.0f64;
    let cfg = TrainConfig { k_policy: KPolicy::ExplicitK(usize::MAX), ..TrainConfig::default() };
    for _ in 0..40 {
        let n = r.gen_range(1..=16usize);
        let m = r.gen_range(2..=10usize);
        let manifest = random_manifest(&mut r, n * n, m);
        let model = train(&manifest, &cfg).unwrap();
        for (j, s) in manifest.samples().iter().enumerate() {
            let back = model.reconstruct(&model.training_weights().column(j)).unwrap();
            let sq = back.sub(&s.vector).unwrap().norm().powi(2);
            worst = worst.max((sq / (n * n) as f64).sqrt());
        }
    }
    report(5, "reconstruction", worst <= 1e-8, format!("max RMS {worst:e}"));
}

#[test]
fn criterion_6_worked_example() {
    let s = |l: &str, px: &[f64]| LabeledSample::new(l, l, Vector::new(px.to_vec()).unwrap());
    let corpus = DatasetManifest::new(vec![s("a", &[1.0, 0.0, 1.0]), s("b", &[3.0, 2.0, 1.0])], None).unwrap();
    let model = train(&corpus, &TrainConfig::default()).unwrap();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let u = model.eigenimages().column(0);
    let w = model.training_weights();
    let mut err = 0.0f64;
    for (got, want) in [
        (model.mean()[0], 2.0),
        (model.mean()[1], 1.0),
        (model.mean()[2], 1.0),
        (u[0], r),
        (u[1], r),
        (u[2], 0.0),
        (w.get(0, 0), -SQRT_2),
        (w.get(0, 1), SQRT_2),
        (model.threshold(), SQRT_2),
    ] {
        err = err.max((got - want).abs());
    }
    let decision = recognize(&model, &Vector::new(vec![5.0, 4.0, 1.0]).unwrap()).unwrap();
    let unknown_ok = matches!(decision, Decision::Unknown { distance } if (distance - 2.0 * SQRT_2).abs() <= 1e-12);
    let ok = model.k() == 1 && err <= 1e-12 && unknown_ok;
    report(6, "worked example", ok, format!("k={}, max error {err:e}, probe {decision:?}", model.k()));
}

#[test]
fn criterion_7_dimensionality_reduction_motivation() {
    let (code, out, err) = run(&["bench", "--pixels", "16384", "--images", "40"]);
    assert_eq!(code, EXIT_OK, "{err}");
    let eigen: f64 = field(&out, "trick.eigen_seconds").parse().unwrap();
    let total: f64 = field(&out, "trick.total_seconds").parse().unwrap();
    let (guard_code, guard_out, guard_err) = run(&["bench", "--pixels", "16384", "--images", "40", "--direct"]);
    let ok = eigen < 2.0 && total < 2.0 && guard_code == EXIT_USAGE && guard_out.is_empty();
    report(
        7,
        "bench guard",
        ok,
        format!("40x40 eigen {eigen:.4}s, trick total {total:.4}s, direct exit {guard_code}: {}", guard_err.trim()),
    );
}

#[test]
fn criterion_8_model_persistence() {
    let mut r = rng(8);
    let mut round_trips = 0;
    let mut rejected = 0;
    let mut probes = 0;
    for seed in 0..100u64 {
        let mut mr = rng(1000 + seed);
        let n2 = mr.gen_range(1..40);
        let m = mr.gen_range(2..8);
        let k_policy = if seed % 2 == 0 { KPolicy::ExplicitK(mr.gen_range(1..8)) } else { KPolicy::EnergyFraction(0.95) };
        let model = train(
            &random_manifest(&mut mr, n2, m),
            &TrainConfig { k_policy, threshold_factor: mr.gen_range(0.1..1.0), ..TrainConfig::default() },
        )
        .unwrap();
        let bytes = encode_model(&model).unwrap();
        let loaded = decode_model(&bytes).unwrap();
        if encode_model(&loaded).unwrap() == bytes
            && loaded.mean().as_slice().iter().zip(model.mean().as_slice()).all(|(a, b)| a.to_bits() == b.to_bits())
            && loaded.labels() == model.labels()
        {
            round_trips += 1;
        }
        if seed == 0 {
            let positions: Vec<usize> = (0..50).map(|_| r.gen_range(8..bytes.len())).collect();
            for pos in positions {
                let mut bad = bytes.clone();
                bad[pos] ^= r.gen_range(1..=255u8);
                probes += 1;
                if matches!(decode_model(&bad), Err(ModelStoreError::CorruptFile(_))) {
                    rejected += 1;
                }
            }
        }
    }
    let ok = round_trips == 100 && rejected == 50 && probes == 50;
    report(8, "persistence", ok, format!("{round_trips}/100 bit-exact round trips, {rejected}/{probes} corruptions rejected"));
}

#[test]
fn criterion_9_noise_stability() {
    let (corpus, model) = gesture_model();
    let mut r = rng(9);
    let (mut trials, mut label_changes, mut lipschitz_violations) = (0, 0, 0);
    let mut worst_ratio = 0.0f64;
    for s in corpus.samples() {
        let clean = recognize(&model, &s.vector).unwrap();
        let clean_weights = model.project(&s.vector).unwrap();
        for _ in 0..20 {
            let noise: Vec<f64> = (0..s.vector.len()).map(|_| r.gen_range(-0.005..=0.005)).collect();
            let noise = Vector::new(noise).unwrap();
            let noisy = s.vector.add(&noise).unwrap();
            let decision = recognize(&model, &noisy).unwrap();
            if decision.label() != clean.label() || decision.label() != Some(s.label.as_str()) {
                label_changes += 1;
            }
            let moved = model.project(&noisy).unwrap().sub(&clean_weights).unwrap().norm();
            if moved > noise.norm() + 1e-12 {
                lipschitz_violations += 1;
            }
            worst_ratio = worst_ratio.max(moved / noise.norm());
            trials += 1;
        }
    }
    let (tally, _) = evaluate(&model, &corpus).unwrap();
    let ok = label_changes == 0 && lipschitz_violations == 0 && tally.true_positive == 10;
    report(
        9,
        "noise stability",
        ok,
        format!(
            "{trials} trials, {label_changes} label changes, {lipschitz_violations} Lipschitz violations, \
             max |ΔΩ|/|noise| {worst_ratio:.4}"
        ),
    );
}
