use srdcnn::gradcheck::{self, DEFAULT_STEP, DEFAULT_THRESHOLD};
use srdcnn::layers::{self, ConvGrads};
use srdcnn::regularization::PenaltyConfig;

const STRICT: f64 = 1e-6;

#[test]
fn conv1d_backward_matches_finite_differences() {
    let r = gradcheck::check_conv1d(1, DEFAULT_STEP, STRICT).unwrap();
    assert!(r.passed, "{r}");
}

#[test]
fn batchnorm_backward_matches_finite_differences() {
    let r = gradcheck::check_batchnorm(2, DEFAULT_STEP, STRICT).unwrap();
    assert!(r.passed, "{r}");
}

#[test]
fn dense_backward_matches_finite_differences() {
    let r = gradcheck::check_dense(3, DEFAULT_STEP, STRICT).unwrap();
    assert!(r.passed, "{r}");
}

#[test]
fn softmax_xent_matches_finite_differences() {
    let r = gradcheck::check_softmax_xent(4, DEFAULT_STEP, STRICT).unwrap();
    assert!(r.passed, "{r}");
}

#[test]
fn relu_and_gap_match_finite_differences() {
    for r in [
        gradcheck::check_relu(5, DEFAULT_STEP, DEFAULT_THRESHOLD).unwrap(),
        gradcheck::check_gap(5, DEFAULT_STEP, DEFAULT_THRESHOLD).unwrap(),
    ] {
        assert!(r.passed, "{r}");
    }
}

#[test]
fn penalty_gradient_matches_finite_differences() {
    let r = gradcheck::check_penalty(6, &PenaltyConfig::default(), DEFAULT_STEP, STRICT).unwrap();
    assert!(r.passed, "{r}");
}

#[test]
fn tiny_model_passes_at_three_seeds() {
    for seed in [0, 1, 2] {
        let r = gradcheck::check_tiny_model(seed, DEFAULT_STEP, DEFAULT_THRESHOLD).unwrap();
        println!("seed {seed}\n{r}");
        assert!(r.passed, "seed {seed}\n{r}");
    }
}

#[test]
fn sign_flipped_conv_backward_is_caught() {
    let broken = |x: &_, p: &_, g: &_| -> srdcnn::Result<ConvGrads> {
        let mut out = layers::conv1d_backward(x, p, g)?;
        out.weights = out.weights.scale(-1.0);
        Ok(out)
    };
    let r = gradcheck::check_conv1d_with(&broken, 1, DEFAULT_STEP, DEFAULT_THRESHOLD).unwrap();
    assert!(!r.passed, "{r}");
}

#[test]
fn report_is_deterministic() {
    let a = gradcheck::check_tiny_model(9, DEFAULT_STEP, DEFAULT_THRESHOLD).unwrap();
    let b = gradcheck::check_tiny_model(9, DEFAULT_STEP, DEFAULT_THRESHOLD).unwrap();
    assert_eq!(a, b);
}

#[test]
fn smaller_step_does_not_blow_up_error() {
    let coarse = gradcheck::check_tiny_model(0, 1e-4, DEFAULT_THRESHOLD).unwrap();
    let fine = gradcheck::check_tiny_model(0, 1e-5, DEFAULT_THRESHOLD).unwrap();
    assert!(
        fine.max_rel_error <= 10.0 * coarse.max_rel_error.max(1e-12),
        "h=1e-4: {:.3e}, h=1e-5: {:.3e}",
        coarse.max_rel_error,
        fine.max_rel_error
    );
}
