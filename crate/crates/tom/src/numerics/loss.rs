//! Losses with analytic gradients. All losses are means over every element
//! of the batch, and return the gradient with respect to their first input.

use ndarray::Array2;

use super::layers::sigmoid;

/// Mean squared error.
pub fn mse_loss(pred: &Array2<f64>, target: &Array2<f64>) -> (f64, Array2<f64>) {
    assert_eq!(
        pred.shape(),
        target.shape(),
        "mse: prediction shape {:?} does not match target shape {:?}",
        pred.shape(),
        target.shape()
    );
    let n = pred.len() as f64;
    let diff = pred - target;
    let loss = diff.iter().map(|d| d * d).sum::<f64>() / n;
    let grad = diff.mapv(|d| 2.0 * d / n);
    (loss, grad)
}

/// Binary cross-entropy on logits. The logistic squashing is folded into the
/// loss in the standard numerically stable form
/// `max(l, 0) - l·t + ln(1 + exp(-|l|))`.
pub fn bce_loss(logits: &Array2<f64>, target: &Array2<f64>) -> (f64, Array2<f64>) {
    assert_eq!(
        logits.shape(),
        target.shape(),
        "bce: logit shape {:?} does not match target shape {:?}",
        logits.shape(),
        target.shape()
    );
    let n = logits.len() as f64;
    let mut loss = 0.0;
    let mut grad = logits.clone();
    for (g, (&l, &t)) in grad.iter_mut().zip(logits.iter().zip(target.iter())) {
        debug_assert!((0.0..=1.0).contains(&t), "bce target {t} outside [0,1]");
        loss += l.max(0.0) - l * t + (-l.abs()).exp().ln_1p();
        *g = (sigmoid(l) - t) / n;
    }
    (loss / n, grad)
}

/// Squared hinge over per-class scores with ±1 target coding: for sample
/// label `y`, target is +1 on class `y` and −1 elsewhere;
/// loss = mean over batch and classes of max(0, 1 − t·s)².
pub fn squared_hinge_loss(scores: &Array2<f64>, labels: &[usize]) -> (f64, Array2<f64>) {
    let (batch, m) = (scores.nrows(), scores.ncols());
    assert_eq!(
        labels.len(),
        batch,
        "squared hinge: {} labels for batch of {batch}",
        labels.len()
    );
    let n = (batch * m) as f64;
    let mut loss = 0.0;
    let mut grad = Array2::zeros((batch, m));
    for (i, &label) in labels.iter().enumerate() {
        assert!(label < m, "label {label} out of range for {m} classes");
        for k in 0..m {
            let t = if k == label { 1.0 } else { -1.0 };
            let margin = 1.0 - t * scores[[i, k]];
            if margin > 0.0 {
                loss += margin * margin;
                grad[[i, k]] = -2.0 * t * margin / n;
            }
        }
    }
    (loss / n, grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn hinge_satisfied_margins_zero_loss() {
        let scores = array![[2.0, -2.0, -2.0]];
        let (loss, grad) = squared_hinge_loss(&scores, &[0]);
        assert_eq!(loss, 0.0);
        assert!(grad.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn hinge_at_zero_scores() {
        // m=2, s=(0,0), label=0 -> ((1)^2 + (1)^2)/2 = 1
        let (loss, _) = squared_hinge_loss(&array![[0.0, 0.0]], &[0]);
        assert!((loss - 1.0).abs() < 1e-12);
    }

    #[test]
    #[should_panic(expected = "out of range")]
    fn hinge_label_out_of_range() {
        squared_hinge_loss(&array![[0.0, 0.0]], &[2]);
    }

    #[test]
    fn bce_zero_logit_half_target_is_ln2() {
        let (loss, _) = bce_loss(&array![[0.0]], &array![[0.5]]);
        assert!((loss - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn bce_stable_for_extreme_logits() {
        let (loss, grad) = bce_loss(&array![[500.0, -500.0]], &array![[1.0, 0.0]]);
        assert!(loss.is_finite() && loss.abs() < 1e-12);
        assert!(grad.iter().all(|g| g.is_finite()));
    }

    #[test]
    fn mse_matches_hand_value() {
        let (loss, grad) = mse_loss(&array![[1.0, 3.0]], &array![[0.0, 1.0]]);
        assert!((loss - 2.5).abs() < 1e-12);
        assert_eq!(grad, array![[1.0, 2.0]]);
    }
}
