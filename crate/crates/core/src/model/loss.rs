use crate::{Error, Result};

pub const PROB_CLAMP: f64 = 1e-7;

fn clamp(p: f64) -> f64 {
    p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP)
}

/// Binary cross-entropy of one prediction.
pub fn bce_term(p: f64, y: f64) -> f64 {
    let p = clamp(p);
    -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
}

/// Derivative of `bce_term(sigmoid(z), y)` with respect to the logit `z`.
/// Zero where the clamp is active.
pub fn bce_logit_grad(p: f64, y: f64) -> f64 {
    if p < PROB_CLAMP || p > 1.0 - PROB_CLAMP {
        0.0
    } else {
        p - y
    }
}

/// Mean binary cross-entropy over every entry.
pub fn bce_loss(probabilities: &[f64], targets: &[f64]) -> f64 {
    assert_eq!(probabilities.len(), targets.len(), "prediction/target length");
    if probabilities.is_empty() {
        return 0.0;
    }
    let sum: f64 = probabilities.iter().zip(targets).map(|(&p, &y)| bce_term(p, y)).sum();
    sum / probabilities.len() as f64
}

/// `(TPR + TNR) / 2` with predictions thresholded at `p >= 0.5`.
pub fn balanced_accuracy(probabilities: &[f64], targets: &[f64]) -> Result<f64> {
    assert_eq!(probabilities.len(), targets.len(), "prediction/target length");
    let (mut tp, mut pos, mut tn, mut neg) = (0usize, 0usize, 0usize, 0usize);
    for (&p, &y) in probabilities.iter().zip(targets) {
        let predicted = p >= 0.5;
        if y >= 0.5 {
            pos += 1;
            tp += usize::from(predicted);
        } else {
            neg += 1;
            tn += usize::from(!predicted);
        }
    }
    if pos == 0 {
        return Err(Error::UndefinedClass("positive"));
    }
    if neg == 0 {
        return Err(Error::UndefinedClass("negative"));
    }
    Ok((tp as f64 / pos as f64 + tn as f64 / neg as f64) / 2.0)
}

/// Balanced accuracy of output column `k` in `batch x outputs` arrays.
pub fn balanced_accuracy_column(probabilities: &[f64], targets: &[f64], outputs: usize, k: usize) -> Result<f64> {
    let p: Vec<f64> = probabilities.iter().skip(k).step_by(outputs).copied().collect();
    let y: Vec<f64> = targets.iter().skip(k).step_by(outputs).copied().collect();
    balanced_accuracy(&p, &y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_values() {
        assert!((bce_loss(&[0.5], &[1.0]) - std::f64::consts::LN_2).abs() < 1e-12);
        assert!((bce_loss(&[0.9], &[0.0]) - 2.302585).abs() < 1e-6);
        assert!((bce_loss(&[0.0], &[1.0]) - 1e7f64.ln()).abs() < 1e-6);
        assert!(bce_loss(&[1.0, 0.0], &[1.0, 0.0]) < 1e-6);
    }

    #[test]
    fn balanced_accuracy_from_rates() {
        // 5 positives with 4 hits, 5 negatives with 3 hits.
        let p = [0.9, 0.8, 0.7, 0.6, 0.1, 0.2, 0.3, 0.4, 0.6, 0.7];
        let y = [1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        assert!((balanced_accuracy(&p, &y).unwrap() - 0.7).abs() < 1e-15);
    }

    #[test]
    fn constant_predictor_is_chance() {
        let y: Vec<f64> = (0..100).map(|i| (i % 2) as f64).collect();
        assert_eq!(balanced_accuracy(&[0.93; 100], &y).unwrap(), 0.5);
        assert_eq!(balanced_accuracy(&[0.02; 100], &y).unwrap(), 0.5);
    }

    #[test]
    fn missing_class_is_an_error() {
        assert!(matches!(balanced_accuracy(&[0.2, 0.7], &[1.0, 1.0]), Err(Error::UndefinedClass("negative"))));
        assert!(matches!(balanced_accuracy(&[0.2], &[0.0]), Err(Error::UndefinedClass("positive"))));
    }

    #[test]
    fn column_slicing() {
        let p = [0.9, 0.1, 0.2, 0.8];
        let y = [1.0, 0.0, 0.0, 0.0];
        assert_eq!(balanced_accuracy_column(&p, &y, 2, 0).unwrap(), 1.0);
        assert!(balanced_accuracy_column(&p, &y, 2, 1).is_err());
    }

    #[test]
    fn clamped_gradient_is_zero() {
        assert_eq!(bce_logit_grad(1e-9, 1.0), 0.0);
        assert_eq!(bce_logit_grad(0.25, 1.0), -0.75);
    }
}
