//! Loss functions and their gradients. Cross-entropy goes through the
//! log-sum-exp form so large logits cannot overflow.

use crate::model::tensor::Tensor2;
use crate::{Error, Result};

/// Mean absolute error over a batch.
pub fn l1_loss(pred: &[f64], target: &[f64]) -> Result<f64> {
    check_lengths(pred, target)?;
    let sum: f64 = pred.iter().zip(target).map(|(p, t)| (p - t).abs()).sum();
    Ok(sum / pred.len() as f64)
}

/// L1 loss plus its gradient w.r.t. the predictions: sign(pred - target)/n,
/// with subgradient 0 at exact equality.
pub fn l1_loss_grad(pred: &[f64], target: &[f64]) -> Result<(f64, Vec<f64>)> {
    let loss = l1_loss(pred, target)?;
    let n = pred.len() as f64;
    let grad = pred
        .iter()
        .zip(target)
        .map(|(p, t)| {
            if p > t {
                1.0 / n
            } else if p < t {
                -1.0 / n
            } else {
                0.0
            }
        })
        .collect();
    Ok((loss, grad))
}

// Non-finite values are deliberately let through: they surface as a
// non-finite loss, which the training loop reports as DivergedLoss.
fn check_lengths(pred: &[f64], target: &[f64]) -> Result<()> {
    if pred.is_empty() {
        return Err(Error::EmptyInput);
    }
    if pred.len() != target.len() {
        return Err(Error::LengthMismatch {
            expected: target.len(),
            found: pred.len(),
        });
    }
    Ok(())
}

fn log_sum_exp(row: &[f64]) -> f64 {
    let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = row.iter().map(|&v| (v - max).exp()).sum();
    max + sum.ln()
}

/// Mean over the batch of -log softmax(logits)[true class].
pub fn cross_entropy_loss(logits: &Tensor2, one_hot: &Tensor2) -> Result<f64> {
    check_shapes(logits, one_hot)?;
    let mut total = 0.0;
    for r in 0..logits.rows {
        let row = logits.row(r);
        let lse = log_sum_exp(row);
        let picked: f64 = row
            .iter()
            .zip(one_hot.row(r))
            .map(|(&x, &y)| y * x)
            .sum();
        total += lse - picked;
    }
    Ok(total / logits.rows as f64)
}

/// Cross-entropy plus its gradient w.r.t. the logits:
/// (softmax(logits) - one_hot) / batch.
pub fn cross_entropy_grad(logits: &Tensor2, one_hot: &Tensor2) -> Result<(f64, Tensor2)> {
    let loss = cross_entropy_loss(logits, one_hot)?;
    let mut grad = Tensor2::zeros(logits.rows, logits.cols);
    let inv_b = 1.0 / logits.rows as f64;
    for r in 0..logits.rows {
        let probs = crate::model::softmax(logits.row(r));
        let y = one_hot.row(r);
        for (c, g) in grad.row_mut(r).iter_mut().enumerate() {
            *g = (probs[c] - y[c]) * inv_b;
        }
    }
    Ok((loss, grad))
}

fn check_shapes(logits: &Tensor2, one_hot: &Tensor2) -> Result<()> {
    if logits.rows == 0 {
        return Err(Error::EmptyInput);
    }
    if logits.rows != one_hot.rows || logits.cols != one_hot.cols {
        return Err(Error::ShapeMismatch(format!(
            "logits [{} x {}] vs targets [{} x {}]",
            logits.rows, logits.cols, one_hot.rows, one_hot.cols
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn l1_hand_cases() {
        assert_eq!(l1_loss(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(l1_loss(&[1.0, 0.0], &[0.0, 2.0]).unwrap(), 1.5);
        // negating both leaves the loss unchanged
        assert_eq!(
            l1_loss(&[-1.0, -0.0], &[-0.0, -2.0]).unwrap(),
            l1_loss(&[1.0, 0.0], &[0.0, 2.0]).unwrap()
        );
        assert!(matches!(
            l1_loss(&[1.0], &[1.0, 2.0]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn l1_grad_signs() {
        let (_, g) = l1_loss_grad(&[2.0, -1.0, 5.0], &[1.0, 0.0, 5.0]).unwrap();
        assert_eq!(g, vec![1.0 / 3.0, -1.0 / 3.0, 0.0]);
    }

    #[test]
    fn uniform_logits_hit_ln5() {
        let logits = Tensor2::from_rows(vec![vec![0.0; 5], vec![3.0; 5]]);
        let mut one_hot = Tensor2::zeros(2, 5);
        one_hot.row_mut(0)[2] = 1.0;
        one_hot.row_mut(1)[4] = 1.0;
        let loss = cross_entropy_loss(&logits, &one_hot).unwrap();
        assert!((loss - 5.0f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn confident_true_class_drives_loss_to_zero() {
        let mut logits = Tensor2::zeros(1, 5);
        logits.row_mut(0)[1] = 50.0;
        let mut one_hot = Tensor2::zeros(1, 5);
        one_hot.row_mut(0)[1] = 1.0;
        let loss = cross_entropy_loss(&logits, &one_hot).unwrap();
        assert!(loss < 1e-9);
    }

    #[test]
    fn cross_entropy_matches_direct_high_precision_route() {
        // Independent oracle: direct -ln(exp(x_t) / sum exp(x_j)) with
        // compensated summation, no log-sum-exp rearrangement.
        fn oracle(logits: &Tensor2, one_hot: &Tensor2) -> f64 {
            let mut total = 0.0;
            for r in 0..logits.rows {
                let row = logits.row(r);
                let mut sum = 0.0f64;
                let mut comp = 0.0f64;
                for &x in row {
                    let term = x.exp();
                    let y = term - comp;
                    let t = sum + y;
                    comp = (t - sum) - y;
                    sum = t;
                }
                let t_idx = one_hot.row(r).iter().position(|&y| y == 1.0).unwrap();
                total += -(row[t_idx].exp() / sum).ln();
            }
            total / logits.rows as f64
        }

        let mut rng = rng::seeded(21);
        for _ in 0..20 {
            let rows = 1 + (rng::index(&mut rng, 8));
            let logits = Tensor2::from_rows(
                (0..rows)
                    .map(|_| (0..5).map(|_| rng::uniform_in(&mut rng, -4.0, 4.0)).collect())
                    .collect(),
            );
            let mut one_hot = Tensor2::zeros(rows, 5);
            for r in 0..rows {
                one_hot.row_mut(r)[rng::index(&mut rng, 5)] = 1.0;
            }
            let ours = cross_entropy_loss(&logits, &one_hot).unwrap();
            let expected = oracle(&logits, &one_hot);
            assert!((ours - expected).abs() < 1e-10, "{ours} vs {expected}");
        }
    }

    #[test]
    fn huge_logits_do_not_overflow() {
        let logits = Tensor2::from_rows(vec![vec![1000.0, 0.0, -1000.0, 3.0, 2.0]]);
        let mut one_hot = Tensor2::zeros(1, 5);
        one_hot.row_mut(0)[0] = 1.0;
        let loss = cross_entropy_loss(&logits, &one_hot).unwrap();
        assert!(loss.is_finite());
        assert!(loss < 1e-9);
    }

    #[test]
    fn grad_rows_sum_to_zero() {
        let logits = Tensor2::from_rows(vec![vec![0.3, -0.7, 1.2, 0.0, 0.4]]);
        let mut one_hot = Tensor2::zeros(1, 5);
        one_hot.row_mut(0)[3] = 1.0;
        let (_, grad) = cross_entropy_grad(&logits, &one_hot).unwrap();
        let sum: f64 = grad.row(0).iter().sum();
        assert!(sum.abs() < 1e-12);
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let logits = Tensor2::zeros(2, 5);
        let one_hot = Tensor2::zeros(2, 4);
        assert!(matches!(
            cross_entropy_loss(&logits, &one_hot),
            Err(Error::ShapeMismatch(_))
        ));
    }
}
