//! Evaluation metrics: mean absolute error, accuracy, and one-vs-rest
//! multi-class ROC AUC.
//!
//! The ROC curve is built at thresholds equal to the unique score values and
//! the AUC is the trapezoidal area under it, which reproduces the
//! tie-corrected rank statistic P(s+ > s-) + 0.5 P(s+ = s-) exactly.

use crate::{Error, Result};

/// Scores for n items over C classes plus integer labels in [0, C).
#[derive(Debug, Clone)]
pub struct ScoreMatrix {
    scores: Vec<f64>,
    n: usize,
    classes: usize,
    labels: Vec<usize>,
}

impl ScoreMatrix {
    pub fn new(scores: Vec<f64>, classes: usize, labels: Vec<usize>) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::EmptyInput);
        }
        if scores.len() != n * classes {
            return Err(Error::LengthMismatch {
                expected: n * classes,
                found: scores.len(),
            });
        }
        if let Some(&l) = labels.iter().find(|&&l| l >= classes) {
            return Err(Error::ShapeMismatch(format!(
                "label {l} out of range for {classes} classes"
            )));
        }
        if scores.iter().any(|s| !s.is_finite()) {
            return Err(Error::ShapeMismatch("non-finite score".into()));
        }
        Ok(ScoreMatrix {
            scores,
            n,
            classes,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.scores[i * self.classes..(i + 1) * self.classes]
    }

    pub fn column(&self, class: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i)[class]).collect()
    }
}

/// One ROC operating point; `threshold` is the score at which it was taken
/// (infinite for the forced (0,0) endpoint).
#[derive(Debug, Clone, PartialEq)]
pub struct RocPoint {
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

/// ROC curve with endpoints (0,0) and (1,1); fpr and tpr are non-decreasing.
#[derive(Debug, Clone)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
}

/// Mean absolute error.
pub fn mae(y: &[f64], yhat: &[f64]) -> Result<f64> {
    if y.is_empty() {
        return Err(Error::EmptyInput);
    }
    if y.len() != yhat.len() {
        return Err(Error::LengthMismatch {
            expected: y.len(),
            found: yhat.len(),
        });
    }
    let sum: f64 = y.iter().zip(yhat).map(|(a, b)| (a - b).abs()).sum();
    Ok(sum / y.len() as f64)
}

/// Fraction of exact matches.
pub fn accuracy(predicted: &[usize], labels: &[usize]) -> Result<f64> {
    if predicted.len() != labels.len() {
        return Err(Error::LengthMismatch {
            expected: labels.len(),
            found: predicted.len(),
        });
    }
    if labels.is_empty() {
        return Err(Error::EmptyInput);
    }
    let correct = predicted
        .iter()
        .zip(labels)
        .filter(|(p, l)| p == l)
        .count();
    Ok(correct as f64 / labels.len() as f64)
}

/// Argmax with ties resolved to the lowest index, so accuracy is
/// deterministic.
pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = i;
        }
    }
    best
}

/// Predicted class per row of a score matrix.
pub fn predicted_classes(scores: &ScoreMatrix) -> Vec<usize> {
    (0..scores.len()).map(|i| argmax(scores.row(i))).collect()
}

/// Binary ROC curve and AUC. Requires at least one positive and one
/// negative; otherwise the AUC is undefined ([`Error::DegenerateClass`]).
pub fn roc_binary(scores: &[f64], positives: &[bool]) -> Result<(RocCurve, f64)> {
    if scores.len() != positives.len() {
        return Err(Error::LengthMismatch {
            expected: positives.len(),
            found: scores.len(),
        });
    }
    let pos = positives.iter().filter(|&&p| p).count();
    let neg = positives.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::DegenerateClass(0));
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));

    let mut points = vec![RocPoint {
        threshold: f64::INFINITY,
        fpr: 0.0,
        tpr: 0.0,
    }];
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut i = 0;
    while i < order.len() {
        let threshold = scores[order[i]];
        // consume the whole tie group at this threshold
        while i < order.len() && scores[order[i]] == threshold {
            if positives[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(RocPoint {
            threshold,
            fpr: fp as f64 / neg as f64,
            tpr: tp as f64 / pos as f64,
        });
    }

    let mut auc = 0.0;
    for pair in points.windows(2) {
        auc += (pair[1].fpr - pair[0].fpr) * (pair[1].tpr + pair[0].tpr) / 2.0;
    }
    Ok((RocCurve { points }, auc))
}

/// Per-class one-vs-rest AUCs plus their unweighted mean over the classes
/// where the AUC is defined.
#[derive(Debug, Clone)]
pub struct OvrAuc {
    pub per_class: Vec<Option<f64>>,
    pub mean: f64,
}

pub fn auc_ovr(scores: &ScoreMatrix) -> Result<OvrAuc> {
    let mut per_class = Vec::with_capacity(scores.classes());
    for class in 0..scores.classes() {
        let column = scores.column(class);
        let positives: Vec<bool> = scores.labels().iter().map(|&l| l == class).collect();
        match roc_binary(&column, &positives) {
            Ok((_, auc)) => per_class.push(Some(auc)),
            Err(Error::DegenerateClass(_)) => per_class.push(None),
            Err(e) => return Err(e),
        }
    }
    let defined: Vec<f64> = per_class.iter().flatten().copied().collect();
    if defined.is_empty() {
        return Err(Error::AllDegenerate);
    }
    Ok(OvrAuc {
        mean: defined.iter().sum::<f64>() / defined.len() as f64,
        per_class,
    })
}

/// ROC points for every class of a score matrix as CSV
/// (`class,threshold,fpr,tpr`), for plotting. Degenerate classes are skipped.
pub fn roc_points_csv(scores: &ScoreMatrix) -> String {
    let mut out = String::from("class,threshold,fpr,tpr\n");
    for class in 0..scores.classes() {
        let column = scores.column(class);
        let positives: Vec<bool> = scores.labels().iter().map(|&l| l == class).collect();
        if let Ok((curve, _)) = roc_binary(&column, &positives) {
            for p in curve.points {
                out.push_str(&format!("{class},{},{},{}\n", p.threshold, p.fpr, p.tpr));
            }
        }
    }
    out
}

#[cfg(test)]
pub mod oracle {
    //! Brute-force pairwise AUC: P(s+ > s-) + 0.5 P(s+ = s-), O(n^2).
    //! Kept independent of the sweep implementation above.

    pub fn pairwise_auc(scores: &[f64], positives: &[bool]) -> Option<f64> {
        let pos: Vec<f64> = scores
            .iter()
            .zip(positives)
            .filter(|(_, &p)| p)
            .map(|(&s, _)| s)
            .collect();
        let neg: Vec<f64> = scores
            .iter()
            .zip(positives)
            .filter(|(_, &p)| !p)
            .map(|(&s, _)| s)
            .collect();
        if pos.is_empty() || neg.is_empty() {
            return None;
        }
        let mut credit = 0.0;
        for &p in &pos {
            for &n in &neg {
                if p > n {
                    credit += 1.0;
                } else if p == n {
                    credit += 0.5;
                }
            }
        }
        Some(credit / (pos.len() * neg.len()) as f64)
    }
}
