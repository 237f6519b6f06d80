//! Result aggregation and rendering: the per-run results CSV, Markdown
//! tables mirroring the experiment-table layouts, ROC point dumps, and
//! static SVG plots.

pub mod svg;

use crate::metrics::ScoreMatrix;
use crate::{Error, Result};

/// One results row per grid run. `setting` is `baseline` or
/// `<dataset> <freeze-mode>`; `parameter` is `-` for the baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub setting: String,
    pub parameter: String,
    pub train_accuracy: f64,
    pub train_auc: f64,
    pub val_accuracy: f64,
    pub val_auc: f64,
    pub test_accuracy: f64,
    pub test_auc: f64,
    pub seed: u64,
    pub config_digest: String,
    pub manifest_digest: String,
}

pub const RESULTS_HEADER: &str = "setting,parameter,train_accuracy,train_auc,val_accuracy,val_auc,test_accuracy,test_auc,seed,config_digest,manifest_digest";

pub fn results_to_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from(RESULTS_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            r.setting,
            r.parameter,
            r.train_accuracy,
            r.train_auc,
            r.val_accuracy,
            r.val_auc,
            r.test_accuracy,
            r.test_auc,
            r.seed,
            r.config_digest,
            r.manifest_digest
        ));
    }
    out
}

pub fn results_from_csv(text: &str) -> Result<Vec<ResultRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == RESULTS_HEADER => {}
        other => {
            return Err(Error::ConfigInvalid(format!(
                "bad results header: {other:?}"
            )))
        }
    }
    lines
        .map(|line| {
            let c: Vec<&str> = line.split(',').collect();
            if c.len() != 11 {
                return Err(Error::ConfigInvalid(format!("bad results row: {line:?}")));
            }
            let num = |cell: &str| -> Result<f64> {
                cell.parse()
                    .map_err(|_| Error::ConfigInvalid(format!("bad number {cell:?}")))
            };
            Ok(ResultRow {
                setting: c[0].to_string(),
                parameter: c[1].to_string(),
                train_accuracy: num(c[2])?,
                train_auc: num(c[3])?,
                val_accuracy: num(c[4])?,
                val_auc: num(c[5])?,
                test_accuracy: num(c[6])?,
                test_auc: num(c[7])?,
                seed: c[8]
                    .parse()
                    .map_err(|_| Error::ConfigInvalid(format!("bad seed {:?}", c[8])))?,
                config_digest: c[9].to_string(),
                manifest_digest: c[10].to_string(),
            })
        })
        .collect()
}

/// All rows must agree on the manifest digest (baseline and transfer runs
/// share the same splits by construction; aggregation refuses otherwise).
pub fn check_manifest_digests(rows: &[ResultRow]) -> Result<()> {
    let mut digests: Vec<&str> = rows.iter().map(|r| r.manifest_digest.as_str()).collect();
    digests.sort_unstable();
    digests.dedup();
    if digests.len() > 1 {
        return Err(Error::ConfigInvalid(format!(
            "results mix manifest digests: {digests:?}"
        )));
    }
    Ok(())
}

fn md_row(cells: &[String]) -> String {
    format!("| {} |\n", cells.join(" | "))
}

fn fmt3(v: f64) -> String {
    format!("{v:.3}")
}

/// A pipe table with the six metric columns used by the transfer tables.
fn metric_table(rows: &[(String, String, [f64; 6])]) -> String {
    let mut out = String::new();
    out.push_str(&md_row(&[
        "Setting".into(),
        "Transfer".into(),
        "Train Accuracy".into(),
        "Train AUC".into(),
        "Val Accuracy".into(),
        "Val AUC".into(),
        "Test Accuracy".into(),
        "Test AUC".into(),
    ]));
    out.push_str("| --- | --- | --- | --- | --- | --- | --- | --- |\n");
    for (setting, transfer, m) in rows {
        let mut cells = vec![setting.clone(), transfer.clone()];
        cells.extend(m.iter().map(|&v| fmt3(v)));
        out.push_str(&md_row(&cells));
    }
    out
}

/// Render one transfer table (baseline row plus frozen/unfrozen groups) for
/// the given source dataset, in the layout of the experiment tables.
pub fn render_transfer_markdown(title: &str, dataset: &str, rows: &[ResultRow]) -> String {
    let mut table_rows: Vec<(String, String, [f64; 6])> = Vec::new();
    for r in rows.iter().filter(|r| r.setting == "baseline") {
        table_rows.push(("".into(), "Baseline".into(), metrics_of(r)));
    }
    for mode in ["frozen-7", "none"] {
        let setting = format!("{dataset} {mode}");
        let label = if mode == "frozen-7" {
            "1-7 Frozen"
        } else {
            "Not Frozen"
        };
        for r in rows.iter().filter(|r| r.setting == setting) {
            table_rows.push((
                label.into(),
                format!("Transfer {}", r.parameter),
                metrics_of(r),
            ));
        }
    }
    format!("## {title}\n\n{}", metric_table(&table_rows))
}

fn metrics_of(r: &ResultRow) -> [f64; 6] {
    [
        r.train_accuracy,
        r.train_auc,
        r.val_accuracy,
        r.val_auc,
        r.test_accuracy,
        r.test_auc,
    ]
}

// ---------------------------------------------------------------------------
// Reference tables (published benchmark numbers shipped as fixtures)
// ---------------------------------------------------------------------------

/// Reference regression row: train/val MAE per parameter, in table order
/// HR, QRS, PR, QT.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionModelRow {
    pub model: String,
    pub maes: [f64; 8],
}

pub fn regression_models_from_csv(text: &str) -> Result<Vec<RegressionModelRow>> {
    let mut lines = text.lines();
    let header = "model,hr_train_mae,hr_val_mae,qrs_train_mae,qrs_val_mae,pr_train_mae,pr_val_mae,qt_train_mae,qt_val_mae";
    match lines.next() {
        Some(h) if h == header => {}
        other => {
            return Err(Error::ConfigInvalid(format!(
                "bad regression reference header: {other:?}"
            )))
        }
    }
    lines
        .map(|line| {
            let c: Vec<&str> = line.split(',').collect();
            if c.len() != 9 {
                return Err(Error::ConfigInvalid(format!("bad row: {line:?}")));
            }
            let mut maes = [0.0; 8];
            for (i, cell) in c[1..].iter().enumerate() {
                maes[i] = cell
                    .parse()
                    .map_err(|_| Error::ConfigInvalid(format!("bad number {cell:?}")))?;
            }
            Ok(RegressionModelRow {
                model: c[0].to_string(),
                maes,
            })
        })
        .collect()
}

pub fn render_regression_models_markdown(rows: &[RegressionModelRow]) -> String {
    let mut out = String::from("## Regression model comparison (MAE, lower is better)\n\n");
    out.push_str(&md_row(&[
        "Model".into(),
        "HR Train".into(),
        "HR Val".into(),
        "QRS Train".into(),
        "QRS Val".into(),
        "PR Train".into(),
        "PR Val".into(),
        "QT Train".into(),
        "QT Val".into(),
    ]));
    out.push_str("| --- | --- | --- | --- | --- | --- | --- | --- | --- |\n");
    for r in rows {
        let mut cells = vec![r.model.clone()];
        cells.extend(r.maes.iter().map(|&v| fmt3(v)));
        out.push_str(&md_row(&cells));
    }
    out
}

/// Reference classification row: train/val accuracy and AUC.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationModelRow {
    pub model: String,
    pub metrics: [f64; 4],
}

pub fn classification_models_from_csv(text: &str) -> Result<Vec<ClassificationModelRow>> {
    let mut lines = text.lines();
    let header = "model,train_accuracy,train_auc,val_accuracy,val_auc";
    match lines.next() {
        Some(h) if h == header => {}
        other => {
            return Err(Error::ConfigInvalid(format!(
                "bad classification reference header: {other:?}"
            )))
        }
    }
    lines
        .map(|line| {
            let c: Vec<&str> = line.split(',').collect();
            if c.len() != 5 {
                return Err(Error::ConfigInvalid(format!("bad row: {line:?}")));
            }
            let mut metrics = [0.0; 4];
            for (i, cell) in c[1..].iter().enumerate() {
                metrics[i] = cell
                    .parse()
                    .map_err(|_| Error::ConfigInvalid(format!("bad number {cell:?}")))?;
            }
            Ok(ClassificationModelRow {
                model: c[0].to_string(),
                metrics,
            })
        })
        .collect()
}

pub fn render_classification_models_markdown(rows: &[ClassificationModelRow]) -> String {
    let mut out =
        String::from("## Classification model comparison (five-class, higher is better)\n\n");
    out.push_str(&md_row(&[
        "Model".into(),
        "Train Accuracy".into(),
        "Train AUC".into(),
        "Val Accuracy".into(),
        "Val AUC".into(),
    ]));
    out.push_str("| --- | --- | --- | --- | --- |\n");
    for r in rows {
        let mut cells = vec![r.model.clone()];
        cells.extend(r.metrics.iter().map(|&v| fmt3(v)));
        out.push_str(&md_row(&cells));
    }
    out
}

/// Reference transfer row: like [`ResultRow`] but without run provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceTransferRow {
    pub setting: String,
    pub parameter: String,
    pub metrics: [f64; 6],
}

pub fn reference_transfer_from_csv(text: &str) -> Result<Vec<ReferenceTransferRow>> {
    let mut lines = text.lines();
    let header =
        "setting,parameter,train_accuracy,train_auc,val_accuracy,val_auc,test_accuracy,test_auc";
    match lines.next() {
        Some(h) if h == header => {}
        other => {
            return Err(Error::ConfigInvalid(format!(
                "bad transfer reference header: {other:?}"
            )))
        }
    }
    lines
        .map(|line| {
            let c: Vec<&str> = line.split(',').collect();
            if c.len() != 8 {
                return Err(Error::ConfigInvalid(format!("bad row: {line:?}")));
            }
            let mut metrics = [0.0; 6];
            for (i, cell) in c[2..].iter().enumerate() {
                metrics[i] = cell
                    .parse()
                    .map_err(|_| Error::ConfigInvalid(format!("bad number {cell:?}")))?;
            }
            Ok(ReferenceTransferRow {
                setting: c[0].to_string(),
                parameter: c[1].to_string(),
                metrics,
            })
        })
        .collect()
}

pub fn render_reference_transfer_markdown(title: &str, rows: &[ReferenceTransferRow]) -> String {
    let table_rows: Vec<(String, String, [f64; 6])> = rows
        .iter()
        .map(|r| {
            let transfer = if r.setting == "baseline" {
                "Baseline".to_string()
            } else {
                format!("Transfer {}", r.parameter)
            };
            let group = match r.setting.as_str() {
                "baseline" => "".to_string(),
                "frozen-7" => "1-7 Frozen".to_string(),
                "none" => "Not Frozen".to_string(),
                other => other.to_string(),
            };
            (group, transfer, r.metrics)
        })
        .collect();
    format!("## {title}\n\n{}", metric_table(&table_rows))
}

// ---------------------------------------------------------------------------
// Score dumps
// ---------------------------------------------------------------------------

/// Test-set scores of one run as CSV: `label,p0,...,p4`.
pub fn scores_to_csv(scores: &ScoreMatrix) -> String {
    let mut out = String::from("label");
    for c in 0..scores.classes() {
        out.push_str(&format!(",p{c}"));
    }
    out.push('\n');
    for i in 0..scores.len() {
        out.push_str(&scores.labels()[i].to_string());
        for v in scores.row(i) {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    out
}

pub fn scores_from_csv(text: &str) -> Result<ScoreMatrix> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::ConfigInvalid("empty scores file".into()))?;
    let classes = header.split(',').count() - 1;
    let mut labels = Vec::new();
    let mut scores = Vec::new();
    for line in lines {
        let c: Vec<&str> = line.split(',').collect();
        if c.len() != classes + 1 {
            return Err(Error::ConfigInvalid(format!("bad scores row: {line:?}")));
        }
        labels.push(
            c[0].parse()
                .map_err(|_| Error::ConfigInvalid(format!("bad label {:?}", c[0])))?,
        );
        for cell in &c[1..] {
            scores.push(
                cell.parse()
                    .map_err(|_| Error::ConfigInvalid(format!("bad score {cell:?}")))?,
            );
        }
    }
    ScoreMatrix::new(scores, classes, labels)
}
