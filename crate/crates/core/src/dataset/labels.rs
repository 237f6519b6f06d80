//! Diagnostic class labels, regression targets, and labeled records.

use crate::signal::store::RecordMeta;
use crate::signal::EcgMatrix;
use crate::{Error, Result};

pub const CLASS_COUNT: usize = 5;

/// The five diagnostic superclasses with their fixed ordinal encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClassLabel {
    Norm = 0,
    Cd = 1,
    Sttc = 2,
    Mi = 3,
    Hyp = 4,
}

impl ClassLabel {
    pub const ALL: [ClassLabel; CLASS_COUNT] = [
        ClassLabel::Norm,
        ClassLabel::Cd,
        ClassLabel::Sttc,
        ClassLabel::Mi,
        ClassLabel::Hyp,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<ClassLabel> {
        Self::ALL.get(index).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ClassLabel::Norm => "NORM",
            ClassLabel::Cd => "CD",
            ClassLabel::Sttc => "STTC",
            ClassLabel::Mi => "MI",
            ClassLabel::Hyp => "HYP",
        }
    }
}

impl std::str::FromStr for ClassLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::UnknownClassLabel(s.to_string()))
    }
}

impl std::fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One of the four regression parameters, in the order used by the
/// experiment tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegressionParam {
    Hr,
    Qrs,
    Pr,
    Qt,
}

impl RegressionParam {
    pub const ALL: [RegressionParam; 4] = [
        RegressionParam::Hr,
        RegressionParam::Qrs,
        RegressionParam::Pr,
        RegressionParam::Qt,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RegressionParam::Hr => "HR",
            RegressionParam::Qrs => "QRS",
            RegressionParam::Pr => "PR",
            RegressionParam::Qt => "QT",
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            RegressionParam::Hr => "hr",
            RegressionParam::Qrs => "qrs",
            RegressionParam::Pr => "pr",
            RegressionParam::Qt => "qt",
        }
    }
}

impl std::str::FromStr for RegressionParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        Self::ALL
            .iter()
            .copied()
            .find(|p| p.key() == lower)
            .ok_or_else(|| Error::ConfigInvalid(format!("unknown regression parameter {s:?}")))
    }
}

impl std::fmt::Display for RegressionParam {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The four regression targets; each may be absent for a given record.
/// Present values must be finite and positive.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RegressionTargets {
    pub hr_bpm: Option<f64>,
    pub pr_ms: Option<f64>,
    pub qt_ms: Option<f64>,
    pub qrs_ms: Option<f64>,
}

impl RegressionTargets {
    pub fn get(&self, param: RegressionParam) -> Option<f64> {
        match param {
            RegressionParam::Hr => self.hr_bpm,
            RegressionParam::Pr => self.pr_ms,
            RegressionParam::Qt => self.qt_ms,
            RegressionParam::Qrs => self.qrs_ms,
        }
    }

    pub fn any_present(&self) -> bool {
        RegressionParam::ALL.iter().any(|&p| self.get(p).is_some())
    }

    fn validate(&self) -> Result<()> {
        for &p in &RegressionParam::ALL {
            if let Some(v) = self.get(p) {
                if !v.is_finite() || v <= 0.0 {
                    return Err(Error::ConfigInvalid(format!(
                        "target {} must be finite and positive, got {v}",
                        p.key()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A normalized signal with its labels. At least one of class label or
/// regression targets must be present.
#[derive(Debug, Clone)]
pub struct LabeledRecord {
    pub record_id: String,
    pub signal: EcgMatrix,
    pub label: Option<ClassLabel>,
    pub targets: RegressionTargets,
}

impl LabeledRecord {
    pub fn new(
        record_id: String,
        signal: EcgMatrix,
        label: Option<ClassLabel>,
        targets: RegressionTargets,
    ) -> Result<Self> {
        if label.is_none() && !targets.any_present() {
            return Err(Error::ConfigInvalid(format!(
                "record {record_id} carries neither a class label nor regression targets"
            )));
        }
        targets.validate()?;
        Ok(LabeledRecord {
            record_id,
            signal,
            label,
            targets,
        })
    }

    /// Build from a store metadata row plus its matrix.
    pub fn from_meta(signal: EcgMatrix, meta: &RecordMeta) -> Result<Self> {
        let label = meta
            .class_label
            .as_deref()
            .map(str::parse::<ClassLabel>)
            .transpose()?;
        Self::new(
            meta.record_id.clone(),
            signal,
            label,
            RegressionTargets {
                hr_bpm: meta.hr_bpm,
                pr_ms: meta.pr_ms,
                qt_ms: meta.qt_ms,
                qrs_ms: meta.qrs_ms,
            },
        )
    }
}

/// One-hot encoding of a class label.
pub fn one_hot(label: ClassLabel) -> [f64; CLASS_COUNT] {
    let mut v = [0.0; CLASS_COUNT];
    v[label.index()] = 1.0;
    v
}

/// Keep exactly the items whose raw label set is a singleton, assigning that
/// label. Multi-label and unlabeled items are dropped.
pub fn filter_single_label<T>(
    items: impl IntoIterator<Item = (T, Vec<ClassLabel>)>,
) -> Vec<(T, ClassLabel)> {
    items
        .into_iter()
        .filter_map(|(item, labels)| match labels.as_slice() {
            [single] => Some((item, *single)),
            _ => None,
        })
        .collect()
}
