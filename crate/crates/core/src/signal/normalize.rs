//! Per-lead min-max scaling into [0, 1]. Constant (zero-range) leads map to
//! all zeros rather than raising an error; real records can have flat leads
//! and training should tolerate them.

use super::{EcgMatrix, RawRecord, LEAD_COUNT, SAMPLES_PER_LEAD};
use crate::{Error, Result};

/// Scale a single lead: v' = (v - min) / (max - min); all-zero if constant.
pub fn minmax_scale(values: &[f32]) -> Vec<f32> {
    let mut min = f32::INFINITY;
    let mut max = f32::NEG_INFINITY;
    for &v in values {
        min = min.min(v);
        max = max.max(v);
    }
    if max <= min || min.is_nan() {
        return vec![0.0; values.len()];
    }
    let range = max - min;
    values.iter().map(|&v| (v - min) / range).collect()
}

/// Normalize an 8-lead raw record into the canonical [`EcgMatrix`].
pub fn normalize(record: &RawRecord) -> Result<EcgMatrix> {
    if record.lead_count() != LEAD_COUNT {
        return Err(Error::WrongLeadCount {
            expected: LEAD_COUNT,
            found: record.lead_count(),
        });
    }
    let mut values = Vec::with_capacity(LEAD_COUNT * SAMPLES_PER_LEAD);
    for lead in &record.samples {
        if lead.len() != SAMPLES_PER_LEAD {
            return Err(Error::ShapeMismatch(format!(
                "lead has {} samples, expected {SAMPLES_PER_LEAD}",
                lead.len()
            )));
        }
        // integers widened to reals, then scaled
        let widened: Vec<f32> = lead.iter().map(|&v| v as f32).collect();
        values.extend(minmax_scale(&widened));
    }
    EcgMatrix::from_values(values)
}
