//! Raw dataset parsing and the canonical record store.
//!
//! Two input shapes are supported: whitespace-separated ASCII matrices
//! (8 columns x 5000 rows, one column per lead) and clinical header + 16-bit
//! little-endian signal files. Both funnel into [`RawRecord`], are reduced to
//! the 8 shared leads, min-max normalized per lead, and persisted as an
//! [`EcgMatrix`] in the "ECG8" binary store with a metadata CSV sidecar.

mod asc;
mod decode;
mod header;
mod leads;
mod normalize;
pub mod store;

pub use asc::parse_asc;
pub use decode::decode_signal;
pub use header::{format_header, parse_wfdb_header};
pub use leads::{select_leads, CLINICAL_KEEP_INDICES};
pub use normalize::{minmax_scale, normalize};

use crate::{Error, Result};

/// Lead names of the canonical 8-lead layout, in storage order.
pub const LEAD_NAMES: [&str; 8] = ["I", "II", "V1", "V2", "V3", "V4", "V5", "V6"];
pub const LEAD_COUNT: usize = 8;
pub const SAMPLES_PER_LEAD: usize = 5000;
pub const SAMPLING_RATE_HZ: u32 = 500;
/// The only waveform storage format decoded natively: 16-bit little-endian
/// two's complement. Other formats must be pre-converted.
pub const SUPPORTED_FORMAT_CODE: i64 = 16;

/// Per-lead storage description from a clinical header.
#[derive(Debug, Clone, PartialEq)]
pub struct LeadSpec {
    pub format_code: i64,
    /// ADC units per millivolt; always positive.
    pub gain: f64,
    /// ADC offset.
    pub baseline: i32,
}

/// Parsed clinical record header.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordHeader {
    pub record_id: String,
    pub lead_count: usize,
    pub samples_per_lead: usize,
    pub sampling_rate_hz: u32,
    pub leads: Vec<LeadSpec>,
}

impl RecordHeader {
    /// Synthetic header for sources that carry no header of their own
    /// (ASCII matrices, the toy generator).
    pub fn synthetic(record_id: &str, lead_count: usize, samples_per_lead: usize) -> Self {
        RecordHeader {
            record_id: record_id.to_string(),
            lead_count,
            samples_per_lead,
            sampling_rate_hz: SAMPLING_RATE_HZ,
            leads: vec![
                LeadSpec {
                    format_code: SUPPORTED_FORMAT_CODE,
                    gain: 1.0,
                    baseline: 0,
                };
                lead_count
            ],
        }
    }

    pub fn duration_s(&self) -> f64 {
        self.samples_per_lead as f64 / self.sampling_rate_hz as f64
    }
}

/// Undecoded signal matrix in ADC units, `samples[lead][sample]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RawRecord {
    pub header: RecordHeader,
    pub samples: Vec<Vec<i32>>,
}

impl RawRecord {
    pub fn lead_count(&self) -> usize {
        self.samples.len()
    }
}

/// Normalized 8 x 5000 signal matrix, the universal model input.
///
/// Every entry lies in [0, 1]. Matrices produced by [`normalize`] additionally
/// satisfy the canonical form: per lead, either min = 0 and max = 1, or the
/// lead is all-zero (degenerate constant lead).
#[derive(Debug, Clone, PartialEq)]
pub struct EcgMatrix {
    values: Vec<f32>,
}

impl EcgMatrix {
    /// Build from a row-major `[8 * 5000]` buffer, validating shape and range.
    pub fn from_values(values: Vec<f32>) -> Result<Self> {
        if values.len() != LEAD_COUNT * SAMPLES_PER_LEAD {
            return Err(Error::ShapeMismatch(format!(
                "expected {} values, got {}",
                LEAD_COUNT * SAMPLES_PER_LEAD,
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::ShapeMismatch(format!(
                "matrix entry {v} outside [0, 1]"
            )));
        }
        Ok(EcgMatrix { values })
    }

    pub fn zeros() -> Self {
        EcgMatrix {
            values: vec![0.0; LEAD_COUNT * SAMPLES_PER_LEAD],
        }
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn lead(&self, lead: usize) -> &[f32] {
        &self.values[lead * SAMPLES_PER_LEAD..(lead + 1) * SAMPLES_PER_LEAD]
    }

    pub fn get(&self, lead: usize, sample: usize) -> f32 {
        self.values[lead * SAMPLES_PER_LEAD + sample]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_rejects_bad_shape_and_range() {
        assert!(EcgMatrix::from_values(vec![0.0; 10]).is_err());
        let mut v = vec![0.0f32; LEAD_COUNT * SAMPLES_PER_LEAD];
        v[17] = 1.5;
        assert!(EcgMatrix::from_values(v).is_err());
    }

    #[test]
    fn matrix_lead_slices() {
        let mut v = vec![0.0f32; LEAD_COUNT * SAMPLES_PER_LEAD];
        v[2 * SAMPLES_PER_LEAD + 5] = 0.25;
        let m = EcgMatrix::from_values(v).unwrap();
        assert_eq!(m.lead(2)[5], 0.25);
        assert_eq!(m.get(2, 5), 0.25);
        assert_eq!(m.lead(0).len(), SAMPLES_PER_LEAD);
    }

    #[test]
    fn synthetic_header_duration() {
        let h = RecordHeader::synthetic("r1", 8, 5000);
        assert_eq!(h.duration_s(), 10.0);
        assert_eq!(h.leads.len(), 8);
    }
}
