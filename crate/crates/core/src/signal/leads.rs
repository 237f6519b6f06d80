//! Reduction of 12-lead clinical records to the 8 leads shared with the
//! synthetic dataset: I, II, V1-V6.

use super::{RawRecord, RecordHeader};
use crate::{Error, Result};

/// Indices of the kept leads within a 12-lead record, in output order
/// (I, II, V1, V2, V3, V4, V5, V6).
pub const CLINICAL_KEEP_INDICES: [usize; 8] = [0, 1, 6, 7, 8, 9, 10, 11];

pub fn select_leads(record: &RawRecord) -> Result<RawRecord> {
    if record.lead_count() != 12 {
        return Err(Error::WrongLeadCount {
            expected: 12,
            found: record.lead_count(),
        });
    }
    let samples: Vec<Vec<i32>> = CLINICAL_KEEP_INDICES
        .iter()
        .map(|&i| record.samples[i].clone())
        .collect();
    let leads = CLINICAL_KEEP_INDICES
        .iter()
        .map(|&i| record.header.leads[i].clone())
        .collect();
    Ok(RawRecord {
        header: RecordHeader {
            lead_count: 8,
            leads,
            ..record.header.clone()
        },
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant_row_record(leads: usize) -> RawRecord {
        RawRecord {
            header: RecordHeader::synthetic("c", leads, 32),
            samples: (0..leads).map(|k| vec![k as i32; 32]).collect(),
        }
    }

    #[test]
    fn keeps_the_documented_indices_in_order() {
        let rec = constant_row_record(12);
        let out = select_leads(&rec).unwrap();
        let firsts: Vec<i32> = out.samples.iter().map(|l| l[0]).collect();
        assert_eq!(firsts, vec![0, 1, 6, 7, 8, 9, 10, 11]);
        assert_eq!(out.header.lead_count, 8);
        // sample data copied unchanged
        assert_eq!(out.samples[2], vec![6; 32]);
    }

    #[test]
    fn eight_lead_input_rejected() {
        let rec = constant_row_record(8);
        assert!(matches!(
            select_leads(&rec),
            Err(Error::WrongLeadCount {
                expected: 12,
                found: 8
            })
        ));
    }

    #[test]
    fn misordered_mapping_would_change_checksum() {
        // Guard: a permutation-sensitive checksum over the constant-row
        // fixture distinguishes any misordered lead mapping.
        let rec = constant_row_record(12);
        let out = select_leads(&rec).unwrap();
        let checksum: i64 = out
            .samples
            .iter()
            .enumerate()
            .map(|(i, l)| (i as i64 + 1) * l[0] as i64)
            .sum();
        let expected: i64 = CLINICAL_KEEP_INDICES
            .iter()
            .enumerate()
            .map(|(i, &k)| (i as i64 + 1) * k as i64)
            .sum();
        assert_eq!(checksum, expected);
    }
}
