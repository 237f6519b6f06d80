//! Parser for whitespace-separated ASCII signal matrices: 5000 rows of
//! 8 integer columns, column c holding lead c.

use std::io::BufRead;

use super::{RawRecord, RecordHeader, LEAD_COUNT, SAMPLES_PER_LEAD};
use crate::{error::io_err, Error, Result};

/// Parse an ASCII matrix into a [`RawRecord`] with 8 leads.
///
/// Values are parsed as integers and widened later, before normalization.
/// Blank lines are skipped; anything else must be exactly 8 numeric fields.
pub fn parse_asc<R: BufRead>(reader: R) -> Result<RawRecord> {
    let mut samples: Vec<Vec<i32>> = (0..LEAD_COUNT)
        .map(|_| Vec::with_capacity(SAMPLES_PER_LEAD))
        .collect();
    let mut rows = 0usize;
    for line in reader.lines() {
        let line = line.map_err(io_err("<asc stream>"))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = rows + 1;
        let mut fields = 0usize;
        for token in line.split_whitespace() {
            let value: i32 = token.parse().map_err(|_| Error::NonNumericToken {
                row,
                token: token.to_string(),
            })?;
            if fields < LEAD_COUNT {
                samples[fields].push(value);
            }
            fields += 1;
        }
        if fields != LEAD_COUNT {
            return Err(Error::ColumnCountMismatch {
                row,
                expected: LEAD_COUNT,
                found: fields,
            });
        }
        rows += 1;
    }
    if rows != SAMPLES_PER_LEAD {
        return Err(Error::RowCountMismatch {
            expected: SAMPLES_PER_LEAD,
            found: rows,
        });
    }
    Ok(RawRecord {
        header: RecordHeader::synthetic("", LEAD_COUNT, SAMPLES_PER_LEAD),
        samples,
    })
}
