//! Minimal reader for the clinical dataset's header convention.
//!
//! Layout:
//!
//! ```text
//! <record_id> <lead_count> <sampling_rate_hz> <samples_per_lead>
//! <format_code> <gain> <baseline>     # one line per lead
//! ```
//!
//! Lines starting with `#` and blank lines are ignored. Only format code 16
//! (16-bit little-endian two's complement) is accepted; any other code is
//! reported via [`Error::UnsupportedFormat`] rather than silently decoded.

use super::{LeadSpec, RecordHeader, SUPPORTED_FORMAT_CODE};
use crate::{Error, Result};

pub fn parse_wfdb_header(text: &str) -> Result<RecordHeader> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));

    let first = lines
        .next()
        .ok_or_else(|| Error::MalformedHeader("empty header".into()))?;
    let fields: Vec<&str> = first.split_whitespace().collect();
    if fields.len() != 4 {
        return Err(Error::MalformedHeader(format!(
            "expected 4 fields on the record line, found {}",
            fields.len()
        )));
    }
    let record_id = fields[0].to_string();
    let lead_count: usize = parse_field(fields[1], "lead count")?;
    let sampling_rate_hz: u32 = parse_field(fields[2], "sampling rate")?;
    let samples_per_lead: usize = parse_field(fields[3], "sample count")?;
    if lead_count != 8 && lead_count != 12 {
        return Err(Error::MalformedHeader(format!(
            "lead count must be 8 or 12, got {lead_count}"
        )));
    }
    if sampling_rate_hz == 0 || samples_per_lead == 0 {
        return Err(Error::MalformedHeader(
            "sampling rate and sample count must be positive".into(),
        ));
    }

    let mut leads = Vec::with_capacity(lead_count);
    for line in lines.by_ref().take(lead_count) {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::MalformedHeader(format!(
                "expected 3 fields on lead line {:?}",
                line
            )));
        }
        let format_code: i64 = parse_field(fields[0], "format code")?;
        let gain: f64 = parse_field(fields[1], "gain")?;
        let baseline: i32 = parse_field(fields[2], "baseline")?;
        if format_code != SUPPORTED_FORMAT_CODE {
            return Err(Error::UnsupportedFormat(format_code));
        }
        if gain.is_nan() || gain <= 0.0 {
            return Err(Error::MalformedHeader(format!(
                "gain must be positive, got {gain}"
            )));
        }
        leads.push(LeadSpec {
            format_code,
            gain,
            baseline,
        });
    }
    if leads.len() != lead_count {
        return Err(Error::MalformedHeader(format!(
            "header declares {lead_count} leads but only {} lead lines present",
            leads.len()
        )));
    }
    if lines.next().is_some() {
        return Err(Error::MalformedHeader("trailing content after lead lines".into()));
    }

    Ok(RecordHeader {
        record_id,
        lead_count,
        samples_per_lead,
        sampling_rate_hz,
        leads,
    })
}

/// Serialize a header in the convention accepted by [`parse_wfdb_header`].
pub fn format_header(h: &RecordHeader) -> String {
    let mut out = format!(
        "{} {} {} {}\n",
        h.record_id, h.lead_count, h.sampling_rate_hz, h.samples_per_lead
    );
    for lead in &h.leads {
        out.push_str(&format!(
            "{} {} {}\n",
            lead.format_code, lead.gain, lead.baseline
        ));
    }
    out
}

fn parse_field<T: std::str::FromStr>(token: &str, what: &str) -> Result<T> {
    token
        .parse()
        .map_err(|_| Error::MalformedHeader(format!("bad {what}: {token:?}")))
}
