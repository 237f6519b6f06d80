//! 16-bit little-endian signal decoder. The byte stream interleaves samples
//! sample-major, lead-minor: sample 0 of every lead, then sample 1, and so on.

use super::{RawRecord, RecordHeader, SUPPORTED_FORMAT_CODE};
use crate::{Error, Result};

pub fn decode_signal(bytes: &[u8], header: &RecordHeader) -> Result<RawRecord> {
    for lead in &header.leads {
        if lead.format_code != SUPPORTED_FORMAT_CODE {
            return Err(Error::UnsupportedFormat(lead.format_code));
        }
    }
    let leads = header.lead_count;
    let samples = header.samples_per_lead;
    let expected = 2 * leads * samples;
    if bytes.len() != expected {
        return Err(Error::LengthMismatch {
            expected,
            found: bytes.len(),
        });
    }
    let mut out = vec![vec![0i32; samples]; leads];
    for t in 0..samples {
        let base = t * leads * 2;
        for (l, lead) in out.iter_mut().enumerate() {
            let i = base + l * 2;
            lead[t] = i16::from_le_bytes([bytes[i], bytes[i + 1]]) as i32;
        }
    }
    Ok(RawRecord {
        header: header.clone(),
        samples: out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand_core::RngCore;

    // Independent test encoder: writes sample-major, lead-minor i16 LE.
    fn encode(samples: &[Vec<i32>]) -> Vec<u8> {
        let n = samples[0].len();
        let mut bytes = Vec::with_capacity(2 * samples.len() * n);
        for t in 0..n {
            for lead in samples {
                bytes.extend_from_slice(&(lead[t] as i16).to_le_bytes());
            }
        }
        bytes
    }

    #[test]
    fn all_zero_stream() {
        let h = RecordHeader::synthetic("z", 8, 16);
        let rec = decode_signal(&vec![0u8; 2 * 8 * 16], &h).unwrap();
        assert!(rec.samples.iter().all(|l| l.iter().all(|&v| v == 0)));
    }

    #[test]
    fn decode_inverts_encoder() {
        let mut rng = rng::seeded(11);
        for _ in 0..50 {
            let leads = if rng.next_u64() % 2 == 0 { 8 } else { 12 };
            let n = 1 + (rng.next_u64() % 64) as usize;
            let samples: Vec<Vec<i32>> = (0..leads)
                .map(|_| {
                    (0..n)
                        .map(|_| (rng.next_u64() as i16) as i32)
                        .collect()
                })
                .collect();
            let h = RecordHeader::synthetic("r", leads, n);
            let decoded = decode_signal(&encode(&samples), &h).unwrap();
            assert_eq!(decoded.samples, samples);
        }
    }

    #[test]
    fn short_stream_is_length_mismatch() {
        let h = RecordHeader::synthetic("s", 8, 16);
        match decode_signal(&vec![0u8; 2 * 8 * 16 - 2], &h) {
            Err(Error::LengthMismatch { expected, found }) => {
                assert_eq!((expected, found), (256, 254));
            }
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn unsupported_format_rejected() {
        let mut h = RecordHeader::synthetic("u", 8, 4);
        h.leads[5].format_code = 212;
        assert!(matches!(
            decode_signal(&vec![0u8; 64], &h),
            Err(Error::UnsupportedFormat(212))
        ));
    }

    #[test]
    fn negative_values_sign_extend() {
        let h = RecordHeader::synthetic("n", 8, 1);
        let samples: Vec<Vec<i32>> = (0..8).map(|l| vec![-100 * l]).collect();
        let decoded = decode_signal(&encode(&samples), &h).unwrap();
        assert_eq!(decoded.samples, samples);
    }
}
