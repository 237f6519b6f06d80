//! Synthetic quasi-ECG generator with exact, generator-known labels.
//!
//! Each record is a train of template beats at 500 Hz over 10 s: per beat a
//! P bump placed `pr` ms before the QRS onset, a triangular QRS spike of
//! width `qrs` ms, and a T bump ending `qt` ms after the QRS onset, with
//! beats spaced 60/hr seconds apart. Bumps are evaluated in continuous time
//! at the sample instants, so the recorded regression targets are exact by
//! construction; the additive noise is zero-mean, which puts the label noise
//! floor at zero for all four targets.
//!
//! Classes differ by morphology rule so a learnable signal exists:
//!
//! - NORM: the plain template
//! - CD: widened QRS (drawn from the upper part of the QRS range)
//! - STTC: flattened T bump
//! - MI: deep negative dip just before the QRS spike
//! - HYP: enlarged QRS amplitude

use std::path::Path;

use rand_chacha::ChaCha8Rng;

use crate::dataset::ClassLabel;
use crate::signal::store::{RecordMeta, RecordStore};
use crate::signal::{minmax_scale, EcgMatrix, LEAD_COUNT, SAMPLES_PER_LEAD, SAMPLING_RATE_HZ};
use crate::{error::io_err, rng, Error, Result};

/// Time of the first QRS onset, seconds. Early enough for ten beats at
/// 60 bpm, late enough that the first P bump stays inside the record.
pub const FIRST_ONSET_S: f64 = 0.25;
const DURATION_S: f64 = 10.0;
const P_WIDTH_S: f64 = 0.09;
const T_WIDTH_S: f64 = 0.16;
const P_AMP: f64 = 0.18;
const T_AMP: f64 = 0.32;
const T_AMP_FLATTENED: f64 = 0.08;
const R_AMP: f64 = 1.0;
const R_AMP_ENLARGED: f64 = 1.6;
const Q_DEPTH: f64 = 0.45;
const Q_WIDTH_S: f64 = 0.03;
/// Per-lead scaling of the shared template; noise is added after scaling so
/// leads differ in signal-to-noise ratio.
const LEAD_GAINS: [f64; LEAD_COUNT] = [1.0, 0.95, 0.6, 0.7, 0.8, 0.9, 1.0, 1.05];

#[derive(Debug, Clone, PartialEq)]
pub struct ToySpec {
    pub count: usize,
    pub noise_amplitude: f64,
    pub seed: u64,
    pub hr_range: (f64, f64),
    pub pr_range: (f64, f64),
    pub qt_range: (f64, f64),
    pub qrs_range: (f64, f64),
}

impl Default for ToySpec {
    fn default() -> Self {
        ToySpec {
            count: 2000,
            noise_amplitude: 0.02,
            seed: 0,
            hr_range: (50.0, 120.0),
            pr_range: (120.0, 220.0),
            qt_range: (300.0, 450.0),
            qrs_range: (70.0, 120.0),
        }
    }
}

impl ToySpec {
    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::InvalidSpec("count must be positive".into()));
        }
        if self.noise_amplitude.is_nan() || self.noise_amplitude < 0.0 {
            return Err(Error::InvalidSpec("noise amplitude must be >= 0".into()));
        }
        for (name, (lo, hi)) in [
            ("hr", self.hr_range),
            ("pr", self.pr_range),
            ("qt", self.qt_range),
            ("qrs", self.qrs_range),
        ] {
            if lo.is_nan() || hi.is_nan() || lo <= 0.0 || hi < lo {
                return Err(Error::InvalidSpec(format!(
                    "{name} range [{lo}, {hi}] must be positive and ordered"
                )));
            }
        }
        // the first P bump must start at or after t = 0
        if self.pr_range.1 / 1000.0 > FIRST_ONSET_S {
            return Err(Error::InvalidSpec(format!(
                "pr upper bound {} ms exceeds the first-onset offset",
                self.pr_range.1
            )));
        }
        if self.qt_range.1 / 1000.0 >= DURATION_S {
            return Err(Error::InvalidSpec("qt upper bound exceeds the record".into()));
        }
        Ok(())
    }
}

/// Exact construction parameters of one record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToyParams {
    pub class: ClassLabel,
    pub hr_bpm: f64,
    pub pr_ms: f64,
    pub qt_ms: f64,
    pub qrs_ms: f64,
}

/// Draw per-record parameters. QRS comes from the upper part of the range
/// for CD and the lower part for every other class, so QRS width is a
/// class-discriminative feature; the remaining targets use the full ranges.
pub fn draw_params(spec: &ToySpec, class: ClassLabel, rng: &mut ChaCha8Rng) -> ToyParams {
    let hr_bpm = rng::uniform_in(rng, spec.hr_range.0, spec.hr_range.1);
    let pr_ms = rng::uniform_in(rng, spec.pr_range.0, spec.pr_range.1);
    let qt_ms = rng::uniform_in(rng, spec.qt_range.0, spec.qt_range.1);
    let (lo, hi) = spec.qrs_range;
    let span = hi - lo;
    let qrs_ms = if class == ClassLabel::Cd {
        rng::uniform_in(rng, lo + 0.6 * span, hi)
    } else {
        rng::uniform_in(rng, lo, lo + 0.5 * span)
    };
    ToyParams {
        class,
        hr_bpm,
        pr_ms,
        qt_ms,
        qrs_ms,
    }
}

/// Raised-cosine bump of the given width starting at `start`.
fn bump(t: f64, start: f64, width: f64, amp: f64) -> f64 {
    let u = (t - start) / width;
    if (0.0..=1.0).contains(&u) {
        amp * 0.5 * (1.0 - (2.0 * std::f64::consts::PI * u).cos())
    } else {
        0.0
    }
}

/// Triangular spike over [start, start + width], peaking at the center.
fn triangle(t: f64, start: f64, width: f64, amp: f64) -> f64 {
    let u = (t - start) / width;
    if (0.0..=1.0).contains(&u) {
        amp * (1.0 - (2.0 * u - 1.0).abs())
    } else {
        0.0
    }
}

/// Template value at time `t` (seconds) for the given parameters.
fn template_at(t: f64, p: &ToyParams) -> f64 {
    let period = 60.0 / p.hr_bpm;
    let qrs_s = p.qrs_ms / 1000.0;
    let pr_s = p.pr_ms / 1000.0;
    let qt_s = p.qt_ms / 1000.0;
    let t_amp = if p.class == ClassLabel::Sttc {
        T_AMP_FLATTENED
    } else {
        T_AMP
    };
    let r_amp = if p.class == ClassLabel::Hyp {
        R_AMP_ENLARGED
    } else {
        R_AMP
    };

    // Only beats whose support can reach t matter: a beat's T bump trails
    // its onset by at most 0.5 s and its P bump leads it by at most 0.25 s.
    let first = ((t - FIRST_ONSET_S - 0.5) / period).floor().max(0.0) as usize;
    let mut value = 0.0;
    let mut k = first;
    loop {
        let onset = FIRST_ONSET_S + k as f64 * period;
        if onset >= DURATION_S || onset > t + 0.25 {
            break;
        }
        value += triangle(t, onset, qrs_s, r_amp);
        value += bump(t, onset - pr_s, P_WIDTH_S, P_AMP);
        value += bump(t, onset + qt_s - T_WIDTH_S, T_WIDTH_S, t_amp);
        if p.class == ClassLabel::Mi {
            value -= triangle(t, onset - Q_WIDTH_S, Q_WIDTH_S, Q_DEPTH);
        }
        k += 1;
    }
    value
}

/// QRS onsets of a record, for tests and beat accounting.
pub fn qrs_onsets(hr_bpm: f64) -> Vec<f64> {
    let period = 60.0 / hr_bpm;
    let mut onsets = Vec::new();
    let mut t = FIRST_ONSET_S;
    while t < DURATION_S {
        onsets.push(t);
        t += period;
    }
    onsets
}

/// Render one record: 8 scaled copies of the template plus per-lead noise,
/// each lead min-max normalized.
pub fn synth_matrix(params: &ToyParams, noise_amplitude: f64, rng: &mut ChaCha8Rng) -> EcgMatrix {
    let fs = SAMPLING_RATE_HZ as f64;
    let template: Vec<f64> = (0..SAMPLES_PER_LEAD)
        .map(|i| template_at(i as f64 / fs, params))
        .collect();
    let mut values = Vec::with_capacity(LEAD_COUNT * SAMPLES_PER_LEAD);
    for gain in LEAD_GAINS {
        let lead: Vec<f32> = template
            .iter()
            .map(|&v| {
                let noise = if noise_amplitude > 0.0 {
                    rng::uniform_in(rng, -noise_amplitude, noise_amplitude)
                } else {
                    0.0
                };
                (gain * v + noise) as f32
            })
            .collect();
        values.extend(minmax_scale(&lead));
    }
    EcgMatrix::from_values(values).expect("scaled leads lie in [0, 1]")
}

/// Generation summary; the label noise floor is zero by construction and is
/// logged alongside the additive noise amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyStats {
    pub records: usize,
    pub class_counts: [usize; 5],
    pub noise_amplitude: f64,
    pub label_noise_floor: f64,
}

impl ToyStats {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("key,value\n");
        out.push_str(&format!("records,{}\n", self.records));
        for class in ClassLabel::ALL {
            out.push_str(&format!(
                "class_{},{}\n",
                class.as_str(),
                self.class_counts[class.index()]
            ));
        }
        out.push_str(&format!("noise_amplitude,{}\n", self.noise_amplitude));
        for key in ["hr", "qrs", "pr", "qt"] {
            out.push_str(&format!("noise_floor_{key},{}\n", self.label_noise_floor));
        }
        out
    }
}

pub const STATS_FILE: &str = "toy_stats.csv";

/// Generate a toy dataset into a record store at `out_dir`, with classes
/// assigned round-robin and all four regression targets recorded exactly as
/// constructed.
pub fn gen_toy(spec: &ToySpec, out_dir: &Path) -> Result<ToyStats> {
    spec.validate()?;
    let mut store = RecordStore::create(out_dir)?;
    let mut class_counts = [0usize; 5];
    for i in 0..spec.count {
        let class = ClassLabel::from_index(i % 5).unwrap();
        class_counts[class.index()] += 1;
        let mut record_rng = rng::seeded(rng::mix3(spec.seed, 0x707, i as u64));
        let params = draw_params(spec, class, &mut record_rng);
        let matrix = synth_matrix(&params, spec.noise_amplitude, &mut record_rng);
        let meta = RecordMeta {
            record_id: format!("toy-{i:05}"),
            class_label: Some(class.as_str().to_string()),
            hr_bpm: Some(params.hr_bpm),
            pr_ms: Some(params.pr_ms),
            qt_ms: Some(params.qt_ms),
            qrs_ms: Some(params.qrs_ms),
        };
        store.write_record(&matrix, &meta)?;
    }
    let stats = ToyStats {
        records: spec.count,
        class_counts,
        noise_amplitude: spec.noise_amplitude,
        label_noise_floor: 0.0,
    };
    let stats_path = out_dir.join(STATS_FILE);
    std::fs::write(&stats_path, stats.to_csv()).map_err(io_err(&stats_path))?;
    Ok(stats)
}
