//! Deterministic splitting: stratified halving into Sets A and B, then
//! per-class 70/10/20 train/validation/test partitions. Assignments are
//! persisted as a manifest CSV so every experiment is replayable.

use std::collections::BTreeMap;
use std::fmt;

use super::labels::ClassLabel;
use crate::config::fnv1a_hex;
use crate::{rng, Error, Result};

/// Partition names. Real data uses the A-*/B-* names; synthetic data the
/// unprefixed ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Assignment {
    ATrain,
    AVal,
    ATest,
    BTrain,
    BVal,
    BTest,
    Train,
    Val,
    Test,
}

impl Assignment {
    pub const ALL: [Assignment; 9] = [
        Assignment::ATrain,
        Assignment::AVal,
        Assignment::ATest,
        Assignment::BTrain,
        Assignment::BVal,
        Assignment::BTest,
        Assignment::Train,
        Assignment::Val,
        Assignment::Test,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Assignment::ATrain => "A-train",
            Assignment::AVal => "A-val",
            Assignment::ATest => "A-test",
            Assignment::BTrain => "B-train",
            Assignment::BVal => "B-val",
            Assignment::BTest => "B-test",
            Assignment::Train => "train",
            Assignment::Val => "val",
            Assignment::Test => "test",
        }
    }
}

impl std::str::FromStr for Assignment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| Error::ConfigInvalid(format!("unknown assignment {s:?}")))
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A complete, deterministic partition of record ids.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitAssignment {
    pub seed: u64,
    /// Sorted by record id; every id appears exactly once.
    pub assignments: Vec<(String, Assignment)>,
}

impl SplitAssignment {
    pub fn ids_in(&self, part: Assignment) -> Vec<&str> {
        self.assignments
            .iter()
            .filter(|(_, a)| *a == part)
            .map(|(id, _)| id.as_str())
            .collect()
    }

    /// Manifest CSV: `record_id,assignment,seed`, rows sorted by record id.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("record_id,assignment,seed\n");
        for (id, a) in &self.assignments {
            out.push_str(&format!("{id},{a},{}\n", self.seed));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some("record_id,assignment,seed") => {}
            other => {
                return Err(Error::ConfigInvalid(format!(
                    "bad manifest header: {other:?}"
                )))
            }
        }
        let mut seed = None;
        let mut assignments = Vec::new();
        for line in lines {
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != 3 {
                return Err(Error::ConfigInvalid(format!("bad manifest row: {line:?}")));
            }
            let row_seed: u64 = cells[2]
                .parse()
                .map_err(|_| Error::ConfigInvalid(format!("bad seed cell {:?}", cells[2])))?;
            match seed {
                None => seed = Some(row_seed),
                Some(s) if s == row_seed => {}
                Some(s) => {
                    return Err(Error::ConfigInvalid(format!(
                        "manifest mixes seeds {s} and {row_seed}"
                    )))
                }
            }
            assignments.push((cells[0].to_string(), cells[1].parse()?));
        }
        let seed = seed.ok_or_else(|| Error::ConfigInvalid("empty manifest".into()))?;
        Ok(SplitAssignment { seed, assignments })
    }

    /// Digest of the manifest bytes; baseline and transfer runs must agree on it.
    pub fn digest(&self) -> String {
        fnv1a_hex(self.to_csv().as_bytes())
    }

    /// True when the manifest uses the real-data A/B partition names.
    pub fn is_real(&self) -> bool {
        self.assignments
            .iter()
            .any(|(_, a)| matches!(a, Assignment::ATrain | Assignment::BTrain))
    }
}

/// Outcome of the stratified halving. `warnings` lists classes too small to
/// land in both halves.
#[derive(Debug)]
pub struct Halves {
    pub set_a: Vec<String>,
    pub set_b: Vec<String>,
    pub warnings: Vec<String>,
}

/// Split labeled ids into two halves with a balanced class distribution:
/// within each class the ids are shuffled by a seeded RNG and divided as
/// evenly as possible (Set A takes the odd record when counts are odd).
pub fn stratified_halves(records: &[(String, ClassLabel)], seed: u64) -> Halves {
    let mut rng = rng::seeded(rng::mix(seed, 0xA17));
    let mut set_a = Vec::new();
    let mut set_b = Vec::new();
    let mut warnings = Vec::new();
    for class in ClassLabel::ALL {
        let mut ids: Vec<&String> = records
            .iter()
            .filter(|(_, c)| *c == class)
            .map(|(id, _)| id)
            .collect();
        ids.sort();
        rng::shuffle(&mut rng, &mut ids);
        if ids.len() < 2 {
            warnings.push(format!(
                "class {class} has {} records; halves cannot both contain it",
                ids.len()
            ));
        }
        let a_size = ids.len().div_ceil(2);
        for (i, id) in ids.into_iter().enumerate() {
            if i < a_size {
                set_a.push(id.clone());
            } else {
                set_b.push(id.clone());
            }
        }
    }
    Halves {
        set_a,
        set_b,
        warnings,
    }
}

/// A 70/10/20 partition of record ids.
#[derive(Debug, Clone, PartialEq)]
pub struct Tvt {
    pub train: Vec<String>,
    pub val: Vec<String>,
    pub test: Vec<String>,
}

/// 70/10/20 split: seeded shuffle, then floor each share and hand leftover
/// records to train, then val, then test, in that priority. Labeled inputs
/// are split per class; unlabeled inputs globally.
pub fn split_tvt(records: &[(String, Option<ClassLabel>)], seed: u64) -> Tvt {
    let mut groups: Vec<Vec<&String>> = Vec::new();
    if records.iter().all(|(_, c)| c.is_some()) {
        for class in ClassLabel::ALL {
            groups.push(
                records
                    .iter()
                    .filter(|(_, c)| *c == Some(class))
                    .map(|(id, _)| id)
                    .collect(),
            );
        }
    } else {
        groups.push(records.iter().map(|(id, _)| id).collect());
    }

    let mut rng = rng::seeded(rng::mix(seed, 0x712));
    let mut out = Tvt {
        train: Vec::new(),
        val: Vec::new(),
        test: Vec::new(),
    };
    for mut ids in groups {
        ids.sort();
        rng::shuffle(&mut rng, &mut ids);
        let n = ids.len();
        let mut sizes = [n * 7 / 10, n / 10, n * 2 / 10];
        let mut leftover = n - sizes.iter().sum::<usize>();
        for s in sizes.iter_mut() {
            if leftover == 0 {
                break;
            }
            *s += 1;
            leftover -= 1;
        }
        let mut iter = ids.into_iter();
        out.train.extend(iter.by_ref().take(sizes[0]).cloned());
        out.val.extend(iter.by_ref().take(sizes[1]).cloned());
        out.test.extend(iter.cloned());
    }
    out
}

/// Full real-data assignment: stratified halving, then a per-class 70/10/20
/// split inside each half. Returns the manifest plus halving warnings.
pub fn assign_real(records: &[(String, ClassLabel)], seed: u64) -> (SplitAssignment, Vec<String>) {
    let halves = stratified_halves(records, seed);
    let class_of: BTreeMap<&str, ClassLabel> = records
        .iter()
        .map(|(id, c)| (id.as_str(), *c))
        .collect();
    let labeled = |ids: &[String]| -> Vec<(String, Option<ClassLabel>)> {
        ids.iter()
            .map(|id| (id.clone(), Some(class_of[id.as_str()])))
            .collect()
    };
    let tvt_a = split_tvt(&labeled(&halves.set_a), rng::mix(seed, 1));
    let tvt_b = split_tvt(&labeled(&halves.set_b), rng::mix(seed, 2));

    let mut assignments = Vec::with_capacity(records.len());
    for (ids, part) in [
        (&tvt_a.train, Assignment::ATrain),
        (&tvt_a.val, Assignment::AVal),
        (&tvt_a.test, Assignment::ATest),
        (&tvt_b.train, Assignment::BTrain),
        (&tvt_b.val, Assignment::BVal),
        (&tvt_b.test, Assignment::BTest),
    ] {
        assignments.extend(ids.iter().map(|id| (id.clone(), part)));
    }
    assignments.sort();
    (
        SplitAssignment { seed, assignments },
        halves.warnings,
    )
}

/// Synthetic-data assignment: one global 70/10/20 split.
pub fn assign_synthetic(ids: &[String], seed: u64) -> SplitAssignment {
    let unlabeled: Vec<(String, Option<ClassLabel>)> =
        ids.iter().map(|id| (id.clone(), None)).collect();
    let tvt = split_tvt(&unlabeled, seed);
    let mut assignments = Vec::with_capacity(ids.len());
    for (ids, part) in [
        (&tvt.train, Assignment::Train),
        (&tvt.val, Assignment::Val),
        (&tvt.test, Assignment::Test),
    ] {
        assignments.extend(ids.iter().map(|id| (id.clone(), part)));
    }
    assignments.sort();
    SplitAssignment { seed, assignments }
}

/// Per-class record counts per partition, as CSV.
pub fn split_stats_csv(
    records: &[(String, Option<ClassLabel>)],
    assignment: &SplitAssignment,
) -> String {
    let class_of: BTreeMap<&str, Option<ClassLabel>> = records
        .iter()
        .map(|(id, c)| (id.as_str(), *c))
        .collect();
    let mut counts: BTreeMap<&'static str, [usize; 6]> = BTreeMap::new();
    // columns: class, then one count per partition present in the manifest
    let parts: Vec<Assignment> = Assignment::ALL
        .iter()
        .copied()
        .filter(|p| assignment.assignments.iter().any(|(_, a)| a == p))
        .collect();
    for (id, part) in &assignment.assignments {
        let class = class_of
            .get(id.as_str())
            .copied()
            .flatten()
            .map(|c| c.as_str())
            .unwrap_or("-");
        let slot = parts.iter().position(|p| p == part).unwrap();
        counts.entry(class).or_default()[slot] += 1;
    }
    let mut out = String::from("class");
    for p in &parts {
        out.push(',');
        out.push_str(p.as_str());
    }
    out.push('\n');
    for (class, row) in counts {
        out.push_str(class);
        for count in row.iter().take(parts.len()) {
            out.push_str(&format!(",{count}"));
        }
        out.push('\n');
    }
    out
}
