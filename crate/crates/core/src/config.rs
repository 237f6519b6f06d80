//! Flat key-value configuration with sections, plus the FNV digest used to
//! stamp artifacts.
//!
//! Format:
//!
//! ```text
//! # comment
//! [section]
//! key = value
//! ```
//!
//! Section and key order are preserved so that rendering is canonical:
//! identical resolved configs produce identical digests.

use crate::{Error, Result};

/// Ordered sections of ordered key/value pairs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KvConfig {
    sections: Vec<(String, Vec<(String, String)>)>,
}

impl KvConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = KvConfig::default();
        let mut current: Option<usize> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| bad_line(lineno, raw, "unterminated section"))?
                    .trim();
                if name.is_empty() {
                    return Err(bad_line(lineno, raw, "empty section name"));
                }
                current = Some(cfg.section_index(name));
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad_line(lineno, raw, "expected key = value"))?;
            let section = current.ok_or_else(|| bad_line(lineno, raw, "key outside a section"))?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() {
                return Err(bad_line(lineno, raw, "empty key"));
            }
            cfg.set_at(section, &key, value);
        }
        Ok(cfg)
    }

    fn section_index(&mut self, name: &str) -> usize {
        if let Some(i) = self.sections.iter().position(|(n, _)| n == name) {
            return i;
        }
        self.sections.push((name.to_string(), Vec::new()));
        self.sections.len() - 1
    }

    fn set_at(&mut self, section: usize, key: &str, value: String) {
        let entries = &mut self.sections[section].1;
        match entries.iter_mut().find(|(k, _)| k == key) {
            Some((_, v)) => *v = value,
            None => entries.push((key.to_string(), value)),
        }
    }

    pub fn set(&mut self, section: &str, key: &str, value: impl ToString) {
        let i = self.section_index(section);
        self.set_at(i, key, value.to_string());
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections
            .iter()
            .find(|(n, _)| n == section)?
            .1
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn get_f64(&self, section: &str, key: &str) -> Result<Option<f64>> {
        self.get(section, key)
            .map(|v| {
                v.parse().map_err(|_| {
                    Error::ConfigInvalid(format!("[{section}] {key}: not a number: {v:?}"))
                })
            })
            .transpose()
    }

    pub fn get_u64(&self, section: &str, key: &str) -> Result<Option<u64>> {
        self.get(section, key)
            .map(|v| {
                v.parse().map_err(|_| {
                    Error::ConfigInvalid(format!("[{section}] {key}: not an integer: {v:?}"))
                })
            })
            .transpose()
    }

    pub fn get_usize(&self, section: &str, key: &str) -> Result<Option<usize>> {
        Ok(self.get_u64(section, key)?.map(|v| v as usize))
    }

    /// Canonical rendering; parsing it back yields an equal config.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (name, entries) in &self.sections {
            out.push_str(&format!("[{name}]\n"));
            for (k, v) in entries {
                out.push_str(&format!("{k} = {v}\n"));
            }
        }
        out
    }

    pub fn digest(&self) -> String {
        fnv1a_hex(self.render().as_bytes())
    }
}

/// 64-bit FNV-1a, hex encoded. Used to stamp artifacts with the config that
/// produced them.
pub fn fnv1a_hex(bytes: &[u8]) -> String {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x1000_0000_01b3);
    }
    format!("{hash:016x}")
}

fn bad_line(lineno: usize, line: &str, what: &str) -> Error {
    Error::ConfigInvalid(format!("line {}: {what}: {line:?}", lineno + 1))
}
