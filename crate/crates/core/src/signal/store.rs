//! Canonical binary record store.
//!
//! One file per record: magic `ECG8`, version u8, row count u32 LE, column
//! count u32 LE, then a row-major 32-bit little-endian float payload.
//! Record metadata lives in a sidecar CSV (`metadata.csv`) with columns
//! `record_id,class_label,hr_bpm,pr_ms,qt_ms,qrs_ms`; empty cells mark
//! unavailable targets. This one flat format decouples every downstream
//! module from both source datasets.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use super::{EcgMatrix, LEAD_COUNT, SAMPLES_PER_LEAD};
use crate::{error::io_err, Error, Result};

pub const STORE_MAGIC: [u8; 4] = *b"ECG8";
pub const STORE_VERSION: u8 = 1;
pub const METADATA_FILE: &str = "metadata.csv";
pub const RECORDS_DIR: &str = "records";
const METADATA_HEADER: &str = "record_id,class_label,hr_bpm,pr_ms,qt_ms,qrs_ms";

/// Metadata row accompanying a stored record. The class label is kept as the
/// raw string cell; the dataset layer parses it.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RecordMeta {
    pub record_id: String,
    pub class_label: Option<String>,
    pub hr_bpm: Option<f64>,
    pub pr_ms: Option<f64>,
    pub qt_ms: Option<f64>,
    pub qrs_ms: Option<f64>,
}

impl RecordMeta {
    fn to_csv_row(&self) -> String {
        fn cell(v: &Option<f64>) -> String {
            v.map(|x| x.to_string()).unwrap_or_default()
        }
        format!(
            "{},{},{},{},{},{}",
            self.record_id,
            self.class_label.as_deref().unwrap_or(""),
            cell(&self.hr_bpm),
            cell(&self.pr_ms),
            cell(&self.qt_ms),
            cell(&self.qrs_ms)
        )
    }

    fn from_csv_row(line: &str) -> Result<Self> {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 6 {
            return Err(Error::CorruptStore(format!(
                "metadata row has {} cells: {line:?}",
                cells.len()
            )));
        }
        fn num(cell: &str) -> Result<Option<f64>> {
            if cell.is_empty() {
                return Ok(None);
            }
            cell.parse()
                .map(Some)
                .map_err(|_| Error::CorruptStore(format!("bad numeric cell {cell:?}")))
        }
        Ok(RecordMeta {
            record_id: cells[0].to_string(),
            class_label: (!cells[1].is_empty()).then(|| cells[1].to_string()),
            hr_bpm: num(cells[2])?,
            pr_ms: num(cells[3])?,
            qt_ms: num(cells[4])?,
            qrs_ms: num(cells[5])?,
        })
    }
}

/// Write a bare matrix file (no metadata).
pub fn write_matrix(path: &Path, matrix: &EcgMatrix) -> Result<()> {
    let mut bytes =
        Vec::with_capacity(4 + 1 + 8 + 4 * LEAD_COUNT * SAMPLES_PER_LEAD);
    bytes.extend_from_slice(&STORE_MAGIC);
    bytes.push(STORE_VERSION);
    bytes.extend_from_slice(&(LEAD_COUNT as u32).to_le_bytes());
    bytes.extend_from_slice(&(SAMPLES_PER_LEAD as u32).to_le_bytes());
    for v in matrix.values() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    let mut file = fs::File::create(path).map_err(io_err(path))?;
    file.write_all(&bytes).map_err(io_err(path))
}

/// Read a bare matrix file, validating magic, version, shape, and range.
pub fn read_matrix(path: &Path) -> Result<EcgMatrix> {
    let mut bytes = Vec::new();
    fs::File::open(path)
        .map_err(io_err(path))?
        .read_to_end(&mut bytes)
        .map_err(io_err(path))?;
    if bytes.len() < 13 {
        return Err(Error::CorruptStore(format!("{}: truncated header", path.display())));
    }
    if bytes[0..4] != STORE_MAGIC {
        return Err(Error::CorruptStore(format!("{}: bad magic", path.display())));
    }
    if bytes[4] != STORE_VERSION {
        return Err(Error::CorruptStore(format!(
            "{}: unsupported version {}",
            path.display(),
            bytes[4]
        )));
    }
    let rows = u32::from_le_bytes(bytes[5..9].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(bytes[9..13].try_into().unwrap()) as usize;
    if rows != LEAD_COUNT || cols != SAMPLES_PER_LEAD {
        return Err(Error::CorruptStore(format!(
            "{}: shape {rows}x{cols}, expected {LEAD_COUNT}x{SAMPLES_PER_LEAD}",
            path.display()
        )));
    }
    let expected = 13 + 4 * rows * cols;
    if bytes.len() != expected {
        return Err(Error::CorruptStore(format!(
            "{}: payload length {} bytes, expected {expected}",
            path.display(),
            bytes.len()
        )));
    }
    let values: Vec<f32> = bytes[13..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    EcgMatrix::from_values(values)
        .map_err(|e| Error::CorruptStore(format!("{}: {e}", path.display())))
}

/// A dataset directory: `records/<id>.ecg8` files plus `metadata.csv`.
pub struct RecordStore {
    root: PathBuf,
}

impl RecordStore {
    /// Create a fresh store directory (the directory may exist but must not
    /// already contain a store).
    pub fn create(root: &Path) -> Result<Self> {
        let records = root.join(RECORDS_DIR);
        fs::create_dir_all(&records).map_err(io_err(&records))?;
        let meta = root.join(METADATA_FILE);
        fs::write(&meta, format!("{METADATA_HEADER}\n")).map_err(io_err(&meta))?;
        Ok(RecordStore { root: root.to_path_buf() })
    }

    pub fn open(root: &Path) -> Result<Self> {
        let meta = root.join(METADATA_FILE);
        if !meta.is_file() {
            return Err(Error::MissingArtifact(format!(
                "record store at {}",
                root.display()
            )));
        }
        Ok(RecordStore { root: root.to_path_buf() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn record_path(&self, record_id: &str) -> PathBuf {
        self.root.join(RECORDS_DIR).join(format!("{record_id}.ecg8"))
    }

    /// Persist one record: matrix file plus appended metadata row.
    pub fn write_record(&mut self, matrix: &EcgMatrix, meta: &RecordMeta) -> Result<()> {
        write_matrix(&self.record_path(&meta.record_id), matrix)?;
        let path = self.root.join(METADATA_FILE);
        let mut file = fs::OpenOptions::new()
            .append(true)
            .open(&path)
            .map_err(io_err(&path))?;
        writeln!(file, "{}", meta.to_csv_row()).map_err(io_err(&path))
    }

    /// Load one record and its metadata row.
    pub fn read_record(&self, record_id: &str) -> Result<(EcgMatrix, RecordMeta)> {
        let meta = self
            .read_meta_all()?
            .into_iter()
            .find(|m| m.record_id == record_id)
            .ok_or_else(|| Error::MissingArtifact(format!("record {record_id} metadata")))?;
        let matrix = read_matrix(&self.record_path(record_id))?;
        Ok((matrix, meta))
    }

    /// All metadata rows, in file order.
    pub fn read_meta_all(&self) -> Result<Vec<RecordMeta>> {
        let path = self.root.join(METADATA_FILE);
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h == METADATA_HEADER => {}
            other => {
                return Err(Error::CorruptStore(format!(
                    "bad metadata header: {other:?}"
                )))
            }
        }
        lines.map(RecordMeta::from_csv_row).collect()
    }

    pub fn read_matrix(&self, record_id: &str) -> Result<EcgMatrix> {
        read_matrix(&self.record_path(record_id))
    }
}
