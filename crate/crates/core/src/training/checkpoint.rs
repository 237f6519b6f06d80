//! Versioned binary checkpoints. A checkpoint embeds the model spec and
//! training config (as canonical config text), the run digest and seed, all
//! parameter and running-statistic tensors, the optimizer moments, and the
//! training history, so loading one reproduces the exact subsequent
//! trajectory on identical data order.

use std::fs;
use std::path::Path;

use super::fit::{EpochRow, History, TrainState};
use super::optim::Adam;
use super::schedule::TrainConfig;
use crate::config::KvConfig;
use crate::dataset::{RegressionParam, Task};
use crate::error::io_err;
use crate::model::{HeadKind, ModelSpec, Network};
use crate::{Error, Result};

const MAGIC: [u8; 4] = *b"ECKP";
const VERSION: u8 = 1;

pub fn save(path: &Path, state: &TrainState, run_digest: &str) -> Result<()> {
    fs::write(path, encode(state, run_digest)).map_err(io_err(path))
}

pub fn load(path: &Path) -> Result<(TrainState, String)> {
    if !path.is_file() {
        return Err(Error::MissingCheckpoint(path.to_path_buf()));
    }
    let bytes = fs::read(path).map_err(io_err(path))?;
    decode(&bytes).map_err(|e| match e {
        Error::CorruptStore(m) => Error::CorruptStore(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn encode(state: &TrainState, run_digest: &str) -> Vec<u8> {
    let mut cfg = KvConfig::default();
    state.network.spec.render_into(&mut cfg);
    state.config.render_into(&mut cfg);
    cfg.set("run", "task", task_str(state.task));
    cfg.set("run", "seed", state.seed);
    let config_text = cfg.render();

    let mut out = Vec::new();
    out.extend_from_slice(&MAGIC);
    out.push(VERSION);
    put_bytes(&mut out, run_digest.as_bytes());
    put_bytes(&mut out, config_text.as_bytes());
    out.extend_from_slice(&state.epoch.to_le_bytes());
    out.extend_from_slice(&state.best_val_metric.to_le_bytes());
    out.extend_from_slice(&state.best_epoch.to_le_bytes());
    out.extend_from_slice(&state.epochs_since_improvement.to_le_bytes());
    out.extend_from_slice(&state.optimizer.step_count.to_le_bytes());
    out.extend_from_slice(&state.seed.to_le_bytes());

    let flags: Vec<u8> = state
        .network
        .enumerate_layers()
        .iter()
        .map(|i| i.trainable as u8)
        .collect();
    put_bytes(&mut out, &flags);

    put_tensors(&mut out, state.network.param_tensors().iter().map(|p| p.data.as_slice()));
    put_tensors(&mut out, state.network.state_tensors().iter().map(|v| v.as_slice()));
    put_tensors(&mut out, state.optimizer.m.iter().map(|v| v.as_slice()));
    put_tensors(&mut out, state.optimizer.v.iter().map(|v| v.as_slice()));

    put_bytes(&mut out, state.history.val_metric_name.as_bytes());
    out.extend_from_slice(&(state.history.rows.len() as u32).to_le_bytes());
    for row in &state.history.rows {
        out.extend_from_slice(&row.epoch.to_le_bytes());
        out.extend_from_slice(&row.train_loss.to_le_bytes());
        out.extend_from_slice(&row.val_metric.to_le_bytes());
        out.extend_from_slice(&row.lr.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<(TrainState, String)> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(Error::CorruptStore("bad checkpoint magic".into()));
    }
    let version = r.u8()?;
    if version != VERSION {
        return Err(Error::CorruptStore(format!(
            "unsupported checkpoint version {version}"
        )));
    }
    let digest = String::from_utf8(r.bytes_field()?.to_vec())
        .map_err(|_| Error::CorruptStore("digest is not utf-8".into()))?;
    let config_text = String::from_utf8(r.bytes_field()?.to_vec())
        .map_err(|_| Error::CorruptStore("config is not utf-8".into()))?;
    let cfg = KvConfig::parse(&config_text)?;
    let task = parse_task(cfg.get("run", "task").unwrap_or_default())?;
    let head = match task {
        Task::Classification => HeadKind::Classification(crate::dataset::CLASS_COUNT),
        Task::Regression(_) => HeadKind::Regression,
    };
    let spec = ModelSpec::parse_from(&cfg, head)?;
    let train_config = TrainConfig::parse_from(&cfg)?;

    let epoch = r.u32()?;
    let best_val_metric = r.f64()?;
    let best_epoch = r.u32()?;
    let epochs_since_improvement = r.u32()?;
    let adam_step = r.u64()?;
    let seed = r.u64()?;
    let flags = r.bytes_field()?.to_vec();

    let mut network = Network::build(&spec, 0)?;
    if flags.len() != network.leaf_count() {
        return Err(Error::CorruptStore(format!(
            "{} trainable flags for {} leaf layers",
            flags.len(),
            network.leaf_count()
        )));
    }
    for (i, &f) in flags.iter().enumerate() {
        network.set_leaf_trainable(i, f != 0)?;
    }

    let params = r.tensors()?;
    {
        let mut slots = network.param_tensors_mut();
        fill(&mut slots.iter_mut().map(|(p, _)| &mut p.data), params, "parameter")?;
    }
    let states = r.tensors()?;
    fill(
        &mut network.state_tensors_mut().into_iter(),
        states,
        "state",
    )?;

    let mut optimizer = Adam::new(
        &network,
        train_config.beta1,
        train_config.beta2,
        train_config.epsilon,
    );
    optimizer.step_count = adam_step;
    let m = r.tensors()?;
    fill(&mut optimizer.m.iter_mut(), m, "first moment")?;
    let v = r.tensors()?;
    fill(&mut optimizer.v.iter_mut(), v, "second moment")?;

    let val_metric_name = String::from_utf8(r.bytes_field()?.to_vec())
        .map_err(|_| Error::CorruptStore("metric name is not utf-8".into()))?;
    let row_count = r.u32()? as usize;
    let mut rows = Vec::with_capacity(row_count);
    for _ in 0..row_count {
        rows.push(EpochRow {
            epoch: r.u32()?,
            train_loss: r.f64()?,
            val_metric: r.f64()?,
            lr: r.f64()?,
        });
    }
    if r.pos != bytes.len() {
        return Err(Error::CorruptStore("trailing bytes".into()));
    }

    Ok((
        TrainState {
            network,
            optimizer,
            task,
            config: train_config,
            seed,
            epoch,
            best_val_metric,
            best_epoch,
            epochs_since_improvement,
            history: History {
                rows,
                val_metric_name,
            },
        },
        digest,
    ))
}

fn task_str(task: Task) -> String {
    match task {
        Task::Classification => "classification".into(),
        Task::Regression(p) => format!("regression:{}", p.key()),
    }
}

fn parse_task(s: &str) -> Result<Task> {
    if s == "classification" {
        return Ok(Task::Classification);
    }
    if let Some(p) = s.strip_prefix("regression:") {
        return Ok(Task::Regression(p.parse::<RegressionParam>()?));
    }
    Err(Error::CorruptStore(format!("unknown task {s:?}")))
}

fn put_bytes(out: &mut Vec<u8>, bytes: &[u8]) {
    out.extend_from_slice(&(bytes.len() as u32).to_le_bytes());
    out.extend_from_slice(bytes);
}

fn put_tensors<'a>(out: &mut Vec<u8>, tensors: impl Iterator<Item = &'a [f64]>) {
    let tensors: Vec<&[f64]> = tensors.collect();
    out.extend_from_slice(&(tensors.len() as u32).to_le_bytes());
    for t in tensors {
        out.extend_from_slice(&(t.len() as u32).to_le_bytes());
        for v in t {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
}

fn fill(
    slots: &mut dyn Iterator<Item = &mut Vec<f64>>,
    tensors: Vec<Vec<f64>>,
    what: &str,
) -> Result<()> {
    let slots: Vec<&mut Vec<f64>> = slots.collect();
    if slots.len() != tensors.len() {
        return Err(Error::CorruptStore(format!(
            "{what} tensor count {} does not match the architecture ({})",
            tensors.len(),
            slots.len()
        )));
    }
    for (slot, tensor) in slots.into_iter().zip(tensors) {
        if slot.len() != tensor.len() {
            return Err(Error::CorruptStore(format!(
                "{what} tensor length {} does not match the architecture ({})",
                tensor.len(),
                slot.len()
            )));
        }
        *slot = tensor;
    }
    Ok(())
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::CorruptStore("truncated checkpoint".into()));
        }
        let slice = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn bytes_field(&mut self) -> Result<&'a [u8]> {
        let len = self.u32()? as usize;
        self.take(len)
    }

    fn tensors(&mut self) -> Result<Vec<Vec<f64>>> {
        let count = self.u32()? as usize;
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            let len = self.u32()? as usize;
            let mut t = Vec::with_capacity(len);
            for _ in 0..len {
                t.push(self.f64()?);
            }
            out.push(t);
        }
        Ok(out)
    }
}
