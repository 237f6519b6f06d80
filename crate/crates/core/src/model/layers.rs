//! Feed-forward layers of the 1D-CNN stack. Every layer caches what its
//! backward pass needs during a train-mode forward; backward consumes the
//! cache and accumulates parameter gradients (unless the layer is frozen)
//! while returning the input gradient.
//!
//! Loop and reduction order is fixed everywhere: rayon only ever splits work
//! across disjoint output slices, so results are bit-identical regardless of
//! thread scheduling.

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::tensor::{Tensor2, Tensor3};
use crate::rng;

pub const BN_EPS: f64 = 1e-5;
pub const BN_MOMENTUM: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// A parameter tensor with its gradient accumulator.
#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub data: Vec<f64>,
    pub grad: Vec<f64>,
}

impl Param {
    pub fn new(data: Vec<f64>) -> Self {
        let grad = vec![0.0; data.len()];
        Param { data, grad }
    }

    pub fn zeros(len: usize) -> Self {
        Param::new(vec![0.0; len])
    }

    pub fn zero_grad(&mut self) {
        self.grad.iter_mut().for_each(|g| *g = 0.0);
    }
}

/// Uniform fan-in init: U(-1/sqrt(fan_in), 1/sqrt(fan_in)), sampled in data
/// order so initialization is deterministic given the stream.
pub fn init_uniform(rng: &mut ChaCha8Rng, len: usize, fan_in: usize) -> Vec<f64> {
    let bound = 1.0 / (fan_in as f64).sqrt();
    (0..len).map(|_| rng::uniform_in(rng, -bound, bound)).collect()
}

// ---------------------------------------------------------------------------
// Conv1d
// ---------------------------------------------------------------------------

/// 1D convolution with "same" padding (odd kernel), weight layout
/// `[out_ch][in_ch][k]`.
#[derive(Debug, Clone)]
pub struct Conv1d {
    pub in_ch: usize,
    pub out_ch: usize,
    pub kernel: usize,
    pub weight: Param,
    pub bias: Param,
    pub trainable: bool,
    cache: Option<Tensor3>,
}

impl Conv1d {
    pub fn new(rng: &mut ChaCha8Rng, in_ch: usize, out_ch: usize, kernel: usize) -> Self {
        assert!(kernel % 2 == 1, "kernel must be odd for same padding");
        let weight = Param::new(init_uniform(rng, out_ch * in_ch * kernel, in_ch * kernel));
        Conv1d {
            in_ch,
            out_ch,
            kernel,
            weight,
            bias: Param::zeros(out_ch),
            trainable: true,
            cache: None,
        }
    }

    #[inline]
    fn w(&self, oc: usize, ic: usize) -> &[f64] {
        let start = (oc * self.in_ch + ic) * self.kernel;
        &self.weight.data[start..start + self.kernel]
    }

    pub fn forward(&mut self, x: &Tensor3, mode: Mode) -> Tensor3 {
        let pad = (self.kernel - 1) / 2;
        let (batch, len) = (x.batch, x.len);
        let mut out = Tensor3::zeros(batch, self.out_ch, len);
        let out_ch = self.out_ch;
        // one output row (b, oc) per chunk; inner order fixed
        out.data
            .par_chunks_mut(len)
            .enumerate()
            .for_each(|(row, dst)| {
                let (b, oc) = (row / out_ch, row % out_ch);
                dst.iter_mut().for_each(|v| *v = self.bias.data[oc]);
                for ic in 0..self.in_ch {
                    let src = x.row(b, ic);
                    let w = self.w(oc, ic);
                    for (k, &wk) in w.iter().enumerate() {
                        let shift = k as isize - pad as isize;
                        let t0 = (-shift).max(0) as usize;
                        let t1 = (len as isize - shift).min(len as isize) as usize;
                        let xs = &src[(t0 as isize + shift) as usize
                            ..(t1 as isize + shift) as usize];
                        for (d, &s) in dst[t0..t1].iter_mut().zip(xs) {
                            *d += wk * s;
                        }
                    }
                }
            });
        if mode == Mode::Train {
            self.cache = Some(x.clone());
        }
        out
    }

    pub fn backward(&mut self, gout: &Tensor3) -> Tensor3 {
        let x = self.cache.take().expect("conv backward without forward");
        let pad = (self.kernel - 1) / 2;
        let (batch, len) = (x.batch, x.len);
        let in_ch = self.in_ch;
        let out_ch = self.out_ch;
        let kernel = self.kernel;

        let mut gin = Tensor3::zeros(batch, in_ch, len);
        gin.data
            .par_chunks_mut(len)
            .enumerate()
            .for_each(|(row, dst)| {
                let (b, ic) = (row / in_ch, row % in_ch);
                for oc in 0..out_ch {
                    let g = gout.row(b, oc);
                    let w = self.w(oc, ic);
                    for (k, &wk) in w.iter().enumerate() {
                        // x[t + shift] fed out[t]  =>  gin[u] += w * gout[u - shift]
                        let shift = k as isize - pad as isize;
                        let u0 = shift.max(0) as usize;
                        let u1 = (len as isize + shift).min(len as isize) as usize;
                        let gs = &g[(u0 as isize - shift) as usize
                            ..(u1 as isize - shift) as usize];
                        for (d, &s) in dst[u0..u1].iter_mut().zip(gs) {
                            *d += wk * s;
                        }
                    }
                }
            });

        if self.trainable {
            let weight_grad = &mut self.weight.grad;
            weight_grad
                .par_chunks_mut(in_ch * kernel)
                .enumerate()
                .for_each(|(oc, wg)| {
                    for b in 0..batch {
                        let g = gout.row(b, oc);
                        for ic in 0..in_ch {
                            let src = x.row(b, ic);
                            for k in 0..kernel {
                                let shift = k as isize - pad as isize;
                                let t0 = (-shift).max(0) as usize;
                                let t1 = (len as isize - shift).min(len as isize) as usize;
                                let xs = &src[(t0 as isize + shift) as usize
                                    ..(t1 as isize + shift) as usize];
                                let mut acc = 0.0;
                                for (&gv, &xv) in g[t0..t1].iter().zip(xs) {
                                    acc += gv * xv;
                                }
                                wg[ic * kernel + k] += acc;
                            }
                        }
                    }
                });
            for oc in 0..out_ch {
                let mut acc = 0.0;
                for b in 0..batch {
                    for &gv in gout.row(b, oc) {
                        acc += gv;
                    }
                }
                self.bias.grad[oc] += acc;
            }
        }
        gin
    }
}

// ---------------------------------------------------------------------------
// MaxPool1d
// ---------------------------------------------------------------------------

/// Max pooling with floor semantics; trailing samples that do not fill a
/// window are dropped. Ties resolve to the earliest index.
#[derive(Debug, Clone)]
pub struct MaxPool1d {
    pub size: usize,
    cache: Option<(usize, usize, usize, Vec<u32>)>, // (batch, channels, in_len, argmax)
}

impl MaxPool1d {
    pub fn new(size: usize) -> Self {
        assert!(size > 0);
        MaxPool1d { size, cache: None }
    }

    pub fn out_len(&self, in_len: usize) -> usize {
        in_len / self.size
    }

    pub fn forward(&mut self, x: &Tensor3, mode: Mode) -> Tensor3 {
        let out_len = self.out_len(x.len);
        let mut out = Tensor3::zeros(x.batch, x.channels, out_len);
        let mut argmax = vec![0u32; x.batch * x.channels * out_len];
        for b in 0..x.batch {
            for c in 0..x.channels {
                let src = x.row(b, c);
                let base = (b * x.channels + c) * out_len;
                let dst = out.row_mut(b, c);
                for (o, d) in dst.iter_mut().enumerate() {
                    let start = o * self.size;
                    let mut best = src[start];
                    let mut best_t = start;
                    for (dt, &v) in src[start..start + self.size].iter().enumerate() {
                        if v > best {
                            best = v;
                            best_t = start + dt;
                        }
                    }
                    *d = best;
                    argmax[base + o] = best_t as u32;
                }
            }
        }
        if mode == Mode::Train {
            self.cache = Some((x.batch, x.channels, x.len, argmax));
        }
        out
    }

    pub fn backward(&mut self, gout: &Tensor3) -> Tensor3 {
        let (batch, channels, in_len, argmax) =
            self.cache.take().expect("pool backward without forward");
        let mut gin = Tensor3::zeros(batch, channels, in_len);
        for b in 0..batch {
            for c in 0..channels {
                let base = (b * channels + c) * gout.len;
                let g = gout.row(b, c);
                let dst = gin.row_mut(b, c);
                for (o, &gv) in g.iter().enumerate() {
                    dst[argmax[base + o] as usize] += gv;
                }
            }
        }
        gin
    }
}

// ---------------------------------------------------------------------------
// BatchNorm1d
// ---------------------------------------------------------------------------

/// Per-channel batch normalization over (batch, time). Train mode normalizes
/// with batch statistics and updates the running estimates (unbiased variance,
/// momentum 0.1); eval mode uses the stored running statistics.
#[derive(Debug, Clone)]
pub struct BatchNorm1d {
    pub channels: usize,
    pub gamma: Param,
    pub beta: Param,
    pub running_mean: Vec<f64>,
    pub running_var: Vec<f64>,
    pub trainable: bool,
    cache: Option<BnCache>,
}

#[derive(Debug, Clone)]
struct BnCache {
    xhat: Tensor3,
    inv_std: Vec<f64>,
}

impl BatchNorm1d {
    pub fn new(channels: usize) -> Self {
        BatchNorm1d {
            channels,
            gamma: Param::new(vec![1.0; channels]),
            beta: Param::zeros(channels),
            running_mean: vec![0.0; channels],
            running_var: vec![1.0; channels],
            trainable: true,
            cache: None,
        }
    }

    #[allow(clippy::needless_range_loop)]
    pub fn forward(&mut self, x: &Tensor3, mode: Mode) -> Tensor3 {
        let mut out = Tensor3::zeros(x.batch, x.channels, x.len);
        match mode {
            Mode::Eval => {
                for c in 0..self.channels {
                    let inv = 1.0 / (self.running_var[c] + BN_EPS).sqrt();
                    let mean = self.running_mean[c];
                    let (g, be) = (self.gamma.data[c], self.beta.data[c]);
                    for b in 0..x.batch {
                        let src = x.row(b, c);
                        let dst = out.row_mut(b, c);
                        for (d, &v) in dst.iter_mut().zip(src) {
                            *d = g * (v - mean) * inv + be;
                        }
                    }
                }
                out
            }
            Mode::Train => {
                let n = (x.batch * x.len) as f64;
                let mut xhat = Tensor3::zeros(x.batch, x.channels, x.len);
                let mut inv_std = vec![0.0; self.channels];
                for c in 0..self.channels {
                    let mut sum = 0.0;
                    for b in 0..x.batch {
                        for &v in x.row(b, c) {
                            sum += v;
                        }
                    }
                    let mean = sum / n;
                    let mut var_sum = 0.0;
                    for b in 0..x.batch {
                        for &v in x.row(b, c) {
                            let d = v - mean;
                            var_sum += d * d;
                        }
                    }
                    let var = var_sum / n;
                    let inv = 1.0 / (var + BN_EPS).sqrt();
                    inv_std[c] = inv;
                    let (g, be) = (self.gamma.data[c], self.beta.data[c]);
                    for b in 0..x.batch {
                        let src = x.row(b, c);
                        let xh = xhat.row_mut(b, c);
                        let dst = out.row_mut(b, c);
                        for ((d, h), &v) in dst.iter_mut().zip(xh.iter_mut()).zip(src) {
                            *h = (v - mean) * inv;
                            *d = g * *h + be;
                        }
                    }
                    // running stats track the unbiased batch variance
                    let unbiased = if n > 1.0 { var_sum / (n - 1.0) } else { var };
                    self.running_mean[c] =
                        (1.0 - BN_MOMENTUM) * self.running_mean[c] + BN_MOMENTUM * mean;
                    self.running_var[c] =
                        (1.0 - BN_MOMENTUM) * self.running_var[c] + BN_MOMENTUM * unbiased;
                }
                self.cache = Some(BnCache { xhat, inv_std });
                out
            }
        }
    }

    #[allow(clippy::needless_range_loop)]
    pub fn backward(&mut self, gout: &Tensor3) -> Tensor3 {
        let BnCache { xhat, inv_std } =
            self.cache.take().expect("batchnorm backward without forward");
        let n = (gout.batch * gout.len) as f64;
        let mut gin = Tensor3::zeros(gout.batch, gout.channels, gout.len);
        for c in 0..self.channels {
            let mut sum_g = 0.0;
            let mut sum_gx = 0.0;
            for b in 0..gout.batch {
                let g = gout.row(b, c);
                let xh = xhat.row(b, c);
                for (&gv, &hv) in g.iter().zip(xh) {
                    sum_g += gv;
                    sum_gx += gv * hv;
                }
            }
            if self.trainable {
                self.beta.grad[c] += sum_g;
                self.gamma.grad[c] += sum_gx;
            }
            let gamma = self.gamma.data[c];
            let mean_g = sum_g / n;
            let mean_gx = sum_gx / n;
            let scale = gamma * inv_std[c];
            for b in 0..gout.batch {
                let g = gout.row(b, c);
                let xh = xhat.row(b, c);
                let dst = gin.row_mut(b, c);
                for ((d, &gv), &hv) in dst.iter_mut().zip(g).zip(xh) {
                    *d = scale * (gv - mean_g - hv * mean_gx);
                }
            }
        }
        gin
    }
}

// ---------------------------------------------------------------------------
// ReLU (sequence and flat variants share the mask representation)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct Relu {
    mask: Option<Vec<bool>>,
}

impl Default for Relu {
    fn default() -> Self {
        Relu::new()
    }
}

impl Relu {
    pub fn new() -> Self {
        Relu { mask: None }
    }

    pub fn forward_data(&mut self, data: &mut [f64], mode: Mode) {
        if mode == Mode::Train {
            let mask: Vec<bool> = data.iter().map(|&v| v > 0.0).collect();
            for (v, &keep) in data.iter_mut().zip(&mask) {
                if !keep {
                    *v = 0.0;
                }
            }
            self.mask = Some(mask);
        } else {
            for v in data.iter_mut() {
                if *v < 0.0 {
                    *v = 0.0;
                }
            }
        }
    }

    pub fn backward_data(&mut self, grad: &mut [f64]) {
        let mask = self.mask.take().expect("relu backward without forward");
        for (g, keep) in grad.iter_mut().zip(mask) {
            if !keep {
                *g = 0.0;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Flatten
// ---------------------------------------------------------------------------

/// Reshape `[b, c, l]` into `[b, c*l]`; the per-sample data is already
/// contiguous so this is a relabeling.
#[derive(Debug, Clone)]
pub struct Flatten {
    cache: Option<(usize, usize)>, // (channels, len)
}

impl Default for Flatten {
    fn default() -> Self {
        Flatten::new()
    }
}

impl Flatten {
    pub fn new() -> Self {
        Flatten { cache: None }
    }

    pub fn forward(&mut self, x: Tensor3, mode: Mode) -> Tensor2 {
        if mode == Mode::Train {
            self.cache = Some((x.channels, x.len));
        }
        Tensor2 {
            rows: x.batch,
            cols: x.channels * x.len,
            data: x.data,
        }
    }

    pub fn backward(&mut self, gout: Tensor2) -> Tensor3 {
        let (channels, len) = self.cache.take().expect("flatten backward without forward");
        Tensor3 {
            batch: gout.rows,
            channels,
            len,
            data: gout.data,
        }
    }
}

// ---------------------------------------------------------------------------
// Linear
// ---------------------------------------------------------------------------

/// Fully connected layer, weight layout `[out][in]`.
#[derive(Debug, Clone)]
pub struct Linear {
    pub in_features: usize,
    pub out_features: usize,
    pub weight: Param,
    pub bias: Param,
    pub trainable: bool,
    cache: Option<Tensor2>,
}

impl Linear {
    pub fn new(rng: &mut ChaCha8Rng, in_features: usize, out_features: usize) -> Self {
        Linear {
            in_features,
            out_features,
            weight: Param::new(init_uniform(rng, out_features * in_features, in_features)),
            bias: Param::zeros(out_features),
            trainable: true,
            cache: None,
        }
    }

    pub fn forward(&mut self, x: &Tensor2, mode: Mode) -> Tensor2 {
        let mut out = Tensor2::zeros(x.rows, self.out_features);
        let out_features = self.out_features;
        let in_features = self.in_features;
        out.data
            .par_chunks_mut(out_features)
            .enumerate()
            .for_each(|(r, dst)| {
                let src = x.row(r);
                for (o, d) in dst.iter_mut().enumerate() {
                    let w = &self.weight.data[o * in_features..(o + 1) * in_features];
                    let mut acc = self.bias.data[o];
                    for (&wv, &xv) in w.iter().zip(src) {
                        acc += wv * xv;
                    }
                    *d = acc;
                }
            });
        if mode == Mode::Train {
            self.cache = Some(x.clone());
        }
        out
    }

    pub fn backward(&mut self, gout: &Tensor2) -> Tensor2 {
        let x = self.cache.take().expect("linear backward without forward");
        let in_features = self.in_features;
        let out_features = self.out_features;

        let mut gin = Tensor2::zeros(x.rows, in_features);
        gin.data
            .par_chunks_mut(in_features)
            .enumerate()
            .for_each(|(r, dst)| {
                let g = gout.row(r);
                for (o, &gv) in g.iter().enumerate() {
                    let w = &self.weight.data[o * in_features..(o + 1) * in_features];
                    for (d, &wv) in dst.iter_mut().zip(w) {
                        *d += gv * wv;
                    }
                }
            });

        if self.trainable {
            self.weight
                .grad
                .par_chunks_mut(in_features)
                .enumerate()
                .for_each(|(o, wg)| {
                    for r in 0..x.rows {
                        let gv = gout.row(r)[o];
                        if gv != 0.0 {
                            for (d, &xv) in wg.iter_mut().zip(x.row(r)) {
                                *d += gv * xv;
                            }
                        }
                    }
                });
            for o in 0..out_features {
                let mut acc = 0.0;
                for r in 0..x.rows {
                    acc += gout.row(r)[o];
                }
                self.bias.grad[o] += acc;
            }
        }
        gin
    }
}

// ---------------------------------------------------------------------------
// Dropout
// ---------------------------------------------------------------------------

/// Inverted dropout: in train mode each element is kept with probability
/// 1 - rate and scaled by 1/(1 - rate); eval mode is the identity.
#[derive(Debug, Clone)]
pub struct Dropout {
    pub rate: f64,
    mask: Option<Vec<f64>>,
}

impl Dropout {
    pub fn new(rate: f64) -> Self {
        assert!((0.0..1.0).contains(&rate));
        Dropout { rate, mask: None }
    }

    pub fn forward_data(&mut self, data: &mut [f64], mode: Mode, rng: &mut ChaCha8Rng) {
        if mode == Mode::Eval || self.rate == 0.0 {
            if mode == Mode::Train {
                self.mask = None;
            }
            return;
        }
        let scale = 1.0 / (1.0 - self.rate);
        let mask: Vec<f64> = data
            .iter()
            .map(|_| {
                if rng::uniform(rng) < self.rate {
                    0.0
                } else {
                    scale
                }
            })
            .collect();
        for (v, &m) in data.iter_mut().zip(&mask) {
            *v *= m;
        }
        self.mask = Some(mask);
    }

    pub fn backward_data(&mut self, grad: &mut [f64]) {
        if let Some(mask) = self.mask.take() {
            for (g, m) in grad.iter_mut().zip(mask) {
                *g *= m;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Subsample (stride for recurrent models)
// ---------------------------------------------------------------------------

/// Keep every `stride`-th timestep.
#[derive(Debug, Clone)]
pub struct Subsample {
    pub stride: usize,
    cache: Option<usize>, // original length
}

impl Subsample {
    pub fn new(stride: usize) -> Self {
        assert!(stride > 0);
        Subsample { stride, cache: None }
    }

    pub fn out_len(&self, in_len: usize) -> usize {
        in_len.div_ceil(self.stride)
    }

    pub fn forward(&mut self, x: &Tensor3, mode: Mode) -> Tensor3 {
        let out_len = self.out_len(x.len);
        let mut out = Tensor3::zeros(x.batch, x.channels, out_len);
        for b in 0..x.batch {
            for c in 0..x.channels {
                let src = x.row(b, c);
                let dst = out.row_mut(b, c);
                for (o, d) in dst.iter_mut().enumerate() {
                    *d = src[o * self.stride];
                }
            }
        }
        if mode == Mode::Train {
            self.cache = Some(x.len);
        }
        out
    }

    pub fn backward(&mut self, gout: &Tensor3) -> Tensor3 {
        let in_len = self.cache.take().expect("subsample backward without forward");
        let mut gin = Tensor3::zeros(gout.batch, gout.channels, in_len);
        for b in 0..gout.batch {
            for c in 0..gout.channels {
                let g = gout.row(b, c);
                let dst = gin.row_mut(b, c);
                for (o, &gv) in g.iter().enumerate() {
                    dst[o * self.stride] = gv;
                }
            }
        }
        gin
    }
}

// ---------------------------------------------------------------------------
// LastStep (readout for recurrent models)
// ---------------------------------------------------------------------------

/// Take the final timestep of a sequence: `[b, h, L] -> [b, h]`.
#[derive(Debug, Clone)]
pub struct LastStep {
    cache: Option<usize>, // sequence length
}

impl Default for LastStep {
    fn default() -> Self {
        LastStep::new()
    }
}

impl LastStep {
    pub fn new() -> Self {
        LastStep { cache: None }
    }

    pub fn forward(&mut self, x: &Tensor3, mode: Mode) -> Tensor2 {
        let mut out = Tensor2::zeros(x.batch, x.channels);
        for b in 0..x.batch {
            for c in 0..x.channels {
                out.row_mut(b)[c] = x.row(b, c)[x.len - 1];
            }
        }
        if mode == Mode::Train {
            self.cache = Some(x.len);
        }
        out
    }

    pub fn backward(&mut self, gout: &Tensor2) -> Tensor3 {
        let len = self.cache.take().expect("laststep backward without forward");
        let mut gin = Tensor3::zeros(gout.rows, gout.cols, len);
        for b in 0..gout.rows {
            for c in 0..gout.cols {
                gin.row_mut(b, c)[len - 1] = gout.row(b)[c];
            }
        }
        gin
    }
}
