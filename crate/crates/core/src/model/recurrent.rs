//! Recurrent baseline layers (tanh RNN and LSTM) with full backpropagation
//! through time. Sequences arrive as `[batch, features, time]`; each layer
//! emits the hidden state at every timestep so layers stack directly.
//!
//! Batch items are processed serially so gradient accumulation order is
//! fixed; these baselines trade speed for simplicity.

use rand_chacha::ChaCha8Rng;

use super::layers::{init_uniform, Mode, Param};
use super::tensor::Tensor3;

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Gather timestep t of sample b into a contiguous feature vector.
fn gather_step(x: &Tensor3, b: usize, t: usize, out: &mut [f64]) {
    for (c, o) in out.iter_mut().enumerate() {
        *o = x.get(b, c, t);
    }
}

fn matvec(w: &[f64], rows: usize, cols: usize, x: &[f64], out: &mut [f64]) {
    for r in 0..rows {
        let wr = &w[r * cols..(r + 1) * cols];
        let mut acc = 0.0;
        for (&wv, &xv) in wr.iter().zip(x) {
            acc += wv * xv;
        }
        out[r] += acc;
    }
}

/// out += w^T * g  (w is [rows x cols], g has rows entries, out has cols)
fn matvec_t(w: &[f64], rows: usize, cols: usize, g: &[f64], out: &mut [f64]) {
    for r in 0..rows {
        let gv = g[r];
        if gv == 0.0 {
            continue;
        }
        let wr = &w[r * cols..(r + 1) * cols];
        for (o, &wv) in out.iter_mut().zip(wr) {
            *o += gv * wv;
        }
    }
}

fn outer_acc(grad: &mut [f64], g: &[f64], x: &[f64]) {
    let cols = x.len();
    for (r, &gv) in g.iter().enumerate() {
        if gv == 0.0 {
            continue;
        }
        let row = &mut grad[r * cols..(r + 1) * cols];
        for (d, &xv) in row.iter_mut().zip(x) {
            *d += gv * xv;
        }
    }
}

// ---------------------------------------------------------------------------
// Tanh RNN layer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct RnnLayer {
    pub in_features: usize,
    pub hidden: usize,
    pub wx: Param, // [hidden x in]
    pub wh: Param, // [hidden x hidden]
    pub bias: Param,
    pub trainable: bool,
    cache: Option<(Tensor3, Tensor3)>, // (input, hidden states)
}

impl RnnLayer {
    pub fn new(rng: &mut ChaCha8Rng, in_features: usize, hidden: usize) -> Self {
        RnnLayer {
            in_features,
            hidden,
            wx: Param::new(init_uniform(rng, hidden * in_features, hidden)),
            wh: Param::new(init_uniform(rng, hidden * hidden, hidden)),
            bias: Param::zeros(hidden),
            trainable: true,
            cache: None,
        }
    }

    pub fn forward(&mut self, x: &Tensor3, mode: Mode) -> Tensor3 {
        let h = self.hidden;
        let mut states = Tensor3::zeros(x.batch, h, x.len);
        let mut xt = vec![0.0; self.in_features];
        let mut prev = vec![0.0; h];
        let mut pre = vec![0.0; h];
        for b in 0..x.batch {
            prev.iter_mut().for_each(|v| *v = 0.0);
            for t in 0..x.len {
                gather_step(x, b, t, &mut xt);
                pre.copy_from_slice(&self.bias.data);
                matvec(&self.wx.data, h, self.in_features, &xt, &mut pre);
                matvec(&self.wh.data, h, h, &prev, &mut pre);
                for (j, p) in pre.iter().enumerate() {
                    let v = p.tanh();
                    states.row_mut(b, j)[t] = v;
                    prev[j] = v;
                }
            }
        }
        if mode == Mode::Train {
            self.cache = Some((x.clone(), states.clone()));
        }
        states
    }

    pub fn backward(&mut self, gout: &Tensor3) -> Tensor3 {
        let (x, states) = self.cache.take().expect("rnn backward without forward");
        let h = self.hidden;
        let mut gin = Tensor3::zeros(x.batch, x.channels, x.len);
        let mut xt = vec![0.0; self.in_features];
        let mut ht = vec![0.0; h];
        let mut hprev = vec![0.0; h];
        let mut carry = vec![0.0; h];
        let mut pre_grad = vec![0.0; h];
        let mut dx = vec![0.0; self.in_features];
        for b in 0..x.batch {
            carry.iter_mut().for_each(|v| *v = 0.0);
            for t in (0..x.len).rev() {
                gather_step(&states, b, t, &mut ht);
                if t > 0 {
                    gather_step(&states, b, t - 1, &mut hprev);
                } else {
                    hprev.iter_mut().for_each(|v| *v = 0.0);
                }
                gather_step(&x, b, t, &mut xt);
                for j in 0..h {
                    let g = gout.get(b, j, t) + carry[j];
                    pre_grad[j] = g * (1.0 - ht[j] * ht[j]);
                }
                if self.trainable {
                    outer_acc(&mut self.wx.grad, &pre_grad, &xt);
                    outer_acc(&mut self.wh.grad, &pre_grad, &hprev);
                    for (bg, &pg) in self.bias.grad.iter_mut().zip(&pre_grad) {
                        *bg += pg;
                    }
                }
                dx.iter_mut().for_each(|v| *v = 0.0);
                matvec_t(&self.wx.data, h, self.in_features, &pre_grad, &mut dx);
                for (c, &d) in dx.iter().enumerate() {
                    gin.row_mut(b, c)[t] = d;
                }
                carry.iter_mut().for_each(|v| *v = 0.0);
                matvec_t(&self.wh.data, h, h, &pre_grad, &mut carry);
            }
        }
        gin
    }
}

// ---------------------------------------------------------------------------
// LSTM layer
// ---------------------------------------------------------------------------

/// Gate packing order within the stacked weight matrices: input, forget,
/// cell, output.
#[derive(Debug, Clone)]
pub struct LstmLayer {
    pub in_features: usize,
    pub hidden: usize,
    pub wx: Param, // [4*hidden x in]
    pub wh: Param, // [4*hidden x hidden]
    pub bias: Param,
    pub trainable: bool,
    cache: Option<LstmCache>,
}

#[derive(Debug, Clone)]
struct LstmCache {
    x: Tensor3,
    /// Gates per timestep: [b][t][4h] contiguous (i, f, g, o).
    gates: Vec<f64>,
    cells: Tensor3,
    states: Tensor3,
}

impl LstmLayer {
    pub fn new(rng: &mut ChaCha8Rng, in_features: usize, hidden: usize) -> Self {
        LstmLayer {
            in_features,
            hidden,
            wx: Param::new(init_uniform(rng, 4 * hidden * in_features, hidden)),
            wh: Param::new(init_uniform(rng, 4 * hidden * hidden, hidden)),
            bias: Param::zeros(4 * hidden),
            trainable: true,
            cache: None,
        }
    }

    pub fn forward(&mut self, x: &Tensor3, mode: Mode) -> Tensor3 {
        let h = self.hidden;
        let mut states = Tensor3::zeros(x.batch, h, x.len);
        let mut cells = Tensor3::zeros(x.batch, h, x.len);
        let mut gates = vec![0.0; x.batch * x.len * 4 * h];
        let mut xt = vec![0.0; self.in_features];
        let mut hprev = vec![0.0; h];
        let mut cprev = vec![0.0; h];
        let mut pre = vec![0.0; 4 * h];
        for b in 0..x.batch {
            hprev.iter_mut().for_each(|v| *v = 0.0);
            cprev.iter_mut().for_each(|v| *v = 0.0);
            for t in 0..x.len {
                gather_step(x, b, t, &mut xt);
                pre.copy_from_slice(&self.bias.data);
                matvec(&self.wx.data, 4 * h, self.in_features, &xt, &mut pre);
                matvec(&self.wh.data, 4 * h, h, &hprev, &mut pre);
                let gate_base = (b * x.len + t) * 4 * h;
                for j in 0..h {
                    let i = sigmoid(pre[j]);
                    let f = sigmoid(pre[h + j]);
                    let g = pre[2 * h + j].tanh();
                    let o = sigmoid(pre[3 * h + j]);
                    let c = f * cprev[j] + i * g;
                    let hv = o * c.tanh();
                    gates[gate_base + j] = i;
                    gates[gate_base + h + j] = f;
                    gates[gate_base + 2 * h + j] = g;
                    gates[gate_base + 3 * h + j] = o;
                    cells.row_mut(b, j)[t] = c;
                    states.row_mut(b, j)[t] = hv;
                    cprev[j] = c;
                    hprev[j] = hv;
                }
            }
        }
        if mode == Mode::Train {
            self.cache = Some(LstmCache {
                x: x.clone(),
                gates,
                cells: cells.clone(),
                states: states.clone(),
            });
        }
        states
    }

    pub fn backward(&mut self, gout: &Tensor3) -> Tensor3 {
        let LstmCache {
            x,
            gates,
            cells,
            states,
        } = self.cache.take().expect("lstm backward without forward");
        let h = self.hidden;
        let mut gin = Tensor3::zeros(x.batch, x.channels, x.len);
        let mut xt = vec![0.0; self.in_features];
        let mut hprev = vec![0.0; h];
        let mut cprev = vec![0.0; h];
        let mut dh_carry = vec![0.0; h];
        let mut dc_carry = vec![0.0; h];
        let mut dpre = vec![0.0; 4 * h];
        let mut dx = vec![0.0; self.in_features];
        for b in 0..x.batch {
            dh_carry.iter_mut().for_each(|v| *v = 0.0);
            dc_carry.iter_mut().for_each(|v| *v = 0.0);
            for t in (0..x.len).rev() {
                gather_step(&x, b, t, &mut xt);
                if t > 0 {
                    gather_step(&states, b, t - 1, &mut hprev);
                    gather_step(&cells, b, t - 1, &mut cprev);
                } else {
                    hprev.iter_mut().for_each(|v| *v = 0.0);
                    cprev.iter_mut().for_each(|v| *v = 0.0);
                }
                let gate_base = (b * x.len + t) * 4 * h;
                for j in 0..h {
                    let i = gates[gate_base + j];
                    let f = gates[gate_base + h + j];
                    let g = gates[gate_base + 2 * h + j];
                    let o = gates[gate_base + 3 * h + j];
                    let c = cells.get(b, j, t);
                    let tanh_c = c.tanh();
                    let dh = gout.get(b, j, t) + dh_carry[j];
                    let dc = dc_carry[j] + dh * o * (1.0 - tanh_c * tanh_c);
                    let di = dc * g;
                    let df = dc * cprev[j];
                    let dg = dc * i;
                    let do_ = dh * tanh_c;
                    dpre[j] = di * i * (1.0 - i);
                    dpre[h + j] = df * f * (1.0 - f);
                    dpre[2 * h + j] = dg * (1.0 - g * g);
                    dpre[3 * h + j] = do_ * o * (1.0 - o);
                    dc_carry[j] = dc * f;
                }
                if self.trainable {
                    outer_acc(&mut self.wx.grad, &dpre, &xt);
                    outer_acc(&mut self.wh.grad, &dpre, &hprev);
                    for (bg, &pg) in self.bias.grad.iter_mut().zip(&dpre) {
                        *bg += pg;
                    }
                }
                dx.iter_mut().for_each(|v| *v = 0.0);
                matvec_t(&self.wx.data, 4 * h, self.in_features, &dpre, &mut dx);
                for (c, &d) in dx.iter().enumerate() {
                    gin.row_mut(b, c)[t] = d;
                }
                dh_carry.iter_mut().for_each(|v| *v = 0.0);
                matvec_t(&self.wh.data, 4 * h, h, &dpre, &mut dh_carry);
            }
        }
        gin
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn wave_input(batch: usize, ch: usize, len: usize) -> Tensor3 {
        let mut x = Tensor3::zeros(batch, ch, len);
        for (i, v) in x.data.iter_mut().enumerate() {
            *v = ((i as f64) * 0.37).sin() * 0.5;
        }
        x
    }

    #[test]
    fn rnn_shapes_and_determinism() {
        let mut rng = rng::seeded(5);
        let mut layer = RnnLayer::new(&mut rng, 3, 4);
        let x = wave_input(2, 3, 7);
        let a = layer.forward(&x, Mode::Eval);
        let b = layer.forward(&x, Mode::Eval);
        assert_eq!((a.batch, a.channels, a.len), (2, 4, 7));
        assert_eq!(a.data, b.data);
        assert!(a.data.iter().all(|v| v.is_finite() && v.abs() <= 1.0));
    }

    #[test]
    fn lstm_shapes() {
        let mut rng = rng::seeded(6);
        let mut layer = LstmLayer::new(&mut rng, 3, 5);
        let x = wave_input(2, 3, 6);
        let y = layer.forward(&x, Mode::Eval);
        assert_eq!((y.batch, y.channels, y.len), (2, 5, 6));
        assert!(y.data.iter().all(|v| v.is_finite()));
    }

    // Finite-difference gradient checks on scalar loss L = sum(outputs).
    fn fd_check_rnn() -> f64 {
        let mut rng = rng::seeded(7);
        let mut layer = RnnLayer::new(&mut rng, 2, 3);
        let x = wave_input(2, 2, 5);
        let loss = |l: &mut RnnLayer| -> f64 { l.forward(&x, Mode::Eval).data.iter().sum() };

        let y = layer.forward(&x, Mode::Train);
        let mut gone = Tensor3::zeros(y.batch, y.channels, y.len);
        gone.data.iter_mut().for_each(|v| *v = 1.0);
        let _ = layer.backward(&gone);

        let mut max_rel = 0.0f64;
        let eps = 1e-6;
        for i in 0..layer.wx.data.len() {
            let orig = layer.wx.data[i];
            layer.wx.data[i] = orig + eps;
            let lp = loss(&mut layer);
            layer.wx.data[i] = orig - eps;
            let lm = loss(&mut layer);
            layer.wx.data[i] = orig;
            let num = (lp - lm) / (2.0 * eps);
            let ana = layer.wx.grad[i];
            let rel = (num - ana).abs() / (num.abs() + ana.abs()).max(1e-8);
            max_rel = max_rel.max(rel);
        }
        max_rel
    }

    fn fd_check_lstm() -> f64 {
        let mut rng = rng::seeded(8);
        let mut layer = LstmLayer::new(&mut rng, 2, 3);
        let x = wave_input(1, 2, 4);
        let loss = |l: &mut LstmLayer| -> f64 { l.forward(&x, Mode::Eval).data.iter().sum() };

        let y = layer.forward(&x, Mode::Train);
        let mut gone = Tensor3::zeros(y.batch, y.channels, y.len);
        gone.data.iter_mut().for_each(|v| *v = 1.0);
        let _ = layer.backward(&gone);

        let mut max_rel = 0.0f64;
        let eps = 1e-6;
        for i in 0..layer.wh.data.len() {
            let orig = layer.wh.data[i];
            layer.wh.data[i] = orig + eps;
            let lp = loss(&mut layer);
            layer.wh.data[i] = orig - eps;
            let lm = loss(&mut layer);
            layer.wh.data[i] = orig;
            let num = (lp - lm) / (2.0 * eps);
            let ana = layer.wh.grad[i];
            let rel = (num - ana).abs() / (num.abs() + ana.abs()).max(1e-8);
            max_rel = max_rel.max(rel);
        }
        max_rel
    }

    #[test]
    fn rnn_gradients_match_finite_differences() {
        assert!(fd_check_rnn() < 1e-6);
    }

    #[test]
    fn lstm_gradients_match_finite_differences() {
        assert!(fd_check_lstm() < 1e-6);
    }
}
