//! Adam optimizer. Moment buffers align with the network's parameter walk
//! order; frozen layers are skipped entirely, so neither their parameters nor
//! their moments ever move.

use crate::model::Network;

#[derive(Debug, Clone)]
pub struct Adam {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub step_count: u64,
    pub m: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
}

impl Adam {
    pub fn new(network: &Network, beta1: f64, beta2: f64, epsilon: f64) -> Self {
        let shapes: Vec<usize> = network
            .param_tensors()
            .iter()
            .map(|p| p.data.len())
            .collect();
        Adam {
            beta1,
            beta2,
            epsilon,
            step_count: 0,
            m: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            v: shapes.iter().map(|&n| vec![0.0; n]).collect(),
        }
    }

    /// One update with the given learning rate, consuming the accumulated
    /// gradients. Non-trainable tensors are left untouched.
    pub fn step(&mut self, network: &mut Network, lr: f64) {
        self.step_count += 1;
        let t = self.step_count as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);
        for (i, (param, trainable)) in network.param_tensors_mut().into_iter().enumerate() {
            if !trainable {
                continue;
            }
            let m = &mut self.m[i];
            let v = &mut self.v[i];
            for ((p, &g), (mi, vi)) in param
                .data
                .iter_mut()
                .zip(param.grad.iter())
                .zip(m.iter_mut().zip(v.iter_mut()))
            {
                *mi = self.beta1 * *mi + (1.0 - self.beta1) * g;
                *vi = self.beta2 * *vi + (1.0 - self.beta2) * g * g;
                let mhat = *mi / bc1;
                let vhat = *vi / bc2;
                *p -= lr * mhat / (vhat.sqrt() + self.epsilon);
            }
        }
    }
}
