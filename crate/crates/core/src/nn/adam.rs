use serde::{Deserialize, Serialize};

use super::{Network, NnError};

/// Adam hyperparameters. Defaults follow common GAN practice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamParams {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamParams {
    pub fn with_learning_rate(learning_rate: f64) -> Self {
        Self {
            learning_rate,
            ..Self::default()
        }
    }
}

impl Default for AdamParams {
    fn default() -> Self {
        Self {
            learning_rate: 2e-4,
            beta1: 0.5,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct MomentPair {
    m: Vec<f64>,
    v: Vec<f64>,
}

/// Adam optimizer state: first/second moment accumulators per parameter
/// tensor plus the shared step counter used for bias correction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    params: AdamParams,
    t: u64,
    slots: Vec<MomentPair>,
}

impl AdamState {
    /// State with one moment pair per tensor size in `sizes`.
    pub fn new(params: AdamParams, sizes: &[usize]) -> Self {
        Self {
            params,
            t: 0,
            slots: sizes
                .iter()
                .map(|&n| MomentPair {
                    m: vec![0.0; n],
                    v: vec![0.0; n],
                })
                .collect(),
        }
    }

    /// State shaped for `net`: two slots per layer (weights, then bias).
    pub fn for_network(params: AdamParams, net: &Network) -> Self {
        let sizes: Vec<usize> = net
            .layers()
            .iter()
            .flat_map(|l| [l.in_dim() * l.out_dim(), l.out_dim()])
            .collect();
        Self::new(params, &sizes)
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }

    fn advance(&mut self) {
        self.t += 1;
    }

    fn update_slot(
        &mut self,
        slot: usize,
        params: &mut [f64],
        grads: &[f64],
        lr: f64,
    ) -> Result<(), NnError> {
        let slot_count = self.slots.len();
        let pair = self.slots.get_mut(slot).ok_or_else(|| NnError::Shape {
            context: "AdamState::update_slot".into(),
            expected: format!("slot < {slot_count}"),
            actual: format!("{slot}"),
        })?;
        if params.len() != pair.m.len() || grads.len() != pair.m.len() {
            return Err(NnError::Shape {
                context: format!("adam slot {slot}"),
                expected: format!("{} values", pair.m.len()),
                actual: format!("params {} / grads {}", params.len(), grads.len()),
            });
        }
        let AdamParams {
            beta1,
            beta2,
            epsilon,
            ..
        } = self.params;
        let bc1 = 1.0 - beta1.powi(self.t as i32);
        let bc2 = 1.0 - beta2.powi(self.t as i32);
        for ((p, &g), (m, v)) in params
            .iter_mut()
            .zip(grads)
            .zip(pair.m.iter_mut().zip(pair.v.iter_mut()))
        {
            *m = beta1 * *m + (1.0 - beta1) * g;
            *v = beta2 * *v + (1.0 - beta2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *p -= lr * m_hat / (v_hat.sqrt() + epsilon);
        }
        Ok(())
    }

    /// One optimizer step over a network, consuming the gradients recorded
    /// by the last `backward`. `lr` overrides the stored learning rate when
    /// given (the alignment phase trains E and G with a smaller rate).
    pub fn step_network(&mut self, net: &mut Network, lr: Option<f64>) -> Result<(), NnError> {
        let grads = net.take_grads().ok_or(NnError::NoForwardTrace)?;
        let lr = lr.unwrap_or(self.params.learning_rate);
        self.advance();
        for (i, (layer, g)) in net.layers_mut().iter_mut().zip(&grads).enumerate() {
            self.update_slot(2 * i, layer.weights_data_mut(), g.weights.data(), lr)?;
            self.update_slot(2 * i + 1, layer.bias_mut(), &g.bias, lr)?;
        }
        Ok(())
    }
}

/// One Adam step over a single flat parameter tensor.
pub fn adam_step(
    params: &mut [f64],
    grads: &[f64],
    state: &mut AdamState,
) -> Result<(), NnError> {
    state.advance();
    let lr = state.params.learning_rate;
    state.update_slot(0, params, grads, lr)
}
