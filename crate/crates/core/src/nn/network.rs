use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Activation, DenseLayer, LayerGrads, Matrix, NnError};

/// A stack of dense layers with reverse-mode gradients.
///
/// `forward` records each layer's input and pre-activation; `backward`
/// consumes that trace, fills fresh parameter-gradient buffers and returns
/// the gradient with respect to the network input (needed to chain the
/// discriminator's gradient into the generator and encoder).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Network {
    layers: Vec<DenseLayer>,
    #[serde(skip)]
    trace: Option<Trace>,
    #[serde(skip)]
    grads: Option<Vec<LayerGrads>>,
}

#[derive(Debug, Clone)]
struct Trace {
    layer_inputs: Vec<Matrix>,
    pre_activations: Vec<Matrix>,
}

impl Network {
    pub fn new(layers: Vec<DenseLayer>) -> Result<Self, NnError> {
        if layers.is_empty() {
            return Err(NnError::InvalidConfig("network needs at least one layer".into()));
        }
        for (i, pair) in layers.windows(2).enumerate() {
            if pair[0].out_dim() != pair[1].in_dim() {
                return Err(NnError::Shape {
                    context: format!("network layer {}", i + 1),
                    expected: format!("input dim {}", pair[0].out_dim()),
                    actual: format!("{}", pair[1].in_dim()),
                });
            }
        }
        Ok(Self {
            layers,
            trace: None,
            grads: None,
        })
    }

    /// Multi-layer perceptron over `dims`, hidden layers using `hidden`,
    /// the last layer using `output`.
    pub fn mlp<R: Rng + ?Sized>(
        dims: &[usize],
        hidden: Activation,
        output: Activation,
        rng: &mut R,
    ) -> Result<Self, NnError> {
        if dims.len() < 2 {
            return Err(NnError::InvalidConfig(
                "mlp needs at least input and output dims".into(),
            ));
        }
        let mut layers = Vec::with_capacity(dims.len() - 1);
        for (i, pair) in dims.windows(2).enumerate() {
            let act = if i + 2 == dims.len() { output } else { hidden };
            layers.push(DenseLayer::new(pair[0], pair[1], act, rng)?);
        }
        Self::new(layers)
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim()
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    fn check_input(&self, input: &Matrix) -> Result<(), NnError> {
        if input.cols() != self.input_dim() {
            return Err(NnError::Shape {
                context: "network layer 0".into(),
                expected: format!("input dim {}", self.input_dim()),
                actual: format!("{}", input.cols()),
            });
        }
        Ok(())
    }

    /// Forward pass that records the trace needed by `backward`.
    pub fn forward(&mut self, input: &Matrix) -> Result<Matrix, NnError> {
        self.check_input(input)?;
        let mut layer_inputs = Vec::with_capacity(self.layers.len());
        let mut pre_activations = Vec::with_capacity(self.layers.len());
        let mut current = input.clone();
        for layer in &self.layers {
            let (z, a) = layer.forward_batch(&current)?;
            layer_inputs.push(current);
            pre_activations.push(z);
            current = a;
        }
        self.trace = Some(Trace {
            layer_inputs,
            pre_activations,
        });
        Ok(current)
    }

    /// Read-only forward pass; records nothing and never mutates the network.
    pub fn evaluate(&self, input: &Matrix) -> Result<Matrix, NnError> {
        self.check_input(input)?;
        let mut current = input.clone();
        for layer in &self.layers {
            let (_, a) = layer.forward_batch(&current)?;
            current = a;
        }
        Ok(current)
    }

    /// Reverse pass over the last recorded forward.
    ///
    /// Fills fresh gradient buffers (zeroed before accumulation) and returns
    /// the gradient with respect to the forward input. The trace is consumed:
    /// a second `backward` without a new `forward` is a state error.
    pub fn backward(&mut self, output_grad: &Matrix) -> Result<Matrix, NnError> {
        let trace = self.trace.take().ok_or(NnError::NoForwardTrace)?;
        let last = self.layers.len() - 1;
        if output_grad.cols() != self.layers[last].out_dim()
            || output_grad.rows() != trace.pre_activations[last].rows()
        {
            return Err(NnError::Shape {
                context: format!("network layer {last} output gradient"),
                expected: format!(
                    "{} x {}",
                    trace.pre_activations[last].rows(),
                    self.layers[last].out_dim()
                ),
                actual: format!("{} x {}", output_grad.rows(), output_grad.cols()),
            });
        }

        let mut grads: Vec<LayerGrads> =
            self.layers.iter().map(LayerGrads::zeros_like).collect();
        let mut upstream = output_grad.clone();
        for (idx, layer) in self.layers.iter().enumerate().rev() {
            let z = &trace.pre_activations[idx];
            let x = &trace.layer_inputs[idx];
            // dz = upstream (.) act'(z)
            let mut dz = Matrix::zeros(z.rows(), z.cols());
            let act = layer.activation();
            for r in 0..z.rows() {
                let zr = z.row(r);
                let ur = upstream.row(r);
                let dr = dz.row_mut(r);
                for ((d, &zv), &uv) in dr.iter_mut().zip(zr).zip(ur) {
                    *d = uv * act.derivative(zv);
                }
            }
            grads[idx].weights = dz.transpose_a_matmul(x)?;
            grads[idx].bias = dz.column_sums();
            upstream = dz.matmul(layer.weights())?;
        }
        self.grads = Some(grads);
        Ok(upstream)
    }

    /// Gradient buffers from the last `backward`, if any.
    pub fn grads(&self) -> Option<&[LayerGrads]> {
        self.grads.as_deref()
    }

    /// Remove and return the gradient buffers, leaving none behind.
    pub fn take_grads(&mut self) -> Option<Vec<LayerGrads>> {
        self.grads.take()
    }

    pub(crate) fn layers_mut(&mut self) -> &mut [DenseLayer] {
        &mut self.layers
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.in_dim() * l.out_dim() + l.out_dim())
            .sum()
    }

    /// Read a parameter by flat index: all of layer 0's weights (row-major),
    /// then its biases, then layer 1, and so on.
    pub fn get_param(&self, mut index: usize) -> f64 {
        for layer in &self.layers {
            let w = layer.in_dim() * layer.out_dim();
            if index < w {
                return layer.weights().data()[index];
            }
            index -= w;
            if index < layer.out_dim() {
                return layer.bias()[index];
            }
            index -= layer.out_dim();
        }
        panic!("parameter index out of range");
    }

    /// Write a parameter by flat index (see `get_param` for the layout).
    pub fn set_param(&mut self, mut index: usize, value: f64) {
        for layer in &mut self.layers {
            let w = layer.in_dim() * layer.out_dim();
            if index < w {
                layer.weights_data_mut()[index] = value;
                return;
            }
            index -= w;
            if index < layer.out_dim() {
                layer.bias_mut()[index] = value;
                return;
            }
            index -= layer.out_dim();
        }
        panic!("parameter index out of range");
    }

    /// Flat copy of all parameters, in `get_param` order.
    pub fn params_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for layer in &self.layers {
            out.extend_from_slice(layer.weights().data());
            out.extend_from_slice(layer.bias());
        }
        out
    }

    /// Flat copy of the recorded gradients, aligned with `params_flat`.
    pub fn grads_flat(&self) -> Option<Vec<f64>> {
        let grads = self.grads.as_ref()?;
        let mut out = Vec::with_capacity(self.param_count());
        for g in grads {
            out.extend_from_slice(g.weights.data());
            out.extend_from_slice(&g.bias);
        }
        Some(out)
    }
}
