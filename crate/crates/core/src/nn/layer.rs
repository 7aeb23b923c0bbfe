use rand::distr::{Distribution, Uniform};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Activation, Matrix, NnError};

/// Dense layer `a = activation(x W^T + b)` with weights stored `out x in`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    weights: Matrix,
    bias: Vec<f64>,
    activation: Activation,
}

impl DenseLayer {
    /// Xavier-uniform weights in `[-sqrt(6/(fan_in+fan_out)), +sqrt(6/(fan_in+fan_out))]`,
    /// zero biases.
    pub fn new<R: Rng + ?Sized>(
        in_dim: usize,
        out_dim: usize,
        activation: Activation,
        rng: &mut R,
    ) -> Result<Self, NnError> {
        if in_dim == 0 || out_dim == 0 {
            return Err(NnError::InvalidConfig("layer dims must be > 0".into()));
        }
        activation.validate()?;
        let limit = (6.0 / (in_dim + out_dim) as f64).sqrt();
        let dist = Uniform::new(-limit, limit)
            .map_err(|e| NnError::InvalidConfig(format!("weight init range: {e}")))?;
        let data = (0..in_dim * out_dim).map(|_| dist.sample(rng)).collect();
        Ok(Self {
            weights: Matrix::from_vec(out_dim, in_dim, data)?,
            bias: vec![0.0; out_dim],
            activation,
        })
    }

    pub fn from_parts(
        weights: Matrix,
        bias: Vec<f64>,
        activation: Activation,
    ) -> Result<Self, NnError> {
        activation.validate()?;
        if bias.len() != weights.rows() {
            return Err(NnError::Shape {
                context: "DenseLayer::from_parts".into(),
                expected: format!("bias of length {}", weights.rows()),
                actual: format!("{}", bias.len()),
            });
        }
        Ok(Self {
            weights,
            bias,
            activation,
        })
    }

    pub fn in_dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.rows()
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub(crate) fn weights_data_mut(&mut self) -> &mut [f64] {
        self.weights.data_mut()
    }

    pub(crate) fn bias_mut(&mut self) -> &mut [f64] {
        &mut self.bias
    }

    /// Batch forward; returns pre-activations and activations, one row per sample.
    pub fn forward_batch(&self, input: &Matrix) -> Result<(Matrix, Matrix), NnError> {
        let mut z = input.matmul_transpose_b(&self.weights)?;
        for r in 0..z.rows() {
            let row = z.row_mut(r);
            for (v, b) in row.iter_mut().zip(&self.bias) {
                *v += b;
            }
        }
        let a = z.map(|v| self.activation.apply(v));
        Ok((z, a))
    }
}

/// Per-layer gradient buffers, shaped exactly like the layer parameters.
#[derive(Debug, Clone)]
pub struct LayerGrads {
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

impl LayerGrads {
    pub fn zeros_like(layer: &DenseLayer) -> Self {
        Self {
            weights: Matrix::zeros(layer.out_dim(), layer.in_dim()),
            bias: vec![0.0; layer.out_dim()],
        }
    }
}
