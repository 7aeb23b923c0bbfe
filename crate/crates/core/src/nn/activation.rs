use serde::{Deserialize, Serialize};

use super::NnError;

/// Element-wise activation applied after a layer's affine transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    LeakyRelu { slope: f64 },
    Sigmoid,
    Tanh,
    Identity,
}

impl Activation {
    pub fn validate(&self) -> Result<(), NnError> {
        if let Activation::LeakyRelu { slope } = self {
            if !(*slope > 0.0 && *slope < 1.0) {
                return Err(NnError::InvalidConfig(format!(
                    "leaky relu slope must lie in (0,1), got {slope}"
                )));
            }
        }
        Ok(())
    }

    pub fn apply(&self, z: f64) -> f64 {
        match self {
            Activation::LeakyRelu { slope } => {
                if z >= 0.0 {
                    z
                } else {
                    slope * z
                }
            }
            Activation::Sigmoid => {
                // keep the output strictly inside (0,1) even where exp
                // saturates in f64
                let s = 1.0 / (1.0 + (-z).exp());
                s.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
            }
            Activation::Tanh => z.tanh(),
            Activation::Identity => z,
        }
    }

    /// Derivative with respect to the pre-activation `z`.
    pub fn derivative(&self, z: f64) -> f64 {
        match self {
            Activation::LeakyRelu { slope } => {
                if z >= 0.0 {
                    1.0
                } else {
                    *slope
                }
            }
            Activation::Sigmoid => {
                let s = 1.0 / (1.0 + (-z).exp());
                s * (1.0 - s)
            }
            Activation::Tanh => {
                let t = z.tanh();
                1.0 - t * t
            }
            Activation::Identity => 1.0,
        }
    }
}
