//! Neural (MLP) controllers, the linear proxy program, and the exact
//! linear-to-MLP embedding used to build ground-truth reference controllers.

use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Tanh,
    Linear,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Tanh => libm::tanh(x),
            Activation::Linear => x,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    /// Weight matrix, `out_dim x in_dim`.
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl Layer {
    pub fn out_dim(&self) -> usize {
        self.weights.len()
    }

    pub fn in_dim(&self) -> usize {
        self.weights.first().map(|r| r.len()).unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ControllerError {
    DimensionMismatch { expected: usize, found: usize },
    ChainBreak { layer: usize, expected: usize, found: usize },
    NonFinite { layer: usize },
    NonFiniteInput,
    EmptyNetwork,
    GadgetTooSmall { layer: usize, size: usize, needed: usize },
}

impl fmt::Display for ControllerError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ControllerError::DimensionMismatch { expected, found } => {
                write!(f, "input dimension mismatch: expected {expected}, found {found}")
            }
            ControllerError::ChainBreak { layer, expected, found } => write!(
                f,
                "layer {layer} expects input dimension {expected} but previous layer outputs {found}"
            ),
            ControllerError::NonFinite { layer } => {
                write!(f, "non-finite value produced at layer {layer}")
            }
            ControllerError::NonFiniteInput => write!(f, "non-finite input state"),
            ControllerError::EmptyNetwork => write!(f, "controller must have at least one layer"),
            ControllerError::GadgetTooSmall { layer, size, needed } => write!(
                f,
                "hidden layer {layer} has {size} units but the identity gadget needs {needed}"
            ),
        }
    }
}

impl core::error::Error for ControllerError {}

/// Layered feed-forward controller. The final layer output is multiplied
/// element-wise by `output_scale` (the control bound for tanh-headed nets).
#[derive(Debug, Clone, PartialEq)]
pub struct MlpController {
    layers: Vec<Layer>,
    output_scale: Vec<f64>,
}

impl MlpController {
    pub fn new(layers: Vec<Layer>, output_scale: Vec<f64>) -> Result<Self, ControllerError> {
        if layers.is_empty() {
            return Err(ControllerError::EmptyNetwork);
        }
        for i in 1..layers.len() {
            let expected = layers[i].in_dim();
            let found = layers[i - 1].out_dim();
            if expected != found {
                return Err(ControllerError::ChainBreak { layer: i, expected, found });
            }
        }
        for (i, layer) in layers.iter().enumerate() {
            let finite = layer.bias.iter().chain(layer.weights.iter().flatten()).all(|v| v.is_finite());
            if !finite || layer.bias.len() != layer.out_dim() {
                return Err(ControllerError::NonFinite { layer: i });
            }
        }
        let out = layers.last().unwrap().out_dim();
        if output_scale.len() != out {
            return Err(ControllerError::DimensionMismatch { expected: out, found: output_scale.len() });
        }
        Ok(MlpController { layers, output_scale })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn output_scale(&self) -> &[f64] {
        &self.output_scale
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().unwrap().out_dim()
    }

    /// Standard affine-then-activation composition, scaled at the output.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>, ControllerError> {
        if x.len() != self.input_dim() {
            return Err(ControllerError::DimensionMismatch { expected: self.input_dim(), found: x.len() });
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(ControllerError::NonFiniteInput);
        }
        let mut current: Vec<f64> = x.to_vec();
        for (li, layer) in self.layers.iter().enumerate() {
            let mut next = Vec::with_capacity(layer.out_dim());
            for (row, b) in layer.weights.iter().zip(&layer.bias) {
                let z: f64 = row.iter().zip(&current).map(|(w, v)| w * v).sum::<f64>() + b;
                next.push(layer.activation.apply(z));
            }
            if !next.iter().all(|v| v.is_finite()) {
                return Err(ControllerError::NonFinite { layer: li });
            }
            current = next;
        }
        for (v, s) in current.iter_mut().zip(&self.output_scale) {
            *v *= s;
        }
        Ok(current)
    }
}

/// Coefficient matrix of the synthesized linear proxy: `theta` has shape
/// `control_dim x (state_dim + 1)`, last column is the constant term.
#[derive(Debug, Clone, PartialEq)]
pub struct ProxyProgram {
    pub theta: Vec<Vec<f64>>,
}

impl ProxyProgram {
    pub fn new(theta: Vec<Vec<f64>>) -> Result<Self, ControllerError> {
        if theta.is_empty() || theta[0].len() < 2 {
            return Err(ControllerError::EmptyNetwork);
        }
        let cols = theta[0].len();
        for (i, row) in theta.iter().enumerate() {
            if row.len() != cols {
                return Err(ControllerError::ChainBreak { layer: i, expected: cols, found: row.len() });
            }
            if !row.iter().all(|v| v.is_finite()) {
                return Err(ControllerError::NonFinite { layer: i });
            }
        }
        Ok(ProxyProgram { theta })
    }

    pub fn zeros(control_dim: usize, state_dim: usize) -> Self {
        ProxyProgram { theta: alloc::vec![alloc::vec![0.0; state_dim + 1]; control_dim] }
    }

    pub fn state_dim(&self) -> usize {
        self.theta[0].len() - 1
    }

    pub fn control_dim(&self) -> usize {
        self.theta.len()
    }

    /// `y_i = sum_j theta[i][j] * x_j + theta[i][n]`. No clamping here;
    /// control bounds apply at simulation time.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>, ControllerError> {
        let n = self.state_dim();
        if x.len() != n {
            return Err(ControllerError::DimensionMismatch { expected: n, found: x.len() });
        }
        Ok(self
            .theta
            .iter()
            .map(|row| row[..n].iter().zip(x).map(|(c, v)| c * v).sum::<f64>() + row[n])
            .collect())
    }

    /// Flat view of the coefficients, row-major.
    pub fn flatten(&self) -> Vec<f64> {
        self.theta.iter().flatten().copied().collect()
    }

    pub fn from_flat(flat: &[f64], control_dim: usize, state_dim: usize) -> Self {
        let cols = state_dim + 1;
        let theta = (0..control_dim)
            .map(|i| flat[i * cols..(i + 1) * cols].to_vec())
            .collect();
        ProxyProgram { theta }
    }
}

/// State-to-control map used by the simulator.
pub trait Controller {
    fn control(&self, state: &[f64]) -> Result<Vec<f64>, ControllerError>;
}

impl Controller for MlpController {
    fn control(&self, state: &[f64]) -> Result<Vec<f64>, ControllerError> {
        self.forward(state)
    }
}

impl Controller for ProxyProgram {
    fn control(&self, state: &[f64]) -> Result<Vec<f64>, ControllerError> {
        self.forward(state)
    }
}

/// Adapter for closures, mostly used by tests and the `simulate` command.
pub struct FnController<F: Fn(&[f64]) -> Vec<f64>>(pub F);

impl<F: Fn(&[f64]) -> Vec<f64>> Controller for FnController<F> {
    fn control(&self, state: &[f64]) -> Result<Vec<f64>, ControllerError> {
        Ok((self.0)(state))
    }
}

/// Build a ReLU MLP with the given hidden layer sizes that computes exactly
/// `K x + b`.
///
/// Each hidden layer hosts the identity gadget `x = relu(x) - relu(-x)`:
/// units `2j` and `2j + 1` carry `relu(x_j)` and `relu(-x_j)`, so every
/// hidden size must be at least `2 n`. Remaining units have zero weights.
pub fn embed_linear_as_mlp(
    k: &[Vec<f64>],
    b: &[f64],
    hidden_sizes: &[usize],
) -> Result<MlpController, ControllerError> {
    let m = k.len();
    let n = if m > 0 { k[0].len() } else { 0 };
    if m == 0 || n == 0 || b.len() != m {
        return Err(ControllerError::EmptyNetwork);
    }
    for (li, &size) in hidden_sizes.iter().enumerate() {
        if size < 2 * n {
            return Err(ControllerError::GadgetTooSmall { layer: li, size, needed: 2 * n });
        }
    }
    let mut layers = Vec::with_capacity(hidden_sizes.len() + 1);
    let mut prev = n;
    for (li, &size) in hidden_sizes.iter().enumerate() {
        let mut weights = alloc::vec![alloc::vec![0.0; prev]; size];
        for j in 0..n {
            if li == 0 {
                weights[2 * j][j] = 1.0;
                weights[2 * j + 1][j] = -1.0;
            } else {
                // previous layer carries (relu(x_j), relu(-x_j)) pairs
                weights[2 * j][2 * j] = 1.0;
                weights[2 * j][2 * j + 1] = -1.0;
                weights[2 * j + 1][2 * j] = -1.0;
                weights[2 * j + 1][2 * j + 1] = 1.0;
            }
        }
        layers.push(Layer { weights, bias: alloc::vec![0.0; size], activation: Activation::Relu });
        prev = size;
    }
    let mut out_weights = alloc::vec![alloc::vec![0.0; prev]; m];
    for i in 0..m {
        for j in 0..n {
            out_weights[i][2 * j] = k[i][j];
            out_weights[i][2 * j + 1] = -k[i][j];
        }
    }
    layers.push(Layer { weights: out_weights, bias: b.to_vec(), activation: Activation::Linear });
    MlpController::new(layers, alloc::vec![1.0; m])
}
