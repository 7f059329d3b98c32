use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Gradients, NnError, Parameters};
use crate::linalg::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    ReLU,
    Tanh,
    Sigmoid,
    Identity,
}

impl Activation {
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::ReLU => z.max(0.0),
            Activation::Tanh => z.tanh(),
            Activation::Sigmoid => sigmoid(z),
            Activation::Identity => z,
        }
    }

    /// Derivative expressed through the activation output `a`.
    pub fn derivative_from_output(self, a: f64) -> f64 {
        match self {
            Activation::ReLU => {
                if a > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - a * a,
            Activation::Sigmoid => a * (1.0 - a),
            Activation::Identity => 1.0,
        }
    }

    pub fn code(self) -> u8 {
        match self {
            Activation::ReLU => 1,
            Activation::Tanh => 2,
            Activation::Sigmoid => 3,
            Activation::Identity => 4,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            1 => Some(Activation::ReLU),
            2 => Some(Activation::Tanh),
            3 => Some(Activation::Sigmoid),
            4 => Some(Activation::Identity),
            _ => None,
        }
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    /// out × in
    pub weights: Matrix,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl DenseLayer {
    pub fn new(weights: Matrix, bias: Vec<f64>, activation: Activation) -> Result<Self, NnError> {
        if weights.rows() != bias.len() {
            return Err(NnError::Shape(format!(
                "weights {}x{} vs bias {}",
                weights.rows(),
                weights.cols(),
                bias.len()
            )));
        }
        Ok(Self {
            weights,
            bias,
            activation,
        })
    }

    /// Glorot-uniform weights, zero bias.
    pub fn glorot<R: Rng>(
        input: usize,
        output: usize,
        activation: Activation,
        rng: &mut R,
    ) -> Self {
        let bound = (6.0 / (input + output) as f64).sqrt();
        let data = (0..input * output)
            .map(|_| rng.gen_range(-bound..bound))
            .collect();
        Self {
            weights: Matrix::from_vec(output, input, data),
            bias: vec![0.0; output],
            activation,
        }
    }

    pub fn zeros(input: usize, output: usize, activation: Activation) -> Self {
        Self {
            weights: Matrix::zeros(output, input),
            bias: vec![0.0; output],
            activation,
        }
    }

    pub fn input_width(&self) -> usize {
        self.weights.cols()
    }

    pub fn output_width(&self) -> usize {
        self.weights.rows()
    }

    /// Row-wise `act(x·Wᵀ + b)` for a batch `x` (batch × in).
    pub fn forward(&self, x: &Matrix) -> Result<Matrix, NnError> {
        if x.cols() != self.input_width() {
            return Err(NnError::Shape(format!(
                "input width {} vs layer input {}",
                x.cols(),
                self.input_width()
            )));
        }
        let mut z = x.matmul_t(&self.weights);
        for r in 0..z.rows() {
            for (v, b) in z.row_mut(r).iter_mut().zip(&self.bias) {
                *v = self.activation.apply(*v + b);
            }
        }
        Ok(z)
    }

    pub fn forward_vec(&self, x: &[f64]) -> Result<Vec<f64>, NnError> {
        Ok(self
            .forward(&Matrix::from_vec(1, x.len(), x.to_vec()))?
            .into_vec())
    }

    /// Gradients given the layer input, its output and `dL/d(output)`.
    /// Returns `(dW, db, dL/d(input))`.
    pub fn backward(
        &self,
        input: &Matrix,
        output: &Matrix,
        upstream: &Matrix,
    ) -> (Matrix, Vec<f64>, Matrix) {
        let mut dz = upstream.clone();
        for r in 0..dz.rows() {
            for (d, &a) in dz.row_mut(r).iter_mut().zip(output.row(r)) {
                *d *= self.activation.derivative_from_output(a);
            }
        }
        let dw = dz.t_matmul(input);
        let db = dz.column_sums();
        let dx = dz.matmul(&self.weights);
        (dw, db, dx)
    }
}

impl Parameters for DenseLayer {
    fn tensors(&self) -> Vec<&[f64]> {
        vec![self.weights.as_slice(), &self.bias]
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        vec![self.weights.as_mut_slice(), &mut self.bias]
    }

    fn tensor_names(&self) -> Vec<String> {
        vec!["weights".into(), "bias".into()]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<DenseLayer>,
}

/// Intermediates recorded by [`Mlp::forward`]: `activations[0]` is the input,
/// `activations[l + 1]` the output of layer `l`.
#[derive(Debug, Clone)]
pub struct MlpCache {
    pub activations: Vec<Matrix>,
    shapes: Vec<(usize, usize)>,
}

impl MlpCache {
    pub fn output(&self) -> &Matrix {
        self.activations
            .last()
            .expect("cache holds the input at least")
    }
}

impl Mlp {
    pub fn new(layers: Vec<DenseLayer>) -> Result<Self, NnError> {
        for pair in layers.windows(2) {
            if pair[0].output_width() != pair[1].input_width() {
                return Err(NnError::Shape(format!(
                    "layer output {} feeds input {}",
                    pair[0].output_width(),
                    pair[1].input_width()
                )));
            }
        }
        Ok(Self { layers })
    }

    /// Glorot-initialized MLP with the given widths; `activations` has one
    /// entry per layer.
    pub fn glorot<R: Rng>(widths: &[usize], activations: &[Activation], rng: &mut R) -> Self {
        assert_eq!(widths.len(), activations.len() + 1);
        let layers = widths
            .windows(2)
            .zip(activations)
            .map(|(w, &act)| DenseLayer::glorot(w[0], w[1], act, rng))
            .collect();
        Self { layers }
    }

    pub fn input_width(&self) -> usize {
        self.layers.first().map_or(0, DenseLayer::input_width)
    }

    pub fn output_width(&self) -> usize {
        self.layers.last().map_or(0, DenseLayer::output_width)
    }

    fn shapes(&self) -> Vec<(usize, usize)> {
        self.layers.iter().map(|l| l.weights.shape()).collect()
    }

    pub fn forward(&self, input: &Matrix) -> Result<MlpCache, NnError> {
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(input.clone());
        for layer in &self.layers {
            let next = layer.forward(activations.last().unwrap())?;
            activations.push(next);
        }
        Ok(MlpCache {
            activations,
            shapes: self.shapes(),
        })
    }

    pub fn forward_vec(&self, x: &[f64]) -> Result<Vec<f64>, NnError> {
        let cache = self.forward(&Matrix::from_vec(1, x.len(), x.to_vec()))?;
        Ok(cache.output().as_slice().to_vec())
    }

    /// Reverse pass. Returns parameter gradients (in [`Parameters`] order)
    /// and the gradient with respect to the input batch.
    pub fn backprop(
        &self,
        cache: &MlpCache,
        upstream: &Matrix,
    ) -> Result<(Gradients, Matrix), NnError> {
        if cache.shapes != self.shapes() || cache.activations.len() != self.layers.len() + 1 {
            return Err(NnError::StaleCache(
                "layer shapes changed since forward".into(),
            ));
        }
        if upstream.shape() != cache.output().shape() {
            return Err(NnError::StaleCache(format!(
                "upstream {:?} vs output {:?}",
                upstream.shape(),
                cache.output().shape()
            )));
        }
        let mut grads = vec![Vec::new(); 2 * self.layers.len()];
        let mut delta = upstream.clone();
        for (l, layer) in self.layers.iter().enumerate().rev() {
            let (dw, db, dx) =
                layer.backward(&cache.activations[l], &cache.activations[l + 1], &delta);
            grads[2 * l] = dw.into_vec();
            grads[2 * l + 1] = db;
            delta = dx;
        }
        Ok((Gradients(grads), delta))
    }
}

impl Parameters for Mlp {
    fn tensors(&self) -> Vec<&[f64]> {
        self.layers.iter().flat_map(|l| l.tensors()).collect()
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        self.layers
            .iter_mut()
            .flat_map(|l| l.tensors_mut())
            .collect()
    }

    fn tensor_names(&self) -> Vec<String> {
        (0..self.layers.len())
            .flat_map(|i| [format!("layer{i}.weights"), format!("layer{i}.bias")])
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_network() {
        let layer =
            DenseLayer::new(Matrix::identity(3), vec![0.0; 3], Activation::Identity).unwrap();
        let mlp = Mlp::new(vec![layer]).unwrap();
        assert_eq!(
            mlp.forward_vec(&[1.5, -2.0, 0.25]).unwrap(),
            vec![1.5, -2.0, 0.25]
        );
    }

    #[test]
    fn relu_kills_negative_input() {
        let layer = DenseLayer::new(Matrix::identity(3), vec![0.0; 3], Activation::ReLU).unwrap();
        assert_eq!(
            layer.forward_vec(&[-1.0, -0.5, -3.0]).unwrap(),
            vec![0.0; 3]
        );
    }

    #[test]
    fn shape_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let a = DenseLayer::glorot(3, 4, Activation::ReLU, &mut rng);
        let b = DenseLayer::glorot(5, 2, Activation::ReLU, &mut rng);
        assert!(matches!(
            Mlp::new(vec![a.clone(), b]),
            Err(NnError::Shape(_))
        ));
        assert!(matches!(a.forward_vec(&[1.0, 2.0]), Err(NnError::Shape(_))));
        assert!(DenseLayer::new(Matrix::zeros(2, 2), vec![0.0; 3], Activation::ReLU).is_err());
    }

    #[test]
    fn zero_upstream_gives_zero_gradients() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mlp = Mlp::glorot(
            &[4, 5, 3],
            &[Activation::Tanh, Activation::Identity],
            &mut rng,
        );
        let x = Matrix::from_vec(2, 4, (0..8).map(|i| i as f64 * 0.1).collect());
        let cache = mlp.forward(&x).unwrap();
        let (g, dx) = mlp.backprop(&cache, &Matrix::zeros(2, 3)).unwrap();
        assert!(g.is_zero());
        assert!(dx.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn linear_layer_closed_form() {
        // loss = sum of outputs: dW[j][i] = x[i], db = 1
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mlp = Mlp::glorot(&[3, 2], &[Activation::Identity], &mut rng);
        let x = [0.5, -1.0, 2.0];
        let cache = mlp.forward(&Matrix::from_vec(1, 3, x.to_vec())).unwrap();
        let (g, _) = mlp
            .backprop(&cache, &Matrix::from_vec(1, 2, vec![1.0, 1.0]))
            .unwrap();
        assert_eq!(g.0[0], vec![0.5, -1.0, 2.0, 0.5, -1.0, 2.0]);
        assert_eq!(g.0[1], vec![1.0, 1.0]);
    }

    #[test]
    fn stale_cache_detected() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mlp = Mlp::glorot(&[3, 2], &[Activation::Identity], &mut rng);
        let other = Mlp::glorot(&[3, 4], &[Activation::Identity], &mut rng);
        let cache = other.forward(&Matrix::zeros(1, 3)).unwrap();
        assert!(matches!(
            mlp.backprop(&cache, &Matrix::zeros(1, 2)),
            Err(NnError::StaleCache(_))
        ));
        let cache = mlp.forward(&Matrix::zeros(1, 3)).unwrap();
        assert!(matches!(
            mlp.backprop(&cache, &Matrix::zeros(2, 2)),
            Err(NnError::StaleCache(_))
        ));
    }

    #[test]
    fn sigmoid_is_stable() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-800.0) >= 0.0);
        assert!(sigmoid(800.0) <= 1.0);
    }
}
