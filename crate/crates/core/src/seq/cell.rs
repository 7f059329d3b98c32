use rand::Rng;

use crate::linalg::{dot, Matrix};
use crate::nn::{
    sigmoid, Activation, DenseLayer, Gradients, LayerBlob, NnError, Parameters, TensorBlob,
};

use super::SeqError;

pub const GATES: [&str; 4] = ["forget", "input", "candidate", "output"];

/// One gate: `hidden × (hidden + embed_dim)` weights acting on `[h, x]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

impl Gate {
    fn preactivation(&self, z: &[f64]) -> Vec<f64> {
        (0..self.weights.rows())
            .map(|r| dot(self.weights.row(r), z) + self.bias[r])
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams {
    pub forget: Gate,
    pub input: Gate,
    pub candidate: Gate,
    pub output: Gate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

impl LstmState {
    pub fn zeros(hidden: usize) -> Self {
        Self {
            h: vec![0.0; hidden],
            c: vec![0.0; hidden],
        }
    }
}

/// Values recorded at one step for the reverse pass.
#[derive(Debug, Clone)]
pub(crate) struct StepCache {
    z: Vec<f64>,
    c_prev: Vec<f64>,
    f: Vec<f64>,
    i: Vec<f64>,
    g: Vec<f64>,
    o: Vec<f64>,
    tanh_c: Vec<f64>,
}

impl LstmParams {
    pub fn zeros(hidden: usize, embed_dim: usize) -> Self {
        let gate = || Gate {
            weights: Matrix::zeros(hidden, hidden + embed_dim),
            bias: vec![0.0; hidden],
        };
        Self {
            forget: gate(),
            input: gate(),
            candidate: gate(),
            output: gate(),
        }
    }

    pub fn glorot<R: Rng>(hidden: usize, embed_dim: usize, rng: &mut R) -> Self {
        let mut gate = || {
            let l = DenseLayer::glorot(hidden + embed_dim, hidden, Activation::Identity, rng);
            Gate {
                weights: l.weights,
                bias: l.bias,
            }
        };
        Self {
            forget: gate(),
            input: gate(),
            candidate: gate(),
            output: gate(),
        }
    }

    pub fn hidden(&self) -> usize {
        self.forget.weights.rows()
    }

    pub fn embed_dim(&self) -> usize {
        self.forget.weights.cols() - self.hidden()
    }

    fn gates(&self) -> [&Gate; 4] {
        [&self.forget, &self.input, &self.candidate, &self.output]
    }

    fn gates_mut(&mut self) -> [&mut Gate; 4] {
        [
            &mut self.forget,
            &mut self.input,
            &mut self.candidate,
            &mut self.output,
        ]
    }

    pub(crate) fn step_cached(
        &self,
        x: &[f64],
        state: &LstmState,
    ) -> Result<(LstmState, StepCache), SeqError> {
        let hidden = self.hidden();
        if x.len() != self.embed_dim() {
            return Err(SeqError::Shape(format!(
                "input width {} vs {}",
                x.len(),
                self.embed_dim()
            )));
        }
        if state.h.len() != hidden || state.c.len() != hidden {
            return Err(SeqError::Shape("state width".into()));
        }
        let mut z = Vec::with_capacity(hidden + x.len());
        z.extend_from_slice(&state.h);
        z.extend_from_slice(x);

        let f: Vec<f64> = self
            .forget
            .preactivation(&z)
            .into_iter()
            .map(sigmoid)
            .collect();
        let i: Vec<f64> = self
            .input
            .preactivation(&z)
            .into_iter()
            .map(sigmoid)
            .collect();
        let g: Vec<f64> = self
            .candidate
            .preactivation(&z)
            .into_iter()
            .map(f64::tanh)
            .collect();
        let o: Vec<f64> = self
            .output
            .preactivation(&z)
            .into_iter()
            .map(sigmoid)
            .collect();
        let c: Vec<f64> = (0..hidden)
            .map(|k| f[k] * state.c[k] + i[k] * g[k])
            .collect();
        let tanh_c: Vec<f64> = c.iter().map(|v| v.tanh()).collect();
        let h: Vec<f64> = (0..hidden).map(|k| o[k] * tanh_c[k]).collect();
        let cache = StepCache {
            z,
            c_prev: state.c.clone(),
            f,
            i,
            g,
            o,
            tanh_c,
        };
        Ok((LstmState { h, c }, cache))
    }

    /// Reverse pass over cached steps given `dL/dh_T`. Gradients are returned
    /// in gate order (weights, bias per gate).
    pub(crate) fn backward(&self, steps: &[StepCache], dh_last: &[f64]) -> Gradients {
        let hidden = self.hidden();
        let width = self.forget.weights.cols();
        let mut dw: Vec<Matrix> = (0..4).map(|_| Matrix::zeros(hidden, width)).collect();
        let mut db: Vec<Vec<f64>> = vec![vec![0.0; hidden]; 4];
        let mut dh = dh_last.to_vec();
        let mut dc = vec![0.0; hidden];
        for s in steps.iter().rev() {
            let mut da: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; hidden]);
            for k in 0..hidden {
                let d_o = dh[k] * s.tanh_c[k];
                dc[k] += dh[k] * s.o[k] * (1.0 - s.tanh_c[k] * s.tanh_c[k]);
                let d_f = dc[k] * s.c_prev[k];
                let d_i = dc[k] * s.g[k];
                let d_g = dc[k] * s.i[k];
                da[0][k] = d_f * s.f[k] * (1.0 - s.f[k]);
                da[1][k] = d_i * s.i[k] * (1.0 - s.i[k]);
                da[2][k] = d_g * (1.0 - s.g[k] * s.g[k]);
                da[3][k] = d_o * s.o[k] * (1.0 - s.o[k]);
                dc[k] *= s.f[k];
            }
            let mut dz = vec![0.0; width];
            for (gate_idx, gate) in self.gates().into_iter().enumerate() {
                for k in 0..hidden {
                    let a = da[gate_idx][k];
                    if a == 0.0 {
                        continue;
                    }
                    db[gate_idx][k] += a;
                    for (w, &zv) in dw[gate_idx].row_mut(k).iter_mut().zip(&s.z) {
                        *w += a * zv;
                    }
                    for (d, &w) in dz.iter_mut().zip(gate.weights.row(k)) {
                        *d += a * w;
                    }
                }
            }
            dh.copy_from_slice(&dz[..hidden]);
        }
        let mut out = Vec::with_capacity(8);
        for (w, b) in dw.into_iter().zip(db) {
            out.push(w.into_vec());
            out.push(b);
        }
        Gradients(out)
    }

    pub(crate) fn to_blob(&self) -> LayerBlob {
        LayerBlob {
            activation: 0,
            tensors: self
                .gates()
                .into_iter()
                .flat_map(|g| [TensorBlob::matrix(&g.weights), TensorBlob::vector(&g.bias)])
                .collect(),
        }
    }

    pub(crate) fn from_blob(layer: LayerBlob) -> Result<Self, NnError> {
        if layer.tensors.len() != 8 {
            return Err(NnError::Format("LSTM section needs 8 tensors".into()));
        }
        let mut it = layer.tensors.into_iter();
        let mut gate = || -> Result<Gate, NnError> {
            let weights = it.next().unwrap().into_matrix()?;
            let bias = it.next().unwrap().into_vector()?;
            Ok(Gate { weights, bias })
        };
        let p = Self {
            forget: gate()?,
            input: gate()?,
            candidate: gate()?,
            output: gate()?,
        };
        let shape = p.forget.weights.shape();
        let ok = p.forget.weights.cols() > p.hidden()
            && p.gates()
                .iter()
                .all(|g| g.weights.shape() == shape && g.bias.len() == shape.0);
        if !ok {
            return Err(NnError::Format("inconsistent LSTM gate shapes".into()));
        }
        Ok(p)
    }
}

pub fn lstm_cell_step(
    params: &LstmParams,
    x: &[f64],
    state: &LstmState,
) -> Result<LstmState, SeqError> {
    Ok(params.step_cached(x, state)?.0)
}

impl Parameters for LstmParams {
    fn tensors(&self) -> Vec<&[f64]> {
        self.gates()
            .into_iter()
            .flat_map(|g| [g.weights.as_slice(), g.bias.as_slice()])
            .collect()
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        self.gates_mut()
            .into_iter()
            .flat_map(|g| [g.weights.as_mut_slice(), g.bias.as_mut_slice()])
            .collect()
    }

    fn tensor_names(&self) -> Vec<String> {
        GATES
            .iter()
            .flat_map(|g| [format!("lstm.{g}.weights"), format!("lstm.{g}.bias")])
            .collect()
    }
}
