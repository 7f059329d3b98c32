//! Unidirectional LSTM over an address's chronological window embeddings,
//! followed by an MLP head over the final hidden state.

mod cell;

pub use cell::{lstm_cell_step, Gate, LstmParams, LstmState, GATES};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::Matrix;
use crate::nn::{
    fit, softmax, softmax_cross_entropy, Activation, DenseLayer, Gradients, LayerBlob, Mlp,
    ModelBlob, NnError, Parameters, SectionTag, TensorBlob, TrainConfig,
};

#[derive(Debug, Error, PartialEq)]
pub enum SeqError {
    #[error("empty embedding sequence")]
    EmptySequence,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid sequence configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Nn(#[from] NnError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SeqConfig {
    pub hidden: usize,
    pub head_hidden: usize,
    pub class_count: usize,
    pub max_seq_len: usize,
}

impl Default for SeqConfig {
    fn default() -> Self {
        Self {
            hidden: 64,
            head_hidden: 64,
            class_count: 4,
            max_seq_len: 64,
        }
    }
}

impl SeqConfig {
    pub fn validate(&self) -> Result<(), SeqError> {
        if self.hidden == 0
            || self.head_hidden == 0
            || self.class_count == 0
            || self.max_seq_len == 0
        {
            return Err(SeqError::Config(
                "widths and max_seq_len must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// An address's embedding sequence, oldest window first.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSequence {
    pub embeddings: Vec<Vec<f64>>,
    pub label: usize,
}

/// LSTM plus MLP head. Inputs are standardized with fixed per-column
/// `input_shift` / `input_scale` before entering the cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SeqModel {
    pub input_shift: Vec<f64>,
    pub input_scale: Vec<f64>,
    pub max_seq_len: usize,
    pub lstm: LstmParams,
    pub head: Mlp,
}

impl SeqModel {
    pub fn new(config: &SeqConfig, embed_dim: usize, seed: u64) -> Result<Self, SeqError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lstm = LstmParams::glorot(config.hidden, embed_dim, &mut rng);
        let head = Mlp::glorot(
            &[config.hidden, config.head_hidden, config.class_count],
            &[Activation::ReLU, Activation::Identity],
            &mut rng,
        );
        Ok(Self::from_parts(lstm, head, config.max_seq_len))
    }

    /// All parameters zero; the classifier then outputs the uniform distribution.
    pub fn zeros(config: &SeqConfig, embed_dim: usize) -> Result<Self, SeqError> {
        config.validate()?;
        let lstm = LstmParams::zeros(config.hidden, embed_dim);
        let head = Mlp::new(vec![
            DenseLayer::zeros(config.hidden, config.head_hidden, Activation::ReLU),
            DenseLayer::zeros(config.head_hidden, config.class_count, Activation::Identity),
        ])?;
        Ok(Self::from_parts(lstm, head, config.max_seq_len))
    }

    pub fn from_parts(lstm: LstmParams, head: Mlp, max_seq_len: usize) -> Self {
        let d = lstm.embed_dim();
        Self {
            input_shift: vec![0.0; d],
            input_scale: vec![1.0; d],
            max_seq_len,
            lstm,
            head,
        }
    }

    pub fn embed_dim(&self) -> usize {
        self.lstm.embed_dim()
    }

    pub fn class_count(&self) -> usize {
        self.head.output_width()
    }

    pub fn fit_normalization<'a>(&mut self, vectors: impl IntoIterator<Item = &'a Vec<f64>>) {
        let d = self.embed_dim();
        let mut n = 0.0;
        let mut mean = vec![0.0; d];
        let mut m2 = vec![0.0; d];
        for v in vectors {
            if v.len() != d {
                continue;
            }
            n += 1.0;
            for (c, &x) in v.iter().enumerate() {
                let delta = x - mean[c];
                mean[c] += delta / n;
                m2[c] += delta * (x - mean[c]);
            }
        }
        if n == 0.0 {
            return;
        }
        self.input_shift = mean;
        self.input_scale = m2
            .iter()
            .map(|&s| {
                let std = (s / n).sqrt();
                if std > 1e-12 {
                    1.0 / std
                } else {
                    1.0
                }
            })
            .collect();
    }

    fn window<'a>(&self, embeddings: &'a [Vec<f64>]) -> &'a [Vec<f64>] {
        let start = embeddings.len().saturating_sub(self.max_seq_len);
        &embeddings[start..]
    }

    fn run(&self, embeddings: &[Vec<f64>]) -> Result<(LstmState, Vec<cell::StepCache>), SeqError> {
        if embeddings.is_empty() {
            return Err(SeqError::EmptySequence);
        }
        let mut state = LstmState::zeros(self.lstm.hidden());
        let mut steps = Vec::with_capacity(embeddings.len());
        for x in self.window(embeddings) {
            if x.len() != self.embed_dim() {
                return Err(SeqError::Shape(format!(
                    "embedding width {} vs {}",
                    x.len(),
                    self.embed_dim()
                )));
            }
            let normed: Vec<f64> = x
                .iter()
                .zip(&self.input_shift)
                .zip(&self.input_scale)
                .map(|((v, s), k)| (v - s) * k)
                .collect();
            let (next, cache) = self.lstm.step_cached(&normed, &state)?;
            state = next;
            steps.push(cache);
        }
        Ok((state, steps))
    }

    pub fn logits(&self, embeddings: &[Vec<f64>]) -> Result<Vec<f64>, SeqError> {
        let (state, _) = self.run(embeddings)?;
        Ok(self.head.forward_vec(&state.h)?)
    }

    pub fn loss_and_gradients(
        &self,
        embeddings: &[Vec<f64>],
        class: usize,
    ) -> Result<(f64, Gradients), SeqError> {
        let (state, steps) = self.run(embeddings)?;
        let h = Matrix::from_vec(1, state.h.len(), state.h);
        let cache = self.head.forward(&h)?;
        let (loss, dlogits) = softmax_cross_entropy(cache.output().as_slice(), class)?;
        let up = Matrix::from_vec(1, dlogits.len(), dlogits);
        let (head_grads, dh) = self.head.backprop(&cache, &up)?;
        let mut grads = self.lstm.backward(&steps, dh.as_slice());
        grads.0.extend(head_grads.0);
        Ok((loss, grads))
    }

    pub fn save(&self) -> Vec<u8> {
        let mut layers = vec![
            LayerBlob {
                activation: 0,
                tensors: vec![
                    TensorBlob::vector(&self.input_shift),
                    TensorBlob::vector(&self.input_scale),
                    TensorBlob::vector(&[self.max_seq_len as f64]),
                ],
            },
            self.lstm.to_blob(),
        ];
        layers.extend(self.head.layers.iter().map(DenseLayer::to_blob));
        ModelBlob {
            tag: SectionTag::Lstm,
            layers,
        }
        .encode()
    }

    pub fn load(bytes: &[u8]) -> Result<Self, SeqError> {
        let blob = ModelBlob::decode(bytes)?;
        blob.expect_tag(SectionTag::Lstm)?;
        let mut layers = blob.layers.into_iter();
        let (norm, lstm) = match (layers.next(), layers.next()) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(NnError::Format("missing LSTM sections".into()).into()),
        };
        let [shift, scale, len]: [TensorBlob; 3] = norm
            .tensors
            .try_into()
            .map_err(|_| NnError::Format("normalization section needs 3 tensors".into()))?;
        let len = len.into_vector()?;
        let lstm = LstmParams::from_blob(lstm)?;
        let head_layers: Vec<DenseLayer> = layers
            .map(DenseLayer::from_blob)
            .collect::<Result<_, _>>()?;
        if head_layers.is_empty() || len.len() != 1 || len[0] < 1.0 {
            return Err(NnError::Format("LSTM model needs a head and max_seq_len".into()).into());
        }
        let head = Mlp::new(head_layers).map_err(|e| NnError::Format(e.to_string()))?;
        let model = Self {
            input_shift: shift.into_vector()?,
            input_scale: scale.into_vector()?,
            max_seq_len: len[0] as usize,
            lstm,
            head,
        };
        if model.head.input_width() != model.lstm.hidden()
            || model.input_shift.len() != model.embed_dim()
            || model.input_scale.len() != model.embed_dim()
        {
            return Err(NnError::Format("inconsistent LSTM model shapes".into()).into());
        }
        Ok(model)
    }
}

impl Parameters for SeqModel {
    fn tensors(&self) -> Vec<&[f64]> {
        let mut t = self.lstm.tensors();
        t.extend(self.head.tensors());
        t
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut t = self.lstm.tensors_mut();
        t.extend(self.head.tensors_mut());
        t
    }

    fn tensor_names(&self) -> Vec<String> {
        let mut names = self.lstm.tensor_names();
        names.extend(
            self.head
                .tensor_names()
                .into_iter()
                .map(|n| format!("head.{n}")),
        );
        names
    }
}

/// Class probabilities from the final hidden state after a left-to-right pass.
pub fn classify_sequence(model: &SeqModel, embeddings: &[Vec<f64>]) -> Result<Vec<f64>, SeqError> {
    Ok(softmax(&model.logits(embeddings)?))
}

pub fn train_classifier(
    data: &[LabeledSequence],
    config: &SeqConfig,
    train: &TrainConfig,
) -> Result<(SeqModel, Vec<f64>), SeqError> {
    config.validate()?;
    let first = data.first().ok_or(NnError::EmptyData)?;
    let embed_dim = first
        .embeddings
        .first()
        .ok_or(SeqError::EmptySequence)?
        .len();
    let mut model = SeqModel::new(config, embed_dim, train.seed)?;
    let limit = config.max_seq_len;
    model.fit_normalization(data.iter().flat_map(|s| {
        let start = s.embeddings.len().saturating_sub(limit);
        &s.embeddings[start..]
    }));
    let history = fit(&mut model, data.len(), train, |m: &SeqModel, i| {
        let s = &data[i];
        m.loss_and_gradients(&s.embeddings, s.label)
    })?;
    Ok((model, history))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn small() -> SeqConfig {
        SeqConfig {
            hidden: 5,
            head_hidden: 6,
            class_count: 4,
            max_seq_len: 64,
        }
    }

    fn random_seq(rng: &mut ChaCha8Rng, len: usize, d: usize) -> Vec<Vec<f64>> {
        (0..len)
            .map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect()
    }

    #[test]
    fn zero_model_is_uniform() {
        let m = SeqModel::zeros(&small(), 3).unwrap();
        let p = classify_sequence(&m, &[vec![1.0, 2.0, 3.0], vec![-1.0, 0.0, 4.0]]).unwrap();
        assert_eq!(p, vec![0.25; 4]);
    }

    #[test]
    fn empty_sequence_rejected() {
        let m = SeqModel::new(&small(), 3, 0).unwrap();
        assert_eq!(classify_sequence(&m, &[]), Err(SeqError::EmptySequence));
    }

    #[test]
    fn probabilities_sum_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = SeqModel::new(&small(), 3, 7).unwrap();
        for len in 1..6 {
            let p = classify_sequence(&m, &random_seq(&mut rng, len, 3)).unwrap();
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(p.iter().all(|&v| v > 0.0));
        }
    }

    #[test]
    fn composition_and_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = SeqModel::new(&small(), 3, 11).unwrap();
        let seq = random_seq(&mut rng, 2, 3);
        let s1 = lstm_cell_step(&m.lstm, &seq[0], &LstmState::zeros(5)).unwrap();
        let s2 = lstm_cell_step(&m.lstm, &seq[1], &s1).unwrap();
        let manual = softmax(&m.head.forward_vec(&s2.h).unwrap());
        assert_eq!(classify_sequence(&m, &seq).unwrap(), manual);
        let rev: Vec<_> = seq.iter().rev().cloned().collect();
        assert_ne!(classify_sequence(&m, &rev).unwrap(), manual);
    }

    #[test]
    fn truncates_to_recent_windows() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut m = SeqModel::new(&small(), 2, 1).unwrap();
        m.max_seq_len = 3;
        let seq = random_seq(&mut rng, 8, 2);
        assert_eq!(
            classify_sequence(&m, &seq).unwrap(),
            classify_sequence(&m, &seq[5..]).unwrap()
        );
    }

    #[test]
    fn zero_epochs_returns_initialization() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let data: Vec<_> = (0..3)
            .map(|i| LabeledSequence {
                embeddings: random_seq(&mut rng, 2 + i, 3),
                label: i,
            })
            .collect();
        let train = TrainConfig {
            epochs: 0,
            seed: 5,
            ..TrainConfig::default()
        };
        let (m, history) = train_classifier(&data, &small(), &train).unwrap();
        assert!(history.is_empty());
        assert_eq!(
            m.tensors(),
            SeqModel::new(&small(), 3, 5).unwrap().tensors()
        );
    }

    #[test]
    fn empty_dataset() {
        assert_eq!(
            train_classifier(&[], &small(), &TrainConfig::default()).unwrap_err(),
            SeqError::Nn(NnError::EmptyData)
        );
    }

    #[test]
    fn save_load_round_trip() {
        let mut m = SeqModel::new(&small(), 3, 8).unwrap();
        m.input_shift[1] = 0.5;
        m.max_seq_len = 17;
        assert_eq!(SeqModel::load(&m.save()).unwrap(), m);
        assert!(SeqModel::load(&m.head.save()).is_err());
    }
}
