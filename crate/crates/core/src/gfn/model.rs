use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{GfnConfig, GfnError, GraphEmbedding};
use crate::linalg::Matrix;
use crate::nn::{
    softmax, softmax_cross_entropy, Activation, DenseLayer, Gradients, LayerBlob, Mlp, ModelBlob,
    NnError, Parameters, SectionTag, TensorBlob,
};

/// Node MLP, SUM readout, post-pool layer and a classification head used
/// only during pretraining.
///
/// Rows of X^G are standardized with fixed per-column `input_shift` and
/// `input_scale` before the node MLP; these are fitted once on training data
/// and are not trained.
#[derive(Debug, Clone, PartialEq)]
pub struct GfnModel {
    pub config: GfnConfig,
    pub input_shift: Vec<f64>,
    pub input_scale: Vec<f64>,
    pub node_mlp: Mlp,
    pub post_pool: DenseLayer,
    pub head: DenseLayer,
}

/// Everything the reverse pass needs from one forward pass over a graph.
#[derive(Debug, Clone)]
pub struct GfnTrace {
    node_cache: crate::nn::MlpCache,
    pooled: Matrix,
    embedding: Matrix,
    pub logits: Vec<f64>,
}

impl GfnTrace {
    pub fn embedding(&self) -> &[f64] {
        self.embedding.as_slice()
    }
}

impl GfnModel {
    pub fn new(config: GfnConfig, feature_width: usize, seed: u64) -> Result<Self, GfnError> {
        config.validate()?;
        let input = config.input_width(feature_width);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let node_mlp = Mlp::glorot(
            &[input, config.node_hidden, config.node_hidden],
            &[Activation::ReLU, Activation::ReLU],
            &mut rng,
        );
        let post_pool = DenseLayer::glorot(
            config.node_hidden,
            config.embed_dim,
            Activation::ReLU,
            &mut rng,
        );
        let head = DenseLayer::glorot(
            config.embed_dim,
            config.class_count,
            Activation::Identity,
            &mut rng,
        );
        Ok(Self {
            config,
            input_shift: vec![0.0; input],
            input_scale: vec![1.0; input],
            node_mlp,
            post_pool,
            head,
        })
    }

    pub fn input_width(&self) -> usize {
        self.node_mlp.input_width()
    }

    /// Sets the standardization to the column mean and 1/std of all rows of
    /// `inputs`; zero-variance columns keep scale 1.
    pub fn fit_normalization<'a>(&mut self, inputs: impl IntoIterator<Item = &'a Matrix>) {
        let w = self.input_width();
        let mut count = 0.0;
        let mut mean = vec![0.0; w];
        let mut m2 = vec![0.0; w];
        for x in inputs {
            for r in 0..x.rows() {
                count += 1.0;
                for (c, &v) in x.row(r).iter().enumerate() {
                    let d = v - mean[c];
                    mean[c] += d / count;
                    m2[c] += d * (v - mean[c]);
                }
            }
        }
        if count == 0.0 {
            return;
        }
        self.input_shift = mean;
        self.input_scale = m2
            .iter()
            .map(|&s| {
                let std = (s / count).sqrt();
                if std > 1e-12 {
                    1.0 / std
                } else {
                    1.0
                }
            })
            .collect();
    }

    fn normalize(&self, xg: &Matrix) -> Matrix {
        let mut x = xg.clone();
        for r in 0..x.rows() {
            for ((v, s), k) in x
                .row_mut(r)
                .iter_mut()
                .zip(&self.input_shift)
                .zip(&self.input_scale)
            {
                *v = (*v - s) * k;
            }
        }
        x
    }

    pub fn forward(&self, xg: &Matrix) -> Result<GfnTrace, GfnError> {
        if xg.cols() != self.input_width() {
            return Err(GfnError::Shape(format!(
                "X^G width {} vs model input {}",
                xg.cols(),
                self.input_width()
            )));
        }
        let node_cache = self.node_mlp.forward(&self.normalize(xg))?;
        let sums = node_cache.output().column_sums();
        let pooled = Matrix::from_vec(1, sums.len(), sums);
        let embedding = self.post_pool.forward(&pooled)?;
        let logits = self.head.forward(&embedding)?.into_vec();
        Ok(GfnTrace {
            node_cache,
            pooled,
            embedding,
            logits,
        })
    }

    /// Graph embedding: post-pool activation of the summed node outputs.
    pub fn encode(&self, xg: &Matrix, window_index: usize) -> Result<GraphEmbedding, GfnError> {
        let trace = self.forward(xg)?;
        Ok(GraphEmbedding {
            window_index,
            vector: trace.embedding.into_vec(),
        })
    }

    pub fn predict_proba(&self, xg: &Matrix) -> Result<Vec<f64>, GfnError> {
        Ok(softmax(&self.forward(xg)?.logits))
    }

    /// Cross-entropy loss of the head on one graph with its gradients.
    pub fn loss_and_gradients(
        &self,
        xg: &Matrix,
        class: usize,
    ) -> Result<(f64, Gradients), GfnError> {
        let trace = self.forward(xg)?;
        let (loss, dlogits) = softmax_cross_entropy(&trace.logits, class)?;
        Ok((loss, self.backward(&trace, &dlogits)?))
    }

    pub fn backward(&self, trace: &GfnTrace, dlogits: &[f64]) -> Result<Gradients, GfnError> {
        let up = Matrix::from_vec(1, dlogits.len(), dlogits.to_vec());
        let head_out = Matrix::from_vec(1, trace.logits.len(), trace.logits.clone());
        let (dw_head, db_head, d_embed) = self.head.backward(&trace.embedding, &head_out, &up);
        let (dw_pool, db_pool, d_pooled) =
            self.post_pool
                .backward(&trace.pooled, &trace.embedding, &d_embed);
        // SUM readout: every node row receives the pooled gradient
        let n = trace.node_cache.output().rows();
        let mut d_nodes = Matrix::zeros(n, d_pooled.cols());
        for r in 0..n {
            d_nodes.row_mut(r).copy_from_slice(d_pooled.row(0));
        }
        let (mut grads, _) = self.node_mlp.backprop(&trace.node_cache, &d_nodes)?;
        grads
            .0
            .extend([dw_pool.into_vec(), db_pool, dw_head.into_vec(), db_head]);
        Ok(grads)
    }

    pub fn save(&self) -> Vec<u8> {
        let mut layers = vec![LayerBlob {
            activation: 0,
            tensors: vec![
                TensorBlob::vector(&self.input_shift),
                TensorBlob::vector(&self.input_scale),
                TensorBlob::vector(&[self.config.k as f64]),
            ],
        }];
        layers.extend(self.node_mlp.layers.iter().map(DenseLayer::to_blob));
        layers.push(self.post_pool.to_blob());
        layers.push(self.head.to_blob());
        ModelBlob {
            tag: SectionTag::Gfn,
            layers,
        }
        .encode()
    }

    pub fn load(bytes: &[u8]) -> Result<Self, GfnError> {
        let blob = ModelBlob::decode(bytes)?;
        blob.expect_tag(SectionTag::Gfn)?;
        let mut layers = blob.layers.into_iter();
        let norm = layers
            .next()
            .ok_or_else(|| NnError::Format("missing normalization section".into()))?;
        let [shift, scale, k]: [TensorBlob; 3] = norm
            .tensors
            .try_into()
            .map_err(|_| NnError::Format("normalization section needs 3 tensors".into()))?;
        let k = k.into_vector()?;
        let mut dense: Vec<DenseLayer> = layers
            .map(DenseLayer::from_blob)
            .collect::<Result<_, _>>()?;
        if dense.len() < 3 || k.len() != 1 {
            return Err(NnError::Format("GFN needs node layers, post-pool and head".into()).into());
        }
        let head = dense.pop().unwrap();
        let post_pool = dense.pop().unwrap();
        let node_mlp = Mlp::new(dense).map_err(|e| NnError::Format(e.to_string()))?;
        let config = GfnConfig {
            k: k[0] as usize,
            node_hidden: node_mlp.output_width(),
            embed_dim: post_pool.output_width(),
            class_count: head.output_width(),
        };
        let model = Self {
            config,
            input_shift: shift.into_vector()?,
            input_scale: scale.into_vector()?,
            node_mlp,
            post_pool,
            head,
        };
        if model.input_shift.len() != model.input_width()
            || model.input_scale.len() != model.input_width()
            || model.post_pool.input_width() != model.node_mlp.output_width()
            || model.head.input_width() != model.post_pool.output_width()
        {
            return Err(NnError::Format("inconsistent GFN layer shapes".into()).into());
        }
        Ok(model)
    }
}

impl Parameters for GfnModel {
    fn tensors(&self) -> Vec<&[f64]> {
        let mut t = self.node_mlp.tensors();
        t.extend(self.post_pool.tensors());
        t.extend(self.head.tensors());
        t
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut t = self.node_mlp.tensors_mut();
        t.extend(self.post_pool.tensors_mut());
        t.extend(self.head.tensors_mut());
        t
    }

    fn tensor_names(&self) -> Vec<String> {
        let mut names: Vec<String> = self
            .node_mlp
            .tensor_names()
            .into_iter()
            .map(|n| format!("gfn.node_mlp.{n}"))
            .collect();
        names.extend(
            [
                "gfn.post_pool.weights",
                "gfn.post_pool.bias",
                "gfn.head.weights",
                "gfn.head.bias",
            ]
            .map(String::from),
        );
        names
    }
}
