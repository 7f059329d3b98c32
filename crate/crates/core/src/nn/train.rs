use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{Gradients, NnError, Optimizer, Parameters, TrainConfig};

/// Mini-batch training loop shared by both models.
///
/// Each epoch shuffles the `n` sample indices, evaluates `loss_grad` per
/// sample (in parallel), sums batch gradients in sample order, averages and
/// steps the optimizer. Returns the mean pre-update loss per epoch.
pub fn fit<M, E, F>(model: &mut M, n: usize, cfg: &TrainConfig, loss_grad: F) -> Result<Vec<f64>, E>
where
    M: Parameters + Sync,
    E: From<NnError> + Send,
    F: Fn(&M, usize) -> Result<(f64, Gradients), E> + Sync,
{
    cfg.validate()?;
    if n == 0 {
        return Err(NnError::EmptyData.into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x05ee_d0fb_a7c4);
    let mut optimizer = Optimizer::from_config(cfg);
    let mut order: Vec<usize> = (0..n).collect();
    let mut history = Vec::with_capacity(cfg.epochs);
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let results: Vec<(f64, Gradients)> = batch
                .par_iter()
                .map(|&i| loss_grad(model, i))
                .collect::<Result<_, E>>()?;
            let mut grads = Gradients::zeros_like(model);
            for (loss, g) in &results {
                epoch_loss += loss;
                grads.add_assign(g);
            }
            grads.scale(1.0 / batch.len() as f64);
            optimizer.step(model, &grads)?;
        }
        history.push(epoch_loss / n as f64);
    }
    Ok(history)
}
