use super::model::{trace_nll, GeneratorModel, ModelError};
use super::params::Adam;
use super::trace::GenerationTrace;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub batch_size: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 15,
            learning_rate: 1e-3,
            seed: 0,
            batch_size: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    /// Mean trace NLL over the epoch's updates.
    pub mean_nll: f64,
    pub seconds: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum TrainError {
    #[error("training corpus is empty")]
    EmptyCorpus,
    #[error("loss diverged (non-finite) in epoch {epoch}")]
    DivergedLoss { epoch: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Mini-batch Adam on mean trace NLL. Per-trace gradients are computed in
/// parallel and summed in a fixed order, so results depend only on the seed.
pub fn train(
    model: &mut GeneratorModel,
    corpus: &[GenerationTrace],
    cfg: &TrainConfig,
) -> Result<Vec<EpochLog>, TrainError> {
    if corpus.is_empty() {
        return Err(TrainError::EmptyCorpus);
    }
    let batch = cfg.batch_size.max(1);
    let mut opt = Adam::new(&model.params, cfg.learning_rate);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    let mut log = Vec::with_capacity(cfg.epochs);
    let start = Instant::now();
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for chunk in order.chunks(batch) {
            let results: Vec<Result<(f64, _), ModelError>> =
                chunk.par_iter().map(|&i| trace_nll(model, &corpus[i])).collect();
            let mut grad = model.params.zeros_like();
            for r in results {
                let (loss, g) = r?;
                if !loss.is_finite() {
                    return Err(TrainError::DivergedLoss { epoch });
                }
                total += loss;
                grad.add_assign(&g);
            }
            grad.scale(1.0 / chunk.len() as f64);
            opt.step(&mut model.params, &grad);
            if !model.params.all_finite() {
                return Err(TrainError::DivergedLoss { epoch });
            }
        }
        log.push(EpochLog {
            epoch,
            mean_nll: total / corpus.len() as f64,
            seconds: start.elapsed().as_secs_f64(),
        });
    }
    Ok(log)
}

/// `epoch,mean_nll,seconds` rows; `seconds` is cumulative wall time.
pub fn write_loss_csv(log: &[EpochLog], w: impl std::io::Write) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["epoch", "mean_nll", "seconds"])?;
    for e in log {
        out.write_record([e.epoch.to_string(), format!("{:.9}", e.mean_nll), format!("{:.3}", e.seconds)])?;
    }
    out.flush()?;
    Ok(())
}
