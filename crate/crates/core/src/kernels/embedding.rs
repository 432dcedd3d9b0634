//! Skip-gram with negative sampling over graphlet-id sentences.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{GboError, Result};
use crate::rng;

/// Allowed window sizes and embedding dimensions.
pub const GRID_VALUES: [usize; 5] = [2, 5, 10, 25, 50];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkipGramConfig {
    pub window: usize,
    pub dim: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl SkipGramConfig {
    pub fn new(window: usize, dim: usize, seed: u64) -> Self {
        SkipGramConfig {
            window,
            dim,
            negatives: 5,
            epochs: 5,
            learning_rate: 0.025,
            seed,
        }
    }
}

/// Learned token vectors and the diagonal `M_ii = <v_i, v_i>`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    pub window: usize,
    pub dim: usize,
    pub vectors: Vec<Vec<f64>>,
    pub m_diag: Vec<f64>,
}

impl EmbeddingModel {
    pub fn dot(&self, a: usize, b: usize) -> f64 {
        self.vectors[a].iter().zip(&self.vectors[b]).map(|(x, y)| x * y).sum()
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Trains embeddings for tokens `0..vocab_size`. Sentences hold token
/// indices. Tokens absent from the corpus keep their initial vectors.
pub fn train_embeddings(sentences: &[Vec<usize>], vocab_size: usize, config: &SkipGramConfig) -> Result<EmbeddingModel> {
    let total_tokens: usize = sentences.iter().map(Vec::len).sum();
    if total_tokens == 0 || vocab_size == 0 {
        return Err(GboError::param("embedding corpus is empty"));
    }
    if !GRID_VALUES.contains(&config.window) || !GRID_VALUES.contains(&config.dim) {
        return Err(GboError::param(format!(
            "window {} / dimension {} not in {GRID_VALUES:?}",
            config.window, config.dim
        )));
    }
    if let Some(&bad) = sentences.iter().flatten().find(|&&t| t >= vocab_size) {
        return Err(GboError::param(format!("token {bad} outside vocabulary of {vocab_size}")));
    }
    let dim = config.dim;
    let mut rng = rng::rng(config.seed);
    let half = 0.5 / dim as f64;
    let mut input: Vec<f64> = (0..vocab_size * dim).map(|_| rng.random_range(-half..half)).collect();
    let mut output = vec![0.0; vocab_size * dim];

    // unigram^0.75 noise distribution
    let mut counts = vec![0usize; vocab_size];
    for &t in sentences.iter().flatten() {
        counts[t] += 1;
    }
    let mut cumulative = Vec::with_capacity(vocab_size);
    let mut acc = 0.0;
    for &c in &counts {
        acc += (c as f64).powf(0.75);
        cumulative.push(acc);
    }
    let draw_noise = |rng: &mut rng::Rng| -> usize {
        let u = rng.random::<f64>() * acc;
        cumulative.partition_point(|&c| c <= u).min(vocab_size - 1)
    };

    let planned = (total_tokens * config.epochs) as f64;
    let floor = config.learning_rate * 1e-4;
    let mut processed = 0usize;
    let mut grad = vec![0.0; dim];
    for _ in 0..config.epochs {
        for sentence in sentences {
            for (pos, &center) in sentence.iter().enumerate() {
                let lr = (config.learning_rate * (1.0 - processed as f64 / (planned + 1.0))).max(floor);
                processed += 1;
                let lo = pos.saturating_sub(config.window);
                let hi = (pos + config.window + 1).min(sentence.len());
                for (ctx_pos, &context) in sentence.iter().enumerate().take(hi).skip(lo) {
                    if ctx_pos == pos {
                        continue;
                    }
                    grad.fill(0.0);
                    let l1 = context * dim;
                    for n in 0..=config.negatives {
                        let (target, label) = if n == 0 {
                            (center, 1.0)
                        } else {
                            let t = draw_noise(&mut rng);
                            if t == center {
                                continue;
                            }
                            (t, 0.0)
                        };
                        let l2 = target * dim;
                        let f: f64 = (0..dim).map(|i| input[l1 + i] * output[l2 + i]).sum();
                        let g = (label - sigmoid(f)) * lr;
                        for i in 0..dim {
                            grad[i] += g * output[l2 + i];
                            output[l2 + i] += g * input[l1 + i];
                        }
                    }
                    for i in 0..dim {
                        input[l1 + i] += grad[i];
                    }
                }
            }
        }
    }
    let vectors: Vec<Vec<f64>> = input.chunks(dim).map(<[f64]>::to_vec).collect();
    let m_diag = vectors.iter().map(|v| v.iter().map(|x| x * x).sum()).collect();
    Ok(EmbeddingModel {
        window: config.window,
        dim,
        vectors,
        m_diag,
    })
}
