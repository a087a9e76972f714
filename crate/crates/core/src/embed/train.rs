use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU32, Ordering};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datamodel::{ActivityId, TrailCorpus, DEFAULT_SESSION_GAP};

use super::{EmbedError, EmbeddingTable};

/// Sentences per work unit. Each unit has its own RNG stream, so the
/// deterministic and parallel modes draw the same random numbers.
const CHUNK: usize = 512;
const MIN_LR_FRACTION: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainParams {
    pub dim: usize,
    /// Maximum context radius; the effective radius is drawn in `1..=window`.
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub min_count: u32,
    /// Set to 0 to disable downsampling.
    pub subsample_threshold: f64,
    pub session_gap: u64,
    /// Single worker with a fixed update order. The parallel mode applies
    /// lock-free updates from all workers and is not reproducible.
    pub deterministic: bool,
    /// Subtract the mean vector after training. Negative sampling leaves a
    /// large component shared by all vectors that inflates every cosine.
    pub center: bool,
    pub rng_seed: u64,
}

impl Default for TrainParams {
    fn default() -> Self {
        Self {
            dim: 300,
            window: 5,
            negatives: 5,
            epochs: 5,
            learning_rate: 0.025,
            min_count: 2,
            subsample_threshold: 1e-3,
            session_gap: DEFAULT_SESSION_GAP,
            deterministic: true,
            center: true,
            rng_seed: 0,
        }
    }
}

impl TrainParams {
    pub fn validate(&self) -> Result<(), EmbedError> {
        let bad = |field, message: String| Err(EmbedError::InvalidParams { field, message });
        if self.dim < 2 {
            return bad("dim", format!("must be at least 2 (got {})", self.dim));
        }
        if self.window < 1 {
            return bad("window", "must be at least 1".into());
        }
        if self.negatives < 1 {
            return bad("negatives", "must be at least 1".into());
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate", format!("must be positive (got {})", self.learning_rate));
        }
        if !(self.subsample_threshold >= 0.0 && self.subsample_threshold.is_finite()) {
            return bad("subsample_threshold", format!("must be non-negative (got {})", self.subsample_threshold));
        }
        if self.session_gap == 0 {
            return bad("session_gap", "must be positive".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrainReport {
    /// Mean negative-sampling loss per (center, context) pair, per epoch.
    pub epoch_losses: Vec<f64>,
    pub vocab_size: usize,
    pub sentences: usize,
    pub tokens: usize,
}

fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn dot64(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `-log σ(u_o·v) − Σ_k log σ(−u_k·v)` for center input vector `v`, context
/// output vector `u_o` and negative output vectors `u_k`.
pub fn sgns_loss(center: &[f64], context: &[f64], negatives: &[Vec<f64>]) -> f64 {
    -log_sigmoid(dot64(center, context)) - negatives.iter().map(|u| log_sigmoid(-dot64(center, u))).sum::<f64>()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SgnsGradient {
    pub center: Vec<f64>,
    pub context: Vec<f64>,
    pub negatives: Vec<Vec<f64>>,
}

/// Gradient of [`sgns_loss`] with respect to every argument.
pub fn sgns_gradient(center: &[f64], context: &[f64], negatives: &[Vec<f64>]) -> SgnsGradient {
    // d/ds of -log σ(±s) is σ(s) - label
    let g_pos = sigmoid(dot64(center, context)) - 1.0;
    let mut d_center: Vec<f64> = context.iter().map(|u| g_pos * u).collect();
    let d_context = center.iter().map(|v| g_pos * v).collect();
    let d_neg = negatives
        .iter()
        .map(|u| {
            let g = sigmoid(dot64(center, u));
            for (dc, x) in d_center.iter_mut().zip(u) {
                *dc += g * x;
            }
            center.iter().map(|v| g * v).collect()
        })
        .collect();
    SgnsGradient { center: d_center, context: d_context, negatives: d_neg }
}

/// f32 matrix with relaxed atomic cells, so concurrent workers may update
/// shared rows without locks. Single-threaded use is fully deterministic.
struct SharedMatrix {
    dim: usize,
    cells: Vec<AtomicU32>,
}

impl SharedMatrix {
    fn new(rows: usize, dim: usize, mut init: impl FnMut() -> f32) -> Self {
        Self { dim, cells: (0..rows * dim).map(|_| AtomicU32::new(init().to_bits())).collect() }
    }

    fn load_row(&self, row: usize, out: &mut [f32]) {
        let cells = &self.cells[row * self.dim..(row + 1) * self.dim];
        for (o, c) in out.iter_mut().zip(cells) {
            *o = f32::from_bits(c.load(Ordering::Relaxed));
        }
    }

    fn add_row(&self, row: usize, delta: &[f32]) {
        let cells = &self.cells[row * self.dim..(row + 1) * self.dim];
        for (c, d) in cells.iter().zip(delta) {
            let v = f32::from_bits(c.load(Ordering::Relaxed)) + d;
            c.store(v.to_bits(), Ordering::Relaxed);
        }
    }

    fn into_vec(self) -> Vec<f32> {
        self.cells.into_iter().map(|c| f32::from_bits(c.into_inner())).collect()
    }
}

struct Prepared {
    ids: Vec<ActivityId>,
    counts: Vec<u64>,
    sentences: Vec<Vec<u32>>,
    tokens: usize,
}

/// Session "sentences" of retained vocabulary indices. Conversion events
/// never enter the vocabulary.
fn prepare(corpus: &TrailCorpus, params: &TrainParams) -> Result<Prepared, EmbedError> {
    let mut counts: BTreeMap<&ActivityId, u64> = BTreeMap::new();
    for e in corpus.trails().flat_map(|t| &t.events) {
        if !e.kind.is_conversion() {
            *counts.entry(&e.activity).or_default() += 1;
        }
    }
    if counts.is_empty() {
        return Err(EmbedError::EmptyCorpus);
    }
    let kept: Vec<(&ActivityId, u64)> =
        counts.into_iter().filter(|&(_, c)| c >= u64::from(params.min_count)).collect();
    if kept.is_empty() {
        return Err(EmbedError::EmptyVocabulary(params.min_count));
    }
    let index: std::collections::HashMap<&str, u32> =
        kept.iter().enumerate().map(|(i, (id, _))| (id.as_str(), i as u32)).collect();

    let mut sentences = Vec::new();
    let mut tokens = 0;
    for trail in corpus.trails() {
        for session in trail.sessions(params.session_gap) {
            let s: Vec<u32> = session
                .events
                .iter()
                .filter(|e| !e.kind.is_conversion())
                .filter_map(|e| index.get(e.activity.as_str()).copied())
                .collect();
            if !s.is_empty() {
                tokens += s.len();
                sentences.push(s);
            }
        }
    }
    Ok(Prepared {
        ids: kept.iter().map(|(id, _)| (*id).clone()).collect(),
        counts: kept.iter().map(|&(_, c)| c).collect(),
        sentences,
        tokens,
    })
}

struct Shared<'a> {
    params: &'a TrainParams,
    input: SharedMatrix,
    output: SharedMatrix,
    negatives: WeightedIndex<f64>,
    keep_prob: Vec<f64>,
    total_work: f64,
}

impl Shared<'_> {
    /// Trains on one chunk; returns (loss sum, pair count).
    fn run_chunk(&self, sentences: &[Vec<u32>], done_before: usize, rng: &mut ChaCha8Rng) -> (f64, u64) {
        let p = self.params;
        let dim = p.dim;
        let lr0 = p.learning_rate;
        let mut v = vec![0f32; dim];
        let mut u = vec![0f32; dim];
        let mut acc = vec![0f32; dim];
        let mut delta = vec![0f32; dim];
        let mut kept = Vec::new();
        let (mut loss, mut pairs) = (0.0, 0u64);
        let mut done = done_before;

        for sentence in sentences {
            let progress = done as f64 / self.total_work;
            let lr = (lr0 * (1.0 - progress)).max(lr0 * MIN_LR_FRACTION) as f32;
            done += sentence.len();

            kept.clear();
            kept.extend(sentence.iter().copied().filter(|&w| {
                let keep = self.keep_prob[w as usize];
                keep >= 1.0 || rng.random::<f64>() < keep
            }));
            for (pos, &center) in kept.iter().enumerate() {
                let radius = rng.random_range(1..=p.window);
                let lo = pos.saturating_sub(radius);
                let hi = (pos + radius).min(kept.len() - 1);
                for (ctx_pos, &context) in kept.iter().enumerate().take(hi + 1).skip(lo) {
                    if ctx_pos == pos {
                        continue;
                    }
                    self.input.load_row(center as usize, &mut v);
                    acc.iter_mut().for_each(|a| *a = 0.0);
                    for k in 0..=p.negatives {
                        let (target, label) = if k == 0 {
                            (context, 1.0)
                        } else {
                            let t = self.negatives.sample(rng) as u32;
                            if t == context {
                                continue;
                            }
                            (t, 0.0)
                        };
                        self.output.load_row(target as usize, &mut u);
                        let score: f64 = v.iter().zip(&u).map(|(&a, &b)| f64::from(a) * f64::from(b)).sum();
                        loss -= log_sigmoid(if label == 1.0 { score } else { -score });
                        let g = (label - sigmoid(score)) as f32 * lr;
                        for i in 0..dim {
                            acc[i] += g * u[i];
                            delta[i] = g * v[i];
                        }
                        self.output.add_row(target as usize, &delta);
                    }
                    self.input.add_row(center as usize, &acc);
                    pairs += 1;
                }
            }
        }
        (loss, pairs)
    }
}

fn center_rows(data: &mut [f32], dim: usize) {
    let n = data.len() / dim;
    let mut mean = vec![0f64; dim];
    for row in data.chunks_exact(dim) {
        for (m, &x) in mean.iter_mut().zip(row) {
            *m += f64::from(x);
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    for row in data.chunks_exact_mut(dim) {
        for (x, m) in row.iter_mut().zip(&mean) {
            *x = (f64::from(*x) - m) as f32;
        }
    }
}

pub fn train(corpus: &TrailCorpus, params: &TrainParams) -> Result<EmbeddingTable, EmbedError> {
    train_with_report(corpus, params).map(|(t, _)| t)
}

pub fn train_with_report(corpus: &TrailCorpus, params: &TrainParams) -> Result<(EmbeddingTable, TrainReport), EmbedError> {
    params.validate()?;
    let prep = prepare(corpus, params)?;
    let dim = params.dim;
    let n = prep.ids.len();

    let mut init_rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
    let half = 0.5 / dim as f32;
    let input = SharedMatrix::new(n, dim, || init_rng.random_range(-half..half));
    let output = SharedMatrix::new(n, dim, || 0.0);

    let total: u64 = prep.counts.iter().sum();
    let keep_prob = prep
        .counts
        .iter()
        .map(|&c| {
            let t = params.subsample_threshold * total as f64;
            if t <= 0.0 {
                1.0
            } else {
                let f = c as f64;
                ((f / t).sqrt() + 1.0) * t / f
            }
        })
        .collect();
    let negatives =
        WeightedIndex::new(prep.counts.iter().map(|&c| (c as f64).powf(0.75))).expect("counts are positive");
    let shared = Shared {
        params,
        input,
        output,
        negatives,
        keep_prob,
        total_work: (params.epochs * prep.tokens).max(1) as f64,
    };

    let chunks: Vec<&[Vec<u32>]> = prep.sentences.chunks(CHUNK).collect();
    let mut offsets = Vec::with_capacity(chunks.len());
    let mut acc = 0;
    for c in &chunks {
        offsets.push(acc);
        acc += c.iter().map(Vec::len).sum::<usize>();
    }

    let mut epoch_losses = Vec::with_capacity(params.epochs);
    for epoch in 0..params.epochs {
        let run = |(ci, chunk): (usize, &&[Vec<u32>])| {
            let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
            rng.set_stream(((epoch as u64) << 32) | ci as u64);
            shared.run_chunk(chunk, epoch * prep.tokens + offsets[ci], &mut rng)
        };
        let parts: Vec<(f64, u64)> = if params.deterministic {
            chunks.iter().enumerate().map(run).collect()
        } else {
            chunks.par_iter().enumerate().map(run).collect()
        };
        let (loss, pairs) = parts.iter().fold((0.0, 0u64), |(l, p), &(a, b)| (l + a, p + b));
        epoch_losses.push(if pairs == 0 { 0.0 } else { loss / pairs as f64 });
    }

    let mut data = shared.input.into_vec();
    if params.center && n > 1 {
        center_rows(&mut data, dim);
    }
    if data.iter().any(|x| !x.is_finite()) {
        return Err(EmbedError::NonFinite("<training>".into()));
    }
    let report = TrainReport { epoch_losses, vocab_size: n, sentences: prep.sentences.len(), tokens: prep.tokens };
    Ok((EmbeddingTable::from_parts(dim, prep.ids, data), report))
}
