use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::datamodel::{ActivityId, Timestamp, TrailCorpus};

use super::{auc, encode, train_lr, FeatureVector, LrHyper, LrModel, ModelError, Partition, Relevance, SeedList, Split, VocabMap};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EvalResult {
    pub auc: f64,
    /// Mean over converted clusters of the number of relevant users,
    /// converters included.
    pub relevant_users_per_converted_cluster: f64,
    pub n_features: usize,
    pub n_train: usize,
    pub n_eval: usize,
}

/// Prediction time per user: a converter's conversion time, or a seeded
/// uniform draw over the corpus time range for everybody else.
pub fn sample_cutoffs(corpus: &TrailCorpus, seed: u64) -> Vec<Timestamp> {
    let (lo, hi) = corpus.time_range().unwrap_or((0, 0));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    corpus
        .records()
        .iter()
        .map(|r| {
            // draw for every user so a negative's cutoff does not depend on
            // how many converters precede it
            let t = rng.random_range(lo..=hi);
            r.label.conversion_time.unwrap_or(t)
        })
        .collect()
}

/// Mean, over clusters containing a converter, of |relevant users ∪ converters|.
/// Zero when no cluster converted.
pub fn relevant_users_per_converted_cluster(corpus: &TrailCorpus, relevance: &Relevance) -> f64 {
    let mut clusters = 0usize;
    let mut total = 0usize;
    for c in corpus.cluster_ids() {
        let members = corpus.members(c.as_str());
        if !members.iter().any(|&u| corpus.records()[u].label.converted) {
            continue;
        }
        clusters += 1;
        total += members.iter().filter(|&&u| relevance.is_relevant(u) || corpus.records()[u].label.converted).count();
    }
    if clusters == 0 {
        0.0
    } else {
        total as f64 / clusters as f64
    }
}

/// Trains the conversion model on the train partition and scores another
/// partition, for any number of seed lists. Cutoff times and the split are
/// fixed at construction so scores for different seed lists are comparable.
pub struct Evaluator<'c> {
    corpus: &'c TrailCorpus,
    hyper: LrHyper,
    cutoffs: Vec<Timestamp>,
    partitions: Vec<Partition>,
}

impl<'c> Evaluator<'c> {
    pub fn new(corpus: &'c TrailCorpus, split: &Split, hyper: LrHyper, cutoff_seed: u64) -> Result<Self, ModelError> {
        let partitions = split.user_partitions(corpus)?;
        Ok(Self { corpus, hyper, cutoffs: sample_cutoffs(corpus, cutoff_seed), partitions })
    }

    pub fn corpus(&self) -> &'c TrailCorpus {
        self.corpus
    }

    pub fn cutoffs(&self) -> &[Timestamp] {
        &self.cutoffs
    }

    fn users(&self, part: Partition) -> Vec<usize> {
        (0..self.corpus.len()).filter(|&u| self.partitions[u] == part).collect()
    }

    fn augmented_sets(&self, relevance: &Relevance, users: &[usize]) -> Vec<BTreeSet<&'c ActivityId>> {
        users
            .par_iter()
            .map(|&u| {
                let mut set = BTreeSet::new();
                relevance.for_each_augmented(self.corpus, u, self.cutoffs[u], |a| {
                    set.insert(a);
                });
                set
            })
            .collect()
    }

    fn labelled(&self, users: &[usize], sets: &[BTreeSet<&ActivityId>], vocab: &VocabMap) -> Vec<(FeatureVector, bool)> {
        users
            .par_iter()
            .zip(sets)
            .map(|(&u, set)| (encode(set.iter().copied(), vocab), self.corpus.records()[u].label.converted))
            .collect()
    }

    /// Fits the model for `seed` on the train partition.
    pub fn fit(&self, seed: &SeedList) -> Result<(LrModel, VocabMap, Relevance), ModelError> {
        let relevance = Relevance::new(self.corpus, seed);
        let train_users = self.users(Partition::Train);
        let train_sets = self.augmented_sets(&relevance, &train_users);
        let vocab = VocabMap::new(train_sets.iter().flatten().copied());
        let train = self.labelled(&train_users, &train_sets, &vocab);
        check_classes(&train, Partition::Train)?;
        let model = train_lr(&train, vocab.len(), self.hyper)?;
        Ok((model, vocab, relevance))
    }

    pub fn evaluate(&self, seed: &SeedList, part: Partition) -> Result<EvalResult, ModelError> {
        let (model, vocab, relevance) = self.fit(seed)?;
        let users = self.users(part);
        let sets = self.augmented_sets(&relevance, &users);
        let examples = self.labelled(&users, &sets, &vocab);
        check_classes(&examples, part)?;
        let scores: Vec<f64> = examples.iter().map(|(fv, _)| model.predict(fv)).collect();
        let labels: Vec<bool> = examples.iter().map(|(_, y)| *y).collect();
        Ok(EvalResult {
            auc: auc(&scores, &labels)?,
            relevant_users_per_converted_cluster: relevant_users_per_converted_cluster(self.corpus, &relevance),
            n_features: vocab.len(),
            n_train: self.partitions.iter().filter(|p| **p == Partition::Train).count(),
            n_eval: users.len(),
        })
    }
}

fn check_classes(examples: &[(FeatureVector, bool)], part: Partition) -> Result<(), ModelError> {
    let pos = examples.iter().filter(|(_, y)| *y).count();
    if pos == 0 || pos == examples.len() {
        Err(ModelError::DegenerateSplit(part))
    } else {
        Ok(())
    }
}

/// One-shot evaluation. Negative cutoffs are drawn with `hyper.rng_seed`.
pub fn evaluate_pipeline(
    corpus: &TrailCorpus,
    seed: &SeedList,
    split: &Split,
    hyper: LrHyper,
    part: Partition,
) -> Result<EvalResult, ModelError> {
    Evaluator::new(corpus, split, hyper, hyper.rng_seed)?.evaluate(seed, part)
}
