//! Initial seed lists ranked by per-activity conversion rate, the embedding
//! neighbor operator, and AUC-gated iterative seed-list expansion.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annindex::{AnnError, LshConfig, LshIndex, Query};
use crate::convmodel::{EvalResult, Evaluator, LrHyper, ModelError, Partition, Provenance, SeedList, Split};
use crate::datamodel::{ActivityId, TrailCorpus};
use crate::embed::{cosine, EmbeddingTable};

const DAY: u64 = 86_400;

#[derive(Debug, Error)]
pub enum SeedExpError {
    #[error("invalid expansion parameter `{field}`: {message}")]
    InvalidParams { field: &'static str, message: String },
    #[error("corpus has no converters")]
    NoConverters,
    #[error("no activity has support >= {0}")]
    NoEligible(u32),
    #[error("included activity `{0}` is not a non-conversion activity of the corpus")]
    UnknownInclude(String),
    #[error("seed list is empty")]
    EmptySeed,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Index(#[from] AnnError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExpansionParams {
    pub delta_sim: f64,
    pub delta_nbr: usize,
    pub epsilon: f64,
    pub max_iterations: u32,
    pub k_initial: usize,
    pub label_window_seconds: u64,
    pub min_support: u32,
    /// Allowed probability that LSH misses a pair at cosine `delta_sim`.
    pub lsh_max_miss: f64,
    pub lsh_seed: u64,
}

impl Default for ExpansionParams {
    fn default() -> Self {
        Self {
            delta_sim: 0.5,
            delta_nbr: 2,
            epsilon: 0.001,
            max_iterations: 10,
            k_initial: 50,
            label_window_seconds: 60 * DAY,
            min_support: 5,
            lsh_max_miss: 1e-4,
            lsh_seed: 0,
        }
    }
}

impl ExpansionParams {
    pub fn validate(&self) -> Result<(), SeedExpError> {
        let bad = |field, message: String| Err(SeedExpError::InvalidParams { field, message });
        if !(self.delta_sim > 0.0 && self.delta_sim < 1.0) {
            return bad("delta_sim", format!("must lie in (0, 1) (got {})", self.delta_sim));
        }
        if self.delta_nbr < 1 {
            return bad("delta_nbr", "must be at least 1".into());
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return bad("epsilon", format!("must be non-negative (got {})", self.epsilon));
        }
        if !(self.lsh_max_miss > 0.0 && self.lsh_max_miss < 1.0) {
            return bad("lsh_max_miss", format!("must lie in (0, 1) (got {})", self.lsh_max_miss));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct RateEstimate {
    pub rate: f64,
    /// Users who did the activity.
    pub support: u32,
    /// Of those, users who converted within the window after doing it.
    pub converted: u32,
}

impl RateEstimate {
    fn from_counts(converted: u32, support: u32) -> Self {
        let rate = if support == 0 { 0.0 } else { f64::from(converted) / f64::from(support) };
        Self { rate, support, converted }
    }
}

/// Per-user tallies: every user counts once per activity, and counts as
/// converted when some occurrence precedes the conversion by at most `window`.
fn tally<'c>(corpus: &'c TrailCorpus, window: u64, mut f: impl FnMut(&'c ActivityId, bool)) {
    let mut seen: HashMap<&ActivityId, bool> = HashMap::new();
    for rec in corpus.records() {
        seen.clear();
        for e in rec.trail.events.iter().filter(|e| !e.kind.is_conversion()) {
            let hit = rec.label.conversion_time.is_some_and(|tc| tc >= e.timestamp && tc - e.timestamp <= window);
            *seen.entry(&e.activity).or_default() |= hit;
        }
        for (&a, &hit) in &seen {
            f(a, hit);
        }
    }
}

pub fn conversion_rate(activity: &str, corpus: &TrailCorpus, window_seconds: u64) -> RateEstimate {
    let (mut conv, mut support) = (0, 0);
    tally(corpus, window_seconds, |a, hit| {
        if a.as_str() == activity {
            support += 1;
            conv += u32::from(hit);
        }
    });
    RateEstimate::from_counts(conv, support)
}

/// Rates of every non-conversion activity.
pub fn conversion_rates(corpus: &TrailCorpus, window_seconds: u64) -> BTreeMap<ActivityId, RateEstimate> {
    let mut counts: BTreeMap<&ActivityId, (u32, u32)> = BTreeMap::new();
    tally(corpus, window_seconds, |a, hit| {
        let c = counts.entry(a).or_default();
        c.0 += u32::from(hit);
        c.1 += 1;
    });
    counts
        .into_iter()
        .filter(|(a, _)| !corpus.conversion_activities().contains(*a))
        .map(|(a, (conv, sup))| (a.clone(), RateEstimate::from_counts(conv, sup)))
        .collect()
}

/// Top `k_initial` activities by conversion rate (support at least
/// `min_support`; ties by higher support, then id), minus `exclude`, plus
/// `include`.
pub fn initial_seedlist(
    corpus: &TrailCorpus,
    params: &ExpansionParams,
    include: &SeedList,
    exclude: &SeedList,
) -> Result<SeedList, SeedExpError> {
    if corpus.n_converters() == 0 {
        return Err(SeedExpError::NoConverters);
    }
    let mut ranked: Vec<(ActivityId, RateEstimate)> = conversion_rates(corpus, params.label_window_seconds)
        .into_iter()
        .filter(|(a, r)| r.support >= params.min_support && !exclude.contains(a.as_str()))
        .collect();
    if ranked.is_empty() && include.is_empty() {
        return Err(SeedExpError::NoEligible(params.min_support));
    }
    ranked.sort_by(|(a, x), (b, y)| y.rate.total_cmp(&x.rate).then(y.support.cmp(&x.support)).then_with(|| a.cmp(b)));
    let mut seed = SeedList::from_ids(ranked.into_iter().take(params.k_initial).map(|(a, _)| a), Provenance::Initial);
    let pool = corpus.activity_pool();
    for (a, _) in include.iter() {
        if !pool.contains(a) {
            return Err(SeedExpError::UnknownInclude(a.to_string()));
        }
        if !exclude.contains(a.as_str()) {
            seed.insert(a.clone(), Provenance::Manual);
        }
    }
    if seed.is_empty() {
        return Err(SeedExpError::NoEligible(params.min_support));
    }
    Ok(seed)
}

/// Activities of `vocab` outside `seed` whose cosine exceeds `delta_sim` for
/// at least `delta_nbr` seed members. Candidates come from LSH queries of
/// each seed member and are filtered by exact cosine. Seed members missing
/// from the table contribute nothing.
pub fn neighbors(
    seed: &SeedList,
    vocab: &BTreeSet<ActivityId>,
    table: &EmbeddingTable,
    index: &LshIndex<'_>,
    delta_sim: f64,
    delta_nbr: usize,
) -> BTreeSet<ActivityId> {
    let members: Vec<usize> = seed.activities().iter().filter_map(|a| table.index_of(a.as_str())).collect();
    let hits: Vec<Vec<usize>> = members
        .par_iter()
        .map(|&s| {
            let q = table.row(s);
            index
                .candidates(Query::Vector(q))
                .expect("query has the table's dimension")
                .into_iter()
                .filter(|&c| {
                    let id = &table.ids()[c];
                    !seed.contains(id.as_str())
                        && vocab.contains(id)
                        && cosine(q, table.row(c)).is_ok_and(|x| x > delta_sim)
                })
                .collect()
        })
        .collect();
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for c in hits.into_iter().flatten() {
        *counts.entry(c).or_default() += 1;
    }
    counts.into_iter().filter(|&(_, n)| n >= delta_nbr).map(|(c, _)| table.ids()[c].clone()).collect()
}

/// What an expansion step scores a candidate seed list with.
pub trait Scored {
    fn auc(&self) -> f64;
    fn relevant_users(&self) -> Option<f64> {
        None
    }
}

impl Scored for f64 {
    fn auc(&self) -> f64 {
        *self
    }
}

impl Scored for EvalResult {
    fn auc(&self) -> f64 {
        self.auc
    }
    fn relevant_users(&self) -> Option<f64> {
        Some(self.relevant_users_per_converted_cluster)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    NoImprovement,
    NoNeighbors,
    MaxIterations,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::NoImprovement => "no_improvement",
            StopReason::NoNeighbors => "no_neighbors",
            StopReason::MaxIterations => "max_iterations",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iteration: u32,
    /// |S_{i-1} ∪ N_i|; |S_0| for iteration 0.
    pub n_activities: usize,
    pub added: Vec<ActivityId>,
    /// None when there were no neighbors to score.
    pub auc: Option<f64>,
    pub relevant_users_per_converted_cluster: Option<f64>,
    pub accepted: bool,
}

impl IterationRecord {
    pub fn n_new(&self) -> usize {
        self.added.len()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpansionTrace {
    /// Iteration 0 (the initial list) first.
    pub records: Vec<IterationRecord>,
    pub stop: StopReason,
}

impl ExpansionTrace {
    pub fn accepted(&self) -> impl Iterator<Item = &IterationRecord> {
        self.records.iter().filter(|r| r.accepted)
    }

    /// AUC of the returned seed list.
    pub fn final_auc(&self) -> f64 {
        self.accepted().last().and_then(|r| r.auc).expect("iteration 0 is always scored")
    }
}

/// The expansion loop with pluggable scoring and neighbor search.
///
/// Iteration `i` scores `S_{i-1} ∪ N_i` and is accepted iff its AUC exceeds
/// the previous accepted AUC by more than `epsilon`. The loop stops at the
/// first rejection, when `N_i` is empty, or after `max_iterations`.
pub fn expand_with<T, E, A, N>(
    initial: &SeedList,
    params: &ExpansionParams,
    mut score: A,
    mut neighbor_fn: N,
) -> Result<(SeedList, ExpansionTrace), E>
where
    T: Scored,
    A: FnMut(&SeedList) -> Result<T, E>,
    N: FnMut(&SeedList) -> BTreeSet<ActivityId>,
{
    let s0 = score(initial)?;
    let mut prev = s0.auc();
    let mut records = vec![IterationRecord {
        iteration: 0,
        n_activities: initial.len(),
        added: Vec::new(),
        auc: Some(prev),
        relevant_users_per_converted_cluster: s0.relevant_users(),
        accepted: true,
    }];
    let mut current = initial.clone();
    let mut i = 1;
    let stop = loop {
        if i > params.max_iterations {
            break StopReason::MaxIterations;
        }
        let added: Vec<ActivityId> =
            neighbor_fn(&current).into_iter().filter(|a| !current.contains(a.as_str())).collect();
        if added.is_empty() {
            records.push(IterationRecord {
                iteration: i,
                n_activities: current.len(),
                added,
                auc: None,
                relevant_users_per_converted_cluster: None,
                accepted: false,
            });
            break StopReason::NoNeighbors;
        }
        let candidate = current.union(added.iter(), Provenance::Iteration(i));
        let s = score(&candidate)?;
        let accepted = s.auc() > prev + params.epsilon;
        records.push(IterationRecord {
            iteration: i,
            n_activities: candidate.len(),
            added,
            auc: Some(s.auc()),
            relevant_users_per_converted_cluster: s.relevant_users(),
            accepted,
        });
        if !accepted {
            break StopReason::NoImprovement;
        }
        prev = s.auc();
        current = candidate;
        i += 1;
    };
    Ok((current, ExpansionTrace { records, stop }))
}

/// Expansion scored by validation AUC, with LSH parameters derived from
/// `delta_sim` and `lsh_max_miss`. Cutoffs are drawn with `cutoff_seed`.
#[allow(clippy::too_many_arguments)]
pub fn expand(
    corpus: &TrailCorpus,
    initial: &SeedList,
    params: &ExpansionParams,
    table: &EmbeddingTable,
    split: &Split,
    hyper: LrHyper,
    cutoff_seed: u64,
) -> Result<(SeedList, ExpansionTrace), SeedExpError> {
    params.validate()?;
    let initial = initial.clone().without_conversions(corpus);
    if initial.is_empty() {
        return Err(SeedExpError::EmptySeed);
    }
    let evaluator = Evaluator::new(corpus, split, hyper, cutoff_seed)?;
    let lsh = LshConfig::for_cosine_threshold(params.delta_sim, params.lsh_max_miss, params.lsh_seed)?;
    let index = LshIndex::build(table, lsh)?;
    let vocab = corpus.activity_pool();
    expand_with(
        &initial,
        params,
        |s| evaluator.evaluate(s, Partition::Validation).map_err(SeedExpError::from),
        |s| neighbors(s, &vocab, table, &index, params.delta_sim, params.delta_nbr),
    )
}
