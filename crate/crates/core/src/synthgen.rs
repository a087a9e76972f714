//! Synthetic corpora of type-1 and type-2 organizations with planted ground
//! truth.
//!
//! Every organization has one owner, `r` researchers and `n` non-researchers.
//! A converting organization plants research sessions made of relevant
//! activities and then a conversion event in the owner's trail:
//!
//! - type-2: research sessions go to the researchers, the owner only converts;
//! - type-1: the owner researches and converts; the other members behave like
//!   non-researchers.
//!
//! Non-converting organizations never see relevant activities. Everybody
//! gets background sessions of Zipf-distributed noise activities, and a
//! fraction of users additionally browse a "distractor" topic whose
//! activities also leak into research sessions at a low rate.
//!
//! Generation is deterministic for a given configuration.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand::distr::weighted::WeightedIndex;
use rand_distr::{Distribution, Poisson, Zipf};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::convmodel::{relevant_users_per_converted_cluster, Provenance, Relevance, SeedList};
use crate::datamodel::{
    ActivityId, ClusterId, ConversionLabel, Event, EventKind, Timestamp, TrailCorpus, UserId, UserRecord, UserTrail,
};

const DAY: u64 = 86_400;
const HOUR: u64 = 3_600;
/// Largest intra-session gap; keeps planted sessions well inside the 30-minute gap.
const MAX_STEP: u64 = 240;

/// Activity id used for the advertiser's conversion event.
pub const CONVERSION_ACTIVITY: &str = "conv";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("invalid config field `{field}`: {message}")]
    Invalid { field: &'static str, message: String },
}

fn invalid(field: &'static str, message: impl Into<String>) -> SynthError {
    SynthError::Invalid { field, message: message.into() }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    /// Number of organizations.
    pub k: u32,
    /// Researchers per organization.
    pub r: u32,
    /// Non-researchers per organization.
    pub n: u32,
    /// Owners per organization; only 1 is supported.
    pub d: u32,
    /// Organization conversion probability.
    pub p_o: f64,
    pub type2_fraction: f64,
    pub n_relevant: u32,
    /// Number of distractor activities; defaults to `n_relevant`.
    pub n_distractors: Option<u32>,
    /// Background vocabulary size.
    pub n_noise: u32,
    /// Background activities are split into this many topics and each
    /// background session stays within one topic. 1 gives unstructured noise.
    pub noise_topics: u32,
    /// Expected relevant activities per research session (at least 1).
    pub relevant_rate: f64,
    /// Mean background events per user.
    pub trail_len: f64,
    /// Research sessions per researching user.
    pub research_sessions: u32,
    /// Probability that a research session also contains a distractor.
    pub distractor_mix: f64,
    /// Fraction of users who browse the distractor topic.
    pub distractor_users: f64,
    /// Extra single-user household clusters that never convert.
    pub households: u32,
    pub horizon_days: u32,
    /// Research happens within this many days before the conversion.
    pub research_window_days: u32,
    /// Forces exactly these organizations (0-based) to convert, overriding `p_o`.
    pub converting_orgs: Option<Vec<u32>>,
    pub rng_seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            k: 1000,
            r: 1,
            n: 2,
            d: 1,
            p_o: 0.2,
            type2_fraction: 0.5,
            n_relevant: 20,
            n_distractors: None,
            n_noise: 2000,
            noise_topics: 40,
            relevant_rate: 3.0,
            trail_len: 30.0,
            research_sessions: 2,
            distractor_mix: 0.05,
            distractor_users: 0.2,
            households: 0,
            horizon_days: 180,
            research_window_days: 30,
            converting_orgs: None,
            rng_seed: 0,
        }
    }
}

impl SynthConfig {
    /// Organization size `s = n + r + 1`.
    pub fn org_size(&self) -> u32 {
        self.n + self.r + self.d
    }

    pub fn distractors(&self) -> u32 {
        self.n_distractors.unwrap_or(self.n_relevant)
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let unit = |field, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(invalid(field, format!("must lie in [0, 1] (got {v})")))
            }
        };
        if self.k < 1 {
            return Err(invalid("k", "at least one organization is required"));
        }
        if self.r < 1 {
            return Err(invalid("r", "organizations need at least one researcher"));
        }
        if self.d != 1 {
            return Err(invalid("d", format!("exactly one owner per organization is supported (got {})", self.d)));
        }
        unit("p_o", self.p_o)?;
        unit("type2_fraction", self.type2_fraction)?;
        unit("distractor_mix", self.distractor_mix)?;
        unit("distractor_users", self.distractor_users)?;
        if self.n_relevant < 1 {
            return Err(invalid("n_relevant", "at least one relevant activity is required"));
        }
        if self.n_noise < 1 {
            return Err(invalid("n_noise", "at least one background activity is required"));
        }
        if self.noise_topics < 1 || self.noise_topics > self.n_noise {
            return Err(invalid("noise_topics", format!("must lie in 1..=n_noise (got {})", self.noise_topics)));
        }
        if !(self.relevant_rate >= 1.0 && self.relevant_rate.is_finite()) {
            return Err(invalid("relevant_rate", format!("must be at least 1 (got {})", self.relevant_rate)));
        }
        if !(self.trail_len >= 0.0 && self.trail_len.is_finite()) {
            return Err(invalid("trail_len", format!("must be non-negative (got {})", self.trail_len)));
        }
        if self.research_sessions < 1 {
            return Err(invalid("research_sessions", "at least one research session is required"));
        }
        if self.research_window_days < 1 || self.research_window_days >= self.horizon_days {
            return Err(invalid("research_window_days", "must be at least 1 and below horizon_days"));
        }
        if let Some(orgs) = &self.converting_orgs {
            if let Some(o) = orgs.iter().find(|&&o| o >= self.k) {
                return Err(invalid("converting_orgs", format!("organization {o} out of range for k = {}", self.k)));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Owner,
    Researcher,
    NonResearcher,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrgType {
    Type1,
    Type2,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub relevant_activities: BTreeSet<ActivityId>,
    pub roles: BTreeMap<UserId, Role>,
    pub org_types: BTreeMap<ClusterId, OrgType>,
    pub distractor_activities: BTreeSet<ActivityId>,
    pub converting_orgs: BTreeSet<ClusterId>,
}

impl GroundTruth {
    /// The planted relevant set as a seed list.
    pub fn oracle_seed(&self) -> SeedList {
        SeedList::from_ids(self.relevant_activities.iter().cloned(), Provenance::Manual)
    }
}

fn aid(s: String) -> ActivityId {
    ActivityId::new(s).expect("generated ids are well formed")
}

struct Vocab {
    relevant: Vec<ActivityId>,
    distractors: Vec<ActivityId>,
    noise: Vec<ActivityId>,
    conversion: ActivityId,
}

impl Vocab {
    fn new(cfg: &SynthConfig) -> Self {
        Self {
            relevant: (0..cfg.n_relevant).map(|i| aid(format!("rel{i:03}"))).collect(),
            distractors: (0..cfg.distractors()).map(|i| aid(format!("dis{i:03}"))).collect(),
            noise: (0..cfg.n_noise).map(|i| aid(format!("n{i:05}"))).collect(),
            conversion: aid(CONVERSION_ACTIVITY.into()),
        }
    }
}

/// Stable event kind for a generated activity id.
fn kind_of(id: &ActivityId) -> EventKind {
    let s = id.as_str();
    if s.starts_with("rel") || s.starts_with("dis") {
        if s.bytes().last().is_some_and(|b| b % 2 == 0) {
            EventKind::Search
        } else {
            EventKind::SiteVisit
        }
    } else {
        match s.bytes().last().map(|b| b % 3) {
            Some(0) => EventKind::Search,
            Some(1) => EventKind::ContentView,
            _ => EventKind::AdInteraction,
        }
    }
}

struct Generator<'a> {
    cfg: &'a SynthConfig,
    vocab: Vocab,
    rng: ChaCha8Rng,
    zipf: Zipf<f64>,
    /// Zipf weights restricted to each topic's members.
    topics: Vec<WeightedIndex<f64>>,
    surplus: Option<Poisson<f64>>,
    horizon: u64,
    window: u64,
}

impl<'a> Generator<'a> {
    fn new(cfg: &'a SynthConfig) -> Self {
        let extra = cfg.relevant_rate - 1.0;
        Self {
            cfg,
            vocab: Vocab::new(cfg),
            rng: ChaCha8Rng::seed_from_u64(cfg.rng_seed),
            zipf: Zipf::new(f64::from(cfg.n_noise), 1.0).expect("n_noise >= 1"),
            topics: (0..cfg.noise_topics as usize)
                .map(|t| {
                    let ranks = (t..cfg.n_noise as usize).step_by(cfg.noise_topics as usize);
                    WeightedIndex::new(ranks.map(|i| 1.0 / (i + 1) as f64)).expect("every topic has a member")
                })
                .collect(),
            surplus: (extra > 0.0).then(|| Poisson::new(extra).expect("positive rate")),
            horizon: u64::from(cfg.horizon_days) * DAY,
            window: u64::from(cfg.research_window_days) * DAY,
        }
    }

    fn noise_index(&mut self) -> usize {
        let rank = self.zipf.sample(&mut self.rng) as usize;
        rank.clamp(1, self.vocab.noise.len()) - 1
    }

    fn noise(&mut self) -> ActivityId {
        let i = self.noise_index();
        self.vocab.noise[i].clone()
    }

    /// A background session: the first activity is a global Zipf draw and
    /// fixes the topic, the rest follow Zipf within that topic. Each event's
    /// marginal is thus the global Zipf distribution.
    fn topical(&mut self, len: usize) -> Vec<ActivityId> {
        let first = self.noise_index();
        let n_topics = self.topics.len();
        let topic = first % n_topics;
        let mut out = vec![self.vocab.noise[first].clone()];
        for _ in 1..len {
            let j = self.topics[topic].sample(&mut self.rng);
            out.push(self.vocab.noise[topic + j * n_topics].clone());
        }
        out
    }

    /// Lays `activities` out as one session starting at `start`.
    fn session(&mut self, start: Timestamp, activities: Vec<ActivityId>, out: &mut Vec<Event>) {
        let mut t = start;
        for a in activities {
            let kind = kind_of(&a);
            out.push(Event::new(a, t, kind));
            t += self.rng.random_range(5..=MAX_STEP);
        }
    }

    fn background(&mut self, out: &mut Vec<Event>) {
        if self.cfg.trail_len <= 0.0 {
            return;
        }
        let target = (self.cfg.trail_len * self.rng.random_range(0.5..1.5)).round() as usize;
        let mut emitted = 0;
        while emitted < target {
            let len = self.rng.random_range(1..=6).min(target - emitted);
            let acts = self.topical(len);
            let start = self.rng.random_range(0..self.horizon - HOUR);
            self.session(start, acts, out);
            emitted += len;
        }
        if !self.vocab.distractors.is_empty() && self.rng.random_bool(self.cfg.distractor_users) {
            let m = self.rng.random_range(2..=4).min(self.vocab.distractors.len());
            let mut acts: Vec<ActivityId> =
                self.vocab.distractors.choose_multiple(&mut self.rng, m).cloned().collect();
            if self.rng.random_bool(0.5) {
                acts.push(self.noise());
            }
            acts.shuffle(&mut self.rng);
            let start = self.rng.random_range(0..self.horizon - HOUR);
            self.session(start, acts, out);
        }
    }

    /// Research sessions ending before `t_conv`.
    fn research(&mut self, t_conv: Timestamp, out: &mut Vec<Event>) {
        for _ in 0..self.cfg.research_sessions {
            let surplus = self.surplus.as_ref().map_or(0, |p| p.sample(&mut self.rng) as usize);
            let m = (1 + surplus).min(self.vocab.relevant.len());
            let mut acts: Vec<ActivityId> = self.vocab.relevant.choose_multiple(&mut self.rng, m).cloned().collect();
            for _ in 0..self.rng.random_range(0..=1) {
                acts.push(self.noise());
            }
            if !self.vocab.distractors.is_empty() && self.rng.random_bool(self.cfg.distractor_mix) {
                acts.push(self.vocab.distractors.choose(&mut self.rng).expect("non-empty").clone());
            }
            acts.shuffle(&mut self.rng);
            let start = self.rng.random_range(t_conv - self.window..=t_conv - HOUR);
            self.session(start, acts, out);
        }
    }
}

/// Generates a corpus and its ground truth.
pub fn generate(cfg: &SynthConfig) -> Result<(TrailCorpus, GroundTruth), SynthError> {
    cfg.validate()?;
    let mut g = Generator::new(cfg);
    let mut truth = GroundTruth {
        relevant_activities: g.vocab.relevant.iter().cloned().collect(),
        distractor_activities: g.vocab.distractors.iter().cloned().collect(),
        ..GroundTruth::default()
    };
    let forced: Option<BTreeSet<u32>> = cfg.converting_orgs.as_ref().map(|v| v.iter().copied().collect());
    let org_width = cfg.k.saturating_sub(1).to_string().len();
    let s = cfg.org_size();
    let mut records = Vec::with_capacity((cfg.k * s + cfg.households) as usize);

    for j in 0..cfg.k {
        let cluster = ClusterId::new(format!("org{j:0org_width$}")).expect("well formed");
        // draw both so forcing conversions leaves the rest of the stream intact
        let type2 = g.rng.random_bool(cfg.type2_fraction);
        let coin = g.rng.random_bool(cfg.p_o);
        let converts = forced.as_ref().map_or(coin, |f| f.contains(&j));
        let org_type = if type2 { OrgType::Type2 } else { OrgType::Type1 };
        truth.org_types.insert(cluster.clone(), org_type);
        let t_conv = g.rng.random_range(g.window..=g.horizon);
        if converts {
            truth.converting_orgs.insert(cluster.clone());
        }

        for idx in 0..s {
            let role = match idx {
                0 => Role::Owner,
                i if i <= cfg.r && type2 => Role::Researcher,
                _ => Role::NonResearcher,
            };
            let user = UserId::new(format!("{cluster}-u{idx}")).expect("well formed");
            let mut events = Vec::new();
            g.background(&mut events);
            let researches = converts
                && match org_type {
                    OrgType::Type2 => role == Role::Researcher,
                    OrgType::Type1 => role == Role::Owner,
                };
            if researches {
                g.research(t_conv, &mut events);
            }
            let label = if converts && role == Role::Owner {
                events.push(Event::new(g.vocab.conversion.clone(), t_conv, EventKind::Conversion));
                ConversionLabel::converted_at(t_conv)
            } else {
                ConversionLabel::NEGATIVE
            };
            events.sort_by_key(|e| e.timestamp);
            truth.roles.insert(user.clone(), role);
            records.push(UserRecord {
                trail: UserTrail { user, events },
                clusters: [cluster.clone()].into(),
                label,
            });
        }
    }

    let hh_width = cfg.households.saturating_sub(1).to_string().len();
    for h in 0..cfg.households {
        let cluster = ClusterId::new(format!("hh{h:0hh_width$}")).expect("well formed");
        let user = UserId::new(format!("{cluster}-u0")).expect("well formed");
        let mut events = Vec::new();
        g.background(&mut events);
        events.sort_by_key(|e| e.timestamp);
        truth.roles.insert(user.clone(), Role::NonResearcher);
        records.push(UserRecord {
            trail: UserTrail { user, events },
            clusters: [cluster].into(),
            label: ConversionLabel::NEGATIVE,
        });
    }

    let corpus = TrailCorpus::from_records(records).expect("generated corpus satisfies the corpus invariants");
    Ok((corpus, truth))
}

/// The two-organization toy corpus: `n = 1, r = 1, k = 2`, organization 1
/// converts, its researcher alone performs the relevant activity.
pub fn toy_corpus() -> (TrailCorpus, GroundTruth) {
    let a = |s: &str| ActivityId::new(s).expect("well formed");
    let mk = |user: &str, cluster: &str, events: Vec<Event>, label| UserRecord {
        trail: UserTrail { user: UserId::new(user).expect("well formed"), events },
        clusters: [ClusterId::new(cluster).expect("well formed")].into(),
        label,
    };
    let ev = |id: &str, t: u64, kind| Event::new(a(id), t, kind);
    use EventKind::*;
    let records = vec![
        mk(
            "org1-owner",
            "org1",
            vec![ev("news:sports", 1_000, ContentView), ev(CONVERSION_ACTIVITY, 9_000, Conversion)],
            ConversionLabel::converted_at(9_000),
        ),
        mk(
            "org1-researcher",
            "org1",
            vec![ev("q:crm-software", 2_000, Search), ev("site:vendor", 2_100, SiteVisit)],
            ConversionLabel::NEGATIVE,
        ),
        mk("org1-other", "org1", vec![ev("news:weather", 3_000, ContentView)], ConversionLabel::NEGATIVE),
        mk("org2-owner", "org2", vec![ev("news:sports", 1_500, ContentView)], ConversionLabel::NEGATIVE),
        mk("org2-researcher", "org2", vec![ev("q:restaurants", 2_500, Search)], ConversionLabel::NEGATIVE),
        mk("org2-other", "org2", vec![ev("news:weather", 3_500, ContentView)], ConversionLabel::NEGATIVE),
    ];
    let roles = [
        ("org1-owner", Role::Owner),
        ("org1-researcher", Role::Researcher),
        ("org1-other", Role::NonResearcher),
        ("org2-owner", Role::Owner),
        ("org2-researcher", Role::Researcher),
        ("org2-other", Role::NonResearcher),
    ];
    let truth = GroundTruth {
        relevant_activities: [a("q:crm-software")].into(),
        roles: roles.iter().map(|(u, r)| (UserId::new(*u).expect("well formed"), *r)).collect(),
        org_types: ["org1", "org2"]
            .iter()
            .map(|c| (ClusterId::new(*c).expect("well formed"), OrgType::Type2))
            .collect(),
        distractor_activities: BTreeSet::new(),
        converting_orgs: [ClusterId::new("org1").expect("well formed")].into(),
    };
    (TrailCorpus::from_records(records).expect("toy corpus is valid"), truth)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SynthStats {
    pub users: usize,
    pub clusters: usize,
    pub converters: usize,
    pub converted_clusters: usize,
    /// converters / users
    pub p_u: f64,
    /// converted organizations / organizations
    pub p_o: f64,
    /// Relevant users (planted set as seed list, converters included) per
    /// converted cluster.
    pub relevant_users_per_converted_cluster: f64,
}

pub fn empirical_stats(corpus: &TrailCorpus, truth: &GroundTruth) -> SynthStats {
    let converters = corpus.n_converters();
    let converted_clusters = corpus
        .cluster_ids()
        .filter(|c| corpus.members(c.as_str()).iter().any(|&u| corpus.records()[u].label.converted))
        .count();
    let orgs = truth.org_types.len().max(1);
    let relevance = Relevance::new(corpus, &truth.oracle_seed());
    SynthStats {
        users: corpus.len(),
        clusters: corpus.n_clusters(),
        converters,
        converted_clusters,
        p_u: if corpus.is_empty() { 0.0 } else { converters as f64 / corpus.len() as f64 },
        p_o: converted_clusters as f64 / orgs as f64,
        relevant_users_per_converted_cluster: relevant_users_per_converted_cluster(corpus, &relevance),
    }
}
