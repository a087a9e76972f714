//! Domain types shared by every stage of the pipeline: activity events,
//! per-user trails, cluster membership, conversion labels and the corpus
//! that ties them together.
//!
//! A [`TrailCorpus`] is immutable once built. All lookups (user by id,
//! cluster members, vocabulary) are precomputed at construction time so the
//! corpus can be shared across worker threads by reference.

mod format;

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use format::{load_corpus, parse_record, read_corpus, read_records, save_corpus, write_corpus, RecordReader};

/// Integer seconds since the epoch.
pub type Timestamp = u64;

/// Session gap used for activity sessions: 30 minutes.
pub const DEFAULT_SESSION_GAP: u64 = 30 * 60;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid {kind} `{value}`: {reason}")]
pub struct InvalidId {
    pub kind: &'static str,
    pub value: String,
    pub reason: &'static str,
}

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident, $kind:literal) => {
        $(#[$meta])*
        #[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(try_from = "String", into = "String")]
        pub struct $name(String);

        impl $name {
            pub fn new(value: impl Into<String>) -> Result<Self, InvalidId> {
                let value = value.into();
                if value.is_empty() {
                    return Err(InvalidId { kind: $kind, value, reason: "must not be empty" });
                }
                if value.chars().any(char::is_whitespace) {
                    return Err(InvalidId { kind: $kind, value, reason: "must not contain whitespace" });
                }
                Ok(Self(value))
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl TryFrom<String> for $name {
            type Error = InvalidId;

            fn try_from(value: String) -> Result<Self, Self::Error> {
                Self::new(value)
            }
        }

        impl From<$name> for String {
            fn from(id: $name) -> String {
                id.0
            }
        }

        impl Borrow<str> for $name {
            fn borrow(&self) -> &str {
                &self.0
            }
        }

        impl AsRef<str> for $name {
            fn as_ref(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }
    };
}

id_type!(
    /// Opaque activity token, unique within a corpus.
    ActivityId,
    "activity id"
);
id_type!(
    /// Opaque user token.
    UserId,
    "user id"
);
id_type!(
    /// Household or organization identifier assigned by identity resolution.
    ClusterId,
    "cluster id"
);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Search,
    SiteVisit,
    ContentView,
    AdInteraction,
    Conversion,
}

impl EventKind {
    pub const ALL: [EventKind; 5] = [
        EventKind::Search,
        EventKind::SiteVisit,
        EventKind::ContentView,
        EventKind::AdInteraction,
        EventKind::Conversion,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Search => "search",
            EventKind::SiteVisit => "site_visit",
            EventKind::ContentView => "content_view",
            EventKind::AdInteraction => "ad_interaction",
            EventKind::Conversion => "conversion",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }

    pub fn is_conversion(self) -> bool {
        self == EventKind::Conversion
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Event {
    pub activity: ActivityId,
    pub timestamp: Timestamp,
    pub kind: EventKind,
    /// Raw description (search query text and the like). May be empty.
    pub description: String,
}

impl Event {
    pub fn new(activity: ActivityId, timestamp: Timestamp, kind: EventKind) -> Self {
        Self { activity, timestamp, kind, description: String::new() }
    }
}

/// One user's chronological activity trail.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UserTrail {
    pub user: UserId,
    pub events: Vec<Event>,
}

impl UserTrail {
    /// Events strictly before `cutoff`.
    pub fn before(&self, cutoff: Timestamp) -> &[Event] {
        let end = self.events.partition_point(|e| e.timestamp < cutoff);
        &self.events[..end]
    }

    /// Splits the trail into activity sessions. See [`sessionize`].
    pub fn sessions(&self, gap_seconds: u64) -> Vec<Session<'_>> {
        sessionize(&self.events, gap_seconds)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConversionLabel {
    pub converted: bool,
    pub conversion_time: Option<Timestamp>,
}

impl ConversionLabel {
    pub const NEGATIVE: ConversionLabel = ConversionLabel { converted: false, conversion_time: None };

    pub fn converted_at(t: Timestamp) -> Self {
        Self { converted: true, conversion_time: Some(t) }
    }
}

/// Everything the corpus stores about one user: one line of the corpus file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UserRecord {
    pub trail: UserTrail,
    pub clusters: BTreeSet<ClusterId>,
    pub label: ConversionLabel,
}

impl UserRecord {
    pub fn user(&self) -> &UserId {
        &self.trail.user
    }

    /// Checks the per-record invariants. Returns the offending field name and
    /// a message on failure.
    pub(crate) fn check(&self) -> Result<(), (String, String)> {
        if self.clusters.is_empty() {
            return Err(("clusters".into(), "at least one cluster id is required".into()));
        }
        if let Some(i) = self.trail.events.windows(2).position(|w| w[1].timestamp < w[0].timestamp) {
            return Err((
                format!("events[{}].t", i + 1),
                "events must be sorted by non-decreasing timestamp".into(),
            ));
        }
        match (self.label.converted, self.label.conversion_time) {
            (true, None) => Err(("conv_time".into(), "converted user requires a conversion time".into())),
            (false, Some(_)) => Err(("conv_time".into(), "non-converted user must have null conversion time".into())),
            _ => Ok(()),
        }
    }
}

/// Activity session: a maximal run of events whose consecutive gaps are all
/// below the session gap.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Session<'a> {
    pub events: &'a [Event],
}

impl<'a> Session<'a> {
    pub fn activities(&self) -> impl Iterator<Item = &'a ActivityId> + 'a {
        self.events.iter().map(|e| &e.activity)
    }
}

/// Splits chronologically sorted events into sessions. A new session starts
/// whenever the gap to the previous event is at least `gap_seconds`.
pub fn sessionize(events: &[Event], gap_seconds: u64) -> Vec<Session<'_>> {
    events
        .chunk_by(|a, b| b.timestamp.saturating_sub(a.timestamp) < gap_seconds)
        .map(|events| Session { events })
        .collect()
}

/// User → cluster membership.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ClusterMap {
    pub memberships: BTreeMap<UserId, BTreeSet<ClusterId>>,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: field `{field}`: {message}")]
    Record { line: usize, field: String, message: String },
    #[error("line {line}: duplicate user id `{user}`")]
    DuplicateUser { line: usize, user: UserId },
    #[error("user `{user}`: field `{field}`: {message}")]
    Invalid { user: UserId, field: String, message: String },
    #[error("duplicate user id `{0}`")]
    Duplicate(UserId),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// All users' trails, cluster memberships and conversion labels.
#[derive(Clone, Debug)]
pub struct TrailCorpus {
    records: Vec<UserRecord>,
    user_index: HashMap<UserId, usize>,
    cluster_members: BTreeMap<ClusterId, Vec<usize>>,
    vocabulary: BTreeSet<ActivityId>,
    conversion_activities: BTreeSet<ActivityId>,
    time_range: Option<(Timestamp, Timestamp)>,
}

impl PartialEq for TrailCorpus {
    fn eq(&self, other: &Self) -> bool {
        self.records == other.records
    }
}

impl Eq for TrailCorpus {}

impl TrailCorpus {
    pub fn from_records(records: Vec<UserRecord>) -> Result<Self, CorpusError> {
        for r in &records {
            r.check().map_err(|(field, message)| CorpusError::Invalid {
                user: r.user().clone(),
                field,
                message,
            })?;
        }
        Self::build(records, |i| i).map_err(|e| match e {
            CorpusError::DuplicateUser { user, .. } => CorpusError::Duplicate(user),
            CorpusError::Record { line, field, message } => {
                // `line` carries the record position here.
                CorpusError::Invalid { user: UserId(format!("#{line}")), field, message }
            }
            other => other,
        })
    }

    /// Cross-record validation and index construction. `line_of` maps a
    /// record position to the line number reported in errors.
    pub(crate) fn build(records: Vec<UserRecord>, line_of: impl Fn(usize) -> usize) -> Result<Self, CorpusError> {
        let mut user_index = HashMap::with_capacity(records.len());
        let mut cluster_members: BTreeMap<ClusterId, Vec<usize>> = BTreeMap::new();
        let mut vocabulary = BTreeSet::new();
        let mut conversion_activities = BTreeSet::new();
        let mut time_range: Option<(Timestamp, Timestamp)> = None;

        for (i, r) in records.iter().enumerate() {
            if user_index.insert(r.user().clone(), i).is_some() {
                return Err(CorpusError::DuplicateUser { line: line_of(i), user: r.user().clone() });
            }
            for c in &r.clusters {
                cluster_members.entry(c.clone()).or_default().push(i);
            }
            for e in &r.trail.events {
                if !vocabulary.contains(&e.activity) {
                    vocabulary.insert(e.activity.clone());
                }
                if e.kind.is_conversion() && !conversion_activities.contains(&e.activity) {
                    conversion_activities.insert(e.activity.clone());
                }
            }
            if let (Some(first), Some(last)) = (r.trail.events.first(), r.trail.events.last()) {
                time_range = Some(match time_range {
                    None => (first.timestamp, last.timestamp),
                    Some((lo, hi)) => (lo.min(first.timestamp), hi.max(last.timestamp)),
                });
            }
        }

        for (i, r) in records.iter().enumerate() {
            if let Some(t) = r.label.conversion_time {
                let inside = time_range.is_some_and(|(lo, hi)| (lo..=hi).contains(&t));
                if !inside {
                    return Err(CorpusError::Record {
                        line: line_of(i),
                        field: "conv_time".into(),
                        message: format!("conversion time {t} lies outside the corpus time range"),
                    });
                }
            }
        }

        Ok(Self { records, user_index, cluster_members, vocabulary, conversion_activities, time_range })
    }

    pub fn records(&self) -> &[UserRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<UserRecord> {
        self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn index_of(&self, user: &str) -> Option<usize> {
        self.user_index.get(user).copied()
    }

    pub fn user(&self, user: &str) -> Option<&UserRecord> {
        self.index_of(user).map(|i| &self.records[i])
    }

    pub fn trails(&self) -> impl Iterator<Item = &UserTrail> {
        self.records.iter().map(|r| &r.trail)
    }

    pub fn labels(&self) -> impl Iterator<Item = (&UserId, ConversionLabel)> {
        self.records.iter().map(|r| (r.user(), r.label))
    }

    pub fn cluster_map(&self) -> ClusterMap {
        ClusterMap {
            memberships: self.records.iter().map(|r| (r.user().clone(), r.clusters.clone())).collect(),
        }
    }

    pub fn cluster_ids(&self) -> impl Iterator<Item = &ClusterId> {
        self.cluster_members.keys()
    }

    pub fn n_clusters(&self) -> usize {
        self.cluster_members.len()
    }

    /// Record positions of the cluster's members, in corpus order.
    pub fn members(&self, cluster: &str) -> &[usize] {
        self.cluster_members.get(cluster).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn has_cluster(&self, cluster: &str) -> bool {
        self.cluster_members.contains_key(cluster)
    }

    /// Union of activity ids appearing in any trail.
    pub fn vocabulary(&self) -> &BTreeSet<ActivityId> {
        &self.vocabulary
    }

    /// Activity ids that occur with [`EventKind::Conversion`].
    pub fn conversion_activities(&self) -> &BTreeSet<ActivityId> {
        &self.conversion_activities
    }

    /// Vocabulary without conversion activities: the candidate pool for
    /// seed lists and model features.
    pub fn activity_pool(&self) -> BTreeSet<ActivityId> {
        self.vocabulary.difference(&self.conversion_activities).cloned().collect()
    }

    /// Earliest and latest event timestamps.
    pub fn time_range(&self) -> Option<(Timestamp, Timestamp)> {
        self.time_range
    }

    pub fn n_converters(&self) -> usize {
        self.records.iter().filter(|r| r.label.converted).count()
    }
}
