use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::datamodel::{ActivityId, TrailCorpus};

/// Where a seed activity came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Provenance {
    /// Top of the conversion-rate ranking.
    Initial,
    /// Added by the given expansion iteration.
    Iteration(u32),
    /// Supplied by an operator.
    Manual,
}

impl Provenance {
    fn directive(self) -> String {
        match self {
            Provenance::Initial => "# @initial".into(),
            Provenance::Iteration(i) => format!("# @iteration {i}"),
            Provenance::Manual => "# @manual".into(),
        }
    }

    fn parse_directive(comment: &str) -> Option<Self> {
        let rest = comment.trim_start_matches('#').trim().strip_prefix('@')?;
        let mut parts = rest.split_whitespace();
        match (parts.next()?, parts.next(), parts.next()) {
            ("initial", None, _) => Some(Provenance::Initial),
            ("manual", None, _) => Some(Provenance::Manual),
            ("iteration", Some(i), None) => i.parse().ok().map(Provenance::Iteration),
            _ => None,
        }
    }
}

#[derive(Debug, Error)]
pub enum SeedListError {
    #[error("seed list line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Ordered, duplicate-free set of advertiser-relevant activities.
#[derive(Clone, Debug, Default)]
pub struct SeedList {
    activities: Vec<ActivityId>,
    provenance: Vec<Provenance>,
    members: HashSet<ActivityId>,
}

impl PartialEq for SeedList {
    fn eq(&self, other: &Self) -> bool {
        self.activities == other.activities && self.provenance == other.provenance
    }
}

impl Eq for SeedList {}

impl SeedList {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_ids<I>(ids: I, provenance: Provenance) -> Self
    where
        I: IntoIterator<Item = ActivityId>,
    {
        let mut list = Self::new();
        for id in ids {
            list.insert(id, provenance);
        }
        list
    }

    /// Appends `id` unless already present. Returns whether it was added.
    pub fn insert(&mut self, id: ActivityId, provenance: Provenance) -> bool {
        if self.members.contains(&id) {
            return false;
        }
        self.members.insert(id.clone());
        self.activities.push(id);
        self.provenance.push(provenance);
        true
    }

    pub fn remove(&mut self, id: &str) -> bool {
        if !self.members.remove(id) {
            return false;
        }
        let pos = self.activities.iter().position(|a| a.as_str() == id).expect("member index out of sync");
        self.activities.remove(pos);
        self.provenance.remove(pos);
        true
    }

    pub fn contains(&self, id: &str) -> bool {
        self.members.contains(id)
    }

    pub fn len(&self) -> usize {
        self.activities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.activities.is_empty()
    }

    pub fn activities(&self) -> &[ActivityId] {
        &self.activities
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ActivityId, Provenance)> {
        self.activities.iter().zip(self.provenance.iter().copied())
    }

    pub fn provenance_of(&self, id: &str) -> Option<Provenance> {
        self.activities.iter().position(|a| a.as_str() == id).map(|i| self.provenance[i])
    }

    /// Copy of `self` with `extra` appended under `provenance`.
    pub fn union<'a, I>(&self, extra: I, provenance: Provenance) -> SeedList
    where
        I: IntoIterator<Item = &'a ActivityId>,
    {
        let mut out = self.clone();
        for id in extra {
            out.insert(id.clone(), provenance);
        }
        out
    }

    pub fn is_subset(&self, other: &SeedList) -> bool {
        self.activities.iter().all(|a| other.contains(a.as_str()))
    }

    /// Drops activities that occur as conversion events in `corpus`; they
    /// would leak the label.
    pub fn without_conversions(mut self, corpus: &TrailCorpus) -> SeedList {
        for id in corpus.conversion_activities() {
            self.remove(id.as_str());
        }
        self
    }

    /// Highest expansion iteration represented in the list, if any.
    pub fn last_iteration(&self) -> Option<u32> {
        self.provenance
            .iter()
            .filter_map(|p| match p {
                Provenance::Iteration(i) => Some(*i),
                _ => None,
            })
            .max()
    }

    /// Parses the plain-text seed-list format: one activity id per line,
    /// blank lines and `#` comments ignored. `# @initial`, `# @iteration N`
    /// and `# @manual` comments set the provenance of the ids that follow
    /// (default: manual). Repeated ids keep their first occurrence.
    pub fn parse(text: &str) -> Result<SeedList, SeedListError> {
        let mut list = SeedList::new();
        let mut current = Provenance::Manual;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('#') {
                if let Some(p) = Provenance::parse_directive(line) {
                    current = p;
                }
                continue;
            }
            let id = ActivityId::new(line)
                .map_err(|e| SeedListError::Parse { line: i + 1, message: e.to_string() })?;
            list.insert(id, current);
        }
        Ok(list)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("# seed list: {} activities\n", self.len());
        let mut current = None;
        for (id, p) in self.iter() {
            if current != Some(p) {
                out.push_str(&p.directive());
                out.push('\n');
                current = Some(p);
            }
            let _ = writeln!(out, "{id}");
        }
        out
    }

    pub fn load(path: impl AsRef<Path>) -> Result<SeedList, SeedListError> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        fs::write(path, self.to_text())
    }
}
