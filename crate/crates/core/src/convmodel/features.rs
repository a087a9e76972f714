use std::collections::{BTreeSet, HashMap};

use crate::datamodel::{ActivityId, Timestamp, TrailCorpus, UserId};

use super::{ModelError, SeedList};

/// Per-user relevance flags for one seed list: a user is relevant when their
/// trail contains at least one seed activity outside a conversion event.
#[derive(Clone, Debug)]
pub struct Relevance {
    relevant: Vec<bool>,
}

impl Relevance {
    pub fn new(corpus: &TrailCorpus, seed: &SeedList) -> Self {
        let relevant = if seed.is_empty() {
            vec![false; corpus.len()]
        } else {
            corpus
                .records()
                .iter()
                .map(|r| r.trail.events.iter().any(|e| !e.kind.is_conversion() && seed.contains(e.activity.as_str())))
                .collect()
        };
        Self { relevant }
    }

    pub fn is_relevant(&self, user: usize) -> bool {
        self.relevant[user]
    }

    pub fn count(&self) -> usize {
        self.relevant.iter().filter(|r| **r).count()
    }

    /// Record positions of the relevant members of `cluster`.
    pub fn in_cluster<'c>(&'c self, corpus: &'c TrailCorpus, cluster: &str) -> impl Iterator<Item = usize> + 'c {
        corpus.members(cluster).iter().copied().filter(|&u| self.relevant[u])
    }

    /// Users whose trails make up `user`'s augmented trail: the user plus every
    /// relevant user in any of the user's clusters. Sorted, duplicate-free.
    pub fn contributors(&self, corpus: &TrailCorpus, user: usize) -> Vec<usize> {
        let mut out = vec![user];
        for c in &corpus.records()[user].clusters {
            out.extend(self.in_cluster(corpus, c.as_str()));
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Relevance indicator of the augmented trail: whether any contributor is
    /// relevant.
    pub fn augmented_flag(&self, corpus: &TrailCorpus, user: usize) -> bool {
        self.relevant[user]
            || corpus.records()[user].clusters.iter().any(|c| self.in_cluster(corpus, c.as_str()).next().is_some())
    }

    /// Calls `f` for every activity of `user`'s augmented trail strictly before
    /// `cutoff`, conversion events excluded.
    pub fn for_each_augmented<'c>(
        &self,
        corpus: &'c TrailCorpus,
        user: usize,
        cutoff: Timestamp,
        mut f: impl FnMut(&'c ActivityId),
    ) {
        for u in self.contributors(corpus, user) {
            for e in corpus.records()[u].trail.before(cutoff) {
                if !e.kind.is_conversion() {
                    f(&e.activity);
                }
            }
        }
    }
}

/// Members of `cluster` whose trails contain at least one seed activity.
pub fn relevant_users(corpus: &TrailCorpus, cluster: &str, seed: &SeedList) -> BTreeSet<UserId> {
    let relevance = Relevance::new(corpus, seed);
    relevance.in_cluster(corpus, cluster).map(|u| corpus.records()[u].user().clone()).collect()
}

/// Augmented trail of `user` before `cutoff`: the user's own activities plus
/// those of every relevant user in the user's clusters, as a multiset.
/// Conversion events are excluded.
pub fn augment(
    corpus: &TrailCorpus,
    user: &str,
    seed: &SeedList,
    cutoff: Timestamp,
) -> Result<Vec<ActivityId>, ModelError> {
    let idx = corpus.index_of(user).ok_or_else(|| ModelError::UnknownUser(user.to_owned()))?;
    let relevance = Relevance::new(corpus, seed);
    let mut out = Vec::new();
    relevance.for_each_augmented(corpus, idx, cutoff, |a| out.push(a.clone()));
    Ok(out)
}

/// Presence-encoded activity features: sorted vocabulary positions.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FeatureVector {
    indices: Vec<u32>,
}

impl FeatureVector {
    /// Sorts and dedupes `indices`.
    pub fn from_indices(mut indices: Vec<u32>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        Self { indices }
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Activity → feature position. Positions follow ascending activity id.
#[derive(Clone, Debug, Default)]
pub struct VocabMap {
    ids: Vec<ActivityId>,
    index: HashMap<ActivityId, u32>,
}

impl VocabMap {
    pub fn new<'a, I>(activities: I) -> Self
    where
        I: IntoIterator<Item = &'a ActivityId>,
    {
        let ids: Vec<ActivityId> = activities.into_iter().collect::<BTreeSet<_>>().into_iter().cloned().collect();
        let index = ids.iter().enumerate().map(|(i, a)| (a.clone(), i as u32)).collect();
        Self { ids, index }
    }

    pub fn get(&self, id: &str) -> Option<u32> {
        self.index.get(id).copied()
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[ActivityId] {
        &self.ids
    }
}

/// One-hot presence encoding; activities missing from `vocab` are dropped.
pub fn encode<'a, I>(augmented: I, vocab: &VocabMap) -> FeatureVector
where
    I: IntoIterator<Item = &'a ActivityId>,
{
    FeatureVector::from_indices(augmented.into_iter().filter_map(|a| vocab.get(a.as_str())).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convmodel::Provenance;
    use crate::datamodel::{ClusterId, ConversionLabel, Event, EventKind, UserRecord, UserTrail};

    fn id(s: &str) -> ActivityId {
        ActivityId::new(s).unwrap()
    }

    fn rec(user: &str, clusters: &[&str], events: &[(&str, u64)], label: ConversionLabel) -> UserRecord {
        UserRecord {
            trail: UserTrail {
                user: UserId::new(user).unwrap(),
                events: events
                    .iter()
                    .map(|&(a, t)| {
                        let kind = if a == "conv" { EventKind::Conversion } else { EventKind::Search };
                        Event::new(id(a), t, kind)
                    })
                    .collect(),
            },
            clusters: clusters.iter().map(|c| ClusterId::new(*c).unwrap()).collect(),
            label,
        }
    }

    /// Two organizations; `m` belongs to both.
    fn corpus() -> TrailCorpus {
        TrailCorpus::from_records(vec![
            rec("owner", &["c1"], &[("n1", 5), ("conv", 100)], ConversionLabel::converted_at(100)),
            rec("res", &["c1"], &[("rel", 10), ("n2", 20), ("late", 200)], ConversionLabel::NEGATIVE),
            rec("m", &["c1", "c2"], &[("n3", 30)], ConversionLabel::NEGATIVE),
            rec("r2", &["c2"], &[("rel2", 40)], ConversionLabel::NEGATIVE),
            rec("x", &["c3"], &[("rel", 50)], ConversionLabel::NEGATIVE),
        ])
        .unwrap()
    }

    fn seed(ids: &[&str]) -> SeedList {
        SeedList::from_ids(ids.iter().map(|s| id(s)), Provenance::Manual)
    }

    fn names(v: &[ActivityId]) -> Vec<&str> {
        let mut out: Vec<_> = v.iter().map(|a| a.as_str()).collect();
        out.sort_unstable();
        out
    }

    #[test]
    fn empty_seed_has_no_relevant_users() {
        let c = corpus();
        for cl in ["c1", "c2", "c3"] {
            assert!(relevant_users(&c, cl, &SeedList::new()).is_empty());
        }
    }

    #[test]
    fn relevant_users_per_cluster() {
        let c = corpus();
        let s = seed(&["rel"]);
        let got: Vec<_> = relevant_users(&c, "c1", &s).into_iter().map(String::from).collect();
        assert_eq!(got, ["res"]);
        assert!(relevant_users(&c, "c2", &s).is_empty());
        // conversion events never make a user relevant
        assert!(relevant_users(&c, "c1", &seed(&["conv"])).is_empty());
    }

    #[test]
    fn empty_seed_augments_to_own_trail() {
        let c = corpus();
        assert_eq!(names(&augment(&c, "owner", &SeedList::new(), 1000).unwrap()), ["n1"]);
    }

    #[test]
    fn augmentation_respects_cutoff_and_excludes_conversions() {
        let c = corpus();
        let s = seed(&["rel"]);
        assert_eq!(names(&augment(&c, "owner", &s, 100).unwrap()), ["n1", "n2", "rel"]);
        assert_eq!(names(&augment(&c, "owner", &s, 1000).unwrap()), ["late", "n1", "n2", "rel"]);
        // a relevant user is counted once
        assert_eq!(names(&augment(&c, "res", &s, 1000).unwrap()), ["late", "n2", "rel"]);
    }

    #[test]
    fn multi_cluster_user_unions_both_clusters() {
        let c = corpus();
        let s = seed(&["rel", "rel2"]);
        let got = augment(&c, "m", &s, 1000).unwrap();
        // manual union: own {n3} ∪ c1 relevant {res} ∪ c2 relevant {r2}
        assert_eq!(names(&got), ["late", "n2", "n3", "rel", "rel2"]);
        assert!(augment(&c, "nobody", &s, 0).is_err());
    }

    #[test]
    fn augmented_flag_matches_contributors() {
        let c = corpus();
        let rel = Relevance::new(&c, &seed(&["rel"]));
        let flags: Vec<_> = (0..c.len()).map(|u| rel.augmented_flag(&c, u)).collect();
        assert_eq!(flags, [true, true, true, false, true]);
    }

    #[test]
    fn encode_presence() {
        let vocab = VocabMap::new([id("b"), id("a"), id("c")].iter());
        assert_eq!(vocab.get("a"), Some(0));
        assert!(encode([].iter(), &vocab).is_empty());
        let fv = encode([id("c"), id("a"), id("c"), id("zzz")].iter(), &vocab);
        assert_eq!(fv.indices(), &[0, 2]);
    }
}
