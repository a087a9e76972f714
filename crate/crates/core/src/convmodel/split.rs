use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::datamodel::{ClusterId, TrailCorpus};

use super::ModelError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Partition {
    Train,
    Validation,
    Test,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitFractions {
    pub train: f64,
    pub validation: f64,
}

impl Default for SplitFractions {
    fn default() -> Self {
        Self { train: 0.6, validation: 0.2 }
    }
}

/// Cluster-level train/validation/test assignment.
///
/// Clusters linked by a shared user always land in the same partition, so no
/// user's augmented trail can draw on another partition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Split {
    pub train: BTreeSet<ClusterId>,
    pub validation: BTreeSet<ClusterId>,
    pub test: BTreeSet<ClusterId>,
}

impl Split {
    pub fn by_cluster(corpus: &TrailCorpus, fractions: SplitFractions, seed: u64) -> Result<Split, ModelError> {
        let f = fractions;
        if !(0.0..=1.0).contains(&f.train) || !(0.0..=1.0).contains(&f.validation) || f.train + f.validation > 1.0 {
            return Err(ModelError::InvalidSplit(format!(
                "fractions train={} validation={} must be non-negative and sum to at most 1",
                f.train, f.validation
            )));
        }

        let mut components = cluster_components(corpus);
        components.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

        let n = components.len();
        let n_train = (f.train * n as f64).round() as usize;
        let n_val = ((f.validation * n as f64).round() as usize).min(n - n_train.min(n));
        let mut split = Split { train: BTreeSet::new(), validation: BTreeSet::new(), test: BTreeSet::new() };
        for (i, comp) in components.into_iter().enumerate() {
            let target = if i < n_train {
                &mut split.train
            } else if i < n_train + n_val {
                &mut split.validation
            } else {
                &mut split.test
            };
            target.extend(comp);
        }
        Ok(split)
    }

    pub fn partition(&self, part: Partition) -> &BTreeSet<ClusterId> {
        match part {
            Partition::Train => &self.train,
            Partition::Validation => &self.validation,
            Partition::Test => &self.test,
        }
    }

    pub fn partition_of(&self, cluster: &str) -> Option<Partition> {
        [Partition::Train, Partition::Validation, Partition::Test]
            .into_iter()
            .find(|&p| self.partition(p).contains(cluster))
    }

    /// Partition of every user, in corpus order. Fails if the split does not
    /// cover the corpus exactly once or a user straddles partitions.
    pub fn user_partitions(&self, corpus: &TrailCorpus) -> Result<Vec<Partition>, ModelError> {
        self.validate(corpus)?;
        corpus
            .records()
            .iter()
            .map(|r| {
                let mut parts = r.clusters.iter().map(|c| self.partition_of(c.as_str()).expect("validated"));
                let first = parts.next().expect("records have at least one cluster");
                if parts.all(|p| p == first) {
                    Ok(first)
                } else {
                    Err(ModelError::InvalidSplit(format!("user `{}` spans partitions", r.user())))
                }
            })
            .collect()
    }

    pub fn validate(&self, corpus: &TrailCorpus) -> Result<(), ModelError> {
        for (a, b) in [(&self.train, &self.validation), (&self.train, &self.test), (&self.validation, &self.test)] {
            if let Some(c) = a.intersection(b).next() {
                return Err(ModelError::InvalidSplit(format!("cluster `{c}` assigned twice")));
            }
        }
        for c in corpus.cluster_ids() {
            if self.partition_of(c.as_str()).is_none() {
                return Err(ModelError::InvalidSplit(format!("cluster `{c}` not assigned")));
            }
        }
        let total = self.train.len() + self.validation.len() + self.test.len();
        if total != corpus.n_clusters() {
            return Err(ModelError::InvalidSplit("split names clusters absent from the corpus".into()));
        }
        Ok(())
    }
}

/// Groups clusters connected through shared users. Components are sorted by
/// their smallest cluster id, and so is each component.
fn cluster_components(corpus: &TrailCorpus) -> Vec<Vec<ClusterId>> {
    let ids: Vec<&ClusterId> = corpus.cluster_ids().collect();
    let pos: BTreeMap<&str, usize> = ids.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();
    let mut parent: Vec<usize> = (0..ids.len()).collect();

    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }

    for r in corpus.records() {
        let mut it = r.clusters.iter().map(|c| pos[c.as_str()]);
        if let Some(first) = it.next() {
            for other in it {
                let (a, b) = (find(&mut parent, first), find(&mut parent, other));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }

    let mut groups: BTreeMap<usize, Vec<ClusterId>> = BTreeMap::new();
    for (i, id) in ids.iter().enumerate() {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push((*id).clone());
    }
    groups.into_values().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datamodel::{ConversionLabel, UserId, UserRecord, UserTrail};

    fn corpus(users: &[(&str, &[&str])]) -> TrailCorpus {
        TrailCorpus::from_records(
            users
                .iter()
                .map(|(u, cs)| UserRecord {
                    trail: UserTrail { user: UserId::new(*u).unwrap(), events: vec![] },
                    clusters: cs.iter().map(|c| ClusterId::new(*c).unwrap()).collect(),
                    label: ConversionLabel::NEGATIVE,
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn split_covers_every_cluster_once() {
        let names: Vec<String> = (0..50).map(|i| format!("c{i:02}")).collect();
        let users: Vec<(String, Vec<&str>)> = names.iter().map(|c| (format!("u-{c}"), vec![c.as_str()])).collect();
        let users: Vec<(&str, &[&str])> = users.iter().map(|(u, c)| (u.as_str(), c.as_slice())).collect();
        let c = corpus(&users);
        let s = Split::by_cluster(&c, SplitFractions::default(), 1).unwrap();
        s.validate(&c).unwrap();
        assert_eq!((s.train.len(), s.validation.len(), s.test.len()), (30, 10, 10));
        assert_eq!(Split::by_cluster(&c, SplitFractions::default(), 1).unwrap(), s);
        assert_ne!(Split::by_cluster(&c, SplitFractions::default(), 2).unwrap(), s);
    }

    #[test]
    fn shared_users_keep_clusters_together() {
        let c = corpus(&[("a", &["c1", "c2"]), ("b", &["c2", "c3"]), ("d", &["c4"]), ("e", &["c5"])]);
        for seed in 0..20 {
            let s = Split::by_cluster(&c, SplitFractions { train: 0.5, validation: 0.25 }, seed).unwrap();
            let p = s.partition_of("c1").unwrap();
            assert_eq!(s.partition_of("c2"), Some(p));
            assert_eq!(s.partition_of("c3"), Some(p));
            s.user_partitions(&c).unwrap();
        }
    }

    #[test]
    fn invalid_splits_detected() {
        let c = corpus(&[("a", &["c1"]), ("b", &["c2"])]);
        let mut s = Split::by_cluster(&c, SplitFractions::default(), 0).unwrap();
        let moved = s.test.iter().chain(&s.validation).next().cloned();
        if let Some(m) = moved {
            s.train.insert(m);
        }
        assert!(s.validate(&c).is_err());
        assert!(Split::by_cluster(&c, SplitFractions { train: 0.9, validation: 0.3 }, 0).is_err());
    }
}
