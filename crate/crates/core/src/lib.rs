//! Conversion prediction for multi-user (B2B) purchase funnels.
//!
//! Users are grouped into clusters (households, organizations). A seed list
//! of advertiser-relevant activities marks the *relevant* users of each
//! cluster, and every user's trail is augmented with the trails of the
//! relevant users sharing a cluster with them before it is fed to a sparse
//! logistic-regression conversion model. The seed list is grown from a
//! conversion-rate ranked initial list by adding activities that are close,
//! in a skip-gram activity embedding, to many current seed activities, for
//! as long as validation AUC keeps improving.
//!
//! Modules:
//!
//! - [`datamodel`]: events, trails, clusters, the corpus and its file format
//! - [`synthgen`]: synthetic organizations with planted ground truth
//! - [`embed`]: skip-gram negative-sampling activity embeddings
//! - [`annindex`]: random-hyperplane LSH over an embedding table
//! - [`convmodel`]: relevant users, trail augmentation, logistic regression, AUC
//! - [`seedexp`]: initial seed list, neighbor operator, AUC-gated expansion
//! - [`infotheory`]: closed-form and empirical conditional entropy H(C|R)

pub mod annindex;
pub mod convmodel;
pub mod datamodel;
pub mod embed;
pub mod infotheory;
pub mod seedexp;
pub mod synthgen;

pub use datamodel::{ActivityId, ClusterId, Event, EventKind, TrailCorpus, UserId};
