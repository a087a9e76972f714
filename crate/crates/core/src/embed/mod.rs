//! Skip-gram activity embeddings trained over sessionized trails, plus
//! cosine geometry and the plain-text embedding file format.

mod io;
mod train;

use std::collections::HashMap;

use thiserror::Error;

use crate::datamodel::ActivityId;

pub use io::{load_embeddings, parse_embeddings, save_embeddings, write_embeddings, EmbeddingFileError};
pub use train::{sgns_gradient, sgns_loss, train, train_with_report, SgnsGradient, TrainParams, TrainReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EmbedError {
    #[error("no activity reaches min_count = {0}")]
    EmptyVocabulary(u32),
    #[error("corpus has no events to train on")]
    EmptyCorpus,
    #[error("invalid training parameter `{field}`: {message}")]
    InvalidParams { field: &'static str, message: String },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("cosine of a zero vector")]
    ZeroVector,
    #[error("non-finite value in vector for `{0}`")]
    NonFinite(String),
    #[error("duplicate activity `{0}`")]
    Duplicate(String),
    #[error("unknown activity `{0}`")]
    UnknownActivity(String),
}

/// Dense vectors, one per activity, stored row-major in ascending id order.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    ids: Vec<ActivityId>,
    data: Vec<f32>,
    index: HashMap<ActivityId, usize>,
}

impl EmbeddingTable {
    /// Builds a table from `(id, vector)` rows. Rows are re-ordered by id.
    pub fn from_rows(dim: usize, rows: impl IntoIterator<Item = (ActivityId, Vec<f32>)>) -> Result<Self, EmbedError> {
        if dim == 0 {
            return Err(EmbedError::InvalidParams { field: "dim", message: "must be positive".into() });
        }
        let mut rows: Vec<(ActivityId, Vec<f32>)> = rows.into_iter().collect();
        rows.sort_by(|a, b| a.0.cmp(&b.0));
        if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(EmbedError::Duplicate(w[0].0.to_string()));
        }
        let mut ids = Vec::with_capacity(rows.len());
        let mut data = Vec::with_capacity(rows.len() * dim);
        for (id, v) in rows {
            if v.len() != dim {
                return Err(EmbedError::DimensionMismatch { expected: dim, found: v.len() });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(EmbedError::NonFinite(id.to_string()));
            }
            data.extend_from_slice(&v);
            ids.push(id);
        }
        Ok(Self::from_parts(dim, ids, data))
    }

    /// `ids` must be sorted and unique, `data` of length `ids.len() * dim`.
    pub(crate) fn from_parts(dim: usize, ids: Vec<ActivityId>, data: Vec<f32>) -> Self {
        debug_assert!(ids.windows(2).all(|w| w[0] < w[1]));
        debug_assert_eq!(data.len(), ids.len() * dim);
        let index = ids.iter().enumerate().map(|(i, id)| (id.clone(), i)).collect();
        Self { dim, ids, data, index }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Ids in table order (ascending).
    pub fn ids(&self) -> &[ActivityId] {
        &self.ids
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn vector(&self, id: &str) -> Option<&[f32]> {
        self.index_of(id).map(|i| self.row(i))
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = (&ActivityId, &[f32])> {
        self.ids.iter().zip(self.data.chunks_exact(self.dim))
    }

    /// Cosine between two stored activities.
    pub fn similarity(&self, a: &str, b: &str) -> Result<f64, EmbedError> {
        let va = self.vector(a).ok_or_else(|| EmbedError::UnknownActivity(a.into()))?;
        let vb = self.vector(b).ok_or_else(|| EmbedError::UnknownActivity(b.into()))?;
        cosine(va, vb)
    }
}

pub(crate) fn dot(a: &[f32], b: &[f32]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| f64::from(x) * f64::from(y)).sum()
}

/// Cosine similarity, accumulated in f64 and clamped to [-1, 1].
pub fn cosine(a: &[f32], b: &[f32]) -> Result<f64, EmbedError> {
    if a.len() != b.len() {
        return Err(EmbedError::DimensionMismatch { expected: a.len(), found: b.len() });
    }
    let (na, nb) = (dot(a, a), dot(b, b));
    if na == 0.0 || nb == 0.0 {
        return Err(EmbedError::ZeroVector);
    }
    Ok((dot(a, b) / (na * nb).sqrt()).clamp(-1.0, 1.0))
}
