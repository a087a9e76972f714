//! Random-hyperplane LSH over an [`EmbeddingTable`] for approximate cosine
//! top-k, with the brute-force scan it approximates.
//!
//! Each table's hyperplanes come from an independent RNG stream keyed by the
//! table number, so an index with `L` tables is a prefix of one with `2L`
//! tables under the same seed and its candidate sets only grow with `L`.

use std::cmp::Ordering;
use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datamodel::ActivityId;
use crate::embed::{cosine, EmbedError, EmbeddingTable};

pub const MAX_PLANES: usize = 62;
/// Upper bound on tables chosen by [`LshConfig::for_cosine_threshold`].
pub const MAX_AUTO_TABLES: usize = 128;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnnError {
    #[error("invalid index parameter `{field}`: {message}")]
    InvalidParams { field: &'static str, message: String },
    #[error("cannot index an empty table")]
    EmptyTable,
    #[error("activity `{0}` has a zero vector")]
    ZeroVector(String),
    #[error("unknown activity `{0}`")]
    UnknownActivity(String),
    #[error(transparent)]
    Embed(#[from] EmbedError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LshConfig {
    pub n_tables: usize,
    pub n_planes: usize,
    pub rng_seed: u64,
}

impl Default for LshConfig {
    fn default() -> Self {
        Self { n_tables: 8, n_planes: 16, rng_seed: 0 }
    }
}

impl LshConfig {
    pub fn validate(&self) -> Result<(), AnnError> {
        if self.n_tables < 1 {
            return Err(AnnError::InvalidParams { field: "n_tables", message: "must be at least 1".into() });
        }
        if !(1..=MAX_PLANES).contains(&self.n_planes) {
            return Err(AnnError::InvalidParams {
                field: "n_planes",
                message: format!("must lie in 1..={MAX_PLANES} (got {})", self.n_planes),
            });
        }
        Ok(())
    }

    /// Chooses planes and tables so that a pair at cosine `threshold` shares
    /// no bucket with probability at most `max_miss`, minimizing the expected
    /// share of orthogonal pairs that become candidates.
    pub fn for_cosine_threshold(threshold: f64, max_miss: f64, rng_seed: u64) -> Result<Self, AnnError> {
        if !(threshold > -1.0 && threshold < 1.0) {
            return Err(AnnError::InvalidParams { field: "threshold", message: format!("must lie in (-1, 1) (got {threshold})") });
        }
        if !(max_miss > 0.0 && max_miss < 1.0) {
            return Err(AnnError::InvalidParams { field: "max_miss", message: format!("must lie in (0, 1) (got {max_miss})") });
        }
        let agree = 1.0 - threshold.acos() / std::f64::consts::PI;
        let mut best: Option<(f64, LshConfig)> = None;
        for planes in 1..=MAX_PLANES {
            let hit = agree.powi(planes as i32);
            let tables = (max_miss.ln() / (1.0 - hit).ln()).ceil().max(1.0);
            if !tables.is_finite() || tables > MAX_AUTO_TABLES as f64 {
                continue;
            }
            let cost = 1.0 - (1.0 - 0.5f64.powi(planes as i32)).powf(tables);
            if best.is_none_or(|(c, _)| cost < c) {
                best = Some((cost, LshConfig { n_tables: tables as usize, n_planes: planes, rng_seed }));
            }
        }
        // planes = 1 always fits unless threshold is very low; fall back to the widest net
        Ok(best.map(|(_, c)| c).unwrap_or(LshConfig { n_tables: MAX_AUTO_TABLES, n_planes: 1, rng_seed }))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Neighbor {
    pub id: ActivityId,
    pub cosine: f64,
}

#[derive(Clone, Copy, Debug)]
pub enum Query<'a> {
    Id(&'a str),
    Vector(&'a [f32]),
}

pub struct LshIndex<'t> {
    table: &'t EmbeddingTable,
    config: LshConfig,
    /// Per table, `n_planes × dim` unit normals.
    planes: Vec<Vec<f32>>,
    buckets: Vec<HashMap<u64, Vec<u32>>>,
}

fn table_planes(config: &LshConfig, table: usize, dim: usize) -> Vec<f32> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    rng.set_stream(table as u64);
    let mut out = Vec::with_capacity(config.n_planes * dim);
    for _ in 0..config.n_planes {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        out.extend(v.iter().map(|x| (x / norm) as f32));
    }
    out
}

fn signature(planes: &[f32], v: &[f32]) -> u64 {
    planes.chunks_exact(v.len()).enumerate().fold(0u64, |sig, (bit, h)| {
        let d: f64 = h.iter().zip(v).map(|(&a, &b)| f64::from(a) * f64::from(b)).sum();
        if d >= 0.0 {
            sig | (1 << bit)
        } else {
            sig
        }
    })
}

fn rank(a: &Neighbor, b: &Neighbor) -> Ordering {
    b.cosine.total_cmp(&a.cosine).then_with(|| a.id.cmp(&b.id))
}

fn resolve<'q>(table: &'q EmbeddingTable, query: Query<'q>) -> Result<(&'q [f32], Option<usize>), AnnError> {
    match query {
        Query::Id(id) => {
            let i = table.index_of(id).ok_or_else(|| AnnError::UnknownActivity(id.into()))?;
            Ok((table.row(i), Some(i)))
        }
        Query::Vector(v) => {
            if v.len() != table.dim() {
                return Err(EmbedError::DimensionMismatch { expected: table.dim(), found: v.len() }.into());
            }
            Ok((v, None))
        }
    }
}

fn score(table: &EmbeddingTable, q: &[f32], rows: impl Iterator<Item = usize>, k: usize) -> Result<Vec<Neighbor>, AnnError> {
    let mut out = rows
        .map(|i| Ok(Neighbor { id: table.ids()[i].clone(), cosine: cosine(q, table.row(i))? }))
        .collect::<Result<Vec<_>, EmbedError>>()?;
    if k < out.len() {
        out.select_nth_unstable_by(k, rank);
        out.truncate(k);
    }
    out.sort_by(rank);
    Ok(out)
}

/// Full-scan top-k by exact cosine; an id query excludes itself.
pub fn exact_topk(table: &EmbeddingTable, query: Query<'_>, k: usize) -> Result<Vec<Neighbor>, AnnError> {
    let (q, own) = resolve(table, query)?;
    if k == 0 {
        return Ok(Vec::new());
    }
    score(table, q, (0..table.len()).filter(|&i| Some(i) != own), k)
}

impl<'t> LshIndex<'t> {
    pub fn build(table: &'t EmbeddingTable, config: LshConfig) -> Result<Self, AnnError> {
        config.validate()?;
        if table.is_empty() {
            return Err(AnnError::EmptyTable);
        }
        if let Some((id, _)) = table.rows().find(|(_, v)| v.iter().all(|&x| x == 0.0)) {
            return Err(AnnError::ZeroVector(id.to_string()));
        }
        let planes: Vec<Vec<f32>> = (0..config.n_tables).map(|t| table_planes(&config, t, table.dim())).collect();
        let buckets = planes
            .iter()
            .map(|p| {
                let mut b: HashMap<u64, Vec<u32>> = HashMap::new();
                for i in 0..table.len() {
                    b.entry(signature(p, table.row(i))).or_default().push(i as u32);
                }
                b
            })
            .collect();
        Ok(Self { table, config, planes, buckets })
    }

    pub fn config(&self) -> LshConfig {
        self.config
    }

    pub fn table(&self) -> &'t EmbeddingTable {
        self.table
    }

    /// Signature of `v` in table `t`.
    pub fn signature(&self, t: usize, v: &[f32]) -> u64 {
        signature(&self.planes[t], v)
    }

    pub fn bucket(&self, t: usize, sig: u64) -> &[u32] {
        self.buckets[t].get(&sig).map_or(&[], Vec::as_slice)
    }

    /// Row indices sharing a bucket with the query in any table, ascending,
    /// without the query's own row.
    pub fn candidates(&self, query: Query<'_>) -> Result<Vec<usize>, AnnError> {
        let (q, own) = resolve(self.table, query)?;
        Ok(self.candidate_rows(q, own))
    }

    fn candidate_rows(&self, q: &[f32], own: Option<usize>) -> Vec<usize> {
        let mut rows: Vec<usize> = (0..self.config.n_tables)
            .flat_map(|t| self.bucket(t, self.signature(t, q)).iter().map(|&i| i as usize))
            .filter(|&i| Some(i) != own)
            .collect();
        rows.sort_unstable();
        rows.dedup();
        rows
    }

    pub fn query_topk(&self, query: Query<'_>, k: usize) -> Result<Vec<Neighbor>, AnnError> {
        let (q, own) = resolve(self.table, query)?;
        if k == 0 {
            return Err(AnnError::InvalidParams { field: "k", message: "must be at least 1".into() });
        }
        score(self.table, q, self.candidate_rows(q, own).into_iter(), k)
    }
}

/// Mean over `queries` (row indices) of |LSH top-k ∩ exact top-k| / |exact top-k|.
pub fn recall_at_k(index: &LshIndex<'_>, queries: &[usize], k: usize) -> Result<f64, AnnError> {
    let table = index.table();
    let mut total = 0.0;
    let mut counted = 0usize;
    for &q in queries {
        let id = table.ids()[q].as_str();
        let exact = exact_topk(table, Query::Id(id), k)?;
        if exact.is_empty() {
            continue;
        }
        let approx = index.query_topk(Query::Id(id), k)?;
        let hits = approx.iter().filter(|n| exact.iter().any(|e| e.id == n.id)).count();
        total += hits as f64 / exact.len() as f64;
        counted += 1;
    }
    Ok(if counted == 0 { 1.0 } else { total / counted as f64 })
}

/// `n` row indices spread evenly over a table of `len` rows.
pub fn spread_queries(len: usize, n: usize) -> Vec<usize> {
    let n = n.min(len);
    (0..n).map(|i| i * len / n).collect()
}
