use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use trailaug::annindex::{exact_topk, recall_at_k, spread_queries, LshConfig, LshIndex, Query};
use trailaug::embed::{cosine, EmbeddingTable};
use trailaug::ActivityId;

fn gaussian(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f32> {
    (0..dim).map(|_| rng.sample::<f32, _>(StandardNormal)).collect()
}

/// `centers * members` vectors, each a small perturbation of its center.
fn clustered_table(centers: usize, members: usize, dim: usize, noise: f32, seed: u64) -> EmbeddingTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(centers * members);
    for c in 0..centers {
        let center = gaussian(&mut rng, dim);
        for m in 0..members {
            let v: Vec<f32> = center.iter().map(|x| x + noise * rng.sample::<f32, _>(StandardNormal)).collect();
            rows.push((ActivityId::new(format!("c{c:04}m{m:02}")).unwrap(), v));
        }
    }
    EmbeddingTable::from_rows(dim, rows).unwrap()
}

fn random_table(n: usize, dim: usize, seed: u64) -> EmbeddingTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    EmbeddingTable::from_rows(dim, (0..n).map(|i| (ActivityId::new(format!("v{i:05}")).unwrap(), gaussian(&mut rng, dim))))
        .unwrap()
}

#[test]
fn every_vector_finds_itself() {
    let table = random_table(10_000, 32, 1);
    let index = LshIndex::build(&table, LshConfig::default()).unwrap();
    for (i, (id, v)) in table.rows().enumerate() {
        let top = index.query_topk(Query::Vector(v), 1).unwrap();
        assert_eq!(&top[0].id, id);
        assert!((top[0].cosine - 1.0).abs() < 1e-9);
        for t in 0..index.config().n_tables {
            let bucket = index.bucket(t, index.signature(t, v));
            assert_eq!(bucket.iter().filter(|&&r| r as usize == i).count(), 1);
        }
    }
    let total: usize = (0..index.config().n_tables)
        .map(|t| {
            let mut sigs: Vec<u64> = (0..table.len()).map(|i| index.signature(t, table.row(i))).collect();
            sigs.sort_unstable();
            sigs.dedup();
            sigs.iter().map(|&s| index.bucket(t, s).len()).sum::<usize>()
        })
        .sum();
    assert_eq!(total, table.len() * index.config().n_tables);
}

#[test]
fn default_recall_at_ten_on_ten_thousand_vectors() {
    let table = clustered_table(500, 20, 32, 0.15, 2);
    let index = LshIndex::build(&table, LshConfig::default()).unwrap();
    let recall = recall_at_k(&index, &spread_queries(table.len(), 200), 10).unwrap();
    assert!(recall >= 0.9, "recall {recall}");
}

#[test]
fn recall_grows_with_tables() {
    let table = clustered_table(200, 20, 32, 0.35, 3);
    let queries = spread_queries(table.len(), 200);
    let recalls: Vec<f64> = [1, 2, 4, 8]
        .iter()
        .map(|&n_tables| {
            let index = LshIndex::build(&table, LshConfig { n_tables, ..LshConfig::default() }).unwrap();
            recall_at_k(&index, &queries, 10).unwrap()
        })
        .collect();
    for w in recalls.windows(2) {
        assert!(w[1] >= w[0], "{recalls:?}");
    }
    assert!(recalls[3] > recalls[0]);
}

#[test]
fn reported_cosines_are_exact() {
    let table = clustered_table(50, 10, 16, 0.3, 4);
    let index = LshIndex::build(&table, LshConfig { n_tables: 4, n_planes: 8, rng_seed: 9 }).unwrap();
    for q in spread_queries(table.len(), 40) {
        let id = table.ids()[q].as_str();
        let exact = exact_topk(&table, Query::Id(id), table.len()).unwrap();
        for n in index.query_topk(Query::Id(id), 10).unwrap() {
            assert_ne!(n.id.as_str(), id);
            let c = cosine(table.row(q), table.vector(n.id.as_str()).unwrap()).unwrap();
            assert_eq!(n.cosine, c);
            assert!(exact.iter().any(|e| e.id == n.id && e.cosine == n.cosine));
        }
    }
}

#[test]
fn same_seed_same_buckets() {
    let table = random_table(500, 8, 5);
    let a = LshIndex::build(&table, LshConfig::default()).unwrap();
    let b = LshIndex::build(&table, LshConfig::default()).unwrap();
    for q in 0..table.len() {
        assert_eq!(a.candidates(Query::Vector(table.row(q))).unwrap(), b.candidates(Query::Vector(table.row(q))).unwrap());
    }
}
