use trailaug::datamodel::{ClusterId, ConversionLabel, Event, EventKind, UserId, UserRecord, UserTrail};
use trailaug::embed::{cosine, save_embeddings, load_embeddings, sgns_gradient, sgns_loss, train, train_with_report, TrainParams};
use trailaug::synthgen::{generate, SynthConfig};
use trailaug::{ActivityId, TrailCorpus};

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn params(seed: u64) -> TrainParams {
    TrainParams { dim: 32, rng_seed: seed, ..TrainParams::default() }
}

fn corpus_from_sessions(sessions: &[Vec<&str>]) -> TrailCorpus {
    let records = sessions
        .iter()
        .enumerate()
        .map(|(i, s)| UserRecord {
            trail: UserTrail {
                user: UserId::new(format!("u{i}")).unwrap(),
                events: s
                    .iter()
                    .enumerate()
                    .map(|(j, a)| Event::new(ActivityId::new(*a).unwrap(), 60 * j as u64, EventKind::Search))
                    .collect(),
            },
            clusters: [ClusterId::new(format!("c{i}")).unwrap()].into(),
            label: ConversionLabel::NEGATIVE,
        })
        .collect();
    TrailCorpus::from_records(records).unwrap()
}

#[test]
fn co_occurring_activities_are_closer() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let fillers: Vec<String> = (0..40).map(|i| format!("f{i}")).collect();
    let mut sessions = Vec::new();
    for _ in 0..400 {
        // C lives in a disjoint context pool
        let (pool, extra): (std::ops::Range<usize>, &[&str]) =
            if rng.random_bool(0.5) { (0..20, &["A", "B"]) } else { (20..40, &["C"]) };
        let mut s: Vec<&str> = (0..3).map(|_| fillers[rng.random_range(pool.clone())].as_str()).collect();
        s.extend(extra);
        sessions.push(s);
    }
    let corpus = corpus_from_sessions(&sessions);
    for seed in 0..5 {
        let t = train(&corpus, &TrainParams { epochs: 10, subsample_threshold: 0.0, ..params(seed) }).unwrap();
        let ab = t.similarity("A", "B").unwrap();
        let ac = t.similarity("A", "C").unwrap();
        assert!(ab > ac, "seed {seed}: cos(A,B) = {ab}, cos(A,C) = {ac}");
    }
}

#[test]
fn loss_decreases_over_epochs() {
    let (corpus, _) = generate(&SynthConfig { k: 300, n_noise: 300, p_o: 0.3, rng_seed: 4, ..SynthConfig::default() }).unwrap();
    let (_, report) = train_with_report(&corpus, &params(1)).unwrap();
    let l = &report.epoch_losses;
    assert_eq!(l.len(), 5);
    assert!(l.last().unwrap() < l.first().unwrap(), "{l:?}");
}

#[test]
fn deterministic_mode_is_byte_identical() {
    let (corpus, _) = generate(&SynthConfig { k: 100, n_noise: 200, rng_seed: 2, ..SynthConfig::default() }).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.txt"), dir.path().join("b.txt"));
    save_embeddings(&train(&corpus, &params(7)).unwrap(), &a).unwrap();
    save_embeddings(&train(&corpus, &params(7)).unwrap(), &b).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let back = load_embeddings(&a).unwrap();
    assert_eq!(back, train(&corpus, &params(7)).unwrap());
}

#[test]
fn parallel_mode_trains_same_vocabulary() {
    let (corpus, _) = generate(&SynthConfig { k: 100, n_noise: 200, rng_seed: 2, ..SynthConfig::default() }).unwrap();
    let det = train(&corpus, &params(7)).unwrap();
    let par = train(&corpus, &TrainParams { deterministic: false, ..params(7) }).unwrap();
    assert_eq!(det.ids(), par.ids());
    assert!(par.rows().all(|(_, v)| v.iter().all(|x| x.is_finite())));
}

#[test]
fn min_count_and_subsampling_keep_ids() {
    let (corpus, _) = generate(&SynthConfig { k: 50, n_noise: 500, rng_seed: 3, ..SynthConfig::default() }).unwrap();
    let full = train(&corpus, &TrainParams { min_count: 1, subsample_threshold: 0.0, epochs: 1, ..params(0) }).unwrap();
    let pruned = train(&corpus, &TrainParams { min_count: 3, subsample_threshold: 1e-4, epochs: 1, ..params(0) }).unwrap();
    assert!(pruned.len() < full.len());
    assert!(pruned.ids().iter().all(|id| full.contains(id.as_str()) && corpus.vocabulary().contains(id)));
    assert!(!full.contains("conv"));
}

#[test]
fn planted_relevant_activities_cluster() {
    for seed in 0..5 {
        let cfg = SynthConfig { k: 1500, p_o: 0.3, rng_seed: seed, ..SynthConfig::default() };
        let (corpus, truth) = generate(&cfg).unwrap();
        let t = train(&corpus, &params(seed)).unwrap();
        let rel: Vec<&[f32]> = truth.relevant_activities.iter().filter_map(|a| t.vector(a.as_str())).collect();
        let noise: Vec<&[f32]> = t
            .rows()
            .filter(|(id, _)| id.as_str().starts_with('n'))
            .map(|(_, v)| v)
            .take(300)
            .collect();
        let mut within = (0.0, 0);
        for i in 0..rel.len() {
            for j in i + 1..rel.len() {
                within.0 += cosine(rel[i], rel[j]).unwrap();
                within.1 += 1;
            }
        }
        let mut across = (0.0, 0);
        for r in &rel {
            for n in &noise {
                across.0 += cosine(r, n).unwrap();
                across.1 += 1;
            }
        }
        let (w, a) = (within.0 / within.1 as f64, across.0 / across.1 as f64);
        assert!(w - a > 0.1, "seed {seed}: within {w:.3} across {a:.3}");
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
}

#[test]
fn sgns_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let h = 1e-5;
    for _ in 0..10 {
        let dim = 6;
        let mut v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut u: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut negs: Vec<Vec<f64>> = (0..3).map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let g = sgns_gradient(&v, &u, &negs);
        for i in 0..dim {
            let x = v[i];
            v[i] = x + h;
            let up = sgns_loss(&v, &u, &negs);
            v[i] = x - h;
            let dn = sgns_loss(&v, &u, &negs);
            v[i] = x;
            assert!(rel_err((up - dn) / (2.0 * h), g.center[i]) < 1e-4);

            let x = u[i];
            u[i] = x + h;
            let up = sgns_loss(&v, &u, &negs);
            u[i] = x - h;
            let dn = sgns_loss(&v, &u, &negs);
            u[i] = x;
            assert!(rel_err((up - dn) / (2.0 * h), g.context[i]) < 1e-4);

            for k in 0..negs.len() {
                let x = negs[k][i];
                negs[k][i] = x + h;
                let up = sgns_loss(&v, &u, &negs);
                negs[k][i] = x - h;
                let dn = sgns_loss(&v, &u, &negs);
                negs[k][i] = x;
                assert!(rel_err((up - dn) / (2.0 * h), g.negatives[k][i]) < 1e-4);
            }
        }
    }
}

fn naive_cosine(a: &[f32], b: &[f32]) -> f64 {
    let mut d = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for i in 0..a.len() {
        d += a[i] as f64 * b[i] as f64;
        na += a[i] as f64 * a[i] as f64;
        nb += b[i] as f64 * b[i] as f64;
    }
    d / na.sqrt() / nb.sqrt()
}

#[test]
fn cosine_matches_naive_arithmetic() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let a: Vec<f32> = (0..17).map(|_| rng.random_range(-3.0..3.0)).collect();
        let b: Vec<f32> = (0..17).map(|_| rng.random_range(-3.0..3.0)).collect();
        assert!((cosine(&a, &b).unwrap() - naive_cosine(&a, &b)).abs() < 1e-12);
    }
}

proptest! {
    #[test]
    fn cosine_symmetric_and_bounded(a in prop::collection::vec(-10f32..10.0, 4), b in prop::collection::vec(-10f32..10.0, 4)) {
        prop_assume!(a.iter().any(|&x| x != 0.0) && b.iter().any(|&x| x != 0.0));
        let ab = cosine(&a, &b).unwrap();
        prop_assert_eq!(ab, cosine(&b, &a).unwrap());
        prop_assert!((-1.0..=1.0).contains(&ab));
        prop_assert_eq!(cosine(&a, &a).unwrap(), 1.0);
    }
}
