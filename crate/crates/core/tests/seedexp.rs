use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use trailaug::annindex::{LshConfig, LshIndex};
use trailaug::convmodel::{LrHyper, Provenance, SeedList, Split, SplitFractions};
use trailaug::embed::{cosine, train, EmbeddingTable, TrainParams};
use trailaug::seedexp::{
    conversion_rate, conversion_rates, expand, expand_with, initial_seedlist, neighbors, ExpansionParams, StopReason,
};
use trailaug::synthgen::{generate, SynthConfig};
use trailaug::ActivityId;

fn aid(s: &str) -> ActivityId {
    ActivityId::new(s).unwrap()
}

fn clustered(centers: usize, members: usize, dim: usize, noise: f32, seed: u64) -> EmbeddingTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    for c in 0..centers {
        let center: Vec<f32> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        for m in 0..members {
            let v = center.iter().map(|x| x + noise * rng.sample::<f32, _>(StandardNormal)).collect();
            rows.push((aid(&format!("c{c:03}m{m:02}")), v));
        }
    }
    EmbeddingTable::from_rows(dim, rows).unwrap()
}

fn brute_neighbors(seed: &SeedList, table: &EmbeddingTable, delta_sim: f64, delta_nbr: usize) -> BTreeSet<ActivityId> {
    let mut out = BTreeSet::new();
    for (id, v) in table.rows() {
        if seed.contains(id.as_str()) {
            continue;
        }
        let mut hits = 0;
        for s in seed.activities() {
            if cosine(v, table.vector(s.as_str()).unwrap()).unwrap() > delta_sim {
                hits += 1;
            }
        }
        if hits >= delta_nbr {
            out.insert(id.clone());
        }
    }
    out
}

#[test]
fn neighbors_match_double_loop() {
    let table = clustered(50, 10, 16, 0.6, 1);
    assert_eq!(table.len(), 500);
    let vocab: BTreeSet<ActivityId> = table.ids().iter().cloned().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for (delta_sim, delta_nbr) in [(0.5, 2), (0.7, 1), (0.3, 3), (0.9, 1)] {
        let index = LshIndex::build(&table, LshConfig::for_cosine_threshold(delta_sim, 1e-4, 7).unwrap()).unwrap();
        for _ in 0..4 {
            let seed = SeedList::from_ids(
                (0..25).map(|_| table.ids()[rng.random_range(0..table.len())].clone()),
                Provenance::Initial,
            );
            let fast = neighbors(&seed, &vocab, &table, &index, delta_sim, delta_nbr);
            assert_eq!(fast, brute_neighbors(&seed, &table, delta_sim, delta_nbr), "δ={delta_sim} n={delta_nbr}");
            assert!(fast.iter().all(|a| !seed.contains(a.as_str())));
            assert_eq!(fast, neighbors(&seed, &vocab, &table, &index, delta_sim, delta_nbr));
        }
    }
}

#[test]
fn planted_duplicate_is_found() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let dim = 24;
    let mut rows: Vec<(ActivityId, Vec<f32>)> =
        (0..300).map(|i| (aid(&format!("r{i:03}")), (0..dim).map(|_| rng.sample(StandardNormal)).collect())).collect();
    let twin: Vec<f32> = rows[17].1.iter().map(|x| x + 0.01 * rng.sample::<f32, _>(StandardNormal)).collect();
    rows.push((aid("twin"), twin));
    let table = EmbeddingTable::from_rows(dim, rows).unwrap();
    let vocab: BTreeSet<ActivityId> = table.ids().iter().cloned().collect();
    let seed = SeedList::from_ids([aid("r017")], Provenance::Initial);
    let index = LshIndex::build(&table, LshConfig::for_cosine_threshold(0.9, 1e-4, 0).unwrap()).unwrap();
    let found = neighbors(&seed, &vocab, &table, &index, 0.9, 1);
    assert_eq!(found, BTreeSet::from([aid("twin")]));

    let strict = LshIndex::build(&table, LshConfig::for_cosine_threshold(0.9999, 1e-4, 0).unwrap()).unwrap();
    let other = SeedList::from_ids([aid("r100")], Provenance::Initial);
    assert!(neighbors(&other, &vocab, &table, &strict, 0.9999, 1).is_empty());
    // candidates outside the vocabulary are ignored
    let no_twin: BTreeSet<ActivityId> = vocab.iter().filter(|a| a.as_str() != "twin").cloned().collect();
    assert!(neighbors(&seed, &no_twin, &table, &index, 0.9, 1).is_empty());
}

/// Two passes: first each user's conversion time, then per-activity counts.
fn naive_rates(corpus: &trailaug::TrailCorpus, window: u64) -> BTreeMap<String, (u32, u32)> {
    let conv_times: Vec<Option<u64>> = corpus.records().iter().map(|r| r.label.conversion_time).collect();
    let mut out: BTreeMap<String, (u32, u32)> = BTreeMap::new();
    for (i, r) in corpus.records().iter().enumerate() {
        let mut per_user: BTreeMap<String, bool> = BTreeMap::new();
        for e in &r.trail.events {
            if e.kind.as_str() == "conversion" {
                continue;
            }
            let hit = match conv_times[i] {
                Some(tc) => e.timestamp <= tc && tc - e.timestamp <= window,
                None => false,
            };
            let slot = per_user.entry(e.activity.to_string()).or_insert(false);
            *slot = *slot || hit;
        }
        for (a, hit) in per_user {
            let c = out.entry(a).or_insert((0, 0));
            c.0 += u32::from(hit);
            c.1 += 1;
        }
    }
    out
}

#[test]
fn conversion_rates_match_naive_count() {
    for seed in 0..4 {
        let cfg = SynthConfig { k: 120, n_noise: 150, trail_len: 8.0, p_o: 0.3, rng_seed: seed, ..SynthConfig::default() };
        let (corpus, _) = generate(&cfg).unwrap();
        let window = [86_400 * 3, 86_400 * 60][seed as usize % 2];
        let fast = conversion_rates(&corpus, window);
        let naive = naive_rates(&corpus, window);
        assert_eq!(fast.len(), naive.keys().filter(|a| !corpus.conversion_activities().contains(a.as_str())).count());
        for (a, r) in &fast {
            let (conv, sup) = naive[a.as_str()];
            assert_eq!((r.converted, r.support), (conv, sup), "{a}");
            assert_eq!(r.rate, f64::from(conv) / f64::from(sup));
            assert_eq!(conversion_rate(a.as_str(), &corpus, window), *r);
        }
    }
}

#[test]
fn type1_initial_list_is_precise() {
    for seed in 0..3 {
        let cfg = SynthConfig { k: 1500, type2_fraction: 0.0, p_o: 0.2, rng_seed: seed, ..SynthConfig::default() };
        let (corpus, truth) = generate(&cfg).unwrap();
        let params = ExpansionParams { k_initial: 10, ..ExpansionParams::default() };
        let list = initial_seedlist(&corpus, &params, &SeedList::new(), &SeedList::new()).unwrap();
        let hits = list.activities().iter().filter(|a| truth.relevant_activities.contains(*a)).count();
        let precision = hits as f64 / list.len() as f64;
        assert!(precision >= 0.8, "seed {seed}: precision {precision}");
        assert!(list.activities().iter().all(|a| a.as_str() != "conv"));
    }
}

#[test]
fn epsilon_one_keeps_the_initial_list() {
    let initial = SeedList::from_ids([aid("a")], Provenance::Initial);
    let params = ExpansionParams { epsilon: 1.0, ..ExpansionParams::default() };
    let mut calls = 0;
    let (out, trace) = expand_with::<f64, (), _, _>(
        &initial,
        &params,
        |_| {
            calls += 1;
            Ok(0.5 + f64::from(calls) / 10.0)
        },
        |s| BTreeSet::from([aid(&format!("x{}", s.len()))]),
    )
    .unwrap();
    assert_eq!(out, initial);
    assert_eq!(trace.stop, StopReason::NoImprovement);
    assert_eq!(trace.records.len(), 2);
}

#[test]
fn expansion_trace_invariants_on_synthetic_corpus() {
    let cfg = SynthConfig { k: 1500, p_o: 0.3, type2_fraction: 0.5, rng_seed: 4, ..SynthConfig::default() };
    let (corpus, truth) = generate(&cfg).unwrap();
    let table = train(&corpus, &TrainParams { dim: 32, rng_seed: 4, ..TrainParams::default() }).unwrap();
    let initial = SeedList::from_ids(truth.relevant_activities.iter().take(4).cloned(), Provenance::Initial);
    let split = Split::by_cluster(&corpus, SplitFractions::default(), 4).unwrap();
    let params = ExpansionParams::default();
    let (out, trace) = expand(&corpus, &initial, &params, &table, &split, LrHyper::default(), 4).unwrap();

    assert!(trace.records[0].accepted);
    assert!(trace.accepted().count() >= 2, "{trace:?}");
    let sizes: Vec<usize> = trace.accepted().map(|r| r.n_activities).collect();
    assert!(sizes.windows(2).all(|w| w[1] > w[0]));
    let users: Vec<f64> = trace.accepted().filter_map(|r| r.relevant_users_per_converted_cluster).collect();
    assert!(users.windows(2).all(|w| w[1] >= w[0]));
    let rejected = trace.records.iter().filter(|r| !r.accepted).count();
    assert!(rejected == 1 || trace.stop == StopReason::MaxIterations);
    assert_eq!(out.len(), *sizes.last().unwrap());
    assert!(trace.final_auc() > trace.records[0].auc.unwrap());
    assert!(initial.is_subset(&out));
    let planted = out.activities().iter().filter(|a| truth.relevant_activities.contains(*a)).count();
    assert!(planted > initial.len());
}
