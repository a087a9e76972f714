use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trailaug::infotheory::{
    binary_entropy, cond_entropy_after, cond_entropy_before, empirical_cond_entropy, empirical_strata, sweep, OrgParams,
};
use trailaug::synthgen::{generate, toy_corpus, SynthConfig};

#[test]
fn binary_entropy_is_symmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        let p: f64 = rng.random();
        assert!((binary_entropy(p).unwrap() - binary_entropy(1.0 - p).unwrap()).abs() < 1e-12);
    }
    assert!(binary_entropy(-0.1).is_err());
    assert!(binary_entropy(1.1).is_err());
}

#[test]
fn binary_entropy_is_concave_with_peak_at_half() {
    let grid: Vec<f64> = (0..=200).map(|i| f64::from(i) / 200.0).collect();
    let h: Vec<f64> = grid.iter().map(|&p| binary_entropy(p).unwrap()).collect();
    for w in h.windows(3) {
        assert!(w[0] + w[2] <= 2.0 * w[1] + 1e-12);
    }
    let (argmax, max) = h.iter().enumerate().fold((0, f64::MIN), |a, (i, &v)| if v > a.1 { (i, v) } else { a });
    assert_eq!(grid[argmax], 0.5);
    assert!((max - 1.0).abs() < 1e-15);
    assert!((binary_entropy(0.2).unwrap() - 0.721_928_094_887_362_3).abs() < 1e-12);
}

#[test]
fn closed_form_points() {
    let p = OrgParams::new(0.5, 3, 1).unwrap();
    let h_fifth = -(0.2f64 * 0.2f64.log2() + 0.8 * 0.8f64.log2());
    assert!((cond_entropy_before(&p) - h_fifth * 5.0 / 6.0).abs() < 1e-12);
    assert!((cond_entropy_before(&p) - 0.60161).abs() < 1e-5);
    let h_third = -(1.0 / 3.0 * (1.0f64 / 3.0).log2() + 2.0 / 3.0 * (2.0f64 / 3.0).log2());
    assert!((cond_entropy_after(0.5, 3).unwrap() - h_third / 2.0).abs() < 1e-12);
    assert!((cond_entropy_after(0.1, 10).unwrap() - 0.046_900).abs() < 1e-5);
}

#[test]
fn after_below_before_on_grid() {
    for p_o in [0.05, 0.1, 0.2, 0.4] {
        for r in [1, 2] {
            let rows = sweep(p_o, r, 3..=50).unwrap();
            assert_eq!(rows.len(), 48);
            for row in &rows {
                assert!(row.after_bits < row.before_bits, "p_o={p_o} r={r} s={}", row.s);
            }
            let (first, last) = (rows[0], rows[47]);
            assert!(last.before_bits < first.before_bits && last.after_bits < first.after_bits);
            assert!(first.before_bits - first.after_bits > last.before_bits - last.after_bits);
        }
    }
}

#[test]
fn toy_corpus_entropies() {
    let (corpus, truth) = toy_corpus();
    let seed = truth.oracle_seed();
    assert!((empirical_cond_entropy(&corpus, &seed, false) - 0.60161).abs() < 1e-3);
    assert!((empirical_cond_entropy(&corpus, &seed, true) - 0.4591).abs() < 1e-3);
}

#[test]
fn exactly_proportioned_corpus_matches_closed_forms() {
    for (k, converting, n, r) in [(20u32, 5u32, 1u32, 1u32), (40, 4, 3, 2), (30, 15, 2, 1), (50, 10, 8, 1)] {
        let cfg = SynthConfig {
            k,
            n,
            r,
            type2_fraction: 1.0,
            converting_orgs: Some((0..converting).collect()),
            n_noise: 100,
            trail_len: 4.0,
            rng_seed: u64::from(k),
            ..SynthConfig::default()
        };
        let (corpus, truth) = generate(&cfg).unwrap();
        let seed = truth.oracle_seed();
        let p_o = f64::from(converting) / f64::from(k);
        let params = OrgParams::new(p_o, cfg.org_size(), r).unwrap();
        let before = empirical_strata(&corpus, &seed, false);
        assert_eq!(before.r1, u64::from(converting * r));
        assert!((before.cond_entropy() - cond_entropy_before(&params)).abs() < 1e-9);
        let after = empirical_cond_entropy(&corpus, &seed, true);
        assert!((after - cond_entropy_after(p_o, cfg.org_size()).unwrap()).abs() < 1e-9);
    }
}

#[test]
fn parameter_errors() {
    assert!(OrgParams::new(1.5, 3, 1).is_err());
    assert!(OrgParams::new(0.5, 1, 1).is_err());
    assert!(OrgParams::new(0.5, 3, 3).is_err());
    assert!(sweep(0.1, 1, [2, 1]).is_err());
}
