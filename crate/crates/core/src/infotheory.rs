//! Conditional entropy H(C|R) of the conversion indicator C given the
//! relevant-activity indicator R, before and after trail augmentation.
//!
//! The closed forms describe a homogeneous population of type-2
//! organizations of size `s`, each with `r` researchers and one owner. An
//! organization converts with probability `p_o`; when it does, every
//! researcher performs a relevant activity and the owner converts. Before
//! augmentation only researchers carry R = 1; after augmentation every member
//! of a converting organization does. All entropies are in bits.

use serde::Serialize;
use thiserror::Error;

use crate::convmodel::{Relevance, SeedList};
use crate::datamodel::TrailCorpus;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EntropyError {
    #[error("probability {0} outside [0, 1]")]
    Probability(f64),
    #[error("invalid organization parameters: {0}")]
    Params(String),
}

/// H(Bernoulli(p)) with 0·log 0 = 0.
pub fn binary_entropy(p: f64) -> Result<f64, EntropyError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(EntropyError::Probability(p));
    }
    Ok(plogp(p) + plogp(1.0 - p))
}

fn plogp(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        -p * p.log2()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OrgParams {
    p_o: f64,
    s: u32,
    r: u32,
}

impl OrgParams {
    pub fn new(p_o: f64, s: u32, r: u32) -> Result<Self, EntropyError> {
        if !(0.0..=1.0).contains(&p_o) {
            return Err(EntropyError::Params(format!("p_o = {p_o} must lie in [0, 1]")));
        }
        if s < 2 {
            return Err(EntropyError::Params(format!("s = {s} must be at least 2")));
        }
        if r < 1 || r > s - 1 {
            return Err(EntropyError::Params(format!("r = {r} must lie in [1, s - 1 = {}]", s - 1)));
        }
        if f64::from(r) * p_o >= f64::from(s) {
            return Err(EntropyError::Params(format!("r·p_o = {} must be below s = {s}", f64::from(r) * p_o)));
        }
        Ok(Self { p_o, s, r })
    }

    pub fn p_o(&self) -> f64 {
        self.p_o
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    /// User conversion probability p_u = p_o / s.
    pub fn p_u(&self) -> f64 {
        self.p_o / f64::from(self.s)
    }
}

/// `H(B(p_o / (s − r·p_o))) · (1 − r·p_o / s)`
pub fn cond_entropy_before(params: &OrgParams) -> f64 {
    let (p_o, s, r) = (params.p_o, f64::from(params.s), f64::from(params.r));
    let p_c_given_r0 = p_o / (s - r * p_o);
    binary_entropy(p_c_given_r0).expect("OrgParams keeps the Bernoulli mean in [0, 1]") * (1.0 - r * p_o / s)
}

/// `H(B(1 / s)) · p_o`
pub fn cond_entropy_after(p_o: f64, s: u32) -> Result<f64, EntropyError> {
    if !(0.0..=1.0).contains(&p_o) {
        return Err(EntropyError::Params(format!("p_o = {p_o} must lie in [0, 1]")));
    }
    if s < 2 {
        return Err(EntropyError::Params(format!("s = {s} must be at least 2")));
    }
    Ok(binary_entropy(1.0 / f64::from(s))? * p_o)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EntropyReport {
    pub before_bits: f64,
    pub after_bits: f64,
    /// Unconditional H(C) = H(B(p_u)).
    pub h_c_bits: f64,
}

pub fn report(params: &OrgParams) -> EntropyReport {
    EntropyReport {
        before_bits: cond_entropy_before(params),
        after_bits: cond_entropy_after(params.p_o, params.s).expect("validated"),
        h_c_bits: binary_entropy(params.p_u()).expect("p_u within [0, 1]"),
    }
}

/// Joint counts of (R, C) over users.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Strata {
    pub r0: u64,
    pub r0_converted: u64,
    pub r1: u64,
    pub r1_converted: u64,
}

impl Strata {
    pub fn total(&self) -> u64 {
        self.r0 + self.r1
    }

    /// Plug-in Σ_v P̂(R=v)·H(B(P̂(C=1|R=v))); empty strata contribute zero.
    pub fn cond_entropy(&self) -> f64 {
        let n = self.total();
        if n == 0 {
            return 0.0;
        }
        let part = |count: u64, conv: u64| {
            if count == 0 {
                0.0
            } else {
                let h = binary_entropy(conv as f64 / count as f64).expect("frequency in [0, 1]");
                count as f64 / n as f64 * h
            }
        };
        part(self.r0, self.r0_converted) + part(self.r1, self.r1_converted)
    }
}

/// Counts (R, C) per user. R is the presence of a seed activity in the user's
/// own trail, or in the augmented trail when `augmented` is set. Whole trails
/// are used; there is no prediction cutoff here.
pub fn empirical_strata(corpus: &TrailCorpus, seed: &SeedList, augmented: bool) -> Strata {
    let relevance = Relevance::new(corpus, seed);
    let mut strata = Strata::default();
    for (u, rec) in corpus.records().iter().enumerate() {
        let r = if augmented { relevance.augmented_flag(corpus, u) } else { relevance.is_relevant(u) };
        let c = u64::from(rec.label.converted);
        if r {
            strata.r1 += 1;
            strata.r1_converted += c;
        } else {
            strata.r0 += 1;
            strata.r0_converted += c;
        }
    }
    strata
}

pub fn empirical_cond_entropy(corpus: &TrailCorpus, seed: &SeedList, augmented: bool) -> f64 {
    empirical_strata(corpus, seed, augmented).cond_entropy()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub s: u32,
    pub before_bits: f64,
    pub after_bits: f64,
}

/// Closed-form before/after values for each organization size.
pub fn sweep(p_o: f64, r: u32, s_values: impl IntoIterator<Item = u32>) -> Result<Vec<SweepRow>, EntropyError> {
    s_values
        .into_iter()
        .map(|s| {
            let params = OrgParams::new(p_o, s, r)?;
            Ok(SweepRow { s, before_bits: cond_entropy_before(&params), after_bits: cond_entropy_after(p_o, s)? })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() < tol
    }

    #[test]
    fn binary_entropy_values() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        // -0.2·log2(0.2) - 0.8·log2(0.8)
        let direct = 0.2 * 5f64.log2() + 0.8 * (1.25f64).log2();
        assert!(close(binary_entropy(0.2).unwrap(), direct, 1e-15));
        assert!(close(direct, 0.721_928_094_887_362_3, 1e-15));
        assert!(binary_entropy(1.5).is_err());
        assert!(binary_entropy(-0.1).is_err());
        assert!(binary_entropy(f64::NAN).is_err());
    }

    #[test]
    fn toy_configuration_closed_forms() {
        let p = OrgParams::new(0.5, 3, 1).unwrap();
        assert!(close(p.p_u(), 1.0 / 6.0, 1e-15));
        // H(B(1/5)) · 5/6
        assert!(close(cond_entropy_before(&p), 0.721_928_094_887_362_3 * 5.0 / 6.0, 1e-12));
        assert!(close(cond_entropy_before(&p), 0.60161, 1e-5));
        // H(B(1/3)) · 1/2
        assert!(close(cond_entropy_after(0.5, 3).unwrap(), 0.459_147_917_027_245_5, 1e-12));
    }

    #[test]
    fn after_curve_point() {
        let h01 = 0.1 * 10f64.log2() + 0.9 * (10.0f64 / 9.0).log2();
        assert!(close(cond_entropy_after(0.1, 10).unwrap(), 0.1 * h01, 1e-15));
        assert!(close(cond_entropy_after(0.1, 10).unwrap(), 0.04690, 1e-5));
    }

    #[test]
    fn no_conversions_no_uncertainty() {
        assert_eq!(cond_entropy_before(&OrgParams::new(0.0, 5, 2).unwrap()), 0.0);
        assert_eq!(cond_entropy_after(0.0, 5).unwrap(), 0.0);
    }

    #[test]
    fn params_validation() {
        assert!(OrgParams::new(1.2, 3, 1).is_err());
        assert!(OrgParams::new(0.5, 1, 1).is_err());
        assert!(OrgParams::new(0.5, 3, 0).is_err());
        assert!(OrgParams::new(0.5, 3, 3).is_err());
        assert!(OrgParams::new(1.0, 3, 2).is_ok());
        assert!(cond_entropy_after(0.5, 1).is_err());
    }

    #[test]
    fn sweep_row_matches_closed_forms() {
        let rows = sweep(0.1, 1, [3]).unwrap();
        let p = OrgParams::new(0.1, 3, 1).unwrap();
        assert_eq!(rows[0].before_bits, cond_entropy_before(&p));
        assert_eq!(rows[0].after_bits, cond_entropy_after(0.1, 3).unwrap());
        assert!(sweep(0.1, 3, [3]).is_err());
    }

    #[test]
    fn strata_entropy() {
        assert_eq!(Strata::default().cond_entropy(), 0.0);
        let s = Strata { r0: 5, r0_converted: 1, r1: 1, r1_converted: 0 };
        assert!(close(s.cond_entropy(), 0.721_928_094_887_362_3 * 5.0 / 6.0, 1e-12));
    }

    #[test]
    fn report_orders_before_after() {
        let rep = report(&OrgParams::new(0.1, 4, 1).unwrap());
        assert!(rep.after_bits < rep.before_bits);
        assert!(rep.h_c_bits > 0.0);
    }
}
