//! Exact re-verification of an adversarial source.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::check::{all_required_pass, le_slack, Check};
use crate::dist::{
    log2_prob, prob_from_f64, prob_serde, prob_to_f64, smooth_min_entropy, tv_entropy_bound_check,
    Prob, ENTROPY_SLACK,
};
use crate::sources::{exact_output_dist, BlockFunctionTable, Source};
use crate::Result;

/// A source, a small output set it pushes `f` into, and the exact numbers
/// behind the resulting smooth min-entropy bound.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CondenseCertificate {
    pub theorem: String,
    pub case: String,
    pub n: u32,
    pub ell: u32,
    pub t: u32,
    pub eps: f64,
    pub source: Source,
    /// True when the source is NOSF but not fixed-index SHELA.
    pub nosf_only: bool,
    pub heavy_set: BTreeSet<u64>,
    #[serde(with = "prob_serde")]
    pub hit_prob: Prob,
    pub hit_guarantee: f64,
    /// `log2(|D| / (hit_guarantee − eps))`.
    pub bound_bits: f64,
    /// `log2(|D| / (hit_prob − eps))`, from the exact hit probability.
    pub exact_bound_bits: f64,
    /// `rate · t + delta`.
    pub formula_bound: f64,
    pub rate: f64,
    pub delta: f64,
    pub delta_terms: Vec<(String, f64)>,
    /// Exact smooth min-entropy of `f(X)`.
    pub oracle_entropy: f64,
    pub checks: Vec<Check>,
    pub trace: Vec<String>,
}

impl CondenseCertificate {
    pub fn passed(&self) -> bool {
        all_required_pass(&self.checks)
    }
}

/// Everything a builder hands over for certification.
pub struct CertifyInput<'a> {
    pub theorem: &'a str,
    pub case: String,
    pub f: &'a BlockFunctionTable,
    pub source: Source,
    pub eps: f64,
    pub heavy_set: BTreeSet<u64>,
    pub hit_guarantee: f64,
    pub rate: f64,
    pub delta: f64,
    pub delta_terms: Vec<(String, f64)>,
    pub trace: Vec<String>,
}

/// Recompute `f(X)` exactly and check the claimed bound against it.
pub fn certify(input: CertifyInput<'_>) -> Result<CondenseCertificate> {
    let f = input.f;
    let dist = exact_output_dist(f, &input.source)?;
    let hit = dist.prob_of(input.heavy_set.iter().copied());
    let size = input.heavy_set.len() as f64;
    let guarantee_q = prob_from_f64(input.hit_guarantee)?;
    let eps_q = prob_from_f64(input.eps)?;
    let formula_bound = input.rate * f.t() as f64 + input.delta;
    let bound_bits = if input.hit_guarantee > input.eps {
        size.log2() - (input.hit_guarantee - input.eps).log2()
    } else {
        f64::INFINITY
    };
    let exact_bound_bits = if hit > eps_q {
        size.log2() - log2_prob(&(&hit - &eps_q))
    } else {
        f64::INFINITY
    };
    let oracle = smooth_min_entropy(&dist, input.eps).entropy_bits;

    let mut checks = vec![Check::new(
        "hit_meets_guarantee",
        "Pr[f(X) in D] >= guaranteed hit probability",
        hit >= guarantee_q,
        format!(
            "hit {:.6}, guarantee {:.6}",
            prob_to_f64(&hit),
            input.hit_guarantee
        ),
    )];
    if hit > eps_q {
        let tv = tv_entropy_bound_check(&dist, &input.heavy_set, input.eps)?;
        checks.push(Check::new(
            "tv_lower_bound",
            "smooth min-entropy <= log2(|D| / (Pr[D] − eps))",
            tv.holds,
            format!(
                "bound {:.6}, smooth entropy {:.6}",
                tv.bound, tv.smooth_entropy
            ),
        ));
    } else {
        checks.push(Check::new(
            "tv_lower_bound",
            "Pr[f(X) in D] > eps",
            false,
            format!("hit {:.6} <= eps {}", prob_to_f64(&hit), input.eps),
        ));
    }
    checks.push(Check::new(
        "oracle_within_formula",
        "smooth min-entropy of f(X) <= rate·t + delta",
        oracle <= formula_bound + ENTROPY_SLACK,
        format!("oracle {oracle:.6}, formula {formula_bound:.6}"),
    ));
    checks.push(Check::info(
        "bound_bits_within_formula",
        "log2(|D| / (guarantee − eps)) <= rate·t + delta",
        le_slack(bound_bits, formula_bound),
        format!("bound_bits {bound_bits:.6}, formula {formula_bound:.6}"),
    ));
    let fishela = input.source.as_fishela();
    checks.push(Check::info(
        "fixed_index_structure",
        "every adversarial block reads only earlier blocks",
        fishela.is_some(),
        match input.source {
            Source::Fishela(_) => "fixed-index SHELA".to_string(),
            Source::Nosf(_) if fishela.is_some() => {
                "NOSF with prefix-only dependencies".to_string()
            }
            Source::Nosf(_) => {
                "NOSF only: an adversarial block reads a later good block".to_string()
            }
        },
    ));

    Ok(CondenseCertificate {
        theorem: input.theorem.to_string(),
        case: input.case,
        n: f.n(),
        ell: f.ell(),
        t: f.t(),
        eps: input.eps,
        nosf_only: fishela.is_none(),
        source: input.source,
        heavy_set: input.heavy_set,
        hit_prob: hit,
        hit_guarantee: input.hit_guarantee,
        bound_bits,
        exact_bound_bits,
        formula_bound,
        rate: input.rate,
        delta: input.delta,
        delta_terms: input.delta_terms,
        oracle_entropy: oracle,
        checks,
        trace: input.trace,
    })
}
