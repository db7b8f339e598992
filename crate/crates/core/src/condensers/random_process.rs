//! Output-light seeded extractors sampled by a random process.
//!
//! Every input `i ∈ [N]` gets a random set `S_i ⊆ [M]` holding each element
//! independently with probability `p`; the extractor maps `(i, s)` to the
//! element of `S_i` at position `s mod |S_i|`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::check::{all_required_pass, Check};
use crate::dist::{prob_serde, prob_to_f64, ratio, Prob};
use crate::error::{Error, Result};
use crate::rng::seeded;
use crate::seeded::{SeededExtSpec, SeededExtractor};

/// Largest `n` or `m` (in bits) the sampler accepts.
pub const MAX_SAMPLED_BITS: u32 = 24;
/// Upper limit on the expected number of stored set elements, `N·M·p`.
pub const MAX_SAMPLED_ELEMENTS: f64 = (1u64 << 28) as f64;

/// Which parameter recipe produced a [`RandomProcessParams`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// Closed-form parameters from the analysis; certifying but astronomically large.
    Paper,
    /// Caller-chosen `p`, `M`, `K` and thresholds; audits are empirical.
    Scaled,
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Profile::Paper => "paper",
            Profile::Scaled => "scaled",
        })
    }
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Profile::Paper),
            "scaled" => Ok(Profile::Scaled),
            other => Err(Error::Parse(format!("unknown profile {other:?}"))),
        }
    }
}

/// Parameters of the random process. All logarithms are base 2.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomProcessParams {
    pub profile: Profile,
    pub n: u32,
    pub k: f64,
    pub eps: f64,
    pub big_n: f64,
    pub big_k: f64,
    /// Seed-space size bound.
    pub d_seed: f64,
    pub big_m: f64,
    /// `ceil(log2 M)`, the output width used when sampling.
    pub m_bits: u32,
    /// Output-lightness threshold `R`.
    pub r_light: f64,
    pub p: f64,
    pub gamma: f64,
    pub l_big: f64,
    /// `ceil(log2((1+γ)pM))`, at least 1.
    pub seed_bits: u32,
}

fn seed_bits_for(gamma: f64, p: f64, big_m: f64) -> u32 {
    let cap = (1.0 + gamma) * p * big_m;
    if cap <= 2.0 {
        1
    } else {
        cap.log2().ceil() as u32
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("eps must lie in (0, 1), got {eps}")))
    }
}

/// Parameters given by the closed-form recipe.
///
/// Fails with [`Error::Infeasible`] when `p = 6000/(ε⁴K)` exceeds 1 and
/// names the smallest integer `k` that would make it feasible.
pub fn derive_params(n: u32, k: f64, eps: f64) -> Result<RandomProcessParams> {
    check_eps(eps)?;
    if n == 0 || n > 1000 || !(k > 0.0) {
        return Err(Error::Domain(format!(
            "need n in 1..=1000 and k > 0, got n={n} k={k}"
        )));
    }
    let big_n = 2f64.powi(n as i32);
    let big_k = k.exp2();
    let log_n = n as f64;
    let p = 6000.0 / (eps.powi(4) * big_k);
    if p > 1.0 {
        let k_min = (6000.0 / eps.powi(4)).log2().ceil();
        return Err(Error::Infeasible(format!(
            "p = 6000/(eps^4 K) = {p:.4} > 1 at k = {k}, eps = {eps}; need k >= {k_min}"
        )));
    }
    let big_m = eps * big_k * log_n;
    let inner = eps * big_k * log_n;
    if inner <= 1.0 {
        return Err(Error::Domain(format!(
            "log(eps K log N) is not positive at k = {k}"
        )));
    }
    let r_light = 1e6 * big_n / (eps.powi(4) * big_k)
        + 500.0 * (big_n * inner.log2()).sqrt() / (eps * eps * big_k.sqrt());
    let gamma = eps / 10.0;
    let l_big = eps * big_m / (4.0 * std::f64::consts::E.powi(2));
    Ok(RandomProcessParams {
        profile: Profile::Paper,
        n,
        k,
        eps,
        big_n,
        big_k,
        d_seed: 1e4 * log_n / eps.powi(3),
        big_m,
        m_bits: big_m.log2().ceil().max(1.0) as u32,
        r_light,
        p,
        gamma,
        l_big,
        seed_bits: seed_bits_for(gamma, p, big_m),
    })
}

impl RandomProcessParams {
    /// Desk-scale parameters with `M = 2^m_bits`, `K = 2^k` and the
    /// pre-registered output-lightness threshold `R = 4pN`.
    pub fn scaled(n: u32, m_bits: u32, p: f64, k: f64, eps: f64, gamma: f64) -> Result<Self> {
        check_eps(eps)?;
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::Infeasible(format!(
                "inclusion probability {p} outside (0, 1]"
            )));
        }
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::Domain(format!(
                "gamma must lie in (0, 1), got {gamma}"
            )));
        }
        if n == 0 || n > 63 || m_bits == 0 || m_bits > 63 || !(k >= 0.0) || k > n as f64 {
            return Err(Error::Domain(format!("bad widths n={n} m={m_bits} k={k}")));
        }
        let big_n = 2f64.powi(n as i32);
        let big_m = 2f64.powi(m_bits as i32);
        Ok(RandomProcessParams {
            profile: Profile::Scaled,
            n,
            k,
            eps,
            big_n,
            big_k: k.exp2(),
            d_seed: (1.0 + gamma) * p * big_m,
            big_m,
            m_bits,
            r_light: 4.0 * p * big_n,
            p,
            gamma,
            l_big: eps * big_m / (4.0 * std::f64::consts::E.powi(2)),
            seed_bits: seed_bits_for(gamma, p, big_m),
        })
    }

    /// Allowed set sizes `[(1−γ)pM, (1+γ)pM]`.
    pub fn size_band(&self) -> (f64, f64) {
        let mean = self.p * self.big_m;
        ((1.0 - self.gamma) * mean, (1.0 + self.gamma) * mean)
    }
}

/// One row of the constraint table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintRow {
    pub name: String,
    /// `"<="` or `">="`.
    pub relation: String,
    pub lhs: f64,
    pub rhs: f64,
    pub passed: bool,
}

impl ConstraintRow {
    fn new(name: &str, lhs: f64, relation: &str, rhs: f64) -> Self {
        let passed = match relation {
            "<=" => lhs <= rhs,
            _ => lhs >= rhs,
        };
        ConstraintRow {
            name: name.to_string(),
            relation: relation.to_string(),
            lhs,
            rhs,
            passed,
        }
    }
}

/// Evaluate the eight parameter constraints. A `NaN` side fails its row.
pub fn validate_constraints(params: &RandomProcessParams) -> Vec<ConstraintRow> {
    let RandomProcessParams {
        eps,
        big_n,
        big_k,
        big_m,
        r_light: r,
        p,
        gamma,
        l_big,
        ..
    } = *params;
    let e = std::f64::consts::E;
    let log_n = big_n.log2();
    let light_log = (eps * big_m / (4.0 * e * l_big)).log2();
    let union_log = (2.0 * e * big_n / (eps * big_k)).log2();
    vec![
        ConstraintRow::new("p_le_r_over_100n", p, "<=", r / (100.0 * big_n)),
        ConstraintRow::new(
            "p_ge_light_union",
            p,
            ">=",
            union_log / (eps * big_m * light_log),
        ),
        ConstraintRow::new(
            "p_ge_size_concentration",
            p,
            ">=",
            6.0 * log_n / (gamma * gamma * big_m),
        ),
        ConstraintRow::new(
            "p_ge_light_count",
            p,
            ">=",
            16.0 / (big_k * eps * eps * light_log),
        ),
        ConstraintRow::new(
            "p_le_unpopular",
            p,
            "<=",
            r * r / (24.0 * big_n * big_m.log2()),
        ),
        ConstraintRow::new(
            "p_ge_heavy_ratio",
            p,
            ">=",
            192.0 * big_m / (eps.powi(3) * big_k * l_big),
        ),
        ConstraintRow::new(
            "p_ge_heavy_union",
            p,
            ">=",
            96.0 * union_log / (eps * eps * l_big),
        ),
        ConstraintRow::new("gamma_le_eps_over_5", gamma, "<=", eps / 5.0),
    ]
}

/// The sets `S_i` of a sampled extractor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SampledRepr", into = "SampledRepr")]
pub struct SampledCondenser {
    spec: SeededExtSpec,
    rng_seed: u64,
    sets: Vec<Vec<u32>>,
    insertions: u64,
}

#[derive(Clone, Serialize, Deserialize)]
struct SampledRepr {
    n: u32,
    m: u32,
    d: u32,
    rng_seed: u64,
    sets: Vec<Vec<u32>>,
}

impl TryFrom<SampledRepr> for SampledCondenser {
    type Error = Error;

    fn try_from(r: SampledRepr) -> Result<Self> {
        SampledCondenser::from_sets(r.n, r.m, r.d, r.rng_seed, r.sets)
    }
}

impl From<SampledCondenser> for SampledRepr {
    fn from(c: SampledCondenser) -> Self {
        SampledRepr {
            n: c.spec.n,
            m: c.spec.m,
            d: c.spec.d,
            rng_seed: c.rng_seed,
            sets: c.sets,
        }
    }
}

impl SampledCondenser {
    /// Validates that there are `2^n` non-empty, strictly increasing sets of `m`-bit values.
    pub fn from_sets(n: u32, m: u32, d: u32, rng_seed: u64, sets: Vec<Vec<u32>>) -> Result<Self> {
        if n > MAX_SAMPLED_BITS || m > MAX_SAMPLED_BITS {
            return Err(Error::too_large(
                "sampled condenser",
                n.max(m),
                MAX_SAMPLED_BITS,
            ));
        }
        let spec = SeededExtSpec::new(n, d, m, 0.0, 0.0)?;
        if sets.len() as u64 != spec.input_space() {
            return Err(Error::Domain(format!(
                "expected {} sets, got {}",
                spec.input_space(),
                sets.len()
            )));
        }
        for (i, set) in sets.iter().enumerate() {
            if set.is_empty() {
                return Err(Error::Domain(format!("set {i} is empty")));
            }
            if set.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Domain(format!("set {i} is not strictly increasing")));
            }
            if let Some(&z) = set.last() {
                if u64::from(z) >> m != 0 {
                    return Err(Error::OutOfRange {
                        value: z.into(),
                        bits: m,
                    });
                }
            }
        }
        let insertions = sets.iter().map(|s| s.len() as u64).sum();
        Ok(SampledCondenser {
            spec,
            rng_seed,
            sets,
            insertions,
        })
    }

    pub fn n(&self) -> u32 {
        self.spec.n
    }

    pub fn m(&self) -> u32 {
        self.spec.m
    }

    pub fn d(&self) -> u32 {
        self.spec.d
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }

    pub fn sets(&self) -> &[Vec<u32>] {
        &self.sets
    }

    /// Elements added while sampling, including those of discarded empty redraws (none).
    pub fn insertions(&self) -> u64 {
        self.insertions
    }

    /// `|{i : z ∈ S_i}|` for every `z`.
    pub fn multiplicities(&self) -> Vec<u64> {
        let mut counts = vec![0u64; 1 << self.spec.m];
        for set in &self.sets {
            for &z in set {
                counts[z as usize] += 1;
            }
        }
        counts
    }
}

impl SeededExtractor for SampledCondenser {
    fn spec(&self) -> &SeededExtSpec {
        &self.spec
    }

    #[inline]
    fn eval_raw(&self, x: u64, s: u64) -> u64 {
        let set = &self.sets[x as usize];
        u64::from(set[(s % set.len() as u64) as usize])
    }

    fn kind(&self) -> &'static str {
        "sampled"
    }
}

fn draw_set<R: Rng>(rng: &mut R, big_m: u64, p: f64) -> Vec<u32> {
    (0..big_m)
        .filter(|_| rng.gen::<f64>() < p)
        .map(|z| z as u32)
        .collect()
}

/// Run the random process with `M = 2^m_bits` and seed length `seed_bits`.
///
/// An empty set is redrawn once from the same stream; a second empty draw
/// fails with [`Error::Construction`].
pub fn sample_output_light(
    params: &RandomProcessParams,
    rng_seed: u64,
) -> Result<SampledCondenser> {
    let (n, m) = (params.n, params.m_bits);
    if n > MAX_SAMPLED_BITS || m > MAX_SAMPLED_BITS {
        return Err(Error::too_large(
            "sampled condenser",
            n.max(m),
            MAX_SAMPLED_BITS,
        ));
    }
    if !(params.p > 0.0 && params.p <= 1.0) {
        return Err(Error::Infeasible(format!(
            "inclusion probability {} outside (0, 1]",
            params.p
        )));
    }
    let big_m = 1u64 << m;
    if params.big_n * big_m as f64 * params.p > MAX_SAMPLED_ELEMENTS {
        return Err(Error::too_large("sampled sets", 28 + 1, 28));
    }
    let mut rng = seeded(rng_seed);
    let mut sets = Vec::with_capacity(1 << n);
    for i in 0..1u64 << n {
        let mut set = draw_set(&mut rng, big_m, params.p);
        if set.is_empty() {
            set = draw_set(&mut rng, big_m, params.p);
        }
        if set.is_empty() {
            return Err(Error::Construction(format!("set {i} came out empty twice")));
        }
        sets.push(set);
    }
    SampledCondenser::from_sets(n, m, params.seed_bits, rng_seed, sets)
}

/// Outcome of [`audit_sampled`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledAudit {
    pub profile: Profile,
    pub n: u32,
    pub m: u32,
    pub d: u32,
    pub k: f64,
    pub eps: f64,
    pub gamma: f64,
    pub p: f64,
    pub size_band: (f64, f64),
    pub size_min: usize,
    pub size_max: usize,
    pub total_size: u64,
    pub light_threshold: f64,
    pub max_multiplicity: u64,
    pub multiplicity_witness: u64,
    pub tv_trials: usize,
    pub tv_max: f64,
    #[serde(with = "prob_serde")]
    pub tv_max_exact: Prob,
    pub tv_mean: f64,
    pub tv_failures: usize,
    pub adversary_set_size: usize,
    pub adversary_success: f64,
    #[serde(with = "prob_serde")]
    pub adversary_success_exact: Prob,
    /// Only paper-profile parameters that meet every constraint certify anything.
    pub certifying: bool,
    pub checks: Vec<Check>,
}

impl SampledAudit {
    pub fn passed(&self) -> bool {
        all_required_pass(&self.checks)
    }
}

/// Exact TV distance between "uniform `i ∈ subset`, then uniform element of
/// `S_i`" and the uniform distribution on `[2^m]`.
pub fn subset_tv(cond: &SampledCondenser, subset: &[u64]) -> Prob {
    if subset.is_empty() {
        return Prob::zero();
    }
    let lcm = subset.iter().fold(BigInt::one(), |acc, &i| {
        acc.lcm(&BigInt::from(cond.sets[i as usize].len()))
    });
    let mut counts = vec![BigInt::zero(); 1 << cond.m()];
    for &i in subset {
        let set = &cond.sets[i as usize];
        let w = &lcm / BigInt::from(set.len());
        for &z in set {
            counts[z as usize] += &w;
        }
    }
    let big_m = BigInt::from(counts.len());
    let total = BigInt::from(subset.len()) * &lcm;
    let diff: BigInt = counts.iter().map(|c| (c * &big_m - &total).abs()).sum();
    Prob::new(diff, BigInt::from(2) * total * big_m)
}

/// The `size` highest-multiplicity outputs, ties broken towards smaller values.
pub fn heaviest_outputs(multiplicities: &[u64], size: usize) -> Vec<u64> {
    let mut order: Vec<u64> = (0..multiplicities.len() as u64).collect();
    order.sort_by_key(|&z| (std::cmp::Reverse(multiplicities[z as usize]), z));
    order.truncate(size);
    order
}

/// Audit a sampled extractor: set sizes, output-lightness, TV on random
/// `K`-subsets and the greedy heavy-set adversary.
pub fn audit_sampled(
    cond: &SampledCondenser,
    params: &RandomProcessParams,
    trials: usize,
    rng_seed: u64,
) -> Result<SampledAudit> {
    if cond.n() != params.n || cond.m() != params.m_bits {
        return Err(Error::Domain(
            "condenser and parameters disagree on widths".into(),
        ));
    }
    let big_n = 1u64 << cond.n();
    let subset_size = params.big_k.round() as u64;
    if subset_size == 0 || subset_size > big_n {
        return Err(Error::Domain(format!(
            "subset size {subset_size} outside 1..={big_n}"
        )));
    }
    let mut checks = Vec::new();

    let (lo, hi) = params.size_band();
    let sizes: Vec<usize> = cond.sets.iter().map(Vec::len).collect();
    let size_min = sizes.iter().copied().min().unwrap_or(0);
    let size_max = sizes.iter().copied().max().unwrap_or(0);
    let out_of_band = sizes
        .iter()
        .filter(|&&s| (s as f64) < lo || (s as f64) > hi)
        .count();
    checks.push(Check::new(
        "set_sizes",
        "every |S_i| lies within (1±γ)pM",
        out_of_band == 0,
        format!(
            "sizes in [{size_min}, {size_max}], band [{lo:.3}, {hi:.3}], {out_of_band} outside"
        ),
    ));
    let total_size: u64 = sizes.iter().map(|&s| s as u64).sum();
    checks.push(Check::new(
        "insertions_match",
        "Σ|S_i| equals the insertions recorded while sampling",
        total_size == cond.insertions,
        format!("{total_size} vs {}", cond.insertions),
    ));

    let mult = cond.multiplicities();
    let (multiplicity_witness, max_multiplicity) = mult.iter().enumerate().fold(
        (0u64, 0u64),
        |(bz, bc), (z, &c)| if c > bc { (z as u64, c) } else { (bz, bc) },
    );
    checks.push(Check::new(
        "output_light",
        "max_z |{i : z ∈ S_i}| < R",
        (max_multiplicity as f64) < params.r_light,
        format!(
            "max multiplicity {max_multiplicity} at z={multiplicity_witness}, R = {}",
            params.r_light
        ),
    ));

    let mut rng = seeded(rng_seed);
    let subsets: Vec<Vec<u64>> = (0..trials)
        .map(|_| {
            sample_indices(&mut rng, big_n as usize, subset_size as usize)
                .into_iter()
                .map(|i| i as u64)
                .collect()
        })
        .collect();
    let tvs: Vec<Prob> = subsets.par_iter().map(|s| subset_tv(cond, s)).collect();
    let eps_q = Prob::from_float(params.eps).unwrap_or_else(Prob::zero);
    let tv_failures = tvs.iter().filter(|tv| **tv > eps_q).count();
    let tv_max_exact = tvs.iter().max().cloned().unwrap_or_else(Prob::zero);
    let tv_max = prob_to_f64(&tv_max_exact);
    let tv_mean = if tvs.is_empty() {
        0.0
    } else {
        tvs.iter().map(prob_to_f64).sum::<f64>() / tvs.len() as f64
    };
    checks.push(Check::new(
        "k_subset_tv",
        "each random K-subset gives output within eps of uniform",
        tv_failures == 0,
        format!("{trials} subsets of size {subset_size}: max TV {tv_max:.6}, mean {tv_mean:.6}, {tv_failures} above {}", params.eps),
    ));

    let adversary_set_size = (subset_size as usize).min(mult.len());
    let heavy = heaviest_outputs(&mult, adversary_set_size);
    let mut in_d = vec![false; mult.len()];
    for &z in &heavy {
        in_d[z as usize] = true;
    }
    let hit = cond
        .sets
        .iter()
        .filter(|set| set.iter().any(|&z| in_d[z as usize]))
        .count() as u64;
    let adversary_success_exact = ratio(hit, big_n);
    let adversary_success = prob_to_f64(&adversary_success_exact);
    checks.push(Check::new(
        "heavy_set_adversary",
        "the K heaviest outputs meet fewer than an eps fraction of the sets",
        adversary_success < params.eps,
        format!("{hit}/{big_n} sets meet the {adversary_set_size} heaviest outputs"),
    ));

    let certifying =
        params.profile == Profile::Paper && validate_constraints(params).iter().all(|r| r.passed);
    Ok(SampledAudit {
        profile: params.profile,
        n: cond.n(),
        m: cond.m(),
        d: cond.d(),
        k: params.k,
        eps: params.eps,
        gamma: params.gamma,
        p: params.p,
        size_band: (lo, hi),
        size_min,
        size_max,
        total_size,
        light_threshold: params.r_light,
        max_multiplicity,
        multiplicity_witness,
        tv_trials: trials,
        tv_max,
        tv_max_exact,
        tv_mean,
        tv_failures,
        adversary_set_size,
        adversary_success,
        adversary_success_exact,
        certifying,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_p_is_one() {
        let k = (6e7f64).log2();
        let params = derive_params(40, k, 0.1).unwrap();
        assert!((params.p - 1.0).abs() < 1e-9);
        assert!((params.gamma - 0.01).abs() < 1e-15);
    }

    #[test]
    fn infeasible_reports_minimal_k() {
        let err = derive_params(40, 20.0, 0.1).unwrap_err();
        assert!(matches!(&err, Error::Infeasible(msg) if msg.contains("k >= 26")));
    }

    #[test]
    fn scaled_seed_bits() {
        let params = RandomProcessParams::scaled(12, 8, 0.05, 6.0, 0.1, 0.01).unwrap();
        assert_eq!(params.seed_bits, 4);
    }

    #[test]
    fn constraint_table_at_reference_point() {
        let params = derive_params(40, 27.0, 0.1).unwrap();
        let rows = validate_constraints(&params);
        assert_eq!(rows.len(), 8);
        assert!(rows.iter().all(|r| r.passed), "{rows:?}");
    }

    #[test]
    fn p_one_gives_full_sets() {
        let params = RandomProcessParams::scaled(4, 3, 1.0, 2.0, 0.2, 0.1).unwrap();
        let cond = sample_output_light(&params, 1).unwrap();
        assert!(cond.sets().iter().all(|s| s.len() == 8));
        for s in 0..1u64 << cond.d() {
            assert_eq!(cond.eval(3, s).unwrap(), s % 8);
        }
        let audit = audit_sampled(&cond, &params, 10, 2).unwrap();
        assert_eq!(audit.tv_max, 0.0);
        assert_eq!(audit.size_min, audit.size_max);
    }

    #[test]
    fn sampling_is_reproducible_and_serializes() {
        let params = RandomProcessParams::scaled(6, 5, 0.25, 3.0, 0.2, 0.5).unwrap();
        let a = sample_output_light(&params, 9).unwrap();
        let b = sample_output_light(&params, 9).unwrap();
        assert_eq!(a, b);
        let json = serde_json::to_string(&a).unwrap();
        assert!(json.contains("\"sets\""));
        let back: SampledCondenser = serde_json::from_str(&json).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn subset_tv_of_disjoint_halves() {
        let sets = vec![vec![0], vec![1]];
        let cond = SampledCondenser::from_sets(1, 1, 1, 0, sets).unwrap();
        assert_eq!(subset_tv(&cond, &[0, 1]), Prob::zero());
        assert_eq!(subset_tv(&cond, &[0]), ratio(1, 2));
    }
}
