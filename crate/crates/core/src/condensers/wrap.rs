//! From an output-light seeded extractor on `2n` bits to a condenser on
//! three `n`-bit blocks: `g(x1, x2, x3) = Ext(x1 ∘ x2, first d bits of x3)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::mask;
use crate::check::{all_required_pass, Check};
use crate::dist::{prob_serde, prob_to_f64, smooth_min_entropy, tv_from_uniform_exact, Dist, Prob};
use crate::error::{Error, Result};
use crate::rng::stream;
use crate::seeded::{audit_output_light, preimage_counts, OutputLightReport, SeededExtractor};
use crate::sources::BlockFunctionTable;

use super::explicit::{explicit_output_light, ExplicitCfg, ExplicitExt, ReachProfile};
use super::random_process::{heaviest_outputs, SampledCondenser};

/// Largest `n + d` for the exact position-1/2 audit.
pub const MAX_POSITION12_BITS: u32 = 26;

/// A condenser `g` on three `n`-bit blocks built from `ext`.
#[derive(Clone, Debug)]
pub struct WrappedCondenser<E> {
    ext: E,
    n: u32,
    eps: f64,
}

/// Wrap `ext` (input `2n` bits, seed `d <= n` bits) into a three-block condenser.
pub fn wrap_condenser<E: SeededExtractor>(ext: E, eps: f64) -> Result<WrappedCondenser<E>> {
    let spec = *ext.spec();
    if spec.n % 2 != 0 {
        return Err(Error::Domain(format!(
            "extractor input {} bits is not two blocks",
            spec.n
        )));
    }
    let n = spec.n / 2;
    if spec.d > n {
        return Err(Error::Precondition(format!(
            "seed length {} exceeds block width {n}",
            spec.d
        )));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("eps must lie in (0, 1), got {eps}")));
    }
    Ok(WrappedCondenser { ext, n, eps })
}

impl<E: SeededExtractor> WrappedCondenser<E> {
    pub fn ext(&self) -> &E {
        &self.ext
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn d(&self) -> u32 {
        self.ext.spec().d
    }

    pub fn m(&self) -> u32 {
        self.ext.spec().m
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// The seed read from the third block: its first `d` bits.
    #[inline]
    pub fn seed_of(&self, x3: u64) -> u64 {
        x3 >> (self.n - self.d())
    }

    #[inline]
    pub fn eval_raw(&self, x1: u64, x2: u64, x3: u64) -> u64 {
        self.ext.eval_raw((x1 << self.n) | x2, self.seed_of(x3))
    }

    pub fn eval(&self, x1: u64, x2: u64, x3: u64) -> Result<u64> {
        for x in [x1, x2, x3] {
            if x > mask(self.n) {
                return Err(Error::OutOfRange {
                    value: x,
                    bits: self.n,
                });
            }
        }
        Ok(self.eval_raw(x1, x2, x3))
    }

    /// Guaranteed smooth min-entropy `log2(eps·N²/(2R))` for lightness `R`.
    pub fn guaranteed_k(&self, r: u64) -> f64 {
        (self.eps * 2f64.powi(2 * self.n as i32) / (2.0 * r as f64)).log2()
    }

    /// `g` as a function on packed three-block inputs, block 0 highest.
    pub fn to_block_function(&self) -> Result<BlockFunctionTable>
    where
        E: Clone + 'static,
    {
        let w = self.clone();
        let n = self.n;
        BlockFunctionTable::from_fn(n, 3, self.m(), move |x| {
            w.eval_raw(x >> (2 * n), (x >> n) & mask(n), x & mask(n))
        })
    }
}

/// Per-output reach counts and the greedy position-3 adversary's outcome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReachSummary {
    pub light: OutputLightReport,
    /// `|{x : ∃ s, Ext(x, s) = z}|` per output.
    pub preimages: Vec<u64>,
    /// Output histogram when each `x` steers to its most popular reachable output.
    pub adversary_counts: Vec<u64>,
}

/// Extractors whose reach sets can be enumerated exactly.
pub trait ReachEnumerable: SeededExtractor {
    fn reach_summary(&self) -> Result<ReachSummary>;
}

fn rank_of(preimages: &[u64]) -> Vec<usize> {
    let mut rank = vec![0usize; preimages.len()];
    for (pos, z) in heaviest_outputs(preimages, preimages.len())
        .into_iter()
        .enumerate()
    {
        rank[z as usize] = pos;
    }
    rank
}

/// Reach summary by enumerating every `(x, s)`; `n + d <= 30`.
pub fn enumerate_reach<E: SeededExtractor + ?Sized>(ext: &E) -> Result<ReachSummary> {
    let spec = *ext.spec();
    let (preimages, _) = preimage_counts(ext)?;
    let light = audit_output_light(ext, u64::MAX);
    let rank = rank_of(&preimages);
    let mut adversary_counts = vec![0u64; preimages.len()];
    for x in 0..spec.input_space() {
        let best = (0..spec.seed_space())
            .map(|s| ext.eval_raw(x, s) as usize)
            .min_by_key(|&z| rank[z])
            .expect("seed space is non-empty");
        adversary_counts[best] += 1;
    }
    Ok(ReachSummary {
        light,
        preimages,
        adversary_counts,
    })
}

impl ReachEnumerable for SampledCondenser {
    fn reach_summary(&self) -> Result<ReachSummary> {
        enumerate_reach(self)
    }
}

/// Reach summary of the explicit extractor from a prebuilt profile.
pub fn explicit_reach_summary(cfg: &ExplicitCfg, profile: &ReachProfile) -> ReachSummary {
    let preimages = profile.preimage_counts(cfg);
    let adversary_counts = profile.adversary_counts(cfg, &rank_of(&preimages));
    ReachSummary {
        light: explicit_output_light(cfg, profile),
        preimages,
        adversary_counts,
    }
}

impl ReachEnumerable for ExplicitExt {
    fn reach_summary(&self) -> Result<ReachSummary> {
        let cfg = self.cfg();
        Ok(explicit_reach_summary(cfg, &ReachProfile::build(cfg)?))
    }
}

/// Greedy position-3 adversary: for each `(x1, x2)` the third block selects
/// the reachable output with the most preimages.
pub fn position3_adversary<E: ReachEnumerable>(w: &WrappedCondenser<E>) -> Result<ReachSummary> {
    w.ext.reach_summary()
}

/// One exact audit against a bad first or second block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositionOutcome {
    /// 1 or 2.
    pub position: u32,
    pub table_stream: u64,
    pub tv: f64,
    #[serde(with = "prob_serde")]
    pub tv_exact: Prob,
}

/// Exact TV distance from uniform of `g(X)` for `tables` random sources with
/// the bad block in position 1 (a constant) or 2 (a table of `x1`),
/// alternating. Only the first `d` bits of the uniform third block matter,
/// so the enumeration covers `2^(n + d)` points per source.
pub fn positions12_audit<E: SeededExtractor>(
    w: &WrappedCondenser<E>,
    tables: usize,
    rng_seed: u64,
) -> Result<Vec<PositionOutcome>> {
    let (n, d, m) = (w.n, w.d(), w.m());
    if n + d > MAX_POSITION12_BITS {
        return Err(Error::too_large(
            "position 1/2 audit",
            n + d,
            MAX_POSITION12_BITS,
        ));
    }
    let low = n - d;
    (0..tables as u64)
        .map(|j| {
            let mut rng = stream(rng_seed, j);
            let position = if j % 2 == 0 { 1 } else { 2 };
            let constant = rng.gen::<u64>() & mask(n);
            let table: Vec<u64> = if position == 2 {
                (0..1u64 << n).map(|_| rng.gen::<u64>() & mask(n)).collect()
            } else {
                Vec::new()
            };
            let mut counts = vec![0u64; 1 << m];
            for u in 0..1u64 << n {
                let (x1, x2) = if position == 1 {
                    (constant, u)
                } else {
                    (u, table[u as usize])
                };
                for s in 0..1u64 << d {
                    counts[w.eval_raw(x1, x2, s << low) as usize] += 1;
                }
            }
            let tv_exact = tv_from_uniform_exact(&Dist::from_counts(m, &counts)?);
            Ok(PositionOutcome {
                position,
                table_stream: j,
                tv: prob_to_f64(&tv_exact),
                tv_exact,
            })
        })
        .collect()
}

/// Certificate for a wrapped condenser over the three adversary positions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WrapCertificate {
    pub n: u32,
    pub d: u32,
    pub m: u32,
    pub eps: f64,
    pub stand_in: String,
    /// Observed output-lightness `R`: the largest per-output preimage count.
    pub r_observed: u64,
    pub k_bits: f64,
    pub light: OutputLightReport,
    pub position3_entropy: f64,
    pub positions12: Vec<PositionOutcome>,
    pub checks: Vec<Check>,
}

impl WrapCertificate {
    pub fn passed(&self) -> bool {
        all_required_pass(&self.checks)
    }
}

/// Audit `w` against all three adversary positions.
pub fn certify_wrapped<E: ReachEnumerable>(
    w: &WrappedCondenser<E>,
    tables: usize,
    rng_seed: u64,
) -> Result<WrapCertificate> {
    certify_with_summary(w, position3_adversary(w)?, tables, rng_seed)
}

/// [`certify_wrapped`] with the reach summary already computed.
pub fn certify_with_summary<E: SeededExtractor>(
    w: &WrappedCondenser<E>,
    summary: ReachSummary,
    tables: usize,
    rng_seed: u64,
) -> Result<WrapCertificate> {
    let r_observed = summary.light.max_preimages.max(1);
    let k_bits = w.guaranteed_k(r_observed);
    let mut checks = Vec::new();

    checks.push(Check::new(
        "output_light",
        "max_z |{x : ∃ s, Ext(x, s) = z}| within the declared threshold",
        summary.light.passed,
        format!(
            "R = {} (threshold {})",
            summary.light.max_preimages, summary.light.threshold
        ),
    ));
    let recomputed = (w.eps * 2f64.powi(2 * w.n as i32) / (2.0 * r_observed as f64)).log2();
    checks.push(Check::info(
        "k_from_observed_r",
        "k = log2(eps·N²/(2R)) with R observed",
        (recomputed - k_bits).abs() < 1e-12,
        format!("k = {k_bits:.6}"),
    ));

    let adversary = Dist::from_counts(w.m(), &summary.adversary_counts)?;
    let position3_entropy = smooth_min_entropy(&adversary, w.eps).entropy_bits;
    checks.push(Check::new(
        "position3_entropy",
        "greedy position-3 adversary leaves smooth min-entropy at least k",
        position3_entropy >= k_bits - crate::dist::ENTROPY_SLACK,
        format!("H^eps = {position3_entropy:.6} vs k = {k_bits:.6}"),
    ));

    let positions12 = positions12_audit(w, tables, rng_seed)?;
    let worst = positions12.iter().map(|o| o.tv).fold(0.0, f64::max);
    checks.push(Check::new(
        "positions12_tv",
        "with a bad block in position 1 or 2 the output is eps-close to uniform",
        positions12.iter().all(|o| o.tv <= w.eps),
        format!("{} sources, worst TV {worst:.6}", positions12.len()),
    ));

    let mut rng = stream(rng_seed, u64::MAX);
    let reads_prefix_only = (0..256).all(|_| {
        let (x1, x2, x3) = (
            rng.gen::<u64>() & mask(w.n),
            rng.gen::<u64>() & mask(w.n),
            rng.gen::<u64>() & mask(w.n),
        );
        let tail = rng.gen::<u64>() & mask(w.n - w.d());
        w.eval_raw(x1, x2, x3) == w.eval_raw(x1, x2, x3 ^ tail)
    });
    checks.push(Check::new(
        "seed_prefix_only",
        "g reads at most the first d bits of x3",
        reads_prefix_only,
        "256 random triples with the tail of x3 perturbed",
    ));

    Ok(WrapCertificate {
        n: w.n,
        d: w.d(),
        m: w.m(),
        eps: w.eps,
        stand_in: w.ext.kind().to_string(),
        r_observed,
        k_bits,
        light: summary.light,
        position3_entropy,
        positions12,
        checks,
    })
}
