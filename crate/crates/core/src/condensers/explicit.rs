//! An explicit output-light somewhere-extractor.
//!
//! Inputs are two `n`-bit blocks. The top `n/8` bits of each form `Y1`
//! (`n1 = n/4` bits); the rest form `Y2` (`n2 = 7n/4` bits). An inner seeded
//! extractor maps `(Y2, s)` to `R2`; its first `n/4` bits with the last one
//! forced to 1 give `R2'`, and the output is `⟨R2', Y1⟩` over
//! `GF(2^(n/16))^4`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::mask;
use crate::error::{Error, Result};
use crate::gf::{packed_inner_product, FieldParams};
use crate::seeded::{
    AuditMode, Extractor, OutputLightReport, SeededExtSpec, SeededExtractor, TableExt,
};

/// Limbs in the inner product.
pub const LIMBS: u32 = 4;
/// Largest `n2 + d` for which the exhaustive output-lightness audit runs.
pub const MAX_REACH_BITS: u32 = 32;

/// Shape of the explicit extractor and its inner seeded extractor.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExplicitCfg {
    pub n: u32,
    pub n1: u32,
    pub n2: u32,
    pub limb_bits: u32,
    pub limbs: u32,
    pub eps: f64,
    pub eps0: f64,
    /// Output length of the inner extractor, `n/2 − ceil(log2(1/eps0))`.
    pub inner_out: u32,
    pub d: u32,
    pub field: FieldParams,
    pub inner: Extractor,
}

impl ExplicitCfg {
    /// Inner output length for block width `n` and error `eps`.
    pub fn inner_output_bits(n: u32, eps: f64) -> Result<u32> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::Domain(format!("eps must lie in (0, 1), got {eps}")));
        }
        let loss = (4.0 / eps).log2().ceil() as u32;
        let out = (n / 2).checked_sub(loss).unwrap_or(0);
        if out < n / 4 {
            return Err(Error::Precondition(format!(
                "inner output {} bits is shorter than the n/4 = {} bit prefix",
                (n / 2) as i64 - loss as i64,
                n / 4
            )));
        }
        Ok(out)
    }

    /// Configuration around a caller-supplied inner extractor.
    pub fn new(n: u32, eps: f64, inner: Extractor) -> Result<Self> {
        if n == 0 || n % 16 != 0 {
            return Err(Error::Domain(format!(
                "block width {n} is not a positive multiple of 16"
            )));
        }
        if n > 32 {
            return Err(Error::too_large("explicit extractor input", 2 * n, 64));
        }
        let inner_out = Self::inner_output_bits(n, eps)?;
        let n2 = 7 * n / 4;
        let spec = *inner.spec();
        if spec.n != n2 || spec.m != inner_out {
            return Err(Error::WidthMismatch {
                expected: n2,
                actual: spec.n,
            });
        }
        Ok(ExplicitCfg {
            n,
            n1: n / 4,
            n2,
            limb_bits: n / 16,
            limbs: LIMBS,
            eps,
            eps0: eps / 4.0,
            inner_out,
            d: spec.d,
            field: FieldParams::standard(n / 16)?,
            inner,
        })
    }

    /// Configuration with a pseudorandom-table inner extractor.
    pub fn table_random(n: u32, eps: f64, d: u32, rng_seed: u64) -> Result<Self> {
        if n == 0 || n % 16 != 0 {
            return Err(Error::Domain(format!(
                "block width {n} is not a positive multiple of 16"
            )));
        }
        let inner_out = Self::inner_output_bits(n, eps)?;
        let spec = SeededExtSpec::new(7 * n / 4, d, inner_out, 0.0, eps / 4.0)?;
        Self::new(n, eps, Extractor::Table(TableExt::auto(spec, rng_seed)?))
    }

    pub fn output_bits(&self) -> u32 {
        self.limb_bits
    }

    /// `(Y1, Y2)` for input blocks `(x1, x2)`.
    #[inline]
    pub fn split(&self, x1: u64, x2: u64) -> (u64, u64) {
        let h = self.n1 / 2;
        let low = self.n - h;
        let y1 = ((x1 >> low) << h) | (x2 >> low);
        let y2 = ((x1 & mask(low)) << low) | (x2 & mask(low));
        (y1, y2)
    }

    /// `R2'` for `(Y2, s)`: the first `n/4` inner output bits, last bit set.
    #[inline]
    pub fn prefix(&self, y2: u64, s: u64) -> u64 {
        let r2 = self.inner.eval_raw(y2, s);
        (r2 >> (self.inner_out - self.n / 4)) | 1
    }

    #[inline]
    fn from_parts(&self, y1: u64, y2: u64, s: u64) -> u64 {
        packed_inner_product(&self.field, self.prefix(y2, s), y1, self.limbs)
    }
}

fn check_width(value: u64, bits: u32) -> Result<()> {
    if bits < 64 && value >> bits != 0 {
        Err(Error::OutOfRange { value, bits })
    } else {
        Ok(())
    }
}

/// Evaluate on blocks `x1`, `x2` and seed `s`; returns `n/16` bits.
pub fn explicit_ext(x1: u64, x2: u64, s: u64, cfg: &ExplicitCfg) -> Result<u64> {
    check_width(x1, cfg.n)?;
    check_width(x2, cfg.n)?;
    check_width(s, cfg.d)?;
    let (y1, y2) = cfg.split(x1, x2);
    Ok(cfg.from_parts(y1, y2, s))
}

/// `|{Y1 : ⟨R2'(y2, s), Y1⟩ = z}|`, by enumeration.
pub fn fiber_count(cfg: &ExplicitCfg, s: u64, y2: u64, z: u64) -> Result<u64> {
    check_width(s, cfg.d)?;
    check_width(y2, cfg.n2)?;
    check_width(z, cfg.limb_bits)?;
    let r = cfg.prefix(y2, s);
    Ok((0..1u64 << cfg.n1)
        .filter(|&y1| packed_inner_product(&cfg.field, r, y1, cfg.limbs) == z)
        .count() as u64)
}

/// The explicit extractor as a seeded extractor on `2n` bits, first block high.
#[derive(Clone, Debug)]
pub struct ExplicitExt {
    cfg: ExplicitCfg,
    spec: SeededExtSpec,
}

impl ExplicitExt {
    pub fn new(cfg: ExplicitCfg) -> Result<Self> {
        let spec = SeededExtSpec::new(2 * cfg.n, cfg.d, cfg.limb_bits, 0.0, cfg.eps)?;
        Ok(ExplicitExt { cfg, spec })
    }

    pub fn cfg(&self) -> &ExplicitCfg {
        &self.cfg
    }
}

impl SeededExtractor for ExplicitExt {
    fn spec(&self) -> &SeededExtSpec {
        &self.spec
    }

    #[inline]
    fn eval_raw(&self, x: u64, s: u64) -> u64 {
        let n = self.cfg.n;
        let (y1, y2) = self.cfg.split(x >> n, x & mask(n));
        self.cfg.from_parts(y1, y2, s)
    }

    fn kind(&self) -> &'static str {
        "explicit"
    }
}

/// For every `Y2`, the set of prefixes `R2'` reachable under some seed,
/// tallied as a histogram over subsets of prefix values.
///
/// Everything the adversary and the output-lightness audit need depends on
/// `(x1, x2)` only through `Y1` and this subset, so one pass over `Y2 × seeds`
/// replaces a pass over all `2^(2n+d)` triples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReachProfile {
    pub n: u32,
    pub d: u32,
    /// `hist[S]` = number of `Y2` whose reachable prefix set is `S` (bitmask over prefix values).
    pub hist: Vec<u64>,
}

impl ReachProfile {
    pub fn build(cfg: &ExplicitCfg) -> Result<Self> {
        let prefix_bits = cfg.n / 4;
        if prefix_bits > 4 || cfg.n2 + cfg.d > MAX_REACH_BITS {
            return Err(Error::too_large(
                "reach profile",
                cfg.n2 + cfg.d,
                MAX_REACH_BITS,
            ));
        }
        let subsets = 1usize << (1usize << prefix_bits);
        let chunk = 1u64 << 16.min(cfg.n2);
        let chunks = (1u64 << cfg.n2) / chunk;
        let hist = (0..chunks)
            .into_par_iter()
            .fold(
                || vec![0u64; subsets],
                |mut h, c| {
                    for y2 in c * chunk..(c + 1) * chunk {
                        let mut set = 0usize;
                        for s in 0..1u64 << cfg.d {
                            set |= 1 << cfg.prefix(y2, s);
                        }
                        h[set] += 1;
                    }
                    h
                },
            )
            .reduce(
                || vec![0u64; subsets],
                |mut a, b| {
                    a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                    a
                },
            );
        Ok(ReachProfile {
            n: cfg.n,
            d: cfg.d,
            hist,
        })
    }

    /// `reach[S][y1]`: bitmask of outputs reachable from `Y1 = y1` when the
    /// reachable prefix set is `S`, for every `S` that occurs.
    fn reach_masks<'a>(
        &'a self,
        cfg: &'a ExplicitCfg,
    ) -> impl Iterator<Item = (u64, Vec<u64>)> + 'a {
        self.hist
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(move |(set, &count)| {
                let masks = (0..1u64 << cfg.n1)
                    .map(|y1| {
                        (0..1u64 << (cfg.n / 4))
                            .filter(|r| set >> r & 1 == 1)
                            .fold(0u64, |acc, r| {
                                acc | 1 << packed_inner_product(&cfg.field, r, y1, cfg.limbs)
                            })
                    })
                    .collect();
                (count, masks)
            })
    }

    /// `|{x ∈ {0,1}^(2n) : ∃ s, Ext(x, s) = z}|` for every output `z`.
    pub fn preimage_counts(&self, cfg: &ExplicitCfg) -> Vec<u64> {
        let mut counts = vec![0u64; 1 << cfg.limb_bits];
        for (count, masks) in self.reach_masks(cfg) {
            for m in masks {
                for (z, c) in counts.iter_mut().enumerate() {
                    if m >> z & 1 == 1 {
                        *c += count;
                    }
                }
            }
        }
        counts
    }

    /// Output histogram when every input picks its reachable output ranked
    /// first by `rank` (smaller is preferred).
    pub fn adversary_counts(&self, cfg: &ExplicitCfg, rank: &[usize]) -> Vec<u64> {
        let mut counts = vec![0u64; 1 << cfg.limb_bits];
        for (count, masks) in self.reach_masks(cfg) {
            for m in masks {
                let best = (0..counts.len())
                    .filter(|&z| m >> z & 1 == 1)
                    .min_by_key(|&z| rank[z])
                    .expect("every input reaches some output");
                counts[best] += count;
            }
        }
        counts
    }
}

/// Fiber sizes for every prefix `R2'` that some `(Y2, s)` produces, and every
/// output `z`. Since the fiber of `(s, y2, z)` depends on `(s, y2)` only
/// through `R2'`, this covers all triples. Returns `(min, max)`.
pub fn fiber_census(cfg: &ExplicitCfg, profile: &ReachProfile) -> (u64, u64) {
    let occurring = profile
        .hist
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .fold(0usize, |acc, (set, _)| acc | set);
    let mut lo = u64::MAX;
    let mut hi = 0;
    for r in (0..1u64 << (cfg.n / 4)).filter(|r| occurring >> r & 1 == 1) {
        let mut counts = vec![0u64; 1 << cfg.limb_bits];
        for y1 in 0..1u64 << cfg.n1 {
            counts[packed_inner_product(&cfg.field, r, y1, cfg.limbs) as usize] += 1;
        }
        for c in counts {
            lo = lo.min(c);
            hi = hi.max(c);
        }
    }
    (lo, hi)
}

/// Exhaustive output-lightness audit of the explicit extractor with the
/// threshold `2^(2n − n/16 + d)`, passing when the maximum is at most it.
pub fn explicit_output_light(cfg: &ExplicitCfg, profile: &ReachProfile) -> OutputLightReport {
    let counts = profile.preimage_counts(cfg);
    let (witness_output, max_preimages) = counts.iter().enumerate().fold(
        (0u64, 0u64),
        |(bz, bc), (z, &c)| if c > bc { (z as u64, c) } else { (bz, bc) },
    );
    let threshold = 1u64 << (2 * cfg.n - cfg.limb_bits + cfg.d);
    OutputLightReport {
        max_preimages,
        witness_output,
        threshold,
        passed: max_preimages <= threshold,
        mode: AuditMode::Exhaustive,
        certifying: true,
        stand_in: cfg.inner.kind().to_string(),
        pair_total: 1u64 << (2 * cfg.n + cfg.d),
        samples: 1u64 << (2 * cfg.n),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg16() -> ExplicitCfg {
        ExplicitCfg::table_random(16, 0.25, 2, 5).unwrap()
    }

    #[test]
    fn widths() {
        let cfg = cfg16();
        assert_eq!(
            (cfg.n1, cfg.n2, cfg.limb_bits, cfg.inner_out),
            (4, 28, 1, 4)
        );
        assert!(ExplicitCfg::table_random(20, 0.25, 2, 5).is_err());
        assert!(ExplicitCfg::table_random(16, 0.01, 2, 5).is_err());
    }

    #[test]
    fn zero_y1_gives_zero() {
        let cfg = cfg16();
        for s in 0..4 {
            for x in [0u64, 0x0123, 0x1fff] {
                assert_eq!(explicit_ext(x, x ^ 0x0f0f, s, &cfg).unwrap(), 0);
            }
        }
    }

    #[test]
    fn gf2_case_is_parity() {
        let cfg = cfg16();
        let (x1, x2, s) = (0xd00du64, 0x7abc, 3);
        let (y1, y2) = cfg.split(x1, x2);
        let r = cfg.prefix(y2, s);
        assert_eq!(
            explicit_ext(x1, x2, s, &cfg).unwrap(),
            u64::from((r & y1).count_ones() & 1)
        );
    }

    #[test]
    fn fibers_are_uniform() {
        let cfg = cfg16();
        for s in 0..4 {
            for y2 in [0u64, 1, 12345, (1 << 28) - 1] {
                let total: u64 = (0..2).map(|z| fiber_count(&cfg, s, y2, z).unwrap()).sum();
                assert_eq!(total, 16);
                assert_eq!(fiber_count(&cfg, s, y2, 1).unwrap(), 8);
            }
        }
    }

    #[test]
    fn width_errors() {
        let cfg = cfg16();
        assert!(explicit_ext(1 << 16, 0, 0, &cfg).is_err());
        assert!(explicit_ext(0, 0, 4, &cfg).is_err());
    }
}
