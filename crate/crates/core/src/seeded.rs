//! Seeded extractors and the output-lightness audit.
//!
//! Three stand-ins implement [`SeededExtractor`]:
//!
//! * [`ToeplitzExt`]: the GF(2)-linear Toeplitz hash, seed length `n + m − 1`;
//! * [`TableExt`]: a pseudorandom function table keyed by an `rng_seed`
//!   (materialized when `n + d <= 26`, computed on demand otherwise);
//! * [`KeyedMixExt`]: a keyed mixing function, heuristic only.
//!
//! Inputs, seeds and outputs follow the MSB-first conventions of [`crate::bits`].

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::{mask, prefix};
use crate::dist::{tv_from_uniform_exact, Dist, Prob};
use crate::rng::{mix64, seeded};
use crate::{Error, Result};

/// Largest `n + d` for which a table is materialized.
pub const MAX_TABLE_BITS: u32 = 26;
/// Largest `n + d` audited exhaustively.
pub const MAX_EXHAUSTIVE_BITS: u32 = 30;
/// Inputs sampled by the non-certifying output-lightness audit.
pub const DEFAULT_AUDIT_SAMPLES: u64 = 1 << 16;

/// Shape and declared guarantee of a seeded extractor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeededExtSpec {
    pub n: u32,
    pub d: u32,
    pub m: u32,
    pub declared_k: f64,
    pub declared_eps: f64,
}

impl SeededExtSpec {
    pub fn new(n: u32, d: u32, m: u32, declared_k: f64, declared_eps: f64) -> Result<Self> {
        if m > n {
            return Err(Error::Domain(format!(
                "output {m} bits exceeds input {n} bits"
            )));
        }
        if d == 0 {
            return Err(Error::Domain("seed length must be at least 1".into()));
        }
        if n > 64 || d > 64 || m > 32 {
            return Err(Error::Domain(format!(
                "unsupported widths n={n} d={d} m={m}"
            )));
        }
        Ok(SeededExtSpec {
            n,
            d,
            m,
            declared_k,
            declared_eps,
        })
    }

    pub fn input_space(&self) -> u64 {
        1u64 << self.n
    }

    pub fn seed_space(&self) -> u64 {
        1u64 << self.d
    }
}

pub trait SeededExtractor: Send + Sync {
    fn spec(&self) -> &SeededExtSpec;

    /// Evaluate without width checks; callers guarantee `x < 2^n`, `s < 2^d`.
    fn eval_raw(&self, x: u64, s: u64) -> u64;

    /// Which stand-in this is: `toeplitz`, `table`, `keyed` or a custom tag.
    fn kind(&self) -> &'static str;

    /// Whether audits of this instance may be used as certificates.
    fn certifying(&self) -> bool {
        true
    }

    fn eval(&self, x: u64, s: u64) -> Result<u64> {
        let spec = self.spec();
        if x > mask(spec.n) {
            return Err(Error::OutOfRange {
                value: x,
                bits: spec.n,
            });
        }
        if s > mask(spec.d) {
            return Err(Error::OutOfRange {
                value: s,
                bits: spec.d,
            });
        }
        Ok(self.eval_raw(x, s))
    }
}

/// `y = T(s)·x` over GF(2) with `T(s)` an `m × n` Toeplitz matrix.
///
/// Entry `(i, j)` is seed position `j − i` when `j >= i` and seed position
/// `n − 1 + (i − j)` below the diagonal, so row 0 is `s[0..n]` and column 0
/// continues down `s[n..n+m−1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ToeplitzExt {
    spec: SeededExtSpec,
}

impl ToeplitzExt {
    pub fn new(n: u32, m: u32) -> Result<Self> {
        let d = n + m - 1;
        Ok(ToeplitzExt {
            spec: SeededExtSpec::new(n, d, m, m as f64, 0.0)?,
        })
    }

    pub fn with_spec(spec: SeededExtSpec) -> Result<Self> {
        if spec.d != spec.n + spec.m - 1 {
            return Err(Error::Domain(format!(
                "Toeplitz seed must be n + m − 1 = {} bits",
                spec.n + spec.m - 1
            )));
        }
        Ok(ToeplitzExt { spec })
    }

    /// Row `i` of `T(s)` as an `n`-bit string.
    pub fn row(&self, s: u64, i: u32) -> u64 {
        let SeededExtSpec { n, d, .. } = self.spec;
        let seed_bit = |k: u32| (s >> (d - 1 - k)) & 1;
        (0..n).fold(0u64, |acc, j| {
            let k = if j >= i { j - i } else { n - 1 + (i - j) };
            (acc << 1) | seed_bit(k)
        })
    }
}

impl SeededExtractor for ToeplitzExt {
    fn spec(&self) -> &SeededExtSpec {
        &self.spec
    }

    fn eval_raw(&self, x: u64, s: u64) -> u64 {
        (0..self.spec.m).fold(0u64, |acc, i| {
            let bit = (self.row(s, i) & x).count_ones() as u64 & 1;
            (acc << 1) | bit
        })
    }

    fn kind(&self) -> &'static str {
        "toeplitz"
    }
}

#[inline]
fn table_entry(key: u64, index: u64, m: u32) -> u64 {
    let h = mix64(mix64(index ^ key).wrapping_add(key.rotate_left(29)));
    h & mask(m)
}

/// A pseudorandom table `x, s ↦ Ext(x, s)` determined by `rng_seed`.
#[derive(Clone)]
pub struct TableExt {
    spec: SeededExtSpec,
    rng_seed: u64,
    key: u64,
    table: Option<Arc<Vec<u32>>>,
}

impl std::fmt::Debug for TableExt {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TableExt")
            .field("spec", &self.spec)
            .field("rng_seed", &self.rng_seed)
            .field("materialized", &self.table.is_some())
            .finish()
    }
}

impl TableExt {
    /// Materialized table; requires `n + d <= 26`.
    pub fn random(spec: SeededExtSpec, rng_seed: u64) -> Result<Self> {
        let bits = spec.n + spec.d;
        if bits > MAX_TABLE_BITS {
            return Err(Error::too_large("extractor table", bits, MAX_TABLE_BITS));
        }
        let mut ext = Self::on_demand(spec, rng_seed)?;
        let key = ext.key;
        let m = spec.m;
        let entries: Vec<u32> = (0..1u64 << bits)
            .into_par_iter()
            .map(|idx| table_entry(key, idx, m) as u32)
            .collect();
        ext.table = Some(Arc::new(entries));
        Ok(ext)
    }

    /// Same entries as [`TableExt::random`], computed when queried.
    pub fn on_demand(spec: SeededExtSpec, rng_seed: u64) -> Result<Self> {
        if spec.n + spec.d > 63 {
            return Err(Error::too_large("table index", spec.n + spec.d, 63));
        }
        Ok(TableExt {
            spec,
            rng_seed,
            key: mix64(rng_seed ^ 0x7AB1_E5EE_D000_0001),
            table: None,
        })
    }

    /// Build from [`TableExt::random`] when small enough, else on demand.
    pub fn auto(spec: SeededExtSpec, rng_seed: u64) -> Result<Self> {
        if spec.n + spec.d <= MAX_TABLE_BITS {
            Self::random(spec, rng_seed)
        } else {
            Self::on_demand(spec, rng_seed)
        }
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }

    pub fn is_materialized(&self) -> bool {
        self.table.is_some()
    }

    /// Stored entry; identical to evaluation.
    pub fn entry(&self, x: u64, s: u64) -> u64 {
        self.eval_raw(x, s)
    }
}

impl SeededExtractor for TableExt {
    fn spec(&self) -> &SeededExtSpec {
        &self.spec
    }

    #[inline]
    fn eval_raw(&self, x: u64, s: u64) -> u64 {
        let idx = (x << self.spec.d) | s;
        match &self.table {
            Some(t) => t[idx as usize] as u64,
            None => table_entry(self.key, idx, self.spec.m),
        }
    }

    fn kind(&self) -> &'static str {
        "table"
    }
}

/// Keyed mixing of `(x, s)` truncated to the top `m` bits of a 64-bit hash.
#[derive(Clone, Debug, PartialEq)]
pub struct KeyedMixExt {
    spec: SeededExtSpec,
    key: [u64; 2],
}

impl KeyedMixExt {
    pub fn new(spec: SeededExtSpec, key: [u64; 2]) -> Self {
        KeyedMixExt { spec, key }
    }

    pub fn from_seed(spec: SeededExtSpec, rng_seed: u64) -> Self {
        let mut rng = seeded(rng_seed);
        KeyedMixExt {
            spec,
            key: [rng.gen(), rng.gen()],
        }
    }

    pub fn key(&self) -> [u64; 2] {
        self.key
    }
}

impl SeededExtractor for KeyedMixExt {
    fn spec(&self) -> &SeededExtSpec {
        &self.spec
    }

    fn eval_raw(&self, x: u64, s: u64) -> u64 {
        let a = mix64(x ^ self.key[0]);
        let b = mix64(a ^ s.rotate_left(32) ^ self.key[1]);
        let h = mix64(b.wrapping_add(a.rotate_left(17)));
        prefix(h, 64, self.spec.m)
    }

    fn kind(&self) -> &'static str {
        "keyed"
    }

    fn certifying(&self) -> bool {
        false
    }
}

/// A serializable extractor instance.
#[derive(Clone, Debug)]
pub enum Extractor {
    Toeplitz(ToeplitzExt),
    Table(TableExt),
    Keyed(KeyedMixExt),
}

impl Extractor {
    fn inner(&self) -> &dyn SeededExtractor {
        match self {
            Extractor::Toeplitz(e) => e,
            Extractor::Table(e) => e,
            Extractor::Keyed(e) => e,
        }
    }
}

impl SeededExtractor for Extractor {
    fn spec(&self) -> &SeededExtSpec {
        self.inner().spec()
    }

    #[inline]
    fn eval_raw(&self, x: u64, s: u64) -> u64 {
        match self {
            Extractor::Toeplitz(e) => e.eval_raw(x, s),
            Extractor::Table(e) => e.eval_raw(x, s),
            Extractor::Keyed(e) => e.eval_raw(x, s),
        }
    }

    fn kind(&self) -> &'static str {
        self.inner().kind()
    }

    fn certifying(&self) -> bool {
        self.inner().certifying()
    }
}

#[derive(Serialize, Deserialize)]
struct ExtractorRepr {
    kind: String,
    spec: SeededExtSpec,
    seed_material: String,
}

impl Serialize for Extractor {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let seed_material = match self {
            Extractor::Toeplitz(_) => String::new(),
            Extractor::Table(e) => hex::encode(e.rng_seed.to_be_bytes()),
            Extractor::Keyed(e) => {
                let mut bytes = e.key[0].to_be_bytes().to_vec();
                bytes.extend_from_slice(&e.key[1].to_be_bytes());
                hex::encode(bytes)
            }
        };
        ExtractorRepr {
            kind: self.kind().to_string(),
            spec: *self.spec(),
            seed_material,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Extractor {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = ExtractorRepr::deserialize(d)?;
        let bytes = hex::decode(&r.seed_material).map_err(D::Error::custom)?;
        let word = |b: &[u8]| -> std::result::Result<u64, D::Error> {
            let arr: [u8; 8] = b
                .try_into()
                .map_err(|_| D::Error::custom("seed material has the wrong length"))?;
            Ok(u64::from_be_bytes(arr))
        };
        match r.kind.as_str() {
            "toeplitz" => ToeplitzExt::with_spec(r.spec)
                .map(Extractor::Toeplitz)
                .map_err(D::Error::custom),
            "table" => TableExt::auto(r.spec, word(&bytes)?)
                .map(Extractor::Table)
                .map_err(D::Error::custom),
            "keyed" => {
                if bytes.len() != 16 {
                    return Err(D::Error::custom("keyed extractor needs a 16-byte key"));
                }
                Ok(Extractor::Keyed(KeyedMixExt::new(
                    r.spec,
                    [word(&bytes[..8])?, word(&bytes[8..])?],
                )))
            }
            other => Err(D::Error::custom(format!(
                "unknown extractor kind {other:?}"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuditMode {
    Exhaustive,
    Sampled,
}

/// Result of counting, per output `z`, the inputs that reach `z` under some seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputLightReport {
    pub max_preimages: u64,
    pub witness_output: u64,
    pub threshold: u64,
    pub passed: bool,
    pub mode: AuditMode,
    pub certifying: bool,
    pub stand_in: String,
    /// Σ over outputs of `(x, s)` pairs mapping there; equals `2^(n+d)` when exhaustive.
    pub pair_total: u64,
    pub samples: u64,
}

/// Exhaustive per-output preimage counts `|{x : ∃ s, Ext(x, s) = z}|` and
/// the pair histogram `|{(x, s) : Ext(x, s) = z}|`.
pub fn preimage_counts<E: SeededExtractor + ?Sized>(ext: &E) -> Result<(Vec<u64>, Vec<u64>)> {
    let spec = *ext.spec();
    let bits = spec.n + spec.d;
    if bits > MAX_EXHAUSTIVE_BITS || spec.m > 24 {
        return Err(Error::too_large(
            "output-lightness audit",
            bits,
            MAX_EXHAUSTIVE_BITS,
        ));
    }
    let outputs = 1usize << spec.m;
    let chunk = 1u64 << spec.n.min(10);
    let chunks = spec.input_space().div_ceil(chunk);
    let (distinct, pairs) = (0..chunks)
        .into_par_iter()
        .fold(
            || {
                (
                    vec![0u64; outputs],
                    vec![0u64; outputs],
                    vec![u64::MAX; outputs],
                )
            },
            |(mut distinct, mut pairs, mut stamp), c| {
                let lo = c * chunk;
                let hi = (lo + chunk).min(spec.input_space());
                for x in lo..hi {
                    for s in 0..spec.seed_space() {
                        let z = ext.eval_raw(x, s) as usize;
                        pairs[z] += 1;
                        if stamp[z] != x {
                            stamp[z] = x;
                            distinct[z] += 1;
                        }
                    }
                }
                (distinct, pairs, stamp)
            },
        )
        .map(|(a, b, _)| (a, b))
        .reduce(
            || (vec![0u64; outputs], vec![0u64; outputs]),
            |(mut a, mut b), (c, d)| {
                a.iter_mut().zip(&c).for_each(|(x, y)| *x += y);
                b.iter_mut().zip(&d).for_each(|(x, y)| *x += y);
                (a, b)
            },
        );
    Ok((distinct, pairs))
}

fn argmax(counts: &[u64]) -> (u64, u64) {
    counts.iter().enumerate().fold(
        (0u64, 0u64),
        |(bz, bc), (z, &c)| if c > bc { (z as u64, c) } else { (bz, bc) },
    )
}

/// Output-lightness audit: exhaustive when `n + d <= 30`, otherwise a
/// sampled estimate flagged as non-certifying. Passes iff the maximum
/// preimage count is below `threshold`.
pub fn audit_output_light<E: SeededExtractor + ?Sized>(
    ext: &E,
    threshold: u64,
) -> OutputLightReport {
    match preimage_counts(ext) {
        Ok((distinct, pairs)) => {
            let (witness_output, max_preimages) = argmax(&distinct);
            OutputLightReport {
                max_preimages,
                witness_output,
                threshold,
                passed: max_preimages < threshold,
                mode: AuditMode::Exhaustive,
                certifying: ext.certifying(),
                stand_in: ext.kind().to_string(),
                pair_total: pairs.iter().sum(),
                samples: ext.spec().input_space(),
            }
        }
        Err(_) => audit_output_light_sampled(ext, threshold, DEFAULT_AUDIT_SAMPLES, 0),
    }
}

/// Sampled estimate: draws inputs uniformly, enumerates up to `2^16` seeds
/// per input and scales the per-output hit counts to `2^n`.
pub fn audit_output_light_sampled<E: SeededExtractor + ?Sized>(
    ext: &E,
    threshold: u64,
    samples: u64,
    rng_seed: u64,
) -> OutputLightReport {
    let spec = *ext.spec();
    let mut rng = seeded(rng_seed);
    let seeds = spec.seed_space().min(1 << 16);
    let mut hits: std::collections::HashMap<u64, u64> = std::collections::HashMap::new();
    let mut seen = BTreeSet::new();
    let mut pair_total = 0;
    for _ in 0..samples {
        let x = rng.gen::<u64>() & mask(spec.n);
        seen.clear();
        for s in 0..seeds {
            seen.insert(ext.eval_raw(x, s));
            pair_total += 1;
        }
        for &z in &seen {
            *hits.entry(z).or_insert(0) += 1;
        }
    }
    let (witness_output, top) = hits.iter().fold((0u64, 0u64), |(bz, bc), (&z, &c)| {
        if c > bc || (c == bc && z < bz) {
            (z, c)
        } else {
            (bz, bc)
        }
    });
    let scale = spec.input_space() as f64 / samples.max(1) as f64;
    let max_preimages = (top as f64 * scale).round() as u64;
    OutputLightReport {
        max_preimages,
        witness_output,
        threshold,
        passed: max_preimages < threshold,
        mode: AuditMode::Sampled,
        certifying: false,
        stand_in: ext.kind().to_string(),
        pair_total,
        samples,
    }
}

/// Distribution of `Ext(X, U_d)` for `X` uniform on `support`.
pub fn output_dist<E: SeededExtractor + ?Sized>(ext: &E, support: &[u64]) -> Result<Dist> {
    let spec = ext.spec();
    let mut counts = vec![0u64; 1 << spec.m];
    for &x in support {
        for s in 0..spec.seed_space() {
            counts[ext.eval(x, s)? as usize] += 1;
        }
    }
    Dist::from_counts(spec.m, &counts)
}

/// Distribution of `(S, Ext(X, S))`, seed in the high bits.
pub fn strong_output_dist<E: SeededExtractor + ?Sized>(ext: &E, support: &[u64]) -> Result<Dist> {
    let spec = ext.spec();
    let mut counts = vec![0u64; 1 << (spec.m + spec.d)];
    for &x in support {
        for s in 0..spec.seed_space() {
            let z = ext.eval(x, s)?;
            counts[((s << spec.m) | z) as usize] += 1;
        }
    }
    Dist::from_counts(spec.m + spec.d, &counts)
}

/// Exact extraction error on the flat source uniform over `support`.
pub fn flat_source_error<E: SeededExtractor + ?Sized>(
    ext: &E,
    support: &[u64],
    strong: bool,
) -> Result<Prob> {
    let d = if strong {
        strong_output_dist(ext, support)?
    } else {
        output_dist(ext, support)?
    };
    Ok(tv_from_uniform_exact(&d))
}

/// Worst flat source found by randomized hill-climbing.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlatSearchResult {
    pub support: Vec<u64>,
    pub error: f64,
    pub evaluations: u64,
}

/// Search flat `2^k`-element sources maximizing the (strong) extraction
/// error: random restarts, then single-element swaps kept while they raise
/// the error.
pub fn worst_flat_source<E: SeededExtractor + ?Sized>(
    ext: &E,
    k: u32,
    strong: bool,
    restarts: u32,
    steps: u32,
    rng_seed: u64,
) -> Result<FlatSearchResult> {
    use rand::seq::SliceRandom;
    let spec = *ext.spec();
    if k > spec.n {
        return Err(Error::Domain(format!("k = {k} exceeds n = {}", spec.n)));
    }
    let size = 1usize << k;
    let universe: Vec<u64> = (0..spec.input_space()).collect();
    let mut rng = seeded(rng_seed);
    let score = |s: &[u64]| flat_source_error(ext, s, strong).map(|p| crate::dist::prob_to_f64(&p));
    let mut best = FlatSearchResult {
        support: Vec::new(),
        error: -1.0,
        evaluations: 0,
    };
    for _ in 0..restarts.max(1) {
        let mut pool = universe.clone();
        pool.shuffle(&mut rng);
        let (inside, outside) = pool.split_at_mut(size);
        let mut current = score(inside)?;
        best.evaluations += 1;
        for _ in 0..steps {
            if outside.is_empty() {
                break;
            }
            let i = rng.gen_range(0..inside.len());
            let j = rng.gen_range(0..outside.len());
            std::mem::swap(&mut inside[i], &mut outside[j]);
            let cand = score(inside)?;
            best.evaluations += 1;
            if cand >= current {
                current = cand;
            } else {
                std::mem::swap(&mut inside[i], &mut outside[j]);
            }
        }
        if current > best.error {
            let mut s = inside.to_vec();
            s.sort_unstable();
            best.support = s;
            best.error = current;
        }
    }
    Ok(best)
}

/// Leftover-hash bound `(1/2)·2^(−(k−m)/2)` on the strong error of a
/// universal family.
pub fn leftover_hash_bound(k: f64, m: f64) -> f64 {
    0.5 * (-(k - m) / 2.0).exp2()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::from_bitstr;

    #[test]
    fn toeplitz_convention() {
        let t = ToeplitzExt::new(2, 1).unwrap();
        let s = from_bitstr("10").unwrap();
        assert_eq!(t.row(s, 0), 0b10);
        assert_eq!(t.eval(from_bitstr("10").unwrap(), s).unwrap(), 1);
        assert_eq!(t.eval(from_bitstr("01").unwrap(), s).unwrap(), 0);
        let t = ToeplitzExt::new(3, 2).unwrap();
        let s = from_bitstr("1100").unwrap();
        assert_eq!(t.row(s, 0), 0b110);
        assert_eq!(t.row(s, 1), 0b011);
    }

    #[test]
    fn toeplitz_zero_seed_and_zero_input() {
        let t = ToeplitzExt::new(6, 3).unwrap();
        for x in 0..64 {
            assert_eq!(t.eval(x, 0).unwrap(), 0);
        }
        for s in 0..256 {
            assert_eq!(t.eval(0, s).unwrap(), 0);
        }
        assert!(t.eval(64, 0).is_err());
    }

    #[test]
    fn table_is_reproducible_and_matches_on_demand() {
        let spec = SeededExtSpec::new(6, 4, 3, 4.0, 0.25).unwrap();
        let a = TableExt::random(spec, 9).unwrap();
        let b = TableExt::random(spec, 9).unwrap();
        let c = TableExt::on_demand(spec, 9).unwrap();
        for x in 0..64 {
            for s in 0..16 {
                assert_eq!(a.eval_raw(x, s), b.eval_raw(x, s));
                assert_eq!(a.eval_raw(x, s), c.eval_raw(x, s));
                assert_eq!(a.entry(x, s), a.eval_raw(x, s));
            }
        }
        let big = SeededExtSpec::new(24, 4, 3, 4.0, 0.25).unwrap();
        assert!(matches!(
            TableExt::random(big, 1),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn output_light_extremes() {
        struct Constant(SeededExtSpec);
        impl SeededExtractor for Constant {
            fn spec(&self) -> &SeededExtSpec {
                &self.0
            }
            fn eval_raw(&self, _: u64, _: u64) -> u64 {
                0
            }
            fn kind(&self) -> &'static str {
                "constant"
            }
        }
        struct Identity(SeededExtSpec);
        impl SeededExtractor for Identity {
            fn spec(&self) -> &SeededExtSpec {
                &self.0
            }
            fn eval_raw(&self, x: u64, _: u64) -> u64 {
                x
            }
            fn kind(&self) -> &'static str {
                "identity"
            }
        }
        let spec = SeededExtSpec::new(5, 3, 5, 5.0, 0.0).unwrap();
        let r = audit_output_light(&Constant(spec), 10);
        assert_eq!(r.max_preimages, 32);
        assert!(!r.passed);
        assert_eq!(r.pair_total, 256);
        let r = audit_output_light(&Identity(spec), 2);
        assert_eq!(r.max_preimages, 1);
        assert!(r.passed);
    }

    #[test]
    fn extractor_json_roundtrip() {
        let spec = SeededExtSpec::new(6, 4, 3, 4.0, 0.25).unwrap();
        for e in [
            Extractor::Toeplitz(ToeplitzExt::new(6, 3).unwrap()),
            Extractor::Table(TableExt::random(spec, 77).unwrap()),
            Extractor::Keyed(KeyedMixExt::from_seed(spec, 5)),
        ] {
            let js = serde_json::to_string(&e).unwrap();
            let back: Extractor = serde_json::from_str(&js).unwrap();
            assert_eq!(back.kind(), e.kind());
            for x in 0..64 {
                for s in 0..e.spec().seed_space().min(16) {
                    assert_eq!(back.eval_raw(x, s), e.eval_raw(x, s));
                }
            }
        }
        let js =
            serde_json::to_value(Extractor::Table(TableExt::random(spec, 1).unwrap())).unwrap();
        assert_eq!(js["kind"], "table");
        assert_eq!(js["seed_material"], "0000000000000001");
    }

    #[test]
    fn leftover_hash_value() {
        assert_eq!(leftover_hash_bound(4.0, 2.0), 0.25);
    }
}
