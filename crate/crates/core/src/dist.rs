//! Exact finite distributions over `t`-bit outcomes and their entropy measures.
//!
//! Probabilities are held as exact rationals. Floating-point inputs are
//! converted exactly and renormalized, so every [`Dist`] sums to exactly one.
//! Entropies are reported in bits as `f64`; every comparison that decides a
//! pass/fail outcome is made on the exact rationals.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer};
use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};

use crate::bits::mask;
use crate::{Error, Result};

pub type Prob = BigRational;

/// Largest bit width for which a dense uniform distribution may be built.
pub const MAX_DENSE_BITS: u32 = 26;

/// Slack used when a real-valued bound is compared against an entropy.
pub const ENTROPY_SLACK: f64 = 1e-9;

pub fn ratio(num: u64, den: u64) -> Prob {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn prob_from_f64(x: f64) -> Result<Prob> {
    BigRational::from_float(x).ok_or_else(|| Error::Domain(format!("non-finite value {x}")))
}

/// `2^(-k)` as an exact rational when `k` is an integer, otherwise the exact
/// value of the nearest double.
pub fn pow2_neg(k: f64) -> Prob {
    if k.fract() == 0.0 && k.abs() < 4096.0 {
        let e = k as i64;
        if e >= 0 {
            BigRational::new(BigInt::one(), BigInt::one() << e as usize)
        } else {
            BigRational::from_integer(BigInt::one() << (-e) as usize)
        }
    } else {
        BigRational::from_float((-k).exp2()).unwrap_or_else(BigRational::zero)
    }
}

fn log2_bigint(x: &BigInt) -> f64 {
    debug_assert!(x.sign() == Sign::Plus);
    let bits = x.bits();
    if bits <= 64 {
        x.to_f64().unwrap_or(f64::INFINITY).log2()
    } else {
        let shift = bits - 64;
        let top: BigInt = x >> shift as usize;
        top.to_f64().unwrap_or(f64::INFINITY).log2() + shift as f64
    }
}

/// `log2` of a positive rational, robust to huge numerators/denominators.
pub fn log2_prob(p: &Prob) -> f64 {
    assert!(p.is_positive(), "log2 of non-positive probability");
    log2_bigint(p.numer()) - log2_bigint(p.denom())
}

pub fn prob_to_f64(p: &Prob) -> f64 {
    p.to_f64().unwrap_or(0.0)
}

/// Exact fraction string `p/q`.
pub fn prob_to_string(p: &Prob) -> String {
    format!("{}/{}", p.numer(), p.denom())
}

pub fn prob_from_str(s: &str) -> Result<Prob> {
    let s = s.trim();
    let parsed = if s.contains('/') {
        s.parse::<BigRational>().ok()
    } else {
        s.parse::<BigInt>().ok().map(BigRational::from_integer)
    };
    parsed.ok_or_else(|| Error::Parse(format!("bad probability {s:?}")))
}

/// A probability distribution over `t`-bit outcomes.
///
/// Zero-mass outcomes are not stored.
#[derive(Clone, PartialEq, Eq)]
pub struct Dist {
    bits: u32,
    mass: BTreeMap<u64, Prob>,
}

impl fmt::Debug for Dist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        for (x, p) in &self.mass {
            m.entry(x, &prob_to_string(p));
        }
        m.finish()?;
        write!(f, " over {} bits", self.bits)
    }
}

impl Dist {
    /// Validated constructor: outcomes in range, masses non-negative and
    /// summing to exactly one.
    pub fn new(bits: u32, mass: BTreeMap<u64, Prob>) -> Result<Self> {
        if bits > 64 {
            return Err(Error::InvalidDist(format!("bit width {bits} exceeds 64")));
        }
        let mut total = Prob::zero();
        let mut kept = BTreeMap::new();
        for (x, p) in mass {
            if x > mask(bits) {
                return Err(Error::OutOfRange { value: x, bits });
            }
            if p.is_negative() {
                return Err(Error::InvalidDist(format!("negative mass at {x}")));
            }
            total += &p;
            if !p.is_zero() {
                kept.insert(x, p);
            }
        }
        if !total.is_one() {
            return Err(Error::InvalidDist(format!(
                "masses sum to {} instead of 1",
                prob_to_string(&total)
            )));
        }
        Ok(Dist { bits, mass: kept })
    }

    /// Normalize non-negative integer weights.
    pub fn from_weights<I>(bits: u32, weights: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u64, u128)>,
    {
        let mut acc: BTreeMap<u64, u128> = BTreeMap::new();
        let mut total: u128 = 0;
        for (x, w) in weights {
            if x > mask(bits) {
                return Err(Error::OutOfRange { value: x, bits });
            }
            if w > 0 {
                *acc.entry(x).or_insert(0) += w;
                total += w;
            }
        }
        if total == 0 {
            return Err(Error::InvalidDist("all weights are zero".into()));
        }
        let den = BigInt::from(total);
        let mass = acc
            .into_iter()
            .map(|(x, w)| (x, BigRational::new(BigInt::from(w), den.clone())))
            .collect();
        Ok(Dist { bits, mass })
    }

    /// Dense count vector indexed by outcome.
    pub fn from_counts(bits: u32, counts: &[u64]) -> Result<Self> {
        Self::from_weights(
            bits,
            counts
                .iter()
                .enumerate()
                .map(|(x, &c)| (x as u64, c as u128)),
        )
    }

    /// Build from doubles. The masses must sum to one within `1e-12`; they
    /// are then converted exactly and renormalized.
    pub fn from_f64<I>(bits: u32, probs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u64, f64)>,
    {
        let mut acc: BTreeMap<u64, Prob> = BTreeMap::new();
        let mut float_total = 0.0f64;
        for (x, p) in probs {
            if !(p >= 0.0) || !p.is_finite() {
                return Err(Error::InvalidDist(format!("bad mass {p} at {x}")));
            }
            if x > mask(bits) {
                return Err(Error::OutOfRange { value: x, bits });
            }
            float_total += p;
            let e = acc.entry(x).or_insert_with(Prob::zero);
            *e += prob_from_f64(p)?;
        }
        if (float_total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDist(format!(
                "masses sum to {float_total}, not 1 within 1e-12"
            )));
        }
        let total: Prob = acc.values().cloned().sum();
        let mass = acc
            .into_iter()
            .filter(|(_, p)| !p.is_zero())
            .map(|(x, p)| (x, p / &total))
            .collect();
        Ok(Dist { bits, mass })
    }

    pub fn uniform(bits: u32) -> Result<Self> {
        if bits > MAX_DENSE_BITS {
            return Err(Error::too_large(
                "dense uniform distribution",
                bits,
                MAX_DENSE_BITS,
            ));
        }
        Self::uniform_on(bits, 0..(1u64 << bits))
    }

    pub fn uniform_on<I: IntoIterator<Item = u64>>(bits: u32, support: I) -> Result<Self> {
        Self::from_weights(bits, support.into_iter().map(|x| (x, 1u128)))
    }

    pub fn point(bits: u32, x: u64) -> Result<Self> {
        Self::from_weights(bits, [(x, 1u128)])
    }

    /// Convex combination `Σ w_i · D_i`; weights must sum to one.
    pub fn mixture<'a, I>(bits: u32, components: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a Prob, &'a Dist)>,
    {
        let mut acc: BTreeMap<u64, Prob> = BTreeMap::new();
        for (w, d) in components {
            if d.bits != bits {
                return Err(Error::WidthMismatch {
                    expected: bits,
                    actual: d.bits,
                });
            }
            for (x, p) in &d.mass {
                *acc.entry(*x).or_insert_with(Prob::zero) += w * p;
            }
        }
        Self::new(bits, acc)
    }

    /// Push the distribution through `f`.
    pub fn map<F: Fn(u64) -> u64>(&self, bits: u32, f: F) -> Result<Self> {
        let mut acc: BTreeMap<u64, Prob> = BTreeMap::new();
        for (x, p) in &self.mass {
            *acc.entry(f(*x)).or_insert_with(Prob::zero) += p;
        }
        Self::new(bits, acc)
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn prob(&self, x: u64) -> Prob {
        self.mass.get(&x).cloned().unwrap_or_else(Prob::zero)
    }

    pub fn prob_of<I: IntoIterator<Item = u64>>(&self, set: I) -> Prob {
        let set: BTreeSet<u64> = set.into_iter().collect();
        set.iter().filter_map(|x| self.mass.get(x)).sum()
    }

    pub fn support_len(&self) -> usize {
        self.mass.len()
    }

    pub fn support(&self) -> impl Iterator<Item = u64> + '_ {
        self.mass.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, &Prob)> {
        self.mass.iter().map(|(x, p)| (*x, p))
    }

    pub fn max_atom(&self) -> Prob {
        self.mass.values().max().cloned().unwrap_or_else(Prob::zero)
    }

    /// Atoms sorted by mass descending, ties by ascending outcome.
    pub fn atoms_descending(&self) -> Vec<(u64, Prob)> {
        let mut atoms: Vec<(u64, Prob)> = self.mass.iter().map(|(x, p)| (*x, p.clone())).collect();
        atoms.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        atoms
    }
}

impl Serialize for Dist {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        struct Mass<'a>(&'a BTreeMap<u64, Prob>);
        impl Serialize for Mass<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                let mut m = s.serialize_map(Some(self.0.len()))?;
                for (x, p) in self.0 {
                    m.serialize_entry(&x.to_string(), &prob_to_string(p))?;
                }
                m.end()
            }
        }
        let mut m = serializer.serialize_map(Some(2))?;
        m.serialize_entry("t", &self.bits)?;
        m.serialize_entry("mass", &Mass(&self.mass))?;
        m.end()
    }
}

impl<'de> Deserialize<'de> for Dist {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            t: u32,
            mass: BTreeMap<String, String>,
        }
        let repr = Repr::deserialize(deserializer)?;
        let mut mass = BTreeMap::new();
        for (k, v) in repr.mass {
            let x: u64 = k.parse().map_err(de::Error::custom)?;
            let p = prob_from_str(&v).map_err(de::Error::custom)?;
            mass.insert(x, p);
        }
        Dist::new(repr.t, mass).map_err(de::Error::custom)
    }
}

fn check_widths(p: &Dist, q: &Dist) -> Result<()> {
    if p.bits != q.bits {
        return Err(Error::WidthMismatch {
            expected: p.bits,
            actual: q.bits,
        });
    }
    Ok(())
}

/// Exact total-variation distance.
pub fn tv_distance_exact(p: &Dist, q: &Dist) -> Result<Prob> {
    check_widths(p, q)?;
    let keys: BTreeSet<u64> = p.mass.keys().chain(q.mass.keys()).copied().collect();
    let mut sum = Prob::zero();
    for x in keys {
        sum += (p.prob(x) - q.prob(x)).abs();
    }
    Ok(sum / BigRational::from_integer(BigInt::from(2)))
}

pub fn tv_distance(p: &Dist, q: &Dist) -> Result<f64> {
    tv_distance_exact(p, q).map(|d| prob_to_f64(&d))
}

/// TV distance from the uniform distribution over the full `t`-bit space,
/// computed without materializing the uniform distribution.
pub fn tv_from_uniform_exact(p: &Dist) -> Prob {
    let u = BigRational::new(BigInt::one(), BigInt::one() << p.bits as usize);
    let mut over = Prob::zero();
    for q in p.mass.values() {
        if *q > u {
            over += q - &u;
        }
    }
    over
}

pub fn min_entropy(p: &Dist) -> f64 {
    let top = p.max_atom();
    if top.is_zero() {
        return 0.0;
    }
    let h = -log2_prob(&top);
    if h == 0.0 {
        0.0
    } else {
        h
    }
}

/// Result of smoothing a distribution within TV distance `eps`.
#[derive(Clone, Debug, PartialEq)]
pub struct SmoothEntropyResult {
    pub entropy_bits: f64,
    pub cap: Prob,
    pub removed_mass: Prob,
}

impl Serialize for SmoothEntropyResult {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = serializer.serialize_map(Some(3))?;
        m.serialize_entry("entropy_bits", &self.entropy_bits)?;
        m.serialize_entry("cap", &prob_to_string(&self.cap))?;
        m.serialize_entry("removed_mass", &prob_to_string(&self.removed_mass))?;
        m.end()
    }
}

/// Σ max(p_i − cap, 0).
pub fn excess_above(p: &Dist, cap: &Prob) -> Prob {
    p.mass.values().filter(|q| *q > cap).map(|q| q - cap).sum()
}

/// Smooth min-entropy by water-filling.
///
/// The minimal cap `c ≥ 2^-t` with `Σ max(p_i − c, 0) ≤ eps` is found in
/// closed form on the sorted atoms; the mass removed above `c` fits below it
/// because `c ≥ 2^-t`.
pub fn smooth_min_entropy_exact(p: &Dist, eps: &Prob) -> SmoothEntropyResult {
    let floor = BigRational::new(BigInt::one(), BigInt::one() << p.bits as usize);
    let eps = if eps.is_negative() {
        Prob::zero()
    } else {
        eps.clone()
    };
    let cap = if excess_above(p, &floor) <= eps {
        floor
    } else {
        let atoms: Vec<Prob> = p.atoms_descending().into_iter().map(|(_, q)| q).collect();
        let mut prefix = Prob::zero();
        let mut found = None;
        for j in 0..atoms.len() {
            prefix += &atoms[j];
            let c = (&prefix - &eps) / BigRational::from_integer(BigInt::from(j as u64 + 1));
            let next = atoms.get(j + 1).cloned().unwrap_or_else(Prob::zero);
            if c >= next {
                found = Some(c);
                break;
            }
        }
        found.expect("water-filling always terminates on the last atom")
    };
    let removed_mass = excess_above(p, &cap);
    let h = -log2_prob(&cap);
    SmoothEntropyResult {
        entropy_bits: if h == 0.0 { 0.0 } else { h },
        cap,
        removed_mass,
    }
}

pub fn smooth_min_entropy(p: &Dist, eps: f64) -> SmoothEntropyResult {
    let e = BigRational::from_float(eps.max(0.0)).unwrap_or_else(Prob::zero);
    smooth_min_entropy_exact(p, &e)
}

/// A small set of outcomes carrying at least `eps` of the mass, witnessing
/// smooth min-entropy at most `k`.
///
/// Returns the heaviest-first prefix (ties by ascending outcome) reaching
/// mass `eps` when the smooth min-entropy is below `k`, or equals `k` with
/// the smoothing budget fully spent. When the entropy equals `k` only
/// because the cap sits on the `2^-t` floor, no heavy set exists and `None`
/// is returned. `eps` must lie in `(0, 1)`.
pub fn heavy_set(p: &Dist, k: f64, eps: f64) -> Option<BTreeSet<u64>> {
    if !(eps > 0.0 && eps < 1.0) {
        return None;
    }
    let eps_q = BigRational::from_float(eps)?;
    let smooth = smooth_min_entropy_exact(p, &eps_q);
    let threshold = pow2_neg(k);
    let qualifies =
        smooth.cap > threshold || (smooth.cap == threshold && smooth.removed_mass == eps_q);
    if !qualifies {
        return None;
    }
    let mut chosen = BTreeSet::new();
    let mut acc = Prob::zero();
    for (x, q) in p.atoms_descending() {
        if acc >= eps_q {
            break;
        }
        acc += q;
        chosen.insert(x);
    }
    let size_ok = (chosen.len() as f64) < k.exp2();
    (acc >= eps_q && size_ok).then_some(chosen)
}

/// Outcome of the TV-distance lower-bound check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundCheck {
    pub bound: f64,
    pub holds: bool,
    pub hit_prob: String,
    pub smooth_entropy: f64,
}

/// If `Pr[P ∈ S] = p > eps` then the smooth min-entropy of `P` is at most
/// `log2(|S| / (p − eps))`. Returns the bound and whether the exact smooth
/// entropy respects it.
pub fn tv_entropy_bound_check(p: &Dist, set: &BTreeSet<u64>, eps: f64) -> Result<BoundCheck> {
    let eps_q = prob_from_f64(eps)?;
    let hit = p.prob_of(set.iter().copied());
    if hit <= eps_q {
        return Err(Error::Domain(format!(
            "Pr[S] = {} does not exceed eps = {eps}",
            prob_to_string(&hit)
        )));
    }
    let bound = (set.len() as f64).log2() - log2_prob(&(&hit - &eps_q));
    let smooth = smooth_min_entropy_exact(p, &eps_q);
    Ok(BoundCheck {
        bound,
        holds: smooth.entropy_bits <= bound + ENTROPY_SLACK,
        hit_prob: prob_to_string(&hit),
        smooth_entropy: smooth.entropy_bits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn dist2(ps: [f64; 4]) -> Dist {
        Dist::from_f64(2, ps.iter().enumerate().map(|(i, p)| (i as u64, *p))).unwrap()
    }

    #[test]
    fn tv_examples() {
        let u = Dist::uniform(2).unwrap();
        let pt = Dist::point(2, 0).unwrap();
        assert_eq!(tv_distance(&u, &u).unwrap(), 0.0);
        assert_eq!(tv_distance_exact(&pt, &u).unwrap(), ratio(3, 4));
        assert_eq!(tv_from_uniform_exact(&pt), ratio(3, 4));
        let other = Dist::uniform(3).unwrap();
        assert!(matches!(
            tv_distance(&u, &other),
            Err(Error::WidthMismatch { .. })
        ));
    }

    #[test]
    fn min_entropy_examples() {
        assert_eq!(min_entropy(&Dist::uniform(5).unwrap()), 5.0);
        assert_eq!(min_entropy(&Dist::point(3, 2).unwrap()), 0.0);
        assert_eq!(min_entropy(&dist2([0.5, 0.25, 0.25, 0.0])), 1.0);
    }

    #[test]
    fn smoothing_point_mass() {
        let pt = Dist::point(2, 1).unwrap();
        let r = smooth_min_entropy(&pt, 0.25);
        assert_eq!(r.cap, ratio(3, 4));
        assert_eq!(r.removed_mass, ratio(1, 4));
        assert!(close(r.entropy_bits, -(0.75f64).log2(), 1e-12));
        let r0 = smooth_min_entropy(&dist2([0.5, 0.25, 0.25, 0.0]), 0.0);
        assert_eq!(r0.entropy_bits, 1.0);
    }

    #[test]
    fn smoothing_hits_floor() {
        let u = Dist::uniform(3).unwrap();
        let r = smooth_min_entropy(&u, 0.3);
        assert_eq!(r.cap, ratio(1, 8));
        assert!(r.removed_mass.is_zero());
        assert_eq!(r.entropy_bits, 3.0);
    }

    #[test]
    fn heavy_set_examples() {
        let pt = Dist::point(2, 3).unwrap();
        assert_eq!(heavy_set(&pt, 1.0, 0.5), Some(BTreeSet::from([3])));
        let u = Dist::uniform(3).unwrap();
        assert_eq!(heavy_set(&u, 3.0, 0.1), None);
        let skew = dist2([0.7, 0.1, 0.1, 0.1]);
        let d = heavy_set(&skew, 2.0, 0.2).unwrap();
        assert_eq!(d, BTreeSet::from([0]));
    }

    #[test]
    fn bound_check_examples() {
        let u = Dist::uniform(2).unwrap();
        let all: BTreeSet<u64> = (0..4).collect();
        let c = tv_entropy_bound_check(&u, &all, 0.0).unwrap();
        assert_eq!(c.bound, 2.0);
        assert!(c.holds);
        let pt = Dist::point(2, 0).unwrap();
        let c = tv_entropy_bound_check(&pt, &BTreeSet::from([0]), 0.25).unwrap();
        assert!(close(c.bound, (1.0f64 / 0.75).log2(), 1e-12));
        assert!(c.holds);
        assert!(tv_entropy_bound_check(&pt, &BTreeSet::from([1]), 0.25).is_err());
    }

    #[test]
    fn json_roundtrip_is_exact() {
        let d = Dist::from_weights(3, [(5, 3), (1, 13)]).unwrap();
        let js = serde_json::to_string(&d).unwrap();
        assert_eq!(js, r#"{"t":3,"mass":{"1":"13/16","5":"3/16"}}"#);
        let back: Dist = serde_json::from_str(&js).unwrap();
        assert_eq!(back, d);
        let bad = r#"{"t":1,"mass":{"0":"1/2"}}"#;
        assert!(serde_json::from_str::<Dist>(bad).is_err());
    }

    #[test]
    fn float_input_must_sum_to_one() {
        assert!(Dist::from_f64(1, [(0, 0.5), (1, 0.4)]).is_err());
        let d = Dist::from_f64(1, [(0, 0.1), (1, 0.9)]).unwrap();
        let total: Prob = d.iter().map(|(_, p)| p.clone()).sum();
        assert!(total.is_one());
    }

    #[test]
    fn log2_of_tiny_rational() {
        let tiny = BigRational::new(BigInt::one(), BigInt::one() << 3000usize);
        assert_eq!(log2_prob(&tiny), -3000.0);
    }
}

/// `#[serde(with = "prob_serde")]` for fields holding a [`Prob`] as `"p/q"`.
pub mod prob_serde {
    use super::{prob_from_str, prob_to_string, Prob};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(p: &Prob, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&prob_to_string(p))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Prob, D::Error> {
        let s = String::deserialize(d)?;
        prob_from_str(&s).map_err(serde::de::Error::custom)
    }
}
