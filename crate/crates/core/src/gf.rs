//! Arithmetic in GF(2^m) for `1 <= m <= 32` and limb-vector inner products.
//!
//! Elements are polynomials over GF(2) packed into the low `m` bits of a
//! `u64`. A vector of `r` limbs is stored little-endian: limb 0 holds the
//! lowest-order `m` bits of the packed bit string.

use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bits::mask;
use crate::{Error, Result};

pub const MAX_FIELD_BITS: u32 = 32;

/// Carryless product of two polynomials of degree < 32.
#[inline]
pub fn clmul(a: u64, b: u64) -> u64 {
    debug_assert!(a < (1 << 32) && b < (1 << 32));
    let mut acc = 0u64;
    let mut b = b;
    let mut shift = 0;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a << shift;
        }
        b >>= 1;
        shift += 1;
    }
    acc
}

#[inline]
fn degree(p: u64) -> i32 {
    63 - p.leading_zeros() as i32
}

/// Remainder of `a` modulo the non-zero polynomial `f`.
pub fn poly_rem(mut a: u64, f: u64) -> u64 {
    let df = degree(f);
    while a != 0 && degree(a) >= df {
        a ^= f << (degree(a) - df);
    }
    a
}

fn poly_gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = poly_rem(a, b);
        a = b;
        b = r;
    }
    a
}

fn mulmod(a: u64, b: u64, f: u64) -> u64 {
    poly_rem(clmul(a, b), f)
}

/// x^(2^j) mod f.
fn frobenius_x(j: u32, f: u64) -> u64 {
    let mut acc = poly_rem(0b10, f);
    for _ in 0..j {
        acc = mulmod(acc, acc, f);
    }
    acc
}

fn prime_factors(mut m: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut q = 2;
    while q * q <= m {
        if m % q == 0 {
            out.push(q);
            while m % q == 0 {
                m /= q;
            }
        }
        q += 1;
    }
    if m > 1 {
        out.push(m);
    }
    out
}

/// Rabin's irreducibility test for a polynomial of degree `m <= 32`.
pub fn is_irreducible(f: u64) -> bool {
    let m = degree(f);
    if m < 1 || m > MAX_FIELD_BITS as i32 {
        return false;
    }
    let m = m as u32;
    if frobenius_x(m, f) != poly_rem(0b10, f) {
        return false;
    }
    prime_factors(m).into_iter().all(|q| {
        let h = frobenius_x(m / q, f) ^ poly_rem(0b10, f);
        poly_gcd(f, h) == 1
    })
}

fn default_polys() -> &'static [u64; 33] {
    static TABLE: OnceLock<[u64; 33]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [0u64; 33];
        for m in 1..=MAX_FIELD_BITS {
            let top = 1u64 << m;
            t[m as usize] = (0..top)
                .step_by(2)
                .map(|low| top | low | 1)
                .find(|&f| is_irreducible(f))
                .expect("an irreducible polynomial exists in every degree");
        }
        t
    })
}

/// A field GF(2^m) given by its reduction polynomial.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldParams {
    m: u32,
    poly: u64,
}

impl fmt::Debug for FieldParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF(2^{}) mod {:#x}", self.m, self.poly)
    }
}

impl FieldParams {
    pub fn new(m: u32, poly: u64) -> Result<Self> {
        if !(1..=MAX_FIELD_BITS).contains(&m) {
            return Err(Error::Domain(format!("field width {m} outside 1..=32")));
        }
        if degree(poly) != m as i32 || poly & 1 == 0 {
            return Err(Error::Domain(format!(
                "{poly:#x} is not a degree-{m} polynomial with constant term"
            )));
        }
        if !is_irreducible(poly) {
            return Err(Error::Domain(format!("{poly:#x} is reducible")));
        }
        Ok(FieldParams { m, poly })
    }

    /// The lexicographically smallest irreducible polynomial of degree `m`.
    pub fn standard(m: u32) -> Result<Self> {
        if !(1..=MAX_FIELD_BITS).contains(&m) {
            return Err(Error::Domain(format!("field width {m} outside 1..=32")));
        }
        Ok(FieldParams {
            m,
            poly: default_polys()[m as usize],
        })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn poly(&self) -> u64 {
        self.poly
    }

    pub fn order(&self) -> u64 {
        1u64 << self.m
    }

    pub fn elem(&self, value: u64) -> Result<FieldElem> {
        if value > mask(self.m) {
            return Err(Error::OutOfRange {
                value,
                bits: self.m,
            });
        }
        Ok(FieldElem {
            value,
            params: *self,
        })
    }

    /// Field product on raw values; inputs must already be reduced.
    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        let mut p = clmul(a, b);
        let m = self.m as i32;
        let mut d = degree(p);
        while d >= m {
            p ^= self.poly << (d - m);
            d = degree(p);
        }
        p
    }

    pub fn pow(&self, a: u64, mut e: u64) -> u64 {
        let mut base = a;
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Inverse via `a^(2^m − 2)`.
    pub fn inv(&self, a: u64) -> Result<u64> {
        if a == 0 {
            return Err(Error::Domain("zero has no inverse".into()));
        }
        Ok(self.pow(a, self.order() - 2))
    }

    /// Σ u_i · v_i over raw limb values.
    #[inline]
    pub fn dot(&self, u: &[u64], v: &[u64]) -> u64 {
        u.iter()
            .zip(v)
            .fold(0, |acc, (&a, &b)| acc ^ self.mul(a, b))
    }
}

impl Serialize for FieldParams {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            m: u32,
            poly: String,
        }
        Repr {
            m: self.m,
            poly: format!("{:#x}", self.poly),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FieldParams {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            m: u32,
            poly: String,
        }
        let r = Repr::deserialize(d)?;
        let digits = r.poly.trim_start_matches("0x").trim_start_matches("0X");
        let poly = u64::from_str_radix(digits, 16).map_err(serde::de::Error::custom)?;
        FieldParams::new(r.m, poly).map_err(serde::de::Error::custom)
    }
}

/// An element of a specific field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FieldElem {
    value: u64,
    params: FieldParams,
}

impl FieldElem {
    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn params(&self) -> FieldParams {
        self.params
    }
}

fn same_field(a: &FieldElem, b: &FieldElem) -> Result<()> {
    if a.params != b.params {
        return Err(Error::Domain(format!(
            "field mismatch: {:?} vs {:?}",
            a.params, b.params
        )));
    }
    Ok(())
}

pub fn gf_mul(a: FieldElem, b: FieldElem) -> Result<FieldElem> {
    same_field(&a, &b)?;
    Ok(FieldElem {
        value: a.params.mul(a.value, b.value),
        params: a.params,
    })
}

pub fn gf_inv(a: FieldElem) -> Result<FieldElem> {
    Ok(FieldElem {
        value: a.params.inv(a.value)?,
        params: a.params,
    })
}

pub fn vec_inner_product(u: &[u64], v: &[u64], params: &FieldParams) -> Result<FieldElem> {
    if u.len() != v.len() {
        return Err(Error::Domain(format!(
            "limb vectors of length {} and {}",
            u.len(),
            v.len()
        )));
    }
    for &x in u.iter().chain(v) {
        if x > mask(params.m) {
            return Err(Error::OutOfRange {
                value: x,
                bits: params.m,
            });
        }
    }
    params.elem(params.dot(u, v))
}

/// Split a packed `r·m`-bit value into `r` little-endian limbs.
pub fn to_limbs(packed: u64, m: u32, r: usize) -> Vec<u64> {
    (0..r)
        .map(|i| (packed >> (i as u32 * m)) & mask(m))
        .collect()
}

pub fn from_limbs(limbs: &[u64], m: u32) -> u64 {
    limbs
        .iter()
        .enumerate()
        .fold(0, |acc, (i, &l)| acc | (l << (i as u32 * m)))
}

/// Inner product of two packed limb vectors.
#[inline]
pub fn packed_inner_product(params: &FieldParams, u: u64, v: u64, r: u32) -> u64 {
    let m = params.m;
    let mut acc = 0;
    for i in 0..r {
        let a = (u >> (i * m)) & mask(m);
        let b = (v >> (i * m)) & mask(m);
        acc ^= params.mul(a, b);
    }
    acc
}

/// Error bound `2^((n + m − k1 − k2)/2)` of the inner-product two-source
/// extractor over `GF(2^m)^(n/m)`.
pub fn ip_extractor_error(k1: f64, k2: f64, n: u32, m: u32) -> Result<f64> {
    if m == 0 || n % m != 0 {
        return Err(Error::Domain(format!("{m} does not divide {n}")));
    }
    Ok(((n as f64 + m as f64 - k1 - k2) / 2.0).exp2())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_fields() {
        let f1 = FieldParams::standard(1).unwrap();
        assert_eq!(f1.poly(), 0b11);
        for a in 0..2 {
            for b in 0..2 {
                assert_eq!(f1.mul(a, b), a & b);
            }
        }
        let f2 = FieldParams::standard(2).unwrap();
        assert_eq!(f2.poly(), 0b111);
        assert_eq!(f2.mul(0b10, 0b10), 0b11);
        assert_eq!(f2.inv(0b10).unwrap(), 0b11);
        assert_eq!(f2.inv(1).unwrap(), 1);
        assert!(f2.inv(0).is_err());
    }

    #[test]
    fn standard_polys_are_smallest() {
        assert_eq!(FieldParams::standard(4).unwrap().poly(), 0x13);
        assert_eq!(FieldParams::standard(8).unwrap().poly(), 0x11b);
        assert_eq!(FieldParams::standard(16).unwrap().poly(), 0x1002b);
    }

    #[test]
    fn reducible_rejected() {
        assert!(FieldParams::new(2, 0b101).is_err());
        assert!(FieldParams::new(8, 0x11d).is_ok());
        assert!(FieldParams::new(8, 0x100).is_err());
    }

    #[test]
    fn serde_shape() {
        let f = FieldParams::standard(8).unwrap();
        let js = serde_json::to_string(&f).unwrap();
        assert_eq!(js, r#"{"m":8,"poly":"0x11b"}"#);
        let back: FieldParams = serde_json::from_str(&js).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn ip_bound_examples() {
        assert_eq!(ip_extractor_error(4.0, 4.0, 4, 2).unwrap(), 0.5);
        assert_eq!(ip_extractor_error(8.0, 8.0, 8, 2).unwrap(), 2f64.powi(-3));
        assert!(ip_extractor_error(4.0, 4.0, 5, 2).is_err());
    }

    #[test]
    fn limbs_roundtrip() {
        let limbs = to_limbs(0b11_10_01_00, 2, 4);
        assert_eq!(limbs, vec![0, 1, 2, 3]);
        assert_eq!(from_limbs(&limbs, 2), 0b11_10_01_00);
    }
}
