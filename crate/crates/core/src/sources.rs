//! Block sources and candidate functions on them.
//!
//! A source has `ell` blocks of `n` bits. Good blocks are independent and
//! uniform; every other block is produced by a deterministic adversary.
//! In a fixed-index SHELA source ([`FiShelaDesc`]) an adversarial block sees
//! only the blocks before it. In a NOSF source ([`NosfDesc`]) it sees all
//! good blocks. A SHELA source ([`ShelaDesc`]) first draws the good index
//! tuple and then runs the adversary registered for that tuple.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{Read, Write};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::{mask, pack, slice, unpack_into};
use crate::dist::{prob_from_str, prob_to_string, Dist, Prob};
use crate::{Error, Result};

/// Largest number of uniformly random bits enumerated exactly.
pub const MAX_ENUM_BITS: u32 = 26;

type Callback = Arc<dyn Fn(u64) -> u64 + Send + Sync>;

#[derive(Clone)]
enum FnRepr {
    Dense(Arc<Vec<u32>>),
    Callback(Callback),
}

/// A function `f: ({0,1}^n)^ell → {0,1}^t` on packed block tuples.
#[derive(Clone)]
pub struct BlockFunctionTable {
    n: u32,
    ell: u32,
    t: u32,
    repr: FnRepr,
}

impl fmt::Debug for BlockFunctionTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.repr {
            FnRepr::Dense(_) => "dense",
            FnRepr::Callback(_) => "callback",
        };
        write!(
            f,
            "BlockFunctionTable(n={}, ell={}, t={}, {kind})",
            self.n, self.ell, self.t
        )
    }
}

fn check_shape(n: u32, ell: u32, t: u32) -> Result<()> {
    if n == 0 || ell == 0 || n * ell > 64 || t > 32 {
        return Err(Error::Domain(format!(
            "unsupported shape n={n} ell={ell} t={t} (need n·ell <= 64, t <= 32)"
        )));
    }
    Ok(())
}

impl BlockFunctionTable {
    pub fn from_table(n: u32, ell: u32, t: u32, table: Vec<u32>) -> Result<Self> {
        check_shape(n, ell, t)?;
        let bits = n * ell;
        if bits > MAX_ENUM_BITS {
            return Err(Error::too_large(
                "dense function table",
                bits,
                MAX_ENUM_BITS,
            ));
        }
        if table.len() as u64 != 1u64 << bits {
            return Err(Error::Domain(format!(
                "table has {} entries, expected 2^{bits}",
                table.len()
            )));
        }
        if let Some(v) = table.iter().find(|&&v| v as u64 > mask(t)) {
            return Err(Error::OutOfRange {
                value: *v as u64,
                bits: t,
            });
        }
        Ok(BlockFunctionTable {
            n,
            ell,
            t,
            repr: FnRepr::Dense(Arc::new(table)),
        })
    }

    /// Wrap a closure; outputs are masked to `t` bits.
    pub fn from_fn<F>(n: u32, ell: u32, t: u32, f: F) -> Result<Self>
    where
        F: Fn(u64) -> u64 + Send + Sync + 'static,
    {
        check_shape(n, ell, t)?;
        let m = mask(t);
        Ok(BlockFunctionTable {
            n,
            ell,
            t,
            repr: FnRepr::Callback(Arc::new(move |x| f(x) & m)),
        })
    }

    /// Tabulate a closure into a dense table.
    pub fn tabulate<F>(n: u32, ell: u32, t: u32, f: F) -> Result<Self>
    where
        F: Fn(u64) -> u64 + Sync,
    {
        check_shape(n, ell, t)?;
        let bits = n * ell;
        if bits > MAX_ENUM_BITS {
            return Err(Error::too_large(
                "dense function table",
                bits,
                MAX_ENUM_BITS,
            ));
        }
        let m = mask(t);
        let table = (0..1u64 << bits)
            .into_par_iter()
            .map(|x| (f(x) & m) as u32)
            .collect();
        Self::from_table(n, ell, t, table)
    }

    pub fn random<R: Rng + ?Sized>(n: u32, ell: u32, t: u32, rng: &mut R) -> Result<Self> {
        check_shape(n, ell, t)?;
        let bits = n * ell;
        if bits > MAX_ENUM_BITS {
            return Err(Error::too_large(
                "dense function table",
                bits,
                MAX_ENUM_BITS,
            ));
        }
        let m = mask(t);
        let table = (0..1u64 << bits)
            .map(|_| (rng.gen::<u64>() & m) as u32)
            .collect();
        Self::from_table(n, ell, t, table)
    }

    pub fn constant(n: u32, ell: u32, t: u32, value: u64) -> Result<Self> {
        if value > mask(t) {
            return Err(Error::OutOfRange { value, bits: t });
        }
        Self::from_fn(n, ell, t, move |_| value)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn input_bits(&self) -> u32 {
        self.n * self.ell
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.repr, FnRepr::Dense(_))
    }

    #[inline]
    pub fn eval(&self, packed: u64) -> u64 {
        match &self.repr {
            FnRepr::Dense(t) => t[packed as usize] as u64,
            FnRepr::Callback(f) => f(packed),
        }
    }

    pub fn eval_blocks(&self, blocks: &[u64]) -> Result<u64> {
        if blocks.len() != self.ell as usize {
            return Err(Error::Domain(format!(
                "expected {} blocks, got {}",
                self.ell,
                blocks.len()
            )));
        }
        if let Some(&b) = blocks.iter().find(|&&b| b > mask(self.n)) {
            return Err(Error::OutOfRange {
                value: b,
                bits: self.n,
            });
        }
        Ok(self.eval(pack(blocks, self.n)))
    }

    /// Same function viewed with a different block split of the same bits.
    pub fn reblock(&self, n: u32, ell: u32) -> Result<Self> {
        if n * ell != self.n * self.ell {
            return Err(Error::Domain(format!(
                "cannot view {}×{} bits as {n}×{ell}",
                self.ell, self.n
            )));
        }
        check_shape(n, ell, self.t)?;
        Ok(BlockFunctionTable {
            n,
            ell,
            t: self.t,
            repr: self.repr.clone(),
        })
    }

    pub fn to_dense(&self) -> Result<Self> {
        match self.repr {
            FnRepr::Dense(_) => Ok(self.clone()),
            FnRepr::Callback(_) => Self::tabulate(self.n, self.ell, self.t, |x| self.eval(x)),
        }
    }

    /// Bytes per entry of the function-file format.
    pub fn entry_bytes(t: u32) -> usize {
        (t as usize).div_ceil(8).max(1)
    }

    /// Write the raw function file: `2^(n·ell)` little-endian entries of
    /// `ceil(t/8)` bytes, indexed by the packed input.
    pub fn write_raw<W: Write>(&self, mut w: W) -> Result<()> {
        let width = Self::entry_bytes(self.t);
        let total = 1u64 << self.input_bits().min(MAX_ENUM_BITS);
        if self.input_bits() > MAX_ENUM_BITS {
            return Err(Error::too_large(
                "function file",
                self.input_bits(),
                MAX_ENUM_BITS,
            ));
        }
        let mut buf = Vec::with_capacity(total as usize * width);
        for x in 0..total {
            buf.extend_from_slice(&self.eval(x).to_le_bytes()[..width]);
        }
        w.write_all(&buf).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn read_raw<R: Read>(n: u32, ell: u32, t: u32, mut r: R) -> Result<Self> {
        check_shape(n, ell, t)?;
        let width = Self::entry_bytes(t);
        let mut buf = Vec::new();
        r.read_to_end(&mut buf)
            .map_err(|e| Error::Parse(e.to_string()))?;
        let bits = n * ell;
        if bits > MAX_ENUM_BITS {
            return Err(Error::too_large("function file", bits, MAX_ENUM_BITS));
        }
        let expected = (1usize << bits) * width;
        if buf.len() != expected {
            return Err(Error::Parse(format!(
                "function file has {} bytes, expected {expected}",
                buf.len()
            )));
        }
        let table = buf
            .chunks_exact(width)
            .map(|c| {
                let mut b = [0u8; 8];
                b[..width].copy_from_slice(c);
                u64::from_le_bytes(b) as u32
            })
            .collect();
        Self::from_table(n, ell, t, table)
    }
}

/// How a non-good block is produced.
#[derive(Clone)]
pub enum BadBlock {
    /// A constant value.
    Fixed(u64),
    /// A table over the packed values of the blocks read by the adversary.
    Adaptive(Vec<u64>),
    /// The same kind of map given as a closure; not serializable.
    Computed(Callback),
}

impl fmt::Debug for BadBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BadBlock::Fixed(v) => write!(f, "Fixed({v})"),
            BadBlock::Adaptive(t) => write!(f, "Adaptive({} entries)", t.len()),
            BadBlock::Computed(_) => write!(f, "Computed"),
        }
    }
}

impl PartialEq for BadBlock {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (BadBlock::Fixed(a), BadBlock::Fixed(b)) => a == b,
            (BadBlock::Adaptive(a), BadBlock::Adaptive(b)) => a == b,
            _ => false,
        }
    }
}

impl BadBlock {
    #[inline]
    pub fn resolve(&self, domain_value: u64) -> u64 {
        match self {
            BadBlock::Fixed(v) => *v,
            BadBlock::Adaptive(t) => t[domain_value as usize],
            BadBlock::Computed(f) => f(domain_value),
        }
    }

    /// Replace a closure by its table over a domain of `domain_bits` bits.
    pub fn tabulated(&self, domain_bits: u32) -> Result<BadBlock> {
        match self {
            BadBlock::Computed(f) => {
                if domain_bits > MAX_ENUM_BITS {
                    return Err(Error::too_large(
                        "adversary table",
                        domain_bits,
                        MAX_ENUM_BITS,
                    ));
                }
                Ok(BadBlock::Adaptive(
                    (0..1u64 << domain_bits).map(|x| f(x)).collect(),
                ))
            }
            other => Ok(other.clone()),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum BadBlockRepr {
    Fixed(u64),
    Adaptive(Vec<u64>),
}

impl Serialize for BadBlock {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            BadBlock::Fixed(v) => BadBlockRepr::Fixed(*v).serialize(s),
            BadBlock::Adaptive(t) => BadBlockRepr::Adaptive(t.clone()).serialize(s),
            BadBlock::Computed(_) => Err(serde::ser::Error::custom(
                "computed adversaries must be tabulated before serialization",
            )),
        }
    }
}

impl<'de> Deserialize<'de> for BadBlock {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(match BadBlockRepr::deserialize(d)? {
            BadBlockRepr::Fixed(v) => BadBlock::Fixed(v),
            BadBlockRepr::Adaptive(t) => BadBlock::Adaptive(t),
        })
    }
}

fn check_good(ell: u32, good: &[usize]) -> Result<()> {
    if good.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain(
            "good indices must be strictly increasing".into(),
        ));
    }
    if good.iter().any(|&i| i >= ell as usize) {
        return Err(Error::Domain(format!(
            "good index out of range for {ell} blocks"
        )));
    }
    Ok(())
}

fn check_bad_table(i: usize, b: &BadBlock, n: u32, domain_bits: u32) -> Result<()> {
    match b {
        BadBlock::Fixed(v) if *v > mask(n) => Err(Error::OutOfRange { value: *v, bits: n }),
        BadBlock::Adaptive(t) => {
            if domain_bits > MAX_ENUM_BITS || t.len() as u64 != 1u64 << domain_bits {
                return Err(Error::Domain(format!(
                    "adversary table for block {i} has {} entries, expected 2^{domain_bits}",
                    t.len()
                )));
            }
            if let Some(v) = t.iter().find(|&&v| v > mask(n)) {
                return Err(Error::OutOfRange { value: *v, bits: n });
            }
            Ok(())
        }
        _ => Ok(()),
    }
}

/// Fixed-index SHELA source: adversarial block `i` reads blocks `0..i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiShelaDesc {
    n: u32,
    ell: u32,
    good: Vec<usize>,
    bad: BTreeMap<usize, BadBlock>,
}

impl FiShelaDesc {
    pub fn new(n: u32, ell: u32, good: Vec<usize>, bad: BTreeMap<usize, BadBlock>) -> Result<Self> {
        check_shape(n, ell, 0)?;
        check_good(ell, &good)?;
        let good_set: BTreeSet<usize> = good.iter().copied().collect();
        for i in 0..ell as usize {
            match (good_set.contains(&i), bad.get(&i)) {
                (true, Some(_)) => {
                    return Err(Error::Domain(format!(
                        "block {i} is both good and adversarial"
                    )))
                }
                (false, None) => return Err(Error::Domain(format!("block {i} has no adversary"))),
                (false, Some(b)) => check_bad_table(i, b, n, n * i as u32)?,
                (true, None) => {}
            }
        }
        if bad.keys().any(|&i| i >= ell as usize) {
            return Err(Error::Domain(
                "adversary registered past the last block".into(),
            ));
        }
        Ok(FiShelaDesc { n, ell, good, bad })
    }

    /// All blocks good.
    pub fn uniform(n: u32, ell: u32) -> Result<Self> {
        Self::new(n, ell, (0..ell as usize).collect(), BTreeMap::new())
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    pub fn g(&self) -> usize {
        self.good.len()
    }

    pub fn good(&self) -> &[usize] {
        &self.good
    }

    pub fn bad(&self) -> &BTreeMap<usize, BadBlock> {
        &self.bad
    }

    /// Fill `out` with the block tuple for the given good-block values.
    #[inline]
    pub fn resolve(&self, good_values: &[u64], out: &mut [u64]) {
        let mut next_good = 0;
        let mut prefix = 0u64;
        for i in 0..self.ell as usize {
            let v = if next_good < self.good.len() && self.good[next_good] == i {
                next_good += 1;
                good_values[next_good - 1]
            } else {
                self.bad[&i].resolve(prefix)
            };
            out[i] = v;
            prefix = (prefix << self.n) | v;
        }
    }

    /// Replace closures by tables.
    pub fn tabulated(&self) -> Result<Self> {
        let bad = self
            .bad
            .iter()
            .map(|(&i, b)| Ok((i, b.tabulated(self.n * i as u32)?)))
            .collect::<Result<_>>()?;
        Self::new(self.n, self.ell, self.good.clone(), bad)
    }

    /// Prepend constant blocks; adversary tables are lifted to ignore them.
    pub fn prepend_fixed(&self, fixed: &[u64]) -> Result<Self> {
        let shift = fixed.len();
        let mut bad: BTreeMap<usize, BadBlock> = fixed
            .iter()
            .enumerate()
            .map(|(i, &v)| (i, BadBlock::Fixed(v)))
            .collect();
        for (&i, b) in &self.bad {
            let lifted = match b {
                BadBlock::Adaptive(t) => {
                    let local_bits = self.n * i as u32;
                    let bits = self.n * (i + shift) as u32;
                    if bits > MAX_ENUM_BITS {
                        return Err(Error::too_large(
                            "lifted adversary table",
                            bits,
                            MAX_ENUM_BITS,
                        ));
                    }
                    let m = mask(local_bits);
                    BadBlock::Adaptive((0..1u64 << bits).map(|p| t[(p & m) as usize]).collect())
                }
                other => other.clone(),
            };
            bad.insert(i + shift, lifted);
        }
        let good = self.good.iter().map(|&i| i + shift).collect();
        Self::new(self.n, self.ell + shift as u32, good, bad)
    }
}

/// NOSF source: adversarial blocks read the tuple of all good blocks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NosfDesc {
    n: u32,
    ell: u32,
    good: Vec<usize>,
    bad: BTreeMap<usize, BadBlock>,
}

impl NosfDesc {
    pub fn new(n: u32, ell: u32, good: Vec<usize>, bad: BTreeMap<usize, BadBlock>) -> Result<Self> {
        check_shape(n, ell, 0)?;
        check_good(ell, &good)?;
        let domain = n * good.len() as u32;
        let good_set: BTreeSet<usize> = good.iter().copied().collect();
        for i in 0..ell as usize {
            match (good_set.contains(&i), bad.get(&i)) {
                (true, Some(_)) => {
                    return Err(Error::Domain(format!(
                        "block {i} is both good and adversarial"
                    )))
                }
                (false, None) => return Err(Error::Domain(format!("block {i} has no adversary"))),
                (false, Some(b)) => check_bad_table(i, b, n, domain)?,
                (true, None) => {}
            }
        }
        Ok(NosfDesc { n, ell, good, bad })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    pub fn g(&self) -> usize {
        self.good.len()
    }

    pub fn good(&self) -> &[usize] {
        &self.good
    }

    pub fn bad(&self) -> &BTreeMap<usize, BadBlock> {
        &self.bad
    }

    #[inline]
    pub fn resolve(&self, good_values: &[u64], out: &mut [u64]) {
        let key = pack(good_values, self.n);
        let mut next_good = 0;
        for (i, slot) in out.iter_mut().enumerate().take(self.ell as usize) {
            *slot = if next_good < self.good.len() && self.good[next_good] == i {
                next_good += 1;
                good_values[next_good - 1]
            } else {
                self.bad[&i].resolve(key)
            };
        }
    }

    /// True when every adversarial block comes after every good block it
    /// could read, i.e. the declared dependencies respect the block order.
    pub fn is_prefix_structured(&self) -> bool {
        let last_good = self.good.last().copied();
        self.bad.iter().all(|(&i, b)| match b {
            BadBlock::Fixed(_) => true,
            _ => last_good.map_or(true, |g| g < i),
        })
    }

    /// Re-express as a fixed-index SHELA source when structurally possible.
    pub fn as_fishela(&self) -> Option<FiShelaDesc> {
        if !self.is_prefix_structured() {
            return None;
        }
        let n = self.n;
        let good = self.good.clone();
        let mut bad = BTreeMap::new();
        for (&i, b) in &self.bad {
            let lifted = match b {
                BadBlock::Fixed(v) => BadBlock::Fixed(*v),
                other => {
                    let bits = n * i as u32;
                    if bits > MAX_ENUM_BITS {
                        return None;
                    }
                    let table = (0..1u64 << bits)
                        .map(|p| {
                            let vals: Vec<u64> = good
                                .iter()
                                .map(|&j| slice(p, bits, n * j as u32, n))
                                .collect();
                            other.resolve(pack(&vals, n))
                        })
                        .collect();
                    BadBlock::Adaptive(table)
                }
            };
            bad.insert(i, lifted);
        }
        FiShelaDesc::new(n, self.ell, good, bad).ok()
    }

    /// Prepend constant blocks.
    pub fn prepend_fixed(&self, fixed: &[u64]) -> Result<Self> {
        let shift = fixed.len();
        let mut bad: BTreeMap<usize, BadBlock> = fixed
            .iter()
            .enumerate()
            .map(|(i, &v)| (i, BadBlock::Fixed(v)))
            .collect();
        for (&i, b) in &self.bad {
            bad.insert(i + shift, b.clone());
        }
        let good = self.good.iter().map(|&i| i + shift).collect();
        Self::new(self.n, self.ell + shift as u32, good, bad)
    }
}

/// Either kind of deterministic-adversary source.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Source {
    Fishela(FiShelaDesc),
    Nosf(NosfDesc),
}

impl From<FiShelaDesc> for Source {
    fn from(d: FiShelaDesc) -> Self {
        Source::Fishela(d)
    }
}

impl From<NosfDesc> for Source {
    fn from(d: NosfDesc) -> Self {
        Source::Nosf(d)
    }
}

impl Source {
    pub fn n(&self) -> u32 {
        match self {
            Source::Fishela(d) => d.n,
            Source::Nosf(d) => d.n,
        }
    }

    pub fn ell(&self) -> u32 {
        match self {
            Source::Fishela(d) => d.ell,
            Source::Nosf(d) => d.ell,
        }
    }

    pub fn good(&self) -> &[usize] {
        match self {
            Source::Fishela(d) => &d.good,
            Source::Nosf(d) => &d.good,
        }
    }

    #[inline]
    pub fn resolve(&self, good_values: &[u64], out: &mut [u64]) {
        match self {
            Source::Fishela(d) => d.resolve(good_values, out),
            Source::Nosf(d) => d.resolve(good_values, out),
        }
    }

    pub fn prepend_fixed(&self, fixed: &[u64]) -> Result<Self> {
        Ok(match self {
            Source::Fishela(d) => Source::Fishela(d.prepend_fixed(fixed)?),
            Source::Nosf(d) => Source::Nosf(d.prepend_fixed(fixed)?),
        })
    }

    /// The source as a fixed-index SHELA source, if it is one structurally.
    pub fn as_fishela(&self) -> Option<FiShelaDesc> {
        match self {
            Source::Fishela(d) => Some(d.clone()),
            Source::Nosf(d) => d.as_fishela(),
        }
    }

    fn good_bits(&self) -> u32 {
        self.n() * self.good().len() as u32
    }
}

/// Enumerate all good-block assignments in parallel, folding the packed
/// block tuples through `visit`.
fn enumerate_tuples<A, F, M>(
    src: &Source,
    init: impl Fn() -> A + Sync + Send,
    visit: F,
    merge: M,
) -> Result<A>
where
    A: Send,
    F: Fn(&mut A, u64) + Sync + Send,
    M: Fn(A, A) -> A + Sync + Send,
{
    let bits = src.good_bits();
    if bits > MAX_ENUM_BITS {
        return Err(Error::too_large(
            "good-block enumeration",
            bits,
            MAX_ENUM_BITS,
        ));
    }
    let g = src.good().len();
    let ell = src.ell() as usize;
    let n = src.n();
    let total = 1u64 << bits;
    let chunk = 1u64 << bits.min(12);
    let acc = (0..total.div_ceil(chunk))
        .into_par_iter()
        .fold(
            || (init(), vec![0u64; g], vec![0u64; ell]),
            |(mut acc, mut goods, mut blocks), c| {
                let lo = c * chunk;
                for a in lo..(lo + chunk).min(total) {
                    unpack_into(a, n, &mut goods);
                    src.resolve(&goods, &mut blocks);
                    visit(&mut acc, pack(&blocks, n));
                }
                (acc, goods, blocks)
            },
        )
        .map(|(a, _, _)| a)
        .reduce(&init, &merge);
    Ok(acc)
}

fn check_fn_matches(f: &BlockFunctionTable, n: u32, ell: u32) -> Result<()> {
    if f.n != n || f.ell != ell {
        return Err(Error::Domain(format!(
            "function expects {}×{} bits, source has {ell}×{n}",
            f.ell, f.n
        )));
    }
    Ok(())
}

/// Exact distribution of `f(X)`.
pub fn exact_output_dist(f: &BlockFunctionTable, src: &Source) -> Result<Dist> {
    check_fn_matches(f, src.n(), src.ell())?;
    let t = f.t;
    if t <= 20 {
        let size = 1usize << t;
        let counts = enumerate_tuples(
            src,
            || vec![0u64; size],
            |acc, x| acc[f.eval(x) as usize] += 1,
            |mut a, b| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                a
            },
        )?;
        Dist::from_counts(t, &counts)
    } else {
        let counts = enumerate_tuples(
            src,
            BTreeMap::<u64, u64>::new,
            |acc, x| *acc.entry(f.eval(x)).or_insert(0) += 1,
            |mut a, b| {
                for (k, v) in b {
                    *a.entry(k).or_insert(0) += v;
                }
                a
            },
        )?;
        Dist::from_weights(t, counts.into_iter().map(|(k, v)| (k, v as u128)))
    }
}

/// Exact joint distribution of the packed block tuple.
pub fn joint_dist(src: &Source) -> Result<Dist> {
    let bits = src.n() * src.ell();
    let counts = enumerate_tuples(
        src,
        BTreeMap::<u64, u64>::new,
        |acc, x| *acc.entry(x).or_insert(0) += 1,
        |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            a
        },
    )?;
    Dist::from_weights(bits, counts.into_iter().map(|(k, v)| (k, v as u128)))
}

/// One draw of the block tuple.
pub fn sample<R: Rng + ?Sized>(src: &Source, rng: &mut R) -> Vec<u64> {
    let n = src.n();
    let goods: Vec<u64> = src
        .good()
        .iter()
        .map(|_| rng.gen::<u64>() & mask(n))
        .collect();
    let mut blocks = vec![0u64; src.ell() as usize];
    src.resolve(&goods, &mut blocks);
    blocks
}

/// Whether, in the joint distribution `joint` of `ell` blocks of `n` bits,
/// each block in `indices` has min-entropy at least `k` conditioned on every
/// reachable value of the blocks before it.
pub fn is_almost_cg(joint: &Dist, n: u32, ell: u32, indices: &[usize], k: f64) -> Result<bool> {
    if joint.bits() != n * ell {
        return Err(Error::WidthMismatch {
            expected: n * ell,
            actual: joint.bits(),
        });
    }
    let cap = crate::dist::pow2_neg(k);
    let total_bits = n * ell;
    for &i in indices {
        if i >= ell as usize {
            return Err(Error::Domain(format!("block index {i} out of range")));
        }
        let prefix_bits = n * i as u32;
        let mut prefix_mass: BTreeMap<u64, Prob> = BTreeMap::new();
        let mut cell_mass: BTreeMap<(u64, u64), Prob> = BTreeMap::new();
        for (x, p) in joint.iter() {
            let pre = slice(x, total_bits, 0, prefix_bits);
            let blk = slice(x, total_bits, prefix_bits, n);
            *prefix_mass.entry(pre).or_insert_with(Prob::zero) += p;
            *cell_mass.entry((pre, blk)).or_insert_with(Prob::zero) += p;
        }
        for ((pre, _), q) in &cell_mass {
            if *q > &cap * &prefix_mass[pre] {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Conditional min-entropy test on the declared good blocks (γ = 0).
pub fn check_almost_cg(src: &FiShelaDesc, k: f64) -> Result<bool> {
    let joint = joint_dist(&Source::Fishela(src.clone()))?;
    is_almost_cg(&joint, src.n, src.ell, &src.good, k)
}

/// One adversary of a SHELA source: the good index tuple, its probability
/// and the adversarial blocks used when that tuple is drawn.
#[derive(Clone, Debug, PartialEq)]
pub struct ShelaComponent {
    pub tuple: Vec<usize>,
    pub weight: Prob,
    pub bad: BTreeMap<usize, BadBlock>,
}

#[derive(Serialize, Deserialize)]
struct ShelaComponentRepr {
    tuple: Vec<usize>,
    weight: String,
    bad: BTreeMap<usize, BadBlock>,
}

impl Serialize for ShelaComponent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ShelaComponentRepr {
            tuple: self.tuple.clone(),
            weight: prob_to_string(&self.weight),
            bad: self.bad.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ShelaComponent {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = ShelaComponentRepr::deserialize(d)?;
        Ok(ShelaComponent {
            tuple: r.tuple,
            weight: prob_from_str(&r.weight).map_err(serde::de::Error::custom)?,
            bad: r.bad,
        })
    }
}

/// SHELA source: a distribution over good index tuples, with an adversary
/// per tuple that sees the drawn tuple.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShelaDesc {
    n: u32,
    ell: u32,
    g: usize,
    components: Vec<ShelaComponent>,
}

impl ShelaDesc {
    pub fn new(n: u32, ell: u32, g: usize, components: Vec<ShelaComponent>) -> Result<Self> {
        let mut total = Prob::zero();
        let mut seen = BTreeSet::new();
        for c in &components {
            if c.tuple.len() != g {
                return Err(Error::Domain(format!(
                    "tuple {:?} does not have {g} entries",
                    c.tuple
                )));
            }
            if !seen.insert(c.tuple.clone()) {
                return Err(Error::Domain(format!("tuple {:?} listed twice", c.tuple)));
            }
            if c.weight < Prob::zero() {
                return Err(Error::InvalidDist("negative tuple weight".into()));
            }
            FiShelaDesc::new(n, ell, c.tuple.clone(), c.bad.clone())?;
            total += &c.weight;
        }
        if !total.is_one() {
            return Err(Error::InvalidDist(format!(
                "tuple weights sum to {}",
                prob_to_string(&total)
            )));
        }
        Ok(ShelaDesc {
            n,
            ell,
            g,
            components,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    pub fn g(&self) -> usize {
        self.g
    }

    pub fn components(&self) -> &[ShelaComponent] {
        &self.components
    }

    /// Distribution of the index tuple, each tuple encoded as a bitmask
    /// over `ell` positions.
    pub fn index_dist(&self) -> Result<Dist> {
        let mut mass = BTreeMap::new();
        for c in &self.components {
            let code = c.tuple.iter().fold(0u64, |acc, &i| acc | (1 << i));
            mass.insert(code, c.weight.clone());
        }
        Dist::new(self.ell, mass)
    }
}

/// Split a SHELA source into its fixed-index components and weights.
pub fn decompose_shela(s: &ShelaDesc) -> Result<Vec<(Prob, FiShelaDesc)>> {
    s.components
        .iter()
        .filter(|c| !c.weight.is_zero())
        .map(|c| {
            Ok((
                c.weight.clone(),
                FiShelaDesc::new(s.n, s.ell, c.tuple.clone(), c.bad.clone())?,
            ))
        })
        .collect()
}

/// Exact distribution of `f(X)` for a SHELA source, computed by running its
/// two-stage sampling process directly: every (tuple, good-assignment) pair
/// contributes `weight · 2^(−g·n)` to its output.
pub fn shela_output_dist(f: &BlockFunctionTable, s: &ShelaDesc) -> Result<Dist> {
    check_fn_matches(f, s.n, s.ell)?;
    let bits = s.n * s.g as u32;
    if bits > MAX_ENUM_BITS {
        return Err(Error::too_large(
            "good-block enumeration",
            bits,
            MAX_ENUM_BITS,
        ));
    }
    let per_assignment = BigRational::new(BigInt::one(), BigInt::one() << bits as usize);
    let mut mass: BTreeMap<u64, Prob> = BTreeMap::new();
    let mut blocks = vec![0u64; s.ell as usize];
    for c in &s.components {
        let good: BTreeSet<usize> = c.tuple.iter().copied().collect();
        let step = &c.weight * &per_assignment;
        let mut hits: BTreeMap<u64, u64> = BTreeMap::new();
        for a in 0..1u64 << bits {
            let mut next = 0;
            let mut prefix = 0u64;
            for i in 0..s.ell as usize {
                let v = if good.contains(&i) {
                    next += 1;
                    slice(a, bits, s.n * (next - 1) as u32, s.n)
                } else {
                    c.bad[&i].resolve(prefix)
                };
                blocks[i] = v;
                prefix = (prefix << s.n) | v;
            }
            *hits.entry(f.eval(prefix)).or_insert(0) += 1;
        }
        for (z, h) in hits {
            *mass.entry(z).or_insert_with(Prob::zero) +=
                &step * BigRational::from_integer(BigInt::from(h));
        }
    }
    Dist::new(f.t, mass)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::ratio;
    use crate::rng::seeded;

    fn projection(n: u32, ell: u32, block: u32) -> BlockFunctionTable {
        BlockFunctionTable::from_fn(n, ell, n, move |x| slice(x, n * ell, n * block, n)).unwrap()
    }

    #[test]
    fn projections() {
        let src = Source::Fishela(FiShelaDesc::uniform(2, 3).unwrap());
        let d = exact_output_dist(&projection(2, 3, 0), &src).unwrap();
        assert_eq!(d, Dist::uniform(2).unwrap());

        let fixed =
            FiShelaDesc::new(2, 3, vec![0, 2], BTreeMap::from([(1, BadBlock::Fixed(3))])).unwrap();
        let d = exact_output_dist(&projection(2, 3, 1), &fixed.into()).unwrap();
        assert_eq!(d, Dist::point(2, 3).unwrap());
    }

    #[test]
    fn adaptive_domain_is_enforced() {
        let short = FiShelaDesc::new(
            2,
            2,
            vec![0],
            BTreeMap::from([(1, BadBlock::Adaptive(vec![0; 16]))]),
        );
        assert!(short.is_err());
        let ok = FiShelaDesc::new(
            2,
            2,
            vec![0],
            BTreeMap::from([(1, BadBlock::Adaptive(vec![0; 4]))]),
        );
        assert!(ok.is_ok());
    }

    #[test]
    fn copy_block_is_not_almost_cg() {
        let src = FiShelaDesc::new(
            2,
            3,
            vec![0, 2],
            BTreeMap::from([(1, BadBlock::Adaptive(vec![0, 1, 2, 3]))]),
        )
        .unwrap();
        let joint = joint_dist(&src.clone().into()).unwrap();
        assert!(check_almost_cg(&src, 2.0).unwrap());
        assert!(!is_almost_cg(&joint, 2, 3, &[1], 0.5).unwrap());
        assert!(is_almost_cg(&joint, 2, 3, &[1], 0.0).unwrap());
    }

    #[test]
    fn shela_single_tuple() {
        let mut rng = seeded(3);
        let f = BlockFunctionTable::random(2, 3, 3, &mut rng).unwrap();
        let bad = BTreeMap::from([(1, BadBlock::Adaptive(vec![3, 2, 1, 0]))]);
        let s = ShelaDesc::new(
            2,
            3,
            2,
            vec![ShelaComponent {
                tuple: vec![0, 2],
                weight: ratio(1, 1),
                bad: bad.clone(),
            }],
        )
        .unwrap();
        let parts = decompose_shela(&s).unwrap();
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[0].0, ratio(1, 1));
        let direct = shela_output_dist(&f, &s).unwrap();
        let comp = exact_output_dist(&f, &parts[0].1.clone().into()).unwrap();
        assert_eq!(direct, comp);
    }

    #[test]
    fn raw_function_file_roundtrip() {
        let mut rng = seeded(11);
        let f = BlockFunctionTable::random(3, 2, 9, &mut rng).unwrap();
        let mut buf = Vec::new();
        f.write_raw(&mut buf).unwrap();
        assert_eq!(buf.len(), 64 * 2);
        let g = BlockFunctionTable::read_raw(3, 2, 9, buf.as_slice()).unwrap();
        for x in 0..64 {
            assert_eq!(f.eval(x), g.eval(x));
        }
        assert!(BlockFunctionTable::read_raw(3, 2, 9, &buf[1..]).is_err());
    }

    #[test]
    fn nosf_structure() {
        let last = NosfDesc::new(
            2,
            3,
            vec![0, 1],
            BTreeMap::from([(2, BadBlock::Adaptive((0..16).map(|x| x % 4).collect()))]),
        )
        .unwrap();
        assert!(last.is_prefix_structured());
        let fs = last.as_fishela().unwrap();
        let f = BlockFunctionTable::from_fn(2, 3, 6, |x| x).unwrap();
        assert_eq!(
            exact_output_dist(&f, &Source::Nosf(last)).unwrap(),
            exact_output_dist(&f, &Source::Fishela(fs)).unwrap()
        );
        let middle = NosfDesc::new(
            2,
            3,
            vec![0, 2],
            BTreeMap::from([(1, BadBlock::Adaptive(vec![0; 16]))]),
        )
        .unwrap();
        assert!(!middle.is_prefix_structured());
        assert!(middle.as_fishela().is_none());
    }

    #[test]
    fn prepend_fixed_shifts_blocks() {
        let inner = FiShelaDesc::new(
            2,
            2,
            vec![0],
            BTreeMap::from([(1, BadBlock::Adaptive(vec![1, 2, 3, 0]))]),
        )
        .unwrap();
        let outer = inner.prepend_fixed(&[2]).unwrap();
        assert_eq!(outer.good(), &[1]);
        let mut out = [0u64; 3];
        outer.resolve(&[3], &mut out);
        assert_eq!(out, [2, 3, 0]);
    }
}
