//! Moving adversarial sources between block layouts.
//!
//! Splitting: each `n`-bit block of a source with few blocks is cut into
//! `m`-bit pieces (from the most significant end, any remainder hidden),
//! giving a source with more, shorter blocks. Partitioning: each block is
//! cut into `c` equal pieces with nothing hidden.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::make_bad_block;
use crate::bits::{mask, slice};
use crate::sources::{BadBlock, BlockFunctionTable, FiShelaDesc, NosfDesc, Source, MAX_ENUM_BITS};
use crate::{Error, Result};

/// How `ell_inner` blocks of `n` bits are cut into `ell_outer` pieces of
/// `m` bits: the first `ell_outer mod ell_inner` blocks give one piece more.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitLayout {
    pub n: u32,
    pub m: u32,
    pub pieces: Vec<u32>,
}

impl SplitLayout {
    pub fn new(n: u32, ell_inner: u32, ell_outer: u32, m: u32) -> Result<Self> {
        if ell_inner == 0 || m == 0 || ell_outer < ell_inner {
            return Err(Error::Precondition(format!(
                "need 0 < ell_inner <= ell_outer and m > 0, got {ell_inner}, {ell_outer}, m = {m}"
            )));
        }
        let q = ell_outer / ell_inner;
        let r = ell_outer % ell_inner;
        let widest = if r > 0 { q + 1 } else { q };
        if widest * m > n {
            return Err(Error::Precondition(format!(
                "ceil({ell_outer}/{ell_inner})·{m} = {} exceeds the block width {n}",
                widest * m
            )));
        }
        let pieces = (0..ell_inner)
            .map(|i| if i < r { q + 1 } else { q })
            .collect();
        Ok(SplitLayout { n, m, pieces })
    }

    pub fn ell_inner(&self) -> u32 {
        self.pieces.len() as u32
    }

    pub fn ell_outer(&self) -> u32 {
        self.pieces.iter().sum()
    }

    /// `(inner block, piece)` for each outer block.
    pub fn owners(&self) -> Vec<(usize, u32)> {
        self.pieces
            .iter()
            .enumerate()
            .flat_map(|(i, &k)| (0..k).map(move |p| (i, p)))
            .collect()
    }

    /// Visible pieces of one inner block value.
    fn cut(&self, v: u64, count: u32) -> impl Iterator<Item = u64> + '_ {
        (0..count).map(move |p| slice(v, self.n, p * self.m, self.m))
    }

    /// The outer packed value seen when the inner blocks are `packed`.
    pub fn project(&self, packed: u64) -> u64 {
        let total = self.n * self.ell_inner();
        let mut out = 0u64;
        for (i, &k) in self.pieces.iter().enumerate() {
            let v = slice(packed, total, self.n * i as u32, self.n);
            for piece in self.cut(v, k) {
                out = (out << self.m) | piece;
            }
        }
        out
    }

    /// Inner prefix with visible bits taken from the outer prefix of the
    /// first `blocks` inner blocks and hidden bits zero.
    fn embed_prefix(&self, outer_prefix: u64, blocks: usize) -> u64 {
        let used: u32 = self.pieces[..blocks].iter().sum();
        let mut inner = 0u64;
        let mut consumed = 0;
        for &k in &self.pieces[..blocks] {
            let mut v = 0u64;
            for p in 0..k {
                let piece = slice(outer_prefix, self.m * used, self.m * (consumed + p), self.m);
                v |= piece << (self.n - self.m * (p + 1));
            }
            consumed += k;
            inner = (inner << self.n) | v;
        }
        inner
    }

    /// `h ∘ project` as a function on the inner layout.
    pub fn lift(&self, h: &BlockFunctionTable) -> Result<BlockFunctionTable> {
        if h.n() != self.m || h.ell() != self.ell_outer() {
            return Err(Error::Domain(format!(
                "function has {}×{} bits, layout produces {}×{}",
                h.ell(),
                h.n(),
                self.ell_outer(),
                self.m
            )));
        }
        let layout = self.clone();
        let h = h.clone();
        BlockFunctionTable::from_fn(self.n, self.ell_inner(), h.t(), move |x| {
            h.eval(layout.project(x))
        })
    }
}

/// Cut a fixed-index SHELA source into `m`-bit pieces.
///
/// Fails if an adversarial piece would depend on hidden bits, or if fewer
/// than `g` pieces are good.
pub fn split_blocks_reduction(
    inner: &FiShelaDesc,
    g: usize,
    ell: u32,
    m: u32,
) -> Result<FiShelaDesc> {
    let layout = SplitLayout::new(inner.n(), inner.ell(), ell, m)?;
    let owners = layout.owners();
    let n = inner.n();
    let good_inner: Vec<usize> = inner.good().to_vec();
    let mut good = Vec::new();
    let mut bad = BTreeMap::new();
    for (o, &(i, p)) in owners.iter().enumerate() {
        if good_inner.contains(&i) {
            good.push(o);
            continue;
        }
        let src_block = inner.bad()[&i].clone();
        let block = match &src_block {
            BadBlock::Fixed(v) => BadBlock::Fixed(slice(*v, n, p * m, m)),
            other => {
                check_hidden_independence(&layout, i, other)?;
                let lay = layout.clone();
                let other = other.clone();
                let outer_bits = m * o as u32;
                let own_pieces = p;
                make_bad_block(outer_bits, move |prefix| {
                    let earlier = prefix >> (m * own_pieces);
                    let v = other.resolve(lay.embed_prefix(earlier, i));
                    slice(v, n, p * m, m)
                })?
            }
        };
        bad.insert(o, block);
    }
    if good.len() < g {
        return Err(Error::Precondition(format!(
            "only {} good pieces, need {g}",
            good.len()
        )));
    }
    FiShelaDesc::new(m, ell, good, bad)
}

fn check_hidden_independence(layout: &SplitLayout, i: usize, block: &BadBlock) -> Result<()> {
    let bits = layout.n * i as u32;
    if bits > MAX_ENUM_BITS {
        return Err(Error::too_large("hidden-bit check", bits, MAX_ENUM_BITS));
    }
    let visible_mask =
        mask(layout.m * layout.pieces[i]) << (layout.n - layout.m * layout.pieces[i]);
    let sub = SplitLayout {
        n: layout.n,
        m: layout.m,
        pieces: layout.pieces[..i].to_vec(),
    };
    for prefix in 0..1u64 << bits {
        let zeroed = sub.embed_prefix(sub.project(prefix), i);
        if block.resolve(prefix) & visible_mask != block.resolve(zeroed) & visible_mask {
            return Err(Error::Precondition(format!(
                "adversarial block {i} depends on hidden bits (prefix {prefix})"
            )));
        }
    }
    Ok(())
}

/// View `f` on `c·ell0` blocks of `n/c` bits as `h` on `ell0` blocks of
/// `n` bits. Packing is identical, so `h(x) = f(x)` bit for bit.
pub fn scale_up_reduction(f: &BlockFunctionTable, c: u32) -> Result<BlockFunctionTable> {
    if c == 0 || f.ell() % c != 0 {
        return Err(Error::Domain(format!(
            "{} blocks are not a multiple of c = {c}",
            f.ell()
        )));
    }
    f.reblock(f.n() * c, f.ell() / c)
}

/// Cut every block of `src` into `c` equal pieces.
pub fn partition_source(src: &Source, c: u32) -> Result<Source> {
    let n = src.n();
    if c == 0 || n % c != 0 {
        return Err(Error::Domain(format!(
            "block width {n} is not divisible by c = {c}"
        )));
    }
    let w = n / c;
    let ell = src.ell() * c;
    let expand_good = |good: &[usize]| -> Vec<usize> {
        good.iter()
            .flat_map(|&i| (0..c as usize).map(move |p| i * c as usize + p))
            .collect()
    };
    match src {
        Source::Fishela(d) => {
            let mut bad = BTreeMap::new();
            for (&i, b) in d.bad() {
                for p in 0..c {
                    let o = i * c as usize + p as usize;
                    let piece = match b {
                        BadBlock::Fixed(v) => BadBlock::Fixed(slice(*v, n, p * w, w)),
                        other => {
                            let other = other.clone();
                            make_bad_block(w * o as u32, move |prefix| {
                                slice(other.resolve(prefix >> (w * p)), n, p * w, w)
                            })?
                        }
                    };
                    bad.insert(o, piece);
                }
            }
            Ok(Source::Fishela(FiShelaDesc::new(
                w,
                ell,
                expand_good(d.good()),
                bad,
            )?))
        }
        Source::Nosf(d) => {
            let key_bits = n * d.g() as u32;
            let mut bad = BTreeMap::new();
            for (&i, b) in d.bad() {
                for p in 0..c {
                    let o = i * c as usize + p as usize;
                    let piece = match b {
                        BadBlock::Fixed(v) => BadBlock::Fixed(slice(*v, n, p * w, w)),
                        other => {
                            let other = other.clone();
                            make_bad_block(key_bits, move |key| {
                                slice(other.resolve(key), n, p * w, w)
                            })?
                        }
                    };
                    bad.insert(o, piece);
                }
            }
            Ok(Source::Nosf(NosfDesc::new(
                w,
                ell,
                expand_good(d.good()),
                bad,
            )?))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sources::{exact_output_dist, joint_dist};

    #[test]
    fn even_split() {
        let l = SplitLayout::new(4, 2, 4, 2).unwrap();
        assert_eq!(l.pieces, vec![2, 2]);
        assert_eq!(l.project(0b1011_0110), 0b1011_0110);
        let uneven = SplitLayout::new(5, 2, 3, 2).unwrap();
        assert_eq!(uneven.pieces, vec![2, 1]);
        // 10110 01101 -> 10 11 | 01
        assert_eq!(uneven.project(0b10110_01101), 0b10_11_01);
        assert!(SplitLayout::new(3, 2, 3, 2).is_err());
    }

    #[test]
    fn uniform_split_is_all_good() {
        let inner = FiShelaDesc::uniform(4, 1).unwrap();
        let out = split_blocks_reduction(&inner, 2, 2, 2).unwrap();
        assert_eq!(out.good(), &[0, 1]);
    }

    #[test]
    fn split_preserves_joint() {
        // Five-bit blocks cut into two 2-bit pieces; the low bit is hidden.
        let reads_hidden: Vec<u64> = (0..32).map(|x| (x & 1) << 3).collect();
        let inner = FiShelaDesc::new(
            5,
            2,
            vec![0],
            BTreeMap::from([(1, BadBlock::Adaptive(reads_hidden))]),
        )
        .unwrap();
        assert!(split_blocks_reduction(&inner, 2, 4, 2).is_err());
        let visible_only: Vec<u64> = (0..32)
            .map(|x: u64| ((x >> 1) * 5 % 16) << 1 | (x & 1))
            .collect();
        let inner = FiShelaDesc::new(
            5,
            2,
            vec![0],
            BTreeMap::from([(1, BadBlock::Adaptive(visible_only))]),
        )
        .unwrap();
        let out = split_blocks_reduction(&inner, 2, 4, 2).unwrap();
        let layout = SplitLayout::new(5, 2, 4, 2).unwrap();
        let lhs = joint_dist(&Source::Fishela(out)).unwrap();
        let rhs = joint_dist(&Source::Fishela(inner))
            .unwrap()
            .map(8, |x| layout.project(x))
            .unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn scale_up_identity() {
        let f = BlockFunctionTable::from_fn(2, 4, 3, |x| x % 8).unwrap();
        let h = scale_up_reduction(&f, 1).unwrap();
        assert_eq!(h.ell(), 4);
        let h2 = scale_up_reduction(&f, 2).unwrap();
        assert_eq!((h2.n(), h2.ell()), (4, 2));
        for x in 0..256 {
            assert_eq!(f.eval(x), h2.eval(x));
        }
    }

    #[test]
    fn partition_keeps_distribution() {
        let inner = FiShelaDesc::new(
            4,
            2,
            vec![0],
            BTreeMap::from([(1, BadBlock::Adaptive((0..16).map(|x| 15 - x).collect()))]),
        )
        .unwrap();
        let parted = partition_source(&Source::Fishela(inner.clone()), 2).unwrap();
        assert_eq!(parted.good(), &[0, 1]);
        let f = BlockFunctionTable::from_fn(2, 4, 8, |x| x).unwrap();
        let g = scale_up_reduction(&f, 2).unwrap();
        assert_eq!(
            exact_output_dist(&f, &parted).unwrap(),
            exact_output_dist(&g, &Source::Fishela(inner)).unwrap()
        );
    }
}
