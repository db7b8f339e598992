//! Extracting even one bit is impossible for uniform (2,3)-SHELA sources.
//!
//! Pairs `(x1, x2)` are split into those forcing output 0 for every `x3`,
//! those forcing 1, and the rest. If many pairs can reach a given bit, block
//! 3 steers into it. Otherwise many `x1` values have many forcing partners:
//! either each such `x1` has a partner forcing 0 (block 2 picks it), or one
//! of them forces a single bit on most of its row (block 1 is fixed to it).

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::check::Check;
use crate::dist::{prob_serde, prob_to_f64, Prob};
use crate::sources::{
    exact_output_dist, BadBlock, BlockFunctionTable, FiShelaDesc, Source, MAX_ENUM_BITS,
};
use crate::{Error, Result};

/// Fraction of pairs that must reach a bit for block 3 to steer.
pub const EXTRACT_C0: f64 = 0.58;
/// Normalized degree above which a row counts as heavy.
pub const EXTRACT_C1: f64 = 0.6;

/// `c2 = (2(1 − c0) − c1)/(1 − c1)`.
pub fn extract_c2(c0: f64, c1: f64) -> f64 {
    (2.0 * (1.0 - c0) - c1) / (1.0 - c1)
}

/// `min(c0, c1, c2) − 1/2`.
pub fn guaranteed_bias(c0: f64, c1: f64) -> f64 {
    c0.min(c1).min(extract_c2(c0, c1)) - 0.5
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extract23Case {
    /// Block 3 steers to output 0.
    SteerZero,
    /// Block 3 steers to output 1.
    SteerOne,
    /// Block 2 picks a partner forcing 0 for every heavy row.
    HeavyRowsPartner,
    /// Block 1 fixed to a heavy row that forces a single bit.
    FixedRow { label: u8 },
}

/// The constructed source and the exact bias of `f` on it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExtractionOutcome {
    pub source: FiShelaDesc,
    pub case: Extract23Case,
    /// `|Pr[f(X) = 0] − 1/2|`, exactly.
    #[serde(with = "prob_serde")]
    pub bias_exact: Prob,
    pub bias: f64,
    pub guaranteed_bias: f64,
    pub counts: PairCounts,
    pub checks: Vec<Check>,
}

/// Sizes of the three pair classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairCounts {
    pub forces_zero: u64,
    pub forces_one: u64,
    pub mixed: u64,
}

/// Build the adversary and compute the exact bias.
pub fn build_shela23_extraction_adversary(f: &BlockFunctionTable) -> Result<ExtractionOutcome> {
    build_with_constants(f, EXTRACT_C0, EXTRACT_C1)
}

pub fn build_with_constants(f: &BlockFunctionTable, c0: f64, c1: f64) -> Result<ExtractionOutcome> {
    if f.t() != 1 {
        return Err(Error::Domain(format!(
            "expected a 1-bit output, got t = {}",
            f.t()
        )));
    }
    if f.ell() != 3 {
        return Err(Error::Domain(format!("expected 3 blocks, got {}", f.ell())));
    }
    let n = f.n();
    if 3 * n > MAX_ENUM_BITS {
        return Err(Error::too_large(
            "(2,3)-SHELA extraction scan",
            3 * n,
            MAX_ENUM_BITS,
        ));
    }
    let big_n = 1u64 << n;
    let pairs = big_n * big_n;

    // For each pair: bit 0 set if some x3 gives 0, bit 1 set if some x3 gives 1.
    let reach: Vec<u8> = (0..pairs)
        .into_par_iter()
        .map(|p| {
            let mut r = 0u8;
            for x3 in 0..big_n {
                r |= 1 << f.eval((p << n) | x3);
                if r == 3 {
                    break;
                }
            }
            r
        })
        .collect();
    let counts = PairCounts {
        forces_zero: reach.iter().filter(|&&r| r == 1).count() as u64,
        forces_one: reach.iter().filter(|&&r| r == 2).count() as u64,
        mixed: reach.iter().filter(|&&r| r == 3).count() as u64,
    };
    let target = c0 * pairs as f64;
    let first_x3 = |p: u64, bit: u64| {
        (0..big_n)
            .find(|&x3| f.eval((p << n) | x3) == bit)
            .unwrap_or(0)
    };

    let (source, case, floor) = if (counts.forces_zero + counts.mixed) as f64 >= target {
        let table = (0..pairs).map(|p| first_x3(p, 0)).collect();
        let src = FiShelaDesc::new(
            n,
            3,
            vec![0, 1],
            BTreeMap::from([(2, BadBlock::Adaptive(table))]),
        )?;
        (src, Extract23Case::SteerZero, c0)
    } else if (counts.forces_one + counts.mixed) as f64 >= target {
        let table = (0..pairs).map(|p| first_x3(p, 1)).collect();
        let src = FiShelaDesc::new(
            n,
            3,
            vec![0, 1],
            BTreeMap::from([(2, BadBlock::Adaptive(table))]),
        )?;
        (src, Extract23Case::SteerOne, c0)
    } else {
        // Row u: partners forcing 0 and forcing 1.
        let reach = &reach;
        let row = move |u: u64, want: u8| {
            (0..big_n).filter(move |&v| reach[(u * big_n + v) as usize] == want)
        };
        let heavy: Vec<u64> = (0..big_n)
            .filter(|&u| {
                let deg = row(u, 1).count() + row(u, 2).count();
                deg as f64 / big_n as f64 > c1
            })
            .collect();
        if heavy.is_empty() {
            return Err(Error::Construction(
                "no heavy row although neither steering case fired".into(),
            ));
        }
        let both = |u: u64| row(u, 1).next().is_some() && row(u, 2).next().is_some();
        if heavy.iter().all(|&u| both(u)) {
            let table = (0..big_n)
                .map(|u| {
                    if heavy.contains(&u) {
                        row(u, 1).next().unwrap_or(0)
                    } else {
                        0
                    }
                })
                .collect();
            let src = FiShelaDesc::new(
                n,
                3,
                vec![0, 2],
                BTreeMap::from([(1, BadBlock::Adaptive(table))]),
            )?;
            (src, Extract23Case::HeavyRowsPartner, extract_c2(c0, c1))
        } else {
            let only = |label: u8| {
                heavy
                    .iter()
                    .copied()
                    .find(|&u| !both(u) && row(u, label + 1).next().is_some())
            };
            let (u, label) = match only(0) {
                Some(u) => (u, 0),
                None => (only(1).expect("a single-labelled heavy row"), 1),
            };
            let src =
                FiShelaDesc::new(n, 3, vec![1, 2], BTreeMap::from([(0, BadBlock::Fixed(u))]))?;
            (src, Extract23Case::FixedRow { label }, c1)
        }
    };

    let dist = exact_output_dist(f, &Source::Fishela(source.clone()))?;
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let bias_exact = (dist.prob(0) - &half).abs();
    let bias = prob_to_f64(&bias_exact);
    let guaranteed = guaranteed_bias(c0, c1);
    let checks = vec![
        Check::new(
            "case_floor",
            "bias >= floor of the case reached − 1/2",
            bias >= floor - 0.5 - 1e-12,
            format!("bias {bias:.6}, case floor {:.6}", floor - 0.5),
        ),
        Check::new(
            "guaranteed_bias",
            "bias >= min(c0, c1, c2) − 1/2",
            bias >= guaranteed - 1e-12,
            format!("bias {bias:.6}, guarantee {guaranteed:.6}"),
        ),
    ];
    Ok(ExtractionOutcome {
        source,
        case,
        bias_exact,
        bias,
        guaranteed_bias: guaranteed,
        counts,
        checks,
    })
}
