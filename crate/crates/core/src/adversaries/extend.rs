//! Lifting an impossibility from `ell` blocks to `ell + g` blocks.
//!
//! For `h` on `ell + g` blocks, either some fixing `x` of the first `g`
//! blocks leaves `h(x, ·)` with a small range (fix it and recurse on the
//! rest with that range as the alphabet), or every fixing reaches many
//! outputs, and a greedy cover of the prefix/output graph yields a small set
//! `D` that the last `ell` blocks can steer into.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::nosf23::{nosf23_witness, Nosf23Constants};
use super::{
    certify, distinct_outputs, make_bad_block, CertifyInput, CondenseCertificate, OutputSet,
    Witness,
};
use crate::bits::{mask, unpack};
use crate::check::{le_slack, Check};
use crate::covering::{greedy_cover_with_alphabet, BipartiteGraph};
use crate::sources::{BlockFunctionTable, FiShelaDesc, Source, MAX_ENUM_BITS};
use crate::{Error, Result};

/// Where the recursion bottoms out.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtensionBase {
    /// One uniform block (`g = 1`).
    Uniform,
    /// The (2,3)-NOSF construction (`g = 2`).
    Nosf23,
}

impl ExtensionBase {
    pub fn g(&self) -> u32 {
        match self {
            ExtensionBase::Uniform => 1,
            ExtensionBase::Nosf23 => 2,
        }
    }

    pub fn base_ell(&self) -> u32 {
        match self {
            ExtensionBase::Uniform => 1,
            ExtensionBase::Nosf23 => 3,
        }
    }

    /// Additive slack of the base case. A single uniform block has range at
    /// most `T`, and smoothing inside the ambient `t`-bit space can lift its
    /// entropy by `log2(1/(1 − eps))` at most.
    pub fn base_delta(&self, eps: f64) -> Result<f64> {
        match self {
            ExtensionBase::Uniform => Ok(-(1.0 - eps).log2()),
            ExtensionBase::Nosf23 => Ok(Nosf23Constants::from_eps(eps)?.delta_worst()),
        }
    }

    fn check_eps(&self, eps: f64) -> Result<()> {
        let ok = match self {
            ExtensionBase::Uniform => (0.0..1.0).contains(&eps),
            ExtensionBase::Nosf23 => eps > 0.0 && eps < 0.25,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "eps = {eps} out of range for base {self:?}"
            )))
        }
    }
}

/// `c1 = (1 + eps)/2` with `c0 = 1`.
pub fn extension_c1(eps: f64) -> f64 {
    (1.0 + eps) / 2.0
}

/// Worst-case additive slack after extending the base to `ell_total`
/// blocks, with the two terms of the final step (`term1`, `term2`).
pub fn extension_delta(base: ExtensionBase, eps: f64, ell_total: u32) -> Result<(f64, f64, f64)> {
    let g = base.g();
    if ell_total < base.base_ell() || (ell_total - base.base_ell()) % g != 0 {
        return Err(Error::Domain(format!(
            "{ell_total} blocks cannot be reached from {} in steps of {g}",
            base.base_ell()
        )));
    }
    let c0: f64 = 1.0;
    let c1 = extension_c1(eps);
    let term1 = (c1 / ((1.0 - c1) * c0 * (c1 - eps))).log2();
    let mut delta = base.base_delta(eps)?;
    let (mut t1, mut t2) = (f64::NAN, f64::NAN);
    let mut ell = base.base_ell();
    while ell < ell_total {
        t1 = term1;
        t2 = delta + c0.log2() * g as f64 / ell as f64;
        delta = t1.max(t2);
        ell += g;
    }
    Ok((delta, t1, t2))
}

fn extension_witness(
    h: &BlockFunctionTable,
    base: ExtensionBase,
    eps: f64,
    alphabet: f64,
    depth: &mut u32,
) -> Result<Witness> {
    let n = h.n();
    let ell_total = h.ell();
    if ell_total == base.base_ell() {
        return match base {
            ExtensionBase::Uniform => {
                let range = distinct_outputs(1 << n, |x| h.eval(x));
                Ok(Witness {
                    source: Source::Fishela(FiShelaDesc::uniform(n, 1)?),
                    heavy_set: range.iter().map(|&z| z as u64).collect(),
                    hit_guarantee: 1.0,
                    case: "base".into(),
                    trace: vec![format!("base: one uniform block, range {}", range.len())],
                })
            }
            ExtensionBase::Nosf23 => nosf23_witness(h, eps, alphabet).map(|(w, _)| w),
        };
    }

    let g = base.g();
    let ell = ell_total - g;
    let head_bits = n * g;
    let tail_bits = n * ell;
    let heads = 1u64 << head_bits;
    let tails = 1u64 << tail_bits;
    let exponent = ell as f64 / ell_total as f64;
    let c0 = 1.0;
    let c1 = extension_c1(eps);
    let threshold = c0 * alphabet.powf(exponent);

    let sizes: Vec<usize> = (0..heads)
        .into_par_iter()
        .map(|x| distinct_outputs(tails, |y| h.eval((x << tail_bits) | y)).len())
        .collect();

    if let Some(x) = (0..heads).find(|&x| le_slack(sizes[x as usize] as f64, threshold)) {
        *depth += 1;
        let range = sizes[x as usize];
        let outer = h.clone();
        let inner =
            BlockFunctionTable::from_fn(n, ell, h.t(), move |y| outer.eval((x << tail_bits) | y))?;
        let w = extension_witness(&inner, base, eps, range as f64, depth)?;
        let fixed = unpack(x, n, g as usize);
        let mut trace = vec![format!(
            "{ell_total} blocks: fix first {g} block(s) to {fixed:?}, range {range} <= c0·T^({ell}/{ell_total}) = {threshold:.4}"
        )];
        trace.extend(w.trace);
        return Ok(Witness {
            source: w.source.prepend_fixed(&fixed)?,
            trace,
            ..w
        });
    }

    let lists: Vec<Vec<u32>> = (0..heads)
        .into_par_iter()
        .map(|x| distinct_outputs(tails, |y| h.eval((x << tail_bits) | y)))
        .collect();
    let right: Vec<u32> = {
        let mut all: Vec<u32> = lists.iter().flatten().copied().collect();
        all.sort_unstable();
        all.dedup();
        all
    };
    let adjacency = lists
        .into_iter()
        .map(|l| {
            l.iter()
                .map(|z| right.binary_search(z).expect("output listed") as u32)
                .collect()
        })
        .collect();
    let graph = BipartiteGraph::new(right.len(), adjacency)?;
    let cover = greedy_cover_with_alphabet(&graph, c0, exponent, c1, alphabet)?;
    if !cover.passed() {
        return Err(Error::Construction(format!(
            "greedy cover failed its checks: {:?}",
            cover.checks
        )));
    }
    let heavy = cover
        .chosen
        .iter()
        .map(|&i| right[i as usize] as u64)
        .collect();
    let members = OutputSet::new(h.t(), &heavy);
    let suffix: Arc<Vec<u64>> = Arc::new(
        (0..heads)
            .into_par_iter()
            .map(|x| {
                (0..tails)
                    .find(|&y| members.contains(h.eval((x << tail_bits) | y)))
                    .unwrap_or(0)
            })
            .collect(),
    );
    let mut bad = std::collections::BTreeMap::new();
    for j in 0..ell {
        let pos = g + j;
        let table = Arc::clone(&suffix);
        let prefix_bits = n * pos;
        let shift = n * (ell - 1 - j);
        let block = make_bad_block(prefix_bits, move |prefix| {
            let x = prefix >> (prefix_bits - head_bits);
            (table[x as usize] >> shift) & mask(n)
        })?;
        bad.insert(pos as usize, block);
    }
    let src = FiShelaDesc::new(n, ell_total, (0..g as usize).collect(), bad)?;
    Ok(Witness {
        source: Source::Fishela(src),
        heavy_set: heavy,
        hit_guarantee: c1,
        case: "cover".into(),
        trace: vec![format!(
            "{ell_total} blocks: every prefix reaches > {threshold:.4} outputs; cover with {} outputs (bound {:.3}) covers {} of {heads} prefixes",
            cover.steps, cover.bound, cover.covered
        )],
    })
}

/// Build the adversarial source for `f` by extending `base` and certify it.
pub fn build_extension_adversary(
    f: &BlockFunctionTable,
    base: ExtensionBase,
    eps: f64,
) -> Result<CondenseCertificate> {
    base.check_eps(eps)?;
    let bits = f.input_bits();
    if bits > MAX_ENUM_BITS {
        return Err(Error::too_large("prefix support scan", bits, MAX_ENUM_BITS));
    }
    let (delta, term1, term2) = extension_delta(base, eps, f.ell())?;
    let mut depth = 0;
    let w = extension_witness(f, base, eps, (f.t() as f64).exp2(), &mut depth)?;
    let g = base.g();
    let mut cert = certify(CertifyInput {
        theorem: match base {
            ExtensionBase::Uniform => "one_good_block",
            ExtensionBase::Nosf23 => "two_good_blocks_nosf",
        },
        case: format!("{} after {depth} fixing step(s)", w.case),
        f,
        source: w.source,
        eps,
        heavy_set: w.heavy_set,
        hit_guarantee: w.hit_guarantee,
        rate: g as f64 / f.ell() as f64,
        delta,
        delta_terms: vec![("term1".into(), term1), ("term2".into(), term2)],
        trace: w.trace,
    })?;
    let max_depth = (f.ell() - base.base_ell()) / g;
    cert.checks.push(Check::new(
        "recursion_depth",
        "fixing steps <= (ell − base) / g",
        depth <= max_depth,
        format!("{depth} of at most {max_depth}"),
    ));
    Ok(cert)
}

/// Adversarial uniform (1, ell)-SHELA source for `f`.
pub fn build_1l_adversary(f: &BlockFunctionTable, eps: f64) -> Result<CondenseCertificate> {
    build_extension_adversary(f, ExtensionBase::Uniform, eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn delta_matches_closed_form() {
        let eps = 0.1;
        let (d, t1, _) = extension_delta(ExtensionBase::Uniform, eps, 2).unwrap();
        let closed = (2.0 * (1.0 + eps) / (1.0 - eps).powi(2)).log2();
        assert!((d - closed).abs() < 1e-12);
        assert!((t1 - closed).abs() < 1e-12);
        let (d3, _, _) = extension_delta(ExtensionBase::Uniform, eps, 3).unwrap();
        assert!((d3 - closed).abs() < 1e-12);
    }

    #[test]
    fn base_case_is_uniform() {
        let mut rng = seeded(1);
        let f = BlockFunctionTable::random(3, 1, 6, &mut rng).unwrap();
        let cert = build_1l_adversary(&f, 0.1).unwrap();
        assert!(cert.passed(), "{:?}", cert.checks);
        assert!(cert.oracle_entropy <= 6.0 + 1e-9);
        assert_eq!(
            cert.source,
            Source::Fishela(FiShelaDesc::uniform(3, 1).unwrap())
        );
    }

    #[test]
    fn constant_fixes_everything() {
        let f = BlockFunctionTable::constant(3, 3, 6, 9).unwrap();
        let cert = build_1l_adversary(&f, 0.1).unwrap();
        assert!(cert.passed());
        assert_eq!(cert.heavy_set.len(), 1);
        assert_eq!(cert.hit_prob, crate::dist::ratio(1, 1));
    }

    #[test]
    fn random_two_blocks() {
        let mut rng = seeded(5);
        for _ in 0..5 {
            let f = BlockFunctionTable::random(3, 2, 6, &mut rng).unwrap();
            let cert = build_1l_adversary(&f, 0.1).unwrap();
            assert!(cert.passed(), "{:?}", cert.checks);
        }
    }
}
