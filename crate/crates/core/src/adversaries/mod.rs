//! Adversarial sources that defeat a given candidate function.
//!
//! Each builder takes `f` and returns a concrete source together with a
//! certificate: a small output set `D` that `f(X)` hits with large
//! probability, checked against the exact output distribution.

pub mod certificate;
pub mod extend;
pub mod extract23;
pub mod nosf23;
pub mod recipes;
pub mod reductions;

pub use certificate::{certify, CertifyInput, CondenseCertificate};
pub use extend::{build_1l_adversary, build_extension_adversary, extension_delta, ExtensionBase};
pub use extract23::{build_shela23_extraction_adversary, Extract23Case, ExtractionOutcome};
pub use nosf23::{build_nosf23_adversary, Nosf23Case, Nosf23Constants};
pub use recipes::{condense_above_one_over_c, condense_nosf_two_over_c};
pub use reductions::{partition_source, scale_up_reduction, split_blocks_reduction, SplitLayout};

use std::collections::BTreeSet;

use crate::sources::{BadBlock, MAX_ENUM_BITS};

/// Adversary tables are stored as arrays up to this many index bits and as
/// closures beyond it.
pub const MAX_TABLE_BITS: u32 = 20;

/// Membership test for an output set.
pub(crate) struct OutputSet {
    dense: Option<Vec<bool>>,
    sparse: BTreeSet<u64>,
}

impl OutputSet {
    pub(crate) fn new(t: u32, set: &BTreeSet<u64>) -> Self {
        let dense = (t <= 24).then(|| {
            let mut v = vec![false; 1 << t];
            for &z in set {
                v[z as usize] = true;
            }
            v
        });
        OutputSet {
            dense,
            sparse: set.clone(),
        }
    }

    #[inline]
    pub(crate) fn contains(&self, z: u64) -> bool {
        match &self.dense {
            Some(v) => v[z as usize],
            None => self.sparse.contains(&z),
        }
    }
}

/// A bad block given by `value(index)` over `index_bits` bits, stored as a
/// table when small enough.
pub(crate) fn make_bad_block<F>(index_bits: u32, value: F) -> crate::Result<BadBlock>
where
    F: Fn(u64) -> u64 + Send + Sync + 'static,
{
    if index_bits <= MAX_TABLE_BITS {
        Ok(BadBlock::Adaptive(
            (0..1u64 << index_bits).map(&value).collect(),
        ))
    } else if index_bits <= 64 {
        Ok(BadBlock::Computed(std::sync::Arc::new(value)))
    } else {
        Err(crate::Error::too_large(
            "adversary table",
            index_bits,
            MAX_ENUM_BITS,
        ))
    }
}

/// A source and heavy set produced by one construction step, before
/// certification against the top-level function.
pub(crate) struct Witness {
    pub source: crate::sources::Source,
    pub heavy_set: BTreeSet<u64>,
    pub hit_guarantee: f64,
    pub case: String,
    pub trace: Vec<String>,
}

/// Sorted distinct outputs of `eval` over `0..count`.
pub(crate) fn distinct_outputs(count: u64, eval: impl Fn(u64) -> u64) -> Vec<u32> {
    let mut out: Vec<u32> = (0..count).map(|y| eval(y) as u32).collect();
    out.sort_unstable();
    out.dedup();
    out
}
