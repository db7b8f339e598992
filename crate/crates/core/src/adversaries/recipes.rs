//! Composite constructions: a base adversary carried to other block layouts.

use super::extend::{build_1l_adversary, build_extension_adversary, ExtensionBase};
use super::reductions::{
    partition_source, scale_up_reduction, split_blocks_reduction, SplitLayout,
};
use super::{certify, CertifyInput, CondenseCertificate};
use crate::check::Check;
use crate::sources::{exact_output_dist, BlockFunctionTable, Source};
use crate::{Error, Result};

/// Adversarial uniform `(g, ell)`-SHELA source for `h` with `g <= ell/2`,
/// bounding the smooth min-entropy by `t / floor(ell/g) + delta`.
///
/// `h` is lifted to `floor(ell/g)` wider blocks, the one-good-block
/// adversary is built there, and its source is cut back into pieces.
pub fn condense_above_one_over_c(
    h: &BlockFunctionTable,
    g: u32,
    eps: f64,
) -> Result<CondenseCertificate> {
    let ell = h.ell();
    if g == 0 || 2 * g > ell {
        return Err(Error::Precondition(format!(
            "need 1 <= g <= ell/2, got g = {g}, ell = {ell}"
        )));
    }
    let c = ell / g;
    let m = h.n();
    let inner_width = ell.div_ceil(c) * m;
    let layout = SplitLayout::new(inner_width, c, ell, m)?;
    let lifted = layout.lift(h)?.to_dense()?;
    let inner = build_1l_adversary(&lifted, eps)?;
    let inner_src = inner
        .source
        .as_fishela()
        .ok_or_else(|| Error::Construction("one-good-block adversary is not fixed-index".into()))?;
    let outer = split_blocks_reduction(&inner_src, g as usize, ell, m)?;
    let outer_src = Source::Fishela(outer);
    let same = exact_output_dist(h, &outer_src)? == exact_output_dist(&lifted, &inner.source)?;
    let mut trace = vec![format!(
        "lifted to {c} blocks of {inner_width} bits; inner case {}",
        inner.case
    )];
    trace.extend(inner.trace.iter().cloned());
    let mut cert = certify(CertifyInput {
        theorem: "above_one_over_c",
        case: inner.case.clone(),
        f: h,
        source: outer_src,
        eps,
        heavy_set: inner.heavy_set.clone(),
        hit_guarantee: inner.hit_guarantee,
        rate: 1.0 / c as f64,
        delta: inner.delta,
        delta_terms: inner.delta_terms.clone(),
        trace,
    })?;
    cert.checks.push(Check::new(
        "split_identity",
        "h(split(Y)) and (h ∘ project)(Y) have the same exact distribution",
        same,
        format!("{c} inner blocks, {} pieces", ell),
    ));
    cert.checks.push(Check::new(
        "good_pieces",
        "split source has at least g good blocks",
        cert.source.good().len() >= g as usize,
        format!("{} good of {ell}", cert.source.good().len()),
    ));
    Ok(cert)
}

/// Adversarial uniform `(g, ell)`-NOSF source for `h` when `g/ell = 2/c`.
///
/// Even `c` reduces to [`condense_above_one_over_c`]. Odd `c` extends the
/// (2,3)-NOSF construction to `c` blocks on `h` viewed with `g/2`-times
/// wider blocks, then partitions the source back.
pub fn condense_nosf_two_over_c(
    h: &BlockFunctionTable,
    g: u32,
    eps: f64,
) -> Result<CondenseCertificate> {
    let ell = h.ell();
    if g == 0 || (2 * ell) % g != 0 {
        return Err(Error::Precondition(format!(
            "g/ell = {g}/{ell} is not of the form 2/c"
        )));
    }
    let c = 2 * ell / g;
    if c % 2 == 0 {
        let mut cert = condense_above_one_over_c(h, g, eps)?;
        cert.theorem = "nosf_two_over_c".into();
        cert.trace
            .insert(0, format!("c = {c} is even: g/ell = 1/{}", c / 2));
        return Ok(cert);
    }
    if c < 3 {
        return Err(Error::Precondition(format!("c = {c} must be at least 3")));
    }
    let k = g / 2;
    let wide = scale_up_reduction(h, k)?.to_dense()?;
    let base = build_extension_adversary(&wide, ExtensionBase::Nosf23, eps)?;
    let parted = partition_source(&base.source, k)?;
    let same = exact_output_dist(h, &parted)? == exact_output_dist(&wide, &base.source)?;
    let mut trace = vec![format!(
        "c = {c} is odd: blocks widened {k}×, base case {}",
        base.case
    )];
    trace.extend(base.trace.iter().cloned());
    let mut cert = certify(CertifyInput {
        theorem: "nosf_two_over_c",
        case: base.case.clone(),
        f: h,
        source: parted,
        eps,
        heavy_set: base.heavy_set.clone(),
        hit_guarantee: base.hit_guarantee,
        rate: 2.0 / c as f64,
        delta: base.delta,
        delta_terms: base.delta_terms.clone(),
        trace,
    })?;
    cert.checks.push(Check::new(
        "partition_identity",
        "partitioning the source leaves the output distribution unchanged",
        same,
        format!("widen {k}×"),
    ));
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn above_one_over_c_small() {
        let mut rng = seeded(9);
        let h = BlockFunctionTable::random(2, 4, 4, &mut rng).unwrap();
        let cert = condense_above_one_over_c(&h, 2, 0.1).unwrap();
        assert!(cert.passed(), "{:?}", cert.checks);
        assert!(cert.source.good().len() >= 2);
    }

    #[test]
    fn nosf_odd_c() {
        let mut rng = seeded(10);
        let h = BlockFunctionTable::random(2, 6, 6, &mut rng).unwrap();
        let cert = condense_nosf_two_over_c(&h, 4, 0.1).unwrap();
        assert!(cert.passed(), "{:?}", cert.checks);
    }
}
