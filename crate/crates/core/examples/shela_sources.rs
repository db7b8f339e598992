//! A SHELA source as a mixture of fixed-index sources, and its output distribution.

use std::collections::BTreeMap;

use seedless::dist::{ratio, Dist, Prob};
use seedless::sources::{
    check_almost_cg, decompose_shela, exact_output_dist, shela_output_dist, BadBlock,
    BlockFunctionTable, ShelaComponent, ShelaDesc, Source,
};

fn main() -> seedless::Result<()> {
    // Three 2-bit blocks. With probability 1/3 block 0 is good and the rest
    // copy it; otherwise block 2 is good after two fixed blocks.
    let copy = BadBlock::Adaptive((0..16).map(|v| v >> 2).collect());
    let first = ShelaComponent {
        tuple: vec![0],
        weight: ratio(1, 3),
        bad: BTreeMap::from([(1, BadBlock::Adaptive(vec![0, 1, 2, 3])), (2, copy)]),
    };
    let second = ShelaComponent {
        tuple: vec![2],
        weight: ratio(2, 3),
        bad: BTreeMap::from([(0, BadBlock::Fixed(1)), (1, BadBlock::Fixed(2))]),
    };
    let s = ShelaDesc::new(2, 3, 1, vec![first, second])?;
    let xor = BlockFunctionTable::from_fn(2, 3, 2, |x| (x >> 4) ^ (x >> 2 & 3) ^ (x & 3))?;
    println!("f(X) directly:  {:?}", shela_output_dist(&xor, &s)?);
    let parts: Vec<(Prob, Dist)> = decompose_shela(&s)?
        .into_iter()
        .map(|(w, d)| {
            println!(
                "  component good={:?} almost-CG at k=2: {}",
                d.good(),
                check_almost_cg(&d, 2.0).unwrap()
            );
            Ok((w, exact_output_dist(&xor, &Source::Fishela(d))?))
        })
        .collect::<seedless::Result<_>>()?;
    let mixed = Dist::mixture(2, parts.iter().map(|(w, d)| (w, d)))?;
    println!("as a mixture:   {mixed:?}");
    Ok(())
}
