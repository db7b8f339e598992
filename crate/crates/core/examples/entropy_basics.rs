//! Min-entropy, smooth min-entropy and TV distance on a skewed distribution.

use std::collections::BTreeSet;

use seedless::dist::{
    heavy_set, min_entropy, prob_to_string, ratio, smooth_min_entropy_exact,
    tv_entropy_bound_check, tv_from_uniform_exact, Dist,
};

fn main() -> seedless::Result<()> {
    // Half the mass on 0, the rest spread over 7 other 4-bit outcomes.
    let p = Dist::from_weights(4, (0..8).map(|x| (x, if x == 0 { 7u128 } else { 1 })))?;
    println!("min-entropy           {:.4} bits", min_entropy(&p));
    for (num, den) in [(0, 1), (1, 10), (1, 4), (1, 2)] {
        let r = smooth_min_entropy_exact(&p, &ratio(num, den));
        println!(
            "smooth eps={num}/{den:<3}      {:.4} bits (cap {}, removed {})",
            r.entropy_bits,
            prob_to_string(&r.cap),
            prob_to_string(&r.removed_mass)
        );
    }
    println!(
        "TV from uniform       {}",
        prob_to_string(&tv_from_uniform_exact(&p))
    );
    if let Some(set) = heavy_set(&p, 1.5, 0.1) {
        println!("heavy set for k=1.5   {set:?}");
    }
    let b = tv_entropy_bound_check(&p, &BTreeSet::from([0]), 0.1)?;
    println!(
        "bound from {{0}}        {:.4} bits, holds: {}",
        b.bound, b.holds
    );
    Ok(())
}
