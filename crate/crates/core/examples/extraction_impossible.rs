//! No function extracts a bit from three blocks with two uniform: build the biasing source.

use seedless::adversaries::build_shela23_extraction_adversary;
use seedless::dist::prob_to_string;
use seedless::rng::stream;
use seedless::sources::BlockFunctionTable;

fn main() -> seedless::Result<()> {
    let majority = BlockFunctionTable::from_fn(4, 3, 1, |x| {
        let ones = (0..3).filter(|i| (x >> (4 * i)) & 0xF >= 8).count();
        u64::from(ones >= 2)
    })?;
    let random = BlockFunctionTable::random(4, 3, 1, &mut stream(1, 0))?;
    for (name, f) in [("majority of top bits", majority), ("random table", random)] {
        let o = build_shela23_extraction_adversary(&f)?;
        println!(
            "{name:<22} case {:?}, bias {} (guaranteed {:.3})",
            o.case,
            prob_to_string(&o.bias_exact),
            o.guaranteed_bias
        );
    }
    Ok(())
}
