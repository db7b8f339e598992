//! Certified sources on which a function's output has low smooth min-entropy.

use seedless::adversaries::{build_1l_adversary, build_nosf23_adversary};
use seedless::rng::stream;
use seedless::sources::BlockFunctionTable;

fn main() -> seedless::Result<()> {
    let f = BlockFunctionTable::random(3, 3, 6, &mut stream(2, 0))?;
    let one = build_1l_adversary(&f, 0.1)?;
    println!(
        "one good block of three: H^eps = {:.3} <= {:.3} = t/3 + delta, checks pass: {}",
        one.oracle_entropy,
        one.formula_bound,
        one.passed()
    );
    let (two, case) = build_nosf23_adversary(&f, 0.1)?;
    println!(
        "two good blocks of three ({}): H^eps = {:.3} <= {:.3} = 2t/3 + delta, checks pass: {}",
        case.label(),
        two.oracle_entropy,
        two.formula_bound,
        two.passed()
    );
    for line in two.trace.iter().take(4) {
        println!("  {line}");
    }
    Ok(())
}
