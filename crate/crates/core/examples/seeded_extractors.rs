//! Toeplitz hashing against the leftover-hash bound, and an output-lightness audit.

use seedless::seeded::{
    audit_output_light, leftover_hash_bound, worst_flat_source, SeededExtSpec, TableExt,
    ToeplitzExt,
};

fn main() -> seedless::Result<()> {
    let ext = ToeplitzExt::new(8, 2)?;
    let worst = worst_flat_source(&ext, 5, true, 4, 200, 1)?;
    println!(
        "Toeplitz 8->2: worst strong error found on a 2^5 flat source {:.4} (bound {:.4}, {} evaluations)",
        worst.error,
        leftover_hash_bound(5.0, 2.0),
        worst.evaluations
    );
    let table = TableExt::random(SeededExtSpec::new(12, 3, 6, 0.0, 0.0)?, 7)?;
    let report = audit_output_light(&table, 1 << 10);
    println!(
        "random table 12->6 with 3 seed bits: max preimages {} (threshold {}), passed {}",
        report.max_preimages, report.threshold, report.passed
    );
    Ok(())
}
