//! Sample an output-light extractor, audit it and wrap it into a three-block condenser.

use seedless::condensers::{
    audit_sampled, certify_wrapped, sample_output_light, wrap_condenser, RandomProcessParams,
};

fn main() -> seedless::Result<()> {
    let params = RandomProcessParams::scaled(12, 6, 0.25, 6.0, 0.2, 0.5)?;
    let cond = sample_output_light(&params, 5)?;
    let audit = audit_sampled(&cond, &params, 20, 6)?;
    println!(
        "N = 2^12, M = 2^6, d = {}: sizes [{}, {}], max multiplicity {} (R = {}), subset TV max {:.4}",
        cond.d(),
        audit.size_min,
        audit.size_max,
        audit.max_multiplicity,
        audit.light_threshold,
        audit.tv_max
    );
    let w = wrap_condenser(cond, 0.2)?;
    let cert = certify_wrapped(&w, 4, 7)?;
    println!(
        "wrapped: observed R = {}, guaranteed k = {:.3}, position-3 adversary leaves {:.3} bits",
        cert.r_observed, cert.k_bits, cert.position3_entropy
    );
    for c in &cert.checks {
        println!("  {:<22} {}", c.name, if c.passed { "ok" } else { "FAIL" });
    }
    Ok(())
}
