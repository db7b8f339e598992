//! The explicit output-light extractor at n = 16 and its wrapped condenser.

use seedless::condensers::{
    certify_with_summary, explicit_reach_summary, fiber_census, wrap_condenser, ExplicitCfg,
    ExplicitExt, ReachProfile,
};

fn main() -> seedless::Result<()> {
    let cfg = ExplicitCfg::table_random(16, 0.25, 2, 3)?;
    println!(
        "n = 16: Y1 {} bits, Y2 {} bits, inner output {} bits, seed {} bits, output {} bits",
        cfg.n1, cfg.n2, cfg.inner_out, cfg.d, cfg.limb_bits
    );
    let profile = ReachProfile::build(&cfg)?;
    let (lo, hi) = fiber_census(&cfg, &profile);
    println!("fiber sizes in [{lo}, {hi}]");
    let summary = explicit_reach_summary(&cfg, &profile);
    let w = wrap_condenser(ExplicitExt::new(cfg)?, 0.25)?;
    let cert = certify_with_summary(&w, summary, 6, 4)?;
    println!(
        "max preimages {} (bound 2^33), worst bad-half TV {:.4}",
        cert.r_observed,
        cert.positions12.iter().map(|p| p.tv).fold(0.0, f64::max)
    );
    Ok(())
}
