//! Output-light extractors and the three-block wrapper, checked against
//! a straight-line reimplementation and direct recounts.

use proptest::prelude::*;
use rand::Rng;
use seedless::condensers::{
    derive_params, explicit_ext, fiber_count, sample_output_light, subset_tv, wrap_condenser,
    ExplicitCfg, ExplicitExt, RandomProcessParams, SampledCondenser,
};
use seedless::dist::prob_to_f64;
use seedless::rng::stream;
use seedless::seeded::{SeededExtSpec, SeededExtractor, ToeplitzExt};
use seedless::Error;

/// MSB-first bit vector of `value` over `width` bits.
fn bits(value: u64, width: u32) -> Vec<u8> {
    (0..width)
        .map(|i| (value >> (width - 1 - i) & 1) as u8)
        .collect()
}

fn number(bits: &[u8]) -> u64 {
    bits.iter().fold(0, |acc, &b| (acc << 1) | b as u64)
}

fn gf_mul(a: u64, b: u64, m: u32, poly: u64) -> u64 {
    let mut acc = 0u64;
    for i in (0..m).rev() {
        acc <<= 1;
        if acc >> m & 1 == 1 {
            acc ^= poly;
        }
        if b >> i & 1 == 1 {
            acc ^= a;
        }
    }
    acc
}

/// The extractor written out step by step on bit vectors.
fn straight_line(cfg: &ExplicitCfg, x1: u64, x2: u64, s: u64) -> u64 {
    let n = cfg.n as usize;
    let h = n / 8;
    let (b1, b2) = (bits(x1, cfg.n), bits(x2, cfg.n));
    let y1 = number(&[&b1[..h], &b2[..h]].concat());
    let y2 = number(&[&b1[h..], &b2[h..]].concat());
    let r2 = bits(cfg.inner.eval(y2, s).unwrap(), cfg.inner_out);
    let mut r = r2[..n / 4].to_vec();
    *r.last_mut().unwrap() = 1;
    let r = number(&r);
    let m = cfg.limb_bits;
    (0..4).fold(0, |acc, i| {
        let a = (r >> (i * m)) & ((1 << m) - 1);
        let b = (y1 >> (i * m)) & ((1 << m) - 1);
        acc ^ gf_mul(a, b, m, cfg.field.poly())
    })
}

#[test]
fn explicit_matches_straight_line_over_every_first_block() {
    let cfg = ExplicitCfg::table_random(16, 0.25, 2, 41).unwrap();
    let mut rng = stream(42, 0);
    for _ in 0..4 {
        let x2 = rng.gen_range(0..1u64 << 16);
        for x1 in 0..1u64 << 16 {
            for s in 0..4 {
                assert_eq!(
                    explicit_ext(x1, x2, s, &cfg).unwrap(),
                    straight_line(&cfg, x1, x2, s)
                );
            }
        }
    }
}

#[test]
fn explicit_matches_straight_line_at_n32() {
    let cfg = ExplicitCfg::table_random(32, 0.25, 4, 43).unwrap();
    let mut rng = stream(44, 0);
    for _ in 0..20_000 {
        let (x1, x2, s) = (
            rng.gen::<u32>() as u64,
            rng.gen::<u32>() as u64,
            rng.gen_range(0..16),
        );
        assert_eq!(
            explicit_ext(x1, x2, s, &cfg).unwrap(),
            straight_line(&cfg, x1, x2, s)
        );
    }
}

#[test]
fn fibers_have_equal_size() {
    // The prefix is nonzero, so z ↦ ⟨r, Y1⟩ is onto and balanced.
    let cfg = ExplicitCfg::table_random(16, 0.25, 2, 45).unwrap();
    let mut rng = stream(46, 0);
    for _ in 0..50 {
        let (s, y2, z) = (
            rng.gen_range(0..4),
            rng.gen_range(0..1u64 << 14),
            rng.gen_range(0..2),
        );
        assert_eq!(fiber_count(&cfg, s, y2, z).unwrap(), 8);
    }
}

#[test]
fn inner_output_too_short_is_a_precondition_error() {
    assert!(matches!(
        ExplicitCfg::table_random(16, 0.01, 2, 0),
        Err(Error::Precondition(_))
    ));
    assert!(ExplicitCfg::table_random(24, 0.25, 2, 0).is_err());
}

#[test]
fn multiplicities_match_a_transpose_recount() {
    let params = RandomProcessParams::scaled(8, 8, 0.125, 4.0, 0.2, 0.5).unwrap();
    let cond = sample_output_light(&params, 9).unwrap();
    let mut transpose = vec![Vec::new(); 256];
    for (i, set) in cond.sets().iter().enumerate() {
        for &z in set {
            transpose[z as usize].push(i);
        }
    }
    let mult = cond.multiplicities();
    for z in 0..256 {
        assert_eq!(mult[z], transpose[z].len() as u64);
    }
    assert_eq!(cond.insertions(), mult.iter().sum::<u64>());
}

#[test]
fn set_sizes_concentrate_around_pm() {
    let params = RandomProcessParams::scaled(10, 10, 0.0625, 6.0, 0.2, 0.5).unwrap();
    let cond = sample_output_light(&params, 47).unwrap();
    let mean_expected = params.p * params.big_m;
    let sigma = (params.big_m * params.p * (1.0 - params.p)).sqrt();
    let sizes: Vec<f64> = cond.sets().iter().map(|s| s.len() as f64).collect();
    let mean = sizes.iter().sum::<f64>() / sizes.len() as f64;
    assert!((mean - mean_expected).abs() <= 4.0 * sigma / (sizes.len() as f64).sqrt());
}

#[test]
fn subset_tv_matches_floating_recount() {
    let params = RandomProcessParams::scaled(8, 6, 0.25, 4.0, 0.2, 0.5).unwrap();
    let cond = sample_output_light(&params, 48).unwrap();
    let mut rng = stream(49, 0);
    for _ in 0..20 {
        let subset: Vec<u64> = (0..16).map(|_| rng.gen_range(0..256)).collect();
        let mut q = vec![0.0; 64];
        for &i in &subset {
            let set = &cond.sets()[i as usize];
            for &z in set {
                q[z as usize] += 1.0 / (set.len() as f64 * subset.len() as f64);
            }
        }
        let tv = 0.5 * q.iter().map(|p| (p - 1.0 / 64.0).abs()).sum::<f64>();
        assert!((tv - prob_to_f64(&subset_tv(&cond, &subset))).abs() < 1e-12);
    }
}

#[test]
fn sampled_condenser_json_round_trip() {
    let params = RandomProcessParams::scaled(6, 5, 0.25, 3.0, 0.2, 0.5).unwrap();
    let cond = sample_output_light(&params, 50).unwrap();
    let back: SampledCondenser =
        serde_json::from_str(&serde_json::to_string(&cond).unwrap()).unwrap();
    assert_eq!(back, cond);
    assert_eq!(back.insertions(), cond.insertions());
}

#[test]
fn paper_profile_reports_the_smallest_feasible_k() {
    match derive_params(40, 20.0, 0.1) {
        Err(Error::Infeasible(msg)) => assert!(msg.contains("need k >= 26"), "{msg}"),
        other => panic!("expected infeasible, got {other:?}"),
    }
    assert!(derive_params(40, 27.0, 0.1).is_ok());
}

#[test]
fn wrapper_rejects_long_seeds() {
    let ext = ToeplitzExt::with_spec(SeededExtSpec::new(8, 8, 1, 0.0, 0.0).unwrap()).unwrap();
    assert!(matches!(
        wrap_condenser(ext, 0.1),
        Err(Error::Precondition(_))
    ));
}

proptest! {
    #[test]
    fn explicit_is_linear_in_the_top_bits(x1 in 0u64..1 << 16, x2 in 0u64..1 << 16, a in 0u64..4, b in 0u64..4, s in 0u64..4) {
        let cfg = ExplicitCfg::table_random(16, 0.25, 2, 51).unwrap();
        let (a, b) = (a << 14, b << 14);
        let e = |x: u64| explicit_ext(x, x2, s, &cfg).unwrap();
        prop_assert_eq!(e(x1 ^ a ^ b) ^ e(x1 ^ b), e(x1 ^ a) ^ e(x1));
    }

    #[test]
    fn wrapped_output_reads_only_the_seed_prefix(x1 in 0u64..1 << 16, x2 in 0u64..1 << 16, x3 in 0u64..1 << 16, low in 0u64..1 << 14) {
        let w = wrap_condenser(ExplicitExt::new(ExplicitCfg::table_random(16, 0.25, 2, 52).unwrap()).unwrap(), 0.25).unwrap();
        let x3b = (x3 & !((1 << 14) - 1)) | low;
        prop_assert_eq!(w.eval(x1, x2, x3).unwrap(), w.eval(x1, x2, x3b).unwrap());
        prop_assert_eq!(w.eval(x1, x2, x3).unwrap(), explicit_ext(x1, x2, x3 >> 14, w.ext().cfg()).unwrap());
    }
}
