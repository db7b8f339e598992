//! Acceptance criteria 1–9, one PASS/FAIL line each.
//!
//! Tolerances and rng seeds are pinned below. The process exits non-zero on
//! any FAIL only when `SEEDLESS_ACCEPTANCE_STRICT=1`, so a red criterion
//! does not hide the integration targets that run after this one.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::Rng;
use seedless::adversaries::{
    build_1l_adversary, build_nosf23_adversary, build_shela23_extraction_adversary, Nosf23Case,
};
use seedless::condensers::{
    audit_sampled, derive_params, fiber_census, fiber_count, positions12_audit,
    sample_output_light, validate_constraints, wrap_condenser, ExplicitCfg, ExplicitExt,
    RandomProcessParams, ReachProfile,
};
use seedless::covering::{
    greedy_color_cover, greedy_cover, BipartiteGraph, ColoredCompleteBipartite,
};
use seedless::dist::{heavy_set, ratio, smooth_min_entropy, Dist, Prob};
use seedless::rng::stream;
use seedless::sources::{
    decompose_shela, exact_output_dist, shela_output_dist, BadBlock, BlockFunctionTable,
    FiShelaDesc, ShelaComponent, ShelaDesc, Source,
};

/// Additive slack on entropy comparisons, in bits.
const ENTROPY_TOL: f64 = 1e-9;
/// Agreement between water-filling and the bisection oracle, in bits.
const ORACLE_TOL: f64 = 1e-6;
const AC1_TIME_LIMIT: Duration = Duration::from_secs(5);
const AC5_TIME_LIMIT: Duration = Duration::from_secs(60);

struct Outcome {
    passed: bool,
    detail: String,
}

type Criterion = (&'static str, fn() -> Outcome);

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn ac1() -> Outcome {
    let guarantee = ratio(2, 25);
    let mut min_bias: Option<Prob> = None;
    let mut slowest = Duration::ZERO;
    let mut below = 0;
    let mut cases = BTreeMap::new();
    for (n, seed) in [(4u32, 101u64), (5, 102)] {
        for i in 0..100 {
            let f = BlockFunctionTable::random(n, 3, 1, &mut stream(seed, i)).unwrap();
            let start = Instant::now();
            let o = build_shela23_extraction_adversary(&f).unwrap();
            if n == 5 {
                slowest = slowest.max(start.elapsed());
            }
            below += usize::from(o.bias_exact < guarantee);
            *cases.entry(format!("{:?}", o.case)).or_insert(0) += 1;
            min_bias = Some(min_bias.map_or(o.bias_exact.clone(), |m: Prob| m.min(o.bias_exact)));
        }
    }
    let min_bias = min_bias.unwrap();
    outcome(
        below == 0 && slowest < AC1_TIME_LIMIT,
        format!("min bias {} over 200 functions, {below} below 0.08, slowest n=5 run {slowest:?}, cases {cases:?}", min_bias),
    )
}

fn delta_1l(eps: f64) -> f64 {
    (2.0 * (1.0 + eps) / ((1.0 - eps) * (1.0 - eps))).log2()
}

fn ac2() -> Outcome {
    let (n, t, eps) = (3u32, 6u32, 0.1);
    let mut violations = 0;
    let mut worst = f64::NEG_INFINITY;
    for (ell, seed) in [(2u32, 201u64), (3, 202)] {
        let bound = t as f64 / ell as f64 + delta_1l(eps);
        for i in 0..30 {
            let f = BlockFunctionTable::random(n, ell, t, &mut stream(seed, i)).unwrap();
            let cert = build_1l_adversary(&f, eps).unwrap();
            worst = worst.max(cert.oracle_entropy - bound);
            violations += usize::from(cert.oracle_entropy > bound + ENTROPY_TOL || !cert.passed());
        }
    }
    outcome(
        violations == 0,
        format!("60 functions, {violations} violations, max(oracle − bound) = {worst:.6}"),
    )
}

/// Per-case slack recomputed from the constant definitions.
fn nosf23_delta(case: Nosf23Case, eps: f64) -> f64 {
    let alpha = 0.25 - eps;
    let c0 = 0.25 - alpha / 2.0;
    let c1_5 = (0.25 - alpha / 2.0) / (0.25 + alpha * alpha / 16.0 - alpha / 4.0);
    let c3 = 1.0 - c1_5;
    let c6 = c3;
    let c1 = c3 * c1_5 / ((1.0 - c3 * c6 - c1_5) * c6);
    let c2 = 0.25 + alpha / 8.0;
    let c4 = 1.0 - alpha / 4.0;
    match case {
        Nosf23Case::Case4To1 => c1.log2() - (c0 - eps).log2(),
        _ => (c4 / ((1.0 - c4) * c3 * (c2 * c4 - eps))).log2(),
    }
}

fn ac3() -> Outcome {
    let (n, t, eps) = (4u32, 6u32, 0.1);
    let mut cases = BTreeMap::new();
    let mut violations = 0;
    let mut errors = 0;
    let mut worst = f64::NEG_INFINITY;
    for i in 0..30 {
        let f = BlockFunctionTable::random(n, 3, t, &mut stream(301, i)).unwrap();
        match build_nosf23_adversary(&f, eps) {
            Ok((cert, case)) => {
                let bound = 2.0 / 3.0 * t as f64 + nosf23_delta(case, eps);
                worst = worst.max(cert.oracle_entropy - bound);
                violations +=
                    usize::from(cert.oracle_entropy > bound + ENTROPY_TOL || !cert.passed());
                *cases.entry(case.label()).or_insert(0) += 1;
            }
            Err(_) => errors += 1,
        }
    }
    outcome(
        violations == 0 && errors == 0,
        format!("30 functions, {violations} violations, {errors} construction errors, max(oracle − bound) = {worst:.6}, cases {cases:?}"),
    )
}

fn ac4() -> Outcome {
    let mut failures = 0;
    let mut rng = stream(401, 0);
    let deltas = [0.25, 0.5, 1.0];
    for _ in 0..200 {
        let t_size = *[4usize, 16, 64, 256].choose(&mut rng).unwrap();
        let n_left = rng.gen_range(8..=200);
        let delta = *deltas.choose(&mut rng).unwrap();
        let c1 = *[0.5, 0.75, 0.9].choose(&mut rng).unwrap();
        let degree = ((t_size as f64).powf(delta).ceil() as usize).min(t_size);
        let all: Vec<u32> = (0..t_size as u32).collect();
        let adjacency: Vec<Vec<u32>> = (0..n_left)
            .map(|_| all.choose_multiple(&mut rng, degree).copied().collect())
            .collect();
        let g = BipartiteGraph::new(t_size, adjacency.clone()).unwrap();
        let r = greedy_cover(&g, 1.0, delta, c1).unwrap();
        let chosen: BTreeSet<u32> = r.chosen.iter().copied().collect();
        let covered = adjacency
            .iter()
            .filter(|l| l.iter().any(|v| chosen.contains(v)))
            .count();
        let bound = c1 / (1.0 - c1) * (t_size as f64).powf(1.0 - delta);
        let ok = covered as f64 >= c1 * n_left as f64 && r.steps as f64 <= bound.floor() + 1.0;
        failures += usize::from(!ok);
    }
    let mut color_failures = 0;
    for _ in 0..100 {
        let t_size = *[16usize, 64, 256].choose(&mut rng).unwrap();
        let delta = *deltas.choose(&mut rng).unwrap();
        let (c0, c1, c2) = (1.0, 0.3, 0.5);
        let limit = ((c0 * (t_size as f64).powf(delta)).floor() as usize).clamp(1, t_size);
        let q = rng.gen_range(1..=limit);
        let r_pal = rng.gen_range(1..=limit.min(t_size / q));
        let (nl, nr) = (rng.gen_range(4..=40), rng.gen_range(4..=40));
        let left: Vec<u32> = (0..nl).map(|_| rng.gen_range(0..r_pal as u32)).collect();
        let right: Vec<u32> = (0..nr).map(|_| rng.gen_range(0..q as u32)).collect();
        let colors: Vec<u32> = (0..nl * nr)
            .map(|e| left[e / nr] * q as u32 + right[e % nr])
            .collect();
        let h = ColoredCompleteBipartite::new(nl, nr, t_size, colors.clone()).unwrap();
        let r = greedy_color_cover(&h, c0, c1, c2, delta).unwrap();
        let chosen: BTreeSet<u32> = r.chosen.iter().copied().collect();
        let covered = colors.iter().filter(|c| chosen.contains(c)).count();
        let bound = c0 * c1 / ((1.0 - c0 * c2 - c1) * c2) * (t_size as f64).powf(2.0 * delta);
        let ok = covered as f64 > c1 * (nl * nr) as f64 && r.steps as f64 <= bound.floor() + 1.0;
        color_failures += usize::from(!ok);
    }
    outcome(
        failures == 0 && color_failures == 0,
        format!(
            "200 graphs: {failures} failures; 100 coloured instances: {color_failures} failures"
        ),
    )
}

fn ac5() -> Outcome {
    let start = Instant::now();
    let params = RandomProcessParams::scaled(12, 10, 1.0 / 16.0, 6.0, 0.2, 0.5).unwrap();
    let cond = sample_output_light(&params, 2026).unwrap();
    let audit = audit_sampled(&cond, &params, 100, 2027).unwrap();
    let elapsed = start.elapsed();
    let light_limit = 4.0 * params.p * params.big_n;
    let sizes_ok = audit
        .checks
        .iter()
        .find(|c| c.name == "set_sizes")
        .unwrap()
        .passed;
    let light_ok = (audit.max_multiplicity as f64) < light_limit;
    let tv_ok = audit.tv_failures == 0;
    let adv_ok = audit.adversary_success < params.eps;
    outcome(
        sizes_ok && light_ok && tv_ok && adv_ok && elapsed < AC5_TIME_LIMIT,
        format!(
            "sizes [{}, {}] in [{:.0}, {:.0}]: {sizes_ok}; max multiplicity {} < {light_limit}: {light_ok}; \
             subset TV max {:.4} mean {:.4}, {} of 100 above 0.2: {tv_ok}; adversary success {:.4} < 0.2: {adv_ok}; {elapsed:?}",
            audit.size_min,
            audit.size_max,
            audit.size_band.0,
            audit.size_band.1,
            audit.max_multiplicity,
            audit.tv_max,
            audit.tv_mean,
            audit.tv_failures,
            audit.adversary_success,
        ),
    )
}

fn ac6() -> Outcome {
    let cfg16 = ExplicitCfg::table_random(16, 0.25, 2, 601).unwrap();
    let profile = ReachProfile::build(&cfg16).unwrap();
    let (lo, hi) = fiber_census(&cfg16, &profile);
    let fiber16 = lo == 8 && hi == 8;

    let cfg32 = ExplicitCfg::table_random(32, 0.25, 4, 602).unwrap();
    let mut rng = stream(603, 0);
    let mut fiber32 = true;
    for _ in 0..200 {
        let s = rng.gen_range(0..1u64 << cfg32.d);
        let y2 = rng.gen_range(0..1u64 << cfg32.n2);
        let z = rng.gen_range(0..1u64 << cfg32.limb_bits);
        fiber32 &= fiber_count(&cfg32, s, y2, z).unwrap() == 64;
    }

    let counts = profile.preimage_counts(&cfg16);
    let max = counts.iter().copied().max().unwrap();
    let light_bound = 1u64 << (2 * 16 - 1 + cfg16.d);
    let light = max <= light_bound;

    let w = wrap_condenser(ExplicitExt::new(cfg16).unwrap(), 0.25).unwrap();
    let tvs = positions12_audit(&w, 20, 604).unwrap();
    let worst = tvs.iter().map(|o| o.tv).fold(0.0, f64::max);
    let somewhere = tvs.len() == 20 && worst <= 0.25;
    outcome(
        fiber16 && fiber32 && light && somewhere,
        format!(
            "n=16 fibers in [{lo}, {hi}] (expect 8); n=32 200 sampled fibers = 64: {fiber32}; \
             max preimages {max} <= 2^33 = {light_bound}: {light}; worst TV over 20 bad-half sources {worst:.6}"
        ),
    )
}

/// Smallest cap `c >= 2^-t` with `Σ max(p_i − c, 0) <= eps`, by bisection.
fn bisection_smooth(probs: &[f64], t: u32, eps: f64) -> f64 {
    let excess = |c: f64| probs.iter().map(|p| (p - c).max(0.0)).sum::<f64>();
    let floor = (-(t as f64)).exp2();
    if excess(floor) <= eps {
        return t as f64;
    }
    let (mut lo, mut hi) = (floor, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if excess(mid) <= eps {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    -hi.log2()
}

fn ac7() -> Outcome {
    let t = 3u32;
    let mut rng = stream(701, 0);
    let mut max_gap: f64 = 0.0;
    let mut heavy_violations = 0;
    for _ in 0..500 {
        let support = rng.gen_range(1..=6usize);
        let mut points: Vec<u64> = (0..1u64 << t).collect();
        points.shuffle(&mut rng);
        let weights: Vec<(u64, u128)> = points[..support]
            .iter()
            .map(|&x| (x, rng.gen_range(1..=1000u128)))
            .collect();
        let total: u128 = weights.iter().map(|w| w.1).sum();
        let dist = Dist::from_weights(t, weights.clone()).unwrap();
        let probs: Vec<f64> = weights.iter().map(|w| w.1 as f64 / total as f64).collect();
        let eps = rng.gen_range(1..50) as f64 / 100.0;
        let smooth = smooth_min_entropy(&dist, eps).entropy_bits;
        max_gap = max_gap.max((smooth - bisection_smooth(&probs, t, eps)).abs());
        for dk in [-0.5, -0.1, 0.0, 0.1, 0.5] {
            let k = smooth + dk;
            match heavy_set(&dist, k, eps) {
                Some(set) => {
                    let mass: f64 = set
                        .iter()
                        .map(|x| {
                            weights
                                .iter()
                                .find(|w| w.0 == *x)
                                .map_or(0.0, |w| w.1 as f64 / total as f64)
                        })
                        .sum();
                    let ok = smooth <= k + ENTROPY_TOL
                        && mass + 1e-12 >= eps
                        && (set.len() as f64) < k.exp2();
                    heavy_violations += usize::from(!ok);
                }
                None => heavy_violations += usize::from(smooth < k - ENTROPY_TOL),
            }
        }
    }
    outcome(
        max_gap <= ORACLE_TOL && heavy_violations == 0,
        format!("500 distributions: max |water-filling − bisection| = {max_gap:.3e} bits, {heavy_violations} heavy-set violations"),
    )
}

fn random_shela(seed: u64) -> ShelaDesc {
    let (n, ell) = (2u32, 3u32);
    let mut rng = stream(seed, 0);
    let g = rng.gen_range(1..=2usize);
    let tuples: Vec<Vec<usize>> = if g == 1 {
        (0..3).map(|i| vec![i]).collect()
    } else {
        vec![vec![0, 1], vec![0, 2], vec![1, 2]]
    };
    let raw: Vec<u64> = tuples.iter().map(|_| rng.gen_range(0..5)).collect();
    let raw = if raw.iter().all(|w| *w == 0) {
        vec![1; tuples.len()]
    } else {
        raw
    };
    let total: u64 = raw.iter().sum();
    let components = tuples
        .into_iter()
        .zip(raw)
        .map(|(tuple, w)| {
            let bad = (0..ell as usize)
                .filter(|i| !tuple.contains(i))
                .map(|i| {
                    let block = if i == 0 {
                        BadBlock::Fixed(rng.gen_range(0..4))
                    } else {
                        BadBlock::Adaptive(
                            (0..1u64 << (n * i as u32))
                                .map(|_| rng.gen_range(0..4))
                                .collect(),
                        )
                    };
                    (i, block)
                })
                .collect();
            ShelaComponent {
                tuple,
                weight: ratio(w, total),
                bad,
            }
        })
        .collect();
    ShelaDesc::new(n, ell, g, components).unwrap()
}

fn ac8() -> Outcome {
    let identity = BlockFunctionTable::from_fn(2, 3, 6, |x| x).unwrap();
    let mut mismatches = 0;
    for i in 0..50 {
        let s = random_shela(800 + i);
        let direct = shela_output_dist(&identity, &s).unwrap();
        let parts: Vec<(Prob, Dist)> = decompose_shela(&s)
            .unwrap()
            .into_iter()
            .map(|(w, fi): (Prob, FiShelaDesc)| {
                (
                    w,
                    exact_output_dist(&identity, &Source::Fishela(fi)).unwrap(),
                )
            })
            .collect();
        let mixed = Dist::mixture(6, parts.iter().map(|(w, d)| (w, d))).unwrap();
        let weight_sum: Prob = parts.iter().map(|(w, _)| w.clone()).sum();
        mismatches += usize::from(
            mixed != direct || weight_sum != Prob::from_integer(1.into()) || weight_sum.is_zero(),
        );
    }
    outcome(
        mismatches == 0,
        format!("50 sources, {mismatches} mixture mismatches (exact rationals)"),
    )
}

fn ac9() -> Outcome {
    let params = derive_params(40, 27.0, 0.1).unwrap();
    let rows = validate_constraints(&params);
    let all_pass = rows.len() == 8 && rows.iter().all(|r| r.passed);
    let mut injected = params.clone();
    injected.gamma = injected.eps / 4.0;
    let failing: Vec<String> = validate_constraints(&injected)
        .into_iter()
        .filter(|r| !r.passed)
        .map(|r| r.name)
        .collect();
    let exact_row = failing == ["gamma_le_eps_over_5"];
    let tightest = rows
        .iter()
        .map(|r| {
            (
                r.name.as_str(),
                if r.relation == "<=" {
                    r.rhs / r.lhs
                } else {
                    r.lhs / r.rhs
                },
            )
        })
        .fold(("", f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
    outcome(
        all_pass && exact_row,
        format!(
            "8 rows pass at (40, 27, 0.1): {all_pass} (tightest {} with ratio {:.4}); γ = ε/4 fails {failing:?}",
            tightest.0, tightest.1
        ),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("anti-extraction bias", ac1),
        ("(1,ell) condensing bound", ac2),
        ("(2,3)-NOSF bound", ac3),
        ("covering guarantees", ac4),
        ("random-process condenser", ac5),
        ("explicit extractor", ac6),
        ("entropy oracle", ac7),
        ("decomposition identity", ac8),
        ("constraint table", ac9),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        failed += usize::from(!o.passed);
        println!(
            "AC{} {} [{name}] {} ({:.1}s)",
            i + 1,
            if o.passed { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {}/9 criteria pass", 9 - failed);
    if failed > 0 && std::env::var("SEEDLESS_ACCEPTANCE_STRICT").as_deref() == Ok("1") {
        std::process::exit(1);
    }
}
