//! Entropy bookkeeping against independent oracles.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use proptest::prelude::*;
use seedless::dist::{
    excess_above, heavy_set, log2_prob, min_entropy, ratio, smooth_min_entropy,
    smooth_min_entropy_exact, tv_distance, tv_distance_exact, tv_entropy_bound_check,
    tv_from_uniform_exact, Dist, Prob,
};

fn weights_strategy(bits: u32) -> impl Strategy<Value = Vec<(u64, u64)>> {
    prop::collection::btree_map(0..1u64 << bits, 1..1000u64, 1..=(1usize << bits).min(12))
        .prop_map(|m| m.into_iter().collect())
}

fn dist_of(bits: u32, w: &[(u64, u64)]) -> Dist {
    Dist::from_weights(bits, w.iter().map(|&(x, c)| (x, c as u128))).unwrap()
}

/// Exact smooth min-entropy cap by trying every breakpoint of the excess.
///
/// The excess is piecewise linear in the cap with kinks at the atoms, so the
/// optimum is either the `2^-t` floor or `(S_j − eps)/j` for the `j` largest
/// atoms. Every candidate is tested for feasibility and the smallest wins.
fn cap_oracle(p: &Dist, eps: &Prob) -> Prob {
    let floor = Prob::new(BigInt::one(), BigInt::one() << p.bits() as usize);
    let atoms: Vec<Prob> = p.iter().map(|(_, q)| q.clone()).collect();
    let excess = |c: &Prob| -> Prob { atoms.iter().filter(|q| *q > c).map(|q| q - c).sum() };
    let mut candidates = vec![floor.clone()];
    for j in 1..=atoms.len() {
        let mut sorted = atoms.clone();
        sorted.sort_by(|a, b| b.cmp(a));
        let s: Prob = sorted[..j].iter().cloned().sum();
        candidates.push((s - eps) / Prob::from_integer(BigInt::from(j)));
    }
    candidates
        .into_iter()
        .filter(|c| *c >= floor && excess(c) <= *eps)
        .min()
        .unwrap()
}

#[test]
fn min_entropy_of_uniform_and_point() {
    assert_eq!(min_entropy(&Dist::uniform(5).unwrap()), 5.0);
    assert_eq!(min_entropy(&Dist::point(5, 17).unwrap()), 0.0);
}

#[test]
fn smoothing_a_point_mass_by_half() {
    // Point mass at 0 over 2 bits: cap 1/2 removes exactly 1/2.
    let p = Dist::point(2, 0).unwrap();
    let r = smooth_min_entropy_exact(&p, &ratio(1, 2));
    assert_eq!(r.cap, ratio(1, 2));
    assert_eq!(r.removed_mass, ratio(1, 2));
    assert!((r.entropy_bits - 1.0).abs() < 1e-12);
}

#[test]
fn smoothing_stops_at_the_uniform_floor() {
    let p = Dist::from_weights(2, [(0, 2u128), (1, 1), (2, 1)]).unwrap();
    let r = smooth_min_entropy(&p, 0.9);
    assert_eq!(r.cap, ratio(1, 4));
    assert_eq!(r.entropy_bits, 2.0);
}

#[test]
fn bound_check_on_a_skewed_distribution() {
    let p = Dist::from_weights(3, [(0, 6u128), (1, 1), (2, 1)]).unwrap();
    let set: BTreeSet<u64> = [0].into();
    let b = tv_entropy_bound_check(&p, &set, 0.25).unwrap();
    // log2(1 / (3/4 − 1/4)) = 1
    assert!((b.bound - 1.0).abs() < 1e-9);
    assert!(b.holds);
}

proptest! {
    #[test]
    fn water_filling_matches_breakpoint_oracle(w in weights_strategy(4), e in 0u64..100) {
        let p = dist_of(4, &w);
        let eps = ratio(e, 100);
        let r = smooth_min_entropy_exact(&p, &eps);
        prop_assert_eq!(&r.cap, &cap_oracle(&p, &eps));
        prop_assert!(r.removed_mass <= eps);
        prop_assert_eq!(r.removed_mass, excess_above(&p, &r.cap));
    }

    #[test]
    fn min_entropy_is_minus_log_of_max_atom(w in weights_strategy(5)) {
        let p = dist_of(5, &w);
        let max: u64 = w.iter().map(|x| x.1).max().unwrap();
        let total: u64 = w.iter().map(|x| x.1).sum();
        let expected = (total as f64 / max as f64).log2();
        prop_assert!((min_entropy(&p) - expected).abs() < 1e-9);
        prop_assert!((-log2_prob(&p.max_atom()) - expected).abs() < 1e-9);
    }

    #[test]
    fn smooth_entropy_is_monotone_and_bounded(w in weights_strategy(4), a in 0u64..50, b in 0u64..50) {
        let p = dist_of(4, &w);
        let (lo, hi) = (a.min(b), a.max(b));
        let h_lo = smooth_min_entropy_exact(&p, &ratio(lo, 100)).entropy_bits;
        let h_hi = smooth_min_entropy_exact(&p, &ratio(hi, 100)).entropy_bits;
        prop_assert!(min_entropy(&p) <= h_lo + 1e-12);
        prop_assert!(h_lo <= h_hi + 1e-12);
        prop_assert!(h_hi <= 4.0 + 1e-12);
    }

    #[test]
    fn tv_is_a_metric(a in weights_strategy(3), b in weights_strategy(3), c in weights_strategy(3)) {
        let (p, q, r) = (dist_of(3, &a), dist_of(3, &b), dist_of(3, &c));
        let pq = tv_distance_exact(&p, &q).unwrap();
        prop_assert_eq!(&pq, &tv_distance_exact(&q, &p).unwrap());
        prop_assert!(tv_distance_exact(&p, &p).unwrap().is_zero());
        let via = tv_distance(&p, &r).unwrap() + tv_distance(&r, &q).unwrap();
        prop_assert!(tv_distance(&p, &q).unwrap() <= via + 1e-12);
        prop_assert_eq!(tv_from_uniform_exact(&p), tv_distance_exact(&p, &Dist::uniform(3).unwrap()).unwrap());
    }

    #[test]
    fn tv_equals_best_distinguishing_set(a in weights_strategy(3), b in weights_strategy(3)) {
        let (p, q) = (dist_of(3, &a), dist_of(3, &b));
        let mut best = Prob::zero();
        for mask in 0u32..256 {
            let set: Vec<u64> = (0..8u64).filter(|x| mask >> x & 1 == 1).collect();
            let d = p.prob_of(set.iter().copied()) - q.prob_of(set.iter().copied());
            best = best.max(d);
        }
        prop_assert_eq!(best, tv_distance_exact(&p, &q).unwrap());
    }

    #[test]
    fn heavy_set_witnesses_the_entropy_bound(w in weights_strategy(4), e in 1u64..60, dk in -20i32..20) {
        let p = dist_of(4, &w);
        let eps = e as f64 / 100.0;
        let smooth = smooth_min_entropy(&p, eps).entropy_bits;
        let k = smooth + dk as f64 / 10.0;
        if let Some(set) = heavy_set(&p, k, eps) {
            prop_assert!(smooth <= k + 1e-9);
            prop_assert!(p.prob_of(set.iter().copied()) >= ratio(e, 100));
            prop_assert!((set.len() as f64) < k.exp2());
        } else {
            prop_assert!(smooth >= k - 1e-9 || set_size_bound_blocks(&p, k, eps));
        }
    }

    #[test]
    fn mixture_of_points_reproduces_weights(w in weights_strategy(4)) {
        let total: u64 = w.iter().map(|x| x.1).sum();
        let comps: Vec<(Prob, Dist)> = w
            .iter()
            .map(|&(x, c)| (ratio(c, total), Dist::point(4, x).unwrap()))
            .collect();
        let mixed = Dist::mixture(4, comps.iter().map(|(a, b)| (a, b))).unwrap();
        prop_assert_eq!(mixed, dist_of(4, &w));
    }
}

/// True when no prefix of the heaviest atoms below `2^k` in size reaches
/// mass `eps`, the only other reason a heavy set may be missing.
fn set_size_bound_blocks(p: &Dist, k: f64, eps: f64) -> bool {
    let mut acc = 0.0;
    for (i, (_, q)) in p.atoms_descending().into_iter().enumerate() {
        if (i as f64 + 1.0) >= k.exp2() {
            return true;
        }
        acc += seedless::dist::prob_to_f64(&q);
        if acc >= eps {
            return false;
        }
    }
    true
}
