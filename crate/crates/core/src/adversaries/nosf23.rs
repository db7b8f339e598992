//! Condensing is impossible for uniform (2,3)-NOSF sources.
//!
//! Given `h` on three blocks, one of three situations always holds:
//!
//! * many prefixes `(x1, x2)` reach many outputs over `x3`: cover them with
//!   few outputs and let block 3 steer into the cover;
//! * the same with `(x1, x3)` and block 2, which then reads the later good
//!   block 3 (allowed for NOSF, not for SHELA);
//! * otherwise some `z1` has large sets `P2`, `P3` on which every row and
//!   column sees few outputs; a colour cover of `P2 × P3` gives a small set
//!   hit with constant probability once block 1 is fixed to `z1`.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    certify, distinct_outputs, make_bad_block, CertifyInput, CondenseCertificate, OutputSet,
    Witness,
};
use crate::check::{ge_slack, le_slack, Check};
use crate::covering::{
    greedy_color_cover_with_alphabet, greedy_cover_with_alphabet, BipartiteGraph,
    ColoredCompleteBipartite,
};
use crate::sources::{BadBlock, BlockFunctionTable, NosfDesc, Source, MAX_ENUM_BITS};
use crate::{Error, Result};

/// The constants of the (2,3)-NOSF construction, all derived from `eps`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Nosf23Constants {
    pub eps: f64,
    pub alpha: f64,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
    pub c6: f64,
}

impl Nosf23Constants {
    pub fn from_eps(eps: f64) -> Result<Self> {
        if !(0.0..0.25).contains(&eps) {
            return Err(Error::Domain(format!("eps = {eps} must lie in [0, 1/4)")));
        }
        let alpha = 0.25 - eps;
        let c0 = 0.25 - alpha / 2.0;
        let c2 = 0.25 + alpha / 8.0;
        let c4 = 1.0 - alpha / 4.0;
        let c5 = (0.25 - alpha / 2.0) / (0.25 + alpha * alpha / 16.0 - alpha / 4.0);
        let c3 = 1.0 - c5;
        let c6 = c3;
        let c1 = c3 * c5 / ((1.0 - c3 * c6 - c5) * c6);
        Ok(Nosf23Constants {
            eps,
            alpha,
            c0,
            c1,
            c2,
            c3,
            c4,
            c5,
            c6,
        })
    }

    /// The six inequalities the construction relies on.
    pub fn inequality_checks(&self) -> Vec<Check> {
        let c = self;
        let row =
            |name: &str, inv: &str, ok: bool, detail: String| Check::new(name, inv, ok, detail);
        vec![
            row(
                "eps_below_c0",
                "eps < c0 <= 1",
                c.eps < c.c0 && c.c0 <= 1.0,
                format!("c0 = {}", c.c0),
            ),
            row(
                "eps_below_c2c4",
                "eps < c2·c4",
                c.eps < c.c2 * c.c4,
                format!("c2·c4 = {}", c.c2 * c.c4),
            ),
            row(
                "c4_below_one",
                "c4 < 1",
                c.c4 < 1.0,
                format!("c4 = {}", c.c4),
            ),
            row(
                "c2_below_half",
                "c2 < 1/2",
                c.c2 < 0.5,
                format!("c2 = {}", c.c2),
            ),
            row(
                "c0_within_colour_mass",
                "c0 <= c5·(1 − 2c2)^2",
                le_slack(c.c0, c.c5 * (1.0 - 2.0 * c.c2).powi(2)),
                format!("c5·(1 − 2c2)^2 = {}", c.c5 * (1.0 - 2.0 * c.c2).powi(2)),
            ),
            row(
                "colour_cover_feasible",
                "c3·c6 + c5 < 1",
                c.c3 * c.c6 + c.c5 < 1.0,
                format!("c3·c6 + c5 = {}", c.c3 * c.c6 + c.c5),
            ),
        ]
    }

    /// Additive slack when block 1 is fixed.
    pub fn delta_case1(&self) -> f64 {
        (self.c1 / (self.c0 - self.eps)).log2()
    }

    /// Additive slack when block 3 (or block 2) is adversarial.
    pub fn delta_case23(&self) -> f64 {
        (self.c4 / ((1.0 - self.c4) * self.c3 * (self.c2 * self.c4 - self.eps))).log2()
    }

    pub fn delta_worst(&self) -> f64 {
        self.delta_case1().max(self.delta_case23())
    }
}

/// Which situation the construction found.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Nosf23Case {
    /// Block 3 steered by `(x1, x2)`.
    Case2,
    /// Block 2 steered by `(x1, x3)`; NOSF only.
    Case3,
    /// Neither of the above, so block 1 is fixed.
    Case4To1,
}

impl Nosf23Case {
    pub fn label(&self) -> &'static str {
        match self {
            Nosf23Case::Case2 => "case2",
            Nosf23Case::Case3 => "case3",
            Nosf23Case::Case4To1 => "case4_to_1",
        }
    }

    pub fn delta(&self, c: &Nosf23Constants) -> f64 {
        match self {
            Nosf23Case::Case4To1 => c.delta_case1(),
            _ => c.delta_case23(),
        }
    }
}

/// Support sizes of `x_free ↦ h` for every pair of the other two blocks.
/// `free` is the index of the free block (1 or 2); the result is indexed by
/// `x1 · N + x_other`.
fn pair_supports(h: &BlockFunctionTable, free: usize) -> Vec<u32> {
    let n = h.n();
    let big_n = 1u64 << n;
    (0..big_n * big_n)
        .into_par_iter()
        .map(|pair| {
            let (x1, other) = (pair >> n, pair & (big_n - 1));
            distinct_outputs(big_n, |y| {
                let packed = if free == 2 {
                    (x1 << (2 * n)) | (other << n) | y
                } else {
                    (x1 << (2 * n)) | (y << n) | other
                };
                h.eval(packed)
            })
            .len() as u32
        })
        .collect()
}

/// Cover pairs whose free block reaches many outputs, then steer the free
/// block into the cover.
fn steer_pairs(
    h: &BlockFunctionTable,
    c: &Nosf23Constants,
    alphabet: f64,
    free: usize,
    pairs: &[u64],
    trace: &mut Vec<String>,
) -> Result<(BTreeSet<u64>, BadBlock)> {
    let n = h.n();
    let big_n = 1u64 << n;
    let place = move |pair: u64, y: u64| {
        let (x1, other) = (pair >> n, pair & (big_n - 1));
        if free == 2 {
            (x1 << (2 * n)) | (other << n) | y
        } else {
            (x1 << (2 * n)) | (y << n) | other
        }
    };
    let lists: Vec<Vec<u32>> = pairs
        .par_iter()
        .map(|&p| distinct_outputs(big_n, |y| h.eval(place(p, y))))
        .collect();
    let right: Vec<u32> = {
        let mut all: Vec<u32> = lists.iter().flatten().copied().collect();
        all.sort_unstable();
        all.dedup();
        all
    };
    let index: BTreeMap<u32, u32> = right
        .iter()
        .enumerate()
        .map(|(i, &z)| (z, i as u32))
        .collect();
    let adjacency = lists
        .into_iter()
        .map(|l| l.into_iter().map(|z| index[&z]).collect())
        .collect();
    let graph = BipartiteGraph::new(right.len(), adjacency)?;
    let cover = greedy_cover_with_alphabet(&graph, c.c3, 1.0 / 3.0, c.c4, alphabet)?;
    if !cover.passed() {
        return Err(Error::Construction(format!(
            "greedy cover failed its checks: {:?}",
            cover.checks
        )));
    }
    trace.push(format!(
        "greedy cover over {} pairs: {} outputs (bound {:.3}), {} pairs covered",
        pairs.len(),
        cover.steps,
        cover.bound,
        cover.covered
    ));
    let heavy: BTreeSet<u64> = cover
        .chosen
        .iter()
        .map(|&i| right[i as usize] as u64)
        .collect();
    let members = OutputSet::new(h.t(), &heavy);
    let h2 = h.clone();
    let block = make_bad_block(2 * n, move |pair| {
        (0..big_n)
            .find(|&y| members.contains(h2.eval(place(pair, y))))
            .unwrap_or(0)
    })?;
    Ok((heavy, block))
}

pub(crate) fn nosf23_witness(
    h: &BlockFunctionTable,
    eps: f64,
    alphabet: f64,
) -> Result<(Witness, Nosf23Case)> {
    if h.ell() != 3 {
        return Err(Error::Domain(format!("expected 3 blocks, got {}", h.ell())));
    }
    if !(eps > 0.0 && eps < 0.25) {
        return Err(Error::Domain(format!("eps = {eps} must lie in (0, 1/4)")));
    }
    let n = h.n();
    if 3 * n > MAX_ENUM_BITS {
        return Err(Error::too_large(
            "(2,3)-NOSF case scan",
            3 * n,
            MAX_ENUM_BITS,
        ));
    }
    let c = Nosf23Constants::from_eps(eps)?;
    let big_n = 1u64 << n;
    let pairs_total = (big_n * big_n) as f64;
    let threshold = c.c3 * alphabet.cbrt();
    let mut trace = vec![format!("T = {alphabet}, c3·T^(1/3) = {threshold:.4}")];

    let sup12 = pair_supports(h, 2);
    let p12: Vec<u64> = (0..big_n * big_n)
        .filter(|&p| ge_slack(sup12[p as usize] as f64, threshold))
        .collect();
    trace.push(format!("|P12| = {} of {}", p12.len(), pairs_total));
    if ge_slack(p12.len() as f64, c.c2 * pairs_total) {
        let (heavy, block) = steer_pairs(h, &c, alphabet, 2, &p12, &mut trace)?;
        let src = NosfDesc::new(n, 3, vec![0, 1], BTreeMap::from([(2, block)]))?;
        return Ok((
            Witness {
                source: Source::Nosf(src),
                heavy_set: heavy,
                hit_guarantee: c.c2 * c.c4,
                case: Nosf23Case::Case2.label().into(),
                trace,
            },
            Nosf23Case::Case2,
        ));
    }

    let sup13 = pair_supports(h, 1);
    let p13: Vec<u64> = (0..big_n * big_n)
        .filter(|&p| ge_slack(sup13[p as usize] as f64, threshold))
        .collect();
    trace.push(format!("|P13| = {} of {}", p13.len(), pairs_total));
    if ge_slack(p13.len() as f64, c.c2 * pairs_total) {
        let (heavy, block) = steer_pairs(h, &c, alphabet, 1, &p13, &mut trace)?;
        let src = NosfDesc::new(n, 3, vec![0, 2], BTreeMap::from([(1, block)]))?;
        return Ok((
            Witness {
                source: Source::Nosf(src),
                heavy_set: heavy,
                hit_guarantee: c.c2 * c.c4,
                case: Nosf23Case::Case3.label().into(),
                trace,
            },
            Nosf23Case::Case3,
        ));
    }

    // Neither pair family is large: pick z1 with the most light columns.
    let light = |sup: &[u32], z1: u64| -> Vec<u64> {
        (0..big_n)
            .filter(|&x| !ge_slack(sup[(z1 * big_n + x) as usize] as f64, threshold))
            .collect()
    };
    let z1 = (0..big_n)
        .max_by(|&a, &b| {
            let sa = light(&sup12, a).len() + light(&sup13, a).len();
            let sb = light(&sup12, b).len() + light(&sup13, b).len();
            sa.cmp(&sb).then(b.cmp(&a))
        })
        .expect("at least one block value");
    let p2 = light(&sup12, z1);
    let p3 = light(&sup13, z1);
    let side_floor = (1.0 - 2.0 * c.c2) * big_n as f64;
    trace.push(format!(
        "z1 = {z1}, |P2| = {}, |P3| = {}, floor {side_floor:.3}",
        p2.len(),
        p3.len()
    ));
    if !(ge_slack(p2.len() as f64, side_floor) && ge_slack(p3.len() as f64, side_floor)) {
        return Err(Error::Construction(format!(
            "no case fired: |P2| = {}, |P3| = {} below (1 − 2c2)·N = {side_floor}",
            p2.len(),
            p3.len()
        )));
    }
    let mut colours: Vec<u32> = Vec::with_capacity(p2.len() * p3.len());
    for &u in &p2 {
        for &v in &p3 {
            colours.push(h.eval((z1 << (2 * n)) | (u << n) | v) as u32);
        }
    }
    let palette: Vec<u32> = {
        let mut p = colours.clone();
        p.sort_unstable();
        p.dedup();
        p
    };
    let index: BTreeMap<u32, u32> = palette
        .iter()
        .enumerate()
        .map(|(i, &z)| (z, i as u32))
        .collect();
    let graph = ColoredCompleteBipartite::new(
        p2.len(),
        p3.len(),
        palette.len(),
        colours.iter().map(|z| index[z]).collect(),
    )?;
    let cover = greedy_color_cover_with_alphabet(&graph, c.c3, c.c5, c.c6, 1.0 / 3.0, alphabet)?;
    if !cover.passed() {
        return Err(Error::Construction(format!(
            "colour cover failed its checks: {:?}",
            cover.checks
        )));
    }
    trace.push(format!(
        "colour cover: {} colours (bound {:.3}), {} of {} edges",
        cover.steps,
        cover.bound,
        cover.covered,
        p2.len() * p3.len()
    ));
    let heavy: BTreeSet<u64> = cover
        .chosen
        .iter()
        .map(|&i| palette[i as usize] as u64)
        .collect();
    let src = NosfDesc::new(n, 3, vec![1, 2], BTreeMap::from([(0, BadBlock::Fixed(z1))]))?;
    Ok((
        Witness {
            source: Source::Nosf(src),
            heavy_set: heavy,
            hit_guarantee: c.c0,
            case: Nosf23Case::Case4To1.label().into(),
            trace,
        },
        Nosf23Case::Case4To1,
    ))
}

/// Build a uniform (2,3)-NOSF source on which `f` has smooth min-entropy
/// at most `(2/3)·t + delta`, and certify it exactly.
pub fn build_nosf23_adversary(
    f: &BlockFunctionTable,
    eps: f64,
) -> Result<(CondenseCertificate, Nosf23Case)> {
    let alphabet = (f.t() as f64).exp2();
    let (w, case) = nosf23_witness(f, eps, alphabet)?;
    let c = Nosf23Constants::from_eps(eps)?;
    let mut trace = w.trace;
    trace.extend(
        c.inequality_checks()
            .iter()
            .map(|k| format!("{}: {}", k.name, if k.passed { "ok" } else { "violated" })),
    );
    let cert = certify(CertifyInput {
        theorem: "nosf23",
        case: w.case,
        f,
        source: w.source,
        eps,
        heavy_set: w.heavy_set,
        hit_guarantee: w.hit_guarantee,
        rate: 2.0 / 3.0,
        delta: case.delta(&c),
        delta_terms: vec![
            ("case1".into(), c.delta_case1()),
            ("case2_3".into(), c.delta_case23()),
        ],
        trace,
    })?;
    Ok((cert, case))
}
