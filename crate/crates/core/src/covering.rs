//! Greedy covering on bipartite graphs and on edge-coloured complete
//! bipartite graphs, with their certified size bounds.

use serde::{Deserialize, Serialize};

use crate::check::{all_required_pass, ge_slack, Check};
use crate::{Error, Result};

/// Bipartite graph with `n_left` left vertices and `n_right` right vertices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BipartiteGraph {
    n_right: usize,
    adjacency: Vec<Vec<u32>>,
}

impl BipartiteGraph {
    /// Neighbour lists are sorted and deduplicated.
    pub fn new(n_right: usize, mut adjacency: Vec<Vec<u32>>) -> Result<Self> {
        for (u, list) in adjacency.iter_mut().enumerate() {
            list.sort_unstable();
            list.dedup();
            if let Some(&v) = list.last() {
                if v as usize >= n_right {
                    return Err(Error::Domain(format!(
                        "left vertex {u} has neighbour {v} >= {n_right}"
                    )));
                }
            }
        }
        Ok(BipartiteGraph { n_right, adjacency })
    }

    pub fn n_left(&self) -> usize {
        self.adjacency.len()
    }

    pub fn n_right(&self) -> usize {
        self.n_right
    }

    pub fn neighbors(&self, u: usize) -> &[u32] {
        &self.adjacency[u]
    }

    /// Left vertices adjacent to at least one vertex of `chosen`.
    pub fn neighborhood_size(&self, chosen: &[u32]) -> usize {
        let mut mark = vec![false; self.n_right];
        for &v in chosen {
            mark[v as usize] = true;
        }
        self.adjacency
            .iter()
            .filter(|list| list.iter().any(|&v| mark[v as usize]))
            .count()
    }
}

/// Complete bipartite graph whose edge `(u, v)` carries colour
/// `colors[u · n_right + v] < n_colors`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColoredCompleteBipartite {
    n_left: usize,
    n_right: usize,
    n_colors: usize,
    colors: Vec<u32>,
}

impl ColoredCompleteBipartite {
    pub fn new(n_left: usize, n_right: usize, n_colors: usize, colors: Vec<u32>) -> Result<Self> {
        if colors.len() != n_left * n_right {
            return Err(Error::Domain(format!(
                "colour matrix has {} entries, expected {}",
                colors.len(),
                n_left * n_right
            )));
        }
        if let Some(c) = colors.iter().find(|&&c| c as usize >= n_colors) {
            return Err(Error::Domain(format!("colour {c} >= {n_colors}")));
        }
        Ok(ColoredCompleteBipartite {
            n_left,
            n_right,
            n_colors,
            colors,
        })
    }

    pub fn n_left(&self) -> usize {
        self.n_left
    }

    pub fn n_right(&self) -> usize {
        self.n_right
    }

    pub fn n_colors(&self) -> usize {
        self.n_colors
    }

    pub fn color(&self, u: usize, v: usize) -> u32 {
        self.colors[u * self.n_right + v]
    }

    /// Edges whose colour lies in `chosen`.
    pub fn edges_colored_by(&self, chosen: &[u32]) -> u64 {
        let mut mark = vec![false; self.n_colors];
        for &c in chosen {
            mark[c as usize] = true;
        }
        self.colors.iter().filter(|&&c| mark[c as usize]).count() as u64
    }

    fn distinct_colors(
        &self,
        it: impl Iterator<Item = u32>,
        stamp: &mut [usize],
        id: usize,
    ) -> usize {
        let mut count = 0;
        for c in it {
            if stamp[c as usize] != id {
                stamp[c as usize] = id;
                count += 1;
            }
        }
        count
    }
}

/// Outcome of a greedy cover.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverResult {
    /// Picked right vertices (or colours) in pick order.
    pub chosen: Vec<u32>,
    /// Covered left vertices (or coloured edges).
    pub covered: u64,
    pub steps: usize,
    /// The lemma's cardinality bound.
    pub bound: f64,
    /// Residual degree (or colour count) of each pick.
    pub gains: Vec<u64>,
    pub checks: Vec<Check>,
}

impl CoverResult {
    pub fn passed(&self) -> bool {
        all_required_pass(&self.checks)
    }
}

fn validate_fraction(name: &str, c: f64) -> Result<()> {
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::Precondition(format!(
            "{name} = {c} must lie in (0, 1)"
        )));
    }
    Ok(())
}

/// Whether `deg >= c0 · T^delta` (with a relative slack of `1e-9`).
pub fn meets_degree(deg: usize, c0: f64, alphabet: f64, delta: f64) -> bool {
    ge_slack(deg as f64, c0 * alphabet.powf(delta))
}

fn size_checks(steps: usize, bound: f64, checks: &mut Vec<Check>) {
    checks.push(Check::new(
        "size_within_ceil_bound",
        "|chosen| <= ceil(bound)",
        steps as f64 <= bound.ceil(),
        format!("{steps} picks, bound {bound:.6}"),
    ));
    checks.push(Check::new(
        "size_within_floor_bound_plus_one",
        "|chosen| <= floor(bound) + 1",
        steps as f64 <= bound.floor() + 1.0,
        format!("{steps} picks, bound {bound:.6}"),
    ));
}

/// Repeatedly pick the right vertex of largest residual degree (ties to the
/// smallest index), remove it and its neighbours, and stop once at least
/// `c1 · N` left vertices are covered.
///
/// `c0` and `delta` certify that every left degree is at least
/// `c0 · T^delta`, where `T = n_right`.
pub fn greedy_cover(g: &BipartiteGraph, c0: f64, delta: f64, c1: f64) -> Result<CoverResult> {
    greedy_cover_with_alphabet(g, c0, delta, c1, g.n_right() as f64)
}

/// [`greedy_cover`] with the alphabet size `T` given explicitly.
pub fn greedy_cover_with_alphabet(
    g: &BipartiteGraph,
    c0: f64,
    delta: f64,
    c1: f64,
    alphabet: f64,
) -> Result<CoverResult> {
    validate_fraction("c1", c1)?;
    if !(c0 > 0.0) || !(0.0..=1.0).contains(&delta) {
        return Err(Error::Precondition(format!(
            "need c0 > 0 and delta in [0, 1], got c0 = {c0}, delta = {delta}"
        )));
    }
    let n = g.n_left();
    if let Some(u) = (0..n).find(|&u| !meets_degree(g.neighbors(u).len(), c0, alphabet, delta)) {
        return Err(Error::Precondition(format!(
            "left vertex {u} has degree {} < c0·T^delta = {}",
            g.neighbors(u).len(),
            c0 * alphabet.powf(delta)
        )));
    }

    let mut right_adj: Vec<Vec<u32>> = vec![Vec::new(); g.n_right()];
    for u in 0..n {
        for &v in g.neighbors(u) {
            right_adj[v as usize].push(u as u32);
        }
    }
    let mut residual: Vec<u64> = right_adj.iter().map(|l| l.len() as u64).collect();
    let mut removed_right = vec![false; g.n_right()];
    let mut covered_left = vec![false; n];
    let target = c1 * n as f64;
    let per_step = (1.0 - c1) * c0 * n as f64 / alphabet.powf(1.0 - delta);

    let mut chosen = Vec::new();
    let mut gains = Vec::new();
    let mut covered = 0u64;
    let mut step_ok = true;
    while (covered as f64) < target {
        let pick = (0..g.n_right())
            .filter(|&v| !removed_right[v])
            .max_by(|&a, &b| residual[a].cmp(&residual[b]).then(b.cmp(&a)));
        let v = match pick {
            Some(v) if residual[v] > 0 => v,
            _ => {
                return Err(Error::Construction(format!(
                    "no right vertex covers new left vertices after {} picks",
                    chosen.len()
                )))
            }
        };
        let gain = residual[v];
        step_ok &= ge_slack(gain as f64, per_step);
        chosen.push(v as u32);
        gains.push(gain);
        removed_right[v] = true;
        for &u in &right_adj[v] {
            let u = u as usize;
            if !covered_left[u] {
                covered_left[u] = true;
                covered += 1;
                for &w in g.neighbors(u) {
                    residual[w as usize] -= 1;
                }
            }
        }
    }

    let bound = c1 / ((1.0 - c1) * c0) * alphabet.powf(1.0 - delta);
    let recount = g.neighborhood_size(&chosen) as u64;
    let mut checks = vec![
        Check::new(
            "coverage",
            "|N(chosen)| >= c1·N",
            recount as f64 >= target && recount == covered,
            format!("recount {recount}, tracked {covered}, target {target:.3}"),
        ),
        Check::new(
            "per_step_degree",
            "each pick has residual degree >= (1−c1)·c0·N/T^(1−delta)",
            step_ok,
            format!("threshold {per_step:.6}, gains {gains:?}"),
        ),
    ];
    size_checks(chosen.len(), bound, &mut checks);
    Ok(CoverResult {
        steps: chosen.len(),
        chosen,
        covered,
        bound,
        gains,
        checks,
    })
}

/// Repeatedly pick the colour with the most remaining edges (ties to the
/// smallest colour) and delete its edges, while at most `c1 · |E|` edges are
/// covered.
///
/// Every vertex must see at most `c0 · T^delta` distinct colours, with
/// `T = n_colors`.
pub fn greedy_color_cover(
    h: &ColoredCompleteBipartite,
    c0: f64,
    c1: f64,
    c2: f64,
    delta: f64,
) -> Result<CoverResult> {
    greedy_color_cover_with_alphabet(h, c0, c1, c2, delta, h.n_colors() as f64)
}

pub fn greedy_color_cover_with_alphabet(
    h: &ColoredCompleteBipartite,
    c0: f64,
    c1: f64,
    c2: f64,
    delta: f64,
    alphabet: f64,
) -> Result<CoverResult> {
    validate_fraction("c1", c1)?;
    validate_fraction("c2", c2)?;
    if !(c0 > 0.0) || !(0.0..=1.0).contains(&delta) {
        return Err(Error::Precondition(format!(
            "need c0 > 0 and delta in [0, 1], got c0 = {c0}, delta = {delta}"
        )));
    }
    if !(1.0 - c0 * c2 - c1 > 0.0) {
        return Err(Error::Precondition(format!(
            "1 − c0·c2 − c1 = {} must be positive",
            1.0 - c0 * c2 - c1
        )));
    }
    let limit = c0 * alphabet.powf(delta);
    let mut stamp = vec![usize::MAX; h.n_colors()];
    for u in 0..h.n_left() {
        let k = h.distinct_colors((0..h.n_right()).map(|v| h.color(u, v)), &mut stamp, u);
        if !crate::check::le_slack(k as f64, limit) {
            return Err(Error::Precondition(format!(
                "left vertex {u} sees {k} colours > c0·T^delta = {limit}"
            )));
        }
    }
    stamp.iter_mut().for_each(|s| *s = usize::MAX);
    for v in 0..h.n_right() {
        let k = h.distinct_colors((0..h.n_left()).map(|u| h.color(u, v)), &mut stamp, v);
        if !crate::check::le_slack(k as f64, limit) {
            return Err(Error::Precondition(format!(
                "right vertex {v} sees {k} colours > c0·T^delta = {limit}"
            )));
        }
    }

    let mut counts = vec![0u64; h.n_colors()];
    for &c in &h.colors {
        counts[c as usize] += 1;
    }
    let edges = (h.n_left() * h.n_right()) as f64;
    let target = c1 * edges;
    let mut chosen = Vec::new();
    let mut gains = Vec::new();
    let mut covered = 0u64;
    while covered as f64 <= target {
        let c = (0..h.n_colors())
            .max_by(|&a, &b| counts[a].cmp(&counts[b]).then(b.cmp(&a)))
            .filter(|&c| counts[c] > 0)
            .ok_or_else(|| Error::Construction("colour classes exhausted".into()))?;
        chosen.push(c as u32);
        gains.push(counts[c]);
        covered += counts[c];
        counts[c] = 0;
    }

    let bound = c0 * c1 / ((1.0 - c0 * c2 - c1) * c2) * alphabet.powf(2.0 * delta);
    let recount = h.edges_colored_by(&chosen);
    let mut checks = vec![
        Check::new(
            "coverage",
            "edges coloured by chosen > c1·|E|",
            recount == covered && recount as f64 > target,
            format!("recount {recount}, tracked {covered}, target {target:.3}"),
        ),
        Check::new(
            "monotone_counts",
            "picked colour counts are non-increasing",
            gains.windows(2).all(|w| w[0] >= w[1]),
            format!("{gains:?}"),
        ),
    ];
    size_checks(chosen.len(), bound, &mut checks);
    Ok(CoverResult {
        steps: chosen.len(),
        chosen,
        covered,
        bound,
        gains,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_graph_needs_one_pick() {
        let g = BipartiteGraph::new(8, vec![(0..8).collect(); 10]).unwrap();
        let r = greedy_cover(&g, 1.0, 1.0, 0.9).unwrap();
        assert_eq!(r.chosen, vec![0]);
        assert_eq!(r.covered, 10);
        assert!(r.passed(), "{:?}", r.checks);
    }

    #[test]
    fn matching_needs_half() {
        let n = 9;
        let g = BipartiteGraph::new(n, (0..n as u32).map(|i| vec![i]).collect()).unwrap();
        let r = greedy_cover(&g, 1.0, 0.0, 0.5).unwrap();
        assert_eq!(r.steps, 5);
        assert_eq!(r.chosen, vec![0, 1, 2, 3, 4]);
        assert!(r.bound >= n as f64 - 1e-12);
        assert!(r.passed());
    }

    #[test]
    fn degree_precondition_reports_vertex() {
        let g = BipartiteGraph::new(4, vec![vec![0, 1], vec![2]]).unwrap();
        let err = greedy_cover(&g, 1.0, 0.5, 0.5).unwrap_err();
        assert!(matches!(err, Error::Precondition(msg) if msg.contains("left vertex 1")));
    }

    #[test]
    fn monochromatic_is_one_colour() {
        let h = ColoredCompleteBipartite::new(5, 4, 16, vec![3; 20]).unwrap();
        let r = greedy_color_cover(&h, 1.0, 0.5, 0.3, 0.0).unwrap();
        assert_eq!(r.chosen, vec![3]);
        assert_eq!(r.covered, 20);
        assert!(r.passed());
    }

    #[test]
    fn latin_square() {
        let n = 8;
        let colors = (0..n * n).map(|i| ((i / n + i % n) % n) as u32).collect();
        let h = ColoredCompleteBipartite::new(n, n, n, colors).unwrap();
        let r = greedy_color_cover(&h, 1.0, 0.4, 0.4, 1.0).unwrap();
        assert_eq!(r.covered, 32);
        assert_eq!(r.steps, 4);
        assert!(r.passed());
    }

    #[test]
    fn colour_precondition() {
        let h = ColoredCompleteBipartite::new(2, 2, 4, vec![0, 1, 2, 3]).unwrap();
        assert!(greedy_color_cover(&h, 1.0, 0.4, 0.4, 0.0).is_err());
        assert!(greedy_color_cover(&h, 1.0, 0.7, 0.4, 1.0).is_err());
    }
}
