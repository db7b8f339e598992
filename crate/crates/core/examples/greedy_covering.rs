//! Greedy covering of a random bipartite graph and of a coloured complete bipartite graph.

use rand::seq::SliceRandom;
use rand::Rng;
use seedless::covering::{
    greedy_color_cover, greedy_cover, BipartiteGraph, ColoredCompleteBipartite,
};
use seedless::rng::seeded;

fn main() -> seedless::Result<()> {
    let mut rng = seeded(4);
    let (t, delta) = (64usize, 0.5);
    let degree = (t as f64).powf(delta).ceil() as usize;
    let right: Vec<u32> = (0..t as u32).collect();
    let adjacency = (0..500)
        .map(|_| right.choose_multiple(&mut rng, degree).copied().collect())
        .collect();
    let g = BipartiteGraph::new(t, adjacency)?;
    let r = greedy_cover(&g, 1.0, delta, 0.75)?;
    println!(
        "graph: covered {} of 500 left vertices with {} picks (bound {:.2})",
        r.covered, r.steps, r.bound
    );

    let (nl, nr, q) = (30, 30, 4u32);
    // Each vertex gets a palette label; edge (u, v) is coloured left[u]·q + right[v].
    let left: Vec<u32> = (0..nl).map(|_| rng.gen_range(0..q)).collect();
    let right: Vec<u32> = (0..nr).map(|_| rng.gen_range(0..q)).collect();
    let colors = (0..nl * nr)
        .map(|e| left[e / nr] * q + right[e % nr])
        .collect();
    let h = ColoredCompleteBipartite::new(nl, nr, 256, colors)?;
    let r = greedy_color_cover(&h, 1.0, 0.3, 0.5, 0.5)?;
    println!(
        "colours: {} picks colour {} of {} edges (bound {:.2}), checks pass: {}",
        r.steps,
        r.covered,
        nl * nr,
        r.bound,
        r.passed()
    );
    Ok(())
}
