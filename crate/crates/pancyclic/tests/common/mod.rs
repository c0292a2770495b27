//! Shared helpers for the integration suites.

use pancyclic::{ExplicitGraph, GraphSpec, Vertex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random graph on `n` vertices with minimum degree at least (n+2)/2:
/// seeded random edges, then repaired by attaching deficient vertices to
/// their least-connected non-neighbors.
pub fn random_dense_graph(rng: &mut ChaCha8Rng, n: usize) -> ExplicitGraph {
    let bound = (n + 2).div_ceil(2);
    let mut adj = vec![vec![false; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen_bool(0.7) {
                adj[i][j] = true;
                adj[j][i] = true;
            }
        }
    }
    let degree = |adj: &Vec<Vec<bool>>, v: usize| adj[v].iter().filter(|&&b| b).count();
    loop {
        let deficient = (0..n).find(|&v| degree(&adj, v) < bound);
        let Some(v) = deficient else { break };
        let partner = (0..n)
            .filter(|&w| w != v && !adj[v][w])
            .min_by_key(|&w| degree(&adj, w))
            .expect("a non-neighbor exists below full degree");
        adj[v][partner] = true;
        adj[partner][v] = true;
    }
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if adj[i][j] {
                edges.push((i as u32, j as u32));
            }
        }
    }
    ExplicitGraph { n, edges }
}

/// All edges of a spec as rank pairs, each once.
pub fn all_edges(spec: &GraphSpec) -> Vec<(Vertex, Vertex)> {
    pancyclic::verify::select_edges(spec, &pancyclic::verify::EdgeSelection::All, 0)
}
