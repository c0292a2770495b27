//! Trust anchor: validates witnesses against the raw adjacency definitions
//! and searches for cycles by brute force on small instances, so constructor
//! bugs cannot self-certify.

use std::collections::HashSet;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{CycleWitness, GraphSpec, Vertex};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum CycleFailure {
    #[error("witness has length {got}, wanted {want}")]
    WrongLength { got: usize, want: usize },
    #[error("vertex at position {0} repeats an earlier vertex")]
    RepeatedVertex(usize),
    #[error("consecutive pair at position {0} is not an edge")]
    NonEdge(usize),
    #[error("required edge does not appear as a consecutive pair")]
    MissingTargetEdge,
    #[error("vertex at position {0} is malformed for this spec")]
    MalformedVertex(usize),
}

/// Checks a witness directly against the spec's adjacency oracle:
/// correct length, distinct well-formed vertices, every cyclically
/// consecutive pair adjacent, and the required edge present.
pub fn validate_cycle(
    spec: &GraphSpec,
    witness: &CycleWitness,
    required_edge: Option<(&Vertex, &Vertex)>,
    length: usize,
) -> Result<(), CycleFailure> {
    let m = witness.vertices.len();
    if m != length || m < 3 {
        return Err(CycleFailure::WrongLength {
            got: m,
            want: length,
        });
    }
    let mut seen = HashSet::with_capacity(m);
    for (i, v) in witness.vertices.iter().enumerate() {
        // shape check: ranking only succeeds on well-formed vertices
        if spec.rank(v).is_err() {
            return Err(CycleFailure::MalformedVertex(i));
        }
        if !seen.insert(v.clone()) {
            return Err(CycleFailure::RepeatedVertex(i));
        }
    }
    for i in 0..m {
        let a = &witness.vertices[i];
        let b = &witness.vertices[(i + 1) % m];
        match spec.is_adjacent(a, b) {
            Ok(true) => {}
            Ok(false) => return Err(CycleFailure::NonEdge(i)),
            Err(_) => return Err(CycleFailure::MalformedVertex(i)),
        }
    }
    if let Some((u, v)) = required_edge {
        if !witness.contains_edge(u, v) {
            return Err(CycleFailure::MissingTargetEdge);
        }
    }
    Ok(())
}

/// Outcome of a brute-force search. `ExhaustedComplete` means the search
/// space was fully explored, so absence is proven; `BudgetExceeded` proves
/// nothing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BruteOutcome {
    Found(CycleWitness),
    ExhaustedComplete,
    BudgetExceeded,
}

/// DFS from one endpoint of the required edge, with pruning: dead-end
/// filtering and a reachability check back to the anchor. Deterministic
/// (neighbors scanned in rank order). Intended for `order(spec) <= 200`.
pub fn brute_force_cycle(
    spec: &GraphSpec,
    edge: (&Vertex, &Vertex),
    length: usize,
    budget: u64,
) -> BruteOutcome {
    let order = spec.order() as usize;
    let (u, v) = edge;
    if length < 3 || length > order {
        return BruteOutcome::ExhaustedComplete;
    }
    // dense index space
    let anchor = spec.rank(u).expect("vertex shape") as usize;
    let second = spec.rank(v).expect("vertex shape") as usize;
    let adjacency: Vec<Vec<usize>> = (0..order)
        .map(|r| {
            let vert = spec.unrank(r as u64);
            let mut nbrs: Vec<usize> = spec
                .neighbors(&vert)
                .expect("vertex shape")
                .iter()
                .map(|w| spec.rank(w).expect("vertex shape") as usize)
                .collect();
            nbrs.sort_unstable();
            nbrs
        })
        .collect();

    let mut visited = vec![false; order];
    visited[anchor] = true;
    visited[second] = true;
    let mut path = vec![anchor, second];
    let mut expansions = 0u64;
    let found = dfs_extend(
        &adjacency,
        anchor,
        length,
        &mut path,
        &mut visited,
        &mut expansions,
        budget,
    );
    match found {
        Some(ranks) => {
            let vertices = ranks.iter().map(|&r| spec.unrank(r as u64)).collect();
            BruteOutcome::Found(CycleWitness {
                spec: spec.clone(),
                vertices,
            })
        }
        None if expansions < budget => BruteOutcome::ExhaustedComplete,
        None => BruteOutcome::BudgetExceeded,
    }
}

fn dfs_extend(
    adjacency: &[Vec<usize>],
    anchor: usize,
    length: usize,
    path: &mut Vec<usize>,
    visited: &mut [bool],
    expansions: &mut u64,
    budget: u64,
) -> Option<Vec<usize>> {
    if *expansions >= budget {
        return None;
    }
    *expansions += 1;
    let last = *path.last().unwrap();
    if path.len() == length {
        if adjacency[last].contains(&anchor) {
            return Some(path.clone());
        }
        return None;
    }
    // reachability prune: the anchor must stay reachable through unvisited
    // vertices, and enough unvisited vertices must remain
    let remaining = length - path.len();
    if !anchor_reachable(adjacency, last, anchor, visited, remaining) {
        return None;
    }
    for &next in &adjacency[last] {
        if visited[next] {
            continue;
        }
        visited[next] = true;
        path.push(next);
        if let Some(hit) = dfs_extend(adjacency, anchor, length, path, visited, expansions, budget)
        {
            return Some(hit);
        }
        path.pop();
        visited[next] = false;
        if *expansions >= budget {
            return None;
        }
    }
    None
}

/// BFS over unvisited vertices from the current path end. Prunes when fewer
/// than `steps` unvisited vertices are reachable, or when no unvisited
/// neighbor of the anchor can be reached in time to close the cycle.
fn anchor_reachable(
    adjacency: &[Vec<usize>],
    from: usize,
    anchor: usize,
    visited: &[bool],
    steps: usize,
) -> bool {
    debug_assert!(steps >= 1);
    let mut dist = vec![usize::MAX; adjacency.len()];
    dist[from] = 0;
    let mut queue = std::collections::VecDeque::new();
    queue.push_back(from);
    let mut reachable = 0usize;
    while let Some(x) = queue.pop_front() {
        for &y in &adjacency[x] {
            if !visited[y] && dist[y] == usize::MAX {
                dist[y] = dist[x] + 1;
                reachable += 1;
                queue.push_back(y);
            }
        }
    }
    if reachable < steps {
        return false;
    }
    // the cycle closes from an unvisited neighbor of the anchor reached at
    // step `steps` exactly; distance <= steps is the cheap necessary bound
    adjacency[anchor]
        .iter()
        .any(|&y| !visited[y] && dist[y] <= steps)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepEngine {
    Constructor,
    Brute,
}

#[derive(Debug, Clone)]
pub enum EdgeSelection {
    All,
    Sample(usize),
}

/// One sweep failure, replayable from its fields alone.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepFailure {
    pub edge: [String; 2],
    pub length: usize,
    pub reason: String,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepReport {
    pub spec: String,
    pub tasks: u64,
    pub ok: u64,
    pub failed: u64,
    pub wall_ms: u64,
    pub failures: Vec<SweepFailure>,
    /// Count of bridge constructions that fell back to exhaustive search.
    #[serde(default)]
    pub bridge_fallbacks: u64,
}

/// Runs the chosen engine over every (edge, length) task and validates each
/// witness independently. Failures are data, not panics.
pub fn sweep(
    spec: &GraphSpec,
    edges: EdgeSelection,
    lengths: std::ops::RangeInclusive<usize>,
    engine: SweepEngine,
    seed: u64,
    brute_budget: u64,
) -> SweepReport {
    let start = Instant::now();
    let edge_list = select_edges(spec, &edges, seed);
    let lengths: Vec<usize> = lengths.collect();
    let results: Vec<(u64, u64, u64, Vec<SweepFailure>)> = edge_list
        .par_iter()
        .map(|(u, v)| {
            let mut ok = 0u64;
            let mut failed = 0u64;
            let mut fallbacks = 0u64;
            let mut failures = Vec::new();
            let ctx = crate::construct_context(spec);
            for &len in &lengths {
                let task_seed = task_seed(seed, u, v, len);
                let outcome = match engine {
                    SweepEngine::Constructor => match &ctx {
                        Ok(ctx) => ctx.construct(u, v, len).map(|(w, fb)| {
                            fallbacks += fb;
                            w
                        }),
                        Err(e) => Err(e.clone()),
                    },
                    SweepEngine::Brute => match brute_force_cycle(spec, (u, v), len, brute_budget)
                    {
                        BruteOutcome::Found(w) => Ok(w),
                        BruteOutcome::ExhaustedComplete => {
                            Err(crate::ConstructError::Infeasible("proven absent".into()))
                        }
                        BruteOutcome::BudgetExceeded => {
                            Err(crate::ConstructError::Infeasible("budget exceeded".into()))
                        }
                    },
                };
                match outcome {
                    Ok(w) => match validate_cycle(spec, &w, Some((u, v)), len) {
                        Ok(()) => ok += 1,
                        Err(reason) => {
                            failed += 1;
                            failures.push(SweepFailure {
                                edge: [u.to_string(), v.to_string()],
                                length: len,
                                reason: reason.to_string(),
                                seed: task_seed,
                            });
                        }
                    },
                    Err(e) => {
                        failed += 1;
                        failures.push(SweepFailure {
                            edge: [u.to_string(), v.to_string()],
                            length: len,
                            reason: e.to_string(),
                            seed: task_seed,
                        });
                    }
                }
            }
            (ok, failed, fallbacks, failures)
        })
        .collect();

    let mut report = SweepReport {
        spec: spec.to_string(),
        tasks: (edge_list.len() * lengths.len()) as u64,
        ok: 0,
        failed: 0,
        wall_ms: 0,
        failures: Vec::new(),
        bridge_fallbacks: 0,
    };
    for (ok, failed, fallbacks, mut failures) in results {
        report.ok += ok;
        report.failed += failed;
        report.bridge_fallbacks += fallbacks;
        report.failures.append(&mut failures);
    }
    report.wall_ms = start.elapsed().as_millis() as u64;
    report
}

fn task_seed(seed: u64, u: &Vertex, v: &Vertex, len: usize) -> u64 {
    use std::collections::hash_map::DefaultHasher;
    use std::hash::{Hash, Hasher};
    let mut h = DefaultHasher::new();
    seed.hash(&mut h);
    u.hash(&mut h);
    v.hash(&mut h);
    len.hash(&mut h);
    h.finish()
}

/// Deterministic edge enumeration (all) or seeded sampling without
/// replacement.
pub fn select_edges(spec: &GraphSpec, selection: &EdgeSelection, seed: u64) -> Vec<(Vertex, Vertex)> {
    match selection {
        EdgeSelection::All => {
            let order = spec.order();
            let mut out = Vec::new();
            for r in 0..order {
                let u = spec.unrank(r);
                for v in spec.neighbors(&u).expect("valid vertex") {
                    if spec.rank(&v).expect("valid vertex") > r {
                        out.push((u.clone(), v));
                    }
                }
            }
            out
        }
        EdgeSelection::Sample(count) => {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let order = spec.order();
            let mut seen = HashSet::new();
            let mut out = Vec::new();
            while out.len() < *count {
                let u = spec.unrank(rng.gen_range(0..order));
                let nbrs = spec.neighbors(&u).expect("valid vertex");
                if nbrs.is_empty() {
                    continue;
                }
                let v = nbrs[rng.gen_range(0..nbrs.len())].clone();
                let ru = spec.rank(&u).unwrap();
                let rv = spec.rank(&v).unwrap();
                let key = (ru.min(rv), ru.max(rv));
                if seen.insert(key) {
                    out.push((u, v));
                }
            }
            out
        }
    }
}
