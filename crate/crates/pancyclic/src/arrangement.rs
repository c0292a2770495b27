//! Edge-pancyclicity constructor for the arrangement graph: k-tuples of
//! distinct values from [n] (n >= k >= 4), adjacent when every coordinate
//! differs. Built by induction on n.
//!
//! At n = k the tuples are permutations and the derangement-graph route
//! applies. Above that the graph splits around a pivot value: the induced
//! subgraph on tuples carrying the pivot is handled by a quotient over
//! rotation orbits (k-cliques), and the tuples avoiding the pivot form a
//! smaller arrangement graph handled recursively. Cycles from the two sides
//! are merged by four-vertex bridges.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::dense::DenseGraph;
use crate::gamma;
use crate::graph::{CycleWitness, ExplicitGraph, GraphSpec, Vertex};
use crate::perm::{delta, falling_factorial, Arrangement, Permutation};
use crate::ConstructError;

fn stitch(msg: impl Into<String>) -> ConstructError {
    ConstructError::StitchFailed(msg.into())
}

fn adjacent(a: &Arrangement, b: &Arrangement) -> bool {
    delta(a.values(), b.values()) == 0
}

/// Rotate positions left by `t`: entry i of the result is entry (i+t) of x.
fn rotate(x: &Arrangement, t: usize) -> Arrangement {
    let k = x.k();
    let values = (0..k).map(|i| x.values()[(i + t) % k]).collect();
    Arrangement::new(values, x.ambient()).expect("rotation keeps entries")
}

/// The rotation orbit of a tuple: a zero-delta clique of size k.
fn orbit(x: &Arrangement) -> Vec<Arrangement> {
    (0..x.k()).map(|t| rotate(x, t)).collect()
}

/// Canonical orbit representative among tuples carrying `pivot`: the
/// rotation that puts the pivot value last.
fn orbit_rep(x: &Arrangement, pivot: u8) -> Arrangement {
    let p = x
        .values()
        .iter()
        .position(|&v| v == pivot)
        .expect("tuple carries the pivot");
    rotate(x, (p + 1) % x.k())
}

/// The split of the arrangement graph around one pivot value.
#[derive(Clone, Debug)]
pub struct SplitView {
    pub n: usize,
    pub k: usize,
    pub pivot: u8,
}

impl SplitView {
    pub fn h1_order(&self) -> u64 {
        self.k as u64 * falling_factorial((self.n - 1) as u64, (self.k - 1) as u64)
    }

    pub fn h2_order(&self) -> u64 {
        falling_factorial((self.n - 1) as u64, self.k as u64)
    }

    /// Values outside the pivot, in order; relabeling by their rank exhibits
    /// the pivot-free side as the arrangement graph over n-1 values.
    fn h2_pool(&self) -> Vec<u8> {
        (0..self.n as u8).filter(|&v| v != self.pivot).collect()
    }

    fn project_h2(&self, x: &Arrangement) -> Arrangement {
        let pool = self.h2_pool();
        let values = x
            .values()
            .iter()
            .map(|v| pool.iter().position(|p| p == v).unwrap() as u8)
            .collect();
        Arrangement::new(values, self.n - 1).unwrap()
    }

    fn embed_h2(&self, x: &Arrangement) -> Arrangement {
        let pool = self.h2_pool();
        let values = x.values().iter().map(|&i| pool[i as usize]).collect();
        Arrangement::new(values, self.n).unwrap()
    }
}

// ---------------------------------------------------------------------------
// quotient host for the pivot side
// ---------------------------------------------------------------------------

/// Orbit quotient of the pivot side, materialized in canonical coordinates
/// (pivot = the largest value): vertices are (k-1)-tuples over [n-1], two
/// orbits adjacent iff some rotation pair is a zero-delta crossing.
struct QuotientHost {
    n: usize,
    k: usize,
    dense: DenseGraph,
}

impl QuotientHost {
    fn new(n: usize, k: usize) -> Self {
        let order = falling_factorial((n - 1) as u64, (k - 1) as u64) as usize;
        let pivot = (n - 1) as u8;
        let lift = |r: u64| -> Arrangement {
            let hat = Arrangement::from_lex_rank(n - 1, k - 1, r);
            let mut values = hat.values().to_vec();
            values.push(pivot);
            Arrangement::new(values, n).unwrap()
        };
        let reps: Vec<Arrangement> = (0..order as u64).map(lift).collect();
        let mut edges = Vec::new();
        for i in 0..order {
            for j in (i + 1)..order {
                let crossing = (0..k).any(|t| adjacent(&reps[i], &rotate(&reps[j], t)));
                if crossing {
                    edges.push((i as u32, j as u32));
                }
            }
        }
        let graph = ExplicitGraph { n: order, edges };
        let dense = DenseGraph::new(&graph).expect("orbit quotient meets the degree bound");
        QuotientHost { n, k, dense }
    }

    /// Rank of the orbit of `x` (a tuple carrying `pivot`), via the value
    /// relabel that sends the pivot to the largest value.
    fn rank(&self, x: &Arrangement, pivot: u8) -> u32 {
        let rep = orbit_rep(x, pivot);
        let pool: Vec<u8> = (0..self.n as u8).filter(|&v| v != pivot).collect();
        let hat: Vec<u8> = rep.values()[..self.k - 1]
            .iter()
            .map(|v| pool.iter().position(|p| p == v).unwrap() as u8)
            .collect();
        Arrangement::new(hat, self.n - 1).unwrap().lex_rank() as u32
    }

    /// The orbit representative (in real coordinates) of a quotient vertex.
    fn rep(&self, r: u32, pivot: u8) -> Arrangement {
        let hat = Arrangement::from_lex_rank(self.n - 1, self.k - 1, r as u64);
        let pool: Vec<u8> = (0..self.n as u8).filter(|&v| v != pivot).collect();
        let mut values: Vec<u8> = hat.values().iter().map(|&i| pool[i as usize]).collect();
        values.push(pivot);
        Arrangement::new(values, self.n).unwrap()
    }
}

type HostCache = Mutex<HashMap<(usize, usize), Arc<QuotientHost>>>;

fn quotient_host(n: usize, k: usize) -> Arc<QuotientHost> {
    static HOSTS: OnceLock<HostCache> = OnceLock::new();
    let map = HOSTS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = map.lock().unwrap();
    guard
        .entry((n, k))
        .or_insert_with(|| Arc::new(QuotientHost::new(n, k)))
        .clone()
}

// ---------------------------------------------------------------------------
// cycles inside the pivot side
// ---------------------------------------------------------------------------

/// Per-edge state for cycles inside one pivot side.
pub struct H1Context {
    split: SplitView,
    alpha: Arrangement,
    beta: Arrangement,
    host: Arc<QuotientHost>,
    /// quotient cycles by length, oriented to start at alpha's orbit
    memo: Mutex<HashMap<usize, Vec<u32>>>,
}

impl H1Context {
    pub fn new(
        split: SplitView,
        alpha: Arrangement,
        beta: Arrangement,
    ) -> Result<Self, ConstructError> {
        let pivot = split.pivot;
        if !alpha.contains(pivot) || !beta.contains(pivot) || !adjacent(&alpha, &beta) {
            return Err(ConstructError::NotAnEdge);
        }
        let host = quotient_host(split.n, split.k);
        Ok(H1Context {
            split,
            alpha,
            beta,
            host,
            memo: Mutex::new(HashMap::new()),
        })
    }

    fn intra_orbit(&self) -> bool {
        self.host.rank(&self.alpha, self.split.pivot)
            == self.host.rank(&self.beta, self.split.pivot)
    }

    pub fn cycle(&self, l: usize) -> Result<Vec<Arrangement>, ConstructError> {
        let cap = self.split.h1_order();
        if l < 3 || l as u64 > cap {
            return Err(ConstructError::LengthOutOfRange(l, cap));
        }
        if l <= 5 {
            return self.short_cycle(l);
        }
        self.lift_route(l)
    }

    /// Lengths 3..5 by direct neighbor search within the pivot side.
    fn short_cycle(&self, l: usize) -> Result<Vec<Arrangement>, ConstructError> {
        let pivot = self.split.pivot;
        let spec = GraphSpec::Arrangement(self.split.n, self.split.k);
        let nbrs = |x: &Arrangement| -> Vec<Arrangement> {
            spec.neighbors(&Vertex::Arr(x.clone()))
                .expect("valid vertex")
                .into_iter()
                .filter_map(|v| {
                    let a = v.as_arr().unwrap();
                    a.contains(pivot).then(|| a.clone())
                })
                .collect()
        };
        let (a, b) = (&self.alpha, &self.beta);
        match l {
            3 => {
                for w in nbrs(b) {
                    if w != *a && adjacent(&w, a) {
                        return Ok(vec![a.clone(), b.clone(), w]);
                    }
                }
            }
            4 => {
                let an = nbrs(a);
                for x in nbrs(b) {
                    if x == *a {
                        continue;
                    }
                    for y in nbrs(&x) {
                        if y != *a && y != *b && an.contains(&y) {
                            return Ok(vec![a.clone(), b.clone(), x, y]);
                        }
                    }
                }
            }
            5 => {
                let an = nbrs(a);
                for x in nbrs(b) {
                    if x == *a {
                        continue;
                    }
                    for y in nbrs(&x) {
                        if y == *a || y == *b {
                            continue;
                        }
                        for z in nbrs(&y) {
                            if z != *a && z != *b && z != x && an.contains(&z) {
                                return Ok(vec![a.clone(), b.clone(), x, y, z]);
                            }
                        }
                    }
                }
            }
            _ => unreachable!(),
        }
        Err(stitch(format!("no pivot-side cycle of length {l} found")))
    }

    /// Plan: a quotient cycle of length q over orbit cliques, each clique
    /// contributing a path of 1..=k-1 edges.
    fn plan(&self, l: usize) -> (usize, Vec<usize>) {
        let k = self.split.k;
        let q = std::cmp::max(3, l.div_ceil(k));
        debug_assert!(2 * q <= l && l <= q * k);
        debug_assert!(q <= self.host.dense.order());
        (q, gamma::distribute(l - q, q, k - 1))
    }

    fn quotient_cycle(&self, q: usize) -> Result<Vec<u32>, ConstructError> {
        let pivot = self.split.pivot;
        let a = self.host.rank(&self.alpha, pivot);
        {
            let memo = self.memo.lock().unwrap();
            if let Some(c) = memo.get(&q) {
                return Ok(c.clone());
            }
        }
        let b = if self.intra_orbit() {
            // cycle through the vertex: anchor on its smallest neighbor
            (0..self.host.dense.order() as u32)
                .find(|&w| self.host.dense.is_edge(a, w))
                .ok_or_else(|| stitch("isolated quotient vertex"))?
        } else {
            self.host.rank(&self.beta, pivot)
        };
        if !self.host.dense.is_edge(a, b) {
            return Err(stitch("quotient endpoints not adjacent"));
        }
        let raw = self
            .host
            .dense
            .cycle_through_edge((a, b), q)
            .map_err(|e| stitch(e.to_string()))?;
        let oriented = gamma::orient_cycle(&raw, a, b);
        self.memo.lock().unwrap().insert(q, oriented.clone());
        Ok(oriented)
    }

    fn lift_route(&self, l: usize) -> Result<Vec<Arrangement>, ConstructError> {
        let (q, j) = self.plan(l);
        let quotient = self.quotient_cycle(q)?;
        let pivot = self.split.pivot;
        let cliques: Vec<Vec<Arrangement>> = quotient
            .iter()
            .map(|&r| sorted(&orbit(&self.host.rep(r, pivot))))
            .collect();
        let intra = self.intra_orbit();

        // clique 0 can traverse the target edge in either direction
        let orientations: Vec<(Arrangement, Arrangement)> = if intra {
            vec![
                (self.alpha.clone(), self.beta.clone()),
                (self.beta.clone(), self.alpha.clone()),
            ]
        } else {
            vec![(self.alpha.clone(), self.alpha.clone())]
        };
        for (lead, tau0) in orientations {
            let mut theta: Vec<Option<Arrangement>> = vec![None; q];
            let mut tau: Vec<Option<Arrangement>> = vec![None; q];
            tau[0] = Some(tau0);
            if intra && j[0] == 1 {
                theta[0] = Some(lead.clone());
            }
            let mut budget = 200_000u64;
            if self.assign(
                1,
                q,
                &j,
                intra,
                &lead,
                &cliques,
                &mut theta,
                &mut tau,
                &mut budget,
            ) {
                return Ok(self.assemble(q, &j, intra, &cliques, &theta, &tau));
            }
        }
        Err(stitch("clique walk assignment exhausted"))
    }

    /// Backtracking assignment of entries and exits: entry i must be a
    /// zero-delta partner of exit i-1, the final exit must close onto a
    /// valid first entry.
    #[allow(clippy::too_many_arguments)]
    fn assign(
        &self,
        i: usize,
        q: usize,
        j: &[usize],
        intra: bool,
        lead: &Arrangement,
        cliques: &[Vec<Arrangement>],
        theta: &mut Vec<Option<Arrangement>>,
        tau: &mut Vec<Option<Arrangement>>,
        budget: &mut u64,
    ) -> bool {
        if *budget == 0 {
            return false;
        }
        *budget -= 1;
        if i == q {
            // close: last exit crosses onto the first entry
            let last = tau[q - 1].as_ref().unwrap();
            let theta0 = match (intra, j[0]) {
                (true, 1) => {
                    return if adjacent(last, lead) {
                        theta[0] = Some(lead.clone());
                        true
                    } else {
                        false
                    };
                }
                (true, _) => cliques[0]
                    .iter()
                    .find(|w| **w != self.alpha && **w != self.beta && adjacent(last, w)),
                (false, _) => cliques[0]
                    .iter()
                    .find(|w| **w != self.alpha && adjacent(last, w)),
            };
            return match theta0 {
                Some(w) => {
                    theta[0] = Some(w.clone());
                    true
                }
                None => false,
            };
        }
        let prev = tau[i - 1].clone().unwrap();
        let entry_candidates: Vec<Arrangement> = if !intra && i == 1 {
            // the target edge itself is the crossing into the second clique
            vec![self.beta.clone()]
        } else {
            cliques[i]
                .iter()
                .filter(|w| adjacent(&prev, w))
                .cloned()
                .collect()
        };
        for entry in entry_candidates {
            theta[i] = Some(entry.clone());
            for exit in &cliques[i] {
                if *exit == entry {
                    continue;
                }
                tau[i] = Some(exit.clone());
                if self.assign(i + 1, q, j, intra, lead, cliques, theta, tau, budget) {
                    return true;
                }
            }
            tau[i] = None;
            theta[i] = None;
        }
        false
    }

    fn assemble(
        &self,
        q: usize,
        j: &[usize],
        intra: bool,
        cliques: &[Vec<Arrangement>],
        theta: &[Option<Arrangement>],
        tau: &[Option<Arrangement>],
    ) -> Vec<Arrangement> {
        let mut walk: Vec<Arrangement> = Vec::new();
        for i in 0..q {
            let entry = theta[i].clone().unwrap();
            let exit = tau[i].clone().unwrap();
            if i == 0 && intra {
                // path: entry .. (target edge traversed into the exit)
                let lead = cliques[0]
                    .iter()
                    .find(|w| (**w == self.alpha || **w == self.beta) && **w != exit)
                    .unwrap()
                    .clone();
                let mut inner: Vec<Arrangement> = cliques[0]
                    .iter()
                    .filter(|c| **c != entry && **c != self.alpha && **c != self.beta)
                    .take(j[0].saturating_sub(2))
                    .cloned()
                    .collect();
                walk.push(entry.clone());
                walk.append(&mut inner);
                if entry != lead {
                    walk.push(lead);
                }
                walk.push(exit);
            } else {
                let mut inner: Vec<Arrangement> = cliques[i]
                    .iter()
                    .filter(|c| **c != entry && **c != exit)
                    .take(j[i] - 1)
                    .cloned()
                    .collect();
                walk.push(entry);
                walk.append(&mut inner);
                walk.push(exit);
            }
        }
        walk
    }
}

fn sorted(list: &[Arrangement]) -> Vec<Arrangement> {
    let mut out = list.to_vec();
    out.sort();
    out
}

/// A cycle of length `l` through an edge of the pivot side, staying inside
/// that side.
pub fn h1_cycle(
    n: usize,
    k: usize,
    pivot: u8,
    alpha: &Arrangement,
    beta: &Arrangement,
    l: usize,
) -> Result<CycleWitness, ConstructError> {
    let split = SplitView { n, k, pivot };
    let ctx = H1Context::new(split, alpha.clone(), beta.clone())?;
    let verts = ctx.cycle(l)?;
    let witness = CycleWitness {
        spec: GraphSpec::Arrangement(n, k),
        vertices: verts.into_iter().map(Vertex::Arr).collect(),
    };
    crate::verify::validate_cycle(
        &witness.spec,
        &witness,
        Some((&Vertex::Arr(alpha.clone()), &Vertex::Arr(beta.clone()))),
        l,
    )
    .map_err(|e| stitch(e.to_string()))?;
    for v in &witness.vertices {
        if !v.as_arr().unwrap().contains(pivot) {
            return Err(stitch("pivot-side cycle escaped the pivot side"));
        }
    }
    Ok(witness)
}

// ---------------------------------------------------------------------------
// the constructor
// ---------------------------------------------------------------------------

pub struct EdgeContext {
    n: usize,
    k: usize,
    alpha: Arrangement,
    beta: Arrangement,
    inner: Inner,
}

enum Inner {
    /// n = k: tuples are permutations of [k].
    Gamma(gamma::EdgeContext),
    Split(Box<SplitState>),
}

struct SplitState {
    split: SplitView,
    same_set: bool,
    /// Case 1: cycles through the edge inside the pivot side
    h1_edge: Option<H1Context>,
    /// Case 2: cycles through (alpha, rot alpha) inside the pivot side
    h1_rot: Option<H1Context>,
    /// recursive contexts for the pivot-free side, keyed by entry edge
    children: Mutex<HashMap<(Arrangement, Arrangement), Arc<EdgeContext>>>,
}

impl EdgeContext {
    pub fn new(
        n: usize,
        k: usize,
        alpha: Arrangement,
        beta: Arrangement,
    ) -> Result<Self, ConstructError> {
        Self::with_pivot(n, k, alpha, beta, None)
    }

    /// Like `new`, but with a caller-chosen pivot. The default pivot is the
    /// smallest shared value (same-set edges) or the smallest value of the
    /// first endpoint outside the second (different sets).
    pub fn with_pivot(
        n: usize,
        k: usize,
        alpha: Arrangement,
        beta: Arrangement,
        pivot: Option<u8>,
    ) -> Result<Self, ConstructError> {
        if k < 4 || n < k || alpha.k() != k || beta.k() != k || alpha.ambient() != n {
            return Err(ConstructError::NotAnEdge);
        }
        if beta.ambient() != n || !adjacent(&alpha, &beta) {
            return Err(ConstructError::NotAnEdge);
        }
        let inner = if n == k {
            let to_perm = |a: &Arrangement| Permutation::new(a.values().to_vec()).unwrap();
            Inner::Gamma(gamma::EdgeContext::new(n, to_perm(&alpha), to_perm(&beta))?)
        } else {
            let same_set = alpha.same_set(&beta);
            let pivot = match pivot {
                Some(p) => {
                    // the pivot must sit on the first endpoint and, when the
                    // sets differ, separate the two endpoints
                    if !alpha.contains(p) || (!same_set && beta.contains(p)) {
                        return Err(ConstructError::NotAnEdge);
                    }
                    p
                }
                None if same_set => *alpha.values().iter().min().unwrap(),
                None => alpha
                    .values()
                    .iter()
                    .filter(|v| !beta.contains(**v))
                    .min()
                    .copied()
                    .expect("sets differ"),
            };
            let split = SplitView { n, k, pivot };
            let (h1_edge, h1_rot) = if same_set {
                (
                    Some(H1Context::new(split.clone(), alpha.clone(), beta.clone())?),
                    None,
                )
            } else {
                (
                    None,
                    Some(H1Context::new(
                        split.clone(),
                        alpha.clone(),
                        rotate(&alpha, 1),
                    )?),
                )
            };
            Inner::Split(Box::new(SplitState {
                split,
                same_set,
                h1_edge,
                h1_rot,
                children: Mutex::new(HashMap::new()),
            }))
        };
        Ok(EdgeContext {
            n,
            k,
            alpha,
            beta,
            inner,
        })
    }

    pub fn cycle(&self, l: usize) -> Result<CycleWitness, ConstructError> {
        let order = falling_factorial(self.n as u64, self.k as u64);
        if l < 3 || l as u64 > order {
            return Err(ConstructError::LengthOutOfRange(l, order));
        }
        let verts = match &self.inner {
            Inner::Gamma(ctx) => ctx
                .cycle(l)?
                .vertices
                .into_iter()
                .map(|v| {
                    let p = v.as_perm().unwrap();
                    Arrangement::new(p.values().to_vec(), self.n).unwrap()
                })
                .collect(),
            Inner::Split(state) => {
                if state.same_set {
                    self.case_same_set(state, l)?
                } else {
                    self.case_diff_set(state, l)?
                }
            }
        };
        let witness = CycleWitness {
            spec: GraphSpec::Arrangement(self.n, self.k),
            vertices: verts.into_iter().map(Vertex::Arr).collect(),
        };
        let (u, v) = (
            Vertex::Arr(self.alpha.clone()),
            Vertex::Arr(self.beta.clone()),
        );
        crate::verify::validate_cycle(&witness.spec, &witness, Some((&u, &v)), l)
            .map_err(|e| stitch(e.to_string()))?;
        Ok(witness)
    }

    /// Recurse into the pivot-free side for a cycle through the entry edge.
    fn child_cycle(
        &self,
        state: &SplitState,
        entry: (&Arrangement, &Arrangement),
        l2: usize,
    ) -> Result<Vec<Arrangement>, ConstructError> {
        debug_assert!(l2 >= 3);
        let split = &state.split;
        let (x, y) = (split.project_h2(entry.0), split.project_h2(entry.1));
        let child = {
            let key = (x.clone(), y.clone());
            let mut map = state.children.lock().unwrap();
            if let Some(c) = map.get(&key) {
                c.clone()
            } else {
                let c = Arc::new(EdgeContext::new(self.n - 1, self.k, x.clone(), y.clone())?);
                map.insert(key, c.clone());
                c
            }
        };
        let w = child.cycle(l2)?;
        Ok(w
            .vertices
            .iter()
            .map(|v| split.embed_h2(v.as_arr().unwrap()))
            .collect())
    }

    /// Path of `s` vertices from `entry.0` to `entry.1` through the
    /// pivot-free side: the entry edge alone, or its cycle minus the edge.
    fn h2_path(
        &self,
        state: &SplitState,
        entry: (&Arrangement, &Arrangement),
        s: usize,
    ) -> Result<Vec<Arrangement>, ConstructError> {
        if s == 2 {
            return Ok(vec![entry.0.clone(), entry.1.clone()]);
        }
        let cycle = self.child_cycle(state, entry, s)?;
        Ok(orient_path(&cycle, entry.0, entry.1))
    }

    /// Both endpoints share their value set; the edge lives in the pivot
    /// side and longer cycles splice in a path through the pivot-free side.
    fn case_same_set(
        &self,
        state: &SplitState,
        l: usize,
    ) -> Result<Vec<Arrangement>, ConstructError> {
        let h1 = state.h1_edge.as_ref().unwrap();
        let h1_cap = state.split.h1_order() as usize;
        if l <= h1_cap {
            return h1.cycle(l);
        }
        let h2_cap = state.split.h2_order() as usize;
        let (l1, s2) = {
            let r = l - h1_cap;
            if r == 1 {
                (h1_cap - 1, 2)
            } else if r == 2 {
                (h1_cap, 2)
            } else {
                debug_assert!(r <= h2_cap);
                (h1_cap, r)
            }
        };
        let cycle1 = h1.cycle(l1)?;
        // exit on the first edge distinct from the target edge
        let m = cycle1.len();
        let (at, exit) = (0..m)
            .map(|i| (i, (cycle1[i].clone(), cycle1[(i + 1) % m].clone())))
            .find(|(_, (u, v))| {
                !((*u == self.alpha && *v == self.beta) || (*u == self.beta && *v == self.alpha))
            })
            .ok_or_else(|| stitch("no exit edge in the pivot-side cycle"))?;
        let entry = self.substitute_bridge(state, (&exit.0, &exit.1))?;
        let path = self.h2_path(state, (&entry.0, &entry.1), s2)?;
        let mut out = Vec::with_capacity(l);
        if at + 1 == m {
            out.extend_from_slice(&cycle1);
            out.extend(path);
        } else {
            out.extend_from_slice(&cycle1[..=at]);
            out.extend(path);
            out.extend_from_slice(&cycle1[at + 1..]);
        }
        Ok(out)
    }

    /// Replace the pivot in each exit endpoint by a fresh value and rotate,
    /// scanning substitution values and offsets until the bridge closes:
    /// exit.0 ~ entry.0, entry.0 ~ entry.1, entry.1 ~ exit.1.
    fn substitute_bridge(
        &self,
        state: &SplitState,
        exit: (&Arrangement, &Arrangement),
    ) -> Result<(Arrangement, Arrangement), ConstructError> {
        let n = self.n;
        let k = self.k;
        let pivot = state.split.pivot;
        let fresh = |x: &Arrangement| -> Vec<u8> {
            (0..n as u8)
                .filter(|&v| v != pivot && !x.contains(v))
                .collect()
        };
        for c0 in fresh(exit.0) {
            let sub0 = exit.0.substitute(pivot, c0).unwrap();
            for c1 in fresh(exit.1) {
                let sub1 = exit.1.substitute(pivot, c1).unwrap();
                for t0 in 1..k {
                    let e0 = rotate(&sub0, t0);
                    if !adjacent(exit.0, &e0) {
                        continue;
                    }
                    for t1 in 1..k {
                        let e1 = rotate(&sub1, t1);
                        if adjacent(exit.1, &e1) && adjacent(&e0, &e1) {
                            return Ok((e0, e1));
                        }
                    }
                }
            }
        }
        Err(stitch("no substitution bridge into the pivot-free side"))
    }

    /// The endpoints differ in value set; the pivot separates them. Rotation
    /// partners give one edge on each side; both sides contribute a path and
    /// the target edge plus the rotated pair connect them.
    fn case_diff_set(
        &self,
        state: &SplitState,
        l: usize,
    ) -> Result<Vec<Arrangement>, ConstructError> {
        if l == 3 {
            return self.triangle();
        }
        let h1_cap = state.split.h1_order() as usize;
        let h2_cap = state.split.h2_order() as usize;
        let mut s1 = std::cmp::min(h1_cap, l - 2);
        let mut s2 = l - s1;
        if s2 == 1 {
            s1 -= 1;
            s2 = 2;
        }
        debug_assert!(s1 == 2 || s1 >= 3);
        debug_assert!(s2 == 2 || (3..=h2_cap).contains(&s2));
        let rot_a = rotate(&self.alpha, 1);
        let rot_b = rotate(&self.beta, 1);
        debug_assert!(adjacent(&rot_a, &rot_b));
        let piece1 = if s1 == 2 {
            vec![self.alpha.clone(), rot_a.clone()]
        } else {
            let h1 = state.h1_rot.as_ref().unwrap();
            let verts = h1.cycle(s1)?;
            orient_path(&verts, &self.alpha, &rot_a)
        };
        let piece2 = self.h2_path(state, (&self.beta, &rot_b), s2)?;
        // cycle: alpha .. rot_a | rot_b .. beta | wrap to alpha on the edge
        let mut out = Vec::with_capacity(l);
        out.extend(piece1);
        let mut back = piece2;
        back.reverse();
        out.extend(back);
        Ok(out)
    }

    fn triangle(&self) -> Result<Vec<Arrangement>, ConstructError> {
        let spec = GraphSpec::Arrangement(self.n, self.k);
        let a = Vertex::Arr(self.alpha.clone());
        for w in spec.neighbors(&a).expect("valid vertex") {
            let w = w.as_arr().unwrap();
            if *w != self.beta && adjacent(w, &self.beta) {
                return Ok(vec![self.alpha.clone(), self.beta.clone(), w.clone()]);
            }
        }
        Err(stitch("no triangle through the edge"))
    }
}

/// Orient a cycle as a path from `from` to `to`, dropping their shared edge.
fn orient_path(cycle: &[Arrangement], from: &Arrangement, to: &Arrangement) -> Vec<Arrangement> {
    let m = cycle.len();
    let pos = cycle
        .iter()
        .position(|x| x == from)
        .expect("path endpoint on cycle");
    let forward = cycle[(pos + 1) % m] != *to;
    let mut path = Vec::with_capacity(m);
    for t in 0..m {
        let idx = if forward {
            (pos + t) % m
        } else {
            (pos + m - t) % m
        };
        path.push(cycle[idx].clone());
    }
    debug_assert_eq!(&path[0], from);
    debug_assert_eq!(&path[m - 1], to);
    path
}

/// One-shot construction; sweeps should reuse an `EdgeContext`.
pub fn construct(
    n: usize,
    k: usize,
    alpha: &Arrangement,
    beta: &Arrangement,
    l: usize,
) -> Result<CycleWitness, ConstructError> {
    EdgeContext::new(n, k, alpha.clone(), beta.clone())?.cycle(l)
}

/// Cycle through a same-set edge under the given split: the edge lives in
/// the pivot side, and lengths past that side splice in a pivot-free path.
pub fn merge_same_set(
    edge: (&Arrangement, &Arrangement),
    l: usize,
    split: &SplitView,
) -> Result<CycleWitness, ConstructError> {
    if !edge.0.same_set(edge.1) {
        return Err(ConstructError::NotAnEdge);
    }
    EdgeContext::with_pivot(
        split.n,
        split.k,
        edge.0.clone(),
        edge.1.clone(),
        Some(split.pivot),
    )?
    .cycle(l)
}

/// Cycle through an edge whose endpoints differ in value set, the pivot
/// separating them: both sides contribute a path, joined on the edge and
/// its rotated partner pair.
pub fn merge_diff_set(
    edge: (&Arrangement, &Arrangement),
    l: usize,
    split: &SplitView,
) -> Result<CycleWitness, ConstructError> {
    if edge.0.same_set(edge.1) {
        return Err(ConstructError::NotAnEdge);
    }
    EdgeContext::with_pivot(
        split.n,
        split.k,
        edge.0.clone(),
        edge.1.clone(),
        Some(split.pivot),
    )?
    .cycle(l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::validate_cycle;

    fn arr(s: &str, n: usize) -> Arrangement {
        Arrangement::parse(s, n).unwrap()
    }

    #[test]
    fn orbit_cliques_partition_the_pivot_side() {
        let (n, k, pivot) = (5usize, 4usize, 4u8);
        let spec = GraphSpec::Arrangement(n, k);
        let mut seen = std::collections::HashSet::new();
        let mut count = 0usize;
        for r in 0..spec.order() {
            let x = spec.unrank(r);
            let x = x.as_arr().unwrap();
            if !x.contains(pivot) || seen.contains(x) {
                continue;
            }
            let orb = orbit(x);
            assert_eq!(orb.len(), k);
            for a in &orb {
                assert!(a.contains(pivot));
                assert!(seen.insert(a.clone()));
                for b in &orb {
                    if a != b {
                        assert!(adjacent(a, b));
                    }
                }
            }
            count += k;
        }
        let split = SplitView { n, k, pivot };
        assert_eq!(count as u64, split.h1_order());
    }

    #[test]
    fn split_orders_add_up() {
        for (n, k) in [(5usize, 4usize), (6, 4), (6, 5)] {
            let split = SplitView { n, k, pivot: 0 };
            let spec = GraphSpec::Arrangement(n, k);
            assert_eq!(split.h1_order() + split.h2_order(), spec.order());
        }
    }

    #[test]
    fn quotient_degree_bound() {
        for (n, k) in [(5usize, 4usize), (6, 4), (6, 5)] {
            let host = quotient_host(n, k);
            let n1 = host.dense.order();
            assert!(
                host.dense.min_degree() > n1 / 2,
                "({n},{k}): {} < {}",
                host.dense.min_degree(),
                n1 / 2 + 1
            );
        }
    }

    #[test]
    fn crossing_quotient_contains_the_companion_graph() {
        // every companion-graph edge admits a zero-delta crossing between
        // the corresponding orbit cliques
        let (n, k) = (5usize, 4usize);
        let host = quotient_host(n, k);
        let spec = GraphSpec::GTilde1(n, k);
        let order = spec.order();
        for i in 0..order {
            for j in (i + 1)..order {
                let (u, v) = (spec.unrank(i), spec.unrank(j));
                if spec.is_adjacent(&u, &v).unwrap() {
                    assert!(
                        host.dense.is_edge(i as u32, j as u32),
                        "companion edge ({u:?},{v:?}) missing a crossing"
                    );
                }
            }
        }
    }

    #[test]
    fn h1_cycles_validate_all_lengths() {
        let (n, k, pivot) = (5usize, 4usize, 4u8);
        let a = arr("1 2 3 5", n);
        let b = arr("5 1 2 4", n);
        assert!(a.contains(pivot) && b.contains(pivot) && adjacent(&a, &b));
        let cap = SplitView { n, k, pivot }.h1_order() as usize;
        for l in 3..=cap {
            let w = h1_cycle(n, k, pivot, &a, &b, l).unwrap_or_else(|e| panic!("l={l}: {e}"));
            assert_eq!(w.len(), l);
        }
    }

    #[test]
    fn h1_intra_orbit_edge() {
        // alpha and its rotation share an orbit clique
        let (n, k, pivot) = (5usize, 4usize, 4u8);
        let a = arr("1 2 3 5", n);
        let r = rotate(&a, 1);
        for l in [3usize, 4, 7, 20, 50, 96] {
            let w = h1_cycle(n, k, pivot, &a, &r, l).unwrap_or_else(|e| panic!("l={l}: {e}"));
            assert_eq!(w.len(), l);
        }
    }

    #[test]
    fn base_case_delegates_to_derangement_route() {
        let a = arr("1 2 3 4", 4);
        let b = arr("2 1 4 3", 4);
        let w = construct(4, 4, &a, &b, 17).unwrap();
        assert_eq!(w.len(), 17);
        assert_eq!(w.spec, GraphSpec::Arrangement(4, 4));
    }

    #[test]
    fn construct_54_all_routes() {
        let spec = GraphSpec::Arrangement(5, 4);
        // same-set edge
        let a = arr("1 2 3 4", 5);
        let b = arr("2 3 4 1", 5);
        let ctx = EdgeContext::new(5, 4, a.clone(), b.clone()).unwrap();
        for l in [3usize, 4, 5, 6, 20, 95, 96, 97, 98, 99, 119, 120] {
            let w = ctx.cycle(l).unwrap_or_else(|e| panic!("same-set l={l}: {e}"));
            validate_cycle(
                &spec,
                &w,
                Some((&Vertex::Arr(a.clone()), &Vertex::Arr(b.clone()))),
                l,
            )
            .unwrap_or_else(|e| panic!("same-set l={l}: {e}"));
        }
        // different-set edge
        let c = arr("1 2 3 4", 5);
        let d = arr("2 3 4 5", 5);
        let ctx = EdgeContext::new(5, 4, c.clone(), d.clone()).unwrap();
        for l in [3usize, 4, 5, 6, 7, 30, 60, 97, 98, 119, 120] {
            let w = ctx.cycle(l).unwrap_or_else(|e| panic!("diff-set l={l}: {e}"));
            validate_cycle(
                &spec,
                &w,
                Some((&Vertex::Arr(c.clone()), &Vertex::Arr(d.clone()))),
                l,
            )
            .unwrap_or_else(|e| panic!("diff-set l={l}: {e}"));
        }
    }

    #[test]
    fn construct_64_samples() {
        let spec = GraphSpec::Arrangement(6, 4);
        let a = arr("1 2 3 4", 6);
        let b = arr("2 3 4 5", 6);
        let ctx = EdgeContext::new(6, 4, a.clone(), b.clone()).unwrap();
        for l in [3usize, 4, 5, 17, 100, 241, 300, 359, 360] {
            let w = ctx.cycle(l).unwrap_or_else(|e| panic!("l={l}: {e}"));
            validate_cycle(
                &spec,
                &w,
                Some((&Vertex::Arr(a.clone()), &Vertex::Arr(b.clone()))),
                l,
            )
            .unwrap_or_else(|e| panic!("l={l}: {e}"));
        }
    }

    #[test]
    fn merge_wrappers_honor_the_given_pivot() {
        let spec = GraphSpec::Arrangement(5, 4);
        let a = arr("1 2 3 4", 5);
        let b = arr("2 3 4 1", 5);
        let split = SplitView { n: 5, k: 4, pivot: 2 };
        let w = merge_same_set((&a, &b), 119, &split).unwrap();
        validate_cycle(&spec, &w, Some((&Vertex::Arr(a.clone()), &Vertex::Arr(b))), 119).unwrap();

        let c = arr("2 3 4 5", 5);
        let split = SplitView { n: 5, k: 4, pivot: 0 };
        let w = merge_diff_set((&a, &c), 42, &split).unwrap();
        validate_cycle(&spec, &w, Some((&Vertex::Arr(a.clone()), &Vertex::Arr(c.clone()))), 42)
            .unwrap();
        // a pivot shared by both endpoints is not a separating pivot
        let bad = SplitView { n: 5, k: 4, pivot: 2 };
        assert!(merge_diff_set((&a, &c), 42, &bad).is_err());
    }

    #[test]
    fn rejects_out_of_range_and_non_edges() {
        let a = arr("1 2 3 4", 5);
        let b = arr("2 3 4 5", 5);
        assert!(matches!(
            construct(5, 4, &a, &b, 121),
            Err(ConstructError::LengthOutOfRange(121, 120))
        ));
        let not_edge = arr("1 3 4 5", 5);
        assert!(construct(5, 4, &a, &not_edge, 5).is_err());
    }
}
