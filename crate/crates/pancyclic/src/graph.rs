//! Implicit adjacency oracles for every graph family used by the
//! constructors, plus explicit snapshots for the small auxiliary graphs.
//!
//! The big families (n! vertices) are never materialized; vertices are
//! permutations or arrangements and adjacency is a delta computation.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::perm::{
    delta, derangement_count, factorial, falling_factorial, Arrangement, Permutation,
};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("invalid spec string: {0:?}")]
    ParseSpec(String),
    #[error("spec parameters violate a family precondition: {0}")]
    BadParameters(String),
    #[error("vertex has the wrong shape for this spec")]
    WrongVertexShape,
    #[error("explicit graph has an out-of-range edge endpoint")]
    BadEdge,
}

/// An explicit graph: `n` vertices named by 0-based index.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExplicitGraph {
    pub n: usize,
    pub edges: Vec<(u32, u32)>,
}

impl ExplicitGraph {
    pub fn new(n: usize, edges: Vec<(u32, u32)>) -> Result<Self, GraphError> {
        for &(u, v) in &edges {
            if u as usize >= n || v as usize >= n || u == v {
                return Err(GraphError::BadEdge);
            }
        }
        Ok(ExplicitGraph { n, edges })
    }

    pub fn adjacency_lists(&self) -> Vec<Vec<u32>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v) in &self.edges {
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        adj
    }

    pub fn min_degree(&self) -> usize {
        self.adjacency_lists()
            .iter()
            .map(|l| l.len())
            .min()
            .unwrap_or(0)
    }
}

/// Selects one of the graph families. The three public families are
/// `Derangement`, `FixedK` and `Arrangement`; the other variants are the
/// auxiliary quotient graphs the constructions run through.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GraphSpec {
    /// Γₙ: vertices Sₙ, adjacent iff they disagree in every position.
    Derangement(usize),
    /// Γₙᵏ: vertices Sₙ, adjacent iff they agree in exactly k positions.
    FixedK(usize, usize),
    /// Gₙᵏ: vertices are k-tuples of distinct values from [n], adjacent iff
    /// they disagree in every coordinate.
    Arrangement(usize, usize),
    /// Complement of Γₘ without loops: vertices Sₘ, adjacent iff distinct
    /// and agreeing somewhere.
    ComplementNonTrivial(usize),
    /// Quotient companion of the arrangement construction: vertices are
    /// (k-1)-tuples over [n-1], adjacent iff distinct and (entry sets differ
    /// or they agree somewhere).
    GTilde1(usize, usize),
    /// An explicit graph on indexed vertices.
    Explicit(ExplicitGraph),
}

/// A vertex of some spec: a tuple form for the permutation/arrangement
/// families, a bare index for explicit graphs.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Vertex {
    Perm(Permutation),
    Arr(Arrangement),
    Index(u32),
}

impl Vertex {
    pub fn entries(&self) -> Option<&[u8]> {
        match self {
            Vertex::Perm(p) => Some(p.values()),
            Vertex::Arr(a) => Some(a.values()),
            Vertex::Index(_) => None,
        }
    }

    pub fn as_perm(&self) -> Option<&Permutation> {
        match self {
            Vertex::Perm(p) => Some(p),
            _ => None,
        }
    }

    pub fn as_arr(&self) -> Option<&Arrangement> {
        match self {
            Vertex::Arr(a) => Some(a),
            _ => None,
        }
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Vertex::Perm(p) => write!(f, "{p}"),
            Vertex::Arr(a) => write!(f, "{a}"),
            Vertex::Index(i) => write!(f, "{i}"),
        }
    }
}

impl fmt::Debug for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({self})")
    }
}

impl GraphSpec {
    pub fn validate(&self) -> Result<(), GraphError> {
        let bad = |m: &str| Err(GraphError::BadParameters(m.to_string()));
        match *self {
            GraphSpec::Derangement(n) => {
                if !(4..=20).contains(&n) {
                    return bad("derangement graph needs 4 <= n <= 20");
                }
            }
            GraphSpec::FixedK(n, k) => {
                if !(4..=20).contains(&n) || n < 2 * k + 1 {
                    return bad("fixed-k graph needs n >= 4 and n >= 2k+1");
                }
            }
            GraphSpec::Arrangement(n, k) => {
                if k < 4 || n < k || n > 20 {
                    return bad("arrangement graph needs n >= k >= 4");
                }
            }
            GraphSpec::ComplementNonTrivial(m) => {
                if !(3..=10).contains(&m) {
                    return bad("complement graph needs 3 <= m <= 10");
                }
            }
            GraphSpec::GTilde1(n, k) => {
                if k < 4 || n <= k {
                    return bad("quotient companion needs n > k >= 4");
                }
            }
            GraphSpec::Explicit(ref g) => {
                if g.n == 0 {
                    return bad("explicit graph must be nonempty");
                }
            }
        }
        Ok(())
    }

    /// Exact vertex count.
    pub fn order(&self) -> u64 {
        match *self {
            GraphSpec::Derangement(n) | GraphSpec::FixedK(n, _) => factorial(n),
            GraphSpec::Arrangement(n, k) => falling_factorial(n as u64, k as u64),
            GraphSpec::ComplementNonTrivial(m) => factorial(m),
            GraphSpec::GTilde1(n, k) => falling_factorial((n - 1) as u64, (k - 1) as u64),
            GraphSpec::Explicit(ref g) => g.n as u64,
        }
    }

    /// Degree of the (vertex-transitive) families; minimum degree for
    /// explicit graphs.
    pub fn degree(&self) -> u64 {
        match *self {
            GraphSpec::Derangement(n) => derangement_count(n),
            GraphSpec::FixedK(n, k) => binomial(n, k) * derangement_count(n - k),
            GraphSpec::Arrangement(n, k) => arrangement_degree(n, k),
            GraphSpec::ComplementNonTrivial(m) => factorial(m) - 1 - derangement_count(m),
            GraphSpec::GTilde1(_, k) => self.order() - 1 - derangement_count(k - 1),
            GraphSpec::Explicit(ref g) => g.min_degree() as u64,
        }
    }

    pub fn is_adjacent(&self, u: &Vertex, v: &Vertex) -> Result<bool, GraphError> {
        match (self, u, v) {
            (GraphSpec::Derangement(n), Vertex::Perm(a), Vertex::Perm(b)) => {
                if a.n() != *n || b.n() != *n {
                    return Err(GraphError::WrongVertexShape);
                }
                Ok(delta(a.values(), b.values()) == 0)
            }
            (GraphSpec::FixedK(n, k), Vertex::Perm(a), Vertex::Perm(b)) => {
                if a.n() != *n || b.n() != *n {
                    return Err(GraphError::WrongVertexShape);
                }
                // agreement count equals the fixed points of a⁻¹b without
                // forming the product
                Ok(delta(a.values(), b.values()) == *k && a != b)
            }
            (GraphSpec::Arrangement(n, k), Vertex::Arr(a), Vertex::Arr(b)) => {
                if a.k() != *k || b.k() != *k || a.ambient() != *n || b.ambient() != *n {
                    return Err(GraphError::WrongVertexShape);
                }
                Ok(delta(a.values(), b.values()) == 0)
            }
            (GraphSpec::ComplementNonTrivial(m), Vertex::Perm(a), Vertex::Perm(b)) => {
                if a.n() != *m || b.n() != *m {
                    return Err(GraphError::WrongVertexShape);
                }
                Ok(a != b && delta(a.values(), b.values()) >= 1)
            }
            (GraphSpec::GTilde1(n, k), Vertex::Arr(a), Vertex::Arr(b)) => {
                if a.k() != *k - 1 || b.k() != *k - 1 || a.ambient() != *n - 1 {
                    return Err(GraphError::WrongVertexShape);
                }
                Ok(a != b && (!a.same_set(b) || delta(a.values(), b.values()) >= 1))
            }
            (GraphSpec::Explicit(g), Vertex::Index(x), Vertex::Index(y)) => {
                if *x as usize >= g.n || *y as usize >= g.n {
                    return Err(GraphError::WrongVertexShape);
                }
                Ok(g.edges.contains(&(*x, *y)) || g.edges.contains(&(*y, *x)))
            }
            _ => Err(GraphError::WrongVertexShape),
        }
    }

    /// All vertices adjacent to `u`, each exactly once.
    pub fn neighbors(&self, u: &Vertex) -> Result<Vec<Vertex>, GraphError> {
        match (self, u) {
            (GraphSpec::Derangement(n), Vertex::Perm(a)) => {
                if a.n() != *n {
                    return Err(GraphError::WrongVertexShape);
                }
                Ok(deranged_partners(a.values(), *n)
                    .into_iter()
                    .map(|vals| Vertex::Perm(Permutation::new(vals).expect("bijection")))
                    .collect())
            }
            (GraphSpec::FixedK(n, k), Vertex::Perm(a)) => {
                if a.n() != *n {
                    return Err(GraphError::WrongVertexShape);
                }
                let mut out = Vec::new();
                fixed_k_partners(a.values(), *n, *k, &mut out);
                Ok(out
                    .into_iter()
                    .map(|vals| Vertex::Perm(Permutation::new(vals).expect("bijection")))
                    .collect())
            }
            (GraphSpec::Arrangement(n, k), Vertex::Arr(a)) => {
                if a.k() != *k || a.ambient() != *n {
                    return Err(GraphError::WrongVertexShape);
                }
                let mut out = Vec::new();
                let mut cur: Vec<u8> = Vec::with_capacity(*k);
                let mut used = vec![false; *n];
                arrangement_partners(a.values(), *n, &mut cur, &mut used, &mut out);
                Ok(out
                    .into_iter()
                    .map(|vals| Vertex::Arr(Arrangement::new(vals, *n).expect("distinct")))
                    .collect())
            }
            (GraphSpec::ComplementNonTrivial(m), Vertex::Perm(a)) => {
                if a.n() != *m {
                    return Err(GraphError::WrongVertexShape);
                }
                let mut out = Vec::new();
                for rank in 0..factorial(*m) {
                    let b = Permutation::from_lex_rank(*m, rank);
                    if b != *a && delta(a.values(), b.values()) >= 1 {
                        out.push(Vertex::Perm(b));
                    }
                }
                Ok(out)
            }
            (GraphSpec::GTilde1(n, k), Vertex::Arr(a)) => {
                if a.k() != *k - 1 || a.ambient() != *n - 1 {
                    return Err(GraphError::WrongVertexShape);
                }
                let mut out = Vec::new();
                for rank in 0..self.order() {
                    let b = Arrangement::from_lex_rank(*n - 1, *k - 1, rank);
                    let bv = Vertex::Arr(b);
                    if self.is_adjacent(u, &bv)? {
                        out.push(bv);
                    }
                }
                Ok(out)
            }
            (GraphSpec::Explicit(g), Vertex::Index(x)) => {
                if *x as usize >= g.n {
                    return Err(GraphError::WrongVertexShape);
                }
                Ok(g.adjacency_lists()[*x as usize]
                    .iter()
                    .map(|&y| Vertex::Index(y))
                    .collect())
            }
            _ => Err(GraphError::WrongVertexShape),
        }
    }

    /// Dense 0-based index of a vertex, by lexicographic rank.
    pub fn rank(&self, u: &Vertex) -> Result<u64, GraphError> {
        match (self, u) {
            (GraphSpec::Derangement(_), Vertex::Perm(p))
            | (GraphSpec::FixedK(_, _), Vertex::Perm(p))
            | (GraphSpec::ComplementNonTrivial(_), Vertex::Perm(p)) => Ok(p.lex_rank()),
            (GraphSpec::Arrangement(_, _), Vertex::Arr(a))
            | (GraphSpec::GTilde1(_, _), Vertex::Arr(a)) => Ok(a.lex_rank()),
            (GraphSpec::Explicit(_), Vertex::Index(i)) => Ok(*i as u64),
            _ => Err(GraphError::WrongVertexShape),
        }
    }

    pub fn unrank(&self, rank: u64) -> Vertex {
        match *self {
            GraphSpec::Derangement(n) | GraphSpec::FixedK(n, _) => {
                Vertex::Perm(Permutation::from_lex_rank(n, rank))
            }
            GraphSpec::ComplementNonTrivial(m) => Vertex::Perm(Permutation::from_lex_rank(m, rank)),
            GraphSpec::Arrangement(n, k) => Vertex::Arr(Arrangement::from_lex_rank(n, k, rank)),
            GraphSpec::GTilde1(n, k) => Vertex::Arr(Arrangement::from_lex_rank(n - 1, k - 1, rank)),
            GraphSpec::Explicit(_) => Vertex::Index(rank as u32),
        }
    }

    /// Parse a vertex in the shape this spec expects.
    pub fn parse_vertex(&self, s: &str) -> Result<Vertex, GraphError> {
        let shape_err = |_| GraphError::WrongVertexShape;
        match *self {
            GraphSpec::Derangement(n) | GraphSpec::FixedK(n, _) => {
                let p: Permutation = s.parse().map_err(shape_err)?;
                if p.n() != n {
                    return Err(GraphError::WrongVertexShape);
                }
                Ok(Vertex::Perm(p))
            }
            GraphSpec::ComplementNonTrivial(m) => {
                let p: Permutation = s.parse().map_err(shape_err)?;
                if p.n() != m {
                    return Err(GraphError::WrongVertexShape);
                }
                Ok(Vertex::Perm(p))
            }
            GraphSpec::Arrangement(n, k) => {
                let a = Arrangement::parse(s, n).map_err(shape_err)?;
                if a.k() != k {
                    return Err(GraphError::WrongVertexShape);
                }
                Ok(Vertex::Arr(a))
            }
            GraphSpec::GTilde1(n, k) => {
                let a = Arrangement::parse(s, n - 1).map_err(shape_err)?;
                if a.k() != k - 1 {
                    return Err(GraphError::WrongVertexShape);
                }
                Ok(Vertex::Arr(a))
            }
            GraphSpec::Explicit(ref g) => {
                let i: u32 = s.trim().parse().map_err(|_| GraphError::WrongVertexShape)?;
                if (i as usize) < g.n {
                    Ok(Vertex::Index(i))
                } else {
                    Err(GraphError::WrongVertexShape)
                }
            }
        }
    }

    /// Materialize the full adjacency structure. Only sensible for the small
    /// auxiliary graphs; callers must keep `order()` at desk scale.
    pub fn snapshot(&self) -> ExplicitGraph {
        let n = self.order() as usize;
        let vertices: Vec<Vertex> = (0..n as u64).map(|r| self.unrank(r)).collect();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if self
                    .is_adjacent(&vertices[i], &vertices[j])
                    .expect("shapes match")
                {
                    edges.push((i as u32, j as u32));
                }
            }
        }
        ExplicitGraph {
            n,
            edges,
        }
    }
}

impl fmt::Display for GraphSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            GraphSpec::Derangement(n) => write!(f, "gamma:{n}"),
            GraphSpec::FixedK(n, k) => write!(f, "gammak:{n}:{k}"),
            GraphSpec::Arrangement(n, k) => write!(f, "arr:{n}:{k}"),
            GraphSpec::ComplementNonTrivial(m) => write!(f, "complement:{m}"),
            GraphSpec::GTilde1(n, k) => write!(f, "gtilde:{n}:{k}"),
            GraphSpec::Explicit(ref g) => write!(f, "explicit:{}", g.n),
        }
    }
}

impl FromStr for GraphSpec {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let err = || GraphError::ParseSpec(s.to_string());
        let num = |t: &str| t.parse::<usize>().map_err(|_| err());
        let spec = match parts.as_slice() {
            ["gamma", n] => GraphSpec::Derangement(num(n)?),
            ["gammak", n, k] => GraphSpec::FixedK(num(n)?, num(k)?),
            ["arr", n, k] => GraphSpec::Arrangement(num(n)?, num(k)?),
            ["complement", m] => GraphSpec::ComplementNonTrivial(num(m)?),
            ["gtilde", n, k] => GraphSpec::GTilde1(num(n)?, num(k)?),
            _ => return Err(err()),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// An ordered vertex sequence certifying one cycle; the universal output of
/// every constructor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleWitness {
    pub spec: GraphSpec,
    pub vertices: Vec<Vertex>,
}

impl CycleWitness {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// True iff `(u, v)` appears as a cyclically consecutive pair, in either
    /// direction.
    pub fn contains_edge(&self, u: &Vertex, v: &Vertex) -> bool {
        let m = self.vertices.len();
        (0..m).any(|i| {
            let a = &self.vertices[i];
            let b = &self.vertices[(i + 1) % m];
            (a == u && b == v) || (a == v && b == u)
        })
    }
}

/// Serialized form of a witness: spec string, length, optional target edge,
/// vertices in one-line notation.
#[derive(Serialize, Deserialize)]
pub struct WitnessJson {
    pub spec: String,
    pub length: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_edge: Option<[String; 2]>,
    pub vertices: Vec<String>,
}

impl CycleWitness {
    pub fn to_json(&self, target_edge: Option<(&Vertex, &Vertex)>) -> String {
        let doc = WitnessJson {
            spec: self.spec.to_string(),
            length: self.vertices.len(),
            target_edge: target_edge.map(|(u, v)| [u.to_string(), v.to_string()]),
            vertices: self.vertices.iter().map(|v| v.to_string()).collect(),
        };
        serde_json::to_string_pretty(&doc).expect("witness serializes")
    }

    pub fn from_json(text: &str, spec: Option<GraphSpec>) -> Result<Self, GraphError> {
        let doc: WitnessJson =
            serde_json::from_str(text).map_err(|e| GraphError::ParseSpec(e.to_string()))?;
        let spec = match spec {
            Some(s) => s,
            None => doc.spec.parse()?,
        };
        let vertices = doc
            .vertices
            .iter()
            .map(|s| spec.parse_vertex(s))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(CycleWitness { spec, vertices })
    }
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut result = 1u64;
    for i in 0..k {
        result = result * (n - i) as u64 / (i + 1) as u64;
    }
    result
}

/// Degree of Gₙᵏ by inclusion–exclusion over forced agreements.
fn arrangement_degree(n: usize, k: usize) -> u64 {
    let mut total = 0i64;
    for j in 0..=k {
        let term = binomial(k, j) as i64
            * falling_factorial((n - j) as u64, (k - j) as u64) as i64;
        if j % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    (total - if k == 0 { 1 } else { 0 }).max(0) as u64
}

/// All value sequences that disagree with `base` in every position
/// (derangement partners), generated by forbidden-position backtracking.
fn deranged_partners(base: &[u8], n: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(n);
    let mut used = vec![false; n];
    fn go(base: &[u8], n: usize, cur: &mut Vec<u8>, used: &mut [bool], out: &mut Vec<Vec<u8>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        let pos = cur.len();
        for v in 0..n as u8 {
            if !used[v as usize] && v != base[pos] {
                used[v as usize] = true;
                cur.push(v);
                go(base, n, cur, used, out);
                cur.pop();
                used[v as usize] = false;
            }
        }
    }
    go(base, n, &mut cur, &mut used, &mut out);
    out
}

/// Partners of `base` agreeing in exactly `k` positions: enumerate the
/// agreement set, then derange the remaining values over the remaining
/// positions. Each partner arises from exactly one agreement set.
fn fixed_k_partners(base: &[u8], n: usize, k: usize, out: &mut Vec<Vec<u8>>) {
    let mut cur = base.to_vec();
    let cur = &mut cur;
    let positions: Vec<usize> = (0..n).collect();
    for mask in subsets_of_size(&positions, k) {
        let mut in_mask = vec![false; n];
        for &p in &mask {
            in_mask[p] = true;
        }
        let free_positions: Vec<usize> = (0..n).filter(|&p| !in_mask[p]).collect();
        let free_values: Vec<u8> = free_positions.iter().map(|&p| base[p]).collect();
        // derange free_values over free_positions: result[p] != base[p]
        let m = free_positions.len();
        let mut used = vec![false; m];
        let mut assign = vec![0u8; m];
        #[allow(clippy::too_many_arguments)]
        fn derange(
            i: usize,
            m: usize,
            free_positions: &[usize],
            free_values: &[u8],
            base: &[u8],
            used: &mut [bool],
            assign: &mut [u8],
            sink: &mut dyn FnMut(&[u8]),
        ) {
            if i == m {
                sink(assign);
                return;
            }
            for j in 0..m {
                if !used[j] && free_values[j] != base[free_positions[i]] {
                    used[j] = true;
                    assign[i] = free_values[j];
                    derange(i + 1, m, free_positions, free_values, base, used, assign, sink);
                    used[j] = false;
                }
            }
        }
        let mut sink = |assign: &[u8]| {
            cur.copy_from_slice(base);
            for (i, &p) in free_positions.iter().enumerate() {
                cur[p] = assign[i];
            }
            out.push(cur.clone());
        };
        derange(
            0,
            m,
            &free_positions,
            &free_values,
            base,
            &mut used,
            &mut assign,
            &mut sink,
        );
    }
}

fn subsets_of_size(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn go(items: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            cur.push(items[i]);
            go(items, k, i + 1, cur, out);
            cur.pop();
        }
    }
    go(items, k, 0, &mut cur, &mut out);
    out
}

/// All k-tuples over [n] disagreeing with `base` in every coordinate.
fn arrangement_partners(
    base: &[u8],
    n: usize,
    cur: &mut Vec<u8>,
    used: &mut [bool],
    out: &mut Vec<Vec<u8>>,
) {
    if cur.len() == base.len() {
        out.push(cur.clone());
        return;
    }
    let pos = cur.len();
    for v in 0..n as u8 {
        if !used[v as usize] && v != base[pos] {
            used[v as usize] = true;
            cur.push(v);
            arrangement_partners(base, n, cur, used, out);
            cur.pop();
            used[v as usize] = false;
        }
    }
}
