//! Edge-pancyclicity constructor for the derangement graph: for any edge
//! αβ (n >= 4) and any length 3..=n!, builds an explicit cycle through αβ.
//!
//! Long cycles come from a quotient construction: normalize the edge so both
//! endpoints fix the last point, walk a cycle through the coset cliques
//! indexed by a dense complement graph on S_{n-1}, and stitch clique paths
//! together with crossing edges found by the orbit sum identity. Lengths 3-5
//! come from pairwise-disjoint permutations (disjoint perfect matchings of
//! K_{n,n}); n = 4 takes a two-clique route for lengths 5-7 and even
//! quotient cycles for the rest.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::dense::ComplementHost;
use crate::graph::{CycleWitness, GraphSpec, Vertex};
use crate::perm::{coset, factorial, CyclicPermutation, Permutation};
use crate::ConstructError;

fn complement_host(m: usize) -> Arc<ComplementHost> {
    static HOSTS: OnceLock<Mutex<HashMap<usize, Arc<ComplementHost>>>> = OnceLock::new();
    let map = HOSTS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = map.lock().unwrap();
    guard
        .entry(m)
        .or_insert_with(|| Arc::new(ComplementHost::new(m)))
        .clone()
}

fn cyclic_perms(n: usize) -> Arc<Vec<CyclicPermutation>> {
    static CYCLES: OnceLock<Mutex<HashMap<usize, Arc<Vec<CyclicPermutation>>>>> = OnceLock::new();
    let map = CYCLES.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = map.lock().unwrap();
    guard
        .entry(n)
        .or_insert_with(|| Arc::new(CyclicPermutation::enumerate(n)))
        .clone()
}

/// A normalized edge: after relabeling, both `alpha` and `beta0` fix the
/// last point, `beta0 = sigma^{i0} ∘ beta`, and they agree in at least two
/// positions. `relabel_value` acts on the left and `relabel_pos` on the
/// right; both are involutions recorded to map witnesses back.
#[derive(Clone, Debug)]
pub struct NormalizedEdge {
    pub alpha: Permutation,
    pub beta: Permutation,
    pub beta0: Permutation,
    pub sigma: CyclicPermutation,
    pub i0: usize,
    pub relabel_value: Permutation,
    pub relabel_pos: Permutation,
}

impl NormalizedEdge {
    pub fn n(&self) -> usize {
        self.alpha.n()
    }

    /// Map a vertex of the normalized problem back to the original one.
    pub fn to_original(&self, p: &Permutation) -> Permutation {
        let gamma_inv = self.relabel_value.inverse();
        let rho_inv = self.relabel_pos.inverse();
        gamma_inv
            .compose(&p.compose(&rho_inv).expect("same n"))
            .expect("same n")
    }
}

/// Picks the lexicographically first cyclic sigma whose nonzero powers all
/// avoid `alpha ∘ beta⁻¹`, plus the smallest shift with two agreements.
/// Existence is guaranteed for n >= 4 since (n-1)! > n-1.
pub fn select_sigma_and_shift(
    alpha: &Permutation,
    beta: &Permutation,
) -> Result<NormalizedEdge, ConstructError> {
    let n = alpha.n();
    if n != beta.n() || n < 4 {
        return Err(ConstructError::NotAnEdge);
    }
    if alpha.delta(beta).unwrap() != 0 {
        return Err(ConstructError::NotAnEdge);
    }
    let target = alpha.compose(&beta.inverse()).unwrap();
    for sigma in cyclic_perms(n).iter() {
        let mut collides = false;
        let mut power = sigma.as_permutation().clone();
        for _ in 1..n {
            if power == target {
                collides = true;
                break;
            }
            power = sigma.as_permutation().compose(&power).unwrap();
        }
        if collides {
            continue;
        }
        // the orbit deltas sum to n with a zero at shift 0, so some shift
        // reaches 2
        let mut shifted = beta.clone();
        for i in 1..n {
            shifted = sigma.as_permutation().compose(&shifted).unwrap();
            if alpha.delta(&shifted).unwrap() >= 2 {
                return Ok(NormalizedEdge {
                    alpha: alpha.clone(),
                    beta: beta.clone(),
                    beta0: shifted,
                    sigma: sigma.clone(),
                    i0: i,
                    relabel_value: Permutation::identity(n),
                    relabel_pos: Permutation::identity(n),
                });
            }
        }
        unreachable!("orbit sum identity guarantees a shift with two agreements");
    }
    unreachable!("(n-1)! cyclic candidates cannot all collide with n-1 powers");
}

/// Relabels so the agreement sits at the last position with the last value:
/// a position transposition on the right, then a value transposition on the
/// left. Sigma conjugates by the value part and stays cyclic.
pub fn normalize(ne: NormalizedEdge) -> NormalizedEdge {
    let n = ne.n();
    let last = n - 1;
    let agree_pos = (0..n)
        .filter(|&i| ne.alpha.image(i) == ne.beta0.image(i))
        .min_by_key(|&i| if i == last { 0 } else { i + 1 })
        .expect("two agreements exist");
    let rho = transposition(n, agree_pos, last);
    let alpha1 = ne.alpha.compose(&rho).unwrap();
    let beta1 = ne.beta.compose(&rho).unwrap();
    let beta01 = ne.beta0.compose(&rho).unwrap();
    let agree_val = alpha1.image(last) as usize;
    let gamma = transposition(n, agree_val, last);
    let conj = |p: &Permutation| gamma.compose(&p.compose(&gamma.inverse()).unwrap()).unwrap();
    let sigma = CyclicPermutation::new(conj(ne.sigma.as_permutation())).expect("conjugate cycle");
    let out = NormalizedEdge {
        alpha: gamma.compose(&alpha1).unwrap(),
        beta: gamma.compose(&beta1).unwrap(),
        beta0: gamma.compose(&beta01).unwrap(),
        sigma,
        i0: ne.i0,
        relabel_value: gamma,
        relabel_pos: rho,
    };
    debug_assert_eq!(out.alpha.image(n - 1) as usize, n - 1);
    debug_assert_eq!(out.beta0.image(n - 1) as usize, n - 1);
    debug_assert!(out.alpha.delta(&out.beta0).unwrap() >= 2);
    debug_assert_eq!(out.alpha.delta(&out.beta).unwrap(), 0);
    debug_assert_eq!(
        out.sigma.power(out.i0 as i64).compose(&out.beta).unwrap(),
        out.beta0
    );
    out
}

fn transposition(n: usize, a: usize, b: usize) -> Permutation {
    let mut values: Vec<u8> = (0..n as u8).collect();
    values.swap(a, b);
    Permutation::new(values).unwrap()
}

/// Decomposition of a target length into a quotient-cycle length `q` and one
/// clique path length per quotient vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LengthPlan {
    pub q: usize,
    pub j: Vec<usize>,
}

impl LengthPlan {
    pub fn total(&self) -> usize {
        self.q + self.j.iter().sum::<usize>()
    }
}

/// Generic planner: q = max(3, ceil(l/n)) with each path length in
/// [1, n-1]. Valid for 6 <= l <= n!.
pub fn plan_length(l: usize, n: usize) -> Result<LengthPlan, ConstructError> {
    let nfac = factorial(n);
    if !(6..=nfac as usize).contains(&l) {
        return Err(ConstructError::LengthOutOfRange(l, nfac));
    }
    let q = std::cmp::max(3, l.div_ceil(n));
    debug_assert!(q as u64 <= factorial(n - 1));
    debug_assert!(2 * q <= l && l <= q * n);
    Ok(LengthPlan {
        q,
        j: distribute(l - q, q, n - 1),
    })
}

/// Planner for n = 4, where the quotient only has even cycles: q in {4, 6}
/// covers lengths 8..=24.
fn plan_length_n4(l: usize) -> Result<LengthPlan, ConstructError> {
    if !(8..=24).contains(&l) {
        return Err(ConstructError::LengthOutOfRange(l, 24));
    }
    let q = if l <= 16 { 4 } else { 6 };
    Ok(LengthPlan {
        q,
        j: distribute(l - q, q, 3),
    })
}

/// `q` values in [1, cap] summing to `total`, filled greedily in order.
pub(crate) fn distribute(total: usize, q: usize, cap: usize) -> Vec<usize> {
    debug_assert!(q <= total && total <= q * cap);
    let mut j = vec![1usize; q];
    let mut extra = total - q;
    for slot in j.iter_mut() {
        let take = extra.min(cap - 1);
        *slot += take;
        extra -= take;
        if extra == 0 {
            break;
        }
    }
    j
}

/// Reorders a cycle (of dense-graph indices) so it starts `a, b, ...`.
pub(crate) fn orient_cycle(cycle: &[u32], a: u32, b: u32) -> Vec<u32> {
    let m = cycle.len();
    for i in 0..m {
        if cycle[i] == a {
            let next = cycle[(i + 1) % m];
            let prev = cycle[(i + m - 1) % m];
            let mut out = Vec::with_capacity(m);
            if next == b {
                for t in 0..m {
                    out.push(cycle[(i + t) % m]);
                }
                return out;
            }
            if prev == b {
                for t in 0..m {
                    out.push(cycle[(i + m - t) % m]);
                }
                return out;
            }
        }
    }
    panic!("oriented edge not on cycle");
}

/// A cycle of length `q` through the edge (alpha_hat, beta0_hat) in the
/// loopless complement of the derangement graph on S_{n-1}, starting at
/// alpha_hat then beta0_hat. For m = 3 the quotient is bipartite and only
/// even q in {4, 6} exist.
pub fn quotient_cycle(
    alpha_hat: &Permutation,
    beta0_hat: &Permutation,
    q: usize,
) -> Result<CycleWitness, ConstructError> {
    let m = alpha_hat.n();
    let host = complement_host(m);
    let a = host.rank(alpha_hat);
    let b = host.rank(beta0_hat);
    if !host.graph.is_edge(a, b) {
        return Err(ConstructError::NotAnEdge);
    }
    let raw = if host.graph.is_k33() {
        host.graph
            .even_cycle_k33((a, b), q)
            .map_err(|e| match e {
                crate::dense::DenseError::OddLengthBipartite
                | crate::dense::DenseError::LengthOutOfRange(..) => {
                    ConstructError::LengthOutOfRange(q, 6)
                }
                other => ConstructError::StitchFailed(other.to_string()),
            })?
    } else {
        host.graph
            .cycle_through_edge((a, b), q)
            .map_err(|e| match e {
                crate::dense::DenseError::LengthOutOfRange(..) => {
                    ConstructError::LengthOutOfRange(q, host.graph.order() as u64)
                }
                other => ConstructError::StitchFailed(other.to_string()),
            })?
    };
    let oriented = orient_cycle(&raw, a, b);
    Ok(CycleWitness {
        spec: GraphSpec::ComplementNonTrivial(m),
        vertices: oriented
            .into_iter()
            .map(|r| Vertex::Perm(host.unrank(r)))
            .collect(),
    })
}

/// Lifts a quotient cycle to the full graph: each quotient vertex indexes a
/// coset clique, crossings between consecutive cliques come from the orbit
/// sum identity, and each clique contributes a path of the planned length.
/// The second crossing vertex is pinned to the original `beta`, which makes
/// the target edge an explicit crossing edge.
pub fn lift_and_stitch(
    quotient: &CycleWitness,
    plan: &LengthPlan,
    sigma: &CyclicPermutation,
    beta: &Permutation,
) -> Result<Vec<Permutation>, ConstructError> {
    let n = sigma.n();
    let q = plan.q;
    if quotient.len() != q || plan.j.len() != q {
        return Err(ConstructError::StitchFailed("plan/quotient mismatch".into()));
    }
    let stitch = |msg: &str| ConstructError::StitchFailed(msg.into());

    // lift: append the fixed last point
    let taus: Vec<Permutation> = quotient
        .vertices
        .iter()
        .map(|v| {
            let hat = v.as_perm().expect("quotient vertices are permutations");
            let mut vals = hat.values().to_vec();
            vals.push((n - 1) as u8);
            Permutation::new(vals).expect("lift is a bijection")
        })
        .collect();

    // crossing entries: theta[i] enters clique i from clique i-1
    let mut thetas: Vec<Option<Permutation>> = vec![None; q];
    thetas[1] = Some(beta.clone());
    if taus[0].delta(beta).unwrap() != 0 {
        return Err(stitch("pinned crossing is not an edge"));
    }
    for i in 0..q {
        if thetas[i].is_some() {
            continue;
        }
        let prev = &taus[(i + q - 1) % q];
        let orbit = coset(&taus[i], sigma).unwrap();
        let hit = orbit
            .into_iter()
            .find(|cand| prev.delta(cand).unwrap() == 0)
            .ok_or_else(|| stitch("no zero-delta crossing in the orbit"))?;
        thetas[i] = Some(hit);
    }

    // clique paths: theta_i .. tau_i with j-1 lexicographically smallest
    // unused members in between
    let mut walk: Vec<Permutation> = Vec::with_capacity(plan.total());
    for i in 0..q {
        let theta = thetas[i].clone().unwrap();
        let tau = &taus[i];
        if theta == *tau {
            return Err(stitch("degenerate clique path"));
        }
        let j = plan.j[i];
        let mut pool: Vec<Permutation> = coset(tau, sigma)
            .unwrap()
            .into_iter()
            .filter(|p| p != &theta && p != tau)
            .collect();
        pool.sort();
        if pool.len() < j - 1 {
            return Err(stitch("clique too small for the planned path"));
        }
        walk.push(theta);
        walk.extend(pool.into_iter().take(j - 1));
        walk.push(tau.clone());
    }
    Ok(walk)
}

/// Short cycles through αβ from pairwise-disjoint permutations: the rows
/// α, β, π₁, ... extend a partial Latin rectangle, each new row found as a
/// perfect matching of positions to still-free values.
pub fn short_cycle(
    alpha: &Permutation,
    beta: &Permutation,
    l: usize,
) -> Result<Vec<Permutation>, ConstructError> {
    let n = alpha.n();
    if !(3..=5).contains(&l) || l > n {
        return Err(ConstructError::LengthOutOfRange(l, n as u64));
    }
    if alpha.delta(beta).unwrap() != 0 {
        return Err(ConstructError::NotAnEdge);
    }
    let mut rows = vec![alpha.clone(), beta.clone()];
    while rows.len() < l {
        let next = disjoint_row(&rows, n)
            .ok_or_else(|| ConstructError::StitchFailed("matching completion failed".into()))?;
        rows.push(next);
    }
    Ok(rows)
}

/// One more permutation at delta 0 from every row, via augmenting-path
/// matching on the bipartite position/value graph of free cells.
fn disjoint_row(rows: &[Permutation], n: usize) -> Option<Permutation> {
    let mut blocked = vec![vec![false; n]; n]; // blocked[pos][val]
    for row in rows {
        for pos in 0..n {
            blocked[pos][row.image(pos) as usize] = true;
        }
    }
    let mut pos_of_val = vec![usize::MAX; n];
    for pos in 0..n {
        let mut visited = vec![false; n];
        if !augment(pos, n, &blocked, &mut pos_of_val, &mut visited) {
            return None;
        }
    }
    let mut values = vec![0u8; n];
    for (val, &pos) in pos_of_val.iter().enumerate() {
        if pos != usize::MAX {
            values[pos] = val as u8;
        }
    }
    Some(Permutation::new(values).expect("matching is a bijection"))
}

fn augment(
    pos: usize,
    n: usize,
    blocked: &[Vec<bool>],
    pos_of_val: &mut [usize],
    visited: &mut [bool],
) -> bool {
    for val in 0..n {
        if blocked[pos][val] || visited[val] {
            continue;
        }
        visited[val] = true;
        if pos_of_val[val] == usize::MAX
            || augment(pos_of_val[val], n, blocked, pos_of_val, visited)
        {
            pos_of_val[val] = pos;
            return true;
        }
    }
    false
}

/// Per-edge state: normalization plus a growing memo of quotient cycles, so
/// sweeping all lengths of one edge costs one engine pass.
pub struct EdgeContext {
    n: usize,
    alpha: Permutation,
    beta: Permutation,
    norm: NormalizedEdge,
    quotient_memo: Mutex<HashMap<usize, CycleWitness>>,
}

impl EdgeContext {
    pub fn new(n: usize, alpha: Permutation, beta: Permutation) -> Result<Self, ConstructError> {
        if alpha.n() != n || beta.n() != n || n < 4 {
            return Err(ConstructError::NotAnEdge);
        }
        if alpha.delta(&beta).map_err(|_| ConstructError::NotAnEdge)? != 0 {
            return Err(ConstructError::NotAnEdge);
        }
        let norm = normalize(select_sigma_and_shift(&alpha, &beta)?);
        Ok(EdgeContext {
            n,
            alpha,
            beta,
            norm,
            quotient_memo: Mutex::new(HashMap::new()),
        })
    }

    pub fn cycle(&self, l: usize) -> Result<CycleWitness, ConstructError> {
        let n = self.n;
        let nfac = factorial(n);
        if l < 3 || l as u64 > nfac {
            return Err(ConstructError::LengthOutOfRange(l, nfac));
        }
        let verts = if n >= 5 {
            if l <= 5 {
                short_cycle(&self.alpha, &self.beta, l)?
            } else {
                self.lift_route(plan_length(l, n)?)?
            }
        } else {
            match l {
                3 | 4 => short_cycle(&self.alpha, &self.beta, l)?,
                5..=7 => self.two_clique_route(l)?,
                _ => self.lift_route(plan_length_n4(l)?)?,
            }
        };
        let witness = CycleWitness {
            spec: GraphSpec::Derangement(n),
            vertices: verts.into_iter().map(Vertex::Perm).collect(),
        };
        let (u, v) = (Vertex::Perm(self.alpha.clone()), Vertex::Perm(self.beta.clone()));
        crate::verify::validate_cycle(&witness.spec, &witness, Some((&u, &v)), l)
            .map_err(|e| ConstructError::StitchFailed(e.to_string()))?;
        Ok(witness)
    }

    fn lift_route(&self, plan: LengthPlan) -> Result<Vec<Permutation>, ConstructError> {
        let norm = &self.norm;
        let quotient = {
            let mut memo = self.quotient_memo.lock().unwrap();
            if let Some(w) = memo.get(&plan.q) {
                w.clone()
            } else {
                let w = quotient_cycle(&hat(&norm.alpha), &hat(&norm.beta0), plan.q)?;
                memo.insert(plan.q, w.clone());
                w
            }
        };
        let walk = lift_and_stitch(&quotient, &plan, &norm.sigma, &norm.beta)?;
        Ok(walk.iter().map(|p| norm.to_original(p)).collect())
    }

    /// n = 4 lengths 5..7: route through the two cliques holding the edge,
    /// crossing on αβ and on the shifted pair.
    fn two_clique_route(&self, l: usize) -> Result<Vec<Permutation>, ConstructError> {
        let norm = &self.norm;
        let alpha0 = norm.sigma.power(norm.i0 as i64).compose(&norm.alpha).unwrap();
        debug_assert_eq!(alpha0.delta(&norm.beta0).unwrap(), 0);
        let total_path = l - 2;
        let j_beta = total_path.saturating_sub(3).max(1);
        let j_alpha = total_path - j_beta;
        let mut walk = vec![norm.alpha.clone()];
        walk.extend(clique_path(&norm.beta, &norm.beta0, j_beta, &norm.sigma));
        walk.extend(clique_path(&alpha0, &norm.alpha, j_alpha, &norm.sigma));
        walk.pop(); // alpha closes the cycle and already leads it
        Ok(walk.iter().map(|p| norm.to_original(p)).collect())
    }
}

/// Path of `j` edges from `from` to `to` inside the coset clique of `to`,
/// including both endpoints.
fn clique_path(
    from: &Permutation,
    to: &Permutation,
    j: usize,
    sigma: &CyclicPermutation,
) -> Vec<Permutation> {
    debug_assert!(from != to);
    let mut pool: Vec<Permutation> = coset(to, sigma)
        .unwrap()
        .into_iter()
        .filter(|p| p != from && p != to)
        .collect();
    pool.sort();
    let mut path = vec![from.clone()];
    path.extend(pool.into_iter().take(j - 1));
    path.push(to.clone());
    path
}

fn hat(p: &Permutation) -> Permutation {
    let n = p.n();
    debug_assert_eq!(p.image(n - 1) as usize, n - 1);
    Permutation::new(p.values()[..n - 1].to_vec()).expect("prefix is a bijection")
}

/// One-shot construction. Sweeps should reuse an `EdgeContext` instead.
pub fn construct(
    alpha: &Permutation,
    beta: &Permutation,
    l: usize,
) -> Result<CycleWitness, ConstructError> {
    EdgeContext::new(alpha.n(), alpha.clone(), beta.clone())?.cycle(l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::validate_cycle;

    fn p(s: &str) -> Permutation {
        s.parse().unwrap()
    }

    #[test]
    fn sigma_selection_invariants() {
        let alpha = Permutation::identity(4);
        let beta = p("2 1 4 3");
        let ne = select_sigma_and_shift(&alpha, &beta).unwrap();
        // rejection rule: alpha beta^{-1} differs from every nonzero power
        let target = alpha.compose(&beta.inverse()).unwrap();
        for i in 1..4 {
            assert_ne!(ne.sigma.power(i), target);
        }
        assert!(ne.alpha.delta(&ne.beta0).unwrap() >= 2);
        assert_ne!(ne.alpha, ne.beta0);
        // orbit deltas sum to n with a zero at shift 0
        let total: usize = (0..4)
            .map(|i| {
                alpha
                    .delta(&ne.sigma.power(i).compose(&beta).unwrap())
                    .unwrap()
            })
            .sum();
        assert_eq!(total, 4);
    }

    #[test]
    fn normalize_fixes_last_point_and_preserves_structure() {
        for (a, b) in [
            ("1 2 3 4 5", "2 1 4 5 3"),
            ("3 1 2 5 4", "1 2 4 3 5"),
            ("1 2 3 4", "2 1 4 3"),
        ] {
            let alpha = p(a);
            let beta = p(b);
            let ne = normalize(select_sigma_and_shift(&alpha, &beta).unwrap());
            let n = ne.n();
            assert_eq!(ne.alpha.image(n - 1) as usize, n - 1);
            assert_eq!(ne.beta0.image(n - 1) as usize, n - 1);
            assert_eq!(ne.alpha.delta(&ne.beta).unwrap(), 0);
            assert_eq!(ne.to_original(&ne.alpha), alpha);
            assert_eq!(ne.to_original(&ne.beta), beta);
        }
    }

    #[test]
    fn planner_soundness() {
        for n in 4..=7usize {
            let nfac = factorial(n) as usize;
            for l in 6..=nfac {
                let plan = plan_length(l, n).unwrap();
                assert_eq!(plan.total(), l, "n={n} l={l}");
                assert!(plan.q >= 3 && plan.q as u64 <= factorial(n - 1));
                assert!(plan.j.iter().all(|&j| (1..n).contains(&j)));
            }
        }
        assert!(plan_length(5, 5).is_err());
        assert!(plan_length(121, 5).is_err());
    }

    #[test]
    fn planner_hamilton_case() {
        let plan = plan_length(120, 5).unwrap();
        assert_eq!(plan.q, 24);
        assert!(plan.j.iter().all(|&j| j == 4));
    }

    #[test]
    fn short_cycle_rows_pairwise_disjoint() {
        let alpha = p("1 2 3 4 5");
        let beta = p("2 1 4 5 3");
        for l in 3..=5 {
            let rows = short_cycle(&alpha, &beta, l).unwrap();
            assert_eq!(rows.len(), l);
            for i in 0..l {
                for j in (i + 1)..l {
                    assert_eq!(rows[i].delta(&rows[j]).unwrap(), 0, "rows {i},{j}");
                }
            }
        }
    }

    #[test]
    fn quotient_cycle_n4_even_only() {
        let alpha = p("1 2 3 4");
        let beta = p("2 1 4 3");
        let ne = normalize(select_sigma_and_shift(&alpha, &beta).unwrap());
        let (ah, bh) = (hat(&ne.alpha), hat(&ne.beta0));
        for q in [4usize, 6] {
            let w = quotient_cycle(&ah, &bh, q).unwrap();
            assert_eq!(w.len(), q);
            assert_eq!(w.vertices[0], Vertex::Perm(ah.clone()));
            assert_eq!(w.vertices[1], Vertex::Perm(bh.clone()));
        }
        assert!(matches!(
            quotient_cycle(&ah, &bh, 5),
            Err(ConstructError::LengthOutOfRange(5, _))
        ));
    }

    #[test]
    fn construct_samples_validate() {
        let spec4 = GraphSpec::Derangement(4);
        let a4 = p("1 2 3 4");
        let b4 = p("2 1 4 3");
        for l in 3..=24 {
            let w = construct(&a4, &b4, l).unwrap();
            assert_eq!(
                validate_cycle(&spec4, &w, Some((&Vertex::Perm(a4.clone()), &Vertex::Perm(b4.clone()))), l),
                Ok(()),
                "n=4 l={l}"
            );
        }
        let spec5 = GraphSpec::Derangement(5);
        let a5 = p("1 2 3 4 5");
        let b5 = p("3 4 5 2 1");
        assert_eq!(a5.delta(&b5).unwrap(), 0);
        let ctx = EdgeContext::new(5, a5.clone(), b5.clone()).unwrap();
        for l in [3usize, 4, 5, 6, 7, 29, 60, 119, 120] {
            let w = ctx.cycle(l).unwrap();
            assert_eq!(
                validate_cycle(&spec5, &w, Some((&Vertex::Perm(a5.clone()), &Vertex::Perm(b5.clone()))), l),
                Ok(()),
                "n=5 l={l}"
            );
        }
    }

    #[test]
    fn construct_rejects_out_of_range() {
        let a = p("1 2 3 4");
        let b = p("2 1 4 3");
        assert!(matches!(
            construct(&a, &b, 25),
            Err(ConstructError::LengthOutOfRange(25, 24))
        ));
        assert!(matches!(
            construct(&a, &b, 2),
            Err(ConstructError::LengthOutOfRange(2, 24))
        ));
        let not_edge = p("1 2 4 3");
        assert!(matches!(
            construct(&a, &not_edge, 5),
            Err(ConstructError::NotAnEdge)
        ));
    }

    #[test]
    fn deterministic_output() {
        let a = p("1 2 3 4 5");
        let b = p("2 1 4 5 3");
        let w1 = construct(&a, &b, 37).unwrap();
        let w2 = construct(&a, &b, 37).unwrap();
        assert_eq!(w1, w2);
    }
}
