//! Exact p-Wasserstein distances between discrete measures.
//!
//! Three independent routes are provided:
//!
//! - [`wasserstein_exact`]: transportation simplex (northwest-corner start,
//!   MODI potentials, Bland's rule for both entering and leaving cells);
//! - [`wasserstein_1d_oracle`]: the monotone (quantile) coupling on ℝ;
//! - [`brute_force_oracle`]: enumeration of permutations or of every basic
//!   solution of the transportation polytope, for tiny instances.
//!
//! Costs are `‖x − y‖^p` with distances below `1e-12` clamped to zero. The
//! distance is `cost^{1/p}`, taken once at the end.

use std::collections::VecDeque;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::base_space::BasePoint;
use crate::error::{check_dim, Error, Result};
use crate::measure::DiscreteMeasure;

/// Distances below this are treated as zero.
pub const ZERO_DIST: f64 = 1e-12;

/// Which route produced a [`TransportResult`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Simplex,
    Quantile1d,
    Bruteforce,
    /// One of the measures is a Dirac mass, so the product plan is the only
    /// feasible coupling.
    Product,
}

/// A transport plan stored as its non-zero entries `(i, j, mass)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Coupling {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl Coupling {
    pub fn row_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.rows];
        for &(i, _, w) in &self.entries {
            s[i] += w;
        }
        s
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.cols];
        for &(_, j, w) in &self.entries {
            s[j] += w;
        }
        s
    }

    /// Largest marginal violation against the given measures.
    pub fn marginal_error(&self, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> f64 {
        let r = self
            .row_sums()
            .iter()
            .zip(mu.weights())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let c = self
            .col_sums()
            .iter()
            .zip(nu.weights())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        r.max(c)
    }

    /// `Σ π_ij c(x_i, y_j)` for exponent `p`.
    pub fn cost(&self, mu: &DiscreteMeasure, nu: &DiscreteMeasure, p: f64) -> f64 {
        self.entries
            .iter()
            .map(|&(i, j, w)| w * ground_cost(&mu.support()[i], &nu.support()[j], p))
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransportResult {
    /// `W_p`.
    pub value: f64,
    /// `W_p^p`.
    pub cost: f64,
    pub p: f64,
    pub plan: Coupling,
    pub solver: SolverKind,
}

impl TransportResult {
    fn from_plan(plan: Coupling, cost: f64, p: f64, solver: SolverKind) -> Self {
        let cost = cost.max(0.0);
        Self { value: cost.powf(1.0 / p), cost, p, plan, solver }
    }
}

impl Serialize for TransportResult {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let plan: Vec<(usize, usize, f64)> = self.plan.entries.clone();
        let mut st = s.serialize_struct("TransportResult", 4)?;
        st.serialize_field("value", &self.value)?;
        st.serialize_field("p", &self.p)?;
        st.serialize_field("solver", &self.solver)?;
        st.serialize_field("plan", &plan)?;
        st.end()
    }
}

/// `‖x − y‖^p`, clamped to 0 below [`ZERO_DIST`].
pub fn ground_cost(x: &BasePoint, y: &BasePoint, p: f64) -> f64 {
    let d2 = x.dist_sq(y);
    if d2 <= ZERO_DIST * ZERO_DIST {
        0.0
    } else if p == 2.0 {
        d2
    } else if p == 1.0 {
        d2.sqrt()
    } else {
        d2.sqrt().powf(p)
    }
}

fn check_exponent(p: f64) -> Result<()> {
    if p >= 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("Wasserstein exponent must be >= 1, got {p}")))
    }
}

fn product_plan(mu: &DiscreteMeasure, nu: &DiscreteMeasure, p: f64) -> TransportResult {
    let mut entries = Vec::with_capacity(mu.len() * nu.len());
    for (i, wi) in mu.weights().iter().enumerate() {
        for (j, wj) in nu.weights().iter().enumerate() {
            entries.push((i, j, wi * wj));
        }
    }
    let plan = Coupling { rows: mu.len(), cols: nu.len(), entries };
    let cost = plan.cost(mu, nu, p);
    TransportResult::from_plan(plan, cost, p, SolverKind::Product)
}

/// Exact `W_p(μ, ν)` and an optimal vertex coupling.
pub fn wasserstein_exact(mu: &DiscreteMeasure, nu: &DiscreteMeasure, p: f64) -> Result<TransportResult> {
    check_exponent(p)?;
    check_dim(mu.dim(), nu.dim())?;
    if mu.len() == 1 || nu.len() == 1 {
        return Ok(product_plan(mu, nu, p));
    }
    let n = mu.len();
    let m = nu.len();
    let mut cost = Vec::with_capacity(n * m);
    for x in mu.support() {
        for y in nu.support() {
            cost.push(ground_cost(x, y, p));
        }
    }
    let cap = 10 * (n + m) * (n + m);
    let flows = TransportSimplex::new(n, m, &cost, mu.weights(), nu.weights()).solve(cap)?;
    let entries: Vec<_> = flows.into_iter().filter(|&(_, _, w)| w > 0.0).collect();
    let plan = Coupling { rows: n, cols: m, entries };
    let total = plan.entries.iter().map(|&(i, j, w)| w * cost[i * m + j]).sum();
    Ok(TransportResult::from_plan(plan, total, p, SolverKind::Simplex))
}

/// Convenience wrapper returning only `W_p`.
pub fn wasserstein(mu: &DiscreteMeasure, nu: &DiscreteMeasure, p: f64) -> Result<f64> {
    wasserstein_exact(mu, nu, p).map(|r| r.value)
}

/// Dense-state transportation simplex over a spanning-tree basis.
struct TransportSimplex<'a> {
    n: usize,
    m: usize,
    cost: &'a [f64],
    supply: &'a [f64],
    demand: &'a [f64],
    flow: Vec<f64>,
    basic: Vec<bool>,
    basis: Vec<usize>,
}

impl<'a> TransportSimplex<'a> {
    fn new(n: usize, m: usize, cost: &'a [f64], supply: &'a [f64], demand: &'a [f64]) -> Self {
        Self {
            n,
            m,
            cost,
            supply,
            demand,
            flow: vec![0.0; n * m],
            basic: vec![false; n * m],
            basis: Vec::with_capacity(n + m - 1),
        }
    }

    /// Northwest-corner rule. Exactly one index advances per step, so the
    /// basis always has `n + m − 1` cells; degenerate cells carry zero flow.
    fn northwest_corner(&mut self) {
        let (n, m) = (self.n, self.m);
        let mut a = self.supply.to_vec();
        let mut b = self.demand.to_vec();
        let (mut i, mut j) = (0, 0);
        loop {
            let q = a[i].min(b[j]);
            let cell = i * m + j;
            self.flow[cell] = q;
            self.basic[cell] = true;
            self.basis.push(cell);
            a[i] -= q;
            b[j] -= q;
            if i == n - 1 && j == m - 1 {
                break;
            }
            if i == n - 1 {
                j += 1;
            } else if j == m - 1 || a[i] <= b[j] {
                i += 1;
            } else {
                j += 1;
            }
        }
        debug_assert_eq!(self.basis.len(), n + m - 1);
    }

    fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        // Nodes: rows 0..n, columns n..n+m. Each entry is (neighbour, cell).
        let mut adj = vec![Vec::new(); self.n + self.m];
        for &cell in &self.basis {
            let (i, j) = (cell / self.m, cell % self.m);
            adj[i].push((self.n + j, cell));
            adj[self.n + j].push((i, cell));
        }
        adj
    }

    fn potentials(&self, adj: &[Vec<(usize, usize)>]) -> Vec<f64> {
        let mut pot = vec![f64::NAN; self.n + self.m];
        pot[0] = 0.0;
        let mut queue = VecDeque::from([0usize]);
        while let Some(node) = queue.pop_front() {
            for &(next, cell) in &adj[node] {
                if pot[next].is_nan() {
                    // u_i + v_j = c_ij
                    pot[next] = self.cost[cell] - pot[node];
                    queue.push_back(next);
                }
            }
        }
        pot
    }

    /// Cells on the tree path from row node `r` to column node `n + c`.
    fn tree_path(&self, adj: &[Vec<(usize, usize)>], r: usize, c: usize) -> Vec<usize> {
        let target = self.n + c;
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; self.n + self.m];
        let mut seen = vec![false; self.n + self.m];
        seen[r] = true;
        let mut queue = VecDeque::from([r]);
        while let Some(node) = queue.pop_front() {
            if node == target {
                break;
            }
            for &(next, cell) in &adj[node] {
                if !seen[next] {
                    seen[next] = true;
                    parent[next] = Some((node, cell));
                    queue.push_back(next);
                }
            }
        }
        let mut path = Vec::new();
        let mut node = target;
        while node != r {
            let (prev, cell) = parent[node].expect("basis must be a spanning tree");
            path.push(cell);
            node = prev;
        }
        path.reverse();
        path
    }

    fn solve(mut self, max_iter: usize) -> Result<Vec<(usize, usize, f64)>> {
        self.northwest_corner();
        let cmax = self.cost.iter().copied().fold(0.0, f64::max);
        let tol = 1e-13 * cmax;
        let (n, m) = (self.n, self.m);
        for _ in 0..max_iter {
            let adj = self.adjacency();
            let pot = self.potentials(&adj);
            // Bland: first improving cell in index order.
            let entering = (0..n * m).find(|&cell| {
                !self.basic[cell] && self.cost[cell] - pot[cell / m] - pot[n + cell % m] < -tol
            });
            let Some(entering) = entering else {
                return Ok(self
                    .basis
                    .iter()
                    .map(|&cell| (cell / m, cell % m, self.flow[cell]))
                    .collect());
            };
            let path = self.tree_path(&adj, entering / m, entering % m);
            // The path alternates starting with a donor cell in the entering row.
            let mut theta = f64::INFINITY;
            let mut leaving = usize::MAX;
            for &cell in path.iter().step_by(2) {
                let f = self.flow[cell];
                if f < theta || (f == theta && cell < leaving) {
                    theta = f;
                    leaving = cell;
                }
            }
            for (k, &cell) in path.iter().enumerate() {
                if k % 2 == 0 {
                    self.flow[cell] -= theta;
                } else {
                    self.flow[cell] += theta;
                }
            }
            self.flow[entering] = theta;
            self.flow[leaving] = 0.0;
            self.basic[leaving] = false;
            self.basic[entering] = true;
            let slot = self.basis.iter().position(|&c| c == leaving).unwrap();
            self.basis[slot] = entering;
        }
        Err(Error::SolverStalled(max_iter))
    }
}

/// Monotone quantile coupling on ℝ; optimal for every convex cost `|x − y|^p`.
pub fn wasserstein_1d_oracle(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    p: f64,
) -> Result<TransportResult> {
    check_exponent(p)?;
    check_dim(1, mu.dim())?;
    check_dim(1, nu.dim())?;
    let sorted = |m: &DiscreteMeasure| {
        let mut idx: Vec<usize> = (0..m.len()).collect();
        idx.sort_by(|&a, &b| m.support()[a].coords()[0].total_cmp(&m.support()[b].coords()[0]));
        idx
    };
    let (si, ti) = (sorted(mu), sorted(nu));
    let (mut a, mut b) = (0usize, 0usize);
    let (mut fa, mut fb) = (mu.weights()[si[0]], nu.weights()[ti[0]]);
    let mut lo = 0.0;
    let mut entries = Vec::new();
    let mut cost = 0.0;
    loop {
        let hi = fa.min(fb);
        let mass = hi - lo;
        if mass > 0.0 {
            let (i, j) = (si[a], ti[b]);
            entries.push((i, j, mass));
            cost += mass * ground_cost(&mu.support()[i], &nu.support()[j], p);
        }
        lo = hi;
        let adv_a = fa <= fb;
        let adv_b = fb <= fa;
        if adv_a {
            a += 1;
        }
        if adv_b {
            b += 1;
        }
        if a == si.len() || b == ti.len() {
            break;
        }
        if adv_a {
            fa += mu.weights()[si[a]];
        }
        if adv_b {
            fb += nu.weights()[ti[b]];
        }
    }
    let plan = Coupling { rows: mu.len(), cols: nu.len(), entries };
    Ok(TransportResult::from_plan(plan, cost, p, SolverKind::Quantile1d))
}

/// Largest permutation instance accepted by [`brute_force_oracle`].
pub const BRUTE_MAX_PERM: usize = 7;
/// Largest `n + m` accepted for full vertex enumeration.
pub const BRUTE_MAX_TOTAL: usize = 10;

/// Ground-truth optimum by exhaustive enumeration.
///
/// Uniform `n = m ≤ 7` instances enumerate permutations (the vertices of the
/// Birkhoff polytope). Otherwise, for `n + m ≤ 10`, every spanning tree of the
/// bipartite graph `K_{n,m}` is enumerated; each tree determines a unique
/// basic solution and the feasible ones are exactly the polytope's vertices.
pub fn brute_force_oracle(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    p: f64,
) -> Result<TransportResult> {
    check_exponent(p)?;
    check_dim(mu.dim(), nu.dim())?;
    let (n, m) = (mu.len(), nu.len());
    let uniform = |w: &[f64]| w.iter().all(|&x| (x - 1.0 / w.len() as f64).abs() <= 1e-12);
    let mut cost = Vec::with_capacity(n * m);
    for x in mu.support() {
        for y in nu.support() {
            cost.push(ground_cost(x, y, p));
        }
    }
    if n == m && n <= BRUTE_MAX_PERM && uniform(mu.weights()) && uniform(nu.weights()) {
        let (perm, total) = best_permutation(n, &cost);
        let w = 1.0 / n as f64;
        let entries = perm.iter().enumerate().map(|(i, &j)| (i, j, w)).collect();
        let plan = Coupling { rows: n, cols: m, entries };
        return Ok(TransportResult::from_plan(plan, total * w, p, SolverKind::Bruteforce));
    }
    if n + m > BRUTE_MAX_TOTAL {
        return Err(Error::InstanceTooLarge { n, m });
    }
    let mut search = TreeSearch {
        n,
        m,
        cost: &cost,
        supply: mu.weights(),
        demand: nu.weights(),
        dsu: RollbackDsu::new(n + m),
        chosen: Vec::with_capacity(n + m - 1),
        best: None,
    };
    search.recurse(0);
    let (flows, total) = search.best.ok_or_else(|| {
        Error::NumericalInconsistency("no feasible basic solution found".into())
    })?;
    let entries = flows.into_iter().filter(|&(_, _, w)| w > 0.0).collect();
    let plan = Coupling { rows: n, cols: m, entries };
    Ok(TransportResult::from_plan(plan, total, p, SolverKind::Bruteforce))
}

fn best_permutation(n: usize, cost: &[f64]) -> (Vec<usize>, f64) {
    // Heap's algorithm, non-recursive.
    let eval = |perm: &[usize]| perm.iter().enumerate().map(|(i, &j)| cost[i * n + j]).sum::<f64>();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = (perm.clone(), eval(&perm));
    let mut c = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            let v = eval(&perm);
            if v < best.1 {
                best = (perm.clone(), v);
            }
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    best
}

struct RollbackDsu {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl RollbackDsu {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), size: vec![1; n] }
    }

    fn find(&self, mut x: usize) -> usize {
        while self.parent[x] != x {
            x = self.parent[x];
        }
        x
    }

    /// Returns the absorbed root, or `None` if already connected.
    fn union(&mut self, a: usize, b: usize) -> Option<usize> {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return None;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        Some(rb)
    }

    fn undo(&mut self, child: usize) {
        let root = self.parent[child];
        self.size[root] -= self.size[child];
        self.parent[child] = child;
    }
}

type BestBasic = (Vec<(usize, usize, f64)>, f64);

struct TreeSearch<'a> {
    n: usize,
    m: usize,
    cost: &'a [f64],
    supply: &'a [f64],
    demand: &'a [f64],
    dsu: RollbackDsu,
    chosen: Vec<usize>,
    best: Option<BestBasic>,
}

impl TreeSearch<'_> {
    fn recurse(&mut self, start: usize) {
        let need = self.n + self.m - 1;
        if self.chosen.len() == need {
            self.evaluate();
            return;
        }
        let cells = self.n * self.m;
        for cell in start..cells {
            if cells - cell < need - self.chosen.len() {
                break;
            }
            let (i, j) = (cell / self.m, cell % self.m);
            if let Some(child) = self.dsu.union(i, self.n + j) {
                self.chosen.push(cell);
                self.recurse(cell + 1);
                self.chosen.pop();
                self.dsu.undo(child);
            }
        }
    }

    /// Solves the tree's flows by leaf elimination and records it if feasible.
    fn evaluate(&mut self) {
        let nodes = self.n + self.m;
        let mut residual: Vec<f64> = self.supply.iter().chain(self.demand).copied().collect();
        let mut degree = vec![0usize; nodes];
        let mut incident: Vec<Vec<usize>> = vec![Vec::new(); nodes];
        for (k, &cell) in self.chosen.iter().enumerate() {
            let (i, j) = (cell / self.m, cell % self.m);
            degree[i] += 1;
            degree[self.n + j] += 1;
            incident[i].push(k);
            incident[self.n + j].push(k);
        }
        let mut flow = vec![f64::NAN; self.chosen.len()];
        let mut leaves: Vec<usize> = (0..nodes).filter(|&v| degree[v] == 1).collect();
        while let Some(v) = leaves.pop() {
            if degree[v] != 1 {
                continue;
            }
            let Some(&k) = incident[v].iter().find(|&&k| flow[k].is_nan()) else {
                continue;
            };
            let f = residual[v];
            flow[k] = f;
            let cell = self.chosen[k];
            let (i, j) = (cell / self.m, self.n + cell % self.m);
            let other = if v == i { j } else { i };
            residual[v] = 0.0;
            residual[other] -= f;
            degree[v] -= 1;
            degree[other] -= 1;
            if degree[other] == 1 {
                leaves.push(other);
            }
        }
        if flow.iter().any(|f| f.is_nan() || *f < -1e-12) {
            return;
        }
        let total: f64 = self
            .chosen
            .iter()
            .zip(&flow)
            .map(|(&cell, &f)| f.max(0.0) * self.cost[cell])
            .sum();
        if self.best.as_ref().is_none_or(|(_, b)| total < *b) {
            let flows = self
                .chosen
                .iter()
                .zip(&flow)
                .map(|(&cell, &f)| (cell / self.m, cell % self.m, f.max(0.0)))
                .collect();
            self.best = Some((flows, total));
        }
    }
}
