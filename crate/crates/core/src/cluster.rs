//! Cluster model: a DTMC over states `(i, j)` where `i` is the replica count
//! ordered by the last evaluation and `j` the number of ready replicas.
//!
//! One step spans one evaluation period. The next order `i'` depends only on
//! the current ready count `j` (through the metric and evaluator models), and
//! the next ready count `j'` depends only on the current order `i` (through the
//! provisioning CTMC solved over `T_eva`), so
//! `P[(i,j),(i',j')] = H_j[i'] · V_i[j,j']`.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::config::{check_arrival_rate, AutoscalerConfig};
use crate::error::{invalid, Error, Result};
use crate::evaluator::{order_probabilities, OrderDistribution};
use crate::linalg::{self, Matrix};
use crate::metric_model::MetricModel;

/// Factor entries below this are dropped and their row renormalized.
pub const TRUNCATION: f64 = 1e-15;

/// Largest `Λt` handled by direct uniformization; longer horizons are split
/// into `2^s` equal steps and recombined by squaring.
const DIRECT_UNIFORMIZATION_LIMIT: f64 = 400.0;

/// Chains with more states than this are solved by power iteration.
pub const DIRECT_SOLVE_MAX_STATES: usize = 400;

/// Generator of the provisioning birth-death chain for a fixed order.
///
/// Row and column `x` correspond to `x + 1` ready replicas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateMatrix {
    pub target: usize,
    pub q: Matrix,
}

impl RateMatrix {
    pub fn n_max(&self) -> usize {
        self.q.rows()
    }

    /// Rate from `from` to `to` ready replicas (both 1-based).
    pub fn rate(&self, from: usize, to: usize) -> f64 {
        self.q[(from - 1, to - 1)]
    }

    /// Uniformization constant `max_x |Q_xx|`.
    pub fn max_exit_rate(&self) -> f64 {
        (0..self.n_max()).map(|x| -self.q[(x, x)]).fold(0.0, f64::max)
    }
}

/// Builds the provisioning CTMC generator toward `i_target` ready replicas.
///
/// Below the target, the `i_target - j` missing replicas provision in
/// parallel; above it, the `j - i_target` surplus replicas drain in parallel.
pub fn build_rate_matrix(i_target: usize, cfg: &AutoscalerConfig) -> Result<RateMatrix> {
    let n = cfg.n_max;
    if i_target < 1 || i_target > n {
        return Err(invalid("i_target", alloc::format!("{i_target} outside [1, {n}]")));
    }
    let mut q = Matrix::zeros(n, n);
    for x in 0..n {
        let j = x + 1;
        if j < i_target {
            let rate = (i_target - j) as f64 * cfg.mu_pro;
            q[(x, x + 1)] = rate;
            q[(x, x)] = -rate;
        } else if j > i_target {
            let rate = (j - i_target) as f64 * cfg.mu_dep;
            q[(x, x - 1)] = rate;
            q[(x, x)] = -rate;
        }
    }
    Ok(RateMatrix { target: i_target, q })
}

/// Uniformized DTMC `I + Q/Λ`.
fn uniformized(q: &Matrix, lambda: f64) -> Matrix {
    let n = q.rows();
    let mut p = Matrix::identity(n);
    for r in 0..n {
        for c in 0..n {
            p[(r, c)] += q[(r, c)] / lambda;
        }
    }
    p
}

/// Poisson(`a`) weights up to a right truncation point whose tail mass is far
/// below 1e-12. Requires `a ≤ DIRECT_UNIFORMIZATION_LIMIT` so `e^{-a}` does
/// not underflow.
fn poisson_weights(a: f64) -> Vec<f64> {
    let last = libm::ceil(a + 10.0 * libm::sqrt(a) + 20.0) as usize;
    let mut w = Vec::with_capacity(last + 1);
    let mut term = libm::exp(-a);
    w.push(term);
    for k in 1..=last {
        term *= a / k as f64;
        w.push(term);
    }
    w
}

fn normalize_rows(m: &mut Matrix) {
    for r in 0..m.rows() {
        let row = m.row_mut(r);
        for x in row.iter_mut() {
            if *x < 0.0 {
                *x = 0.0;
            }
        }
        let s: f64 = row.iter().sum();
        if s > 0.0 {
            row.iter_mut().for_each(|x| *x /= s);
        }
    }
}

/// `e^{Qt}` for a generator `Q` by uniformization.
pub fn transient_matrix(q: &RateMatrix, t: f64) -> Matrix {
    let n = q.n_max();
    let lambda = q.max_exit_rate();
    if t <= 0.0 || lambda == 0.0 {
        return Matrix::identity(n);
    }
    let a = lambda * t;
    let (steps_log2, tau) = if a <= DIRECT_UNIFORMIZATION_LIMIT {
        (0u32, t)
    } else {
        let s = libm::ceil(libm::log2(a / DIRECT_UNIFORMIZATION_LIMIT)) as u32;
        (s, t / libm::pow(2.0, f64::from(s)))
    };
    let p = uniformized(&q.q, lambda);
    let weights = poisson_weights(lambda * tau);
    let mut power = Matrix::identity(n);
    let mut out = Matrix::zeros(n, n);
    for (k, &w) in weights.iter().enumerate() {
        if k > 0 {
            power = power.mul(&p);
        }
        for r in 0..n {
            for (dst, v) in out.row_mut(r).iter_mut().zip(power.row(r)) {
                *dst += w * v;
            }
        }
    }
    normalize_rows(&mut out);
    for _ in 0..steps_log2 {
        out = out.mul(&out);
        normalize_rows(&mut out);
    }
    out
}

/// Distribution over ready counts after `t` seconds starting from `j_start`
/// ready replicas: row `j_start` of `e^{Qt}`. Index `k` is `k + 1` replicas.
pub fn transient_distribution(q: &RateMatrix, j_start: usize, t: f64) -> Result<Vec<f64>> {
    let n = q.n_max();
    if j_start < 1 || j_start > n {
        return Err(invalid("j_start", alloc::format!("{j_start} outside [1, {n}]")));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(invalid("t", alloc::format!("must be finite and non-negative, got {t}")));
    }
    let lambda = q.max_exit_rate();
    if t == 0.0 || lambda == 0.0 || lambda * t > DIRECT_UNIFORMIZATION_LIMIT {
        return Ok(transient_matrix(q, t).row(j_start - 1).to_vec());
    }
    // Vector form: Σ_k w_k e_jᵀ Pᵏ.
    let p = uniformized(&q.q, lambda);
    let mut v = vec![0.0; n];
    v[j_start - 1] = 1.0;
    let mut out = vec![0.0; n];
    for (k, &w) in poisson_weights(lambda * t).iter().enumerate() {
        if k > 0 {
            v = p.left_mul(&v);
        }
        for (o, x) in out.iter_mut().zip(&v) {
            *o += w * x;
        }
    }
    let s: f64 = out.iter().sum();
    out.iter_mut().for_each(|x| *x /= s);
    Ok(out)
}

fn truncate_row(row: &mut [f64]) {
    for x in row.iter_mut() {
        if *x < TRUNCATION {
            *x = 0.0;
        }
    }
    let s: f64 = row.iter().sum();
    row.iter_mut().for_each(|x| *x /= s);
}

/// `V_i[j, j'] = Pr{j' ready after T_eva | j ready, order i}`.
pub fn vertical_transition_probs(i: usize, cfg: &AutoscalerConfig) -> Result<Matrix> {
    let q = build_rate_matrix(i, cfg)?;
    let mut v = transient_matrix(&q, cfg.t_eva_s);
    for r in 0..v.rows() {
        truncate_row(v.row_mut(r));
    }
    Ok(v)
}

/// `H_j[i'] = Pr{next order i' | j ready}`; independent of the current order.
pub fn horizontal_transition_probs(
    j: usize,
    lambda: f64,
    mm: &MetricModel,
    cfg: &AutoscalerConfig,
) -> Result<OrderDistribution> {
    if j < 1 || j > cfg.n_max {
        return Err(invalid("j", alloc::format!("{j} outside [1, {}]", cfg.n_max)));
    }
    check_arrival_rate(lambda)?;
    let dist = mm.observed_value_distribution(lambda / j as f64);
    let mut order = order_probabilities(&dist, cfg.target_value, cfg.n_max)?;
    truncate_row(&mut order.probs);
    Ok(order)
}

/// The assembled cluster DTMC together with its factors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterChain {
    pub n_max: usize,
    /// `horizontal[j - 1]` is `H_j`.
    pub horizontal: Vec<OrderDistribution>,
    /// `vertical[i - 1]` is `V_i`.
    pub vertical: Vec<Matrix>,
    /// Row-stochastic `N_max² × N_max²` transition matrix.
    pub p: Matrix,
}

impl ClusterChain {
    /// Index of state `(i, j)`, both 1-based.
    pub fn state_index(&self, i: usize, j: usize) -> usize {
        state_index(self.n_max, i, j)
    }

    /// `(i, j)` of a state index.
    pub fn state(&self, s: usize) -> (usize, usize) {
        (s / self.n_max + 1, s % self.n_max + 1)
    }

    pub fn num_states(&self) -> usize {
        self.n_max * self.n_max
    }

    /// Assembles `P` from explicit factors.
    pub fn from_factors(horizontal: Vec<OrderDistribution>, vertical: Vec<Matrix>) -> Self {
        let n = horizontal.len();
        assert_eq!(vertical.len(), n);
        let m = n * n;
        let mut p = Matrix::zeros(m, m);
        for i in 1..=n {
            let v = &vertical[i - 1];
            for j in 1..=n {
                let h = &horizontal[j - 1].probs;
                let row = p.row_mut(state_index(n, i, j));
                for (ip, &hp) in h.iter().enumerate() {
                    if hp == 0.0 {
                        continue;
                    }
                    for (jp, &vp) in v.row(j - 1).iter().enumerate() {
                        row[ip * n + jp] = hp * vp;
                    }
                }
            }
        }
        Self {
            n_max: n,
            horizontal,
            vertical,
            p,
        }
    }
}

pub fn state_index(n_max: usize, i: usize, j: usize) -> usize {
    (i - 1) * n_max + (j - 1)
}

/// Builds the cluster chain for arrival rate `lambda`. Each of the `N_max`
/// horizontal vectors and vertical matrices is computed once.
pub fn build_chain(lambda: f64, mm: &MetricModel, cfg: &AutoscalerConfig) -> Result<ClusterChain> {
    cfg.validate()?;
    check_arrival_rate(lambda)?;
    let n = cfg.n_max;
    let horizontal = (1..=n)
        .map(|j| horizontal_transition_probs(j, lambda, mm, cfg))
        .collect::<Result<Vec<_>>>()?;
    let vertical = (1..=n)
        .map(|i| vertical_transition_probs(i, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(ClusterChain::from_factors(horizontal, vertical))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    Direct,
    PowerIteration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryDistribution {
    pub pi: Vec<f64>,
    /// `marginal_ready[j - 1] = Σ_i π(i, j)`.
    pub marginal_ready: Vec<f64>,
    /// `marginal_ordered[i - 1] = Σ_j π(i, j)`.
    pub marginal_ordered: Vec<f64>,
    /// `‖πᵀP − πᵀ‖∞`.
    pub residual: f64,
    /// States outside the single recurrent class; they carry zero mass.
    pub transient_states: usize,
    pub method: SolveMethod,
}

impl StationaryDistribution {
    pub fn avg_ready(&self) -> f64 {
        self.marginal_ready
            .iter()
            .enumerate()
            .map(|(k, p)| (k + 1) as f64 * p)
            .sum()
    }
}

/// Limiting distribution of the cluster chain.
pub fn stationary_distribution(chain: &ClusterChain) -> Result<StationaryDistribution> {
    let n = chain.n_max;
    let solved = solve_stationary(&chain.p).map_err(|e| match e {
        StationaryError::NonErgodic(classes) => Error::NonErgodic {
            classes: classes
                .into_iter()
                .map(|c| c.into_iter().map(|s| chain.state(s)).collect())
                .collect(),
        },
        StationaryError::Numerical(msg) => Error::Numerical(msg.into()),
    })?;
    let mut marginal_ready = vec![0.0; n];
    let mut marginal_ordered = vec![0.0; n];
    for (s, &p) in solved.pi.iter().enumerate() {
        let (i, j) = chain.state(s);
        marginal_ready[j - 1] += p;
        marginal_ordered[i - 1] += p;
    }
    Ok(StationaryDistribution {
        pi: solved.pi,
        marginal_ready,
        marginal_ordered,
        residual: solved.residual,
        transient_states: solved.transient_states,
        method: solved.method,
    })
}

/// Stationary solution of an arbitrary row-stochastic matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct StationarySolution {
    pub pi: Vec<f64>,
    pub residual: f64,
    pub transient_states: usize,
    pub method: SolveMethod,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StationaryError {
    /// More than one closed communicating class; holds the state indices of each.
    NonErgodic(Vec<Vec<usize>>),
    Numerical(&'static str),
}

/// Solves `πᵀP = πᵀ`, `Σπ = 1`.
///
/// Small chains use the dense system `(P − I)ᵀ` with one equation replaced by
/// the normalization; larger chains (or a numerically singular system) use
/// power iteration on the lazy chain `(P + I)/2`, which has the same
/// stationary vector and is aperiodic.
pub fn solve_stationary(p: &Matrix) -> core::result::Result<StationarySolution, StationaryError> {
    let m = p.rows();
    assert_eq!(m, p.cols());
    let classes = closed_classes(p);
    if classes.len() != 1 {
        return Err(StationaryError::NonErgodic(classes));
    }
    let transient_states = m - classes[0].len();

    let direct = if m <= DIRECT_SOLVE_MAX_STATES {
        solve_direct(p)
    } else {
        None
    };
    let (mut pi, method) = match direct {
        Some(pi) => (pi, SolveMethod::Direct),
        None => (power_iteration(p, &classes[0])?, SolveMethod::PowerIteration),
    };
    for x in pi.iter_mut() {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
    let total: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|x| *x /= total);
    let residual = stationary_residual(p, &pi);
    Ok(StationarySolution {
        pi,
        residual,
        transient_states,
        method,
    })
}

/// `‖πᵀP − πᵀ‖∞`.
pub fn stationary_residual(p: &Matrix, pi: &[f64]) -> f64 {
    p.left_mul(pi)
        .iter()
        .zip(pi)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

fn solve_direct(p: &Matrix) -> Option<Vec<f64>> {
    let m = p.rows();
    let mut a = p.transpose();
    for d in 0..m {
        a[(d, d)] -= 1.0;
    }
    a.row_mut(m - 1).iter_mut().for_each(|x| *x = 1.0);
    let mut b = vec![0.0; m];
    b[m - 1] = 1.0;
    linalg::solve(&a, &b, 1e-13)
}

fn power_iteration(p: &Matrix, recurrent: &[usize]) -> core::result::Result<Vec<f64>, StationaryError> {
    const MAX_ITERS: usize = 2_000_000;
    const TOL: f64 = 1e-14;
    let m = p.rows();
    // Sparse rows of the lazy chain.
    let rows: Vec<Vec<(usize, f64)>> = (0..m)
        .map(|r| {
            p.row(r)
                .iter()
                .enumerate()
                .filter(|(_, &x)| x != 0.0)
                .map(|(c, &x)| (c, 0.5 * x + if c == r { 0.5 } else { 0.0 }))
                .chain(if p[(r, r)] == 0.0 { Some((r, 0.5)) } else { None })
                .collect()
        })
        .collect();
    let mut pi = vec![0.0; m];
    for &s in recurrent {
        pi[s] = 1.0 / recurrent.len() as f64;
    }
    let mut next = vec![0.0; m];
    for _ in 0..MAX_ITERS {
        next.iter_mut().for_each(|x| *x = 0.0);
        for (r, row) in rows.iter().enumerate() {
            let w = pi[r];
            if w == 0.0 {
                continue;
            }
            for &(c, x) in row {
                next[c] += w * x;
            }
        }
        let delta = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        core::mem::swap(&mut pi, &mut next);
        if delta < TOL {
            return Ok(pi);
        }
    }
    Err(StationaryError::Numerical("power iteration did not converge"))
}

/// Closed communicating classes of the graph with an edge wherever `P > 0`,
/// each sorted by state index.
pub fn closed_classes(p: &Matrix) -> Vec<Vec<usize>> {
    let m = p.rows();
    let adj: Vec<Vec<usize>> = (0..m).map(|r| (0..m).filter(|&c| p[(r, c)] > 0.0).collect()).collect();
    let comp = strongly_connected(&adj);
    let count = comp.iter().copied().max().map_or(0, |c| c + 1);
    let mut closed = vec![true; count];
    for (r, edges) in adj.iter().enumerate() {
        if edges.iter().any(|&c| comp[c] != comp[r]) {
            closed[comp[r]] = false;
        }
    }
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; count];
    for (s, &c) in comp.iter().enumerate() {
        if closed[c] {
            if slot[c] == usize::MAX {
                slot[c] = classes.len();
                classes.push(Vec::new());
            }
            classes[slot[c]].push(s);
        }
    }
    classes
}

/// Iterative Tarjan; returns the component id of every vertex.
fn strongly_connected(adj: &[Vec<usize>]) -> Vec<usize> {
    const UNVISITED: usize = usize::MAX;
    let n = adj.len();
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![UNVISITED; n];
    let mut stack = Vec::new();
    let mut next_index = 0;
    let mut next_comp = 0;
    let mut call: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        call.push((root, 0));
        while let Some(&mut (v, ref mut edge)) = call.last_mut() {
            if *edge == 0 && index[v] == UNVISITED {
                index[v] = next_index;
                low[v] = next_index;
                next_index += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if let Some(&w) = adj[v].get(*edge) {
                *edge += 1;
                if index[w] == UNVISITED {
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                while let Some(w) = stack.pop() {
                    on_stack[w] = false;
                    comp[w] = next_comp;
                    if w == v {
                        break;
                    }
                }
                next_comp += 1;
            }
        }
    }
    comp
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::MetricKind;
    use crate::metric_model::GaussianDist;

    fn cfg(n_max: usize) -> AutoscalerConfig {
        AutoscalerConfig::new(MetricKind::Cc, 10.0, n_max)
    }

    #[test]
    fn rate_matrix_structure() {
        let q = build_rate_matrix(3, &cfg(3)).unwrap();
        assert_eq!(q.rate(1, 2), 2.0);
        assert_eq!(q.rate(2, 3), 1.0);
        assert_eq!(q.rate(3, 3), 0.0);
        let q = build_rate_matrix(1, &cfg(3)).unwrap();
        assert_eq!(q.rate(3, 2), 4.0);
        assert_eq!(q.rate(2, 1), 2.0);
        assert_eq!(q.rate(1, 1), 0.0);
        for target in 1..=5 {
            let q = build_rate_matrix(target, &cfg(5)).unwrap();
            for x in 0..5 {
                let row = q.q.row(x);
                assert!(row.iter().sum::<f64>().abs() < 1e-12);
                for (y, v) in row.iter().enumerate() {
                    if y != x {
                        assert!(*v >= 0.0);
                    }
                    if x.abs_diff(y) > 1 {
                        assert_eq!(*v, 0.0);
                    }
                }
            }
            assert!(q.q.row(target - 1).iter().all(|&v| v == 0.0));
        }
        assert!(build_rate_matrix(0, &cfg(3)).is_err());
        assert!(build_rate_matrix(4, &cfg(3)).is_err());
    }

    #[test]
    fn transient_at_zero_is_identity() {
        let q = build_rate_matrix(4, &cfg(6)).unwrap();
        let v = transient_distribution(&q, 2, 0.0).unwrap();
        assert_eq!(v, vec![0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn two_state_closed_form() {
        let q = build_rate_matrix(2, &cfg(2)).unwrap();
        let v = transient_distribution(&q, 1, 2.0).unwrap();
        let e = libm::exp(-2.0);
        assert!((v[0] - e).abs() < 1e-12);
        assert!((v[1] - (1.0 - e)).abs() < 1e-12);
        let m = transient_matrix(&q, 2.0);
        assert!((m[(0, 0)] - e).abs() < 1e-12);
    }

    #[test]
    fn long_horizon_absorbs() {
        let c = cfg(6);
        for i in 1..=6 {
            let q = build_rate_matrix(i, &c).unwrap();
            for j in 1..=6 {
                let v = transient_distribution(&q, j, 1e6).unwrap();
                assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-10);
                assert!((v[i - 1] - 1.0).abs() < 1e-10, "i={i} j={j} {v:?}");
            }
        }
    }

    #[test]
    fn vertical_rows() {
        let c = cfg(4);
        for i in 1..=4 {
            let v = vertical_transition_probs(i, &c).unwrap();
            let row = v.row(i - 1);
            for (k, x) in row.iter().enumerate() {
                assert_eq!(*x, if k == i - 1 { 1.0 } else { 0.0 });
            }
        }
        let c2 = AutoscalerConfig { n_max: 2, ..c };
        let v = vertical_transition_probs(2, &c2).unwrap();
        assert!((v[(0, 0)] - 0.135_335_283_236_612_7).abs() < 1e-12);
        assert!((v[(0, 1)] - 0.864_664_716_763_387_3).abs() < 1e-12);
    }

    fn point_mass_model(slope: f64) -> MetricModel {
        MetricModel {
            metric_kind: MetricKind::Cc,
            mean_coeffs: [slope, 0.0],
            std_coeffs: [0.0, 0.0],
            fit_mse: 0.0,
            fit_r2: 1.0,
            rho_max: 100.0,
        }
    }

    #[test]
    fn horizontal_point_masses() {
        let c = cfg(5);
        // mean = 0.5·λ/j; λ = 30, j = 1 → 15 = 1.5·TV → order 2.
        let h = horizontal_transition_probs(1, 30.0, &point_mass_model(0.5), &c).unwrap();
        assert_eq!(h.probs, vec![0.0, 1.0, 0.0, 0.0, 0.0]);
        let h = horizontal_transition_probs(3, 1e-9, &point_mass_model(0.5), &c).unwrap();
        assert_eq!(h.probs[0], 1.0);
    }

    #[test]
    fn single_replica_chain() {
        let chain = build_chain(5.0, &point_mass_model(0.2), &cfg(1)).unwrap();
        assert_eq!(chain.p.as_slice(), &[1.0]);
        let pi = stationary_distribution(&chain).unwrap();
        assert_eq!(pi.pi, vec![1.0]);
        assert_eq!(pi.avg_ready(), 1.0);
    }

    #[test]
    fn two_by_two_chain_by_hand() {
        let c = AutoscalerConfig { n_max: 2, ..cfg(2) };
        let mm = MetricModel {
            std_coeffs: [4.0, 0.0],
            ..point_mass_model(1.0)
        };
        let lambda = 12.0;
        let chain = build_chain(lambda, &mm, &c).unwrap();

        let h1 = GaussianDist::new(12.0, 4.0).cdf(10.0);
        let h2 = GaussianDist::new(6.0, 4.0).cdf(10.0);
        let e2 = libm::exp(-2.0);
        let e4 = libm::exp(-4.0);
        // Order 1: from 2 ready, one replica drains at μ_dep = 2 over 2 s.
        let v1 = [[1.0, 0.0], [1.0 - e4, e4]];
        // Order 2: from 1 ready, one replica provisions at μ_pro = 1 over 2 s.
        let v2 = [[e2, 1.0 - e2], [0.0, 1.0]];
        let h = [[h1, 1.0 - h1], [h2, 1.0 - h2]];
        let v = [v1, v2];
        for i in 1..=2 {
            for j in 1..=2 {
                for ip in 1..=2 {
                    for jp in 1..=2 {
                        let want = h[j - 1][ip - 1] * v[i - 1][j - 1][jp - 1];
                        let got = chain.p[(chain.state_index(i, j), chain.state_index(ip, jp))];
                        assert!((got - want).abs() < 1e-12, "({i},{j})->({ip},{jp}) {got} vs {want}");
                    }
                }
            }
        }
    }

    #[test]
    fn symmetric_two_state() {
        let p = Matrix::from_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]);
        let s = solve_stationary(&p).unwrap();
        assert!((s.pi[0] - 0.5).abs() < 1e-15 && (s.pi[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn periodic_chain_solved() {
        let p = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let s = solve_stationary(&p).unwrap();
        assert!((s.pi[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn transient_states_reported() {
        let p = Matrix::from_rows(&[vec![0.5, 0.5, 0.0], vec![0.0, 0.2, 0.8], vec![0.0, 0.6, 0.4]]);
        let s = solve_stationary(&p).unwrap();
        assert_eq!(s.transient_states, 1);
        assert_eq!(s.pi[0], 0.0);
        assert!(s.residual < 1e-14);
    }

    #[test]
    fn two_closed_classes_is_an_error() {
        let p = Matrix::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.3, 0.4, 0.3], vec![0.0, 0.0, 1.0]]);
        match solve_stationary(&p) {
            Err(StationaryError::NonErgodic(classes)) => assert_eq!(classes, vec![vec![0], vec![2]]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn non_ergodic_cluster_chain_names_states() {
        // Deterministic orders with two fixed points: j = 1 orders 1, j = 2 orders 2.
        let mut h1 = vec![0.0; 2];
        h1[0] = 1.0;
        let mut h2 = vec![0.0; 2];
        h2[1] = 1.0;
        let c = AutoscalerConfig { n_max: 2, ..cfg(2) };
        let chain = ClusterChain::from_factors(
            vec![OrderDistribution { probs: h1 }, OrderDistribution { probs: h2 }],
            vec![
                vertical_transition_probs(1, &c).unwrap(),
                vertical_transition_probs(2, &c).unwrap(),
            ],
        );
        match stationary_distribution(&chain) {
            Err(Error::NonErgodic { classes }) => {
                assert_eq!(classes, vec![vec![(1, 1)], vec![(2, 2)]]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn power_iteration_path_matches_direct() {
        let p = Matrix::from_rows(&[
            vec![0.1, 0.6, 0.3, 0.0],
            vec![0.0, 0.2, 0.3, 0.5],
            vec![0.4, 0.0, 0.0, 0.6],
            vec![0.25, 0.25, 0.25, 0.25],
        ]);
        let direct = solve_direct(&p).unwrap();
        let power = power_iteration(&p, &[0, 1, 2, 3]).unwrap();
        for (a, b) in direct.iter().zip(&power) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
