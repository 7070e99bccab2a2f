//! Exact optimal transport and dense reference implementations.
//!
//! [`exact_ot`] solves the transportation LP with a primal network simplex on
//! the complete bipartite graph and returns dual potentials, so every answer
//! can be certified without trusting the solver. The `dense_*` functions mirror
//! the factored routines step for step and exist to cross-check them.

use ndarray::{Array1, Array2};

use crate::geometry::{pairwise_sq_distances, PointCloud};
use crate::simplex::SimplexVector;
use crate::sinkhorn::{smooth_marginals, SinkhornConfig, SinkhornResult};
use crate::{check_len, Error, Result};

/// Default largest `n` accepted by [`exact_ot`].
pub const EXACT_CAP: usize = 256;
/// Marginal entries below this are removed before solving.
pub const ZERO_MASS: f64 = 1e-15;
/// Consecutive degenerate pivots before pricing switches to Bland's rule.
const DEGENERATE_STREAK: usize = 32;

#[derive(Debug, Clone)]
pub struct DenseTransportPlan {
    pub plan: Array2<f64>,
    pub cost: f64,
    /// Row potentials `f`.
    pub dual_row: Array1<f64>,
    /// Column potentials `g`; `fᵢ + gⱼ ≤ Cᵢⱼ` with equality on the support.
    pub dual_col: Array1<f64>,
}

/// Violations measured by [`certify`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certificate {
    /// ℓ1 distance of the plan's marginals from `(p, q)`, plus any negative mass.
    pub primal_residual: f64,
    /// `max(fᵢ + gⱼ - Cᵢⱼ, 0)` over all cells.
    pub dual_violation: f64,
    /// `max |fᵢ + gⱼ - Cᵢⱼ|` over cells carrying more than `1e-12` mass.
    pub slackness_violation: f64,
    /// `|Σfᵢpᵢ + Σgⱼqⱼ - cost|`.
    pub duality_gap: f64,
}

impl Certificate {
    /// Primal feasibility to 1e-10, dual feasibility and slackness to 1e-9,
    /// gap to `1e-9·(1 + |cost|)`.
    pub fn holds(&self, cost: f64) -> bool {
        self.primal_residual <= 1e-10
            && self.dual_violation <= 1e-9
            && self.slackness_violation <= 1e-9
            && self.duality_gap <= 1e-9 * (1.0 + cost.abs())
    }
}

pub fn exact_ot(cost: &Array2<f64>, p: &SimplexVector, q: &SimplexVector) -> Result<DenseTransportPlan> {
    exact_ot_with_cap(cost, p, q, EXACT_CAP)
}

pub fn exact_ot_with_cap(
    cost: &Array2<f64>,
    p: &SimplexVector,
    q: &SimplexVector,
    cap: usize,
) -> Result<DenseTransportPlan> {
    let n = p.len();
    check_len(n, q.len())?;
    if cost.dim() != (n, n) {
        return Err(Error::InvalidInput(format!(
            "cost matrix is {:?}, expected ({n}, {n})",
            cost.dim()
        )));
    }
    if n > cap {
        return Err(Error::Capacity(format!(
            "exact solver accepts n <= {cap}, got {n}"
        )));
    }
    if cost.iter().any(|c| !c.is_finite() || *c < 0.0) {
        return Err(Error::InvalidInput("cost matrix must be finite and nonnegative".into()));
    }

    let rows: Vec<usize> = (0..n).filter(|&i| p.as_slice()[i] >= ZERO_MASS).collect();
    let cols: Vec<usize> = (0..n).filter(|&j| q.as_slice()[j] >= ZERO_MASS).collect();
    let supply: Vec<f64> = rows.iter().map(|&i| p.as_slice()[i]).collect();
    let demand: Vec<f64> = cols.iter().map(|&j| q.as_slice()[j]).collect();
    let sub = Array2::from_shape_fn((rows.len(), cols.len()), |(a, b)| cost[[rows[a], cols[b]]]);

    let solved = TransportSimplex::new(&sub, &supply, &demand).solve()?;

    let mut plan = Array2::zeros((n, n));
    for (&(a, b), &flow) in solved.cells.iter().zip(&solved.flow) {
        plan[[rows[a], cols[b]]] = flow.max(0.0);
    }

    // Potentials for dropped rows and columns are the tightest feasible ones;
    // they carry zero mass so the dual objective is unchanged.
    let mut f = Array1::from_elem(n, f64::NAN);
    let mut g = Array1::from_elem(n, f64::NAN);
    for (a, &i) in rows.iter().enumerate() {
        f[i] = solved.row_potential[a];
    }
    for (b, &j) in cols.iter().enumerate() {
        g[j] = solved.col_potential[b];
    }
    for j in 0..n {
        if !g[j].is_nan() {
            continue;
        }
        g[j] = rows
            .iter()
            .map(|&i| cost[[i, j]] - f[i])
            .fold(f64::INFINITY, f64::min);
    }
    for i in 0..n {
        if !f[i].is_nan() {
            continue;
        }
        f[i] = (0..n).map(|j| cost[[i, j]] - g[j]).fold(f64::INFINITY, f64::min);
    }

    let total = (&plan * cost).sum();
    Ok(DenseTransportPlan {
        plan,
        cost: total,
        dual_row: f,
        dual_col: g,
    })
}

/// Checks an exact plan against LP optimality conditions.
pub fn certify(
    sol: &DenseTransportPlan,
    cost: &Array2<f64>,
    p: &SimplexVector,
    q: &SimplexVector,
) -> Certificate {
    let n = p.len();
    let row_sums = sol.plan.sum_axis(ndarray::Axis(1));
    let col_sums = sol.plan.sum_axis(ndarray::Axis(0));
    let negative: f64 = sol.plan.iter().filter(|v| **v < 0.0).map(|v| -v).sum();
    let primal_residual = crate::simplex::l1_distance(row_sums.as_slice().unwrap(), p.as_slice())
        + crate::simplex::l1_distance(col_sums.as_slice().unwrap(), q.as_slice())
        + negative;
    let mut dual_violation: f64 = 0.0;
    let mut slackness_violation: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let slack = sol.dual_row[i] + sol.dual_col[j] - cost[[i, j]];
            dual_violation = dual_violation.max(slack);
            if sol.plan[[i, j]] > 1e-12 {
                slackness_violation = slackness_violation.max(slack.abs());
            }
        }
    }
    let dual_value: f64 = sol.dual_row.iter().zip(p.as_slice()).map(|(f, w)| f * w).sum::<f64>()
        + sol.dual_col.iter().zip(q.as_slice()).map(|(g, w)| g * w).sum::<f64>();
    Certificate {
        primal_residual,
        dual_violation,
        slackness_violation,
        duality_gap: (dual_value - sol.cost).abs(),
    }
}

struct Solved {
    cells: Vec<(usize, usize)>,
    flow: Vec<f64>,
    row_potential: Vec<f64>,
    col_potential: Vec<f64>,
}

/// Primal simplex on a spanning-tree basis of the `m × k` transportation graph.
/// Nodes `0..m` are rows, `m..m+k` columns.
struct TransportSimplex<'a> {
    cost: &'a Array2<f64>,
    m: usize,
    k: usize,
    cells: Vec<(usize, usize)>,
    flow: Vec<f64>,
    basic: Array2<bool>,
    adjacency: Vec<Vec<usize>>,
    u: Vec<f64>,
    v: Vec<f64>,
}

impl<'a> TransportSimplex<'a> {
    /// Northwest-corner start: a path of `m + k - 1` basic cells.
    fn new(cost: &'a Array2<f64>, supply: &[f64], demand: &[f64]) -> Self {
        let (m, k) = (supply.len(), demand.len());
        let mut s = supply.to_vec();
        let mut d = demand.to_vec();
        let mut cells = Vec::with_capacity(m + k - 1);
        let mut flow = Vec::with_capacity(m + k - 1);
        let (mut i, mut j) = (0, 0);
        loop {
            let amount = s[i].min(d[j]).max(0.0);
            cells.push((i, j));
            flow.push(amount);
            s[i] -= amount;
            d[j] -= amount;
            if i + 1 == m && j + 1 == k {
                break;
            }
            if j + 1 == k || (i + 1 < m && s[i] <= d[j]) {
                i += 1;
            } else {
                j += 1;
            }
        }
        let mut basic = Array2::from_elem((m, k), false);
        let mut adjacency = vec![Vec::new(); m + k];
        for (id, &(a, b)) in cells.iter().enumerate() {
            basic[[a, b]] = true;
            adjacency[a].push(id);
            adjacency[m + b].push(id);
        }
        Self {
            cost,
            m,
            k,
            cells,
            flow,
            basic,
            adjacency,
            u: vec![0.0; m],
            v: vec![0.0; k],
        }
    }

    fn solve(mut self) -> Result<Solved> {
        let cmax = self.cost.iter().fold(0.0f64, |a, &b| a.max(b));
        let tol = 1e-12 * (1.0 + cmax);
        let max_pivots = 50 * self.m * self.k + 1000;
        let mut degenerate_run = 0;
        let mut parent = vec![usize::MAX; self.m + self.k];
        let mut stack = Vec::new();

        for _ in 0..max_pivots {
            self.potentials(&mut stack);
            let entering = if degenerate_run >= DEGENERATE_STREAK {
                self.price_bland(tol)
            } else {
                self.price_dantzig(tol)
            };
            let Some((ei, ej)) = entering else {
                return Ok(Solved {
                    cells: self.cells,
                    flow: self.flow,
                    row_potential: self.u,
                    col_potential: self.v,
                });
            };

            // Tree path from column node back to the row node of the entering cell.
            self.tree_parents(ei, &mut parent, &mut stack);
            let mut path = Vec::new();
            let mut node = self.m + ej;
            while node != ei {
                let id = parent[node];
                path.push(id);
                let (a, b) = self.cells[id];
                node = if node == a { self.m + b } else { a };
            }
            // Cells at even positions lose flow, odd positions gain.
            let mut theta = f64::INFINITY;
            let mut leaving = usize::MAX;
            for &id in path.iter().step_by(2) {
                let f = self.flow[id];
                let better = f < theta
                    || (f == theta && self.cell_order(id) < self.cell_order(leaving));
                if better {
                    theta = f;
                    leaving = id;
                }
            }
            let theta = theta.max(0.0);
            for (pos, &id) in path.iter().enumerate() {
                if pos % 2 == 0 {
                    self.flow[id] -= theta;
                } else {
                    self.flow[id] += theta;
                }
            }
            degenerate_run = if theta <= 0.0 { degenerate_run + 1 } else { 0 };

            let (la, lb) = self.cells[leaving];
            self.basic[[la, lb]] = false;
            self.adjacency[la].retain(|&x| x != leaving);
            self.adjacency[self.m + lb].retain(|&x| x != leaving);
            self.cells[leaving] = (ei, ej);
            self.flow[leaving] = theta;
            self.basic[[ei, ej]] = true;
            self.adjacency[ei].push(leaving);
            self.adjacency[self.m + ej].push(leaving);
        }
        Err(Error::Inconsistent(format!(
            "network simplex exceeded {max_pivots} pivots"
        )))
    }

    fn cell_order(&self, id: usize) -> usize {
        match self.cells.get(id) {
            Some(&(a, b)) => a * self.k + b,
            None => usize::MAX,
        }
    }

    /// Solves `uᵢ + vⱼ = Cᵢⱼ` on the basis tree with `u₀ = 0`.
    fn potentials(&mut self, stack: &mut Vec<usize>) {
        let total = self.m + self.k;
        let mut seen = vec![false; total];
        let mut pot = vec![0.0; total];
        stack.clear();
        stack.push(0);
        seen[0] = true;
        while let Some(node) = stack.pop() {
            for &id in &self.adjacency[node] {
                let (a, b) = self.cells[id];
                let c = self.cost[[a, b]];
                let other = if node == a { self.m + b } else { a };
                if !seen[other] {
                    seen[other] = true;
                    pot[other] = c - pot[node];
                    stack.push(other);
                }
            }
        }
        self.u.copy_from_slice(&pot[..self.m]);
        self.v.copy_from_slice(&pot[self.m..]);
    }

    fn tree_parents(&self, root: usize, parent: &mut [usize], stack: &mut Vec<usize>) {
        parent.fill(usize::MAX);
        stack.clear();
        stack.push(root);
        let mut seen = vec![false; parent.len()];
        seen[root] = true;
        while let Some(node) = stack.pop() {
            for &id in &self.adjacency[node] {
                let (a, b) = self.cells[id];
                let other = if node == a { self.m + b } else { a };
                if !seen[other] {
                    seen[other] = true;
                    parent[other] = id;
                    stack.push(other);
                }
            }
        }
    }

    fn reduced_cost(&self, i: usize, j: usize) -> f64 {
        self.cost[[i, j]] - self.u[i] - self.v[j]
    }

    fn price_dantzig(&self, tol: f64) -> Option<(usize, usize)> {
        let mut best = -tol;
        let mut choice = None;
        for i in 0..self.m {
            for j in 0..self.k {
                if self.basic[[i, j]] {
                    continue;
                }
                let rc = self.reduced_cost(i, j);
                if rc < best {
                    best = rc;
                    choice = Some((i, j));
                }
            }
        }
        choice
    }

    fn price_bland(&self, tol: f64) -> Option<(usize, usize)> {
        (0..self.m)
            .flat_map(|i| (0..self.k).map(move |j| (i, j)))
            .find(|&(i, j)| !self.basic[[i, j]] && self.reduced_cost(i, j) < -tol)
    }
}

/// Dense Gaussian kernel `exp(-‖xᵢ - xⱼ‖²/(2σ²))`.
pub fn gaussian_kernel_matrix(cloud: &PointCloud, sigma: f64) -> Array2<f64> {
    let inv = 1.0 / (2.0 * sigma * sigma);
    pairwise_sq_distances(cloud).mapv(|c| (-c * inv).exp())
}

/// Dense Sinkhorn with the same update schedule as
/// [`crate::sinkhorn::sinkhorn_scale`].
pub fn dense_sinkhorn(
    kernel: &Array2<f64>,
    p: &SimplexVector,
    q: &SimplexVector,
    cfg: &SinkhornConfig,
) -> Result<SinkhornResult> {
    let n = p.len();
    check_len(n, q.len())?;
    if kernel.dim() != (n, n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: kernel.nrows(),
        });
    }
    if n > EXACT_CAP.max(crate::factored::DENSE_CAP) {
        return Err(Error::Capacity(format!("dense Sinkhorn refused for n = {n}")));
    }
    let (ps, qs) = smooth_marginals(p, q, cfg.tau())?;
    let (ps, qs) = (Array1::from(ps.into_inner()), Array1::from(qs.into_inner()));
    let error = |scale: &Array1<f64>, sums: &Array1<f64>, target: &Array1<f64>| -> f64 {
        (scale * sums - target).mapv(f64::abs).sum()
    };
    let mut left = Array1::ones(n);
    let mut right = Array1::ones(n);
    let mut col_kernel = kernel.t().dot(&left);
    let mut col_error = error(&right, &col_kernel, &qs);
    let mut iterations = 0;
    let mut history = Vec::new();
    let (converged, smoothed_error) = loop {
        let row_kernel = kernel.dot(&right);
        let err = error(&left, &row_kernel, &ps) + col_error;
        history.push(err);
        if iterations > 0 && err <= cfg.delta / 2.0 {
            break (true, err);
        }
        if iterations > 0 && iterations + 2 > cfg.max_iterations {
            break (false, err);
        }
        iterations += 1;
        left = divide_checked(&ps, &row_kernel, "row sum")?;
        iterations += 1;
        col_kernel = kernel.t().dot(&left);
        right = divide_checked(&qs, &col_kernel, "column sum")?;
        col_error = error(&right, &col_kernel, &qs);
    };
    let scaled = dense_scale(kernel, &left, &right);
    let marginal_error = crate::simplex::l1_distance(
        scaled.sum_axis(ndarray::Axis(1)).as_slice().unwrap(),
        p.as_slice(),
    ) + crate::simplex::l1_distance(
        scaled.sum_axis(ndarray::Axis(0)).as_slice().unwrap(),
        q.as_slice(),
    );
    Ok(SinkhornResult {
        left_scale: left,
        right_scale: right,
        iterations,
        marginal_error,
        smoothed_error,
        converged,
        error_history: history,
    })
}

fn divide_checked(target: &Array1<f64>, sums: &Array1<f64>, what: &'static str) -> Result<Array1<f64>> {
    target
        .iter()
        .zip(sums)
        .enumerate()
        .map(|(index, (&t, &s))| {
            if s > 0.0 && s.is_finite() {
                Ok(t / s)
            } else {
                Err(Error::Underflow { what, index, value: s })
            }
        })
        .collect()
}

/// `diag(left)·K·diag(right)`.
pub fn dense_scale(kernel: &Array2<f64>, left: &Array1<f64>, right: &Array1<f64>) -> Array2<f64> {
    let mut out = kernel.clone();
    for ((i, j), v) in out.indexed_iter_mut() {
        *v *= left[i] * right[j];
    }
    out
}

/// Dense rounding onto `𝓜(p, q)`, step for step as the factored version.
pub fn dense_round(f: &Array2<f64>, p: &SimplexVector, q: &SimplexVector) -> Result<Array2<f64>> {
    let n = p.len();
    check_len(n, q.len())?;
    if f.dim() != (n, n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: f.nrows(),
        });
    }
    let shrink = |target: &[f64], sums: Array1<f64>| -> Array1<f64> {
        target
            .iter()
            .zip(&sums)
            .map(|(&t, &s)| if s > t { t / s } else { 1.0 })
            .collect()
    };
    let x = shrink(p.as_slice(), f.sum_axis(ndarray::Axis(1)));
    let f1 = dense_scale(f, &x, &Array1::ones(n));
    let y = shrink(q.as_slice(), f1.sum_axis(ndarray::Axis(0)));
    let mut g = dense_scale(&f1, &Array1::ones(n), &y);
    let err_r: Array1<f64> = (&Array1::from(p.as_slice().to_vec()) - &g.sum_axis(ndarray::Axis(1)))
        .mapv(|e| e.max(0.0));
    let err_c: Array1<f64> = (&Array1::from(q.as_slice().to_vec()) - &g.sum_axis(ndarray::Axis(0)))
        .mapv(|e| e.max(0.0));
    let (mass_r, mass_c) = (err_r.sum(), err_c.sum());
    if mass_r > 0.0 {
        let divisor = 0.5 * (mass_r + mass_c);
        let u = &err_r / divisor;
        for ((i, j), v) in g.indexed_iter_mut() {
            *v += u[i] * err_c[j];
        }
    }
    Ok(g)
}

/// Shannon entropy `Σ Pᵢⱼ ln(1/Pᵢⱼ)` with `0 ln 0 = 0`.
pub fn entropy(plan: &Array2<f64>) -> Result<f64> {
    if let Some(((i, j), v)) = plan.indexed_iter().find(|(_, v)| **v < 0.0 || !v.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "entry ({i}, {j}) is {v}, expected a finite nonnegative value"
        )));
    }
    Ok(plan.iter().filter(|v| **v > 0.0).map(|&v| -v * v.ln()).sum())
}

/// `⟨C, P⟩ - η⁻¹H(P)`.
pub fn regularized_objective(plan: &Array2<f64>, cost: &Array2<f64>, eta: f64) -> Result<f64> {
    if plan.dim() != cost.dim() {
        return Err(Error::DimensionMismatch {
            expected: cost.nrows(),
            got: plan.nrows(),
        });
    }
    if eta.is_nan() || eta <= 0.0 {
        return Err(Error::InvalidInput(format!("eta must be positive, got {eta}")));
    }
    let h = entropy(plan)?;
    Ok((plan * cost).sum() - h / eta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_simplex(rng: &mut ChaCha8Rng, n: usize) -> SimplexVector {
        SimplexVector::normalized((0..n).map(|_| -rng.random::<f64>().ln()).collect()).unwrap()
    }

    #[test]
    fn identical_marginals_cost_zero() {
        let c = array![[0.0, 1.0, 4.0], [1.0, 0.0, 1.0], [4.0, 1.0, 0.0]];
        let p = SimplexVector::new(vec![0.2, 0.5, 0.3]).unwrap();
        let sol = exact_ot(&c, &p, &p).unwrap();
        assert!(sol.cost.abs() < 1e-15);
        assert!(certify(&sol, &c, &p, &p).holds(sol.cost));
    }

    #[test]
    fn two_diracs() {
        let c = array![[0.0, 2.5], [2.5, 0.0]];
        let p = SimplexVector::dirac(2, 0).unwrap();
        let q = SimplexVector::dirac(2, 1).unwrap();
        let sol = exact_ot(&c, &p, &q).unwrap();
        assert_eq!(sol.cost, 2.5);
        assert_eq!(sol.plan, array![[0.0, 1.0], [0.0, 0.0]]);
        assert!(certify(&sol, &c, &p, &q).holds(sol.cost));
    }

    #[test]
    fn random_instances_are_certified() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for n in [1, 2, 6, 6, 6, 13, 40] {
            let c = Array2::from_shape_fn((n, n), |_| rng.random_range(0.0..1.0));
            let p = random_simplex(&mut rng, n);
            let q = random_simplex(&mut rng, n);
            let sol = exact_ot(&c, &p, &q).unwrap();
            let cert = certify(&sol, &c, &p, &q);
            assert!(cert.holds(sol.cost), "n={n}: {cert:?}");
        }
    }

    #[test]
    fn sparse_marginals_are_certified() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..10 {
            let n = 9;
            let c = Array2::from_shape_fn((n, n), |_| rng.random_range(0.0..1.0));
            let mut pw: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            let mut qw: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            pw[2] = 0.0;
            pw[5] = 0.0;
            qw[0] = 0.0;
            let p = SimplexVector::normalized(pw).unwrap();
            let q = SimplexVector::normalized(qw).unwrap();
            let sol = exact_ot(&c, &p, &q).unwrap();
            assert!(certify(&sol, &c, &p, &q).holds(sol.cost));
            assert!(sol.plan.row(2).iter().all(|&v| v == 0.0));
            assert!(sol.plan.column(0).iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn degenerate_uniform_assignment() {
        // Uniform marginals make every basis heavily degenerate.
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for n in [5, 20, 64] {
            let c = Array2::from_shape_fn((n, n), |_| rng.random_range(0.0..1.0));
            let u = SimplexVector::uniform(n).unwrap();
            let sol = exact_ot(&c, &u, &u).unwrap();
            assert!(certify(&sol, &c, &u, &u).holds(sol.cost));
        }
    }

    #[test]
    fn cap_and_validation() {
        let u = SimplexVector::uniform(3).unwrap();
        let c = Array2::zeros((3, 3));
        assert!(matches!(exact_ot_with_cap(&c, &u, &u, 2), Err(Error::Capacity(_))));
        assert!(exact_ot(&Array2::zeros((2, 3)), &u, &u).is_err());
        assert!(exact_ot(&Array2::from_elem((3, 3), -1.0), &u, &u).is_err());
    }

    #[test]
    fn entropy_and_objective() {
        let uniform = Array2::from_elem((2, 2), 0.25);
        let obj = regularized_objective(&uniform, &Array2::zeros((2, 2)), 1.0).unwrap();
        assert!((obj + 4f64.ln()).abs() < 1e-15);
        let point = array![[0.0, 1.0], [0.0, 0.0]];
        assert_eq!(regularized_objective(&point, &Array2::zeros((2, 2)), 1.0).unwrap(), 0.0);
        assert!(entropy(&array![[-0.1, 1.1]]).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        for _ in 0..100 {
            let n = rng.random_range(1..12);
            let raw = Array2::from_shape_fn((n, n), |_| rng.random::<f64>().powi(4));
            let plan = &raw / raw.sum();
            let h = entropy(&plan).unwrap();
            assert!(h >= 0.0 && h <= 2.0 * (n as f64).ln() + 1e-12);
        }
    }

    #[test]
    fn dense_round_fixed_point() {
        let f = array![[0.1, 0.2], [0.3, 0.4]];
        let p = SimplexVector::new(vec![0.3, 0.7]).unwrap();
        let q = SimplexVector::new(vec![0.4, 0.6]).unwrap();
        let g = dense_round(&f, &p, &q).unwrap();
        assert!(g.iter().zip(&f).all(|(a, b)| (a - b).abs() < 1e-15));
    }
}
