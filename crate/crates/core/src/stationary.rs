//! Invariant measures of ergodic chains and their pair-chain counterparts.

use nalgebra::{DMatrix, DVector};

use crate::chain_model::{is_ergodic_structure, StateSpace, TransitionMatrix};
use crate::empirical::PairDF;
use crate::error::{Error, Result};
use crate::metrics::tv_on_common_support;

/// Sizes up to this use the direct linear solve; larger chains use power iteration.
pub const DIRECT_SOLVE_MAX_SIZE: usize = 200;
pub const POWER_TOLERANCE: f64 = 1e-12;
pub const POWER_MAX_ITERATIONS: usize = 1_000_000;

const DIST_TOLERANCE: f64 = 1e-10;

/// A probability vector over the states of a chain.
#[derive(Debug, Clone, PartialEq)]
pub struct Dist {
    weights: Vec<f64>,
}

impl Dist {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidDistribution("empty weight vector".into()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidDistribution("weights must be finite and >= 0".into()));
        }
        let s: f64 = weights.iter().sum();
        if (s - 1.0).abs() > DIST_TOLERANCE {
            return Err(Error::InvalidDistribution(format!("weights sum to {s}")));
        }
        Ok(Dist { weights })
    }

    /// Point mass at state index `i`.
    pub fn delta(size: usize, i: usize) -> Result<Self> {
        if i >= size {
            return Err(Error::InvalidArgument(format!("state {i} out of range for {size} states")));
        }
        let mut w = vec![0.0; size];
        w[i] = 1.0;
        Ok(Dist { weights: w })
    }

    pub fn uniform(size: usize) -> Self {
        Dist { weights: vec![1.0 / size as f64; size] }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Stationary law of `(X_0, X_1)`: `w_ij = π(i) p_ij`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PairDist {
    state_space: StateSpace,
    weights: Vec<f64>,
}

impl PairDist {
    pub fn state_space(&self) -> &StateSpace {
        &self.state_space
    }

    pub fn size(&self) -> usize {
        self.state_space.size()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.size() + j]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Marginal of the first coordinate.
    pub fn row_marginal(&self) -> Vec<f64> {
        self.weights.chunks_exact(self.size()).map(|r| r.iter().sum()).collect()
    }

    /// Marginal of the second coordinate.
    pub fn column_marginal(&self) -> Vec<f64> {
        let n = self.size();
        let mut m = vec![0.0; n];
        for row in self.weights.chunks_exact(n) {
            for (c, w) in m.iter_mut().zip(row) {
                *c += w;
            }
        }
        m
    }
}

/// The unique `π` with `πP = π` for an irreducible aperiodic `P`.
pub fn invariant_measure(p: &TransitionMatrix) -> Result<Dist> {
    if !is_ergodic_structure(p) {
        return Err(Error::NotErgodic);
    }
    if p.size() <= DIRECT_SOLVE_MAX_SIZE {
        invariant_by_solve(p)
    } else {
        invariant_by_power_iteration(p, POWER_TOLERANCE, POWER_MAX_ITERATIONS)
    }
}

/// Solves `(Pᵀ - I) π = 0` with the last equation replaced by `Σ π = 1`.
fn invariant_by_solve(p: &TransitionMatrix) -> Result<Dist> {
    let n = p.size();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            a[(j, i)] = p.get(i, j);
        }
        a[(i, i)] -= 1.0;
    }
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(n);
    b[n - 1] = 1.0;
    let x = a.lu().solve(&b).ok_or_else(|| Error::InvalidMatrix("singular stationarity system".into()))?;
    Ok(Dist { weights: clean_probabilities(x.iter().copied()) })
}

/// Power iteration `π ← πP` from the uniform vector until the max-norm step
/// is below `tol`.
pub fn invariant_by_power_iteration(p: &TransitionMatrix, tol: f64, max_iter: usize) -> Result<Dist> {
    if !is_ergodic_structure(p) {
        return Err(Error::NotErgodic);
    }
    let mut pi = vec![1.0 / p.size() as f64; p.size()];
    for _ in 0..max_iter {
        let next = p.left_multiply(&pi);
        let step = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        pi = next;
        if step < tol {
            return Ok(Dist { weights: clean_probabilities(pi) });
        }
    }
    Err(Error::NoConvergence(max_iter))
}

// round-off can leave entries like -1e-18
fn clean_probabilities(v: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut w: Vec<f64> = v.into_iter().map(|x| x.max(0.0)).collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= s);
    w
}

/// `w_ij = π(i) p_ij` for the stationary pair `(X_0, X_1)`.
pub fn pair_invariant(p: &TransitionMatrix) -> Result<PairDist> {
    let pi = invariant_measure(p)?;
    Ok(pair_dist_from(p, &pi))
}

pub(crate) fn pair_dist_from(p: &TransitionMatrix, pi: &Dist) -> PairDist {
    let weights = pi.weights().iter().zip(p.rows()).flat_map(|(&m, row)| row.iter().map(move |&q| m * q)).collect();
    PairDist { state_space: p.state_space().clone(), weights }
}

/// Distribution function of the stationary pair:
/// `F(x, x') = Σ_{i ≤ x} π(i) Σ_{j ≤ x'} p_ij`.
pub fn invariant_pair_df(p: &TransitionMatrix) -> Result<PairDF> {
    let w = pair_invariant(p)?;
    Ok(PairDF::from_cell_masses(w.state_space().clone(), w.weights()))
}

/// `‖μ0 P^t − π‖_TV` for `t = 0..=t_max`, with the factor-2 normalization
/// (values lie in `[0, 2]`).
pub fn tv_decay(p: &TransitionMatrix, mu0: &Dist, t_max: usize) -> Result<Vec<f64>> {
    if mu0.len() != p.size() {
        return Err(Error::MismatchedStateSpace);
    }
    let pi = invariant_measure(p)?;
    let mut cur = mu0.weights().to_vec();
    let mut out = Vec::with_capacity(t_max + 1);
    out.push(tv_on_common_support(&cur, pi.weights()));
    for _ in 0..t_max {
        cur = p.left_multiply(&cur);
        out.push(tv_on_common_support(&cur, pi.weights()));
    }
    Ok(out)
}
