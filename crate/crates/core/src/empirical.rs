//! Pair counts and two-argument distribution functions.
//!
//! A [`PairDF`] is stored as its full cumulative grid over the state labels,
//! padded with a leading row and column of zeros that stand for `-∞`. On a
//! finite grid the right-continuity and left-limit properties of a
//! distribution function hold automatically, so only range, monotonicity and
//! the two corners are checked.

use crate::chain_model::StateSpace;
use crate::error::{Error, Result};
use crate::sampling::Trajectory;

const DF_TOLERANCE: f64 = 1e-10;

/// Transition counts `counts[i][j] = #{t < N : X_t = i, X_{t+1} = j}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairCounts {
    size: usize,
    counts: Vec<u64>,
    total: u64,
}

impl PairCounts {
    pub fn zeros(size: usize) -> Self {
        PairCounts { size, counts: vec![0; size * size], total: 0 }
    }

    pub fn from_matrix(rows: &[Vec<u64>]) -> Result<Self> {
        let size = rows.len();
        if rows.iter().any(|r| r.len() != size) {
            return Err(Error::InvalidArgument("count matrix is not square".into()));
        }
        let counts = rows.concat();
        let total = counts.iter().sum();
        Ok(PairCounts { size, counts, total })
    }

    #[inline]
    pub fn record(&mut self, from: usize, to: usize) {
        self.counts[from * self.size + to] += 1;
        self.total += 1;
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.size + j]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.counts[i * self.size..(i + 1) * self.size]
    }

    /// Total number of transitions `N`.
    pub fn total(&self) -> u64 {
        self.total
    }
}

/// Counts every consecutive pair of the trajectory.
pub fn pair_counts(traj: &Trajectory, size: usize) -> Result<PairCounts> {
    let states = traj.states();
    if states.len() < 2 {
        return Err(Error::InvalidArgument("trajectory has no transitions".into()));
    }
    if states.iter().any(|&s| s >= size) {
        return Err(Error::MismatchedStateSpace);
    }
    let mut c = PairCounts::zeros(size);
    for w in states.windows(2) {
        c.record(w[0], w[1]);
    }
    Ok(c)
}

/// A distribution function `F(x, x')` of a pair on a finite ordered space.
#[derive(Debug, Clone, PartialEq)]
pub struct PairDF {
    state_space: StateSpace,
    // (size + 1) x (size + 1), row-major; row 0 and column 0 are the -∞ padding
    grid: Vec<f64>,
}

impl PairDF {
    /// Wraps a padded cumulative grid after checking the distribution-function
    /// invariants.
    pub fn new(state_space: StateSpace, grid: Vec<f64>) -> Result<Self> {
        let df = PairDF { state_space, grid };
        df.check()?;
        Ok(df)
    }

    /// Cumulates row-major cell masses `m_ij = P(X = i, X' = j)`.
    pub fn from_cell_masses(state_space: StateSpace, masses: &[f64]) -> Self {
        let n = state_space.size();
        assert_eq!(masses.len(), n * n, "cell mass count must be size^2");
        let w = n + 1;
        let mut grid = vec![0.0; w * w];
        for i in 0..n {
            let mut row_acc = 0.0;
            for j in 0..n {
                row_acc += masses[i * n + j];
                grid[(i + 1) * w + j + 1] = grid[i * w + j + 1] + row_acc;
            }
        }
        PairDF { state_space, grid }
    }

    /// Checks range, monotonicity and the corner values.
    pub fn check(&self) -> Result<()> {
        let n = self.state_space.size();
        let w = n + 1;
        if self.grid.len() != w * w {
            return Err(Error::InvalidDistribution(format!("grid must have {} cells", w * w)));
        }
        if (0..w).any(|k| self.grid[k] != 0.0 || self.grid[k * w] != 0.0) {
            return Err(Error::InvalidDistribution("-∞ padding must be zero".into()));
        }
        for a in 0..w {
            for b in 0..w {
                let v = self.grid[a * w + b];
                if !(-DF_TOLERANCE..=1.0 + DF_TOLERANCE).contains(&v) {
                    return Err(Error::InvalidDistribution(format!("F = {v} outside [0, 1]")));
                }
                if a > 0 && v + DF_TOLERANCE < self.grid[(a - 1) * w + b] {
                    return Err(Error::InvalidDistribution("F decreases in x".into()));
                }
                if b > 0 && v + DF_TOLERANCE < self.grid[a * w + b - 1] {
                    return Err(Error::InvalidDistribution("F decreases in x'".into()));
                }
            }
        }
        let top = self.grid[w * w - 1];
        if (top - 1.0).abs() > DF_TOLERANCE {
            return Err(Error::InvalidDistribution(format!("F(max, max) = {top}")));
        }
        Ok(())
    }

    pub fn state_space(&self) -> &StateSpace {
        &self.state_space
    }

    /// `F(x, x')` at arbitrary real arguments.
    pub fn eval(&self, x: f64, x2: f64) -> f64 {
        let a = self.state_space.count_at_or_below(x);
        let b = self.state_space.count_at_or_below(x2);
        self.grid[a * (self.state_space.size() + 1) + b]
    }

    /// `F(label_i, label_j)` by state index.
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.grid[(i + 1) * (self.state_space.size() + 1) + j + 1]
    }

    /// The padded `(size + 1)²` cumulative grid.
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// Cell masses recovered by inclusion–exclusion over the grid.
    pub fn cell_masses(&self) -> Vec<f64> {
        let n = self.state_space.size();
        let w = n + 1;
        let g = &self.grid;
        let mut out = Vec::with_capacity(n * n);
        for a in 1..w {
            for b in 1..w {
                out.push(g[a * w + b] - g[(a - 1) * w + b] - g[a * w + b - 1] + g[(a - 1) * w + b - 1]);
            }
        }
        out
    }
}

/// `F_N(x, x') = (1/N) Σ_{t<N} 1(X_t ≤ x, X_{t+1} ≤ x')`.
pub fn empirical_pair_df(counts: &PairCounts, state_space: &StateSpace) -> Result<PairDF> {
    if counts.total() == 0 {
        return Err(Error::InvalidArgument("no transitions counted".into()));
    }
    let n = state_space.size();
    if counts.size() != n {
        return Err(Error::MismatchedStateSpace);
    }
    let w = n + 1;
    // cumulate integers first so the top corner is exactly N / N = 1
    let mut cum = vec![0u64; w * w];
    for i in 0..n {
        let mut row_acc = 0;
        for j in 0..n {
            row_acc += counts.get(i, j);
            cum[(i + 1) * w + j + 1] = cum[i * w + j + 1] + row_acc;
        }
    }
    let total = counts.total() as f64;
    let grid = cum.into_iter().map(|c| c as f64 / total).collect();
    Ok(PairDF { state_space: state_space.clone(), grid })
}

/// `max |F − G|` over the state grid.
pub fn sup_discrepancy(f: &PairDF, g: &PairDF) -> Result<f64> {
    if f.state_space != g.state_space {
        return Err(Error::MismatchedStateSpace);
    }
    Ok(f.grid.iter().zip(&g.grid).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}
