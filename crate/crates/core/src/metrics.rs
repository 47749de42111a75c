//! Distances between finitely supported probability measures.
//!
//! Total variation uses the `2 · sup_A (μ(A) − ν(A))` normalization, so it
//! ranges over `[0, 2]`. The Prokhorov distance is computed exactly by subset
//! enumeration, which is why supports are capped at [`MAX_EXACT_SUPPORT`]
//! points.

use crate::empirical::PairDF;
use crate::error::{Error, Result};

pub const MAX_EXACT_SUPPORT: usize = 20;

const WEIGHT_TOLERANCE: f64 = 1e-10;

/// A probability measure on finitely many points of ℝ^d, d ∈ {1, 2}.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportedMeasure {
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl SupportedMeasure {
    pub fn new(points: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if points.is_empty() || points.len() != weights.len() {
            return Err(Error::InvalidDistribution("points and weights must be non-empty and aligned".into()));
        }
        let d = points[0].len();
        if !(1..=2).contains(&d) || points.iter().any(|p| p.len() != d) {
            return Err(Error::InvalidDistribution("points must all lie in R^1 or all in R^2".into()));
        }
        if points.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidDistribution("non-finite point coordinate".into()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidDistribution("weights must be finite and >= 0".into()));
        }
        let s: f64 = weights.iter().sum();
        if (s - 1.0).abs() > WEIGHT_TOLERANCE {
            return Err(Error::InvalidDistribution(format!("weights sum to {s}")));
        }
        for (i, p) in points.iter().enumerate() {
            if points[..i].contains(p) {
                return Err(Error::InvalidDistribution(format!("duplicate point {p:?}")));
            }
        }
        Ok(SupportedMeasure { points, weights })
    }

    /// Point mass at `x` on the real line.
    pub fn dirac(x: f64) -> Self {
        SupportedMeasure { points: vec![vec![x]], weights: vec![1.0] }
    }

    /// A measure on the real line from parallel slices.
    pub fn on_line(xs: &[f64], weights: &[f64]) -> Result<Self> {
        Self::new(xs.iter().map(|&x| vec![x]).collect(), weights.to_vec())
    }

    /// The pair measure behind a distribution function, as atoms at
    /// `(label_i, label_j)` carrying positive mass.
    pub fn from_pair_df(df: &PairDF) -> Result<Self> {
        let labels = df.state_space().labels();
        let n = labels.len();
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for (k, m) in df.cell_masses().into_iter().enumerate() {
            if m > 0.0 {
                points.push(vec![labels[k / n], labels[k % n]]);
                weights.push(m);
            }
        }
        Self::new(points, weights)
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }
}

/// Both measures expressed on the union of their supports.
struct Merged {
    points: Vec<Vec<f64>>,
    mu: Vec<f64>,
    nu: Vec<f64>,
}

fn merge(mu: &SupportedMeasure, nu: &SupportedMeasure) -> Result<Merged> {
    if mu.dim() != nu.dim() {
        return Err(Error::InvalidArgument("measures live in different dimensions".into()));
    }
    let mut points = mu.points.clone();
    let mut m = mu.weights.clone();
    let mut v = vec![0.0; points.len()];
    for (p, w) in nu.points.iter().zip(&nu.weights) {
        match points.iter().position(|q| q == p) {
            Some(k) => v[k] += w,
            None => {
                points.push(p.clone());
                m.push(0.0);
                v.push(*w);
            }
        }
    }
    Ok(Merged { points, mu: m, nu: v })
}

/// `Σ |a_i − b_i|` for two weight vectors on the same support.
pub fn tv_on_common_support(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// `‖μ − ν‖_TV = 2 sup_A (μ(A) − ν(A))`.
pub fn tv_distance(mu: &SupportedMeasure, nu: &SupportedMeasure) -> Result<f64> {
    let m = merge(mu, nu)?;
    Ok(tv_on_common_support(&m.mu, &m.nu))
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Subset-sum tables and pairwise distances for exact enumeration.
struct Enumerator {
    k: usize,
    dist: Vec<f64>,
    mu_sum: Vec<f64>,
    nu_sum: Vec<f64>,
    hood: Vec<u32>,
}

impl Enumerator {
    fn new(m: &Merged) -> Result<Self> {
        let k = m.points.len();
        if k > MAX_EXACT_SUPPORT {
            return Err(Error::SupportTooLarge(k));
        }
        let mut dist = vec![0.0; k * k];
        for i in 0..k {
            for j in 0..k {
                dist[i * k + j] = euclid(&m.points[i], &m.points[j]);
            }
        }
        Ok(Enumerator { k, dist, mu_sum: subset_sums(&m.mu), nu_sum: subset_sums(&m.nu), hood: vec![0; 1 << k] })
    }

    /// `max_A max(ν(A) − μ(N(A)), μ(A) − ν(N(A)), 0)` where `N(A)` is the union
    /// of the neighbour masks of the points of `A`.
    fn worst_gap(&mut self, neighbours: &[u32]) -> f64 {
        let mut worst = 0.0f64;
        for a in 1usize..(1 << self.k) {
            let low = a.trailing_zeros() as usize;
            let n = self.hood[a & (a - 1)] | neighbours[low];
            self.hood[a] = n;
            let n = n as usize;
            worst = worst.max(self.nu_sum[a] - self.mu_sum[n]).max(self.mu_sum[a] - self.nu_sum[n]);
        }
        worst
    }

    fn neighbours(&self, within: impl Fn(f64) -> bool) -> Vec<u32> {
        (0..self.k)
            .map(|s| (0..self.k).filter(|&t| within(self.dist[s * self.k + t])).fold(0u32, |m, t| m | (1 << t)))
            .collect()
    }
}

fn subset_sums(w: &[f64]) -> Vec<f64> {
    let mut s = vec![0.0; 1 << w.len()];
    for a in 1usize..s.len() {
        let low = a.trailing_zeros() as usize;
        s[a] = s[a & (a - 1)] + w[low];
    }
    s
}

/// Whether `α` satisfies both Prokhorov inequalities for every subset `A` of
/// the merged support, with `A_α = {a : d(a, A) < α}` and `∅_α = ∅`.
pub fn prokhorov_feasible(mu: &SupportedMeasure, nu: &SupportedMeasure, alpha: f64) -> Result<bool> {
    if alpha.is_nan() || alpha <= 0.0 {
        return Err(Error::InvalidArgument(format!("alpha must be > 0, got {alpha}")));
    }
    let m = merge(mu, nu)?;
    let mut e = Enumerator::new(&m)?;
    let nb = e.neighbours(|d| d < alpha);
    Ok(e.worst_gap(&nb) <= alpha)
}

/// Exact Prokhorov distance `inf{α > 0 : α feasible}`.
///
/// Between consecutive pairwise distances `d_l < d_{l+1}` the enlargement
/// `A_α` for `α ∈ (d_l, d_{l+1}]` is `{s : d(s, A) ≤ d_l}`, so the feasibility
/// gap `g_l` is constant there and the smallest admissible α in that range is
/// `max(d_l, g_l)`. The answer is the minimum of these candidates.
pub fn prokhorov_exact(mu: &SupportedMeasure, nu: &SupportedMeasure) -> Result<f64> {
    let m = merge(mu, nu)?;
    let mut e = Enumerator::new(&m)?;
    let mut levels = e.dist.clone();
    levels.sort_by(f64::total_cmp);
    levels.dedup();

    let mut best = f64::INFINITY;
    for &d in &levels {
        if d >= best {
            break;
        }
        let nb = e.neighbours(|x| x <= d);
        let gap = e.worst_gap(&nb);
        best = best.min(d.max(gap));
    }
    Ok(best)
}
