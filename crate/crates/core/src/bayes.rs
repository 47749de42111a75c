//! Posterior-mean estimation of θ over a discretized prior.
//!
//! The prior is a finite grid of parameter points with weights. Given
//! transition counts, each grid point gets the unnormalized log posterior
//! `log prior + Σ_ij c_ij log p^θ_ij` (plus `log π^θ(X_0)` when the
//! stationary initial term is requested), and weights are normalized with a
//! max shift. The estimator is the coordinatewise posterior mean.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain_model::{ChainFamily, ParamPoint, TransitionMatrix};
use crate::empirical::{pair_counts, PairCounts};
use crate::error::{Error, Result};
use crate::sampling::{sample_trajectory, substream, Trajectory};
use crate::stationary::{invariant_measure, Dist};

const PRIOR_TOLERANCE: f64 = 1e-12;

// below this many grid points the rayon overhead is not worth it
const PARALLEL_GRID_MIN: usize = 2048;

/// How grid weights of the prior are assigned.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorWeights {
    Uniform,
    /// Independent symmetric Dirichlet(α) rows evaluated at each grid matrix:
    /// weight ∝ Π_ij p_ij^(α − 1).
    Dirichlet(f64),
}

/// A discretized prior: distinct grid points in the family domain with
/// probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorSpec {
    grid: Vec<ParamPoint>,
    weights: Vec<f64>,
}

impl PriorSpec {
    pub fn new(family: &ChainFamily, grid: Vec<ParamPoint>, weights: Vec<f64>) -> Result<Self> {
        if grid.is_empty() || grid.len() != weights.len() {
            return Err(Error::InvalidArgument("prior grid and weights must be non-empty and aligned".into()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidArgument("prior weights must be finite and >= 0".into()));
        }
        let s: f64 = weights.iter().sum();
        if (s - 1.0).abs() > PRIOR_TOLERANCE {
            return Err(Error::InvalidArgument(format!("prior weights sum to {s}")));
        }
        if let Some(p) = grid.iter().find(|p| !family.contains(p)) {
            return Err(Error::OutsideDomain(format!("prior grid point {:?}", p.coords())));
        }
        let mut sorted: Vec<&[f64]> = grid.iter().map(ParamPoint::coords).collect();
        sorted.sort_by(|a, b| {
            a.iter().zip(*b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
        });
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument("prior grid points must be distinct".into()));
        }
        Ok(PriorSpec { grid, weights })
    }

    /// Tensor grid over the family box with the given weight rule.
    pub fn on_box_grid(family: &ChainFamily, points_per_axis: usize, rule: PriorWeights) -> Result<Self> {
        let grid = family.box_grid(points_per_axis)?;
        if grid.is_empty() {
            return Err(Error::InvalidArgument("parameter grid has no admissible point".into()));
        }
        let log_w: Vec<f64> = match rule {
            PriorWeights::Uniform => vec![0.0; grid.len()],
            PriorWeights::Dirichlet(alpha) => {
                if alpha.is_nan() || alpha <= 0.0 {
                    return Err(Error::InvalidArgument(format!("Dirichlet alpha must be > 0, got {alpha}")));
                }
                grid.iter()
                    .map(|th| {
                        let p = family.transition_matrix(th)?;
                        Ok(p.entries().iter().map(|&x| (alpha - 1.0) * x.ln()).sum())
                    })
                    .collect::<Result<_>>()?
            }
        };
        let weights = normalize_log_weights(&log_w).ok_or(Error::DegeneratePosterior)?.0;
        PriorSpec::new(family, grid, weights)
    }

    /// Single point with all the mass.
    pub fn point_mass(family: &ChainFamily, theta: ParamPoint) -> Result<Self> {
        PriorSpec::new(family, vec![theta], vec![1.0])
    }

    pub fn grid(&self) -> &[ParamPoint] {
        &self.grid
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.grid[0].dim()
    }

    pub fn mean(&self) -> ParamPoint {
        weighted_mean(&self.grid, &self.weights)
    }
}

fn weighted_mean(grid: &[ParamPoint], weights: &[f64]) -> ParamPoint {
    let mut m = vec![0.0; grid[0].dim()];
    for (th, &w) in grid.iter().zip(weights) {
        if w == 0.0 {
            continue;
        }
        for (acc, x) in m.iter_mut().zip(th.coords()) {
            *acc += w * x;
        }
    }
    // a convex combination of finite points
    ParamPoint::new(m).expect("finite mean")
}

/// Whether the initial state contributes to the likelihood.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialTerm {
    /// `X_0` is ancillary; only transitions enter the likelihood.
    #[default]
    Ancillary,
    /// Multiply by `π^θ(X_0)`.
    Stationary,
}

/// `Σ_ij c_ij log p^θ_ij` (transitions only). May be `-∞`.
pub fn log_likelihood(family: &ChainFamily, theta: &ParamPoint, traj: &Trajectory) -> Result<f64> {
    let p = family.transition_matrix(theta)?;
    let counts = pair_counts(traj, p.size())?;
    Ok(counts_log_likelihood(&counts, &log_entries(&p)))
}

fn log_entries(p: &TransitionMatrix) -> Vec<f64> {
    p.entries().iter().map(|x| x.ln()).collect()
}

fn counts_log_likelihood(counts: &PairCounts, log_p: &[f64]) -> f64 {
    counts.counts().iter().zip(log_p).filter(|(&c, _)| c > 0).map(|(&c, &lp)| c as f64 * lp).sum()
}

/// Normalized weights and log-sum-exp of log weights, or `None` if every
/// entry is `-∞`.
fn normalize_log_weights(log_w: &[f64]) -> Option<(Vec<f64>, f64)> {
    let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return None;
    }
    let mut w: Vec<f64> = log_w.iter().map(|&l| (l - max).exp()).collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= s);
    Some((w, max + s.ln()))
}

/// Discretized posterior over the prior grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorState {
    log_weights: Vec<f64>,
    weights: Vec<f64>,
    log_evidence: f64,
    n: u64,
}

impl PosteriorState {
    /// Normalizes unnormalized log posterior weights.
    pub fn from_log_weights(log_weights: Vec<f64>, n: u64) -> Result<Self> {
        if log_weights.iter().any(|l| l.is_nan() || *l == f64::INFINITY) {
            return Err(Error::InvalidArgument("log weights must be < +inf and not NaN".into()));
        }
        let (weights, log_evidence) = normalize_log_weights(&log_weights).ok_or(Error::DegeneratePosterior)?;
        Ok(PosteriorState { log_weights, weights, log_evidence, n })
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `log Σ prior · likelihood`.
    pub fn log_evidence(&self) -> f64 {
        self.log_evidence
    }

    /// Number of transitions the posterior conditions on.
    pub fn n(&self) -> u64 {
        self.n
    }

    /// Shannon entropy (nats) of the normalized weights.
    pub fn entropy(&self) -> f64 {
        -self.weights.iter().filter(|&&w| w > 0.0).map(|w| w * w.ln()).sum::<f64>()
    }
}

/// `θ̂ = Σ_g θ_g w_g`.
pub fn posterior_mean(post: &PosteriorState, prior: &PriorSpec) -> Result<ParamPoint> {
    if post.weights.len() != prior.len() {
        return Err(Error::InvalidArgument("posterior and prior grids differ in size".into()));
    }
    Ok(weighted_mean(&prior.grid, &post.weights))
}

/// Prior grid with per-point transition matrices and log entries cached, so
/// posteriors for many count tables (trajectory prefixes, replications) are
/// cheap.
#[derive(Debug, Clone)]
pub struct GridModel {
    prior: PriorSpec,
    initial: InitialTerm,
    matrices: Vec<TransitionMatrix>,
    log_p: Vec<Vec<f64>>,
    log_prior: Vec<f64>,
    stationary: Option<Vec<Dist>>,
}

impl GridModel {
    pub fn new(family: &ChainFamily, prior: PriorSpec, initial: InitialTerm) -> Result<Self> {
        let matrices: Vec<TransitionMatrix> =
            prior.grid.iter().map(|th| family.transition_matrix(th)).collect::<Result<_>>()?;
        let log_p = matrices.iter().map(log_entries).collect();
        let log_prior = prior.weights.iter().map(|w| w.ln()).collect();
        let stationary = match initial {
            InitialTerm::Ancillary => None,
            InitialTerm::Stationary => Some(matrices.iter().map(invariant_measure).collect::<Result<_>>()?),
        };
        Ok(GridModel { prior, initial, matrices, log_p, log_prior, stationary })
    }

    pub fn prior(&self) -> &PriorSpec {
        &self.prior
    }

    pub fn matrices(&self) -> &[TransitionMatrix] {
        &self.matrices
    }

    /// Invariant measures of the grid matrices, when cached.
    pub fn stationary(&self) -> Option<&[Dist]> {
        self.stationary.as_deref()
    }

    /// Posterior given transition counts and (for the stationary initial
    /// term) the initial state. Empty counts give back the prior.
    pub fn posterior_from_counts(&self, counts: &PairCounts, x0: Option<usize>) -> Result<PosteriorState> {
        let init = match (self.initial, &self.stationary) {
            (InitialTerm::Stationary, Some(pis)) => {
                let x0 =
                    x0.ok_or_else(|| Error::InvalidArgument("stationary initial term needs the initial state".into()))?;
                Some((x0, pis))
            }
            _ => None,
        };
        let point = |g: usize| {
            let mut l = self.log_prior[g] + counts_log_likelihood(counts, &self.log_p[g]);
            if let Some((x0, pis)) = init {
                l += pis[g].weights()[x0].ln();
            }
            l
        };
        let log_w: Vec<f64> = if self.prior.len() >= PARALLEL_GRID_MIN {
            (0..self.prior.len()).into_par_iter().map(point).collect()
        } else {
            (0..self.prior.len()).map(point).collect()
        };
        PosteriorState::from_log_weights(log_w, counts.total())
    }

    pub fn posterior(&self, traj: &Trajectory) -> Result<PosteriorState> {
        let counts = pair_counts(traj, self.matrices[0].size())?;
        self.posterior_from_counts(&counts, Some(traj.states()[0]))
    }
}

/// Posterior of θ given a trajectory, under the discretized prior.
pub fn grid_posterior(
    prior: &PriorSpec,
    family: &ChainFamily,
    traj: &Trajectory,
    initial: InitialTerm,
) -> Result<PosteriorState> {
    GridModel::new(family, prior.clone(), initial)?.posterior(traj)
}

/// Conjugate posterior mean under independent symmetric Dirichlet(α) rows:
/// `(α + c_ij) / (size · α + Σ_j c_ij)`.
pub fn dirichlet_posterior_mean(counts: &PairCounts, alpha: f64) -> Result<TransitionMatrix> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!("alpha must be > 0, got {alpha}")));
    }
    let n = counts.size();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let row = counts.row(i);
            let denom = n as f64 * alpha + row.iter().sum::<u64>() as f64;
            row.iter().map(|&c| (alpha + c as f64) / denom).collect()
        })
        .collect();
    TransitionMatrix::from_rows(&rows)
}

/// Sample mean and standard error of `θ̂_{n2} − θ̂_{n1}` over joint draws.
#[derive(Debug, Clone, PartialEq)]
pub struct MartingaleStat {
    pub mean: Vec<f64>,
    pub std_error: Vec<f64>,
    pub replications: usize,
    pub skipped: usize,
}

impl MartingaleStat {
    /// `|mean| ≤ k · SE` in every coordinate.
    pub fn within(&self, k: f64) -> bool {
        self.mean.iter().zip(&self.std_error).all(|(m, se)| m.abs() <= k * se)
    }
}

/// Martingale check of the posterior mean under the joint law.
///
/// Replication `r` uses `substream(seed, r)`: one uniform picks θ from the
/// prior, then `X_0 ~ π^θ` and `n2` transitions are simulated. The posterior
/// uses the stationary initial term, so it is the exact conditional law of θ
/// under this simulation and `E[θ̂_{n2} − θ̂_{n1}] = 0`.
pub fn martingale_gap(
    family: &ChainFamily,
    prior: &PriorSpec,
    n1: usize,
    n2: usize,
    reps: usize,
    seed: u64,
) -> Result<MartingaleStat> {
    if n1 < 1 || n2 < n1 {
        return Err(Error::InvalidArgument(format!("need 1 <= n1 <= n2, got n1={n1}, n2={n2}")));
    }
    if reps < 2 {
        return Err(Error::InvalidArgument("need at least 2 replications".into()));
    }
    let model = GridModel::new(family, prior.clone(), InitialTerm::Stationary)?;
    let stationary = model.stationary().expect("stationary term cached");

    let diffs: Vec<Option<Vec<f64>>> = (0..reps)
        .into_par_iter()
        .map(|r| -> Result<Option<Vec<f64>>> {
            let mut stream = substream(seed, r as u64);
            let g = stream.categorical(prior.weights());
            let traj = sample_trajectory(&model.matrices[g], &stationary[g], n2, &mut stream)?;
            let states = traj.states();
            let size = model.matrices[g].size();
            let mut counts = PairCounts::zeros(size);
            for w in states[..=n1].windows(2) {
                counts.record(w[0], w[1]);
            }
            let early = match model.posterior_from_counts(&counts, Some(states[0])) {
                Ok(p) => posterior_mean(&p, prior)?,
                Err(Error::DegeneratePosterior) => return Ok(None),
                Err(e) => return Err(e),
            };
            for w in states[n1..].windows(2) {
                counts.record(w[0], w[1]);
            }
            let late = match model.posterior_from_counts(&counts, Some(states[0])) {
                Ok(p) => posterior_mean(&p, prior)?,
                Err(Error::DegeneratePosterior) => return Ok(None),
                Err(e) => return Err(e),
            };
            Ok(Some(late.coords().iter().zip(early.coords()).map(|(a, b)| a - b).collect()))
        })
        .collect::<Result<_>>()?;

    let used: Vec<&Vec<f64>> = diffs.iter().flatten().collect();
    let skipped = reps - used.len();
    if used.len() < 2 {
        return Err(Error::DegeneratePosterior);
    }
    let m = prior.dim();
    let k = used.len() as f64;
    let mut mean = vec![0.0; m];
    for d in &used {
        for (acc, x) in mean.iter_mut().zip(d.iter()) {
            *acc += x / k;
        }
    }
    let std_error = (0..m)
        .map(|c| {
            let var = used.iter().map(|d| (d[c] - mean[c]).powi(2)).sum::<f64>() / (k - 1.0);
            (var / k).sqrt()
        })
        .collect();
    Ok(MartingaleStat { mean, std_error, replications: used.len(), skipped })
}
