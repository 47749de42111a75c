use std::time::Instant;

use rayon::prelude::*;

use crate::bayes::{martingale_gap, posterior_mean, GridModel, InitialTerm, MartingaleStat, PriorSpec};
use crate::chain_model::{is_ergodic_structure, ChainFamily, ParamPoint};
use crate::empirical::{empirical_pair_df, sup_discrepancy, PairCounts};
use crate::error::{Error, Result};
use crate::experiment::config::{ExperimentConfig, ThetaMode};
use crate::sampling::{sample_trajectory, substream};
use crate::stationary::{invariant_measure, invariant_pair_df, tv_decay, Dist};

/// Knobs that do not belong in the reproducible config.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Measure `wall_ms`; otherwise it is written as 0 so output is
    /// byte-reproducible.
    pub record_wall_time: bool,
}

/// One `(replication, n)` row of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub replication: usize,
    pub n: usize,
    pub theta: ParamPoint,
    /// `None` for LLN rows and for degenerate posteriors.
    pub theta_hat: Option<ParamPoint>,
    pub sup_discrepancy: f64,
    pub posterior_entropy: Option<f64>,
    pub wall_ms: f64,
    pub degenerate: bool,
}

impl ExperimentRecord {
    /// `|θ̂_n − θ|` per coordinate.
    pub fn error(&self) -> Option<Vec<f64>> {
        self.theta_hat
            .as_ref()
            .map(|h| h.coords().iter().zip(self.theta.coords()).map(|(a, b)| (a - b).abs()).collect())
    }

    pub fn max_error(&self) -> Option<f64> {
        self.error().map(|e| e.into_iter().fold(0.0, f64::max))
    }
}

/// Shared, immutable state of one experiment run.
struct Setup<'a> {
    config: &'a ExperimentConfig,
    family: ChainFamily,
    model: Option<GridModel>,
    options: RunOptions,
}

impl<'a> Setup<'a> {
    fn new(config: &'a ExperimentConfig, options: RunOptions, need_posterior: bool) -> Result<Self> {
        config.validate()?;
        let family = config.build_family()?;
        let prior = config.build_prior(&family)?;
        let needs_prior = need_posterior || config.theta_mode == ThetaMode::Sampled;
        let model = match prior {
            Some(prior) => {
                let model = GridModel::new(&family, prior, InitialTerm::Ancillary)?;
                if !model.matrices().iter().all(is_ergodic_structure) {
                    return Err(Error::NotErgodic);
                }
                Some(model)
            }
            None if needs_prior => return Err(Error::Config("this experiment needs a `prior` section".into())),
            None => None,
        };
        if let ThetaMode::Fixed(list) = &config.theta_mode {
            for th in list {
                family.transition_matrix(th)?;
            }
        }
        Ok(Setup { config, family, model, options })
    }

    fn run(&self, with_estimator: bool) -> Result<Vec<ExperimentRecord>> {
        let per_rep: Vec<Vec<ExperimentRecord>> = (0..self.config.replications)
            .into_par_iter()
            .map(|r| self.replication(r, with_estimator))
            .collect::<Result<_>>()?;
        Ok(per_rep.into_iter().flatten().collect())
    }

    /// Replication `r`: in sampled mode the first uniform of
    /// `substream(master_seed, r)` draws θ from the prior; the trajectory then
    /// starts from `π^θ` and runs to the largest `n` of the schedule.
    fn replication(&self, r: usize, with_estimator: bool) -> Result<Vec<ExperimentRecord>> {
        let start = Instant::now();
        let mut stream = substream(self.config.master_seed, r as u64);
        let theta = match &self.config.theta_mode {
            ThetaMode::Sampled => {
                let prior = self.model.as_ref().expect("checked in setup").prior();
                prior.grid()[stream.categorical(prior.weights())].clone()
            }
            ThetaMode::Fixed(list) => list[r % list.len()].clone(),
        };
        let p = self.family.transition_matrix(&theta)?;
        let pi = invariant_measure(&p)?;
        let target = invariant_pair_df(&p)?;
        let traj = sample_trajectory(&p, &pi, self.config.max_n(), &mut stream)?;
        let states = traj.states();
        let space = self.family.state_space();

        let mut counts = PairCounts::zeros(space.size());
        let mut done = 0;
        let mut rows = Vec::with_capacity(self.config.n_schedule.len());
        for &n in &self.config.n_schedule {
            for w in states[done..=n].windows(2) {
                counts.record(w[0], w[1]);
            }
            done = n;

            let f_n = empirical_pair_df(&counts, space)?;
            let disc = sup_discrepancy(&f_n, &target)?;
            let (theta_hat, entropy, degenerate) = if with_estimator {
                let model = self.model.as_ref().expect("checked in setup");
                match model.posterior_from_counts(&counts, Some(states[0])) {
                    Ok(post) => (Some(posterior_mean(&post, model.prior())?), Some(post.entropy()), false),
                    Err(Error::DegeneratePosterior) => (None, None, true),
                    Err(e) => return Err(e),
                }
            } else {
                (None, None, false)
            };
            let wall_ms = if self.options.record_wall_time { start.elapsed().as_secs_f64() * 1e3 } else { 0.0 };
            rows.push(ExperimentRecord {
                replication: r,
                n,
                theta: theta.clone(),
                theta_hat,
                sup_discrepancy: disc,
                posterior_entropy: entropy,
                wall_ms,
                degenerate,
            });
        }
        Ok(rows)
    }
}

/// Posterior-mean consistency over the schedule. Rows are ordered by
/// `(replication, n)` regardless of the order replications finish in.
/// Degenerate posteriors are recorded in the row and the run continues.
pub fn run_consistency_experiment(config: &ExperimentConfig, options: RunOptions) -> Result<Vec<ExperimentRecord>> {
    Setup::new(config, options, true)?.run(true)
}

/// Sup-discrepancy of `F_n` from `F̂^θ` over the schedule; estimator columns
/// stay empty. A prior is only needed in sampled mode.
pub fn run_lln_experiment(config: &ExperimentConfig, options: RunOptions) -> Result<Vec<ExperimentRecord>> {
    Setup::new(config, options, false)?.run(false)
}

/// `(t, ‖μ0 P^t − π‖_TV)` for `t = 0..=t_max`; no sampling.
pub fn run_ergodicity_diagnostic(
    family: &ChainFamily,
    theta: &ParamPoint,
    mu0: &Dist,
    t_max: usize,
) -> Result<Vec<(usize, f64)>> {
    let p = family.transition_matrix(theta)?;
    Ok(tv_decay(&p, mu0, t_max)?.into_iter().enumerate().collect())
}

/// Martingale diagnostic driven by a config: the schedule must be `[n1, n2]`.
pub fn run_martingale(config: &ExperimentConfig) -> Result<MartingaleStat> {
    config.validate()?;
    let &[n1, n2] = config.n_schedule.as_slice() else {
        return Err(Error::Config("martingale needs n_schedule = [n1, n2]".into()));
    };
    if config.theta_mode != ThetaMode::Sampled {
        return Err(Error::Config("martingale draws θ from the prior; use theta_mode \"sampled\"".into()));
    }
    let family = config.build_family()?;
    let prior: PriorSpec =
        config.build_prior(&family)?.ok_or_else(|| Error::Config("martingale needs a `prior` section".into()))?;
    martingale_gap(&family, &prior, n1, n2, config.replications, config.master_seed)
}
