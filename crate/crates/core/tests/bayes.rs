mod common;

use chain_bayes::bayes::{
    dirichlet_posterior_mean, grid_posterior, log_likelihood, martingale_gap, posterior_mean, GridModel, InitialTerm,
    PosteriorState, PriorSpec, PriorWeights,
};
use chain_bayes::chain_model::{build_family, ChainFamily, FamilySpec, Interval, StateSpace};
use chain_bayes::empirical::pair_counts;
use chain_bayes::sampling::{sample_trajectory, substream, Trajectory};
use chain_bayes::stationary::invariant_measure;
use chain_bayes::Error;
use common::*;

fn full_matrix_two_state() -> ChainFamily {
    build_family(&FamilySpec {
        family: "full_matrix".into(),
        size: Some(2),
        domain: Some(vec![Interval { lo: 0.01, hi: 0.99 }; 2]),
    })
    .unwrap()
}

#[test]
fn grid_mean_tracks_conjugate_mean() {
    let fam = full_matrix_two_state();
    let prior = PriorSpec::on_box_grid(&fam, 99, PriorWeights::Dirichlet(1.0)).unwrap();
    let h = 0.01;
    let model = GridModel::new(&fam, prior.clone(), InitialTerm::Ancillary).unwrap();
    let mut rng = substream(41, 0);
    for rep in 0..10 {
        let (p, q) = (0.1 + 0.8 * rng.uniform(), 0.1 + 0.8 * rng.uniform());
        let m = two_state_matrix(p, q);
        let traj = sample_trajectory(&m, &invariant_measure(&m).unwrap(), 1000, &mut substream(42, rep)).unwrap();
        let counts = pair_counts(&traj, 2).unwrap();
        let mean = posterior_mean(&model.posterior(&traj).unwrap(), &prior).unwrap();
        let oracle = dirichlet_posterior_mean(&counts, 1.0).unwrap();
        assert!((mean.coords()[0] - oracle.get(0, 1)).abs() <= 2.0 * h, "rep {rep}");
        assert!((mean.coords()[1] - oracle.get(1, 0)).abs() <= 2.0 * h, "rep {rep}");
    }
}

#[test]
fn dirichlet_one_prior_is_uniform() {
    let fam = full_matrix_two_state();
    let prior = PriorSpec::on_box_grid(&fam, 9, PriorWeights::Dirichlet(1.0)).unwrap();
    let w0 = prior.weights()[0];
    assert!(prior.weights().iter().all(|w| (w - w0).abs() < 1e-15));
}

#[test]
fn normalization_is_shift_invariant() {
    let lw = vec![-3.0, -1.5, -700.0, 0.25];
    let a = PosteriorState::from_log_weights(lw.clone(), 10).unwrap();
    for c in [-1e3, 5.0, 800.0] {
        let b = PosteriorState::from_log_weights(lw.iter().map(|x| x + c).collect(), 10).unwrap();
        for (x, y) in a.weights().iter().zip(b.weights()) {
            assert!((x - y).abs() < 1e-12);
        }
    }
    assert!(matches!(PosteriorState::from_log_weights(vec![f64::NEG_INFINITY; 3], 1), Err(Error::DegeneratePosterior)));
}

#[test]
fn zero_likelihood_points_get_zero_weight() {
    let ss = StateSpace::integers(2).unwrap();
    let fam = ChainFamily::custom("closed_two_state", ss, vec![Interval { lo: 0.0, hi: 1.0 }; 2], |x| {
        vec![1.0 - x[0], x[0], x[1], 1.0 - x[1]]
    })
    .unwrap();
    let prior =
        PriorSpec::new(&fam, vec![theta(&[0.0, 0.5]), theta(&[0.3, 0.5]), theta(&[0.6, 0.5])], vec![0.5, 0.25, 0.25])
            .unwrap();
    let traj = Trajectory::new(vec![0, 0, 1, 0], 2, 0, 0).unwrap();
    let post = grid_posterior(&prior, &fam, &traj, InitialTerm::Ancillary).unwrap();
    assert_eq!(post.weights()[0], 0.0);
    assert!(log_likelihood(&fam, &theta(&[0.0, 0.5]), &traj).unwrap().is_infinite());
    // all support excluded
    let only = PriorSpec::point_mass(&fam, theta(&[0.0, 0.5])).unwrap();
    assert!(matches!(grid_posterior(&only, &fam, &traj, InitialTerm::Ancillary), Err(Error::DegeneratePosterior)));
}

#[test]
fn posterior_mean_in_grid_hull() {
    let fam = two_state_on(0.2, 0.4);
    let prior = PriorSpec::on_box_grid(&fam, 5, PriorWeights::Uniform).unwrap();
    let m = two_state_matrix(0.9, 0.05);
    for rep in 0..10 {
        let traj = sample_trajectory(&m, &invariant_measure(&m).unwrap(), 300, &mut substream(43, rep)).unwrap();
        let mean =
            posterior_mean(&grid_posterior(&prior, &fam, &traj, InitialTerm::Ancillary).unwrap(), &prior).unwrap();
        assert!(mean.coords().iter().all(|&x| (0.2 - 1e-12..=0.4 + 1e-12).contains(&x)));
    }
}

#[test]
fn posterior_depends_on_counts_only() {
    let fam = two_state_on(0.05, 0.95);
    let prior = PriorSpec::on_box_grid(&fam, 11, PriorWeights::Uniform).unwrap();
    let a = Trajectory::new(vec![0, 0, 1, 1, 0, 1, 0], 2, 0, 0).unwrap();
    let b = Trajectory::new(vec![0, 1, 0, 0, 1, 1, 0], 2, 0, 0).unwrap();
    for init in [InitialTerm::Ancillary, InitialTerm::Stationary] {
        let pa = grid_posterior(&prior, &fam, &a, init).unwrap();
        let pb = grid_posterior(&prior, &fam, &b, init).unwrap();
        let bits = |p: &PosteriorState| p.weights().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&pa), bits(&pb));
    }
}

#[test]
fn posterior_concentrates_at_truth() {
    let fam = two_state_on(0.05, 0.95);
    let prior = PriorSpec::on_box_grid(&fam, 21, PriorWeights::Uniform).unwrap();
    let model = GridModel::new(&fam, prior.clone(), InitialTerm::Ancillary).unwrap();
    let reps = 50;
    let mut hits = 0;
    for rep in 0..reps {
        let mut stream = substream(44, rep);
        let g = stream.categorical(prior.weights());
        let th = &prior.grid()[g];
        let m = fam.transition_matrix(th).unwrap();
        let traj = sample_trajectory(&m, &invariant_measure(&m).unwrap(), 100_000, &mut stream).unwrap();
        let mean = posterior_mean(&model.posterior(&traj).unwrap(), &prior).unwrap();
        if mean.max_abs_diff(th) < 0.05 {
            hits += 1;
        }
    }
    assert!(hits * 10 >= reps * 9, "{hits}/{reps}");
}

#[test]
fn posterior_mean_is_a_martingale() {
    let fam = two_state_on(0.05, 0.95);
    let prior = PriorSpec::on_box_grid(&fam, 11, PriorWeights::Uniform).unwrap();
    let stat = martingale_gap(&fam, &prior, 100, 1000, 400, 45).unwrap();
    assert_eq!(stat.replications + stat.skipped, 400);
    assert!(stat.within(3.0), "{stat:?}");
}

#[test]
fn stationary_term_needs_initial_state() {
    let fam = two_state_on(0.05, 0.95);
    let prior = PriorSpec::on_box_grid(&fam, 3, PriorWeights::Uniform).unwrap();
    let model = GridModel::new(&fam, prior, InitialTerm::Stationary).unwrap();
    let counts = pair_counts(&Trajectory::new(vec![0, 1], 2, 0, 0).unwrap(), 2).unwrap();
    assert!(model.posterior_from_counts(&counts, None).is_err());
    assert!(model.posterior_from_counts(&counts, Some(0)).is_ok());
}
