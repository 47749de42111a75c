mod common;

use chain_bayes::bayes::{grid_posterior, posterior_mean, InitialTerm, PriorSpec};
use chain_bayes::experiment::{
    check_identifiability, run_consistency_experiment, run_ergodicity_diagnostic, run_lln_experiment, run_martingale,
    write_consistency_csv, write_lln_csv, ExperimentConfig, RunOptions,
};
use chain_bayes::sampling::Trajectory;
use chain_bayes::stationary::Dist;
use common::*;

fn config(theta_mode: &str, schedule: &str, reps: usize, points: usize) -> ExperimentConfig {
    ExperimentConfig::from_json(&format!(
        r#"{{
            "family": {{"family": "two_state", "domain": [[0.05, 0.95], [0.05, 0.95]]}},
            "prior": {{"points_per_axis": {points}}},
            "n_schedule": {schedule},
            "replications": {reps},
            "master_seed": 7,
            "theta_mode": {theta_mode}
        }}"#
    ))
    .unwrap()
}

#[test]
fn two_point_prior_by_hand() {
    let fam = two_state();
    let prior = PriorSpec::new(&fam, vec![theta(&[0.2, 0.3]), theta(&[0.4, 0.3])], vec![0.5, 0.5]).unwrap();
    // transitions 0->0, 0->1, 1->0
    let traj = Trajectory::new(vec![0, 0, 1, 0], 2, 0, 0).unwrap();
    let post = grid_posterior(&prior, &fam, &traj, InitialTerm::Ancillary).unwrap();
    let (l1, l2) = (0.8 * 0.2 * 0.3, 0.6 * 0.4 * 0.3);
    let w1 = l1 / (l1 + l2);
    assert!((post.weights()[0] - w1).abs() < 1e-12);
    assert!((post.weights()[1] - (1.0 - w1)).abs() < 1e-12);
    let mean = posterior_mean(&post, &prior).unwrap();
    assert!((mean.coords()[0] - (0.2 * w1 + 0.4 * (1.0 - w1))).abs() < 1e-12);
    assert!((mean.coords()[1] - 0.3).abs() < 1e-12);
}

#[test]
fn fixed_grid_theta_is_recovered() {
    // 0.05 + 4 * 0.045 = 0.23 and 0.05 + 8 * 0.045 = 0.41 are grid points
    let cfg = config(r#"{"fixed": [[0.23, 0.41]]}"#, "[1000, 100000]", 4, 21);
    let rows = run_consistency_experiment(&cfg, RunOptions::default()).unwrap();
    for r in rows.iter().filter(|r| r.n == 100_000) {
        assert!(r.max_error().unwrap() < 0.05, "{r:?}");
    }
}

#[test]
fn off_grid_theta_within_one_step() {
    let step = 0.9 / 20.0;
    let cfg = config(r#"{"fixed": [[0.2, 0.3]]}"#, "[100000]", 4, 21);
    let rows = run_consistency_experiment(&cfg, RunOptions::default()).unwrap();
    for r in &rows {
        assert!(r.max_error().unwrap() <= step + 0.01, "{r:?}");
    }
}

#[test]
fn single_transition_lln() {
    let cfg = config(r#"{"fixed": [[0.2, 0.3]]}"#, "[1]", 3, 5);
    let rows = run_lln_experiment(&cfg, RunOptions::default()).unwrap();
    assert_eq!(rows.len(), 3);
    for r in &rows {
        assert!((0.0..=1.0).contains(&r.sup_discrepancy));
        assert!(r.theta_hat.is_none());
    }
}

#[test]
fn fair_coin_chain_lln() {
    let cfg = config(r#"{"fixed": [[0.5, 0.5]]}"#, "[100000]", 3, 5);
    for r in run_lln_experiment(&cfg, RunOptions::default()).unwrap() {
        assert!(r.sup_discrepancy < 0.01);
    }
}

#[test]
fn consistency_csv_is_byte_identical() {
    let cfg = config(r#""sampled""#, "[100, 1000]", 6, 7);
    let render = || {
        let mut buf = Vec::new();
        write_consistency_csv(&run_consistency_experiment(&cfg, RunOptions::default()).unwrap(), &mut buf).unwrap();
        buf
    };
    let a = render();
    let b = render();
    assert_eq!(a, b);
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 1 + 6 * 2);

    let mut other = cfg.clone();
    other.master_seed += 1;
    let mut c = Vec::new();
    write_consistency_csv(&run_consistency_experiment(&other, RunOptions::default()).unwrap(), &mut c).unwrap();
    assert_ne!(render(), c);
}

#[test]
fn lln_csv_rows_in_replication_order() {
    let cfg = config(r#"{"fixed": [[0.2, 0.3], [0.6, 0.1]]}"#, "[10, 100]", 4, 3);
    let rows = run_lln_experiment(&cfg, RunOptions::default()).unwrap();
    let keys: Vec<(usize, usize)> = rows.iter().map(|r| (r.replication, r.n)).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    assert_eq!(rows[2].theta, theta(&[0.6, 0.1]));
    let mut buf = Vec::new();
    write_lln_csv(&rows, &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 9);
}

#[test]
fn identifiability_on_two_state_grid() {
    let fam = two_state_on(0.1, 0.9);
    let grid = fam.box_grid(5).unwrap();
    let r = check_identifiability(&fam, &grid).unwrap();
    assert!(r.is_identifiable() && r.complete());
    assert_eq!(r.grid_size, 25);
    assert!((r.min_matrix_gap.unwrap() - 0.2).abs() < 1e-12);
    assert!(r.resolution.iter().all(|x| (x - 0.2).abs() < 1e-12));
    assert!(r.min_df_gap.unwrap() > 0.0);
}

#[test]
fn ergodicity_series() {
    let fam = two_state();
    let s = run_ergodicity_diagnostic(&fam, &theta(&[0.2, 0.3]), &Dist::delta(2, 0).unwrap(), 10).unwrap();
    assert_eq!(s.len(), 11);
    assert_eq!(s[0].0, 0);
    // |0.5|^t decay from |1 - 0.6| * 2
    for (t, tv) in s {
        assert!((tv - 0.8 * 0.5f64.powi(t as i32)).abs() < 1e-12);
    }
}

#[test]
fn martingale_from_config() {
    let cfg = config(r#""sampled""#, "[50, 500]", 300, 9);
    let stat = run_martingale(&cfg).unwrap();
    assert!(stat.within(3.0), "{stat:?}");
    let bad = config(r#""sampled""#, "[50, 500, 1000]", 10, 9);
    assert!(run_martingale(&bad).unwrap_err().is_config());
}

#[test]
fn config_errors_are_classified() {
    let unknown_field = r#"{"family": {"family": "two_state"}, "n_schedule": [10], "replications": 1,
        "master_seed": 0, "theta_mode": "sampled", "extra": 1}"#;
    assert!(ExperimentConfig::from_json(unknown_field).unwrap_err().is_config());
    let unknown_family = r#"{"family": {"family": "nope"}, "prior": {"points_per_axis": 3}, "n_schedule": [10],
        "replications": 1, "master_seed": 0, "theta_mode": "sampled"}"#;
    let cfg = ExperimentConfig::from_json(unknown_family).unwrap();
    assert!(run_lln_experiment(&cfg, RunOptions::default()).unwrap_err().is_config());
    let decreasing = r#"{"family": {"family": "two_state"}, "n_schedule": [10, 5], "replications": 1,
        "master_seed": 0, "theta_mode": "sampled"}"#;
    assert!(ExperimentConfig::from_json(decreasing).unwrap_err().is_config());
}
