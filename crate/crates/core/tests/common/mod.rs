#![allow(dead_code)]

use chain_bayes::chain_model::{build_family, ChainFamily, FamilySpec, Interval, ParamPoint, TransitionMatrix};
use chain_bayes::metrics::SupportedMeasure;
use chain_bayes::sampling::RngStream;

pub fn theta(v: &[f64]) -> ParamPoint {
    ParamPoint::new(v.to_vec()).unwrap()
}

pub fn two_state() -> ChainFamily {
    build_family(&FamilySpec { family: "two_state".into(), size: None, domain: None }).unwrap()
}

pub fn two_state_on(lo: f64, hi: f64) -> ChainFamily {
    build_family(&FamilySpec { family: "two_state".into(), size: None, domain: Some(vec![Interval { lo, hi }; 2]) })
        .unwrap()
}

pub fn two_state_matrix(p: f64, q: f64) -> TransitionMatrix {
    TransitionMatrix::from_rows(&[vec![1.0 - p, p], vec![q, 1.0 - q]]).unwrap()
}

/// Random row-stochastic matrix with strictly positive entries.
pub fn random_positive_matrix(size: usize, rng: &mut RngStream) -> TransitionMatrix {
    let rows: Vec<Vec<f64>> = (0..size)
        .map(|_| {
            let raw: Vec<f64> = (0..size).map(|_| 0.05 + rng.uniform()).collect();
            let s: f64 = raw.iter().sum();
            let mut row: Vec<f64> = raw.iter().map(|x| x / s).collect();
            // put the rounding remainder on the largest entry
            let k = (0..size).max_by(|&a, &b| row[a].total_cmp(&row[b])).unwrap();
            let rest: f64 = row.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, x)| x).sum();
            row[k] = 1.0 - rest;
            row
        })
        .collect();
    TransitionMatrix::from_rows(&rows).unwrap()
}

/// Random sparse ergodic matrix: a cycle with one self-loop plus random extra
/// edges, so some entries are exactly zero.
pub fn random_sparse_ergodic(size: usize, rng: &mut RngStream) -> TransitionMatrix {
    let rows: Vec<Vec<f64>> = (0..size)
        .map(|i| {
            let mut raw = vec![0.0; size];
            raw[(i + 1) % size] = 0.1 + rng.uniform();
            if i == 0 {
                raw[0] = 0.1 + rng.uniform();
            }
            for x in raw.iter_mut() {
                if rng.uniform() < 0.3 {
                    *x += rng.uniform();
                }
            }
            let s: f64 = raw.iter().sum();
            let mut row: Vec<f64> = raw.iter().map(|x| x / s).collect();
            let k = (0..size).max_by(|&a, &b| row[a].total_cmp(&row[b])).unwrap();
            let rest: f64 = row.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, x)| x).sum();
            row[k] = 1.0 - rest;
            row
        })
        .collect();
    TransitionMatrix::from_rows(&rows).unwrap()
}

pub fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Support, first weights, second weights on the union of both supports.
pub type Merged = (Vec<Vec<f64>>, Vec<f64>, Vec<f64>);

pub fn merge_supports(a: &SupportedMeasure, b: &SupportedMeasure) -> Merged {
    let mut pts: Vec<Vec<f64>> = a.points().to_vec();
    let mut wa = a.weights().to_vec();
    let mut wb = vec![0.0; pts.len()];
    for (p, w) in b.points().iter().zip(b.weights()) {
        if let Some(k) = pts.iter().position(|q| q == p) {
            wb[k] += w;
        } else {
            pts.push(p.clone());
            wa.push(0.0);
            wb.push(*w);
        }
    }
    (pts, wa, wb)
}

/// Direct check of `μ(A) ≤ ν(A_α) + α` and the symmetric inequality over
/// every subset, with `A_α` built point by point.
pub fn oracle_feasible(m: &Merged, alpha: f64) -> bool {
    let (pts, wa, wb) = m;
    let k = pts.len();
    let dist =
        |i: usize, j: usize| -> f64 { pts[i].iter().zip(&pts[j]).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt() };
    for mask in 1u32..(1 << k) {
        let (mut ma, mut na) = (0.0, 0.0);
        let (mut me, mut ne) = (0.0, 0.0);
        for t in 0..k {
            if mask & (1 << t) != 0 {
                ma += wa[t];
                na += wb[t];
            }
            if (0..k).any(|s| mask & (1 << s) != 0 && dist(s, t) < alpha) {
                me += wa[t];
                ne += wb[t];
            }
        }
        if ma > ne + alpha + 1e-15 || na > me + alpha + 1e-15 {
            return false;
        }
    }
    true
}

/// Prokhorov distance by locating the first feasible point of the grid
/// `α = i · 10⁻⁴` on `(0, 1]`, then bisecting inside that cell.
pub fn oracle_prokhorov(a: &SupportedMeasure, b: &SupportedMeasure) -> f64 {
    let m = merge_supports(a, b);
    const STEPS: usize = 10_000;
    let step = 1.0 / STEPS as f64;
    // feasibility is monotone in α, so the first feasible grid index can be
    // found by halving over indices
    let (mut lo_i, mut hi_i) = (0usize, STEPS);
    while hi_i - lo_i > 1 {
        let mid = (lo_i + hi_i) / 2;
        if oracle_feasible(&m, mid as f64 * step) {
            hi_i = mid;
        } else {
            lo_i = mid;
        }
    }
    let (mut lo, mut hi) = (lo_i as f64 * step, hi_i as f64 * step);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if mid > 0.0 && oracle_feasible(&m, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Random measure with up to `max_points` atoms on a coarse lattice, so
/// supports of two draws often overlap.
pub fn random_measure(rng: &mut RngStream, dim: usize, max_points: usize) -> SupportedMeasure {
    let k = 1 + (rng.uniform() * max_points as f64) as usize;
    let mut pts: Vec<Vec<f64>> = Vec::new();
    while pts.len() < k.min(max_points) {
        let p: Vec<f64> = (0..dim).map(|_| (rng.uniform() * 8.0).floor() / 10.0).collect();
        if !pts.contains(&p) {
            pts.push(p);
        }
    }
    let raw: Vec<f64> = pts.iter().map(|_| 0.05 + rng.uniform()).collect();
    let s: f64 = raw.iter().sum();
    let mut w: Vec<f64> = raw.iter().map(|x| x / s).collect();
    let rest: f64 = w[1..].iter().sum();
    w[0] = 1.0 - rest;
    SupportedMeasure::new(pts, w).unwrap()
}
