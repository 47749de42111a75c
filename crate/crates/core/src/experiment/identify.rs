use rayon::prelude::*;

use crate::chain_model::{is_ergodic_structure, ChainFamily, ParamPoint, TransitionMatrix};
use crate::empirical::{sup_discrepancy, PairDF};
use crate::error::Result;
use crate::stationary::invariant_pair_df;

/// Grid pairs closer than this (in either gap) are reported as violations.
pub const VIOLATION_THRESHOLD: f64 = 1e-12;

/// A pair of grid points the checker could not tell apart.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub first: usize,
    pub second: usize,
    pub matrix_gap: f64,
    pub df_gap: f64,
}

/// Injectivity of `θ ↦ P^θ` and `θ ↦ F̂^θ` at grid resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentifiabilityReport {
    pub grid_size: usize,
    /// Smallest positive spacing of the grid along each coordinate.
    pub resolution: Vec<f64>,
    /// Minimum over distinct ergodic pairs of the max-entry matrix gap.
    pub min_matrix_gap: Option<f64>,
    /// Minimum over distinct ergodic pairs of the pair-d.f. sup gap.
    pub min_df_gap: Option<f64>,
    pub violations: Vec<Violation>,
    /// Grid indices whose matrix is not irreducible and aperiodic; they are
    /// left out of the pair comparison.
    pub non_ergodic: Vec<usize>,
}

impl IdentifiabilityReport {
    /// False when some grid point had to be excluded.
    pub fn complete(&self) -> bool {
        self.non_ergodic.is_empty()
    }

    pub fn is_identifiable(&self) -> bool {
        self.violations.is_empty()
    }
}

struct PairStats {
    min_matrix: f64,
    min_df: f64,
    violations: Vec<Violation>,
}

pub fn check_identifiability(family: &ChainFamily, grid: &[ParamPoint]) -> Result<IdentifiabilityReport> {
    let matrices: Vec<TransitionMatrix> = grid.iter().map(|th| family.transition_matrix(th)).collect::<Result<_>>()?;

    let mut non_ergodic = Vec::new();
    let mut usable: Vec<(usize, &TransitionMatrix, PairDF)> = Vec::new();
    for (i, p) in matrices.iter().enumerate() {
        if is_ergodic_structure(p) {
            usable.push((i, p, invariant_pair_df(p)?));
        } else {
            non_ergodic.push(i);
        }
    }

    let per_row: Vec<PairStats> = (0..usable.len())
        .into_par_iter()
        .map(|a| {
            let (i, pi, fi) = &usable[a];
            let mut s = PairStats { min_matrix: f64::INFINITY, min_df: f64::INFINITY, violations: Vec::new() };
            for (j, pj, fj) in &usable[a + 1..] {
                let matrix_gap = pi.max_abs_diff(pj);
                let df_gap = sup_discrepancy(fi, fj).expect("same family state space");
                s.min_matrix = s.min_matrix.min(matrix_gap);
                s.min_df = s.min_df.min(df_gap);
                if matrix_gap < VIOLATION_THRESHOLD || df_gap < VIOLATION_THRESHOLD {
                    s.violations.push(Violation { first: *i, second: *j, matrix_gap, df_gap });
                }
            }
            s
        })
        .collect();

    let min_matrix = per_row.iter().map(|s| s.min_matrix).fold(f64::INFINITY, f64::min);
    let min_df = per_row.iter().map(|s| s.min_df).fold(f64::INFINITY, f64::min);
    let violations = per_row.into_iter().flat_map(|s| s.violations).collect();
    let finite = |x: f64| x.is_finite().then_some(x);

    Ok(IdentifiabilityReport {
        grid_size: grid.len(),
        resolution: grid_resolution(grid),
        min_matrix_gap: finite(min_matrix),
        min_df_gap: finite(min_df),
        violations,
        non_ergodic,
    })
}

fn grid_resolution(grid: &[ParamPoint]) -> Vec<f64> {
    let Some(first) = grid.first() else { return Vec::new() };
    (0..first.dim())
        .map(|k| {
            let mut xs: Vec<f64> = grid.iter().map(|p| p.coords()[k]).collect();
            xs.sort_by(f64::total_cmp);
            xs.dedup();
            xs.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
        })
        .map(|r| if r.is_finite() { r } else { 0.0 })
        .collect()
}
