//! Finite-state parameterized Markov chain families.
//!
//! A [`ChainFamily`] maps a parameter point θ from a box domain to a
//! row-stochastic [`TransitionMatrix`]. Three families are built in:
//!
//! | name          | θ                         | matrix                                   |
//! |---------------|---------------------------|------------------------------------------|
//! | `two_state`   | `(p, q)`                  | `[[1-p, p], [q, 1-q]]`                   |
//! | `ring_walk`   | `(r)`                     | step right w.p. `r`, left w.p. `1-r`     |
//! | `full_matrix` | off-diagonals, row-major  | diagonal is the row remainder            |
//!
//! Custom families (used e.g. to exercise the identifiability checker with a
//! deliberately aliased parameterization) can be built with
//! [`ChainFamily::custom`].

use std::collections::VecDeque;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row sums of a transition matrix must be within this distance of 1.
pub const ROW_SUM_TOLERANCE: f64 = 1e-12;

/// Smallest admissible entry of a `full_matrix` family member.
pub const FULL_MATRIX_MIN_ENTRY: f64 = 1e-6;

/// An ordered finite state space embedded in the real line.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    labels: Vec<f64>,
}

impl StateSpace {
    pub fn new(labels: Vec<f64>) -> Result<Self> {
        if labels.len() < 2 {
            return Err(Error::InvalidStateSpace(format!("need at least 2 states, got {}", labels.len())));
        }
        if labels.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidStateSpace("labels must be finite".into()));
        }
        if labels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidStateSpace("labels must be strictly increasing".into()));
        }
        Ok(StateSpace { labels })
    }

    /// The states `0, 1, ..., size - 1`.
    pub fn integers(size: usize) -> Result<Self> {
        Self::new((0..size).map(|i| i as f64).collect())
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    /// Number of states whose label is `<= x`.
    pub fn count_at_or_below(&self, x: f64) -> usize {
        self.labels.partition_point(|&l| l <= x)
    }
}

/// A point θ of the parameter domain. Coordinates are always finite.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ParamPoint(Vec<f64>);

impl ParamPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidArgument("parameter point has no coordinates".into()));
        }
        if let Some(bad) = coords.iter().find(|x| !x.is_finite()) {
            return Err(Error::OutsideDomain(format!("non-finite coordinate {bad}")));
        }
        Ok(ParamPoint(coords))
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Max-norm distance to another point of the same dimension.
    pub fn max_abs_diff(&self, other: &ParamPoint) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

impl<'de> Deserialize<'de> for ParamPoint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let coords = Vec::<f64>::deserialize(d)?;
        ParamPoint::new(coords).map_err(serde::de::Error::custom)
    }
}

/// A row-stochastic matrix over a finite state space, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    state_space: StateSpace,
    entries: Vec<f64>,
}

impl TransitionMatrix {
    pub fn new(state_space: StateSpace, entries: Vec<f64>) -> Result<Self> {
        let n = state_space.size();
        if entries.len() != n * n {
            return Err(Error::InvalidMatrix(format!(
                "expected {} entries for {n} states, got {}",
                n * n,
                entries.len()
            )));
        }
        for (k, &p) in entries.iter().enumerate() {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidMatrix(format!("entry ({}, {}) = {p} outside [0, 1]", k / n, k % n)));
            }
        }
        for (i, row) in entries.chunks_exact(n).enumerate() {
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::InvalidMatrix(format!("row {i} sums to {s}")));
            }
        }
        Ok(TransitionMatrix { state_space, entries })
    }

    /// Builds a matrix over the integer state space `0..rows.len()`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidMatrix("matrix is not square".into()));
        }
        Self::new(StateSpace::integers(n)?, rows.concat())
    }

    pub fn identity(state_space: StateSpace) -> Self {
        let n = state_space.size();
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1.0;
        }
        TransitionMatrix { state_space, entries }
    }

    pub fn size(&self) -> usize {
        self.state_space.size()
    }

    pub fn state_space(&self) -> &StateSpace {
        &self.state_space
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.size() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.size();
        &self.entries[i * n..(i + 1) * n]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.entries.chunks_exact(self.size())
    }

    /// Row vector times matrix: `v P`.
    pub fn left_multiply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.size();
        let mut out = vec![0.0; n];
        for (vi, row) in v.iter().zip(self.rows()) {
            if *vi == 0.0 {
                continue;
            }
            for (o, p) in out.iter_mut().zip(row) {
                *o += vi * p;
            }
        }
        out
    }

    /// Largest entrywise absolute difference.
    pub fn max_abs_diff(&self, other: &TransitionMatrix) -> f64 {
        self.entries.iter().zip(&other.entries).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// A closed coordinate interval of a family's box domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl From<[f64; 2]> for Interval {
    fn from([lo, hi]: [f64; 2]) -> Self {
        Interval { lo, hi }
    }
}

impl From<Interval> for [f64; 2] {
    fn from(iv: Interval) -> Self {
        [iv.lo, iv.hi]
    }
}

/// Config fragment naming a built-in family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<Vec<Interval>>,
}

type Builder = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

#[derive(Clone)]
enum FamilyKind {
    TwoState,
    RingWalk,
    FullMatrix,
    Custom(Builder),
}

impl fmt::Debug for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyKind::TwoState => f.write_str("TwoState"),
            FamilyKind::RingWalk => f.write_str("RingWalk"),
            FamilyKind::FullMatrix => f.write_str("FullMatrix"),
            FamilyKind::Custom(_) => f.write_str("Custom"),
        }
    }
}

/// A parameterized family `θ ↦ P^θ` over a fixed state space.
#[derive(Debug, Clone)]
pub struct ChainFamily {
    name: String,
    kind: FamilyKind,
    domain: Vec<Interval>,
    state_space: StateSpace,
}

/// Instantiates a built-in family from its config fragment.
pub fn build_family(spec: &FamilySpec) -> Result<ChainFamily> {
    let (kind, size, dim) = match spec.family.as_str() {
        "two_state" => {
            if let Some(s) = spec.size {
                if s != 2 {
                    return Err(Error::InvalidDomain(format!("two_state has size 2, got {s}")));
                }
            }
            (FamilyKind::TwoState, 2, 2)
        }
        "ring_walk" => {
            let s = required_size(spec)?;
            (FamilyKind::RingWalk, s, 1)
        }
        "full_matrix" => {
            let s = required_size(spec)?;
            (FamilyKind::FullMatrix, s, s * (s - 1))
        }
        other => return Err(Error::UnknownFamily(other.to_string())),
    };

    let domain = match &spec.domain {
        Some(d) => d.clone(),
        None => vec![Interval { lo: 0.0, hi: 1.0 }; dim],
    };
    if domain.len() != dim {
        return Err(Error::InvalidDomain(format!(
            "{} expects {dim} domain intervals, got {}",
            spec.family,
            domain.len()
        )));
    }
    for (k, iv) in domain.iter().enumerate() {
        if !(iv.lo.is_finite() && iv.hi.is_finite()) || iv.lo > iv.hi {
            return Err(Error::InvalidDomain(format!("interval {k} is [{}, {}]", iv.lo, iv.hi)));
        }
        if iv.lo < 0.0 || iv.hi > 1.0 {
            return Err(Error::InvalidDomain(format!(
                "interval {k} = [{}, {}] leaves the probability range (0, 1)",
                iv.lo, iv.hi
            )));
        }
    }

    let family = ChainFamily { name: spec.family.clone(), kind, domain, state_space: StateSpace::integers(size)? };
    if !family.domain_has_valid_point() {
        return Err(Error::InvalidDomain(format!("{} domain contains no admissible parameter", family.name)));
    }
    Ok(family)
}

fn required_size(spec: &FamilySpec) -> Result<usize> {
    match spec.size {
        Some(s) if s >= 2 => Ok(s),
        Some(s) => Err(Error::InvalidDomain(format!("{} needs size >= 2, got {s}", spec.family))),
        None => Err(Error::InvalidDomain(format!("{} requires `size`", spec.family))),
    }
}

impl ChainFamily {
    /// A family with a user-supplied builder over the box `domain`. The
    /// builder returns row-major entries; they are validated on every call.
    pub fn custom<F>(name: &str, state_space: StateSpace, domain: Vec<Interval>, builder: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        if domain.is_empty() {
            return Err(Error::InvalidDomain("custom family needs at least one coordinate".into()));
        }
        if domain.iter().any(|iv| !(iv.lo.is_finite() && iv.hi.is_finite()) || iv.lo > iv.hi) {
            return Err(Error::InvalidDomain("custom family has a malformed interval".into()));
        }
        Ok(ChainFamily { name: name.to_string(), kind: FamilyKind::Custom(Arc::new(builder)), domain, state_space })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> &[Interval] {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.len()
    }

    pub fn state_space(&self) -> &StateSpace {
        &self.state_space
    }

    /// Whether θ lies in the box and in the family's validity region.
    pub fn contains(&self, theta: &ParamPoint) -> bool {
        let x = theta.coords();
        if x.len() != self.dim() {
            return false;
        }
        if !x.iter().zip(&self.domain).all(|(v, iv)| iv.lo <= *v && *v <= iv.hi) {
            return false;
        }
        match self.kind {
            FamilyKind::TwoState | FamilyKind::RingWalk => x.iter().all(|&v| v > 0.0 && v < 1.0),
            FamilyKind::FullMatrix => {
                let n = self.state_space.size();
                x.iter().all(|&v| v >= FULL_MATRIX_MIN_ENTRY)
                    && x.chunks_exact(n - 1).all(|row| 1.0 - row.iter().sum::<f64>() >= FULL_MATRIX_MIN_ENTRY)
            }
            FamilyKind::Custom(_) => true,
        }
    }

    fn domain_has_valid_point(&self) -> bool {
        match self.kind {
            FamilyKind::TwoState | FamilyKind::RingWalk => self.domain.iter().all(|iv| iv.hi > 0.0 && iv.lo < 1.0),
            FamilyKind::FullMatrix => {
                let n = self.state_space.size();
                let corner: Vec<f64> = self.domain.iter().map(|iv| iv.lo.max(FULL_MATRIX_MIN_ENTRY)).collect();
                self.domain.iter().all(|iv| iv.hi >= FULL_MATRIX_MIN_ENTRY)
                    && corner.chunks_exact(n - 1).all(|row| 1.0 - row.iter().sum::<f64>() >= FULL_MATRIX_MIN_ENTRY)
            }
            FamilyKind::Custom(_) => true,
        }
    }

    /// `P^θ`. Deterministic: equal θ gives a bit-identical matrix.
    pub fn transition_matrix(&self, theta: &ParamPoint) -> Result<TransitionMatrix> {
        if !self.contains(theta) {
            return Err(Error::OutsideDomain(format!("{:?} is not in the {} domain", theta.coords(), self.name)));
        }
        let x = theta.coords();
        let n = self.state_space.size();
        let entries = match &self.kind {
            FamilyKind::TwoState => {
                let (p, q) = (x[0], x[1]);
                vec![1.0 - p, p, q, 1.0 - q]
            }
            FamilyKind::RingWalk => {
                let r = x[0];
                let mut e = vec![0.0; n * n];
                for i in 0..n {
                    e[i * n + (i + 1) % n] += r;
                    e[i * n + (i + n - 1) % n] += 1.0 - r;
                }
                e
            }
            FamilyKind::FullMatrix => {
                let mut e = vec![0.0; n * n];
                for (i, off) in x.chunks_exact(n - 1).enumerate() {
                    let mut it = off.iter();
                    for j in (0..n).filter(|&j| j != i) {
                        e[i * n + j] = *it.next().expect("row has n-1 off-diagonals");
                    }
                    e[i * n + i] = 1.0 - off.iter().sum::<f64>();
                }
                e
            }
            FamilyKind::Custom(build) => build(x),
        };
        TransitionMatrix::new(self.state_space.clone(), entries)
    }

    /// Tensor grid with `points_per_axis` equally spaced values per box
    /// coordinate (endpoints included), keeping only admissible points.
    pub fn box_grid(&self, points_per_axis: usize) -> Result<Vec<ParamPoint>> {
        if points_per_axis == 0 {
            return Err(Error::InvalidArgument("points_per_axis must be >= 1".into()));
        }
        let axes: Vec<Vec<f64>> = self
            .domain
            .iter()
            .map(|iv| {
                if points_per_axis == 1 {
                    vec![0.5 * (iv.lo + iv.hi)]
                } else {
                    let step = (iv.hi - iv.lo) / (points_per_axis - 1) as f64;
                    (0..points_per_axis).map(|k| iv.lo + step * k as f64).collect()
                }
            })
            .collect();
        let total = axes.iter().try_fold(1usize, |acc, a| acc.checked_mul(a.len()));
        match total {
            Some(t) if t <= 50_000_000 => {}
            _ => return Err(Error::InvalidArgument("parameter grid is too large".into())),
        }

        let mut grid = Vec::new();
        let mut idx = vec![0usize; axes.len()];
        loop {
            let coords: Vec<f64> = idx.iter().zip(&axes).map(|(&k, a)| a[k]).collect();
            let theta = ParamPoint::new(coords)?;
            if self.contains(&theta) {
                grid.push(theta);
            }
            // odometer, last coordinate fastest
            let mut d = axes.len();
            loop {
                if d == 0 {
                    return Ok(grid);
                }
                d -= 1;
                idx[d] += 1;
                if idx[d] < axes[d].len() {
                    break;
                }
                idx[d] = 0;
            }
        }
    }
}

/// Structural ergodicity: the positive-entry graph is strongly connected and
/// the gcd of its cycle lengths is 1.
pub fn is_ergodic_structure(p: &TransitionMatrix) -> bool {
    let n = p.size();
    let succ: Vec<Vec<usize>> = (0..n).map(|i| (0..n).filter(|&j| p.get(i, j) > 0.0).collect()).collect();
    let mut pred = vec![Vec::new(); n];
    for (i, s) in succ.iter().enumerate() {
        for &j in s {
            pred[j].push(i);
        }
    }

    let fwd = bfs_levels(&succ);
    if fwd.iter().any(Option::is_none) || bfs_levels(&pred).iter().any(Option::is_none) {
        return false;
    }

    // Every edge u -> v closes a cycle-length combination level(u) + 1 - level(v);
    // the period is the gcd over all edges.
    let mut period = 0usize;
    for (u, s) in succ.iter().enumerate() {
        let lu = fwd[u].unwrap();
        for &v in s {
            let lv = fwd[v].unwrap();
            period = gcd(period, (lu + 1).abs_diff(lv));
        }
    }
    period == 1
}

fn bfs_levels(adj: &[Vec<usize>]) -> Vec<Option<usize>> {
    let mut level = vec![None; adj.len()];
    level[0] = Some(0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(u) = queue.pop_front() {
        let next = level[u].unwrap() + 1;
        for &v in &adj[u] {
            if level[v].is_none() {
                level[v] = Some(next);
                queue.push_back(v);
            }
        }
    }
    level
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Transition law of the pair chain `Y_n = (X_n, X_{n+1})`.
///
/// Pair `(i, j)` is state `i * size + j`; the only moves are
/// `(i, j) -> (j, k)` with probability `p_{jk}`.
pub fn pair_transition(p: &TransitionMatrix) -> TransitionMatrix {
    let n = p.size();
    let m = n * n;
    let mut entries = vec![0.0; m * m];
    for i in 0..n {
        for j in 0..n {
            let from = i * n + j;
            for k in 0..n {
                entries[from * m + j * n + k] = p.get(j, k);
            }
        }
    }
    let state_space = StateSpace::integers(m).expect("pair space has >= 4 states");
    TransitionMatrix { state_space, entries }
}
