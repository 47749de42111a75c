//! Seeded trajectory simulation.
//!
//! # Random streams
//!
//! Every replication owns an [`RngStream`] derived statelessly from
//! `(master_seed, replication_id)`:
//!
//! ```text
//! z       = master_seed + (replication_id + 1) * 0x9E3779B97F4A7C15   (wrapping u64)
//! z       = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//! z       = (z ^ (z >> 27)) * 0x94D049BB133111EB
//! derived = z ^ (z >> 31)
//! ```
//!
//! `derived` seeds a xoshiro256++ generator, whose four state words are the
//! first four outputs of SplitMix64 started at `derived` (the reference
//! seeding procedure). A uniform draw is `(next_u64() >> 11) * 2^-53`, so it
//! lies in `[0, 1)`.
//!
//! # Sampling
//!
//! Every draw from a discrete law uses exactly one uniform and the inverse
//! CDF: the sampled index is the first `j` with `u < Σ_{k ≤ j} w_k`. A
//! trajectory of `n` transitions consumes `n + 1` uniforms, the first one for
//! `X_0`.

use std::io::{BufRead, Write};

use rand_xoshiro::rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::chain_model::TransitionMatrix;
use crate::error::{Error, Result};
use crate::stationary::Dist;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix_finalize(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replication `replication_id` under `master_seed`.
pub fn derive_seed(master_seed: u64, replication_id: u64) -> u64 {
    splitmix_finalize(master_seed.wrapping_add(replication_id.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

/// A single-owner random stream for one replication.
#[derive(Debug, Clone)]
pub struct RngStream {
    rng: Xoshiro256PlusPlus,
    master_seed: u64,
    replication_id: u64,
}

/// Stream for `(master_seed, replication_id)`; independent of creation order.
pub fn substream(master_seed: u64, replication_id: u64) -> RngStream {
    RngStream {
        rng: Xoshiro256PlusPlus::seed_from_u64(derive_seed(master_seed, replication_id)),
        master_seed,
        replication_id,
    }
}

impl RngStream {
    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Index drawn from `weights` (need not be normalized) by inverse CDF.
    pub fn categorical(&mut self, weights: &[f64]) -> usize {
        let total: f64 = weights.iter().sum();
        let u = self.uniform() * total;
        inverse_cdf(weights, u)
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn replication_id(&self) -> u64 {
        self.replication_id
    }
}

fn inverse_cdf(weights: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (j, &w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return j;
        }
    }
    // u landed in the round-off gap above the last partial sum
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(weights.len() - 1)
}

/// An observed path `X_0, ..., X_n` with its seed lineage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    states: Vec<usize>,
    master_seed: u64,
    replication_id: u64,
}

impl Trajectory {
    pub fn new(states: Vec<usize>, size: usize, master_seed: u64, replication_id: u64) -> Result<Self> {
        if states.len() < 2 {
            return Err(Error::InvalidArgument("a trajectory needs at least one transition".into()));
        }
        if let Some(bad) = states.iter().find(|&&s| s >= size) {
            return Err(Error::InvalidArgument(format!("state {bad} out of range for {size} states")));
        }
        Ok(Trajectory { states, master_seed, replication_id })
    }

    pub fn states(&self) -> &[usize] {
        &self.states
    }

    /// Number of transitions `n`.
    pub fn transitions(&self) -> usize {
        self.states.len() - 1
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn replication_id(&self) -> u64 {
        self.replication_id
    }

    /// Plain text: a `#` header line with seed metadata, then one state per line.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# master_seed={} replication_id={}", self.master_seed, self.replication_id)?;
        for s in &self.states {
            writeln!(w, "{s}")?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R, size: usize) -> Result<Self> {
        let mut master_seed = 0;
        let mut replication_id = 0;
        let mut states = Vec::new();
        for line in r.lines() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(meta) = line.strip_prefix('#') {
                for kv in meta.split_whitespace() {
                    match kv.split_once('=') {
                        Some(("master_seed", v)) => master_seed = parse_field(v)?,
                        Some(("replication_id", v)) => replication_id = parse_field(v)?,
                        _ => {}
                    }
                }
                continue;
            }
            states.push(parse_field(line)?);
        }
        Trajectory::new(states, size, master_seed, replication_id)
    }
}

fn parse_field<T: std::str::FromStr>(v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::InvalidArgument(format!("cannot parse `{v}` in trajectory file")))
}

/// Precomputed inverse-CDF tables for a transition matrix.
#[derive(Debug, Clone)]
pub(crate) struct RowSampler<'a> {
    p: &'a TransitionMatrix,
}

impl<'a> RowSampler<'a> {
    pub(crate) fn new(p: &'a TransitionMatrix) -> Self {
        RowSampler { p }
    }

    #[inline]
    pub(crate) fn step(&self, from: usize, stream: &mut RngStream) -> usize {
        inverse_cdf(self.p.row(from), stream.uniform())
    }
}

/// Simulates `n` transitions: `X_0 ~ μ0`, then one uniform per step through
/// the inverse CDF of the current row.
pub fn sample_trajectory(p: &TransitionMatrix, mu0: &Dist, n: usize, stream: &mut RngStream) -> Result<Trajectory> {
    if n < 1 {
        return Err(Error::InvalidArgument("n must be >= 1".into()));
    }
    if mu0.len() != p.size() {
        return Err(Error::MismatchedStateSpace);
    }
    let sampler = RowSampler::new(p);
    let mut states = Vec::with_capacity(n + 1);
    let mut x = inverse_cdf(mu0.weights(), stream.uniform());
    states.push(x);
    for _ in 0..n {
        x = sampler.step(x, stream);
        states.push(x);
    }
    Ok(Trajectory { states, master_seed: stream.master_seed(), replication_id: stream.replication_id() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible() {
        let mut a = substream(42, 0);
        let mut b = substream(42, 0);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn creation_order_is_irrelevant() {
        let first: Vec<u64> = {
            let mut s = substream(7, 3);
            (0..5).map(|_| s.next_u64()).collect()
        };
        let _ = substream(7, 0);
        let _ = substream(7, 1);
        let mut s = substream(7, 3);
        let again: Vec<u64> = (0..5).map(|_| s.next_u64()).collect();
        assert_eq!(first, again);
    }

    #[test]
    fn seed_derivation_is_pinned() {
        // SplitMix64 finalizer of 0 + 1 * golden gamma: the first SplitMix64
        // output for seed 0.
        assert_eq!(derive_seed(0, 0), 0xE220_A839_7B1D_CDAF);
    }

    #[test]
    fn uniform_range() {
        let mut s = substream(1, 1);
        for _ in 0..10_000 {
            let u = s.uniform();
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn deterministic_alternation() {
        let p = TransitionMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let t = sample_trajectory(&p, &Dist::delta(2, 0).unwrap(), 4, &mut substream(9, 0)).unwrap();
        assert_eq!(t.states(), &[0, 1, 0, 1, 0]);
    }

    #[test]
    fn absorbing_identity() {
        let p = TransitionMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let t = sample_trajectory(&p, &Dist::delta(2, 1).unwrap(), 10, &mut substream(9, 0)).unwrap();
        assert_eq!(t.states(), &[1; 11]);
    }

    #[test]
    fn zero_length_rejected() {
        let p = TransitionMatrix::from_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        assert!(sample_trajectory(&p, &Dist::uniform(2), 0, &mut substream(0, 0)).is_err());
    }

    #[test]
    fn inverse_cdf_skips_zero_mass() {
        assert_eq!(inverse_cdf(&[0.0, 0.5, 0.5], 0.0), 1);
        assert_eq!(inverse_cdf(&[0.3, 0.7, 0.0], 0.999_999_999_999), 1);
        assert_eq!(inverse_cdf(&[0.3, 0.7, 0.0], 1.0), 1);
    }

    #[test]
    fn text_round_trip() {
        let t = Trajectory::new(vec![0, 2, 1, 1], 3, 11, 4).unwrap();
        let mut buf = Vec::new();
        t.write_text(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# master_seed=11 replication_id=4\n0\n2\n"));
        assert_eq!(Trajectory::read_text(&buf[..], 3).unwrap(), t);
        assert!(Trajectory::read_text(&b"0\n5\n"[..], 3).is_err());
    }
}
