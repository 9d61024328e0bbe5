//! Bounded box design spaces, candidate pools and coordinate normalization.
//!
//! A [`DesignSpace`] is an axis-aligned box in `d` dimensions. Candidate
//! samples for the active-learning loop are either drawn uniformly on the
//! fly through a [`SampleStream`] or loaded from a finite CSV pool with
//! [`load_pool`]. Networks always consume coordinates normalized to
//! `[0,1]^d` via [`DesignSpace::normalize`].

use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned bounded box of admissible simulator inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignSpace {
    dim: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    names: Vec<String>,
}

impl DesignSpace {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, names: Vec<String>) -> Result<Self> {
        let dim = lower.len();
        if dim == 0 {
            return Err(Error::Config("design space must have dim >= 1".into()));
        }
        if upper.len() != dim || names.len() != dim {
            return Err(Error::Config(format!(
                "design space arity mismatch: lower {}, upper {}, names {}",
                dim,
                upper.len(),
                names.len()
            )));
        }
        for i in 0..dim {
            if !(lower[i] < upper[i]) {
                return Err(Error::Config(format!(
                    "axis {} ({}): lower {} must be < upper {}",
                    i, names[i], lower[i], upper[i]
                )));
            }
        }
        Ok(Self {
            dim,
            lower,
            upper,
            names,
        })
    }

    /// Box with unnamed axes labelled `x0..x{d-1}`.
    pub fn from_bounds(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let names = (0..lower.len()).map(|i| format!("x{i}")).collect();
        Self::new(lower, upper, names)
    }

    /// The unit box `[0,1]^d`.
    pub fn unit(dim: usize) -> Self {
        Self::from_bounds(vec![0.0; dim], vec![1.0; dim]).expect("dim >= 1")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn contains(&self, coords: &[f64]) -> bool {
        coords.len() == self.dim
            && coords
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&x, (&lo, &hi))| x >= lo && x <= hi)
    }

    /// Coordinate-wise map onto `[0,1]^d`.
    pub fn normalize(&self, sample: &Sample) -> Result<Vec<f64>> {
        if !self.contains(&sample.coords) {
            return Err(Error::Domain(format!(
                "sample {} lies outside the design space",
                sample.id
            )));
        }
        Ok(self.normalize_unchecked(&sample.coords))
    }

    pub(crate) fn normalize_unchecked(&self, coords: &[f64]) -> Vec<f64> {
        coords
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&x, (&lo, &hi))| (x - lo) / (hi - lo))
            .collect()
    }

    /// Inverse of [`normalize`](Self::normalize) on `[0,1]^d`.
    pub fn denormalize(&self, unit: &[f64]) -> Vec<f64> {
        unit.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&u, (&lo, &hi))| lo + u * (hi - lo))
            .collect()
    }
}

/// One candidate design point with a stable identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub id: u64,
    pub coords: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PoolOrigin {
    FiniteFile,
    OnTheFly,
}

/// Ordered collection of unlabeled candidates.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidatePool {
    pub samples: Vec<Sample>,
    pub origin: PoolOrigin,
}

impl CandidatePool {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Seeded random stream that owns the id counter for every sample it emits.
///
/// All on-the-fly generation within one loop run goes through a single
/// stream, so ids are unique across the whole run.
#[derive(Debug, Clone)]
pub struct SampleStream {
    rng: ChaCha8Rng,
    next_id: u64,
}

impl SampleStream {
    pub fn new(seed: u64) -> Self {
        Self::from_rng(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn from_rng(rng: ChaCha8Rng) -> Self {
        Self { rng, next_id: 0 }
    }

    /// Start ids at `offset` instead of 0. Used to keep test-set ids
    /// disjoint from every run's training ids.
    pub fn with_id_offset(seed: u64, offset: u64) -> Self {
        let mut s = Self::new(seed);
        s.next_id = offset;
        s
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// One uniform draw from the box.
    pub fn draw(&mut self, space: &DesignSpace) -> Sample {
        let coords = space
            .lower()
            .iter()
            .zip(space.upper())
            .map(|(&lo, &hi)| self.rng.random_range(lo..hi))
            .collect();
        let id = self.next_id;
        self.next_id += 1;
        Sample { id, coords }
    }
}

/// `n` i.i.d. uniform samples over the box; deterministic given the stream state.
pub fn sample_uniform(space: &DesignSpace, n: usize, stream: &mut SampleStream) -> CandidatePool {
    assert!(n >= 1, "sample_uniform requires n >= 1");
    let samples = (0..n).map(|_| stream.draw(space)).collect();
    CandidatePool {
        samples,
        origin: PoolOrigin::OnTheFly,
    }
}

/// Load a finite pool from CSV text: one sample per line, comma-separated
/// decimals, no header. Row index becomes the sample id.
pub fn load_pool(path: &Path, dim: usize) -> Result<CandidatePool> {
    let text = std::fs::read_to_string(path)?;
    let mut samples = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut coords = Vec::with_capacity(dim);
        for tok in line.split(',') {
            let v: f64 = tok.trim().parse().map_err(|_| Error::PoolParse {
                path: path.to_path_buf(),
                line: idx + 1,
                msg: format!("non-numeric token {tok:?}"),
            })?;
            coords.push(v);
        }
        if coords.len() != dim {
            return Err(Error::PoolParse {
                path: path.to_path_buf(),
                line: idx + 1,
                msg: format!("expected {dim} columns, found {}", coords.len()),
            });
        }
        samples.push(Sample {
            id: samples.len() as u64,
            coords,
        });
    }
    Ok(CandidatePool {
        samples,
        origin: PoolOrigin::FiniteFile,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit2() -> DesignSpace {
        DesignSpace::unit(2)
    }

    #[test]
    fn rejects_degenerate_axis() {
        let err = DesignSpace::from_bounds(vec![1.0, 0.0], vec![1.0, 1.0]);
        assert!(err.is_err());
    }

    #[test]
    fn rejects_arity_mismatch() {
        assert!(DesignSpace::from_bounds(vec![0.0], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn uniform_sampling_is_deterministic_and_in_bounds() {
        let space = unit2();
        let a = sample_uniform(&space, 3, &mut SampleStream::new(7));
        let b = sample_uniform(&space, 3, &mut SampleStream::new(7));
        assert_eq!(a, b);
        assert_eq!(a.len(), 3);
        for s in &a.samples {
            assert!(space.contains(&s.coords));
        }
        let c = sample_uniform(&space, 3, &mut SampleStream::new(8));
        assert_ne!(a, c);
    }

    #[test]
    fn uniform_sampling_ids_are_consecutive() {
        let mut stream = SampleStream::new(1);
        let pool = sample_uniform(&unit2(), 5, &mut stream);
        let ids: Vec<u64> = pool.samples.iter().map(|s| s.id).collect();
        assert_eq!(ids, vec![0, 1, 2, 3, 4]);
        // counter continues across calls
        let pool2 = sample_uniform(&unit2(), 2, &mut stream);
        assert_eq!(pool2.samples[0].id, 5);
    }

    #[test]
    fn uniform_moments_match_box_midpoint() {
        // Branin-like box; mean of U(lo,hi) is (lo+hi)/2 with
        // std (hi-lo)/sqrt(12).
        let space = DesignSpace::from_bounds(vec![-5.0, 0.0], vec![5.0, 15.0]).unwrap();
        let n = 1000;
        let pool = sample_uniform(&space, n, &mut SampleStream::new(42));
        for axis in 0..2 {
            let xs: Vec<f64> = pool.samples.iter().map(|s| s.coords[axis]).collect();
            let lo = space.lower()[axis];
            let hi = space.upper()[axis];
            assert!(xs.iter().all(|&x| x >= lo && x <= hi));
            let mean = xs.iter().sum::<f64>() / n as f64;
            let se = (hi - lo) / (12.0_f64).sqrt() / (n as f64).sqrt();
            let mid = (lo + hi) / 2.0;
            assert!(
                (mean - mid).abs() < 3.0 * se,
                "axis {axis}: mean {mean} vs midpoint {mid} (3se = {})",
                3.0 * se
            );
        }
    }

    #[test]
    fn normalize_maps_bounds_to_unit_interval() {
        let space = DesignSpace::from_bounds(vec![0.0], vec![10.0]).unwrap();
        let mid = Sample {
            id: 0,
            coords: vec![5.0],
        };
        assert_eq!(space.normalize(&mid).unwrap(), vec![0.5]);
        let lo = Sample {
            id: 1,
            coords: vec![0.0],
        };
        let hi = Sample {
            id: 2,
            coords: vec![10.0],
        };
        assert_eq!(space.normalize(&lo).unwrap(), vec![0.0]);
        assert_eq!(space.normalize(&hi).unwrap(), vec![1.0]);
    }

    #[test]
    fn normalize_rejects_out_of_bounds() {
        let space = unit2();
        let s = Sample {
            id: 0,
            coords: vec![1.5, 0.5],
        };
        assert!(space.normalize(&s).is_err());
    }

    #[test]
    fn load_pool_roundtrip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let ok = dir.path().join("ok.csv");
        std::fs::write(&ok, "0.1,0.2\n0.3,0.4\n0.5,0.6\n").unwrap();
        let pool = load_pool(&ok, 2).unwrap();
        assert_eq!(pool.len(), 3);
        assert_eq!(pool.origin, PoolOrigin::FiniteFile);
        assert_eq!(
            pool.samples.iter().map(|s| s.id).collect::<Vec<_>>(),
            vec![0, 1, 2]
        );

        let empty = dir.path().join("empty.csv");
        std::fs::write(&empty, "").unwrap();
        assert!(load_pool(&empty, 2).unwrap().is_empty());

        let bad = dir.path().join("bad.csv");
        std::fs::write(&bad, "0.1,0.2\n0.3,oops\n").unwrap();
        match load_pool(&bad, 2) {
            Err(Error::PoolParse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }

        let narrow = dir.path().join("narrow.csv");
        std::fs::write(&narrow, "0.1\n").unwrap();
        assert!(load_pool(&narrow, 2).is_err());
    }
}
