//! Batch query strategies: random, top-B, diversity-batched (DBAL) and the
//! epsilon-weighted hybrid strategy.
//!
//! All strategies return a [`SelectionResult`] with exactly `B` distinct
//! samples. The hybrid strategy spends a `round_half_up(eps * B)` quota on
//! uniform draws from the teacher's predicted-failure region
//! (`f(x) >= 0.5`) and the remainder on fresh uniform exploration; when the
//! failure region cannot be hit within `max_rounds` proposal rounds the
//! quota is topped up with the highest-probability proposals seen and
//! `fallback_used` is flagged.

pub mod kmeans;

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use serde::{Deserialize, Serialize};

use crate::design_space::{sample_uniform, CandidatePool, DesignSpace, Sample, SampleStream};
use crate::error::{Error, Result};
use crate::neural::{Mlp, OutputHead};

pub const FAILURE_THRESHOLD: f64 = 0.5;

const KMEANS_RESTARTS: usize = 10;
const KMEANS_MAX_ITER: usize = 100;
const KMEANS_TOL: f64 = 1e-6;

/// Candidate pool with aligned teacher failure probabilities.
#[derive(Debug, Clone)]
pub struct ScoredPool {
    pub pool: CandidatePool,
    pub fail_prob: Vec<f64>,
}

/// Epsilon schedule: fixed trust in the teacher, or logarithmically
/// increasing trust over the run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EpsSchedule {
    Fixed { eps: f64 },
    LogIncreasing { total_iters: usize },
}

/// Value of epsilon at iteration `t` (1-based).
pub fn eps_value(schedule: EpsSchedule, t: usize) -> Result<f64> {
    match schedule {
        EpsSchedule::Fixed { eps } => {
            if !(eps > 0.0 && eps <= 1.0) {
                return Err(Error::Config(format!("eps must be in (0,1], got {eps}")));
            }
            Ok(eps)
        }
        EpsSchedule::LogIncreasing { total_iters } => {
            if t < 1 || t > total_iters {
                return Err(Error::Domain(format!(
                    "iteration {t} outside schedule range 1..={total_iters}"
                )));
            }
            let v = ((1 + t) as f64).ln() / ((1 + total_iters) as f64).ln();
            Ok(v.min(1.0).max(f64::MIN_POSITIVE))
        }
    }
}

/// Epsilon as written in a strategy config string; `Log` gets its horizon
/// from the loop's iteration count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EpsSpec {
    Fixed(f64),
    Log,
}

impl EpsSpec {
    pub fn schedule(self, total_iters: usize) -> EpsSchedule {
        match self {
            EpsSpec::Fixed(eps) => EpsSchedule::Fixed { eps },
            EpsSpec::Log => EpsSchedule::LogIncreasing { total_iters },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum StrategyKind {
    Random,
    TopB,
    Dbal { beta: usize },
    EpsHqs { eps: EpsSpec },
}

impl StrategyKind {
    pub fn needs_teacher(&self) -> bool {
        !matches!(self, StrategyKind::Random)
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    /// Accepts `random`, `top_b`, `dbal:<beta>`, `eps_hqs:<eps>` where
    /// `<eps>` is a value in (0,1] or `log`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => return Ok(StrategyKind::Random),
            "top_b" => return Ok(StrategyKind::TopB),
            _ => {}
        }
        if let Some(beta) = s.strip_prefix("dbal:") {
            let beta: usize = beta
                .parse()
                .map_err(|_| Error::Config(format!("bad dbal beta in {s:?}")))?;
            if beta < 1 {
                return Err(Error::Config("dbal beta must be >= 1".into()));
            }
            return Ok(StrategyKind::Dbal { beta });
        }
        if let Some(eps) = s.strip_prefix("eps_hqs:") {
            if eps == "log" {
                return Ok(StrategyKind::EpsHqs { eps: EpsSpec::Log });
            }
            let eps: f64 = eps
                .parse()
                .map_err(|_| Error::Config(format!("bad eps in {s:?}")))?;
            if !(eps > 0.0 && eps <= 1.0) {
                return Err(Error::Config(format!("eps must be in (0,1], got {eps}")));
            }
            return Ok(StrategyKind::EpsHqs {
                eps: EpsSpec::Fixed(eps),
            });
        }
        Err(Error::Config(format!("unknown strategy {s:?}")))
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrategyKind::Random => write!(f, "random"),
            StrategyKind::TopB => write!(f, "top_b"),
            StrategyKind::Dbal { beta } => write!(f, "dbal:{beta}"),
            StrategyKind::EpsHqs { eps: EpsSpec::Log } => write!(f, "eps_hqs:log"),
            StrategyKind::EpsHqs {
                eps: EpsSpec::Fixed(e),
            } => write!(f, "eps_hqs:{e}"),
        }
    }
}

/// A strategy plus its batch size B.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrategySpec {
    pub kind: StrategyKind,
    pub batch_size: usize,
}

/// The batch a strategy picked, with audit details.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    pub selected: Vec<Sample>,
    /// Ids chosen through the `f >= 0.5` failure filter (the quota part).
    pub fail_portion_ids: Vec<u64>,
    pub fallback_used: bool,
    pub resample_rounds: usize,
}

/// Where candidates come from: a finite unlabeled pool, or uniform
/// generation over the design space.
pub enum PoolSource<'a> {
    Finite(&'a CandidatePool),
    OnTheFly(&'a DesignSpace),
}

pub fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor() as usize
}

/// Uniform selection of B samples (without replacement for finite pools).
pub fn select_random(
    source: &PoolSource<'_>,
    batch_size: usize,
    stream: &mut SampleStream,
) -> Result<SelectionResult> {
    assert!(batch_size >= 1);
    let selected = match source {
        PoolSource::Finite(pool) => {
            if pool.len() < batch_size {
                return Err(Error::Capacity {
                    needed: batch_size,
                    available: pool.len(),
                });
            }
            let mut idx: Vec<usize> = (0..pool.len()).collect();
            for i in 0..batch_size {
                let j = stream.rng().random_range(i..idx.len());
                idx.swap(i, j);
            }
            idx[..batch_size]
                .iter()
                .map(|&i| pool.samples[i].clone())
                .collect()
        }
        PoolSource::OnTheFly(space) => (0..batch_size).map(|_| stream.draw(space)).collect(),
    };
    Ok(SelectionResult {
        selected,
        fail_portion_ids: Vec::new(),
        fallback_used: false,
        resample_rounds: 0,
    })
}

/// Indices of the `take` highest-probability candidates; ties broken by
/// lower sample id.
fn top_indices(scored: &ScoredPool, take: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scored.pool.len()).collect();
    idx.sort_by(|&a, &b| {
        scored.fail_prob[b]
            .total_cmp(&scored.fail_prob[a])
            .then(scored.pool.samples[a].id.cmp(&scored.pool.samples[b].id))
    });
    idx.truncate(take);
    idx
}

/// The B candidates with highest failure probability.
pub fn select_top_b(scored: &ScoredPool, batch_size: usize) -> Result<SelectionResult> {
    assert!(batch_size >= 1);
    if scored.pool.len() < batch_size {
        return Err(Error::Capacity {
            needed: batch_size,
            available: scored.pool.len(),
        });
    }
    let selected: Vec<Sample> = top_indices(scored, batch_size)
        .into_iter()
        .map(|i| scored.pool.samples[i].clone())
        .collect();
    let fail_portion_ids = selected.iter().map(|s| s.id).collect();
    Ok(SelectionResult {
        selected,
        fail_portion_ids,
        fallback_used: false,
        resample_rounds: 0,
    })
}

/// Diversity-batched selection: filter to the top `beta * B` candidates by
/// failure probability, cluster them with probability-weighted k-means on
/// normalized coordinates, and take the nearest distinct candidate to each
/// centroid. Degenerate geometry falls back to top-B within the filtered
/// set.
pub fn select_dbal(
    scored: &ScoredPool,
    space: &DesignSpace,
    batch_size: usize,
    beta: usize,
    rng: &mut impl rand::Rng,
) -> Result<SelectionResult> {
    assert!(batch_size >= 1 && beta >= 1);
    let filter_size = beta * batch_size;
    if scored.pool.len() < filter_size {
        return Err(Error::Capacity {
            needed: filter_size,
            available: scored.pool.len(),
        });
    }
    let filtered = top_indices(scored, filter_size);
    let points: Vec<Vec<f64>> = filtered
        .iter()
        .map(|&i| space.normalize_unchecked(&scored.pool.samples[i].coords))
        .collect();
    let weights: Vec<f64> = filtered.iter().map(|&i| scored.fail_prob[i]).collect();

    let Some(clustering) = kmeans::weighted_kmeans(
        &points,
        &weights,
        batch_size,
        KMEANS_RESTARTS,
        KMEANS_MAX_ITER,
        KMEANS_TOL,
        rng,
    ) else {
        let sub = ScoredPool {
            pool: CandidatePool {
                samples: filtered
                    .iter()
                    .map(|&i| scored.pool.samples[i].clone())
                    .collect(),
                origin: scored.pool.origin,
            },
            fail_prob: weights,
        };
        let mut result = select_top_b(&sub, batch_size)?;
        result.fallback_used = true;
        return Ok(result);
    };

    let mut taken = vec![false; filtered.len()];
    let mut selected = Vec::with_capacity(batch_size);
    for centroid in &clustering.centroids {
        let mut best: Option<usize> = None;
        let mut best_d = f64::INFINITY;
        for (k, point) in points.iter().enumerate() {
            if taken[k] {
                continue;
            }
            let d: f64 = point
                .iter()
                .zip(centroid)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            let id = scored.pool.samples[filtered[k]].id;
            let better = d < best_d
                || (d == best_d
                    && best.is_some_and(|b| id < scored.pool.samples[filtered[b]].id));
            if better {
                best_d = d;
                best = Some(k);
            }
        }
        let k = best.expect("filter size >= batch size");
        taken[k] = true;
        selected.push(scored.pool.samples[filtered[k]].clone());
    }
    let fail_portion_ids = selected.iter().map(|s| s.id).collect();
    Ok(SelectionResult {
        selected,
        fail_portion_ids,
        fallback_used: false,
        resample_rounds: 0,
    })
}

/// Teacher failure probabilities for every sample in the pool, in order.
pub fn score_pool(teacher: &Mlp, space: &DesignSpace, pool: &CandidatePool) -> Result<ScoredPool> {
    if teacher.output_head() != OutputHead::Sigmoid {
        return Err(Error::Config(
            "score_pool requires a sigmoid-head teacher".into(),
        ));
    }
    let mut fail_prob = Vec::with_capacity(pool.len());
    for sample in &pool.samples {
        let x = space.normalize(sample)?;
        fail_prob.push(teacher.forward_one(&x)?);
    }
    Ok(ScoredPool {
        pool: pool.clone(),
        fail_prob,
    })
}

/// Epsilon-weighted hybrid selection over the continuous design space.
pub fn select_eps_hqs(
    teacher: &Mlp,
    space: &DesignSpace,
    batch_size: usize,
    eps: f64,
    stream: &mut SampleStream,
    proposal_size: usize,
    max_rounds: usize,
) -> Result<SelectionResult> {
    assert!(batch_size >= 1, "batch_size must be >= 1");
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Config(format!("eps must be in (0,1], got {eps}")));
    }
    if proposal_size == 0 || max_rounds == 0 {
        return Err(Error::Config(
            "proposal_size and max_rounds must be >= 1".into(),
        ));
    }
    let n_fail = round_half_up(eps * batch_size as f64);
    let n_rest = batch_size - n_fail;

    let mut selected: Vec<Sample> = Vec::with_capacity(batch_size);
    let mut rounds = 0;
    let mut fallback_used = false;
    // Highest-probability proposals seen, kept as the fallback reserve.
    let mut reserve: Vec<(f64, Sample)> = Vec::new();

    while selected.len() < n_fail && rounds < max_rounds {
        rounds += 1;
        let proposals = sample_uniform(space, proposal_size, stream);
        let scored = score_pool(teacher, space, &proposals)?;
        let mut fail_idx: Vec<usize> = (0..proposals.len())
            .filter(|&i| scored.fail_prob[i] >= FAILURE_THRESHOLD)
            .collect();
        // Uniform draw without replacement from the filtered set.
        let need = n_fail - selected.len();
        let take = need.min(fail_idx.len());
        for i in 0..take {
            let j = stream.rng().random_range(i..fail_idx.len());
            fail_idx.swap(i, j);
        }
        let chosen: Vec<usize> = fail_idx[..take].to_vec();
        for &i in &chosen {
            selected.push(proposals.samples[i].clone());
        }
        for i in 0..proposals.len() {
            if !chosen.contains(&i) {
                reserve.push((scored.fail_prob[i], proposals.samples[i].clone()));
            }
        }
        reserve.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.id.cmp(&b.1.id)));
        reserve.truncate(n_fail);
    }

    if selected.len() < n_fail {
        fallback_used = true;
        let missing = n_fail - selected.len();
        for (_, sample) in reserve.into_iter().take(missing) {
            selected.push(sample);
        }
        if selected.len() < n_fail {
            return Err(Error::Capacity {
                needed: n_fail,
                available: selected.len(),
            });
        }
    }

    let fail_portion_ids: Vec<u64> = selected.iter().map(|s| s.id).collect();
    // Uniform remainder; fresh draws carry fresh ids, so the exclusion of
    // already-selected ids holds by construction.
    for _ in 0..n_rest {
        selected.push(stream.draw(space));
    }
    Ok(SelectionResult {
        selected,
        fail_portion_ids,
        fallback_used,
        resample_rounds: rounds,
    })
}
