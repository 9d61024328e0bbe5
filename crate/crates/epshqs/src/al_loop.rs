//! The student-teacher active-learning loop.
//!
//! Each iteration relabels the training set with a binary indicator C
//! (1 when the student predicts within the relative-error band), trains
//! the teacher classifier on (normalized x, C), lets the configured query
//! strategy pick the next batch, evaluates it with the oracle, and
//! continues refining the student on the grown set. Budget is exactly
//! `iterations * batch_size` labeled samples.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::design_space::{
    load_pool, sample_uniform, CandidatePool, DesignSpace, PoolOrigin, Sample, SampleStream,
};
use crate::error::{Error, Result};
use crate::metrics::{hit_rate, within_band};
use crate::neural::{Mlp, MlpConfig};
use crate::oracle::OracleSpec;
use crate::strategies::{
    eps_value, score_pool, select_dbal, select_eps_hqs, select_random, select_top_b, PoolSource,
    SelectionResult, StrategyKind,
};

/// Where a labeled sample entered the training set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    Initial,
    Iteration(usize),
}

/// The labeled training set D_train with per-iteration indicator labels.
#[derive(Debug, Clone, Default)]
pub struct LabeledSet {
    pub samples: Vec<Sample>,
    pub y_star: Vec<f64>,
    /// Recomputed from the current student each iteration; 1.0 = within band.
    pub c_labels: Vec<f64>,
    pub provenance: Vec<Provenance>,
}

impl LabeledSet {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    fn append(&mut self, samples: Vec<Sample>, ys: Vec<f64>, from: Provenance) {
        for (s, y) in samples.into_iter().zip(ys) {
            self.samples.push(s);
            self.y_star.push(y);
            self.c_labels.push(1.0);
            self.provenance.push(from);
        }
    }
}

/// Zero-mean/unit-variance standardization of student targets, refit on
/// the current training set each iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetScaler {
    pub mean: f64,
    pub std: f64,
}

impl TargetScaler {
    pub fn fit(targets: &[f64]) -> Self {
        let n = targets.len() as f64;
        let mean = targets.iter().sum::<f64>() / n;
        let var = targets.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / n;
        let std = if var.sqrt() > 1e-12 { var.sqrt() } else { 1.0 };
        Self { mean, std }
    }

    pub fn standardize(&self, y: f64) -> f64 {
        (y - self.mean) / self.std
    }

    pub fn destandardize(&self, z: f64) -> f64 {
        self.mean + z * self.std
    }
}

/// Student checkpoint: network plus the target scaler needed to interpret
/// its outputs in oracle units.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudentCheckpoint {
    pub net: Mlp,
    pub scaler: TargetScaler,
}

impl StudentCheckpoint {
    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    /// Surrogate prediction in oracle units for normalized input `x`.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        Ok(self.scaler.destandardize(self.net.forward_one(x)?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopConfig {
    pub iterations: usize,
    pub batch_size: usize,
    pub strategy: StrategyKind,
    pub student_cfg: MlpConfig,
    pub teacher_cfg: MlpConfig,
    pub oracle: OracleSpec,
    /// Relative-error band for both the indicator C and the hit-rate.
    pub tol: f64,
    pub seed: u64,
    /// Size of on-the-fly proposal batches scored by the teacher.
    pub proposal_size: usize,
    /// Proposal rounds before the hybrid strategy falls back.
    pub max_rounds: usize,
    /// Reinitialize the student every iteration (ablation knob).
    pub cold_start: bool,
    /// Finite unlabeled pool; on-the-fly generation when absent.
    pub pool_path: Option<PathBuf>,
}

impl LoopConfig {
    pub fn new(strategy: StrategyKind, oracle: OracleSpec, seed: u64) -> Self {
        let dim = oracle.dim();
        Self {
            iterations: 50,
            batch_size: 50,
            strategy,
            student_cfg: MlpConfig::student_default(dim),
            teacher_cfg: MlpConfig::teacher_default(dim),
            oracle,
            tol: 0.05,
            seed,
            proposal_size: 20_000,
            max_rounds: 20,
            cold_start: false,
            pool_path: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 || self.batch_size == 0 {
            return Err(Error::Config("iterations and batch_size must be >= 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Config("tol must be > 0".into()));
        }
        if self.proposal_size == 0 || self.max_rounds == 0 {
            return Err(Error::Config("proposal_size and max_rounds must be >= 1".into()));
        }
        self.student_cfg.validate()?;
        self.teacher_cfg.validate()?;
        let dim = self.oracle.dim();
        if self.student_cfg.input_dim != dim || self.teacher_cfg.input_dim != dim {
            return Err(Error::Config(format!(
                "network input_dim must equal oracle dim {dim}"
            )));
        }
        match self.strategy {
            StrategyKind::TopB if self.pool_path.is_none() => {
                if self.proposal_size < self.batch_size {
                    return Err(Error::Config(
                        "proposal_size must be >= batch_size for top_b".into(),
                    ));
                }
            }
            StrategyKind::Dbal { beta } if self.pool_path.is_none() => {
                if self.proposal_size < beta * self.batch_size {
                    return Err(Error::Config(
                        "proposal_size must be >= beta * batch_size for dbal".into(),
                    ));
                }
            }
            StrategyKind::EpsHqs { .. } if self.pool_path.is_some() => {
                return Err(Error::Config(
                    "eps_hqs samples the continuous design space; finite pools are not supported"
                        .into(),
                ));
            }
            _ => {}
        }
        Ok(())
    }
}

/// Per-iteration audit row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub t: usize,
    pub selected_ids: Vec<u64>,
    pub fallback_used: bool,
    pub resample_rounds: usize,
    pub student_loss: f64,
    /// None on the first iteration, before any teacher exists.
    pub teacher_loss: Option<f64>,
    pub test_hit_rate: f64,
    pub cumulative_cost_seconds: f64,
    pub eps_used: Option<f64>,
}

/// Held-out measurement set; never added to training.
#[derive(Debug, Clone)]
pub struct TestSet {
    pub samples: Vec<Sample>,
    pub y_star: Vec<f64>,
}

#[derive(Debug)]
pub struct RunOutput {
    pub records: Vec<IterationRecord>,
    pub student: StudentCheckpoint,
    pub teacher: Mlp,
    pub labeled: LabeledSet,
}

/// Indicator labels from raw predictions: 1.0 within the band, else 0.0.
pub fn band_labels(preds: &[f64], targets: &[f64], tol: f64) -> Vec<f64> {
    preds
        .iter()
        .zip(targets)
        .map(|(&p, &t)| if within_band(p, t, tol) { 1.0 } else { 0.0 })
        .collect()
}

/// C labels for the whole labeled set under the current student.
pub fn indicator_labels(
    student: &StudentCheckpoint,
    space: &DesignSpace,
    set: &LabeledSet,
    tol: f64,
) -> Result<Vec<f64>> {
    let mut preds = Vec::with_capacity(set.len());
    for s in &set.samples {
        preds.push(student.predict(&space.normalize(s)?)?);
    }
    Ok(band_labels(&preds, &set.y_star, tol))
}

/// Teacher inputs: every labeled sample (normalized) paired with a freshly
/// computed C under the current student, plus inverse-frequency class
/// weights clamped to [0.1, 10].
pub fn teacher_training_set(
    labeled: &LabeledSet,
    student: &StudentCheckpoint,
    space: &DesignSpace,
    tol: f64,
) -> Result<(Vec<Vec<f64>>, Vec<f64>, Vec<f64>)> {
    let c = indicator_labels(student, space, labeled, tol)?;
    let xs: Result<Vec<Vec<f64>>> = labeled.samples.iter().map(|s| space.normalize(s)).collect();
    let xs = xs?;
    let n = c.len() as f64;
    let n1 = c.iter().sum::<f64>();
    let n0 = n - n1;
    let weights = if n0 == 0.0 || n1 == 0.0 {
        vec![1.0; c.len()]
    } else {
        let w0 = (n / (2.0 * n0)).clamp(0.1, 10.0);
        let w1 = (n / (2.0 * n1)).clamp(0.1, 10.0);
        c.iter().map(|&ci| if ci == 1.0 { w1 } else { w0 }).collect()
    };
    Ok((xs, c, weights))
}

struct FinitePool {
    pool: CandidatePool,
    used: HashSet<u64>,
}

impl FinitePool {
    fn remaining(&self) -> CandidatePool {
        CandidatePool {
            samples: self
                .pool
                .samples
                .iter()
                .filter(|s| !self.used.contains(&s.id))
                .cloned()
                .collect(),
            origin: PoolOrigin::FiniteFile,
        }
    }
}

fn iter_err(t: usize, e: Error) -> Error {
    Error::Iteration {
        iteration: t,
        source: Box::new(e),
    }
}

/// Run the full loop. The test set is measurement-only; oracle labels in
/// it never reach the student or teacher.
pub fn run(
    cfg: &LoopConfig,
    test: &TestSet,
    checkpoint_dir: Option<&Path>,
) -> Result<RunOutput> {
    cfg.validate()?;
    let space = cfg.oracle.design_space();
    let dim = space.dim();

    let stream_rng = |id: u64| {
        let mut r = ChaCha8Rng::seed_from_u64(cfg.seed);
        r.set_stream(id);
        r
    };
    // Independent streams so teacher training can never perturb sampling.
    let mut sampler = SampleStream::from_rng(stream_rng(1));
    let mut student_rng = stream_rng(2);
    let mut teacher_rng = stream_rng(3);
    let mut strategy_rng = stream_rng(4);

    let mut finite = match &cfg.pool_path {
        Some(path) => {
            let pool = load_pool(path, dim)?;
            for s in &pool.samples {
                if !space.contains(&s.coords) {
                    return Err(Error::Domain(format!(
                        "pool sample {} lies outside the oracle box",
                        s.id
                    )));
                }
            }
            Some(FinitePool {
                pool,
                used: HashSet::new(),
            })
        }
        None => None,
    };

    let mut student = StudentCheckpoint {
        net: Mlp::init(cfg.student_cfg.clone(), &mut student_rng)?,
        scaler: TargetScaler { mean: 0.0, std: 1.0 },
    };
    let mut teacher = Mlp::init(cfg.teacher_cfg.clone(), &mut teacher_rng)?;
    let mut teacher_trained = false;

    let test_xs: Result<Vec<Vec<f64>>> = test.samples.iter().map(|s| space.normalize(s)).collect();
    let test_xs = test_xs?;

    let mut labeled = LabeledSet::default();
    let mut records = Vec::with_capacity(cfg.iterations);
    let mut cumulative_cost = 0.0;

    for t in 1..=cfg.iterations {
        let mut teacher_loss = None;
        let mut eps_used = None;

        let selection: SelectionResult = if t == 1 {
            // Step 1: initial uniform batch.
            let remaining = finite.as_ref().map(|f| f.remaining());
            let source = match &remaining {
                Some(pool) => PoolSource::Finite(pool),
                None => PoolSource::OnTheFly(&space),
            };
            select_random(&source, cfg.batch_size, &mut sampler).map_err(|e| iter_err(t, e))?
        } else {
            // Refresh C under the current student and refit the teacher.
            let (txs, tc, tw) = teacher_training_set(&labeled, &student, &space, cfg.tol)?;
            labeled.c_labels = tc.clone();
            let epochs = if teacher_trained {
                cfg.teacher_cfg.epochs_warm
            } else {
                cfg.teacher_cfg.epochs_initial
            };
            let report = teacher
                .fit_weighted(&txs, &tc, Some(&tw), epochs, &mut teacher_rng)
                .map_err(|e| iter_err(t, e))?;
            teacher_trained = true;
            teacher_loss = Some(report.final_loss);

            let remaining = finite.as_ref().map(|f| f.remaining());
            match cfg.strategy {
                StrategyKind::Random => {
                    let source = match &remaining {
                        Some(pool) => PoolSource::Finite(pool),
                        None => PoolSource::OnTheFly(&space),
                    };
                    select_random(&source, cfg.batch_size, &mut sampler)
                        .map_err(|e| iter_err(t, e))?
                }
                StrategyKind::TopB => {
                    let candidates = match remaining {
                        Some(pool) => pool,
                        None => sample_uniform(&space, cfg.proposal_size, &mut sampler),
                    };
                    let scored = score_pool(&teacher, &space, &candidates)
                        .map_err(|e| iter_err(t, e))?;
                    select_top_b(&scored, cfg.batch_size).map_err(|e| iter_err(t, e))?
                }
                StrategyKind::Dbal { beta } => {
                    let candidates = match remaining {
                        Some(pool) => pool,
                        None => sample_uniform(&space, cfg.proposal_size, &mut sampler),
                    };
                    let scored = score_pool(&teacher, &space, &candidates)
                        .map_err(|e| iter_err(t, e))?;
                    select_dbal(&scored, &space, cfg.batch_size, beta, &mut strategy_rng)
                        .map_err(|e| iter_err(t, e))?
                }
                StrategyKind::EpsHqs { eps } => {
                    let eps_t = eps_value(eps.schedule(cfg.iterations), t)?;
                    eps_used = Some(eps_t);
                    select_eps_hqs(
                        &teacher,
                        &space,
                        cfg.batch_size,
                        eps_t,
                        &mut sampler,
                        cfg.proposal_size,
                        cfg.max_rounds,
                    )
                    .map_err(|e| iter_err(t, e))?
                }
            }
        };

        if let Some(f) = finite.as_mut() {
            for s in &selection.selected {
                f.used.insert(s.id);
            }
        }
        let selected_ids: Vec<u64> = selection.selected.iter().map(|s| s.id).collect();

        let batch = CandidatePool {
            samples: selection.selected,
            origin: PoolOrigin::OnTheFly,
        };
        let evals = cfg.oracle.evaluate_batch(&batch).map_err(|e| iter_err(t, e))?;
        cumulative_cost += evals.iter().map(|e| e.cost_charged).sum::<f64>();
        let ys: Vec<f64> = evals.iter().map(|e| e.y_star).collect();
        let from = if t == 1 {
            Provenance::Initial
        } else {
            Provenance::Iteration(t)
        };
        labeled.append(batch.samples, ys, from);

        // Train the student on the grown set with refreshed target scaling.
        student.scaler = TargetScaler::fit(&labeled.y_star);
        let xs: Result<Vec<Vec<f64>>> =
            labeled.samples.iter().map(|s| space.normalize(s)).collect();
        let xs = xs?;
        let zs: Vec<f64> = labeled
            .y_star
            .iter()
            .map(|&y| student.scaler.standardize(y))
            .collect();
        if cfg.cold_start {
            student.net = Mlp::init(cfg.student_cfg.clone(), &mut student_rng)?;
        }
        let epochs = if t == 1 {
            cfg.student_cfg.epochs_initial
        } else {
            cfg.student_cfg.epochs_warm
        };
        let report = student
            .net
            .fit(&xs, &zs, epochs, &mut student_rng)
            .map_err(|e| iter_err(t, e))?;

        let mut preds = Vec::with_capacity(test_xs.len());
        for x in &test_xs {
            preds.push(student.predict(x)?);
        }
        let test_hit_rate = hit_rate(&preds, &test.y_star, cfg.tol)?;

        if let Some(dir) = checkpoint_dir {
            std::fs::create_dir_all(dir)?;
            student.save(&dir.join(format!("student_iter{t:04}.json")))?;
            teacher.save(&dir.join(format!("teacher_iter{t:04}.json")))?;
        }

        records.push(IterationRecord {
            t,
            selected_ids,
            fallback_used: selection.fallback_used,
            resample_rounds: selection.resample_rounds,
            student_loss: report.final_loss,
            teacher_loss,
            test_hit_rate,
            cumulative_cost_seconds: cumulative_cost,
            eps_used,
        });
    }

    debug_assert_eq!(labeled.len(), cfg.iterations * cfg.batch_size);
    Ok(RunOutput {
        records,
        student,
        teacher,
        labeled,
    })
}

/// Generate a held-out test set by uniform sampling and oracle evaluation.
/// Ids start at a high offset so they can never collide with run ids.
pub const TEST_SET_ID_OFFSET: u64 = 1 << 40;

pub fn generate_test_set(oracle: &OracleSpec, size: usize, seed: u64) -> Result<TestSet> {
    let space = oracle.design_space();
    let mut stream = SampleStream::with_id_offset(seed, TEST_SET_ID_OFFSET);
    let pool = sample_uniform(&space, size, &mut stream);
    let evals = oracle.evaluate_batch(&pool)?;
    Ok(TestSet {
        samples: pool.samples,
        y_star: evals.into_iter().map(|e| e.y_star).collect(),
    })
}
