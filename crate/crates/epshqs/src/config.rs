//! Experiment configuration: a TOML file with top-level `oracle`, `loop`,
//! `student`, `teacher`, `strategies`, `seeds`, `test_set_size` and
//! `output_dir` keys. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::al_loop::LoopConfig;
use crate::error::{Error, Result};
use crate::neural::MlpConfig;
use crate::oracle::{OracleKind, OracleSpec};
use crate::strategies::StrategyKind;

/// Environment variable that overrides every configured seed, for smoke
/// tests.
pub const SEED_ENV_VAR: &str = "EPSHQS_SEED";

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    oracle: OracleSection,
    #[serde(rename = "loop")]
    loop_: LoopSection,
    student: Option<NetSection>,
    teacher: Option<NetSection>,
    strategies: Vec<String>,
    seeds: Vec<u64>,
    test_set_size: usize,
    output_dir: PathBuf,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OracleSection {
    kind: String,
    dim: Option<usize>,
    #[serde(default)]
    sim_cost_seconds: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LoopSection {
    iterations: usize,
    batch_size: usize,
    #[serde(default = "default_tol")]
    tol: f64,
    #[serde(default = "default_proposal_size")]
    proposal_size: usize,
    #[serde(default = "default_max_rounds")]
    max_rounds: usize,
    seed: u64,
    #[serde(default)]
    cold_start: bool,
    pool: Option<PathBuf>,
}

fn default_tol() -> f64 {
    0.05
}

fn default_proposal_size() -> usize {
    20_000
}

fn default_max_rounds() -> usize {
    20
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetSection {
    hidden: Option<Vec<usize>>,
    learning_rate: Option<f64>,
    minibatch: Option<usize>,
    epochs_initial: Option<usize>,
    epochs_warm: Option<usize>,
}

impl NetSection {
    fn apply(&self, mut cfg: MlpConfig) -> MlpConfig {
        if let Some(h) = &self.hidden {
            cfg.hidden = h.clone();
        }
        if let Some(lr) = self.learning_rate {
            cfg.learning_rate = lr;
        }
        if let Some(mb) = self.minibatch {
            cfg.minibatch = mb;
        }
        if let Some(e) = self.epochs_initial {
            cfg.epochs_initial = e;
        }
        if let Some(e) = self.epochs_warm {
            cfg.epochs_warm = e;
        }
        cfg
    }
}

/// Fully resolved multi-run experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    /// Template for each run; strategy and seed are substituted per run.
    pub template: LoopConfig,
    pub strategies: Vec<StrategyKind>,
    pub seeds: Vec<u64>,
    pub test_set_size: usize,
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: ConfigFile =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;

        let kind = match file.oracle.kind.as_str() {
            "branin2" => OracleKind::Branin2,
            "hartmann6" => OracleKind::Hartmann6,
            "styblinski_tang" => OracleKind::StyblinskiTang {
                dim: file.oracle.dim.ok_or_else(|| {
                    Error::Config("styblinski_tang requires oracle.dim".into())
                })?,
            },
            "vessel_stress4" => OracleKind::VesselStress4,
            other => return Err(Error::Config(format!("unknown oracle kind {other:?}"))),
        };
        let oracle = OracleSpec::new(kind, file.oracle.sim_cost_seconds)?;
        let dim = oracle.dim();

        let strategies: Result<Vec<StrategyKind>> =
            file.strategies.iter().map(|s| s.parse()).collect();
        let strategies = strategies?;
        if strategies.is_empty() {
            return Err(Error::Config("strategies must be nonempty".into()));
        }

        let mut seeds = file.seeds;
        let mut loop_seed = file.loop_.seed;
        if let Ok(s) = std::env::var(SEED_ENV_VAR) {
            let s: u64 = s
                .parse()
                .map_err(|_| Error::Config(format!("{SEED_ENV_VAR} must be an integer")))?;
            loop_seed = s;
            seeds = vec![s];
        }
        if seeds.is_empty() {
            return Err(Error::Config("seeds must be nonempty".into()));
        }
        let mut dedup = seeds.clone();
        dedup.sort_unstable();
        dedup.dedup();
        if dedup.len() != seeds.len() {
            return Err(Error::Config("seeds must be distinct".into()));
        }
        if file.test_set_size < 100 {
            return Err(Error::Config("test_set_size must be >= 100".into()));
        }

        let student_cfg = file
            .student
            .as_ref()
            .map(|s| s.apply(MlpConfig::student_default(dim)))
            .unwrap_or_else(|| MlpConfig::student_default(dim));
        let teacher_cfg = file
            .teacher
            .as_ref()
            .map(|s| s.apply(MlpConfig::teacher_default(dim)))
            .unwrap_or_else(|| MlpConfig::teacher_default(dim));

        let template = LoopConfig {
            iterations: file.loop_.iterations,
            batch_size: file.loop_.batch_size,
            strategy: strategies[0],
            student_cfg,
            teacher_cfg,
            oracle,
            tol: file.loop_.tol,
            seed: loop_seed,
            proposal_size: file.loop_.proposal_size,
            max_rounds: file.loop_.max_rounds,
            cold_start: file.loop_.cold_start,
            pool_path: file.loop_.pool,
        };

        let cfg = Self {
            template,
            strategies,
            seeds,
            test_set_size: file.test_set_size,
            output_dir: file.output_dir,
        };
        // Validate each strategy against the template.
        for &strategy in &cfg.strategies {
            let mut per = cfg.template.clone();
            per.strategy = strategy;
            per.validate()?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // TOML wants the scalar top-level keys before any table.
    const BASE: &str = r#"
        strategies = ["random", "eps_hqs:0.5"]
        seeds = [1, 2]
        test_set_size = 200
        output_dir = "out"

        [oracle]
        kind = "vessel_stress4"
        sim_cost_seconds = 202.0

        [loop]
        iterations = 4
        batch_size = 5
        seed = 3

        [student]
        hidden = [16]
        epochs_initial = 10
        epochs_warm = 5
    "#;

    #[test]
    fn parses_a_full_config() {
        let cfg = ExperimentConfig::from_toml_str(BASE).unwrap();
        assert_eq!(cfg.strategies.len(), 2);
        assert_eq!(cfg.template.iterations, 4);
        assert_eq!(cfg.template.student_cfg.hidden, vec![16]);
        assert_eq!(cfg.template.tol, 0.05);
        assert_eq!(cfg.template.teacher_cfg.hidden, vec![32, 32]);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = BASE.replace("output_dir = \"out\"", "output_dir = \"out\"\nbogus = 1");
        assert!(ExperimentConfig::from_toml_str(&text).is_err());
        let text = BASE.replace("seed = 3", "seed = 3\nmystery = true");
        assert!(ExperimentConfig::from_toml_str(&text).is_err());
    }

    #[test]
    fn duplicate_seeds_are_rejected() {
        let text = BASE.replace("seeds = [1, 2]", "seeds = [1, 1]");
        assert!(ExperimentConfig::from_toml_str(&text).is_err());
    }

    #[test]
    fn small_test_sets_are_rejected() {
        let text = BASE.replace("test_set_size = 200", "test_set_size = 50");
        assert!(ExperimentConfig::from_toml_str(&text).is_err());
    }

    #[test]
    fn bad_strategy_string_is_rejected() {
        let text = BASE.replace("\"random\"", "\"argmax\"");
        assert!(ExperimentConfig::from_toml_str(&text).is_err());
    }
}
