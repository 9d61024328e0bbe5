//! Multi-seed experiment orchestration, curve aggregation and CSV output.
//!
//! One experiment runs every configured strategy with every seed against a
//! shared held-out test set, then writes one curve CSV per strategy and a
//! summary CSV with final hit-rates and sample savings versus the random
//! baseline.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::al_loop::{self, IterationRecord, LoopConfig};
use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::metrics::{sample_savings, time_saved, CurvePoint};
use crate::strategies::StrategyKind;

pub const CURVE_HEADER: &str = "strategy,seed_count,budget_used,mean_hit_rate,std_hit_rate,mean_cumulative_cost_seconds,fallback_rate,mean_eps_used";
pub const SUMMARY_HEADER: &str =
    "strategy,final_mean_hit_rate,final_std,savings_vs_random,time_saved_hours";

/// One aggregated row of a strategy's accuracy-vs-budget curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub budget_used: usize,
    pub mean_hit_rate: f64,
    pub std_hit_rate: f64,
    pub mean_cumulative_cost_seconds: f64,
    pub fallback_rate: f64,
    pub mean_eps_used: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct StrategyCurve {
    pub strategy: StrategyKind,
    pub seed_count: usize,
    pub rows: Vec<CurveRow>,
}

impl StrategyCurve {
    pub fn points(&self) -> Vec<CurvePoint> {
        self.rows
            .iter()
            .map(|r| CurvePoint {
                budget_used: r.budget_used,
                mean_hit_rate: r.mean_hit_rate,
                std_hit_rate: r.std_hit_rate,
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct SummaryRow {
    pub strategy: StrategyKind,
    pub final_mean_hit_rate: f64,
    pub final_std: f64,
    pub savings_vs_random: Option<f64>,
    pub time_saved_hours: Option<f64>,
}

#[derive(Debug)]
pub struct ExperimentOutcome {
    pub curves: Vec<StrategyCurve>,
    pub summary: Vec<SummaryRow>,
    /// (strategy, seed, error) for runs that failed; the experiment
    /// continues past them.
    pub failures: Vec<(StrategyKind, u64, String)>,
}

fn aggregate(strategy: StrategyKind, batch_size: usize, runs: &[Vec<IterationRecord>]) -> StrategyCurve {
    let seed_count = runs.len();
    let iters = runs.first().map_or(0, |r| r.len());
    let mut rows = Vec::with_capacity(iters);
    for t in 0..iters {
        let hits: Vec<f64> = runs.iter().map(|r| r[t].test_hit_rate).collect();
        let n = hits.len() as f64;
        let mean = hits.iter().sum::<f64>() / n;
        let var = hits.iter().map(|h| (h - mean).powi(2)).sum::<f64>() / n;
        let cost = runs.iter().map(|r| r[t].cumulative_cost_seconds).sum::<f64>() / n;
        let fallback =
            runs.iter().filter(|r| r[t].fallback_used).count() as f64 / n;
        let eps: Vec<f64> = runs.iter().filter_map(|r| r[t].eps_used).collect();
        let mean_eps = if eps.len() == runs.len() {
            Some(eps.iter().sum::<f64>() / n)
        } else {
            None
        };
        rows.push(CurveRow {
            budget_used: (t + 1) * batch_size,
            mean_hit_rate: mean,
            std_hit_rate: var.sqrt(),
            mean_cumulative_cost_seconds: cost,
            fallback_rate: fallback,
            mean_eps_used: mean_eps,
        });
    }
    StrategyCurve {
        strategy,
        seed_count,
        rows,
    }
}

pub fn curve_csv(curve: &StrategyCurve) -> String {
    let mut out = String::from(CURVE_HEADER);
    out.push('\n');
    for r in &curve.rows {
        let eps = r.mean_eps_used.map(|e| e.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            curve.strategy,
            curve.seed_count,
            r.budget_used,
            r.mean_hit_rate,
            r.std_hit_rate,
            r.mean_cumulative_cost_seconds,
            r.fallback_rate,
            eps
        )
        .unwrap();
    }
    out
}

pub fn summary_csv(summary: &[SummaryRow]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for row in summary {
        let savings = row.savings_vs_random.map(|s| s.to_string()).unwrap_or_default();
        let hours = row.time_saved_hours.map(|h| h.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{}",
            row.strategy, row.final_mean_hit_rate, row.final_std, savings, hours
        )
        .unwrap();
    }
    out
}

/// File-safe name for a strategy's curve CSV.
pub fn curve_file_name(strategy: StrategyKind) -> String {
    format!("{}.csv", strategy.to_string().replace(':', "_"))
}

/// Run every (strategy, seed) pair on `jobs` worker threads and write the
/// curve and summary CSVs into the config's output directory.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    jobs: usize,
    checkpoint_dir: Option<&Path>,
) -> Result<ExperimentOutcome> {
    // Shared measurement yardstick, generated from a dedicated seed stream
    // so it is independent of every run's sampling.
    let test_seed = cfg.template.seed ^ 0x7e57_5eed;
    let test = al_loop::generate_test_set(&cfg.template.oracle, cfg.test_set_size, test_seed)?;

    let pairs: Vec<(StrategyKind, u64)> = cfg
        .strategies
        .iter()
        .flat_map(|&s| cfg.seeds.iter().map(move |&seed| (s, seed)))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;

    // Deterministic join: results come back ordered by (strategy, seed).
    let results: Vec<std::result::Result<Vec<IterationRecord>, String>> = pool.install(|| {
        pairs
            .par_iter()
            .map(|&(strategy, seed)| {
                let mut run_cfg: LoopConfig = cfg.template.clone();
                run_cfg.strategy = strategy;
                run_cfg.seed = seed;
                let ckpt = checkpoint_dir.map(|d| {
                    d.join(format!(
                        "{}_seed{}",
                        strategy.to_string().replace(':', "_"),
                        seed
                    ))
                });
                al_loop::run(&run_cfg, &test, ckpt.as_deref())
                    .map(|out| out.records)
                    .map_err(|e| e.to_string())
            })
            .collect()
    });

    let mut curves = Vec::new();
    let mut failures = Vec::new();
    for (si, &strategy) in cfg.strategies.iter().enumerate() {
        let mut ok_runs = Vec::new();
        for (pi, &seed) in cfg.seeds.iter().enumerate() {
            match &results[si * cfg.seeds.len() + pi] {
                Ok(records) => ok_runs.push(records.clone()),
                Err(msg) => failures.push((strategy, seed, msg.clone())),
            }
        }
        curves.push(aggregate(strategy, cfg.template.batch_size, &ok_runs));
    }

    let random_curve = cfg
        .strategies
        .iter()
        .position(|s| matches!(s, StrategyKind::Random))
        .map(|i| curves[i].points());

    let summary: Vec<SummaryRow> = curves
        .iter()
        .map(|curve| {
            let last = curve.rows.last();
            let savings = match (&random_curve, last) {
                (Some(base), Some(_)) if !base.is_empty() => {
                    sample_savings(&curve.points(), base)
                }
                _ => None,
            };
            let hours = savings.map(|s| {
                let base_budget = random_curve
                    .as_ref()
                    .and_then(|b| b.last().map(|p| p.budget_used))
                    .unwrap_or(0);
                time_saved(s, base_budget, cfg.template.oracle.sim_cost_seconds, 0.0)
            });
            SummaryRow {
                strategy: curve.strategy,
                final_mean_hit_rate: last.map_or(f64::NAN, |r| r.mean_hit_rate),
                final_std: last.map_or(f64::NAN, |r| r.std_hit_rate),
                savings_vs_random: savings,
                time_saved_hours: hours,
            }
        })
        .collect();

    std::fs::create_dir_all(&cfg.output_dir)?;
    for curve in &curves {
        let path = cfg.output_dir.join(curve_file_name(curve.strategy));
        std::fs::write(path, curve_csv(curve))?;
    }
    std::fs::write(cfg.output_dir.join("summary.csv"), summary_csv(&summary))?;

    Ok(ExperimentOutcome {
        curves,
        summary,
        failures,
    })
}

/// Re-emit a curve CSV as two gnuplot-friendly columns
/// (budget mean_hit_rate).
pub fn plot_data(curve_csv_text: &str) -> Result<String> {
    let mut out = String::new();
    for (i, line) in curve_csv_text.lines().enumerate() {
        if i == 0 {
            if line != CURVE_HEADER {
                return Err(Error::Config("not a curve CSV (unexpected header)".into()));
            }
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() < 4 {
            return Err(Error::Config(format!("malformed curve row {}", i + 1)));
        }
        writeln!(out, "{} {}", cols[2], cols[3]).unwrap();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::al_loop::IterationRecord;

    fn record(t: usize, hit: f64, eps: Option<f64>, fallback: bool) -> IterationRecord {
        IterationRecord {
            t,
            selected_ids: vec![],
            fallback_used: fallback,
            resample_rounds: 0,
            student_loss: 0.1,
            teacher_loss: Some(0.2),
            test_hit_rate: hit,
            cumulative_cost_seconds: (t * 10) as f64,
            eps_used: eps,
        }
    }

    #[test]
    fn aggregation_matches_brute_force() {
        let runs = vec![
            vec![record(1, 0.2, Some(0.5), false), record(2, 0.6, Some(0.5), true)],
            vec![record(1, 0.4, Some(0.5), false), record(2, 0.8, Some(0.5), false)],
        ];
        let curve = aggregate(StrategyKind::TopB, 10, &runs);
        assert_eq!(curve.rows.len(), 2);
        assert_eq!(curve.rows[0].budget_used, 10);
        assert_eq!(curve.rows[1].budget_used, 20);
        assert!((curve.rows[0].mean_hit_rate - 0.3).abs() < 1e-12);
        let expect_std = ((0.01 + 0.01) / 2.0_f64).sqrt();
        assert!((curve.rows[0].std_hit_rate - expect_std).abs() < 1e-12);
        assert_eq!(curve.rows[1].fallback_rate, 0.5);
        assert_eq!(curve.rows[0].mean_eps_used, Some(0.5));
    }

    #[test]
    fn eps_column_blank_when_any_run_lacks_it() {
        let runs = vec![
            vec![record(1, 0.2, None, false)],
            vec![record(1, 0.4, Some(0.5), false)],
        ];
        let curve = aggregate(StrategyKind::Random, 5, &runs);
        assert_eq!(curve.rows[0].mean_eps_used, None);
        let csv = curve_csv(&curve);
        assert!(csv.lines().nth(1).unwrap().ends_with(','));
    }

    #[test]
    fn plot_data_extracts_two_columns() {
        let curve = StrategyCurve {
            strategy: StrategyKind::Random,
            seed_count: 2,
            rows: vec![CurveRow {
                budget_used: 50,
                mean_hit_rate: 0.75,
                std_hit_rate: 0.05,
                mean_cumulative_cost_seconds: 100.0,
                fallback_rate: 0.0,
                mean_eps_used: None,
            }],
        };
        let text = curve_csv(&curve);
        assert_eq!(plot_data(&text).unwrap(), "50 0.75\n");
        assert!(plot_data("nonsense\n1,2").is_err());
    }
}
