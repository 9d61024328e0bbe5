//! Accuracy and budget-efficiency metrics.
//!
//! The headline metric is the hit-rate: the fraction of held-out
//! predictions within a +/- 5% relative-error band of ground truth.
//! (The source material's prose describes counting predictions *out of*
//! the band while its formula counts those *within*; the formula is what
//! is implemented here, so higher is better.)

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute fallback when the target is (numerically) zero, where a
/// relative band degenerates.
pub const ZERO_TARGET_EPS: f64 = 1e-9;
pub const ZERO_TARGET_ABS_BAND: f64 = 1e-6;

/// Whether one prediction falls inside the relative-error band.
pub fn within_band(pred: f64, target: f64, tol: f64) -> bool {
    if target.abs() < ZERO_TARGET_EPS {
        (pred - target).abs() <= ZERO_TARGET_ABS_BAND
    } else {
        (pred - target).abs() <= tol * target.abs()
    }
}

/// Fraction of predictions within the band; in [0,1].
pub fn hit_rate(preds: &[f64], targets: &[f64], tol: f64) -> Result<f64> {
    if preds.len() != targets.len() || preds.is_empty() {
        return Err(Error::Shape(format!(
            "hit_rate: {} predictions vs {} targets",
            preds.len(),
            targets.len()
        )));
    }
    let hits = preds
        .iter()
        .zip(targets)
        .filter(|(&p, &t)| within_band(p, t, tol))
        .count();
    Ok(hits as f64 / preds.len() as f64)
}

/// One point on an accuracy-vs-budget curve, aggregated across seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub budget_used: usize,
    pub mean_hit_rate: f64,
    pub std_hit_rate: f64,
}

/// Relative budget saved by `curve` to match the baseline's final mean
/// hit-rate: `1 - b / base_final_budget`, where `b` is the smallest budget
/// (linearly interpolated) at which `curve` reaches the baseline's final
/// accuracy. `None` if the level is never reached.
pub fn sample_savings(curve: &[CurvePoint], baseline: &[CurvePoint]) -> Option<f64> {
    let target = baseline.last()?.mean_hit_rate;
    let base_budget = baseline.last()?.budget_used as f64;
    // Find the first segment that crosses the target level.
    let mut reached: Option<f64> = None;
    for (i, p) in curve.iter().enumerate() {
        if p.mean_hit_rate >= target {
            if i == 0 {
                reached = Some(p.budget_used as f64);
            } else {
                let a = &curve[i - 1];
                let (ya, yb) = (a.mean_hit_rate, p.mean_hit_rate);
                let (ba, bb) = (a.budget_used as f64, p.budget_used as f64);
                let b = if yb == ya {
                    ba
                } else {
                    ba + (target - ya) / (yb - ya) * (bb - ba)
                };
                // Guard against earlier dips: interpolation stays within
                // the segment.
                reached = Some(b.clamp(ba, bb));
            }
            break;
        }
    }
    reached.map(|b| 1.0 - b / base_budget)
}

/// Wall-clock hours saved by skipping `savings * base_budget` simulations,
/// minus the strategy's own overhead. Negative results are reported as-is.
pub fn time_saved(
    savings: f64,
    base_budget: usize,
    sim_cost_seconds: f64,
    overhead_seconds: f64,
) -> f64 {
    assert!((0.0..=1.0).contains(&savings));
    (savings * base_budget as f64 * sim_cost_seconds - overhead_seconds) / 3600.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hit_rate_hand_cases() {
        assert_eq!(hit_rate(&[1.0, 2.0], &[1.0, 2.0], 0.05).unwrap(), 1.0);
        assert_eq!(hit_rate(&[1.04, 1.06], &[1.0, 1.0], 0.05).unwrap(), 0.5);
        assert_eq!(hit_rate(&[0.0, 0.0], &[100.0, 100.0], 0.05).unwrap(), 0.0);
        assert!(hit_rate(&[1.0], &[1.0, 2.0], 0.05).is_err());
    }

    #[test]
    fn hit_rate_zero_target_uses_absolute_floor() {
        assert_eq!(hit_rate(&[0.0], &[0.0], 0.05).unwrap(), 1.0);
        assert_eq!(hit_rate(&[0.1], &[0.0], 0.05).unwrap(), 0.0);
    }

    #[test]
    fn hit_rate_is_scale_consistent() {
        let preds = [1.04, 0.9, 3.2, -2.0];
        let targets = [1.0, 1.0, 3.0, -2.05];
        let base = hit_rate(&preds, &targets, 0.05).unwrap();
        let sp: Vec<f64> = preds.iter().map(|p| p * 7.5).collect();
        let st: Vec<f64> = targets.iter().map(|t| t * 7.5).collect();
        assert_eq!(hit_rate(&sp, &st, 0.05).unwrap(), base);
    }

    fn curve(points: &[(usize, f64)]) -> Vec<CurvePoint> {
        points
            .iter()
            .map(|&(b, m)| CurvePoint {
                budget_used: b,
                mean_hit_rate: m,
                std_hit_rate: 0.0,
            })
            .collect()
    }

    #[test]
    fn identical_curves_save_nothing() {
        let c = curve(&[(100, 0.2), (200, 0.5), (300, 0.8)]);
        assert_eq!(sample_savings(&c, &c), Some(0.0));
    }

    #[test]
    fn savings_reconstructs_headline_ratio() {
        // Reaching the baseline's final 0.80 at budget 3400 of 8000 -> 0.575.
        let base = curve(&[(4000, 0.5), (8000, 0.80)]);
        let fast = curve(&[(1000, 0.4), (3400, 0.80), (8000, 0.9)]);
        let s = sample_savings(&fast, &base).unwrap();
        assert!((s - 0.575).abs() < 1e-12, "got {s}");
    }

    #[test]
    fn savings_none_when_level_never_reached() {
        let base = curve(&[(100, 0.9)]);
        let slow = curve(&[(100, 0.1), (200, 0.5)]);
        assert_eq!(sample_savings(&slow, &base), None);
    }

    #[test]
    fn savings_interpolates_linearly() {
        let base = curve(&[(100, 0.5), (200, 0.6)]);
        let fast = curve(&[(100, 0.5), (200, 0.7)]);
        // crosses 0.6 at budget 150 -> 1 - 150/200 = 0.25
        assert_eq!(sample_savings(&fast, &base), Some(0.25));
    }

    #[test]
    fn time_saved_values() {
        let h = time_saved(0.575, 8000, 202.0, 0.0);
        assert!((h - 258.1).abs() < 0.1, "got {h}");
        assert_eq!(time_saved(0.0, 8000, 202.0, 360.0), -0.1);
        assert_eq!(time_saved(1.0, 3600, 1.0, 0.0), 1.0);
    }
}
