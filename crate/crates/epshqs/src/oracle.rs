//! Analytic stand-in simulators with a bookkeeping cost model.
//!
//! Each oracle is a deterministic scalar function over a canonical box.
//! Evaluation cost is charged on paper only (accumulated and reported,
//! never slept), so desk-scale benchmarks stay fast while time-saved
//! statistics remain computable.

use serde::{Deserialize, Serialize};

use crate::design_space::{CandidatePool, DesignSpace, Sample};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum OracleKind {
    /// Classic 2-D Branin-Hoo function on [-5,10] x [0,15].
    Branin2,
    /// Hartmann 6-D function on [0,1]^6.
    Hartmann6,
    /// Styblinski-Tang in `d` dimensions on [-5,5]^d.
    StyblinskiTang { dim: usize },
    /// Thin-wall hoop-stress proxy for a submerged pressure vessel,
    /// 4-D: inner radius, wall thickness, length, depth.
    VesselStress4,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSpec {
    pub kind: OracleKind,
    pub sim_cost_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub sample_id: u64,
    pub y_star: f64,
    pub cost_charged: f64,
}

const SEAWATER_DENSITY: f64 = 1025.0;
const GRAVITY: f64 = 9.81;

impl OracleSpec {
    pub fn new(kind: OracleKind, sim_cost_seconds: f64) -> Result<Self> {
        if sim_cost_seconds < 0.0 {
            return Err(Error::Config("sim_cost_seconds must be >= 0".into()));
        }
        if let OracleKind::StyblinskiTang { dim } = kind {
            if dim == 0 {
                return Err(Error::Config("StyblinskiTang requires dim >= 1".into()));
            }
        }
        Ok(Self {
            kind,
            sim_cost_seconds,
        })
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            OracleKind::Branin2 => 2,
            OracleKind::Hartmann6 => 6,
            OracleKind::StyblinskiTang { dim } => dim,
            OracleKind::VesselStress4 => 4,
        }
    }

    /// Canonical box the oracle is defined on.
    pub fn design_space(&self) -> DesignSpace {
        match self.kind {
            OracleKind::Branin2 => DesignSpace::new(
                vec![-5.0, 0.0],
                vec![10.0, 15.0],
                vec!["x1".into(), "x2".into()],
            )
            .unwrap(),
            OracleKind::Hartmann6 => DesignSpace::unit(6),
            OracleKind::StyblinskiTang { dim } => {
                DesignSpace::from_bounds(vec![-5.0; dim], vec![5.0; dim]).unwrap()
            }
            OracleKind::VesselStress4 => DesignSpace::new(
                vec![0.2, 0.005, 0.5, 100.0],
                vec![1.0, 0.05, 3.0, 1000.0],
                vec![
                    "inner_radius_m".into(),
                    "wall_thickness_m".into(),
                    "length_m".into(),
                    "depth_m".into(),
                ],
            )
            .unwrap(),
        }
    }

    /// Config-file name of this oracle.
    pub fn name(&self) -> &'static str {
        match self.kind {
            OracleKind::Branin2 => "branin2",
            OracleKind::Hartmann6 => "hartmann6",
            OracleKind::StyblinskiTang { .. } => "styblinski_tang",
            OracleKind::VesselStress4 => "vessel_stress4",
        }
    }

    pub fn describe(&self) -> String {
        let space = self.design_space();
        let formula = match self.kind {
            OracleKind::Branin2 => "Branin-Hoo: a(x2 - b x1^2 + c x1 - r)^2 + s(1-t)cos(x1) + s",
            OracleKind::Hartmann6 => "Hartmann-6: -sum_i alpha_i exp(-sum_j A_ij (x_j - P_ij)^2)",
            OracleKind::StyblinskiTang { .. } => {
                "Styblinski-Tang: 0.5 * sum_i (x_i^4 - 16 x_i^2 + 5 x_i)"
            }
            OracleKind::VesselStress4 => {
                "hoop-stress proxy: rho*g*D*r/t * (1 + 0.25 sin(4 pi r) exp(-L))"
            }
        };
        let mut out = format!(
            "{} (dim {}), sim cost {} s/sample\n  {}\n  box:\n",
            self.name(),
            self.dim(),
            self.sim_cost_seconds,
            formula
        );
        for i in 0..space.dim() {
            out.push_str(&format!(
                "    {}: [{}, {}]\n",
                space.names()[i],
                space.lower()[i],
                space.upper()[i]
            ));
        }
        out
    }

    /// Evaluate one sample; errors if it lies outside the canonical box.
    pub fn evaluate(&self, sample: &Sample) -> Result<Evaluation> {
        if !self.design_space().contains(&sample.coords) {
            return Err(Error::Domain(format!(
                "sample {} outside the {:?} box",
                sample.id, self.kind
            )));
        }
        let y_star = match self.kind {
            OracleKind::Branin2 => branin(&sample.coords),
            OracleKind::Hartmann6 => hartmann6(&sample.coords),
            OracleKind::StyblinskiTang { .. } => styblinski_tang(&sample.coords),
            OracleKind::VesselStress4 => vessel_stress(&sample.coords),
        };
        Ok(Evaluation {
            sample_id: sample.id,
            y_star,
            cost_charged: self.sim_cost_seconds,
        })
    }

    /// Evaluate a pool in order; element-wise identical to sequential
    /// `evaluate`. The first out-of-box sample aborts with its id.
    pub fn evaluate_batch(&self, pool: &CandidatePool) -> Result<Vec<Evaluation>> {
        pool.samples.iter().map(|s| self.evaluate(s)).collect()
    }
}

fn branin(x: &[f64]) -> f64 {
    let (x1, x2) = (x[0], x[1]);
    let pi = std::f64::consts::PI;
    let a = 1.0;
    let b = 5.1 / (4.0 * pi * pi);
    let c = 5.0 / pi;
    let r = 6.0;
    let s = 10.0;
    let t = 1.0 / (8.0 * pi);
    a * (x2 - b * x1 * x1 + c * x1 - r).powi(2) + s * (1.0 - t) * x1.cos() + s
}

fn hartmann6(x: &[f64]) -> f64 {
    const ALPHA: [f64; 4] = [1.0, 1.2, 3.0, 3.2];
    const A: [[f64; 6]; 4] = [
        [10.0, 3.0, 17.0, 3.5, 1.7, 8.0],
        [0.05, 10.0, 17.0, 0.1, 8.0, 14.0],
        [3.0, 3.5, 1.7, 10.0, 17.0, 8.0],
        [17.0, 8.0, 0.05, 10.0, 0.1, 14.0],
    ];
    const P: [[f64; 6]; 4] = [
        [0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886],
        [0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991],
        [0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650],
        [0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381],
    ];
    -(0..4)
        .map(|i| {
            let inner: f64 = (0..6).map(|j| A[i][j] * (x[j] - P[i][j]).powi(2)).sum();
            ALPHA[i] * (-inner).exp()
        })
        .sum::<f64>()
}

fn styblinski_tang(x: &[f64]) -> f64 {
    0.5 * x
        .iter()
        .map(|&xi| xi.powi(4) - 16.0 * xi * xi + 5.0 * xi)
        .sum::<f64>()
}

fn vessel_stress(x: &[f64]) -> f64 {
    let (r, t, l, d) = (x[0], x[1], x[2], x[3]);
    let pressure = SEAWATER_DENSITY * GRAVITY * d;
    pressure * r / t * (1.0 + 0.25 * (4.0 * std::f64::consts::PI * r).sin() * (-l).exp())
}
