//! Machine-readable outputs: a JSON report with stable key order (struct
//! field order) and a delimiter-separated grid table with one row per grid
//! point, floats printed as shortest round-trip decimals.

use std::fmt::Write as _;

use serde::Serialize;

use semel::checkers::VerificationReport;
use semel::stochastic::PathEstimate;
use semel::{Domain64, GridFunction64, SolveReport};

use crate::config::ExperimentConfig;

#[derive(Serialize)]
pub struct ArtifactInfo {
    pub name: &'static str,
    pub version: &'static str,
}

#[derive(Serialize)]
pub struct SolveSection {
    pub iterations: usize,
    pub final_residual: f64,
    pub f_u_l1: f64,
    pub converged: bool,
    pub damping_used: f64,
}

impl From<&SolveReport<f64>> for SolveSection {
    fn from(r: &SolveReport<f64>) -> Self {
        Self {
            iterations: r.iterations,
            final_residual: r.final_residual,
            f_u_l1: r.f_u_l1,
            converged: r.converged,
            damping_used: r.damping_used,
        }
    }
}

#[derive(Serialize)]
pub struct EstimateSection {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Serialize)]
pub struct EnergySection {
    pub k: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Serialize)]
pub struct VerificationSection {
    pub resolvent_residual: f64,
    pub stampacchia_max_residual: f64,
    pub nu_k_convergence: Vec<[f64; 2]>,
    pub l1_estimate: EstimateSection,
    pub energy_estimates: Vec<EnergySection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub positivity_ok: Option<bool>,
}

impl From<&VerificationReport<f64>> for VerificationSection {
    fn from(v: &VerificationReport<f64>) -> Self {
        Self {
            resolvent_residual: v.resolvent_residual,
            stampacchia_max_residual: v.stampacchia_max_residual,
            nu_k_convergence: v.nu_k_convergence.iter().map(|&(k, s)| [k, s]).collect(),
            l1_estimate: EstimateSection {
                lhs: v.l1_estimate.lhs,
                rhs: v.l1_estimate.rhs,
                holds: v.l1_estimate.holds,
            },
            energy_estimates: v
                .energy_estimates
                .iter()
                .map(|e| EnergySection {
                    k: e.k,
                    lhs: e.lhs,
                    rhs: e.rhs,
                    holds: e.holds,
                })
                .collect(),
            positivity_ok: v.positivity_ok,
        }
    }
}

#[derive(Serialize)]
pub struct PathSection {
    pub mean: f64,
    pub std_error: f64,
    pub n_paths: usize,
    pub seed: u64,
}

impl From<&PathEstimate<f64>> for PathSection {
    fn from(p: &PathEstimate<f64>) -> Self {
        Self {
            mean: p.mean,
            std_error: p.std_error,
            n_paths: p.n_paths,
            seed: p.seed,
        }
    }
}

#[derive(Serialize)]
pub struct SweepSection {
    pub widths: Vec<f64>,
    pub l1_norms: Vec<f64>,
    pub successive_gaps: Vec<f64>,
    pub converged: Vec<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap_to_atom: Option<f64>,
    pub gap_to_zero: f64,
}

#[derive(Serialize)]
pub struct DecomposeSection {
    pub tv_total: f64,
    pub tv_diffuse: f64,
    pub tv_concentrated: f64,
    pub diffuse_atoms: Vec<[f64; 2]>,
    pub concentrated_atoms: Vec<[f64; 2]>,
    pub polarity_rules: Vec<String>,
}

#[derive(Serialize)]
pub struct TvSection {
    pub tv_norm: f64,
    pub tv_positive_part: f64,
    pub tv_negative_part: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resolvent_ladder: Option<Vec<[f64; 2]>>,
}

/// Top-level report; sections are present per task.
#[derive(Serialize)]
pub struct Report {
    pub artifact: ArtifactInfo,
    pub task: String,
    pub config: ExperimentConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification: Option<VerificationSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fk: Option<PathSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lifetime: Option<PathSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decompose: Option<DecomposeSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tvnorm: Option<TvSection>,
}

impl Report {
    pub fn new(task: &str, config: ExperimentConfig) -> Self {
        Self {
            artifact: ArtifactInfo {
                name: "semel",
                version: env!("CARGO_PKG_VERSION"),
            },
            task: task.to_string(),
            config,
            solve: None,
            verification: None,
            fk: None,
            lifetime: None,
            sweep: None,
            decompose: None,
            tvnorm: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Grid table: named columns over the grid points. Non-finite values print
/// as `inf`/`-inf` markers.
pub struct GridTable {
    header: Vec<String>,
    columns: Vec<Vec<f64>>,
}

impl GridTable {
    pub fn new(dom: &Domain64) -> Self {
        Self {
            header: vec!["x".into()],
            columns: vec![dom.points().to_vec()],
        }
    }

    pub fn push(&mut self, name: impl Into<String>, values: &GridFunction64) -> &mut Self {
        self.header.push(name.into());
        self.columns.push(values.values().to_vec());
        self
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        let rows = self.columns[0].len();
        for i in 0..rows {
            for (j, col) in self.columns.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                let v = col[i];
                if v.is_finite() {
                    let _ = write!(out, "{v}");
                } else if v.is_nan() {
                    out.push_str("nan");
                } else if v > 0.0 {
                    out.push_str("inf");
                } else {
                    out.push_str("-inf");
                }
            }
            out.push('\n');
        }
        out
    }
}
