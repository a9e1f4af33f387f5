//! Report documents and their JSON rendering.

use std::io;

use fidelity_core::hierarchy::{BellCertificate, BoundReport};
use fidelity_core::sdp::SolverSettings;
use fidelity_core::seesaw::SeesawResult;
use serde::Serialize;
use serde_json::ser::{CompactFormatter, Formatter};

use crate::document::ProblemDocument;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToolInfo {
    pub name: &'static str,
    pub version: &'static str,
}

impl Default for ToolInfo {
    fn default() -> Self {
        Self {
            name: "fidelity-bounds",
            version: env!("CARGO_PKG_VERSION"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SettingsEcho {
    pub feasibility_tolerance: f64,
    pub gap_tolerance: f64,
    pub max_iterations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_size: Option<usize>,
}

impl SettingsEcho {
    pub fn new(s: &SolverSettings, max_size: Option<usize>) -> Self {
        Self {
            feasibility_tolerance: s.feasibility_tolerance,
            gap_tolerance: s.gap_tolerance,
            max_iterations: s.max_iterations,
            max_size,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualRecord {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelRecord {
    pub n: usize,
    pub primal: f64,
    pub dual: f64,
    /// Smallest certified bound over this and all lower listed levels.
    pub certified_bound: f64,
    /// Certified bound from this level's multipliers alone.
    pub level_certified_bound: f64,
    pub status: &'static str,
    pub residuals: ResidualRecord,
    pub iterations: usize,
    pub main_block_side: usize,
    pub wall_time: f64,
}

/// Level records in increasing n with running-minimum certified bounds.
pub fn level_records(mut reports: Vec<BoundReport>) -> Vec<LevelRecord> {
    reports.sort_by_key(|r| r.level);
    let mut best = f64::INFINITY;
    reports
        .into_iter()
        .map(|r| {
            best = best.min(r.certified_bound);
            LevelRecord {
                n: r.level,
                primal: r.primal_value,
                dual: r.dual_value,
                certified_bound: best,
                level_certified_bound: r.certified_bound,
                status: r.status.as_str(),
                residuals: ResidualRecord {
                    primal: r.residuals.primal,
                    dual: r.residuals.dual,
                    gap: r.residuals.gap,
                },
                iterations: r.iterations,
                main_block_side: r.main_side,
                wall_time: r.wall_time,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeesawRecord {
    pub fidelity: f64,
    pub outcomes: usize,
    pub restarts: usize,
    pub best_restart: usize,
    pub sweeps: usize,
    pub converged: bool,
}

impl From<&SeesawResult> for SeesawRecord {
    fn from(r: &SeesawResult) -> Self {
        Self {
            fidelity: r.fidelity,
            outcomes: r.strategy.len(),
            restarts: r.restarts,
            best_restart: r.best_restart,
            sweeps: r.sweeps,
            converged: r.converged,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateRecord {
    pub probs: Vec<f64>,
    pub lambda: [f64; 4],
    pub mu: [f64; 4],
    pub bound: f64,
    pub feasibility_slack: f64,
    /// Local basis of the attaining product strategy.
    pub basis: &'static str,
    pub strategy_fidelity: f64,
}

impl CertificateRecord {
    pub fn new(probs: &[f64], c: &BellCertificate, basis: &'static str, strategy_fidelity: f64) -> Self {
        Self {
            probs: probs.to_vec(),
            lambda: c.lambda,
            mu: c.mu,
            bound: c.bound,
            feasibility_slack: c.feasibility_slack,
            basis,
            strategy_fidelity,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportDocument {
    pub schema_version: u32,
    pub tool: ToolInfo,
    pub command: &'static str,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub problem: Option<ProblemDocument>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub settings: Option<SettingsEcho>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub levels: Vec<LevelRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seesaw: Option<SeesawRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateRecord>,
}

impl ReportDocument {
    pub fn new(command: &'static str, seed: u64) -> Self {
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            tool: ToolInfo::default(),
            command,
            seed,
            problem: None,
            settings: None,
            levels: Vec::new(),
            seesaw: None,
            certificate: None,
        }
    }
}

/// Compact JSON with every float written to 17 significant digits.
struct FloatFormatter(CompactFormatter);

impl Formatter for FloatFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

pub fn to_json<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FloatFormatter(CompactFormatter));
    value.serialize(&mut ser)?;
    out.push(b'\n');
    Ok(String::from_utf8(out).expect("JSON output is UTF-8"))
}
