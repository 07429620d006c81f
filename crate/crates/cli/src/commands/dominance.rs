use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::Args;
use poisson_shrink::risk::{
    dominance_check_quad, dominance_check_theorem2, gamma_grid, QuadReport, Theorem2Report,
};
use poisson_shrink::{phi_delta_c, EstimatorSpec, MatrixSpec, PositiveCountRule, SeriesConfig};
use serde::{Deserialize, Serialize};

use crate::commands::{Common, Status};
use crate::config::{self, apply_flags};
use crate::output::{csv_with_config, json_with_config, Format, Outputs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Theorem2,
    Quad,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DominanceConfig {
    pub mode: Mode,
    /// Dimensions to scan; defaults to 2..=9 (theorem2) or 3 (quad).
    pub p: Option<Vec<usize>>,
    /// Loss penalties to scan; defaults to 0, 1, 3 (theorem2) or 1 (quad,
    /// used by the sum-penalty matrix).
    pub c: Option<Vec<f64>>,
    /// theorem2: delta_c or cz, used when no `spec` is given.
    pub estimator: String,
    /// theorem2: the estimator's own `c` for delta_c; the loss `c` if unset.
    pub estimator_c: Option<f64>,
    pub spec: Option<EstimatorSpec>,
    pub z_max: u64,
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub gamma_points: usize,
    /// quad: loss matrices to check.
    pub matrices: Vec<String>,
    pub y_max: u64,
    pub variant: PositiveCountRule,
    pub bound_m: Option<f64>,
}

impl Default for DominanceConfig {
    fn default() -> Self {
        DominanceConfig {
            mode: Mode::Theorem2,
            p: None,
            c: None,
            estimator: "delta_c".into(),
            estimator_c: None,
            spec: None,
            z_max: 100_000,
            gamma_min: 1e-3,
            gamma_max: 1e3,
            gamma_points: 24,
            matrices: vec!["identity".into(), "sum_penalty".into(), "cumulative".into()],
            y_max: 5,
            variant: PositiveCountRule::AtLeastOne,
            bound_m: None,
        }
    }
}

#[derive(Debug, Args)]
pub struct DominanceArgs {
    #[command(flatten)]
    pub common: Common,
    /// theorem2 or quad.
    #[arg(long, value_parser = parse_mode)]
    pub mode: Option<Mode>,
    /// Comma-separated dimensions.
    #[arg(long, value_delimiter = ',')]
    pub p: Option<Vec<usize>>,
    /// Comma-separated loss penalties.
    #[arg(long, value_delimiter = ',')]
    pub c: Option<Vec<f64>>,
    #[arg(long)]
    pub estimator: Option<String>,
    #[arg(long)]
    pub estimator_c: Option<f64>,
    /// EstimatorSpec JSON file.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub z_max: Option<u64>,
    #[arg(long)]
    pub gamma_min: Option<f64>,
    #[arg(long)]
    pub gamma_max: Option<f64>,
    #[arg(long)]
    pub gamma_points: Option<usize>,
    /// Comma-separated: identity, sum_penalty, cumulative.
    #[arg(long, value_delimiter = ',')]
    pub matrices: Option<Vec<String>>,
    #[arg(long)]
    pub y_max: Option<u64>,
    /// N-geq-1 or N-leq-1.
    #[arg(long, value_parser = parse_variant)]
    pub variant: Option<PositiveCountRule>,
    #[arg(long)]
    pub bound_m: Option<f64>,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    match s {
        "theorem2" => Ok(Mode::Theorem2),
        "quad" => Ok(Mode::Quad),
        _ => Err(format!("unknown mode `{s}` (expected theorem2 or quad)")),
    }
}

fn parse_variant(s: &str) -> Result<PositiveCountRule, String> {
    serde_json::from_value(serde_json::Value::String(s.into()))
        .map_err(|_| format!("unknown variant `{s}` (expected N-geq-1 or N-leq-1)"))
}

fn matrix_spec(name: &str, c: f64) -> Result<MatrixSpec> {
    Ok(match name {
        "identity" => MatrixSpec::Identity,
        "sum_penalty" => MatrixSpec::SumPenalty { c },
        "cumulative" => MatrixSpec::Cumulative,
        other => bail!("unknown matrix `{other}` (expected identity, sum_penalty or cumulative)"),
    })
}

fn theorem2(cfg: &DominanceConfig) -> Result<Vec<Theorem2Report>> {
    let ps = cfg.p.clone().unwrap_or_else(|| (2..=9).collect());
    let cs = cfg.c.clone().unwrap_or_else(|| vec![0.0, 1.0, 3.0]);
    let grid = gamma_grid(cfg.gamma_min, cfg.gamma_max, cfg.gamma_points, true)?;
    let series = SeriesConfig::default();
    let mut reports = Vec::new();
    for &p in &ps {
        for &c in &cs {
            let report = match &cfg.spec {
                Some(spec) => {
                    let Some(phi) = spec.shrink_phi(p) else {
                        bail!(
                            "estimator `{}` is not of the form (1 - phi(Z))Y",
                            spec.kind()
                        );
                    };
                    dominance_check_theorem2(|z| phi(z), p, c, cfg.z_max, &grid, &series)?
                }
                None => {
                    let c0 = match cfg.estimator.as_str() {
                        "delta_c" => cfg.estimator_c.unwrap_or(c),
                        "cz" => 0.0,
                        other => bail!(
                            "unknown estimator `{other}` for theorem2 (use delta_c, cz or --spec)"
                        ),
                    };
                    dominance_check_theorem2(phi_delta_c(p, c0), p, c, cfg.z_max, &grid, &series)?
                }
            };
            reports.push(report);
        }
    }
    Ok(reports)
}

#[derive(Serialize)]
struct QuadEntry {
    matrix: String,
    c: f64,
    report: QuadReport,
}

fn quad(cfg: &DominanceConfig) -> Result<Vec<QuadEntry>> {
    let ps = cfg.p.clone().unwrap_or_else(|| vec![3]);
    let cs = cfg.c.clone().unwrap_or_else(|| vec![1.0]);
    let mut out = Vec::new();
    for &p in &ps {
        for name in &cfg.matrices {
            // Only the sum-penalty matrix depends on c.
            let cs_here: &[f64] = if name == "sum_penalty" { &cs } else { &[0.0] };
            for &c in cs_here {
                let a = matrix_spec(name, c)?.build(p)?;
                let report = dominance_check_quad(p, &a, cfg.y_max, cfg.variant, cfg.bound_m)?;
                out.push(QuadEntry {
                    matrix: name.clone(),
                    c,
                    report,
                });
            }
        }
    }
    Ok(out)
}

pub fn run(args: DominanceArgs) -> Result<Status> {
    let mut cfg: DominanceConfig = config::load(args.common.config.as_deref())?;
    apply_flags!(cfg, args; mode, estimator, z_max, gamma_min, gamma_max, gamma_points, matrices, y_max, variant);
    if args.p.is_some() {
        cfg.p = args.p.clone();
    }
    if args.c.is_some() {
        cfg.c = args.c.clone();
    }
    if args.estimator_c.is_some() {
        cfg.estimator_c = args.estimator_c;
    }
    if args.bound_m.is_some() {
        cfg.bound_m = args.bound_m;
    }
    if let Some(path) = &args.spec {
        cfg.spec = Some(config::read_json(path, "estimator spec")?);
    }

    let mut out = Outputs::new(&args.common.out, &args.common.format)?;
    let passed = match cfg.mode {
        Mode::Theorem2 => {
            let reports = theorem2(&cfg)?;
            let mut csv = String::from("p,c,passed,first_violation,sup_risk_diff,argmax_gamma\n");
            for r in &reports {
                let first = r
                    .conditions
                    .iter()
                    .filter_map(|c| c.first_violation)
                    .min()
                    .map_or(String::new(), |z| z.to_string());
                let _ = writeln!(
                    csv,
                    "{},{},{},{first},{},{}",
                    r.p, r.c, r.passed, r.sup_risk_diff, r.argmax_gamma
                );
                let status = if r.passed { "pass" } else { "FAIL" };
                let failing: Vec<String> = r
                    .conditions
                    .iter()
                    .filter(|c| !c.passed)
                    .map(|c| format!("{} from z = {}", c.name, c.first_violation.unwrap_or(0)))
                    .collect();
                println!(
                    "p = {}, c = {}: {status}; sup risk - (p + c) = {:.4e} at gamma = {}{}",
                    r.p,
                    r.c,
                    r.sup_risk_diff,
                    r.argmax_gamma,
                    if failing.is_empty() {
                        String::new()
                    } else {
                        format!("; {}", failing.join(", "))
                    }
                );
            }
            if out.wants(Format::Csv) {
                out.write("dominance.csv", &csv_with_config(&cfg, &csv))?;
            }
            if out.wants(Format::Json) {
                out.write(
                    "dominance.json",
                    &json_with_config(&cfg, "reports", serde_json::to_value(&reports)?)?,
                )?;
            }
            reports.iter().all(|r| r.passed)
        }
        Mode::Quad => {
            let entries = quad(&cfg)?;
            let mut csv =
                String::from("p,matrix,c,variant,bound_m,points,violations,worst_excess\n");
            let variant = serde_json::to_value(cfg.variant)?;
            let variant = variant.as_str().unwrap_or_default();
            for e in &entries {
                let r = &e.report;
                let _ = writeln!(
                    csv,
                    "{},{},{},{variant},{},{},{},{}",
                    r.p, e.matrix, e.c, r.bound_m, r.points, r.violation_count, r.worst_excess
                );
                println!(
                    "p = {}, A = {} (c = {}), {variant}: {} of {} points violate the bound",
                    r.p, e.matrix, e.c, r.violation_count, r.points
                );
                for v in &r.violations {
                    println!(
                        "  y = {:?}: D = {:.6e} > bound {:.6e}",
                        v.y,
                        v.d,
                        v.bound + 0.0
                    );
                }
            }
            if out.wants(Format::Csv) {
                out.write("dominance.csv", &csv_with_config(&cfg, &csv))?;
            }
            if out.wants(Format::Json) {
                out.write(
                    "dominance.json",
                    &json_with_config(&cfg, "reports", serde_json::to_value(&entries)?)?,
                )?;
            }
            entries.iter().all(|e| e.report.passed)
        }
    };
    out.finish("dominance-scan", &cfg, None)?;
    println!(
        "{}",
        if passed {
            "all checks pass"
        } else {
            "some checks fail"
        }
    );
    Ok(if passed {
        Status::Success
    } else {
        Status::CheckFailed
    })
}
