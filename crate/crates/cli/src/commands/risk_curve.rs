use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::Args;
use poisson_shrink::risk::{gamma_grid, risk_curve_mc, risk_curve_series};
use poisson_shrink::{EstimatorSpec, LossSpec, SeriesConfig};
use serde::{Deserialize, Serialize};

use crate::commands::{Common, Status};
use crate::config::{self, apply_flags};
use crate::output::{csv_with_config, json_with_config, Format, Outputs};
use crate::svg::{plot, Series, Style};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Series,
    Mc,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RiskCurveConfig {
    pub p: usize,
    /// Loss penalty in `L_c`.
    pub c: f64,
    /// Used when no `spec` is given.
    pub estimator: String,
    pub spec: Option<EstimatorSpec>,
    /// For `mean_shrink_b0`.
    pub b0: f64,
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub gamma_points: usize,
    pub log_grid: bool,
    pub method: Method,
    pub n: usize,
    pub seed: Option<u64>,
}

impl Default for RiskCurveConfig {
    fn default() -> Self {
        RiskCurveConfig {
            p: 9,
            c: 3.0,
            estimator: "delta_c".into(),
            spec: None,
            b0: 2.0,
            gamma_min: 0.01,
            gamma_max: 60.0,
            gamma_points: 200,
            log_grid: false,
            method: Method::Series,
            n: 100_000,
            seed: None,
        }
    }
}

#[derive(Debug, Args)]
pub struct RiskCurveArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub c: Option<f64>,
    /// delta_c, cz, dc_family (needs --spec), eb or mean_shrink_b0.
    #[arg(long)]
    pub estimator: Option<String>,
    /// EstimatorSpec JSON file; overrides --estimator.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub b0: Option<f64>,
    #[arg(long)]
    pub gamma_min: Option<f64>,
    #[arg(long)]
    pub gamma_max: Option<f64>,
    #[arg(long)]
    pub gamma_points: Option<usize>,
    #[arg(long)]
    pub log_grid: Option<bool>,
    /// series or mc.
    #[arg(long, value_parser = parse_method)]
    pub method: Option<Method>,
    /// Monte Carlo draws per grid point.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

fn parse_method(s: &str) -> Result<Method, String> {
    match s {
        "series" => Ok(Method::Series),
        "mc" => Ok(Method::Mc),
        _ => Err(format!("unknown method `{s}` (expected series or mc)")),
    }
}

/// The estimator named by `kind` with parameters taken from the config.
pub fn spec_for(kind: &str, p: usize, c: f64, b0: f64) -> Result<EstimatorSpec> {
    Ok(match kind {
        "delta_c" => EstimatorSpec::DeltaC { c },
        "cz" => EstimatorSpec::Cz,
        "eb" => EstimatorSpec::Eb {
            alpha: vec![1.0; p],
            c: 0.0,
        },
        "mean_shrink_b0" | "mean_shrink" => EstimatorSpec::MeanShrink { b0 },
        "dc_family" => bail!("dc_family needs a psi function: pass --spec with a dc_family spec"),
        other => bail!("unknown estimator kind `{other}`"),
    })
}

pub fn run(args: RiskCurveArgs) -> Result<Status> {
    let mut cfg: RiskCurveConfig = config::load(args.common.config.as_deref())?;
    apply_flags!(cfg, args; p, c, estimator, b0, gamma_min, gamma_max, gamma_points, log_grid, method, n);
    if let Some(path) = &args.spec {
        cfg.spec = Some(config::read_json(path, "estimator spec")?);
    }
    if args.seed.is_some() {
        cfg.seed = args.seed;
    }
    let spec = match &cfg.spec {
        Some(s) => s.clone(),
        None => spec_for(&cfg.estimator, cfg.p, cfg.c, cfg.b0)?,
    };
    let grid = gamma_grid(cfg.gamma_min, cfg.gamma_max, cfg.gamma_points, cfg.log_grid)?;
    let loss = LossSpec::lc(cfg.c);
    let curve = match cfg.method {
        Method::Series => risk_curve_series(&spec, cfg.p, &loss, &grid, &SeriesConfig::default())?,
        Method::Mc => {
            let seed = config::require_seed(cfg.seed)?;
            risk_curve_mc(&spec, cfg.p, &loss, &grid, cfg.n, seed)?
        }
    };

    let mut out = Outputs::new(&args.common.out, &args.common.format)?;
    if out.wants(Format::Csv) {
        out.write("risk_curve.csv", &csv_with_config(&cfg, &curve.to_csv()))?;
    }
    if out.wants(Format::Json) {
        out.write(
            "risk_curve.json",
            &json_with_config(&cfg, "curve", serde_json::to_value(&curve)?)?,
        )?;
    }
    if out.wants(Format::Svg) {
        let minimax = cfg.p as f64 + cfg.c;
        let pts: Vec<(f64, f64)> = grid
            .iter()
            .copied()
            .zip(curve.risk_values.iter().copied())
            .collect();
        let flat = vec![(grid[0], minimax), (grid[grid.len() - 1], minimax)];
        let label = format!("p + c = {minimax}");
        let svg = plot(
            &format!(
                "Risk of {} under L_c, p = {}, c = {}",
                spec.kind(),
                cfg.p,
                cfg.c
            ),
            "gamma = sum of theta",
            "risk",
            &[
                Series {
                    name: spec.kind(),
                    points: pts,
                    style: Style::Line,
                    color: "#1f77b4",
                },
                Series {
                    name: &label,
                    points: flat,
                    style: Style::Dashed,
                    color: "#d62728",
                },
            ],
            &crate::output::config_line(&cfg),
        );
        out.write("risk_curve.svg", &svg)?;
    }
    let first = curve.risk_values[0];
    let max = curve
        .risk_values
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    println!(
        "risk curve for {}: {} points, R({}) = {first:.6}, max {max:.6}, p + c = {}",
        spec.kind(),
        grid.len(),
        grid[0],
        cfg.p as f64 + cfg.c
    );
    let seed = if cfg.method == Method::Mc {
        cfg.seed
    } else {
        None
    };
    out.finish("risk-curve", &cfg, seed)?;
    Ok(Status::Success)
}
