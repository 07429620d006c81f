use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use poisson_shrink::{CountVector, EstimatorSpec, MatrixSpec};
use serde::{Deserialize, Serialize};

use crate::commands::risk_curve::spec_for;
use crate::commands::{Common, Status};
use crate::config::{self, apply_flags};
use crate::output::{csv_with_config, json_with_config, Format, Outputs};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimateConfig {
    pub input: Option<PathBuf>,
    pub spec: Option<EstimatorSpec>,
    /// Used when no `spec` is given.
    pub estimator: String,
    pub c: f64,
    pub b0: f64,
}

impl Default for EstimateConfig {
    fn default() -> Self {
        EstimateConfig {
            input: None,
            spec: None,
            estimator: "delta_c".into(),
            c: 0.0,
            b0: 2.0,
        }
    }
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub common: Common,
    /// CSV of counts, one replicate per row.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// EstimatorSpec JSON file; overrides --estimator.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub estimator: Option<String>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub b0: Option<f64>,
}

fn estimator_from_kind(kind: &str, p: usize, c: f64, b0: f64) -> Result<EstimatorSpec> {
    Ok(match kind {
        "mle" => EstimatorSpec::Mle,
        "mean_shrink_careful" => EstimatorSpec::MeanShrinkCareful,
        "matrix" => EstimatorSpec::Matrix { c, cols: None },
        "quad_dominator" => EstimatorSpec::QuadDominator {
            a: MatrixSpec::SumPenalty { c },
            variant: Default::default(),
        },
        "eb" => EstimatorSpec::Eb {
            alpha: vec![1.0; p],
            c,
        },
        other => spec_for(other, p, c, b0)?,
    })
}

/// Reads counts from CSV. Lines starting with `#` are skipped and a first
/// row with no numeric cell is taken as a header.
pub fn read_counts(path: &Path) -> Result<Vec<Vec<u64>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let mut rows: Vec<Vec<u64>> = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.with_context(|| format!("reading {}", path.display()))?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        if k == 0 && rec.iter().all(|s| s.parse::<f64>().is_err()) {
            continue;
        }
        let line = rec.position().map_or(k as u64 + 1, |p| p.line());
        let row = rec
            .iter()
            .enumerate()
            .map(|(j, s)| {
                s.parse::<u64>().with_context(|| {
                    format!(
                        "line {line}, column {}: `{s}` is not a nonnegative integer",
                        j + 1
                    )
                })
            })
            .collect::<Result<Vec<u64>>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                bail!(
                    "line {line}: ragged row with {} cells, expected {}",
                    row.len(),
                    first.len()
                );
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        bail!("{} contains no rows of counts", path.display());
    }
    Ok(rows)
}

pub fn run(args: EstimateArgs) -> Result<Status> {
    let mut cfg: EstimateConfig = config::load(args.common.config.as_deref())?;
    apply_flags!(cfg, args; estimator, c, b0);
    if args.input.is_some() {
        cfg.input = args.input.clone();
    }
    if let Some(path) = &args.spec {
        cfg.spec = Some(config::read_json(path, "estimator spec")?);
    }
    let Some(input) = cfg.input.clone() else {
        bail!("an input file is required: pass --input or set \"input\" in the config file");
    };
    let rows = read_counts(&input)?;
    let p = rows[0].len();
    let spec = match &cfg.spec {
        Some(s) => s.clone(),
        None => estimator_from_kind(&cfg.estimator, p, cfg.c, cfg.b0)?,
    };
    // Record the spec actually used.
    cfg.spec = Some(spec.clone());
    let est = spec.build(p)?;
    let block = match &spec {
        EstimatorSpec::Matrix { cols, .. } => Some(cols.unwrap_or(p)),
        _ => None,
    };

    let mut header: Vec<String> = (1..=p).map(|i| format!("est_{i}")).collect();
    header.push("sum".into());
    if let Some(cols) = block {
        header.extend((1..=p / cols).map(|i| format!("row_sum_{i}")));
        header.extend((1..=cols).map(|j| format!("col_sum_{j}")));
    }
    let mut csv = header.join(",") + "\n";
    let mut all = Vec::with_capacity(rows.len());
    for (r, row) in rows.into_iter().enumerate() {
        let y = CountVector::new(row)?;
        let d = est
            .estimate(&y)
            .with_context(|| format!("estimating row {}", r + 1))?;
        let d = d.into_inner();
        let mut cells: Vec<f64> = d.clone();
        cells.push(d.iter().sum());
        if let Some(cols) = block {
            cells.extend(d.chunks(cols).map(|c| c.iter().sum::<f64>()));
            cells.extend((0..cols).map(|j| d.iter().skip(j).step_by(cols).sum::<f64>()));
        }
        let line: Vec<String> = cells.iter().map(f64::to_string).collect();
        let _ = writeln!(csv, "{}", line.join(","));
        all.push(d);
    }

    let mut out = Outputs::new(&args.common.out, &args.common.format)?;
    if out.wants(Format::Csv) {
        out.write("estimates.csv", &csv_with_config(&cfg, &csv))?;
    }
    if out.wants(Format::Json) {
        out.write(
            "estimates.json",
            &json_with_config(&cfg, "estimates", serde_json::to_value(&all)?)?,
        )?;
    }
    println!(
        "estimated {} rows of {p} counts with {}",
        all.len(),
        spec.kind()
    );
    out.finish("estimate", &cfg, None)?;
    Ok(Status::Success)
}
