use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::Args;
use poisson_shrink::{count_moments, sample_joint, JointDraw, SumLaw, SumProportionsPrior};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::commands::{Common, Status};
use crate::config::{self, apply_flags};
use crate::output::{csv_with_config, json_with_config, Format, Outputs};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleModelConfig {
    /// Full prior; when absent a symmetric one is built from the fields
    /// below.
    pub prior: Option<SumProportionsPrior>,
    pub p: usize,
    /// Symmetric Dirichlet parameter.
    pub alpha: f64,
    pub alpha0: f64,
    pub beta0: f64,
    pub n: usize,
    pub seed: Option<u64>,
}

impl Default for SampleModelConfig {
    fn default() -> Self {
        SampleModelConfig {
            prior: None,
            p: 4,
            alpha: 2.0,
            alpha0: 3.0,
            beta0: 0.5,
            n: 10_000,
            seed: None,
        }
    }
}

#[derive(Debug, Args)]
pub struct SampleModelArgs {
    #[command(flatten)]
    pub common: Common,
    /// PriorSpec JSON file.
    #[arg(long)]
    pub prior: Option<PathBuf>,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub alpha0: Option<f64>,
    #[arg(long)]
    pub beta0: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Sample mean, and covariance of two columns with a standard error from
/// the spread of the centred products.
fn mean(a: &[f64]) -> f64 {
    a.iter().sum::<f64>() / a.len() as f64
}

fn cov_se(a: &[f64], b: &[f64]) -> (f64, f64) {
    let n = a.len() as f64;
    let (ma, mb) = (mean(a), mean(b));
    let u: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).collect();
    let mu = mean(&u);
    let var = u.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (n - 1.0);
    (mu * n / (n - 1.0), (var / n).sqrt())
}

fn moment(est: f64, se: f64) -> Value {
    json!({ "estimate": est, "se": se })
}

fn empirical(draws: &[JointDraw], p: usize) -> Value {
    if draws.len() < 2 {
        return Value::Null;
    }
    let col = |f: &dyn Fn(&JointDraw) -> f64| draws.iter().map(f).collect::<Vec<f64>>();
    let y0 = col(&|d| d.y[0] as f64);
    let t0 = col(&|d| d.theta[0]);
    let (var_y, var_y_se) = cov_se(&y0, &y0);
    let (var_t, var_t_se) = cov_se(&t0, &t0);
    let n = draws.len() as f64;
    let mut m = json!({
        "mean_y": moment(mean(&y0), (var_y / n).sqrt()),
        "var_y": moment(var_y, var_y_se),
        "var_theta": moment(var_t, var_t_se),
    });
    if p >= 2 {
        let y1 = col(&|d| d.y[1] as f64);
        let t1 = col(&|d| d.theta[1]);
        let (cov_y, cov_y_se) = cov_se(&y0, &y1);
        let (cov_t, cov_t_se) = cov_se(&t0, &t1);
        let (vy1, _) = cov_se(&y1, &y1);
        let (vt1, _) = cov_se(&t1, &t1);
        m["cov_y"] = moment(cov_y, cov_y_se);
        m["cov_theta"] = moment(cov_t, cov_t_se);
        m["corr_y"] = json!(cov_y / (var_y * vy1).sqrt());
        m["rho"] = json!(cov_t / (var_t * vt1).sqrt());
    }
    m
}

pub fn run(args: SampleModelArgs) -> Result<Status> {
    let mut cfg: SampleModelConfig = config::load(args.common.config.as_deref())?;
    apply_flags!(cfg, args; p, alpha, alpha0, beta0, n);
    if args.seed.is_some() {
        cfg.seed = args.seed;
    }
    if let Some(path) = &args.prior {
        cfg.prior = Some(config::read_json(path, "prior spec")?);
    }
    let seed = config::require_seed(cfg.seed)?;
    let prior = match &cfg.prior {
        Some(p) => p.clone(),
        None => SumProportionsPrior::symmetric(
            SumLaw::Gamma {
                alpha0: cfg.alpha0,
                beta0: cfg.beta0,
            },
            cfg.p,
            cfg.alpha,
        )?,
    };
    prior.validate()?;
    if !prior.sum_law.is_proper() {
        bail!("cannot sample from a flat sum law; give a gamma sum law");
    }
    let p = prior.p();
    let draws = sample_joint(&prior, seed, cfg.n)?;
    // Closed-form moments exist for symmetric priors only.
    let theory = count_moments(&prior).ok();

    let mut out = Outputs::new(&args.common.out, &args.common.format)?;
    if out.wants(Format::Csv) {
        let mut header = vec!["draw".to_string()];
        header.extend((1..=p).map(|i| format!("theta_{i}")));
        header.extend((1..=p).map(|i| format!("y_{i}")));
        let mut csv = header.join(",") + "\n";
        for (k, d) in draws.iter().enumerate() {
            let mut cells = vec![k.to_string()];
            cells.extend(d.theta.iter().map(f64::to_string));
            cells.extend(d.y.iter().map(u64::to_string));
            let _ = writeln!(csv, "{}", cells.join(","));
        }
        out.write("samples.csv", &csv_with_config(&cfg, &csv))?;
    }
    let summary = json!({
        "n": cfg.n,
        "empirical": empirical(&draws, p),
        "theory": theory,
    });
    if out.wants(Format::Json) {
        out.write(
            "moments.json",
            &json_with_config(&cfg, "moments", summary.clone())?,
        )?;
    }
    println!("sampled {} draws of (theta, y) with p = {p}", draws.len());
    if let (Some(t), Value::Object(e)) = (theory, &summary["empirical"]) {
        if let Some(v) = e.get("var_y").and_then(|v| v["estimate"].as_f64()) {
            println!("Var Y_1: empirical {v:.4}, formula {:.4}", t.var_y);
        }
        if let Some(v) = e.get("cov_y").and_then(|v| v["estimate"].as_f64()) {
            println!("cov(Y_1, Y_2): empirical {v:.4}, formula {:.4}", t.cov_y);
        }
    }
    out.finish("sample-model", &cfg, Some(seed))?;
    Ok(Status::Success)
}
