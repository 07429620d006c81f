use std::fmt::Write as _;

use anyhow::Result;
use clap::Args;
use poisson_shrink::{eb_regression_demo, EbDemoConfig};
use serde::{Deserialize, Serialize};

use crate::commands::{Common, Status};
use crate::config::{self, apply_flags};
use crate::output::{config_line, csv_with_config, json_with_config, Format, Outputs};
use crate::svg::{plot, Series, Style};

/// The library config with the seed left unset until given.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EbDemoCliConfig {
    pub p: usize,
    pub gamma0: f64,
    pub gamma1: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub beta: f64,
    pub c: f64,
    pub replications: usize,
    pub seed: Option<u64>,
}

impl Default for EbDemoCliConfig {
    fn default() -> Self {
        let d = EbDemoConfig::default();
        EbDemoCliConfig {
            p: d.p,
            gamma0: d.gamma0,
            gamma1: d.gamma1,
            x_min: d.x_min,
            x_max: d.x_max,
            beta: d.beta,
            c: d.c,
            replications: d.replications,
            seed: None,
        }
    }
}

#[derive(Debug, Args)]
pub struct EbDemoArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub p: Option<usize>,
    /// Intercept of log alpha_i.
    #[arg(long, allow_negative_numbers = true)]
    pub gamma0: Option<f64>,
    /// Slope of log alpha_i in x.
    #[arg(long, allow_negative_numbers = true)]
    pub gamma1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub x_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub x_max: Option<f64>,
    /// Prior rate of theta_i.
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub replications: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

pub fn run(args: EbDemoArgs) -> Result<Status> {
    let mut cfg: EbDemoCliConfig = config::load(args.common.config.as_deref())?;
    apply_flags!(cfg, args; p, gamma0, gamma1, x_min, x_max, beta, c, replications);
    if args.seed.is_some() {
        cfg.seed = args.seed;
    }
    let seed = config::require_seed(cfg.seed)?;
    let demo = EbDemoConfig {
        p: cfg.p,
        gamma0: cfg.gamma0,
        gamma1: cfg.gamma1,
        x_min: cfg.x_min,
        x_max: cfg.x_max,
        beta: cfg.beta,
        c: cfg.c,
        replications: cfg.replications,
        seed,
    };
    let r = eb_regression_demo(&demo)?;

    let mut out = Outputs::new(&args.common.out, &args.common.format)?;
    if out.wants(Format::Csv) {
        let mut csv = String::from("i,x,alpha,prior_mean,theta,y,eb\n");
        for i in 0..cfg.p {
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{},{}",
                i + 1,
                r.x[i],
                r.alpha[i],
                r.prior_mean[i],
                r.first.theta[i],
                r.first.y[i],
                r.first.eb[i]
            );
        }
        out.write("eb_scatter.csv", &csv_with_config(&cfg, &csv))?;
    }
    if out.wants(Format::Json) {
        let summary = serde_json::json!({
            "replications": cfg.replications,
            "raw_loss": r.raw_loss,
            "eb_loss": r.eb_loss,
            "eb_minus_raw": r.diff,
        });
        out.write(
            "eb_summary.json",
            &json_with_config(&cfg, "summary", summary)?,
        )?;
    }
    if out.wants(Format::Svg) {
        let mut prior: Vec<(f64, f64)> =
            r.x.iter()
                .copied()
                .zip(r.prior_mean.iter().copied())
                .collect();
        prior.sort_by(|a, b| a.0.total_cmp(&b.0));
        let raw =
            r.x.iter()
                .zip(&r.first.y)
                .map(|(&x, &y)| (x, y as f64))
                .collect();
        let eb =
            r.x.iter()
                .copied()
                .zip(r.first.eb.iter().copied())
                .collect();
        let truth =
            r.x.iter()
                .copied()
                .zip(r.first.theta.iter().copied())
                .collect();
        let svg = plot(
            &format!("Empirical Bayes shrinkage, p = {}", cfg.p),
            "x",
            "count / estimate",
            &[
                Series {
                    name: "raw y",
                    points: raw,
                    style: Style::Points,
                    color: "#7f7f7f",
                },
                Series {
                    name: "empirical Bayes",
                    points: eb,
                    style: Style::Points,
                    color: "#1f77b4",
                },
                Series {
                    name: "true theta",
                    points: truth,
                    style: Style::Points,
                    color: "#2ca02c",
                },
                Series {
                    name: "prior mean alpha/beta",
                    points: prior,
                    style: Style::Line,
                    color: "#d62728",
                },
            ],
            &config_line(&cfg),
        );
        out.write("eb_scatter.svg", &svg)?;
    }
    println!(
        "mean L1* loss over {} replications: raw {:.4} (se {:.4}), EB {:.4} (se {:.4}); difference {:.4} ({:.1} se)",
        cfg.replications,
        r.raw_loss.mean,
        r.raw_loss.se,
        r.eb_loss.mean,
        r.eb_loss.se,
        r.diff.mean,
        r.diff.mean / r.diff.se
    );
    out.finish("eb-demo", &cfg, Some(seed))?;
    Ok(Status::Success)
}
