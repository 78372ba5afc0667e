use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use super::{ExperimentConfig, ScoreGrid};
use crate::data::fmt_sig6;
use crate::error::{Error, Result};
use crate::eval::{aggregate, Aggregate, Cell};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealizedEpsilon {
    pub dataset: String,
    pub epsilon: f64,
    pub realized_epsilon: f64,
}

/// Contents of `run_meta.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMeta {
    pub command: String,
    pub axis: Option<String>,
    pub version: String,
    pub n_cells: usize,
    pub realized_epsilon: Vec<RealizedEpsilon>,
    pub config: ExperimentConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub cells: Vec<Cell>,
    pub aggregates: Vec<Aggregate>,
    pub meta: RunMeta,
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_sig6).unwrap_or_default()
}

/// Quote a CSV field if needed.
fn field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl Report {
    pub fn new(
        command: &str,
        axis: Option<&str>,
        config: &ExperimentConfig,
        cells: Vec<Cell>,
    ) -> Self {
        let mut realized: Vec<RealizedEpsilon> = Vec::new();
        for c in &cells {
            if !realized.iter().any(|r| {
                r.dataset == c.dataset
                    && r.epsilon == c.epsilon
                    && r.realized_epsilon == c.realized_epsilon
            }) {
                realized.push(RealizedEpsilon {
                    dataset: c.dataset.clone(),
                    epsilon: c.epsilon,
                    realized_epsilon: c.realized_epsilon,
                });
            }
        }
        Self {
            aggregates: aggregate(&cells),
            meta: RunMeta {
                command: command.to_string(),
                axis: axis.map(str::to_string),
                version: env!("CARGO_PKG_VERSION").to_string(),
                n_cells: cells.len(),
                realized_epsilon: realized,
                config: config.clone(),
            },
            cells,
        }
    }

    /// Long format, one row per cell.
    pub fn cells_csv(&self) -> String {
        let mut out = String::from("dataset,detector,evidence,method,axis,axis_value,beta,epsilon,realized_epsilon,seed,auroc\n");
        for c in &self.cells {
            let (axis, value) = match &c.axis {
                Some((a, v)) => (a.as_str(), fmt_sig6(*v)),
                None => ("", String::new()),
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                field(&c.dataset),
                field(&c.detector),
                field(&c.evidence),
                c.method,
                axis,
                value,
                opt(c.beta),
                fmt_sig6(c.epsilon),
                fmt_sig6(c.realized_epsilon),
                c.seed,
                fmt_sig6(c.auroc)
            );
        }
        out
    }

    pub fn aggregates_csv(&self) -> String {
        let mut out =
            String::from("dataset,detector,evidence,method,axis,beta,epsilon,n_seeds,mean_auroc,se,se_defined,mean_beta\n");
        for a in &self.aggregates {
            let k = &a.key;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                field(&k.dataset),
                field(&k.detector),
                field(&k.evidence),
                k.method,
                k.axis.as_deref().unwrap_or(""),
                k.beta,
                k.epsilon,
                a.n_seeds,
                fmt_sig6(a.mean),
                fmt_sig6(a.se),
                a.se_defined,
                opt(a.mean_beta)
            );
        }
        out
    }

    pub fn meta_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.meta).expect("meta serializes");
        s.push('\n');
        s
    }

    /// Write `cells.csv`, `aggregates.csv` and `run_meta.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        write_file(&dir.join("cells.csv"), &self.cells_csv())?;
        write_file(&dir.join("aggregates.csv"), &self.aggregates_csv())?;
        write_file(&dir.join("run_meta.json"), &self.meta_json())
    }
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// `x,y,blind_score,fused_score`, both scores anomaly-high.
pub fn write_grid(path: &Path, grid: &ScoreGrid) -> Result<()> {
    let mut out = String::from("x,y,blind_score,fused_score\n");
    for i in 0..grid.x.len() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_sig6(grid.x[i]),
            fmt_sig6(grid.y[i]),
            fmt_sig6(grid.blind_score[i]),
            fmt_sig6(grid.fused_score[i])
        );
    }
    write_file(path, &out)
}
