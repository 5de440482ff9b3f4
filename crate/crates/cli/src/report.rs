//! Benchmark table rendering.

use std::io::Write;

use anyhow::Result;
use gpdevopt::testbed::{BenchmarkResult, ReplicateRecord};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Markdown,
}

#[derive(Serialize)]
struct Row<'a> {
    function: &'a str,
    strategy: String,
    pct_delta_deviance: f64,
    pct_delta_rmspe: f64,
    mean_fe: f64,
    mean_deviance: f64,
    mean_rmspe: f64,
    rmspe_std_err: f64,
    replicates: usize,
    failed: usize,
}

fn rows(results: &[BenchmarkResult]) -> Vec<Row<'_>> {
    results
        .iter()
        .map(|r| Row {
            function: &r.function,
            strategy: r.strategy.to_string(),
            pct_delta_deviance: r.pct_delta_deviance,
            pct_delta_rmspe: r.pct_delta_rmspe,
            mean_fe: r.mean_fe,
            mean_deviance: r.mean_deviance,
            mean_rmspe: r.mean_rmspe,
            rmspe_std_err: r.rmspe_std_err,
            replicates: r.replicates,
            failed: r.failed,
        })
        .collect()
}

fn dash_if_best(v: f64) -> String {
    if v == 0.0 {
        "-".to_string()
    } else {
        format!("{v:.3}")
    }
}

pub fn write_results<W: Write>(out: &mut W, results: &[BenchmarkResult], format: Format) -> Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in rows(results) {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &rows(results))?;
            writeln!(out)?;
        }
        Format::Markdown => {
            let mut first = true;
            let mut current = None;
            for r in results {
                if current != Some(&r.function) {
                    if !first {
                        writeln!(out)?;
                    }
                    first = false;
                    current = Some(&r.function);
                    writeln!(out, "### {}\n", r.function)?;
                    writeln!(out, "| Algorithm | %dL | %dRMSPE | FE | RMSPE | Std. Err. |")?;
                    writeln!(out, "|---|---:|---:|---:|---:|---:|")?;
                }
                writeln!(
                    out,
                    "| {} | {} | {} | {:.0} | {:.5} | {:.5} |",
                    r.strategy,
                    dash_if_best(r.pct_delta_deviance),
                    dash_if_best(r.pct_delta_rmspe),
                    r.mean_fe,
                    r.mean_rmspe,
                    r.rmspe_std_err
                )?;
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct RawRow<'a> {
    function: &'a str,
    replicate: usize,
    strategy: String,
    deviance: f64,
    rmspe: f64,
    fe: usize,
    beta_star: String,
    error: &'a str,
}

pub fn write_records<W: Write>(out: W, records: &[ReplicateRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(RawRow {
            function: &r.function,
            replicate: r.replicate,
            strategy: r.strategy.to_string(),
            deviance: r.deviance,
            rmspe: r.rmspe,
            fe: r.fe,
            beta_star: r.beta_star.iter().map(f64::to_string).collect::<Vec<_>>().join(";"),
            error: r.error.as_deref().unwrap_or(""),
        })?;
    }
    w.flush()?;
    Ok(())
}
