use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::experiment::StepRecord;
use crate::{Error, Result};

pub const CSV_HEADER: &str = "step,n_docs,policy,l_effective,map,cum_time_s,h_rows,h_cols";

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Incremental CSV output, one row per (step, policy), flushed after every
/// step.
pub struct CsvWriter {
    out: BufWriter<File>,
    deterministic: bool,
}

impl CsvWriter {
    /// With `deterministic` set the timing column is written as zero.
    pub fn create(path: &Path, deterministic: bool) -> Result<Self> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "{CSV_HEADER}")?;
        Ok(Self { out, deterministic })
    }

    pub fn write(&mut self, record: &StepRecord) -> Result<()> {
        if record.policies.is_empty() {
            return Err(Error::Config("step record without policies".into()));
        }
        for p in &record.policies {
            let time = if self.deterministic { 0.0 } else { p.cum_time.as_secs_f64() };
            writeln!(
                self.out,
                "{},{},{},{},{},{},{},{}",
                record.step,
                record.n_docs,
                p.policy,
                p.l_effective,
                num(p.map),
                num(time),
                p.h_rows,
                p.h_cols
            )?;
        }
        self.out.flush()?;
        Ok(())
    }
}

pub fn emit_csv(records: &[StepRecord], path: &Path, deterministic: bool) -> Result<()> {
    if records.is_empty() {
        return Err(Error::Config("no records to write".into()));
    }
    let mut w = CsvWriter::create(path, deterministic)?;
    for r in records {
        w.write(r)?;
    }
    Ok(())
}

type Column = fn(&crate::PolicyStep, bool) -> f64;

/// Writes `map.dat` and `time.dat` into `dir`: whitespace-separated
/// `n_docs value` columns, one gnuplot data block (`index`) per policy.
pub fn emit_plot_data(records: &[StepRecord], dir: &Path, deterministic: bool) -> Result<Vec<PathBuf>> {
    let first = records
        .first()
        .ok_or_else(|| Error::Config("no records to plot".into()))?;
    let labels: Vec<&str> = first.policies.iter().map(|p| p.policy.as_str()).collect();
    if labels.is_empty() {
        return Err(Error::Config("no policies to plot".into()));
    }
    std::fs::create_dir_all(dir)?;
    let panels: [(&str, &str, Column); 2] = [
        ("map.dat", "mean average precision", |p, _| p.map),
        ("time.dat", "cumulative update time (s)", |p, det| {
            if det {
                0.0
            } else {
                p.cum_time.as_secs_f64()
            }
        }),
    ];
    let mut paths = Vec::new();
    for (file, title, value) in panels {
        let path = dir.join(file);
        let mut out = BufWriter::new(File::create(&path)?);
        writeln!(out, "# {title} against number of documents")?;
        for (i, label) in labels.iter().enumerate() {
            if i > 0 {
                writeln!(out, "\n")?;
            }
            writeln!(out, "# {label}")?;
            for r in records {
                let p = r.policies.get(i).filter(|p| p.policy == *label).ok_or_else(|| {
                    Error::Config(format!("step {} lacks policy {label}", r.step))
                })?;
                writeln!(out, "{} {}", r.n_docs, num(value(p, deterministic)))?;
            }
        }
        out.flush()?;
        paths.push(path);
    }
    Ok(paths)
}
