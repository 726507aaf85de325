use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use cavqed_core::detection::CountHistograms;
use cavqed_core::fit::FitData;
use cavqed_core::spectrum::Spectrum;
use cavqed_core::two_atom::ReflectivityMap;
use clap::ValueEnum;
use csv::{Terminator, WriterBuilder};
use serde::Serialize;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Opens `path` for writing, or stdout when no path is given.
pub fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            Box::new(BufWriter::new(
                File::create(p).map_err(|e| CliError::Output(format!("{}: {e}", p.display())))?,
            ))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    WriterBuilder::new().terminator(Terminator::Any(b'\n')).from_writer(w)
}

/// Rows of already formatted cells under `header`.
pub fn write_table<W: Write>(
    w: W,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<(), CliError> {
    let mut out = csv_writer(w);
    out.write_record(header)?;
    for row in rows {
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_json<W: Write, T: Serialize + ?Sized>(mut w: W, value: &T) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct SpectrumJson<'a> {
    probe_mhz: &'a [f64],
    reflectivity: &'a [f64],
    stderr: Option<&'a [f64]>,
}

pub fn write_spectrum<W: Write>(w: W, s: &Spectrum, format: Format) -> Result<(), CliError> {
    match format {
        Format::Csv => {
            let rows = s.probe().iter().zip(s.values()).enumerate().map(|(i, (p, v))| {
                let e = s.stderr().map(|e| e[i].to_string()).unwrap_or_default();
                vec![p.to_string(), v.to_string(), e]
            });
            write_table(w, &["probe_mhz", "reflectivity", "stderr"], rows)
        }
        Format::Json => write_json(
            w,
            &SpectrumJson {
                probe_mhz: s.probe(),
                reflectivity: s.values(),
                stderr: s.stderr(),
            },
        ),
    }
}

pub fn write_map<W: Write>(w: W, map: &ReflectivityMap, format: Format) -> Result<(), CliError> {
    match format {
        Format::Csv => {
            let rows = map.delta_ab.iter().zip(&map.rows).flat_map(|(d, row)| {
                map.probe
                    .iter()
                    .zip(row)
                    .map(move |(p, v)| vec![p.to_string(), d.to_string(), v.to_string()])
            });
            write_table(w, &["probe_mhz", "delta_ab_mhz", "reflectivity"], rows)
        }
        Format::Json => write_json(w, map),
    }
}

pub fn write_histograms<W: Write>(w: W, h: &CountHistograms, format: Format) -> Result<(), CliError> {
    let (f0, f1) = h.frequencies();
    match format {
        Format::Csv => {
            let rows = f0
                .iter()
                .zip(&f1)
                .enumerate()
                .map(|(k, (a, b))| vec![k.to_string(), a.to_string(), b.to_string()]);
            write_table(w, &["count", "frequency_h0", "frequency_h1"], rows)
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Hist<'a> {
                frequency_h0: &'a [f64],
                frequency_h1: &'a [f64],
            }
            write_json(
                w,
                &Hist {
                    frequency_h0: &f0,
                    frequency_h1: &f1,
                },
            )
        }
    }
}

/// Reads `probe_mhz,reflectivity[,stderr]`.
pub fn read_spectrum_csv(path: &Path) -> Result<FitData, CliError> {
    let bad = |msg: String| CliError::Input(format!("{}: {msg}", path.display()));
    let mut reader = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let headers = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let probe_col = col("probe_mhz").ok_or_else(|| bad("missing probe_mhz column".into()))?;
    let value_col = col("reflectivity").ok_or_else(|| bad("missing reflectivity column".into()))?;
    let err_col = col("stderr");
    let (mut probe, mut values, mut errs) = (Vec::new(), Vec::new(), Vec::new());
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let line = i + 2;
        let num = |c: usize| -> Result<f64, CliError> {
            let cell = rec.get(c).unwrap_or("").trim();
            cell.parse()
                .map_err(|_| bad(format!("line {line}: cannot parse {cell:?} as a number")))
        };
        probe.push(num(probe_col)?);
        values.push(num(value_col)?);
        if let Some(c) = err_col {
            if rec.get(c).is_some_and(|s| !s.trim().is_empty()) {
                errs.push(num(c)?);
            }
        }
    }
    // zero errors (e.g. from a single-sample spectrum) cannot weight a fit
    let stderr = if errs.len() == probe.len() && !errs.is_empty() && errs.iter().all(|e| *e > 0.0) {
        Some(errs)
    } else {
        None
    };
    FitData::new(probe, values, stderr).map_err(|e| bad(e.to_string()))
}
