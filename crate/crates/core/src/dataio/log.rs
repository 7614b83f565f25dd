//! CSV trial log.
//!
//! ```text
//! # scenario=small_range
//! # seed=7
//! # sensor_hash=3f2a91c0d4e5b6a7
//! t,T,Z1,Z2,Z3,Z4,X1,X2,X3,X4,Y1,Y2,Y3,Y4,Fx,Fy,Fz,Mx,My,Mz
//! 0,25,2530,2528,...
//! ```
//!
//! Floats use the shortest representation that parses back to the same
//! value, so write → load is exact.

use std::fs;
use std::path::Path;

use super::{atomic_write, DataError, Trial, TrialMeta};
use crate::calibration::LabeledFrame;
use crate::sensor::{CapacitanceFrame, N_CHANNELS};
use crate::types::Wrench;

pub const LOG_HEADER: [&str; 20] = [
    "t", "T", "Z1", "Z2", "Z3", "Z4", "X1", "X2", "X3", "X4", "Y1", "Y2", "Y3", "Y4", "Fx", "Fy",
    "Fz", "Mx", "My", "Mz",
];

pub fn format_log(trial: &Trial) -> String {
    let mut out = String::new();
    out.push_str(&format!("# scenario={}\n", trial.meta.scenario));
    out.push_str(&format!("# seed={}\n", trial.meta.seed));
    out.push_str(&format!("# sensor_hash={}\n", trial.meta.sensor_hash));
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(LOG_HEADER).expect("in-memory write");
    let mut row: Vec<String> = Vec::with_capacity(LOG_HEADER.len());
    for s in &trial.samples {
        row.clear();
        row.push(s.frame.timestamp.to_string());
        row.push(s.frame.temperature.to_string());
        row.extend(s.frame.channels().iter().map(|c| c.to_string()));
        row.extend(s.wrench.to_array().iter().map(|v| v.to_string()));
        w.write_record(&row).expect("in-memory write");
    }
    let body = w.into_inner().expect("in-memory flush");
    out.push_str(std::str::from_utf8(&body).expect("ascii csv"));
    out
}

pub fn write_log(trial: &Trial, path: &Path) -> Result<(), DataError> {
    atomic_write(path, format_log(trial).as_bytes())
}

pub fn load_log(path: &Path) -> Result<Trial, DataError> {
    let text = fs::read_to_string(path).map_err(|e| DataError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_log(&text)
}

pub fn parse_log(text: &str) -> Result<Trial, DataError> {
    let mut meta = TrialMeta {
        scenario: String::new(),
        seed: 0,
        sensor_hash: String::new(),
    };
    // leading `# key=value` lines
    let mut offset = 0usize;
    let mut meta_lines = 0u64;
    for line in text.split_inclusive('\n') {
        let Some(rest) = line.trim_end_matches(['\r', '\n']).strip_prefix('#') else {
            break;
        };
        meta_lines += 1;
        offset += line.len();
        if let Some((k, v)) = rest.trim().split_once('=') {
            match k.trim() {
                "scenario" => meta.scenario = v.trim().to_string(),
                "sensor_hash" => meta.sensor_hash = v.trim().to_string(),
                "seed" => {
                    meta.seed = v.trim().parse().map_err(|_| DataError::BadValue {
                        line: meta_lines,
                        column: "seed".into(),
                        value: v.trim().to_string(),
                    })?
                }
                _ => {}
            }
        }
    }

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text[offset..].as_bytes());
    let mut records = reader.records();
    let header_line = meta_lines + 1;
    let header = match records.next() {
        Some(Ok(r)) => r,
        Some(Err(e)) => {
            return Err(DataError::MalformedHeader {
                line: header_line,
                found: e.to_string(),
            })
        }
        None => {
            return Err(DataError::MalformedHeader {
                line: header_line,
                found: String::new(),
            })
        }
    };
    if header.len() != LOG_HEADER.len() || header.iter().zip(LOG_HEADER).any(|(a, b)| a != b) {
        return Err(DataError::MalformedHeader {
            line: header_line,
            found: header.iter().collect::<Vec<_>>().join(","),
        });
    }

    let mut samples = Vec::new();
    let mut prev_t: Option<f64> = None;
    for rec in records {
        let rec = rec.map_err(|e| DataError::BadValue {
            line: e.position().map_or(0, |p| p.line()) + meta_lines,
            column: String::new(),
            value: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line()) + meta_lines;
        if rec.len() != LOG_HEADER.len() {
            return Err(DataError::ColumnCount {
                line,
                got: rec.len(),
                expected: LOG_HEADER.len(),
            });
        }
        let float = |i: usize| -> Result<f64, DataError> {
            rec[i]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| DataError::BadValue {
                    line,
                    column: LOG_HEADER[i].into(),
                    value: rec[i].to_string(),
                })
        };
        let t = float(0)?;
        if let Some(p) = prev_t {
            if !(t > p) {
                return Err(DataError::NonMonotonic { line, prev: p, t });
            }
        }
        prev_t = Some(t);
        let temp = float(1)?;
        let mut counts = [0u32; N_CHANNELS];
        for (k, c) in counts.iter_mut().enumerate() {
            *c = rec[2 + k].parse().map_err(|_| DataError::BadValue {
                line,
                column: LOG_HEADER[2 + k].into(),
                value: rec[2 + k].to_string(),
            })?;
        }
        let mut w = [0.0; 6];
        for (k, v) in w.iter_mut().enumerate() {
            *v = float(14 + k)?;
        }
        samples.push(LabeledFrame {
            frame: CapacitanceFrame::from_channels(counts, t, temp),
            wrench: Wrench::from_array(w),
        });
    }
    Ok(Trial { meta, samples })
}
