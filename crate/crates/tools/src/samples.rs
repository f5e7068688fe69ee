//! Conjunction sample tables for the empirical-Bayes fit.
//!
//! CSV with header `event_id,x1_m,x2_m,d1_m,d2_m`.

use std::io::{Read, Write};

use conjunction_core::priors::ConjunctionSample;

use crate::error::{ToolError, ToolResult};

pub const SAMPLE_HEADER: [&str; 5] = ["event_id", "x1_m", "x2_m", "d1_m", "d2_m"];

#[derive(Debug, Clone, PartialEq)]
pub struct SampleRow {
    pub event_id: String,
    pub sample: ConjunctionSample,
}

pub fn read_samples<R: Read>(reader: R) -> ToolResult<Vec<SampleRow>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header != SAMPLE_HEADER {
        return Err(ToolError::Input(format!(
            "sample file header must be `{}`, found `{}`",
            SAMPLE_HEADER.join(","),
            header.join(",")
        )));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let field = |j: usize| -> ToolResult<f64> {
            rec[j].parse::<f64>().map_err(|_| {
                ToolError::Input(format!("line {line}: column {}: cannot parse `{}`", SAMPLE_HEADER[j], &rec[j]))
            })
        };
        let sample = ConjunctionSample {
            x1: field(1)?,
            x2: field(2)?,
            d1: field(3)?,
            d2: field(4)?,
        };
        if !(sample.d1 > 0.0 && sample.d2 > 0.0) {
            return Err(ToolError::Input(format!("line {line}: d1_m and d2_m must be positive")));
        }
        rows.push(SampleRow {
            event_id: rec[0].to_owned(),
            sample,
        });
    }
    Ok(rows)
}

pub fn write_samples<W: Write>(writer: W, rows: &[SampleRow]) -> ToolResult<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(SAMPLE_HEADER)?;
    for r in rows {
        let s = r.sample;
        w.write_record([
            r.event_id.clone(),
            format!("{:?}", s.x1),
            format!("{:?}", s.x2),
            format!("{:?}", s.d1),
            format!("{:?}", s.d2),
        ])?;
    }
    w.flush()?;
    Ok(())
}
