//! Keyword = value conjunction data messages.
//!
//! Records are blocks of `KEY = VALUE [unit]` lines separated by blank
//! lines. Lengths may be given in `m` or `km`, speeds in `m/s` or `km/s` and
//! covariance entries in `m**2` or `km**2`; everything is stored in metres.

use std::fmt::Write as _;

use chrono::{DateTime, NaiveDateTime};
use conjunction_core::encounter::{symmetrize, CdmRecord, Mat3, Vec3};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}: {}{message}", key.as_ref().map(|k| format!("{k}: ")).unwrap_or_default())]
pub struct KvnError {
    pub line: usize,
    pub key: Option<String>,
    pub message: String,
}

impl KvnError {
    fn new(line: usize, key: Option<&str>, message: impl Into<String>) -> Self {
        Self {
            line,
            key: key.map(str::to_owned),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParseMode {
    /// The first malformed block aborts the parse.
    #[default]
    Strict,
    /// Malformed blocks are skipped and reported.
    Lenient,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParsedKvn {
    pub records: Vec<CdmRecord>,
    pub diagnostics: Vec<KvnError>,
}

const MANDATORY: [&str; 15] = [
    "EVENT_ID",
    "TCA",
    "REL_POSITION_X",
    "REL_POSITION_Y",
    "REL_POSITION_Z",
    "REL_VELOCITY_X",
    "REL_VELOCITY_Y",
    "REL_VELOCITY_Z",
    "CXX",
    "CYY",
    "CZZ",
    "CXY",
    "CXZ",
    "CYZ",
    "HBR",
];

// Optional lower-triangle entries checked against their mirror.
const MIRRORS: [(&str, &str); 3] = [("CYX", "CXY"), ("CZX", "CXZ"), ("CZY", "CYZ")];

#[derive(Clone, Copy)]
enum Quantity {
    Length,
    Speed,
    Area,
}

fn quantity(key: &str) -> Option<Quantity> {
    match key {
        k if k.starts_with("REL_POSITION_") || k == "HBR" => Some(Quantity::Length),
        k if k.starts_with("REL_VELOCITY_") => Some(Quantity::Speed),
        "CXX" | "CYY" | "CZZ" | "CXY" | "CXZ" | "CYZ" | "CYX" | "CZX" | "CZY" => Some(Quantity::Area),
        _ => None,
    }
}

fn unit_factor(q: Quantity, unit: Option<&str>) -> Option<f64> {
    let unit = match unit {
        None => return Some(1.0),
        Some(u) => u.to_ascii_lowercase(),
    };
    match (q, unit.as_str()) {
        (Quantity::Length, "m") => Some(1.0),
        (Quantity::Length, "km") => Some(1e3),
        (Quantity::Speed, "m/s") => Some(1.0),
        (Quantity::Speed, "km/s") => Some(1e3),
        (Quantity::Area, "m**2" | "m2" | "m^2") => Some(1.0),
        (Quantity::Area, "km**2" | "km2" | "km^2") => Some(1e6),
        _ => None,
    }
}

struct Entry<'a> {
    line: usize,
    value: &'a str,
    unit: Option<&'a str>,
}

struct Block<'a> {
    start: usize,
    entries: Vec<(&'a str, Entry<'a>)>,
}

impl<'a> Block<'a> {
    fn get(&self, key: &str) -> Option<&Entry<'a>> {
        self.entries.iter().find(|(k, _)| *k == key).map(|(_, e)| e)
    }
}

fn split_value(raw: &str) -> (&str, Option<&str>) {
    let raw = raw.trim();
    if let Some(open) = raw.rfind('[') {
        if raw.ends_with(']') {
            return (raw[..open].trim_end(), Some(raw[open + 1..raw.len() - 1].trim()));
        }
    }
    (raw, None)
}

fn split_blocks(text: &str) -> Result<Vec<Block<'_>>, KvnError> {
    let mut blocks = Vec::new();
    let mut current: Option<Block> = None;
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.trim();
        if line.is_empty() {
            if let Some(b) = current.take() {
                blocks.push(b);
            }
            continue;
        }
        if line.starts_with("COMMENT") {
            continue;
        }
        let block = current.get_or_insert_with(|| Block {
            start: line_no,
            entries: Vec::new(),
        });
        let Some((key, rest)) = line.split_once('=') else {
            return Err(KvnError::new(line_no, None, "expected `KEY = VALUE`"));
        };
        let key = key.trim();
        if key.is_empty() {
            return Err(KvnError::new(line_no, None, "empty key"));
        }
        let (value, unit) = split_value(rest);
        block.entries.push((key, Entry { line: line_no, value, unit }));
    }
    if let Some(b) = current.take() {
        blocks.push(b);
    }
    Ok(blocks)
}

fn number(block: &Block, key: &'static str) -> Result<f64, KvnError> {
    let e = block
        .get(key)
        .ok_or_else(|| KvnError::new(block.start, Some(key), "missing mandatory key"))?;
    let q = quantity(key).expect("numeric key");
    let factor = unit_factor(q, e.unit).ok_or_else(|| {
        KvnError::new(e.line, Some(key), format!("unsupported unit `{}`", e.unit.unwrap_or("")))
    })?;
    let v: f64 = e
        .value
        .parse()
        .map_err(|_| KvnError::new(e.line, Some(key), format!("cannot parse `{}` as a number", e.value)))?;
    if !v.is_finite() {
        return Err(KvnError::new(e.line, Some(key), "value is not finite"));
    }
    Ok(v * factor)
}

fn parse_tca(value: &str) -> Option<()> {
    if DateTime::parse_from_rfc3339(value).is_ok() {
        return Some(());
    }
    let trimmed = value.strip_suffix('Z').unwrap_or(value);
    ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%jT%H:%M:%S%.f"]
        .iter()
        .find_map(|fmt| NaiveDateTime::parse_from_str(trimmed, fmt).ok())
        .map(|_| ())
}

fn parse_block(block: &Block) -> Result<CdmRecord, KvnError> {
    for (i, (k, e)) in block.entries.iter().enumerate() {
        if block.entries[..i].iter().any(|(other, _)| other == k) {
            return Err(KvnError::new(e.line, Some(k), "duplicate key"));
        }
    }
    if let Some(missing) = MANDATORY.iter().find(|k| block.get(k).is_none()) {
        return Err(KvnError::new(block.start, Some(missing), "missing mandatory key"));
    }
    let event_id = block.get("EVENT_ID").expect("checked").value.to_owned();
    let tca_entry = block.get("TCA").expect("checked");
    if parse_tca(tca_entry.value).is_none() {
        return Err(KvnError::new(
            tca_entry.line,
            Some("TCA"),
            format!("`{}` is not an ISO-8601 timestamp", tca_entry.value),
        ));
    }
    let rel_position = Vec3::new(
        number(block, "REL_POSITION_X")?,
        number(block, "REL_POSITION_Y")?,
        number(block, "REL_POSITION_Z")?,
    );
    let rel_velocity = Vec3::new(
        number(block, "REL_VELOCITY_X")?,
        number(block, "REL_VELOCITY_Y")?,
        number(block, "REL_VELOCITY_Z")?,
    );
    let (cxx, cyy, czz) = (number(block, "CXX")?, number(block, "CYY")?, number(block, "CZZ")?);
    let (cxy, cxz, cyz) = (number(block, "CXY")?, number(block, "CXZ")?, number(block, "CYZ")?);
    let mut lower = [cxy, cxz, cyz];
    for (slot, (mirror, _)) in lower.iter_mut().zip(MIRRORS) {
        if block.get(mirror).is_some() {
            *slot = number(block, mirror)?;
        }
    }
    let raw: Mat3 = [[cxx, cxy, cxz], [lower[0], cyy, cyz], [lower[1], lower[2], czz]];
    let pos_cov = symmetrize(&raw).map_err(|e| {
        let line = MIRRORS
            .iter()
            .filter_map(|(m, _)| block.get(m))
            .map(|e| e.line)
            .next()
            .unwrap_or(block.start);
        KvnError::new(line, Some("CXY"), format!("covariance rejected: {e}"))
    })?;
    let hbr = number(block, "HBR")?;
    if hbr < 0.0 {
        return Err(KvnError::new(block.get("HBR").expect("checked").line, Some("HBR"), "must be non-negative"));
    }
    if rel_velocity.norm() == 0.0 {
        return Err(KvnError::new(
            block.get("REL_VELOCITY_X").expect("checked").line,
            Some("REL_VELOCITY_X"),
            "relative velocity is zero",
        ));
    }
    Ok(CdmRecord {
        event_id,
        tca: tca_entry.value.to_owned(),
        rel_position,
        rel_velocity,
        pos_cov,
        hbr,
    })
}

/// Parse every record in `text`.
pub fn parse_cdm_kvn(text: &str, mode: ParseMode) -> Result<ParsedKvn, KvnError> {
    let mut out = ParsedKvn::default();
    let blocks = match split_blocks(text) {
        Ok(b) => b,
        Err(e) => match mode {
            ParseMode::Strict => return Err(e),
            ParseMode::Lenient => return lenient_by_lines(text, e),
        },
    };
    for block in blocks.iter().filter(|b| !b.entries.is_empty()) {
        match (parse_block(block), mode) {
            (Ok(rec), _) => out.records.push(rec),
            (Err(e), ParseMode::Strict) => return Err(e),
            (Err(e), ParseMode::Lenient) => out.diagnostics.push(e),
        }
    }
    Ok(out)
}

// A syntax error aborts block splitting; drop the offending line's block and
// retry on the rest.
fn lenient_by_lines(text: &str, first: KvnError) -> Result<ParsedKvn, KvnError> {
    let lines: Vec<&str> = text.lines().collect();
    let bad = first.line - 1;
    let start = (0..bad).rev().find(|&i| lines[i].trim().is_empty()).map_or(0, |i| i + 1);
    let end = (bad..lines.len()).find(|&i| lines[i].trim().is_empty()).unwrap_or(lines.len());
    let blanked: String = lines
        .iter()
        .enumerate()
        .map(|(i, l)| if (start..end).contains(&i) { "" } else { l })
        .collect::<Vec<_>>()
        .join("\n");
    let mut rest = parse_cdm_kvn(&blanked, ParseMode::Lenient)?;
    rest.diagnostics.insert(0, first);
    rest.diagnostics.sort_by_key(|d| d.line);
    Ok(rest)
}

/// Serialize records in metres so that parsing the output reproduces them.
pub fn write_cdm_kvn(records: &[CdmRecord]) -> String {
    let mut s = String::new();
    for (i, r) in records.iter().enumerate() {
        if i > 0 {
            s.push('\n');
        }
        let c = &r.pos_cov;
        let _ = writeln!(s, "EVENT_ID = {}", r.event_id);
        let _ = writeln!(s, "TCA = {}", r.tca);
        for (axis, v) in ["X", "Y", "Z"].iter().zip(r.rel_position.as_array()) {
            let _ = writeln!(s, "REL_POSITION_{axis} = {v:?} [m]");
        }
        for (axis, v) in ["X", "Y", "Z"].iter().zip(r.rel_velocity.as_array()) {
            let _ = writeln!(s, "REL_VELOCITY_{axis} = {v:?} [m/s]");
        }
        for (key, v) in [
            ("CXX", c[0][0]),
            ("CYY", c[1][1]),
            ("CZZ", c[2][2]),
            ("CXY", c[0][1]),
            ("CXZ", c[0][2]),
            ("CYZ", c[1][2]),
        ] {
            let _ = writeln!(s, "{key} = {v:?} [m**2]");
        }
        let _ = writeln!(s, "HBR = {:?} [m]", r.hbr);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
COMMENT minimal record
EVENT_ID = E-1
TCA = 2026-03-01T12:34:56.789Z
REL_POSITION_X = 100.5 [m]
REL_POSITION_Y = -20 [m]
REL_POSITION_Z = 3.25 [m]
REL_VELOCITY_X = 1.0 [km/s]
REL_VELOCITY_Y = -7.5 [km/s]
REL_VELOCITY_Z = 0.25 [km/s]
CXX = 0.01 [km**2]
CYY = 40000 [m**2]
CZZ = 2500
CXY = 100
CXZ = -50
CYZ = 25
HBR = 12 [m]
ORIGINATOR = TEST
";

    #[test]
    fn echo_minimal_block() {
        let out = parse_cdm_kvn(MINIMAL, ParseMode::Strict).unwrap();
        assert_eq!(out.records.len(), 1);
        let r = &out.records[0];
        assert_eq!(r.event_id, "E-1");
        assert_eq!(r.tca, "2026-03-01T12:34:56.789Z");
        assert_eq!(r.rel_position, Vec3::new(100.5, -20.0, 3.25));
        assert_eq!(r.rel_velocity, Vec3::new(1000.0, -7500.0, 250.0));
        assert_eq!(r.pos_cov, [[10_000.0, 100.0, -50.0], [100.0, 40_000.0, 25.0], [-50.0, 25.0, 2500.0]]);
        assert_eq!(r.hbr, 12.0);
    }

    #[test]
    fn missing_velocity_names_first_key() {
        let text: String = MINIMAL.lines().filter(|l| !l.starts_with("REL_VELOCITY")).map(|l| format!("{l}\n")).collect();
        let e = parse_cdm_kvn(&text, ParseMode::Strict).unwrap_err();
        assert_eq!(e.key.as_deref(), Some("REL_VELOCITY_X"));
        assert_eq!(e.line, 2);
    }

    #[test]
    fn bad_number_reports_line() {
        let text = MINIMAL.replace("CYY = 40000 [m**2]", "CYY = 4e4x [m**2]");
        let e = parse_cdm_kvn(&text, ParseMode::Strict).unwrap_err();
        assert_eq!(e.key.as_deref(), Some("CYY"));
        assert_eq!(e.line, 11);
        assert!(e.to_string().starts_with("line 11: CYY:"));
    }

    #[test]
    fn asymmetric_mirror_rejected_small_asymmetry_accepted() {
        let text = format!("{MINIMAL}CYX = 300\n");
        let e = parse_cdm_kvn(&text, ParseMode::Strict).unwrap_err();
        assert!(e.message.contains("covariance"));
        assert_eq!(e.line, 18);
        let text = format!("{MINIMAL}CYX = 100.00000000001\n");
        let r = &parse_cdm_kvn(&text, ParseMode::Strict).unwrap().records[0];
        assert_eq!(r.pos_cov[0][1], r.pos_cov[1][0]);
    }

    #[test]
    fn rejects_bad_units_and_timestamps() {
        let e = parse_cdm_kvn(&MINIMAL.replace("REL_POSITION_X = 100.5 [m]", "REL_POSITION_X = 100.5 [m/s]"), ParseMode::Strict)
            .unwrap_err();
        assert_eq!(e.key.as_deref(), Some("REL_POSITION_X"));
        let e = parse_cdm_kvn(&MINIMAL.replace("2026-03-01T12:34:56.789Z", "yesterday"), ParseMode::Strict).unwrap_err();
        assert_eq!(e.key.as_deref(), Some("TCA"));
        assert!(parse_cdm_kvn(&MINIMAL.replace("2026-03-01T12:34:56.789Z", "2026-060T12:34:56"), ParseMode::Strict).is_ok());
    }

    #[test]
    fn duplicate_key_and_garbage_line() {
        let e = parse_cdm_kvn(&format!("{MINIMAL}HBR = 3\n"), ParseMode::Strict).unwrap_err();
        assert_eq!(e.message, "duplicate key");
        let e = parse_cdm_kvn(&MINIMAL.replace("ORIGINATOR = TEST", "garbage"), ParseMode::Strict).unwrap_err();
        assert_eq!(e.line, 17);
    }

    #[test]
    fn round_trip() {
        let first = parse_cdm_kvn(MINIMAL, ParseMode::Strict).unwrap().records;
        let again = parse_cdm_kvn(&write_cdm_kvn(&first), ParseMode::Strict).unwrap().records;
        assert_eq!(first, again);
    }

    #[test]
    fn lenient_skips_syntax_errors() {
        let text = format!("{MINIMAL}\n{}\n{}", MINIMAL.replace("ORIGINATOR = TEST", "oops"), MINIMAL.replace("E-1", "E-3"));
        assert!(parse_cdm_kvn(&text, ParseMode::Strict).is_err());
        let out = parse_cdm_kvn(&text, ParseMode::Lenient).unwrap();
        assert_eq!(out.records.len(), 2);
        assert_eq!(out.diagnostics.len(), 1);
        assert_eq!(out.records[1].event_id, "E-3");
    }
}
