//! Trace files.
//!
//! Capacity traces are CSV with header `time_s,mbps`; viewport traces are
//! CSV with header `segment,pitch_deg,yaw_deg`, one row per segment
//! numbered from 1.

use std::path::Path;

use crate::model::{CapacityTrace, FovExtent, Viewport, ViewportTrace};
use crate::{Error, Result};

pub const CAPACITY_HEADER: [&str; 2] = ["time_s", "mbps"];
pub const VIEWPORT_HEADER: [&str; 3] = ["segment", "pitch_deg", "yaw_deg"];

/// Which kind of trace a CSV header announces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceKind {
    Capacity,
    Viewport,
}

pub(crate) fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

struct Rows {
    path: String,
    /// `(line, fields)` of every data row.
    rows: Vec<(usize, Vec<f64>)>,
}

fn parse_rows(text: &str, path: &str, header: &[&str]) -> Result<Rows> {
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_string(),
        line,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let found = reader
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(parse_err(
            1,
            format!("expected header `{}`, found `{}`", header.join(","), found.iter().collect::<Vec<_>>().join(",")),
        ));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != header.len() {
            return Err(parse_err(
                line,
                format!("expected {} fields, found {}", header.len(), record.len()),
            ));
        }
        let fields = record
            .iter()
            .zip(header)
            .map(|(field, name)| {
                field
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| parse_err(line, format!("{name}: `{field}` is not a finite number")))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push((line, fields));
    }
    Ok(Rows {
        path: path.to_string(),
        rows,
    })
}

/// Keeps the sample in effect at each whole second when any two samples
/// are less than a second apart.
pub fn resample_1hz(samples: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let dense = samples.windows(2).any(|w| w[1].0 - w[0].0 < 1.0);
    if !dense || samples.is_empty() {
        return samples.to_vec();
    }
    let last = samples[samples.len() - 1].0;
    let mut out = Vec::with_capacity(last as usize + 1);
    let mut idx = 0;
    let mut t = 0.0;
    while t <= last {
        while idx + 1 < samples.len() && samples[idx + 1].0 <= t {
            idx += 1;
        }
        out.push((t, samples[idx].1));
        t += 1.0;
    }
    out
}

/// Parses capacity CSV text, resampling to 1 Hz when denser.
pub fn parse_capacity(text: &str, path: &str) -> Result<CapacityTrace> {
    let rows = parse_rows(text, path, &CAPACITY_HEADER)?;
    for (line, f) in &rows.rows {
        if !(f[1] > 0.0) {
            return Err(Error::Validation(format!(
                "{}:{line}: capacity {} Mbps must be positive",
                rows.path, f[1]
            )));
        }
    }
    for pair in rows.rows.windows(2) {
        let ((_, a), (line, b)) = (&pair[0], &pair[1]);
        if !(b[0] > a[0]) {
            return Err(Error::Validation(format!(
                "{}:{line}: timestamps must strictly increase ({} then {})",
                rows.path, a[0], b[0]
            )));
        }
    }
    let samples: Vec<(f64, f64)> = rows.rows.iter().map(|(_, f)| (f[0], f[1])).collect();
    CapacityTrace::from_samples(&resample_1hz(&samples))
        .map_err(|e| Error::Validation(format!("{}: {}", rows.path, strip_prefix(e))))
}

/// Parses viewport CSV text; rows must be segments `1, 2, ...` in order.
pub fn parse_viewport(text: &str, path: &str, extent: FovExtent) -> Result<ViewportTrace> {
    let rows = parse_rows(text, path, &VIEWPORT_HEADER)?;
    let mut viewports = Vec::with_capacity(rows.rows.len());
    for (i, (line, f)) in rows.rows.iter().enumerate() {
        let at = |msg: String| Error::Validation(format!("{}:{line}: {msg}", rows.path));
        if f[0] != (i + 1) as f64 {
            return Err(at(format!("expected segment {}, found {}", i + 1, f[0])));
        }
        viewports.push(Viewport::new(f[1], f[2]).map_err(|e| at(strip_prefix(e)))?);
    }
    if viewports.is_empty() {
        return Err(Error::Validation(format!("{}: viewport trace is empty", rows.path)));
    }
    ViewportTrace::new(viewports, extent)
}

fn strip_prefix(e: Error) -> String {
    match e {
        Error::Validation(m) | Error::InvalidArgument(m) => m,
        other => other.to_string(),
    }
}

pub fn read_capacity(path: &Path) -> Result<CapacityTrace> {
    parse_capacity(&read_file(path)?, &path.display().to_string())
}

pub fn read_viewport(path: &Path, extent: FovExtent) -> Result<ViewportTrace> {
    parse_viewport(&read_file(path)?, &path.display().to_string(), extent)
}

/// Header-based detection of a trace file's kind.
pub fn detect_kind(text: &str) -> Option<TraceKind> {
    let header: Vec<&str> = text.lines().next()?.split(',').map(str::trim).collect();
    if header == CAPACITY_HEADER {
        Some(TraceKind::Capacity)
    } else if header == VIEWPORT_HEADER {
        Some(TraceKind::Viewport)
    } else {
        None
    }
}

pub fn capacity_csv(trace: &CapacityTrace) -> String {
    let mut out = CAPACITY_HEADER.join(",");
    out.push('\n');
    for (t, d) in trace.samples() {
        out.push_str(&format!("{t},{d}\n"));
    }
    out
}

pub fn viewport_csv(trace: &ViewportTrace) -> String {
    let mut out = VIEWPORT_HEADER.join(",");
    out.push('\n');
    for (i, v) in trace.viewports().iter().enumerate() {
        out.push_str(&format!("{},{},{}\n", i + 1, v.pitch, v.yaw));
    }
    out
}
