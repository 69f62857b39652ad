//! File formats. Every writer here has a matching reader, and floats are written in
//! Rust's shortest round-trip form so that a write/read cycle is lossless.
//!
//! * Trace CSV: `#` comment lines, then `abscissa,value`.
//! * Dataset CSV: `bx_T,by_T,bz_T,observable,value_hz,sigma_hz`.
//! * FLIM text: `FLIM <nx> <ny> <pitch_nm> <bins> <bin_width_ns>`, then one line of
//!   `bins` counts per pixel, rows of constant y in order of increasing y.
//! * Amplitude CSV: one matrix row per line, `ny` rows of `nx` values.
//! * Sites CSV: `i,j,k,basis,x_nm,y_nm,z_nm,mahalanobis`.
//! * Reports: `key = value` lines.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use nvreg_core::linalg::Vector3;
use nvreg_core::locate::{DeerDataset, DeerEntry, LatticeSite, Observable};
use nvreg_core::optics::FlimImage;
use nvreg_core::sequences::SignalTrace;
use nvreg_core::spincore::FieldSetting;

use crate::error::{CliError, CliResult};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const DATASET_HEADER: [&str; 6] =
    ["bx_T", "by_T", "bz_T", "observable", "value_hz", "sigma_hz"];
pub const SITES_HEADER: [&str; 8] = [
    "i",
    "j",
    "k",
    "basis",
    "x_nm",
    "y_nm",
    "z_nm",
    "mahalanobis",
];

/// `#`-prefixed header: tool version, then `key: value` pairs, then free text blocks
/// (config echo, rendered program) with every line prefixed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Header {
    pub fields: Vec<(String, String)>,
    pub blocks: Vec<(String, String)>,
}

impl Header {
    pub fn new(command: &str) -> Self {
        Self {
            fields: vec![("command".into(), command.into())],
            blocks: Vec::new(),
        }
    }

    pub fn field(mut self, key: &str, value: impl ToString) -> Self {
        self.fields.push((key.into(), value.to_string()));
        self
    }

    pub fn block(mut self, name: &str, text: &str) -> Self {
        self.blocks.push((name.into(), text.into()));
        self
    }

    pub fn render(&self) -> String {
        let mut out = format!("# nvreg {VERSION}\n");
        for (k, v) in &self.fields {
            let _ = writeln!(out, "# {k}: {v}");
        }
        for (name, text) in &self.blocks {
            let _ = writeln!(out, "# --- {name}");
            for line in text.lines() {
                let _ = writeln!(out, "#   {line}");
            }
        }
        out
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.fields
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    fn parse(lines: &[&str]) -> Self {
        let mut h = Header::default();
        let mut current: Option<(String, String)> = None;
        for line in lines {
            let body = line.strip_prefix('#').unwrap_or(line);
            if let Some(name) = body.strip_prefix(" --- ") {
                h.blocks.extend(current.take());
                current = Some((name.to_owned(), String::new()));
            } else if let (Some((_, text)), Some(l)) = (current.as_mut(), body.strip_prefix("   "))
            {
                text.push_str(l);
                text.push('\n');
            } else if let Some((k, v)) = body.trim().split_once(": ") {
                h.fields.push((k.to_owned(), v.to_owned()));
            }
        }
        h.blocks.extend(current);
        h
    }
}

pub fn write_trace(
    out: &mut impl Write,
    header: &Header,
    trace: &SignalTrace,
) -> std::io::Result<()> {
    out.write_all(header.render().as_bytes())?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["abscissa", "value"])?;
    for (x, y) in trace.abscissa.iter().zip(&trace.values) {
        w.write_record([x.to_string(), y.to_string()])?;
    }
    w.flush()
}

fn split_header(text: &str) -> (Vec<&str>, String) {
    let mut header = Vec::new();
    let mut body = String::new();
    for line in text.lines() {
        if line.starts_with('#') {
            header.push(line);
        } else {
            body.push_str(line);
            body.push('\n');
        }
    }
    (header, body)
}

fn float(path: &Path, what: &str, s: &str) -> CliResult<f64> {
    s.trim()
        .parse()
        .map_err(|_| CliError::format(path, format!("{what}: `{s}` is not a number")))
}

pub fn read_trace(path: &Path, text: &str) -> CliResult<(Header, SignalTrace)> {
    let (head, body) = split_header(text);
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let cols = r
        .headers()
        .map_err(|e| CliError::format(path, e.to_string()))?
        .clone();
    if cols.iter().collect::<Vec<_>>() != ["abscissa", "value"] {
        return Err(CliError::format(path, "expected columns abscissa,value"));
    }
    let mut trace = SignalTrace::default();
    for rec in r.records() {
        let rec = rec.map_err(|e| CliError::format(path, e.to_string()))?;
        trace.abscissa.push(float(path, "abscissa", &rec[0])?);
        trace.values.push(float(path, "value", &rec[1])?);
    }
    let header = Header::parse(&head);
    trace.metadata = header.fields.clone();
    Ok((header, trace))
}

pub fn write_dataset(out: &mut impl Write, dataset: &DeerDataset) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(DATASET_HEADER)?;
    for e in dataset.entries() {
        let b = e.field.b();
        w.write_record([
            b.x.to_string(),
            b.y.to_string(),
            b.z.to_string(),
            e.observable.name().to_owned(),
            e.value.to_string(),
            e.sigma.to_string(),
        ])?;
    }
    w.flush()
}

pub fn read_dataset(path: &Path, text: &str) -> CliResult<DeerDataset> {
    let (_, body) = split_header(text);
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(body.as_bytes());
    let cols = r
        .headers()
        .map_err(|e| CliError::format(path, e.to_string()))?
        .clone();
    if cols.iter().collect::<Vec<_>>() != DATASET_HEADER {
        return Err(CliError::format(
            path,
            format!("expected header {}", DATASET_HEADER.join(",")),
        ));
    }
    let mut entries = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| CliError::format(path, e.to_string()))?;
        let at = |what: &str| format!("row {}: {what}", row + 1);
        let b = Vector3::new(
            float(path, &at("bx_T"), &rec[0])?,
            float(path, &at("by_T"), &rec[1])?,
            float(path, &at("bz_T"), &rec[2])?,
        );
        entries.push(DeerEntry {
            field: FieldSetting::new(b).map_err(|e| CliError::format(path, at(&e.to_string())))?,
            observable: rec[3]
                .parse::<Observable>()
                .map_err(|e| CliError::format(path, at(&e.to_string())))?,
            value: float(path, &at("value_hz"), &rec[4])?,
            sigma: float(path, &at("sigma_hz"), &rec[5])?,
        });
    }
    DeerDataset::new(entries).map_err(|e| CliError::format(path, e.to_string()))
}

pub fn write_flim(out: &mut impl Write, image: &FlimImage) -> std::io::Result<()> {
    writeln!(
        out,
        "FLIM {} {} {} {} {}",
        image.nx(),
        image.ny(),
        image.pitch(),
        image.bins(),
        image.bin_width()
    )?;
    let mut line = String::new();
    for pixel in image.counts().chunks(image.bins()) {
        line.clear();
        for (i, c) in pixel.iter().enumerate() {
            if i > 0 {
                line.push(' ');
            }
            let _ = write!(line, "{c}");
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn read_flim(path: &Path, input: impl BufRead) -> CliResult<FlimImage> {
    let mut lines = input.lines();
    let io = |e| CliError::io(path, e);
    let header = lines
        .next()
        .transpose()
        .map_err(io)?
        .ok_or_else(|| CliError::format(path, "empty file"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let bad = || {
        CliError::format(
            path,
            format!("bad header `{header}`; expected FLIM nx ny pitch_nm bins bin_width_ns"),
        )
    };
    let [tag, nx, ny, pitch, bins, width] = fields.as_slice() else {
        return Err(bad());
    };
    if *tag != "FLIM" {
        return Err(bad());
    }
    let nx: usize = nx.parse().map_err(|_| bad())?;
    let ny: usize = ny.parse().map_err(|_| bad())?;
    let bins: usize = bins.parse().map_err(|_| bad())?;
    let pitch: f64 = pitch.parse().map_err(|_| bad())?;
    let width: f64 = width.parse().map_err(|_| bad())?;
    let pixels = nx
        .checked_mul(ny)
        .filter(|&n| n > 0 && n.checked_mul(bins).is_some())
        .ok_or_else(bad)?;
    let mut counts = Vec::with_capacity(pixels * bins);
    for p in 0..pixels {
        let line = lines.next().transpose().map_err(io)?.ok_or_else(|| {
            CliError::format(path, format!("expected {pixels} pixel lines, found {p}"))
        })?;
        let before = counts.len();
        for tok in line.split_whitespace() {
            counts.push(tok.parse::<u32>().map_err(|_| {
                CliError::format(path, format!("line {}: `{tok}` is not a count", p + 2))
            })?);
        }
        if counts.len() - before != bins {
            return Err(CliError::format(
                path,
                format!("line {}: expected {bins} counts", p + 2),
            ));
        }
    }
    for line in lines {
        if !line.map_err(io)?.trim().is_empty() {
            return Err(CliError::format(path, "trailing data after the last pixel"));
        }
    }
    FlimImage::new(nx, ny, pitch, bins, width, counts)
        .map_err(|e| CliError::format(path, e.to_string()))
}

/// `values` is row-major with `nx` columns.
pub fn write_matrix(out: &mut impl Write, values: &[f64], nx: usize) -> std::io::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    for row in values.chunks(nx) {
        w.write_record(row.iter().map(f64::to_string))?;
    }
    w.flush()
}

/// Returns the values and the column count.
pub fn read_matrix(path: &Path, text: &str) -> CliResult<(Vec<f64>, usize)> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut values = Vec::new();
    let mut nx = None;
    for rec in r.records() {
        let rec = rec.map_err(|e| CliError::format(path, e.to_string()))?;
        if *nx.get_or_insert(rec.len()) != rec.len() {
            return Err(CliError::format(path, "ragged matrix"));
        }
        for v in &rec {
            values.push(float(path, "matrix", v)?);
        }
    }
    match nx {
        Some(n) if n > 0 => Ok((values, n)),
        _ => Err(CliError::format(path, "empty matrix")),
    }
}

pub fn write_sites(out: &mut impl Write, sites: &[LatticeSite]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SITES_HEADER)?;
    for s in sites {
        let p = s.position * 1e9;
        w.write_record([
            s.index[0].to_string(),
            s.index[1].to_string(),
            s.index[2].to_string(),
            s.basis.to_string(),
            p.x.to_string(),
            p.y.to_string(),
            p.z.to_string(),
            s.mahalanobis.to_string(),
        ])?;
    }
    w.flush()
}

pub fn read_sites(path: &Path, text: &str) -> CliResult<Vec<LatticeSite>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let cols = r
        .headers()
        .map_err(|e| CliError::format(path, e.to_string()))?
        .clone();
    if cols.iter().collect::<Vec<_>>() != SITES_HEADER {
        return Err(CliError::format(
            path,
            format!("expected header {}", SITES_HEADER.join(",")),
        ));
    }
    let int = |s: &str| {
        s.parse::<i32>()
            .map_err(|_| CliError::format(path, format!("`{s}` is not an integer")))
    };
    r.records()
        .map(|rec| {
            let rec = rec.map_err(|e| CliError::format(path, e.to_string()))?;
            let basis = rec[3]
                .parse::<u8>()
                .map_err(|_| CliError::format(path, "bad basis index"))?;
            Ok(LatticeSite {
                index: [int(&rec[0])?, int(&rec[1])?, int(&rec[2])?],
                basis,
                position: Vector3::new(
                    float(path, "x_nm", &rec[4])?,
                    float(path, "y_nm", &rec[5])?,
                    float(path, "z_nm", &rec[6])?,
                ) * 1e-9,
                mahalanobis: float(path, "mahalanobis", &rec[7])?,
            })
        })
        .collect()
}

/// `key = value` report with a comment header.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub entries: Vec<(String, String)>,
}

impl Report {
    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.entries.push((key.into(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn render(&self, header: &Header) -> String {
        let mut out = header.render();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    pub fn parse(path: &Path, text: &str) -> CliResult<Self> {
        let (_, body) = split_header(text);
        let mut report = Report::default();
        for (n, line) in body
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
        {
            let (k, v) = line.split_once(" = ").ok_or_else(|| {
                CliError::format(path, format!("line {}: expected `key = value`", n + 1))
            })?;
            report.push(k.trim(), v.trim());
        }
        Ok(report)
    }
}

pub fn read_to_string(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_round_trip() {
        let h = Header::new("run")
            .field("seed", 7)
            .block("config", "[run]\nseed = 7\n\n; note\n");
        let text = h.render();
        let back = Header::parse(&text.lines().collect::<Vec<_>>());
        assert_eq!(back.get("nvreg"), None);
        assert_eq!(back.get("seed"), Some("7"));
        assert_eq!(back.blocks, h.blocks);
    }

    #[test]
    fn flim_header_is_checked() {
        let p = Path::new("x");
        for bad in [
            "",
            "FLIM 2 2 20\n",
            "FLIN 1 1 20 2 0.5\n1 2\n",
            "FLIM 1 1 20 2 0.5\n1\n",
            "FLIM 1 1 20 2 0.5\n1 2\n3\n",
        ] {
            assert!(
                matches!(read_flim(p, bad.as_bytes()), Err(CliError::Format { .. })),
                "{bad:?}"
            );
        }
        let img = read_flim(p, "FLIM 1 1 20 2 0.5\n1 2\n".as_bytes()).unwrap();
        assert_eq!(img.counts(), &[1, 2]);
    }
}
