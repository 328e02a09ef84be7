//! Result files: CSV tables, JSON reports and SVG plots.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::ser::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::report::LeafRow;
use crate::CliError;

/// `x` with 17 significant digits.
pub fn sig17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string().to_lowercase()
    }
}

fn opt17(x: Option<f64>) -> String {
    x.map(sig17).unwrap_or_default()
}

/// Pretty JSON whose floats carry 17 significant digits.
struct Sig17Formatter<'a>(PrettyFormatter<'a>);

impl Formatter for Sig17Formatter<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(sig17(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17Formatter(PrettyFormatter::new()));
    value.serialize(&mut ser).map_err(|e| CliError::Numeric(e.to_string()))?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io { path: path.to_path_buf(), message: e.to_string() }
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    }
    fs::write(path, text).map_err(|e| io_error(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    write_text(path, &to_json(value)?)
}

/// CSV text with the given header; every row must match its width.
pub fn csv_text(header: &[&str], rows: &[Vec<String>]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| CliError::Numeric(e.to_string()))?;
    for r in rows {
        w.write_record(r).map_err(|e| CliError::Numeric(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Numeric(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv of UTF-8 fields"))
}

pub const FOLIATION_HEADER: [&str; 7] = ["tau", "t_mean", "u_min", "u_max", "udot_min", "lambda_min", "converged"];

pub fn foliation_csv(rows: &[LeafRow]) -> Result<String, CliError> {
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                sig17(r.tau),
                sig17(r.t_mean),
                sig17(r.u_min),
                sig17(r.u_max),
                opt17(r.udot_min),
                opt17(r.lambda_min),
                r.converged.to_string(),
            ]
        })
        .collect();
    csv_text(&FOLIATION_HEADER, &body)
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 56.0;

fn span(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !(lo.is_finite() && hi.is_finite()) {
        (-1.0, 1.0)
    } else if hi - lo <= 1e-300 {
        (lo - 1.0, hi + 1.0)
    } else {
        (lo, hi)
    }
}

/// τ against mean chart time, degenerate leaves marked in red.
pub fn foliation_svg(rows: &[LeafRow]) -> String {
    let (x0, x1) = span(rows.iter().map(|r| r.t_mean));
    let (y0, y1) = span(rows.iter().map(|r| r.tau));
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    svg.push_str(&format!(
        "<path d=\"M {left} {top} L {left} {bottom} L {right} {bottom}\" stroke=\"black\" fill=\"none\"/>\n"
    ));
    let label = |x: f64, y: f64, anchor: &str, text: String| {
        format!("<text x=\"{x:.2}\" y=\"{y:.2}\" font-size=\"12\" text-anchor=\"{anchor}\">{text}</text>\n")
    };
    svg.push_str(&label(left, bottom + 18.0, "start", format!("{x0:.4}")));
    svg.push_str(&label(right, bottom + 18.0, "end", format!("{x1:.4}")));
    svg.push_str(&label(left - 6.0, bottom, "end", format!("{y0:.4}")));
    svg.push_str(&label(left - 6.0, top + 4.0, "end", format!("{y1:.4}")));
    svg.push_str(&label(0.5 * WIDTH, HEIGHT - 12.0, "middle", "t".into()));
    svg.push_str(&label(16.0, 0.5 * HEIGHT, "middle", "τ".into()));
    if (y0..=y1).contains(&0.0) {
        let z = sy(0.0);
        svg.push_str(&format!(
            "<path d=\"M {left} {z:.2} L {right} {z:.2}\" stroke=\"#bbbbbb\" stroke-dasharray=\"4 4\"/>\n"
        ));
    }
    let pts: Vec<String> =
        rows.iter().filter(|r| !r.degenerate).map(|r| format!("{:.2},{:.2}", sx(r.t_mean), sy(r.tau))).collect();
    if !pts.is_empty() {
        svg.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"#1f4e99\" stroke-width=\"1.5\"/>\n",
            pts.join(" ")
        ));
    }
    for r in rows.iter().filter(|r| r.degenerate) {
        svg.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"#c0392b\"><title>degenerate leaf tau={}</title></circle>\n",
            sx(r.t_mean),
            sy(r.tau),
            sig17(r.tau)
        ));
    }
    svg.push_str("</svg>\n");
    svg
}
